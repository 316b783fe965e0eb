//! Greedy variable-ordering heuristics built from feature chains, and the
//! exhaustive `mods` heuristic.
//!
//! A chain `A>B>C` picks the variable to project next by minimising feature
//! `A`; ties are broken by `B`, then `C`, then by the tie policy. The chosen
//! variable is eliminated with the Lazard projection and the process repeats
//! on the projected system.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;

use crate::error::{Error, Result};
use crate::features::MergedFeature;
use crate::poly::{lazard_projection, PolySystem};

/// Largest variable count `mods_ordering` will enumerate all orderings for.
pub const MODS_GUARD: usize = 8;

/// A projection order: the first entry is projected first and is the
/// greatest variable of the ordering.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariableOrdering {
    projection_order: Vec<usize>,
}

impl VariableOrdering {
    pub fn new(projection_order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; projection_order.len()];
        for &v in &projection_order {
            if v >= seen.len() || seen[v] {
                return Err(Error::InvalidArgument(format!("{projection_order:?} is not a permutation")));
            }
            seen[v] = true;
        }
        Ok(VariableOrdering { projection_order })
    }

    /// The ordering with the given 1-based class label.
    pub fn from_class_label(nvars: usize, label: usize) -> Result<Self> {
        let count = factorial(nvars);
        if label == 0 || label > count {
            return Err(Error::InvalidArgument(format!("class label {label} out of range 1..={count}")));
        }
        let mut rank = label - 1;
        let mut pool: Vec<usize> = (0..nvars).collect();
        let mut order = Vec::with_capacity(nvars);
        for k in (0..nvars).rev() {
            let f = factorial(k);
            order.push(pool.remove(rank / f));
            rank %= f;
        }
        Ok(VariableOrdering { projection_order: order })
    }

    pub fn projection_order(&self) -> &[usize] {
        &self.projection_order
    }

    pub fn nvars(&self) -> usize {
        self.projection_order.len()
    }

    /// 1-based lexicographic rank of the projection order among all
    /// permutations. For three variables, class 1 is `x1 > x2 > x3` and
    /// class 6 is `x3 > x2 > x1`.
    pub fn class_label(&self) -> usize {
        let n = self.projection_order.len();
        let mut rank = 0;
        for (i, &v) in self.projection_order.iter().enumerate() {
            let smaller_later = self.projection_order[i + 1..].iter().filter(|&&w| w < v).count();
            rank += smaller_later * factorial(n - 1 - i);
        }
        rank + 1
    }

    /// Every ordering of `nvars` variables in class-label order.
    pub fn all(nvars: usize) -> Vec<VariableOrdering> {
        (1..=factorial(nvars)).map(|l| Self::from_class_label(nvars, l).expect("label in range")).collect()
    }

    /// The ordering obtained by renaming variable `i` to `perm[i]`.
    pub fn permute_variables(&self, perm: &[usize]) -> VariableOrdering {
        VariableOrdering { projection_order: self.projection_order.iter().map(|&v| perm[v]).collect() }
    }

    /// `x3 > x2 > x1` style rendering with the given names.
    pub fn to_string_with(&self, names: &[String]) -> String {
        self.projection_order.iter().map(|&v| names[v].as_str()).collect::<Vec<_>>().join(" > ")
    }
}

impl fmt::Display for VariableOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&crate::poly::default_names(self.nvars())))
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TiePolicy {
    /// Uniform choice among the remaining tied variables.
    Random,
    /// The tied variable with the smallest index.
    LowestIndex,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeuristicChain {
    links: Vec<MergedFeature>,
    tie_policy: TiePolicy,
}

impl HeuristicChain {
    pub fn new(links: Vec<MergedFeature>, tie_policy: TiePolicy) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::EmptyHeuristic);
        }
        Ok(HeuristicChain { links, tie_policy })
    }

    /// The chain without features: every choice is left to the tie policy.
    pub fn random() -> Self {
        HeuristicChain { links: Vec::new(), tie_policy: TiePolicy::Random }
    }

    pub fn links(&self) -> &[MergedFeature] {
        &self.links
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    pub fn with_tie_policy(mut self, tie_policy: TiePolicy) -> Self {
        self.tie_policy = tie_policy;
        self
    }

    /// `A>B>C` form, or `random` for the empty chain.
    pub fn name(&self) -> String {
        if self.links.is_empty() {
            return "random".to_string();
        }
        self.links.iter().map(|f| f.camel_name()).collect::<Vec<_>>().join(">")
    }
}

impl fmt::Display for HeuristicChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Registered heuristic aliases and their chains.
pub const ALIASES: [(&str, &str); 4] = [
    ("Brown", "MaxMaxV>MaxMaxSV>SumSumSgV"),
    ("gmods", "SumMaxV"),
    ("T1", "SumMaxV>AvgAvgV>SumSumV"),
    ("T2", "SumMaxV>SumSumSgV>SumSumV"),
];

/// Parses a registered alias (`Brown`, `gmods`, `T1`, `T2`, `random`) or a
/// `>`-separated list of CamelCase features. The tie policy is `Random`.
pub fn parse_heuristic(name: &str) -> Result<HeuristicChain> {
    let name = name.trim();
    if name.is_empty() {
        return Err(Error::EmptyHeuristic);
    }
    if name == "random" {
        return Ok(HeuristicChain::random());
    }
    let spelled = ALIASES.iter().find(|(alias, _)| *alias == name).map_or(name, |(_, chain)| chain);
    let links = spelled
        .split('>')
        .map(|part| {
            MergedFeature::parse_camel(part.trim()).map_err(|_| Error::UnknownHeuristic(name.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    HeuristicChain::new(links, TiePolicy::Random)
}

/// How one variable choice was reached.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decision {
    /// Number of variables that could be chosen.
    pub candidates: usize,
    /// Size of the argmin set after each link.
    pub tied_after_link: Vec<usize>,
    /// The tie policy had to choose among more than one variable.
    pub fallback_used: bool,
    /// `fallback_used` under the random policy.
    pub random_fired: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TieStats {
    pub decisions: Vec<Decision>,
}

impl TieStats {
    pub fn random_fired(&self) -> bool {
        self.decisions.iter().any(|d| d.random_fired)
    }

    pub fn fallback_used(&self) -> bool {
        self.decisions.iter().any(|d| d.fallback_used)
    }

    /// Number of decisions whose first link left more than one variable.
    pub fn first_link_ties(&self) -> usize {
        self.decisions.iter().filter(|d| d.tied_after_link.first().is_some_and(|&n| n > 1)).count()
    }
}

fn argmin(system: &PolySystem, feature: &MergedFeature, candidates: &[usize]) -> Vec<usize> {
    let values: Vec<BigRational> = candidates.iter().map(|&v| feature.evaluate(system, v)).collect();
    let best = values.iter().min().expect("candidates nonempty");
    candidates.iter().zip(&values).filter(|(_, x)| *x == best).map(|(&v, _)| v).collect()
}

/// Chooses among `candidates` (sorted, nonempty) the next variable to
/// project. Variables absent from `system` are still candidates; their
/// features are 0.
pub fn choose_among<R: Rng + ?Sized>(
    system: &PolySystem,
    chain: &HeuristicChain,
    candidates: &[usize],
    rng: &mut R,
) -> Result<(usize, Decision)> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate variables".into()));
    }
    for &v in candidates {
        system.check_var(v)?;
    }
    let mut tied = candidates.to_vec();
    let mut decision = Decision { candidates: candidates.len(), ..Decision::default() };
    for link in chain.links() {
        if tied.len() == 1 {
            break;
        }
        tied = argmin(system, link, &tied);
        decision.tied_after_link.push(tied.len());
    }
    let chosen = if tied.len() == 1 {
        tied[0]
    } else {
        decision.fallback_used = true;
        match chain.tie_policy() {
            TiePolicy::LowestIndex => tied[0],
            TiePolicy::Random => {
                decision.random_fired = true;
                tied[rng.gen_range(0..tied.len())]
            }
        }
    };
    Ok((chosen, decision))
}

/// Chooses the first variable to project among all variables of `system`.
pub fn choose_variable<R: Rng + ?Sized>(
    system: &PolySystem,
    chain: &HeuristicChain,
    rng: &mut R,
) -> Result<(usize, TieStats)> {
    let candidates: Vec<usize> = (0..system.nvars()).collect();
    let (v, d) = choose_among(system, chain, &candidates, rng)?;
    Ok((v, TieStats { decisions: vec![d] }))
}

/// Memoised projection chains of one input system, keyed by the sequence of
/// variables eliminated so far. Shareable across threads.
#[derive(Debug)]
pub struct ProjectionCache {
    nvars: usize,
    systems: Mutex<HashMap<Vec<usize>, Arc<PolySystem>>>,
}

impl ProjectionCache {
    pub fn new(system: &PolySystem) -> Self {
        let mut systems = HashMap::new();
        systems.insert(Vec::new(), Arc::new(system.normalized()));
        ProjectionCache { nvars: system.nvars(), systems: Mutex::new(systems) }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// The system left after eliminating `prefix` in order.
    pub fn projected(&self, prefix: &[usize]) -> Result<Arc<PolySystem>> {
        if let Some(s) = self.systems.lock().expect("cache lock").get(prefix) {
            return Ok(Arc::clone(s));
        }
        let (last, head) = prefix.split_last().expect("root is always cached");
        let parent = self.projected(head)?;
        // computed outside the lock; a concurrent duplicate computes the same value
        let proj = Arc::new(lazard_projection(&parent, *last)?);
        let mut map = self.systems.lock().expect("cache lock");
        Ok(Arc::clone(map.entry(prefix.to_vec()).or_insert(proj)))
    }
}

/// Greedy ordering: choose, project, repeat until one variable remains.
pub fn greedy_ordering<R: Rng + ?Sized>(
    system: &PolySystem,
    chain: &HeuristicChain,
    rng: &mut R,
) -> Result<(VariableOrdering, TieStats)> {
    greedy_ordering_cached(&ProjectionCache::new(system), chain, rng)
}

pub fn greedy_ordering_cached<R: Rng + ?Sized>(
    cache: &ProjectionCache,
    chain: &HeuristicChain,
    rng: &mut R,
) -> Result<(VariableOrdering, TieStats)> {
    let n = cache.nvars();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut stats = TieStats::default();
    while remaining.len() > 1 {
        let current = cache.projected(&order)?;
        let (v, d) = choose_among(&current, chain, &remaining, rng)?;
        stats.decisions.push(d);
        remaining.retain(|&w| w != v);
        order.push(v);
    }
    order.extend(remaining);
    Ok((VariableOrdering::new(order)?, stats))
}

fn sum_max_v() -> MergedFeature {
    MergedFeature::parse_camel("SumMaxV").expect("valid alias")
}

/// Product over the projection chain of `sum(max(v_i(S_j)))` for the
/// variable eliminated from `S_j`.
pub fn mods_product(cache: &ProjectionCache, ordering: &VariableOrdering) -> Result<BigInt> {
    let f = sum_max_v();
    let order = ordering.projection_order();
    let mut product = BigInt::one();
    for j in 0..order.len() {
        let s = cache.projected(&order[..j])?;
        product *= f.evaluate(&s, order[j]).to_integer();
    }
    Ok(product)
}

/// The ordering minimising [`mods_product`], ties broken by lowest class label.
pub fn mods_ordering(system: &PolySystem) -> Result<(VariableOrdering, BigInt)> {
    mods_ordering_cached(&ProjectionCache::new(system))
}

pub fn mods_ordering_cached(cache: &ProjectionCache) -> Result<(VariableOrdering, BigInt)> {
    let n = cache.nvars();
    if n > MODS_GUARD {
        return Err(Error::GuardExceeded { nvars: n, guard: MODS_GUARD });
    }
    let mut best: Option<(VariableOrdering, BigInt)> = None;
    for ordering in VariableOrdering::all(n) {
        let p = mods_product(cache, &ordering)?;
        if best.as_ref().is_none_or(|(_, b)| p < *b) {
            best = Some((ordering, p));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("system has no variables".into()))
}

/// All ordered triples of distinct features from `top`, in index order.
pub fn enumerate_triples(top: &[MergedFeature]) -> Result<Vec<HeuristicChain>> {
    if top.len() < 3 {
        return Err(Error::TooFew { what: "triple enumeration", min: 3, got: top.len() });
    }
    for (i, f) in top.iter().enumerate() {
        if top[..i].contains(f) {
            return Err(Error::DuplicateFeature(f.camel_name()));
        }
    }
    let mut out = Vec::new();
    for a in 0..top.len() {
        for b in (0..top.len()).filter(|&b| b != a) {
            for c in (0..top.len()).filter(|&c| c != a && c != b) {
                out.push(HeuristicChain::new(vec![top[a], top[b], top[c]], TiePolicy::Random)?);
            }
        }
    }
    Ok(out)
}

fn fnv1a64(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one (problem, repetition) pair, independent of evaluation order.
pub fn derive_seed(master: u64, problem_id: &str, repetition: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a64(problem_id)).wrapping_add(repetition))
}
