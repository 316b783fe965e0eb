//! Degree-list features of polynomial systems.
//!
//! A feature is built from a nested list: one inner list per polynomial, one
//! entry per monomial. The base list is either `v_i` (degree of variable `i`
//! in each monomial) or `sv_i` (total degree of each monomial containing
//! variable `i`, 0 otherwise). An optional elementwise sign `sg`, an inner
//! aggregation per polynomial, another optional `sg`, and an outer
//! aggregation across polynomials reduce it to one rational number:
//!
//! ```text
//! outer( [sg]( inner( [sg]( base_i(S) ) ) ) )      e.g. sum(max(v_1(S)))
//! ```
//!
//! Names come in two forms: the functional form above (with a variable index
//! or `i` for the variable-merged feature) and a CamelCase alias without the
//! index, e.g. `SumMaxV`, `SumSgSumV`, `AvgAvgSgV`.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::{PolySystem, Polynomial};

/// Seed of the probe corpus used to deduplicate value-identical features.
pub const PROBE_SEED: u64 = 0x00CA_D0DE_2023;
/// Number of systems in the probe corpus.
pub const PROBE_SYSTEMS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    /// Degree of the variable in each monomial.
    V,
    /// Total degree of each monomial containing the variable, else 0.
    SV,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Agg {
    Max,
    Sum,
    Avg,
}

impl Agg {
    pub const ALL: [Agg; 3] = [Agg::Max, Agg::Sum, Agg::Avg];

    fn lower(self) -> &'static str {
        match self {
            Agg::Max => "max",
            Agg::Sum => "sum",
            Agg::Avg => "avg",
        }
    }

    fn camel(self) -> &'static str {
        match self {
            Agg::Max => "Max",
            Agg::Sum => "Sum",
            Agg::Avg => "Avg",
        }
    }

    /// Empty lists aggregate to 0.
    pub fn apply(self, xs: &[BigRational]) -> BigRational {
        match self {
            Agg::Max => xs.iter().max().cloned().unwrap_or_else(BigRational::zero),
            Agg::Sum => xs.iter().fold(BigRational::zero(), |a, x| a + x),
            Agg::Avg => {
                if xs.is_empty() {
                    BigRational::zero()
                } else {
                    Agg::Sum.apply(xs) / BigRational::from_integer(BigInt::from(xs.len()))
                }
            }
        }
    }
}

fn sg(x: &BigRational) -> BigRational {
    x.signum()
}

/// A feature with its variable slot abstracted away.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MergedFeature {
    pub outer_op: Agg,
    pub mid_sg: bool,
    pub inner_op: Agg,
    pub inner_sg: bool,
    pub base: Base,
}

/// The value computed per polynomial by the inner part of a feature, up to
/// value identity on nonnegative degree lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum PolyQuantity {
    Agg(Agg, Base),
    /// 1 if the variable occurs in the polynomial.
    Occurs,
    /// Number of monomials containing the variable.
    CountContaining,
    /// Fraction of monomials containing the variable.
    FractionContaining,
}

impl MergedFeature {
    pub const fn new(outer_op: Agg, mid_sg: bool, inner_op: Agg, inner_sg: bool, base: Base) -> Self {
        MergedFeature { outer_op, mid_sg, inner_op, inner_sg, base }
    }

    /// All 72 grammar combinations, in canonical order.
    pub fn all() -> Vec<MergedFeature> {
        let mut out = Vec::with_capacity(72);
        for outer in Agg::ALL {
            for mid_sg in [false, true] {
                for inner in Agg::ALL {
                    for inner_sg in [false, true] {
                        for base in [Base::V, Base::SV] {
                            out.push(MergedFeature::new(outer, mid_sg, inner, inner_sg, base));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn at(self, variable: usize) -> FeatureDescriptor {
        FeatureDescriptor { feature: self, variable }
    }

    /// Value of this feature for variable `var` of `system`.
    pub fn evaluate(&self, system: &PolySystem, var: usize) -> BigRational {
        let per_poly: Vec<BigRational> = system
            .polys()
            .iter()
            .map(|p| {
                let mut entries: Vec<BigRational> =
                    base_entries(p, var, self.base).map(|d| BigRational::from_integer(d.into())).collect();
                if self.inner_sg {
                    entries = entries.iter().map(sg).collect();
                }
                let x = self.inner_op.apply(&entries);
                if self.mid_sg {
                    sg(&x)
                } else {
                    x
                }
            })
            .collect();
        self.outer_op.apply(&per_poly)
    }

    fn quantity(&self) -> PolyQuantity {
        match (self.mid_sg, self.inner_sg, self.inner_op) {
            (true, _, _) => PolyQuantity::Occurs,
            (false, true, Agg::Max) => PolyQuantity::Occurs,
            (false, true, Agg::Sum) => PolyQuantity::CountContaining,
            (false, true, Agg::Avg) => PolyQuantity::FractionContaining,
            (false, false, op) => PolyQuantity::Agg(op, self.base),
        }
    }

    fn from_quantity(outer_op: Agg, q: PolyQuantity) -> Self {
        match q {
            PolyQuantity::Agg(op, base) => MergedFeature::new(outer_op, false, op, false, base),
            PolyQuantity::Occurs => MergedFeature::new(outer_op, true, Agg::Sum, false, Base::V),
            PolyQuantity::CountContaining => MergedFeature::new(outer_op, false, Agg::Sum, true, Base::V),
            PolyQuantity::FractionContaining => MergedFeature::new(outer_op, false, Agg::Avg, true, Base::V),
        }
    }

    /// Rewrites to the canonical representative of the value-identity class,
    /// using `sg(sg x) = sg x`, `sg` commuting with `max` on nonnegative data,
    /// `sg(max) = sg(sum) = sg(avg)` on nonnegative lists and
    /// `sg(v_i) = sg(sv_i)`.
    pub fn canonical(&self) -> MergedFeature {
        Self::from_quantity(self.outer_op, self.quantity())
    }

    /// Representative of the class of features that induce the same variable
    /// ranking: outer `sum` and outer `avg` differ only by the polynomial
    /// count. Outer `avg` is kept when the inner aggregation is also `avg`.
    pub fn proportional_representative(&self) -> MergedFeature {
        let c = self.canonical();
        match c.outer_op {
            Agg::Max => c,
            Agg::Sum | Agg::Avg => {
                let outer = if c.inner_op == Agg::Avg { Agg::Avg } else { Agg::Sum };
                MergedFeature { outer_op: outer, ..c }
            }
        }
    }

    /// Preference among value-identical spellings: fewer `sg`, base `v`,
    /// `sg` after the inner op, then inner op `sum < max < avg`.
    fn representative_key(&self) -> (u8, bool, bool, u8) {
        let op_rank = match self.inner_op {
            Agg::Sum => 0,
            Agg::Max => 1,
            Agg::Avg => 2,
        };
        (self.mid_sg as u8 + self.inner_sg as u8, self.base == Base::SV, self.inner_sg, op_rank)
    }

    /// CamelCase alias, e.g. `SumMaxV`, `SumSgSumV`, `AvgAvgSgV`.
    pub fn camel_name(&self) -> String {
        format!(
            "{}{}{}{}{}",
            self.outer_op.camel(),
            if self.mid_sg { "Sg" } else { "" },
            self.inner_op.camel(),
            if self.inner_sg { "Sg" } else { "" },
            match self.base {
                Base::V => "V",
                Base::SV => "SV",
            }
        )
    }

    /// Functional name with the variable slot written as `slot`.
    fn functional_name(&self, slot: &str) -> String {
        let base = match self.base {
            Base::V => "v",
            Base::SV => "sv",
        };
        let mut inner = format!("{base}_{slot}(S)");
        if self.inner_sg {
            inner = format!("sg({inner})");
        }
        inner = format!("{}({inner})", self.inner_op.lower());
        if self.mid_sg {
            inner = format!("sg({inner})");
        }
        format!("{}({inner})", self.outer_op.lower())
    }

    /// Functional name of the variable-merged feature, e.g. `sum(max(v_i(S)))`.
    pub fn merged_name(&self) -> String {
        self.functional_name("i")
    }

    /// Parses a CamelCase alias.
    pub fn parse_camel(name: &str) -> Result<MergedFeature> {
        let unknown = || Error::UnknownFeature(name.to_string());
        let mut rest = name;
        let take_op = |rest: &mut &str| -> Option<Agg> {
            for op in Agg::ALL {
                if let Some(r) = rest.strip_prefix(op.camel()) {
                    *rest = r;
                    return Some(op);
                }
            }
            None
        };
        let outer = take_op(&mut rest).ok_or_else(unknown)?;
        let mid_sg = strip_sg(&mut rest);
        let inner = take_op(&mut rest).ok_or_else(unknown)?;
        let inner_sg = strip_sg(&mut rest);
        let base = match rest {
            "V" => Base::V,
            "SV" => Base::SV,
            _ => return Err(unknown()),
        };
        Ok(MergedFeature::new(outer, mid_sg, inner, inner_sg, base))
    }
}

fn strip_sg(rest: &mut &str) -> bool {
    // "SgV" is sign-of-v, but "SV" alone is the sv base
    match rest.strip_prefix("Sg") {
        Some(r) => {
            *rest = r;
            true
        }
        None => false,
    }
}

impl fmt::Display for MergedFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.camel_name())
    }
}

fn base_entries(p: &Polynomial, var: usize, base: Base) -> impl Iterator<Item = u32> + '_ {
    p.terms().iter().map(move |t| match base {
        Base::V => t.degree_in(var),
        Base::SV => {
            if t.degree_in(var) > 0 {
                t.total_degree()
            } else {
                0
            }
        }
    })
}

/// A feature bound to a concrete variable (0-based internally, printed 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureDescriptor {
    pub feature: MergedFeature,
    pub variable: usize,
}

impl FeatureDescriptor {
    /// Canonical functional name, e.g. `sum(max(v_1(S)))`.
    pub fn name(&self) -> String {
        self.feature.functional_name(&(self.variable + 1).to_string())
    }
}

impl fmt::Display for FeatureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Variable slot of a parsed functional feature name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarSlot {
    Index(usize),
    Merged,
}

/// Parses a functional name such as `sum(sg(avg(sg(v_2(S)))))` or
/// `avg(avg(v_i(S)))`. Whitespace is ignored.
pub fn parse_feature_name(name: &str) -> Result<(MergedFeature, VarSlot)> {
    let unknown = || Error::UnknownFeature(name.to_string());
    let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    let mut rest = compact.as_str();
    let mut wrappers: Vec<Option<Agg>> = Vec::new();
    loop {
        if let Some(r) = rest.strip_prefix("sg(") {
            wrappers.push(None);
            rest = r;
            continue;
        }
        match Agg::ALL.into_iter().find(|op| rest.starts_with(&format!("{}(", op.lower()))) {
            Some(op) => {
                wrappers.push(Some(op));
                rest = &rest[4..];
            }
            None => break,
        }
    }
    let (base, r) = if let Some(r) = rest.strip_prefix("sv_") {
        (Base::SV, r)
    } else if let Some(r) = rest.strip_prefix("v_") {
        (Base::V, r)
    } else {
        return Err(unknown());
    };
    let close = r.find('(').ok_or_else(unknown)?;
    let slot = match &r[..close] {
        "i" => VarSlot::Merged,
        digits => {
            let k: usize = digits.parse().map_err(|_| unknown())?;
            if k == 0 {
                return Err(unknown());
            }
            VarSlot::Index(k - 1)
        }
    };
    let tail = &r[close..];
    let expected_tail = format!("(S){}", ")".repeat(wrappers.len()));
    if tail != expected_tail {
        return Err(unknown());
    }
    let feature = match wrappers.as_slice() {
        [Some(o), None, Some(i), None] => MergedFeature::new(*o, true, *i, true, base),
        [Some(o), None, Some(i)] => MergedFeature::new(*o, true, *i, false, base),
        [Some(o), Some(i), None] => MergedFeature::new(*o, false, *i, true, base),
        [Some(o), Some(i)] => MergedFeature::new(*o, false, *i, false, base),
        _ => return Err(unknown()),
    };
    Ok((feature, slot))
}

/// Nested degree list `v_var(S)` or `sv_var(S)`, monomials in canonical order.
pub fn degree_list(system: &PolySystem, var: usize, kind: Base) -> Result<Vec<Vec<u32>>> {
    system.check_var(var)?;
    Ok(system.polys().iter().map(|p| base_entries(p, var, kind).collect()).collect())
}

pub fn evaluate_feature(d: &FeatureDescriptor, system: &PolySystem) -> Result<BigRational> {
    system.check_var(d.variable)?;
    Ok(d.feature.evaluate(system, d.variable))
}

/// Seeded random three-variable systems: 1-4 polynomials, 1-5 terms each,
/// monomials of total degree at most 5.
pub fn probe_corpus() -> &'static [PolySystem] {
    static CORPUS: OnceLock<Vec<PolySystem>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        (0..PROBE_SYSTEMS)
            .map(|_| {
                let npolys = rng.gen_range(1..=4);
                let polys = (0..npolys)
                    .map(|_| {
                        let nterms = rng.gen_range(1..=5);
                        let terms: Vec<_> = (0..nterms)
                            .map(|_| {
                                let e = loop {
                                    let e: Vec<u32> = (0..3).map(|_| rng.gen_range(0..=5)).collect();
                                    if e.iter().sum::<u32>() <= 5 {
                                        break e;
                                    }
                                };
                                let c = rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 };
                                (e, BigRational::from_integer(BigInt::from(c)))
                            })
                            .collect();
                        Polynomial::from_terms(3, terms)
                    })
                    .collect();
                PolySystem::new(3, polys).expect("probe polys share nvars")
            })
            .collect()
    })
}

/// Groups the 72 grammar combinations by their values on the probe corpus
/// and keeps one representative per group, in canonical order.
pub fn distinct_merged_features() -> &'static [MergedFeature] {
    static DISTINCT: OnceLock<Vec<MergedFeature>> = OnceLock::new();
    DISTINCT.get_or_init(|| {
        let corpus = probe_corpus();
        let mut groups: HashMap<Vec<BigRational>, MergedFeature> = HashMap::new();
        for f in MergedFeature::all() {
            let fingerprint: Vec<BigRational> =
                corpus.iter().flat_map(|s| (0..s.nvars()).map(move |v| f.evaluate(s, v))).collect();
            groups
                .entry(fingerprint)
                .and_modify(|rep| {
                    if f.representative_key() < rep.representative_key() {
                        *rep = f;
                    }
                })
                .or_insert(f);
        }
        let mut reps: Vec<MergedFeature> = groups.into_values().collect();
        reps.sort();
        reps
    })
}

/// Every distinct feature for every variable, variable-major.
pub fn enumerate_features(nvars: usize) -> Vec<FeatureDescriptor> {
    (0..nvars).flat_map(|v| distinct_merged_features().iter().map(move |f| f.at(v))).collect()
}

/// True when `d1` and `d2` induce the same variable ranking on every system:
/// they are value-identical, or differ only in outer `sum` versus `avg`.
/// Variable indices are ignored.
pub fn ranking_equivalent(d1: &MergedFeature, d2: &MergedFeature) -> bool {
    d1.proportional_representative() == d2.proportional_representative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{default_names, parse_system};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn two_var_system() -> PolySystem {
        parse_system(&["x1", "x1^2 - 2*x1*x2^2 + x2^2 - 3"], &default_names(2)).unwrap()
    }

    fn s3() -> PolySystem {
        parse_system(&["x1*x2*x3 - 1", "x1^2 - x2^2*x3"], &default_names(3)).unwrap()
    }

    fn named(s: &str) -> FeatureDescriptor {
        match parse_feature_name(s).unwrap() {
            (f, VarSlot::Index(v)) => f.at(v),
            _ => panic!("expected an indexed name"),
        }
    }

    #[test]
    fn degree_lists_of_two_var_system() {
        assert_eq!(degree_list(&two_var_system(), 1, Base::V).unwrap(), vec![vec![0], vec![0, 2, 2, 0]]);
        assert_eq!(degree_list(&two_var_system(), 0, Base::SV).unwrap(), vec![vec![1], vec![2, 3, 0, 0]]);
        assert!(degree_list(&PolySystem::empty(2), 0, Base::V).unwrap().is_empty());
        assert!(degree_list(&two_var_system(), 2, Base::V).is_err());
    }

    #[test]
    fn two_var_system_values() {
        let s = two_var_system();
        assert_eq!(evaluate_feature(&named("max(avg(sv_1(S)))"), &s).unwrap(), q(5, 4));
        assert_eq!(evaluate_feature(&named("sum(sg(avg(sg(v_2(S)))))"), &s).unwrap(), q(1, 1));
        // intermediate: avg(sg(v_2)) = [0, 1/2]
        let inner = MergedFeature::new(Agg::Sum, false, Agg::Avg, true, Base::V);
        assert_eq!(inner.evaluate(&s, 1), q(1, 2));
    }

    #[test]
    fn worked_example_sum_max() {
        let f = MergedFeature::parse_camel("SumMaxV").unwrap();
        let vals: Vec<_> = (0..3).map(|v| f.evaluate(&s3(), v)).collect();
        assert_eq!(vals, vec![q(3, 1), q(3, 1), q(2, 1)]);
    }

    #[test]
    fn empty_lists_aggregate_to_zero() {
        assert!(Agg::Avg.apply(&[]).is_zero());
        assert!(Agg::Max.apply(&[]).is_zero());
        let f = MergedFeature::parse_camel("AvgAvgV").unwrap();
        assert!(f.evaluate(&PolySystem::empty(3), 0).is_zero());
    }

    #[test]
    fn names_round_trip() {
        for f in MergedFeature::all() {
            assert_eq!(MergedFeature::parse_camel(&f.camel_name()).unwrap(), f);
            assert_eq!(parse_feature_name(&f.merged_name()).unwrap(), (f, VarSlot::Merged));
            let d = f.at(2);
            assert_eq!(named(&d.name()), d);
        }
        let d = MergedFeature::new(Agg::Sum, false, Agg::Max, false, Base::V).at(0);
        assert_eq!(d.name(), "sum(max(v_1(S)))");
        assert_eq!(d.feature.camel_name(), "SumMaxV");
    }

    #[test]
    fn camel_sg_versus_sv() {
        let a = MergedFeature::parse_camel("SumSumSgV").unwrap();
        assert!(a.inner_sg && a.base == Base::V);
        let b = MergedFeature::parse_camel("SumSumSV").unwrap();
        assert!(!b.inner_sg && b.base == Base::SV);
        let c = MergedFeature::parse_camel("SumSgSumV").unwrap();
        assert!(c.mid_sg && !c.inner_sg);
        for bad in ["", "SumMax", "SumMaxW", "NotAFeature", "SumSgSgSumV", "sum(max(v_1(S)))"] {
            assert!(MergedFeature::parse_camel(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn bad_functional_names() {
        for bad in
            ["sum(v_1(S))", "sum(max(v_0(S)))", "sum(max(w_1(S)))", "sum(max(v_1(S))", "sg(sum(max(v_1(S))))"]
        {
            assert!(parse_feature_name(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn probe_dedup_agrees_with_rewrite_rules() {
        let distinct = distinct_merged_features();
        let mut by_rule: Vec<MergedFeature> = MergedFeature::all().iter().map(|f| f.canonical()).collect();
        by_rule.sort();
        by_rule.dedup();
        assert_eq!(distinct, by_rule.as_slice());
        assert_eq!(distinct.len(), 27);
    }

    #[test]
    fn enumeration_counts() {
        let all = enumerate_features(3);
        assert_eq!(all.len(), 81);
        for v in 0..3 {
            assert_eq!(all.iter().filter(|d| d.variable == v).count(), 27);
        }
        assert!(all.iter().any(|d| d.name() == "sum(max(v_1(S)))"));
    }

    #[test]
    fn ranking_equivalence_examples() {
        let sum_max = MergedFeature::parse_camel("SumMaxV").unwrap();
        let avg_max = MergedFeature::parse_camel("AvgMaxV").unwrap();
        let max_max = MergedFeature::parse_camel("MaxMaxV").unwrap();
        assert!(ranking_equivalent(&sum_max, &avg_max));
        assert!(ranking_equivalent(&sum_max, &sum_max));
        assert!(!ranking_equivalent(&sum_max, &max_max));
        // witness: a probe system where the argmin sets differ
        let witness = probe_corpus().iter().any(|s| argmin(&sum_max, s) != argmin(&max_max, s));
        assert!(witness);
    }

    fn argmin(f: &MergedFeature, s: &PolySystem) -> Vec<usize> {
        let vals: Vec<_> = (0..s.nvars()).map(|v| f.evaluate(s, v)).collect();
        let m = vals.iter().min().unwrap();
        (0..s.nvars()).filter(|&v| &vals[v] == m).collect()
    }

    #[test]
    fn proportional_classes() {
        let reps: std::collections::BTreeSet<_> =
            distinct_merged_features().iter().map(|f| f.proportional_representative()).collect();
        assert_eq!(reps.len(), 18);
        for name in ["AvgAvgV", "AvgAvgSgV", "SumMaxV", "SumSumSgV", "SumSgSumV"] {
            let f = MergedFeature::parse_camel(name).unwrap();
            assert_eq!(f.proportional_representative(), f, "{name}");
        }
        assert_eq!(
            MergedFeature::parse_camel("AvgMaxV").unwrap().proportional_representative().camel_name(),
            "SumMaxV"
        );
    }

    #[test]
    fn equivalent_features_share_argmins_on_probes() {
        for a in MergedFeature::all() {
            for b in MergedFeature::all() {
                if a < b && ranking_equivalent(&a, &b) {
                    for s in probe_corpus().iter().take(60) {
                        assert_eq!(argmin(&a, s), argmin(&b, s), "{a} vs {b}");
                    }
                }
            }
        }
    }

    fn arb_system() -> impl Strategy<Value = PolySystem> {
        let poly = prop::collection::vec((0u32..4, 0u32..4, 0u32..4, 1i64..5), 1..5).prop_map(|ts| {
            Polynomial::from_terms(
                3,
                ts.into_iter().map(|(a, b, c, k)| (vec![a, b, c], BigRational::from_integer(k.into()))),
            )
        });
        prop::collection::vec(poly, 0..4).prop_map(|ps| PolySystem::new(3, ps).unwrap())
    }

    proptest! {
        #[test]
        fn sum_is_len_times_avg(s in arb_system(), var in 0usize..3, inner in 0usize..3, base_sv: bool, isg: bool) {
            let base = if base_sv { Base::SV } else { Base::V };
            let sum = MergedFeature::new(Agg::Sum, false, Agg::ALL[inner], isg, base).evaluate(&s, var);
            let avg = MergedFeature::new(Agg::Avg, false, Agg::ALL[inner], isg, base).evaluate(&s, var);
            prop_assert_eq!(sum, avg * BigRational::from_integer(s.len().into()));
        }

        #[test]
        fn sg_is_idempotent(s in arb_system(), var in 0usize..3) {
            for f in MergedFeature::all().into_iter().filter(|f| f.inner_sg) {
                let doubled = MergedFeature { mid_sg: true, ..f };
                if f.inner_op == Agg::Max {
                    prop_assert_eq!(f.evaluate(&s, var), doubled.evaluate(&s, var));
                }
            }
            for x in [q(0, 1), q(3, 2), q(-2, 1)] {
                prop_assert_eq!(sg(&sg(&x)), sg(&x));
            }
        }

        #[test]
        fn relabeling_equivariance(s in arb_system(), shift in 0usize..3) {
            let perm: Vec<usize> = (0..3).map(|i| (i + shift) % 3).collect();
            let t = s.permute_variables(&perm);
            for f in MergedFeature::all() {
                for (v, &w) in perm.iter().enumerate() {
                    prop_assert_eq!(f.evaluate(&s, v), f.evaluate(&t, w));
                }
            }
        }

        #[test]
        fn canonical_is_value_identical(s in arb_system(), var in 0usize..3) {
            for f in MergedFeature::all() {
                prop_assert_eq!(f.evaluate(&s, var), f.canonical().evaluate(&s, var), "{}", f);
            }
        }

        #[test]
        fn raw_degree_features_are_nonnegative_integers(s in arb_system(), var in 0usize..3) {
            for f in MergedFeature::all().into_iter().filter(|f| !f.inner_sg && !f.mid_sg && f.inner_op != Agg::Avg && f.outer_op != Agg::Avg) {
                let x = f.evaluate(&s, var);
                prop_assert!(x.is_integer() && !x.is_negative());
            }
        }
    }
}
