//! Exact multivariate polynomials over the rationals.
//!
//! Terms are kept in canonical form: one term per exponent vector, no zero
//! coefficients, sorted in descending lexicographic order on the exponent
//! vector (variable 0 is the most significant). The zero polynomial has no
//! terms. Every constructor goes through [`Polynomial::from_terms`], so every
//! value in circulation satisfies these invariants.

mod gcd;
mod parse;
mod projection;
mod resultant;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use gcd::{gcd, squarefree_factors, squarefree_gcd_free_basis, squarefree_part};
pub use parse::{parse_poly, parse_system};
pub use projection::{lazard_projection, lazard_projection_raw};
pub use resultant::{discriminant, resultant, resultant_subresultant, resultant_sylvester};

/// A single term: coefficient times a power product.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exponents: Vec<u32>,
    coefficient: BigRational,
}

impl Monomial {
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn coefficient(&self) -> &BigRational {
        &self.coefficient
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.exponents[var]
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Exact multivariate polynomial in a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        Self::from_terms(nvars, [(vec![0; nvars], c)])
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, BigRational::from_integer(BigInt::from(c)))
    }

    /// The polynomial `x_var`.
    pub fn var(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Self::from_terms(nvars, [(e, BigRational::one())])
    }

    /// Builds a canonical polynomial, merging duplicate exponent vectors and
    /// dropping zero coefficients.
    ///
    /// Panics if an exponent vector does not have length `nvars`.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        let mut acc: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length must equal nvars");
            if c.is_zero() {
                continue;
            }
            match acc.get_mut(&e) {
                Some(v) => *v += c,
                None => {
                    acc.insert(e, c);
                }
            }
        }
        let terms = acc
            .into_iter()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponents, coefficient)| Monomial { exponents, coefficient })
            .collect();
        Polynomial { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for nonzero constants and for zero.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.exponents.iter().all(|&e| e == 0))
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.is_constant() && self.terms[0].coefficient.is_one()
    }

    pub fn leading_term(&self) -> Option<&Monomial> {
        self.terms.first()
    }

    pub fn leading_coefficient(&self) -> BigRational {
        self.terms.first().map(|t| t.coefficient.clone()).unwrap_or_else(BigRational::zero)
    }

    /// Degree in `var`; 0 for the zero polynomial.
    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|t| t.exponents[var]).max().unwrap_or(0)
    }

    /// Lowest power of `var` present; 0 for the zero polynomial.
    pub fn low_degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|t| t.exponents[var]).min().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(Monomial::total_degree).max().unwrap_or(0)
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.terms.iter().any(|t| t.exponents[var] > 0)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|t| Monomial { exponents: t.exponents.clone(), coefficient: &t.coefficient * c })
                .collect(),
        }
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().filter(|t| t.exponents[var] > 0).map(|t| {
                let mut e = t.exponents.clone();
                let k = e[var];
                e[var] -= 1;
                (e, &t.coefficient * BigRational::from_integer(BigInt::from(k)))
            }),
        )
    }

    /// Coefficients of `self` viewed as a polynomial in `var`, indexed by
    /// power. Each coefficient is free of `var`. Empty for zero.
    pub fn coefficients_in(&self, var: usize) -> Vec<Polynomial> {
        if self.is_zero() {
            return Vec::new();
        }
        let deg = self.degree_in(var) as usize;
        let mut buckets: Vec<Vec<(Vec<u32>, BigRational)>> = vec![Vec::new(); deg + 1];
        for t in &self.terms {
            let mut e = t.exponents.clone();
            let k = e[var] as usize;
            e[var] = 0;
            buckets[k].push((e, t.coefficient.clone()));
        }
        buckets.into_iter().map(|b| Self::from_terms(self.nvars, b)).collect()
    }

    /// Inverse of [`coefficients_in`](Self::coefficients_in).
    pub fn from_coefficients_in(nvars: usize, var: usize, coeffs: &[Polynomial]) -> Self {
        Self::from_terms(
            nvars,
            coeffs.iter().enumerate().flat_map(|(k, c)| {
                c.terms.iter().map(move |t| {
                    let mut e = t.exponents.clone();
                    e[var] += k as u32;
                    (e, t.coefficient.clone())
                })
            }),
        )
    }

    /// Exact division. Returns `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Polynomial) -> Option<Polynomial> {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(self.clone());
        }
        let lead = &divisor.terms[0];
        let mut rem: BTreeMap<Vec<u32>, BigRational> =
            self.terms.iter().map(|t| (t.exponents.clone(), t.coefficient.clone())).collect();
        let mut quotient = Vec::new();
        while let Some((e, c)) = rem.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            if e.iter().zip(&lead.exponents).any(|(a, b)| a < b) {
                return None;
            }
            let qe: Vec<u32> = e.iter().zip(&lead.exponents).map(|(a, b)| a - b).collect();
            let qc = &c / &lead.coefficient;
            for t in &divisor.terms {
                let pe: Vec<u32> = t.exponents.iter().zip(&qe).map(|(a, b)| a + b).collect();
                let delta = &t.coefficient * &qc;
                let remove = match rem.get_mut(&pe) {
                    Some(v) => {
                        *v -= &delta;
                        v.is_zero()
                    }
                    None => {
                        rem.insert(pe.clone(), -delta);
                        false
                    }
                };
                if remove {
                    rem.remove(&pe);
                }
            }
            quotient.push((qe, qc));
        }
        Some(Self::from_terms(self.nvars, quotient))
    }

    /// Scales to an integer polynomial with coprime coefficients and a
    /// positive leading coefficient. Zero stays zero.
    pub fn normalize(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let denom_lcm = self.terms.iter().fold(BigInt::one(), |acc, t| acc.lcm(t.coefficient.denom()));
        let numer_gcd = self.terms.iter().fold(BigInt::zero(), |acc, t| {
            let n = t.coefficient.numer() * (&denom_lcm / t.coefficient.denom());
            acc.gcd(&n)
        });
        let mut factor = BigRational::new(denom_lcm, numer_gcd);
        if self.terms[0].coefficient.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// True if every coefficient is an integer.
    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_integer())
    }

    /// Renames variables: variable `i` of `self` becomes variable `perm[i]`.
    pub fn permute_variables(&self, perm: &[usize]) -> Polynomial {
        assert_eq!(perm.len(), self.nvars);
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|t| {
                let mut e = vec![0; self.nvars];
                for (i, &k) in t.exponents.iter().enumerate() {
                    e[perm[i]] = k;
                }
                (e, t.coefficient.clone())
            }),
        )
    }

    /// Canonical text form using the given variable names.
    pub fn to_string_with(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coefficient.is_negative();
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let abs = t.coefficient.abs();
            let mono: Vec<String> = t
                .exponents
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { names[v].clone() } else { format!("{}^{}", names[v], k) })
                .collect();
            if mono.is_empty() {
                out.push_str(&abs.to_string());
            } else {
                if !abs.is_one() {
                    out.push_str(&abs.to_string());
                    out.push('*');
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }
}

/// Default variable names `x1, ..., xn`.
pub fn default_names(nvars: usize) -> Vec<String> {
    (1..=nvars).map(|i| format!("x{i}")).collect()
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&default_names(self.nvars)))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        Polynomial::from_terms(
            self.nvars,
            self.terms.iter().chain(&rhs.terms).map(|t| (t.exponents.clone(), t.coefficient.clone())),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|t| Monomial { exponents: t.exponents.clone(), coefficient: -&t.coefficient })
                .collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let e = a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect();
                out.push((e, &a.coefficient * &b.coefficient));
            }
        }
        Polynomial::from_terms(self.nvars, out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// An ordered list of polynomials sharing a variable count.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolySystem {
    nvars: usize,
    polys: Vec<Polynomial>,
}

impl PolySystem {
    pub fn new(nvars: usize, polys: Vec<Polynomial>) -> Result<Self> {
        if let Some(p) = polys.iter().find(|p| p.nvars() != nvars) {
            return Err(Error::VariableCountMismatch { expected: nvars, got: p.nvars() });
        }
        Ok(PolySystem { nvars, polys })
    }

    pub fn empty(nvars: usize) -> Self {
        PolySystem { nvars, polys: Vec::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Drops zero and constant members.
    pub fn normalized(&self) -> PolySystem {
        PolySystem {
            nvars: self.nvars,
            polys: self.polys.iter().filter(|p| !p.is_constant()).cloned().collect(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.polys.iter().all(|p| !p.is_constant())
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.polys.iter().any(|p| p.contains_var(var))
    }

    pub fn permute_variables(&self, perm: &[usize]) -> PolySystem {
        PolySystem {
            nvars: self.nvars,
            polys: self.polys.iter().map(|p| p.permute_variables(perm)).collect(),
        }
    }

    pub(crate) fn check_var(&self, var: usize) -> Result<()> {
        if var >= self.nvars {
            Err(Error::VariableOutOfRange { index: var, nvars: self.nvars })
        } else {
            Ok(())
        }
    }
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn canonical_order_is_descending_lex() {
        let q = p2("x2^2 - 3 + x1^2 - 2*x1*x2^2");
        let exps: Vec<_> = q.terms().iter().map(|t| t.exponents().to_vec()).collect();
        assert_eq!(exps, vec![vec![2, 0], vec![1, 2], vec![0, 2], vec![0, 0]]);
        assert_eq!(q.to_string(), "x1^2 - 2*x1*x2^2 + x2^2 - 3");
        assert!(is_canonical(&q));
    }

    #[test]
    fn cancellation_yields_zero() {
        let q = &p("x1*x2 + 1") - &p("1 + x2*x1");
        assert!(q.is_zero());
        assert_eq!(q.to_string(), "0");
    }

    #[test]
    fn exact_division() {
        let a = p("x1^2 - x2^2");
        let b = p("x1 - x2");
        assert_eq!(a.div_exact(&b).unwrap(), p("x1 + x2"));
        assert!(b.div_exact(&a).is_none());
        assert!(p("x1^2 + 1").div_exact(&p("x1 + 1")).is_none());
    }

    #[test]
    fn coefficients_round_trip() {
        let q = p("x1*x2*x3 - 1 + x3^2*x1");
        let cs = q.coefficients_in(2);
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[0], p("-1"));
        assert_eq!(cs[1], p("x1*x2"));
        assert_eq!(cs[2], p("x1"));
        assert_eq!(Polynomial::from_coefficients_in(3, 2, &cs), q);
    }

    #[test]
    fn normalize_makes_primitive_positive() {
        let q = p("-6*x1^2 + 4*x2").scale(&BigRational::new(1.into(), 3.into()));
        assert_eq!(q.normalize(), p("3*x1^2 - 2*x2"));
        assert_eq!(p("-x2^2").normalize(), p("x2^2"));
        assert!(Polynomial::zero(3).normalize().is_zero());
    }

    #[test]
    fn pow_and_derivative() {
        let q = p("x1 + 1").pow(3);
        assert_eq!(q, p("x1^3 + 3*x1^2 + 3*x1 + 1"));
        assert_eq!(q.derivative(0), p("3*x1^2 + 6*x1 + 3"));
        assert!(q.derivative(1).is_zero());
    }

    #[test]
    fn system_rejects_mismatched_nvars() {
        let r = PolySystem::new(2, vec![p("x1")]);
        assert!(matches!(r, Err(Error::VariableCountMismatch { expected: 2, got: 3 })));
    }

    #[test]
    fn normalized_drops_constants() {
        let s = PolySystem::new(3, vec![p("3"), p("x1"), Polynomial::zero(3)]).unwrap();
        assert_eq!(s.normalized().polys(), &[p("x1")]);
    }
}
