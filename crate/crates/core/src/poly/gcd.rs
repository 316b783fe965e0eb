//! Multivariate GCD, squarefree parts, and GCD-free bases.

use super::resultant::{prem, trim, uni_degree, uni_div_exact, Uni};
use super::{PolySystem, Polynomial};
use num_rational::BigRational;
use num_traits::Zero;

/// Greatest common divisor, normalized (primitive over the integers with a
/// positive leading coefficient). `gcd(p, 0) = normalize(p)`.
pub fn gcd(p: &Polynomial, q: &Polynomial) -> Polynomial {
    assert_eq!(p.nvars(), q.nvars());
    if p.is_zero() {
        return q.normalize();
    }
    if q.is_zero() {
        return p.normalize();
    }
    gcd_primitive(&p.normalize(), &q.normalize()).normalize()
}

/// GCD of two nonzero integer polynomials, up to an integer unit factor.
fn gcd_primitive(p: &Polynomial, q: &Polynomial) -> Polynomial {
    let nvars = p.nvars();
    if p.is_constant() || q.is_constant() {
        return Polynomial::one(nvars);
    }
    // the lowest common degree keeps the remainder sequence short
    let var = (0..nvars)
        .filter(|&v| p.contains_var(v) || q.contains_var(v))
        .min_by_key(|&v| (p.contains_var(v) && q.contains_var(v), p.degree_in(v).max(q.degree_in(v))))
        .expect("nonconstant input has a variable");
    if !p.contains_var(var) {
        return gcd_primitive(p, &content_in(q, var));
    }
    if !q.contains_var(var) {
        return gcd_primitive(&content_in(p, var), q);
    }
    let cp = content_in(p, var);
    let cq = content_in(q, var);
    let c = gcd_primitive(&cp, &cq);
    let pp = p.div_exact(&cp).expect("content divides");
    let qq = q.div_exact(&cq).expect("content divides");
    if let Some(bound) = degree_bound(&pp, &qq, var) {
        if bound == 0 {
            return c;
        }
        for (small, large) in [(&pp, &qq), (&qq, &pp)] {
            if small.degree_in(var) as usize == bound && large.div_exact(small).is_some() {
                return &c * small;
            }
        }
    }
    let g = subresultant_gcd(pp.coefficients_in(var), qq.coefficients_in(var));
    &c * &Polynomial::from_coefficients_in(nvars, var, &g)
}

/// Upper bound on `deg_var gcd(p, q)` from the univariate GCD at an integer
/// point where neither leading coefficient vanishes.
fn degree_bound(p: &Polynomial, q: &Polynomial, var: usize) -> Option<usize> {
    const POINTS: [i64; 8] = [3, -5, 7, 11, -13, 17, 19, -23];
    for attempt in 0..4 {
        let point: Vec<BigRational> = (0..p.nvars())
            .map(|v| BigRational::from_integer(POINTS[(v + 3 * attempt) % POINTS.len()].into()))
            .collect();
        let a = eval_except(p, var, &point);
        let b = eval_except(q, var, &point);
        if a.len() == p.degree_in(var) as usize + 1 && b.len() == q.degree_in(var) as usize + 1 {
            return Some(uni_gcd_degree(a, b));
        }
    }
    None
}

/// Substitutes `point` for every variable except `var`; trimmed dense result.
fn eval_except(p: &Polynomial, var: usize, point: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); p.degree_in(var) as usize + 1];
    for t in p.terms() {
        let mut c = t.coefficient().clone();
        for (v, &e) in t.exponents().iter().enumerate() {
            if v != var && e > 0 {
                c *= num_traits::pow(point[v].clone(), e as usize);
            }
        }
        out[t.degree_in(var) as usize] += c;
    }
    while out.last().is_some_and(Zero::is_zero) {
        out.pop();
    }
    out
}

fn uni_gcd_degree(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> usize {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let lb = b.last().expect("nonempty").clone();
        while a.len() >= b.len() {
            let f = a.last().expect("nonempty") / &lb;
            let shift = a.len() - b.len();
            for (k, bk) in b.iter().enumerate() {
                a[k + shift] -= &f * bk;
            }
            a.pop();
            while a.last().is_some_and(Zero::is_zero) {
                a.pop();
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len() - 1
}

/// GCD of the coefficients of `p` viewed as univariate in `var`.
fn content_in(p: &Polynomial, var: usize) -> Polynomial {
    let mut acc: Option<Polynomial> = None;
    for c in p.coefficients_in(var).into_iter().filter(|c| !c.is_zero()) {
        let next = match acc {
            None => c.normalize(),
            Some(a) => gcd_primitive(&a, &c.normalize()),
        };
        if next.is_constant() {
            return Polynomial::one(p.nvars());
        }
        acc = Some(next);
    }
    acc.unwrap_or_else(|| Polynomial::one(p.nvars()))
}

fn uni_primitive_part(u: Uni) -> Uni {
    let mut acc: Option<Polynomial> = None;
    for c in u.iter().filter(|c| !c.is_zero()) {
        let next = match acc {
            None => c.normalize(),
            Some(a) => gcd_primitive(&a, &c.normalize()),
        };
        if next.is_constant() {
            return u;
        }
        acc = Some(next);
    }
    match acc {
        Some(c) => uni_div_exact(&u, &c),
        None => u,
    }
}

/// Subresultant GCD of two primitive univariate polynomials of positive degree.
fn subresultant_gcd(a: Uni, b: Uni) -> Uni {
    let nvars = a[0].nvars();
    let (mut a, mut b) = if uni_degree(&b) > uni_degree(&a) { (b, a) } else { (a, b) };
    let mut g = Polynomial::one(nvars);
    let mut h = Polynomial::one(nvars);
    loop {
        let delta = (uni_degree(&a) - uni_degree(&b)) as u32;
        let r = prem(&a, &b);
        if r.is_empty() {
            return uni_primitive_part(b);
        }
        if uni_degree(&r) == 0 {
            return vec![Polynomial::one(nvars)];
        }
        a = b;
        b = trim(uni_div_exact(&r, &(&g * &h.pow(delta))));
        g = a[uni_degree(&a)].clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            d => g.pow(d).div_exact(&h.pow(d - 1)).expect("subresultant h update is exact"),
        };
    }
}

/// Squarefree part, normalized: `p / gcd(p, dp/dx_1, ..., dp/dx_n)`.
/// Constants map to 1, zero to zero.
pub fn squarefree_part(p: &Polynomial) -> Polynomial {
    if p.is_zero() {
        return p.clone();
    }
    if p.is_constant() {
        return Polynomial::one(p.nvars());
    }
    let mut g = p.normalize();
    for v in 0..p.nvars() {
        if g.is_one() {
            break;
        }
        let d = p.derivative(v);
        if !d.is_zero() {
            g = gcd(&g, &d);
        }
    }
    p.div_exact(&g).expect("gcd divides p").normalize()
}

/// Squarefree decomposition: pairwise-coprime squarefree factors `a_k` with
/// `p = c * prod a_k^k`. Constant factors are omitted.
pub fn squarefree_factors(p: &Polynomial) -> Vec<Polynomial> {
    let mut out = Vec::new();
    if p.is_constant() {
        return out;
    }
    let mut s = squarefree_part(p);
    let mut rest = p.div_exact(&s).expect("squarefree part divides p").normalize();
    while !s.is_constant() {
        let t = gcd(&s, &rest);
        let exact = s.div_exact(&t).expect("gcd divides").normalize();
        if !exact.is_constant() {
            out.push(exact);
        }
        rest = rest.div_exact(&t).expect("gcd divides");
        s = t;
    }
    out
}

/// Pairwise-coprime, squarefree, normalized, nonconstant polynomials whose
/// products of powers reproduce every input up to a rational constant.
/// Zero and constant inputs are dropped; output is sorted in descending
/// canonical order.
pub fn squarefree_gcd_free_basis(system: &PolySystem) -> PolySystem {
    let mut basis: Vec<Polynomial> = Vec::new();
    for p in system.polys() {
        if p.is_constant() {
            continue;
        }
        for q in squarefree_factors(p) {
            insert_coprime(&mut basis, q);
        }
    }
    basis.sort_by(|a, b| b.cmp(a));
    basis.dedup();
    PolySystem::new(system.nvars(), basis).expect("basis shares nvars")
}

/// Refines `basis` with the squarefree polynomial `q`, keeping members
/// pairwise coprime.
fn insert_coprime(basis: &mut Vec<Polynomial>, mut q: Polynomial) {
    let mut i = 0;
    while i < basis.len() && !q.is_constant() {
        let g = gcd(&basis[i], &q);
        if g.is_constant() {
            i += 1;
            continue;
        }
        let rest = basis[i].div_exact(&g).expect("gcd divides basis element");
        q = q.div_exact(&g).expect("gcd divides q").normalize();
        if rest.is_constant() {
            i += 1;
        } else {
            basis[i] = rest.normalize();
            basis.insert(i + 1, g);
            i += 2;
        }
    }
    if !q.is_constant() {
        basis.push(q);
    }
}
