//! Resultants and discriminants with respect to one variable.
//!
//! Two independent routes are provided: a fraction-free (Bareiss) determinant
//! of the Sylvester matrix, and the subresultant polynomial remainder
//! sequence. [`resultant`] uses the latter; the former is kept public so the
//! two can be checked against each other.

use super::Polynomial;
use crate::error::{Error, Result};

/// Dense univariate view: coefficient `k` multiplies `var^k`. Never has a
/// zero leading entry unless empty.
pub(crate) type Uni = Vec<Polynomial>;

pub(crate) fn trim(mut u: Uni) -> Uni {
    while u.last().is_some_and(Polynomial::is_zero) {
        u.pop();
    }
    u
}

pub(crate) fn uni_degree(u: &Uni) -> usize {
    u.len().saturating_sub(1)
}

pub(crate) fn uni_is_zero(u: &Uni) -> bool {
    u.is_empty()
}

fn uni_scale(u: &Uni, c: &Polynomial) -> Uni {
    trim(u.iter().map(|x| x * c).collect())
}

pub(crate) fn uni_div_exact(u: &Uni, c: &Polynomial) -> Uni {
    u.iter().map(|x| x.div_exact(c).expect("subresultant division is exact")).collect()
}

/// Pseudo-remainder: `lc(b)^(deg a - deg b + 1) * a mod b`.
pub(crate) fn prem(a: &Uni, b: &Uni) -> Uni {
    assert!(!b.is_empty(), "pseudo-division by zero");
    let db = uni_degree(b);
    if a.len() < b.len() {
        return a.clone();
    }
    let lcb = b[db].clone();
    let mut r = a.clone();
    let mut steps = 0usize;
    while !r.is_empty() && r.len() > db {
        let dr = uni_degree(&r);
        let lcr = r[dr].clone();
        let shift = dr - db;
        let mut next = uni_scale(&r, &lcb);
        next.resize(r.len(), Polynomial::zero(lcb.nvars()));
        for (k, bk) in b.iter().enumerate() {
            next[k + shift] = &next[k + shift] - &(bk * &lcr);
        }
        r = trim(next);
        steps += 1;
    }
    let total = uni_degree(a) - db + 1;
    if total > steps {
        let f = lcb.pow((total - steps) as u32);
        r = uni_scale(&r, &f);
    }
    r
}

fn check_inputs(p: &Polynomial, q: &Polynomial, var: usize) -> Result<()> {
    if var >= p.nvars() {
        return Err(Error::VariableOutOfRange { index: var, nvars: p.nvars() });
    }
    if p.is_zero() || q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree_in(var) == 0 && q.degree_in(var) == 0 {
        return Err(Error::BothConstant);
    }
    Ok(())
}

/// Resultant of `p` and `q` as univariate polynomials in `var`, i.e. the
/// determinant of their Sylvester matrix with the rows of `p` first.
pub fn resultant(p: &Polynomial, q: &Polynomial, var: usize) -> Result<Polynomial> {
    resultant_subresultant(p, q, var)
}

/// Resultant via the subresultant PRS (Collins / Brown-Traub).
pub fn resultant_subresultant(p: &Polynomial, q: &Polynomial, var: usize) -> Result<Polynomial> {
    check_inputs(p, q, var)?;
    let nvars = p.nvars();
    let (m, n) = (p.degree_in(var), q.degree_in(var));
    if n == 0 {
        return Ok(q.pow(m));
    }
    if m == 0 {
        return Ok(p.pow(n));
    }
    let mut a = p.coefficients_in(var);
    let mut b = q.coefficients_in(var);
    let mut negate = false;
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
        if uni_degree(&a) % 2 == 1 && uni_degree(&b) % 2 == 1 {
            negate = true;
        }
    }
    let mut g = Polynomial::one(nvars);
    let mut h = Polynomial::one(nvars);
    loop {
        let (da, db) = (uni_degree(&a), uni_degree(&b));
        let delta = (da - db) as u32;
        if da % 2 == 1 && db % 2 == 1 {
            negate = !negate;
        }
        let r = prem(&a, &b);
        a = b;
        if uni_is_zero(&r) {
            return Ok(Polynomial::zero(nvars));
        }
        b = uni_div_exact(&r, &(&g * &h.pow(delta)));
        g = a[uni_degree(&a)].clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            d => g.pow(d).div_exact(&h.pow(d - 1)).expect("subresultant h update is exact"),
        };
        if uni_degree(&b) == 0 {
            break;
        }
    }
    let da = uni_degree(&a) as u32;
    let res = b[0].pow(da).div_exact(&h.pow(da - 1)).expect("final subresultant division is exact");
    Ok(if negate { -&res } else { res })
}

/// Fraction-free Gaussian elimination; entries must lie in an integral
/// domain for the divisions to be exact.
pub(crate) fn bareiss_determinant(mut m: Vec<Vec<Polynomial>>, nvars: usize) -> Polynomial {
    let n = m.len();
    if n == 0 {
        return Polynomial::one(nvars);
    }
    let mut sign = false;
    let mut prev = Polynomial::one(nvars);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = !sign;
                }
                None => return Polynomial::zero(nvars),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = Polynomial::zero(nvars);
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign {
        -&det
    } else {
        det
    }
}

/// Resultant as the determinant of the Sylvester matrix.
pub fn resultant_sylvester(p: &Polynomial, q: &Polynomial, var: usize) -> Result<Polynomial> {
    check_inputs(p, q, var)?;
    let nvars = p.nvars();
    let (m, n) = (p.degree_in(var) as usize, q.degree_in(var) as usize);
    let pc = p.coefficients_in(var);
    let qc = q.coefficients_in(var);
    let size = m + n;
    let mut mat = vec![vec![Polynomial::zero(nvars); size]; size];
    for row in 0..n {
        for k in 0..=m {
            mat[row][row + k] = pc[m - k].clone();
        }
    }
    for row in 0..m {
        for k in 0..=n {
            mat[n + row][row + k] = qc[n - k].clone();
        }
    }
    Ok(bareiss_determinant(mat, nvars))
}

/// Discriminant of `p` in `var`:
/// `(-1)^(d(d-1)/2) * res(p, dp/dvar) / lc(p)`.
pub fn discriminant(p: &Polynomial, var: usize) -> Result<Polynomial> {
    if var >= p.nvars() {
        return Err(Error::VariableOutOfRange { index: var, nvars: p.nvars() });
    }
    let d = p.degree_in(var);
    if d < 2 {
        return Err(Error::DegreeTooLow { degree: d });
    }
    let res = resultant(p, &p.derivative(var), var)?;
    let lc = p.coefficients_in(var).pop().expect("nonzero polynomial");
    let quotient = res
        .div_exact(&lc)
        .ok_or_else(|| Error::Invariant("leading coefficient does not divide res(p, p')".into()))?;
    let sign_negative = (d * (d - 1) / 2) % 2 == 1;
    Ok(if sign_negative { -&quotient } else { quotient })
}
