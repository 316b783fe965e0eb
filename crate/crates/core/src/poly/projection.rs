//! Lazard projection with basis simplification.

use super::gcd::squarefree_gcd_free_basis;
use super::resultant::{discriminant, resultant};
use super::{PolySystem, Polynomial};
use crate::error::Result;

/// Projection factors before simplification, in generation order: for each
/// member with positive degree in `var` its leading coefficient, trailing
/// coefficient (lowest power actually present) and, from degree 2 upward,
/// its discriminant; then the resultant of every unordered pair of such
/// members. Members free of `var` pass through unchanged.
pub fn lazard_projection_raw(system: &PolySystem, var: usize) -> Result<Vec<Polynomial>> {
    system.check_var(var)?;
    let mut out = Vec::new();
    let mut active = Vec::new();
    for p in system.polys() {
        if p.is_zero() {
            continue;
        }
        let deg = p.degree_in(var);
        if deg == 0 {
            out.push(p.clone());
            continue;
        }
        let coeffs = p.coefficients_in(var);
        out.push(coeffs[deg as usize].clone());
        out.push(coeffs[p.low_degree_in(var) as usize].clone());
        if deg >= 2 {
            out.push(discriminant(p, var)?);
        }
        active.push(p);
    }
    for (i, p) in active.iter().enumerate() {
        for q in &active[i + 1..] {
            out.push(resultant(p, q, var)?);
        }
    }
    Ok(out)
}

/// Lazard projection of `system` eliminating `var`, simplified to a
/// squarefree GCD-free basis. The variable count is kept; `var` no longer
/// occurs in the result.
pub fn lazard_projection(system: &PolySystem, var: usize) -> Result<PolySystem> {
    let raw = lazard_projection_raw(system, var)?;
    let raw = PolySystem::new(system.nvars(), raw)?;
    Ok(squarefree_gcd_free_basis(&raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::poly::testing::*;

    fn sys(polys: &[&str]) -> PolySystem {
        PolySystem::new(3, polys.iter().map(|s| p(s)).collect()).unwrap()
    }

    #[test]
    fn worked_example() {
        let s3 = sys(&["x1*x2*x3 - 1", "x1^2 - x2^2*x3"]);
        let raw = lazard_projection_raw(&s3, 2).unwrap();
        assert_eq!(raw, vec![p("x1*x2"), p("-1"), p("-x2^2"), p("x1^2"), p("x1^3*x2 - x2^2")]);
        let mut normalized: Vec<_> = raw.iter().filter(|q| !q.is_constant()).map(|q| q.normalize()).collect();
        normalized.sort();
        let mut expected = vec![p("x1*x2"), p("x1^2"), p("x2^2"), p("x1^3*x2 - x2^2")];
        expected.sort();
        assert_eq!(normalized, expected);

        let s2 = lazard_projection(&s3, 2).unwrap();
        assert_eq!(s2.polys(), &[p("x1^3 - x2"), p("x1"), p("x2")]);
    }

    #[test]
    fn pass_through_when_var_absent() {
        let s = sys(&["x1*x2 - 1", "x2^2"]);
        let proj = lazard_projection(&s, 2).unwrap();
        assert_eq!(proj, squarefree_gcd_free_basis(&s));
        assert_eq!(proj.polys(), &[p("x1*x2 - 1"), p("x2")]);
    }

    #[test]
    fn single_quadratic() {
        let s = sys(&["x3^2 - x1"]);
        assert_eq!(lazard_projection_raw(&s, 2).unwrap(), vec![p("1"), p("-x1"), p("4*x1")]);
        assert_eq!(lazard_projection(&s, 2).unwrap().polys(), &[p("x1")]);
    }

    #[test]
    fn trailing_coefficient_skips_missing_low_powers() {
        // x3*(x1*x3 + x2): coefficient of x3^0 is zero, the lowest present is x2
        let s = sys(&["x1*x3^2 + x2*x3"]);
        let raw = lazard_projection_raw(&s, 2).unwrap();
        assert_eq!(raw[0], p("x1"));
        assert_eq!(raw[1], p("x2"));
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            lazard_projection(&sys(&["x1"]), 3),
            Err(Error::VariableOutOfRange { index: 3, nvars: 3 })
        ));
    }
}
