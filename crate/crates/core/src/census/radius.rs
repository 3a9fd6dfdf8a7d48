//! Search radius from the growth argument for systems with `phi`-monomials.

use serde::{Deserialize, Serialize};

use super::{Monomial, SquareSystem};
use crate::abel::AbelFunction;
use crate::error::Result;
use crate::term::{exp_tower, growth_exponent, MonomialKind};

pub const DEFAULT_RADIUS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    /// May be infinite when `exp_s(d)` overflows.
    pub radius: f64,
    /// Set for phi-free systems, where the default radius is a guess.
    pub heuristic: bool,
    /// Largest growth exponent over registered monomial arguments.
    pub s: u32,
    /// Number of phi-monomials and of dphi-monomials.
    pub k: usize,
    pub u: usize,
    pub d: f64,
}

/// Derive the constants `s` and `d` of the boundedness argument and return
/// `exp_s(d)`:
///
/// * `s` is the largest growth exponent of a registered argument, and the
///   dominating function of the zero set is taken to obey the same bound;
/// * `d > 2 (2n + 2 + u sup|phi'|)`;
/// * `k |phi(exp_{2s}(z))| < z / 2` for every `z >= d`.
///
/// The last condition is solved through `phi(exp_{2s}(z)) = phi(z) + 2s`.
/// Past `z0 = max(e, 2 k sup_{[1,e]} phi')` the left side grows slower than
/// `z / 2` (because `phi'(z) <= sup phi' / z` there), so the first crossing
/// beyond `z0` found by bisection holds for all larger `z`.
pub fn search_radius(system: &SquareSystem, fallback: f64, abel: &AbelFunction) -> Result<RadiusReport> {
    let registry: &[Monomial] = system.registry();
    if registry.is_empty() {
        return Ok(RadiusReport {
            radius: fallback,
            heuristic: true,
            s: 0,
            k: 0,
            u: 0,
            d: 0.0,
        });
    }
    let mut s = 0;
    for m in registry {
        s = s.max(growth_exponent(&m.argument)?.0);
    }
    let k = registry.iter().filter(|m| m.kind == MonomialKind::Phi).count();
    let u = registry.len() - k;
    let n = system.dim() as f64;
    let floor_iv = 2.0 * (2.0 * n + 2.0 + u as f64 * abel.sup_dphi_global());
    let d = solve_item_iii(k, s, floor_iv, abel)?;
    Ok(RadiusReport {
        radius: exp_tower(s, d),
        heuristic: false,
        s,
        k,
        u,
        d,
    })
}

/// Least `d` above `floor` (strictly) such that `k (phi(z) + 2s) < z / 2` for `z >= d`.
pub fn solve_item_iii(k: usize, s: u32, floor: f64, abel: &AbelFunction) -> Result<f64> {
    let start = floor * (1.0 + 1e-9) + 1e-9;
    if k == 0 {
        return Ok(start);
    }
    let z0 = std::f64::consts::E.max(2.0 * k as f64 * abel.sup_dphi_fundamental());
    let gap = |z: f64| -> Result<f64> { Ok(z / 2.0 - k as f64 * (abel.eval(z)? + 2.0 * s as f64)) };
    let lo0 = start.max(z0);
    if gap(lo0)? > 0.0 {
        return Ok(lo0);
    }
    let (mut lo, mut hi) = (lo0, lo0 * 2.0);
    while gap(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{build_system, Params};

    #[test]
    fn phi_free_is_heuristic() {
        let abel = AbelFunction::default_build();
        let s = build_system(&["x1"], &["x1*x1 - 1"], &Params::zeros(1)).unwrap();
        let r = search_radius(&s, DEFAULT_RADIUS, &abel).unwrap();
        assert!(r.heuristic);
        assert_eq!(r.radius, DEFAULT_RADIUS);
    }

    #[test]
    fn radius_grows_with_s() {
        let abel = AbelFunction::default_build();
        let p = Params::zeros(2);
        let a = build_system(&["x1", "x2"], &["phi(x1) - 0.5", "x2"], &p).unwrap();
        let b = build_system(&["x1", "x2"], &["phi(exp(x1)) - 0.5", "x2"], &p).unwrap();
        let c = build_system(&["x1", "x2"], &["phi(exp(exp(x1))) - 0.5", "x2"], &p).unwrap();
        let (ra, rb, rc) = (
            search_radius(&a, 8.0, &abel).unwrap(),
            search_radius(&b, 8.0, &abel).unwrap(),
            search_radius(&c, 8.0, &abel).unwrap(),
        );
        assert_eq!((ra.s, rb.s, rc.s), (0, 1, 2));
        assert!(ra.radius.is_finite() && !ra.heuristic);
        assert!(ra.d <= rb.d && rb.d <= rc.d);
        assert!(ra.radius <= rb.radius && rb.radius <= rc.radius);
    }
}
