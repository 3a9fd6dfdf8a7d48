//! Krawczyk existence and uniqueness test.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Interval, IntervalBox};
use crate::abel::AbelFunction;
use crate::census::SquareSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Exactly one zero in the box, and it is non-singular.
    UniqueZero,
    NoZero,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrawczykResult {
    pub verdict: Verdict,
    /// Enclosure of the zero when `verdict` is `UniqueZero`.
    pub contracted: Option<IntervalBox>,
}

impl KrawczykResult {
    fn of(verdict: Verdict) -> Self {
        KrawczykResult {
            verdict,
            contracted: None,
        }
    }
}

const REFINE_STEPS: usize = 6;

/// Range test, then the Krawczyk operator
/// `K = m - Y f(m) + (I - Y J(X)) (X - m)` with `Y` the inverse of the
/// Jacobian at the midpoint. `K` inside the interior of `X` certifies a
/// unique non-singular zero; `K` disjoint from `X` excludes zeros.
///
/// A domain error over the whole box means the system is undefined there
/// and yields `NoZero`. On a partially defined box only the range over the
/// defined part is tested: it can exclude zeros, otherwise `Unknown`.
pub fn krawczyk_test(system: &SquareSystem, bx: &IntervalBox, abel: &AbelFunction) -> Result<KrawczykResult> {
    let n = system.dim();
    if bx.dim() != n {
        return Err(Error::Invalid(format!("box of dimension {} for a system in {n} unknowns", bx.dim())));
    }
    let range = match system.eval_box(bx, abel) {
        Ok(r) => r,
        Err(e) if e.is_total_domain() => return Ok(KrawczykResult::of(Verdict::NoZero)),
        Err(Error::Domain { .. }) => {
            let verdict = match system.eval_box_restricted(bx, abel) {
                Ok(r) if r.iter().any(|r| !r.contains_zero()) => Verdict::NoZero,
                Err(e) if e.is_total_domain() => Verdict::NoZero,
                Ok(_) | Err(Error::Domain { .. }) => Verdict::Unknown,
                Err(e) => return Err(e),
            };
            return Ok(KrawczykResult::of(verdict));
        }
        Err(e) => return Err(e),
    };
    if range.iter().any(|r| !r.contains_zero()) {
        return Ok(KrawczykResult::of(Verdict::NoZero));
    }
    let (k, _) = match krawczyk_step(system, bx, abel)? {
        Some(step) => step,
        None => return Ok(KrawczykResult::of(Verdict::Unknown)),
    };
    if k.interior_of(bx) {
        let mut enclosure = k.intersect(bx).unwrap_or(k);
        for _ in 0..REFINE_STEPS {
            match krawczyk_step(system, &enclosure, abel)? {
                Some((next, _)) => match next.intersect(&enclosure) {
                    Some(tighter) if tighter.max_width() < enclosure.max_width() => enclosure = tighter,
                    _ => break,
                },
                None => break,
            }
        }
        return Ok(KrawczykResult {
            verdict: Verdict::UniqueZero,
            contracted: Some(enclosure),
        });
    }
    if k.intersect(bx).is_none() {
        return Ok(KrawczykResult::of(Verdict::NoZero));
    }
    Ok(KrawczykResult::of(Verdict::Unknown))
}

// One application of the operator; None when the preconditioner is unusable
// or the evaluation is undefined somewhere on the box.
fn krawczyk_step(
    system: &SquareSystem,
    bx: &IntervalBox,
    abel: &AbelFunction,
) -> Result<Option<(IntervalBox, DMatrix<f64>)>> {
    let n = system.dim();
    let m = bx.mid();
    let point = IntervalBox::point(&m);
    let fm = match system.eval_box(&point, abel) {
        Ok(v) => v,
        Err(Error::Domain { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let jx = match system.jacobian_box(bx, abel) {
        Ok(j) => j,
        Err(Error::Domain { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let jm = match system.jacobian(&m, abel) {
        Ok(j) => j,
        Err(Error::Domain { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if jm.iter().any(|v| !v.is_finite()) {
        return Ok(None);
    }
    let y = match jm.clone().try_inverse() {
        Some(y) if y.iter().all(|v| v.is_finite()) => y,
        _ => return Ok(None),
    };
    let dx: Vec<Interval> = bx.0.iter().zip(&m).map(|(x, mi)| x.sub(&Interval::point(*mi))).collect();
    let mut k = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Interval::point(m[i]);
        for (j, f) in fm.iter().enumerate() {
            acc = acc.sub(&f.mul_point(y[(i, j)]));
        }
        for (j, d) in dx.iter().enumerate() {
            // (I - Y J(X))_{ij}
            let mut c = Interval::point(if i == j { 1.0 } else { 0.0 });
            for (l, row) in jx.iter().enumerate() {
                c = c.sub(&row[j].mul_point(y[(i, l)]));
            }
            acc = acc.add(&c.mul(d));
        }
        k.push(acc);
    }
    Ok(Some((IntervalBox::new(k), y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{build_system, Params};

    fn square() -> SquareSystem {
        build_system(&["x1"], &["x1*x1 - 1"], &Params::zeros(1)).unwrap()
    }

    #[test]
    fn verdicts_on_the_parabola() {
        let abel = AbelFunction::default_build();
        let s = square();
        let at = |lo, hi| krawczyk_test(&s, &IntervalBox::from_bounds(&[(lo, hi)]), &abel).unwrap();
        let r = at(0.9, 1.1);
        assert_eq!(r.verdict, Verdict::UniqueZero);
        assert!(r.contracted.unwrap().0[0].contains(1.0));
        assert_eq!(at(2.0, 3.0).verdict, Verdict::NoZero);
        assert_eq!(at(-2.0, 2.0).verdict, Verdict::Unknown);
    }

    #[test]
    fn log_outside_domain_is_no_zero() {
        let abel = AbelFunction::default_build();
        let s = build_system(&["x1"], &["log(x1)"], &Params::zeros(1)).unwrap();
        let r = krawczyk_test(&s, &IntervalBox::from_bounds(&[(-3.0, -1.0)]), &abel).unwrap();
        assert_eq!(r.verdict, Verdict::NoZero);
        let r = krawczyk_test(&s, &IntervalBox::from_bounds(&[(-1.0, 3.0)]), &abel).unwrap();
        assert_eq!(r.verdict, Verdict::Unknown);
    }
}
