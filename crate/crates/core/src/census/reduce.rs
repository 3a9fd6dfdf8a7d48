//! Replacement of `phi` / `dphi` applications by tabulated restricted primitives.

use std::sync::Arc;

use super::SquareSystem;
use crate::abel::AbelFunction;
use crate::error::{Error, Result};
use crate::interval::IntervalBox;
use crate::term::{evaluate, HermiteSpline, RaPrimitive, TermNode};

/// Target knot spacing of the replacement tables.
const KNOT_SPACING: f64 = 1e-3;
const MIN_SEGMENTS: usize = 64;
const MAX_SEGMENTS: usize = 200_000;

/// Margin on the radius so that inflated boxes near the boundary of the
/// search cube stay inside the table domains.
pub const DOMAIN_MARGIN: f64 = 1.3;

/// Replace each `phi(f)` and `dphi(g)` whose argument range over the cube of
/// radius `DOMAIN_MARGIN * radius` is bounded by a Hermite table of `phi`
/// (resp. `phi'`) on that range. Innermost applications are replaced first,
/// so nested applications disappear together.
pub fn reduce_phi_complexity(system: &SquareSystem, radius: f64, abel: &AbelFunction) -> Result<SquareSystem> {
    let n = system.dim();
    let cube = IntervalBox::cube(n, DOMAIN_MARGIN * radius);
    let point = cube.extended(&system.params().values());
    let mut failure: Option<Error> = None;
    let equations = system
        .equations()
        .iter()
        .map(|e| {
            e.map_bottom_up(&mut |node| {
                if failure.is_some() {
                    return node;
                }
                let (arg, derivative) = match &node {
                    TermNode::Phi(a) => ((**a).clone(), false),
                    TermNode::DPhi(a) => ((**a).clone(), true),
                    _ => return node,
                };
                match table_for(&arg, &point, derivative, abel) {
                    Ok(table) => TermNode::ra(RaPrimitive::spline(table, 0), arg),
                    Err(e) => {
                        failure = Some(e);
                        node
                    }
                }
            })
        })
        .collect::<Vec<_>>();
    if let Some(e) = failure {
        return Err(e);
    }
    system.with_equations(equations)
}

fn table_for(
    arg: &TermNode,
    point: &[crate::interval::Interval],
    derivative: bool,
    abel: &AbelFunction,
) -> Result<Arc<HermiteSpline>> {
    let range = evaluate(arg, point, abel)?;
    if !range.is_finite() {
        return Err(Error::Unsupported(format!("argument `{arg}` has unbounded range {range} over the ball")));
    }
    let pad = 1e-9 * (1.0 + range.mag());
    let (lo, hi) = (range.lo - pad, range.hi + pad);
    let segments = (((hi - lo) / KNOT_SPACING).ceil() as usize).clamp(MIN_SEGMENTS, MAX_SEGMENTS);
    let f = |x: f64| {
        let v = if derivative {
            (abel.eval_deriv(x), abel.eval_deriv2(x))
        } else {
            (abel.eval(x), abel.eval_deriv(x))
        };
        match v {
            (Ok(a), Ok(b)) => (a, b),
            _ => (f64::NAN, f64::NAN),
        }
    };
    let table = HermiteSpline::from_fn(lo, hi, segments, f);
    if table.max_abs().is_nan() {
        return Err(Error::Unsupported(format!("abel evaluation failed on [{lo}, {hi}]")));
    }
    Ok(Arc::new(table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{build_system, Params};
    use crate::term::fcpx;

    #[test]
    fn phi_is_replaced_and_fcpx_drops() {
        let abel = AbelFunction::default_build();
        let s = build_system(&["x1", "x2"], &["phi(x1) - 0.5", "x2"], &Params::zeros(2)).unwrap();
        let r = reduce_phi_complexity(&s, 2.0, &abel).unwrap();
        assert_eq!(fcpx(&s.equations()[0]), 1);
        assert_eq!(fcpx(&r.equations()[0]), 0);
        assert!(r.registry().is_empty());
        for x in [-2.0, -0.3, 0.9, 1.7] {
            let a = s.eval(&[x, 0.0], &abel).unwrap()[0];
            let b = r.eval(&[x, 0.0], &abel).unwrap()[0];
            assert!((a - b).abs() < 1e-9, "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn phi_free_unchanged_and_unbounded_rejected() {
        let abel = AbelFunction::default_build();
        let s = build_system(&["x1"], &["x1*x1 - 1"], &Params::zeros(1)).unwrap();
        assert_eq!(reduce_phi_complexity(&s, 2.0, &abel).unwrap(), s);
        let bad = build_system(&["x1"], &["phi(exp(exp(exp(exp(x1)))))"], &Params::zeros(1)).unwrap();
        assert!(reduce_phi_complexity(&bad, 8.0, &abel).is_err());
    }
}
