//! Static analyzers: formal complexity and iterated-exponential growth bounds.

use std::f64::consts::{E, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use super::{RaKind, TermNode};
use crate::error::{Error, Result};

/// Nesting depth of `phi` / `dphi` applications.
pub fn fcpx(term: &TermNode) -> usize {
    match term {
        TermNode::Phi(a) | TermNode::DPhi(a) => fcpx(a) + 1,
        _ => term.children().into_iter().map(fcpx).max().unwrap_or(0),
    }
}

/// `exp` iterated `s` times at `x`; `exp_0(x) = x`.
pub fn exp_tower(s: u32, x: f64) -> f64 {
    (0..s).fold(x, |acc, _| acc.exp())
}

/// An `s` with `|F(x)| <= exp_s(||x||)` for every `x` in the domain of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GrowthExponent(pub u32);

impl GrowthExponent {
    pub fn bound(&self, norm: f64) -> f64 {
        exp_tower(self.0, norm)
    }
}

// Smallest s with c <= exp_s(0): 0, 1, e, e^e, e^(e^e), ...
fn const_level(c: f64) -> u32 {
    let c = c.abs();
    let mut s = 0;
    while exp_tower(s, 0.0) < c {
        s += 1;
        if s > 6 {
            break;
        }
    }
    s
}

/// A lower bound valid at every point where `term` is defined, when one is
/// structurally evident.
pub fn lower_bound(term: &TermNode) -> Option<f64> {
    match term {
        TermNode::Const(c) => Some(*c),
        TermNode::Var(_) | TermNode::Neg(_) => None,
        TermNode::Add(a, b) => Some(lower_bound(a)? + lower_bound(b)?),
        TermNode::Mul(a, b) if a == b => Some(lower_bound(a).map_or(0.0, |l| if l > 0.0 { l * l } else { 0.0 })),
        TermNode::Mul(a, b) => {
            let (la, lb) = (lower_bound(a)?, lower_bound(b)?);
            (la >= 0.0 && lb >= 0.0).then_some(la * lb)
        }
        TermNode::Exp(a) => Some(lower_bound(a).map_or(0.0, f64::exp)),
        TermNode::Log(a) => lower_bound(a).filter(|l| *l > 0.0).map(f64::ln),
        TermNode::Ra(p, _) => match &p.kind {
            RaKind::Sin | RaKind::Cos => Some(-1.0),
            RaKind::Atan => Some(-FRAC_PI_2),
            RaKind::Spline { .. } => None,
        },
        // phi > -2 everywhere and phi >= -1 on [0, inf)
        TermNode::Phi(a) => Some(if lower_bound(a).is_some_and(|l| l >= 0.0) { -1.0 } else { -2.0 }),
        TermNode::DPhi(_) => Some(0.0),
    }
}

/// Global bound on `|phi'|` the `dphi` rule relies on; `AbelFunction`
/// construction rejects seeds that exceed it.
pub const DPHI_GROWTH_BOUND: f64 = E;

/// Structural growth bound.
///
/// Rules: variables 0; a constant `c` the least `s` with `|c| <= exp_s(0)`;
/// `+` and `*` one above the larger child; negation unchanged; `exp` one
/// above its child; `phi` the child's level but at least 1 (2 when the
/// argument may be negative, since `phi` dips to -2); `dphi` 2; `log` needs
/// an argument with a positive structural lower bound.
pub fn growth_exponent(term: &TermNode) -> Result<GrowthExponent> {
    growth(term).map(GrowthExponent)
}

fn growth(term: &TermNode) -> Result<u32> {
    Ok(match term {
        TermNode::Var(_) => 0,
        TermNode::Const(c) => const_level(*c),
        TermNode::Add(a, b) | TermNode::Mul(a, b) => growth(a)?.max(growth(b)?) + 1,
        TermNode::Neg(a) => growth(a)?,
        TermNode::Exp(a) => growth(a)? + 1,
        TermNode::Log(a) => {
            let lb = lower_bound(a).filter(|l| *l > 0.0).ok_or_else(|| {
                Error::Growth(format!(
                    "log argument `{a}` may approach the boundary of (0, inf); no exp_s bound"
                ))
            })?;
            growth(a)?.max(const_level(lb.ln()))
        }
        TermNode::Ra(p, _) => match &p.kind {
            RaKind::Sin | RaKind::Cos => 1,
            RaKind::Atan => 2,
            RaKind::Spline { table, .. } => const_level(table.max_abs()),
        },
        TermNode::Phi(a) => {
            let floor = if lower_bound(a).is_some_and(|l| l >= 0.0) { 1 } else { 2 };
            growth(a)?.max(floor)
        }
        TermNode::DPhi(_) => const_level(DPHI_GROWTH_BOUND),
    })
}
