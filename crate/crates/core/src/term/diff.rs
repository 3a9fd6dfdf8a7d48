//! Symbolic partial derivatives, used to assemble critical-point systems.

use super::{RaKind, RaPrimitive, TermNode};
use crate::error::{Error, Result};

fn is_zero(t: &TermNode) -> bool {
    matches!(t, TermNode::Const(c) if *c == 0.0)
}

fn is_one(t: &TermNode) -> bool {
    matches!(t, TermNode::Const(c) if *c == 1.0)
}

// Zero/one folding only; anything else is left as built.
fn plus(a: TermNode, b: TermNode) -> TermNode {
    match (is_zero(&a), is_zero(&b)) {
        (true, _) => b,
        (_, true) => a,
        _ => TermNode::add(a, b),
    }
}

fn times(a: TermNode, b: TermNode) -> TermNode {
    if is_zero(&a) || is_zero(&b) {
        TermNode::Const(0.0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        TermNode::mul(a, b)
    }
}

fn negate(a: TermNode) -> TermNode {
    if is_zero(&a) {
        a
    } else {
        TermNode::neg(a)
    }
}

// 1/u written as exp(-log u); valid wherever log u is.
fn reciprocal(u: TermNode) -> TermNode {
    TermNode::exp(TermNode::neg(TermNode::log(u)))
}

/// Partial derivative of `term` with respect to variable `var`.
///
/// Fails only for `dphi` of a non-constant argument: the second derivative
/// of the Abel function has no node in the term language.
pub fn differentiate(term: &TermNode, var: usize) -> Result<TermNode> {
    Ok(match term {
        TermNode::Var(i) => TermNode::Const(if *i == var { 1.0 } else { 0.0 }),
        TermNode::Const(_) => TermNode::Const(0.0),
        TermNode::Add(a, b) => plus(differentiate(a, var)?, differentiate(b, var)?),
        TermNode::Mul(a, b) => plus(
            times(differentiate(a, var)?, (**b).clone()),
            times((**a).clone(), differentiate(b, var)?),
        ),
        TermNode::Neg(a) => negate(differentiate(a, var)?),
        TermNode::Exp(a) => times(term.clone(), differentiate(a, var)?),
        TermNode::Log(a) => times(differentiate(a, var)?, reciprocal((**a).clone())),
        TermNode::Ra(p, a) => {
            let da = differentiate(a, var)?;
            if is_zero(&da) {
                return Ok(da);
            }
            let outer = match &p.kind {
                RaKind::Sin => TermNode::ra(
                    RaPrimitive {
                        kind: RaKind::Cos,
                        ..p.clone()
                    },
                    (**a).clone(),
                ),
                RaKind::Cos => TermNode::neg(TermNode::ra(
                    RaPrimitive {
                        kind: RaKind::Sin,
                        ..p.clone()
                    },
                    (**a).clone(),
                )),
                RaKind::Atan => reciprocal(TermNode::add(
                    TermNode::Const(1.0),
                    TermNode::square((**a).clone()),
                )),
                RaKind::Spline { table, order } => {
                    if *order >= 2 {
                        return Err(Error::Unsupported(
                            "derivative of a spline primitive beyond second order".into(),
                        ));
                    }
                    TermNode::ra(RaPrimitive::spline(table.clone(), order + 1), (**a).clone())
                }
            };
            times(outer, da)
        }
        TermNode::Phi(a) => times(TermNode::dphi((**a).clone()), differentiate(a, var)?),
        TermNode::DPhi(a) => {
            let da = differentiate(a, var)?;
            if !is_zero(&da) {
                return Err(Error::Unsupported(
                    "derivative of dphi: the second derivative of phi is not a term".into(),
                ));
            }
            da
        }
    })
}
