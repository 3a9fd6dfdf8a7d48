//! Generic evaluation over scalar domains (floats, intervals) and forward-mode
//! jets over either.

use super::{RaKind, RaPrimitive, TermNode};
use crate::abel::AbelFunction;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalBox};

/// Scalar domain a term can be evaluated in.
pub trait Arith: Clone {
    fn constant(c: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn sqr(&self) -> Self {
        self.mul(self)
    }
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn recip(&self) -> Result<Self>;
    /// Primitive value (`extra = 0`) or its derivative (`extra = 1`).
    fn ra(&self, p: &RaPrimitive, extra: u8) -> Result<Self>;
    /// `order`-th derivative of the Abel function, `order <= 2`.
    fn abel(&self, abel: &AbelFunction, order: u8) -> Result<Self>;
}

impl Arith for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self> {
        if *self > 0.0 {
            Ok(f64::ln(*self))
        } else {
            Err(Error::domain("log", self, "(0, inf)", true))
        }
    }
    fn recip(&self) -> Result<Self> {
        if *self != 0.0 {
            Ok(1.0 / self)
        } else {
            Err(Error::domain("recip", self, "R \\ {0}", true))
        }
    }
    fn ra(&self, p: &RaPrimitive, extra: u8) -> Result<Self> {
        if !p.in_domain(*self) {
            return Err(Error::domain(p.name(), self, &format!("[{}, {}]", p.lo, p.hi), true));
        }
        Ok(p.value(*self, extra))
    }
    fn abel(&self, abel: &AbelFunction, order: u8) -> Result<Self> {
        match order {
            0 => abel.eval(*self),
            1 => abel.eval_deriv(*self),
            _ => abel.eval_deriv2(*self),
        }
    }
}

impl Arith for Interval {
    fn constant(c: f64) -> Self {
        Interval::point(c)
    }
    fn add(&self, o: &Self) -> Self {
        Interval::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Interval::mul(self, o)
    }
    fn neg(&self) -> Self {
        Interval::neg(self)
    }
    fn sqr(&self) -> Self {
        Interval::sqr(self)
    }
    fn exp(&self) -> Self {
        Interval::exp(self)
    }
    fn ln(&self) -> Result<Self> {
        Interval::ln(self)
    }
    fn recip(&self) -> Result<Self> {
        Interval::recip(self)
    }
    fn ra(&self, p: &RaPrimitive, extra: u8) -> Result<Self> {
        if self.lo < p.lo || self.hi > p.hi {
            let total = self.hi < p.lo || self.lo > p.hi;
            return Err(Error::domain(p.name(), self, &format!("[{}, {}]", p.lo, p.hi), total));
        }
        Ok(match (&p.kind, extra) {
            (RaKind::Sin, 0) => self.sin(),
            (RaKind::Sin, _) => self.cos(),
            (RaKind::Cos, 0) => self.cos(),
            (RaKind::Cos, _) => self.sin().neg(),
            (RaKind::Atan, 0) => self.atan(),
            (RaKind::Atan, _) => Interval::point(1.0).add(&self.sqr()).recip()?,
            (RaKind::Spline { table, order }, e) => table.eval_interval(*self, order + e),
        })
    }
    fn abel(&self, abel: &AbelFunction, order: u8) -> Result<Self> {
        abel.eval_interval(*self, order)
    }
}

/// Interval enclosing a term's values at the points of a box where the term
/// is defined. Partial domain violations are clipped instead of raised, so
/// the result can exclude zeros but says nothing about definedness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Restricted(pub Interval);

impl Arith for Restricted {
    fn constant(c: f64) -> Self {
        Restricted(Interval::point(c))
    }
    fn add(&self, o: &Self) -> Self {
        Restricted(self.0.add(&o.0))
    }
    fn mul(&self, o: &Self) -> Self {
        Restricted(self.0.mul(&o.0))
    }
    fn neg(&self) -> Self {
        Restricted(self.0.neg())
    }
    fn sqr(&self) -> Self {
        Restricted(self.0.sqr())
    }
    fn exp(&self) -> Self {
        Restricted(self.0.exp())
    }
    fn ln(&self) -> Result<Self> {
        let x = self.0;
        if x.lo > 0.0 {
            return Ok(Restricted(x.ln()?));
        }
        if x.hi <= 0.0 {
            return Err(Error::domain("log", x, "(0, inf)", true));
        }
        Ok(Restricted(Interval::new(f64::NEG_INFINITY, Interval::new(x.hi, x.hi).ln()?.hi)))
    }
    fn recip(&self) -> Result<Self> {
        let x = self.0;
        if !x.contains_zero() {
            return Ok(Restricted(x.recip()?));
        }
        if x.lo == 0.0 && x.hi == 0.0 {
            return Err(Error::domain("recip", x, "R \\ {0}", true));
        }
        Ok(Restricted(if x.lo == 0.0 {
            Interval::new(Interval::point(x.hi).recip()?.lo, f64::INFINITY)
        } else if x.hi == 0.0 {
            Interval::new(f64::NEG_INFINITY, Interval::point(x.lo).recip()?.hi)
        } else {
            Interval::entire()
        }))
    }
    fn ra(&self, p: &RaPrimitive, extra: u8) -> Result<Self> {
        let dom = Interval::new(p.lo, p.hi);
        match self.0.intersect(&dom) {
            Some(x) => Ok(Restricted(x.ra(p, extra)?)),
            None => Err(Error::domain(p.name(), self.0, &format!("[{}, {}]", p.lo, p.hi), true)),
        }
    }
    fn abel(&self, abel: &AbelFunction, order: u8) -> Result<Self> {
        Ok(Restricted(self.0.abel(abel, order)?))
    }
}

/// Generic evaluator. `point` must cover every variable index in the term.
pub fn evaluate<T: Arith>(term: &TermNode, point: &[T], abel: &AbelFunction) -> Result<T> {
    Ok(match term {
        TermNode::Var(i) => point
            .get(*i)
            .cloned()
            .ok_or(Error::Dimension { index: *i, dim: point.len() })?,
        TermNode::Const(c) => T::constant(*c),
        TermNode::Add(a, b) => evaluate(a, point, abel)?.add(&evaluate(b, point, abel)?),
        TermNode::Mul(a, b) if a == b => evaluate(a, point, abel)?.sqr(),
        TermNode::Mul(a, b) => evaluate(a, point, abel)?.mul(&evaluate(b, point, abel)?),
        TermNode::Neg(a) => evaluate(a, point, abel)?.neg(),
        TermNode::Exp(a) => evaluate(a, point, abel)?.exp(),
        TermNode::Log(a) => evaluate(a, point, abel)?.ln()?,
        TermNode::Ra(p, a) => evaluate(a, point, abel)?.ra(p, 0)?,
        TermNode::Phi(a) => evaluate(a, point, abel)?.abel(abel, 0)?,
        TermNode::DPhi(a) => evaluate(a, point, abel)?.abel(abel, 1)?,
    })
}

/// Value together with the gradient over the first `active` variables.
#[derive(Debug, Clone)]
pub struct Jet<T> {
    pub value: T,
    pub grad: Vec<T>,
}

impl<T: Arith> Jet<T> {
    fn scale(&self, value: T, factor: &T) -> Jet<T> {
        Jet {
            value,
            grad: self.grad.iter().map(|g| g.mul(factor)).collect(),
        }
    }
}

/// Forward-mode evaluation: value and partial derivatives with respect to
/// variables `0..active`. Variables at or beyond `active` are held fixed.
pub fn evaluate_jet<T: Arith>(
    term: &TermNode,
    point: &[T],
    active: usize,
    abel: &AbelFunction,
) -> Result<Jet<T>> {
    let zero = || vec![T::constant(0.0); active];
    Ok(match term {
        TermNode::Var(i) => {
            let value = point
                .get(*i)
                .cloned()
                .ok_or(Error::Dimension { index: *i, dim: point.len() })?;
            let mut grad = zero();
            if *i < active {
                grad[*i] = T::constant(1.0);
            }
            Jet { value, grad }
        }
        TermNode::Const(c) => Jet {
            value: T::constant(*c),
            grad: zero(),
        },
        TermNode::Add(a, b) => {
            let (a, b) = (evaluate_jet(a, point, active, abel)?, evaluate_jet(b, point, active, abel)?);
            Jet {
                value: a.value.add(&b.value),
                grad: a.grad.iter().zip(&b.grad).map(|(x, y)| x.add(y)).collect(),
            }
        }
        TermNode::Mul(a, b) if a == b => {
            let a = evaluate_jet(a, point, active, abel)?;
            let twice = a.value.add(&a.value);
            a.scale(a.value.sqr(), &twice)
        }
        TermNode::Mul(a, b) => {
            let (a, b) = (evaluate_jet(a, point, active, abel)?, evaluate_jet(b, point, active, abel)?);
            Jet {
                value: a.value.mul(&b.value),
                grad: a
                    .grad
                    .iter()
                    .zip(&b.grad)
                    .map(|(da, db)| da.mul(&b.value).add(&a.value.mul(db)))
                    .collect(),
            }
        }
        TermNode::Neg(a) => {
            let a = evaluate_jet(a, point, active, abel)?;
            Jet {
                value: a.value.neg(),
                grad: a.grad.iter().map(T::neg).collect(),
            }
        }
        TermNode::Exp(a) => {
            let a = evaluate_jet(a, point, active, abel)?;
            let v = a.value.exp();
            a.scale(v.clone(), &v)
        }
        TermNode::Log(a) => {
            let a = evaluate_jet(a, point, active, abel)?;
            let v = a.value.ln()?;
            let r = a.value.recip()?;
            a.scale(v, &r)
        }
        TermNode::Ra(p, a) => {
            let a = evaluate_jet(a, point, active, abel)?;
            let v = a.value.ra(p, 0)?;
            let d = a.value.ra(p, 1)?;
            a.scale(v, &d)
        }
        TermNode::Phi(a) => {
            let a = evaluate_jet(a, point, active, abel)?;
            let v = a.value.abel(abel, 0)?;
            let d = a.value.abel(abel, 1)?;
            a.scale(v, &d)
        }
        TermNode::DPhi(a) => {
            let a = evaluate_jet(a, point, active, abel)?;
            let v = a.value.abel(abel, 1)?;
            let d = a.value.abel(abel, 2)?;
            a.scale(v, &d)
        }
    })
}

/// Value of `term` at `point`.
pub fn eval(term: &TermNode, point: &[f64], abel: &AbelFunction) -> Result<f64> {
    evaluate(term, point, abel)
}

/// Forward-mode gradient over all coordinates of `point`.
pub fn gradient(term: &TermNode, point: &[f64], abel: &AbelFunction) -> Result<Vec<f64>> {
    Ok(evaluate_jet(term, point, point.len(), abel)?.grad)
}

/// Enclosure of the range of `term` over `bx`.
pub fn interval_eval(term: &TermNode, bx: &IntervalBox, abel: &AbelFunction) -> Result<Interval> {
    evaluate(term, &bx.0, abel)
}
