//! Term language over `+`, `*`, negation, `exp`, `log`, restricted analytic
//! primitives, the Abel function `phi` and its derivative `dphi`.

mod analysis;
mod diff;
mod eval;
mod parser;
mod spline;

pub use analysis::{exp_tower, fcpx, growth_exponent, lower_bound, GrowthExponent, DPHI_GROWTH_BOUND};
pub use diff::differentiate;
pub use eval::{eval, evaluate, evaluate_jet, gradient, interval_eval, Arith, Jet, Restricted};
pub use parser::{parse_term, parse_with, Symbols};
pub use spline::HermiteSpline;

use std::fmt;
use std::sync::Arc;

/// Restricted analytic primitive kinds shipped with the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum RaKind {
    Sin,
    Cos,
    Atan,
    /// Tabulated piecewise cubic; `order` selects which derivative of the
    /// table the node evaluates.
    Spline { table: Arc<HermiteSpline>, order: u8 },
}

/// An analytic function restricted to the compact interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RaPrimitive {
    pub kind: RaKind,
    pub lo: f64,
    pub hi: f64,
}

impl RaPrimitive {
    pub fn name(&self) -> &'static str {
        match self.kind {
            RaKind::Sin => "sin",
            RaKind::Cos => "cos",
            RaKind::Atan => "atan",
            RaKind::Spline { .. } => "spline",
        }
    }

    pub fn spline(table: Arc<HermiteSpline>, order: u8) -> Self {
        let (lo, hi) = table.domain();
        RaPrimitive {
            kind: RaKind::Spline { table, order },
            lo,
            hi,
        }
    }

    pub fn in_domain(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Value of the primitive (`extra = 0`) or of its derivative (`extra = 1`).
    pub fn value(&self, x: f64, extra: u8) -> f64 {
        match (&self.kind, extra) {
            (RaKind::Sin, 0) => x.sin(),
            (RaKind::Sin, _) => x.cos(),
            (RaKind::Cos, 0) => x.cos(),
            (RaKind::Cos, _) => -x.sin(),
            (RaKind::Atan, 0) => x.atan(),
            (RaKind::Atan, _) => 1.0 / (1.0 + x * x),
            (RaKind::Spline { table, order }, e) => table.eval(x, order + e),
        }
    }
}

/// The shipped catalog: `sin`, `cos`, `atan`, each restricted to `[-c, c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaCatalog {
    pub radius: f64,
}

impl Default for RaCatalog {
    fn default() -> Self {
        RaCatalog { radius: 100.0 }
    }
}

impl RaCatalog {
    pub fn lookup(&self, name: &str) -> Option<RaPrimitive> {
        let kind = match name {
            "sin" => RaKind::Sin,
            "cos" => RaKind::Cos,
            "atan" => RaKind::Atan,
            _ => return None,
        };
        Some(RaPrimitive {
            kind,
            lo: -self.radius,
            hi: self.radius,
        })
    }
}

/// Expression tree. Variables are indexed; names exist only in the surface syntax.
#[derive(Debug, Clone, PartialEq)]
pub enum TermNode {
    Var(usize),
    Const(f64),
    Add(Box<TermNode>, Box<TermNode>),
    Mul(Box<TermNode>, Box<TermNode>),
    Neg(Box<TermNode>),
    Exp(Box<TermNode>),
    /// Defined on `(0, inf)` only.
    Log(Box<TermNode>),
    Ra(RaPrimitive, Box<TermNode>),
    Phi(Box<TermNode>),
    DPhi(Box<TermNode>),
}

/// Which Abel-function application a monomial uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MonomialKind {
    Phi,
    DPhi,
}

impl TermNode {
    pub fn var(i: usize) -> Self {
        TermNode::Var(i)
    }

    pub fn cst(c: f64) -> Self {
        TermNode::Const(c)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: TermNode, b: TermNode) -> Self {
        TermNode::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: TermNode, b: TermNode) -> Self {
        TermNode::Mul(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: TermNode) -> Self {
        TermNode::Neg(Box::new(a))
    }

    pub fn sub(a: TermNode, b: TermNode) -> Self {
        TermNode::add(a, TermNode::neg(b))
    }

    pub fn exp(a: TermNode) -> Self {
        TermNode::Exp(Box::new(a))
    }

    pub fn log(a: TermNode) -> Self {
        TermNode::Log(Box::new(a))
    }

    pub fn phi(a: TermNode) -> Self {
        TermNode::Phi(Box::new(a))
    }

    pub fn dphi(a: TermNode) -> Self {
        TermNode::DPhi(Box::new(a))
    }

    pub fn ra(p: RaPrimitive, a: TermNode) -> Self {
        TermNode::Ra(p, Box::new(a))
    }

    pub fn square(a: TermNode) -> Self {
        TermNode::mul(a.clone(), a)
    }

    /// Left-folded sum; the empty sum is `0`.
    pub fn sum(items: impl IntoIterator<Item = TermNode>) -> Self {
        items
            .into_iter()
            .reduce(TermNode::add)
            .unwrap_or(TermNode::Const(0.0))
    }

    /// Left-folded product; the empty product is `1`.
    pub fn product(items: impl IntoIterator<Item = TermNode>) -> Self {
        items
            .into_iter()
            .reduce(TermNode::mul)
            .unwrap_or(TermNode::Const(1.0))
    }

    pub fn children(&self) -> Vec<&TermNode> {
        match self {
            TermNode::Var(_) | TermNode::Const(_) => vec![],
            TermNode::Add(a, b) | TermNode::Mul(a, b) => vec![a, b],
            TermNode::Neg(a)
            | TermNode::Exp(a)
            | TermNode::Log(a)
            | TermNode::Ra(_, a)
            | TermNode::Phi(a)
            | TermNode::DPhi(a) => vec![a],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Number of variable slots the term needs (`max index + 1`).
    pub fn arity(&self) -> usize {
        match self {
            TermNode::Var(i) => i + 1,
            _ => self.children().iter().map(|c| c.arity()).max().unwrap_or(0),
        }
    }

    /// Replace every `Var(i)` by `f(i)`.
    pub fn substitute(&self, f: &dyn Fn(usize) -> TermNode) -> TermNode {
        self.map_bottom_up(&mut |node| match node {
            TermNode::Var(i) => f(i),
            other => other,
        })
    }

    /// Rebuild the tree bottom-up, applying `f` to every node after its
    /// children have been rebuilt.
    pub fn map_bottom_up(&self, f: &mut dyn FnMut(TermNode) -> TermNode) -> TermNode {
        let rebuilt = match self {
            TermNode::Var(_) | TermNode::Const(_) => self.clone(),
            TermNode::Add(a, b) => TermNode::add(a.map_bottom_up(f), b.map_bottom_up(f)),
            TermNode::Mul(a, b) => TermNode::mul(a.map_bottom_up(f), b.map_bottom_up(f)),
            TermNode::Neg(a) => TermNode::neg(a.map_bottom_up(f)),
            TermNode::Exp(a) => TermNode::exp(a.map_bottom_up(f)),
            TermNode::Log(a) => TermNode::log(a.map_bottom_up(f)),
            TermNode::Ra(p, a) => TermNode::ra(p.clone(), a.map_bottom_up(f)),
            TermNode::Phi(a) => TermNode::phi(a.map_bottom_up(f)),
            TermNode::DPhi(a) => TermNode::dphi(a.map_bottom_up(f)),
        };
        f(rebuilt)
    }

    /// All `phi(f)` / `dphi(g)` occurrences in pre-order.
    pub fn monomials(&self) -> Vec<(MonomialKind, TermNode)> {
        let mut out = Vec::new();
        self.collect_monomials(&mut out);
        out
    }

    fn collect_monomials(&self, out: &mut Vec<(MonomialKind, TermNode)>) {
        match self {
            TermNode::Phi(a) => out.push((MonomialKind::Phi, (**a).clone())),
            TermNode::DPhi(a) => out.push((MonomialKind::DPhi, (**a).clone())),
            _ => {}
        }
        for c in self.children() {
            c.collect_monomials(out);
        }
    }

    /// Printer with custom variable names; falls back to `x{i+1}`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Printer { term: self, names }
    }
}

struct Printer<'a> {
    term: &'a TermNode,
    names: &'a [String],
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.term, self.names)
    }
}

impl fmt::Display for TermNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, &[])
    }
}

// Fully parenthesized; binary minus is never emitted, so `Add(a, Neg(b))`
// prints as `(a + -(b))` and reparses to the same tree. A negative constant
// prints as a signed literal, which the parser folds back into `Const`.
fn write_term(f: &mut fmt::Formatter<'_>, t: &TermNode, names: &[String]) -> fmt::Result {
    match t {
        TermNode::Var(i) => match names.get(*i) {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "x{}", i + 1),
        },
        TermNode::Const(c) => write!(f, "{c:?}"),
        TermNode::Add(a, b) | TermNode::Mul(a, b) => {
            let op = if matches!(t, TermNode::Add(..)) { '+' } else { '*' };
            write!(f, "(")?;
            write_term(f, a, names)?;
            write!(f, " {op} ")?;
            write_term(f, b, names)?;
            write!(f, ")")
        }
        TermNode::Neg(a) => {
            write!(f, "-(")?;
            write_term(f, a, names)?;
            write!(f, ")")
        }
        TermNode::Exp(a) => call(f, "exp", a, names),
        TermNode::Log(a) => call(f, "log", a, names),
        TermNode::Phi(a) => call(f, "phi", a, names),
        TermNode::DPhi(a) => call(f, "dphi", a, names),
        TermNode::Ra(p, a) => match &p.kind {
            RaKind::Spline { order, .. } => {
                write!(f, "spline{order}[{:?}, {:?}](", p.lo, p.hi)?;
                write_term(f, a, names)?;
                write!(f, ")")
            }
            _ => call(f, p.name(), a, names),
        },
    }
}

fn call(f: &mut fmt::Formatter<'_>, name: &str, a: &TermNode, names: &[String]) -> fmt::Result {
    write!(f, "{name}(")?;
    write_term(f, a, names)?;
    write!(f, ")")
}
