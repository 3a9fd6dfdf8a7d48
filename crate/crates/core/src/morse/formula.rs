//! Quantifier-free formulas and their `{=, >}` disjunctive normal form.

use serde::{Deserialize, Serialize};

use crate::abel::AbelFunction;
use crate::error::{Error, Result};
use crate::term::{eval, gradient, parse_with, Symbols, TermNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "!=")]
    Ne,
}

impl Rel {
    fn negated(self) -> Rel {
        match self {
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Gt => Rel::Le,
            Rel::Le => Rel::Gt,
            Rel::Lt => Rel::Ge,
            Rel::Ge => Rel::Lt,
        }
    }
}

/// `term rel 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub term: TermNode,
    pub rel: Rel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(term: TermNode, rel: Rel) -> Self {
        Formula::Atom(Atom { term, rel })
    }
}

/// Disjunction of conjunctions of atoms whose relations are `=` or `>`.
#[derive(Debug, Clone, PartialEq)]
pub struct QFFormula {
    /// Number of free variables.
    pub dim: usize,
    pub disjuncts: Vec<Vec<Atom>>,
}

type Dnf = Vec<Vec<Atom>>;

fn atom_dnf(term: &TermNode, rel: Rel) -> Dnf {
    let pos = |t: &TermNode| Atom {
        term: t.clone(),
        rel: Rel::Gt,
    };
    let neg = || Atom {
        term: TermNode::neg(term.clone()),
        rel: Rel::Gt,
    };
    let eq = || Atom {
        term: term.clone(),
        rel: Rel::Eq,
    };
    match rel {
        Rel::Eq => vec![vec![eq()]],
        Rel::Gt => vec![vec![pos(term)]],
        Rel::Lt => vec![vec![neg()]],
        Rel::Ge => vec![vec![pos(term)], vec![eq()]],
        Rel::Le => vec![vec![neg()], vec![eq()]],
        Rel::Ne => vec![vec![pos(term)], vec![neg()]],
    }
}

fn dnf(f: &Formula, negated: bool) -> Dnf {
    match f {
        Formula::Atom(a) => atom_dnf(&a.term, if negated { a.rel.negated() } else { a.rel }),
        Formula::Not(g) => dnf(g, !negated),
        Formula::And(parts) if !negated => conjoin(parts.iter().map(|p| dnf(p, false))),
        Formula::Or(parts) if negated => conjoin(parts.iter().map(|p| dnf(p, true))),
        Formula::And(parts) | Formula::Or(parts) => parts.iter().flat_map(|p| dnf(p, negated)).collect(),
    }
}

// Distribute a conjunction of DNFs; the empty conjunction is `true`.
fn conjoin(parts: impl Iterator<Item = Dnf>) -> Dnf {
    parts.fold(vec![vec![]], |acc, d| {
        acc.iter()
            .flat_map(|left| {
                d.iter().map(move |right| {
                    let mut c = left.clone();
                    c.extend(right.iter().cloned());
                    c
                })
            })
            .collect()
    })
}

/// Push negations to the atoms and distribute, leaving only `=` and `>`:
/// `F < 0` becomes `-F > 0`, `F != 0` becomes `F > 0 or -F > 0`, and so on.
pub fn normalize(formula: &Formula, dim: usize) -> QFFormula {
    QFFormula {
        dim,
        disjuncts: dnf(formula, false),
    }
}

impl QFFormula {
    pub fn to_formula(&self) -> Formula {
        Formula::Or(
            self.disjuncts
                .iter()
                .map(|c| Formula::And(c.iter().cloned().map(Formula::Atom).collect()))
                .collect(),
        )
    }

    /// Grid membership at a point: `>` atoms exactly, `=` atoms thickened to
    /// `|F(x)| <= tau |grad F(x)|`.
    pub fn member_thick(&self, x: &[f64], tau: f64, abel: &AbelFunction) -> bool {
        self.member_thick_along(x, tau, None, abel)
    }

    /// As `member_thick`, with the gradient projected onto the span of the
    /// orthonormal `basis` when one is given (grids laid out in a subspace).
    pub fn member_thick_along(&self, x: &[f64], tau: f64, basis: Option<&[Vec<f64>]>, abel: &AbelFunction) -> bool {
        self.disjuncts.iter().any(|c| {
            c.iter().all(|a| match a.rel {
                Rel::Gt => matches!(eval(&a.term, x, abel), Ok(v) if v > 0.0),
                _ => match (eval(&a.term, x, abel), gradient(&a.term, x, abel)) {
                    (Ok(v), Ok(g)) => {
                        let slope = match basis {
                            None => g.iter().map(|d| d * d).sum::<f64>().sqrt(),
                            Some(b) => b
                                .iter()
                                .map(|u| u.iter().zip(&g).map(|(p, q)| p * q).sum::<f64>().powi(2))
                                .sum::<f64>()
                                .sqrt(),
                        };
                        v.abs() <= tau * slope
                    }
                    _ => false,
                },
            })
        })
    }

    /// Exact membership, with `=` tested up to `tol`.
    pub fn holds(&self, x: &[f64], tol: f64, abel: &AbelFunction) -> bool {
        self.disjuncts.iter().any(|c| {
            c.iter().all(|a| match eval(&a.term, x, abel) {
                Ok(v) if a.rel == Rel::Gt => v > 0.0,
                Ok(v) => v.abs() <= tol,
                Err(_) => false,
            })
        })
    }
}

/// One atom in a formula file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub term: String,
    pub rel: Rel,
}

/// General formula tree in a formula file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaSpec {
    Atom(AtomSpec),
    Not(Box<FormulaSpec>),
    And(Vec<FormulaSpec>),
    Or(Vec<FormulaSpec>),
}

/// Serialized formula: either `dnf` (a list of conjunctions) or a `formula`
/// tree. Variable names are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaFile {
    pub vars: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dnf: Option<Vec<Vec<AtomSpec>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<FormulaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

impl FormulaFile {
    pub fn parse(&self) -> Result<Formula> {
        if self.vars.is_empty() {
            return Err(Error::Invalid("formula file lists no variables".into()));
        }
        let symbols = Symbols::new(&self.vars);
        let atom = |a: &AtomSpec| -> Result<Formula> { Ok(Formula::atom(parse_with(&a.term, &symbols)?, a.rel)) };
        fn tree(s: &FormulaSpec, atom: &dyn Fn(&AtomSpec) -> Result<Formula>) -> Result<Formula> {
            Ok(match s {
                FormulaSpec::Atom(a) => atom(a)?,
                FormulaSpec::Not(g) => Formula::Not(Box::new(tree(g, atom)?)),
                FormulaSpec::And(v) => Formula::And(v.iter().map(|g| tree(g, atom)).collect::<Result<_>>()?),
                FormulaSpec::Or(v) => Formula::Or(v.iter().map(|g| tree(g, atom)).collect::<Result<_>>()?),
            })
        }
        match (&self.dnf, &self.formula) {
            (Some(d), None) => Ok(Formula::Or(
                d.iter()
                    .map(|c| Ok(Formula::And(c.iter().map(atom).collect::<Result<_>>()?)))
                    .collect::<Result<_>>()?,
            )),
            (None, Some(f)) => tree(f, &atom),
            _ => Err(Error::Invalid("formula file needs exactly one of `dnf` and `formula`".into())),
        }
    }

    pub fn normalized(&self) -> Result<QFFormula> {
        Ok(normalize(&self.parse()?, self.vars.len()))
    }
}
