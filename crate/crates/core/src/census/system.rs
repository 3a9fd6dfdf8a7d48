//! Square systems `P(x, l, eps, delta, phi-monomials, dphi-monomials) = 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::abel::AbelFunction;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalBox};
use crate::term::{evaluate, evaluate_jet, parse_with, MonomialKind, Restricted, Symbols, TermNode};

/// The constants `(l_1..l_{n+1}, eps_1..eps_n, delta)`, each in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub l: Vec<f64>,
    pub eps: Vec<f64>,
    pub delta: f64,
}

impl Params {
    pub fn zeros(n: usize) -> Self {
        Params {
            l: vec![0.0; n + 1],
            eps: vec![0.0; n],
            delta: 0.0,
        }
    }

    /// Surface names in slot order: `l1.. eps1.. delta`.
    pub fn names(n: usize) -> Vec<String> {
        (1..=n + 1)
            .map(|i| format!("l{i}"))
            .chain((1..=n).map(|i| format!("eps{i}")))
            .chain(std::iter::once("delta".to_string()))
            .collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.l
            .iter()
            .chain(&self.eps)
            .copied()
            .chain(std::iter::once(self.delta))
            .collect()
    }

    pub fn from_values(n: usize, v: &[f64]) -> Self {
        Params {
            l: v[..n + 1].to_vec(),
            eps: v[n + 1..2 * n + 1].to_vec(),
            delta: v[2 * n + 1],
        }
    }

    /// Fill missing trailing slots with zeros and check ranges.
    fn normalized(&self, n: usize) -> Result<Self> {
        if self.l.len() > n + 1 || self.eps.len() > n {
            return Err(Error::Invalid(format!(
                "too many parameters for n = {n}: {} l, {} eps",
                self.l.len(),
                self.eps.len()
            )));
        }
        let mut p = self.clone();
        p.l.resize(n + 1, 0.0);
        p.eps.resize(n, 0.0);
        for (name, value) in Params::names(n).into_iter().zip(p.values()) {
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::ParamRange { name, value });
            }
        }
        Ok(p)
    }
}

/// A registered `phi(f)` or `dphi(g)` occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub kind: MonomialKind,
    pub argument: TermNode,
}

/// `n` equations in `n` unknowns. Unknowns are variables `0..n`; the
/// parameters occupy variables `n..3n+2` in `Params` slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareSystem {
    vars: Vec<String>,
    equations: Vec<TermNode>,
    params: Params,
    registry: Vec<Monomial>,
}

/// Serialized system description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(default)]
    pub vars: Vec<String>,
    pub equations: Vec<String>,
    #[serde(default)]
    pub params: Option<Params>,
    #[serde(default)]
    pub radius: Option<f64>,
}

/// Parse and validate a system. Variable names default to `x1..xn`.
pub fn build_system<S: AsRef<str>>(vars: &[S], equations: &[S], params: &Params) -> Result<SquareSystem> {
    let n = vars.len();
    if equations.len() != n {
        return Err(Error::NonSquare {
            equations: equations.len(),
            unknowns: n,
        });
    }
    let mut symbols = Symbols::new(vars);
    for name in Params::names(n) {
        symbols = symbols.with_var(&name);
    }
    let terms = equations
        .iter()
        .map(|e| parse_with(e.as_ref(), &symbols))
        .collect::<Result<Vec<_>>>()?;
    let names = vars.iter().map(|v| v.as_ref().to_string()).collect();
    SquareSystem::from_terms(names, terms, params)
}

impl SquareSystem {
    pub fn from_terms(vars: Vec<String>, equations: Vec<TermNode>, params: &Params) -> Result<Self> {
        let n = vars.len();
        if equations.len() != n {
            return Err(Error::NonSquare {
                equations: equations.len(),
                unknowns: n,
            });
        }
        let params = params.normalized(n)?;
        for e in &equations {
            if e.arity() > 3 * n + 2 {
                return Err(Error::Dimension {
                    index: e.arity() - 1,
                    dim: 3 * n + 2,
                });
            }
        }
        let registry = equations
            .iter()
            .flat_map(|e| e.monomials())
            .map(|(kind, argument)| Monomial { kind, argument })
            .collect();
        Ok(SquareSystem {
            vars,
            equations,
            params,
            registry,
        })
    }

    pub fn from_file(file: &SystemFile) -> Result<Self> {
        let vars: Vec<String> = if file.vars.is_empty() {
            (1..=file.equations.len()).map(|i| format!("x{i}")).collect()
        } else {
            file.vars.clone()
        };
        let params = file.params.clone().unwrap_or_else(|| Params::zeros(vars.len()));
        build_system(&vars, &file.equations, &params)
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn equations(&self) -> &[TermNode] {
        &self.equations
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn registry(&self) -> &[Monomial] {
        &self.registry
    }

    pub fn has_phi(&self) -> bool {
        !self.registry.is_empty()
    }

    /// Names of all variable slots, unknowns first.
    pub fn slot_names(&self) -> Vec<String> {
        let mut names = self.vars.clone();
        names.extend(Params::names(self.dim()));
        names
    }

    /// Same equations under different parameter values.
    pub fn with_params(&self, params: &Params) -> Result<Self> {
        SquareSystem::from_terms(self.vars.clone(), self.equations.clone(), params)
    }

    /// Same parameters, new equations.
    pub fn with_equations(&self, equations: Vec<TermNode>) -> Result<Self> {
        SquareSystem::from_terms(self.vars.clone(), equations, &self.params)
    }

    /// `P(A x) - eta`: unknowns substituted by `A x`, targets subtracted.
    pub fn tilted(&self, a: &DMatrix<f64>, eta: &[f64]) -> Result<Self> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n || eta.len() != n {
            return Err(Error::Invalid(format!("tilt of size {}x{} for n = {n}", a.nrows(), a.ncols())));
        }
        let identity = DMatrix::<f64>::identity(n, n);
        let sub = |i: usize| {
            if i >= n {
                return TermNode::Var(i);
            }
            TermNode::sum((0..n).filter(|&j| a[(i, j)] != 0.0).map(|j| {
                if a[(i, j)] == 1.0 {
                    TermNode::Var(j)
                } else {
                    TermNode::mul(TermNode::Const(a[(i, j)]), TermNode::Var(j))
                }
            }))
        };
        let equations = self
            .equations
            .iter()
            .zip(eta)
            .map(|(e, &h)| {
                let e = if *a == identity { e.clone() } else { e.substitute(&sub) };
                if h == 0.0 {
                    e
                } else {
                    TermNode::add(e, TermNode::Const(-h))
                }
            })
            .collect();
        self.with_equations(equations)
    }

    fn full_point(&self, x: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        p.extend(self.params.values());
        p
    }

    pub fn eval(&self, x: &[f64], abel: &AbelFunction) -> Result<Vec<f64>> {
        let p = self.full_point(x);
        self.equations.iter().map(|e| evaluate(e, &p, abel)).collect()
    }

    /// Jacobian with respect to the unknowns.
    pub fn jacobian(&self, x: &[f64], abel: &AbelFunction) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let p = self.full_point(x);
        let mut j = DMatrix::zeros(n, n);
        for (r, e) in self.equations.iter().enumerate() {
            let jet = evaluate_jet(e, &p, n, abel)?;
            for (c, g) in jet.grad.into_iter().enumerate() {
                j[(r, c)] = g;
            }
        }
        Ok(j)
    }

    pub fn eval_box(&self, bx: &IntervalBox, abel: &AbelFunction) -> Result<Vec<Interval>> {
        let p = bx.extended(&self.params.values());
        self.equations.iter().map(|e| evaluate(e, &p, abel)).collect()
    }

    /// Enclosures over the defined part of `bx`; see `Restricted`.
    pub fn eval_box_restricted(&self, bx: &IntervalBox, abel: &AbelFunction) -> Result<Vec<Interval>> {
        let p: Vec<Restricted> = bx.extended(&self.params.values()).into_iter().map(Restricted).collect();
        self.equations.iter().map(|e| Ok(evaluate(e, &p, abel)?.0)).collect()
    }

    /// Interval Jacobian over `bx`, rows by equation.
    pub fn jacobian_box(&self, bx: &IntervalBox, abel: &AbelFunction) -> Result<Vec<Vec<Interval>>> {
        let n = self.dim();
        let p = bx.extended(&self.params.values());
        self.equations
            .iter()
            .map(|e| Ok(evaluate_jet(e, &p, n, abel)?.grad))
            .collect()
    }

    /// Equations printed with the system's own names.
    pub fn display_equations(&self) -> Vec<String> {
        let names = self.slot_names();
        self.equations
            .iter()
            .map(|e| e.display_with(&names).to_string())
            .collect()
    }
}
