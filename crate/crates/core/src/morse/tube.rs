//! Single-equation reduction, affine sections, Milnor tubes and the critical
//! system of the height function on a tube.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{QFFormula, Rel};
use crate::census::{Params, SquareSystem};
use crate::error::{Error, Result};
use crate::term::{differentiate, TermNode};

/// `F = prod_i sum_j Fbar_ij^2` with `Fbar = F` for `F = 0` and
/// `Fbar = F u^2 - 1` for `F > 0`, `u` a fresh variable. Fresh variables
/// follow the formula's own, in atom order. Returns `F` and the number of
/// fresh variables.
///
/// The empty disjunction reduces to `1` and the empty conjunction to `0`.
pub fn wilkie_reduce(formula: &QFFormula) -> (TermNode, usize) {
    let mut aux = 0;
    let f = TermNode::product(formula.disjuncts.iter().map(|c| {
        TermNode::sum(c.iter().map(|a| {
            let bar = match a.rel {
                Rel::Gt => {
                    let u = TermNode::var(formula.dim + aux);
                    aux += 1;
                    TermNode::sub(TermNode::mul(a.term.clone(), TermNode::square(u)), TermNode::cst(1.0))
                }
                _ => a.term.clone(),
            };
            TermNode::square(bar)
        }))
    }));
    (f, aux)
}

/// `k` affine equations `row . x = constant` in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSubspace {
    pub dim: usize,
    /// Each row holds `n` coefficients followed by the constant.
    pub rows: Vec<Vec<f64>>,
}

impl AffineSubspace {
    /// The whole space (`k = 0`).
    pub fn full(dim: usize) -> Self {
        AffineSubspace { dim, rows: vec![] }
    }

    pub fn new(dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        for r in &rows {
            if r.len() != dim + 1 {
                return Err(Error::Invalid(format!("affine row has {} entries, expected {}", r.len(), dim + 1)));
            }
            if r.iter().any(|v| !(-1.0..=1.0).contains(v)) {
                return Err(Error::Invalid(format!("affine row {r:?} has entries outside [-1, 1]")));
            }
        }
        Ok(AffineSubspace { dim, rows })
    }

    /// `k` rows uniform in `[-1, 1]^{n+1}`.
    pub fn random(dim: usize, k: usize, rng: &mut impl Rng) -> Self {
        AffineSubspace {
            dim,
            rows: (0..k)
                .map(|_| (0..=dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// Residual of row `m` at `x`.
    pub fn residual(&self, m: usize, x: &[f64]) -> f64 {
        let r = &self.rows[m];
        r[..self.dim].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - r[self.dim]
    }

    /// Grid membership with each row thickened to `|residual| <= tau |row|`.
    pub fn member_thick(&self, x: &[f64], tau: f64) -> bool {
        (0..self.k()).all(|m| {
            let norm = self.rows[m][..self.dim].iter().map(|a| a * a).sum::<f64>().sqrt();
            self.residual(m, x).abs() <= tau * norm
        })
    }
}

/// `F + sum_m (l_m . x - l_m0)^2`.
pub fn affine_restrict(f: &TermNode, l: &AffineSubspace) -> TermNode {
    l.rows.iter().fold(f.clone(), |acc, r| {
        let lin = TermNode::sum(
            r[..l.dim]
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| TermNode::mul(TermNode::cst(*c), TermNode::var(i))),
        );
        TermNode::add(acc, TermNode::square(TermNode::sub(lin, TermNode::cst(r[l.dim]))))
    })
}

fn norm_sq(dim: usize) -> TermNode {
    TermNode::sum((0..dim).map(|i| TermNode::square(TermNode::var(i))))
}

/// `F_L^2 + eps |x|^2 - delta^2` over the first `dim` variables.
pub fn milnor_tube(f_l: &TermNode, dim: usize, eps: f64, delta: f64) -> Result<TermNode> {
    check_eps_delta(eps, delta)?;
    Ok(TermNode::sub(
        TermNode::add(
            TermNode::square(f_l.clone()),
            TermNode::mul(TermNode::cst(eps), norm_sq(dim)),
        ),
        TermNode::cst(delta * delta),
    ))
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid(format!("eps = {eps}, delta = {delta} must lie in (0, 1)")));
    }
    Ok(())
}

pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Orthogonal factor of a matrix with entries uniform in `[-1, 1]`.
pub fn random_rotation(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        let m: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..=1.0));
        if m.determinant().abs() > 1e-3 {
            return m.qr().q();
        }
    }
}

/// Critical points of the height `y_n` on the tube, in coordinates `y = Q x`:
/// `2 G dG/dy_i + 2 eps y_i = 0` for `i < n` and the level equation
/// `G^2 + eps |y|^2 - delta^2 = 0`, where `G = F_L(Q^T y)`.
pub fn critical_system(f_l: &TermNode, dim: usize, eps: f64, delta: f64, q: &DMatrix<f64>) -> Result<SquareSystem> {
    check_eps_delta(eps, delta)?;
    if q.nrows() != dim || q.ncols() != dim {
        return Err(Error::Invalid(format!("rotation is {}x{}, expected {dim}x{dim}", q.nrows(), q.ncols())));
    }
    let defect = (q.transpose() * q - DMatrix::identity(dim, dim)).abs().max();
    if defect > ORTHOGONALITY_TOL {
        return Err(Error::Invalid(format!("rotation is not orthogonal: |Q^T Q - I| = {defect:e}")));
    }
    if f_l.arity() > dim {
        return Err(Error::Dimension {
            index: f_l.arity() - 1,
            dim,
        });
    }
    let identity = *q == DMatrix::identity(dim, dim);
    let g = if identity {
        f_l.clone()
    } else {
        f_l.substitute(&|i| {
            TermNode::sum((0..dim).map(|j| TermNode::mul(TermNode::cst(q[(j, i)]), TermNode::var(j))))
        })
    };
    let mut equations = Vec::with_capacity(dim);
    for i in 0..dim - 1 {
        let dg = differentiate(&g, i)?;
        equations.push(TermNode::add(
            TermNode::mul(TermNode::cst(2.0), TermNode::mul(g.clone(), dg)),
            TermNode::mul(TermNode::cst(2.0 * eps), TermNode::var(i)),
        ));
    }
    equations.push(milnor_tube(&g, dim, eps, delta)?);
    let vars = (1..=dim).map(|i| format!("y{i}")).collect();
    SquareSystem::from_terms(vars, equations, &Params::zeros(dim))
}
