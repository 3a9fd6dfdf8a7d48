//! Zero counts along deformation paths and the boundedness probe.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{count_nonsingular_zeros, CensusReport, Params, SquareSystem};
use crate::abel::AbelFunction;
use crate::error::{Error, Result};

/// Breakpoints below this determinant magnitude are rejected.
pub const PATH_DET_MIN: f64 = 1e-9;

/// One breakpoint of a piecewise-linear path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: f64,
    /// Row-major `n x n`; identity when absent.
    #[serde(default)]
    pub a: Option<Vec<Vec<f64>>>,
    /// Zero when absent.
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    /// The system's own parameters when absent.
    #[serde(default)]
    pub params: Option<Params>,
}

/// `t -> (A(t), eta(t), params(t))` on `[0, 1]`, linear between breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationPath {
    pub points: Vec<PathPoint>,
}

/// Resolved path data at a single `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub a: DMatrix<f64>,
    pub eta: Vec<f64>,
    pub params: Params,
}

impl DeformationPath {
    /// Identity tilt, `eta` linear from `eta0` to `eta1`.
    pub fn eta_segment(eta0: Vec<f64>, eta1: Vec<f64>) -> Self {
        DeformationPath {
            points: vec![
                PathPoint {
                    t: 0.0,
                    a: None,
                    eta: Some(eta0),
                    params: None,
                },
                PathPoint {
                    t: 1.0,
                    a: None,
                    eta: Some(eta1),
                    params: None,
                },
            ],
        }
    }

    /// Identity tilt, zero target, parameters linear from `p0` to `p1`.
    pub fn param_segment(p0: Params, p1: Params) -> Self {
        DeformationPath {
            points: vec![
                PathPoint {
                    t: 0.0,
                    a: None,
                    eta: None,
                    params: Some(p0),
                },
                PathPoint {
                    t: 1.0,
                    a: None,
                    eta: None,
                    params: Some(p1),
                },
            ],
        }
    }

    fn resolve(&self, p: &PathPoint, system: &SquareSystem) -> Result<PathState> {
        let n = system.dim();
        let a = match &p.a {
            None => DMatrix::identity(n, n),
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Invalid(format!("path matrix at t = {} is not {n}x{n}", p.t)));
                }
                DMatrix::from_fn(n, n, |i, j| rows[i][j])
            }
        };
        let eta = p.eta.clone().unwrap_or_else(|| vec![0.0; n]);
        if eta.len() != n {
            return Err(Error::Invalid(format!("path target at t = {} has length {}", p.t, eta.len())));
        }
        let params = match &p.params {
            Some(q) => system.with_params(q)?.params().clone(),
            None => system.params().clone(),
        };
        Ok(PathState { a, eta, params })
    }

    /// Validate breakpoints: sorted, covering `[0, 1]`, invertible tilts.
    pub fn validate(&self, system: &SquareSystem) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Invalid("path has no breakpoints".into()));
        }
        if self.points.windows(2).any(|w| !(w[0].t < w[1].t)) {
            return Err(Error::Invalid("path breakpoints must increase in t".into()));
        }
        if self.points[0].t > 0.0 || self.points[self.points.len() - 1].t < 1.0 {
            return Err(Error::Invalid("path must cover [0, 1]".into()));
        }
        for p in &self.points {
            let s = self.resolve(p, system)?;
            let det = s.a.determinant();
            if !(det.abs() > PATH_DET_MIN) {
                return Err(Error::Singular(format!("tilt at t = {} has determinant {det:e}", p.t)));
            }
        }
        Ok(())
    }

    /// Linear interpolation between the breakpoints around `t`.
    pub fn at(&self, t: f64, system: &SquareSystem) -> Result<PathState> {
        let i = self.points.iter().rposition(|p| p.t <= t).unwrap_or(0);
        let a = self.resolve(&self.points[i], system)?;
        if i + 1 == self.points.len() || self.points[i].t == t {
            return Ok(a);
        }
        let b = self.resolve(&self.points[i + 1], system)?;
        let w = (t - self.points[i].t) / (self.points[i + 1].t - self.points[i].t);
        let lerp = |x: f64, y: f64| x + w * (y - x);
        let n = system.dim();
        let pa = a.params.values();
        let pb = b.params.values();
        Ok(PathState {
            a: a.a.zip_map(&b.a, lerp),
            eta: a.eta.iter().zip(&b.eta).map(|(x, y)| lerp(*x, *y)).collect(),
            params: Params::from_values(n, &pa.iter().zip(&pb).map(|(x, y)| lerp(*x, *y)).collect::<Vec<_>>()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCount {
    pub t: f64,
    pub count: usize,
    pub exact: bool,
    pub unknown_boxes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackReport {
    pub steps: Vec<StepCount>,
    /// All steps certified with equal counts.
    pub constant: bool,
    /// First step whose count differs from its predecessor or is not certified.
    pub first_failure: Option<usize>,
}

/// Count zeros of `P(A(t_j) x, params(t_j)) - eta(t_j)` at `t_j = j / steps`.
pub fn track_path(
    system: &SquareSystem,
    path: &DeformationPath,
    steps: usize,
    radius: f64,
    max_depth: usize,
    abel: &AbelFunction,
) -> Result<TrackReport> {
    if steps < 2 {
        return Err(Error::Invalid(format!("track needs at least 2 steps, got {steps}")));
    }
    path.validate(system)?;
    let mut out: Vec<StepCount> = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let t = j as f64 / steps as f64;
        let state = path.at(t, system)?;
        let det = state.a.determinant();
        if !(det.abs() > PATH_DET_MIN) {
            return Err(Error::Singular(format!("tilt at t = {t} has determinant {det:e}")));
        }
        let stepped = system.with_params(&state.params)?.tilted(&state.a, &state.eta)?;
        let report = count_nonsingular_zeros(&stepped, radius, max_depth, abel)?;
        out.push(StepCount {
            t,
            count: report.certified_count,
            exact: report.exact,
            unknown_boxes: report.unknown_boxes.len(),
        });
    }
    let first_failure = out
        .iter()
        .enumerate()
        .position(|(j, s)| !s.exact || (j > 0 && s.count != out[j - 1].count));
    Ok(TrackReport {
        constant: first_failure.is_none(),
        first_failure,
        steps: out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeStep {
    pub radius: f64,
    pub count: usize,
    pub exact: bool,
    pub zeros: Vec<Vec<f64>>,
}

/// Heuristic probe of boundedness: never a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub steps: Vec<ProbeStep>,
    /// Counts and zero locations agree over the last two radii.
    pub stable: bool,
}

const SAME_ZERO_TOL: f64 = 1e-6;

/// Count zeros of `P(A x) - eta` at each radius of an increasing schedule.
pub fn probe_boundedness(
    system: &SquareSystem,
    a: &DMatrix<f64>,
    eta: &[f64],
    radii: &[f64],
    max_depth: usize,
    abel: &AbelFunction,
) -> Result<ProbeReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Invalid("probe needs at least two increasing radii".into()));
    }
    let tilted = system.tilted(a, eta)?;
    let mut steps = Vec::new();
    for &r in radii {
        let report: CensusReport = count_nonsingular_zeros(&tilted, r, max_depth, abel)?;
        steps.push(ProbeStep {
            radius: r,
            count: report.certified_count,
            exact: report.exact,
            zeros: report.zero_points(),
        });
    }
    let (p, q) = (&steps[steps.len() - 2], &steps[steps.len() - 1]);
    let same_zeros = p.zeros.len() == q.zeros.len()
        && q.zeros.iter().all(|z| {
            p.zeros
                .iter()
                .any(|w| z.iter().zip(w).all(|(a, b)| (a - b).abs() <= SAME_ZERO_TOL * (1.0 + a.abs())))
        });
    let stable = p.exact && q.exact && p.count == q.count && same_zeros;
    Ok(ProbeReport { steps, stable })
}
