//! Critical-point counts over a Milnor schedule, the halved component bound
//! and the sampled gamma estimator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{affine_restrict, critical_system, milnor_tube, random_rotation, wilkie_reduce, AffineSubspace, QFFormula};
use crate::abel::AbelFunction;
use crate::census::{count_nonsingular_zeros, DEFAULT_MAX_DEPTH};
use crate::error::{Error, Result};
use crate::interval::IntervalBox;
use crate::oracle::{flood_components, GridSpec};
use crate::term::{eval, TermNode};

pub const DELTA0: f64 = 0.1;
pub const STAGES: usize = 3;
/// Re-rotations after the first rotation of a stage.
pub const MAX_REROTATIONS: usize = 5;
/// Re-draws of `delta` within +-10% after all rotations failed.
pub const DELTA_RESAMPLES: usize = 3;
/// Census cube radius over the tube's bounding radius `delta / sqrt(eps)`.
const CENSUS_MARGIN: f64 = 1.05;

pub const LIMIT_ASSUMPTION: &str = "the bound is transferred from the compact tubes to the set by the limit argument, \
which is not re-checked numerically beyond the oracle comparison";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub eps: f64,
    pub delta: f64,
}

/// Decreasing `(eps_i, delta_i)` pairs in `(0, 1)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilnorSchedule {
    pub stages: Vec<Stage>,
}

impl MilnorSchedule {
    /// `delta_i = 0.1 / 2^i`, `eps_i = (0.1 / radius)^2 / 4^i`, so every tube
    /// lies in the closed ball of the given radius and the sublevel sets nest.
    pub fn for_radius(radius: f64) -> Result<Self> {
        let eps0 = (DELTA0 / radius).powi(2);
        let s = MilnorSchedule {
            stages: (0..STAGES)
                .map(|i| Stage {
                    eps: eps0 / 4f64.powi(i as i32),
                    delta: DELTA0 / 2f64.powi(i as i32),
                })
                .collect(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Invalid("schedule has no stages".into()));
        }
        for s in &self.stages {
            if !(s.eps > 0.0 && s.eps < 1.0 && s.delta > 0.0 && s.delta < 1.0) {
                return Err(Error::Invalid(format!("stage {s:?} not in (0, 1)^2")));
            }
        }
        if self
            .stages
            .windows(2)
            .any(|w| !(w[1].eps < w[0].eps && w[1].delta < w[0].delta))
        {
            return Err(Error::Invalid("schedule must strictly decrease".into()));
        }
        Ok(())
    }

    /// Number of sampled points inside tube `i + 1` but outside tube `i`,
    /// summed over consecutive stages.
    pub fn nesting_violations(
        &self,
        f_l: &TermNode,
        dim: usize,
        samples: usize,
        seed: u64,
        abel: &AbelFunction,
    ) -> Result<usize> {
        let r = self.stages.iter().map(|s| s.delta / s.eps.sqrt()).fold(0.0, f64::max);
        let tubes = self
            .stages
            .iter()
            .map(|s| milnor_tube(f_l, dim, s.eps, s.delta))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = 0;
        for _ in 0..samples {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-r..=r)).collect();
            let vals = tubes.iter().map(|t| eval(t, &x, abel)).collect::<Result<Vec<_>>>()?;
            bad += vals.windows(2).filter(|w| w[1] <= 0.0 && w[0] > 0.0).count();
        }
        Ok(bad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub eps: f64,
    /// Value actually used, after any re-draws.
    pub delta: f64,
    pub critical_count: usize,
    pub rotations_tried: usize,
    pub delta_resamples: usize,
    pub rotation: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub critical_count: usize,
    /// `ceil(critical_count / 2)`.
    pub component_bound: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_components: Option<usize>,
    /// Rotation of the stage attaining the maximum count.
    pub rotation: Vec<Vec<f64>>,
    pub schedule: Vec<StageReport>,
    pub aux_vars: usize,
    pub radius: f64,
    pub assumption: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub max_depth: usize,
    /// Run the flood-fill oracle in `component_bound`.
    pub oracle: bool,
    /// Oracle cells per axis; `None` picks `default_oracle_resolution`.
    pub oracle_resolution: Option<usize>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            max_depth: DEFAULT_MAX_DEPTH,
            oracle: false,
            oracle_resolution: None,
        }
    }
}

/// Oracle resolution used by default for a dimension, if the grid is affordable.
pub fn default_oracle_resolution(dim: usize) -> Option<usize> {
    match dim {
        1 => Some(8192),
        2 => Some(1024),
        3 => Some(128),
        _ => None,
    }
}

fn stage_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run_stage(f_l: &TermNode, dim: usize, stage: Stage, seed: u64, max_depth: usize, abel: &AbelFunction) -> Result<StageReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tried = 0;
    for resample in 0..=DELTA_RESAMPLES {
        let delta = if resample == 0 {
            stage.delta
        } else {
            stage.delta * (1.0 + rng.gen_range(-0.1..=0.1))
        };
        let radius = CENSUS_MARGIN * delta / stage.eps.sqrt();
        for _ in 0..=MAX_REROTATIONS {
            tried += 1;
            let q = random_rotation(dim, &mut rng);
            let system = critical_system(f_l, dim, stage.eps, delta, &q)?;
            let census = count_nonsingular_zeros(&system, radius, max_depth, abel)?;
            if census.exact {
                return Ok(StageReport {
                    eps: stage.eps,
                    delta,
                    critical_count: census.certified_count,
                    rotations_tried: tried,
                    delta_resamples: resample,
                    rotation: q.row_iter().map(|r| r.iter().copied().collect()).collect(),
                });
            }
        }
    }
    Err(Error::Certification(format!(
        "critical system at eps = {:e}, delta = {:e} kept unresolved boxes after {tried} rotation(s)",
        stage.eps, stage.delta
    )))
}

/// Weak-Morse bound on the number of components of the formula's set
/// intersected with `L` and the closed ball of the given radius.
pub fn component_bound(
    formula: &QFFormula,
    l: &AffineSubspace,
    radius: f64,
    schedule: &MilnorSchedule,
    seed: u64,
    options: &PipelineOptions,
    abel: &AbelFunction,
) -> Result<ComponentReport> {
    schedule.validate()?;
    if l.dim != formula.dim {
        return Err(Error::Invalid(format!(
            "affine subspace of dimension {} for a formula in {} variables",
            l.dim, formula.dim
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Invalid(format!("radius {radius} must be positive and finite")));
    }
    let (f, aux) = wilkie_reduce(formula);
    let f_l = affine_restrict(&f, l);
    let dim = formula.dim + aux;
    let stages = schedule
        .stages
        .par_iter()
        .enumerate()
        .map(|(i, s)| run_stage(&f_l, dim, *s, stage_seed(seed, i), options.max_depth, abel))
        .collect::<Result<Vec<_>>>()?;
    let best = stages
        .iter()
        .enumerate()
        .max_by_key(|(i, s)| (s.critical_count, std::cmp::Reverse(*i)))
        .map(|(i, _)| i)
        .expect("schedule is non-empty");
    let critical_count = stages[best].critical_count;
    let oracle_components = if options.oracle {
        Some(oracle_components(formula, l, radius, options.oracle_resolution, abel)?)
    } else {
        None
    };
    Ok(ComponentReport {
        critical_count,
        component_bound: critical_count.div_ceil(2),
        oracle_components,
        rotation: stages[best].rotation.clone(),
        schedule: stages,
        aux_vars: aux,
        radius,
        assumption: LIMIT_ASSUMPTION.to_string(),
    })
}

// Relative cutoff for zero singular values of the affine rows.
const RANK_TOL: f64 = 1e-10;

/// Flood-fill count of `set ∩ L ∩ B(radius)`. The grid is laid out in
/// orthonormal coordinates of `L` itself, so thin sections are not lost to
/// thickened bands meeting at shallow angles. `resolution` is cells per axis
/// of that grid, by default `default_oracle_resolution(dim L)`.
pub fn oracle_components(
    formula: &QFFormula,
    l: &AffineSubspace,
    radius: f64,
    resolution: Option<usize>,
    abel: &AbelFunction,
) -> Result<usize> {
    let n = formula.dim;
    let rows = DMatrix::from_fn(l.k(), n, |m, i| l.rows[m][i]);
    let rhs = DVector::from_fn(l.k(), |m, _| l.rows[m][n]);
    let (x0, basis) = if l.k() == 0 {
        (
            DVector::zeros(n),
            (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
        )
    } else {
        let gram = rows.transpose() * &rows;
        let eig = SymmetricEigen::new(gram);
        let top = eig.eigenvalues.amax();
        let basis: Vec<Vec<f64>> = (0..n)
            .filter(|&j| eig.eigenvalues[j] <= RANK_TOL * top)
            .map(|j| eig.eigenvectors.column(j).iter().copied().collect())
            .collect();
        let pinv = rows.clone().pseudo_inverse(RANK_TOL * top.sqrt()).map_err(|e| Error::Singular(e.to_string()))?;
        let x0 = pinv * &rhs;
        if (&rows * &x0 - &rhs).amax() > 1e-9 {
            // Inconsistent rows: the section is empty.
            return Ok(0);
        }
        (x0, basis)
    };
    let r2 = radius * radius - x0.norm_squared();
    if r2 < 0.0 {
        return Ok(0);
    }
    let at = |t: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| x0[i] + basis.iter().zip(t).map(|(u, s)| u[i] * s).sum::<f64>())
            .collect()
    };
    let d = basis.len();
    if d == 0 {
        return Ok(usize::from(formula.holds(&at(&[]), 1e-9, abel)));
    }
    let res = resolution
        .or_else(|| default_oracle_resolution(d))
        .ok_or_else(|| Error::Unsupported(format!("no grid oracle for sections of dimension {d}")))?;
    let grid = GridSpec::uniform(IntervalBox::cube(d, r2.sqrt()), res)?;
    let tau = 4.0 * grid.cell_diagonal();
    Ok(flood_components(&grid, |t| {
        t.iter().map(|v| v * v).sum::<f64>() <= r2 && formula.member_thick_along(&at(t), tau, Some(&basis), abel)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTrial {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub oracle_components: usize,
    /// `None` when the Morse certification failed for this section.
    pub component_bound: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    /// Largest oracle component count over the sampled sections.
    pub estimate: usize,
    /// Largest certified component bound over the sampled sections.
    pub max_bound: usize,
    /// Every certified trial has `oracle <= bound`.
    pub within_bounds: bool,
    pub uncertified_trials: usize,
    pub trials: Vec<GammaTrial>,
    pub notes: Vec<String>,
}

/// Sampled lower estimate of the largest number of components of an affine
/// section of the set within the ball.
pub fn gamma_estimate(
    formula: &QFFormula,
    trials: usize,
    radius: f64,
    seed: u64,
    options: &PipelineOptions,
    abel: &AbelFunction,
) -> Result<GammaReport> {
    if trials == 0 {
        return Err(Error::Invalid("gamma needs at least one trial".into()));
    }
    let n = formula.dim;
    let schedule = MilnorSchedule::for_radius(radius)?;
    let inner = PipelineOptions {
        oracle: false,
        ..options.clone()
    };
    let results = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<GammaTrial> {
            let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(seed, 1000 + t));
            let k = rng.gen_range(0..=n);
            let l = AffineSubspace::random(n, k, &mut rng);
            let oracle = oracle_components(formula, &l, radius, options.oracle_resolution, abel)?;
            let bound = match component_bound(formula, &l, radius, &schedule, rng.gen(), &inner, abel) {
                Ok(r) => Some(r.component_bound),
                Err(Error::Certification(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(GammaTrial {
                k,
                rows: l.rows,
                oracle_components: oracle,
                component_bound: bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let estimate = results.iter().map(|t| t.oracle_components).max().unwrap_or(0);
    let max_bound = results.iter().filter_map(|t| t.component_bound).max().unwrap_or(0);
    let within_bounds = results
        .iter()
        .all(|t| t.component_bound.is_none_or(|b| t.oracle_components <= b));
    let uncertified_trials = results.iter().filter(|t| t.component_bound.is_none()).count();
    let mut notes = vec!["sampled sections only; not an exhaustive maximum".to_string()];
    if estimate == 0 {
        notes.push("no sampled section met the set; 0 counts needed pieces, unlike a convention with N >= 1".into());
    }
    Ok(GammaReport {
        estimate,
        max_bound,
        within_bounds,
        uncertified_trials,
        trials: results,
        notes,
    })
}
