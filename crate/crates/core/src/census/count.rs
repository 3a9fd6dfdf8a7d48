//! Branch-and-prune counting of certified non-singular zeros.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SquareSystem;
use crate::abel::AbelFunction;
use crate::error::{Error, Result};
use crate::interval::{krawczyk_test, IntervalBox, Verdict};

pub const DEFAULT_MAX_DEPTH: usize = 40;

/// Boxes alive at one level before the search gives up and reports the rest
/// as unknown.
pub const BOX_BUDGET: usize = 1 << 20;

// Retry factor for boxes whose zero may sit on a bisection boundary.
const INFLATE: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub certified_count: usize,
    /// True when `unknown_boxes` is empty, so the count is exact over the searched cube.
    pub exact: bool,
    pub unknown_boxes: Vec<IntervalBox>,
    /// Enclosure of each certified zero, in discovery order.
    pub zeros: Vec<IntervalBox>,
    pub search_radius: f64,
    pub depth_used: usize,
    pub boxes_processed: usize,
}

impl CensusReport {
    /// Midpoints of the zero enclosures.
    pub fn zero_points(&self) -> Vec<Vec<f64>> {
        self.zeros.iter().map(IntervalBox::mid).collect()
    }
}

struct Root {
    enclosure: IntervalBox,
    /// Box on which uniqueness was certified.
    domain: IntervalBox,
}

enum Outcome {
    Drop,
    Root(Root),
    Split,
}

fn classify(system: &SquareSystem, bx: &IntervalBox, abel: &AbelFunction) -> Result<Outcome> {
    let r = krawczyk_test(system, bx, abel)?;
    match r.verdict {
        Verdict::NoZero => Ok(Outcome::Drop),
        Verdict::UniqueZero => Ok(Outcome::Root(Root {
            enclosure: r.contracted.expect("unique zero carries an enclosure"),
            domain: bx.clone(),
        })),
        Verdict::Unknown => {
            let wider = bx.inflate(INFLATE);
            let r = krawczyk_test(system, &wider, abel)?;
            match (r.verdict, r.contracted) {
                (Verdict::UniqueZero, Some(enclosure)) if bx.contains_point(&enclosure.mid()) => {
                    Ok(Outcome::Root(Root { enclosure, domain: wider }))
                }
                _ => Ok(Outcome::Split),
            }
        }
    }
}

fn same_zero(a: &Root, b: &Root) -> bool {
    a.enclosure.subset_of(&b.domain) || b.enclosure.subset_of(&a.domain)
}

/// Branch and prune over the cube `[-radius, radius]^n`, which contains the
/// ball of that radius. Boxes are processed level by level; within a level
/// they are classified in parallel and collected in order, so the report is
/// independent of scheduling.
pub fn count_nonsingular_zeros(
    system: &SquareSystem,
    radius: f64,
    max_depth: usize,
    abel: &AbelFunction,
) -> Result<CensusReport> {
    if !(radius > 0.0) {
        return Err(Error::Invalid(format!("radius {radius} must be positive")));
    }
    let n = system.dim();
    let root_box = IntervalBox::cube(n, radius);
    let mut level = vec![root_box.clone()];
    let mut roots: Vec<Root> = Vec::new();
    let mut unknown: Vec<IntervalBox> = Vec::new();
    let mut processed = 0usize;
    let mut depth_used = 0usize;
    for depth in 0..=max_depth {
        if level.is_empty() {
            break;
        }
        depth_used = depth;
        processed += level.len();
        let outcomes: Vec<Result<Outcome>> = level.par_iter().map(|b| classify(system, b, abel)).collect();
        let mut next = Vec::new();
        for (bx, outcome) in level.into_iter().zip(outcomes) {
            match outcome? {
                Outcome::Drop => {}
                Outcome::Root(r) => {
                    if !roots.iter().any(|q| same_zero(q, &r)) {
                        roots.push(r);
                    }
                }
                Outcome::Split => {
                    if depth == max_depth {
                        unknown.push(bx);
                    } else {
                        match bx.subdivide() {
                            Ok((a, b)) => {
                                next.push(a);
                                next.push(b);
                            }
                            Err(Error::ZeroWidth) => unknown.push(bx),
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        if next.len() > BOX_BUDGET {
            unknown.extend(next);
            next = Vec::new();
        }
        level = next;
    }
    // A box inside a certified uniqueness domain holds no zero besides the
    // one already counted there.
    unknown.retain(|b| !roots.iter().any(|r| b.subset_of(&r.domain)));
    let zeros: Vec<IntervalBox> = roots
        .into_iter()
        .filter(|r| root_box.contains_point(&r.enclosure.mid()))
        .map(|r| r.enclosure)
        .collect();
    Ok(CensusReport {
        certified_count: zeros.len(),
        exact: unknown.is_empty(),
        unknown_boxes: unknown,
        zeros,
        search_radius: radius,
        depth_used,
        boxes_processed: processed,
    })
}

/// Accepted target and how many draws it took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularValue {
    pub eta: Vec<f64>,
    pub attempts: usize,
    pub count: usize,
}

/// Find `eta` such that every zero of `system - eta` in the cube of the given
/// radius is certified non-singular. The first attempt is `eta = 0`; later
/// ones are uniform in `[-1, 1]^n`.
pub fn sample_regular_value(
    system: &SquareSystem,
    radius: f64,
    max_depth: usize,
    seed: u64,
    budget: usize,
    abel: &AbelFunction,
) -> Result<RegularValue> {
    let n = system.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let identity = DMatrix::identity(n, n);
    for attempt in 0..budget {
        let eta: Vec<f64> = if attempt == 0 {
            vec![0.0; n]
        } else {
            (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
        };
        let shifted = system.tilted(&identity, &eta)?;
        let report = count_nonsingular_zeros(&shifted, radius, max_depth, abel)?;
        if report.exact {
            return Ok(RegularValue {
                eta,
                attempts: attempt + 1,
                count: report.certified_count,
            });
        }
    }
    Err(Error::Budget(budget))
}

pub const TILT_DET_MIN: f64 = 1e-6;
const TILT_TRIES: usize = 100;

/// `I + scale * U` with `U` uniform in `[-1, 1]^{n x n}`, redrawn until
/// `|det| > 1e-6`.
pub fn sample_generic_tilt(n: usize, scale: f64, seed: u64) -> Result<DMatrix<f64>> {
    if !(scale > 0.0 && scale < 1.0) {
        return Err(Error::Invalid(format!("tilt scale {scale} not in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..TILT_TRIES {
        let a = DMatrix::from_fn(n, n, |i, j| {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            if i == j {
                1.0 + scale * u
            } else {
                scale * u
            }
        });
        if a.determinant().abs() > TILT_DET_MIN {
            return Ok(a);
        }
    }
    Err(Error::Budget(TILT_TRIES))
}
