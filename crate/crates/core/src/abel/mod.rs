//! The super-logarithm: a strictly increasing solution of `phi(e^x) = phi(x) + 1`
//! normalized by `phi(1) = 0`, with its derivatives, interval enclosures,
//! inverse and the growth facts it satisfies.

mod checks;
mod seed;

pub use checks::{run_invariant_suite, transexp_threshold, CheckResult, SlogReport, SuiteScale};

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::term::DPHI_GROWTH_BOUND;
use seed::{horner, jump_row, Seed, SPAN};

/// Format version written into serialized Abel files.
pub const ABEL_FILE_VERSION: u32 = 1;

/// Default recursion cap for reduction into the fundamental domain.
pub const RECURSION_CAP: usize = 64;

// Largest point used for finite pieces of unbounded enclosures.
const TAIL_START: f64 = 1e300;

/// Fitted super-logarithm.
#[derive(Debug, Clone)]
pub struct AbelFunction {
    order: usize,
    tol: f64,
    seed: Seed,
    seed_error: f64,
    sup_dphi_fundamental: f64,
    sup_dphi_global: f64,
    recursion_cap: usize,
}

/// On-disk form. Everything else is recomputed from the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbelFile {
    pub version: u32,
    pub order: usize,
    pub tol: f64,
    /// Seed coefficients in `t = x - 1`, ascending.
    pub coefficients: Vec<f64>,
    pub seed_error: f64,
    pub recursion_cap: usize,
    /// Value pinned at `x = 1`.
    pub normalization: f64,
}

/// Result of a log-domination scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub n: u32,
    pub x_lo: f64,
    pub x_hi: f64,
    pub samples: usize,
    /// Least sampled `X` such that `|phi(x)| <= log_n(x)` at every sampled `x >= X`.
    pub threshold: Option<f64>,
}

impl AbelFunction {
    /// Fit a seed of smoothness `order` and verify it against `tol`.
    pub fn build(order: usize, tol: f64) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::Invalid(format!("seed order {order} not in 1..=3")));
        }
        if !(tol > 0.0) {
            return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
        }
        let coeffs = seed::fit_seed(order)?;
        let mut abel = Self::assemble(order, tol, coeffs, 0.0, RECURSION_CAP)?;
        let achieved = abel.abel_residual(10_000)?.max(abel.junction_mismatch().iter().fold(0.0, |m, j| m.max(j.abs())));
        if achieved > tol {
            return Err(Error::AbelBuild { achieved, tol });
        }
        abel.seed_error = (4.0 * achieved + abel.seed.horner_error_bound()).max(1e-13);
        if abel.seed_error > tol {
            return Err(Error::AbelBuild {
                achieved: abel.seed_error,
                tol,
            });
        }
        Ok(abel)
    }

    /// `build(3, 1e-8)`; cannot fail for these parameters.
    pub fn default_build() -> Self {
        Self::build(3, 1e-8).expect("default seed fit")
    }

    fn assemble(order: usize, tol: f64, coeffs: Vec<f64>, seed_error: f64, recursion_cap: usize) -> Result<Self> {
        if coeffs.len() < 2 || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("seed coefficients must be finite, at least two".into()));
        }
        let seed = Seed::new(coeffs);
        let mut sup_fund: f64 = 0.0;
        let mut sup_glob: f64 = 0.0;
        let mut min_slope = f64::INFINITY;
        let h = SPAN / seed::CELLS as f64;
        for (i, cell) in seed.cells.iter().enumerate() {
            let y = Interval::new(1.0 + h * i as f64, 1.0 + h * (i + 1) as f64);
            sup_fund = sup_fund.max(cell[1].hi);
            // On [0, 1) phi'(x) = y s'(y) with y = e^x in [1, e); below 0 and
            // above e the chain factors are < 1, so these two maxima bound phi'.
            sup_glob = sup_glob.max(cell[1].hi).max(y.mul(&cell[1]).hi);
            min_slope = min_slope.min(cell[1].lo);
        }
        let abel = AbelFunction {
            order,
            tol,
            seed,
            seed_error,
            sup_dphi_fundamental: sup_fund,
            sup_dphi_global: sup_glob,
            recursion_cap,
        };
        if min_slope <= 0.0 {
            return Err(Error::Certification(format!(
                "seed is not certified increasing on [1, e]: derivative enclosure reaches {min_slope:e}"
            )));
        }
        if sup_glob > DPHI_GROWTH_BOUND {
            return Err(Error::Certification(format!(
                "sup |phi'| bound {sup_glob} exceeds the growth-analysis bound {DPHI_GROWTH_BOUND}"
            )));
        }
        Ok(abel)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn seed_error(&self) -> f64 {
        self.seed_error
    }

    pub fn recursion_cap(&self) -> usize {
        self.recursion_cap
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.seed.polys[0]
    }

    /// Certified upper bound on `sup_{[1, e]} |phi'|`.
    pub fn sup_dphi_fundamental(&self) -> f64 {
        self.sup_dphi_fundamental
    }

    /// Certified upper bound on `sup_R |phi'|`.
    pub fn sup_dphi_global(&self) -> f64 {
        self.sup_dphi_global
    }

    /// Jumps of the value and the first `order` derivatives across the
    /// junction `x = e`. All vanish for an exact Abel seed.
    pub fn junction_mismatch(&self) -> Vec<f64> {
        let c = &self.seed.polys[0];
        (0..=self.order)
            .map(|m| {
                let j: f64 = jump_row(c.len(), m).iter().zip(c).map(|(a, b)| a * b).sum();
                if m == 0 {
                    j - 1.0
                } else {
                    j
                }
            })
            .collect()
    }

    /// `sup |phi(e^x) - phi(x) - 1|` over `samples` uniform points in `[-5, 5]`.
    pub fn abel_residual(&self, samples: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let x = -5.0 + 10.0 * i as f64 / (samples.max(2) - 1) as f64;
            let r = (self.eval(x.exp())? - self.eval(x)? - 1.0).abs();
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// `phi(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (shift, frac) = self.eval_split(x)?;
        Ok(shift as f64 + frac)
    }

    /// `phi(x)` as `shift + frac` with `frac = seed(y)` in `[0, 1]`.
    ///
    /// The split form stays strictly increasing far below 0, where
    /// `phi(x) + 2` drops under the resolution of doubles near -2: the step
    /// into the fundamental domain is taken with `exp_m1` so the seed sees
    /// `t = y - 1` without cancellation.
    pub fn eval_split(&self, x: f64) -> Result<(i64, f64)> {
        let cap = Error::RecursionCap {
            cap: self.recursion_cap,
            x,
        };
        if !x.is_finite() {
            return Err(cap);
        }
        let (mut y, mut shift) = (x, 0i64);
        for _ in 0..=self.recursion_cap {
            if y < 1.0 {
                let t = y.exp_m1();
                if t >= 0.0 {
                    return Ok((shift - 1, horner(&self.seed.polys[0], t.min(SPAN))));
                }
                y = y.exp();
                shift -= 1;
            } else if y > E {
                y = y.ln();
                shift += 1;
            } else {
                return Ok((shift, self.seed.value(y, 0)));
            }
        }
        Err(cap)
    }

    // (phi, phi', phi'') at x via the chain rule through each Abel step.
    fn triple(&self, x: f64, depth: usize) -> Result<[f64; 3]> {
        if depth > self.recursion_cap || !x.is_finite() {
            return Err(Error::RecursionCap {
                cap: self.recursion_cap,
                x,
            });
        }
        if x < 1.0 {
            let y = x.exp();
            let [a, b, c] = self.triple(y, depth + 1)?;
            Ok([a - 1.0, b * y, c * y * y + b * y])
        } else if x > E {
            let y = x.ln();
            let [a, b, c] = self.triple(y, depth + 1)?;
            Ok([a + 1.0, b / x, (c - b) / (x * x)])
        } else {
            Ok([self.seed.value(x, 0), self.seed.value(x, 1), self.seed.value(x, 2)])
        }
    }

    /// `phi'(x)`.
    pub fn eval_deriv(&self, x: f64) -> Result<f64> {
        Ok(self.triple(x, 0)?[1])
    }

    /// `phi''(x)`.
    pub fn eval_deriv2(&self, x: f64) -> Result<f64> {
        Ok(self.triple(x, 0)?[2])
    }

    /// Enclosure of `phi^{(order)}` over `x`, `order <= 2`.
    ///
    /// Order 0 uses monotonicity: rigorous endpoint enclosures widened by
    /// `seed_error`. Derivatives split `x` at the junctions and push interval
    /// enclosures through the chain rule down to per-cell seed tables.
    pub fn eval_interval(&self, x: Interval, order: u8) -> Result<Interval> {
        if order == 0 {
            // Endpoint enclosures on either side of a junction can cross by
            // the junction mismatch, which seed_error covers; the hull keeps
            // the result ordered.
            let lo = if x.lo == f64::NEG_INFINITY {
                Interval::point(-2.0)
            } else {
                self.triple_interval(Interval::point(x.lo), 0)?[0]
            };
            let hi = if x.hi == f64::INFINITY {
                Interval::point(f64::INFINITY)
            } else {
                self.triple_interval(Interval::point(x.hi), 0)?[0]
            };
            return Ok(lo.hull(&hi).widen(self.seed_error));
        }
        let t = self.triple_interval(x, 0)?;
        Ok(t[order.min(2) as usize].widen(self.seed_error))
    }

    fn triple_interval(&self, x: Interval, depth: usize) -> Result<[Interval; 3]> {
        if depth > self.recursion_cap {
            return Err(Error::RecursionCap {
                cap: self.recursion_cap,
                x: x.lo,
            });
        }
        let mut acc: Option<[Interval; 3]> = None;
        let mut join = |part: [Interval; 3]| {
            acc = Some(match acc {
                None => part,
                Some(a) => [a[0].hull(&part[0]), a[1].hull(&part[1]), a[2].hull(&part[2])],
            });
        };
        // the outer pieces are taken half-open so junction points land in the seed piece
        if let Some(below) = x.intersect(&Interval::new(f64::NEG_INFINITY, 1.0)).filter(|_| x.lo < 1.0) {
            // e^x <= e for x <= 1; clipping keeps rounding slivers from
            // bouncing across the junction.
            let y = below.exp();
            let y = Interval::new(y.lo.min(E), y.hi.min(E));
            let [a, b, c] = self.triple_interval(y, depth + 1)?;
            let by = b.mul(&y);
            join([a.sub(&Interval::point(1.0)), by, c.mul(&y.sqr()).add(&by)]);
        }
        if let Some(mid) = x.intersect(&Interval::new(1.0, E)) {
            join([self.seed.enclose(mid, 0), self.seed.enclose(mid, 1), self.seed.enclose(mid, 2)]);
        }
        if let Some(above) = x.intersect(&Interval::new(E, f64::INFINITY)).filter(|_| x.hi > E) {
            let finite = if above.hi > TAIL_START {
                // phi increases without bound, 0 <= phi' <= sup, phi'' unconstrained here.
                let start = above.lo.max(TAIL_START);
                let v = self.eval(start)?;
                join([
                    Interval::new(v - 1e-9, f64::INFINITY),
                    Interval::new(0.0, self.sup_dphi_global),
                    Interval::entire(),
                ]);
                (above.lo < TAIL_START).then(|| Interval::new(above.lo, TAIL_START))
            } else {
                Some(above)
            };
            if let Some(above) = finite {
                let y = above.ln()?;
                let y = Interval::new(y.lo.max(1.0), y.hi.max(1.0));
                let [a, b, c] = self.triple_interval(y, depth + 1)?;
                let r = above.recip()?;
                join([a.add(&Interval::point(1.0)), b.mul(&r), c.sub(&b).mul(&r.sqr())]);
            }
        }
        acc.ok_or_else(|| Error::Invalid(format!("empty argument {x}")))
    }

    /// Inverse of `phi`: the trans-exponential `T` with `phi(T(y)) = y`.
    pub fn trans_exp(&self, y: f64) -> Result<f64> {
        if !y.is_finite() || y <= -2.0 {
            return Err(Error::InverseRange(y));
        }
        let m = y.floor();
        let frac = y - m;
        // bisection for seed(t) = frac on [1, e]
        let (mut lo, mut hi) = (1.0, E);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.seed.value(mid, 0) < frac {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        if m >= 0.0 {
            for _ in 0..m as i64 {
                x = x.exp();
                if !x.is_finite() {
                    return Err(Error::InverseRange(y));
                }
            }
        } else {
            for _ in 0..(-m) as i64 {
                if x <= 0.0 {
                    return Err(Error::InverseRange(y));
                }
                x = x.ln();
            }
        }
        Ok(x)
    }

    /// `T(x) > exp_i(x)` checked in the log domain as `x - phi(x) > i`.
    pub fn check_transexp(&self, i: u32, x: f64) -> Result<bool> {
        Ok(x - self.eval(x)? > i as f64)
    }

    /// Scan `samples` log-spaced points of `[x_lo, x_hi]` for the point past
    /// which `|phi(x)| <= log_n(x)` holds at every sample.
    pub fn check_domination(&self, n: u32, x_lo: f64, x_hi: f64, samples: usize) -> Result<DominationReport> {
        if !(1..=2).contains(&n) {
            return Err(Error::Invalid(format!("domination depth {n} not in 1..=2")));
        }
        if !(x_lo > 0.0 && x_lo < x_hi && x_hi.is_finite()) || samples < 2 {
            return Err(Error::Invalid(format!("bad domination range [{x_lo}, {x_hi}]")));
        }
        let (a, b) = (x_lo.ln(), x_hi.ln());
        let xs: Vec<f64> = (0..samples)
            .map(|i| {
                if i + 1 == samples {
                    x_hi
                } else {
                    (a + (b - a) * i as f64 / (samples - 1) as f64).exp()
                }
            })
            .collect();
        let mut threshold = None;
        for &x in xs.iter().rev() {
            let log_n = (0..n).fold(x, |acc, _| acc.ln());
            if self.eval(x)?.abs() <= log_n {
                threshold = Some(x);
            } else {
                break;
            }
        }
        Ok(DominationReport {
            n,
            x_lo,
            x_hi,
            samples,
            threshold,
        })
    }

    pub fn to_file(&self) -> AbelFile {
        AbelFile {
            version: ABEL_FILE_VERSION,
            order: self.order,
            tol: self.tol,
            coefficients: self.seed.polys[0].clone(),
            seed_error: self.seed_error,
            recursion_cap: self.recursion_cap,
            normalization: horner(&self.seed.polys[0], 0.0),
        }
    }

    /// Reconstruct from a file without re-fitting. Residual checks are left
    /// to the invariant suite so that damaged files can still be inspected.
    pub fn from_file(file: &AbelFile) -> Result<Self> {
        if file.version != ABEL_FILE_VERSION {
            return Err(Error::Invalid(format!("unsupported abel file version {}", file.version)));
        }
        Self::assemble(
            file.order,
            file.tol,
            file.coefficients.clone(),
            file.seed_error,
            file.recursion_cap,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("abel file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AbelFile = serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
        Self::from_file(&file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_values() {
        let a = AbelFunction::default_build();
        assert_eq!(a.eval(1.0).unwrap(), 0.0);
        assert!((a.eval(0.0).unwrap() + 1.0).abs() < 1e-12);
        assert!((a.eval(E.exp()).unwrap() - 2.0).abs() < 1e-12);
        let v = a.eval(-10.0).unwrap();
        assert!(v > -2.0 && v <= -1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(AbelFunction::build(0, 1e-8).is_err());
        assert!(AbelFunction::build(4, 1e-8).is_err());
        assert!(AbelFunction::build(3, 0.0).is_err());
        assert!(matches!(AbelFunction::build(3, 1e-20), Err(Error::AbelBuild { .. })));
    }

    #[test]
    fn every_order_builds_increasing() {
        for k in 1..=3 {
            let a = AbelFunction::build(k, 1e-8).unwrap();
            assert!(a.sup_dphi_global() <= DPHI_GROWTH_BOUND);
        }
    }

    #[test]
    fn non_finite_inputs_hit_the_cap() {
        let a = AbelFunction::default_build();
        for x in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
            assert!(matches!(a.eval(x), Err(Error::RecursionCap { .. })));
        }
    }

    #[test]
    fn interval_enclosures_contain_points() {
        let a = AbelFunction::default_build();
        let boxes = [(-3.0, 0.5), (0.9, 1.2), (1.0, E), (2.0, 40.0), (-1e3, 1e6)];
        for (lo, hi) in boxes {
            let x = Interval::new(lo, hi);
            let encl: Vec<Interval> = (0..3).map(|o| a.eval_interval(x, o).unwrap()).collect();
            for i in 0..=200 {
                let p = lo + (hi - lo) * i as f64 / 200.0;
                assert!(encl[0].contains(a.eval(p).unwrap()), "phi at {p}");
                assert!(encl[1].contains(a.eval_deriv(p).unwrap()), "phi' at {p}");
                assert!(encl[2].contains(a.eval_deriv2(p).unwrap()), "phi'' at {p}");
            }
        }
    }

    #[test]
    fn unbounded_enclosure() {
        let a = AbelFunction::default_build();
        let v = a.eval_interval(Interval::new(0.0, f64::INFINITY), 0).unwrap();
        assert!(v.lo <= -1.0 && v.hi == f64::INFINITY);
        let d = a.eval_interval(Interval::entire(), 1).unwrap();
        assert!(d.lo <= 0.0 && d.hi >= a.sup_dphi_fundamental());
    }

    #[test]
    fn sliver_across_a_junction() {
        let a = AbelFunction::default_build();
        for c in [1.0, E] {
            let x = Interval::new(c, c).widen(f64::EPSILON);
            let v = a.eval_interval(x, 0).unwrap();
            assert!(v.lo <= v.hi && v.contains(a.eval(c).unwrap()));
        }
    }

    #[test]
    fn inverse_tower_values() {
        let a = AbelFunction::default_build();
        assert!((a.trans_exp(0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((a.trans_exp(1.0).unwrap() - E).abs() < 1e-12);
        assert!((a.trans_exp(2.0).unwrap() - E.exp()).abs() < 1e-10);
        assert!(a.trans_exp(-2.0).is_err());
        assert!(a.trans_exp(6.0).is_err());
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let a = AbelFunction::default_build();
        let b = AbelFunction::from_json(&a.to_json()).unwrap();
        assert_eq!(a.to_file(), b.to_file());
        for x in [-4.0, 0.3, 2.0, 1e5] {
            assert_eq!(a.eval(x).unwrap().to_bits(), b.eval(x).unwrap().to_bits());
        }
    }
}
