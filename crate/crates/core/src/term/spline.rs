//! Piecewise cubic Hermite tables used as restricted-analytic stand-ins.

use crate::interval::Interval;

/// Cubic Hermite interpolant on a uniform grid over `[lo, hi]`.
///
/// Each segment stores power-basis coefficients in the local coordinate
/// `s = (x - x_i) / h`, so the float evaluator and the interval evaluator
/// describe the same piecewise polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSpline {
    lo: f64,
    hi: f64,
    h: f64,
    coeffs: Vec<[f64; 4]>,
    // per segment and derivative order 0..=2: enclosure over the full segment
    hulls: Vec<[Interval; 3]>,
}

impl HermiteSpline {
    /// Builds the interpolant of `f` from values and slopes sampled at
    /// `segments + 1` uniform knots.
    pub fn from_fn(lo: f64, hi: f64, segments: usize, f: impl Fn(f64) -> (f64, f64)) -> Self {
        assert!(hi > lo && segments > 0);
        let h = (hi - lo) / segments as f64;
        let knots: Vec<(f64, f64)> = (0..=segments)
            .map(|i| {
                let x = if i == segments { hi } else { lo + h * i as f64 };
                f(x)
            })
            .collect();
        let coeffs: Vec<[f64; 4]> = knots
            .windows(2)
            .map(|w| {
                let (y0, m0) = w[0];
                let (y1, m1) = w[1];
                let (d0, d1) = (h * m0, h * m1);
                [
                    y0,
                    d0,
                    -3.0 * y0 - 2.0 * d0 + 3.0 * y1 - d1,
                    2.0 * y0 + d0 - 2.0 * y1 + d1,
                ]
            })
            .collect();
        let unit = Interval::new(0.0, 1.0);
        let hulls = coeffs
            .iter()
            .map(|c| {
                [
                    local_interval(c, 0, unit, h),
                    local_interval(c, 1, unit, h),
                    local_interval(c, 2, unit, h),
                ]
            })
            .collect();
        HermiteSpline {
            lo,
            hi,
            h,
            coeffs,
            hulls,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn segments(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest absolute knot-sampled value of the table itself.
    pub fn max_abs(&self) -> f64 {
        self.hulls
            .iter()
            .map(|h| h[0].mag())
            .fold(0.0, f64::max)
    }

    fn segment_of(&self, x: f64) -> usize {
        let i = ((x - self.lo) / self.h).floor();
        (i.max(0.0) as usize).min(self.coeffs.len() - 1)
    }

    /// Value of the `order`-th derivative at `x` (order <= 3). `x` must lie in the domain.
    pub fn eval(&self, x: f64, order: u8) -> f64 {
        let i = self.segment_of(x);
        let s = (x - (self.lo + self.h * i as f64)) / self.h;
        let c = &self.coeffs[i];
        let h = self.h;
        match order {
            0 => c[0] + s * (c[1] + s * (c[2] + s * c[3])),
            1 => (c[1] + s * (2.0 * c[2] + s * 3.0 * c[3])) / h,
            2 => (2.0 * c[2] + 6.0 * c[3] * s) / (h * h),
            3 => 6.0 * c[3] / (h * h * h),
            _ => 0.0,
        }
    }

    /// Enclosure of the `order`-th derivative over `x` (order <= 2), which
    /// must lie inside the domain.
    pub fn eval_interval(&self, x: Interval, order: u8) -> Interval {
        let first = self.segment_of(x.lo);
        let last = self.segment_of(x.hi);
        let mut acc: Option<Interval> = None;
        for i in first..=last {
            let x0 = self.lo + self.h * i as f64;
            let seg = Interval::new(x0, x0 + self.h);
            let piece = if x.lo <= seg.lo && x.hi >= seg.hi && order <= 2 {
                self.hulls[i][order as usize]
            } else {
                let clipped = x.intersect(&seg).unwrap_or(Interval::point(x.lo.clamp(seg.lo, seg.hi)));
                let s = clipped
                    .sub(&Interval::point(x0))
                    .div_point(self.h)
                    .intersect(&Interval::new(0.0, 1.0))
                    .unwrap_or(Interval::new(0.0, 1.0));
                local_interval(&self.coeffs[i], order, s, self.h)
            };
            acc = Some(match acc {
                Some(a) => a.hull(&piece),
                None => piece,
            });
        }
        acc.expect("non-empty segment range")
    }
}

fn local_interval(c: &[f64; 4], order: u8, s: Interval, h: f64) -> Interval {
    let p = |a: f64| Interval::point(a);
    match order {
        0 => p(c[0]).add(&s.mul(&p(c[1]).add(&s.mul(&p(c[2]).add(&s.mul(&p(c[3]))))))),
        1 => p(c[1])
            .add(&s.mul(&p(2.0 * c[2]).add(&s.mul(&p(3.0 * c[3])))))
            .div_point(h),
        2 => p(2.0 * c[2])
            .add(&s.mul(&p(6.0 * c[3])))
            .div_point(h * h),
        3 => p(6.0 * c[3]).div_point(h * h * h),
        _ => Interval::point(0.0),
    }
}
