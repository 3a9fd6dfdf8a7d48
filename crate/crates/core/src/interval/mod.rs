//! Outward-rounded interval arithmetic, boxes, and the Krawczyk test.
//!
//! Every primitive widens its result by one ulp per endpoint (two for the
//! libm transcendentals), so results always enclose the exact real result.

mod krawczyk;

pub use krawczyk::{krawczyk_test, KrawczykResult, Verdict};

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
fn down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn up(x: f64) -> f64 {
    x.next_up()
}

#[inline]
fn down2(x: f64) -> f64 {
    x.next_down().next_down()
}

#[inline]
fn up2(x: f64) -> f64 {
    x.next_up().next_up()
}

// 0 * inf = 0, the usual convention for interval endpoint products.
#[inline]
fn emul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// Closed interval `[lo, hi]`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }.sanitize()
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }.sanitize()
    }

    pub fn entire() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    fn sanitize(self) -> Self {
        if self.lo.is_nan() || self.hi.is_nan() {
            Interval::entire()
        } else {
            self
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        if self.lo.is_infinite() || self.hi.is_infinite() {
            if self.lo.is_infinite() && self.hi.is_infinite() {
                return 0.0;
            }
            return if self.lo.is_infinite() {
                self.hi.min(0.0) - 1.0
            } else {
                self.lo.max(0.0) + 1.0
            };
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value in the interval.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self` lies strictly inside `other`.
    pub fn interior_of(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Widen both endpoints by `r >= 0`.
    pub fn widen(&self, r: f64) -> Interval {
        Interval::new(down(self.lo - r), up(self.hi + r))
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(down(self.lo - o.hi), up(self.hi - o.lo))
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let p = [
            emul(self.lo, o.lo),
            emul(self.lo, o.hi),
            emul(self.hi, o.lo),
            emul(self.hi, o.hi),
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }

    /// Square, tighter than `mul(self, self)` when the interval straddles zero.
    pub fn sqr(&self) -> Interval {
        let (a, b) = (emul(self.lo, self.lo), emul(self.hi, self.hi));
        if self.contains_zero() {
            Interval::new(0.0, up(a.max(b)))
        } else {
            Interval::new(down(a.min(b)).max(0.0), up(a.max(b)))
        }
    }

    pub fn mul_point(&self, c: f64) -> Interval {
        self.mul(&Interval::point(c))
    }

    /// Division by a nonzero scalar.
    pub fn div_point(&self, c: f64) -> Interval {
        debug_assert!(c != 0.0);
        let (a, b) = (self.lo / c, self.hi / c);
        Interval::new(down(a.min(b)), up(a.max(b)))
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::domain("recip", self, "R \\ {0}", self.lo == 0.0 && self.hi == 0.0));
        }
        let (a, b) = (1.0 / self.hi, 1.0 / self.lo);
        Ok(Interval::new(down(a), up(b)))
    }

    pub fn exp(&self) -> Interval {
        Interval::new(down2(self.lo.exp()).max(0.0), up2(self.hi.exp()))
    }

    pub fn ln(&self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(Error::domain("log", self, "(0, inf)", self.hi <= 0.0));
        }
        Ok(Interval::new(down2(self.lo.ln()), up2(self.hi.ln())))
    }

    pub fn atan(&self) -> Interval {
        Interval::new(down2(self.lo.atan()), up2(self.hi.atan()))
    }

    pub fn sin(&self) -> Interval {
        self.periodic_extrema(FRAC_PI_2, f64::sin)
    }

    pub fn cos(&self) -> Interval {
        self.periodic_extrema(0.0, f64::cos)
    }

    // Enclosure of a unit-amplitude 2π-periodic function with its maximum at
    // `peak` and minimum at `peak + π`.
    fn periodic_extrema(&self, peak: f64, f: fn(f64) -> f64) -> Interval {
        if !self.is_finite() || self.width() >= 2.0 * PI {
            return Interval::new(-1.0, 1.0);
        }
        let (a, b) = (f(self.lo), f(self.hi));
        let mut lo = down2(a.min(b));
        let mut hi = up2(a.max(b));
        let slack = 1e-9 * (1.0 + self.mag());
        let hits = |center: f64| {
            let k = ((self.lo - center - slack) / (2.0 * PI)).ceil();
            center + 2.0 * PI * k <= self.hi + slack
        };
        if hits(peak) {
            hi = 1.0;
        }
        if hits(peak + PI) {
            lo = -1.0;
        }
        Interval::new(lo.max(-1.0), hi.min(1.0))
    }
}

/// Axis-aligned box: one interval per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox(pub Vec<Interval>);

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> Self {
        IntervalBox(dims)
    }

    /// The cube `[-r, r]^n`, which contains the closed ball of radius `r`.
    pub fn cube(n: usize, r: f64) -> Self {
        IntervalBox(vec![Interval::new(-r, r); n])
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> Self {
        IntervalBox(bounds.iter().map(|&(a, b)| Interval::new(a, b)).collect())
    }

    pub fn point(x: &[f64]) -> Self {
        IntervalBox(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(Interval::mid).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.0.iter().map(Interval::width).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.0.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.0.iter().zip(x).all(|(i, &v)| i.contains(v))
    }

    pub fn interior_of(&self, other: &IntervalBox) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a.interior_of(b))
    }

    pub fn subset_of(&self, other: &IntervalBox) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a.subset_of(b))
    }

    pub fn intersect(&self, other: &IntervalBox) -> Option<IntervalBox> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(IntervalBox)
    }

    /// Box with the same center and every half-width scaled by `factor`.
    pub fn inflate(&self, factor: f64) -> IntervalBox {
        IntervalBox(
            self.0
                .iter()
                .map(|i| {
                    let m = i.mid();
                    let r = 0.5 * i.width() * factor;
                    Interval::new(down(m - r), up(m + r))
                })
                .collect(),
        )
    }

    /// Append fixed coordinates (parameters) as degenerate intervals.
    pub fn extended(&self, tail: &[f64]) -> Vec<Interval> {
        self.0
            .iter()
            .copied()
            .chain(tail.iter().map(|&v| Interval::point(v)))
            .collect()
    }

    /// Bisect the widest coordinate at its midpoint; ties go to the lowest index.
    pub fn subdivide(&self) -> Result<(IntervalBox, IntervalBox)> {
        let mut axis = 0;
        let mut best = -1.0;
        for (i, iv) in self.0.iter().enumerate() {
            if iv.width() > best {
                best = iv.width();
                axis = i;
            }
        }
        if !(best > 0.0) {
            return Err(Error::ZeroWidth);
        }
        let iv = self.0[axis];
        let m = iv.mid();
        if m <= iv.lo || m >= iv.hi {
            return Err(Error::ZeroWidth);
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.0[axis] = Interval::new(iv.lo, m);
        right.0[axis] = Interval::new(m, iv.hi);
        Ok((left, right))
    }
}
