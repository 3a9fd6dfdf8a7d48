//! Polynomial seed on the fundamental domain `[1, e]`.

use std::f64::consts::E;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Width of the fundamental domain in the local coordinate `t = x - 1`.
pub(crate) const SPAN: f64 = E - 1.0;

/// Number of uniform cells used for precomputed derivative enclosures.
pub(crate) const CELLS: usize = 64;

/// Signed Stirling numbers of the first kind, `s(m, j)`.
fn stirling1(m: usize, j: usize) -> f64 {
    let mut table = vec![vec![0.0f64; m + 1]; m + 1];
    table[0][0] = 1.0;
    for a in 1..=m {
        for b in 1..=a {
            table[a][b] = table[a - 1][b - 1] - (a as f64 - 1.0) * table[a - 1][b];
        }
    }
    table[m][j]
}

fn falling(i: usize, order: usize) -> f64 {
    (0..order).map(|k| (i - k) as f64).product()
}

/// Row of the linear functional `c -> p^{(order)}(t)` for `p(t) = sum c_i t^i`.
fn derivative_row(len: usize, order: usize, t: f64) -> Vec<f64> {
    (0..len)
        .map(|i| if i < order { 0.0 } else { falling(i, order) * t.powi((i - order) as i32) })
        .collect()
}

/// Row of the jump functional of order `m` at the junction `x = e`: the left
/// derivative `p^{(m)}` minus the right derivative of `x -> p(log x) + 1`,
/// which is `e^{-m} * sum_j s(m, j) p^{(j)}(1)`. For `m = 0` the constant
/// `+1` is moved to the right-hand side.
pub(crate) fn jump_row(len: usize, m: usize) -> Vec<f64> {
    let mut row = derivative_row(len, m, SPAN);
    if m == 0 {
        let at1 = derivative_row(len, 0, 0.0);
        for (r, a) in row.iter_mut().zip(at1) {
            *r -= a;
        }
        return row;
    }
    let scale = E.powi(-(m as i32));
    for j in 1..=m {
        let s = stirling1(m, j);
        for (r, a) in row.iter_mut().zip(derivative_row(len, j, 0.0)) {
            *r -= scale * s * a;
        }
    }
    row
}

/// Coefficients (ascending, in `t = x - 1`) of the degree `2k+1` seed:
/// values `0` at `x = 1` and `1` at `x = e`, junction derivatives matched up
/// to order `k`, and the order-`k+1` jump minimized in least squares, with a
/// light penalty on the higher jumps to pin the remaining freedom.
pub(crate) fn fit_seed(k: usize) -> Result<Vec<f64>> {
    let len = 2 * k + 2;
    let mut eq_rows: Vec<Vec<f64>> = vec![derivative_row(len, 0, 0.0), derivative_row(len, 0, SPAN)];
    let mut eq_rhs = vec![0.0, 1.0];
    for m in 1..=k {
        eq_rows.push(jump_row(len, m));
        eq_rhs.push(0.0);
    }
    let obj_rows: Vec<(f64, Vec<f64>)> = (k + 1..=2 * k + 1)
        .map(|m| (if m == k + 1 { 1.0 } else { 1e-3 }, jump_row(len, m)))
        .collect();

    // KKT system: [2 J^T W J, A^T; A, 0] [c; lambda] = [0; b]
    let p = eq_rows.len();
    let mut kkt = DMatrix::<f64>::zeros(len + p, len + p);
    for (w, row) in &obj_rows {
        for a in 0..len {
            for b in 0..len {
                kkt[(a, b)] += 2.0 * w * row[a] * row[b];
            }
        }
    }
    for (r, row) in eq_rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            kkt[(len + r, c)] = *v;
            kkt[(c, len + r)] = *v;
        }
    }
    let mut rhs = DVector::<f64>::zeros(len + p);
    for (r, v) in eq_rhs.iter().enumerate() {
        rhs[len + r] = *v;
    }
    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("seed KKT system".into()))?;
    let mut coeffs: Vec<f64> = sol.iter().take(len).copied().collect();
    // normalization phi(1) = 0 held exactly
    coeffs[0] = 0.0;
    Ok(coeffs)
}

pub(crate) fn derive(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

pub(crate) fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

pub(crate) fn horner_interval(coeffs: &[f64], t: Interval) -> Interval {
    coeffs
        .iter()
        .rev()
        .fold(Interval::point(0.0), |acc, c| acc.mul(&t).add(&Interval::point(*c)))
}

/// Seed polynomial with its first two derivatives and per-cell enclosures.
#[derive(Debug, Clone)]
pub(crate) struct Seed {
    pub polys: [Vec<f64>; 3],
    pub cells: Vec<[Interval; 3]>,
}

impl Seed {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let d1 = derive(&coeffs);
        let d2 = derive(&d1);
        let polys = [coeffs, d1, d2];
        let h = SPAN / CELLS as f64;
        let cells = (0..CELLS)
            .map(|i| {
                let t = Interval::new(h * i as f64, if i + 1 == CELLS { SPAN } else { h * (i + 1) as f64 });
                [
                    horner_interval(&polys[0], t),
                    horner_interval(&polys[1], t),
                    horner_interval(&polys[2], t),
                ]
            })
            .collect();
        Seed { polys, cells }
    }

    pub fn value(&self, x: f64, order: usize) -> f64 {
        horner(&self.polys[order], x - 1.0)
    }

    /// Enclosure of the `order`-th seed derivative over `x`, a sub-interval of `[1, e]`.
    pub fn enclose(&self, x: Interval, order: usize) -> Interval {
        let t = x.sub(&Interval::point(1.0));
        let t = t.intersect(&Interval::new(0.0, SPAN)).unwrap_or(t);
        let h = SPAN / CELLS as f64;
        let first = ((t.lo / h).floor().max(0.0) as usize).min(CELLS - 1);
        let last = ((t.hi / h).floor().max(0.0) as usize).min(CELLS - 1);
        let mut acc: Option<Interval> = None;
        for i in first..=last {
            let cell = Interval::new(h * i as f64, h * (i + 1) as f64);
            let piece = if t.lo <= cell.lo && t.hi >= cell.hi {
                self.cells[i][order]
            } else {
                let clipped = t.intersect(&cell).unwrap_or(t);
                horner_interval(&self.polys[order], clipped)
            };
            acc = Some(acc.map_or(piece, |a| a.hull(&piece)));
        }
        acc.expect("at least one cell")
    }

    /// A priori bound on the rounding error of float Horner evaluation over the domain.
    pub fn horner_error_bound(&self) -> f64 {
        let n = self.polys[0].len() as f64;
        let gamma = 2.0 * n * f64::EPSILON / (1.0 - 2.0 * n * f64::EPSILON);
        let abs_sum: f64 = self.polys[0]
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs() * SPAN.powi(i as i32))
            .sum();
        gamma * abs_sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirling_values() {
        assert_eq!(stirling1(2, 1), -1.0);
        assert_eq!(stirling1(3, 1), 2.0);
        assert_eq!(stirling1(3, 2), -3.0);
        assert_eq!(stirling1(4, 2), 11.0);
    }

    #[test]
    fn constraints_hold_for_each_order() {
        for k in 1..=3 {
            let c = fit_seed(k).unwrap();
            assert_eq!(c.len(), 2 * k + 2);
            assert!(horner(&c, 0.0).abs() < 1e-15);
            assert!((horner(&c, SPAN) - 1.0).abs() < 1e-13);
            for m in 0..=k {
                let mut j: f64 = jump_row(c.len(), m).iter().zip(&c).map(|(a, b)| a * b).sum();
                if m == 0 {
                    j -= 1.0;
                }
                assert!(j.abs() < 1e-12, "k={k} jump {m} = {j}");
            }
        }
    }
}
