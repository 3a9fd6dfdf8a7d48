//! Brute-force grid ground truth: zero localization and flood-fill component
//! counts. Not certified; used to cross-check the certified paths.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abel::AbelFunction;
use crate::census::SquareSystem;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalBox};

pub const DEFAULT_CELL_CAP: u128 = 100_000_000;

/// Uniform grid over a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bx: IntervalBox,
    pub resolution: Vec<usize>,
    pub cap: u128,
}

impl GridSpec {
    pub fn new(bx: IntervalBox, resolution: Vec<usize>) -> Result<Self> {
        Self::with_cap(bx, resolution, DEFAULT_CELL_CAP)
    }

    /// Same resolution on every axis.
    pub fn uniform(bx: IntervalBox, per_axis: usize) -> Result<Self> {
        let n = bx.dim();
        Self::new(bx, vec![per_axis; n])
    }

    pub fn with_cap(bx: IntervalBox, resolution: Vec<usize>, cap: u128) -> Result<Self> {
        if resolution.len() != bx.dim() {
            return Err(Error::Invalid(format!(
                "{} resolutions for a box of dimension {}",
                resolution.len(),
                bx.dim()
            )));
        }
        if resolution.iter().any(|&r| r < 2) {
            return Err(Error::Invalid("grid resolution must be at least 2 per axis".into()));
        }
        if !bx.0.iter().all(|iv| iv.is_finite() && iv.width() > 0.0) {
            return Err(Error::Invalid("grid box must be finite with positive widths".into()));
        }
        let cells = resolution.iter().map(|&r| r as u128).product::<u128>();
        if cells > cap {
            return Err(Error::GridCap { cells, cap });
        }
        Ok(GridSpec { bx, resolution, cap })
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn cells(&self) -> usize {
        self.resolution.iter().product()
    }

    fn step(&self, axis: usize) -> f64 {
        self.bx.0[axis].width() / self.resolution[axis] as f64
    }

    /// Longest cell diagonal.
    pub fn cell_diagonal(&self) -> f64 {
        (0..self.dim()).map(|a| self.step(a).powi(2)).sum::<f64>().sqrt()
    }

    /// Multi-index of a linear index; the last axis varies fastest.
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            out[a] = idx % self.resolution[a];
            idx /= self.resolution[a];
        }
        out
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.resolution).fold(0, |acc, (&i, &r)| acc * r + i)
    }

    pub fn cell_box(&self, idx: usize) -> IntervalBox {
        let m = self.unravel(idx);
        IntervalBox::new(
            m.iter()
                .enumerate()
                .map(|(a, &i)| {
                    let lo = self.bx.0[a].lo + self.step(a) * i as f64;
                    let hi = if i + 1 == self.resolution[a] {
                        self.bx.0[a].hi
                    } else {
                        self.bx.0[a].lo + self.step(a) * (i + 1) as f64
                    };
                    Interval::new(lo, hi)
                })
                .collect(),
        )
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        self.unravel(idx)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.bx.0[a].lo + self.step(a) * (i as f64 + 0.5))
            .collect()
    }

    // Neighbors differing by one step on one axis, or on any subset of axes
    // when `diagonal` is set.
    fn neighbors(&self, idx: usize, diagonal: bool) -> Vec<usize> {
        let m = self.unravel(idx);
        let n = self.dim();
        let mut out = Vec::new();
        if diagonal {
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                let mut q = m.clone();
                let mut ok = true;
                let mut moved = false;
                for a in 0..n {
                    let d = (c % 3) as isize - 1;
                    c /= 3;
                    let v = m[a] as isize + d;
                    if v < 0 || v >= self.resolution[a] as isize {
                        ok = false;
                        break;
                    }
                    moved |= d != 0;
                    q[a] = v as usize;
                }
                if ok && moved {
                    out.push(self.ravel(&q));
                }
            }
        } else {
            for a in 0..n {
                if m[a] > 0 {
                    let mut q = m.clone();
                    q[a] -= 1;
                    out.push(self.ravel(&q));
                }
                if m[a] + 1 < self.resolution[a] {
                    let mut q = m.clone();
                    q[a] += 1;
                    out.push(self.ravel(&q));
                }
            }
        }
        out
    }
}

/// Linear indices (ascending) of cells where every equation's interval
/// enclosure contains zero. On partially defined cells the enclosure covers
/// only the defined part.
pub fn grid_zero_cells(system: &SquareSystem, grid: &GridSpec, abel: &AbelFunction) -> Result<Vec<usize>> {
    if grid.dim() != system.dim() {
        return Err(Error::Invalid("grid and system dimensions differ".into()));
    }
    (0..grid.cells())
        .into_par_iter()
        .filter_map(|i| match system.eval_box_restricted(&grid.cell_box(i), abel) {
            Ok(v) => v.iter().all(Interval::contains_zero).then_some(Ok(i)),
            Err(e) if e.is_total_domain() => None,
            Err(e) => Some(Err(e)),
        })
        .collect()
}

/// Connected groups of a cell set, in order of their least cell.
pub fn cluster_cells(grid: &GridSpec, cells: &[usize], diagonal: bool) -> Vec<Vec<usize>> {
    let mut member = vec![false; grid.cells()];
    for &c in cells {
        member[c] = true;
    }
    label(grid, &mut member, diagonal)
}

fn label(grid: &GridSpec, member: &mut [bool], diagonal: bool) -> Vec<Vec<usize>> {
    let mut groups = Vec::new();
    for start in 0..member.len() {
        if !member[start] {
            continue;
        }
        member[start] = false;
        let mut group = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for nb in grid.neighbors(c, diagonal) {
                if member[nb] {
                    member[nb] = false;
                    group.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        group.sort_unstable();
        groups.push(group);
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCluster {
    pub cells: usize,
    /// Mean of the member cell centers.
    pub center: Vec<f64>,
}

/// Zero cells grouped with diagonal adjacency; one cluster per isolated zero
/// at adequate resolution.
pub fn grid_zero_clusters(system: &SquareSystem, grid: &GridSpec, abel: &AbelFunction) -> Result<Vec<ZeroCluster>> {
    let cells = grid_zero_cells(system, grid, abel)?;
    Ok(cluster_cells(grid, &cells, true)
        .into_iter()
        .map(|g| {
            let mut center = vec![0.0; grid.dim()];
            for &c in &g {
                for (s, v) in center.iter_mut().zip(grid.cell_center(c)) {
                    *s += v;
                }
            }
            center.iter_mut().for_each(|s| *s /= g.len() as f64);
            ZeroCluster {
                cells: g.len(),
                center,
            }
        })
        .collect())
}

/// Number of components, under axis adjacency, of the cells whose centers
/// satisfy `member`.
pub fn flood_components(grid: &GridSpec, member: impl Fn(&[f64]) -> bool + Sync) -> usize {
    let mut inside: Vec<bool> = (0..grid.cells())
        .into_par_iter()
        .map(|i| member(&grid.cell_center(i)))
        .collect();
    label(grid, &mut inside, false).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{build_system, Params};

    #[test]
    fn indexing_round_trips() {
        let g = GridSpec::new(IntervalBox::from_bounds(&[(0.0, 1.0), (0.0, 2.0)]), vec![3, 4]).unwrap();
        for i in 0..g.cells() {
            assert_eq!(g.ravel(&g.unravel(i)), i);
        }
        assert_eq!(g.unravel(5), vec![1, 1]);
        assert_eq!(g.neighbors(0, false).len(), 2);
        assert_eq!(g.neighbors(5, true).len(), 8);
    }

    #[test]
    fn cap_and_resolution_checks() {
        let b = IntervalBox::cube(2, 1.0);
        assert!(matches!(GridSpec::with_cap(b.clone(), vec![100, 100], 1000), Err(Error::GridCap { .. })));
        assert!(GridSpec::new(b, vec![1, 4]).is_err());
    }

    #[test]
    fn zero_cells_basic() {
        let abel = AbelFunction::default_build();
        let g = GridSpec::uniform(IntervalBox::cube(1, 2.0), 64).unwrap();
        let far = build_system(&["x1"], &["x1 - 10"], &Params::zeros(1)).unwrap();
        assert!(grid_zero_cells(&far, &g, &abel).unwrap().is_empty());
        let zero = build_system(&["x1"], &["0"], &Params::zeros(1)).unwrap();
        assert_eq!(grid_zero_cells(&zero, &g, &abel).unwrap().len(), 64);
    }

    #[test]
    fn flood_counts() {
        let g = GridSpec::uniform(IntervalBox::cube(1, 2.0), 4096).unwrap();
        let tau = 4.0 * g.cell_diagonal();
        assert_eq!(flood_components(&g, |x| (x[0] * x[0] - 1.0).abs() <= tau * 2.0 * x[0].abs()), 2);
        assert_eq!(flood_components(&g, |_| false), 0);
    }
}
