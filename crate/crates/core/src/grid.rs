//! Periodic grid specifications and axis-wise lane utilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic grid on [−L, L)^d grouped into factors of dimensions `dims`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dims: Vec<usize>,
    box_half_widths: Vec<f64>,
    samples: Vec<usize>,
}

impl GridSpec {
    pub fn new(dims: Vec<usize>, box_half_widths: Vec<f64>, samples: Vec<usize>) -> Result<Self> {
        let axes: usize = dims.iter().sum();
        if dims.is_empty() || dims.iter().any(|d| *d == 0) {
            return Err(Error::InvalidArgument("factor dimensions must be positive".into()));
        }
        if box_half_widths.len() != axes || samples.len() != axes {
            return Err(Error::InvalidArgument(format!(
                "expected {axes} box widths and sample counts"
            )));
        }
        for &n in &samples {
            if n < 16 || !n.is_power_of_two() {
                return Err(Error::InvalidArgument(format!(
                    "samples per axis must be a power of two >= 16, got {n}"
                )));
            }
        }
        if box_half_widths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidArgument("box half widths must be positive".into()));
        }
        Ok(Self { dims, box_half_widths, samples })
    }

    /// A single-factor grid with the same width and sample count on every axis.
    pub fn cube(dim: usize, half_width: f64, samples: usize) -> Result<Self> {
        Self::new(vec![dim], vec![half_width; dim], vec![samples; dim])
    }

    /// A product of two one-dimensional factors.
    pub fn product_1d(l1: f64, n1: usize, l2: f64, n2: usize) -> Result<Self> {
        Self::new(vec![1, 1], vec![l1, l2], vec![n1, n2])
    }

    /// The product of two grids, factors of `a` first.
    pub fn product(a: &GridSpec, b: &GridSpec) -> Result<Self> {
        Self::new(
            [a.dims.clone(), b.dims.clone()].concat(),
            [a.box_half_widths.clone(), b.box_half_widths.clone()].concat(),
            [a.samples.clone(), b.samples.clone()].concat(),
        )
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn box_half_widths(&self) -> &[f64] {
        &self.box_half_widths
    }
    pub fn samples(&self) -> &[usize] {
        &self.samples
    }
    pub fn axes(&self) -> usize {
        self.samples.len()
    }
    pub fn factors(&self) -> usize {
        self.dims.len()
    }
    pub fn len(&self) -> usize {
        self.samples.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.box_half_widths[axis] / self.samples[axis] as f64
    }
    pub fn cell_volume(&self) -> f64 {
        (0..self.axes()).map(|a| self.spacing(a)).product()
    }
    pub fn volume(&self) -> f64 {
        self.box_half_widths.iter().map(|l| 2.0 * l).product()
    }

    /// First axis of factor `i`.
    pub fn factor_offset(&self, i: usize) -> usize {
        self.dims[..i].iter().sum()
    }

    /// The grid of factor `i` alone.
    pub fn factor_spec(&self, i: usize) -> GridSpec {
        let o = self.factor_offset(i);
        let d = self.dims[i];
        GridSpec {
            dims: vec![d],
            box_half_widths: self.box_half_widths[o..o + d].to_vec(),
            samples: self.samples[o..o + d].to_vec(),
        }
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.axes()];
        for a in (0..self.axes().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.samples[a + 1];
        }
        s
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for (a, &i) in idx.iter().enumerate() {
            f = f * self.samples[a] + i;
        }
        f
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes()];
        for a in (0..self.axes()).rev() {
            idx[a] = flat % self.samples[a];
            flat /= self.samples[a];
        }
        idx
    }

    /// x_j = −L + jδ along `axis`.
    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        -self.box_half_widths[axis] + j as f64 * self.spacing(axis)
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &j)| self.coordinate(a, j)).collect()
    }

    /// Grid index of the origin along each axis.
    pub fn origin_index(&self) -> Vec<usize> {
        self.samples.iter().map(|n| n / 2).collect()
    }

    /// Signed minimal-image offset (in cells) from index `from` to index `to`.
    #[inline]
    pub fn min_image(&self, axis: usize, from: usize, to: usize) -> i64 {
        let n = self.samples[axis] as i64;
        let mut d = to as i64 - from as i64;
        if d >= n / 2 {
            d -= n;
        } else if d < -n / 2 {
            d += n;
        }
        d
    }

    /// Wraps a signed index into [0, n).
    #[inline]
    pub fn wrap(&self, axis: usize, i: i64) -> usize {
        i.rem_euclid(self.samples[axis] as i64) as usize
    }

    /// Dual-lattice frequency ξ_k = πk/L for signed k of DFT index `kk`.
    pub fn frequency(&self, axis: usize, kk: usize) -> f64 {
        std::f64::consts::PI * signed_index(kk, self.samples[axis]) as f64 / self.box_half_widths[axis]
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }
}

/// Signed frequency index of DFT slot `kk` on `n` samples: [−n/2, n/2).
#[inline]
pub fn signed_index(kk: usize, n: usize) -> i64 {
    let k = kk as i64;
    if k >= (n / 2) as i64 {
        k - n as i64
    } else {
        k
    }
}

/// Applies `op` to every lane of `data` along `axis` (shape `samples`,
/// row-major). Lanes are processed in parallel; each lane is independent.
pub fn for_each_lane<T, F>(data: &mut [T], samples: &[usize], axis: usize, op: F)
where
    T: Copy + Send + Sync + Default,
    F: Fn(&mut [T]) + Send + Sync,
{
    let n = samples[axis];
    let inner: usize = samples[axis + 1..].iter().product();
    if inner == 1 {
        data.par_chunks_mut(n).for_each(|lane| op(lane));
        return;
    }
    // Transpose (outer, n, inner) into contiguous (outer, inner, n) lanes.
    let block = n * inner;
    let mut buf = vec![T::default(); data.len()];
    data.par_chunks(block)
        .zip(buf.par_chunks_mut(block))
        .for_each(|(src, dst)| transpose(src, n, inner, dst));
    buf.par_chunks_mut(n).for_each(|lane| op(lane));
    buf.par_chunks(block)
        .zip(data.par_chunks_mut(block))
        .for_each(|(src, dst)| transpose(src, inner, n, dst));
}

/// dst (cols × rows) = transpose of src (rows × cols), blocked for cache.
fn transpose<T: Copy>(src: &[T], rows: usize, cols: usize, dst: &mut [T]) {
    const TILE: usize = 32;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Compensated (Neumaier) summation in a fixed order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in iter {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = GridSpec::new(vec![1, 2], vec![1.0, 2.0, 3.0], vec![16, 32, 64]).unwrap();
        for flat in [0, 1, 17, 5000, g.len() - 1] {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        assert_eq!(g.factor_spec(1).samples(), &[32, 64]);
        assert_eq!(g.coordinate(0, 8), 0.0);
        assert_eq!(g.min_image(0, 1, 15), -2);
        assert_eq!(g.min_image(0, 0, 8), -8);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(GridSpec::cube(1, 1.0, 24).is_err());
        assert!(GridSpec::cube(1, 1.0, 8).is_err());
    }

    #[test]
    fn lanes_visit_every_axis() {
        let samples = [4, 3, 2];
        let mut data: Vec<f64> = (0..24).map(|v| v as f64).collect();
        for_each_lane(&mut data, &samples, 1, |lane| lane.reverse());
        // element (0, 0, 1) swaps with (0, 2, 1)
        assert_eq!(data[1], 5.0);
        assert_eq!(data[5], 1.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(v), 2.0);
    }
}
