//! Discrete dilated balls B_k on a factor grid and the window sums, means
//! and sliding maxima built from them.
//!
//! A ball is stored as line segments along the factor's last axis, one per
//! offset of the leading axes. Sums use compensated prefix sums along lanes
//! and maxima use the van Herk block algorithm, so every window operation is
//! linear in the grid size times the number of segments.

use rayon::prelude::*;

use crate::dilation::EllipsoidGauge;
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// The cells of B_k as offsets from a centre cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BallWindow {
    pub level: i32,
    /// Number of cells.
    pub count: usize,
    /// `(lead offsets, lo, hi)`: cells `lead × [lo, hi]` on the last axis.
    pub rows: Vec<(Vec<i64>, i64, i64)>,
    /// Largest |offset| per factor axis.
    pub extent: Vec<i64>,
}

impl BallWindow {
    /// Cells d with (d·δ) ∈ B_k, for the factor grid `fspec`. Offsets are
    /// taken in the min-image range [−n/2, n/2), so a ball larger than the
    /// torus lists each cell once.
    pub fn new(gauge: &EllipsoidGauge, fspec: &GridSpec, level: i32) -> Self {
        let d = gauge.dim();
        debug_assert_eq!(fspec.axes(), d);
        let pk = gauge.form_matrix(level);
        let inv = pk.try_inverse().expect("ball form is positive definite");
        let c = gauge.radius();
        let half: Vec<i64> = (0..d)
            .map(|a| ((c * inv[(a, a)]).sqrt() / fspec.spacing(a)).floor() as i64 + 1)
            .collect();
        let lo_b: Vec<i64> = (0..d).map(|a| (-half[a]).max(-(fspec.samples()[a] as i64) / 2)).collect();
        let hi_b: Vec<i64> = (0..d).map(|a| half[a].min(fspec.samples()[a] as i64 / 2 - 1)).collect();
        let spacing: Vec<f64> = (0..d).map(|a| fspec.spacing(a)).collect();
        let mut rows = Vec::new();
        let mut count = 0usize;
        let mut extent = vec![0i64; d];
        let mut lead = vec![0i64; d.saturating_sub(1)];
        for (a, l) in lead.iter_mut().enumerate() {
            *l = lo_b[a];
        }
        let mut x = vec![0.0; d];
        loop {
            for a in 0..d - 1 {
                x[a] = lead[a] as f64 * spacing[a];
            }
            let mut lo = None;
            let mut hi = None;
            for t in lo_b[d - 1]..=hi_b[d - 1] {
                x[d - 1] = t as f64 * spacing[d - 1];
                if gauge.in_ball(level, &x) {
                    if lo.is_none() {
                        lo = Some(t);
                    }
                    hi = Some(t);
                }
            }
            if let (Some(lo), Some(hi)) = (lo, hi) {
                count += (hi - lo + 1) as usize;
                for a in 0..d - 1 {
                    extent[a] = extent[a].max(lead[a].abs());
                }
                extent[d - 1] = extent[d - 1].max(lo.abs()).max(hi.abs());
                rows.push((lead.clone(), lo, hi));
            }
            // odometer over the leading axes
            let mut a = d - 1;
            loop {
                if a == 0 {
                    return Self { level, count, rows, extent };
                }
                a -= 1;
                lead[a] += 1;
                if lead[a] <= hi_b[a] {
                    break;
                }
                lead[a] = lo_b[a];
            }
        }
    }

    /// Whether the window fits on the torus without overlapping itself.
    pub fn fits(&self, fspec: &GridSpec) -> bool {
        self.extent.iter().zip(fspec.samples()).all(|(e, n)| 2 * e + 1 <= *n as i64)
    }

    /// Every offset in the window.
    pub fn offsets(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.count);
        for (lead, lo, hi) in &self.rows {
            for t in *lo..=*hi {
                let mut o = lead.clone();
                o.push(t);
                out.push(o);
            }
        }
        out
    }

    /// Volume of the discrete ball.
    pub fn measure(&self, fspec: &GridSpec) -> f64 {
        self.count as f64 * fspec.cell_volume()
    }
}

/// Consecutive ball windows on one factor.
#[derive(Debug, Clone)]
pub struct BallFamily {
    pub factor: usize,
    pub windows: Vec<BallWindow>,
}

impl BallFamily {
    /// Levels `levels` on factor `factor` of `spec`; every window must fit.
    pub fn new(gauge: &EllipsoidGauge, spec: &GridSpec, factor: usize, levels: std::ops::RangeInclusive<i32>) -> Result<Self> {
        let fspec = spec.factor_spec(factor);
        if fspec.axes() != gauge.dim() {
            return Err(Error::SpecMismatch);
        }
        let mut windows = Vec::new();
        for k in levels {
            let w = BallWindow::new(gauge, &fspec, k);
            if !w.fits(&fspec) {
                return Err(Error::UnresolvableScale { k, reason: "ball wraps around the torus".into() });
            }
            windows.push(w);
        }
        Ok(Self { factor, windows })
    }

    /// From the coarsest single-cell level up to the coarsest level that
    /// still fits on the torus.
    pub fn resolvable(gauge: &EllipsoidGauge, spec: &GridSpec, factor: usize) -> Result<Self> {
        let (lo, hi) = resolvable_levels(gauge, &spec.factor_spec(factor));
        Self::new(gauge, spec, factor, lo..=hi)
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> + '_ {
        self.windows.iter().map(|w| w.level)
    }

    pub fn window(&self, level: i32) -> Option<&BallWindow> {
        self.windows.iter().find(|w| w.level == level)
    }
}

/// `(finest, coarsest)`: the last level whose ball is the centre cell alone
/// and the last level whose ball fits on the torus.
pub fn resolvable_levels(gauge: &EllipsoidGauge, fspec: &GridSpec) -> (i32, i32) {
    let mut k = 0;
    while BallWindow::new(gauge, fspec, k).count > 1 {
        k -= 1;
    }
    while BallWindow::new(gauge, fspec, k + 1).count == 1 {
        k += 1;
    }
    let finest = k;
    let mut hi = finest;
    while BallWindow::new(gauge, fspec, hi + 1).fits(fspec) {
        hi += 1;
    }
    (finest, hi)
}

struct LaneLayout {
    n: usize,
    stride: usize,
    lanes: usize,
}

impl LaneLayout {
    fn new(spec: &GridSpec, axis: usize) -> Self {
        let n = spec.samples()[axis];
        let stride = spec.strides()[axis];
        Self { n, stride, lanes: spec.len() / n }
    }
    #[inline]
    fn lane(&self, flat: usize) -> usize {
        flat / (self.n * self.stride) * self.stride + flat % self.stride
    }
    #[inline]
    fn pos(&self, flat: usize) -> usize {
        (flat / self.stride) % self.n
    }
    #[inline]
    fn flat(&self, lane: usize, pos: usize) -> usize {
        (lane / self.stride) * self.n * self.stride + pos * self.stride + lane % self.stride
    }
}

/// Index shift on the leading factor axes.
struct LeadShifter {
    samples: Vec<i64>,
    strides: Vec<i64>,
}

impl LeadShifter {
    fn new(spec: &GridSpec, factor: usize) -> Self {
        let o = spec.factor_offset(factor);
        let d = spec.dims()[factor];
        let axes: Vec<usize> = (o..o + d - 1).collect();
        let strides = spec.strides();
        Self {
            samples: axes.iter().map(|a| spec.samples()[*a] as i64).collect(),
            strides: axes.iter().map(|a| strides[*a] as i64).collect(),
        }
    }
    #[inline]
    fn shift(&self, flat: usize, lead: &[i64]) -> usize {
        let mut f = flat as i64;
        for (j, p) in lead.iter().enumerate() {
            if *p == 0 {
                continue;
            }
            let i = (f / self.strides[j]) % self.samples[j];
            let ni = (i + p).rem_euclid(self.samples[j]);
            f += (ni - i) * self.strides[j];
        }
        f as usize
    }
}

/// Σ over `x + window` for every x; the window lives on factor `factor`.
pub fn window_sum(data: &[f64], spec: &GridSpec, factor: usize, window: &BallWindow) -> Vec<f64> {
    let last = spec.factor_offset(factor) + spec.dims()[factor] - 1;
    let lay = LaneLayout::new(spec, last);
    let n = lay.n;
    // doubled compensated prefix sums per lane: (hi, lo)
    let mut pre = vec![(0.0f64, 0.0f64); lay.lanes * (2 * n + 1)];
    pre.par_chunks_mut(2 * n + 1).enumerate().for_each(|(lane, p)| {
        let (mut s, mut c) = (0.0f64, 0.0f64);
        p[0] = (0.0, 0.0);
        for j in 0..2 * n {
            let v = data[lay.flat(lane, j % n)];
            let t = s + v;
            c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
            s = t;
            p[j + 1] = (s, c);
        }
    });
    let shifter = LeadShifter::new(spec, factor);
    (0..data.len())
        .into_par_iter()
        .map(|flat| {
            let pos = lay.pos(flat) as i64;
            let mut hi_sum = 0.0;
            let mut lo_sum = 0.0;
            for (lead, lo, hi) in &window.rows {
                let lane = lay.lane(shifter.shift(flat, lead));
                let start = (pos + lo).rem_euclid(n as i64) as usize;
                let len = (hi - lo + 1) as usize;
                let base = lane * (2 * n + 1);
                let (a, ca) = pre[base + start];
                let (b, cb) = pre[base + start + len];
                hi_sum += b - a;
                lo_sum += cb - ca;
            }
            hi_sum + lo_sum
        })
        .collect()
}

/// Window mean with the discrete ball measure.
pub fn window_mean(data: &[f64], spec: &GridSpec, factor: usize, window: &BallWindow) -> Vec<f64> {
    let inv = 1.0 / window.count as f64;
    let mut s = window_sum(data, spec, factor, window);
    s.par_iter_mut().for_each(|v| *v *= inv);
    s
}

/// max over `x + window` for every x.
pub fn window_max(data: &[f64], spec: &GridSpec, factor: usize, window: &BallWindow) -> Vec<f64> {
    let last = spec.factor_offset(factor) + spec.dims()[factor] - 1;
    let lay = LaneLayout::new(spec, last);
    let n = lay.n;
    let mut widths: Vec<usize> = window.rows.iter().map(|(_, lo, hi)| (hi - lo + 1) as usize).collect();
    widths.sort_unstable();
    widths.dedup();
    // forward[w][lane*n + i] = max data[lane, i .. i+w-1] (circular)
    let forward: Vec<Vec<f64>> = widths
        .iter()
        .map(|&w| {
            let mut out = vec![0.0; lay.lanes * n];
            out.par_chunks_mut(n).enumerate().for_each(|(lane, o)| {
                let ext: Vec<f64> = (0..n + w - 1).map(|j| data[lay.flat(lane, j % n)]).collect();
                sliding_max(&ext, w, o);
            });
            out
        })
        .collect();
    let shifter = LeadShifter::new(spec, factor);
    let row_w: Vec<usize> = window
        .rows
        .iter()
        .map(|(_, lo, hi)| widths.binary_search(&((hi - lo + 1) as usize)).unwrap())
        .collect();
    (0..data.len())
        .into_par_iter()
        .map(|flat| {
            let pos = lay.pos(flat) as i64;
            let mut m = f64::NEG_INFINITY;
            for ((lead, lo, _), wi) in window.rows.iter().zip(&row_w) {
                let lane = lay.lane(shifter.shift(flat, lead));
                let start = (pos + lo).rem_euclid(n as i64) as usize;
                m = m.max(forward[*wi][lane * n + start]);
            }
            m
        })
        .collect()
}

/// van Herk / Gil–Werman: out[i] = max(ext[i..i+w]) for i < out.len().
fn sliding_max(ext: &[f64], w: usize, out: &mut [f64]) {
    let len = ext.len();
    let mut g = vec![0.0; len];
    let mut h = vec![0.0; len];
    for i in 0..len {
        g[i] = if i % w == 0 { ext[i] } else { g[i - 1].max(ext[i]) };
    }
    for i in (0..len).rev() {
        h[i] = if i % w == w - 1 || i == len - 1 { ext[i] } else { h[i + 1].max(ext[i]) };
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = h[i].max(g[i + w - 1]);
    }
}

/// Means over product windows `x + W₁ × … ` (one window per listed factor).
pub fn product_mean(data: &[f64], spec: &GridSpec, windows: &[(usize, &BallWindow)]) -> Vec<f64> {
    let mut cur = data.to_vec();
    for (f, w) in windows {
        cur = window_mean(&cur, spec, *f, w);
    }
    cur
}

/// Maxima over product windows.
pub fn product_max(data: &[f64], spec: &GridSpec, windows: &[(usize, &BallWindow)]) -> Vec<f64> {
    let mut cur = data.to_vec();
    for (f, w) in windows {
        cur = window_max(&cur, spec, *f, w);
    }
    cur
}

/// Level k of the cell offset `d` (in cells), i.e. d·δ ∈ B_{k+1} \ B_k.
pub fn offset_level(gauge: &EllipsoidGauge, fspec: &GridSpec, d: &[i64]) -> Option<i32> {
    let x: Vec<f64> = d.iter().enumerate().map(|(a, v)| *v as f64 * fspec.spacing(a)).collect();
    gauge.step_quasi_norm(&x).level
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::ExpansiveDilation;

    fn gauge1() -> EllipsoidGauge {
        EllipsoidGauge::build(&ExpansiveDilation::scalar(2.0).unwrap()).unwrap()
    }

    #[test]
    fn dyadic_ball_cells() {
        let g = gauge1();
        let spec = GridSpec::cube(1, 8.0, 128).unwrap(); // δ = 1/8
        // B_0 = (-1/2, 1/2): offsets with |d|/8 < 1/2 → |d| ≤ 3
        let w = BallWindow::new(&g, &spec, 0);
        assert_eq!(w.rows, vec![(vec![], -3, 3)]);
        assert_eq!(w.count, 7);
        let (lo, hi) = resolvable_levels(&g, &spec);
        assert_eq!(lo, -2); // B_{-2} = (-1/8, 1/8) holds the centre only
        assert_eq!(hi, 4); // B_4 spans 127 cells, B_5 would wrap
    }

    #[test]
    fn sums_and_maxima_match_brute_force() {
        let g = EllipsoidGauge::build(&ExpansiveDilation::diagonal(&[2.0, 4.0]).unwrap()).unwrap();
        let spec = GridSpec::new(vec![2], vec![4.0, 4.0], vec![32, 16]).unwrap();
        let data: Vec<f64> = (0..spec.len()).map(|i| ((i * 7919) % 101) as f64 - 50.0).collect();
        let w = BallWindow::new(&g, &spec, 0);
        assert!(w.fits(&spec));
        let s = window_sum(&data, &spec, 0, &w);
        let m = window_max(&data, &spec, 0, &w);
        for flat in [0usize, 17, 200, 511] {
            let idx = spec.multi_index(flat);
            let mut bs = 0.0;
            let mut bm = f64::NEG_INFINITY;
            for o in w.offsets() {
                let j = [spec.wrap(0, idx[0] as i64 + o[0]), spec.wrap(1, idx[1] as i64 + o[1])];
                let v = data[spec.flat_index(&j)];
                bs += v;
                bm = bm.max(v);
            }
            assert!((bs - s[flat]).abs() < 1e-9);
            assert_eq!(bm, m[flat]);
        }
    }

    #[test]
    fn product_windows_act_per_factor() {
        let g = gauge1();
        let spec = GridSpec::product_1d(2.0, 16, 2.0, 32).unwrap();
        let w1 = BallWindow::new(&g, &spec.factor_spec(0), 0);
        let w2 = BallWindow::new(&g, &spec.factor_spec(1), 1);
        let ones = vec![1.0; spec.len()];
        let m = product_mean(&ones, &spec, &[(0, &w1), (1, &w2)]);
        assert!(m.iter().all(|v| *v == 1.0));
        let mut spike = vec![0.0; spec.len()];
        spike[0] = 1.0;
        let mx = product_max(&spike, &spec, &[(0, &w1), (1, &w2)]);
        let nonzero = mx.iter().filter(|v| **v > 0.0).count();
        assert_eq!(nonzero, w1.count * w2.count);
    }
}
