//! Christ-type dyadic cubes on a factor grid, product rectangles with their
//! shadows, open-set expansion, maximal rectangles and Journé-type sums.
//!
//! Cubes come from nested greedy ρ-nets built coarse to fine. Each cell is
//! attached to its nearest finest-level net point, each net point to its
//! nearest net point one level up, and a cube is the set of cells whose
//! chain of attachments passes through its net point. Nearness is compared
//! by (ρ-level, gauge value, signed offset) of the offset between the two
//! points, so ties resolve the same way everywhere on the torus.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balls::{BallFamily, BallWindow};
use crate::dilation::EllipsoidGauge;
use crate::error::{Error, Result};
use crate::grid::{neumaier_sum, GridSpec};
use crate::maximal::strong_maximal;

/// Largest u accepted for v = −1 before retrying with v = −2.
pub const MAX_U: i32 = 4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cube {
    pub level: i32,
    /// Index within its level.
    pub id: usize,
    /// Flat index (factor grid) of the centre x_Q.
    pub center: usize,
    /// Flat index of the net point that generated the cube.
    pub net_point: usize,
    /// Index of the parent cube one level up.
    pub parent: Option<usize>,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CubeLevel {
    pub level: i32,
    pub cubes: Vec<Cube>,
    /// Cube index of every cell.
    pub labels: Vec<usize>,
    /// Some cube spans half the torus or more on an axis.
    pub wraps: bool,
}

/// One line of the cube-tree dump.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CubeRecord {
    pub level: i32,
    pub id: usize,
    pub center: Vec<f64>,
    pub parent: Option<usize>,
    pub u: i32,
    pub v: i32,
}

/// Per-level outcome of the axiom checks.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LevelCheck {
    pub level: i32,
    pub interior: bool,
    pub partition: bool,
    pub nested: bool,
    /// Smallest u for which x_Q + B_{vℓ−u} ⊆ Q ⊆ x + B_{vℓ+u} at this level.
    pub required_u: i32,
    pub min_cells: usize,
    pub max_cells: usize,
}

#[derive(Debug, Clone)]
pub struct DyadicCubeTree {
    gauge: EllipsoidGauge,
    spec: GridSpec,
    /// Coarse to fine.
    levels: Vec<CubeLevel>,
    u: i32,
    v: i32,
    checks: Vec<LevelCheck>,
}

/// Offset comparison key: (ρ-level, gauge value, offset).
#[derive(Debug, Clone, PartialEq)]
struct NearKey {
    level: i32,
    quad: f64,
    offset: Vec<i64>,
}

impl NearKey {
    fn new(gauge: &EllipsoidGauge, fspec: &GridSpec, d: &[i64]) -> Self {
        let x: Vec<f64> = d.iter().enumerate().map(|(a, v)| *v as f64 * fspec.spacing(a)).collect();
        let level = gauge.step_quasi_norm(&x).level.unwrap_or(i32::MIN);
        Self { level, quad: gauge.quad(&x), offset: d.to_vec() }
    }
    /// Smaller is nearer; among equal gauges the lexicographically larger
    /// offset (target − source) wins.
    fn cmp(&self, other: &Self) -> Ordering {
        self.level
            .cmp(&other.level)
            .then(self.quad.partial_cmp(&other.quad).unwrap_or(Ordering::Equal))
            .then(other.offset.cmp(&self.offset))
    }
}

/// Flat-index translation on the torus.
struct FlatShift {
    samples: Vec<i64>,
    strides: Vec<i64>,
}

impl FlatShift {
    fn new(fspec: &GridSpec) -> Self {
        Self {
            samples: fspec.samples().iter().map(|v| *v as i64).collect(),
            strides: fspec.strides().iter().map(|v| *v as i64).collect(),
        }
    }
    #[inline]
    fn apply(&self, flat: usize, d: &[i64]) -> usize {
        let mut f = 0i64;
        for a in 0..self.samples.len() {
            let i = (flat as i64 / self.strides[a]) % self.samples[a];
            f += (i + d[a]).rem_euclid(self.samples[a]) * self.strides[a];
        }
        f as usize
    }
}

/// Signed offset reduced to the min-image range [−n/2, n/2).
fn reduce(fspec: &GridSpec, axis: usize, d: i64) -> i64 {
    let n = fspec.samples()[axis] as i64;
    let r = d.rem_euclid(n);
    if r >= n / 2 {
        r - n
    } else {
        r
    }
}

fn min_image_offset(fspec: &GridSpec, from: usize, to: usize) -> Vec<i64> {
    let a = fspec.multi_index(from);
    let b = fspec.multi_index(to);
    (0..fspec.axes()).map(|ax| fspec.min_image(ax, a[ax], b[ax])).collect()
}

impl DyadicCubeTree {
    /// Builds levels `levels` (coarse → fine) with v = −1, retrying with
    /// v = −2 if the required u exceeds [`MAX_U`].
    pub fn build(gauge: &EllipsoidGauge, fspec: &GridSpec, levels: std::ops::RangeInclusive<i32>) -> Result<Self> {
        let t = Self::build_with_v(gauge, fspec, levels.clone(), -1)?;
        if t.u <= MAX_U {
            return Ok(t);
        }
        let lo = *levels.start();
        let hi = *levels.end();
        Self::build_with_v(gauge, fspec, lo..=hi, -2)
    }

    /// Level range from the last level whose ball B_{vℓ} covers the torus
    /// down to the finest level whose balls still hold at least 8 cells.
    pub fn auto_levels(gauge: &EllipsoidGauge, fspec: &GridSpec, v: i32) -> std::ops::RangeInclusive<i32> {
        let mut lo = 0;
        while !covers_torus(gauge, fspec, v * lo) {
            lo -= 1;
        }
        while covers_torus(gauge, fspec, v * (lo + 1)) {
            lo += 1;
        }
        let mut hi = lo;
        while BallWindow::new(gauge, fspec, v * (hi + 1)).count >= 8 {
            hi += 1;
        }
        lo..=hi
    }

    pub fn build_with_v(gauge: &EllipsoidGauge, fspec: &GridSpec, levels: std::ops::RangeInclusive<i32>, v: i32) -> Result<Self> {
        if fspec.factors() != 1 || fspec.axes() != gauge.dim() {
            return Err(Error::SpecMismatch);
        }
        let lo = *levels.start();
        let hi = *levels.end();
        if lo > hi {
            return Err(Error::InvalidArgument("empty level range".into()));
        }
        let n = fspec.len();
        let shift = FlatShift::new(fspec);
        // nets, coarse to fine; each contains the previous one
        let mut nets: Vec<Vec<usize>> = Vec::new();
        let mut is_net = vec![false; n];
        let mut net_list: Vec<usize> = Vec::new();
        let mut windows = Vec::new();
        for l in lo..=hi {
            let offsets = BallWindow::new(gauge, fspec, v * l).offsets();
            let mut covered = vec![false; n];
            let cover = |p: usize, covered: &mut Vec<bool>| {
                for o in &offsets {
                    covered[shift.apply(p, o)] = true;
                }
            };
            for &p in &net_list {
                cover(p, &mut covered);
            }
            for x in 0..n {
                if !covered[x] && !is_net[x] {
                    is_net[x] = true;
                    net_list.push(x);
                    cover(x, &mut covered);
                }
            }
            nets.push(net_list.clone());
            windows.push(offsets);
        }
        // attach sources to the nearest target within the window; the key of
        // an offset only depends on the offset, so rank the window once
        let attach = |targets: &[usize], wanted: &[bool], offsets: &[Vec<i64>]| -> Result<Vec<usize>> {
            let keys: Vec<NearKey> = offsets
                .iter()
                .map(|o| {
                    let d: Vec<i64> = o.iter().enumerate().map(|(a, v)| reduce(fspec, a, -v)).collect();
                    NearKey::new(gauge, fspec, &d)
                })
                .collect();
            let mut order: Vec<usize> = (0..offsets.len()).collect();
            order.sort_by(|i, j| keys[*i].cmp(&keys[*j]));
            let mut rank = vec![0u32; offsets.len()];
            for (r, i) in order.iter().enumerate() {
                rank[*i] = r as u32;
            }
            let mut best_rank = vec![u32::MAX; n];
            let mut best = vec![usize::MAX; n];
            for &p in targets {
                for (oi, o) in offsets.iter().enumerate() {
                    let x = shift.apply(p, o);
                    if wanted[x] && rank[oi] < best_rank[x] {
                        best_rank[x] = rank[oi];
                        best[x] = p;
                    }
                }
            }
            if let Some(x) = (0..n).find(|x| wanted[*x] && best[*x] == usize::MAX) {
                return Err(Error::ConstructionFailed(format!("cell {x} has no net point within its ball")));
            }
            Ok(best)
        };
        let depth = nets.len();
        // owners[l][x] = net point of level l owning cell x
        let mut owners: Vec<Vec<usize>> = vec![Vec::new(); depth];
        owners[depth - 1] = attach(&nets[depth - 1], &vec![true; n], &windows[depth - 1])?;
        for l in (0..depth - 1).rev() {
            let mut wanted = vec![false; n];
            for p in &nets[l + 1] {
                wanted[*p] = true;
            }
            let mut up = attach(&nets[l], &wanted, &windows[l])?;
            // a coarse net point always owns itself
            for p in &nets[l] {
                up[*p] = *p;
            }
            owners[l] = owners[l + 1].iter().map(|p| up[*p]).collect();
        }
        let mut cube_levels = Vec::with_capacity(depth);
        for (li, l) in (lo..=hi).enumerate() {
            let mut index_of = vec![usize::MAX; n];
            let mut cubes: Vec<Cube> = Vec::new();
            for &p in &nets[li] {
                index_of[p] = cubes.len();
                cubes.push(Cube { level: l, id: cubes.len(), center: p, net_point: p, parent: None, cells: Vec::new() });
            }
            let mut labels = vec![0usize; n];
            for x in 0..n {
                let c = index_of[owners[li][x]];
                labels[x] = c;
                cubes[c].cells.push(x);
            }
            cubes.retain(|c| !c.cells.is_empty());
            let mut remap = vec![usize::MAX; nets[li].len()];
            for (i, c) in cubes.iter_mut().enumerate() {
                remap[c.id] = i;
                c.id = i;
            }
            for lab in labels.iter_mut() {
                *lab = remap[*lab];
            }
            let wraps = cubes.iter().any(|c| {
                let ext = cube_extent(fspec, c);
                ext.iter().zip(fspec.samples()).any(|(e, s)| 2 * *e >= *s as i64)
            });
            cube_levels.push(CubeLevel { level: l, cubes, labels, wraps });
        }
        for li in 1..depth {
            let (coarse, fine) = cube_levels.split_at_mut(li);
            let coarse = &coarse[li - 1];
            for c in fine[0].cubes.iter_mut() {
                c.parent = Some(coarse.labels[c.cells[0]]);
            }
        }
        let min_cells = cube_levels[depth - 1].cubes.iter().map(|c| c.cells.len()).min().unwrap_or(0);
        if min_cells < 4 {
            return Err(Error::ResolutionTooCoarse(format!(
                "finest level {hi} has a cube with {min_cells} cells"
            )));
        }
        if covers_torus(gauge, fspec, v * (lo + 1)) {
            return Err(Error::ResolutionTooCoarse(format!(
                "level {} is coarser than the whole domain",
                lo
            )));
        }
        let mut tree = Self { gauge: gauge.clone(), spec: fspec.clone(), levels: cube_levels, u: 1, v, checks: Vec::new() };
        tree.choose_centers();
        tree.checks = tree.run_checks();
        tree.u = tree
            .checks
            .iter()
            .filter(|c| c.interior)
            .map(|c| c.required_u)
            .max()
            .unwrap_or(1)
            .max(1);
        Ok(tree)
    }

    /// Auto levels extended towards finer cubes for as long as the build
    /// succeeds (at most `extra` levels).
    pub fn build_finest(gauge: &EllipsoidGauge, fspec: &GridSpec, extra: i32) -> Result<Self> {
        let auto = Self::auto_levels(gauge, fspec, -1);
        let mut tree = Self::build(gauge, fspec, auto.clone())?;
        for hi in (*auto.end() + 1)..=(*auto.end() + extra) {
            match Self::build(gauge, fspec, *auto.start()..=hi) {
                Ok(t) => tree = t,
                Err(_) => break,
            }
        }
        Ok(tree)
    }

    /// The level ℓ with vℓ + u + σ ≤ t < v(ℓ−1) + u + σ.
    pub fn level_for_scale(&self, t: i32) -> i32 {
        let s = self.gauge.sigma() as i32;
        let x = t - self.u - s;
        // v < 0: ℓ = ceil(x / v) gives vℓ ≤ x
        let l = (x as f64 / self.v as f64).ceil() as i32;
        debug_assert!(self.v * l <= x && x < self.v * (l - 1));
        l
    }

    /// Scales t whose level lies in the tree.
    pub fn scale_range(&self) -> (i32, i32) {
        let s = self.gauge.sigma() as i32;
        // t ∈ [vℓ+u+σ, v(ℓ−1)+u+σ) over ℓ ∈ [coarsest, finest]
        (self.v * self.finest() + self.u + s, self.v * (self.coarsest() - 1) + self.u + s - 1)
    }

    pub fn gauge(&self) -> &EllipsoidGauge {
        &self.gauge
    }
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn u(&self) -> i32 {
        self.u
    }
    pub fn v(&self) -> i32 {
        self.v
    }
    pub fn levels(&self) -> &[CubeLevel] {
        &self.levels
    }
    pub fn checks(&self) -> &[LevelCheck] {
        &self.checks
    }
    pub fn coarsest(&self) -> i32 {
        self.levels[0].level
    }
    pub fn finest(&self) -> i32 {
        self.levels[self.levels.len() - 1].level
    }
    pub fn level(&self, l: i32) -> Option<&CubeLevel> {
        let i = l - self.coarsest();
        if i < 0 {
            return None;
        }
        self.levels.get(i as usize)
    }
    pub fn cube(&self, l: i32, id: usize) -> &Cube {
        &self.level(l).expect("level in tree").cubes[id]
    }

    /// Index of the ancestor at level `target` (≤ l) of cube `id` at level l.
    pub fn ancestor(&self, l: i32, id: usize, target: i32) -> usize {
        let c = self.cube(l, id);
        self.level(target).expect("level in tree").labels[c.cells[0]]
    }

    /// Cube measure.
    pub fn measure(&self, l: i32, id: usize) -> f64 {
        self.cube(l, id).cells.len() as f64 * self.spec.cell_volume()
    }

    /// Whether every interior level satisfies all four axioms with the
    /// recorded (u, v).
    pub fn interior_ok(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| c.interior)
            .all(|c| c.partition && c.nested && c.required_u <= self.u)
    }

    /// JSON dump records.
    pub fn records(&self) -> Vec<CubeRecord> {
        let mut out = Vec::new();
        for lvl in &self.levels {
            for c in &lvl.cubes {
                out.push(CubeRecord {
                    level: lvl.level,
                    id: c.id,
                    center: self.spec.point(&self.spec.multi_index(c.center)),
                    parent: c.parent,
                    u: self.u,
                    v: self.v,
                });
            }
        }
        out
    }

    /// Every nonzero min-image offset with its level, sorted by level.
    fn sorted_offsets(&self) -> (Vec<(i32, Vec<i64>)>, i32) {
        let spec = &self.spec;
        let mut out: Vec<(i32, Vec<i64>)> = (0..spec.len())
            .into_par_iter()
            .filter_map(|i| {
                let idx = spec.multi_index(i);
                let d: Vec<i64> = idx.iter().enumerate().map(|(a, j)| reduce(spec, a, *j as i64)).collect();
                if d.iter().all(|v| *v == 0) {
                    return None;
                }
                Some((crate::balls::offset_level(&self.gauge, spec, &d).unwrap(), d))
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let cap = out.last().map(|v| v.0 + 1).unwrap_or(0);
        (out, cap)
    }

    /// Largest j with every cell at min-image offset in B_j inside the cube;
    /// `cap` when the cube is the whole torus.
    fn inner_level(&self, x: usize, labels: &[usize], label: usize, sorted: &[(i32, Vec<i64>)], cap: i32) -> i32 {
        let shift = FlatShift::new(&self.spec);
        for (lev, d) in sorted {
            if labels[shift.apply(x, d)] != label {
                return *lev;
            }
        }
        cap
    }

    /// Picks x_Q as the member with the largest inner ball, found by eroding
    /// the level's label map with balls of decreasing size. Ties go to the net
    /// point, then to the member nearest to it.
    fn choose_centers(&mut self) {
        let spec = self.spec.clone();
        let (finest_j, fit_j) = crate::balls::resolvable_levels(&self.gauge, &spec);
        for li in 0..self.levels.len() {
            let lvl = &self.levels[li];
            let labels: Vec<f64> = lvl.labels.iter().map(|v| *v as f64).collect();
            let neg: Vec<f64> = labels.iter().map(|v| -v).collect();
            let mut center: Vec<Option<usize>> = vec![None; lvl.cubes.len()];
            let mut j = (self.v * lvl.level + 1).min(fit_j + 1);
            loop {
                let w = BallWindow::new(&self.gauge, &spec, j);
                let last = w.count == 1 || j <= finest_j;
                let hi = crate::balls::window_max(&labels, &spec, 0, &w);
                let lo = crate::balls::window_max(&neg, &spec, 0, &w);
                let picks: Vec<Option<usize>> = lvl
                    .cubes
                    .par_iter()
                    .map(|c| {
                        if center[c.id].is_some() {
                            return None;
                        }
                        let id = c.id as f64;
                        let mut best: Option<(bool, NearKey, usize)> = None;
                        for &x in &c.cells {
                            if !last && (hi[x] != id || -lo[x] != id) {
                                continue;
                            }
                            let d = min_image_offset(&spec, c.net_point, x);
                            let cand = (x != c.net_point, NearKey::new(&self.gauge, &spec, &d), x);
                            let better = match &best {
                                None => true,
                                Some(b) => cand.0.cmp(&b.0).then(cand.1.cmp(&b.1)) == Ordering::Less,
                            };
                            if better {
                                best = Some(cand);
                            }
                        }
                        best.map(|b| b.2)
                    })
                    .collect();
                for (c, p) in center.iter_mut().zip(picks) {
                    if p.is_some() {
                        *c = p;
                    }
                }
                if last || center.iter().all(|c| c.is_some()) {
                    break;
                }
                j -= 1;
            }
            for (c, x) in self.levels[li].cubes.iter_mut().zip(center) {
                c.center = x.unwrap_or(c.net_point);
            }
        }
    }

    fn run_checks(&self) -> Vec<LevelCheck> {
        let n = self.spec.len();
        let depth = self.levels.len();
        let (sorted, cap) = self.sorted_offsets();
        (0..depth)
            .map(|li| {
                let lvl = &self.levels[li];
                let l = lvl.level;
                let total: usize = lvl.cubes.iter().map(|c| c.cells.len()).sum();
                let mut seen = vec![false; n];
                let mut partition = total == n;
                for c in &lvl.cubes {
                    for &x in &c.cells {
                        if seen[x] || lvl.labels[x] != c.id {
                            partition = false;
                        }
                        seen[x] = true;
                    }
                }
                let nested = if li == 0 {
                    true
                } else {
                    let up = &self.levels[li - 1];
                    lvl.cubes.iter().all(|c| {
                        let p = up.labels[c.cells[0]];
                        c.parent == Some(p) && c.cells.iter().all(|x| up.labels[*x] == p)
                    })
                };
                let required_u = lvl
                    .cubes
                    .par_iter()
                    .map(|c| {
                        let jin = self.inner_level(c.center, &lvl.labels, c.id, &sorted, cap);
                        let jout = self.outer_level(c);
                        (self.v * l - jin).max(jout - self.v * l)
                    })
                    .max()
                    .unwrap_or(1);
                let interior = li > 0 && li + 1 < depth && !lvl.wraps;
                LevelCheck {
                    level: l,
                    interior,
                    partition,
                    nested,
                    required_u,
                    min_cells: lvl.cubes.iter().map(|c| c.cells.len()).min().unwrap_or(0),
                    max_cells: lvl.cubes.iter().map(|c| c.cells.len()).max().unwrap_or(0),
                }
            })
            .collect()
    }

    /// Smallest j with Q − Q ⊆ B_j, i.e. Q ⊆ x + B_j for every x ∈ Q.
    fn outer_level(&self, c: &Cube) -> i32 {
        let pts: Vec<Vec<i64>> = c.cells.iter().map(|x| min_image_offset(&self.spec, c.net_point, *x)).collect();
        let pts = extreme_points(pts);
        let mut worst = i32::MIN;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                let d: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                if let Some(lv) = crate::balls::offset_level(&self.gauge, &self.spec, &d) {
                    worst = worst.max(lv);
                }
            }
        }
        if worst == i32::MIN {
            // single cell: any ball around x holds it
            self.v * c.level - 1
        } else {
            worst + 1
        }
    }

    /// Cell mask of x_Q + B_j on the torus.
    pub fn ball_mask(&self, center: usize, j: i32) -> Vec<bool> {
        let mut mask = vec![false; self.spec.len()];
        let shift = FlatShift::new(&self.spec);
        for o in BallWindow::new(&self.gauge, &self.spec, j).offsets() {
            mask[shift.apply(center, &o)] = true;
        }
        mask
    }
}

/// Every min-image offset lies in B_j (checked on the corners of the box).
fn covers_torus(gauge: &EllipsoidGauge, fspec: &GridSpec, j: i32) -> bool {
    let d = fspec.axes();
    (0..1usize << d).all(|mask| {
        let x: Vec<f64> = (0..d)
            .map(|a| if mask >> a & 1 == 1 { 1.0 } else { -1.0 } * fspec.box_half_widths()[a])
            .collect();
        gauge.in_ball(j, &x)
    })
}

/// Points whose convex hull equals that of `pts` (exact in 1-D and 2-D).
fn extreme_points(mut pts: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    if pts.is_empty() {
        return pts;
    }
    match pts[0].len() {
        1 => {
            let lo = pts.iter().min().unwrap().clone();
            let hi = pts.iter().max().unwrap().clone();
            vec![lo, hi]
        }
        2 => {
            pts.sort();
            pts.dedup();
            if pts.len() < 3 {
                return pts;
            }
            let cross = |o: &Vec<i64>, a: &Vec<i64>, b: &Vec<i64>| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
            let mut lower: Vec<Vec<i64>> = Vec::new();
            for p in &pts {
                while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0 {
                    lower.pop();
                }
                lower.push(p.clone());
            }
            let mut upper: Vec<Vec<i64>> = Vec::new();
            for p in pts.iter().rev() {
                while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0 {
                    upper.pop();
                }
                upper.push(p.clone());
            }
            lower.pop();
            upper.pop();
            lower.extend(upper);
            lower
        }
        _ => pts,
    }
}

fn cube_extent(fspec: &GridSpec, c: &Cube) -> Vec<i64> {
    let d = fspec.axes();
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for x in &c.cells {
        let o = min_image_offset(fspec, c.net_point, *x);
        for a in 0..d {
            lo[a] = lo[a].min(o[a]);
            hi[a] = hi[a].max(o[a]);
        }
    }
    (0..d).map(|a| hi[a] - lo[a] + 1).collect()
}

/// A product of two cubes (level, index) on the trees of a product grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicRectangle {
    pub level1: i32,
    pub id1: usize,
    pub level2: i32,
    pub id2: usize,
}

/// The two factor trees of a product grid.
#[derive(Debug, Clone)]
pub struct ProductTrees {
    pub spec: GridSpec,
    pub trees: [DyadicCubeTree; 2],
}

impl ProductTrees {
    pub fn new(spec: &GridSpec, t1: DyadicCubeTree, t2: DyadicCubeTree) -> Result<Self> {
        if spec.factors() != 2 || &spec.factor_spec(0) != t1.spec() || &spec.factor_spec(1) != t2.spec() {
            return Err(Error::SpecMismatch);
        }
        Ok(Self { spec: spec.clone(), trees: [t1, t2] })
    }

    pub fn n1(&self) -> usize {
        self.trees[0].spec().len()
    }
    pub fn n2(&self) -> usize {
        self.trees[1].spec().len()
    }

    pub fn cells(&self, r: &DyadicRectangle) -> (&[usize], &[usize]) {
        (&self.trees[0].cube(r.level1, r.id1).cells, &self.trees[1].cube(r.level2, r.id2).cells)
    }

    /// Flat product-grid indices of R.
    pub fn flat_cells(&self, r: &DyadicRectangle) -> Vec<usize> {
        let (c1, c2) = self.cells(r);
        let n2 = self.n2();
        let mut out = Vec::with_capacity(c1.len() * c2.len());
        for a in c1 {
            for b in c2 {
                out.push(a * n2 + b);
            }
        }
        out
    }

    pub fn measure(&self, r: &DyadicRectangle) -> f64 {
        self.trees[0].measure(r.level1, r.id1) * self.trees[1].measure(r.level2, r.id2)
    }

    /// Every rectangle with both factors at the given levels.
    pub fn rectangles_at(&self, l1: i32, l2: i32) -> Vec<DyadicRectangle> {
        let a = self.trees[0].level(l1).map(|l| l.cubes.len()).unwrap_or(0);
        let b = self.trees[1].level(l2).map(|l| l.cubes.len()).unwrap_or(0);
        let mut out = Vec::with_capacity(a * b);
        for i in 0..a {
            for j in 0..b {
                out.push(DyadicRectangle { level1: l1, id1: i, level2: l2, id2: j });
            }
        }
        out
    }

    /// Factor masks of the shadow x_{R_i} + B_{v_i(ℓ_i−1)+u_i+extra·σ_i}.
    pub fn shadow(&self, r: &DyadicRectangle, extra_sigma: i32) -> [Vec<bool>; 2] {
        let f = |t: &DyadicCubeTree, l: i32, id: usize| {
            let j = t.v() * (l - 1) + t.u() + extra_sigma * t.gauge().sigma() as i32;
            t.ball_mask(t.cube(l, id).center, j)
        };
        [f(&self.trees[0], r.level1, r.id1), f(&self.trees[1], r.level2, r.id2)]
    }

    /// R′ (two σ paddings).
    pub fn shadow_prime(&self, r: &DyadicRectangle) -> [Vec<bool>; 2] {
        self.shadow(r, 2)
    }

    /// R″ (three σ paddings).
    pub fn shadow_double_prime(&self, r: &DyadicRectangle) -> [Vec<bool>; 2] {
        self.shadow(r, 3)
    }

    /// Scale windows [v_iℓ_i+u_i+σ_i, v_i(ℓ_i−1)+u_i+σ_i) of R₊.
    pub fn plus_windows(&self, r: &DyadicRectangle) -> [std::ops::Range<i32>; 2] {
        let f = |t: &DyadicCubeTree, l: i32| {
            let s = t.gauge().sigma() as i32;
            (t.v() * l + t.u() + s)..(t.v() * (l - 1) + t.u() + s)
        };
        [f(&self.trees[0], r.level1), f(&self.trees[1], r.level2)]
    }

    /// The cube level whose R₊ window holds scale t on factor `i`.
    pub fn level_for_scale(&self, i: usize, t: i32) -> i32 {
        self.trees[i].level_for_scale(t)
    }
}

/// A cell set on a product grid (row-major, factor 2 fastest).
pub type CellSet = Vec<bool>;

/// c₀: the least integer above 2 with b₁^{−c₀u₁}b₂^{−c₀u₂} ≤ b₁^{−2u₁}b₂^{−2u₂}/2.
pub fn default_c0(trees: &ProductTrees) -> i32 {
    let (b1, u1) = (trees.trees[0].gauge().b(), trees.trees[0].u() as f64);
    let (b2, u2) = (trees.trees[1].gauge().b(), trees.trees[1].u() as f64);
    let target = b1.powf(-2.0 * u1) * b2.powf(-2.0 * u2) / 2.0;
    let mut c0 = 3;
    while b1.powf(-(c0 as f64) * u1) * b2.powf(-(c0 as f64) * u2) > target {
        c0 += 1;
    }
    c0
}

/// Ω̃ = {M_s(χ_Ω) > b₁^{−c₀u₁}b₂^{−c₀u₂}}.
pub fn expand_open_set(omega: &[bool], trees: &ProductTrees, families: [&BallFamily; 2], c0: i32) -> CellSet {
    if !omega.iter().any(|v| *v) {
        return vec![false; omega.len()];
    }
    let chi: Vec<f64> = omega.iter().map(|v| if *v { 1.0 } else { 0.0 }).collect();
    let ms = strong_maximal(&chi, &trees.spec, &families);
    let (b1, u1) = (trees.trees[0].gauge().b(), trees.trees[0].u() as f64);
    let (b2, u2) = (trees.trees[1].gauge().b(), trees.trees[1].u() as f64);
    let thr = b1.powf(-(c0 as f64) * u1) * b2.powf(-(c0 as f64) * u2);
    ms.iter().zip(omega).map(|(m, o)| *o || *m > thr).collect()
}

/// Which maximality notion to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaximalMode {
    All,
    Dir1,
    Dir2,
}

/// Column containment data for one factor-1 cube: for each factor-2 cell
/// the number of factor-1 members in Ω.
fn column_counts(omega: &[bool], trees: &ProductTrees, l1: i32, id1: usize) -> Vec<u32> {
    let n2 = trees.n2();
    let mut cnt = vec![0u32; n2];
    for &x1 in &trees.trees[0].cube(l1, id1).cells {
        let row = &omega[x1 * n2..(x1 + 1) * n2];
        for (c, o) in cnt.iter_mut().zip(row) {
            *c += *o as u32;
        }
    }
    cnt
}

/// Per (level1, id1): the column counts; Q₁×{x₂} ⊆ Ω iff count = |Q₁|.
pub struct ColumnTable {
    table: HashMap<(i32, usize), Vec<u32>>,
}

impl ColumnTable {
    pub fn new(omega: &[bool], trees: &ProductTrees) -> Self {
        let keys: Vec<(i32, usize)> = trees.trees[0]
            .levels()
            .iter()
            .flat_map(|l| (0..l.cubes.len()).map(move |i| (l.level, i)))
            .collect();
        let table = keys.par_iter().map(|&(l, i)| ((l, i), column_counts(omega, trees, l, i))).collect();
        Self { table }
    }

    pub fn counts(&self, l1: i32, id1: usize) -> &[u32] {
        &self.table[&(l1, id1)]
    }

    pub fn contains(&self, trees: &ProductTrees, r: &DyadicRectangle) -> bool {
        let full = trees.trees[0].cube(r.level1, r.id1).cells.len() as u32;
        let cnt = self.counts(r.level1, r.id1);
        trees.trees[1].cube(r.level2, r.id2).cells.iter().all(|x2| cnt[*x2] == full)
    }

    /// |(Q₁ × S) ∩ Ω| in cells for a factor-2 cell list S.
    pub fn overlap(&self, l1: i32, id1: usize, cells2: &[usize]) -> u64 {
        let cnt = self.counts(l1, id1);
        cells2.iter().map(|x| cnt[*x] as u64).sum()
    }
}

/// Maximal dyadic rectangles contained in Ω (over all tree levels).
pub fn maximal_rectangles(omega: &[bool], trees: &ProductTrees, mode: MaximalMode) -> Vec<DyadicRectangle> {
    let cols = ColumnTable::new(omega, trees);
    maximal_rectangles_with(&cols, trees, mode)
}

pub fn maximal_rectangles_with(cols: &ColumnTable, trees: &ProductTrees, mode: MaximalMode) -> Vec<DyadicRectangle> {
    let t1 = &trees.trees[0];
    let t2 = &trees.trees[1];
    let mut pairs = Vec::new();
    for a in t1.levels() {
        for b in t2.levels() {
            pairs.push((a.level, b.level));
        }
    }
    let mut out: Vec<DyadicRectangle> = pairs
        .par_iter()
        .flat_map_iter(|&(l1, l2)| {
            trees
                .rectangles_at(l1, l2)
                .into_iter()
                .filter(|r| cols.contains(trees, r))
                .filter(|r| {
                    let up1 = l1 > t1.coarsest() && {
                        let p = DyadicRectangle { level1: l1 - 1, id1: t1.cube(l1, r.id1).parent.unwrap(), ..*r };
                        cols.contains(trees, &p)
                    };
                    let up2 = l2 > t2.coarsest() && {
                        let p = DyadicRectangle { level2: l2 - 1, id2: t2.cube(l2, r.id2).parent.unwrap(), ..*r };
                        cols.contains(trees, &p)
                    };
                    match mode {
                        MaximalMode::All => !up1 && !up2,
                        MaximalMode::Dir1 => !up1,
                        MaximalMode::Dir2 => !up2,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    out.sort();
    out
}

/// Increasing penalty h in the Journé sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HFunction {
    /// h(t) = t^delta.
    Power { delta: f64 },
}

impl HFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            HFunction::Power { delta } => t.powf(*delta),
        }
    }

    /// Checks Σ_j j·h(C₀δ₀^j) < ∞ through the settling of partial sums.
    pub fn series_test(&self, c0: f64, delta0: f64) -> Result<f64> {
        let partial = |upto: usize| neumaier_sum((0..=upto).map(|j| j as f64 * self.eval(c0 * delta0.powi(j as i32))));
        let s1 = partial(200);
        let s2 = partial(400);
        if !s2.is_finite() || (s2 - s1).abs() > 1e-9 * s2.abs().max(1e-300) {
            return Err(Error::DivergentH(format!("partial sums {s1} (200 terms) and {s2} (400 terms)")));
        }
        Ok(s2)
    }
}

/// Journé sums over m₁(Ω) and m₂(Ω).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JourneReport {
    pub sum_dir1: f64,
    pub sum_dir2: f64,
    pub w_omega: f64,
    pub ratio_dir1: f64,
    pub ratio_dir2: f64,
    pub rectangles_dir1: usize,
    pub rectangles_dir2: usize,
}

/// Default η₀ = b₁^{v₁−5σ₁} b₂^{v₂−5σ₂}.
pub fn default_eta0(trees: &ProductTrees) -> f64 {
    let f = |t: &DyadicCubeTree| t.gauge().b().powi(t.v() - 5 * t.gauge().sigma() as i32);
    f(&trees.trees[0]) * f(&trees.trees[1])
}

/// w(R) for a density on the product grid.
pub fn weight_of(weight: &[f64], cells: &[usize], cell_volume: f64) -> f64 {
    neumaier_sum(cells.iter().map(|c| weight[*c])) * cell_volume
}

pub fn journe_sum(omega: &[bool], weight: &[f64], trees: &ProductTrees, h: HFunction, eta0: f64) -> Result<JourneReport> {
    let t1 = &trees.trees[0];
    let t2 = &trees.trees[1];
    let c0 = (t1.gauge().b().powi(2 * t1.u() - 1)).max(t2.gauge().b().powi(2 * t2.u() - 1));
    let delta0 = t1.gauge().b().powi(t1.v()).max(t2.gauge().b().powi(t2.v()));
    h.series_test(c0, delta0)?;
    let cv = trees.spec.cell_volume();
    let omega_cells: Vec<usize> = (0..omega.len()).filter(|i| omega[*i]).collect();
    let w_omega = weight_of(weight, &omega_cells, cv);
    let cols = ColumnTable::new(omega, trees);
    // rows: for factor-2 cubes, counts over factor-1 cells
    let transposed: Vec<bool> = {
        let (n1, n2) = (trees.n1(), trees.n2());
        let mut t = vec![false; omega.len()];
        for a in 0..n1 {
            for b in 0..n2 {
                t[b * n1 + a] = omega[a * n2 + b];
            }
        }
        t
    };
    let tspec = GridSpec::product(&trees.spec.factor_spec(1), &trees.spec.factor_spec(0))?;
    let swapped = ProductTrees { spec: tspec, trees: [t2.clone(), t1.clone()] };
    let rows = ColumnTable::new(&transposed, &swapped);

    let term = |r: &DyadicRectangle, dir: usize| -> f64 {
        // dir 1: enlarge factor 2 with R₁ fixed; dir 2: enlarge factor 1
        let (fixed_tree, grow_tree, table, fl, fid, gl, gid) = if dir == 1 {
            (t1, t2, &cols, r.level1, r.id1, r.level2, r.id2)
        } else {
            (t2, t1, &rows, r.level2, r.id2, r.level1, r.id1)
        };
        let fixed_n = fixed_tree.cube(fl, fid).cells.len() as f64;
        let mut hat = (gl, gid);
        let mut l = gl;
        let mut id = gid;
        loop {
            let cells = &grow_tree.cube(l, id).cells;
            let overlap = table.overlap(fl, fid, cells) as f64;
            if overlap > eta0 * fixed_n * cells.len() as f64 {
                hat = (l, id);
            }
            if l == grow_tree.coarsest() {
                break;
            }
            id = grow_tree.cube(l, id).parent.unwrap();
            l -= 1;
        }
        let ratio = grow_tree.cube(gl, gid).cells.len() as f64 / grow_tree.cube(hat.0, hat.1).cells.len() as f64;
        weight_of(weight, &trees.flat_cells(r), cv) * h.eval(ratio)
    };
    let m1 = maximal_rectangles_with(&cols, trees, MaximalMode::Dir1);
    let m2 = maximal_rectangles_with(&cols, trees, MaximalMode::Dir2);
    let s1: Vec<f64> = m1.par_iter().map(|r| term(r, 1)).collect();
    let s2: Vec<f64> = m2.par_iter().map(|r| term(r, 2)).collect();
    let sum_dir1 = neumaier_sum(s1);
    let sum_dir2 = neumaier_sum(s2);
    let ratio = |s: f64| if w_omega > 0.0 { s / w_omega } else { 0.0 };
    Ok(JourneReport {
        sum_dir1,
        sum_dir2,
        w_omega,
        ratio_dir1: ratio(sum_dir1),
        ratio_dir2: ratio(sum_dir2),
        rectangles_dir1: m1.len(),
        rectangles_dir2: m2.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::ExpansiveDilation;

    fn dyadic_tree(samples: usize, half: f64) -> DyadicCubeTree {
        let g = EllipsoidGauge::build(&ExpansiveDilation::scalar(2.0).unwrap()).unwrap();
        let fs = GridSpec::cube(1, half, samples).unwrap();
        let lv = DyadicCubeTree::auto_levels(&g, &fs, -1);
        DyadicCubeTree::build(&g, &fs, lv).unwrap()
    }

    #[test]
    fn one_dimensional_cubes_are_dyadic_intervals() {
        let t = dyadic_tree(64, 1.0); // δ = 1/32
        assert_eq!(t.v(), -1);
        assert!(t.u() <= 2);
        assert!(t.interior_ok());
        for lvl in t.levels() {
            let size = lvl.cubes[0].cells.len();
            assert!(lvl.cubes.iter().all(|c| c.cells.len() == size));
            // cube length 2^{-ℓ-1} in cells of 1/32
            assert_eq!(size as f64, (2f64).powi(-lvl.level - 1) * 32.0);
            for c in &lvl.cubes {
                let mut cells = c.cells.clone();
                cells.sort();
                let contiguous = cells.windows(2).filter(|w| w[1] != w[0] + 1).count();
                assert!(contiguous <= 1, "cube wraps at most once");
            }
        }
    }

    #[test]
    fn two_dimensional_tree_satisfies_axioms() {
        let g = EllipsoidGauge::build(&ExpansiveDilation::diagonal(&[2.0, 4.0]).unwrap()).unwrap();
        let fs = GridSpec::cube(2, 4.0, 32).unwrap();
        let lv = DyadicCubeTree::auto_levels(&g, &fs, -1);
        let t = DyadicCubeTree::build(&g, &fs, lv).unwrap();
        assert!(t.checks().iter().all(|c| c.partition && c.nested));
        assert!(t.interior_ok());
    }

    #[test]
    fn single_rectangle_is_its_own_maximal_set() {
        let t = dyadic_tree(64, 1.0);
        let spec = GridSpec::product_1d(1.0, 64, 1.0, 64).unwrap();
        let trees = ProductTrees::new(&spec, t.clone(), t).unwrap();
        let l = trees.trees[0].finest() - 1;
        assert!(trees.trees[0].level(l).unwrap().cubes.len() >= 3);
        let r = DyadicRectangle { level1: l, id1: 1, level2: l, id2: 2 };
        let mut omega = vec![false; spec.len()];
        for c in trees.flat_cells(&r) {
            omega[c] = true;
        }
        assert_eq!(maximal_rectangles(&omega, &trees, MaximalMode::All), vec![r]);
        let rep = journe_sum(&omega, &vec![1.0; spec.len()], &trees, HFunction::Power { delta: 1.0 }, default_eta0(&trees)).unwrap();
        assert!(rep.ratio_dir1 <= 1.0 + 1e-12);
    }

    #[test]
    fn constant_h_diverges() {
        let h = HFunction::Power { delta: 0.0 };
        assert!(matches!(h.series_test(2.0, 0.5), Err(Error::DivergentH(_))));
        assert!(HFunction::Power { delta: 0.5 }.series_test(2.0, 0.5).is_ok());
    }
}
