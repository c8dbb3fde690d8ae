//! Atomic decomposition, key estimate, decay envelopes and truncation.

use aniso_hardy::atoms::{
    atomic_decompose, decay_envelope_check, finite_truncate, gaussian_derivative, hardy_norm, key_estimate_check, product_decay_envelope, validate_atom, AdmissibleTriplet, AtomicDecomposition, HardySystem,
};
use aniso_hardy::cubes::DyadicRectangle;
use aniso_hardy::weights::{Weight, WeightDescriptor};
use aniso_hardy::{EllipsoidGauge, Field, GridSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::within_median;
use crate::report::{num, nums, SuiteReport, Table};
use crate::{CliError, ExperimentConfig, Result};

/// Everything a decomposition run needs, built from the config.
pub struct Setup {
    pub system: HardySystem,
    pub triplet: AdmissibleTriplet,
}

pub fn gauges(cfg: &ExperimentConfig) -> Result<[EllipsoidGauge; 2]> {
    Ok([EllipsoidGauge::build(&cfg.dilations[0].build()?)?, EllipsoidGauge::build(&cfg.dilations[1].build()?)?])
}

pub fn product_weight(desc: &WeightDescriptor, gauges: [&EllipsoidGauge; 2], spec: &GridSpec) -> Result<Weight> {
    Ok(match desc {
        WeightDescriptor::Constant => Weight::constant(spec),
        WeightDescriptor::ProductPower { alphas } => Weight::product_power(gauges, spec, *alphas)?,
        other => return Err(CliError::ConfigInvalid { pointer: "/weights/0".into(), message: format!("unsupported weight {other:?}") }),
    })
}

pub fn triplet(cfg: &ExperimentConfig, g: &[EllipsoidGauge; 2]) -> Result<AdmissibleTriplet> {
    let t = &cfg.triplet;
    let zeta = [g[0].dilation().zeta_minus(), g[1].dilation().zeta_minus()];
    Ok(AdmissibleTriplet::new(t.p, t.q, t.moments(), t.q_w, zeta)?)
}

pub fn setup(cfg: &ExperimentConfig, samples: [usize; 2], levels: Option<[(i32, i32); 2]>) -> Result<Setup> {
    let g = gauges(cfg)?;
    let spec = GridSpec::product_1d(cfg.grid.half_widths[0], samples[0], cfg.grid.half_widths[1], samples[1])?;
    let w = product_weight(cfg.weights.first().unwrap_or(&WeightDescriptor::Constant), [&g[0], &g[1]], &spec)?;
    let tri = triplet(cfg, &g)?;
    let system = HardySystem::build_with_levels([&g[0], &g[1]], &spec, w, tri.frame_order(), cfg.frame.profile.build()?, levels)?;
    Ok(Setup { system, triplet: tri })
}

/// Parameters of a localized input: centre, frequency and width per axis.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub centre: [f64; 2],
    pub freq: [f64; 2],
    pub width: f64,
}

impl Bump {
    pub fn random(rng: &mut ChaCha8Rng, half: [f64; 2]) -> Self {
        Self {
            centre: [rng.gen_range(-0.4..0.4) * half[0], rng.gen_range(-0.4..0.4) * half[1]],
            freq: [rng.gen_range(2.0..4.0), rng.gen_range(2.0..4.0)],
            width: rng.gen_range(0.7..1.3),
        }
    }

    /// The bump sampled on `system`'s grid and projected onto the band the
    /// frame reproduces.
    pub fn field(&self, system: &HardySystem) -> Field {
        let raw = Field::from_fn(&system.spec, |x| {
            let r2 = ((x[0] - self.centre[0]).powi(2) + (x[1] - self.centre[1]).powi(2)) / (self.width * self.width);
            Complex64::new((-r2).exp() * (self.freq[0] * x[0] + self.freq[1] * x[1]).cos(), 0.0)
        });
        let mask: Vec<f64> = system.covered_mask().iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
        raw.spectrum().mul_real(&mask).to_field().real_part()
    }
}

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("decompose");
    let inputs = cfg.inputs.unwrap_or(5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<Bump> = (0..inputs).map(|_| Bump::random(&mut rng, cfg.grid.half_widths)).collect();
    let mut kept: Vec<(Field, AtomicDecomposition)> = Vec::new();
    let st = setup(cfg, cfg.grid.samples, None)?;
    let (sys, tri) = (&st.system, &st.triplet);

    rep.criterion(7, "atomic decomposition end to end", |c, tables| {
        let mut t = Table::new("decomposition", &["input", "atoms", "k_range", "reconstruction", "all_valid", "worst_size_margin", "worst_particle_margin", "wrapped_slices", "coefficient_ratio", "fold_constant"]);
        c.put("triplet", json!({"p": tri.p, "q": tri.q, "s": tri.s, "q_w": tri.q_w}));
        c.put("frame_levels", json!([sys.frame.pairs[0].levels(), sys.frame.pairs[1].levels()]));
        let mut ratios = Vec::new();
        for (i, b) in bumps.iter().enumerate() {
            let f = b.field(sys);
            let d = atomic_decompose(&f, sys, tri)?;
            let err = d.reconstruct().sub(&f)?.l2_norm() / f.l2_norm();
            let reports: Vec<_> = d.atoms.iter().map(|a| validate_atom(a, tri, &sys.weight, &sys.trees)).collect();
            let valid = reports.iter().all(|r| r.passed());
            let size = reports.iter().map(|r| r.size_margin).fold(0.0, f64::max);
            let part = reports.iter().map(|r| r.particle_margin).fold(0.0, f64::max);
            let wrapped: usize = reports.iter().map(|r| r.wrapped_slices).sum();
            let ks = [d.atoms.iter().map(|a| a.k).min().unwrap_or(0), d.atoms.iter().map(|a| a.k).max().unwrap_or(0)];
            let ratio = d.coefficient_ratio();
            ratios.push(ratio);
            c.check(&format!("input{i}.atoms_valid"), valid && !d.atoms.is_empty());
            c.check(&format!("input{i}.reconstruction"), err < 1e-6);
            t.push(vec![json!(i), json!(d.atoms.len()), json!(ks), num(err), json!(valid), num(size), num(part), json!(wrapped), num(ratio), num(d.fold_constant())]);
            if kept.len() < 3 {
                kept.push((f, d));
            }
        }
        let (stable, med) = within_median(&ratios, 0.5);
        c.put("coefficient_ratio.max", num(ratios.iter().cloned().fold(0.0, f64::max)));
        c.put("coefficient_ratio.median", num(med));
        c.check("coefficient_ratio.stable", stable);
        tables.push(t);
        Ok(())
    })?;

    rep.criterion(8, "key pointwise estimate under refinement", |c, tables| {
        let coarse_n = [cfg.grid.samples[0] / 2, cfg.grid.samples[1] / 2];
        let coarse = setup(cfg, coarse_n, None)?.system;
        let levels = [coarse.frame.pairs[0].levels(), coarse.frame.pairs[1].levels()];
        let fine = setup(cfg, cfg.grid.samples, Some(levels))?.system;
        let mut t = Table::new("key_estimate", &["family", "rectangles", "coarse_sup", "fine_sup", "relative_change"]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for fam in 0..3 {
            let b = bumps[fam % bumps.len()];
            let rects = rectangle_family(&coarse, &b, &mut rng, 8);
            let fine_rects: Vec<DyadicRectangle> = rects.iter().map(|r| refine(&coarse, &fine, r)).collect();
            let qc = key_estimate_check(&coarse, &b.field(&coarse), &rects)?.quotient_sup;
            let qf = key_estimate_check(&fine, &b.field(&fine), &fine_rects)?.quotient_sup;
            let change = (qf - qc).abs() / qc;
            c.check(&format!("family{fam}.finite"), qc.is_finite() && qf.is_finite() && qc > 0.0);
            c.check(&format!("family{fam}.stable"), change <= 0.3);
            t.push(vec![json!(fam), json!(rects.len()), num(qc), num(qf), num(change)]);
        }
        tables.push(t);
        Ok(())
    })?;

    rep.criterion(10, "decay envelopes", |c, tables| {
        let g = gauges(cfg)?;
        let fs = GridSpec::cube(1, 32.0, 65536)?;
        let f = Field::from_fn_centered(&fs, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0));
        let ks: Vec<i32> = (-5..=3).collect();
        let mut t = Table::new("envelopes", &["s", "fine_slope", "predicted", "relative_error", "coarse_slope", "fitted_c"]);
        for s in 0..2u32 {
            let psi = gaussian_derivative(s);
            let env = decay_envelope_check(&f, &psi, s, 1.0, &g[0], &ks)?;
            let rel = (env.fine_slope / env.predicted_fine_slope - 1.0).abs();
            c.put(&format!("s{s}.sups"), nums(&env.sups));
            c.check(&format!("s{s}.fine_slope"), rel <= 0.1);
            t.push(vec![json!(s), num(env.fine_slope), num(env.predicted_fine_slope), num(rel), num(env.coarse_slope), num(env.fitted_c)]);
        }
        let spec = GridSpec::product_1d(16.0, 512, 16.0, 512)?;
        let sep = Field::from_fn(&spec, |x| Complex64::new((-(x[0] * x[0]) / 2.0).exp() * (-(x[1] * x[1]) / 3.0).exp(), 0.0));
        let (p0, p1) = (gaussian_derivative(0), gaussian_derivative(1));
        let env = product_decay_envelope(&sep, [&p0, &p1], [0, 1], [&g[0], &g[1]], &[-2, -1, 0, 1, 2])?;
        c.put("product.quadrant_c", json!(env.quadrant_c.iter().map(|r| nums(r)).collect::<Vec<_>>()));
        c.check("product.envelopes", env.worst_ratio <= 1.0 + 1e-12 && env.quadrant_c.iter().flatten().all(|v| v.is_finite()));
        tables.push(t);
        Ok(())
    })?;

    rep.criterion(11, "finite truncation", |c, tables| {
        let mut t = Table::new("truncation", &["input", "sweep", "n", "l", "retained_layers", "residual_hardy", "relative"]);
        for (i, (f, d)) in kept.iter().enumerate() {
            let total = hardy_norm(f, sys, d.p)?;
            let nmax = d.layers.iter().map(|l| l.k.abs()).max().unwrap_or(0);
            let lmax = d.layers.iter().map(|l| l.levels.0.abs().max(l.levels.1.abs())).max().unwrap_or(0);
            let mut mono = true;
            let mut last = (f64::INFINITY, f64::INFINITY);
            for n in 0..=nmax {
                let (_, r) = finite_truncate(d, sys, f, n, lmax, tri.q)?;
                mono &= r.residual_hardy <= last.0 * (1.0 + 1e-12);
                last.0 = r.residual_hardy;
                t.push(vec![json!(i), json!("n"), json!(n), json!(lmax), json!(r.retained_layers), num(r.residual_hardy), num(r.residual_hardy / total)]);
            }
            for l in 0..=lmax {
                let (_, r) = finite_truncate(d, sys, f, nmax, l, tri.q)?;
                mono &= r.residual_hardy <= last.1 * (1.0 + 1e-12);
                last.1 = r.residual_hardy;
                t.push(vec![json!(i), json!("l"), json!(nmax), json!(l), json!(r.retained_layers), num(r.residual_hardy), num(r.residual_hardy / total)]);
            }
            c.check(&format!("input{i}.monotone"), mono);
            c.check(&format!("input{i}.final"), last.1 / total < 1e-3);
        }
        tables.push(t);
        Ok(())
    })?;
    Ok(rep)
}

/// `count` rectangles at the levels holding the finest frame scales, the
/// first containing the bump centre and the rest drawn near it.
fn rectangle_family(sys: &HardySystem, b: &Bump, rng: &mut ChaCha8Rng, count: usize) -> Vec<DyadicRectangle> {
    let t = &sys.trees;
    let (lo1, hi1) = sys.frame.pairs[0].levels();
    let (lo2, hi2) = sys.frame.pairs[1].levels();
    let mut out: Vec<DyadicRectangle> = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < 1000 {
        tries += 1;
        let l1 = t.level_for_scale(0, rng.gen_range(lo1..=hi1));
        let l2 = t.level_for_scale(1, rng.gen_range(lo2..=hi2));
        let jitter = if out.is_empty() { 0.0 } else { 1.5 };
        let x = [b.centre[0] + rng.gen_range(-jitter..=jitter), b.centre[1] + rng.gen_range(-jitter..=jitter)];
        let id1 = cube_at(sys, 0, l1, x[0]);
        let id2 = cube_at(sys, 1, l2, x[1]);
        let r = DyadicRectangle { level1: l1, id1, level2: l2, id2 };
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

fn cube_at(sys: &HardySystem, factor: usize, level: i32, x: f64) -> usize {
    let tree = &sys.trees.trees[factor];
    let fs = tree.spec();
    let n = fs.samples()[0] as i64;
    let cell = ((x / fs.spacing(0)).round() as i64 + n / 2).rem_euclid(n) as usize;
    tree.level(level).expect("frame level has a tree level").labels[cell]
}

/// The cube of `fine` at the same level that holds the centre of `r`'s cubes.
fn refine(coarse: &HardySystem, fine: &HardySystem, r: &DyadicRectangle) -> DyadicRectangle {
    let point = |f: usize, l: i32, id: usize| {
        let tree = &coarse.trees.trees[f];
        let fs = tree.spec();
        let c = tree.cube(l, id).center as i64;
        (c - fs.samples()[0] as i64 / 2) as f64 * fs.spacing(0)
    };
    DyadicRectangle {
        level1: r.level1,
        id1: cube_at(fine, 0, r.level1, point(0, r.level1, r.id1)),
        level2: r.level2,
        id2: cube_at(fine, 1, r.level2, point(1, r.level2, r.id2)),
    }
}
