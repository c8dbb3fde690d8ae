//! Dilation geometry and dyadic cube trees.

use aniso_hardy::cubes::DyadicCubeTree;
use aniso_hardy::dilation::{comparison_violations, norm_comparisons};
use aniso_hardy::GridSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{gauge, label};
use crate::report::{num, nums, SuiteReport, Table};
use crate::{ExperimentConfig, Result};

const SAMPLES: usize = 10_000;
/// Fitting sample of the norm comparisons; the check runs on a fresh one.
const FIT_SAMPLES: usize = 100_000;

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let s = 10f64.powf(rng.gen_range(-3.0..3.0));
    (0..n).map(|_| rng.gen_range(-1.0..1.0) * s).collect()
}

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("geometry");
    rep.criterion(1, "dilation geometry axioms", |c, tables| {
        let mut t = Table::new("axioms", &["dilation", "b", "sigma", "r", "zeta_minus", "zeta_plus", "volume_error", "containment", "homogeneity", "quasi_triangle", "comparisons"]);
        for (i, d) in cfg.geometry_dilations.iter().enumerate() {
            let g = gauge(d)?;
            let n = g.dim();
            let s = seed.wrapping_add(i as u64 * 1000);
            let containment = g.certify_containment(SAMPLES, s);
            let vol = (g.ball_volume(0) - 1.0).abs();
            let mut rng = ChaCha8Rng::seed_from_u64(s + 1);
            let a = g.dilation().matrix().clone();
            let b = g.b();
            let mut homog = 0;
            for _ in 0..SAMPLES {
                let x = random_point(&mut rng, n);
                let ax: Vec<f64> = (&a * nalgebra_vec(&x)).iter().cloned().collect();
                // exact on the level; b^{k+1} and b·b^k may differ in the last bits
                let (qa, qx) = (g.step_quasi_norm(&ax), g.step_quasi_norm(&x));
                if qa.level != qx.level.map(|l| l + 1) || (qa.value - b * qx.value).abs() > 4.0 * f64::EPSILON * qa.value {
                    homog += 1;
                }
            }
            let h = g.quasi_triangle_constant();
            let mut tri = 0;
            for _ in 0..SAMPLES {
                let x = random_point(&mut rng, n);
                let y = random_point(&mut rng, n);
                let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
                if g.rho(&xy) > h * (g.rho(&x) + g.rho(&y)) {
                    tri += 1;
                }
            }
            let fit = norm_comparisons(&g, FIT_SAMPLES, s + 2)?;
            let cmp = comparison_violations(&g, &fit.constants, SAMPLES, s + 3);
            let name = label(d);
            c.put(&format!("{name}.fitted_constants"), nums(&fit.constants));
            c.put(&format!("{name}.unbounded"), json!(fit.unbounded));
            c.check(&format!("{name}.volume"), vol < 1e-9);
            c.check(&format!("{name}.containment"), containment == 0);
            c.check(&format!("{name}.homogeneity"), homog == 0);
            c.check(&format!("{name}.quasi_triangle"), tri == 0);
            c.check(&format!("{name}.comparisons"), cmp == 0 && !fit.unbounded);
            t.push(vec![
                json!(name),
                num(b),
                json!(g.sigma()),
                num(g.growth_r()),
                num(g.dilation().zeta_minus()),
                num(g.dilation().zeta_plus()),
                num(vol),
                json!(containment),
                json!(homog),
                json!(tri),
                json!(cmp),
            ]);
        }
        tables.push(t);
        Ok(())
    })?;

    rep.criterion(2, "dyadic cube axioms on interior levels", |c, tables| {
        let mut t = Table::new("cubes", &["dilation", "samples", "level", "interior", "partition", "nested", "required_u", "min_cells", "max_cells"]);
        for d in &cfg.geometry_dilations {
            let g = gauge(d)?;
            let (half, samples) = if g.dim() == 1 { (16.0, 1024) } else { (8.0, 256) };
            let fs = GridSpec::cube(g.dim(), half, samples)?;
            let lv = DyadicCubeTree::auto_levels(&g, &fs, -1);
            let tree = DyadicCubeTree::build(&g, &fs, lv)?;
            let name = label(d);
            for ch in tree.checks() {
                t.push(vec![json!(name), json!(samples), json!(ch.level), json!(ch.interior), json!(ch.partition), json!(ch.nested), json!(ch.required_u), json!(ch.min_cells), json!(ch.max_cells)]);
            }
            let exact = tree.checks().iter().all(|ch| ch.partition && ch.nested);
            c.put(&format!("{name}.u"), json!(tree.u()));
            c.put(&format!("{name}.v"), json!(tree.v()));
            c.put(&format!("{name}.levels"), json!([tree.coarsest(), tree.finest()]));
            c.check(&format!("{name}.partition_nesting"), exact);
            c.check(&format!("{name}.interior"), tree.interior_ok());
        }
        tables.push(t);
        Ok(())
    })?;
    Ok(rep)
}

fn nalgebra_vec(x: &[f64]) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_column_slice(x)
}
