//! Journé covering sums over seeded open sets.

use aniso_hardy::cubes::{default_eta0, journe_sum, DyadicCubeTree, HFunction, ProductTrees};
use aniso_hardy::GridSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::decompose::{gauges, product_weight};
use crate::report::{num, SuiteReport, Table};
use crate::{ExperimentConfig, Result};

const SAMPLES: usize = 128;
const HALF_WIDTH: f64 = 8.0;
const SETS: usize = 50;
const DELTAS: [f64; 3] = [0.5, 1.0, 2.0];

/// A union of 1 to 6 random grid rectangles.
fn open_set(rng: &mut ChaCha8Rng, n: [usize; 2]) -> Vec<bool> {
    let mut omega = vec![false; n[0] * n[1]];
    for _ in 0..rng.gen_range(1..=6) {
        let len = [rng.gen_range(2..=n[0] / 3), rng.gen_range(2..=n[1] / 3)];
        let start = [rng.gen_range(0..n[0] - len[0]), rng.gen_range(0..n[1] - len[1])];
        for a in start[0]..start[0] + len[0] {
            for b in start[1]..start[1] + len[1] {
                omega[a * n[1] + b] = true;
            }
        }
    }
    omega
}

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("journe");
    rep.criterion(9, "Journé covering sums", |c, tables| {
        let g = gauges(cfg)?;
        let spec = GridSpec::product_1d(HALF_WIDTH, SAMPLES, HALF_WIDTH, SAMPLES)?;
        let tree = |i: usize| {
            let fs = spec.factor_spec(i);
            DyadicCubeTree::build(&g[i], &fs, DyadicCubeTree::auto_levels(&g[i], &fs, -1))
        };
        let trees = ProductTrees::new(&spec, tree(0)?, tree(1)?)?;
        let eta0 = default_eta0(&trees);
        c.put("eta0", num(eta0));
        let mut t = Table::new("journe", &["weight", "set", "delta", "w_omega", "rectangles_dir1", "rectangles_dir2", "ratio_dir1", "ratio_dir2"]);
        for (wi, desc) in cfg.weights.iter().enumerate() {
            let w = product_weight(desc, [&g[0], &g[1]], &spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut max = [0.0f64; 3];
            let mut monotone = true;
            for set in 0..SETS {
                let omega = open_set(&mut rng, [SAMPLES, SAMPLES]);
                let mut prev = f64::INFINITY;
                for (di, delta) in DELTAS.iter().enumerate() {
                    let r = journe_sum(&omega, w.density(), &trees, HFunction::Power { delta: *delta }, eta0)?;
                    let ratio = r.ratio_dir1.max(r.ratio_dir2);
                    monotone &= ratio <= prev * (1.0 + 1e-12);
                    prev = ratio;
                    max[di] = max[di].max(ratio);
                    t.push(vec![json!(wi), json!(set), num(*delta), num(r.w_omega), json!(r.rectangles_dir1), json!(r.rectangles_dir2), num(r.ratio_dir1), num(r.ratio_dir2)]);
                }
            }
            for (di, delta) in DELTAS.iter().enumerate() {
                c.put(&format!("w{wi}.delta{delta}.max_ratio"), num(max[di]));
                c.check(&format!("w{wi}.delta{delta}.bounded"), max[di].is_finite());
            }
            c.check(&format!("w{wi}.monotone_in_delta"), monotone);
        }
        tables.push(t);
        Ok(())
    })?;
    Ok(rep)
}
