//! Partition of unity, discrete Calderón pairs and reconstruction.

use aniso_hardy::frames::{band_limited, FramePair, ProductFrame};
use aniso_hardy::{EllipsoidGauge, GridSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{gauge, label};
use crate::report::{num, SuiteReport, Table};
use crate::{ExperimentConfig, Result};

/// Band-limited inputs per reconstruction check.
const INPUTS: usize = 4;

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("frames");
    let profile = cfg.frame.profile.build()?;
    rep.criterion(5, "reproducing formulas", |c, tables| {
        let mut t = Table::new("frames", &["frame", "s", "levels", "kappa", "partition_error", "moment_error", "pairing_error", "support_exact", "annulus_ratio", "worst_reconstruction"]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let row = |t: &mut Table, name: &str, s: u32, levels: serde_json::Value, kappa: f64, cert: &aniso_hardy::frames::FrameCertificates, worst: f64| {
            t.push(vec![json!(name), json!(s), levels, num(kappa), num(cert.partition_error), num(cert.moment_error), num(cert.pairing_error), json!(cert.support_exact), num(cert.annulus_ratio), num(worst)]);
        };
        for d in &cfg.geometry_dilations {
            let g = gauge(d)?;
            let (half, n) = if g.dim() == 1 { (16.0, 1024) } else { (16.0, 256) };
            let fs = GridSpec::cube(g.dim(), half, n)?;
            let s = if g.dim() == 1 { cfg.frame.s } else { cfg.frame.s.min(1) };
            let levels = cfg.frame.levels.map(|l| (l[0], l[1]));
            let pair = FramePair::build(&g, &fs, s, profile, levels)?;
            let mask = pair.covered_mask();
            let mut worst = 0.0f64;
            for _ in 0..INPUTS {
                let f = band_limited(&fs, &mask, &mut rng);
                worst = worst.max(pair.reproduce(&f)?.rel_error);
            }
            let cert = &pair.certificates;
            let name = label(d);
            c.put(&format!("{name}.reconstruction"), num(worst));
            c.check(&format!("{name}.partition"), cert.partition_error <= 1e-12);
            c.check(&format!("{name}.certificates"), cert.support_exact && cert.moment_error < 1e-10 && cert.pairing_error < 1e-10);
            c.check(&format!("{name}.reconstruction"), worst < 1e-6);
            row(&mut t, &name, s, json!([pair.levels().0, pair.levels().1]), pair.partition.kappa, cert, worst);
        }
        let g1 = EllipsoidGauge::build(&cfg.dilations[0].build()?)?;
        let g2 = EllipsoidGauge::build(&cfg.dilations[1].build()?)?;
        let spec = GridSpec::product_1d(4.0, 256, 8.0, 128)?;
        let pf = ProductFrame::build([&g1, &g2], &spec, [cfg.frame.s, cfg.frame.s], profile)?;
        let mask = pf.covered_mask();
        let mut worst = 0.0f64;
        for _ in 0..INPUTS {
            let f = band_limited(&spec, &mask, &mut rng);
            worst = worst.max(pf.reproduce(&f)?.rel_error);
        }
        let cert = pf.certificates();
        c.put("product.reconstruction", num(worst));
        c.check("product.partition", cert.partition_error <= 1e-12);
        c.check("product.certificates", cert.support_exact && cert.moment_error < 1e-10 && cert.pairing_error < 1e-10);
        c.check("product.reconstruction", worst < 1e-5);
        let lv = json!([[pf.pairs[0].levels().0, pf.pairs[0].levels().1], [pf.pairs[1].levels().0, pf.pairs[1].levels().1]]);
        row(&mut t, "product", cfg.frame.s, lv, pf.pairs[0].partition.kappa, &cert, worst);
        tables.push(t);
        Ok(())
    })?;
    Ok(rep)
}
