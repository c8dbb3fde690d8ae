//! Product Lusin-area equivalence ratios.

use aniso_hardy::area::{equivalence_report, product_lusin_area, ScaleFilters};
use aniso_hardy::frames::{band_limited, PartitionOfUnity, Profile};
use aniso_hardy::weights::{Weight, WeightDescriptor};
use aniso_hardy::{EllipsoidGauge, ExpansiveDilation, Field, GridSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::report::{num, SuiteReport, Table};
use crate::{CliError, ExperimentConfig, Result};

const SAMPLES: usize = 128;
const HALF_WIDTH: f64 = 8.0;
/// Scale range on the [−L, L) grid; the dilated grid uses one level more.
const LEVELS: (i32, i32) = (-3, 1);
const SHIFT: [i64; 2] = [17, -5];

struct Setup {
    spec: GridSpec,
    gauges: [EllipsoidGauge; 2],
    filters: [ScaleFilters; 2],
    mask: Vec<bool>,
}

fn setup(dils: &[ExpansiveDilation; 2], half: [f64; 2], shift: i32) -> Result<Setup> {
    let spec = GridSpec::product_1d(half[0], SAMPLES, half[1], SAMPLES)?;
    let mut filters = Vec::new();
    let mut masks = Vec::new();
    for (i, d) in dils.iter().enumerate() {
        let fs = spec.factor_spec(i);
        let p = PartitionOfUnity::build(d, Profile::default(), 1.0, (LEVELS.0 + shift, LEVELS.1 + shift), &fs)?;
        masks.push(p.covered_mask(&fs));
        filters.push(ScaleFilters::from_partition(&p, &fs)?);
    }
    let n2 = masks[1].len();
    let mask = (0..spec.len()).map(|i| masks[0][i / n2] && masks[1][i % n2]).collect();
    let f2 = filters.pop().unwrap();
    let f1 = filters.pop().unwrap();
    Ok(Setup { spec, gauges: [EllipsoidGauge::build(&dils[0])?, EllipsoidGauge::build(&dils[1])?], filters: [f1, f2], mask })
}

fn area(s: &Setup) -> impl Fn(&Field) -> aniso_hardy::Result<Vec<f64>> + '_ {
    move |f: &Field| product_lusin_area(f, [&s.filters[0], &s.filters[1]], [&s.gauges[0], &s.gauges[1]])
}

fn weight(desc: &WeightDescriptor, s: &Setup) -> Result<Weight> {
    Ok(match desc {
        WeightDescriptor::Constant => Weight::constant(&s.spec),
        WeightDescriptor::ProductPower { alphas } => Weight::product_power([&s.gauges[0], &s.gauges[1]], &s.spec, *alphas)?,
        other => return Err(CliError::ConfigInvalid { pointer: "/weights".into(), message: format!("unsupported weight {other:?}") }),
    })
}

fn weight_id(desc: &WeightDescriptor) -> String {
    match desc {
        WeightDescriptor::Constant => "1".into(),
        WeightDescriptor::ProductPower { alphas } => format!("rho^{}xrho^{}", alphas[0], alphas[1]),
        _ => "other".into(),
    }
}

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("area");
    let inputs = cfg.inputs.unwrap_or(20);
    rep.criterion(6, "area-function equivalence ratios", |c, tables| {
        let dils = [cfg.dilations[0].build()?, cfg.dilations[1].build()?];
        let a = [dils[0].matrix()[(0, 0)].abs(), dils[1].matrix()[(0, 0)].abs()];
        let base = setup(&dils, [HALF_WIDTH, HALF_WIDTH], 0)?;
        // f∘A⁻¹ on the dilated box has the samples of f; filters move one level
        let big = setup(&dils, [HALF_WIDTH * a[0], HALF_WIDTH * a[1]], 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam: Vec<Field> = (0..inputs).map(|_| band_limited(&base.spec, &base.mask, &mut rng)).collect();
        let shifted: Vec<Field> = fam.iter().map(|f| f.shift(&SHIFT)).collect();
        let dilated: Vec<Field> = fam.iter().map(|f| Field::from_values(&big.spec, f.values().to_vec())).collect::<std::result::Result<_, _>>()?;
        let mut t = Table::new("equivalence", &["p", "weight", "min", "max", "spread", "translation_error", "dilation_error"]);
        for desc in &cfg.weights {
            let w = weight(desc, &base)?;
            let wid = weight_id(desc);
            let ws = Field::from_real(&base.spec, w.density().to_vec())?.shift(&SHIFT).re();
            let ws = Weight::from_density(&base.spec, ws, w.descriptor.clone())?;
            let wb = weight(desc, &big)?;
            for p in [1.5, 2.0, 3.0] {
                let r = equivalence_report(&fam, area(&base), p, Some(w.density()), &wid)?;
                let rs = equivalence_report(&shifted, area(&base), p, Some(ws.density()), &wid)?;
                let rb = equivalence_report(&dilated, area(&big), p, Some(wb.density()), &wid)?;
                let dev = |other: &aniso_hardy::area::EquivalenceReport| r.rows.iter().zip(&other.rows).map(|(x, y)| (x.ratio - y.ratio).abs() / x.ratio).fold(0.0, f64::max);
                let (et, ed) = (dev(&rs), dev(&rb));
                let key = format!("p{p}.w{wid}");
                c.put(&format!("{key}.spread"), num(r.spread));
                c.check(&format!("{key}.spread"), r.spread <= 10.0);
                c.check(&format!("{key}.translation"), et <= 1e-6);
                c.check(&format!("{key}.dilation"), ed <= 1e-6);
                t.push(vec![num(p), json!(wid), num(r.min), num(r.max), num(r.spread), num(et), num(ed)]);
            }
        }
        tables.push(t);
        Ok(())
    })?;
    Ok(rep)
}
