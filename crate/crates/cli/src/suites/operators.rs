//! Atom bounds, the extension inequality and rectangular decay for the
//! bundled square-function operator.

use aniso_hardy::atoms::atomic_decompose;
use aniso_hardy::operators::{atom_sup_bound, extend_sublinear, pipeline_atoms, rectangular_criterion, synthetic_rectangular_atoms, CriterionExponents, SublinearOperator};
use aniso_hardy::{Field, Error as CoreError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::decompose::{setup, Bump};
use crate::report::{num, nums, SuiteReport, Table};
use crate::{ExperimentConfig, Result};

const ATOMS: usize = 100;
const DECOMPOSITIONS: usize = 3;
const DECAY_ATOMS: usize = 20;
/// Enlargements from well inside the padded rectangle out to past it.
const KS: [i32; 10] = [-6, -5, -4, -3, -2, -1, 0, 1, 2, 3];

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("operators");
    rep.criterion(12, "operator extension", |c, tables| {
        let st = setup(cfg, cfg.grid.samples, None)?;
        let (sys, tri) = (st.system, st.triplet);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = [sys.spec.box_half_widths()[0], sys.spec.box_half_widths()[1]];
        let mut decomps = Vec::new();
        for _ in 0..DECOMPOSITIONS {
            let f = Bump::random(&mut rng, half).field(&sys);
            let d = atomic_decompose(&f, &sys, &tri)?;
            decomps.push((f, d));
        }
        let mut fields: Vec<Field> = Vec::new();
        for (_, d) in &decomps {
            fields.extend(pipeline_atoms(d)?);
        }
        fields.truncate(ATOMS / 2);
        let pipeline_count = fields.len();
        let t = &sys.trees.trees;
        let fine = [t[0].finest() - 2..=t[0].finest(), t[1].finest() - 2..=t[1].finest()];
        let synthetic = synthetic_rectangular_atoms(&sys.trees, &sys.weight, &tri, fine, ATOMS - pipeline_count, seed ^ 0xa70)?;
        for a in &synthetic {
            fields.push(Field::from_real(&sys.spec, a.values.clone())?);
        }
        let trees = sys.trees.clone();
        let weight = sys.weight.clone();
        let op = SublinearOperator::area(sys, tri.q, Some(&weight))?;

        let sup = atom_sup_bound(&op, &fields)?;
        c.put("atoms.pipeline", json!(pipeline_count));
        c.put("atoms.synthetic", json!(synthetic.len()));
        c.put("atom_sup", num(sup.sup));
        c.put("atom_quantiles", nums(&sup.quantiles));
        c.check("atom_sup.finite", sup.count == ATOMS && sup.sup.is_finite() && sup.sup > 0.0);

        let mut ext = Table::new("extension", &["case", "atoms", "gamma", "lhs", "rhs", "direct_norm", "assembled_bound", "coefficient_norm"]);
        for (i, (f, d)) in decomps.iter().enumerate() {
            match extend_sublinear(&op, d, f, op.gamma, sup.sup) {
                Ok(r) => {
                    c.check(&format!("series{i}.bounded"), r.direct_norm <= r.assembled_bound * (1.0 + 1e-9));
                    ext.push(vec![json!(format!("series{i}")), json!(r.atoms), num(r.gamma), num(r.lhs), num(r.rhs), num(r.direct_norm), num(r.assembled_bound), num(r.coefficient_norm)]);
                }
                Err(CoreError::SubadditivityViolation(m)) => {
                    c.put(&format!("series{i}.violation"), json!(m));
                    c.check(&format!("series{i}.extension"), false);
                }
                Err(e) => return Err(e.into()),
            }
        }
        // λ-weighted pairs of neighbouring atoms from each series
        let mut pairs = Vec::new();
        for (_, d) in &decomps {
            let fa = pipeline_atoms(d)?;
            for k in 1..d.atoms.len() {
                pairs.push((fa[k - 1].scale(d.atoms[k - 1].lambda.into()), fa[k].scale(d.atoms[k].lambda.into())));
            }
        }
        let offset = pipeline_count;
        for k in (0..synthetic.len().saturating_sub(1)).step_by(2) {
            pairs.push((fields[offset + k].clone(), fields[offset + k + 1].clone()));
        }
        match op.check_subadditivity(&pairs) {
            Ok(margin) => {
                c.put("pairs.margin", num(margin));
                c.check("pairs.extension", true);
            }
            Err(CoreError::SubadditivityViolation(m)) => {
                c.put("pairs.violation", json!(m));
                c.check("pairs.extension", false);
            }
            Err(e) => return Err(e.into()),
        }
        c.put("pairs.count", json!(pairs.len()));

        let ex = CriterionExponents::new(tri.p, tri.q, tri.q, tri.p)?;
        let rc = rectangular_criterion(&op, &synthetic[..DECAY_ATOMS.min(synthetic.len())], &trees, &KS, ex)?;
        let mut decay = Table::new("decay", &["atom", "level1", "level2", "tails", "nonincreasing", "epsilon"]);
        for (i, cv) in rc.curves.iter().enumerate() {
            decay.push(vec![json!(i), json!(cv.rect.level1), json!(cv.rect.level2), nums(&cv.tails), json!(cv.nonincreasing), num(cv.epsilon)]);
            c.check(&format!("decay{i}.nonincreasing"), cv.nonincreasing);
        }
        c.put("decay.min_epsilon", num(rc.min_epsilon));
        c.check("decay.positive", rc.min_epsilon > 0.0);
        tables.push(ext);
        tables.push(decay);
        Ok(())
    })?;
    Ok(rep)
}
