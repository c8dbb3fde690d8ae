use aniso_hardy::cubes::DyadicCubeTree;
use aniso_hardy::{EllipsoidGauge, ExpansiveDilation, GridSpec};

fn tree(rows: &[Vec<f64>], dim: usize, half: f64, samples: usize) -> DyadicCubeTree {
    let g = EllipsoidGauge::build(&ExpansiveDilation::with_epsilon(rows, 0.05).unwrap()).unwrap();
    let fs = GridSpec::cube(dim, half, samples).unwrap();
    let lv = DyadicCubeTree::auto_levels(&g, &fs, -1);
    DyadicCubeTree::build(&g, &fs, lv).unwrap()
}

#[test]
fn full_size_trees_satisfy_axioms() {
    for (rows, dim, half, samples) in [
        (vec![vec![2.0]], 1, 16.0, 1024),
        (vec![vec![2.0, 0.0], vec![0.0, 4.0]], 2, 8.0, 256),
        (vec![vec![2.0, 1.0], vec![0.0, 2.0]], 2, 8.0, 256),
    ] {
        let t0 = std::time::Instant::now();
        let t = tree(&rows, dim, half, samples);
        println!("{rows:?}: levels {}..={} u={} v={} in {:?}", t.coarsest(), t.finest(), t.u(), t.v(), t0.elapsed());
        for c in t.checks() {
            println!("  {c:?}");
        }
        assert!(t.interior_ok());
    }
}

#[test]
fn levels_partition_and_nest_by_direct_check() {
    let t = tree(&[vec![2.0, 0.0], vec![0.0, 4.0]], 2, 8.0, 256);
    let n = t.spec().len();
    let levels = t.levels();
    for (i, lvl) in levels.iter().enumerate() {
        let mut owner = vec![usize::MAX; n];
        for c in &lvl.cubes {
            assert!(!c.cells.is_empty());
            for x in &c.cells {
                assert_eq!(owner[*x], usize::MAX, "cell {x} owned twice at level {}", lvl.level);
                owner[*x] = c.id;
            }
        }
        assert!(owner.iter().all(|o| *o != usize::MAX));
        assert_eq!(owner, lvl.labels);
        if i > 0 {
            let up = &levels[i - 1];
            for c in &lvl.cubes {
                let p = c.parent.expect("non-root cube has a parent");
                assert!(c.cells.iter().all(|x| up.labels[*x] == p));
            }
        }
    }
    // coarser levels first
    assert!(levels.windows(2).all(|w| w[0].cubes.len() <= w[1].cubes.len()));
    let total: f64 = levels[0].cubes.iter().map(|c| t.measure(levels[0].level, c.id)).sum();
    assert!((total - t.spec().volume()).abs() < 1e-9 * total);
}
