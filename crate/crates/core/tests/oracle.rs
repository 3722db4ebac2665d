mod common;

use common::{family_out, var};
use proptest::prelude::*;
use qbn::format::parse_network;
use qbn::learning::{init_default, learn_batch, Dataset, Sample};
use qbn::model::{BetaStat, Query, View};
use qbn::oracle::{build_joint, chain_experiment, chain_model, chain_run, discrepancy, exact_beta, ChainModel, ExperimentConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Joint frequencies of the worked example: four (FO, BP) columns, each
/// listing the (LO, DO, HB) rows with `lo,do,hb` first and `not` varying
/// fastest on HB.
const FREQUENCIES: [[u64; 8]; 4] = [
    [4, 0, 0, 0, 1, 0, 0, 0],
    [10, 1, 1, 7, 4, 1, 0, 3],
    [0, 0, 0, 0, 3, 0, 0, 3],
    [1, 0, 0, 5, 10, 1, 1, 44],
];

#[test]
fn joint_of_the_worked_dataset() {
    let f = family_out();
    let j = build_joint(&f.structure, &f.data).unwrap();
    assert_eq!(j.total(), 100);
    for (col, counts) in FREQUENCIES.iter().enumerate() {
        let (fo, bp) = (col / 2, col % 2);
        for (row, &n) in counts.iter().enumerate() {
            let (lo, dov, hb) = (row / 4, (row / 2) % 2, row % 2);
            assert_eq!(j.get(&[fo, bp, lo, dov, hb]), n, "column {col} row {row}");
        }
    }
    assert_eq!(j.get(&[1, 1, 1, 1, 1]), 44);
}

#[test]
fn single_variable_marginals_match_recounts() {
    let f = family_out();
    let j = build_joint(&f.structure, &f.data).unwrap();
    for v in f.structure.variables() {
        let m = j.marginal(&[v.id]);
        for k in 0..v.size() {
            let recount = f.data.rows.iter().filter(|r| r.0[v.id.0] == k).count() as u64;
            assert_eq!(m[k], recount);
        }
    }
}

#[test]
fn exact_answers_for_the_worked_queries() {
    let f = family_out();
    let s = &f.structure;
    let j = build_joint(s, &f.data).unwrap();
    let q1 = Query::from_labels(s, &[("DO", "do")], &[("FO", "fo"), ("HB", "hb")]).unwrap();
    let q2 = Query::from_labels(s, &[("FO", "fo")], &[("LO", "lo"), ("HB", "hb")]).unwrap();
    assert_eq!(exact_beta(&j, &q1, true), BetaStat::raw(20.0, 2.0));
    assert_eq!(exact_beta(&j, &q2, true), BetaStat::raw(16.0, 2.0));
    assert_eq!(exact_beta(&j, &q2, false), BetaStat::raw(15.0, 1.0));
}

#[test]
fn discrepancy_of_the_third_step() {
    let d = discrepancy(BetaStat::raw(20.25, 1.34), BetaStat::raw(20.0, 2.0)).unwrap();
    assert!((d.alpha - 0.25).abs() < 1e-12);
    assert!((d.omega - 0.66).abs() < 1e-12);
    assert!(d.variance < 0.0);
}

#[test]
fn single_variable_network_is_its_own_joint() {
    let s = parse_network("node X : a, b, c\n").unwrap();
    let rows = [0, 2, 2, 1, 2].map(|k| Sample(vec![k])).to_vec();
    let data = Dataset::new(&s, rows).unwrap();
    let qbn = learn_batch(&init_default(&s), &data).unwrap();
    let j = build_joint(&s, &data).unwrap();
    for k in 0..3 {
        let q = Query::new(&s, vec![(var(&s, "X"), k)], vec![]).unwrap();
        assert_eq!(exact_beta(&j, &q, true), qbn.cell(var(&s, "X"), 0, k, View::WithPrior).unwrap());
    }
}

#[test]
fn large_samples_approach_the_generator() {
    for seed in 0..3 {
        for len in [3, 5] {
            let row = chain_run(len, 100_000, seed).unwrap();
            assert!(row.abs_err <= 0.02, "{row:?}");
            assert!((row.inferred_mean - chain_model(len, seed).leaf_given_root()).abs() <= 0.02);
        }
    }
}

#[test]
fn generator_limit_is_the_chained_conditional() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = ChainModel::random(&mut rng, 4);
    let data = m.sample(&mut rng, 200_000);
    let hits = data.iter().filter(|s| s.0[0] == 0).count() as f64;
    let both = data.iter().filter(|s| s.0[0] == 0 && s.0[3] == 0).count() as f64;
    assert!((both / hits - m.leaf_given_root()).abs() < 0.01);
}

#[test]
fn experiment_grid_shape_and_bound_column() {
    let config = ExperimentConfig {
        lengths: vec![3, 4],
        sizes: vec![100, 10_000],
        seeds: (0..5).collect(),
    };
    let r = chain_experiment(&config).unwrap();
    assert_eq!(r.rows.len(), 20);
    assert_eq!(r.aggregates.len(), 4);
    for row in &r.rows {
        assert!(row.inferred_var < row.var_bound);
        assert!((row.abs_err - (row.inferred_mean - row.exact_mean).abs()).abs() < 1e-15);
    }
    assert_eq!(chain_experiment(&config).unwrap(), r);
}

proptest! {
    #[test]
    fn joint_ignores_row_order(seed in any::<u64>()) {
        let f = family_out();
        let mut rows = f.data.rows.clone();
        rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = Dataset::new(&f.structure, rows).unwrap();
        prop_assert_eq!(build_joint(&f.structure, &shuffled).unwrap(), build_joint(&f.structure, &f.data).unwrap());
    }
}
