//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{family_out, var, worked_plan};
use qbn::inference::{cell_at, infer, report_prior};
use qbn::learning::{init_default, learn_batch, learn_batch_par, Dataset};
use qbn::model::{row_index, summarize, BetaStat, ParentInstantiation, Query, VarId, View};
use qbn::oracle::{
    build_joint, chain_experiment, exact_beta, product_form_joint, random_dag, raw_network_error, ExperimentConfig,
};
use qbn::transforms::{node_merging, node_splitting, restore_prior, RawNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn stored_tables() -> Outcome {
    let start = Instant::now();
    let f = family_out();
    let s = &f.structure;
    #[rustfmt::skip]
    let cells: [(&str, &[(&str, &str)], &str, f64, f64); 20] = [
        ("FO", &[], "fo", 33.0, 69.0), ("FO", &[], "not_fo", 69.0, 33.0),
        ("BP", &[], "bp", 12.0, 90.0), ("BP", &[], "not_bp", 90.0, 12.0),
        ("HB", &[("DO", "do")], "hb", 34.0, 4.0), ("HB", &[("DO", "not_do")], "hb", 3.0, 63.0),
        ("HB", &[("DO", "do")], "not_hb", 4.0, 34.0), ("HB", &[("DO", "not_do")], "not_hb", 63.0, 3.0),
        ("LO", &[("FO", "fo")], "lo", 24.0, 10.0), ("LO", &[("FO", "not_fo")], "lo", 7.0, 63.0),
        ("LO", &[("FO", "fo")], "not_lo", 10.0, 24.0), ("LO", &[("FO", "not_fo")], "not_lo", 63.0, 7.0),
        ("DO", &[("FO", "fo"), ("BP", "bp")], "do", 6.0, 1.0),
        ("DO", &[("FO", "fo"), ("BP", "not_bp")], "do", 17.0, 12.0),
        ("DO", &[("FO", "not_fo"), ("BP", "bp")], "do", 4.0, 4.0),
        ("DO", &[("FO", "not_fo"), ("BP", "not_bp")], "do", 13.0, 51.0),
        ("DO", &[("FO", "fo"), ("BP", "bp")], "not_do", 1.0, 6.0),
        ("DO", &[("FO", "fo"), ("BP", "not_bp")], "not_do", 12.0, 17.0),
        ("DO", &[("FO", "not_fo"), ("BP", "bp")], "not_do", 4.0, 4.0),
        ("DO", &[("FO", "not_fo"), ("BP", "not_bp")], "not_do", 51.0, 13.0),
    ];
    for (node, parents, value, a, w) in cells {
        let v = var(s, node);
        let row = row_index(s, v, &ParentInstantiation::from_labels(s, v, parents).unwrap()).unwrap();
        let k = s.variable(v).value_index(value).unwrap();
        let got = f.qbn.cell(v, row, k, View::WithPrior).unwrap();
        ensure(got == BetaStat::raw(a, w), format!("{node}={value} | {parents:?}: {got}"))?;
    }
    let took = within_time(start, Duration::from_secs(1))?;
    Ok(format!("20/20 cells exact in {took:?}"))
}

fn worked_pipeline() -> Outcome {
    let start = Instant::now();
    let f = family_out();
    let s = &f.structure;
    let q = Query::from_labels(s, &[("FO", "fo")], &[("LO", "lo"), ("HB", "hb")]).unwrap();
    let mut net = RawNetwork::from_learned(&f.qbn);
    let expected = [(1, 24.0, 7.0), (0, 22.0, 12.0), (1, 20.25, 1.34), (1, 15.08, 2.36)];
    let mut seen = Vec::new();
    for (step, (pick, a, w)) in worked_plan(s).iter().zip(expected) {
        let rec = net.apply(step).map_err(|e| e.to_string())?;
        let t = &rec.outputs[pick];
        let got = restore_prior(cell_at(t, &q, s.len()), report_prior(net.variables(), net.priors(), t.head()));
        ensure((got.alpha - a).abs() <= 0.01 && (got.omega - w).abs() <= 0.01, format!("{step:?} gave {got}"))?;
        seen.push(format!("{got:.2}"));
    }
    let auto = infer(&f.qbn, &q).map_err(|e| e.to_string())?;
    ensure(
        (auto.stat.alpha - 15.08).abs() <= 0.01 && (auto.stat.omega - 2.36).abs() <= 0.01,
        format!("planned query gave {}", auto.stat),
    )?;
    let took = within_time(start, Duration::from_secs(1))?;
    Ok(format!("{} in {took:?}", seen.join(" -> ")))
}

fn oracle_truth() -> Outcome {
    let f = family_out();
    let s = &f.structure;
    let j = build_joint(s, &f.data).map_err(|e| e.to_string())?;
    let q1 = Query::from_labels(s, &[("DO", "do")], &[("FO", "fo"), ("HB", "hb")]).unwrap();
    let q2 = Query::from_labels(s, &[("FO", "fo")], &[("LO", "lo"), ("HB", "hb")]).unwrap();
    let (a, b) = (exact_beta(&j, &q1, true), exact_beta(&j, &q2, true));
    ensure(a == BetaStat::raw(20.0, 2.0), format!("P(do | fo, hb) = {a}"))?;
    ensure(b == BetaStat::raw(16.0, 2.0), format!("P(fo | lo, hb) = {b}"))?;
    Ok(format!("{a:.0} and {b:.0}"))
}

fn oracle_equivalence() -> Outcome {
    let (mut networks, mut steps, mut queries) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    for seed in 0..120u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=5);
        let s = random_dag(&mut rng, n, 0.5, 3);
        let joint = product_form_joint(&s, &mut rng).map_err(|e| e.to_string())?;
        let data = joint.to_dataset(&s).map_err(|e| e.to_string())?;
        let qbn = learn_batch(&init_default(&s), &data).map_err(|e| e.to_string())?;
        networks += 1;
        for _ in 0..5 {
            let mut vars: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(vars.as_mut_slice(), &mut rng);
            let nt = rng.random_range(1..=n);
            let ne = rng.random_range(0..=n - nt);
            let mut pick = |xs: &[usize]| -> Vec<(VarId, usize)> {
                xs.iter().map(|&v| (VarId(v), rng.random_range(0..2))).collect()
            };
            let t = pick(&vars[..nt]);
            let e = pick(&vars[nt..nt + ne]);
            let query = Query::new(&s, t, e).map_err(|e| e.to_string())?;
            let r = infer(&qbn, &query).map_err(|e| e.to_string())?;
            let exact = exact_beta(&joint, &query, true);
            let d = (r.stat.alpha - exact.alpha).abs().max((r.stat.omega - exact.omega).abs());
            worst = worst.max(d);
            ensure(d <= 1e-9, format!("seed {seed} {}: {} vs {exact}", query.display(&s), r.stat))?;
            let mut net = RawNetwork::from_learned(&qbn);
            for step in &r.plan.steps {
                net.apply(step).map_err(|e| e.to_string())?;
                let err = raw_network_error(&net, &joint);
                worst = worst.max(err);
                ensure(err <= 1e-9, format!("seed {seed} after {step:?}: {err}"))?;
                steps += 1;
            }
            queries += 1;
        }
    }
    ensure(networks >= 100, "fewer than 100 networks")?;
    Ok(format!(
        "{networks} networks, {queries} queries, {steps} transformations, worst deviation {worst:.1e}"
    ))
}

fn variance_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    for i in 0..100_000 {
        // half uniform, half log-uniform over (0, 1e6]
        let draw = |rng: &mut ChaCha8Rng| {
            if i % 2 == 0 {
                1e6 * (1.0 - rng.random::<f64>())
            } else {
                10f64.powf(rng.random_range(-9.0..=6.0))
            }
        };
        let (a, w) = (draw(&mut rng), draw(&mut rng));
        let s = summarize(BetaStat::raw(a, w)).map_err(|e| e.to_string())?;
        if !(s.variance < 1.0 / (a + w + 1.0)) {
            violations += 1;
        }
    }
    ensure(violations == 0, format!("{violations} violations"))?;
    Ok("100000 pairs, 0 violations".into())
}

fn count_conservation() -> Outcome {
    let f = family_out();
    let empty = init_default(&f.structure);
    for cut in [0, 1, 37, 99, 100] {
        let (a, b) = f.data.rows.split_at(cut);
        let first = learn_batch(&empty, &Dataset::new(&f.structure, a.to_vec()).unwrap()).unwrap();
        let both = learn_batch_par(&first, &Dataset::new(&f.structure, b.to_vec()).unwrap()).unwrap();
        ensure(both == f.qbn, format!("split at {cut} is not additive"))?;
    }
    let mut round_trips = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_dag(&mut rng, 4, 0.5, 3);
        let joint = product_form_joint(&s, &mut rng).unwrap();
        let qbn = learn_batch(&init_default(&s), &joint.to_dataset(&s).unwrap()).unwrap();
        let net = RawNetwork::from_learned(&qbn);
        let skel = net.skeleton();
        for (p, c) in s.edges() {
            if !skel.fragment_is_exact(&skel.fragment(c, p).unwrap()) {
                continue;
            }
            let Ok((merged, _)) = node_merging(&net, c, p) else { continue };
            let (back, _) = node_splitting(&merged, p, &[p]).map_err(|e| e.to_string())?;
            ensure(raw_network_error(&back, &joint) <= 1e-9, format!("seed {seed}: split after merge drifted"))?;
            let (orig, split) = (net.node_of(p).unwrap(), back.node_of(p).unwrap());
            if orig.parents() == split.parents() {
                ensure(orig.max_abs_diff(split) == Some(0.0), format!("seed {seed}: parent table changed"))?;
            }
            round_trips += 1;
        }
    }
    Ok(format!("additive over 5 splits, {round_trips} merge/split round trips exact"))
}

fn error_trend() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig {
        lengths: vec![3, 4, 5, 6],
        sizes: vec![100, 10_000],
        seeds: (0..30).collect(),
    };
    let report = chain_experiment(&config).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for len in 3..=6 {
        let small = report.aggregate(len, 100).unwrap().median_abs_err;
        let large = report.aggregate(len, 10_000).unwrap().median_abs_err;
        ensure(large < small, format!("length {len}: {large} is not below {small}"))?;
        parts.push(format!("n={len} {small:.4}>{large:.4}"));
    }
    let took = within_time(start, Duration::from_secs(60))?;
    Ok(format!("{} in {took:?}", parts.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("stored tables from the 100-row dataset", stored_tables),
        ("worked four-step pipeline", worked_pipeline),
        ("exact answers from the joint", oracle_truth),
        ("transform/oracle equivalence on product-form counts", oracle_equivalence),
        ("variance bound", variance_bound),
        ("count conservation", count_conservation),
        ("error shrinks with sample size", error_trend),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
