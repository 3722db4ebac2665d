//! A random network with counts that factor exactly over it: every query
//! answered through transformations matches the exact count.

use qbn::inference::infer;
use qbn::learning::{init_default, learn_batch};
use qbn::model::{Query, VarId};
use qbn::oracle::{exact_beta, product_form_joint, random_dag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qbn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let s = random_dag(&mut rng, 5, 0.5, 3);
    for (p, c) in s.edges() {
        println!("{} -> {}", s.variable(p).name, s.variable(c).name);
    }
    let joint = product_form_joint(&s, &mut rng)?;
    let qbn = learn_batch(&init_default(&s), &joint.to_dataset(&s)?)?;
    let mut worst: f64 = 0.0;
    let mut asked = 0;
    for t in 0..5 {
        for e in 0..5 {
            if t == e {
                continue;
            }
            let q = Query::new(&s, vec![(VarId(t), 1)], vec![(VarId(e), 0)])?;
            let r = infer(&qbn, &q)?;
            let x = exact_beta(&joint, &q, true);
            worst = worst.max((r.stat.alpha - x.alpha).abs()).max((r.stat.omega - x.omega).abs());
            asked += 1;
        }
    }
    println!("{} samples, {asked} queries, largest deviation {worst:.2e}", joint.total());
    Ok(())
}
