//! Answer P(FO=fo | LO=lo, HB=hb) twice: with a hand-written four-step plan,
//! printing the cell of interest after every step, and with the planner.

use std::path::Path;

use qbn::format;
use qbn::graph::Step;
use qbn::inference::{cell_at, infer, report_prior};
use qbn::learning::{init_default, learn_batch};
use qbn::transforms::{restore_prior, RawNetwork};

fn main() -> qbn::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let s = format::load_network(&dir.join("family_out.net"))?;
    let qbn = learn_batch(&init_default(&s), &format::load_dataset(&s, &dir.join("family_out.csv"))?)?;
    let query = format::parse_query(&s, "P(FO=fo | LO=lo, HB=hb)")?;
    let v = |n: &str| s.var_by_name(n).unwrap();

    let plan = [
        (Step::Reversal { from: v("FO"), to: v("LO") }, 1),
        (Step::Removal { child: v("DO"), parent: v("BP") }, 0),
        (Step::Reversal { from: v("DO"), to: v("HB") }, 1),
        (Step::Reversal { from: v("FO"), to: v("HB") }, 1),
    ];
    let mut net = RawNetwork::from_learned(&qbn);
    for (i, (step, pick)) in plan.iter().enumerate() {
        let rec = net.apply(step)?;
        let t = &rec.outputs[*pick];
        let stat = restore_prior(cell_at(t, &query, s.len()), report_prior(net.variables(), net.priors(), t.head()));
        println!("{}. {:<28} {stat:.2}", i + 1, step.describe(&s));
    }

    let r = infer(&qbn, &query)?;
    println!("\nplanner, {} steps:", r.plan.steps.len());
    for line in r.plan.describe(&s) {
        println!("  {line}");
    }
    println!("{} = {:.2} (mean {:.4})", query.display(&s), r.stat, r.mean);
    Ok(())
}
