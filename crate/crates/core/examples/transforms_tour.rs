//! Each transformation on a small three-node network, with the resulting
//! raw tables.

use qbn::format;
use qbn::learning::{init_default, learn_batch, Dataset, Sample};
use qbn::model::Cpt;
use qbn::transforms::{arc_reversal, barren_deletion, node_merging, node_removal, node_splitting, RawNetwork};

fn show(title: &str, net: &RawNetwork) {
    println!("{title}");
    for t in net.nodes() {
        let name = |vs: &[qbn::model::VarId]| {
            vs.iter()
                .map(|v| net.variables()[v.0].name.as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        println!("  {} | {}: {}", name(t.head()), name(t.parents()), cells(t));
    }
}

fn cells(t: &Cpt) -> String {
    t.cells().iter().map(|c| format!("{c:.2}")).collect::<Vec<_>>().join(" ")
}

fn main() -> qbn::Result<()> {
    let s = format::parse_network("node A : a0, a1\nnode B : b0, b1\nnode C : c0, c1\nedge A -> B\nedge B -> C\n")?;
    let rows = [[0, 0, 0], [0, 0, 1], [0, 1, 1], [1, 1, 1], [1, 0, 0], [1, 1, 0], [0, 0, 0]]
        .iter()
        .map(|r| Sample(r.to_vec()))
        .collect();
    let qbn = learn_batch(&init_default(&s), &Dataset::new(&s, rows)?)?;
    let net = RawNetwork::from_learned(&qbn);
    let v = |n: &str| s.var_by_name(n).unwrap();
    show("learned", &net);

    let (rev, _) = arc_reversal(&net, v("A"), v("B"))?;
    show("\nreverse A -> B", &rev);
    let (rem, _) = node_removal(&net, v("B"), v("A"))?;
    show("\nremove A into B", &rem);
    let (merged, _) = node_merging(&net, v("C"), v("B"))?;
    show("\nmerge B into C", &merged);
    let (split, _) = node_splitting(&merged, v("B"), &[v("B")])?;
    show("\nsplit B back off", &split);
    let (pruned, _) = barren_deletion(&net, v("C"))?;
    show("\ndelete barren C", &pruned);
    Ok(())
}
