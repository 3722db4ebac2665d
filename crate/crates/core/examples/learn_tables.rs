//! Learn the family-out network from its 100-row dataset and print every
//! stored table with the prior added back.

use std::path::Path;

use qbn::format;
use qbn::learning::{init_default, learn_batch};
use qbn::model::{row_decode, View};

fn main() -> qbn::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let s = format::load_network(&dir.join("family_out.net"))?;
    let data = format::load_dataset(&s, &dir.join("family_out.csv"))?;
    let qbn = learn_batch(&init_default(&s), &data)?;
    println!("{} samples", data.len());
    for v in s.variables() {
        let parents = s.parents(v.id);
        println!("\n{}", v.name);
        for row in 0..s.parent_rows(v.id) {
            let inst = row_decode(&s, v.id, row)?;
            let cond: Vec<String> = parents
                .iter()
                .zip(&inst.assignments)
                .map(|(p, k)| s.variable(*p).domain[*k].clone())
                .collect();
            for (k, label) in v.domain.iter().enumerate() {
                let cell = qbn.cell(v.id, row, k, View::WithPrior)?;
                if cond.is_empty() {
                    println!("  P({label}) = {cell:.0}");
                } else {
                    println!("  P({label} | {}) = {cell:.0}", cond.join(", "));
                }
            }
        }
    }
    Ok(())
}
