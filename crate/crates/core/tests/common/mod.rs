#![allow(dead_code)]

use std::path::PathBuf;

use qbn::format;
use qbn::graph::Step;
use qbn::learning::{init_default, learn_batch, Dataset};
use qbn::model::{NetworkStructure, QbnNetwork, VarId};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub struct FamilyOut {
    pub structure: NetworkStructure,
    pub data: Dataset,
    pub qbn: QbnNetwork,
}

pub fn family_out() -> FamilyOut {
    let structure = format::load_network(&data_path("family_out.net")).unwrap();
    let data = format::load_dataset(&structure, &data_path("family_out.csv")).unwrap();
    let qbn = learn_batch(&init_default(&structure), &data).unwrap();
    FamilyOut { structure, data, qbn }
}

pub fn var(s: &NetworkStructure, name: &str) -> VarId {
    s.var_by_name(name).unwrap()
}

/// The hand-written four-step plan for `P(FO=fo | LO=lo, HB=hb)`.
pub fn worked_plan(s: &NetworkStructure) -> Vec<Step> {
    let v = |n| var(s, n);
    vec![
        Step::Reversal { from: v("FO"), to: v("LO") },
        Step::Removal { child: v("DO"), parent: v("BP") },
        Step::Reversal { from: v("DO"), to: v("HB") },
        Step::Reversal { from: v("FO"), to: v("HB") },
    ]
}
