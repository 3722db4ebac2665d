//! Prior initialization and count learning from complete samples.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{QbnError, Result};
use crate::model::{index, BetaStat, Cpt, NetworkStructure, PriorPolicy, QbnNetwork, VarId};

/// A complete sample: one value index per network variable, in id order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sample(pub Vec<usize>);

impl Sample {
    pub fn check(&self, structure: &NetworkStructure) -> Result<()> {
        if self.0.len() != structure.len() {
            return Err(QbnError::MalformedSample(format!(
                "sample assigns {} variables, network has {}",
                self.0.len(),
                structure.len()
            )));
        }
        for (v, &k) in structure.variables().iter().zip(&self.0) {
            if k >= v.size() {
                return Err(QbnError::MalformedSample(format!(
                    "value index {k} is outside the domain of `{}`",
                    v.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<Sample>,
    pub source: Option<PathBuf>,
}

impl Dataset {
    pub fn new(structure: &NetworkStructure, rows: Vec<Sample>) -> Result<Self> {
        for r in &rows {
            r.check(structure)?;
        }
        Ok(Dataset { rows, source: None })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Concatenation, keeping the source of `self`.
    pub fn concat(&self, other: &Dataset) -> Dataset {
        Dataset {
            rows: self.rows.iter().chain(&other.rows).cloned().collect(),
            source: self.source.clone(),
        }
    }
}

/// Fresh network with zero raw counts. Informed priors are folded into the
/// raw counts right away; uninformed ones stay separate.
pub fn init_priors(structure: &NetworkStructure, policies: &[PriorPolicy]) -> Result<QbnNetwork> {
    if policies.len() != structure.len() {
        return Err(QbnError::InvalidPrior(format!(
            "{} policies for {} nodes",
            policies.len(),
            structure.len()
        )));
    }
    let tables = structure
        .variables()
        .iter()
        .zip(policies)
        .map(|(var, policy)| {
            policy.validate()?;
            let parents = structure.parents(var.id);
            let mut t = Cpt::zeros(vec![var.id], vec![var.size()], parents.clone(), structure.radix(&parents));
            if let PriorPolicy::Informed(p) = policy {
                t.cells_mut().iter_mut().for_each(|c| *c = *p);
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    QbnNetwork::from_parts(structure.clone(), tables, policies.to_vec())
}

/// [`init_priors`] with the default `β(1, |D|−1)` everywhere.
pub fn init_default(structure: &NetworkStructure) -> QbnNetwork {
    init_priors(structure, &vec![PriorPolicy::UninformedDefault; structure.len()])
        .expect("default priors are always valid")
}

/// A sample is relevant to row `row` of `node` iff it agrees with every
/// parent assignment of that row.
pub fn is_relevant(structure: &NetworkStructure, sample: &Sample, node: VarId, row: usize) -> bool {
    let parents = structure.parents(node);
    let radix = structure.radix(&parents);
    index::encode_from(&parents, &radix, &sample.0) == row
}

fn apply_sample(qbn: &mut QbnNetwork, sample: &Sample) {
    for t in qbn.tables_mut() {
        let row = t.row_of(&sample.0);
        let value = sample.0[t.owner().0];
        for k in 0..t.head_card() {
            let c = t.cell_mut(row, k).expect("row and value in range");
            if k == value {
                c.alpha += 1.0;
            } else {
                c.omega += 1.0;
            }
        }
    }
}

/// One sample's worth of counting: in the relevant row of every node the
/// matching cell's alpha and every sibling's omega grow by one.
pub fn update(qbn: &QbnNetwork, sample: &Sample) -> Result<QbnNetwork> {
    sample.check(qbn.structure())?;
    let mut out = qbn.clone();
    apply_sample(&mut out, sample);
    Ok(out)
}

/// Sequential reference path.
pub fn learn_batch(qbn: &QbnNetwork, data: &Dataset) -> Result<QbnNetwork> {
    for r in &data.rows {
        r.check(qbn.structure())?;
    }
    let mut out = qbn.clone();
    for r in &data.rows {
        apply_sample(&mut out, r);
    }
    Ok(out)
}

/// Parallel batch learning: per-chunk alpha tallies summed across workers.
/// Counts are additive, so this matches [`learn_batch`] exactly.
pub fn learn_batch_par(qbn: &QbnNetwork, data: &Dataset) -> Result<QbnNetwork> {
    for r in &data.rows {
        r.check(qbn.structure())?;
    }
    let shapes: Vec<usize> = qbn.tables().iter().map(|t| t.cells().len()).collect();
    let zero = || shapes.iter().map(|&n| vec![0u64; n]).collect::<Vec<_>>();
    let tallies = data
        .rows
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = zero();
            for s in chunk {
                for (t, slot) in qbn.tables().iter().zip(acc.iter_mut()) {
                    slot[t.index_of(&s.0)] += 1;
                }
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
            a
        });
    let mut out = qbn.clone();
    for (t, counts) in out.tables_mut().iter_mut().zip(tallies) {
        let k = t.head_card();
        for row in 0..t.rows() {
            let total: u64 = counts[row * k..(row + 1) * k].iter().sum();
            for v in 0..k {
                let n = counts[row * k + v] as f64;
                let c = t.cell_mut(row, v).expect("in range");
                *c = *c + BetaStat::raw(n, total as f64 - n);
            }
        }
    }
    Ok(out)
}
