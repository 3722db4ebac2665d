//! Networks, conditional tables of beta statistics, priors and queries.

mod beta;
mod cpt;
pub mod index;
mod network;

pub use beta::{summarize, BetaStat, Summary};
pub use cpt::Cpt;
pub use network::{row_decode, row_index, NetworkStructure, ParentInstantiation, VarId, Variable};

use crate::error::{QbnError, Result};

/// How the prior of every cell of one node is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorPolicy {
    /// `β(1, |D|−1)` in every cell; stripped before transformations.
    UninformedDefault,
    /// A caller-chosen uninformed prior, stripped like the default one.
    UninformedCustom(BetaStat),
    /// Pseudo-samples already seen: folded into the raw counts, never stripped.
    Informed(BetaStat),
}

impl PriorPolicy {
    pub fn default_prior(domain_size: usize) -> BetaStat {
        BetaStat::raw(1.0, domain_size.saturating_sub(1) as f64)
    }

    /// The prior a with-prior view adds on top of the stored counts.
    pub fn uninformed(&self, domain_size: usize) -> BetaStat {
        match self {
            PriorPolicy::UninformedDefault => Self::default_prior(domain_size),
            PriorPolicy::UninformedCustom(p) => *p,
            PriorPolicy::Informed(_) => BetaStat::ZERO,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PriorPolicy::UninformedDefault => Ok(()),
            PriorPolicy::UninformedCustom(p) | PriorPolicy::Informed(p) => BetaStat::new(p.alpha, p.omega)
                .map(|_| ())
                .map_err(|_| QbnError::InvalidPrior(format!("{p} has a negative or non-finite parameter"))),
        }
    }
}

/// Which counts a cell accessor returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    /// Sample counts only (plus informed pseudo-samples).
    Raw,
    /// Raw counts plus the node's uninformed prior.
    WithPrior,
}

/// A learned quantified belief network: structure, one raw-count table per
/// node, and a prior policy per node.
#[derive(Debug, Clone, PartialEq)]
pub struct QbnNetwork {
    structure: NetworkStructure,
    tables: Vec<Cpt>,
    priors: Vec<PriorPolicy>,
}

impl QbnNetwork {
    pub fn from_parts(structure: NetworkStructure, tables: Vec<Cpt>, priors: Vec<PriorPolicy>) -> Result<Self> {
        if tables.len() != structure.len() || priors.len() != structure.len() {
            return Err(QbnError::Schema(format!(
                "{} variables but {} tables and {} priors",
                structure.len(),
                tables.len(),
                priors.len()
            )));
        }
        for (i, t) in tables.iter().enumerate() {
            let node = VarId(i);
            let parents = structure.parents(node);
            if t.head() != [node] || t.parents() != parents.as_slice() {
                return Err(QbnError::Schema(format!(
                    "table for `{}` does not match its parent set",
                    structure.variable(node).name
                )));
            }
            if t.head_radix() != [structure.variable(node).size()] || t.parent_radix() != structure.radix(&parents) {
                return Err(QbnError::Schema(format!(
                    "table for `{}` has the wrong dimensions",
                    structure.variable(node).name
                )));
            }
        }
        for p in &priors {
            p.validate()?;
        }
        Ok(QbnNetwork { structure, tables, priors })
    }

    pub fn structure(&self) -> &NetworkStructure {
        &self.structure
    }

    pub fn table(&self, node: VarId) -> &Cpt {
        &self.tables[node.0]
    }

    pub fn tables(&self) -> &[Cpt] {
        &self.tables
    }

    pub(crate) fn tables_mut(&mut self) -> &mut [Cpt] {
        &mut self.tables
    }

    pub fn prior(&self, node: VarId) -> PriorPolicy {
        self.priors[node.0]
    }

    pub fn priors(&self) -> &[PriorPolicy] {
        &self.priors
    }

    /// Uninformed prior added to every cell of `node` in the with-prior view.
    pub fn cell_prior(&self, node: VarId) -> BetaStat {
        self.priors[node.0].uninformed(self.structure.variable(node).size())
    }

    /// The statistic of cell `(row, value)` of `node`'s table.
    pub fn cell(&self, node: VarId, row: usize, value: usize, view: View) -> Result<BetaStat> {
        if node.0 >= self.tables.len() {
            return Err(QbnError::Index(format!("no node {node}")));
        }
        let raw = self.tables[node.0].cell(row, value)?;
        Ok(match view {
            View::Raw => raw,
            View::WithPrior => raw + self.cell_prior(node),
        })
    }

    pub fn with_prior_table(&self, node: VarId) -> Cpt {
        let prior = self.cell_prior(node);
        let mut t = self.tables[node.0].clone();
        for c in t.cells_mut() {
            *c = *c + prior;
        }
        t
    }
}

/// A conjunctive query `Pr(targets | evidence)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    targets: Vec<(VarId, usize)>,
    evidence: Vec<(VarId, usize)>,
}

impl Query {
    pub fn new(structure: &NetworkStructure, mut targets: Vec<(VarId, usize)>, mut evidence: Vec<(VarId, usize)>) -> Result<Self> {
        if targets.is_empty() {
            return Err(QbnError::Query("a query needs at least one target".into()));
        }
        targets.sort_unstable();
        evidence.sort_unstable();
        let mut seen = std::collections::BTreeSet::new();
        for &(v, k) in targets.iter().chain(&evidence) {
            if v.0 >= structure.len() {
                return Err(QbnError::Schema(format!("query names unknown variable {v}")));
            }
            let var = structure.variable(v);
            if k >= var.size() {
                return Err(QbnError::Query(format!("value index {k} out of range for `{}`", var.name)));
            }
            if !seen.insert(v) {
                return Err(QbnError::Query(format!("`{}` appears more than once in the query", var.name)));
            }
        }
        Ok(Query { targets, evidence })
    }

    /// Build from `(name, label)` pairs.
    pub fn from_labels(structure: &NetworkStructure, targets: &[(&str, &str)], evidence: &[(&str, &str)]) -> Result<Self> {
        let resolve = |pairs: &[(&str, &str)]| -> Result<Vec<(VarId, usize)>> {
            pairs
                .iter()
                .map(|(name, label)| {
                    let v = structure
                        .var_by_name(name)
                        .ok_or_else(|| QbnError::Schema(format!("unknown variable `{name}`")))?;
                    let k = structure
                        .variable(v)
                        .value_index(label)
                        .ok_or_else(|| QbnError::Schema(format!("`{label}` is not a value of `{name}`")))?;
                    Ok((v, k))
                })
                .collect()
        };
        Query::new(structure, resolve(targets)?, resolve(evidence)?)
    }

    pub fn targets(&self) -> &[(VarId, usize)] {
        &self.targets
    }

    pub fn evidence(&self) -> &[(VarId, usize)] {
        &self.evidence
    }

    pub fn target_vars(&self) -> Vec<VarId> {
        self.targets.iter().map(|(v, _)| *v).collect()
    }

    pub fn evidence_vars(&self) -> Vec<VarId> {
        self.evidence.iter().map(|(v, _)| *v).collect()
    }

    pub fn involves(&self, v: VarId) -> bool {
        self.targets.iter().chain(&self.evidence).any(|(q, _)| *q == v)
    }

    pub fn value_of(&self, v: VarId) -> Option<usize> {
        self.targets.iter().chain(&self.evidence).find(|(q, _)| *q == v).map(|(_, k)| *k)
    }

    /// Render in the `P(A=a, B=b | C=c)` grammar.
    pub fn display(&self, structure: &NetworkStructure) -> String {
        let part = |xs: &[(VarId, usize)]| {
            xs.iter()
                .map(|(v, k)| {
                    let var = structure.variable(*v);
                    format!("{}={}", var.name, var.domain[*k])
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        if self.evidence.is_empty() {
            format!("P({})", part(&self.targets))
        } else {
            format!("P({} | {})", part(&self.targets), part(&self.evidence))
        }
    }
}
