//! Brute-force reference machinery over the full joint frequency table.
//!
//! Everything here counts samples directly, independent of the transform
//! engine, so it can be used to check it.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{QbnError, Result};
use crate::inference::infer;
use crate::learning::{init_default, learn_batch, Dataset, Sample};
use crate::model::{index, summarize, BetaStat, NetworkStructure, PriorPolicy, Query, VarId, Variable};
use crate::transforms::RawNetwork;

/// Largest joint table the oracle will build.
pub const MAX_JOINT_CELLS: u128 = 1 << 24;

/// Dense sample counts over every joint instantiation, little-endian over
/// variable ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTable {
    radix: Vec<usize>,
    counts: Vec<u64>,
    total: u64,
}

fn joint_size(radix: &[usize]) -> Result<usize> {
    let cells: u128 = radix.iter().map(|&r| r as u128).product();
    if cells > MAX_JOINT_CELLS {
        return Err(QbnError::Capacity {
            cells,
            limit: MAX_JOINT_CELLS,
        });
    }
    Ok(cells as usize)
}

impl JointTable {
    pub fn from_counts(structure: &NetworkStructure, counts: Vec<u64>) -> Result<Self> {
        let radix = structure.radix(&all_vars(structure));
        if counts.len() != joint_size(&radix)? {
            return Err(QbnError::Schema(format!(
                "{} counts for a joint domain of {} cells",
                counts.len(),
                index::cardinality(&radix)
            )));
        }
        let total = counts.iter().sum();
        Ok(JointTable { radix, counts, total })
    }

    pub fn radix(&self) -> &[usize] {
        &self.radix
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Count of one full instantiation.
    pub fn get(&self, full: &[usize]) -> u64 {
        self.counts[index::encode(full, &self.radix)]
    }

    /// Number of samples agreeing with every `(variable, value)` pair.
    pub fn count(&self, partial: &[(VarId, usize)]) -> u64 {
        let mut n = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let full = index::decode(i, &self.radix);
            if partial.iter().all(|&(v, k)| full[v.0] == k) {
                n += c;
            }
        }
        n
    }

    /// Dense marginal over `vars` (ascending), little-endian.
    pub fn marginal(&self, vars: &[VarId]) -> Vec<u64> {
        let radix: Vec<usize> = vars.iter().map(|v| self.radix[v.0]).collect();
        let mut out = vec![0; index::cardinality(&radix)];
        for (i, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                let full = index::decode(i, &self.radix);
                out[index::encode_from(vars, &radix, &full)] += c;
            }
        }
        out
    }

    /// One sample per counted instantiation, in index order.
    pub fn to_dataset(&self, structure: &NetworkStructure) -> Result<Dataset> {
        let mut rows = Vec::with_capacity(self.total as usize);
        for (i, &c) in self.counts.iter().enumerate() {
            let full = index::decode(i, &self.radix);
            rows.extend(std::iter::repeat_n(Sample(full), c as usize));
        }
        Dataset::new(structure, rows)
    }
}

fn all_vars(structure: &NetworkStructure) -> Vec<VarId> {
    (0..structure.len()).map(VarId).collect()
}

/// Tally every row of `data`.
pub fn build_joint(structure: &NetworkStructure, data: &Dataset) -> Result<JointTable> {
    let radix = structure.radix(&all_vars(structure));
    let mut counts = vec![0u64; joint_size(&radix)?];
    for r in &data.rows {
        r.check(structure)?;
        counts[index::encode(&r.0, &radix)] += 1;
    }
    Ok(JointTable {
        radix,
        counts,
        total: data.len() as u64,
    })
}

/// Exact sample beta: alpha counts samples matching targets and evidence,
/// omega those matching the evidence only. With `restore`, `β(1, |T|−1)` is
/// added, `|T|` being the joint domain size of the targets.
pub fn exact_beta(joint: &JointTable, query: &Query, restore: bool) -> BetaStat {
    let both: Vec<(VarId, usize)> = query.targets().iter().chain(query.evidence()).copied().collect();
    let alpha = joint.count(&both) as f64;
    let evidence = joint.count(query.evidence()) as f64;
    let raw = BetaStat::raw(alpha, evidence - alpha);
    if restore {
        let card = query.targets().iter().map(|(v, _)| joint.radix[v.0]).product();
        raw + PriorPolicy::default_prior(card)
    } else {
        raw
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub mean: f64,
    pub alpha: f64,
    pub omega: f64,
    /// Signed: inferred minus exact.
    pub variance: f64,
}

impl Discrepancy {
    pub fn max_abs(&self) -> f64 {
        self.mean.max(self.alpha).max(self.omega).max(self.variance.abs())
    }
}

pub fn discrepancy(inferred: BetaStat, exact: BetaStat) -> Result<Discrepancy> {
    let (a, b) = (summarize(inferred)?, summarize(exact)?);
    Ok(Discrepancy {
        mean: (a.mean - b.mean).abs(),
        alpha: (inferred.alpha - exact.alpha).abs(),
        omega: (inferred.omega - exact.omega).abs(),
        variance: a.variance - b.variance,
    })
}

/// Largest deviation of any raw cell of `net` from the exact counts:
/// `alpha = N(head, parents)`, `omega = N(parents) − alpha`.
pub fn raw_network_error(net: &RawNetwork, joint: &JointTable) -> f64 {
    let n = joint.radix.len();
    let mut worst: f64 = 0.0;
    for t in net.nodes() {
        let (vars, radix) = t.scope();
        let both = joint.marginal(&vars);
        let rows = joint.marginal(t.parents());
        let mut full = vec![0; n];
        index::for_each_assignment(&vars, &radix, &mut full, |a| {
            let alpha = both[index::encode_from(&vars, &radix, a)] as f64;
            let mass = rows[t.row_of(a)] as f64;
            let c = t.at(a);
            worst = worst.max((c.alpha - alpha).abs()).max((c.omega - (mass - alpha)).abs());
        });
    }
    worst
}

fn binary_vars(n: usize) -> Vec<Variable> {
    (0..n)
        .map(|i| Variable::new(VarId(i), format!("X{}", i + 1), vec!["0".into(), "1".into()]).expect("valid domain"))
        .collect()
}

/// Random DAG over `n` binary variables: each arc `i -> j` (`i < j`) is
/// drawn with probability `p_edge`, at most `max_parents` per node.
pub fn random_dag(rng: &mut impl Rng, n: usize, p_edge: f64, max_parents: usize) -> NetworkStructure {
    let mut edges = Vec::new();
    for j in 1..n {
        let mut parents = 0;
        for i in 0..j {
            if parents < max_parents && rng.random_bool(p_edge) {
                edges.push((VarId(i), VarId(j)));
                parents += 1;
            }
        }
    }
    NetworkStructure::new(binary_vars(n), edges).expect("forward arcs are acyclic")
}

/// Counts that factor exactly over `structure`: every conditional
/// probability is a multiple of 1/4, with `4^n` samples in total, so each
/// joint count is an integer.
pub fn product_form_joint(structure: &NetworkStructure, rng: &mut impl Rng) -> Result<JointTable> {
    let n = structure.len();
    if structure.variables().iter().any(|v| v.size() != 2) {
        return Err(QbnError::Schema("product-form counts need binary variables".into()));
    }
    let parents: Vec<Vec<VarId>> = (0..n).map(|i| structure.parents(VarId(i))).collect();
    let quarters: Vec<Vec<u64>> = parents
        .iter()
        .map(|p| (0..1usize << p.len()).map(|_| rng.random_range(1..=3)).collect())
        .collect();
    let radix = vec![2; n];
    let mut counts = vec![0u64; joint_size(&radix)?];
    for (i, slot) in counts.iter_mut().enumerate() {
        let full = index::decode(i, &radix);
        *slot = (0..n)
            .map(|v| {
                let row = index::encode_from(&parents[v], &vec![2; parents[v].len()], &full);
                let m = quarters[v][row];
                if full[v] == 0 {
                    m
                } else {
                    4 - m
                }
            })
            .product();
    }
    JointTable::from_counts(structure, counts)
}

/// `X1 -> X2 -> ... -> Xn`, binary.
pub fn chain_structure(n: usize) -> NetworkStructure {
    NetworkStructure::new(binary_vars(n), (1..n).map(|i| (VarId(i - 1), VarId(i)))).expect("chain is acyclic")
}

/// True chain parameters: `P(X1 = 0)` and, per link, `P(X_{i+1} = 0 | X_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    pub root: f64,
    pub links: Vec<[f64; 2]>,
}

impl ChainModel {
    pub fn random(rng: &mut impl Rng, n: usize) -> Self {
        ChainModel {
            root: rng.random_range(0.1..0.9),
            links: (1..n).map(|_| [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.links.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ancestral sampling.
    pub fn sample(&self, rng: &mut impl Rng, n_samples: usize) -> Vec<Sample> {
        (0..n_samples)
            .map(|_| {
                let mut x = Vec::with_capacity(self.len());
                x.push(usize::from(!rng.random_bool(self.root)));
                for link in &self.links {
                    let prev = *x.last().unwrap();
                    x.push(usize::from(!rng.random_bool(link[prev])));
                }
                Sample(x)
            })
            .collect()
    }

    /// `P(Xn = 0 | X1 = 0)` under the true parameters.
    pub fn leaf_given_root(&self) -> f64 {
        let mut p0 = 1.0;
        for l in &self.links {
            p0 = p0 * l[0] + (1.0 - p0) * l[1];
        }
        p0
    }
}

fn mix(parts: &[u64]) -> u64 {
    // splitmix64 over the parts
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lengths: Vec<usize>,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub chain_len: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub inferred_mean: f64,
    pub exact_mean: f64,
    pub abs_err: f64,
    pub inferred_var: f64,
    pub var_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub chain_len: usize,
    pub n_samples: usize,
    pub runs: usize,
    pub median_abs_err: f64,
    pub mean_abs_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    pub aggregates: Vec<Aggregate>,
}

pub const REPORT_HEADER: &str = "chain_len,n_samples,seed,inferred_mean,exact_mean,abs_err,inferred_var,var_bound";

impl ExperimentReport {
    pub fn aggregate(&self, chain_len: usize, n_samples: usize) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.chain_len == chain_len && a.n_samples == n_samples)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{REPORT_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.chain_len, r.n_samples, r.seed, r.inferred_mean, r.exact_mean, r.abs_err, r.inferred_var, r.var_bound
            )?;
        }
        Ok(())
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// The true chain behind every run with this `(chain_len, seed)`.
pub fn chain_model(chain_len: usize, seed: u64) -> ChainModel {
    ChainModel::random(&mut ChaCha8Rng::seed_from_u64(mix(&[seed, chain_len as u64])), chain_len)
}

/// One cell of the grid: the chain is drawn from `(seed, len)`, the data
/// from `(seed, len, n_samples)`.
pub fn chain_run(chain_len: usize, n_samples: usize, seed: u64) -> Result<ExperimentRow> {
    let model = chain_model(chain_len, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, chain_len as u64, n_samples as u64]));
    let structure = chain_structure(chain_len);
    let data = Dataset::new(&structure, model.sample(&mut rng, n_samples))?;
    let qbn = learn_batch(&init_default(&structure), &data)?;
    let query = Query::new(&structure, vec![(VarId(chain_len - 1), 0)], vec![(VarId(0), 0)])?;
    let r = infer(&qbn, &query)?;
    let exact = summarize(exact_beta(&build_joint(&structure, &data)?, &query, true))?;
    Ok(ExperimentRow {
        chain_len,
        n_samples,
        seed,
        inferred_mean: r.mean,
        exact_mean: exact.mean,
        abs_err: (r.mean - exact.mean).abs(),
        inferred_var: r.variance,
        var_bound: r.variance_bound,
    })
}

/// Error of the transformed answer against the exact sample answer over a
/// grid of chain lengths, sample sizes and seeds. Cells run in parallel;
/// rows come back in grid order.
pub fn chain_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.lengths.iter().any(|&l| l < 2) {
        return Err(QbnError::Usage("chain lengths must be at least 2".into()));
    }
    let grid: Vec<(usize, usize, u64)> = config
        .lengths
        .iter()
        .flat_map(|&l| config.sizes.iter().flat_map(move |&n| config.seeds.iter().map(move |&s| (l, n, s))))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(l, n, s)| chain_run(l, n, s))
        .collect::<Result<Vec<_>>>()?;
    let mut aggregates = Vec::new();
    for &l in &config.lengths {
        for &n in &config.sizes {
            let mut errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.chain_len == l && r.n_samples == n)
                .map(|r| r.abs_err)
                .collect();
            if errs.is_empty() {
                continue;
            }
            let mean_abs_err = errs.iter().sum::<f64>() / errs.len() as f64;
            aggregates.push(Aggregate {
                chain_len: l,
                n_samples: n,
                runs: errs.len(),
                median_abs_err: median(&mut errs),
                mean_abs_err,
            });
        }
    }
    Ok(ExperimentReport { rows, aggregates })
}
