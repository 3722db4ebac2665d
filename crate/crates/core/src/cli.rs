//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{QbnError, Result};
use crate::format;
use crate::inference::{self, cell_at, report_prior, InferenceResult};
use crate::learning::{init_default, learn_batch_par};
use crate::model::{summarize, BetaStat, Cpt, NetworkStructure, QbnNetwork, Query};
use crate::oracle::{self, ExperimentConfig};
use crate::transforms::restore_prior;

#[derive(Debug, Parser)]
#[command(name = "qbn", version, about = "Learn beta-valued belief networks and answer queries with them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn raw counts from a dataset and write a learned-network file.
    Learn {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer a query.
    Infer {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long)]
        query: String,
        /// Print every transformation with its restored beta.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        machine: bool,
    },
    /// Compare an inferred answer with the exact one from the data.
    Check {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long)]
        query: String,
        #[arg(long)]
        machine: bool,
    },
    /// Error of chain queries against exact answers over a grid.
    Experiment {
        #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5, 6])]
        lengths: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [100, 10000])]
        sizes: Vec<usize>,
        /// Number of seeds, starting at 0.
        #[arg(long, default_value_t = 30)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A learned-network file, or a network file plus data to learn from.
#[derive(Debug, Args)]
pub struct ModelSource {
    #[arg(long, conflicts_with = "network")]
    pub model: Option<PathBuf>,
    #[arg(long, requires = "data")]
    pub network: Option<PathBuf>,
    /// Dataset: learned from with `--network`, the exact reference for `check`.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

fn learn(network: &Path, data: &Path) -> Result<QbnNetwork> {
    let s = format::load_network(network)?;
    let d = format::load_dataset(&s, data)?;
    learn_batch_par(&init_default(&s), &d)
}

fn load_model(source: &ModelSource) -> Result<QbnNetwork> {
    match (&source.model, &source.network, &source.data) {
        (Some(m), _, _) => format::load_learned(m),
        (None, Some(n), Some(d)) => learn(n, d),
        _ => Err(QbnError::Usage("give --model, or --network with --data".into())),
    }
}

pub fn human_line(stat: BetaStat) -> Result<String> {
    let s = summarize(stat)?;
    Ok(format!(
        "{stat:.4} mean={:.4} var={:.4} bound={:.4}",
        s.mean, s.variance, s.variance_bound
    ))
}

pub fn machine_line(stat: BetaStat) -> Result<String> {
    let s = summarize(stat)?;
    Ok(format!(
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        stat.alpha, stat.omega, s.mean, s.variance, s.variance_bound
    ))
}

/// `P(head=.. | parents=..)` for the cell of `table` the query selects.
pub fn cell_label(structure: &NetworkStructure, table: &Cpt, query: &Query) -> String {
    let mut full = vec![0; structure.len()];
    for &(v, k) in query.targets().iter().chain(query.evidence()) {
        full[v.0] = k;
    }
    let part = |vars: &[crate::model::VarId]| {
        vars.iter()
            .map(|v| {
                let var = structure.variable(*v);
                format!("{}={}", var.name, var.domain[full[v.0]])
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    if table.parents().is_empty() {
        format!("P({})", part(table.head()))
    } else {
        format!("P({} | {})", part(table.head()), part(table.parents()))
    }
}

/// One line per table each step produced, showing the query's cell with
/// its reporting prior restored.
pub fn trace_lines(qbn: &QbnNetwork, query: &Query, result: &InferenceResult) -> Vec<String> {
    let s = qbn.structure();
    let vars = s.variables();
    let mut out = Vec::new();
    for (i, rec) in result.trace.iter().enumerate() {
        out.push(format!("step {}: {}", i + 1, rec.step.describe(s)));
        for t in &rec.outputs {
            let stat = restore_prior(cell_at(t, query, s.len()), report_prior(vars, qbn.priors(), t.head()));
            out.push(format!("  {} = {stat:.4}", cell_label(s, t, query)));
        }
    }
    if result.trace.is_empty() {
        out.push("stored cell, no transformation needed".into());
    }
    out
}

fn emit(out: &mut impl Write, line: &str) -> Result<()> {
    writeln!(out, "{line}")?;
    Ok(())
}

pub fn execute(cli: Cli, out: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Learn { network, data, out: path } => {
            let text = format::write_learned(&learn(&network, &data)?);
            match path {
                Some(p) => std::fs::write(p, text)?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Infer {
            source,
            query,
            trace,
            machine,
        } => {
            let qbn = load_model(&source)?;
            let q = format::parse_query(qbn.structure(), &query)?;
            let r = inference::infer(&qbn, &q)?;
            if trace {
                for l in trace_lines(&qbn, &q, &r) {
                    emit(out, &l)?;
                }
            }
            emit(out, &if machine { machine_line(r.stat)? } else { human_line(r.stat)? })?;
            if r.zero_denominator_terms > 0 {
                eprintln!("note: {} zero-count denominators were skipped", r.zero_denominator_terms);
            }
        }
        Command::Check {
            source,
            query,
            machine,
        } => {
            let data = source
                .data
                .clone()
                .ok_or_else(|| QbnError::Usage("check needs --data".into()))?;
            let qbn = load_model(&source)?;
            let s = qbn.structure();
            let q = format::parse_query(s, &query)?;
            let d = format::load_dataset(s, &data)?;
            let joint = oracle::build_joint(s, &d)?;
            let r = inference::infer(&qbn, &q)?;
            let exact = oracle::exact_beta(&joint, &q, true);
            let m = oracle::discrepancy(r.stat, exact)?;
            if machine {
                emit(out, &machine_line(r.stat)?)?;
                emit(out, &machine_line(exact)?)?;
                emit(
                    out,
                    &format!("{:.16e},{:.16e},{:.16e},{:.16e}", m.mean, m.alpha, m.omega, m.variance),
                )?;
            } else {
                emit(out, &format!("inferred {}", human_line(r.stat)?))?;
                emit(out, &format!("exact    {}", human_line(exact)?))?;
                emit(
                    out,
                    &format!(
                        "|dmean|={:.4} |dalpha|={:.4} |domega|={:.4} dvar={:.4}",
                        m.mean, m.alpha, m.omega, m.variance
                    ),
                )?;
            }
        }
        Command::Experiment {
            lengths,
            sizes,
            seeds,
            out: path,
        } => {
            if lengths.is_empty() || sizes.is_empty() || seeds == 0 || sizes.contains(&0) {
                return Err(QbnError::Usage("experiment grid needs lengths, positive sizes and seeds".into()));
            }
            let config = ExperimentConfig {
                lengths,
                sizes,
                seeds: (0..seeds).collect(),
            };
            let report = oracle::chain_experiment(&config)?;
            match path {
                Some(p) => {
                    report.write_csv(std::io::BufWriter::new(std::fs::File::create(p)?))?;
                    for a in &report.aggregates {
                        emit(
                            out,
                            &format!(
                                "length {} samples {}: median |dmean| {:.6} over {} runs",
                                a.chain_len, a.n_samples, a.median_abs_err, a.runs
                            ),
                        )?;
                    }
                }
                None => report.write_csv(&mut *out)?,
            }
        }
    }
    Ok(())
}

/// Exit status for an error: 2 for a malformed query, 1 otherwise.
pub fn exit_code(err: &QbnError) -> i32 {
    match err {
        QbnError::QueryParse { .. } => 2,
        QbnError::AbortedPlan { source, .. } => exit_code(source),
        _ => 1,
    }
}

/// Parse `args`, run, and return the process exit status.
pub fn run<I, T>(args: I, out: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
