//! Text formats: network structure files, learned-network files, CSV
//! datasets and the query grammar.
//!
//! A network file is line oriented:
//!
//! ```text
//! # comment
//! node FO : fo, not_fo
//! edge FO -> LO
//! ```
//!
//! A learned-network file adds one `prior` line per node and one `cell`
//! line per table cell, holding the raw counts:
//!
//! ```text
//! prior DO default
//! cell DO | FO=fo, BP=bp : do = 4, 0
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::error::{QbnError, Result};
use crate::learning::{init_priors, Dataset, Sample};
use crate::model::{index, BetaStat, NetworkStructure, PriorPolicy, QbnNetwork, Query, VarId, Variable};

fn parse_err(line: usize, msg: impl Into<String>) -> QbnError {
    QbnError::Parse { line, msg: msg.into() }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && !s.contains(|c: char| c.is_whitespace() || ":,|=()#".contains(c)) && s != "->"
}

struct Builder {
    variables: Vec<Variable>,
    edges: Vec<(VarId, VarId)>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            variables: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn var(&self, line: usize, name: &str) -> Result<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(VarId)
            .ok_or_else(|| parse_err(line, format!("unknown node `{name}`")))
    }

    /// Handle `node` and `edge` lines; returns false for any other keyword.
    fn line(&mut self, n: usize, keyword: &str, rest: &str) -> Result<bool> {
        match keyword {
            "node" => {
                let (name, domain) = rest
                    .split_once(':')
                    .ok_or_else(|| parse_err(n, "expected `node <NAME> : <v1>, <v2>, ...`"))?;
                let name = name.trim();
                if !valid_name(name) {
                    return Err(parse_err(n, format!("invalid node name `{name}`")));
                }
                if self.variables.iter().any(|v| v.name == name) {
                    return Err(parse_err(n, format!("duplicate node name `{name}`")));
                }
                let labels: Vec<String> = domain.split(',').map(|s| s.trim().to_string()).collect();
                if let Some(bad) = labels.iter().find(|l| !valid_name(l)) {
                    return Err(parse_err(n, format!("invalid value label `{bad}` for `{name}`")));
                }
                let v = Variable::new(VarId(self.variables.len()), name, labels).map_err(|e| parse_err(n, e.to_string()))?;
                self.variables.push(v);
                Ok(true)
            }
            "edge" => {
                let (p, c) = rest
                    .split_once("->")
                    .ok_or_else(|| parse_err(n, "expected `edge <PARENT> -> <CHILD>`"))?;
                let (p, c) = (self.var(n, p.trim())?, self.var(n, c.trim())?);
                if p == c {
                    return Err(parse_err(n, "self loop"));
                }
                self.edges.push((p, c));
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn finish(self) -> Result<NetworkStructure> {
        if self.variables.is_empty() {
            return Err(QbnError::Schema("network declares no nodes".into()));
        }
        NetworkStructure::new(self.variables, self.edges)
    }
}

/// Lines with comments stripped, numbered from 1, blanks skipped.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            return None;
        }
        let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        Some((i + 1, kw, rest.trim()))
    })
}

pub fn parse_network(text: &str) -> Result<NetworkStructure> {
    let mut b = Builder::new();
    for (n, kw, rest) in lines(text) {
        if !b.line(n, kw, rest)? {
            return Err(parse_err(n, format!("unknown keyword `{kw}`")));
        }
    }
    b.finish()
}

pub fn load_network(path: &Path) -> Result<NetworkStructure> {
    parse_network(&std::fs::read_to_string(path)?)
}

fn write_structure(out: &mut String, s: &NetworkStructure) {
    for v in s.variables() {
        let _ = writeln!(out, "node {} : {}", v.name, v.domain.join(", "));
    }
    for (p, c) in s.edges() {
        let _ = writeln!(out, "edge {} -> {}", s.variable(p).name, s.variable(c).name);
    }
}

/// Serialize a network structure in the network file format.
pub fn write_network(s: &NetworkStructure) -> String {
    let mut out = String::new();
    write_structure(&mut out, s);
    out
}

/// Serialize a learned network. Counts are written with the shortest
/// representation that reads back to the same `f64`.
pub fn write_learned(qbn: &QbnNetwork) -> String {
    let s = qbn.structure();
    let mut out = String::new();
    write_structure(&mut out, s);
    for v in s.variables() {
        let p = match qbn.prior(v.id) {
            PriorPolicy::UninformedDefault => "default".to_string(),
            PriorPolicy::UninformedCustom(b) => format!("uninformed {}, {}", b.alpha, b.omega),
            PriorPolicy::Informed(b) => format!("informed {}, {}", b.alpha, b.omega),
        };
        let _ = writeln!(out, "prior {} {p}", v.name);
    }
    for v in s.variables() {
        let t = qbn.table(v.id);
        for row in 0..t.rows() {
            let values = index::decode(row, t.parent_radix());
            let cond = t
                .parents()
                .iter()
                .zip(&values)
                .map(|(p, k)| format!("{}={}", s.variable(*p).name, s.variable(*p).domain[*k]))
                .collect::<Vec<_>>()
                .join(", ");
            for k in 0..t.head_card() {
                let c = t.cell(row, k).expect("in range");
                let sep = if cond.is_empty() { "" } else { " " };
                let _ = writeln!(out, "cell {} |{sep}{cond} : {} = {}, {}", v.name, v.domain[k], c.alpha, c.omega);
            }
        }
    }
    out
}

fn parse_pair(n: usize, s: &str) -> Result<BetaStat> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| parse_err(n, format!("expected `<alpha>, <omega>`, found `{s}`")))?;
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| parse_err(n, format!("`{}` is not a number", x.trim())))
    };
    BetaStat::new(num(a)?, num(b)?).map_err(|e| parse_err(n, e.to_string()))
}

/// Read a learned-network file written by [`write_learned`]. Cells that
/// are not listed hold zero counts.
pub fn parse_learned(text: &str) -> Result<QbnNetwork> {
    let mut b = Builder::new();
    let mut rest_lines = Vec::new();
    for (n, kw, rest) in lines(text) {
        if !b.line(n, kw, rest)? {
            rest_lines.push((n, kw, rest));
        }
    }
    let s = b.finish()?;
    let node = |n: usize, name: &str| {
        s.var_by_name(name)
            .ok_or_else(|| parse_err(n, format!("unknown node `{name}`")))
    };
    let mut priors = vec![None; s.len()];
    let mut cells = Vec::new();
    for (n, kw, rest) in rest_lines {
        match kw {
            "prior" => {
                let (name, spec) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                let v = node(n, name)?;
                let spec = spec.trim();
                let (kind, args) = spec.split_once(char::is_whitespace).unwrap_or((spec, ""));
                let p = match kind {
                    "default" => PriorPolicy::UninformedDefault,
                    "uninformed" => PriorPolicy::UninformedCustom(parse_pair(n, args)?),
                    "informed" => PriorPolicy::Informed(parse_pair(n, args)?),
                    other => return Err(parse_err(n, format!("unknown prior kind `{other}`"))),
                };
                if priors[v.0].replace(p).is_some() {
                    return Err(parse_err(n, format!("second prior for `{name}`")));
                }
            }
            "cell" => cells.push((n, rest)),
            other => return Err(parse_err(n, format!("unknown keyword `{other}`"))),
        }
    }
    let priors: Vec<PriorPolicy> = priors.into_iter().map(|p| p.unwrap_or(PriorPolicy::UninformedDefault)).collect();
    // informed priors are already part of the stored counts
    let zeroed: Vec<PriorPolicy> = priors
        .iter()
        .map(|p| match p {
            PriorPolicy::Informed(_) => PriorPolicy::UninformedDefault,
            other => *other,
        })
        .collect();
    let mut qbn = init_priors(&s, &zeroed)?;
    let mut seen = BTreeSet::new();
    for (n, rest) in cells {
        let (name, rest) = rest
            .split_once('|')
            .ok_or_else(|| parse_err(n, "expected `cell <NODE> | <parents> : <value> = <alpha>, <omega>`"))?;
        let v = node(n, name.trim())?;
        let (cond, rest) = rest.split_once(':').ok_or_else(|| parse_err(n, "missing `:`"))?;
        let (label, counts) = rest.split_once('=').ok_or_else(|| parse_err(n, "missing `=`"))?;
        let var = s.variable(v);
        let k = var
            .value_index(label.trim())
            .ok_or_else(|| parse_err(n, format!("`{}` is not a value of `{}`", label.trim(), var.name)))?;
        let parents = s.parents(v);
        let mut full = vec![usize::MAX; s.len()];
        for atom in cond.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            let (pn, pv) = atom
                .split_once('=')
                .ok_or_else(|| parse_err(n, format!("expected `<PARENT>=<value>`, found `{atom}`")))?;
            let p = node(n, pn.trim())?;
            if !parents.contains(&p) {
                return Err(parse_err(n, format!("`{}` is not a parent of `{}`", pn.trim(), var.name)));
            }
            full[p.0] = s
                .variable(p)
                .value_index(pv.trim())
                .ok_or_else(|| parse_err(n, format!("`{}` is not a value of `{}`", pv.trim(), pn.trim())))?;
        }
        if let Some(p) = parents.iter().find(|p| full[p.0] == usize::MAX) {
            return Err(parse_err(n, format!("parent `{}` is not assigned", s.variable(*p).name)));
        }
        full[v.0] = k;
        let t = &mut qbn.tables_mut()[v.0];
        let idx = t.index_of(&full);
        if !seen.insert((v, idx)) {
            return Err(parse_err(n, "cell listed twice"));
        }
        t.cells_mut()[idx] = parse_pair(n, counts)?;
    }
    QbnNetwork::from_parts(s, qbn.tables().to_vec(), priors)
}

pub fn load_learned(path: &Path) -> Result<QbnNetwork> {
    parse_learned(&std::fs::read_to_string(path)?)
}

/// Read a CSV dataset whose header is a permutation of the variable names.
pub fn read_dataset(structure: &NetworkStructure, input: impl Read) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    let mut column_var = Vec::with_capacity(header.len());
    for name in header.iter() {
        let v = structure
            .var_by_name(name)
            .ok_or_else(|| QbnError::Schema(format!("dataset column `{name}` is not a network variable")))?;
        if column_var.contains(&v) {
            return Err(QbnError::Schema(format!("dataset column `{name}` appears twice")));
        }
        column_var.push(v);
    }
    if column_var.len() != structure.len() {
        let missing: Vec<&str> = structure
            .variables()
            .iter()
            .filter(|v| !column_var.contains(&v.id))
            .map(|v| v.name.as_str())
            .collect();
        return Err(QbnError::Schema(format!("dataset lacks columns for {}", missing.join(", "))));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut x = vec![0; structure.len()];
        for (field, &v) in rec.iter().zip(&column_var) {
            let var = structure.variable(v);
            if field.is_empty() {
                return Err(QbnError::MalformedSample(format!("line {line}: missing value for `{}`", var.name)));
            }
            x[v.0] = var.value_index(field).ok_or_else(|| {
                QbnError::MalformedSample(format!("line {line}: `{field}` is not a value of `{}`", var.name))
            })?;
        }
        rows.push(Sample(x));
    }
    Ok(Dataset { rows, source: None })
}

pub fn load_dataset(structure: &NetworkStructure, path: &Path) -> Result<Dataset> {
    let mut d = read_dataset(structure, std::fs::File::open(path)?)?;
    d.source = Some(path.to_path_buf());
    Ok(d)
}

/// Write a dataset as CSV in variable order.
pub fn write_dataset(structure: &NetworkStructure, data: &Dataset, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(structure.variables().iter().map(|v| v.name.as_str()))?;
    for r in &data.rows {
        w.write_record(r.0.iter().zip(structure.variables()).map(|(&k, v)| v.domain[k].as_str()))?;
    }
    w.flush()?;
    Ok(())
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_whitespace() || "()|,=".contains(c) {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            word.push(c);
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// Parse `P(A=a, B=b | C=c)`; the evidence part is optional.
pub fn parse_query(structure: &NetworkStructure, text: &str) -> Result<Query> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let at = |pos: usize| tokens.get(pos).map(String::as_str).unwrap_or("<end of query>");
    let fail = |pos: usize, msg: &str| QbnError::QueryParse {
        token: at(pos).to_string(),
        msg: msg.to_string(),
    };
    let is_word = |t: &str| !"()|,=".contains(t) && t != "<end of query>";

    if at(pos) != "P" {
        return Err(fail(pos, "a query starts with `P(`"));
    }
    pos += 1;
    if at(pos) != "(" {
        return Err(fail(pos, "expected `(`"));
    }
    pos += 1;
    let mut targets = Vec::new();
    let mut evidence = Vec::new();
    let mut in_evidence = false;
    loop {
        let name_pos = pos;
        if !is_word(at(pos)) {
            return Err(fail(pos, "expected a variable name"));
        }
        pos += 1;
        if at(pos) != "=" {
            return Err(fail(pos, "expected `=`"));
        }
        pos += 1;
        if !is_word(at(pos)) {
            return Err(fail(pos, "expected a value label"));
        }
        let (name, label) = (at(name_pos), at(pos));
        let v = structure
            .var_by_name(name)
            .ok_or_else(|| QbnError::Schema(format!("unknown variable `{name}` in query")))?;
        let k = structure
            .variable(v)
            .value_index(label)
            .ok_or_else(|| QbnError::Schema(format!("`{label}` is not a value of `{name}`")))?;
        if in_evidence { &mut evidence } else { &mut targets }.push((v, k));
        pos += 1;
        match at(pos) {
            "," => pos += 1,
            "|" if !in_evidence => {
                in_evidence = true;
                pos += 1;
            }
            ")" => {
                pos += 1;
                break;
            }
            _ => return Err(fail(pos, "expected `,`, `|` or `)`")),
        }
    }
    if pos != tokens.len() {
        return Err(fail(pos, "unexpected text after the query"));
    }
    Query::new(structure, targets, evidence)
}
