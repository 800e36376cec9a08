//! Comma-separated text encodings for networks, weights and experiment
//! results.
//!
//! Canonical form: a header row, data rows sorted by id (or by
//! `(source, target)` for edges), reals written with 17 significant digits
//! in `%.17g` style, `\n` line endings and a trailing newline. Reading a
//! file written this way gives back bit-identical values.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use trustvote_core::network::validate_network;
use trustvote_core::simulation::SizeStats;
use trustvote_core::{ActiveSet, NodeId, TrustNetwork, WeightVector};

pub const NODES_HEADER: &str = "id,opinion";
pub const EDGES_HEADER: &str = "source,target,trust";
pub const WEIGHTS_HEADER: &str = "id,weight";
pub const RESULTS_HEADER: &str =
    "active_size,trials,mean_err_traditional,stderr_traditional,mean_err_weighted,stderr_weighted,stranded_fraction";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{file} line {line}: {msg}")]
    Parse { file: String, line: usize, msg: String },

    #[error("{}", .0.join("\n"))]
    Invalid(Vec<String>),

    #[error(transparent)]
    Core(#[from] trustvote_core::Error),
}

impl IoError {
    fn parse(file: &str, line: usize, msg: impl Into<String>) -> Self {
        IoError::Parse { file: file.to_string(), line, msg: msg.into() }
    }
}

/// `%.17g`: enough digits to round-trip any `f64`, trailing zeros dropped.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();

    let mut out = String::from(sign);
    if !(-4..17).contains(&exp) {
        let rest = digits[1..].trim_end_matches('0');
        out.push_str(&digits[..1]);
        if !rest.is_empty() {
            out.push('.');
            out.push_str(rest);
        }
        let _ = write!(out, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
        return out;
    }
    let (int_part, frac) = if exp >= 0 {
        let split = exp as usize + 1;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), "0".repeat((-exp - 1) as usize) + &digits)
    };
    out.push_str(&int_part);
    let frac = frac.trim_end_matches('0');
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    out
}

fn open(path: &Path) -> Result<BufReader<File>, IoError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// Data rows of a CSV with a fixed header: `(line number, fields)`. Blank
/// lines are skipped.
fn rows<R: BufRead>(reader: R, file: &str, header: &str) -> Result<Vec<(usize, Vec<String>)>, IoError> {
    let mut out = Vec::new();
    let mut saw_header = false;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| IoError::parse(file, line_no, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != header {
                return Err(IoError::parse(file, line_no, format!("expected header `{header}`, found `{line}`")));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        let want = header.split(',').count();
        if fields.len() != want {
            return Err(IoError::parse(file, line_no, format!("expected {want} fields, found {}", fields.len())));
        }
        out.push((line_no, fields));
    }
    if !saw_header {
        return Err(IoError::parse(file, 1, format!("missing header `{header}`")));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(file: &str, line: usize, name: &str, raw: &str) -> Result<T, IoError> {
    raw.parse().map_err(|_| IoError::parse(file, line, format!("cannot parse {name} `{raw}`")))
}

/// Parses node and edge files without checking network invariants beyond
/// what is needed to build the structure: node ids must be exactly
/// `0..n` and edge endpoints must name existing nodes.
pub fn read_network_unchecked<N: BufRead, E: BufRead>(
    nodes: N,
    edges: E,
    nodes_name: &str,
    edges_name: &str,
) -> Result<TrustNetwork, IoError> {
    let node_rows = rows(nodes, nodes_name, NODES_HEADER)?;
    let mut opinions: Vec<Option<f64>> = vec![None; node_rows.len()];
    let mut problems = Vec::new();
    for (line, f) in &node_rows {
        let id: usize = field(nodes_name, *line, "id", &f[0])?;
        let opinion: f64 = field(nodes_name, *line, "opinion", &f[1])?;
        match opinions.get_mut(id) {
            None => problems.push(format!("{nodes_name} line {line}: id {id} out of range for {} nodes", node_rows.len())),
            Some(Some(_)) => problems.push(format!("{nodes_name} line {line}: duplicate id {id}")),
            Some(slot) => *slot = Some(opinion),
        }
    }
    if !problems.is_empty() {
        return Err(IoError::Invalid(problems));
    }
    let opinions: Vec<f64> = opinions.into_iter().map(|o| o.expect("every id seen")).collect();
    let n = opinions.len();

    let mut triples = Vec::new();
    for (line, f) in rows(edges, edges_name, EDGES_HEADER)? {
        let s: usize = field(edges_name, line, "source", &f[0])?;
        let t: usize = field(edges_name, line, "target", &f[1])?;
        let trust: f64 = field(edges_name, line, "trust", &f[2])?;
        for (role, id) in [("source", s), ("target", t)] {
            if id >= n {
                problems.push(format!("{edges_name} line {line}: {role} {id} out of range for {n} nodes"));
            }
        }
        triples.push((s, t, trust));
    }
    if !problems.is_empty() {
        return Err(IoError::Invalid(problems));
    }
    Ok(TrustNetwork::from_parts_unchecked(opinions, triples))
}

/// Parses and validates; every violation is reported.
pub fn read_network<N: BufRead, E: BufRead>(
    nodes: N,
    edges: E,
    nodes_name: &str,
    edges_name: &str,
) -> Result<TrustNetwork, IoError> {
    let net = read_network_unchecked(nodes, edges, nodes_name, edges_name)?;
    let violations = validate_network(&net);
    if violations.is_empty() {
        Ok(net)
    } else {
        Err(IoError::Invalid(violations.iter().map(|v| v.to_string()).collect()))
    }
}

pub fn load_network_unchecked(nodes: &Path, edges: &Path) -> Result<TrustNetwork, IoError> {
    read_network_unchecked(open(nodes)?, open(edges)?, &nodes.display().to_string(), &edges.display().to_string())
}

/// Loads, validates and normalizes a network.
pub fn load_network(nodes: &Path, edges: &Path) -> Result<TrustNetwork, IoError> {
    read_network(open(nodes)?, open(edges)?, &nodes.display().to_string(), &edges.display().to_string())
}

pub fn write_network<N: Write, E: Write>(net: &TrustNetwork, mut nodes: N, mut edges: E) -> io::Result<()> {
    writeln!(nodes, "{NODES_HEADER}")?;
    for (i, &o) in net.opinions().iter().enumerate() {
        writeln!(nodes, "{i},{}", format_real(o))?;
    }
    writeln!(edges, "{EDGES_HEADER}")?;
    for e in net.edges() {
        writeln!(edges, "{},{},{}", e.source, e.target, format_real(e.raw_trust))?;
    }
    nodes.flush()?;
    edges.flush()
}

pub fn save_network(net: &TrustNetwork, nodes: &Path, edges: &Path) -> Result<(), IoError> {
    let (n, e) = (create(nodes)?, create(edges)?);
    write_network(net, n, e).map_err(io_err(nodes))
}

pub fn write_weights<W: Write>(weights: &WeightVector, mut out: W) -> io::Result<()> {
    writeln!(out, "{WEIGHTS_HEADER}")?;
    for (id, w) in weights.iter() {
        writeln!(out, "{id},{}", format_real(w))?;
    }
    out.flush()
}

/// Reads `(id, weight)` rows back; ids must be strictly increasing.
pub fn read_weights<R: BufRead>(reader: R, name: &str) -> Result<Vec<(NodeId, f64)>, IoError> {
    let mut out: Vec<(NodeId, f64)> = Vec::new();
    for (line, f) in rows(reader, name, WEIGHTS_HEADER)? {
        let id = NodeId(field(name, line, "id", &f[0])?);
        let w: f64 = field(name, line, "weight", &f[1])?;
        if out.last().is_some_and(|&(prev, _)| prev >= id) {
            return Err(IoError::parse(name, line, "ids must be strictly increasing"));
        }
        out.push((id, w));
    }
    Ok(out)
}

pub fn write_results<W: Write>(rows: &[SizeStats], mut out: W) -> io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.active_size,
            r.trials,
            format_real(r.mean_err_traditional),
            format_real(r.stderr_traditional),
            format_real(r.mean_err_weighted),
            format_real(r.stderr_weighted),
            format_real(r.stranded_fraction),
        )?;
    }
    out.flush()
}

pub fn read_results<R: BufRead>(reader: R, name: &str) -> Result<Vec<SizeStats>, IoError> {
    rows(reader, name, RESULTS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(SizeStats {
                active_size: field(name, line, "active_size", &f[0])?,
                trials: field(name, line, "trials", &f[1])?,
                mean_err_traditional: field(name, line, "mean_err_traditional", &f[2])?,
                stderr_traditional: field(name, line, "stderr_traditional", &f[3])?,
                mean_err_weighted: field(name, line, "mean_err_weighted", &f[4])?,
                stderr_weighted: field(name, line, "stderr_weighted", &f[5])?,
                stranded_fraction: field(name, line, "stranded_fraction", &f[6])?,
            })
        })
        .collect()
}

/// Comma-separated node ids, e.g. `2,3`. An empty list is allowed here;
/// [`ActiveSet::new`] rejects it.
pub fn parse_id_list(list: &str) -> Result<Vec<NodeId>, IoError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| field("--active", 1, "node id", s).map(NodeId))
        .collect()
}

/// One node id per line; blank lines and `#` comments are ignored.
pub fn read_active_file(path: &Path) -> Result<Vec<NodeId>, IoError> {
    let name = path.display().to_string();
    let mut ids = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            ids.push(NodeId(field(&name, i + 1, "node id", line)?));
        }
    }
    Ok(ids)
}

pub fn active_set(ids: Vec<NodeId>, n: usize) -> Result<ActiveSet, IoError> {
    Ok(ActiveSet::new(ids, n)?)
}

/// `key=value` pairs, one per line; blank lines and `#` comments ignored.
pub fn read_key_values(path: &Path) -> Result<Vec<(String, String)>, IoError> {
    let name = path.display().to_string();
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| IoError::parse(&name, i + 1, format!("expected key=value, found `{line}`")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
