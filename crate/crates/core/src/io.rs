//! Text formats: SA list files, checkpoints, reference ingestion and
//! table export.
//!
//! # List file
//!
//! ```text
//! # format: sa-list 1
//! # engine: backbone
//! # limit: max-log10 2500
//! # complete-through-log10: 2500
//! 1	0	{}
//! 2	0.301029995664	{1}
//! 3	0.602059991328	{0,1}
//! ```
//!
//! Header lines are `# key: value`; the first must name the format. Rows are
//! `index TAB log₁₀ n TAB SCN` in ascending index order. The log₁₀ column
//! holds 12 significant digits and is only a checksum: on load every
//! magnitude is recomputed from the SCN and compared to it.
//!
//! # Factored reference format
//!
//! One record per line, `index: factor (* factor)*` where a factor is
//! `p` or `p^e` for a prime `p`; the number 1 is written `1`. Blank lines
//! and lines starting with `#` are ignored.
//!
//! ```text
//! 15: 2^3 * 3 * 5 * 7
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::backbone::{self, Checkpoint, DiffReport};
use crate::lattice::{LatticeClass, TableRow};
use crate::primes::PrimeTable;
use crate::record::SaRecord;
use crate::scn::{parse_scn, scn_encode};
use crate::signature::Signature;

pub const LIST_FORMAT: &str = "sa-list 1";
pub const CHECKPOINT_FORMAT: &str = "sa-checkpoint 1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: stored log10 {stored} disagrees with recomputed {computed}")]
    ChecksumMismatch {
        line: usize,
        stored: f64,
        computed: f64,
    },
    #[error("line {line}: exponents are not nonincreasing in {text:?}")]
    NonCanonicalSignature { line: usize, text: String },
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Header block of a list file. `entries` keeps every `key: value` pair
/// other than the format line, in file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ListHeader {
    pub entries: Vec<(String, String)>,
}

impl ListHeader {
    pub fn new() -> Self {
        ListHeader::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// The bound through which the list holds every SA number, if known.
    pub fn complete_through_log10(&self) -> Option<f64> {
        self.get("complete-through-log10")?.parse().ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ListFile {
    pub header: ListHeader,
    pub records: Vec<SaRecord>,
}

/// `v` with 12 significant digits; `0` for zero.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let digits = v.abs().log10().floor() as i32 + 1;
    let decimals = (12 - digits).max(0) as usize;
    format!("{v:.decimals$}")
}

fn write_header(out: &mut String, format: &str, header: &ListHeader) {
    let _ = writeln!(out, "# format: {format}");
    for (k, v) in &header.entries {
        let _ = writeln!(out, "# {k}: {v}");
    }
}

pub fn emit_list(header: &ListHeader, records: &[SaRecord]) -> String {
    let mut out = String::new();
    write_header(&mut out, LIST_FORMAT, header);
    for r in records {
        emit_row(&mut out, r);
    }
    out
}

/// One body row, newline included.
pub fn emit_row(out: &mut String, r: &SaRecord) {
    let _ = writeln!(
        out,
        "{}\t{}\t{}",
        r.index,
        format_sig12(r.magnitude.log10_f64()),
        scn_encode(&r.signature)
    );
}

fn split_header(line: &str) -> Option<(&str, &str)> {
    let body = line.strip_prefix('#')?.trim();
    let (k, v) = body.split_once(':')?;
    Some((k.trim(), v.trim()))
}

/// Header lines at the top of `text`; returns the header, the format name
/// and the number of lines consumed.
fn read_header(text: &str) -> (ListHeader, Option<String>, usize) {
    let mut header = ListHeader::new();
    let mut format = None;
    let mut used = 0;
    for line in text.lines() {
        if !line.starts_with('#') {
            break;
        }
        used += 1;
        if let Some((k, v)) = split_header(line) {
            if k == "format" && format.is_none() {
                format = Some(v.to_string());
            } else {
                header.set(k, v);
            }
        }
    }
    (header, format, used)
}

fn build_records(
    rows: Vec<(usize, u64, Signature, Option<f64>)>,
    table: &Arc<PrimeTable>,
) -> Result<Vec<SaRecord>, IoError> {
    rows.into_par_iter()
        .map(|(line, index, signature, stored)| {
            let (magnitude, abundancy) = backbone::recompute(&signature, table);
            if let Some(stored) = stored {
                let computed = magnitude.log10_f64();
                if (stored - computed).abs() > 1e-9 * computed.abs().max(1.0) {
                    return Err(IoError::ChecksumMismatch {
                        line,
                        stored,
                        computed,
                    });
                }
            }
            Ok(SaRecord {
                index,
                signature,
                abundancy,
                magnitude,
            })
        })
        .collect()
}

fn check_order(rows: &[(usize, u64, Signature, Option<f64>)]) -> Result<(), IoError> {
    for w in rows.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(parse_err(
                w[1].0,
                format!("index {} does not follow {}", w[1].1, w[0].1),
            ));
        }
    }
    Ok(())
}

fn parse_index(line: usize, s: &str) -> Result<u64, IoError> {
    match s.parse::<u64>() {
        Ok(i) if i >= 1 && !s.starts_with('+') => Ok(i),
        _ => Err(parse_err(line, format!("bad index {s:?}"))),
    }
}

/// Parse a native list file, recomputing every magnitude.
pub fn parse_list(text: &str, table: &Arc<PrimeTable>) -> Result<ListFile, IoError> {
    let (header, format, skip) = read_header(text);
    match format.as_deref() {
        Some(LIST_FORMAT) => {}
        Some(f) => return Err(parse_err(1, format!("unsupported format {f:?}"))),
        None => return Err(parse_err(1, "missing '# format:' header line")),
    }
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate().skip(skip) {
        let ln = k + 1;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(parse_err(ln, format!("expected 3 tab-separated fields, got {}", cols.len())));
        }
        let index = parse_index(ln, cols[0])?;
        let stored: f64 = cols[1]
            .parse()
            .map_err(|_| parse_err(ln, format!("bad log10 {:?}", cols[1])))?;
        let sig = parse_scn(cols[2]).map_err(|e| parse_err(ln, e.to_string()))?;
        rows.push((ln, index, sig, Some(stored)));
    }
    check_order(&rows)?;
    Ok(ListFile {
        header,
        records: build_records(rows, table)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefFormat {
    /// Native if the first header line names the list format.
    Auto,
    Native,
    Factored,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// 1-based index of prime `p`.
fn prime_index(p: u64) -> usize {
    let mut n = 64;
    loop {
        let ps = crate::primes::first_primes(n);
        if *ps.last().unwrap() >= p {
            return ps.binary_search(&p).expect("p is prime") + 1;
        }
        n *= 2;
    }
}

fn parse_factored_line(ln: usize, line: &str) -> Result<(u64, Signature), IoError> {
    let (idx, rest) = line
        .split_once(':')
        .ok_or_else(|| parse_err(ln, "expected 'index: factorization'"))?;
    let index = parse_index(ln, idx.trim())?;
    let rest = rest.trim();
    if rest == "1" {
        return Ok((index, Signature::one()));
    }
    let mut exps: Vec<u32> = Vec::new();
    for f in rest.split('*') {
        let f = f.trim();
        let (p, e) = match f.split_once('^') {
            Some((p, e)) => (p.trim(), e.trim()),
            None => (f, "1"),
        };
        let p: u64 = p
            .parse()
            .map_err(|_| parse_err(ln, format!("bad factor {f:?}")))?;
        let e: u32 = e
            .parse()
            .ok()
            .filter(|&e| e >= 1)
            .ok_or_else(|| parse_err(ln, format!("bad exponent in {f:?}")))?;
        if !is_prime(p) {
            return Err(parse_err(ln, format!("{p} is not prime")));
        }
        let i = prime_index(p);
        if exps.len() < i {
            exps.resize(i, 0);
        }
        if exps[i - 1] != 0 {
            return Err(parse_err(ln, format!("prime {p} repeated")));
        }
        exps[i - 1] = e;
    }
    let sig = Signature::from_exponents(&exps).map_err(|_| IoError::NonCanonicalSignature {
        line: ln,
        text: rest.to_string(),
    })?;
    Ok((index, sig))
}

/// Load an external reference list; indices are kept as given.
pub fn ingest_reference(
    text: &str,
    format: RefFormat,
    table: &Arc<PrimeTable>,
) -> Result<ListFile, IoError> {
    let native = match format {
        RefFormat::Native => true,
        RefFormat::Factored => false,
        RefFormat::Auto => text.lines().next().and_then(split_header).map(|(k, _)| k) == Some("format"),
    };
    if native {
        return parse_list(text, table);
    }
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (index, sig) = parse_factored_line(k + 1, line)?;
        rows.push((k + 1, index, sig, None));
    }
    check_order(&rows)?;
    Ok(ListFile {
        header: ListHeader::new().with("source", "factored reference"),
        records: build_records(rows, table)?,
    })
}

/// Index-aligned comparison of two lists; see [`backbone::crosscheck`].
pub fn diff_lists(a: &[SaRecord], b: &[SaRecord]) -> DiffReport {
    backbone::crosscheck(a, b)
}

pub fn emit_checkpoint(header: &ListHeader, cp: &Checkpoint) -> String {
    let mut out = String::new();
    write_header(&mut out, CHECKPOINT_FORMAT, header);
    let _ = writeln!(out, "# position: {}", cp.position);
    let _ = writeln!(out, "# emitted: {}", cp.emitted);
    let _ = writeln!(out, "# radius: {}", cp.radius);
    let _ = writeln!(out, "# record: {}", scn_encode(&cp.record));
    out
}

pub fn parse_checkpoint(text: &str) -> Result<(ListHeader, Checkpoint), IoError> {
    let (mut header, format, _) = read_header(text);
    if format.as_deref() != Some(CHECKPOINT_FORMAT) {
        return Err(parse_err(1, "not a checkpoint file"));
    }
    let mut take = |key: &str| -> Result<String, IoError> {
        let v = header
            .get(key)
            .ok_or_else(|| parse_err(1, format!("checkpoint lacks '{key}'")))?
            .to_string();
        header.entries.retain(|(k, _)| k != key);
        Ok(v)
    };
    let num = |v: String| v.parse::<u64>().map_err(|_| parse_err(1, format!("bad number {v:?}")));
    let cp = Checkpoint {
        position: num(take("position")?)?,
        emitted: num(take("emitted")?)?,
        radius: num(take("radius")?)? as u32,
        record: parse_scn(&take("record")?).map_err(|e| parse_err(1, e.to_string()))?,
    };
    Ok((header, cp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Latex,
    Tsv,
}

const COLUMNS: [&str; 5] = ["Index", "Type", "Group", "log10 n", "SCN Representation"];

const LATEX_HEAD: &str = "\\begin{longtable}{r|c|r|r|l}\\hline\n\
\\textbf{Index}&\\textbf{Type}&\\textbf{Group}&$\\boldsymbol{\\log_{10} n}$&\\textbf{SCN Representation}\\\\\\hline\\hline\\endhead\n";

fn row_cells(r: &TableRow) -> [String; 5] {
    [
        r.index.to_string(),
        r.kind.label().to_string(),
        r.group.to_string(),
        r.log10.clone(),
        r.scn.to_string(),
    ]
}

/// Counterexample table, rows ordered by index.
pub fn export_table(rows: &[TableRow], format: TableFormat) -> String {
    let mut rows: Vec<&TableRow> = rows.iter().collect();
    rows.sort_by_key(|r| r.index);
    match format {
        TableFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .quote_style(csv::QuoteStyle::Necessary)
                .from_writer(Vec::new());
            w.write_record(COLUMNS).expect("in-memory write");
            for r in rows {
                w.write_record(row_cells(r)).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
        }
        TableFormat::Tsv => {
            let mut out = COLUMNS.join("\t");
            out.push('\n');
            for r in rows {
                out.push_str(&row_cells(r).join("\t"));
                out.push('\n');
            }
            out
        }
        TableFormat::Latex => {
            let mut out = LATEX_HEAD.to_string();
            for r in rows {
                let ty = format!("${}$", r.kind.label());
                let scn = r.scn.to_string().replace('{', "\\{").replace('}', "\\}");
                let _ = writeln!(out, "{}&{}&{}&{}&{}\\\\", r.index, ty, r.group, r.log10, scn);
            }
            out.push_str("\\end{longtable}\n");
            out
        }
    }
}

fn join(v: &[usize]) -> String {
    if v.is_empty() {
        "-".to_string()
    } else {
        v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Per-record classification dump: index, kind, and the prime indices of
/// SA products, SA quotients and undecided products.
pub fn emit_class_dump(classes: &[LatticeClass]) -> String {
    let mut out = String::from("index\tkind\tsa_products\tsa_quotients\tundecided_products\n");
    for c in classes {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            c.index,
            c.kind,
            join(&c.sa_successors),
            join(&c.sa_predecessors),
            join(&c.undecided_successors)
        );
    }
    out
}
