//! `sa`: generate, classify and cross-check superabundant number lists.
//!
//! Exit codes: 0 success, 1 computational failure or disagreement,
//! 2 usage error (bad flags, unreadable or malformed input).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use superabundant::backbone::{
    generate_sa, BackboneGenerator, GenerateConfig, WindowConfig, WindowMode,
};
use superabundant::exhaustive::{enumerate_records, sieve_oracle, EnumConfig, SIEVE_MAX};
use superabundant::hp::{Approx, MAX_BITS};
use superabundant::io::{
    diff_lists, emit_checkpoint, emit_class_dump, emit_list, emit_row, export_table,
    format_sig12, ingest_reference, parse_checkpoint, parse_list, ListFile, ListHeader,
    RefFormat, TableFormat,
};
use superabundant::lattice::{
    classify, conjectural_closure, connectivity, counterexample_report, Kind, SaIndex,
};
use superabundant::{log_magnitude, parse_scn, scn_encode, Limit, PrimeTable, SaRecord, Signature};

#[derive(Parser)]
#[command(name = "sa", version, about = "Superabundant number lists and their lattice")]
struct Cli {
    /// Worker threads (0 = all cores); output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a list file of SA numbers.
    Generate(GenerateArgs),
    /// Classify sources and sinks and write the counterexample table.
    Classify(ClassifyArgs),
    /// Multiplicative closure from 1 and its first miss.
    Closure(ListArg),
    /// Connected components of the lattice within the list.
    Connect(ListArg),
    /// Convert between factorizations and SCN strings.
    Scn {
        #[command(subcommand)]
        op: ScnOp,
    },
    /// Compare two lists index by index.
    Verify(VerifyArgs),
    /// Abundancy records below N from a divisor-sum sieve.
    Sieve {
        #[arg(long)]
        n: u64,
    },
    /// Cross-check the engines against each other and the sieve.
    Selfcheck {
        /// Backbone vs exhaustive agreement is checked through 10^this.
        #[arg(long, default_value_t = 20.0)]
        max_log10: f64,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Engine {
    Exhaustive,
    Backbone,
}

#[derive(Clone, Copy, ValueEnum)]
enum Window {
    Certified,
    Radius,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    engine: Engine,
    /// Every SA number up to 10^X.
    #[arg(long, conflicts_with = "count", required_unless_present = "count")]
    max_log10: Option<f64>,
    /// The first N SA numbers.
    #[arg(long)]
    count: Option<u64>,
    /// Fixed-point precision of logarithms.
    #[arg(long, default_value_t = 256)]
    bits: u32,
    #[arg(long, value_enum, default_value_t = Window::Certified)]
    window: Window,
    #[arg(long, default_value_t = 4)]
    radius: u32,
    #[arg(long, default_value_t = 2)]
    escalation: u32,
    #[arg(long, default_value_t = 12)]
    radius_cap: u32,
    #[arg(long, default_value_t = 20_000_000)]
    max_heap: usize,
    #[arg(long, default_value_t = 200_000_000)]
    max_pops: u64,
    /// Output list file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a resumable checkpoint here after every batch (backbone only).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from this checkpoint; --out is cut back to it and extended (the limit may be raised).
    #[arg(long, requires = "out")]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct ListArg {
    #[arg(long)]
    list: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Latex,
    Tsv,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    list: PathBuf,
    #[arg(long, value_enum, default_value_t = Fmt::Csv)]
    format: Fmt,
    /// Counterexample table destination (default: standard output).
    #[arg(long)]
    table_out: Option<PathBuf>,
    /// Per-record classification dump.
    #[arg(long)]
    classes_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ScnOp {
    /// Factorization (`2^3 * 3 * 5 * 7`) or integer to SCN.
    Encode { value: String },
    /// SCN to factorization and log10.
    Decode { scn: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum RefFmt {
    Auto,
    Native,
    Factored,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    list: PathBuf,
    #[arg(long)]
    against: PathBuf,
    /// Format of the --against file.
    #[arg(long, value_enum, default_value_t = RefFmt::Auto)]
    format: RefFmt,
}

/// A failed command: message plus exit code.
struct Fail(u8, String);

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn compute(msg: impl Into<String>) -> Fail {
    Fail(1, msg.into())
}

type Res = Result<(), Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Res {
    fs::write(path, text).map_err(|e| compute(format!("{}: {e}", path.display())))
}

fn out_err(e: io::Error) -> Fail {
    compute(format!("write failed: {e}"))
}

fn load_list(path: &Path, table: &Arc<PrimeTable>) -> Result<ListFile, Fail> {
    let text = read(path)?;
    parse_list(&text, table).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(1);
    }
    let res = match cli.cmd {
        Cmd::Generate(a) => generate(a),
        Cmd::Classify(a) => classify_cmd(a),
        Cmd::Closure(a) => closure_cmd(a),
        Cmd::Connect(a) => connect_cmd(a),
        Cmd::Scn { op } => scn_cmd(op),
        Cmd::Verify(a) => verify_cmd(a),
        Cmd::Sieve { n } => sieve_cmd(n),
        Cmd::Selfcheck { max_log10 } => selfcheck(max_log10),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn config_header(a: &GenerateArgs) -> ListHeader {
    let mut h = ListHeader::new().with(
        "engine",
        match a.engine {
            Engine::Exhaustive => "exhaustive",
            Engine::Backbone => "backbone",
        },
    );
    match (a.max_log10, a.count) {
        (Some(b), _) => h.set("limit", format!("max-log10 {b}")),
        (_, Some(c)) => h.set("limit", format!("count {c}")),
        _ => {}
    }
    h.set("bits", a.bits);
    match a.engine {
        Engine::Exhaustive => {
            h.set("max-heap", a.max_heap);
            h.set("max-pops", a.max_pops);
        }
        Engine::Backbone => match a.window {
            Window::Certified => h.set("window", "certified"),
            Window::Radius => {
                h.set("window", "radius");
                h.set("radius", a.radius);
                h.set("escalation", a.escalation);
                h.set("radius-cap", a.radius_cap);
            }
        },
    }
    if let Some(b) = a.max_log10 {
        h.set("complete-through-log10", b);
    }
    h
}

fn generate(a: GenerateArgs) -> Res {
    if !(64..=MAX_BITS).contains(&a.bits) {
        return Err(usage(format!("--bits must be in 64..={MAX_BITS}")));
    }
    if a.max_log10.is_some_and(|b| !b.is_finite() || b < 0.0) {
        return Err(usage("--max-log10 must be a finite nonnegative number"));
    }
    if a.radius == 0 {
        return Err(usage("--radius must be at least 1"));
    }
    if a.engine == Engine::Exhaustive && (a.checkpoint.is_some() || a.resume.is_some()) {
        return Err(usage("checkpoints are only supported by the backbone engine"));
    }
    let limit = match (a.max_log10, a.count) {
        (Some(b), _) => Limit::MaxLog10(b),
        (_, Some(c)) => Limit::Count(c),
        _ => return Err(usage("one of --max-log10 or --count is required")),
    };
    let table = if a.bits == PrimeTable::global().bits() {
        PrimeTable::global()
    } else {
        Arc::new(PrimeTable::new(a.bits))
    };
    let header = config_header(&a);
    let started = Instant::now();
    let mut sink: Box<dyn Write> = match (&a.out, &a.resume) {
        (Some(p), None) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        )),
        (Some(p), Some(_)) => Box::new(io::BufWriter::new(
            fs::OpenOptions::new()
                .append(true)
                .open(p)
                .map_err(|e| usage(format!("{}: {e}", p.display())))?,
        )),
        (None, _) => Box::new(io::BufWriter::new(io::stdout().lock())),
    };
    let mut emitted = 0u64;
    let mut line = String::new();
    match a.engine {
        Engine::Exhaustive => {
            sink.write_all(emit_list(&header, &[]).as_bytes()).map_err(out_err)?;
            let cfg = EnumConfig {
                max_heap: a.max_heap,
                max_pops: a.max_pops,
            };
            let mut it = enumerate_records(limit, cfg, table);
            for r in &mut it {
                let r = r.map_err(|e| compute(e.to_string()))?;
                line.clear();
                emit_row(&mut line, &r);
                sink.write_all(line.as_bytes()).map_err(out_err)?;
                emitted += 1;
            }
            eprintln!(
                "exhaustive: {emitted} records, {} pops, {:.1?}",
                it.frontier().pops(),
                started.elapsed()
            );
        }
        Engine::Backbone => {
            let cfg = GenerateConfig {
                window: WindowConfig {
                    mode: match a.window {
                        Window::Certified => WindowMode::Certified,
                        Window::Radius => WindowMode::Radius,
                    },
                    radius: a.radius,
                    escalation: a.escalation,
                    radius_cap: a.radius_cap,
                    ..WindowConfig::default()
                },
                ..GenerateConfig::default()
            };
            let mut gen = match &a.resume {
                None => {
                    sink.write_all(emit_list(&header, &[]).as_bytes()).map_err(out_err)?;
                    generate_sa(limit, cfg, table)
                }
                Some(cp_path) => {
                    let out = a.out.as_ref().expect("clap requires --out");
                    resume(cp_path, out, &header, limit, cfg, table)?
                }
            };
            let mut last_cp = None;
            while let Some(r) = gen.next() {
                let r = r.map_err(|e| compute(e.to_string()))?;
                line.clear();
                emit_row(&mut line, &r);
                sink.write_all(line.as_bytes()).map_err(out_err)?;
                emitted += 1;
                if let (Some(path), Some(cp)) = (&a.checkpoint, gen.checkpoint()) {
                    if last_cp.as_ref() != Some(&cp.position) {
                        sink.flush().map_err(out_err)?;
                        let tmp = path.with_extension("tmp");
                        write_file(&tmp, &emit_checkpoint(&header, &cp))?;
                        fs::rename(&tmp, path).map_err(out_err)?;
                        last_cp = Some(cp.position);
                    }
                }
            }
            let rep = gen.report();
            eprintln!(
                "backbone: {emitted} records, {} intervals, {} candidates, max moves from chain {}, max radius {}, {:.1?}",
                rep.intervals,
                rep.candidates,
                rep.max_moves,
                rep.max_radius,
                started.elapsed()
            );
        }
    }
    sink.flush().map_err(out_err)?;
    Ok(())
}

/// Truncate `out` to the checkpoint's record count and rebuild the
/// generator at its chain position.
fn resume(
    cp_path: &Path,
    out: &Path,
    header: &ListHeader,
    limit: Limit,
    cfg: GenerateConfig,
    table: Arc<PrimeTable>,
) -> Result<BackboneGenerator, Fail> {
    let (cp_header, cp) =
        parse_checkpoint(&read(cp_path)?).map_err(|e| usage(format!("{}: {e}", cp_path.display())))?;
    // the limit may change between runs; everything else must match
    let fixed = |h: &ListHeader| {
        let mut e = h.entries.clone();
        e.retain(|(k, _)| k != "limit" && k != "complete-through-log10");
        e
    };
    if fixed(&cp_header) != fixed(header) {
        return Err(usage("checkpoint was written with a different configuration"));
    }
    let text = read(out)?;
    let mut kept = emit_list(header, &[]);
    let mut rows = 0u64;
    for l in text.lines().filter(|l| !l.starts_with('#')) {
        if rows == cp.emitted {
            break;
        }
        rows += 1;
        kept.push_str(l);
        kept.push('\n');
    }
    if rows < cp.emitted {
        return Err(compute(format!(
            "{} holds {rows} records but the checkpoint expects {}",
            out.display(),
            cp.emitted
        )));
    }
    write_file(out, &kept)?;
    eprintln!("resuming at chain position {} after {} records", cp.position, cp.emitted);
    BackboneGenerator::resume(&cp, limit, cfg, table).map_err(|e| compute(e.to_string()))
}

fn horizon(file: &ListFile, table: &PrimeTable) -> Option<Approx> {
    let b = file.header.complete_through_log10()?;
    let t = table.ensure(3, &[]);
    let ln10 = t.ln(1).add(t.ln(3));
    Some(Approx::from_f64(b, t.bits()).mul(&ln10))
}

fn load_index(path: &Path) -> Result<(ListFile, Arc<PrimeTable>), Fail> {
    let table = PrimeTable::global();
    let file = load_list(path, &table)?;
    if file.records.is_empty() {
        return Err(usage(format!("{}: list is empty", path.display())));
    }
    Ok((file, table))
}

fn index<'a>(file: &'a ListFile, table: &Arc<PrimeTable>) -> Result<SaIndex<'a>, Fail> {
    SaIndex::new(&file.records, horizon(file, table), Arc::clone(table))
        .map_err(|e| usage(e.to_string()))
}

fn classify_cmd(a: ClassifyArgs) -> Res {
    let (file, table) = load_index(&a.list)?;
    let idx = index(&file, &table)?;
    let classes = classify(&idx);
    let rows = counterexample_report(&idx, &classes);
    let count = |f: &dyn Fn(Kind) -> bool| classes.iter().filter(|c| c.index != 1 && f(c.kind)).count();
    let sources = count(&|k| k.is_source());
    let sinks = count(&|k| k.is_sink());
    let both = count(&|k| k == Kind::SourceAndSink);
    let ind = count(&|k| matches!(k, Kind::IndeterminateUp | Kind::IndeterminateDown));
    let mut out = io::stdout().lock();
    let w = |out: &mut io::StdoutLock, s: String| out.write_all(s.as_bytes()).map_err(out_err);
    w(&mut out, format!("records: {}\n", classes.len()))?;
    w(&mut out, format!("sources: {sources}\n"))?;
    w(&mut out, format!("sinks: {sinks}\n"))?;
    w(&mut out, format!("indeterminate: {ind}\n"))?;
    if both > 0 {
        eprintln!("warning: {both} records are both source and sink");
        w(&mut out, format!("source-and-sink: {both}\n"))?;
    }
    let fmt = match a.format {
        Fmt::Csv => TableFormat::Csv,
        Fmt::Latex => TableFormat::Latex,
        Fmt::Tsv => TableFormat::Tsv,
    };
    let table_text = export_table(&rows, fmt);
    match &a.table_out {
        Some(p) => write_file(p, &table_text)?,
        None => w(&mut out, table_text)?,
    }
    if let Some(p) = &a.classes_out {
        write_file(p, &emit_class_dump(&classes))?;
    }
    Ok(())
}

fn closure_cmd(a: ListArg) -> Res {
    let (file, table) = load_index(&a.list)?;
    let idx = index(&file, &table)?;
    let cl = conjectural_closure(&idx);
    println!("reachable: {}", cl.reachable.len());
    println!("missing: {}", cl.missing.len());
    match cl.first_missing {
        Some(i) => {
            let r = &file.records[i as usize - 1];
            println!("first missing index: {i}");
            println!("first missing SCN: {}", scn_encode(&r.signature));
            println!("first missing log10: {}", format_sig12(r.magnitude.log10_f64()));
        }
        None => println!("first missing index: none"),
    }
    Ok(())
}

fn connect_cmd(a: ListArg) -> Res {
    let (file, table) = load_index(&a.list)?;
    let idx = index(&file, &table)?;
    let classes = classify(&idx);
    let comp = connectivity(&idx, &classes);
    println!("components: {}", comp.components.len());
    let joined = file
        .records
        .iter()
        .filter(|r| comp.connected_to_one(r.index))
        .count();
    println!("connected to 1: {joined} of {}", file.records.len());
    println!("boundary records: {}", comp.boundary.len());
    let isolated: Vec<u64> = classes
        .iter()
        .filter(|c| c.index != 1 && c.kind == Kind::SourceAndSink)
        .map(|c| c.index)
        .collect();
    println!("records without any SA neighbor: {}", isolated.len());
    for i in &isolated {
        println!("  {i}");
    }
    if comp.components.len() > 1 {
        for c in comp.components.iter().skip(1).take(20) {
            println!("  component starting at {} ({} records)", c[0], c.len());
        }
    }
    Ok(())
}

fn parse_factorization(s: &str) -> Result<Signature, Fail> {
    if let Ok(n) = s.trim().parse::<u128>() {
        if n == 0 {
            return Err(usage("0 has no signature"));
        }
        return Signature::from_u128(n)
            .ok_or_else(|| usage(format!("{n} does not have nonincreasing exponents on consecutive primes")));
    }
    let text = format!("1: {s}");
    let f = ingest_reference(&text, RefFormat::Factored, &PrimeTable::global())
        .map_err(|e| usage(e.to_string()))?;
    Ok(f.records[0].signature.clone())
}

fn scn_cmd(op: ScnOp) -> Res {
    match op {
        ScnOp::Encode { value } => {
            let sig = parse_factorization(&value)?;
            println!("{}", scn_encode(&sig));
        }
        ScnOp::Decode { scn } => {
            let sig = parse_scn(&scn).map_err(|e| usage(e.to_string()))?;
            let m = log_magnitude(&sig, &PrimeTable::global());
            println!("{sig}");
            println!("log10 = {}", format_sig12(m.log10_f64()));
            if let Some(n) = sig.to_u128() {
                println!("n = {n}");
            }
        }
    }
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Res {
    let table = PrimeTable::global();
    let left = load_list(&a.list, &table)?;
    let fmt = match a.format {
        RefFmt::Auto => RefFormat::Auto,
        RefFmt::Native => RefFormat::Native,
        RefFmt::Factored => RefFormat::Factored,
    };
    let right = ingest_reference(&read(&a.against)?, fmt, &table)
        .map_err(|e| usage(format!("{}: {e}", a.against.display())))?;
    let d = diff_lists(&left.records, &right.records);
    for m in &d.mismatches {
        println!(
            "index {}: {:?} {} vs {}",
            m.index,
            m.kind,
            m.left.as_deref().unwrap_or("-"),
            m.right.as_deref().unwrap_or("-")
        );
    }
    println!("compared: {}", d.compared);
    println!("{} mismatches", d.mismatches.len());
    if d.is_clean() {
        Ok(())
    } else {
        Err(compute("lists disagree"))
    }
}

fn sieve_cmd(n: u64) -> Res {
    if n == 0 || n > SIEVE_MAX {
        return Err(usage(format!("--n must be in 1..={SIEVE_MAX}")));
    }
    let recs = sieve_oracle(n).map_err(|e| compute(e.to_string()))?;
    let mut out = io::BufWriter::new(io::stdout().lock());
    for (k, (m, s)) in recs.iter().enumerate() {
        writeln!(out, "{}\t{m}\t{s}", k + 1).map_err(out_err)?;
    }
    out.flush().map_err(out_err)
}

fn check(name: &str, ok: bool, detail: String, failures: &mut u32) {
    eprintln!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        *failures += 1;
    }
}

fn selfcheck(max_log10: f64) -> Res {
    if !(0.0..=60.0).contains(&max_log10) {
        return Err(usage("--max-log10 must be in 0..=60 for the exhaustive engine"));
    }
    let table = PrimeTable::global();
    let collect = |it: &mut dyn Iterator<Item = Result<SaRecord, superabundant::GenError>>| {
        it.collect::<Result<Vec<_>, _>>().map_err(|e| compute(e.to_string()))
    };
    let mut failures = 0;

    let sieve = sieve_oracle(1_000_000).map_err(|e| compute(e.to_string()))?;
    let ex6 = collect(&mut enumerate_records(Limit::MaxLog10(6.0), EnumConfig::default(), Arc::clone(&table)))?;
    let same = ex6.len() == sieve.len()
        && ex6
            .iter()
            .zip(&sieve)
            .all(|(r, &(m, _))| r.signature.to_u128() == Some(m as u128));
    check("sieve vs exhaustive to 10^6", same, format!("{} records", sieve.len()), &mut failures);

    let ex = collect(&mut enumerate_records(
        Limit::MaxLog10(max_log10),
        EnumConfig::default(),
        Arc::clone(&table),
    ))?;
    let bb = collect(&mut generate_sa(
        Limit::MaxLog10(max_log10),
        GenerateConfig::default(),
        Arc::clone(&table),
    ))?;
    let d = diff_lists(&ex, &bb);
    check(
        &format!("exhaustive vs backbone to 10^{max_log10}"),
        d.is_clean() && ex.len() == bb.len(),
        format!("{} vs {} records, {} mismatches", ex.len(), bb.len(), d.mismatches.len()),
        &mut failures,
    );

    let radius = GenerateConfig {
        window: WindowConfig {
            mode: WindowMode::Radius,
            ..WindowConfig::default()
        },
        ..GenerateConfig::default()
    };
    let rb = collect(&mut generate_sa(Limit::MaxLog10(max_log10), radius, Arc::clone(&table)))?;
    let d = diff_lists(&bb, &rb);
    check(
        "certified vs radius window",
        d.is_clean() && bb.len() == rb.len(),
        format!("{} mismatches", d.mismatches.len()),
        &mut failures,
    );

    if failures == 0 {
        println!("selfcheck: all checks passed");
        Ok(())
    } else {
        Err(compute(format!("{failures} selfcheck failures")))
    }
}
