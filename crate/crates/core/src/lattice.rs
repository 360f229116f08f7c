//! The SA lattice: edges `n — np` between superabundant numbers.
//!
//! A record with no SA quotient `n/q` is a *source*; one with no SA product
//! `np` is a *sink*. Products can leave the generated range, so every
//! question about them is answered against an explicit horizon: a product
//! above it is undecidable and the record is marked indeterminate rather
//! than guessed.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::hp::Approx;
use crate::magnitude::{compare_with_hint, LogMagnitude};
use crate::primes::PrimeTable;
use crate::record::SaRecord;
use crate::scn::{scn_encode, ScnVector};
use crate::signature::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("list is not contiguous from index 1: expected index {expected}, found {found}")]
    GapInList { expected: u64, found: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Regular,
    Source,
    Sink,
    SourceAndSink,
    /// No SA product found, but some product lies beyond the horizon.
    IndeterminateUp,
    /// Some quotient could not be decided. Never produced for a list that
    /// starts at 1, since every quotient is smaller than its record.
    IndeterminateDown,
}

impl Kind {
    pub fn is_source(self) -> bool {
        matches!(self, Kind::Source | Kind::SourceAndSink)
    }

    pub fn is_sink(self) -> bool {
        matches!(self, Kind::Sink | Kind::SourceAndSink)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Regular => "regular",
            Kind::Source => "source",
            Kind::Sink => "sink",
            Kind::SourceAndSink => "source-and-sink",
            Kind::IndeterminateUp => "indeterminate-up",
            Kind::IndeterminateDown => "indeterminate-down",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeClass {
    pub index: u64,
    pub kind: Kind,
    /// Prime indices `p` with `np` in the list.
    pub sa_successors: Vec<usize>,
    /// Prime indices `q` with `n/q` in the list.
    pub sa_predecessors: Vec<usize>,
    /// Prime indices whose product lies beyond the horizon.
    pub undecided_successors: Vec<usize>,
}

/// A gap-free SA list with signature lookup and a decidability horizon.
pub struct SaIndex<'a> {
    records: &'a [SaRecord],
    by_sig: FxHashMap<&'a Signature, usize>,
    horizon: LogMagnitude,
    table: Arc<PrimeTable>,
}

impl<'a> SaIndex<'a> {
    /// `complete_through` is `ln` of the bound up to which the list is known
    /// to hold every SA number; by default the last record.
    pub fn new(
        records: &'a [SaRecord],
        complete_through: Option<Approx>,
        table: Arc<PrimeTable>,
    ) -> Result<Self, LatticeError> {
        for (k, r) in records.iter().enumerate() {
            let expected = k as u64 + 1;
            if r.index != expected {
                return Err(LatticeError::GapInList {
                    expected,
                    found: r.index,
                });
            }
        }
        let by_sig = records
            .iter()
            .enumerate()
            .map(|(k, r)| (&r.signature, k))
            .collect();
        let horizon = match (complete_through, records.last()) {
            (Some(ln), _) => LogMagnitude::new(ln),
            (None, Some(r)) => r.magnitude.clone(),
            (None, None) => LogMagnitude::new(Approx::zero(table.bits())),
        };
        Ok(SaIndex {
            records,
            by_sig,
            horizon,
            table,
        })
    }

    pub fn records(&self) -> &'a [SaRecord] {
        self.records
    }

    pub fn horizon(&self) -> &LogMagnitude {
        &self.horizon
    }

    /// Index of the record with this signature.
    pub fn lookup(&self, sig: &Signature) -> Option<u64> {
        self.by_sig.get(sig).map(|&k| k as u64 + 1)
    }

    /// Is `sig` (with magnitude `ln`) certainly not above the horizon?
    fn decidable(&self, sig: &Signature, ln: &Approx) -> bool {
        match ln.try_cmp(self.horizon.ln()) {
            Some(Ordering::Greater) => false,
            Some(_) => true,
            None => match self.records.last() {
                // horizon is the last record: settle exactly
                Some(last) if last.magnitude == self.horizon => {
                    compare_with_hint(sig, &LogMagnitude::new(ln.clone()), &last.signature, &last.magnitude)
                        != Ordering::Greater
                }
                _ => false,
            },
        }
    }

    fn classify_one(&self, r: &SaRecord) -> LatticeClass {
        let sig = &r.signature;
        let preds: Vec<usize> = sig
            .predecessor_candidates()
            .into_iter()
            .filter(|&q| {
                let d = sig.divide_by_prime(q).expect("canonical divide");
                self.by_sig.contains_key(&d)
            })
            .collect();
        let ups = sig.successor_candidates();
        let t = self.table.ensure(sig.prime_count() + 1, &[]);
        let mut succ = Vec::new();
        let mut undecided = Vec::new();
        for p in ups {
            let m = sig.multiply_by_prime(p).expect("canonical multiply");
            if self.by_sig.contains_key(&m) {
                succ.push(p);
            } else if !self.decidable(&m, &r.magnitude.ln().add(t.ln(p))) {
                undecided.push(p);
            }
        }
        let source = preds.is_empty();
        let kind = if !succ.is_empty() {
            if source {
                Kind::Source
            } else {
                Kind::Regular
            }
        } else if undecided.is_empty() {
            if source {
                Kind::SourceAndSink
            } else {
                Kind::Sink
            }
        } else if source {
            Kind::Source
        } else {
            Kind::IndeterminateUp
        };
        LatticeClass {
            index: r.index,
            kind,
            sa_successors: succ,
            sa_predecessors: preds,
            undecided_successors: undecided,
        }
    }
}

/// Classification of every record, in index order.
pub fn classify(idx: &SaIndex<'_>) -> Vec<LatticeClass> {
    idx.records.par_iter().map(|r| idx.classify_one(r)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureResult {
    /// Indices reachable from 1 by `np` steps, ascending.
    pub reachable: Vec<u64>,
    /// The remaining indices, ascending.
    pub missing: Vec<u64>,
    pub first_missing: Option<u64>,
}

/// Everything reachable from 1 by multiplying by one prime at a time
/// without leaving the list.
pub fn conjectural_closure(idx: &SaIndex<'_>) -> ClosureResult {
    let n = idx.records.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    if n > 0 {
        seen[0] = true;
        queue.push_back(0);
    }
    while let Some(k) = queue.pop_front() {
        let sig = &idx.records[k].signature;
        for p in sig.successor_candidates() {
            let m = sig.multiply_by_prime(p).expect("canonical multiply");
            if let Some(&j) = idx.by_sig.get(&m) {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    let (reach, miss): (Vec<usize>, Vec<usize>) = (0..n).partition(|&k| seen[k]);
    let to_idx = |v: Vec<usize>| v.into_iter().map(|k| k as u64 + 1).collect::<Vec<_>>();
    let missing = to_idx(miss);
    ClosureResult {
        reachable: to_idx(reach),
        first_missing: missing.first().copied(),
        missing,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentReport {
    /// Components as ascending index lists, ordered by smallest member.
    pub components: Vec<Vec<u64>>,
    /// Records with a product beyond the horizon: their edges may leave the
    /// range, so connectivity here is a lower bound.
    pub boundary: Vec<u64>,
}

impl ComponentReport {
    /// Whether `index` is joined to 1 inside the range.
    pub fn connected_to_one(&self, index: u64) -> bool {
        self.components
            .first()
            .is_some_and(|c| c.first() == Some(&1) && c.binary_search(&index).is_ok())
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            // keep the smaller index as root
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }
}

/// Connected components of the undirected lattice inside the list.
pub fn connectivity(idx: &SaIndex<'_>, classes: &[LatticeClass]) -> ComponentReport {
    let n = idx.records.len();
    let mut dsu = Dsu((0..n).collect());
    for (k, c) in classes.iter().enumerate() {
        let sig = &idx.records[k].signature;
        for &p in &c.sa_successors {
            let m = sig.multiply_by_prime(p).expect("canonical multiply");
            let j = idx.by_sig[&m];
            dsu.union(k, j);
        }
    }
    let mut groups: HashMap<usize, Vec<u64>> = HashMap::new();
    for k in 0..n {
        let r = dsu.find(k);
        groups.entry(r).or_default().push(k as u64 + 1);
    }
    let mut components: Vec<Vec<u64>> = groups.into_values().collect();
    components.sort_by_key(|c| c[0]);
    let boundary = classes
        .iter()
        .filter(|c| !c.undecided_successors.is_empty())
        .map(|c| c.index)
        .collect();
    ComponentReport {
        components,
        boundary,
    }
}

/// Which half of the conjecture a record refutes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CounterType {
    /// No SA product (a sink).
    Np,
    /// No SA quotient (a source).
    Nq,
    /// Neither; would refute the conjecture's first part outright.
    Both,
}

impl CounterType {
    pub fn label(self) -> &'static str {
        match self {
            CounterType::Np => "np",
            CounterType::Nq => "n/q",
            CounterType::Both => "np+n/q",
        }
    }
}

impl fmt::Display for CounterType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One counterexample row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub index: u64,
    pub kind: CounterType,
    /// Ω(n).
    pub group: u64,
    /// `log₁₀ n` rounded half-up to two decimals, minimal digits.
    pub log10: String,
    pub scn: ScnVector,
}

/// `log₁₀ n` half-up to two decimals with trailing zeros dropped.
pub fn format_log10(m: &LogMagnitude, sig: &Signature, table: &PrimeTable) -> String {
    let mut hundredths = m.log10(table).round_decimal(2);
    let mut bits = table.bits() * 2;
    while hundredths.is_none() && bits <= crate::hp::MAX_BITS {
        let t = PrimeTable::new(bits);
        hundredths = crate::magnitude::log_magnitude(sig, &t).log10(&t).round_decimal(2);
        bits *= 2;
    }
    let h = hundredths.unwrap_or_else(|| BigInt::from((m.log10_f64() * 100.0 + 0.5).floor() as i64));
    let (int, frac) = h.div_mod_floor(&BigInt::from(100));
    let frac: u32 = frac.try_into().expect("remainder below 100");
    if frac == 0 {
        format!("{int}")
    } else if frac.is_multiple_of(10) {
        format!("{int}.{}", frac / 10)
    } else {
        format!("{int}.{frac:02}")
    }
}

/// Rows for every decidable source and sink except the number 1.
pub fn counterexample_report(idx: &SaIndex<'_>, classes: &[LatticeClass]) -> Vec<TableRow> {
    classes
        .iter()
        .filter(|c| c.index != 1)
        .filter_map(|c| {
            let kind = match c.kind {
                Kind::Sink => CounterType::Np,
                Kind::Source => CounterType::Nq,
                Kind::SourceAndSink => CounterType::Both,
                _ => return None,
            };
            let r = &idx.records[c.index as usize - 1];
            Some(TableRow {
                index: c.index,
                kind,
                group: r.signature.omega_total(),
                log10: format_log10(&r.magnitude, &r.signature, &idx.table),
                scn: scn_encode(&r.signature),
            })
        })
        .collect()
}
