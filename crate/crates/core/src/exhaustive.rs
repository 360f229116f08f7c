//! Complete SA generation at small scale.
//!
//! Every number with nonincreasing exponents is popped from a min-heap in
//! increasing order; a popped number is superabundant exactly when its
//! abundancy beats every earlier one. Rearranging exponents onto the
//! smallest primes in decreasing order only shrinks `n` and keeps σ(n)/n,
//! so these numbers are enough to decide every record.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rustc_hash::FxHashSet;

use crate::abundancy::{compare_ln_abundancy, Abundancy};
use crate::error::GenError;
use crate::hp::Approx;
use crate::magnitude::{exact_compare_magnitude, LogMagnitude};
use crate::primes::{PrimeTable, Tables};
use crate::record::{self, Limit, SaRecord};
use crate::signature::Signature;

/// Hard ceilings for a run; exceeding one is an error, never a truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    pub max_heap: usize,
    pub max_pops: u64,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            max_heap: 20_000_000,
            max_pops: 200_000_000,
        }
    }
}

struct Node {
    /// `ln_n` rounded, for cheap heap ordering away from ties.
    key: f64,
    sig: Signature,
    ln_n: Approx,
    ln_a: Approx,
}

impl Node {
    fn new(sig: Signature, ln_n: Approx, ln_a: Approx) -> Self {
        Node {
            key: ln_n.to_f64(),
            sig,
            ln_n,
            ln_a,
        }
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.sig == other.sig
    }
}

impl Eq for Node {}

impl Ord for Node {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        let gap = self.key - other.key;
        if gap.abs() > 1e-9 * self.key.abs().max(1.0) {
            return other.key.total_cmp(&self.key);
        }
        let o = match self.ln_n.try_cmp(&other.ln_n) {
            Some(o) => o,
            None => {
                let o = exact_compare_magnitude(&self.sig, &other.sig);
                // distinct signatures are distinct integers
                assert!(
                    o != Ordering::Equal || self.sig == other.sig,
                    "distinct signatures compared equal"
                );
                o
            }
        };
        o.reverse()
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A signature popped from the frontier, with its logarithms.
#[derive(Clone, Debug)]
pub struct Popped {
    pub signature: Signature,
    pub magnitude: LogMagnitude,
    pub ln_abundancy: Approx,
}

/// Min-heap over canonical signatures with duplicate suppression.
///
/// `seen` holds exactly the signatures currently in the heap: every parent
/// of `x` is smaller than `x`, so nothing can push `x` after it is popped.
pub struct EnumerationFrontier {
    heap: BinaryHeap<Node>,
    seen: FxHashSet<Signature>,
    table: Arc<PrimeTable>,
    tables: Arc<Tables>,
    pops: u64,
    cfg: EnumConfig,
}

impl EnumerationFrontier {
    pub fn new(table: Arc<PrimeTable>, cfg: EnumConfig) -> Self {
        let bits = table.bits();
        let tables = table.ensure(8, &[8]);
        let mut heap = BinaryHeap::new();
        let mut seen = FxHashSet::default();
        seen.insert(Signature::one());
        heap.push(Node::new(Signature::one(), Approx::zero(bits), Approx::zero(bits)));
        EnumerationFrontier {
            heap,
            seen,
            table,
            tables,
            pops: 0,
            cfg,
        }
    }

    pub fn pops(&self) -> u64 {
        self.pops
    }

    pub fn heap_len(&self) -> usize {
        self.heap.len()
    }

    fn ensure_for(&mut self, sig: &Signature) {
        let r = sig.prime_count();
        let top = sig.levels().len();
        let fits = self.tables.prime_count() > r
            && (1..=top + 1).all(|k| self.tables.level_len(k) > sig.level(k) as usize);
        if !fits {
            let mut need: Vec<usize> = sig.levels().iter().map(|&c| c as usize + 1).collect();
            need.push(1);
            self.tables = self.table.ensure(r + 1, &need);
        }
    }

    /// Next signature in increasing order of the represented integer.
    pub fn pop(&mut self) -> Result<Popped, GenError> {
        if self.pops >= self.cfg.max_pops {
            return Err(GenError::ResourceBudgetExceeded(format!(
                "pop ceiling {} reached",
                self.cfg.max_pops
            )));
        }
        let node = self.heap.pop().expect("frontier is never empty");
        self.seen.remove(&node.sig);
        self.pops += 1;
        self.ensure_for(&node.sig);
        for i in node.sig.successor_candidates() {
            let e = node.sig.exponent(i) as usize;
            let child = node
                .sig
                .multiply_by_prime(i)
                .expect("successor candidates are canonical");
            if self.seen.contains(&child) {
                continue;
            }
            let ln_n = node.ln_n.add(self.tables.ln(i));
            let ln_a = node.ln_a.add(self.tables.step(e + 1, i));
            self.seen.insert(child.clone());
            self.heap.push(Node::new(child, ln_n, ln_a));
        }
        if self.heap.len() > self.cfg.max_heap {
            return Err(GenError::ResourceBudgetExceeded(format!(
                "heap ceiling {} reached",
                self.cfg.max_heap
            )));
        }
        Ok(Popped {
            signature: node.sig,
            magnitude: LogMagnitude::new(node.ln_n),
            ln_abundancy: node.ln_a,
        })
    }
}

/// Stream of SA records in order, produced by [`enumerate_records`].
pub struct Exhaustive {
    frontier: EnumerationFrontier,
    best: Option<(Signature, Approx)>,
    next_index: u64,
    limit: Limit,
    ln_bound: Option<Approx>,
    done: bool,
}

impl Exhaustive {
    pub fn frontier(&self) -> &EnumerationFrontier {
        &self.frontier
    }
}

pub fn enumerate_records(limit: Limit, cfg: EnumConfig, table: Arc<PrimeTable>) -> Exhaustive {
    let t = table.ensure(3, &[]);
    let ln_bound = limit.ln_bound(&t);
    Exhaustive {
        frontier: EnumerationFrontier::new(table, cfg),
        best: None,
        next_index: 1,
        limit,
        ln_bound,
        done: false,
    }
}

impl Iterator for Exhaustive {
    type Item = Result<SaRecord, GenError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if let Limit::Count(c) = self.limit {
            if self.next_index > c {
                self.done = true;
                return None;
            }
        }
        loop {
            let p = match self.frontier.pop() {
                Ok(p) => p,
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            };
            if let Some(bound) = &self.ln_bound {
                if !record::within(p.magnitude.ln(), bound) {
                    self.done = true;
                    return None;
                }
            }
            let beats = match &self.best {
                None => true,
                Some((s, la)) => {
                    compare_ln_abundancy(&p.signature, &p.ln_abundancy, s, la)
                        == Ordering::Greater
                }
            };
            if beats {
                self.best = Some((p.signature.clone(), p.ln_abundancy.clone()));
                let rec = SaRecord {
                    index: self.next_index,
                    abundancy: Abundancy::from_parts(p.signature.clone(), p.ln_abundancy),
                    signature: p.signature,
                    magnitude: p.magnitude,
                };
                self.next_index += 1;
                return Some(Ok(rec));
            }
        }
    }
}

/// Largest `N` accepted by [`sieve_oracle`].
pub const SIEVE_MAX: u64 = 100_000_000;

/// Record-setters of σ(m)/m over `1..=n` as `(m, σ(m))`, from a divisor-sum
/// sieve and exact rational comparison.
pub fn sieve_oracle(n: u64) -> Result<Vec<(u64, u64)>, GenError> {
    if n > SIEVE_MAX {
        return Err(GenError::ResourceBudgetExceeded(format!(
            "sieve bound {n} exceeds {SIEVE_MAX}"
        )));
    }
    let n = n as usize;
    let mut sigma = vec![0u64; n + 1];
    for d in 1..=n {
        let mut m = d;
        while m <= n {
            sigma[m] += d as u64;
            m += d;
        }
    }
    let mut out: Vec<(u64, u64)> = Vec::new();
    for (m, &s) in sigma.iter().enumerate().skip(1) {
        let m = m as u64;
        let beats = match out.last() {
            None => true,
            // s/m > bs/bm
            Some(&(bm, bs)) => (s as u128) * (bm as u128) > (bs as u128) * (m as u128),
        };
        if beats {
            out.push((m, s));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(limit: Limit) -> Vec<u128> {
        enumerate_records(limit, EnumConfig::default(), PrimeTable::global())
            .map(|r| r.unwrap().signature.to_u128().unwrap())
            .collect()
    }

    #[test]
    fn first_ten() {
        assert_eq!(
            values(Limit::Count(10)),
            vec![1, 2, 4, 6, 12, 24, 36, 48, 60, 120]
        );
    }

    #[test]
    fn zero_bound_gives_one() {
        assert_eq!(values(Limit::MaxLog10(0.0)), vec![1]);
    }

    #[test]
    fn fifteenth_is_840() {
        let recs: Vec<SaRecord> =
            enumerate_records(Limit::Count(15), EnumConfig::default(), PrimeTable::global())
                .map(Result::unwrap)
                .collect();
        let last = recs.last().unwrap();
        assert_eq!(last.index, 15);
        assert_eq!(last.signature.to_u128(), Some(840));
        assert_eq!(crate::scn::scn_encode(&last.signature).to_string(), "{4,0,1}");
    }

    #[test]
    fn sieve_small() {
        let r: Vec<u64> = sieve_oracle(12).unwrap().iter().map(|x| x.0).collect();
        assert_eq!(r, vec![1, 2, 4, 6, 12]);
        assert_eq!(sieve_oracle(1).unwrap(), vec![(1, 1)]);
        assert!(sieve_oracle(SIEVE_MAX + 1).is_err());
    }

    #[test]
    fn pop_ceiling_is_loud() {
        let cfg = EnumConfig {
            max_heap: 1000,
            max_pops: 5,
        };
        let res: Result<Vec<_>, _> =
            enumerate_records(Limit::Count(100), cfg, PrimeTable::global()).collect();
        assert!(matches!(res, Err(GenError::ResourceBudgetExceeded(_))));
    }

    #[test]
    fn pops_strictly_increase() {
        let mut f = EnumerationFrontier::new(PrimeTable::global(), EnumConfig::default());
        let mut prev = 0u128;
        for _ in 0..2000 {
            let p = f.pop().unwrap();
            let v = p.signature.to_u128().unwrap();
            assert!(v > prev || (v == 1 && prev == 0));
            prev = v;
        }
    }
}
