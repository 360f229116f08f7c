//! Prime list and the high-precision logarithm tables built on top of it.
//!
//! Two layers:
//! - a process-wide list of primes ([`first_primes`]), grown by segmented
//!   sieving and shared by every exact computation;
//! - [`PrimeTable`], which holds `ln p_i`, the Chebyshev prefix sums
//!   `θ(c) = Σ_{i≤c} ln p_i`, and per-level step logarithms at a fixed
//!   precision.
//!
//! Growth is copy-on-write behind an `RwLock<Arc<_>>`: readers hold an `Arc`
//! snapshot and never observe a partially appended block.

use std::sync::{Arc, OnceLock, RwLock};

use crate::hp::{self, Approx};
use num_bigint::BigUint;

struct PrimeList {
    primes: Vec<u64>,
    /// Every integer below `limit` has been sieved.
    limit: u64,
}

fn global_list() -> &'static RwLock<Arc<PrimeList>> {
    static LIST: OnceLock<RwLock<Arc<PrimeList>>> = OnceLock::new();
    LIST.get_or_init(|| {
        RwLock::new(Arc::new(PrimeList {
            primes: vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29],
            limit: 30,
        }))
    })
}

/// Sieve `[lo, hi)` with the given base primes (which must cover `√hi`).
fn sieve_segment(base: &[u64], lo: u64, hi: u64, out: &mut Vec<u64>) {
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p >= hi {
            break;
        }
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut m = start;
        while m < hi {
            composite[(m - lo) as usize] = true;
            m += p;
        }
    }
    out.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(k, _)| lo + k as u64)
            .filter(|&n| n >= 2),
    );
}

/// Snapshot holding at least the first `count` primes.
pub fn first_primes(count: usize) -> Arc<[u64]> {
    {
        let list = global_list().read().unwrap();
        if list.primes.len() >= count {
            return Arc::from(&list.primes[..count]);
        }
    }
    let mut guard = global_list().write().unwrap();
    while guard.primes.len() < count {
        let cur = Arc::clone(&guard);
        let lo = cur.limit;
        let hi = (lo * 2).max(lo + (1 << 16)).min(lo * lo);
        let mut primes = cur.primes.clone();
        let mut fresh = Vec::new();
        // hi ≤ lo², so the base primes below lo cover √hi.
        sieve_segment(&cur.primes, lo, hi, &mut fresh);
        primes.extend(fresh);
        *guard = Arc::new(PrimeList { primes, limit: hi });
    }
    Arc::from(&guard.primes[..count])
}

/// The `i`-th prime, 1-based (`nth_prime(1) == 2`).
pub fn nth_prime(i: usize) -> u64 {
    assert!(i >= 1, "prime indices are 1-based");
    {
        let list = global_list().read().unwrap();
        if let Some(&p) = list.primes.get(i - 1) {
            return p;
        }
    }
    first_primes(i)[i - 1]
}

/// One level of step logarithms: `steps[i]` is `ln(σ(p^k)/(p·σ(p^(k-1))))`
/// for prime `p_{i+1}` at level `k`, and `prefix[c]` is the sum of the first
/// `c` steps.
#[derive(Clone, Debug)]
pub struct Level {
    pub steps: Vec<Approx>,
    pub prefix: Vec<Approx>,
    pub steps_f64: Vec<f64>,
}

/// An immutable snapshot of a [`PrimeTable`].
#[derive(Clone, Debug)]
pub struct Tables {
    bits: u32,
    primes: Arc<[u64]>,
    ln: Vec<Approx>,
    ln_f64: Vec<f64>,
    theta: Vec<Approx>,
    levels: Vec<Level>,
}

impl Tables {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn prime_count(&self) -> usize {
        self.ln.len()
    }

    /// Prime `p_i` (1-based).
    pub fn prime(&self, i: usize) -> u64 {
        self.primes[i - 1]
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes[..self.ln.len()]
    }

    /// `ln p_i` (1-based).
    pub fn ln(&self, i: usize) -> &Approx {
        &self.ln[i - 1]
    }

    pub fn ln_f64(&self, i: usize) -> f64 {
        self.ln_f64[i - 1]
    }

    /// `Σ_{j≤c} ln p_j`.
    pub fn theta(&self, c: usize) -> &Approx {
        &self.theta[c]
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Steps available at level `k` (1-based).
    pub fn level_len(&self, k: usize) -> usize {
        self.levels.get(k - 1).map_or(0, |l| l.steps.len())
    }

    /// Step log for prime `p_i` entering level `k` (exponent `k-1 → k`).
    pub fn step(&self, k: usize, i: usize) -> &Approx {
        &self.levels[k - 1].steps[i - 1]
    }

    pub fn step_f64(&self, k: usize, i: usize) -> f64 {
        self.levels[k - 1].steps_f64[i - 1]
    }

    /// Sum of the first `c` steps at level `k`.
    pub fn level_sum(&self, k: usize, c: usize) -> &Approx {
        &self.levels[k - 1].prefix[c]
    }

    fn covers(&self, primes: usize, levels: &[usize]) -> bool {
        self.ln.len() >= primes
            && levels
                .iter()
                .enumerate()
                .all(|(k, &c)| c == 0 || self.level_len(k + 1) >= c)
    }
}

/// Logarithm tables for the primes at a fixed precision, grown on demand.
///
/// Safe to share across threads; see the module docs for the growth model.
pub struct PrimeTable {
    bits: u32,
    inner: RwLock<Arc<Tables>>,
}

impl std::fmt::Debug for PrimeTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let t = self.snapshot();
        f.debug_struct("PrimeTable")
            .field("bits", &self.bits)
            .field("primes", &t.prime_count())
            .field("levels", &t.level_count())
            .finish()
    }
}

impl PrimeTable {
    pub fn new(bits: u32) -> Self {
        assert!((64..=hp::MAX_BITS).contains(&bits), "unsupported precision {bits}");
        PrimeTable {
            bits,
            inner: RwLock::new(Arc::new(Tables {
                bits,
                primes: first_primes(0),
                ln: Vec::new(),
                ln_f64: Vec::new(),
                theta: vec![Approx::zero(bits)],
                levels: Vec::new(),
            })),
        }
    }

    /// Shared table at the default precision.
    pub fn global() -> Arc<PrimeTable> {
        static GLOBAL: OnceLock<Arc<PrimeTable>> = OnceLock::new();
        Arc::clone(GLOBAL.get_or_init(|| Arc::new(PrimeTable::new(hp::DEFAULT_BITS))))
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn snapshot(&self) -> Arc<Tables> {
        Arc::clone(&self.inner.read().unwrap())
    }

    /// Snapshot with at least `primes` primes and, for each level `k`,
    /// at least `levels[k-1]` steps.
    pub fn ensure(&self, primes: usize, levels: &[usize]) -> Arc<Tables> {
        {
            let cur = self.inner.read().unwrap();
            if cur.covers(primes, levels) {
                return Arc::clone(&cur);
            }
        }
        let mut guard = self.inner.write().unwrap();
        if guard.covers(primes, levels) {
            return Arc::clone(&guard);
        }
        let mut next: Tables = (**guard).clone();
        let want_primes = levels
            .iter()
            .copied()
            .max()
            .unwrap_or(0)
            .max(primes);
        if next.ln.len() < want_primes {
            let target = want_primes.max(next.ln.len() * 2).max(64);
            self.grow_primes(&mut next, target);
        }
        if next.levels.len() < levels.len() {
            next.levels.resize_with(levels.len(), || Level {
                steps: Vec::new(),
                prefix: vec![Approx::zero(self.bits)],
                steps_f64: Vec::new(),
            });
        }
        for (k, &c) in levels.iter().enumerate() {
            let have = next.levels[k].steps.len();
            if c > have {
                let target = c.max(have * 2).max(8);
                if next.ln.len() < target {
                    self.grow_primes(&mut next, target);
                }
                self.grow_level(&mut next, k + 1, target);
            }
        }
        let arc = Arc::new(next);
        *guard = Arc::clone(&arc);
        arc
    }

    fn grow_primes(&self, t: &mut Tables, target: usize) {
        let primes = first_primes(target);
        let bits = self.bits;
        for i in t.ln.len()..target {
            let p = primes[i];
            let l = hp::ln_natural(&BigUint::from(p), bits);
            let th = t.theta[i].add(&l);
            t.ln_f64.push(l.to_f64());
            t.ln.push(l);
            t.theta.push(th);
        }
        t.primes = primes;
    }

    fn grow_level(&self, t: &mut Tables, k: usize, target: usize) {
        let bits = self.bits;
        let level = &mut t.levels[k - 1];
        for i in level.steps.len()..target {
            let s = hp::ln_step_ratio(t.primes[i], (k - 1) as u32, bits);
            let pre = level.prefix[i].add(&s);
            level.steps_f64.push(s.to_f64());
            level.steps.push(s);
            level.prefix.push(pre);
        }
    }
}
