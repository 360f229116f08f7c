//! Large-scale SA generation around the colossally abundant chain.
//!
//! # Backbone
//!
//! Raising the exponent of `p` from `e` to `e+1` multiplies σ(n)/n by
//! `σ(p^{e+1}) / (p·σ(p^e))`. The *quality* of that step is
//! `ln(ratio) / ln p`; it is the ε at which the optimal exponent of `p` in
//! `max σ(n)/n^{1+ε}` moves past `e`. Taking steps greedily by decreasing
//! quality therefore walks the colossally abundant numbers `B_0 = 1, B_1,
//! B_2, …`, each `B_{k+1} = B_k · p` for the prime of the step taken.
//!
//! # Certified window
//!
//! Let ε be the quality of the step `B_k → B_{k+1}`. Both endpoints
//! maximise `F(n) = ln σ(n)/n − ε ln n`; write `M` for that maximum and
//! `D(n) = M − F(n) ≥ 0`. Any SA number `n` in `[B_k, B_{k+1})` other than
//! `B_k` beats `B_k`, which forces
//!
//! ```text
//! D(n) < ε · ln(n / B_k) < ε · ln p.
//! ```
//!
//! `D` splits into independent per-level terms: moving the count of primes
//! at level `j` (exponent ≥ `j`) past prime `p_i` costs
//! `|ln step(i, j) − ε ln p_i|`. The window enumerates every count vector
//! whose total cost fits the budget, and everything outside it has
//! abundancy below `B_k`'s. Costs are pruned in `f64` with a relative
//! tolerance far above the rounding error, so the candidate set can only
//! grow; records are then decided with interval arithmetic and exact
//! fallbacks. Intervals never depend on each other's records, so batches of
//! them run in parallel and the output is identical for any thread count.
//!
//! The radius window (all signatures within `R` elementary moves of either
//! endpoint, escalated until the record set is stable) is kept as an
//! independent, uncertified cross-check.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;

use crate::abundancy::{abundancy_in, compare_ln_abundancy, ln_abundancy_in, Abundancy};
use crate::error::GenError;
use crate::hp::{self, Approx};
use crate::magnitude::{compare_magnitude, compare_with_hint, log_magnitude_in, LogMagnitude};
use crate::primes::{PrimeTable, Tables};
use crate::record::{self, Limit, SaRecord};
use crate::signature::Signature;

/// One exponent increment `e → e+1` of prime `p_i` on the chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackboneStep {
    pub prime_index: usize,
    pub from_exponent: u32,
    /// `ln(σ(p^{e+1}) p^e / (σ(p^e) p^{e+1}))`
    pub ln_ratio: Approx,
    pub ln_prime: Approx,
}

impl BackboneStep {
    /// `ln_ratio / ln p`, in (0, 1).
    pub fn quality(&self) -> Approx {
        self.ln_ratio
            .div(&self.ln_prime)
            .expect("ln p is bounded away from zero")
    }

    /// Level entered by the step.
    pub fn level(&self) -> usize {
        self.from_exponent as usize + 1
    }
}

/// Quality of an arbitrary step, computed directly at `bits`.
pub fn step_quality(prime_index: usize, from_exponent: u32, bits: u32) -> Approx {
    let p = crate::primes::nth_prime(prime_index);
    let l = hp::ln_step_ratio(p, from_exponent, bits);
    let lp = hp::ln_natural(&p.into(), bits);
    l.div(&lp).expect("ln p > 0")
}

/// Compare the qualities of two steps; escalates precision on overlap.
fn compare_quality(a: &BackboneStep, b: &BackboneStep) -> Result<Ordering, GenError> {
    // q_a > q_b ⇔ L_a · ln p_b > L_b · ln p_a
    let lhs = a.ln_ratio.mul(&b.ln_prime);
    let rhs = b.ln_ratio.mul(&a.ln_prime);
    if let Some(o) = lhs.try_cmp(&rhs) {
        return Ok(o);
    }
    let mut bits = a.ln_ratio.bits() * 2;
    while bits <= hp::MAX_BITS {
        let qa = step_quality(a.prime_index, a.from_exponent, bits);
        let qb = step_quality(b.prime_index, b.from_exponent, bits);
        if let Some(o) = qa.try_cmp(&qb) {
            return Ok(o);
        }
        bits *= 2;
    }
    Err(GenError::QualityTie {
        a: a.prime_index,
        b: b.prime_index,
        bits: hp::MAX_BITS,
    })
}

/// A chain element together with the step that leaves it.
#[derive(Clone, Debug)]
pub struct BackboneNode {
    /// Number of steps from 1 (`B_0 = 1`).
    pub position: u64,
    pub signature: Signature,
    pub ln_n: Approx,
    pub ln_a: Approx,
    pub next: BackboneStep,
}

impl BackboneNode {
    /// `B_{k+1}` as a signature.
    pub fn successor(&self) -> Signature {
        self.signature
            .multiply_by_prime(self.next.prime_index)
            .expect("backbone steps are canonical")
    }

    pub fn successor_ln(&self) -> Approx {
        self.ln_n.add(&self.next.ln_prime)
    }
}

/// Greedy walk along the colossally abundant chain.
pub struct BackboneWalk {
    table: Arc<PrimeTable>,
    current: Signature,
    ln_n: Approx,
    ln_a: Approx,
    position: u64,
}

impl BackboneWalk {
    pub fn new(table: Arc<PrimeTable>) -> Self {
        let bits = table.bits();
        BackboneWalk {
            table,
            current: Signature::one(),
            ln_n: Approx::zero(bits),
            ln_a: Approx::zero(bits),
            position: 0,
        }
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn current(&self) -> &Signature {
        &self.current
    }

    /// The maximal-quality pending step; ties go to the smaller prime index.
    pub fn next_step(&self) -> Result<BackboneStep, GenError> {
        let sig = &self.current;
        // only corners can carry the maximal quality: at a fixed exponent
        // quality decreases with p
        let mut need: Vec<usize> = sig.levels().iter().map(|&c| c as usize + 1).collect();
        need.push(1);
        let t = self.table.ensure(sig.prime_count() + 1, &need);
        let mut best: Option<BackboneStep> = None;
        for i in sig.successor_candidates() {
            let e = sig.exponent(i);
            let cand = BackboneStep {
                prime_index: i,
                from_exponent: e,
                ln_ratio: t.step(e as usize + 1, i).clone(),
                ln_prime: t.ln(i).clone(),
            };
            best = match best {
                None => Some(cand),
                Some(b) => {
                    if compare_quality(&cand, &b)? == Ordering::Greater {
                        Some(cand)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        Ok(best.expect("there is always a successor"))
    }

    /// Emit the current element (with its outgoing step) and advance.
    pub fn advance(&mut self) -> Result<BackboneNode, GenError> {
        let step = self.next_step()?;
        let node = BackboneNode {
            position: self.position,
            signature: self.current.clone(),
            ln_n: self.ln_n.clone(),
            ln_a: self.ln_a.clone(),
            next: step,
        };
        self.current = node.successor();
        self.ln_n = node.successor_ln();
        self.ln_a = self.ln_a.add(&node.next.ln_ratio);
        self.position += 1;
        Ok(node)
    }
}

/// The chain `B_1, B_2, …` (the starting 1 is not yielded).
pub fn backbone_chain(table: Arc<PrimeTable>) -> impl Iterator<Item = Result<Signature, GenError>> {
    let mut walk = BackboneWalk::new(table);
    std::iter::from_fn(move || Some(walk.advance().map(|n| n.successor())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowMode {
    /// Deficit-bounded enumeration; complete by construction.
    Certified,
    /// Radius around the chain endpoints with escalation to stability.
    Radius,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowConfig {
    pub mode: WindowMode,
    pub radius: u32,
    pub escalation: u32,
    pub radius_cap: u32,
    /// Relative slack on every `f64` pruning test of the certified window.
    pub margin: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            mode: WindowMode::Certified,
            radius: 4,
            escalation: 2,
            radius_cap: 12,
            margin: 1e-9,
        }
    }
}

/// All signatures within `radius` canonical single-prime moves of `b`,
/// including `b`.
pub fn window_candidates(b: &Signature, radius: u32) -> HashSet<Signature> {
    let mut seen: HashSet<Signature> = HashSet::new();
    seen.insert(b.clone());
    let mut frontier = vec![b.clone()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for s in &frontier {
            let ups = s
                .successor_candidates()
                .into_iter()
                .map(|i| s.multiply_by_prime(i));
            let downs = s
                .predecessor_candidates()
                .into_iter()
                .map(|i| s.divide_by_prime(i));
            for n in ups.chain(downs).flatten() {
                if seen.insert(n.clone()) {
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// An SA number found inside one chain interval.
#[derive(Clone, Debug)]
pub struct Member {
    pub signature: Signature,
    pub ln_n: Approx,
    pub ln_a: Approx,
}

/// Per-interval bookkeeping.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntervalStats {
    pub candidates: u64,
    pub in_range: u64,
    /// Largest distance (in elementary moves) from a member to the nearer
    /// chain endpoint.
    pub max_moves: u64,
    /// Radius at which the record set stabilised (radius mode only).
    pub radius: u32,
}

#[derive(Clone, Copy)]
struct LevelOpt {
    count: u32,
    cost: f64,
    dlog: f64,
}

/// Tables covering `primes` primes and the given per-level lengths, grown
/// as the enumeration discovers what it needs.
struct Grow<'a> {
    table: &'a PrimeTable,
    t: Arc<Tables>,
}

impl Grow<'_> {
    fn ln(&mut self, i: usize) -> f64 {
        if i > self.t.prime_count() {
            self.t = self.table.ensure(i, &[]);
        }
        self.t.ln_f64(i)
    }

    fn step(&mut self, k: usize, i: usize) -> f64 {
        if i > self.t.level_len(k) {
            let mut need = vec![0; k];
            need[k - 1] = i;
            self.t = self.table.ensure(i, &need);
        }
        self.t.step_f64(k, i)
    }
}

fn level_options(
    g: &mut Grow<'_>,
    level: usize,
    base: u32,
    ls: f64,
    lps: f64,
    limit: f64,
) -> Vec<LevelOpt> {
    let mut opts = vec![LevelOpt {
        count: base,
        cost: 0.0,
        dlog: 0.0,
    }];
    let (mut cost, mut dlog) = (0.0, 0.0);
    let mut i = base as usize;
    while i >= 1 {
        let lp = g.ln(i);
        cost += g.step(level, i) * lps - lp * ls;
        dlog -= lp;
        if cost > limit {
            break;
        }
        opts.push(LevelOpt {
            count: i as u32 - 1,
            cost,
            dlog,
        });
        i -= 1;
    }
    let (mut cost, mut dlog) = (0.0, 0.0);
    let mut i = base as usize + 1;
    loop {
        let lp = g.ln(i);
        cost += lp * ls - g.step(level, i) * lps;
        dlog += lp;
        if cost > limit {
            break;
        }
        opts.push(LevelOpt {
            count: i as u32,
            cost,
            dlog,
        });
        i += 1;
    }
    opts.sort_by_key(|o| o.count);
    opts
}

struct Search<'a> {
    levels: &'a [Vec<LevelOpt>],
    min_below: &'a [f64],
    max_below: &'a [f64],
    ls: f64,
    lps: f64,
    limit: f64,
    tol_cost: f64,
    tol_log: f64,
    chosen: Vec<u32>,
    /// Count vector, `ln(n / B_k)`, and `ln p · ln(a(n) / a(B_k))`.
    out: Vec<(Vec<u32>, f64, f64)>,
}

impl Search<'_> {
    // levels are visited from the top down so each choice can be checked
    // against the count above it
    fn run(&mut self, j: usize, above: u32, cost: f64, dlog: f64) {
        let opts = &self.levels[j - 1];
        if j == 1 {
            let lo = -self.tol_log - dlog;
            let hi = self.lps + self.tol_log - dlog;
            let start = opts.partition_point(|o| o.dlog < lo);
            for o in &opts[start..] {
                if o.dlog >= hi {
                    break;
                }
                if o.count < above || o.count == 0 {
                    continue;
                }
                let c = cost + o.cost;
                let d = dlog + o.dlog;
                if c > self.limit || c > self.ls * d + self.tol_cost {
                    continue;
                }
                self.chosen[0] = o.count;
                self.out.push((self.chosen.clone(), d, self.ls * d - c));
            }
            return;
        }
        for o in opts {
            if o.count < above {
                continue;
            }
            let c = cost + o.cost;
            if c > self.limit {
                continue;
            }
            let d = dlog + o.dlog;
            let hi = d + self.max_below[j - 1];
            if hi < -self.tol_log
                || d + self.min_below[j - 1] >= self.lps + self.tol_log
                || c > self.ls * hi + self.tol_cost
            {
                continue;
            }
            self.chosen[j - 1] = o.count;
            self.run(j - 1, o.count, c, d);
        }
    }
}

fn trim(mut v: Vec<u32>) -> Signature {
    while v.last() == Some(&0) {
        v.pop();
    }
    Signature::from_levels_unchecked(v)
}

/// Candidate signatures of the certified window for one interval.
fn certified_candidates(
    node: &BackboneNode,
    table: &PrimeTable,
    margin: f64,
) -> Vec<Signature> {
    let base = &node.signature;
    let ls = node.next.ln_ratio.to_f64();
    let lps = node.next.ln_prime.to_f64();
    let budget = ls * lps;
    let limit = budget * (1.0 + margin);
    let tol_cost = budget * margin;
    let tol_log = margin;
    let mut g = Grow {
        table,
        t: table.snapshot(),
    };
    let mut levels = Vec::new();
    let mut j = 1;
    // a new top level needs every empty level below it opened as well
    let mut opening = 0.0;
    loop {
        let c = base.level(j);
        if c == 0 {
            opening += g.ln(1) * ls - g.step(j, 1) * lps;
            if opening > limit {
                break;
            }
        }
        let opts = level_options(&mut g, j, c, ls, lps, limit);
        if c == 0 && opts.len() == 1 {
            break;
        }
        levels.push(opts);
        j += 1;
    }
    let n = levels.len();
    let mut min_below = vec![0.0; n + 1];
    let mut max_below = vec![0.0; n + 1];
    for j in 1..=n {
        let lo = levels[j - 1].iter().map(|o| o.dlog).fold(0.0, f64::min);
        let hi = levels[j - 1].iter().map(|o| o.dlog).fold(0.0, f64::max);
        min_below[j] = min_below[j - 1] + lo;
        max_below[j] = max_below[j - 1] + hi;
    }
    let mut search = Search {
        levels: &levels,
        min_below: &min_below,
        max_below: &max_below,
        ls,
        lps,
        limit,
        tol_cost,
        tol_log,
        chosen: vec![0; n],
        out: Vec::new(),
    };
    search.run(n, 0, 0.0, 0.0);
    let tol_gain = tol_cost;
    undominated(search.out, tol_log, tol_gain)
        .into_iter()
        .map(trim)
        .collect()
}

/// Drop every candidate beaten by a certainly smaller one with certainly
/// larger abundancy; such a number cannot be SA wherever the other lies.
fn undominated(mut c: Vec<(Vec<u32>, f64, f64)>, tol_log: f64, tol_gain: f64) -> Vec<Vec<u32>> {
    c.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut keep = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut j = 0;
    for k in 0..c.len() {
        while j < k && c[j].1 < c[k].1 - tol_log {
            best = best.max(c[j].2);
            j += 1;
        }
        if best <= c[k].2 + tol_gain {
            keep.push(k);
        }
    }
    let mut take: Vec<Option<Vec<u32>>> = c.into_iter().map(|x| Some(x.0)).collect();
    keep.into_iter().map(|k| take[k].take().unwrap()).collect()
}

/// Keep candidates strictly inside `(B_k, B_{k+1})`, add `B_k`, sort by
/// size and keep the running abundancy records.
fn select_members(
    node: &BackboneNode,
    candidates: impl IntoIterator<Item = Signature>,
    table: &PrimeTable,
    stats: &mut IntervalStats,
) -> Vec<Member> {
    let upper = node.successor();
    let upper_ln = LogMagnitude::new(node.successor_ln());
    let base_ln = LogMagnitude::new(node.ln_n.clone());
    let mut inside: Vec<(Signature, LogMagnitude)> = Vec::new();
    for sig in candidates {
        stats.candidates += 1;
        if sig == node.signature || sig == upper {
            continue;
        }
        let need: Vec<usize> = sig.levels().iter().map(|&c| c as usize).collect();
        let t = table.ensure(sig.prime_count(), &need);
        let ln = log_magnitude_in(&sig, &t);
        if compare_with_hint(&sig, &ln, &node.signature, &base_ln) != Ordering::Greater {
            continue;
        }
        if compare_with_hint(&sig, &ln, &upper, &upper_ln) != Ordering::Less {
            continue;
        }
        inside.push((sig, ln));
    }
    stats.in_range += inside.len() as u64;
    inside.sort_by(|a, b| compare_with_hint(&a.0, &a.1, &b.0, &b.1));
    let mut members = vec![Member {
        signature: node.signature.clone(),
        ln_n: node.ln_n.clone(),
        ln_a: node.ln_a.clone(),
    }];
    for (sig, ln) in inside {
        let need: Vec<usize> = sig.levels().iter().map(|&c| c as usize).collect();
        let t = table.ensure(sig.prime_count(), &need);
        let la = ln_abundancy_in(&sig, &t);
        let best = members.last().unwrap();
        if compare_ln_abundancy(&sig, &la, &best.signature, &best.ln_a) == Ordering::Greater {
            let d = sig.move_distance(&node.signature).min(sig.move_distance(&upper));
            stats.max_moves = stats.max_moves.max(d);
            members.push(Member {
                signature: sig,
                ln_n: ln.ln().clone(),
                ln_a: la,
            });
        }
    }
    members
}

/// SA numbers in `[B_k, B_{k+1})`, in increasing order.
pub fn interval_members(
    node: &BackboneNode,
    table: &PrimeTable,
    cfg: &WindowConfig,
) -> Result<(Vec<Member>, IntervalStats), GenError> {
    let mut stats = IntervalStats::default();
    match cfg.mode {
        WindowMode::Certified => {
            let cands = certified_candidates(node, table, cfg.margin);
            let m = select_members(node, cands, table, &mut stats);
            Ok((m, stats))
        }
        WindowMode::Radius => {
            let upper = node.successor();
            let run = |r: u32, stats: &mut IntervalStats| {
                let mut set = window_candidates(&node.signature, r);
                set.extend(window_candidates(&upper, r));
                let mut v: Vec<Signature> = set.into_iter().collect();
                v.sort();
                select_members(node, v, table, stats)
            };
            let mut r = cfg.radius;
            let mut cur = run(r, &mut stats);
            loop {
                let wider = r + cfg.escalation.max(1);
                if wider > cfg.radius_cap {
                    return Err(GenError::NonConvergence {
                        interval: node.position,
                        cap: cfg.radius_cap,
                    });
                }
                let mut scratch = IntervalStats::default();
                let next = run(wider, &mut scratch);
                let same = next.len() == cur.len()
                    && next.iter().zip(&cur).all(|(a, b)| a.signature == b.signature);
                if same {
                    stats.radius = r;
                    return Ok((cur, stats));
                }
                r = wider;
                stats = scratch;
                cur = next;
            }
        }
    }
}

/// Summary of a backbone run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunReport {
    pub intervals: u64,
    pub candidates: u64,
    pub max_moves: u64,
    pub max_radius: u32,
}

/// Resumable generator state at an interval boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    /// Chain position of the next interval to process.
    pub position: u64,
    /// Last emitted record (the running abundancy record).
    pub record: Signature,
    pub emitted: u64,
    pub radius: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerateConfig {
    pub window: WindowConfig,
    /// Intervals processed per parallel batch.
    pub batch: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            window: WindowConfig::default(),
            batch: 64,
        }
    }
}

/// Stream of SA records from the backbone engine; see [`generate_sa`].
pub struct BackboneGenerator {
    walk: BackboneWalk,
    table: Arc<PrimeTable>,
    cfg: GenerateConfig,
    limit: Limit,
    ln_bound: Option<Approx>,
    pending: VecDeque<SaRecord>,
    next_index: u64,
    last: Option<Signature>,
    /// First chain position whose interval is not fully emitted.
    cursor: u64,
    /// After a resume: members up to this record were already emitted.
    skip_through: Option<Signature>,
    walk_done: bool,
    done: bool,
    report: RunReport,
}

pub fn generate_sa(limit: Limit, cfg: GenerateConfig, table: Arc<PrimeTable>) -> BackboneGenerator {
    let t = table.ensure(3, &[]);
    BackboneGenerator {
        ln_bound: limit.ln_bound(&t),
        walk: BackboneWalk::new(Arc::clone(&table)),
        table,
        cfg,
        limit,
        pending: VecDeque::new(),
        next_index: 1,
        last: None,
        cursor: 0,
        skip_through: None,
        walk_done: false,
        done: false,
        report: RunReport::default(),
    }
}

impl BackboneGenerator {
    /// Continue from a checkpoint: the chain is re-walked to its position.
    pub fn resume(
        cp: &Checkpoint,
        limit: Limit,
        cfg: GenerateConfig,
        table: Arc<PrimeTable>,
    ) -> Result<Self, GenError> {
        let mut g = generate_sa(limit, cfg, table);
        while g.walk.position() < cp.position {
            g.walk.advance()?;
        }
        g.cursor = cp.position;
        g.next_index = cp.emitted + 1;
        g.last = Some(cp.record.clone());
        g.skip_through = Some(cp.record.clone());
        Ok(g)
    }

    pub fn report(&self) -> &RunReport {
        &self.report
    }

    /// State at the current interval boundary; `None` while records from
    /// the last batch are still pending.
    pub fn checkpoint(&self) -> Option<Checkpoint> {
        if !self.pending.is_empty() {
            return None;
        }
        Some(Checkpoint {
            position: self.cursor,
            record: self.last.clone()?,
            emitted: self.next_index - 1,
            radius: self.report.max_radius,
        })
    }

    fn fill(&mut self) -> Result<(), GenError> {
        let mut nodes = Vec::with_capacity(self.cfg.batch);
        while nodes.len() < self.cfg.batch.max(1) {
            if let Some(bound) = &self.ln_bound {
                let ln = &self.walk.ln_n;
                if !record::within(ln, bound) {
                    self.walk_done = true;
                    break;
                }
            }
            nodes.push(self.walk.advance()?);
        }
        let table = &*self.table;
        let wcfg = self.cfg.window;
        let results: Vec<Result<(Vec<Member>, IntervalStats), GenError>> = nodes
            .par_iter()
            .map(|n| interval_members(n, table, &wcfg))
            .collect();
        for (node, res) in nodes.iter().zip(results) {
            let (members, stats) = res?;
            self.report.intervals += 1;
            self.report.candidates += stats.candidates;
            self.report.max_moves = self.report.max_moves.max(stats.max_moves);
            self.report.max_radius = self.report.max_radius.max(stats.radius);
            for m in members {
                if let Some(s) = &self.skip_through {
                    if compare_magnitude(&m.signature, s, &self.table) != Ordering::Greater {
                        continue;
                    }
                    self.skip_through = None;
                }
                if let Some(bound) = &self.ln_bound {
                    if !record::within(&m.ln_n, bound) {
                        self.walk_done = true;
                        self.cursor = node.position;
                        return Ok(());
                    }
                }
                if let Limit::Count(c) = self.limit {
                    if self.next_index > c {
                        self.walk_done = true;
                        self.cursor = node.position;
                        return Ok(());
                    }
                }
                self.last = Some(m.signature.clone());
                self.pending.push_back(SaRecord {
                    index: self.next_index,
                    abundancy: Abundancy::from_parts(m.signature.clone(), m.ln_a),
                    signature: m.signature,
                    magnitude: LogMagnitude::new(m.ln_n),
                });
                self.next_index += 1;
            }
        }
        self.cursor = self.walk.position();
        if let Limit::Count(c) = self.limit {
            if self.next_index > c {
                self.walk_done = true;
            }
        }
        Ok(())
    }
}

impl Iterator for BackboneGenerator {
    type Item = Result<SaRecord, GenError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(r) = self.pending.pop_front() {
                return Some(Ok(r));
            }
            if self.done || self.walk_done {
                return None;
            }
            if let Err(e) = self.fill() {
                self.done = true;
                return Some(Err(e));
            }
        }
    }
}

/// Abundancy of a record recomputed from scratch (used by cross-checks).
pub fn recompute(sig: &Signature, table: &PrimeTable) -> (LogMagnitude, Abundancy) {
    let need: Vec<usize> = sig.levels().iter().map(|&c| c as usize).collect();
    let t = table.ensure(sig.prime_count(), &need);
    (log_magnitude_in(sig, &t), abundancy_in(sig, &t))
}

/// Which part of a record disagrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MismatchKind {
    Signature,
    Abundancy,
    Magnitude,
    /// The index exists in only one list.
    Missing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub index: u64,
    pub kind: MismatchKind,
    pub left: Option<String>,
    pub right: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffReport {
    pub compared: u64,
    pub mismatches: Vec<Mismatch>,
}

impl DiffReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn intervals_agree(a: &Approx, b: &Approx) -> bool {
    let bits = a.bits().min(b.bits());
    let (a, b) = (a.with_bits(bits), b.with_bits(bits));
    !matches!(a.try_cmp(&b), Some(Ordering::Less | Ordering::Greater))
}

/// Index-aligned comparison over the overlapping index range.
pub fn crosscheck(left: &[SaRecord], right: &[SaRecord]) -> DiffReport {
    use std::collections::BTreeMap;
    let l: BTreeMap<u64, &SaRecord> = left.iter().map(|r| (r.index, r)).collect();
    let r: BTreeMap<u64, &SaRecord> = right.iter().map(|r| (r.index, r)).collect();
    let lo = l
        .keys()
        .next()
        .copied()
        .unwrap_or(0)
        .max(r.keys().next().copied().unwrap_or(0));
    let hi = l
        .keys()
        .next_back()
        .copied()
        .unwrap_or(0)
        .min(r.keys().next_back().copied().unwrap_or(0));
    let mut report = DiffReport::default();
    if lo > hi {
        return report;
    }
    for idx in lo..=hi {
        report.compared += 1;
        let (a, b) = (l.get(&idx), r.get(&idx));
        let show = |x: Option<&&SaRecord>| x.map(|x| crate::scn::scn_encode(&x.signature).to_string());
        let kind = match (a, b) {
            (Some(a), Some(b)) => {
                if a.signature != b.signature {
                    Some(MismatchKind::Signature)
                } else if !intervals_agree(a.abundancy.ln(), b.abundancy.ln()) {
                    Some(MismatchKind::Abundancy)
                } else if !intervals_agree(a.magnitude.ln(), b.magnitude.ln()) {
                    Some(MismatchKind::Magnitude)
                } else {
                    None
                }
            }
            _ => Some(MismatchKind::Missing),
        };
        if let Some(kind) = kind {
            report.mismatches.push(Mismatch {
                index: idx,
                kind,
                left: show(a),
                right: show(b),
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(e: &[u32]) -> Signature {
        Signature::from_exponents(e).unwrap()
    }

    #[test]
    fn first_chain_values() {
        let v: Vec<u128> = backbone_chain(PrimeTable::global())
            .take(5)
            .map(|s| s.unwrap().to_u128().unwrap())
            .collect();
        assert_eq!(v, vec![2, 6, 12, 60, 120]);
    }

    #[test]
    fn first_step_quality() {
        let walk = BackboneWalk::new(PrimeTable::global());
        let s = walk.next_step().unwrap();
        assert_eq!((s.prime_index, s.from_exponent), (1, 0));
        let q = s.quality().to_f64();
        assert!((q - 1.5f64.ln() / 2f64.ln()).abs() < 1e-15);
        assert!((q - 0.585).abs() < 1e-3);
        let q3 = step_quality(2, 0, 128).to_f64();
        assert!((q3 - 0.262).abs() < 1e-3);
    }

    #[test]
    fn quality_decreases_with_exponent() {
        for i in 1..=6 {
            let mut prev = step_quality(i, 0, 128);
            for e in 1..12 {
                let q = step_quality(i, e, 128);
                assert_eq!(q.try_cmp(&prev), Some(Ordering::Less));
                prev = q;
            }
        }
    }

    #[test]
    fn radius_window_examples() {
        let b = sig(&[2, 1]);
        assert_eq!(window_candidates(&b, 0), HashSet::from([b.clone()]));
        let w: HashSet<u128> = window_candidates(&b, 1)
            .iter()
            .map(|s| s.to_u128().unwrap())
            .collect();
        assert_eq!(w, HashSet::from([12, 24, 36, 60, 6, 4]));
        let mut prev = 0;
        for r in 0..5 {
            let n = window_candidates(&b, r).len();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn generator_prefix() {
        let v: Vec<u128> = generate_sa(Limit::Count(20), GenerateConfig::default(), PrimeTable::global())
            .map(|r| r.unwrap().signature.to_u128().unwrap())
            .collect();
        assert_eq!(
            v,
            vec![1, 2, 4, 6, 12, 24, 36, 48, 60, 120, 180, 240, 360, 720, 840, 1260, 1680, 2520, 5040, 10080]
        );
    }

    #[test]
    fn crosscheck_flags_injected_record() {
        let recs: Vec<SaRecord> =
            generate_sa(Limit::Count(30), GenerateConfig::default(), PrimeTable::global())
                .map(Result::unwrap)
                .collect();
        assert!(crosscheck(&recs, &recs).is_clean());
        let mut bad = recs.clone();
        let (ln, ab) = recompute(&sig(&[4, 1, 1]), &PrimeTable::global());
        bad[9] = SaRecord {
            index: 10,
            signature: sig(&[4, 1, 1]),
            abundancy: ab,
            magnitude: ln,
        };
        let d = crosscheck(&recs, &bad);
        assert_eq!(d.mismatches.len(), 1);
        assert_eq!(d.mismatches[0].index, 10);
        assert_eq!(d.mismatches[0].kind, MismatchKind::Signature);
    }
}
