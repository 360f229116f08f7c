//! Superabundant records and generation limits.

use std::cmp::Ordering;

use crate::abundancy::Abundancy;
use crate::hp::Approx;
use crate::magnitude::{self, LogMagnitude};
use crate::primes::Tables;
use crate::signature::Signature;

/// One superabundant number with its 1-based position in the sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaRecord {
    pub index: u64,
    pub signature: Signature,
    pub abundancy: Abundancy,
    pub magnitude: LogMagnitude,
}

/// Where a generation run stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Limit {
    /// Every SA number `n` with `log₁₀ n ≤ bound`.
    MaxLog10(f64),
    /// The first `count` SA numbers.
    Count(u64),
}

impl Limit {
    /// `bound · ln 10` as an interval, for `MaxLog10`.
    pub(crate) fn ln_bound(&self, t: &Tables) -> Option<Approx> {
        match *self {
            Limit::MaxLog10(b) => {
                let bound = Approx::from_f64(b, t.bits());
                Some(bound.mul(&magnitude::ln10(t)))
            }
            Limit::Count(_) => None,
        }
    }
}

/// Whether `ln n ≤ bound`. Power-of-ten ties cannot occur for `n > 1`
/// (10 = 2·5 skips 3), so an undecided overlap only arises when the bound
/// is within rounding of `ln n`; it resolves by widening to "inside".
pub(crate) fn within(ln_n: &Approx, bound: &Approx) -> bool {
    !matches!(ln_n.try_cmp(bound), Some(Ordering::Greater))
}
