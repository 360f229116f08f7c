//! `ln n` with a tracked error bound, and exact ordering of signatures.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::One;

use crate::hp::Approx;
use crate::primes::{self, PrimeTable, Tables};
use crate::signature::Signature;

/// High-precision natural logarithm of a signature's integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogMagnitude {
    value: Approx,
}

impl LogMagnitude {
    pub fn new(value: Approx) -> Self {
        LogMagnitude { value }
    }

    pub fn ln(&self) -> &Approx {
        &self.value
    }

    /// Absolute error bound on the natural log.
    pub fn error(&self) -> f64 {
        self.value.error_f64()
    }

    pub fn ln_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn log10_f64(&self) -> f64 {
        self.value.to_f64() / std::f64::consts::LN_10
    }

    /// `log₁₀ n` as a high-precision value.
    pub fn log10(&self, table: &PrimeTable) -> Approx {
        let ln10 = ln10(&table.ensure(3, &[]));
        self.value.div(&ln10).expect("ln 10 is bounded away from zero")
    }
}

pub(crate) fn ln10(t: &Tables) -> Approx {
    t.ln(1).add(t.ln(3))
}

/// `Σ e_i ln p_i`, accumulated as `Σ_k θ(c_k)` over the conjugate levels.
pub fn log_magnitude(sig: &Signature, table: &PrimeTable) -> LogMagnitude {
    let t = table.ensure(sig.prime_count(), &[]);
    log_magnitude_in(sig, &t)
}

pub(crate) fn log_magnitude_in(sig: &Signature, t: &Tables) -> LogMagnitude {
    let mut acc = Approx::zero(t.bits());
    for &c in sig.levels() {
        acc.add_assign(t.theta(c as usize));
    }
    LogMagnitude { value: acc }
}

/// Exact ordering of the represented integers.
pub fn compare_magnitude(a: &Signature, b: &Signature, table: &PrimeTable) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let la = log_magnitude(a, table);
    let lb = log_magnitude(b, table);
    compare_with_hint(a, &la, b, &lb)
}

/// Ordering using precomputed magnitudes, falling back to exact integers
/// when the intervals overlap.
pub fn compare_with_hint(
    a: &Signature,
    la: &LogMagnitude,
    b: &Signature,
    lb: &LogMagnitude,
) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    match la.value.try_cmp(&lb.value) {
        Some(o) => o,
        None => exact_compare_magnitude(a, b),
    }
}

/// Compare `∏ p^{e_a}` with `∏ p^{e_b}` after cancelling common factors.
pub fn exact_compare_magnitude(a: &Signature, b: &Signature) -> Ordering {
    let ea = a.exponents();
    let eb = b.exponents();
    let r = ea.len().max(eb.len());
    let primes = primes::first_primes(r);
    let mut left = BigUint::one();
    let mut right = BigUint::one();
    for (i, &p) in primes.iter().enumerate() {
        let x = ea.get(i).copied().unwrap_or(0);
        let y = eb.get(i).copied().unwrap_or(0);
        match x.cmp(&y) {
            Ordering::Greater => left *= BigUint::from(p).pow(x - y),
            Ordering::Less => right *= BigUint::from(p).pow(y - x),
            Ordering::Equal => {}
        }
    }
    left.cmp(&right)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(e: &[u32]) -> Signature {
        Signature::from_exponents(e).unwrap()
    }

    #[test]
    fn one_is_zero() {
        let m = log_magnitude(&Signature::one(), &PrimeTable::global());
        assert!(m.ln().is_exact());
        assert_eq!(m.ln_f64(), 0.0);
    }

    #[test]
    fn log10_of_840() {
        let m = log_magnitude(&sig(&[3, 1, 1, 1]), &PrimeTable::global());
        assert!((m.log10_f64() - 840f64.log10()).abs() < 1e-10);
        let hp = m.log10(&PrimeTable::global());
        assert!((hp.to_f64() - 2.924_279_286_061_882).abs() < 1e-12);
        assert!(m.error() < 1e-60);
    }

    #[test]
    fn ordering_examples() {
        let t = PrimeTable::global();
        assert_eq!(compare_magnitude(&sig(&[2, 1]), &sig(&[1, 1, 1]), &t), Ordering::Less);
        let s = sig(&[13, 7, 4, 3, 3, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1]);
        assert_eq!(compare_magnitude(&s, &s.clone(), &t), Ordering::Equal);
        let doubled = s.multiply_by_prime(1).unwrap();
        assert_eq!(compare_magnitude(&s, &doubled, &t), Ordering::Less);
        assert_eq!(exact_compare_magnitude(&s, &doubled), Ordering::Less);
        assert_eq!(exact_compare_magnitude(&sig(&[4]), &sig(&[1, 1])), Ordering::Greater);
    }
}
