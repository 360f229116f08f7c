//! Prime-exponent signatures of numbers with nonincreasing exponents.
//!
//! A signature `e_1 ≥ e_2 ≥ … ≥ e_r > 0` stands for `n = ∏ p_i^{e_i}`.
//! It is stored in conjugate form: `levels[k-1]` is the number of primes
//! whose exponent is at least `k`. The conjugate is nonincreasing as well,
//! has length `e_1`, and is what every hot path (logarithms, lattice moves,
//! SCN) actually consumes.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::primes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MoveError {
    /// The result would have increasing exponents, so it is not superabundant.
    #[error("result is not canonical (exponents would increase)")]
    NonCanonical,
    #[error("prime index out of range")]
    IndexOutOfRange,
    #[error("prime does not divide the number")]
    NotDivisible,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("exponents must be nonincreasing (position {0})")]
    Increasing(usize),
    #[error("exponents must be strictly positive (position {0})")]
    ZeroExponent(usize),
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    levels: Vec<u32>,
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature{:?}", self.exponents())
    }
}

impl Signature {
    /// The number 1.
    pub fn one() -> Self {
        Signature { levels: Vec::new() }
    }

    pub fn from_exponents(exps: &[u32]) -> Result<Self, SignatureError> {
        for (i, w) in exps.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(SignatureError::Increasing(i + 2));
            }
        }
        if let Some(pos) = exps.iter().position(|&e| e == 0) {
            return Err(SignatureError::ZeroExponent(pos + 1));
        }
        let top = exps.first().copied().unwrap_or(0) as usize;
        let mut levels = vec![0u32; top];
        for &e in exps {
            for l in levels.iter_mut().take(e as usize) {
                *l += 1;
            }
        }
        Ok(Signature { levels })
    }

    /// Build from conjugate counts (`levels[k-1]` primes have exponent ≥ k).
    pub fn from_levels(levels: Vec<u32>) -> Result<Self, SignatureError> {
        for (k, w) in levels.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(SignatureError::Increasing(k + 2));
            }
        }
        if let Some(pos) = levels.iter().position(|&c| c == 0) {
            return Err(SignatureError::ZeroExponent(pos + 1));
        }
        Ok(Signature { levels })
    }

    pub(crate) fn from_levels_unchecked(levels: Vec<u32>) -> Self {
        debug_assert!(levels.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(levels.last().is_none_or(|&c| c > 0));
        Signature { levels }
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Count of primes at level `k` (1-based; 0 above the top).
    pub fn level(&self, k: usize) -> u32 {
        if k == 0 {
            return u32::MAX;
        }
        self.levels.get(k - 1).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.levels.is_empty()
    }

    /// Number of distinct primes `r`.
    pub fn prime_count(&self) -> usize {
        self.level(1) as usize
    }

    /// Exponent of 2, i.e. the largest exponent.
    pub fn top_exponent(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Exponent of `p_i` (1-based; 0 beyond `r`).
    pub fn exponent(&self, i: usize) -> u32 {
        if i == 0 {
            return 0;
        }
        // levels is nonincreasing: count entries ≥ i
        self.levels.partition_point(|&c| c as usize >= i) as u32
    }

    pub fn exponents(&self) -> Vec<u32> {
        let r = self.prime_count();
        let mut out = vec![0u32; r];
        for &c in &self.levels {
            for e in out.iter_mut().take(c as usize) {
                *e += 1;
            }
        }
        out
    }

    /// Ω(n) = Σ e_i.
    pub fn omega_total(&self) -> u64 {
        self.levels.iter().map(|&c| c as u64).sum()
    }

    /// Multiply by `p_i` (1-based). The result must stay canonical.
    pub fn multiply_by_prime(&self, i: usize) -> Result<Signature, MoveError> {
        let r = self.prime_count();
        if i == 0 || i > r + 1 {
            return Err(MoveError::IndexOutOfRange);
        }
        let e = self.exponent(i) as usize;
        if i > 1 && (self.exponent(i - 1) as usize) < e + 1 {
            return Err(MoveError::NonCanonical);
        }
        let mut levels = self.levels.clone();
        if e == levels.len() {
            levels.push(1);
        } else {
            levels[e] += 1;
        }
        Ok(Signature { levels })
    }

    /// Divide by `p_i` (1-based). The result must stay canonical.
    pub fn divide_by_prime(&self, i: usize) -> Result<Signature, MoveError> {
        if i == 0 {
            return Err(MoveError::IndexOutOfRange);
        }
        let e = self.exponent(i) as usize;
        if e == 0 {
            return Err(MoveError::NotDivisible);
        }
        if self.exponent(i + 1) as usize > e - 1 {
            return Err(MoveError::NonCanonical);
        }
        let mut levels = self.levels.clone();
        levels[e - 1] -= 1;
        if levels[e - 1] == 0 {
            levels.pop();
        }
        Ok(Signature { levels })
    }

    /// Prime indices `i` for which `multiply_by_prime(i)` is canonical,
    /// ascending.
    pub fn successor_candidates(&self) -> Vec<usize> {
        let top = self.levels.len();
        let mut out: Vec<usize> = (1..=top + 1)
            .filter(|&k| k == 1 || self.level(k - 1) > self.level(k))
            .map(|k| self.level(k) as usize + 1)
            .collect();
        out.reverse();
        out
    }

    /// Prime indices `i` for which `divide_by_prime(i)` is canonical,
    /// ascending.
    pub fn predecessor_candidates(&self) -> Vec<usize> {
        let top = self.levels.len();
        let mut out: Vec<usize> = (1..=top)
            .filter(|&k| self.level(k) > self.level(k + 1))
            .map(|k| self.level(k) as usize)
            .collect();
        out.reverse();
        out
    }

    /// Number of elementary single-prime moves separating two signatures.
    pub fn move_distance(&self, other: &Signature) -> u64 {
        let top = self.levels.len().max(other.levels.len());
        (1..=top)
            .map(|k| (self.level(k) as i64 - other.level(k) as i64).unsigned_abs())
            .sum()
    }

    /// The represented integer. Size grows with `ln n`; meant for exact
    /// fallbacks and small values.
    pub fn to_biguint(&self) -> BigUint {
        let r = self.prime_count();
        let primes = primes::first_primes(r);
        let mut acc = BigUint::one();
        // ∏_k (p_{c_k}#): one primorial per level
        let mut primorial = BigUint::one();
        let mut built = 0usize;
        for &c in self.levels.iter().rev() {
            while built < c as usize {
                primorial *= primes[built];
                built += 1;
            }
            acc *= &primorial;
        }
        acc
    }

    /// The represented integer if it fits in a `u128`.
    pub fn to_u128(&self) -> Option<u128> {
        let exps = self.exponents();
        let primes = primes::first_primes(exps.len());
        let mut acc: u128 = 1;
        for (&e, &p) in exps.iter().zip(primes.iter()) {
            for _ in 0..e {
                acc = acc.checked_mul(p as u128)?;
            }
        }
        Some(acc)
    }

    /// Factor a natural into a signature; `None` if it is not canonical
    /// (some exponent increases or a prime is skipped).
    pub fn from_u128(mut n: u128) -> Option<Signature> {
        if n == 0 {
            return None;
        }
        let mut exps = Vec::new();
        let mut i = 1;
        while n > 1 {
            let p = primes::nth_prime(i) as u128;
            if p * p > n {
                // remaining n is prime; must be the next prime exactly
                if n != p {
                    return None;
                }
                exps.push(1);
                break;
            }
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            if e == 0 {
                return None;
            }
            exps.push(e);
            i += 1;
        }
        Signature::from_exponents(&exps).ok()
    }
}

/// `2^3 * 3 * 5 * 7`; the number 1 prints as `1`.
impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let exps = self.exponents();
        let primes = primes::first_primes(exps.len());
        for (k, (&e, &p)) in exps.iter().zip(primes.iter()).enumerate() {
            if k > 0 {
                write!(f, " * ")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}
