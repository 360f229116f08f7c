//! σ(n)/n as an unreduced exact rational with a logarithmic interval.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use crate::hp::Approx;
use crate::primes::{self, PrimeTable, Tables};
use crate::signature::Signature;

/// Abundancy of a signature. The interval `ln` is eager; the exact
/// numerator `∏ (p^{e+1} − 1)` and denominator `∏ p^e (p − 1)` are built
/// on demand since they grow with `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abundancy {
    signature: Signature,
    ln: Approx,
}

impl Abundancy {
    pub fn from_parts(signature: Signature, ln: Approx) -> Self {
        Abundancy { signature, ln }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Interval on `ln(σ(n)/n)`.
    pub fn ln(&self) -> &Approx {
        &self.ln
    }

    pub fn numerator(&self) -> BigUint {
        exact_terms(&self.signature).0
    }

    pub fn denominator(&self) -> BigUint {
        exact_terms(&self.signature).1
    }

    /// Lowest-terms form, for display.
    pub fn reduced(&self) -> (BigUint, BigUint) {
        let (n, d) = exact_terms(&self.signature);
        let g = n.gcd(&d);
        (n / &g, d / g)
    }
}

fn exact_terms(sig: &Signature) -> (BigUint, BigUint) {
    let exps = sig.exponents();
    let primes = primes::first_primes(exps.len());
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for (&e, &p) in exps.iter().zip(primes.iter()) {
        let pe = BigUint::from(p).pow(e);
        num *= &pe * p - 1u32;
        den *= pe * (p - 1);
    }
    (num, den)
}

/// σ(n)/n for a signature: `ln` accumulated per level from the step table.
pub fn abundancy(sig: &Signature, table: &PrimeTable) -> Abundancy {
    let need: Vec<usize> = sig.levels().iter().map(|&c| c as usize).collect();
    let t = table.ensure(sig.prime_count(), &need);
    abundancy_in(sig, &t)
}

pub(crate) fn abundancy_in(sig: &Signature, t: &Tables) -> Abundancy {
    Abundancy {
        signature: sig.clone(),
        ln: ln_abundancy_in(sig, t),
    }
}

pub(crate) fn ln_abundancy_in(sig: &Signature, t: &Tables) -> Approx {
    let mut acc = Approx::zero(t.bits());
    for (k, &c) in sig.levels().iter().enumerate() {
        acc.add_assign(t.level_sum(k + 1, c as usize));
    }
    acc
}

/// Exact ordering of two abundancies: interval fast path, cross
/// multiplication when the intervals overlap.
pub fn compare_abundancy(a: &Abundancy, b: &Abundancy) -> Ordering {
    compare_ln_abundancy(&a.signature, &a.ln, &b.signature, &b.ln)
}

pub(crate) fn compare_ln_abundancy(
    a: &Signature,
    la: &Approx,
    b: &Signature,
    lb: &Approx,
) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    match la.try_cmp(lb) {
        Some(o) => o,
        None => exact_compare_abundancy(a, b),
    }
}

/// Cross-multiplied comparison restricted to primes whose exponents
/// differ; the `(p − 1)` factors cancel pairwise.
pub fn exact_compare_abundancy(a: &Signature, b: &Signature) -> Ordering {
    let ea = a.exponents();
    let eb = b.exponents();
    let r = ea.len().max(eb.len());
    let primes = primes::first_primes(r);
    let mut left = BigUint::one();
    let mut right = BigUint::one();
    for (i, &p) in primes.iter().enumerate() {
        let x = ea.get(i).copied().unwrap_or(0);
        let y = eb.get(i).copied().unwrap_or(0);
        if x == y {
            continue;
        }
        let p = BigUint::from(p);
        // (p^{x+1} − 1)/p^x  vs  (p^{y+1} − 1)/p^y
        left *= (p.pow(x + 1) - 1u32) * p.pow(y);
        right *= (p.pow(y + 1) - 1u32) * p.pow(x);
    }
    left.cmp(&right)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(e: &[u32]) -> Abundancy {
        abundancy(&Signature::from_exponents(e).unwrap(), &PrimeTable::global())
    }

    fn sigma(n: u64) -> u64 {
        (1..=n).filter(|d| n.is_multiple_of(*d)).sum()
    }

    #[test]
    fn examples_match_divisor_sums() {
        let one = ab(&[]);
        assert_eq!((one.numerator(), one.denominator()), (1u32.into(), 1u32.into()));
        let twelve = ab(&[2, 1]);
        assert_eq!(sigma(12), 28);
        assert_eq!(twelve.numerator(), BigUint::from(28u32 * 2));
        assert_eq!(twelve.denominator(), BigUint::from(12u32 * 2));
        assert_eq!(twelve.reduced(), (7u32.into(), 3u32.into()));
        let two = ab(&[1]);
        assert_eq!(two.reduced(), (3u32.into(), 2u32.into()));
        assert!((twelve.ln().to_f64() - (7.0f64 / 3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn ordering_examples() {
        assert_eq!(compare_abundancy(&ab(&[2, 1]), &ab(&[3, 1])), Ordering::Less);
        let a = ab(&[2, 1]);
        assert_eq!(compare_abundancy(&a, &a.clone()), Ordering::Equal);
        assert_eq!(compare_abundancy(&ab(&[1]), &ab(&[2])), Ordering::Less);
        assert_eq!(
            exact_compare_abundancy(
                &Signature::from_exponents(&[1]).unwrap(),
                &Signature::from_exponents(&[2]).unwrap()
            ),
            Ordering::Less
        );
    }

    #[test]
    fn numerator_is_at_least_denominator() {
        for e in [&[1u32][..], &[5, 3, 1], &[2, 2, 2, 1]] {
            let a = ab(e);
            assert!(a.numerator() >= a.denominator());
        }
    }
}
