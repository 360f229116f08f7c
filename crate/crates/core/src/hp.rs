//! Fixed-point reals with a tracked absolute error bound.
//!
//! An [`Approx`] holds `value · 2^-bits` together with an error radius
//! `err · 2^-bits`; the true quantity always lies in
//! `[value - err, value + err]` (in ulps). Every operation widens the radius
//! by a rigorous bound on the rounding it performs, so comparisons either
//! come back decided or report an overlap and let the caller fall back to
//! exact integer arithmetic.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Default fractional precision for every logarithm accumulation.
pub const DEFAULT_BITS: u32 = 256;
/// Upper limit for precision escalation.
pub const MAX_BITS: u32 = 4096;
/// Extra working bits used inside series evaluations.
const GUARD_BITS: u32 = 32;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Approx {
    value: BigInt,
    err: u64,
    bits: u32,
}

impl fmt::Debug for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} ± {}ulp@{}", self.to_f64(), self.err, self.bits)
    }
}

fn ceil_to_u64(x: &BigUint) -> u64 {
    x.to_u64().unwrap_or(u64::MAX)
}

fn ceil_shift(x: &BigUint, shift: u32) -> BigUint {
    if shift == 0 {
        return x.clone();
    }
    let q: BigUint = x >> shift;
    if (&q << shift) == *x {
        q
    } else {
        q + 1u32
    }
}

impl Approx {
    pub fn zero(bits: u32) -> Self {
        Approx {
            value: BigInt::zero(),
            err: 0,
            bits,
        }
    }

    pub fn from_int(v: i64, bits: u32) -> Self {
        Approx {
            value: BigInt::from(v) << bits,
            err: 0,
            bits,
        }
    }

    /// Exact conversion of a finite `f64` (the binary value is representable
    /// whenever `bits` ≥ 1074; otherwise it is rounded and the error recorded).
    pub fn from_f64(v: f64, bits: u32) -> Self {
        assert!(v.is_finite(), "non-finite value");
        if v == 0.0 {
            return Self::zero(bits);
        }
        let raw = v.to_bits();
        let exp = ((raw >> 52) & 0x7ff) as i64;
        let frac = raw & ((1u64 << 52) - 1);
        let (mant, e2) = if exp == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let mut value = BigInt::from(mant);
        let shift = e2 + bits as i64;
        let mut err = 0;
        if shift >= 0 {
            value <<= shift as usize;
        } else {
            let s = (-shift) as usize;
            let exact = value.clone();
            value = (value + (BigInt::one() << (s - 1))) >> s;
            if (&value << s) != exact {
                err = 1;
            }
        }
        if v < 0.0 {
            value = -value;
        }
        Approx { value, err, bits }
    }

    pub fn from_parts(value: BigInt, err: u64, bits: u32) -> Self {
        Approx { value, err, bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Error radius in units of `2^-bits`.
    pub fn err_ulps(&self) -> u64 {
        self.err
    }

    pub fn raw(&self) -> &BigInt {
        &self.value
    }

    pub fn is_exact(&self) -> bool {
        self.err == 0
    }

    fn check(&self, other: &Approx) {
        assert_eq!(self.bits, other.bits, "precision mismatch");
    }

    pub fn add(&self, other: &Approx) -> Approx {
        self.check(other);
        Approx {
            value: &self.value + &other.value,
            err: self.err.saturating_add(other.err),
            bits: self.bits,
        }
    }

    pub fn sub(&self, other: &Approx) -> Approx {
        self.check(other);
        Approx {
            value: &self.value - &other.value,
            err: self.err.saturating_add(other.err),
            bits: self.bits,
        }
    }

    pub fn add_assign(&mut self, other: &Approx) {
        self.check(other);
        self.value += &other.value;
        self.err = self.err.saturating_add(other.err);
    }

    pub fn sub_assign(&mut self, other: &Approx) {
        self.check(other);
        self.value -= &other.value;
        self.err = self.err.saturating_add(other.err);
    }

    pub fn neg(&self) -> Approx {
        Approx {
            value: -&self.value,
            err: self.err,
            bits: self.bits,
        }
    }

    /// Exact multiplication by a natural.
    pub fn scale(&self, k: u64) -> Approx {
        Approx {
            value: &self.value * k,
            err: self.err.saturating_mul(k),
            bits: self.bits,
        }
    }

    pub fn mul(&self, other: &Approx) -> Approx {
        self.check(other);
        let b = self.bits;
        let prod = &self.value * &other.value;
        let value = if b == 0 {
            prod
        } else {
            (prod + (BigInt::one() << (b - 1))) >> b
        };
        // |A|·eb + |B|·ea + ea·eb, in units of 2^-2b, then one rounding ulp.
        let a_abs = self.value.magnitude();
        let b_abs = other.value.magnitude();
        let cross = a_abs * other.err + b_abs * self.err + BigUint::from(self.err) * other.err;
        let err = ceil_to_u64(&ceil_shift(&cross, b)).saturating_add(1);
        Approx {
            value,
            err,
            bits: b,
        }
    }

    /// Quotient; `None` when the divisor's interval contains zero.
    pub fn div(&self, other: &Approx) -> Option<Approx> {
        self.check(other);
        let b = self.bits;
        let den_abs = other.value.magnitude();
        if den_abs <= &BigUint::from(other.err) {
            return None;
        }
        let num = &self.value << b;
        let (q, _) = num.div_rem(&other.value);
        // (2^b·ea + |Q|·eb) / (|B| − eb) + 1 for truncation.
        let bound = (BigUint::from(self.err) << b) + q.magnitude() * other.err;
        let slack = den_abs - other.err;
        let (e, r) = bound.div_rem(&slack);
        let e = if r.is_zero() { e } else { e + 1u32 };
        Some(Approx {
            value: q,
            err: ceil_to_u64(&e).saturating_add(1),
            bits: b,
        })
    }

    /// Change precision, rounding to nearest when narrowing.
    pub fn with_bits(&self, bits: u32) -> Approx {
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let s = bits - self.bits;
                Approx {
                    value: &self.value << s,
                    err: self.err.saturating_mul(1u64.checked_shl(s).unwrap_or(u64::MAX)),
                    bits,
                }
            }
            Ordering::Less => {
                let s = self.bits - bits;
                let half = BigInt::one() << (s - 1);
                let value = (&self.value + half) >> s;
                let err = ceil_to_u64(&ceil_shift(&BigUint::from(self.err), s));
                Approx {
                    value,
                    err: err.saturating_add(1),
                    bits,
                }
            }
        }
    }

    /// Ordering of the two intervals, or `None` when they overlap.
    /// Two exact equal values compare `Equal`.
    pub fn try_cmp(&self, other: &Approx) -> Option<Ordering> {
        self.check(other);
        let d = &self.value - &other.value;
        let slack = self.err as u128 + other.err as u128;
        if slack == 0 {
            return Some(d.sign_ord());
        }
        if d.magnitude() > &BigUint::from(slack) {
            Some(d.sign_ord())
        } else {
            None
        }
    }

    /// Sign of the represented quantity, if decided.
    pub fn try_sign(&self) -> Option<Ordering> {
        if self.err == 0 {
            return Some(self.value.sign_ord());
        }
        if self.value.magnitude() > &BigUint::from(self.err) {
            Some(self.value.sign_ord())
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        let shift = self.bits.saturating_sub(60);
        let head: BigInt = &self.value >> shift;
        head.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-((self.bits - shift) as i32))
    }

    /// Error radius as an `f64` (rounded up).
    pub fn error_f64(&self) -> f64 {
        let e = self.err as f64 * 2f64.powi(-(self.bits.min(1000) as i32));
        if self.bits > 1000 {
            e * 2f64.powi(-((self.bits - 1000) as i32))
        } else {
            e
        }
    }

    /// Round half-up to `decimals` decimal places; `None` when the interval
    /// straddles a rounding boundary.
    pub fn round_decimal(&self, decimals: u32) -> Option<BigInt> {
        let scale = BigInt::from(10u32).pow(decimals);
        let lo = (&self.value - BigInt::from(self.err)) * &scale;
        let hi = (&self.value + BigInt::from(self.err)) * &scale;
        let half = BigInt::one() << (self.bits.max(1) - 1);
        let r = |x: BigInt| (x + &half).div_floor(&(BigInt::one() << self.bits));
        let (a, b) = (r(lo), r(hi));
        (a == b).then_some(a)
    }
}

trait SignOrd {
    fn sign_ord(&self) -> Ordering;
}

impl SignOrd for BigInt {
    fn sign_ord(&self) -> Ordering {
        match self.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

/// `atanh(num/den)` for `0 ≤ num/den ≤ 1/2`, to `bits` fractional bits.
pub fn atanh_ratio(num: &BigUint, den: &BigUint, bits: u32) -> Approx {
    assert!(!den.is_zero());
    assert!(num * 2u32 <= *den, "atanh argument out of range");
    let w = bits + GUARD_BITS;
    let num2 = num * num;
    let den2 = den * den;
    let mut t: BigUint = (num << w) / den;
    let mut t_err: u64 = 1;
    let mut sum = BigUint::zero();
    let mut sum_err: u64 = 0;
    let mut k: u64 = 0;
    while !t.is_zero() {
        let d = 2 * k + 1;
        sum += &t / d;
        sum_err += t_err / d + 1;
        t = t * &num2 / &den2;
        t_err += 1;
        k += 1;
    }
    // Tail after a vanished term: true t_k ≤ t_err, ratio ≤ 1/4.
    sum_err += 2 * t_err + 1;
    let exact = Approx {
        value: BigInt::from(sum),
        err: sum_err,
        bits: w,
    };
    exact.with_bits(bits)
}

/// `ln 2` to `bits` fractional bits.
pub fn ln2(bits: u32) -> Approx {
    atanh_ratio(&BigUint::one(), &BigUint::from(3u32), bits + 1)
        .scale(2)
        .with_bits(bits)
}

/// Natural log of a natural `m ≥ 1`.
pub fn ln_natural(m: &BigUint, bits: u32) -> Approx {
    assert!(!m.is_zero(), "ln of zero");
    let k = m.bits() - 1;
    let pow = BigUint::one() << k;
    let w = bits + 8;
    let mut acc = ln2(w).scale(k);
    if *m != pow {
        let t = atanh_ratio(&(m - &pow), &(m + &pow), w).scale(2);
        acc.add_assign(&t);
    }
    acc.with_bits(bits)
}

/// `ln(σ(p^(e+1)) / (p·σ(p^e)))`: the log-abundancy gained by raising the
/// exponent of `p` from `e` to `e + 1`.
pub fn ln_step_ratio(p: u64, e: u32, bits: u32) -> Approx {
    // (p^(e+2) − 1)/(p^(e+2) − p) = (1+z)/(1−z), z = (p−1)/(2p^(e+2) − p − 1)
    let pe2 = BigUint::from(p).pow(e + 2);
    let num = BigUint::from(p - 1);
    let den = (pe2 << 1u32) - p - 1u32;
    atanh_ratio(&num, &den, bits + 1).scale(2).with_bits(bits)
}
