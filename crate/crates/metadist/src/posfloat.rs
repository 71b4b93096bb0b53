//! Nonnegative binary floating-point numbers with big mantissas, used to
//! sum positive series fast.
//!
//! A value is `mantissa * 2^exp2`. Multiplication truncates the mantissa
//! back to a caller-chosen bit width by a plain right shift, division
//! pre-shifts the numerator, and addition aligns exponents exactly. All
//! rounding is truncation toward zero, so relative errors are one-sided
//! and bounded by `2^(1-bits)` per operation, which is the right trade
//! for series whose terms are all nonnegative: sums can only be slightly
//! underestimated, never oscillate.
//!
//! Decimal values enter and leave through [`BigDecimal`] conversions at
//! the boundaries; everything inside stays binary, where truncation is a
//! shift instead of a division by a power of ten.

use bigdecimal::{BigDecimal, Signed, Zero};
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use crate::dec;
use crate::error::{Error, Result};

const LOG10_2: f64 = std::f64::consts::LOG10_2;
pub const LOG2_10: f64 = std::f64::consts::LOG2_10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosFloat {
    m: BigUint,
    e: i64,
}

impl PosFloat {
    pub fn from_u64(v: u64) -> Self {
        Self {
            m: BigUint::from(v),
            e: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    /// Convert a nonnegative decimal, keeping about `bits` mantissa bits.
    pub fn from_bigdecimal(x: &BigDecimal, bits: u64) -> Result<Self> {
        if x.is_negative() {
            return Err(Error::Domain(format!(
                "expected a nonnegative value, got {}",
                x.normalized()
            )));
        }
        if x.is_zero() {
            return Ok(Self::from_u64(0));
        }
        let (bm, s) = x.as_bigint_and_exponent();
        let mu = bm.magnitude().clone();
        if s <= 0 {
            let mut r = Self {
                m: mu * dec::pow10_int((-s) as u64).magnitude(),
                e: 0,
            };
            r.trunc(bits);
            return Ok(r);
        }
        let den = dec::pow10_int(s as u64).magnitude().clone();
        let g = (bits + den.bits() + 16).saturating_sub(mu.bits());
        Ok(Self {
            m: (mu << g) / den,
            e: -(g as i64),
        })
    }

    /// Convert to decimal with `digits` fractional digits, half-even.
    pub fn to_bigdecimal(&self, digits: u32) -> BigDecimal {
        if self.is_zero() {
            return BigDecimal::zero();
        }
        if self.e >= 0 {
            let int = BigInt::from(self.m.clone() << self.e as u64);
            return dec::round_to(&BigDecimal::new(int, 0), digits);
        }
        let work = digits as u64 + 2;
        let num = &self.m * dec::pow10_int(work).magnitude();
        let mant = num >> (-self.e) as u64;
        dec::round_to(&BigDecimal::new(BigInt::from(mant), work as i64), digits)
    }

    /// Truncate the mantissa to at most `bits` bits (toward zero).
    pub fn trunc(&mut self, bits: u64) {
        let b = self.m.bits();
        if b > bits {
            let sh = b - bits;
            self.m >>= sh;
            self.e += sh as i64;
        }
    }

    /// Product truncated to `bits` mantissa bits.
    pub fn mul(&self, rhs: &Self, bits: u64) -> Self {
        let mut r = Self {
            m: &self.m * &rhs.m,
            e: self.e + rhs.e,
        };
        r.trunc(bits);
        r
    }

    /// Exact scaling by a small factor; the mantissa grows by up to 64 bits.
    pub fn mul_u64(&mut self, k: u64) {
        self.m *= k;
    }

    pub fn mul_u128(&mut self, k: u128) {
        self.m *= BigUint::from(k);
    }

    /// Divide by a small positive integer. The mantissa is pre-shifted by
    /// 128 bits, so the truncation keeps full relative precision as long
    /// as the current mantissa is already at working width.
    pub fn div_u128(&mut self, d: u128) {
        debug_assert!(d > 0);
        self.m = (&self.m << 128u32) / BigUint::from(d);
        self.e -= 128;
    }

    /// Quotient with about `bits` mantissa bits.
    pub fn div(&self, rhs: &Self, bits: u64) -> Self {
        debug_assert!(!rhs.is_zero());
        if self.is_zero() {
            return Self::from_u64(0);
        }
        let sh = (bits + rhs.m.bits() + 2).saturating_sub(self.m.bits());
        Self {
            m: (&self.m << sh) / &rhs.m,
            e: self.e - sh as i64 - rhs.e,
        }
    }

    /// Exact addition; exponents are aligned by shifting, never rounding.
    pub fn add_assign(&mut self, rhs: &Self) {
        if rhs.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = rhs.clone();
            return;
        }
        if self.e >= rhs.e {
            self.m = (&self.m << (self.e - rhs.e) as u64) + &rhs.m;
            self.e = rhs.e;
        } else {
            self.m += &rhs.m << (rhs.e - self.e) as u64;
        }
    }

    /// `self^k` by binary exponentiation at `bits` mantissa bits.
    pub fn pow_u64(&self, k: u64, bits: u64) -> Self {
        let mut acc = Self::from_u64(1);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base, bits);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base, bits);
            }
        }
        acc
    }

    /// `log10` of the value, good to ~1e-12; `-inf` for zero.
    pub fn log10_est(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let b = self.m.bits();
        if b <= 53 {
            let v = self.m.to_f64().expect("small mantissa");
            return v.log10() + self.e as f64 * LOG10_2;
        }
        let top = (&self.m >> (b - 53)).to_f64().expect("53 bits");
        top.log10() + ((b - 53) as f64 + self.e as f64) * LOG10_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::parse as d;

    const P: u64 = 160;

    #[test]
    fn decimal_round_trips_within_target_precision() {
        for s in [
            "1",
            "0.1",
            "123.456",
            "0.000001234",
            "98765432109876543210.5",
        ] {
            let x = d(s);
            let back = PosFloat::from_bigdecimal(&x, P).unwrap().to_bigdecimal(30);
            let err = (&back - &x).abs();
            assert!(err < dec::pow10_neg(28), "{s}: {back}");
        }
    }

    #[test]
    fn zero_and_negatives() {
        assert!(PosFloat::from_bigdecimal(&d("0"), P).unwrap().is_zero());
        assert!(PosFloat::from_bigdecimal(&d("-1"), P).is_err());
        assert_eq!(PosFloat::from_u64(0).to_bigdecimal(5), d("0"));
    }

    #[test]
    fn small_integer_arithmetic_is_exact() {
        let mut a = PosFloat::from_u64(3);
        a.mul_u64(5);
        assert_eq!(a.to_bigdecimal(0), d("15"));
        let b = PosFloat::from_u64(2).pow_u64(100, 256);
        let mut c = b.clone();
        c.add_assign(&PosFloat::from_u64(1));
        assert_eq!(c.to_bigdecimal(0), d("1267650600228229401496703205377"));
    }

    #[test]
    fn truncated_products_stay_close() {
        let a = PosFloat::from_bigdecimal(&d("0.1"), P).unwrap();
        let b = PosFloat::from_bigdecimal(&d("0.3"), P).unwrap();
        let p = a.mul(&b, P).to_bigdecimal(30);
        assert!((&p - d("0.03")).abs() < dec::pow10_neg(28));
    }

    #[test]
    fn scalar_division_keeps_precision() {
        let mut x = PosFloat::from_u64(1);
        x.div_u128(3);
        let got = x.to_bigdecimal(25);
        assert_eq!(got, d("0.3333333333333333333333333"));
    }

    #[test]
    fn big_division() {
        let a = PosFloat::from_bigdecimal(&d("2"), P).unwrap();
        let b = PosFloat::from_bigdecimal(&d("7"), P).unwrap();
        let q = a.div(&b, P).to_bigdecimal(30);
        let expect = dec::div_to(&d("2"), &d("7"), 30).unwrap();
        assert!((&q - &expect).abs() < dec::pow10_neg(28));
    }

    #[test]
    fn log_estimate() {
        let big = PosFloat::from_u64(10).pow_u64(100, 512);
        assert!((big.log10_est() - 100.0).abs() < 1e-9);
        let small = PosFloat::from_bigdecimal(&d("0.001"), P).unwrap();
        assert!((small.log10_est() + 3.0).abs() < 1e-9);
        assert_eq!(PosFloat::from_u64(0).log10_est(), f64::NEG_INFINITY);
    }

    #[test]
    fn addition_aligns_mixed_exponents() {
        let mut s = PosFloat::from_bigdecimal(&d("0.25"), P).unwrap();
        s.add_assign(&PosFloat::from_u64(4));
        let got = s.to_bigdecimal(10);
        assert_eq!(got, d("4.25").with_scale(10));
    }
}
