//! Scale-aware arithmetic helpers over [`BigDecimal`].
//!
//! Every operation that can lose information takes an explicit `digits`
//! argument naming the number of fractional decimal digits to keep, and
//! rounds half-even at that position. Nothing here rounds implicitly.

use bigdecimal::rounding::RoundingMode;
use bigdecimal::{BigDecimal, One, Signed, ToPrimitive, Zero};
use num_bigint::BigInt;

use crate::error::{Error, Result};

/// Round to `digits` fractional digits, half-even.
pub fn round_to(x: &BigDecimal, digits: u32) -> BigDecimal {
    x.with_scale_round(digits as i64, RoundingMode::HalfEven)
}

/// `a * b` rounded to `digits` fractional digits.
pub fn mul_to(a: &BigDecimal, b: &BigDecimal, digits: u32) -> BigDecimal {
    round_to(&(a * b), digits)
}

/// `num / den` rounded half-even to exactly `digits` fractional digits.
///
/// The default `Div` impl rounds to a precision chosen by the library;
/// this variant keeps the rounding position under caller control.
pub fn div_to(num: &BigDecimal, den: &BigDecimal, digits: u32) -> Result<BigDecimal> {
    if den.is_zero() {
        return Err(Error::Domain("division by zero".into()));
    }
    let (nm, ns) = num.as_bigint_and_exponent();
    let (dm, ds) = den.as_bigint_and_exponent();
    // num/den = (nm/dm) * 10^(ds - ns); scale the numerator so the integer
    // quotient is the desired mantissa.
    let shift = digits as i64 + ds - ns;
    let (nm, dm) = if shift >= 0 {
        (nm * pow10_int(shift as u64), dm)
    } else {
        (nm, dm * pow10_int((-shift) as u64))
    };
    let q = div_round_half_even(&nm, &dm);
    Ok(BigDecimal::new(q, digits as i64))
}

/// Integer quotient of `n / d` rounded half-even, signs handled via magnitudes.
fn div_round_half_even(n: &BigInt, d: &BigInt) -> BigInt {
    let negative = (n.sign() * d.sign()) == num_bigint::Sign::Minus;
    let (na, da) = (n.magnitude(), d.magnitude());
    let mut q = na / da;
    let r = na % da;
    let twice = &r << 1;
    if twice > *da || (twice == *da && q.bit(0)) {
        q += 1u32;
    }
    let q = BigInt::from(q);
    if negative {
        -q
    } else {
        q
    }
}

/// `10^k` as an exact integer.
pub fn pow10_int(k: u64) -> BigInt {
    BigInt::from(10u32).pow(k as u32)
}

/// `10^-k`, the usual shape of a tolerance.
pub fn pow10_neg(k: u32) -> BigDecimal {
    BigDecimal::new(BigInt::one(), k as i64)
}

/// Largest integer not exceeding `x`.
pub fn floor_int(x: &BigDecimal) -> BigInt {
    x.with_scale_round(0, RoundingMode::Floor)
        .as_bigint_and_exponent()
        .0
}

/// Clamp into `[0, 1]` without touching values already inside.
pub fn clamp01(x: &BigDecimal) -> BigDecimal {
    if x.is_negative() {
        BigDecimal::zero()
    } else if *x > BigDecimal::one() {
        BigDecimal::one()
    } else {
        x.clone()
    }
}

/// Estimate `log10 |x|` as an `f64`; `None` for zero.
///
/// Uses the top 15 significant digits, so the estimate is good to roughly
/// 1e-13 regardless of magnitude. Intended for sizing and diagnostics,
/// not for arithmetic.
pub fn log10_approx(x: &BigDecimal) -> Option<f64> {
    if x.is_zero() {
        return None;
    }
    let (m, s) = x.as_bigint_and_exponent();
    let mag = m.magnitude();
    let nd = x.digits();
    let excess = nd.saturating_sub(15);
    let lead = if excess > 0 {
        mag / pow10_int(excess).magnitude()
    } else {
        mag.clone()
    };
    let lead: f64 = lead.to_f64()?;
    Some(lead.log10() + excess as f64 - s as f64)
}

/// `x^k` with intermediate products rounded to `digits` fractional digits.
pub fn pow_int(x: &BigDecimal, k: u64, digits: u32) -> BigDecimal {
    let mut base = round_to(x, digits);
    let mut acc = BigDecimal::one();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = mul_to(&acc, &base, digits);
        }
        k >>= 1;
        if k > 0 {
            base = mul_to(&base, &base, digits);
        }
    }
    acc
}

/// `q`-th root of a positive decimal by Newton iteration, rounded to `digits`.
pub fn nth_root(a: &BigDecimal, q: u64, digits: u32) -> Result<BigDecimal> {
    if q == 0 {
        return Err(Error::Domain("zeroth root".into()));
    }
    if a.is_zero() {
        return Ok(BigDecimal::zero());
    }
    if a.is_negative() {
        return Err(Error::Domain("root of a negative value".into()));
    }
    if q == 1 {
        return Ok(round_to(a, digits));
    }
    let work = digits + 8;
    let l = log10_approx(a).expect("nonzero") / q as f64;
    // An f64 seed is good to ~15 digits; quadratic convergence then needs
    // log2(work/15) + slack iterations. Power-of-ten fallback for the
    // ranges f64 cannot represent costs a few more.
    let mut x = if l.abs() < 250.0 {
        BigDecimal::try_from(10f64.powf(l)).expect("finite")
    } else {
        BigDecimal::new(BigInt::one(), -(l.round() as i64))
    };
    let qd = BigDecimal::from(q);
    let qm1 = BigDecimal::from(q - 1);
    let stop = pow10_neg(work.saturating_sub(2));
    for _ in 0..128 {
        let xp = pow_int(&x, q - 1, work);
        let next = div_to(&(&qm1 * &x + div_to(a, &xp, work)?), &qd, work)?;
        let delta = (&next - &x).abs();
        x = next;
        if delta <= &stop * x.abs() {
            return Ok(round_to(&x, digits));
        }
    }
    Err(Error::Convergence {
        terms: 128,
        digits,
    })
}

/// `10^x` for an arbitrary decimal exponent, rounded to `digits`.
///
/// Splits `x` into integer and fractional parts; the fractional part
/// `p / 10^t` is reduced and evaluated as `(10^(1/q))^p`, so accuracy
/// comes down to one Newton root plus an integer power.
pub fn pow10(x: &BigDecimal, digits: u32) -> Result<BigDecimal> {
    let i = floor_int(x);
    let frac = x - BigDecimal::from(i.clone());
    let shift: i64 = i
        .try_into()
        .map_err(|_| Error::Domain("exponent out of range".into()))?;
    if shift.abs() > 1_000_000_000 {
        return Err(Error::Domain("exponent out of range".into()));
    }
    if frac.is_zero() {
        return Ok(round_to(&BigDecimal::new(BigInt::one(), -shift), digits));
    }
    let frac = frac.normalized();
    let (pm, t) = frac.as_bigint_and_exponent();
    if !(1..=18).contains(&t) {
        return Err(Error::Domain(format!(
            "exponent has {t} fractional digits, at most 18 supported"
        )));
    }
    let p: u128 = pm.try_into().expect("fraction in (0,1)");
    let tenq = 10u128.pow(t as u32);
    let g = gcd_u128(p, tenq);
    let (p, q) = (p / g, tenq / g);
    // Raising to p amplifies the root's relative error by p, so widen by
    // its digit count.
    let work = digits + 10 + p.ilog10();
    let r = nth_root(&BigDecimal::from(10u32), q as u64, work)?;
    let f = pow_int(&r, p as u64, work);
    let (fm, fs) = f.as_bigint_and_exponent();
    Ok(round_to(&BigDecimal::new(fm, fs - shift), digits))
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Convenience: parse a literal that is known to be valid decimal text.
pub fn parse(s: &str) -> BigDecimal {
    s.parse().expect("valid decimal literal")
}

/// `x` as an `f64`, for reporting only.
pub fn to_f64(x: &BigDecimal) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> BigDecimal {
        parse(s)
    }

    #[test]
    fn div_rounds_half_even_at_requested_scale() {
        assert_eq!(div_to(&d("1"), &d("3"), 10).unwrap(), d("0.3333333333"));
        assert_eq!(div_to(&d("2"), &d("3"), 10).unwrap(), d("0.6666666667"));
        // ties land on the even digit
        assert_eq!(div_to(&d("1"), &d("8"), 2).unwrap(), d("0.12"));
        assert_eq!(div_to(&d("3"), &d("8"), 2).unwrap(), d("0.38"));
        assert_eq!(div_to(&d("1"), &d("4"), 1).unwrap(), d("0.2"));
        assert_eq!(div_to(&d("-1"), &d("8"), 2).unwrap(), d("-0.12"));
    }

    #[test]
    fn div_result_carries_exact_scale() {
        let q = div_to(&d("1"), &d("2"), 6).unwrap();
        assert_eq!(q.as_bigint_and_exponent().1, 6);
        assert_eq!(q, d("0.5"));
    }

    #[test]
    fn div_by_zero_is_a_domain_error() {
        assert!(matches!(
            div_to(&d("1"), &d("0"), 5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn round_to_half_even() {
        assert_eq!(round_to(&d("2.675"), 2), d("2.68"));
        assert_eq!(round_to(&d("2.665"), 2), d("2.66"));
        assert_eq!(round_to(&d("-2.675"), 2), d("-2.68"));
    }

    #[test]
    fn floor_handles_signs() {
        assert_eq!(floor_int(&d("1.7")), BigInt::from(1));
        assert_eq!(floor_int(&d("-1.2")), BigInt::from(-2));
        assert_eq!(floor_int(&d("3")), BigInt::from(3));
    }

    #[test]
    fn log10_estimate_tracks_magnitude() {
        assert!((log10_approx(&d("1000")).unwrap() - 3.0).abs() < 1e-12);
        assert!((log10_approx(&d("0.001")).unwrap() + 3.0).abs() < 1e-12);
        let wide = d("123456789012345678901234567890");
        assert!((log10_approx(&wide).unwrap() - 29.09151497716927).abs() < 1e-9);
        assert!(log10_approx(&d("0")).is_none());
    }

    #[test]
    fn integer_powers() {
        assert_eq!(pow_int(&d("2"), 10, 5), d("1024"));
        assert_eq!(pow_int(&d("1.5"), 3, 10), d("3.375"));
        assert_eq!(pow_int(&d("7"), 0, 5), d("1"));
    }

    #[test]
    fn newton_roots_match_references() {
        assert_eq!(
            nth_root(&d("2"), 2, 30).unwrap(),
            d("1.414213562373095048801688724210")
        );
        assert_eq!(nth_root(&d("27"), 3, 10).unwrap(), d("3"));
        let r = nth_root(&d("10"), 1000, 20).unwrap();
        let expect = 10f64.powf(1.0 / 1000.0);
        assert!((to_f64(&r) - expect).abs() < 1e-12);
    }

    #[test]
    fn pow10_handles_integer_and_fractional_exponents() {
        assert_eq!(pow10(&d("2"), 5).unwrap(), d("100"));
        assert_eq!(pow10(&d("0"), 5).unwrap(), d("1"));
        assert_eq!(
            pow10(&d("0.5"), 30).unwrap(),
            d("3.162277660168379331998893544433")
        );
        assert_eq!(
            pow10(&d("-1.25"), 20).unwrap(),
            d("0.05623413251903490804")
        );
        // 10^-2.5 = 10^0.5 / 1000
        assert_eq!(pow10(&d("-2.5"), 12).unwrap(), d("0.003162277660"));
        assert!(pow10(&d("0.1234567890123456789"), 10).is_err());
    }

    #[test]
    fn clamp_only_touches_outliers() {
        assert_eq!(clamp01(&d("-0.001")), d("0"));
        assert_eq!(clamp01(&d("1.5")), d("1"));
        assert_eq!(clamp01(&d("0.25")), d("0.25"));
    }
}
