//! Moment sequences for the reference distributions and the Poisson SIR
//! model, plus CSV interchange.
//!
//! Generators round once: values are carried as exact rationals (or with
//! guard digits where a running product is unavoidable) and divided down
//! to the requested budget in a single half-even rounding per moment.

use std::fmt::Write as _;
use std::path::Path;

use bigdecimal::{BigDecimal, One, Signed, Zero};
use num_bigint::BigInt;

use crate::dec;
use crate::error::{Error, Result};
use crate::hyp2f1::{gauss_2f1_sir, Hyp2f1Request};
use crate::transform::MomentVector;

/// Extra digits carried inside running-product generators.
const GEN_GUARD: u32 = 8;

/// Shape parameters of a beta distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaParams {
    alpha: BigDecimal,
    beta: BigDecimal,
}

impl BetaParams {
    pub fn new(alpha: BigDecimal, beta: BigDecimal) -> Result<Self> {
        if alpha <= BigDecimal::zero() || beta <= BigDecimal::zero() {
            return Err(Error::Domain(format!(
                "beta shape parameters must be positive, got ({}, {})",
                alpha.normalized(),
                beta.normalized()
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> &BigDecimal {
        &self.alpha
    }

    pub fn beta(&self) -> &BigDecimal {
        &self.beta
    }
}

/// SIR threshold (linear scale) and path-loss parameter delta = 2/exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct SirParams {
    theta: BigDecimal,
    delta: BigDecimal,
}

impl SirParams {
    pub fn new(theta: BigDecimal, delta: BigDecimal) -> Result<Self> {
        if theta <= BigDecimal::zero() {
            return Err(Error::Domain(format!(
                "SIR threshold must be positive, got {}",
                theta.normalized()
            )));
        }
        if delta <= BigDecimal::zero() || delta >= BigDecimal::one() {
            return Err(Error::Domain(format!(
                "delta must lie strictly inside (0, 1), got {}",
                delta.normalized()
            )));
        }
        Ok(Self { theta, delta })
    }

    /// Build from a threshold in dB; the linear value is computed once,
    /// here, at `digits` precision.
    pub fn from_db(theta_db: &BigDecimal, delta: BigDecimal, digits: u32) -> Result<Self> {
        Self::new(theta_db_to_linear(theta_db, digits)?, delta)
    }

    pub fn theta(&self) -> &BigDecimal {
        &self.theta
    }

    pub fn delta(&self) -> &BigDecimal {
        &self.delta
    }
}

/// `10^(db/10)` at `digits` precision; the only dB-to-linear conversion
/// in the crate.
pub fn theta_db_to_linear(db: &BigDecimal, digits: u32) -> Result<BigDecimal> {
    let (m, s) = db.as_bigint_and_exponent();
    dec::pow10(&BigDecimal::new(m, s + 1), digits)
}

/// `M_j = 1/(j+1)`.
pub fn uniform_moments(n: usize, digits: u32) -> Result<MomentVector> {
    check_digits(digits, 1)?;
    let one = BigDecimal::one();
    let values = (0..=n)
        .map(|j| dec::div_to(&one, &BigDecimal::from(j as u64 + 1), digits))
        .collect::<Result<Vec<_>>>()?;
    MomentVector::new(values, digits)
}

/// `M_j = nu^j`, the degenerate distribution at `nu`.
pub fn point_mass_moments(nu: &BigDecimal, n: usize, digits: u32) -> Result<MomentVector> {
    check_digits(digits, 1)?;
    if nu.is_negative() || *nu > BigDecimal::one() {
        return Err(Error::Domain(format!(
            "point mass location {} outside [0, 1]",
            nu.normalized()
        )));
    }
    let work = digits + GEN_GUARD;
    let mut values = Vec::with_capacity(n + 1);
    let mut cur = BigDecimal::one();
    for j in 0..=n {
        if j > 0 {
            cur = dec::mul_to(&cur, nu, work);
        }
        values.push(dec::round_to(&cur, digits));
    }
    MomentVector::new(values, digits)
}

/// `M_j` of Beta(alpha, beta) via the running product
/// `prod_{i<j} (alpha+i)/(alpha+beta+i)`.
///
/// Numerator and denominator are kept as exact integers (the parameters'
/// fractional digits are scaled out), so each moment is a single division
/// of an exact rational: Beta(1, 1) reproduces `uniform_moments`
/// digit-for-digit.
pub fn beta_moments(params: &BetaParams, n: usize, digits: u32) -> Result<MomentVector> {
    check_digits(digits, 1)?;
    let scale = params
        .alpha
        .normalized()
        .fractional_digit_count()
        .max(params.beta.normalized().fractional_digit_count())
        .max(0) as u64;
    let ten = dec::pow10_int(scale);
    let a0 = scaled_int(&params.alpha, scale);
    let ab0 = &a0 + scaled_int(&params.beta, scale);
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j > 0 {
            let i = BigInt::from(j as u64 - 1) * &ten;
            num *= &a0 + &i;
            den *= &ab0 + &i;
        }
        values.push(dec::div_to(
            &BigDecimal::new(num.clone(), 0),
            &BigDecimal::new(den.clone(), 0),
            digits,
        )?);
    }
    MomentVector::new(values, digits)
}

fn scaled_int(x: &BigDecimal, scale: u64) -> BigInt {
    let (m, s) = x.normalized().as_bigint_and_exponent();
    // s <= scale by construction; s can be negative for values like 50
    m * dec::pow10_int((scale as i64 - s) as u64)
}

/// SIR meta-distribution moments `M_j = 1/2F1(j, -delta; 1-delta; -theta)`
/// for the Poisson network model.
pub fn sir_poisson_moments(params: &SirParams, n: usize, digits: u32) -> Result<MomentVector> {
    check_digits(digits, 16)?;
    let work = digits + GEN_GUARD;
    let one = BigDecimal::one();
    let mut values = Vec::with_capacity(n + 1);
    values.push(dec::round_to(&one, digits));
    for j in 1..=n {
        let req = Hyp2f1Request::new(j as u64, params.delta.clone(), params.theta.clone(), work)?;
        let f = gauss_2f1_sir(&req)?;
        values.push(dec::div_to(&one, &f, digits)?);
    }
    MomentVector::new(values, digits)
}

fn check_digits(digits: u32, min: u32) -> Result<()> {
    if digits < min {
        return Err(Error::Domain(format!(
            "digit budget {digits} below the required minimum {min}"
        )));
    }
    Ok(())
}

/// Write a moment vector as `j,M_j` CSV, full stored precision.
pub fn save_moments(moments: &MomentVector, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, moments_to_csv(moments))?;
    Ok(())
}

/// The CSV text written by [`save_moments`].
pub fn moments_to_csv(moments: &MomentVector) -> String {
    let mut out = String::from("j,M_j\n");
    for (j, v) in moments.values().iter().enumerate() {
        // plain notation at the stored scale: no exponent forms, no
        // trailing-zero trimming, so the digit budget survives round trips
        let _ = writeln!(out, "{},{}", j, v.to_plain_string());
    }
    out
}

/// Read a `j,M_j` CSV produced by [`save_moments`] (or by hand).
///
/// The digit budget is inferred as the widest fractional part present.
/// Lines starting with `#` are ignored.
pub fn load_moments(path: impl AsRef<Path>) -> Result<MomentVector> {
    let text = std::fs::read_to_string(path)?;
    moments_from_csv(&text)
}

pub fn moments_from_csv(text: &str) -> Result<MomentVector> {
    let mut values: Vec<BigDecimal> = Vec::new();
    let mut digits: i64 = 0;
    let mut header_seen = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = lineno + 1;
        if !header_seen {
            if line != "j,M_j" {
                return Err(Error::Parse {
                    line: lineno,
                    reason: format!("expected header 'j,M_j', got '{line}'"),
                });
            }
            header_seen = true;
            continue;
        }
        let (js, vs) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: lineno,
            reason: "expected two comma-separated fields".into(),
        })?;
        let j: usize = js.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            reason: format!("invalid index '{}'", js.trim()),
        })?;
        if j != values.len() {
            return Err(Error::Parse {
                line: lineno,
                reason: format!("indices must be consecutive from 0, got {j}"),
            });
        }
        let v: BigDecimal = vs.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            reason: format!("invalid decimal '{}'", vs.trim()),
        })?;
        digits = digits.max(v.fractional_digit_count());
        values.push(v);
    }
    if !header_seen {
        return Err(Error::Parse {
            line: 1,
            reason: "missing 'j,M_j' header".into(),
        });
    }
    MomentVector::new(values, digits.max(1) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::parse as d;

    #[test]
    fn uniform_frozen_values() {
        let m = uniform_moments(9, 20).unwrap();
        assert_eq!(m.values()[0], d("1"));
        assert_eq!(m.values()[1], d("0.5"));
        assert_eq!(m.values()[9], d("0.1"));
        assert_eq!(m.digits(), 20);
    }

    #[test]
    fn point_mass_frozen_values() {
        let ones = point_mass_moments(&d("1"), 5, 10).unwrap();
        assert!(ones.values().iter().all(|v| v.is_one()));
        let zeros = point_mass_moments(&d("0"), 5, 10).unwrap();
        assert!(zeros.values()[1..].iter().all(|v| v.is_zero()));
        assert_eq!(zeros.values()[0], d("1"));
        let half = point_mass_moments(&d("0.5"), 3, 10).unwrap();
        assert_eq!(half.values()[3], d("0.125"));
        assert!(point_mass_moments(&d("1.5"), 3, 10).is_err());
    }

    #[test]
    fn beta_five_two_matches_exact_rationals() {
        let p = BetaParams::new(d("5"), d("2")).unwrap();
        let m = beta_moments(&p, 4, 25).unwrap();
        assert_eq!(m.values()[1], dec::div_to(&d("5"), &d("7"), 25).unwrap());
        assert_eq!(m.values()[2], dec::div_to(&d("15"), &d("28"), 25).unwrap());
    }

    #[test]
    fn beta_one_one_is_uniform_digit_for_digit() {
        let p = BetaParams::new(d("1"), d("1")).unwrap();
        let b = beta_moments(&p, 25, 30).unwrap();
        let u = uniform_moments(25, 30).unwrap();
        assert_eq!(b, u);
    }

    #[test]
    fn fractional_beta_parameters_are_handled_exactly() {
        // alpha = 2.5, beta = 0.5: M_1 = 2.5/3 = 5/6
        let p = BetaParams::new(d("2.5"), d("0.5")).unwrap();
        let m = beta_moments(&p, 2, 20).unwrap();
        assert_eq!(m.values()[1], dec::div_to(&d("5"), &d("6"), 20).unwrap());
        assert!(BetaParams::new(d("0"), d("1")).is_err());
        assert!(BetaParams::new(d("1"), d("-2")).is_err());
    }

    #[test]
    fn sir_moments_at_negligible_theta_are_one() {
        let params = SirParams::new(d("0.000000000000000000000000000001"), d("0.5")).unwrap();
        let m = sir_poisson_moments(&params, 4, 20).unwrap();
        for v in m.values() {
            assert_eq!(*v, d("1"));
        }
    }

    #[test]
    fn sir_first_moment_half_delta_unit_theta() {
        // 1/(1 + pi/4)
        let params = SirParams::new(d("1"), d("0.5")).unwrap();
        let m = sir_poisson_moments(&params, 2, 30).unwrap();
        let expect = 1.0 / (1.0 + std::f64::consts::FRAC_PI_4);
        assert!((dec::to_f64(&m.values()[1]) - expect).abs() < 1e-12);
    }

    #[test]
    fn sir_moments_decrease_in_j_and_theta() {
        let params = SirParams::new(d("1"), d("0.5")).unwrap();
        let m = sir_poisson_moments(&params, 8, 20).unwrap();
        for j in 1..=8 {
            assert!(m.values()[j] < m.values()[j - 1], "j={j}");
        }
        let mut prev = BigDecimal::one();
        for theta in ["0.25", "1", "4", "16"] {
            let p = SirParams::new(d(theta), d("0.5")).unwrap();
            let v = sir_poisson_moments(&p, 3, 20).unwrap().values()[3].clone();
            assert!(v < prev, "theta={theta}");
            prev = v;
        }
    }

    #[test]
    fn sir_requires_sixteen_digits() {
        let params = SirParams::new(d("1"), d("0.5")).unwrap();
        assert!(matches!(
            sir_poisson_moments(&params, 2, 15),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn db_conversion_frozen_points() {
        assert_eq!(theta_db_to_linear(&d("0"), 20).unwrap(), d("1"));
        assert_eq!(theta_db_to_linear(&d("10"), 20).unwrap(), d("10"));
        assert_eq!(theta_db_to_linear(&d("-10"), 20).unwrap(), d("0.1"));
        let three = theta_db_to_linear(&d("3"), 20).unwrap();
        assert_eq!(three, d("1.99526231496887960135"));
        let minus_1_25 = theta_db_to_linear(&d("-12.5"), 20).unwrap();
        assert_eq!(minus_1_25, dec::pow10(&d("-1.25"), 20).unwrap());
    }

    #[test]
    fn save_load_round_trip_preserves_everything() {
        let m = uniform_moments(10, 30).unwrap();
        let dir = std::env::temp_dir().join("metadist-moments-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("uniform10.csv");
        save_moments(&m, &path).unwrap();
        let back = load_moments(&path).unwrap();
        assert_eq!(m, back);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("j,M_j\n0,1.0000"));
    }

    #[test]
    fn loader_rejects_bad_files() {
        let e = moments_from_csv("j,M_j\n0,0.9\n1,0.5\n").unwrap_err();
        assert!(matches!(e, Error::InvalidMoments { index: 0, .. }), "{e}");
        let e = moments_from_csv("j,M_j\n0,1\n1,0.5\n2,0.4\n3,0.6\n").unwrap_err();
        assert!(matches!(e, Error::InvalidMoments { index: 3, .. }), "{e}");
        let e = moments_from_csv("0,1\n1,0.5\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
        let e = moments_from_csv("j,M_j\n0,1\n2,0.5\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = moments_from_csv("j,M_j\n0,1\n1,abc\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn loader_infers_the_widest_scale() {
        let m = moments_from_csv("j,M_j\n0,1\n1,0.62\n2,0.40000\n").unwrap();
        assert_eq!(m.digits(), 5);
        assert_eq!(m.order(), 2);
    }
}
