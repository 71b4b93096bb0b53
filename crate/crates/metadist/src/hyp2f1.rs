//! Gauss hypergeometric values for the SIR moment family
//! `2F1(j, -delta; 1-delta; -theta)`.
//!
//! The defining series diverges for `theta >= 1`, which covers most SIR
//! thresholds of interest. The Pfaff transformation maps the value to
//! `(1+theta)^-j * 2F1(j, 1; 1-delta; w)` with `w = theta/(1+theta)` in
//! `[0, 1)`, whose terms are all positive: no cancellation, a clean
//! geometric tail bound, and convergence for every positive threshold.
//! The alternative Euler integral needs `c > b > 0`, which `b = -delta`
//! violates, so the Pfaff route is the only series with these properties.
//!
//! Terms are accumulated in binary big-floats ([`crate::posfloat`]); one
//! decimal rounding happens at the very end.

use bigdecimal::{BigDecimal, One, Zero};

use crate::dec;
use crate::error::{Error, Result};
use crate::posfloat::{PosFloat, LOG2_10};

/// Absolute ceiling on summed terms, independent of the digit budget.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

/// Digits carried beyond the target while summing.
const GUARD_DIGITS: u32 = 10;

/// Parameters for one hypergeometric evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyp2f1Request {
    j: u64,
    delta: BigDecimal,
    theta: BigDecimal,
    digits: u32,
}

impl Hyp2f1Request {
    pub fn new(j: u64, delta: BigDecimal, theta: BigDecimal, digits: u32) -> Result<Self> {
        if delta <= BigDecimal::zero() || delta >= BigDecimal::one() {
            return Err(Error::Domain(format!(
                "delta must lie strictly inside (0, 1), got {}",
                delta.normalized()
            )));
        }
        // The per-term divisor (1 - delta + k) is handled as an exact
        // scaled integer, which needs delta's fractional part to fit.
        if delta.normalized().fractional_digit_count() > 18 {
            return Err(Error::Domain(
                "delta must have at most 18 fractional digits".into(),
            ));
        }
        if theta <= BigDecimal::zero() {
            return Err(Error::Domain(format!(
                "theta must be positive, got {}",
                theta.normalized()
            )));
        }
        if digits == 0 {
            return Err(Error::Domain("digit budget must be positive".into()));
        }
        Ok(Self {
            j,
            delta,
            theta,
            digits,
        })
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    pub fn delta(&self) -> &BigDecimal {
        &self.delta
    }

    pub fn theta(&self) -> &BigDecimal {
        &self.theta
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }
}

/// Evaluate `2F1(j, -delta; 1-delta; -theta)` to the requested digits.
///
/// The result is always `>= 1`: every term of the transformed series is
/// nonnegative and the `k = 0` term is 1. Summation stops once the
/// current term plus its geometric tail bound drop below
/// `10^-(digits+guard)` relative to the final value; if the iteration cap
/// is hit first, the error reports how many terms were consumed.
pub fn gauss_2f1_sir(req: &Hyp2f1Request) -> Result<BigDecimal> {
    if req.j == 0 {
        return Ok(BigDecimal::one());
    }
    let wd = req.digits + GUARD_DIGITS;
    let bits = ((wd + 4) as f64 * LOG2_10).ceil() as u64 + 32;

    let theta = PosFloat::from_bigdecimal(&req.theta, bits + 16)?;
    let mut onep = theta.clone();
    onep.add_assign(&PosFloat::from_u64(1));
    let w = theta.div(&onep, bits + 16);
    let pow = onep.pow_u64(req.j, bits); // (1+theta)^j

    // (1 - delta + k) as exact integers scaled by 10^dt
    let deltan = req.delta.normalized();
    let (dm, dt) = deltan.as_bigint_and_exponent();
    let tent = 10u128.pow(dt as u32);
    let dmu: u128 = dm.try_into().expect("delta in (0,1) at scale <= 18");
    let base = tent - dmu;

    let w_log10 = w.log10_est();
    let cap = ((10.0 * wd as f64) / (-w_log10).max(1e-9)).ceil() as usize;
    let cap = cap.clamp(64, MAX_SERIES_TERMS);

    let wf = 10f64.powf(w_log10);
    let deltaf = dec::to_f64(&req.delta);
    // stop when the tail is negligible against the final S ~ (1+theta)^j
    let stop_log = -(wd as f64) - 2.0 + pow.log10_est();

    let mut t = PosFloat::from_u64(1);
    let mut s = PosFloat::from_u64(1);
    let mut converged = false;
    for k in 0..cap {
        // t_{k+1} = t_k * (j + k) / (1 - delta + k) * w
        t.mul_u64(req.j + k as u64);
        t = t.mul(&w, bits);
        t.mul_u128(tent);
        t.div_u128(base + k as u128 * tent);
        s.add_assign(&t);
        s.trunc(bits + 64);

        // term ratios decrease toward w, so once below 1 the tail is
        // geometrically dominated
        let kf = k as f64 + 1.0;
        let rho = wf * (req.j as f64 + kf) / (1.0 - deltaf + kf);
        if rho < 1.0 {
            let tail_log = t.log10_est() + (rho / (1.0 - rho)).log10();
            if tail_log < stop_log {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Convergence {
            terms: cap,
            digits: req.digits,
        });
    }
    Ok(s.div(&pow, bits).to_bigdecimal(req.digits))
}
