//! Digit budgets for the moment transform, and classification of how fast
//! a moment sequence decays.
//!
//! The transform's entries grow like `3^n`, so moments must carry roughly
//! `n/2` fractional digits before the products stop drowning the result.
//! How many more depends on how small the high-order moments themselves
//! get, which is what [`classify_decay`] estimates from the data.

use bigdecimal::{BigDecimal, Zero};

use crate::dec;
use crate::error::{Error, Result};
use crate::transform::MomentVector;

/// Budget floor; also the baseline of the rule of thumb.
pub const MIN_DIGITS: u32 = 16;

/// Decay regime of a moment sequence `M_j` as `j` grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    /// `M_j ~ 10^(-c j^delta)` with `0 < delta < 1`. Beta-like laws with
    /// an essential infimum of 0 land here, as do geometric tails, which
    /// fit with `delta` pushed to the upper clamp.
    Superpolynomial { c: f64, delta: f64 },
    /// `M_j ~ j^(-s)`. Distributions bounded away from 0 near their lower
    /// end, and anything with a density at 0 vanishing polynomially.
    Polynomial { s: f64 },
    /// Variance below tolerance: all mass at a single point `nu`.
    Degenerate { nu: f64 },
}

/// How a [`PrecisionBudget`] was arrived at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetBasis {
    RuleOfThumb,
    Fitted(DecayClass),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionBudget {
    pub n: usize,
    pub digits: u32,
    pub basis: BudgetBasis,
}

/// The blunt instrument: `ceil(n/2) + 16` fractional digits.
///
/// Always sufficient for sequences whose decay is at most geometric, and
/// cheap enough to overshoot a little rather than classify first.
pub fn rule_of_thumb_digits(n: usize) -> PrecisionBudget {
    PrecisionBudget {
        n,
        digits: (n as u32).div_ceil(2) + MIN_DIGITS,
        basis: BudgetBasis::RuleOfThumb,
    }
}

/// Digit budget that keeps inversion noise below the negativity tolerance.
///
/// Transform entries reach ~3^n, so moments carrying `d`-digit roundoff
/// leave noise of order `10^(n log10 3 - d)` in the weights. When the
/// mixing distribution concentrates near 1, the true weights vanish in
/// exactly the rows where that amplification peaks, and the noise must
/// clear the `-10^(-d/4)` floor: `d > (4/3) n log10 3`. The rule of thumb
/// covers this only up to n near 120.
pub fn noise_safe_digits(n: usize) -> u32 {
    let floor = (4.0 / 3.0 * n as f64 * 3f64.log10()).ceil() as u32 + 8;
    floor.max(rule_of_thumb_digits(n).digits)
}

/// Digit budget tailored to a classified decay regime.
///
/// Superpolynomial decay needs `n/2 + c n^delta - log10 n` digits: the
/// moments themselves shrink below the roundoff floor of any fixed budget.
/// Polynomial decay needs only `n/2 + (s - 1) log10 n`. Both are floored
/// by `n/2` and [`MIN_DIGITS`].
pub fn required_digits(n: usize, decay: &DecayClass) -> Result<PrecisionBudget> {
    if n == 0 {
        return Err(Error::Domain("order must be positive".into()));
    }
    let nf = n as f64;
    let b = match decay {
        DecayClass::Superpolynomial { c, delta } => {
            nf / 2.0 + c * nf.powf(*delta) - nf.log10()
        }
        DecayClass::Polynomial { s } => nf / 2.0 + (s - 1.0) * nf.log10(),
        DecayClass::Degenerate { nu } => return Err(Error::Degenerate { nu: *nu }),
    };
    let digits = (b.ceil().max(0.0) as u32)
        .max((n as u32).div_ceil(2))
        .max(MIN_DIGITS);
    Ok(PrecisionBudget {
        n,
        digits,
        basis: BudgetBasis::Fitted(*decay),
    })
}

/// Estimate the decay regime of a moment sequence.
///
/// Degenerate sequences are spotted first via the variance `M_2 - M_1^2`
/// against `10^-(digits/2)`. Otherwise two models are fitted by least
/// squares to `y_j = -log10 M_j` over the tail half of the sequence:
/// `y = s log10(j+1) + a` (polynomial decay) and `log10 y` linear in
/// `log10 j` (superpolynomial). The tail is used because small-`j`
/// transients bias the polynomial slope low, and an underestimated slope
/// underestimates the budget. Superpolynomial wins only when its residuals
/// are decisively smaller; polynomial is the fallback.
pub fn classify_decay(moments: &MomentVector) -> Result<DecayClass> {
    let vals = moments.values();
    if vals.len() < 4 {
        return Err(Error::TooFewMoments {
            needed: 4,
            got: vals.len(),
        });
    }
    let digits = moments.digits().max(1);
    let tol = dec::pow10_neg(digits / 2);
    let variance = &vals[2] - &vals[1] * &vals[1];
    if variance < tol {
        return Ok(DecayClass::Degenerate {
            nu: dec::to_f64(&vals[1]),
        });
    }
    // Rounded tails can hit exactly zero; fit on the positive prefix.
    let m = (1..vals.len())
        .take_while(|&j| !vals[j].is_zero())
        .last()
        .unwrap_or(0);
    if m < 3 {
        return Err(Error::TooFewMoments {
            needed: 4,
            got: m + 1,
        });
    }
    let lo = (m / 2).max(1);
    let mut ljs = Vec::new(); // log10(j+1)
    let mut ys = Vec::new(); // -log10 M_j
    for (j, v) in vals.iter().enumerate().take(m + 1).skip(lo) {
        ljs.push(((j + 1) as f64).log10());
        ys.push(-dec::log10_approx(v).expect("positive by construction"));
    }
    let (s_hat, a_hat) = least_squares(&ljs, &ys);
    let rss_p: f64 = ljs
        .iter()
        .zip(&ys)
        .map(|(l, y)| (y - (s_hat * l + a_hat)).powi(2))
        .sum();

    // Superpolynomial model: log10 y linear in log10 j. Needs y > 0,
    // i.e. moments strictly below 1, which the degenerate gate implies
    // for the tail.
    let mut lgj = Vec::new();
    let mut lgy = Vec::new();
    for (i, j) in (lo..=m).enumerate() {
        if ys[i] > 0.0 {
            lgj.push((j as f64).log10());
            lgy.push(ys[i].log10());
        }
    }
    if lgj.len() < 2 {
        return Ok(DecayClass::Polynomial { s: s_hat });
    }
    let (delta_hat, logc_hat) = least_squares(&lgj, &lgy);
    let c_hat = 10f64.powf(logc_hat);
    let rss_s: f64 = ys
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let j = (lo + i) as f64;
            (y - c_hat * j.powf(delta_hat)).powi(2)
        })
        .sum();

    if rss_s < 0.25 * rss_p {
        Ok(DecayClass::Superpolynomial {
            c: c_hat.max(1e-9),
            delta: delta_hat.clamp(0.05, 0.95),
        })
    } else {
        Ok(DecayClass::Polynomial { s: s_hat })
    }
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        var += (x - mx) * (x - mx);
    }
    if var == 0.0 {
        return (0.0, my);
    }
    let slope = cov / var;
    (slope, my - slope * mx)
}

/// One failed sign condition in the iterated-difference test:
/// `(-1)^k (Delta^k M)_i` came out below `-tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CmViolation {
    pub k: usize,
    pub index: usize,
    pub value: BigDecimal,
}

/// Outcome of [`check_complete_monotonicity`]. Violations are reported,
/// never repaired: a failed check flags the input data, not this library.
#[derive(Debug, Clone, PartialEq)]
pub struct CmReport {
    pub k_max: usize,
    pub tolerance: BigDecimal,
    pub violations: Vec<CmViolation>,
}

impl CmReport {
    pub fn is_completely_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify `(-1)^k (Delta^k M)_i >= -10^-(digits/2)` for all
/// `k <= k_max` and all valid `i`, exactly, over the decimal values.
///
/// Every genuine moment sequence of a distribution on `[0, 1]` passes for
/// all `k`; a violation means the sequence is not a moment sequence at the
/// carried precision.
pub fn check_complete_monotonicity(moments: &MomentVector, k_max: usize) -> CmReport {
    let digits = moments.digits().max(1);
    let tolerance = dec::pow10_neg(digits / 2);
    let floor = -&tolerance;
    let k_max = k_max.min(moments.order());
    let mut violations = Vec::new();
    // row holds (-1)^k (Delta^k M)_i; the recurrence is
    // g_{k+1}(i) = g_k(i) - g_k(i+1).
    let mut row: Vec<BigDecimal> = moments.values().to_vec();
    for k in 0..=k_max {
        if k > 0 {
            for i in 0..row.len() - 1 {
                row[i] = &row[i] - &row[i + 1];
            }
            row.pop();
        }
        for (i, v) in row.iter().enumerate() {
            if *v < floor {
                violations.push(CmViolation {
                    k,
                    index: i,
                    value: v.clone(),
                });
            }
        }
    }
    CmReport {
        k_max,
        tolerance,
        violations,
    }
}
