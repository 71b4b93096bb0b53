//! The exact linear map from moment sequences to binomial-mixture weights,
//! and the distribution approximations built from those weights.
//!
//! For order `n` the matrix entries are signed products of two binomial
//! coefficients. They are computed as exact integers: growth is roughly
//! `3^n`, far beyond any fixed-width float for interesting `n`, and every
//! entry is reused across all moment vectors of the same order.

use bigdecimal::{BigDecimal, One, Signed, Zero};
use num_bigint::BigInt;

use crate::dec;
use crate::error::{Error, Result};
use crate::precision;

/// Hard ceiling on the matrix order accepted by [`TransformMatrix::build`].
pub const DEFAULT_MAX_ORDER: usize = 2000;

/// Upper-triangular `(n+1) x (n+1)` integer matrix mapping moments
/// `(M_0..M_n)` to mixture weights `(h_0..h_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformMatrix {
    n: usize,
    /// Row-major, including the structural zeros below the diagonal.
    entries: Vec<BigInt>,
}

impl TransformMatrix {
    /// Build the order-`n` matrix, refusing orders above
    /// [`DEFAULT_MAX_ORDER`].
    pub fn build(n: usize) -> Result<Self> {
        Self::build_with_limit(n, DEFAULT_MAX_ORDER)
    }

    /// Build with a caller-chosen order ceiling.
    ///
    /// Entries are generated only for the positions `i <= j <= n - i`; the
    /// rest of the upper triangle is filled by the reflection
    /// `A[i][j] = A[n-j][n-i]`, which also preserves signs. Successive
    /// entries along a row differ by a ratio of small integers, so each
    /// direct entry costs one big multiply and one exact big divide.
    pub fn build_with_limit(n: usize, limit: usize) -> Result<Self> {
        if n > limit {
            return Err(Error::OrderTooLarge { n, max: limit });
        }
        let dim = n + 1;
        let mut entries = vec![BigInt::zero(); dim * dim];
        let mut diag = BigInt::one(); // C(n, i)
        let mut i = 0usize;
        while 2 * i <= n {
            let mut mag = diag.clone(); // |A[i][j]|, starting at j = i
            for j in i..=(n - i) {
                let signed = if (j - i).is_multiple_of(2) {
                    mag.clone()
                } else {
                    -mag.clone()
                };
                entries[(n - j) * dim + (n - i)] = signed.clone();
                entries[i * dim + j] = signed;
                if j < n - i {
                    mag = mag * (n - j) / (j + 1 - i);
                }
            }
            diag = diag * (n - i) / (i + 1);
            i += 1;
        }
        Ok(Self { n, entries })
    }

    /// Matrix order `n`; the matrix is `(n+1) x (n+1)`.
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * (self.n + 1) + j]
    }

    /// Row `i` as a slice of length `n + 1`.
    pub fn row(&self, i: usize) -> &[BigInt] {
        let dim = self.n + 1;
        &self.entries[i * dim..(i + 1) * dim]
    }

    /// Largest entry magnitude; grows like `3^n / n` up to a constant.
    pub fn max_abs_entry(&self) -> BigInt {
        self.entries
            .iter()
            .map(|e| e.abs())
            .max()
            .expect("matrix is never empty")
    }

    /// Number of entries not forced by the antidiagonal reflection:
    /// `((n+2)^2 - [n odd]) / 4`.
    pub fn distinct_entry_count(&self) -> u128 {
        let n = self.n as u128;
        ((n + 2) * (n + 2) - (n % 2)) / 4
    }

    /// Map a moment vector to mixture weights.
    ///
    /// Inputs are rounded to `digits` fractional digits once, up front;
    /// everything after that is exact integer-times-decimal arithmetic, so
    /// the weights always sum to exactly 1. A weight below `-10^-(digits/4)`
    /// aborts with [`Error::PrecisionFailure`]; shallower negatives are kept
    /// as-is and reported through [`MixtureWeights::negative_indices`].
    pub fn apply(&self, moments: &MomentVector, digits: u32) -> Result<MixtureWeights> {
        if digits == 0 {
            return Err(Error::Domain("digit budget must be positive".into()));
        }
        if moments.order() != self.n {
            return Err(Error::DimensionMismatch {
                matrix_order: self.n,
                moments_len: moments.len(),
            });
        }
        let m: Vec<BigDecimal> = moments
            .values()
            .iter()
            .map(|v| dec::round_to(v, digits))
            .collect();
        let dim = self.n + 1;
        let mut values = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut acc = BigDecimal::zero();
            let row = &self.entries[k * dim + k..(k + 1) * dim];
            for (e, mj) in row.iter().zip(&m[k..]) {
                if !e.is_zero() {
                    acc += BigDecimal::from(e.clone()) * mj;
                }
            }
            values.push(acc);
        }
        let tolerance = dec::pow10_neg(digits / 4);
        let neg_tolerance = -&tolerance;
        let mut worst: Option<usize> = None;
        let mut negative_indices = Vec::new();
        for (k, h) in values.iter().enumerate() {
            if h.is_negative() {
                negative_indices.push(k);
                if worst.is_none_or(|w| *h < values[w]) {
                    worst = Some(k);
                }
            }
        }
        if let Some(w) = worst {
            if values[w] < neg_tolerance {
                // The offender sits at roughly 10^(a - digits) for some fixed
                // amplification a, while the tolerance floor is 10^(-digits/4).
                // Solving 10^(a - d) < 10^(-d/4) for d gives d > 4a/3; the
                // observed offender pins a = log10|h| + digits.
                let log_worst = dec::log10_approx(&values[w].abs()).unwrap_or(0.0);
                let needed = ((log_worst + f64::from(digits)) * 4.0 / 3.0).ceil() + 8.0;
                let suggested_digits =
                    (needed.max(0.0) as u32).max(precision::rule_of_thumb_digits(self.n).digits);
                return Err(Error::PrecisionFailure {
                    index: w,
                    value: values[w].normalized().to_plain_string(),
                    tolerance: tolerance.normalized().to_plain_string(),
                    digits,
                    suggested_digits,
                });
            }
        }
        let below_recommended = digits < precision::rule_of_thumb_digits(self.n).digits;
        Ok(MixtureWeights {
            n: self.n,
            values,
            digits,
            negative_indices,
            below_recommended,
        })
    }
}

/// A finite moment sequence `M_0..M_n` with its digit budget.
///
/// Construction enforces the properties every genuine moment sequence of a
/// distribution on `[0, 1]` has: `M_0 = 1`, values in `[0, 1]`,
/// nonincreasing in the order.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    values: Vec<BigDecimal>,
    digits: u32,
}

impl MomentVector {
    pub fn new(values: Vec<BigDecimal>, digits: u32) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewMoments { needed: 1, got: 0 });
        }
        if !values[0].is_one() {
            return Err(Error::InvalidMoments {
                index: 0,
                reason: "the zeroth moment must be 1".into(),
            });
        }
        for (j, v) in values.iter().enumerate() {
            if v.is_negative() || *v > BigDecimal::one() {
                return Err(Error::InvalidMoments {
                    index: j,
                    reason: format!("value {} outside [0, 1]", v.normalized()),
                });
            }
            if j > 0 && *v > values[j - 1] {
                return Err(Error::InvalidMoments {
                    index: j,
                    reason: "moment sequences on [0, 1] are nonincreasing".into(),
                });
            }
        }
        Ok(Self { values, digits })
    }

    /// Skip validation. For exercising diagnostics on sequences that are
    /// deliberately not moment sequences.
    pub fn new_unchecked(values: Vec<BigDecimal>, digits: u32) -> Self {
        Self { values, digits }
    }

    pub fn values(&self) -> &[BigDecimal] {
        &self.values
    }

    /// Highest moment order `n`; the vector has `n + 1` entries.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }
}

/// Mixture weights `h_0..h_n` over the order-`n` binomial kernels, plus the
/// bookkeeping needed to judge them.
#[derive(Debug, Clone)]
pub struct MixtureWeights {
    n: usize,
    values: Vec<BigDecimal>,
    digits: u32,
    negative_indices: Vec<usize>,
    below_recommended: bool,
}

impl MixtureWeights {
    pub fn values(&self) -> &[BigDecimal] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Indices of weights that came out negative but within tolerance.
    /// The values themselves are preserved untouched.
    pub fn negative_indices(&self) -> &[usize] {
        &self.negative_indices
    }

    /// True when the digit budget used was below the rule-of-thumb
    /// recommendation for this order.
    pub fn below_recommended(&self) -> bool {
        self.below_recommended
    }

    /// Exact sum of the weights; 1 for any valid moment input.
    pub fn sum(&self) -> BigDecimal {
        let mut acc = BigDecimal::zero();
        for v in &self.values {
            acc += v;
        }
        acc
    }

    /// Distribution function samples at `x_k = k/(n+1)`, `k = 0..n+1`.
    /// Prefix sums are clamped into `[0, 1]`.
    pub fn cdf_samples(&self) -> CdfApproximation {
        let mut values = Vec::with_capacity(self.n + 2);
        values.push(BigDecimal::zero());
        let mut acc = BigDecimal::zero();
        for h in &self.values {
            acc += h;
            values.push(dec::clamp01(&acc));
        }
        CdfApproximation {
            n: self.n,
            values,
            digits: self.digits,
        }
    }

    /// Density samples `(n+1) * h_k` at `x_k = k/(n+1)`, `k = 0..n`.
    pub fn pdf_samples(&self) -> PdfApproximation {
        let scale = BigDecimal::from((self.n + 1) as u64);
        let values = self.values.iter().map(|h| h * &scale).collect();
        PdfApproximation {
            n: self.n,
            values,
            digits: self.digits,
        }
    }

    /// Evaluate the approximate distribution function anywhere in `[0, 1]`.
    pub fn eval_cdf(&self, x: &BigDecimal, mode: CdfMode) -> Result<BigDecimal> {
        if x.is_negative() || *x > BigDecimal::one() {
            return Err(Error::Domain(format!(
                "cdf argument {} outside [0, 1]",
                x.normalized()
            )));
        }
        match mode {
            CdfMode::Step => {
                // Right-continuous step function with jumps at k/n and
                // F(0) = 0 by definition.
                if x.is_zero() {
                    return Ok(BigDecimal::zero());
                }
                let k: usize = dec::floor_int(&(BigDecimal::from(self.n as u64) * x))
                    .try_into()
                    .expect("0 <= floor(n x) <= n");
                let mut acc = BigDecimal::zero();
                for h in &self.values[..=k.min(self.n)] {
                    acc += h;
                }
                Ok(dec::clamp01(&acc))
            }
            CdfMode::Interpolated => {
                let u = BigDecimal::from((self.n + 1) as u64) * x;
                let k: usize = dec::floor_int(&u)
                    .try_into()
                    .expect("0 <= floor((n+1) x) <= n+1");
                let samples = self.cdf_samples();
                if k > self.n {
                    return Ok(samples.values[self.n + 1].clone());
                }
                let frac = u - BigDecimal::from(k as u64);
                let lo = &samples.values[k];
                let hi = &samples.values[k + 1];
                Ok(lo + frac * (hi - lo))
            }
        }
    }
}

/// How [`MixtureWeights::eval_cdf`] treats points between grid samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfMode {
    /// Piecewise constant, right-continuous, jumps at `k/n`.
    Step,
    /// Linear between the grid samples at `k/(n+1)`.
    Interpolated,
}

/// Samples of the approximate distribution function on the uniform grid
/// `x_k = k/(n+1)`, `k = 0..n+1`, so `values[0] = 0` and
/// `values[n+1] = 1` up to working precision.
#[derive(Debug, Clone)]
pub struct CdfApproximation {
    n: usize,
    values: Vec<BigDecimal>,
    digits: u32,
}

impl CdfApproximation {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[BigDecimal] {
        &self.values
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Grid abscissa `k/(n+1)` at the stored digit budget.
    pub fn grid_point(&self, k: usize) -> BigDecimal {
        grid_point(k, self.n, self.digits)
    }

    pub fn grid_f64(&self, k: usize) -> f64 {
        k as f64 / (self.n + 1) as f64
    }
}

/// Density samples `(n+1) h_k` on the grid `x_k = k/(n+1)`, `k = 0..n`.
#[derive(Debug, Clone)]
pub struct PdfApproximation {
    n: usize,
    values: Vec<BigDecimal>,
    digits: u32,
}

impl PdfApproximation {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[BigDecimal] {
        &self.values
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn grid_point(&self, k: usize) -> BigDecimal {
        grid_point(k, self.n, self.digits)
    }

    pub fn grid_f64(&self, k: usize) -> f64 {
        k as f64 / (self.n + 1) as f64
    }
}

fn grid_point(k: usize, n: usize, digits: u32) -> BigDecimal {
    dec::div_to(
        &BigDecimal::from(k as u64),
        &BigDecimal::from((n + 1) as u64),
        digits,
    )
    .expect("n + 1 > 0")
}
