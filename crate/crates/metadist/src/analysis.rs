//! Error and convergence studies against closed-form references, the
//! two-moment beta baseline, and SIR percentile curves over a dB grid.
//!
//! Reconstructions here always flow through the exact transform; the
//! closed-form side (beta CDFs and densities) is evaluated in `f64`,
//! which is plenty for error profiles in the 1e-3 range.

use bigdecimal::{BigDecimal, One, Zero};
use statrs::distribution::{Beta, Continuous, ContinuousCDF};

use crate::dec;
use crate::error::{Error, Result};
use crate::moments::{self, BetaParams, SirParams};
use crate::precision;
use crate::transform::{CdfApproximation, MomentVector, TransformMatrix};

/// Pointwise and worst-case deviation of a reconstruction from a
/// reference distribution function.
#[derive(Debug, Clone)]
pub struct ErrorProfile {
    /// `|F_n(x_k) - F(x_k)|` for `k = 0..n+1`.
    pub per_point: Vec<f64>,
    /// Maximum over the interior grid `k = 1..n`; the endpoints are exact
    /// by construction and would only dilute the statistic.
    pub max_interior: f64,
}

/// Compare CDF samples against a reference `F` evaluated on the grid.
pub fn reconstruction_error(
    approx: &CdfApproximation,
    oracle: impl Fn(f64) -> f64,
) -> ErrorProfile {
    let n = approx.order();
    let mut per_point = Vec::with_capacity(n + 2);
    let mut max_interior = 0.0f64;
    for (k, v) in approx.values().iter().enumerate() {
        let err = (dec::to_f64(v) - oracle(approx.grid_f64(k))).abs();
        per_point.push(err);
        if k >= 1 && k <= n {
            max_interior = max_interior.max(err);
        }
    }
    ErrorProfile {
        per_point,
        max_interior,
    }
}

/// Worst-case error per order, with the power-law fit across orders.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub orders: Vec<usize>,
    pub max_errors: Vec<f64>,
    /// `max|f| + max|f'| / 2` when the reference supplies it; the
    /// first-order error bound is this over `n + 1`.
    pub bound_constant: Option<f64>,
    /// Slope of `log(error)` vs `log(n)`; NaN when errors vanish.
    pub fitted_rate: f64,
}

/// Run the full pipeline at each order (rule-of-thumb digits) and fit the
/// error decay rate.
pub fn convergence_study(
    moment_source: impl Fn(usize, u32) -> Result<MomentVector>,
    oracle: impl Fn(f64) -> f64,
    orders: &[usize],
    bound_constant: Option<f64>,
) -> Result<ConvergenceReport> {
    if orders.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 orders for a rate fit, got {}",
            orders.len()
        )));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("orders must be strictly increasing".into()));
    }
    let mut max_errors = Vec::with_capacity(orders.len());
    for &n in orders {
        let digits = precision::rule_of_thumb_digits(n).digits;
        let m = moment_source(n, digits)?;
        let matrix = TransformMatrix::build(n)?;
        let cdf = matrix.apply(&m, digits)?.cdf_samples();
        max_errors.push(reconstruction_error(&cdf, &oracle).max_interior);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&n, &e) in orders.iter().zip(&max_errors) {
        if e > 0.0 {
            xs.push((n as f64).ln());
            ys.push(e.ln());
        }
    }
    let fitted_rate = if xs.len() >= 2 {
        precision::least_squares(&xs, &ys).0
    } else {
        f64::NAN
    };
    Ok(ConvergenceReport {
        orders: orders.to_vec(),
        max_errors,
        bound_constant,
        fitted_rate,
    })
}

/// Method-of-moments beta fit from the first two moments.
///
/// `alpha = M1 (M1 - M2) / (M2 - M1^2)`, `beta = alpha (1 - M1) / M1`;
/// the resulting Beta(alpha, beta) has exactly these first two moments.
pub fn beta_approximation(m1: &BigDecimal, m2: &BigDecimal, digits: u32) -> Result<BetaParams> {
    if m1 <= &BigDecimal::zero() || m1 >= &BigDecimal::one() {
        return Err(Error::Domain(format!(
            "M1 must lie strictly inside (0, 1), got {}",
            m1.normalized()
        )));
    }
    if m2 >= m1 {
        return Err(Error::Domain(
            "M2 must be strictly below M1 for a nondegenerate fit".into(),
        ));
    }
    let variance = m2 - m1 * m1;
    if variance <= dec::pow10_neg(digits / 2) {
        return Err(Error::Degenerate {
            nu: dec::to_f64(m1),
        });
    }
    let alpha = dec::div_to(&(m1 * (m1 - m2)), &variance, digits)?;
    let beta = dec::div_to(&(&alpha * (BigDecimal::one() - m1)), m1, digits)?;
    BetaParams::new(alpha, beta)
}

/// Closed-form Beta(alpha, beta) CDF as an `f64` callable.
pub fn beta_cdf(alpha: f64, beta: f64) -> Result<impl Fn(f64) -> f64> {
    let dist = Beta::new(alpha, beta)
        .map_err(|e| Error::Domain(format!("invalid beta parameters: {e}")))?;
    Ok(move |x: f64| dist.cdf(x.clamp(0.0, 1.0)))
}

/// Closed-form Beta(alpha, beta) density as an `f64` callable.
pub fn beta_pdf(alpha: f64, beta: f64) -> Result<impl Fn(f64) -> f64> {
    let dist = Beta::new(alpha, beta)
        .map_err(|e| Error::Domain(format!("invalid beta parameters: {e}")))?;
    Ok(move |x: f64| dist.pdf(x.clamp(0.0, 1.0)))
}

/// `max|f| + max|f'|/2` for Beta(alpha, beta), the constant of the
/// first-order error bound. `None` when `f` or `f'` is unbounded, i.e.
/// unless each parameter is either 1 or at least 2.
pub fn beta_bound_constant(alpha: f64, beta: f64) -> Option<f64> {
    let ok = |p: f64| p == 1.0 || p >= 2.0;
    if !ok(alpha) || !ok(beta) {
        return None;
    }
    let lb = statrs::function::beta::ln_beta(alpha, beta);
    let f = |x: f64| ((alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln() - lb).exp();
    // f' = x^(a-2) (1-x)^(b-2) ((a-1)(1-x) - (b-1)x) / B(a,b), scanned on
    // the interior; the endpoint limits are handled by their branch values.
    let df_interior = |x: f64| {
        ((alpha - 2.0) * x.ln() + (beta - 2.0) * (1.0 - x).ln() - lb).exp()
            * ((alpha - 1.0) * (1.0 - x) - (beta - 1.0) * x)
    };
    let df_at_zero = if alpha == 1.0 {
        -(beta - 1.0) / lb.exp()
    } else if alpha == 2.0 {
        1.0 / lb.exp()
    } else {
        0.0
    };
    let df_at_one = if beta == 1.0 {
        (alpha - 1.0) / lb.exp()
    } else if beta == 2.0 {
        -1.0 / lb.exp()
    } else {
        0.0
    };
    let steps = 20_000;
    let mut fmax: f64 = f(0.0).max(f(1.0));
    let mut dmax: f64 = df_at_zero.abs().max(df_at_one.abs());
    for k in 1..steps {
        let x = k as f64 / steps as f64;
        fmax = fmax.max(f(x));
        dmax = dmax.max(df_interior(x).abs());
    }
    Some(fmax + dmax / 2.0)
}

/// A θ grid in dB, inclusive of both edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGridDb {
    min_db: BigDecimal,
    max_db: BigDecimal,
    step_db: BigDecimal,
}

impl ThetaGridDb {
    pub fn new(min_db: BigDecimal, max_db: BigDecimal, step_db: BigDecimal) -> Result<Self> {
        if min_db >= max_db {
            return Err(Error::Domain(format!(
                "dB range needs min < max, got [{}, {}]",
                min_db.normalized(),
                max_db.normalized()
            )));
        }
        if step_db <= BigDecimal::zero() {
            return Err(Error::Domain("dB step must be positive".into()));
        }
        let g = Self {
            min_db,
            max_db,
            step_db,
        };
        if g.values().len() > 10_000 {
            return Err(Error::Domain("dB grid has more than 10000 points".into()));
        }
        Ok(g)
    }

    /// The default sweep: -20 to +20 dB in 1 dB steps, 41 values.
    pub fn default_sweep() -> Self {
        Self {
            min_db: BigDecimal::from(-20),
            max_db: BigDecimal::from(20),
            step_db: BigDecimal::one(),
        }
    }

    pub fn values(&self) -> Vec<BigDecimal> {
        let mut out = Vec::new();
        let mut cur = self.min_db.clone();
        while cur <= self.max_db && out.len() <= 10_000 {
            out.push(cur.clone());
            cur += &self.step_db;
        }
        out
    }
}

/// One solved point of a percentile curve.
#[derive(Debug, Clone)]
pub struct PercentilePoint {
    pub theta_db: BigDecimal,
    pub theta_linear: BigDecimal,
    /// Reliability `x` with `F_n(x) = p`.
    pub reliability: f64,
    /// Set when `p` fell outside `[F_n(x_1), F_n(x_n)]`, i.e. the solution
    /// sits in the first or last grid cell and is effectively clamped.
    pub saturated: bool,
}

/// The `(theta_dB, x)` pairs with `F_n(x) = p` for one percentile `p`.
#[derive(Debug, Clone)]
pub struct PercentileCurve {
    pub percentile: BigDecimal,
    pub order: usize,
    pub digits: u32,
    pub points: Vec<PercentilePoint>,
}

/// Solve `F_n(x) = p` for a single percentile over a θ grid.
pub fn percentile_solve(
    p: &BigDecimal,
    grid: &ThetaGridDb,
    delta: &BigDecimal,
    n: usize,
    digits: u32,
) -> Result<PercentileCurve> {
    Ok(percentile_curves(std::slice::from_ref(p), grid, delta, n, digits)?
        .pop()
        .expect("one percentile in, one curve out"))
}

/// Solve several percentiles over one θ grid, sharing the per-θ moment
/// and transform work across all of them.
pub fn percentile_curves(
    ps: &[BigDecimal],
    grid: &ThetaGridDb,
    delta: &BigDecimal,
    n: usize,
    digits: u32,
) -> Result<Vec<PercentileCurve>> {
    validate_percentiles(ps)?;
    let table = sir_moment_grid(grid, delta, n, digits)?;
    percentile_curves_from_grid(ps, &table, digits)
}

fn validate_percentiles(ps: &[BigDecimal]) -> Result<()> {
    if ps.is_empty() {
        return Err(Error::Domain("no percentiles given".into()));
    }
    for p in ps {
        if p <= &BigDecimal::zero() || p >= &BigDecimal::one() {
            return Err(Error::Domain(format!(
                "percentile must lie strictly inside (0, 1), got {}",
                p.normalized()
            )));
        }
    }
    Ok(())
}

/// One θ grid point's moment vector, reusable across percentile sets.
#[derive(Debug, Clone)]
pub struct ThetaMoments {
    pub theta_db: BigDecimal,
    pub theta_linear: BigDecimal,
    pub moments: MomentVector,
}

/// Evaluate the SIR moment sequence at every grid point. This is the
/// expensive half of a percentile sweep; keep the result around when
/// several percentile sets share one grid.
pub fn sir_moment_grid(
    grid: &ThetaGridDb,
    delta: &BigDecimal,
    n: usize,
    digits: u32,
) -> Result<Vec<ThetaMoments>> {
    if n < 2 {
        return Err(Error::Domain("percentile curves need order n >= 2".into()));
    }
    grid.values()
        .into_iter()
        .map(|theta_db| {
            let theta_linear = moments::theta_db_to_linear(&theta_db, digits)?;
            let params = SirParams::new(theta_linear.clone(), delta.clone())?;
            let moments = moments::sir_poisson_moments(&params, n, digits)?;
            Ok(ThetaMoments {
                theta_db,
                theta_linear,
                moments,
            })
        })
        .collect()
}

/// Invert the reconstructed CDF at each percentile over precomputed
/// grid moments.
pub fn percentile_curves_from_grid(
    ps: &[BigDecimal],
    table: &[ThetaMoments],
    digits: u32,
) -> Result<Vec<PercentileCurve>> {
    validate_percentiles(ps)?;
    let n = match table.first() {
        Some(first) => first.moments.order(),
        None => return Err(Error::Domain("empty moment grid".into())),
    };
    if n < 2 {
        return Err(Error::Domain("percentile curves need order n >= 2".into()));
    }
    let matrix = TransformMatrix::build(n)?;
    let mut curves: Vec<PercentileCurve> = ps
        .iter()
        .map(|p| PercentileCurve {
            percentile: p.clone(),
            order: n,
            digits,
            points: Vec::with_capacity(table.len()),
        })
        .collect();
    for entry in table {
        let cdf = matrix.apply(&entry.moments, digits)?.cdf_samples();
        for (curve, p) in curves.iter_mut().zip(ps) {
            let (reliability, saturated) = invert_cdf(&cdf, p)?;
            curve.points.push(PercentilePoint {
                theta_db: entry.theta_db.clone(),
                theta_linear: entry.theta_linear.clone(),
                reliability,
                saturated,
            });
        }
    }
    Ok(curves)
}

/// Monotone piecewise-linear inversion over the CDF samples.
fn invert_cdf(cdf: &CdfApproximation, p: &BigDecimal) -> Result<(f64, bool)> {
    let vals = cdf.values();
    let n = cdf.order();
    let saturated = *p < vals[1] || *p > vals[n];
    let Some(idx) = vals.iter().position(|v| v >= p) else {
        // only reachable when the weight sum fell short of p < 1
        return Ok((1.0, true));
    };
    if idx == 0 {
        return Ok((0.0, saturated));
    }
    let k = idx - 1;
    let gap = &vals[idx] - &vals[k];
    let frac = if gap.is_zero() {
        0.0
    } else {
        // kept in decimals until the very end: the gap can be far below
        // f64's normal range at large digit budgets
        dec::to_f64(&dec::div_to(&(p - &vals[k]), &gap, 25)?)
    };
    Ok(((k as f64 + frac) / (n as f64 + 1.0), saturated))
}

/// One point of the spectral-efficiency version of a percentile curve.
#[derive(Debug, Clone)]
pub struct RateReliabilityPoint {
    pub spectral_efficiency: f64,
    pub reliability: f64,
    pub saturated: bool,
}

/// Map a percentile curve from thresholds to spectral efficiencies
/// `log2(1 + theta)`, keeping the reliability values.
pub fn rate_reliability(curve: &PercentileCurve) -> Vec<RateReliabilityPoint> {
    curve
        .points
        .iter()
        .map(|pt| RateReliabilityPoint {
            spectral_efficiency: (1.0 + dec::to_f64(&pt.theta_linear)).log2(),
            reliability: pt.reliability,
            saturated: pt.saturated,
        })
        .collect()
}

/// Horizontal distance in dB between two percentile curves at a fixed
/// reliability, by inverse interpolation. Positive when `curve_b` reaches
/// the reliability at a higher threshold. Saturated points are excluded.
pub fn percentile_gap(
    curve_a: &PercentileCurve,
    curve_b: &PercentileCurve,
    at_reliability: f64,
) -> Result<f64> {
    Ok(theta_db_at(curve_b, at_reliability)? - theta_db_at(curve_a, at_reliability)?)
}

fn theta_db_at(curve: &PercentileCurve, x: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| !p.saturated)
        .map(|p| (dec::to_f64(&p.theta_db), p.reliability))
        .collect();
    // reliability decreases along increasing theta
    for w in pts.windows(2) {
        let ((t0, r0), (t1, r1)) = (w[0], w[1]);
        if (r0 >= x && x >= r1) || (r1 >= x && x >= r0) {
            if (r0 - r1).abs() < f64::EPSILON {
                return Ok(t0);
            }
            return Ok(t0 + (r0 - x) / (r0 - r1) * (t1 - t0));
        }
    }
    Err(Error::Domain(format!(
        "reliability {x} not covered by the curve for p = {}",
        curve.percentile.normalized()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::parse as d;

    #[test]
    fn uniform_reconstruction_error_is_negligible() {
        let digits = 25;
        let m = moments::uniform_moments(15, digits).unwrap();
        let cdf = TransformMatrix::build(15)
            .unwrap()
            .apply(&m, digits)
            .unwrap()
            .cdf_samples();
        let profile = reconstruction_error(&cdf, |x| x);
        assert_eq!(profile.per_point.len(), 17);
        assert!(profile.max_interior < 1e-12, "{}", profile.max_interior);
    }

    #[test]
    fn convergence_study_validates_orders() {
        let src = |n, digits| moments::uniform_moments(n, digits);
        assert!(convergence_study(src, |x| x, &[10, 20], None).is_err());
        assert!(convergence_study(src, |x| x, &[10, 10, 20], None).is_err());
        let r = convergence_study(src, |x| x, &[5, 10, 20], Some(1.0)).unwrap();
        assert_eq!(r.orders, vec![5, 10, 20]);
        assert!(r.max_errors.iter().all(|e| *e < 1e-12));
        assert_eq!(r.bound_constant, Some(1.0));
    }

    #[test]
    fn beta_fit_recovers_known_parameters() {
        let m1 = dec::div_to(&d("5"), &d("7"), 25).unwrap();
        let m2 = dec::div_to(&d("15"), &d("28"), 25).unwrap();
        let p = beta_approximation(&m1, &m2, 25).unwrap();
        assert!((dec::to_f64(p.alpha()) - 5.0).abs() < 1e-10);
        assert!((dec::to_f64(p.beta()) - 2.0).abs() < 1e-10);

        let m1 = d("0.5");
        let m2 = dec::div_to(&d("1"), &d("3"), 25).unwrap();
        let p = beta_approximation(&m1, &m2, 25).unwrap();
        assert!((dec::to_f64(p.alpha()) - 1.0).abs() < 1e-10);
        assert!((dec::to_f64(p.beta()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn beta_fit_rejects_degenerate_and_invalid_inputs() {
        assert!(matches!(
            beta_approximation(&d("0.5"), &d("0.25"), 20),
            Err(Error::Degenerate { .. })
        ));
        assert!(beta_approximation(&d("0"), &d("0.1"), 20).is_err());
        assert!(beta_approximation(&d("0.5"), &d("0.6"), 20).is_err());
    }

    #[test]
    fn bound_constant_matches_hand_computation() {
        // Beta(5,2): max f = 2.4576 at x = 4/5, max |f'| = 30 at x = 1
        let c = beta_bound_constant(5.0, 2.0).unwrap();
        assert!((c - 17.4576).abs() < 1e-4, "{c}");
        let u = beta_bound_constant(1.0, 1.0).unwrap();
        assert!((u - 1.0).abs() < 1e-12);
        assert!(beta_bound_constant(0.5, 2.0).is_none());
        assert!(beta_bound_constant(1.5, 2.0).is_none());
    }

    #[test]
    fn theta_grid_generation() {
        let g = ThetaGridDb::default_sweep();
        let vals = g.values();
        assert_eq!(vals.len(), 41);
        assert_eq!(vals[0], d("-20"));
        assert_eq!(vals[40], d("20"));
        assert!(ThetaGridDb::new(d("5"), d("1"), d("1")).is_err());
        assert!(ThetaGridDb::new(d("0"), d("1"), d("-1")).is_err());
        let fine = ThetaGridDb::new(d("-1"), d("1"), d("0.5")).unwrap();
        assert_eq!(fine.values().len(), 5);
    }

    #[test]
    fn percentile_solve_produces_an_interior_solution() {
        let grid = ThetaGridDb::new(d("-1"), d("1"), d("1")).unwrap();
        let curve = percentile_solve(&d("0.5"), &grid, &d("0.5"), 8, 16).unwrap();
        assert_eq!(curve.points.len(), 3);
        for pt in &curve.points {
            assert!(pt.reliability > 0.0 && pt.reliability < 1.0);
            assert!(!pt.saturated, "{pt:?}");
        }
        // reliability decreases with the threshold
        assert!(curve.points[0].reliability > curve.points[2].reliability);
    }

    #[test]
    fn extreme_percentile_saturates() {
        let grid = ThetaGridDb::new(d("19"), d("20"), d("1")).unwrap();
        let curve = percentile_solve(&d("0.999"), &grid, &d("0.5"), 8, 16).unwrap();
        assert!(curve.points.iter().all(|p| p.saturated));
    }

    #[test]
    fn percentile_validation() {
        let grid = ThetaGridDb::default_sweep();
        assert!(percentile_solve(&d("0"), &grid, &d("0.5"), 8, 16).is_err());
        assert!(percentile_solve(&d("1"), &grid, &d("0.5"), 8, 16).is_err());
        assert!(percentile_solve(&d("0.5"), &grid, &d("0.5"), 1, 16).is_err());
        assert!(percentile_curves(&[], &grid, &d("0.5"), 8, 16).is_err());
    }

    #[test]
    fn spectral_efficiency_mapping() {
        let curve = PercentileCurve {
            percentile: d("0.5"),
            order: 10,
            digits: 16,
            points: vec![
                PercentilePoint {
                    theta_db: d("0"),
                    theta_linear: d("1"),
                    reliability: 0.8,
                    saturated: false,
                },
                PercentilePoint {
                    theta_db: d("10"),
                    theta_linear: d("10"),
                    reliability: 0.4,
                    saturated: false,
                },
            ],
        };
        let rr = rate_reliability(&curve);
        assert!((rr[0].spectral_efficiency - 1.0).abs() < 1e-12);
        assert!((rr[1].spectral_efficiency - 11f64.log2()).abs() < 1e-12);
        assert_eq!(rr[0].reliability, 0.8);
    }

    #[test]
    fn gap_between_identical_curves_is_zero_and_shifts_show_up() {
        let mk = |offset: i64| PercentileCurve {
            percentile: d("0.1"),
            order: 10,
            digits: 16,
            points: (0..5)
                .map(|i| PercentilePoint {
                    theta_db: BigDecimal::from(i + offset),
                    theta_linear: d("1"),
                    reliability: 0.9 - 0.1 * i as f64,
                    saturated: false,
                })
                .collect(),
        };
        let a = mk(0);
        assert!(percentile_gap(&a, &a, 0.75).unwrap().abs() < 1e-12);
        let b = mk(3);
        assert!((percentile_gap(&a, &b, 0.75).unwrap() - 3.0).abs() < 1e-12);
        assert!(percentile_gap(&a, &b, 0.05).is_err());
    }
}
