//! Structural properties of the inverse transform, checked across many
//! orders and against randomized discrete mixtures whose moments are known
//! in closed form.

use bigdecimal::{BigDecimal, One, Zero};
use metadist::dec;
use metadist::precision::check_complete_monotonicity;
use metadist::{CdfMode, MomentVector, TransformMatrix};
use proptest::prelude::*;
use statrs::distribution::{Binomial, Discrete};

#[test]
fn column_sums_and_antidiagonal_symmetry_up_to_order_50() {
    for n in 0..=50usize {
        let a = TransformMatrix::build(n).unwrap();
        for j in 0..=n {
            let col_sum: num_bigint::BigInt = (0..=n).map(|i| a.entry(i, j).clone()).sum();
            let expected = if j == 0 { 1 } else { 0 };
            assert_eq!(col_sum, expected.into(), "n={n} j={j}");
            for i in 0..=n {
                assert_eq!(a.entry(i, j), a.entry(n - j, n - i), "n={n} ({i},{j})");
            }
        }
    }
}

#[test]
fn point_mass_weights_match_the_binomial_pmf() {
    let digits = 40;
    for (nu_str, n) in [("0.3", 12), ("0.5", 9), ("0.85", 17)] {
        let nu = dec::parse(nu_str);
        let m = metadist::moments::point_mass_moments(&nu, n, digits).unwrap();
        let h = TransformMatrix::build(n).unwrap().apply(&m, digits).unwrap();
        let pmf = Binomial::new(nu_str.parse().unwrap(), n as u64).unwrap();
        for (k, w) in h.values().iter().enumerate() {
            let expected = pmf.pmf(k as u64);
            assert!(
                (dec::to_f64(w) - expected).abs() < 1e-12,
                "nu={nu_str} n={n} k={k}"
            );
        }
    }
}

#[test]
fn uniform_interpolated_cdf_is_the_identity_under_probing() {
    for n in [1usize, 5, 10, 50] {
        // entries reach ~3^n, so rounded moments need the matching budget
        let digits = metadist::precision::rule_of_thumb_digits(n).digits;
        let m = metadist::moments::uniform_moments(n, digits).unwrap();
        let h = TransformMatrix::build(n).unwrap().apply(&m, digits).unwrap();
        for i in 0..=200u32 {
            let x = BigDecimal::new(i.into(), 0) / BigDecimal::from(200);
            let f = h.eval_cdf(&x, CdfMode::Interpolated).unwrap();
            assert!(
                (f - &x).abs() < dec::pow10_neg(13),
                "n={n} x={x}"
            );
        }
    }
}

#[test]
fn both_cdf_modes_are_monotone_and_normalized() {
    let digits = 25;
    let n = 10;
    let m = metadist::moments::uniform_moments(n, digits).unwrap();
    let h = TransformMatrix::build(n).unwrap().apply(&m, digits).unwrap();
    for mode in [CdfMode::Step, CdfMode::Interpolated] {
        let mut prev = BigDecimal::zero();
        for i in 0..=100u32 {
            let x = BigDecimal::new(i.into(), 2);
            let f = h.eval_cdf(&x, mode).unwrap();
            assert!(f >= prev, "mode {mode:?} dipped at x={x}");
            assert!(f >= BigDecimal::zero() && f <= BigDecimal::one());
            prev = f;
        }
        assert_eq!(prev, BigDecimal::one(), "F(1) under {mode:?}");
    }
}

/// A discrete mixture with exactly representable atoms and weights.
#[derive(Debug, Clone)]
struct Mixture {
    /// atom positions, thousandths of 1
    atoms: Vec<u32>,
    /// unnormalized positive masses
    masses: Vec<u32>,
}

fn mixture_strategy() -> impl Strategy<Value = (usize, Mixture)> {
    let comp = (0u32..=1000, 1u32..=100);
    (2usize..=15, prop::collection::vec(comp, 1..=4)).prop_map(|(n, comps)| {
        let (atoms, masses) = comps.into_iter().unzip();
        (n, Mixture { atoms, masses })
    })
}

fn mixture_moments(mix: &Mixture, n: usize, digits: u32) -> MomentVector {
    let total: u32 = mix.masses.iter().sum();
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut num = BigDecimal::zero();
        for (&a, &w) in mix.atoms.iter().zip(&mix.masses) {
            let atom = BigDecimal::new(a.into(), 3);
            num += dec::pow_int(&atom, j as u64, 200) * BigDecimal::from(w);
        }
        values.push(dec::div_to(&num, &BigDecimal::from(total), digits).unwrap());
    }
    MomentVector::new_unchecked(values, digits)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn random_discrete_mixtures_invert_cleanly((n, mix) in mixture_strategy()) {
        let digits = 40;
        let m = mixture_moments(&mix, n, digits);
        prop_assert!(check_complete_monotonicity(&m, 10).is_completely_monotone());

        let h = TransformMatrix::build(n).unwrap().apply(&m, digits).unwrap();
        prop_assert_eq!(h.sum(), BigDecimal::one());
        let floor = -dec::pow10_neg(10);
        for w in h.values() {
            prop_assert!(w > &floor, "weight {} at n={}", w, n);
        }

        // the smoothing kernel preserves the first two factorial moments
        // exactly: sum_k k h_k = n M_1 and sum_k k(k-1) h_k = n(n-1) M_2,
        // as linear identities that survive input rounding untouched
        let mean: BigDecimal = h
            .values()
            .iter()
            .enumerate()
            .map(|(k, w)| BigDecimal::from(k as u64) * w)
            .sum();
        prop_assert_eq!(mean, BigDecimal::from(n as u64) * &m.values()[1]);
        if n >= 2 {
            let fact2: BigDecimal = h
                .values()
                .iter()
                .enumerate()
                .map(|(k, w)| BigDecimal::from((k * k.saturating_sub(1)) as u64) * w)
                .sum();
            let scale = BigDecimal::from((n * (n - 1)) as u64);
            prop_assert_eq!(fact2, scale * &m.values()[2]);
        }
    }
}
