//! Checks against independently derived reference values.

use concentratable::measures::ce_shots;
use concentratable::oracle::{apply_separable_sequence, dense_reduced_purity, random_local_kraus};
use concentratable::reductions::purity_table;
use concentratable::swaptest::{all_tested, exact_distribution, sample};
use concentratable::{QubitSet, Statevector};
use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn two_qubit_concurrence_identity() {
    // p(11) = lambda_1 lambda_2, the product of squared Schmidt coefficients
    for seed in 0..200 {
        let psi = Statevector::haar_random(2, seed).unwrap();
        let a = psi.amplitudes();
        let m = Matrix2::new(a[0], a[1], a[2], a[3]);
        let sv = m.singular_values();
        let lambdas = (sv[0] * sv[0], sv[1] * sv[1]);
        let d = exact_distribution(&psi, &psi, all_tested(2).unwrap()).unwrap();
        assert!((d.get(0b11) - lambdas.0 * lambdas.1).abs() <= 1e-10, "seed {seed}");
        // C = 2 |a00 a11 - a01 a10|, so p(11) = C^2 / 4
        let concurrence = 2.0 * (a[0] * a[3] - a[1] * a[2]).norm();
        assert!((d.get(0b11) - concurrence * concurrence / 4.0).abs() <= 1e-10);
    }
}

#[test]
fn haar_mean_single_qubit_purity() {
    // E[Tr rho_A^2] = (d_A + d_B) / (d_A d_B + 1) = 4/5 for two qubits
    let samples = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let alpha = QubitSet::new(2, 0b01).unwrap();
    let mut total = 0.0;
    for _ in 0..samples {
        let psi = Statevector::haar_random_with(2, &mut rng).unwrap();
        total += dense_reduced_purity(&psi, alpha).unwrap();
    }
    let mean = total / samples as f64;
    assert!((mean - 0.8).abs() <= 0.01, "mean {mean}");
}

/// Upper `1e-3` quantile of chi-squared with `k` degrees of freedom
/// (Wilson-Hilferty).
fn chi_squared_critical(k: usize) -> f64 {
    let k = k as f64;
    let z = 3.090_232;
    let h = 2.0 / (9.0 * k);
    k * (1.0 - h + z * h.sqrt()).powi(3)
}

fn goodness_of_fit(psi: &Statevector, phi: &Statevector, tested: QubitSet, seed: u64) {
    let shots = 100_000u64;
    let exact = exact_distribution(psi, phi, tested).unwrap();
    let h = sample(psi, phi, tested, shots, seed).unwrap();
    let (mut statistic, mut bins) = (0.0, 0usize);
    let (mut pooled_expected, mut pooled_observed) = (0.0, 0.0);
    for (z, &p) in exact.probabilities().iter().enumerate() {
        let expected = p * shots as f64;
        let observed = h.count(z) as f64;
        if p < 1e-12 {
            assert_eq!(h.count(z), 0, "impossible outcome {z} observed");
        } else if expected < 5.0 {
            pooled_expected += expected;
            pooled_observed += observed;
        } else {
            statistic += (observed - expected).powi(2) / expected;
            bins += 1;
        }
    }
    if pooled_expected > 0.0 {
        statistic += (pooled_observed - pooled_expected).powi(2) / pooled_expected;
        bins += 1;
    }
    if bins > 1 {
        let critical = chi_squared_critical(bins - 1);
        assert!(statistic < critical, "chi-squared {statistic} >= {critical} with {} dof", bins - 1);
    }
}

#[test]
fn sampled_histograms_fit_exact_distribution() {
    goodness_of_fit(&Statevector::ghz(3).unwrap(), &Statevector::ghz(3).unwrap(), all_tested(3).unwrap(), 1);
    goodness_of_fit(&Statevector::w(4).unwrap(), &Statevector::w(4).unwrap(), all_tested(4).unwrap(), 2);
    for seed in 0..4 {
        let psi = Statevector::haar_random(4, seed).unwrap();
        let phi = Statevector::haar_random(4, seed + 100).unwrap();
        goodness_of_fit(&psi, &psi, all_tested(4).unwrap(), seed);
        goodness_of_fit(&psi, &phi, QubitSet::new(4, 0b1011).unwrap(), seed);
    }
}

#[test]
fn ghz3_zero_frequency() {
    let psi = Statevector::ghz(3).unwrap();
    let shots = 100_000u64;
    let h = sample(&psi, &psi, all_tested(3).unwrap(), shots, 5).unwrap();
    let p = 5.0 / 8.0;
    let sigma = (p * (1.0 - p) / shots as f64).sqrt();
    assert!((h.frequency(0) - p).abs() <= 3.0 * sigma);
    assert!(h.counts().all(|(z, _)| z.count_ones() % 2 == 0));
}

#[test]
fn separable_sequences_raise_average_purity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..100u64 {
        let n = 2 + (trial % 3) as usize;
        let psi = Statevector::haar_random_with(n, &mut rng).unwrap();
        let ops: Vec<_> = (0..3).map(|j| random_local_kraus(trial * 3 + j, rng.gen_range(0..n))).collect();
        let branches = apply_separable_sequence(&psi, &ops).unwrap();
        assert!(branches.len() <= 8);
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() <= 1e-9);
        let full = QubitSet::full(n).unwrap();
        let before = purity_table(&psi, full).unwrap();
        let after: Vec<_> = branches.iter().map(|b| purity_table(&b.state, full).unwrap()).collect();
        for (alpha, p) in before.iter() {
            let avg: f64 = branches.iter().zip(&after).map(|(b, t)| b.probability * t.get(alpha).unwrap()).sum();
            assert!(avg >= p - 1e-9, "trial {trial} alpha {alpha:b}: {avg} < {p}");
        }
    }
}

#[test]
fn single_qubit_test_matches_overlap_formula() {
    let i = Complex64::new(0.0, 1.0);
    let psi = Statevector::normalized(vec![Complex64::new(1.0, 0.0), i]).unwrap();
    let phi = Statevector::normalized(vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0)]).unwrap();
    let overlap = psi.inner_product(&phi).unwrap().norm_sqr();
    let d = exact_distribution(&psi, &phi, all_tested(1).unwrap()).unwrap();
    assert!((d.get(0) - (1.0 + overlap) / 2.0).abs() <= 1e-12);
    assert!((d.get(1) - (1.0 - overlap) / 2.0).abs() <= 1e-12);
}

#[test]
fn ghz3_shot_estimate_converges() {
    // C = 1/2 - 1/2^n for GHZ with s = S; RMS error should fall as shots^-1/2
    let psi = Statevector::ghz(3).unwrap();
    let s = QubitSet::full(3).unwrap();
    let truth = 3.0 / 8.0;
    let big = ce_shots(&psi, s, 100_000, 1).unwrap().value;
    assert!((big - truth).abs() <= 3.0 * (truth * (1.0 - truth) / 1e5).sqrt(), "estimate {big}");
    let points: Vec<(f64, f64)> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&shots| {
            let mse = (0..200u64)
                .map(|seed| (ce_shots(&psi, s, shots, 50_000 + seed).unwrap().value - truth).powi(2))
                .sum::<f64>()
                / 200.0;
            ((shots as f64).ln(), mse.sqrt().ln())
        })
        .collect();
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
}
