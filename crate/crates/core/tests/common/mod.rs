#![allow(dead_code)]

use intrinsic_select::linear::{fit, Dataset, ModelSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Two-sided Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(f64::total_cmp);
    let m = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value for sample size `m` at level `alpha`.
pub fn ks_critical(m: usize, alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (m as f64).sqrt()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Intercept plus `k − 1` standard normal covariates; `y = X coeffs + N(0, σ²)`.
pub fn gaussian_dataset(n: usize, coeffs: &[f64], sigma: f64, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let k = coeffs.len();
    let x = DMatrix::from_fn(n, k, |_, c| if c == 0 { 1.0 } else { normal(&mut r) });
    let noise = DVector::from_fn(n, |_, _| sigma * normal(&mut r));
    let y = &x * DVector::from_column_slice(coeffs) + noise;
    Dataset::from_design(y, x).expect("random design has full rank")
}

/// A dataset whose residual ratio between `inner` and the full `k`-column
/// model is exactly `b`.
pub fn dataset_with_ratio(n: usize, k: usize, inner: &ModelSpec, b: f64, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let x = DMatrix::from_fn(n, k, |_, c| if c == 0 { 1.0 } else { normal(&mut r) });
    let full = ModelSpec::full(k);
    let residual = |model: &ModelSpec, v: DVector<f64>| {
        let ds = Dataset::from_design(v.clone(), x.clone()).expect("full rank");
        let beta = DVector::from_vec(fit(&ds, model).expect("fit").coefficients);
        v - ds.columns(model.indices()).expect("columns") * beta
    };
    // Unit vector orthogonal to the full design.
    let w = DVector::from_fn(n, |_, _| normal(&mut r));
    let e_out = residual(&full, w).normalize();
    // Unit vector inside the full span but orthogonal to the inner span;
    // the last column must not belong to `inner`.
    let e_gap = residual(inner, x.column(k - 1).into_owned()).normalize();
    let c = ((1.0 - b) / b).sqrt();
    let y = e_out + e_gap * c + x.column(0) * 0.3;
    Dataset::from_design(y, x).expect("full rank")
}
