//! Frequentist behaviour of the "accept `M_j` when its posterior against the
//! intercept-only model reaches ½" rule.
//!
//! Under that rule `M_j` is accepted iff `B_1j ≤ c` for a threshold `c` that
//! depends only on `(j, n)` and the method. `B_1j` is central beta
//! `Be((n−j)/2, (j−1)/2)` when the intercept-only model holds, and doubly
//! noncentral with `λ₂ = λ` otherwise, so Type I error and power are exact
//! beta and Poisson-mixture CDF values at `c`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bayes_factor::log_bf;
use crate::error::{Error, Result};
use crate::linear::{BetaRatio, Dataset, ModelSpec};
use crate::parallel::Exec;
use crate::selection::{logistic, posterior_table, Method, Scheme};
use crate::special::{dnc_beta_cdf, reg_inc_beta, DncBetaParams};

/// Bisection stops once the bracket is narrower than this (in `B`).
pub const THRESHOLD_TOL: f64 = 1e-12;
pub const THRESHOLD_MAX_ITER: usize = 200;

/// The `(j, n)` grid of the published Type I error table, column by column.
pub const TYPE1_TABLE_GRID: &[(usize, &[usize])] = &[
    (7, &[2, 3, 4, 5, 6]),
    (10, &[2, 3, 4, 5, 6, 9]),
    (15, &[2, 3, 4, 5, 6, 9, 12]),
    (40, &[2, 3, 4, 5, 6, 9, 12, 38]),
    (80, &[2, 3, 4, 5, 6, 9, 12, 38, 78]),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionThreshold {
    pub j: usize,
    pub n: usize,
    pub method: Method,
    /// Accept `M_j` iff `B_1j ≤ c`. Equal to 1 when `always_reject` is set.
    pub c: f64,
    /// `M_j` is preferred even at `B = 1`, so the intercept-only model is
    /// always rejected.
    pub always_reject: bool,
    /// `|P(M_j | B = c) − ½|`.
    pub root_residual: f64,
}

fn check_jn(j: usize, n: usize) -> Result<()> {
    if j < 2 || n <= j {
        return Err(Error::Domain(format!("need n > j ≥ 2, got j={j}, n={n}")));
    }
    Ok(())
}

/// `log BF_{j1}` as a function of `B = B_1j`.
fn log_bf_outer(b: f64, j: usize, n: usize, method: Method) -> Result<f64> {
    let ratio = BetaRatio::new(b, 1, j, n)?;
    Ok(-log_bf(&ratio, method.bf_method())?.log_bf_ij)
}

/// Pairwise posterior of `M_j` against the intercept-only model at `B_1j = b`.
pub fn posterior_of_outer(b: f64, j: usize, n: usize, method: Method) -> Result<f64> {
    Ok(logistic(log_bf_outer(b, j, n, method)?))
}

pub fn decision_threshold(j: usize, n: usize, method: Method) -> Result<DecisionThreshold> {
    check_jn(j, n)?;
    let finish = |c: f64, always_reject: bool| -> Result<DecisionThreshold> {
        let root_residual = (posterior_of_outer(c, j, n, method)? - 0.5).abs();
        Ok(DecisionThreshold {
            j,
            n,
            method,
            c,
            always_reject,
            root_residual,
        })
    };
    match method {
        Method::Schwarz => {
            let c = (n as f64).powf(-((j - 1) as f64) / n as f64);
            finish(c, false)
        }
        Method::Intrinsic => {
            let f = |b: f64| log_bf_outer(b, j, n, method);
            if f(1.0)? >= 0.0 {
                return finish(1.0, true);
            }
            let mut lo = 1e-8;
            while f(lo)? <= 0.0 {
                lo *= 1e-8;
                if lo < 1e-280 {
                    return Err(Error::ConvergenceFailure(format!(
                        "no lower bracket for the threshold at j={j}, n={n}"
                    )));
                }
            }
            let mut hi = 1.0;
            let mut iter = 0;
            while hi - lo > THRESHOLD_TOL && iter < THRESHOLD_MAX_ITER {
                let mid = 0.5 * (lo + hi);
                if f(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                iter += 1;
            }
            finish(0.5 * (lo + hi), false)
        }
    }
}

fn null_shape(j: usize, n: usize) -> (f64, f64) {
    (0.5 * (n - j) as f64, 0.5 * (j - 1) as f64)
}

/// Probability of accepting `M_j` when the intercept-only model is true.
pub fn type1_error(j: usize, n: usize, method: Method) -> Result<f64> {
    let t = decision_threshold(j, n, method)?;
    type1_at(&t)
}

fn type1_at(t: &DecisionThreshold) -> Result<f64> {
    if t.always_reject {
        return Ok(1.0);
    }
    let (a, b) = null_shape(t.j, t.n);
    reg_inc_beta(t.c, a, b)
}

/// Probability of accepting `M_j` when it is true with noncentrality `lambda`.
pub fn power(j: usize, n: usize, lambda: f64, method: Method) -> Result<f64> {
    let t = decision_threshold(j, n, method)?;
    power_at(&t, lambda)
}

fn power_at(t: &DecisionThreshold, lambda: f64) -> Result<f64> {
    if t.always_reject {
        return Ok(1.0);
    }
    let (a, b) = null_shape(t.j, t.n);
    dnc_beta_cdf(t.c, &DncBetaParams::new(a, b, 0.0, lambda)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub n: usize,
    pub type1: f64,
    pub power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorCurve {
    pub j: usize,
    pub method: Method,
    pub lambda: Option<f64>,
    pub rows: Vec<ErrorRow>,
}

/// Type I error (and power, when `lambda` is given) for each `n`, ascending.
pub fn error_curve(
    j: usize,
    ns: &[usize],
    lambda: Option<f64>,
    method: Method,
    exec: Exec,
) -> Result<ErrorCurve> {
    if let Some(l) = lambda {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::Domain(format!("lambda must be finite and ≥ 0, got {l}")));
        }
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let rows = exec.try_map(&ns, |&n| {
        let t = decision_threshold(j, n, method)?;
        Ok::<_, Error>(ErrorRow {
            n,
            type1: type1_at(&t)?,
            power: lambda.map(|l| power_at(&t, l)).transpose()?,
        })
    })?;
    Ok(ErrorCurve {
        j,
        method,
        lambda,
        rows,
    })
}

/// How covariates are laid out for a simulated sample of size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Design {
    /// Intercept plus one covariate: the first `⌊(n−1)/2⌋` rows at 0, the
    /// rest at `delta`, the last row at 1.
    TwoGroupSlope { delta: f64 },
    /// Intercept plus `covariates` independent standard normal columns.
    Gaussian { covariates: usize },
}

impl Design {
    pub fn k(&self) -> usize {
        match self {
            Design::TwoGroupSlope { .. } => 2,
            Design::Gaussian { covariates } => covariates + 1,
        }
    }

    pub fn matrix<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DMatrix<f64> {
        match *self {
            Design::TwoGroupSlope { delta } => {
                let zeros = (n - 1) / 2;
                DMatrix::from_fn(n, 2, |r, c| match (c, r) {
                    (0, _) => 1.0,
                    (_, r) if r == n - 1 => 1.0,
                    (_, r) if r < zeros => 0.0,
                    _ => delta,
                })
            }
            Design::Gaussian { covariates } => {
                let mut x = DMatrix::from_element(n, covariates + 1, 1.0);
                for c in 1..=covariates {
                    for r in 0..n {
                        x[(r, c)] = rng.sample(StandardNormal);
                    }
                }
                x
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub design: Design,
    pub true_model: ModelSpec,
    pub true_coeffs: Vec<f64>,
    pub sigma: f64,
}

impl Scenario {
    /// One-slope example with intercept and slope coefficients `alpha`.
    pub fn slope(delta: f64, alpha: [f64; 2], sigma: f64) -> Self {
        Scenario {
            design: Design::TwoGroupSlope { delta },
            true_model: ModelSpec::full(2),
            true_coeffs: alpha.to_vec(),
            sigma,
        }
    }

    /// Same design with only the intercept active.
    pub fn slope_null(delta: f64, intercept: f64, sigma: f64) -> Self {
        Scenario {
            design: Design::TwoGroupSlope { delta },
            true_model: ModelSpec::intercept(),
            true_coeffs: vec![intercept],
            sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.true_model.validate_for(self.design.k())?;
        if self.true_coeffs.len() != self.true_model.size() {
            return Err(Error::Shape(format!(
                "{} coefficients for true model {}",
                self.true_coeffs.len(),
                self.true_model
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Draw `y ~ N(X_T α_T, σ² I)` on a fresh design of size `n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        let x = self.design.matrix(n, rng);
        let xt = DMatrix::from_fn(n, self.true_model.size(), |r, c| {
            x[(r, self.true_model.indices()[c])]
        });
        let mean = xt * DVector::from_column_slice(&self.true_coeffs);
        let y = DVector::from_fn(n, |r, _| {
            mean[r] + self.sigma * rng.sample::<f64, _>(StandardNormal)
        });
        Dataset::from_design(y, x)
    }
}

/// Generator for replicate `rep` at grid position `n_index`: one ChaCha8
/// stream per (grid point, replicate) pair under a single seed, so results
/// do not depend on thread count.
pub fn replicate_rng(seed: u64, n_index: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n_index as u64) << 32) | rep as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub median_posterior: f64,
    pub frac_top: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyConfig {
    pub replicates: usize,
    pub seed: u64,
    pub method: Method,
    pub scheme: Scheme,
}

/// Posterior probability and rank of the true model over simulated replicates.
pub fn consistency_sim(
    scenario: &Scenario,
    n_grid: &[usize],
    config: &ConsistencyConfig,
    exec: Exec,
) -> Result<Vec<ConsistencyRow>> {
    scenario.validate()?;
    if config.replicates == 0 {
        return Err(Error::Config("replicates must be at least 1".into()));
    }
    let k = scenario.design.k();
    if let Some(&n) = n_grid.iter().find(|&&n| n <= k + 1) {
        return Err(Error::Domain(format!("n = {n} too small for k = {k} columns")));
    }
    let tasks: Vec<(usize, usize)> = (0..n_grid.len())
        .flat_map(|ni| (0..config.replicates).map(move |rep| (ni, rep)))
        .collect();
    let outcomes = exec.try_map(&tasks, |&(ni, rep)| {
        let mut rng = replicate_rng(config.seed, ni, rep);
        let ds = scenario.sample(n_grid[ni], &mut rng)?;
        let table = posterior_table(&ds, config.method, config.scheme, Exec::Sequential)?;
        let p = table.probability_of(&scenario.true_model).unwrap_or(0.0);
        let top = table.top().model == scenario.true_model;
        Ok::<_, Error>((p, top))
    })?;
    Ok(n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let chunk = &outcomes[ni * config.replicates..(ni + 1) * config.replicates];
            let mut ps: Vec<f64> = chunk.iter().map(|o| o.0).collect();
            let tops = chunk.iter().filter(|o| o.1).count();
            ConsistencyRow {
                n,
                median_posterior: median(&mut ps),
                frac_top: tops as f64 / config.replicates as f64,
                seed: config.seed,
            }
        })
        .collect())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Limiting ratio of two `c/σ^q` default priors at the fitted values:
/// `((c_i/c_j)·lim B_ij)^{q/2}`.
pub fn prior_ratio_limit(q: f64, c_i: f64, c_j: f64, b_limit: f64) -> Result<f64> {
    if !(q > 0.0 && c_i > 0.0 && c_j > 0.0 && b_limit > 0.0 && b_limit <= 1.0) {
        return Err(Error::Domain(format!(
            "need q, c_i, c_j > 0 and b_limit in (0,1], got ({q}, {c_i}, {c_j}, {b_limit})"
        )));
    }
    Ok((c_i / c_j * b_limit).powf(0.5 * q))
}

/// Large-sample approximation of `log[P(M_j|y)/P(M_T|y)]` from the residual
/// ratios against the intercept-only model.
pub fn log_posterior_ratio_approx(j: usize, t: usize, n: usize, b_1t: f64, b_1j: f64) -> f64 {
    0.5 * (t as f64 - j as f64) * (n as f64).ln() + 0.5 * n as f64 * (b_1t / b_1j).ln()
}

/// Per-observation limit of `log[P(M_j|y)/P(M_T|y)]` when `M_j` sits at
/// distance `delta` from the true model and the residual variance scales
/// as `σ²(1 + δ)`.
pub fn log_ratio_rate(delta: f64) -> f64 {
    -0.5 * delta.ln_1p()
}
