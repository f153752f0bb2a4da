//! Bayes factors for nested linear models under intrinsic priors.
//!
//! All evaluators report `log BF_ij`: the log Bayes factor of the inner
//! (smaller) model `i` against the outer model `j`, as a function of the
//! residual ratio `B = RSS_j / RSS_i`. Callers negate for `BF_ji`.
//!
//! * [`intrinsic_log_bf`]: the exact intrinsic Bayes factor, a one-dimensional
//!   integral over `φ ∈ [0, π/2]`, evaluated in the log domain.
//! * [`asymptotic_log_bf`]: its large-`n` form through Kummer's function.
//! * [`schwarz_log_bf`]: the BIC-style approximation.
//! * [`appendix_oracle_log_bf`]: the same intrinsic Bayes factor assembled from
//!   dense `n × n` matrix expressions. It costs O(n³) per integrand evaluation
//!   and exists to cross-check [`intrinsic_log_bf`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{BetaRatio, Dataset, ModelSpec};
use crate::quadrature::{log_adaptive_gk, log_integrate_refined};
use crate::special::{hyp2f1_series, ln_beta, ln_kummer_1f1};

/// Convergence threshold between successive Gauss–Legendre levels (log scale).
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BfMethod {
    IntrinsicQuadrature,
    IntrinsicAsymptotic,
    Schwarz,
    AppendixOracle,
}

impl BfMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BfMethod::IntrinsicQuadrature => "intrinsic_quadrature",
            BfMethod::IntrinsicAsymptotic => "intrinsic_asymptotic",
            BfMethod::Schwarz => "schwarz",
            BfMethod::AppendixOracle => "appendix_oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BfResult {
    /// `log BF_ij`, inner model versus outer model.
    pub log_bf_ij: f64,
    pub method: BfMethod,
    /// Integrand evaluations behind the accepted value (0 for closed forms).
    pub quad_nodes: usize,
    /// Quadrature error estimate on the log scale.
    pub est_abs_error: f64,
}

impl BfResult {
    fn closed_form(log_bf_ij: f64, method: BfMethod) -> Self {
        BfResult {
            log_bf_ij,
            method,
            quad_nodes: 0,
            est_abs_error: 0.0,
        }
    }
}

fn require_positive(b: &BetaRatio) -> Result<()> {
    if b.value <= 0.0 {
        return Err(Error::DegenerateFit(format!(
            "residual ratio must be positive, got {}",
            b.value
        )));
    }
    Ok(())
}

/// Exact intrinsic Bayes factor `log BF_ij` of a nested pair.
///
/// `BF_ij = [ (2/π) (j+1)^{(j−i)/2} ∫₀^{π/2} sin^{j−i}φ (n + (j+1)sin²φ)^{(n−j)/2}
///            / (nB + (j+1)sin²φ)^{(n−i)/2} dφ ]⁻¹`
pub fn intrinsic_log_bf(b: &BetaRatio) -> Result<BfResult> {
    require_positive(b)?;
    let (i, j, n) = (b.i as f64, b.j as f64, b.n as f64);
    let d = j - i;
    let prefix = (2.0 / PI).ln() + 0.5 * d * (j + 1.0).ln();

    if b.value == 1.0 {
        if b.i == b.j {
            return Ok(BfResult::closed_form(0.0, BfMethod::IntrinsicQuadrature));
        }
        return Ok(BfResult::closed_form(
            -(prefix + log_integral_at_one(b)),
            BfMethod::IntrinsicQuadrature,
        ));
    }

    let bv = b.value;
    // φ-independent part pulled out so the log integrand stays O(j).
    let offset = 0.5 * (n - j) * n.ln() - 0.5 * (n - i) * (n * bv).ln();
    let log_f = |phi: f64| {
        let sn = phi.sin();
        let s = sn * sn;
        let mut v = 0.5 * (n - j) * ((j + 1.0) * s / n).ln_1p()
            - 0.5 * (n - i) * ((j + 1.0) * s / (n * bv)).ln_1p();
        if d > 0.0 {
            v += d * sn.ln();
        }
        v
    };
    // Small B concentrates the integrand near φ = 0 on a scale of order √B.
    let split = (10.0 * bv.sqrt()).min(FRAC_PI_4);
    let li = log_integrate_refined(&[0.0, split, FRAC_PI_2], log_f, QUAD_TOL)?;
    let log_bf = -(prefix + offset + li.log_value);
    if !log_bf.is_finite() {
        return Err(Error::Internal(format!("non-finite log Bayes factor for {b:?}")));
    }
    Ok(BfResult {
        log_bf_ij: log_bf,
        method: BfMethod::IntrinsicQuadrature,
        quad_nodes: li.nodes,
        est_abs_error: li.last_diff,
    })
}

// ∫₀^{π/2} sin^d φ (n + (j+1)sin²φ)^{-d/2} dφ in closed form: substituting
// t = sin²φ gives a Beta integral times ₂F₁, Pfaff-transformed to a positive
// argument below 1/2.
fn log_integral_at_one(b: &BetaRatio) -> f64 {
    let (j, n) = (b.j as f64, b.n as f64);
    let d = (b.j - b.i) as f64;
    if d == 0.0 {
        return FRAC_PI_2.ln();
    }
    let u = (j + 1.0) / (n + j + 1.0);
    0.5_f64.ln() - 0.5 * d * n.ln() + ln_beta(0.5 * (d + 1.0), 0.5)
        - 0.5 * d * ((j + 1.0) / n).ln_1p()
        + hyp2f1_series(0.5 * d, 0.5, 0.5 * (d + 2.0), u).ln()
}

/// `ln I(B)` where `I(B) = ∫₀^{π/2} sin^{j−i}φ exp[((j+1)/2) sin²φ (1 − 1/B)] dφ`,
/// evaluated as `½ Be(½, (j−i+1)/2) ₁F₁((j−i+1)/2; (j−i+2)/2; ((j+1)/2)(1 − 1/B))`.
pub fn ln_kummer_integral(b: &BetaRatio) -> Result<f64> {
    require_positive(b)?;
    let d = (b.j - b.i) as f64;
    let z = 0.5 * (b.j as f64 + 1.0) * (1.0 - 1.0 / b.value);
    Ok(0.5_f64.ln()
        + ln_beta(0.5, 0.5 * (d + 1.0))
        + ln_kummer_1f1(0.5 * (d + 1.0), 0.5 * (d + 2.0), z.min(0.0))?)
}

/// Large-sample form of the intrinsic Bayes factor:
/// `BF_ij ≈ (π/2)(j+1)^{(i−j)/2} I(B)⁻¹ exp(((j−i)/2) log n + ((n−i)/2) log B)`.
pub fn asymptotic_log_bf(b: &BetaRatio) -> Result<BfResult> {
    require_positive(b)?;
    if b.i == b.j && b.value == 1.0 {
        return Ok(BfResult::closed_form(0.0, BfMethod::IntrinsicAsymptotic));
    }
    let (i, j, n) = (b.i as f64, b.j as f64, b.n as f64);
    let log_bf = FRAC_PI_2.ln() + 0.5 * (i - j) * (j + 1.0).ln() - ln_kummer_integral(b)?
        + 0.5 * (j - i) * n.ln()
        + 0.5 * (n - i) * b.value.ln();
    Ok(BfResult::closed_form(log_bf, BfMethod::IntrinsicAsymptotic))
}

/// Schwarz approximation `log S_ij = ((j−i)/2) log n + (n/2) log B`.
pub fn schwarz_log_bf(b: &BetaRatio) -> Result<BfResult> {
    require_positive(b)?;
    let (i, j, n) = (b.i as f64, b.j as f64, b.n as f64);
    Ok(BfResult::closed_form(
        0.5 * (j - i) * n.ln() + 0.5 * n * b.value.ln(),
        BfMethod::Schwarz,
    ))
}

/// Dispatch on a residual-ratio based method.
pub fn log_bf(b: &BetaRatio, method: BfMethod) -> Result<BfResult> {
    match method {
        BfMethod::IntrinsicQuadrature => intrinsic_log_bf(b),
        BfMethod::IntrinsicAsymptotic => asymptotic_log_bf(b),
        BfMethod::Schwarz => schwarz_log_bf(b),
        BfMethod::AppendixOracle => Err(Error::Config(
            "the matrix-form oracle needs the dataset; call appendix_oracle_log_bf".into(),
        )),
    }
}

/// Dense matrix pieces of the intrinsic Bayes factor for one nested pair.
///
/// With `W_j⁻¹ = n/(j+1) (X_j'X_j)⁻¹` and `s = sin²φ`:
/// `B(φ) = s I + X_j W_j⁻¹ X_j'`, `A(φ) = X_i' B(φ)⁻¹ X_i`,
/// `E(φ) = y'(B⁻¹ − B⁻¹ X_i A⁻¹ X_i' B⁻¹) y`.
/// Everything is formed explicitly; intended for small `n` only.
pub struct MatrixForms {
    y: DVector<f64>,
    xi: DMatrix<f64>,
    g: DMatrix<f64>,
    n: usize,
    i: usize,
    j: usize,
}

impl MatrixForms {
    pub fn new(dataset: &Dataset, inner: &ModelSpec, outer: &ModelSpec) -> Result<Self> {
        if !inner.is_subset_of(outer) {
            return Err(Error::NestingViolation {
                inner: inner.indices().to_vec(),
                outer: outer.indices().to_vec(),
            });
        }
        let xi = dataset.columns(inner.indices())?;
        let xj = dataset.columns(outer.indices())?;
        let (n, j) = (dataset.n(), outer.size());
        let xtx_inv = (xj.transpose() * &xj)
            .try_inverse()
            .ok_or_else(|| Error::SingularDesign(format!("X'X of {outer} is singular")))?;
        let g = &xj * (xtx_inv * (n as f64 / (j as f64 + 1.0))) * xj.transpose();
        Ok(MatrixForms {
            y: dataset.y().clone(),
            xi,
            g,
            n,
            i: inner.size(),
            j,
        })
    }

    pub fn b_matrix(&self, phi: f64) -> DMatrix<f64> {
        let s = phi.sin().powi(2);
        &self.g + DMatrix::identity(self.n, self.n) * s
    }

    fn b_chol(&self, phi: f64) -> Result<Cholesky<f64, Dyn>> {
        self.b_matrix(phi)
            .cholesky()
            .ok_or_else(|| Error::Internal(format!("B(φ) not positive definite at φ={phi}")))
    }

    pub fn log_det_b(&self, phi: f64) -> Result<f64> {
        Ok(log_det(&self.b_chol(phi)?))
    }

    pub fn a_matrix(&self, phi: f64) -> Result<DMatrix<f64>> {
        let binv_xi = self.b_chol(phi)?.solve(&self.xi);
        Ok(self.xi.transpose() * binv_xi)
    }

    pub fn log_det_a(&self, phi: f64) -> Result<f64> {
        let a = self.a_matrix(phi)?;
        Ok(log_det(&a.cholesky().ok_or_else(|| {
            Error::Internal("A(φ) not positive definite".into())
        })?))
    }

    pub fn e_value(&self, phi: f64) -> Result<f64> {
        let chol = self.b_chol(phi)?;
        let binv_y = chol.solve(&self.y);
        let binv_xi = chol.solve(&self.xi);
        let a = self.xi.transpose() * &binv_xi;
        let a_inv = a
            .try_inverse()
            .ok_or_else(|| Error::Internal("A(φ) singular".into()))?;
        let proj = &binv_xi * a_inv * binv_xi.transpose();
        Ok(self.y.dot(&binv_y) - (self.y.transpose() * proj * &self.y)[(0, 0)])
    }

    /// `−½ log|A(φ)| − ½ log|B(φ)| − ((n−i)/2) log E(φ)`.
    pub fn log_integrand(&self, phi: f64) -> Result<f64> {
        let e = self.e_value(phi)?;
        if !(e > 0.0) {
            return Err(Error::Internal(format!("E(φ) = {e} at φ = {phi}")));
        }
        Ok(-0.5 * self.log_det_a(phi)? - 0.5 * self.log_det_b(phi)?
            - 0.5 * (self.n - self.i) as f64 * e.ln())
    }

    /// Residual sum of squares of the inner fit from the normal equations.
    pub fn rss_inner(&self) -> Result<f64> {
        let xtx = self.xi.transpose() * &self.xi;
        let beta = xtx
            .cholesky()
            .ok_or_else(|| Error::SingularDesign("X_i'X_i singular".into()))?
            .solve(&(self.xi.transpose() * &self.y));
        Ok((&self.y - &self.xi * beta).norm_squared())
    }

    pub fn log_det_xtx_inner(&self) -> Result<f64> {
        let xtx = self.xi.transpose() * &self.xi;
        Ok(log_det(&xtx.cholesky().ok_or_else(|| {
            Error::SingularDesign("X_i'X_i singular".into())
        })?))
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.i, self.j, self.n)
    }
}

fn log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

/// Intrinsic `log BF_ij` from the dense matrix forms, integrated by adaptive
/// Gauss–Kronrod. Test oracle; O(n³) per integrand evaluation.
pub fn appendix_oracle_log_bf(
    dataset: &Dataset,
    inner: &ModelSpec,
    outer: &ModelSpec,
) -> Result<BfResult> {
    let forms = MatrixForms::new(dataset, inner, outer)?;
    if inner == outer {
        // The integrand is identically one; skip the ill-conditioned φ → 0 end.
        return Ok(BfResult::closed_form(0.0, BfMethod::AppendixOracle));
    }
    let (i, j, n) = forms.sizes();
    if n <= j {
        return Err(Error::Shape(format!("need n > j, got n={n}, j={j}")));
    }
    let rss_i = forms.rss_inner()?;
    if !(rss_i > 0.0) {
        return Err(Error::DegenerateFit(format!("inner model {inner} fits exactly")));
    }
    let log_f = |phi: f64| forms.log_integrand(phi).unwrap_or(f64::NEG_INFINITY);
    let log_i0 = log_adaptive_gk(log_f, 0.0, FRAC_PI_2, 1e-12)?;
    let log_bf_ji = (2.0 / PI).ln()
        + 0.5 * forms.log_det_xtx_inner()?
        + 0.5 * (n - i) as f64 * rss_i.ln()
        + log_i0;
    Ok(BfResult {
        log_bf_ij: -log_bf_ji,
        method: BfMethod::AppendixOracle,
        quad_nodes: 0,
        est_abs_error: 0.0,
    })
}
