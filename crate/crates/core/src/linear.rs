//! Least-squares geometry for nested linear models.
//!
//! Every fit goes through a Householder QR factorization of the model's
//! sub-design; projection ("hat") matrices are never formed.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold on the triangular factor's diagonal below which a
/// design is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Rounding slack allowed on a residual-sum-of-squares ratio before clamping.
pub const RATIO_CLAMP: f64 = 1e-12;

/// Residual sums of squares below this fraction of `y'y` are reported as zero.
pub const ZERO_RSS_REL: f64 = 1e-24;

/// Response vector and full-rank design whose first column is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
    column_names: Vec<String>,
}

impl Dataset {
    pub fn new(y: DVector<f64>, x: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        let (n, k) = x.shape();
        if y.len() != n {
            return Err(Error::Shape(format!(
                "response has {} rows but design has {n}",
                y.len()
            )));
        }
        if column_names.len() != k {
            return Err(Error::Shape(format!(
                "{} column names for {k} design columns",
                column_names.len()
            )));
        }
        if k == 0 || n <= k {
            return Err(Error::Shape(format!("need n > k >= 1, got n={n}, k={k}")));
        }
        if x.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::InvalidModel(
                "design column 0 must be the all-ones intercept".into(),
            ));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("data contain non-finite values".into()));
        }
        let ds = Dataset { y, x, column_names };
        ds.check_full_rank()?;
        Ok(ds)
    }

    /// Builds a dataset with generated column names (`(Intercept)`, `x1`, ...).
    pub fn from_design(y: DVector<f64>, x: DMatrix<f64>) -> Result<Self> {
        let names = (0..x.ncols())
            .map(|c| {
                if c == 0 {
                    "(Intercept)".to_string()
                } else {
                    format!("x{c}")
                }
            })
            .collect();
        Self::new(y, x, names)
    }

    fn check_full_rank(&self) -> Result<()> {
        for a in 0..self.k() {
            for b in (a + 1)..self.k() {
                if self.x.column(a) == self.x.column(b) {
                    return Err(Error::SingularDesign(format!(
                        "columns '{}' and '{}' are identical",
                        self.column_names[a], self.column_names[b]
                    )));
                }
            }
        }
        match HouseholderQr::new(self.x.clone()) {
            Ok(_) => Ok(()),
            Err(RankDeficient { column }) => Err(Error::SingularDesign(format!(
                "column '{}' is linearly dependent on columns {:?}",
                self.column_names[column],
                &self.column_names[..column]
            ))),
        }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Columns of the design selected by `indices`, in that order.
    pub fn columns(&self, indices: &[usize]) -> Result<DMatrix<f64>> {
        for &c in indices {
            if c >= self.k() {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    len: self.k(),
                });
            }
        }
        Ok(self.x.select_columns(indices))
    }

    pub fn model_names(&self, model: &ModelSpec) -> Vec<&str> {
        model
            .indices()
            .iter()
            .map(|&c| self.column_names[c].as_str())
            .collect()
    }
}

/// A submodel: strictly increasing column indices that always include the intercept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelSpec {
    indices: Vec<usize>,
}

impl ModelSpec {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidModel("empty model".into()));
        }
        if indices[0] != 0 {
            return Err(Error::InvalidModel(format!(
                "model {indices:?} must contain the intercept (index 0)"
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModel(format!(
                "model indices {indices:?} must be strictly increasing"
            )));
        }
        Ok(ModelSpec { indices })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices)
    }

    pub fn intercept() -> Self {
        ModelSpec { indices: vec![0] }
    }

    pub fn full(k: usize) -> Self {
        assert!(k >= 1);
        ModelSpec {
            indices: (0..k).collect(),
        }
    }

    /// Model whose non-intercept columns are the set bits of `mask` (bit `c` ↔ column `c`).
    pub fn from_mask(mask: u64) -> Self {
        let mut indices = vec![0];
        indices.extend((1..64).filter(|c| mask >> c & 1 == 1));
        ModelSpec { indices }
    }

    pub fn mask(&self) -> u64 {
        self.indices.iter().fold(0u64, |m, &c| m | (1 << c))
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn is_subset_of(&self, other: &ModelSpec) -> bool {
        self.indices
            .iter()
            .all(|c| other.indices.binary_search(c).is_ok())
    }

    pub fn validate_for(&self, k: usize) -> Result<()> {
        match self.indices.last() {
            Some(&c) if c >= k => Err(Error::IndexOutOfRange { index: c, len: k }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (t, c) in self.indices.iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub rss: f64,
    pub coefficients: Vec<f64>,
    /// Maximum-likelihood scale, `sqrt(rss / n)`.
    pub sigma_hat: f64,
    pub df: usize,
}

/// Ratio `RSS_outer / RSS_inner` of two nested fits, with the model sizes and sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaRatio {
    pub value: f64,
    pub i: usize,
    pub j: usize,
    pub n: usize,
}

impl BetaRatio {
    pub fn new(value: f64, i: usize, j: usize, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!("ratio must lie in [0,1], got {value}")));
        }
        if i == 0 || i > j || j >= n {
            return Err(Error::Domain(format!(
                "need 1 <= i <= j < n, got i={i}, j={j}, n={n}"
            )));
        }
        Ok(BetaRatio { value, i, j, n })
    }
}

#[derive(Debug)]
struct RankDeficient {
    column: usize,
}

/// Householder QR of an `n × p` matrix (`n ≥ p`), stored LAPACK style:
/// `R` on and above the diagonal, reflector tails below it.
#[derive(Debug, Clone)]
struct HouseholderQr {
    qr: DMatrix<f64>,
    tau: Vec<f64>,
}

impl HouseholderQr {
    fn new(mut a: DMatrix<f64>) -> std::result::Result<Self, RankDeficient> {
        let (n, p) = a.shape();
        debug_assert!(n >= p);
        let mut tau = vec![0.0; p];
        let mut max_diag = 0.0_f64;
        for c in 0..p {
            let norm = a.view((c, c), (n - c, 1)).norm();
            let x0 = a[(c, c)];
            if norm == 0.0 {
                return Err(RankDeficient { column: c });
            }
            let beta = if x0 >= 0.0 { -norm } else { norm };
            let scale = 1.0 / (x0 - beta);
            for r in (c + 1)..n {
                a[(r, c)] *= scale;
            }
            tau[c] = (beta - x0) / beta;
            a[(c, c)] = beta;
            for col in (c + 1)..p {
                let mut dot = a[(c, col)];
                for r in (c + 1)..n {
                    dot += a[(r, c)] * a[(r, col)];
                }
                dot *= tau[c];
                a[(c, col)] -= dot;
                for r in (c + 1)..n {
                    let v = a[(r, c)];
                    a[(r, col)] -= dot * v;
                }
            }
            max_diag = max_diag.max(beta.abs());
        }
        for c in 0..p {
            if a[(c, c)].abs() < RANK_TOL * max_diag {
                return Err(RankDeficient { column: c });
            }
        }
        Ok(HouseholderQr { qr: a, tau })
    }

    fn p(&self) -> usize {
        self.qr.ncols()
    }

    fn apply_qt(&self, v: &mut DVector<f64>) {
        let n = self.qr.nrows();
        for c in 0..self.p() {
            let mut dot = v[c];
            for r in (c + 1)..n {
                dot += self.qr[(r, c)] * v[r];
            }
            dot *= self.tau[c];
            v[c] -= dot;
            for r in (c + 1)..n {
                v[r] -= dot * self.qr[(r, c)];
            }
        }
    }

    fn apply_q(&self, v: &mut DVector<f64>) {
        let n = self.qr.nrows();
        for c in (0..self.p()).rev() {
            let mut dot = v[c];
            for r in (c + 1)..n {
                dot += self.qr[(r, c)] * v[r];
            }
            dot *= self.tau[c];
            v[c] -= dot;
            for r in (c + 1)..n {
                v[r] -= dot * self.qr[(r, c)];
            }
        }
    }

    /// Coefficients and residual sum of squares for one response.
    fn solve(&self, y: &DVector<f64>) -> (Vec<f64>, f64) {
        let p = self.p();
        let mut qty = y.clone();
        self.apply_qt(&mut qty);
        let rss = qty.rows(p, qty.len() - p).norm_squared();
        let mut coef = vec![0.0; p];
        for r in (0..p).rev() {
            let mut s = qty[r];
            for c in (r + 1)..p {
                s -= self.qr[(r, c)] * coef[c];
            }
            coef[r] = s / self.qr[(r, r)];
        }
        (coef, rss)
    }

    /// `(I − H) v`, the component of `v` orthogonal to the column span.
    fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut w = v.clone();
        self.apply_qt(&mut w);
        for r in 0..self.p() {
            w[r] = 0.0;
        }
        self.apply_q(&mut w);
        w
    }
}

fn factor(dataset: &Dataset, model: &ModelSpec) -> Result<HouseholderQr> {
    model.validate_for(dataset.k())?;
    let xm = dataset.columns(model.indices())?;
    HouseholderQr::new(xm).map_err(|RankDeficient { column }| {
        Error::SingularDesign(format!(
            "column '{}' of model {model} is linearly dependent on the preceding ones",
            dataset.column_names[model.indices()[column]]
        ))
    })
}

/// Least-squares fit of `model` to the dataset's response.
pub fn fit(dataset: &Dataset, model: &ModelSpec) -> Result<FitSummary> {
    let qr = factor(dataset, model)?;
    let (coefficients, mut rss) = qr.solve(dataset.y());
    if rss <= ZERO_RSS_REL * dataset.y().norm_squared() {
        rss = 0.0;
    }
    let n = dataset.n();
    Ok(FitSummary {
        rss,
        coefficients,
        sigma_hat: (rss / n as f64).sqrt(),
        df: n - model.size(),
    })
}

/// `B = RSS_outer / RSS_inner` for nested models `inner ⊆ outer`.
pub fn beta_ratio(dataset: &Dataset, inner: &ModelSpec, outer: &ModelSpec) -> Result<BetaRatio> {
    if !inner.is_subset_of(outer) {
        return Err(Error::NestingViolation {
            inner: inner.indices().to_vec(),
            outer: outer.indices().to_vec(),
        });
    }
    let (i, j, n) = (inner.size(), outer.size(), dataset.n());
    if inner == outer {
        // identical residuals, but still reject an exact fit
        let r = fit(dataset, inner)?.rss;
        if r == 0.0 {
            return Err(Error::DegenerateFit(format!("model {inner} fits exactly")));
        }
        return BetaRatio::new(1.0, i, j, n);
    }
    let rss_inner = fit(dataset, inner)?.rss;
    if rss_inner == 0.0 {
        return Err(Error::DegenerateFit(format!(
            "inner model {inner} fits exactly (zero residual sum of squares)"
        )));
    }
    let rss_outer = fit(dataset, outer)?.rss;
    ratio_to_beta(rss_outer / rss_inner, i, j, n)
}

pub(crate) fn ratio_to_beta(raw: f64, i: usize, j: usize, n: usize) -> Result<BetaRatio> {
    let value = if (-RATIO_CLAMP..0.0).contains(&raw) {
        0.0
    } else if raw > 1.0 && raw <= 1.0 + RATIO_CLAMP {
        1.0
    } else if (0.0..=1.0).contains(&raw) {
        raw
    } else {
        return Err(Error::Internal(format!(
            "residual ratio {raw} outside [0,1] beyond rounding"
        )));
    };
    BetaRatio::new(value, i, j, n)
}

/// `X_T' (I − H_model) X_T / n`, the finite-sample projection-gap matrix.
pub fn projection_gap_matrix(
    dataset: &Dataset,
    model: &ModelSpec,
    true_columns: &[usize],
) -> Result<DMatrix<f64>> {
    let qr = factor(dataset, model)?;
    let xt = dataset.columns(true_columns)?;
    let t = true_columns.len();
    let resid: Vec<DVector<f64>> = (0..t)
        .map(|c| qr.residual(&xt.column(c).into_owned()))
        .collect();
    let n = dataset.n() as f64;
    let mut s = DMatrix::zeros(t, t);
    for a in 0..t {
        for b in a..t {
            let v = resid[a].dot(&resid[b]) / n;
            s[(a, b)] = v;
            s[(b, a)] = v;
        }
    }
    Ok(s)
}

/// `α_T' S_model α_T / σ_T²`: how far `model` is from the data-generating model.
pub fn model_distance(
    dataset: &Dataset,
    model: &ModelSpec,
    true_model: &ModelSpec,
    true_coeffs: &[f64],
    true_sigma: f64,
) -> Result<f64> {
    if true_coeffs.len() != true_model.size() {
        return Err(Error::Shape(format!(
            "{} coefficients for a true model with {} columns",
            true_coeffs.len(),
            true_model.size()
        )));
    }
    if !(true_sigma > 0.0) {
        return Err(Error::Domain(format!("true sigma must be positive, got {true_sigma}")));
    }
    let s = projection_gap_matrix(dataset, model, true_model.indices())?;
    let alpha = DVector::from_column_slice(true_coeffs);
    let q = (alpha.transpose() * &s * &alpha)[(0, 0)];
    Ok(q.max(0.0) / (true_sigma * true_sigma))
}
