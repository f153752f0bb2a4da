//! Posterior tables over the model space and a Metropolis–Hastings search.
//!
//! Two normalizations share one scoring orientation (higher is better):
//! * [`Scheme::Vsb`] compares every model with the intercept-only model
//!   nested inside it: `score_j = log BF_{j1}`, the intercept scoring 0.
//! * [`Scheme::Vsa`] compares every model with the full model containing it:
//!   `score_i = log BF_{ik}`, the full model scoring 0.
//!
//! Probabilities are `exp(score − logsumexp(scores))` under equal prior weights.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayes_factor::{log_bf, BfMethod};
use crate::error::{Error, Result};
use crate::linear::{beta_ratio, Dataset, ModelSpec};
use crate::parallel::Exec;
use crate::quadrature::log_sum_exp;

/// Largest `k` for which the `2^{k−1}` models are enumerated.
pub const ENUMERATION_CAP: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Intrinsic,
    Schwarz,
}

impl Method {
    pub fn bf_method(self) -> BfMethod {
        match self {
            Method::Intrinsic => BfMethod::IntrinsicQuadrature,
            Method::Schwarz => BfMethod::Schwarz,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Intrinsic => "intrinsic",
            Method::Schwarz => "schwarz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Vsa,
    Vsb,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Vsa => "vsa",
            Scheme::Vsb => "vsb",
        }
    }
}

/// All models containing the intercept, ordered by size then lexicographically.
pub fn enumerate_models(k: usize) -> Result<Vec<ModelSpec>> {
    if k == 0 {
        return Err(Error::Domain("need at least the intercept column".into()));
    }
    if k > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            k,
            cap: ENUMERATION_CAP,
        });
    }
    let mut models: Vec<ModelSpec> = (0..1u64 << (k - 1))
        .map(|bits| ModelSpec::from_mask((bits << 1) | 1))
        .collect();
    models.sort_by(canonical_order);
    Ok(models)
}

fn canonical_order(a: &ModelSpec, b: &ModelSpec) -> Ordering {
    a.size().cmp(&b.size()).then_with(|| a.cmp(b))
}

/// Ranking rule: higher score first, then fewer covariates, then index order.
pub fn rank_order(a: (&ModelSpec, f64), b: (&ModelSpec, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| canonical_order(a.0, b.0))
}

/// Score of one model under a scheme; see the module docs for orientation.
pub fn model_score(
    dataset: &Dataset,
    model: &ModelSpec,
    method: Method,
    scheme: Scheme,
) -> Result<f64> {
    model.validate_for(dataset.k())?;
    match scheme {
        Scheme::Vsb => {
            let base = ModelSpec::intercept();
            if *model == base {
                return Ok(0.0);
            }
            let b = beta_ratio(dataset, &base, model)?;
            Ok(-log_bf(&b, method.bf_method())?.log_bf_ij)
        }
        Scheme::Vsa => {
            let full = ModelSpec::full(dataset.k());
            if *model == full {
                return Ok(0.0);
            }
            let b = beta_ratio(dataset, model, &full)?;
            Ok(log_bf(&b, method.bf_method())?.log_bf_ij)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorRow {
    pub model: ModelSpec,
    pub log_score: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorTable {
    pub scheme: Scheme,
    pub method: Method,
    pub rows: Vec<PosteriorRow>,
}

impl PosteriorTable {
    fn from_scores(scheme: Scheme, method: Method, scored: Vec<(ModelSpec, f64)>) -> Self {
        let scores: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();
        let lse = log_sum_exp(&scores);
        let mut rows: Vec<PosteriorRow> = scored
            .into_iter()
            .map(|(model, log_score)| PosteriorRow {
                probability: (log_score - lse).exp(),
                model,
                log_score,
            })
            .collect();
        rows.sort_by(|a, b| rank_order((&a.model, a.log_score), (&b.model, b.log_score)));
        PosteriorTable {
            scheme,
            method,
            rows,
        }
    }

    pub fn top(&self) -> &PosteriorRow {
        &self.rows[0]
    }

    /// Zero-based rank of `model`, if present.
    pub fn rank_of(&self, model: &ModelSpec) -> Option<usize> {
        self.rows.iter().position(|r| r.model == *model)
    }

    pub fn probability_of(&self, model: &ModelSpec) -> Option<f64> {
        self.rows.iter().find(|r| r.model == *model).map(|r| r.probability)
    }
}

/// Score every enumerable model and normalize.
pub fn posterior_table(
    dataset: &Dataset,
    method: Method,
    scheme: Scheme,
    exec: Exec,
) -> Result<PosteriorTable> {
    let models = enumerate_models(dataset.k())?;
    let scores = exec.try_map(&models, |m| model_score(dataset, m, method, scheme))?;
    Ok(PosteriorTable::from_scores(
        scheme,
        method,
        models.into_iter().zip(scores).collect(),
    ))
}

/// Posterior table encompassing from below.
pub fn vsb_table(dataset: &Dataset, method: Method) -> Result<PosteriorTable> {
    posterior_table(dataset, method, Scheme::Vsb, Exec::default())
}

/// Posterior table encompassing from above.
pub fn vsa_table(dataset: &Dataset, method: Method) -> Result<PosteriorTable> {
    posterior_table(dataset, method, Scheme::Vsa, Exec::default())
}

/// `BF/(1+BF)` for `inner` against `outer` with equal prior odds.
pub fn pairwise_posterior(
    dataset: &Dataset,
    inner: &ModelSpec,
    outer: &ModelSpec,
    method: Method,
) -> Result<f64> {
    if inner == outer {
        return Ok(0.5);
    }
    let b = beta_ratio(dataset, inner, outer)?;
    Ok(logistic(log_bf(&b, method.bf_method())?.log_bf_ij))
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub chain_length: usize,
    pub seed: u64,
    /// How many of the best visited models to report.
    pub top: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisitCount {
    pub model: ModelSpec,
    pub visits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredModel {
    pub model: ModelSpec,
    pub log_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchTrace {
    /// Visit counts, most visited first.
    pub visited: Vec<VisitCount>,
    pub best_by_score: Vec<ScoredModel>,
    pub chain_length: usize,
    pub seed: u64,
    pub acceptance_rate: f64,
    /// Distinct models whose score was computed.
    pub distinct_scored: usize,
}

impl SearchTrace {
    pub fn visits_of(&self, model: &ModelSpec) -> u64 {
        self.visited
            .iter()
            .find(|v| v.model == *model)
            .map_or(0, |v| v.visits)
    }
}

/// Metropolis–Hastings over models of a `k`-column design with an arbitrary
/// score. The proposal flips one uniformly chosen non-intercept column; the
/// chain starts at the intercept-only model. Scores are memoized.
pub fn mh_search_with<F>(k: usize, config: &SearchConfig, mut score: F) -> Result<SearchTrace>
where
    F: FnMut(&ModelSpec) -> Result<f64>,
{
    if k < 2 || k > 64 {
        return Err(Error::Domain(format!("search needs 2 ≤ k ≤ 64, got {k}")));
    }
    if config.chain_length == 0 {
        return Err(Error::Config("chain length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut memo: HashMap<u64, f64> = HashMap::new();
    let mut eval = |mask: u64, memo: &mut HashMap<u64, f64>| -> Result<f64> {
        if let Some(&s) = memo.get(&mask) {
            return Ok(s);
        }
        let s = score(&ModelSpec::from_mask(mask))?;
        memo.insert(mask, s);
        Ok(s)
    };

    let mut current = 1u64;
    let mut current_score = eval(current, &mut memo)?;
    let mut visits: HashMap<u64, u64> = HashMap::new();
    let mut accepted = 0usize;
    for _ in 0..config.chain_length {
        let flip = rng.random_range(1..k);
        let proposal = current ^ (1u64 << flip);
        let proposal_score = eval(proposal, &mut memo)?;
        let u: f64 = rng.random();
        if u.ln() < proposal_score - current_score {
            current = proposal;
            current_score = proposal_score;
            accepted += 1;
        }
        *visits.entry(current).or_insert(0) += 1;
    }

    let mut visited: Vec<VisitCount> = visits
        .into_iter()
        .map(|(mask, visits)| VisitCount {
            model: ModelSpec::from_mask(mask),
            visits,
        })
        .collect();
    visited.sort_by(|a, b| {
        b.visits
            .cmp(&a.visits)
            .then_with(|| canonical_order(&a.model, &b.model))
    });
    let mut scored: Vec<ScoredModel> = memo
        .iter()
        .map(|(&mask, &log_score)| ScoredModel {
            model: ModelSpec::from_mask(mask),
            log_score,
        })
        .collect();
    scored.sort_by(|a, b| rank_order((&a.model, a.log_score), (&b.model, b.log_score)));
    let distinct_scored = scored.len();
    scored.truncate(config.top.max(1));

    Ok(SearchTrace {
        visited,
        best_by_score: scored,
        chain_length: config.chain_length,
        seed: config.seed,
        acceptance_rate: accepted as f64 / config.chain_length as f64,
        distinct_scored,
    })
}

/// Metropolis–Hastings search targeting the posterior of `scheme`.
pub fn mh_search(
    dataset: &Dataset,
    config: &SearchConfig,
    method: Method,
    scheme: Scheme,
) -> Result<SearchTrace> {
    mh_search_with(dataset.k(), config, |m| {
        model_score(dataset, m, method, scheme)
    })
}
