//! Numerical integration used by the Bayes-factor evaluators.
//!
//! Two independent schemes live here:
//! * Gauss–Legendre with node doubling, accumulated in the log domain. This is
//!   the production path for the intrinsic Bayes factor, whose integrand is a
//!   ratio of powers with exponents of order `n / 2`.
//! * Adaptive Gauss–Kronrod (7/15 points). Used as an independent check on the
//!   Gauss–Legendre results and by the matrix-form Bayes-factor oracle.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Smallest Gauss–Legendre rule used by [`log_integrate_refined`].
pub const GL_MIN_NODES: usize = 64;
/// Largest Gauss–Legendre rule used by [`log_integrate_refined`].
pub const GL_MAX_NODES: usize = 16384;
const GL_LEVELS: usize = 9; // 64 .. 16384

/// Nodes on [-1, 1] and weights of an n-point Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess followed by Newton on the three-term recurrence.
            let theta = PI * (4.0 * (i as f64) + 3.0) / (4.0 * nf + 2.0);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1e-300) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Cached rule with `GL_MIN_NODES << level` nodes.
    pub fn cached(level: usize) -> &'static GaussLegendre {
        static CACHE: [OnceLock<GaussLegendre>; GL_LEVELS] = [const { OnceLock::new() }; GL_LEVELS];
        assert!(level < GL_LEVELS);
        CACHE[level].get_or_init(|| GaussLegendre::new(GL_MIN_NODES << level))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// `log ∫_a^b exp(log_f(x)) dx`, accumulated with log-sum-exp.
    pub fn log_integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, log_f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w.ln() + log_f(mid + half * x))
            .collect();
        log_sum_exp(&terms) + half.ln()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Numerically stable `log Σ exp(v)`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

/// Result of a refined log-domain integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral {
    pub log_value: f64,
    /// Total integrand evaluations at the accepted level.
    pub nodes: usize,
    /// |difference| between the last two levels (log scale).
    pub last_diff: f64,
}

/// Log-domain Gauss–Legendre over consecutive panels, doubling the per-panel
/// rule from [`GL_MIN_NODES`] until successive log-integrals agree within `tol`.
pub fn log_integrate_refined<F: Fn(f64) -> f64>(
    breakpoints: &[f64],
    log_f: F,
    tol: f64,
) -> Result<LogIntegral> {
    assert!(breakpoints.len() >= 2);
    let eval = |level: usize| {
        let rule = GaussLegendre::cached(level);
        let parts: Vec<f64> = breakpoints
            .windows(2)
            .map(|w| rule.log_integrate(w[0], w[1], &log_f))
            .collect();
        log_sum_exp(&parts)
    };
    let panels = breakpoints.len() - 1;
    let mut prev = eval(0);
    let mut last_diff = f64::INFINITY;
    for level in 1..GL_LEVELS {
        let cur = eval(level);
        last_diff = (cur - prev).abs();
        if last_diff < tol || (cur.is_infinite() && cur == prev) {
            return Ok(LogIntegral {
                log_value: cur,
                nodes: panels * (GL_MIN_NODES << level),
                last_diff: if last_diff.is_nan() { 0.0 } else { last_diff },
            });
        }
        prev = cur;
    }
    Err(Error::QuadratureFailure {
        nodes: panels * GL_MAX_NODES,
        last_diff,
    })
}

// Kronrod 15-point nodes (non-negative half) and weights, with embedded Gauss 7-point weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kronrod += wk * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration with global bisection of the worst panel.
///
/// Returns `(value, error_estimate)`.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    const MAX_PANELS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::QuadratureFailure {
                nodes: panels.len() * 15,
                last_diff: err,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// `log ∫_a^b exp(log_f)` by adaptive Gauss–Kronrod after rescaling by the
/// maximum of `log_f` on a coarse grid.
pub fn log_adaptive_gk<F: Fn(f64) -> f64>(log_f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let grid = 512;
    let shift = (0..=grid)
        .map(|t| a + (b - a) * (t as f64 + 0.5) / (grid as f64 + 1.0))
        .map(&log_f)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::Internal("integrand not finite on grid".into()));
    }
    let (v, _) = adaptive_gk(|x| (log_f(x) - shift).exp(), a, b, 0.0, rel_tol)?;
    Ok(v.ln() + shift)
}
