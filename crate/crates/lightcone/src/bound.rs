//! Assembly of the rigorous commutator-growth bound and the scrambling-time
//! lower bound.
//!
//! Per-scale contributions `s_q(t)` are summed in log space and wrapped in
//! `-1 + exp(·)`; the closed-form curve uses the three-regime constants
//! `c1`, `c2` built from the per-block norm constant `b`. The scrambling
//! time follows from the chain `delta/2 <= 2 (2 c1 + c2) t_s / Rcal`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scale::{self, Variant};

/// Parameters of the bound: interaction exponent, coupling scale, the
/// commutator threshold `delta`, and the bound variant.
#[derive(Clone, Copy, Debug)]
pub struct BoundParams {
    pub alpha: f64,
    pub h: f64,
    pub delta: f64,
    pub variant: Variant,
}

impl BoundParams {
    pub fn new(alpha: f64, h: f64, delta: f64, variant: Variant) -> Result<Self> {
        if !(alpha > 2.0) {
            return Err(Error::domain(format!("alpha must exceed 2 (got {alpha})")));
        }
        if !(h > 0.0) {
            return Err(Error::argument(format!("h must be positive (got {h})")));
        }
        if !(delta > 0.0 && delta < 2.0) {
            return Err(Error::argument(format!(
                "delta must lie in (0, 2) (got {delta})"
            )));
        }
        if let Variant::Frustrated { k } = variant {
            if !(k > 0.0 && k <= 1.0) {
                return Err(Error::argument(format!("K must lie in (0, 1] (got {k})")));
            }
        }
        Ok(BoundParams { alpha, h, delta, variant })
    }

    /// Effective exponent: `alpha` (frustrated) or `alpha - 1` (general).
    pub fn alpha_prime(&self) -> f64 {
        self.variant.alpha_prime(self.alpha)
    }

    /// The per-block norm constant `b`.
    pub fn b(&self) -> Result<f64> {
        scale::b_constant(self.alpha, self.h, self.variant)
    }
}

/// The three regimes of the effective exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `alpha' > 2`: linear light cone, `Rcal = R`.
    ShortRangeLike,
    /// `alpha' = 2`: `Rcal = R / log2^2 R`.
    Marginal,
    /// `1 < alpha' < 2`: `Rcal = R^{alpha' - 1}`.
    LongRangeLike,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::ShortRangeLike => "alpha'>2",
            Regime::Marginal => "alpha'=2",
            Regime::LongRangeLike => "1<alpha'<2",
        }
    }
}

/// The assembled case constants for a parameter set.
#[derive(Clone, Copy, Debug)]
pub struct CaseConstants {
    pub regime: Regime,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

const E2: f64 = std::f64::consts::E * std::f64::consts::E;

/// Evaluate the three-case table for `c1`, `c2` (each proportional to `b`).
pub fn case_constants(p: &BoundParams) -> Result<CaseConstants> {
    let ap = p.alpha_prime();
    if !(ap > 1.0) {
        return Err(Error::domain(format!("alpha' must exceed 1 (got {ap})")));
    }
    let b = p.b()?;
    let (regime, c1, c2) = if ap > 2.0 {
        let g = (1.0 - 2f64.powf(-(ap - 2.0) / 2.0)).powi(-2);
        (
            Regime::ShortRangeLike,
            16.0 * E2 * g * b,
            2f64.powf(2.0 + ap) * E2 / (1.0 - 2f64.powf(-ap)) * g * b,
        )
    } else if ap == 2.0 {
        (Regime::Marginal, 16.0 * E2 * b, 64.0 / 3.0 * E2 * b)
    } else {
        let g = (1.0 - 2f64.powf(-(2.0 - ap) / 2.0)).powi(-2);
        (
            Regime::LongRangeLike,
            32.0 * E2 * g * b,
            2f64.powf(2.0 + ap) * E2 / (1.0 - 2f64.powf(-ap)) * g * b,
        )
    };
    if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0) {
        return Err(Error::numeric("case constants not finite/positive"));
    }
    Ok(CaseConstants { regime, b, c1, c2 })
}

/// The regime-dependent effective distance `Rcal(R)` (log base 2).
pub fn r_cal(r_size: u64, regime: Regime, alpha_prime: f64) -> f64 {
    let r = r_size as f64;
    match regime {
        Regime::ShortRangeLike => r,
        Regime::Marginal => r / r.log2().powi(2),
        Regime::LongRangeLike => r.powf(alpha_prime - 1.0),
    }
}

/// Quantize a raw distance `r >= 2` to the window size `R = 2^{floor log2 r}`.
pub fn quantize_r(r: u64) -> Result<u64> {
    if r < 2 {
        return Err(Error::domain(format!("degenerate distance r = {r} < 2")));
    }
    Ok(1u64 << (63 - r.leading_zeros()))
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k).map(|i| (((n - k + i) as f64) / (i as f64)).ln()).sum()
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Per-scale contributions to the growth bound at time `t`.
#[derive(Clone, Debug)]
pub struct ScaleContributions {
    /// `s_q(t)` for `q = 1..=log2 R` (index `q - 1`).
    pub per_q: Vec<f64>,
    pub total: f64,
    /// `-1 + exp(total)`; `+inf` when the sum overflows.
    pub bound: f64,
    /// Scale with the largest contribution (1-based; 1 when `t = 0`).
    pub argmax_q: u32,
}

/// Evaluate `s_q(t) = C(2^{1-q}R, N_q) (2 b t 2^{-q(alpha'-1)})^{N_q} / N_q!`
/// for every scale, in log space, plus the assembled `-1 + exp(sum)` bound.
pub fn scale_contributions(r_size: u64, t: f64, p: &BoundParams) -> Result<ScaleContributions> {
    if !(t >= 0.0) {
        return Err(Error::argument(format!("t must be non-negative (got {t})")));
    }
    if r_size < 2 || !r_size.is_power_of_two() {
        return Err(Error::argument("R must be a power of two >= 2"));
    }
    let ap = p.alpha_prime();
    let b = p.b()?;
    let th = scale::long_thresholds(ap, r_size)?;
    let n_star = th.n.len() as u32;
    let mut per_q = Vec::with_capacity(n_star as usize);
    let mut total = 0.0f64;
    let (mut argmax_q, mut best) = (1u32, f64::NEG_INFINITY);
    for q in 1..=n_star {
        let nq = th.n[q as usize - 1];
        let pool = r_size >> (q - 1); // paper-mode count basis
        let ln_rate = (2.0 * b * t).ln() - (q as f64) * (ap - 1.0) * std::f64::consts::LN_2;
        let ln_sq = ln_binomial(pool, nq) + nq as f64 * ln_rate - ln_factorial(nq);
        let sq = if t == 0.0 { 0.0 } else { ln_sq.exp() };
        if sq > best {
            best = sq;
            argmax_q = q;
        }
        total += sq;
        per_q.push(sq);
    }
    let bound = if total > 700.0 { f64::INFINITY } else { total.exp_m1() };
    Ok(ScaleContributions { per_q, total, bound, argmax_q })
}

/// Normalized commutator bound at distance `r` and time `t`:
/// `4 [ c1 t / (Rcal - c1 t) + c2 t / Rcal ]`, capped at the trivial value
/// 2. The boolean is true when `t` lies at or past the validity edge
/// `Rcal / c1` (the cap applies).
pub fn commutator_bound_curve(r: u64, t: f64, p: &BoundParams) -> Result<(f64, bool)> {
    if !(t >= 0.0) {
        return Err(Error::argument(format!("t must be non-negative (got {t})")));
    }
    let cc = case_constants(p)?;
    let rc = r_cal(quantize_r(r)?, cc.regime, p.alpha_prime());
    if t >= rc / cc.c1 {
        return Ok((2.0, true));
    }
    let raw = 4.0 * (cc.c1 * t / (rc - cc.c1 * t) + cc.c2 * t / rc);
    Ok((raw.min(2.0), false))
}

/// Validity horizon `Rcal / c1` of the closed-form curve at distance `r`.
pub fn validity_time(r: u64, p: &BoundParams) -> Result<f64> {
    let cc = case_constants(p)?;
    Ok(r_cal(quantize_r(r)?, cc.regime, p.alpha_prime()) / cc.c1)
}

/// Certified scrambling-time lower bound at distance `r`:
/// `t_s >= delta * Rcal / (4 (2 c1 + c2))`.
pub fn scrambling_time_bound(r: u64, p: &BoundParams) -> Result<f64> {
    let cc = case_constants(p)?;
    let rc = r_cal(quantize_r(r)?, cc.regime, p.alpha_prime());
    Ok(p.delta * rc / (4.0 * (2.0 * cc.c1 + cc.c2)))
}
