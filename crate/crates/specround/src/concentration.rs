//! Closed-form tail bounds for self-adjusting processes and Freedman's
//! martingale inequality, plus a simulation harness that validates them
//! empirically and checks the rounding cost process against its exact drift
//! sandwich.
//!
//! A self-adjusting process drifts back toward zero proportionally to its
//! current value: `-gamma Y_{t-1} - beta_l <= E[X_t | past] <= -gamma
//! Y_{t-1} + beta_u` with `|X_t| <= 1`, conditional variance at most
//! `gamma Y_{t-1} + sigma`, and an initial moment-generating-function
//! condition. Under these, both tails admit Bernstein-like bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::rounding::IterationRecord;
use crate::scalar::Scalar;

/// Parameters of the self-adjusting hypotheses.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelfAdjustingParams<F> {
    /// Drift rate, in `(0, 1/2]`.
    pub gamma: F,
    /// Upper drift offset, nonnegative.
    pub beta_u: F,
    /// Lower drift offset, nonnegative.
    pub beta_l: F,
    /// Variance offset, positive.
    pub sigma: F,
    /// Tail threshold, positive.
    pub eta: F,
}

impl<F: Scalar> SelfAdjustingParams<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > F::zero() && self.gamma <= F::half()) {
            return Err(Error::InvalidParams(format!(
                "gamma = {} outside (0, 1/2]",
                self.gamma.to_f64_lossy()
            )));
        }
        if self.beta_u < F::zero() || self.beta_l < F::zero() {
            return Err(Error::InvalidParams("beta_u, beta_l must be nonnegative".into()));
        }
        if self.sigma <= F::zero() {
            return Err(Error::InvalidParams("sigma must be positive".into()));
        }
        if self.eta <= F::zero() {
            return Err(Error::InvalidParams("eta must be positive".into()));
        }
        Ok(())
    }
}

/// Upper tail: `Pr[Y_t >= beta_u / gamma + eta] <=
/// exp(-eta^2 / (4 (sigma + beta_u) / gamma + 2 eta))`, clamped to `[0, 1]`.
pub fn self_adjusting_upper_bound<F: Scalar>(p: &SelfAdjustingParams<F>) -> Result<F> {
    p.validate()?;
    let denom = F::cast(4.0) * (p.sigma + p.beta_u) / p.gamma + F::two() * p.eta;
    Ok((-(p.eta * p.eta) / denom).exp().min(F::one()))
}

/// Lower tail: `Pr[Y_t <= -beta_l / gamma - eta] <=
/// exp(-eta^2 / (4 sigma / gamma + eta))`, clamped to `[0, 1]`.
pub fn self_adjusting_lower_bound<F: Scalar>(p: &SelfAdjustingParams<F>) -> Result<F> {
    p.validate()?;
    let denom = F::cast(4.0) * p.sigma / p.gamma + p.eta;
    Ok((-(p.eta * p.eta) / denom).exp().min(F::one()))
}

/// Freedman: `Pr[exists t: Y_t >= delta and W_t <= sigma^2] <=
/// exp(-(delta^2 / 2) / (sigma^2 + R delta / 3))`.
pub fn freedman_bound<F: Scalar>(delta: F, sigma_sq: F, r: F) -> Result<F> {
    if delta < F::zero() || sigma_sq <= F::zero() || r < F::zero() {
        return Err(Error::InvalidParams(
            "freedman needs delta >= 0, sigma^2 > 0, R >= 0".into(),
        ));
    }
    let denom = sigma_sq + r * delta / F::cast(3.0);
    Ok((-(delta * delta * F::half()) / denom).exp().min(F::one()))
}

/// Synthetic chain `X_t = -gamma Y_{t-1} + xi_t` with `xi_t` uniform on
/// `{-step, +step}` (or identically zero when `step` is zero) and `Y_0 = 0`.
///
/// The hypotheses hold surely by construction: the drift is exactly
/// `-gamma Y_{t-1}` (so any `beta_u, beta_l >= 0` work), `|Y_t|` never
/// exceeds `step / gamma`, hence `|X_t| <= 2 step` and
/// `E[X_t^2 | Y_{t-1}] = gamma^2 Y_{t-1}^2 + step^2 <= gamma |Y_{t-1}| +
/// step^2`, bounded by `gamma Y_{t-1} + sigma` whenever
/// `sigma >= 2 step^2 + step`. They are still asserted at runtime on every
/// visited state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DriftChain<F> {
    pub gamma: F,
    pub step: F,
    pub horizon: usize,
}

impl<F: Scalar> DriftChain<F> {
    /// Smallest `sigma` for which the bounded-variance hypothesis holds
    /// surely on this chain.
    pub fn required_sigma(&self) -> F {
        F::two() * self.step * self.step + self.step
    }

    fn assert_hypotheses(&self, y: F, params: &SelfAdjustingParams<F>) -> Result<()> {
        let drift = -self.gamma * y;
        if drift > -params.gamma * y + params.beta_u + F::cast(1e-12)
            || drift < -params.gamma * y - params.beta_l - F::cast(1e-12)
        {
            return Err(Error::HypothesisViolation(format!(
                "drift {} outside sandwich at y = {}",
                drift.to_f64_lossy(),
                y.to_f64_lossy()
            )));
        }
        let second_moment = self.gamma * self.gamma * y * y + self.step * self.step;
        if second_moment > params.gamma * y + params.sigma + F::cast(1e-12) {
            return Err(Error::HypothesisViolation(format!(
                "conditional variance {} above gamma y + sigma at y = {}",
                second_moment.to_f64_lossy(),
                y.to_f64_lossy()
            )));
        }
        // Bounded difference: |X| <= gamma |y| + step <= 2 step on the
        // reachable band |y| <= step / gamma.
        if self.gamma * y.abs() + self.step > F::one() + F::cast(1e-12) {
            return Err(Error::HypothesisViolation(format!(
                "|X| can exceed 1 at y = {}",
                y.to_f64_lossy()
            )));
        }
        Ok(())
    }

    /// Runs one trial and returns the terminal value `Y_T`.
    fn run_trial(&self, params: &SelfAdjustingParams<F>, rng: &mut SeededRng) -> Result<F> {
        let mut y = F::zero();
        for _ in 0..self.horizon {
            self.assert_hypotheses(y, params)?;
            let noise = if self.step == F::zero() {
                F::zero()
            } else if rng.uniform_f64() < 0.5 {
                self.step
            } else {
                -self.step
            };
            let x = -self.gamma * y + noise;
            y += x;
        }
        Ok(y)
    }
}

/// Outcome of one empirical validation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailCheck {
    pub eta: f64,
    pub trials: usize,
    pub horizon: usize,
    pub empirical_upper: f64,
    pub bound_upper: f64,
    pub empirical_lower: f64,
    pub bound_lower: f64,
    /// Three binomial standard errors under the bound probability.
    pub tolerance_upper: f64,
    pub tolerance_lower: f64,
    pub pass: bool,
}

/// Runs `trials` seeded chains to the horizon and compares both empirical
/// tail frequencies against the closed-form bounds; passes iff each
/// empirical frequency is at most its bound plus three binomial standard
/// errors.
pub fn simulate_and_check<F: Scalar>(
    chain: &DriftChain<F>,
    params: &SelfAdjustingParams<F>,
    trials: usize,
    seed: u64,
) -> Result<TailCheck> {
    params.validate()?;
    if chain.gamma != params.gamma {
        return Err(Error::InvalidParams(
            "chain gamma must match the bound parameters".into(),
        ));
    }
    let bound_upper = self_adjusting_upper_bound(params)?.to_f64_lossy();
    let bound_lower = self_adjusting_lower_bound(params)?.to_f64_lossy();
    let upper_threshold = params.beta_u / params.gamma + params.eta;
    let lower_threshold = -params.beta_l / params.gamma - params.eta;

    let counts: Result<Vec<(u32, u32)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SeededRng::with_stream(seed, trial as u64);
            let y = chain.run_trial(params, &mut rng)?;
            Ok((
                u32::from(y >= upper_threshold),
                u32::from(y <= lower_threshold),
            ))
        })
        .collect();
    let counts = counts?;
    let upper_hits: u32 = counts.iter().map(|c| c.0).sum();
    let lower_hits: u32 = counts.iter().map(|c| c.1).sum();
    let tf = trials as f64;
    let empirical_upper = upper_hits as f64 / tf;
    let empirical_lower = lower_hits as f64 / tf;
    let se = |p: f64| (p * (1.0 - p) / tf).sqrt();
    let tolerance_upper = 3.0 * se(bound_upper);
    let tolerance_lower = 3.0 * se(bound_lower);
    let pass = empirical_upper <= bound_upper + tolerance_upper
        && empirical_lower <= bound_lower + tolerance_lower;
    Ok(TailCheck {
        eta: params.eta.to_f64_lossy(),
        trials,
        horizon: chain.horizon,
        empirical_upper,
        bound_upper,
        empirical_lower,
        bound_lower,
        tolerance_upper,
        tolerance_lower,
        pass,
    })
}

/// Per-iteration drift-sandwich check of the rounding cost process.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftCheck {
    pub iterations: usize,
    pub max_lower_violation: f64,
    pub max_upper_violation: f64,
    pub pass: bool,
}

/// Verifies, from a logged run, that the exact conditional cost change of
/// every iteration satisfies
/// `(1/k)(<c,x> - c(S_{t-1})) <= E[c_j - c_i | S_{t-1}]
///  <= (1/k)(<c,x> - c(S_{t-1}) + 14 n c_inf / eps)`.
/// The expectations were computed in closed form from the sampling
/// distributions when the run was logged, so the check is deterministic.
pub fn check_rounding_drift(
    history: &[IterationRecord],
    weighted_cost: f64,
    k: f64,
    n: usize,
    eps: f64,
    c_inf: f64,
    tolerance: f64,
) -> DriftCheck {
    let mut max_lower = 0.0f64;
    let mut max_upper = 0.0f64;
    for rec in history {
        let lower = (weighted_cost - rec.cost_before) / k;
        let upper = lower + 14.0 * n as f64 * c_inf / (k * eps);
        max_lower = max_lower.max(lower - rec.expected_cost_change);
        max_upper = max_upper.max(rec.expected_cost_change - upper);
    }
    DriftCheck {
        iterations: history.len(),
        max_lower_violation: max_lower,
        max_upper_violation: max_upper,
        pass: max_lower <= tolerance && max_upper <= tolerance,
    }
}
