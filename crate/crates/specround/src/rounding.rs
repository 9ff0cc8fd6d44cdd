//! Iterative randomized swapping for approximate one-sided spectral
//! rounding, and the exact-rounding wrapper on top of it.
//!
//! Given an isotropic instance (`sum_i x_i v_i v_i^T = I_n`), the swap loop
//! maintains a selection `S` and in each iteration samples one index to
//! remove and one to add. Removal probability is proportional to
//! `(1 - x_i)(1 - 2 alpha <v_i v_i^T, A_t^{1/2}>)` over the restricted set
//! `S'`, addition to `x_j (1 + 2 alpha <v_j v_j^T, A_t^{1/2}>)` outside `S`,
//! both with the common normalizer `k = m + 2n/eps`; the leftover mass means
//! "do nothing". The loop stops once `lambda_min(sum_{i in S} v_i v_i^T)`
//! reaches `1 - 2 eps`.
//!
//! Every run emits a certificate: the final `lambda_min` recomputed from
//! scratch, the cost, and the slack in the regret inequality
//! `lambda_min(Z_tau) >= sum_t Delta_t - 2 sqrt(n)/alpha`, which must be
//! nonnegative up to floating-point tolerance on every successful run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{VectorInstance, ISOTROPY_TOLERANCE};
use crate::linalg::{sym_eig, SymMatrix};
use crate::regret::{compute_action_matrix_from_spectrum, ActionMatrix};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Tolerance on certificate inequalities (regret slack, exact lower bound).
pub const CERTIFICATE_SLACK: f64 = 1e-7;

/// Tolerance on probability-mass bookkeeping.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Rebuild `Z` from `S` from scratch this often to stop floating-point drift
/// from accumulating over rank-one updates.
const REBUILD_PERIOD: usize = 100;

/// One iteration of the swap loop, as logged in the run history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub removed: Option<usize>,
    pub added: Option<usize>,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// `lambda_min` of the selection after this iteration's update.
    pub lambda_min: f64,
    /// Cost of the selection after this iteration's update.
    pub cost: f64,
    /// Cost of the selection before this iteration.
    pub cost_before: f64,
    /// Exact conditional expectation `E[c_j - c_i | S_{t-1}]`, computed from
    /// the sampling distributions, for the drift-sandwich checks.
    pub expected_cost_change: f64,
}

/// Removal/addition distributions of one iteration. Masses are listed in
/// index order and the null entry absorbs the remainder, so inverse-CDF
/// sampling over them is deterministic given the uniform draw.
#[derive(Debug, Clone)]
pub struct SwapDistributions<F> {
    pub removal: Vec<(usize, F)>,
    pub removal_null: F,
    pub addition: Vec<(usize, F)>,
    pub addition_null: F,
}

/// Certificate of one rounding run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundingCertificate {
    /// Selected indices, ascending.
    pub selected: Vec<usize>,
    /// `lambda_min` of the unweighted selection moment, recomputed
    /// independently from the selected set.
    pub lambda_min: f64,
    pub cost: f64,
    pub iterations: usize,
    /// `lambda_min(Z_tau) - (sum_t Delta_t - 2 sqrt(n)/alpha)`.
    pub regret_slack: f64,
    /// `<A_i, z> - a_i` per packing row (positive means violated).
    pub packing_residuals: Vec<f64>,
    /// `<B_j, z> - b_j` per covering row (negative means short).
    pub covering_residuals: Vec<f64>,
}

/// Mutable state of a swap run.
pub struct SwapState<F> {
    pub selected: Vec<bool>,
    pub accumulated: SymMatrix<F>,
    pub t: usize,
    pub rng: SeededRng,
    pub history: Vec<IterationRecord>,
}

impl<F: Scalar> SwapState<F> {
    fn selection_indices(&self) -> Vec<usize> {
        self.selected
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect()
    }
}

/// Computes the removal and addition distributions for the current state.
///
/// Well-definedness is asserted as in the construction: each mass lies in
/// `[0, 1/k]`-scale bounds, and each distribution sums to at most one with
/// the null outcome absorbing the remainder.
pub fn swap_step_distributions<F: Scalar>(
    selected: &[bool],
    inst: &VectorInstance<F>,
    am: &ActionMatrix<F>,
    alpha: F,
    k: F,
) -> Result<SwapDistributions<F>> {
    let m = inst.len();
    let two_alpha = F::two() * alpha;
    let half = F::half();
    let tol = F::cast(MASS_TOLERANCE);

    let mut removal = Vec::new();
    let mut addition = Vec::new();
    let mut removal_sum = F::zero();
    let mut addition_sum = F::zero();
    for i in 0..m {
        // Unselected zero-weight indices carry no addition mass; skip the
        // quadratic forms.
        if !selected[i] && inst.weights[i] == F::zero() {
            continue;
        }
        let (_, ah) = am.leverage(&inst.vectors[i]);
        let scaled = two_alpha * ah;
        if selected[i] {
            // Restricted set S': only indices with 2 alpha <vv^T, A^{1/2}> < 1/2.
            if scaled < half {
                let mass = (F::one() - inst.weights[i]) * (F::one() - scaled) / k;
                if mass < -tol || mass > F::one() + tol {
                    return Err(Error::NumericalFailure(format!(
                        "removal mass {} outside [0, 1]",
                        mass.to_f64_lossy()
                    )));
                }
                removal.push((i, mass.max(F::zero())));
                removal_sum += mass;
            }
        } else {
            let mass = inst.weights[i] * (F::one() + scaled) / k;
            if mass < -tol || mass > F::one() + tol {
                return Err(Error::NumericalFailure(format!(
                    "addition mass {} outside [0, 1]",
                    mass.to_f64_lossy()
                )));
            }
            addition.push((i, mass.max(F::zero())));
            addition_sum += mass;
        }
    }
    if removal_sum > F::one() + tol || addition_sum > F::one() + tol {
        return Err(Error::NumericalFailure(format!(
            "distribution mass exceeds one: removal {}, addition {}",
            removal_sum.to_f64_lossy(),
            addition_sum.to_f64_lossy()
        )));
    }
    Ok(SwapDistributions {
        removal_null: (F::one() - removal_sum).max(F::zero()),
        addition_null: (F::one() - addition_sum).max(F::zero()),
        removal,
        addition,
    })
}

struct SwapRun<F> {
    state: SwapState<F>,
    delta_sum: F,
    final_lambda_min: F,
    alpha: F,
}

/// Core loop shared by [`randomized_swap`] and [`exact_round`].
fn run_swap<F: Scalar>(
    inst: &VectorInstance<F>,
    eps: F,
    seed: u64,
    q_cap: F,
) -> Result<SwapRun<F>> {
    inst.validate()?;
    if eps <= F::zero() || eps >= F::half() {
        return Err(Error::InvalidParams(format!(
            "eps = {} outside (0, 1/2)",
            eps.to_f64_lossy()
        )));
    }
    if q_cap < F::two() {
        return Err(Error::InvalidParams("q_cap must be at least 2".into()));
    }
    let iso = inst.isotropy_error();
    if iso > F::cast(ISOTROPY_TOLERANCE) {
        return Err(Error::NotIsotropic {
            deviation: iso.to_f64_lossy(),
            tolerance: ISOTROPY_TOLERANCE,
        });
    }

    let n = inst.dim;
    let m = inst.len();
    let nf = F::cast(n as f64);
    let mf = F::cast(m as f64);
    let alpha = nf.sqrt() / eps;
    let k = mf + F::two() * nf / eps;
    let target = F::one() - F::two() * eps;
    let cap = (q_cap * k / eps).to_f64_lossy().ceil() as usize;

    let mut rng = SeededRng::new(seed);
    // Initial solution: include i independently with probability x_i, drawn
    // in index order.
    let mut selected = vec![false; m];
    for i in 0..m {
        let u: F = rng.uniform();
        if u < inst.weights[i] {
            selected[i] = true;
        }
    }
    let mut z = SymMatrix::zeros(n);
    for i in 0..m {
        if selected[i] {
            z.add_outer(&inst.vectors[i], F::one());
        }
    }
    let mut cost: F = (0..m).filter(|&i| selected[i]).map(|i| inst.costs[i]).sum();

    let mut history: Vec<IterationRecord> = Vec::new();
    let mut delta_sum = F::zero();
    let mut t = 0usize;
    let mut pending: Option<IterationRecord> = None;
    let final_lambda_min;
    loop {
        // One eigendecomposition per iteration: it serves the previous
        // record's lambda_min, the termination check, and the action matrix.
        let spectrum = sym_eig(&z)?;
        let lambda_min = spectrum.lambda_min();
        if let Some(mut rec) = pending.take() {
            rec.lambda_min = lambda_min.to_f64_lossy();
            history.push(rec);
        }
        if lambda_min >= target {
            final_lambda_min = lambda_min;
            break;
        }
        if t >= cap {
            return Err(Error::IterationCapExceeded {
                iterations: t,
                lambda_min: lambda_min.to_f64_lossy(),
                partial: selected
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &s)| s.then_some(i))
                    .collect(),
            });
        }
        t += 1;

        let am = compute_action_matrix_from_spectrum(z.clone(), spectrum, alpha)?;
        let dist = swap_step_distributions(&selected, inst, &am, alpha, k)?;

        // Exact conditional cost drift, recorded for the concentration checks.
        let exp_removed: F = dist.removal.iter().map(|&(i, p)| p * inst.costs[i]).sum();
        let exp_added: F = dist.addition.iter().map(|&(j, p)| p * inst.costs[j]).sum();
        let cost_before = cost;

        // Fixed draw order: removal first, then addition.
        let removed = rng.sample_indexed(&dist.removal);
        let added = rng.sample_indexed(&dist.addition);

        let mut delta_minus = F::zero();
        if let Some(i) = removed {
            let (a, ah) = am.leverage(&inst.vectors[i]);
            delta_minus = a / (F::one() - F::two() * alpha * ah);
            selected[i] = false;
            z.add_outer(&inst.vectors[i], -F::one());
            cost -= inst.costs[i];
        }
        let mut delta_plus = F::zero();
        if let Some(j) = added {
            let (a, ah) = am.leverage(&inst.vectors[j]);
            delta_plus = a / (F::one() + F::two() * alpha * ah);
            selected[j] = true;
            z.add_outer(&inst.vectors[j], F::one());
            cost += inst.costs[j];
        }
        delta_sum += delta_plus - delta_minus;

        if t.is_multiple_of(REBUILD_PERIOD) {
            let mut fresh = SymMatrix::zeros(n);
            for i in 0..m {
                if selected[i] {
                    fresh.add_outer(&inst.vectors[i], F::one());
                }
            }
            debug_assert!(
                fresh.sub(&z).frobenius_norm()
                    <= F::cast(1e-8) * (F::one() + fresh.frobenius_norm()),
                "accumulated Z drifted from its selection"
            );
            z = fresh;
            cost = (0..m).filter(|&i| selected[i]).map(|i| inst.costs[i]).sum();
        }

        // lambda_min(Z_t) is filled in at the top of the next iteration.
        pending = Some(IterationRecord {
            t,
            removed,
            added,
            delta_plus: delta_plus.to_f64_lossy(),
            delta_minus: delta_minus.to_f64_lossy(),
            lambda_min: f64::NAN,
            cost: cost.to_f64_lossy(),
            cost_before: cost_before.to_f64_lossy(),
            expected_cost_change: (exp_added - exp_removed).to_f64_lossy(),
        });
    }

    Ok(SwapRun {
        state: SwapState {
            selected,
            accumulated: z,
            t,
            rng,
            history,
        },
        delta_sum,
        final_lambda_min,
        alpha,
    })
}

fn certificate_from_run<F: Scalar>(
    inst: &VectorInstance<F>,
    selected: Vec<usize>,
    iterations: usize,
    delta_sum: F,
    alpha: F,
    n: usize,
) -> Result<RoundingCertificate> {
    // Independent recomputation of the selection moment and its spectrum.
    let moment = inst.selection_moment(&selected);
    let lambda_min = sym_eig(&moment)?.lambda_min();
    let regret_floor = delta_sum - F::two() * F::cast(n as f64).sqrt() / alpha;
    let regret_slack = lambda_min - regret_floor;
    if regret_slack < -F::cast(CERTIFICATE_SLACK) {
        return Err(Error::CertificateViolation(format!(
            "regret inequality violated: slack {}",
            regret_slack.to_f64_lossy()
        )));
    }
    let cost = inst.selection_cost(&selected);
    let packing_residuals = inst
        .packing
        .as_ref()
        .map(|p| {
            p.evaluate(&selected)
                .iter()
                .zip(p.rhs.iter())
                .map(|(&v, &r)| (v - r).to_f64_lossy())
                .collect()
        })
        .unwrap_or_default();
    let covering_residuals = inst
        .covering
        .as_ref()
        .map(|c| {
            c.evaluate(&selected)
                .iter()
                .zip(c.rhs.iter())
                .map(|(&v, &r)| (v - r).to_f64_lossy())
                .collect()
        })
        .unwrap_or_default();
    Ok(RoundingCertificate {
        selected,
        lambda_min: lambda_min.to_f64_lossy(),
        cost: cost.to_f64_lossy(),
        iterations,
        regret_slack: regret_slack.to_f64_lossy(),
        packing_residuals,
        covering_residuals,
    })
}

/// Output of a rounding run: the certificate plus the per-iteration history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundingOutcome {
    pub certificate: RoundingCertificate,
    pub history: Vec<IterationRecord>,
}

/// Approximate one-sided rounding: returns `S` with
/// `sum_{i in S} v_i v_i^T >= (1 - 2 eps) I`, aborting with
/// [`Error::IterationCapExceeded`] after `q_cap * k / eps` iterations.
pub fn randomized_swap<F: Scalar>(
    inst: &VectorInstance<F>,
    eps: F,
    seed: u64,
    q_cap: F,
) -> Result<RoundingOutcome> {
    let run = run_swap(inst, eps, seed, q_cap)?;
    let selected = run.state.selection_indices();
    let certificate = certificate_from_run(
        inst,
        selected,
        run.state.t,
        run.delta_sum,
        run.alpha,
        inst.dim,
    )?;
    // Sanity: the loop terminated at the target, and the certificate's
    // independent recomputation agrees.
    debug_assert!(
        certificate.lambda_min
            >= (F::one() - F::two() * eps).to_f64_lossy() - CERTIFICATE_SLACK,
        "termination lambda_min {} below target",
        certificate.lambda_min
    );
    let _ = run.final_lambda_min;
    Ok(RoundingOutcome {
        certificate,
        history: run.state.history,
    })
}

/// Exact one-sided rounding: scales the weights up by `1/(1 - 2 eps)`, keeps
/// every index whose scaled weight exceeds one, whitens the remainder
/// against `I - Z_big`, and runs the randomized swap on it. The returned
/// selection satisfies `sum_{i in S} v_i v_i^T >= I_n` up to certificate
/// slack.
///
/// `eps` is accepted on all of `(0, 1/2)`; the `(1 + 6 eps)` cost-bound form
/// is only meaningful for `eps < 1/4`, but the spectral guarantee holds on
/// the full range.
pub fn exact_round<F: Scalar>(
    inst: &VectorInstance<F>,
    eps: F,
    seed: u64,
    q_cap: F,
) -> Result<RoundingOutcome> {
    inst.validate()?;
    if eps <= F::zero() || eps >= F::half() {
        return Err(Error::InvalidParams(format!(
            "eps = {} outside (0, 1/2)",
            eps.to_f64_lossy()
        )));
    }
    let iso = inst.isotropy_error();
    if iso > F::cast(ISOTROPY_TOLERANCE) {
        return Err(Error::NotIsotropic {
            deviation: iso.to_f64_lossy(),
            tolerance: ISOTROPY_TOLERANCE,
        });
    }

    let n = inst.dim;
    let m = inst.len();
    let shrink = F::one() - F::two() * eps;
    // y_i = x_i / (1 - 2 eps); u_i = sqrt(1 - 2 eps) v_i.
    let scaled_weights: Vec<F> = inst.weights.iter().map(|&x| x / shrink).collect();
    let big: Vec<usize> = (0..m).filter(|&i| scaled_weights[i] > F::one()).collect();
    let small: Vec<usize> = (0..m).filter(|&i| scaled_weights[i] <= F::one()).collect();

    // Z_big = sum_{i in big} y_i u_i u_i^T = sum_{i in big} x_i v_i v_i^T.
    let mut remaining = SymMatrix::identity(n);
    for &i in &big {
        remaining.add_outer(&inst.vectors[i], -inst.weights[i]);
    }

    let spec = sym_eig(&remaining)?;
    let rank = spec.rank();
    if rank == 0 || small.is_empty() {
        // The kept heavy indices already certify the lower bound on their own.
        let certificate = certificate_from_run(inst, big, 0, F::zero(), F::one(), n)?;
        if certificate.lambda_min < 1.0 - CERTIFICATE_SLACK {
            return Err(Error::CertificateViolation(format!(
                "exact rounding lower bound violated: lambda_min {}",
                certificate.lambda_min
            )));
        }
        return Ok(RoundingOutcome {
            certificate,
            history: Vec::new(),
        });
    }

    // w_i = (I - Z_big)^{dagger/2} u_i restricted to the range.
    let floor = spec.rank_floor();
    let kept: Vec<usize> = (0..n)
        .filter(|&j| spec.eigenvalues()[j] > floor)
        .collect();
    let sqrt_shrink = shrink.sqrt();
    let sub_vectors: Vec<Vec<F>> = small
        .iter()
        .map(|&i| {
            let v = &inst.vectors[i];
            kept.iter()
                .map(|&j| {
                    let mut dot = F::zero();
                    for r in 0..n {
                        dot += spec.basis_entry(r, j) * v[r];
                    }
                    dot * sqrt_shrink / spec.eigenvalues()[j].sqrt()
                })
                .collect()
        })
        .collect();
    let sub = VectorInstance::new(
        rank,
        sub_vectors,
        small.iter().map(|&i| scaled_weights[i]).collect(),
        small.iter().map(|&i| inst.costs[i]).collect(),
    )?;

    let run = run_swap(&sub, eps, seed, q_cap)?;
    let mut selected: Vec<usize> = big;
    selected.extend(run.state.selection_indices().iter().map(|&si| small[si]));
    selected.sort_unstable();

    // Regret slack belongs to the inner run: recompute the inner selection
    // moment independently.
    let inner_selected = run.state.selection_indices();
    let inner_lambda = sym_eig(&sub.selection_moment(&inner_selected))?.lambda_min();
    let inner_floor =
        run.delta_sum - F::two() * F::cast(rank as f64).sqrt() / run.alpha;
    let regret_slack = inner_lambda - inner_floor;
    if regret_slack < -F::cast(CERTIFICATE_SLACK) {
        return Err(Error::CertificateViolation(format!(
            "regret inequality violated: slack {}",
            regret_slack.to_f64_lossy()
        )));
    }

    let mut certificate =
        certificate_from_run(inst, selected, run.state.t, F::zero(), F::one(), n)?;
    certificate.regret_slack = regret_slack.to_f64_lossy();
    if certificate.lambda_min < 1.0 - CERTIFICATE_SLACK {
        return Err(Error::CertificateViolation(format!(
            "exact rounding lower bound violated: lambda_min {}",
            certificate.lambda_min
        )));
    }
    Ok(RoundingOutcome {
        certificate,
        history: run.state.history,
    })
}

/// The exact-rounding cost upper bound `(1 + 6 eps) <c, x> + 15 n c_inf / eps`.
pub fn exact_cost_bound<F: Scalar>(inst: &VectorInstance<F>, eps: F) -> F {
    let cx = inst.total_weighted_cost();
    let c_inf = inst.max_cost();
    (F::one() + F::cast(6.0) * eps) * cx
        + F::cast(15.0) * F::cast(inst.dim as f64) * c_inf / eps
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rng::SeededRng;

    /// Seeded random isotropic instance used across the rounding tests.
    pub(crate) fn random_isotropic(
        n: usize,
        m: usize,
        seed: u64,
        cost_range: (f64, f64),
    ) -> VectorInstance<f64> {
        let mut rng = SeededRng::new(seed);
        let vectors: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.normal_f64()).collect())
            .collect();
        let weights: Vec<f64> = (0..m).map(|_| 0.05 + 0.9 * rng.uniform_f64()).collect();
        let costs: Vec<f64> = (0..m)
            .map(|_| cost_range.0 + (cost_range.1 - cost_range.0) * rng.uniform_f64())
            .collect();
        VectorInstance::new(n, vectors, weights, costs)
            .unwrap()
            .whiten()
            .unwrap()
    }

    #[test]
    fn integral_instance_terminates_immediately() {
        // x in {0,1}: S_0 = support(x) deterministically, zero iterations.
        let vectors = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.3, 0.4]];
        let inst = VectorInstance::new(2, vectors, vec![1.0, 1.0, 0.0], vec![1.0, 2.0, 7.0])
            .unwrap();
        let out = randomized_swap(&inst, 0.2, 123, 4.0).unwrap();
        assert_eq!(out.certificate.selected, vec![0, 1]);
        assert_eq!(out.certificate.iterations, 0);
        assert!(out.certificate.lambda_min >= 1.0 - 1e-12);
        assert_eq!(out.certificate.cost, 3.0);
    }

    #[test]
    fn identity_instance_selects_everything() {
        let n = 4;
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let inst = VectorInstance::new(n, vectors, vec![1.0; n], vec![1.5; n]).unwrap();
        let out = randomized_swap(&inst, 0.3, 9, 4.0).unwrap();
        assert_eq!(out.certificate.selected, vec![0, 1, 2, 3]);
        assert_eq!(out.certificate.cost, 6.0);
    }

    #[test]
    fn non_isotropic_input_is_rejected() {
        let inst =
            VectorInstance::new(2, vec![vec![2.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0], vec![0.0; 2])
                .unwrap();
        assert!(matches!(
            randomized_swap(&inst, 0.2, 1, 4.0),
            Err(Error::NotIsotropic { .. })
        ));
    }

    #[test]
    fn random_instance_certifies_and_reproduces() {
        let inst = random_isotropic(4, 60, 1234, (1.0, 2.0));
        let out = randomized_swap(&inst, 0.25, 7, 4.0).unwrap();
        // Independent verification of the certificate.
        let moment = inst.selection_moment(&out.certificate.selected);
        let lmin = sym_eig(&moment).unwrap().lambda_min();
        assert!(lmin >= 0.5 - 1e-9, "lambda_min {lmin}");
        assert!(out.certificate.regret_slack >= -CERTIFICATE_SLACK);

        // Bit-exact replay under the same seed.
        let again = randomized_swap(&inst, 0.25, 7, 4.0).unwrap();
        assert_eq!(out.certificate.selected, again.certificate.selected);
        assert_eq!(out.history, again.history);

        // Different seed, different run (overwhelmingly).
        let other = randomized_swap(&inst, 0.25, 8, 4.0).unwrap();
        assert!(out.history != other.history || out.certificate.selected != other.certificate.selected);
    }

    #[test]
    fn distributions_are_valid_and_match_brute_force() {
        let inst = random_isotropic(3, 24, 55, (0.0, 1.0));
        let n = inst.dim;
        let alpha = (n as f64).sqrt() / 0.3;
        let k = inst.len() as f64 + 2.0 * n as f64 / 0.3;
        let mut selected = vec![false; inst.len()];
        for i in 0..inst.len() / 2 {
            selected[i] = true;
        }
        let mut z = SymMatrix::zeros(n);
        for (i, &s) in selected.iter().enumerate() {
            if s {
                z.add_outer(&inst.vectors[i], 1.0);
            }
        }
        let am = crate::regret::compute_action_matrix(&z, alpha).unwrap();
        let dist = swap_step_distributions(&selected, &inst, &am, alpha, k).unwrap();

        let rsum: f64 = dist.removal.iter().map(|&(_, p)| p).sum();
        let asum: f64 = dist.addition.iter().map(|&(_, p)| p).sum();
        assert!((rsum + dist.removal_null - 1.0).abs() < MASS_TOLERANCE);
        assert!((asum + dist.addition_null - 1.0).abs() < MASS_TOLERANCE);
        for &(i, p) in dist.removal.iter().chain(dist.addition.iter()) {
            assert!(p >= 0.0 && p <= 1.0, "mass {p} for index {i}");
        }
        // Brute-force quadratic forms reproduce every mass.
        for &(j, p) in &dist.addition {
            let ah = am.sqrt().quad_form(&inst.vectors[j]);
            let expect = inst.weights[j] * (1.0 + 2.0 * alpha * ah) / k;
            assert!((p - expect).abs() < 1e-10);
        }
        for &(i, p) in &dist.removal {
            let ah = am.sqrt().quad_form(&inst.vectors[i]);
            let expect = (1.0 - inst.weights[i]) * (1.0 - 2.0 * alpha * ah) / k;
            assert!((p - expect).abs() < 1e-10);
        }
        // The addition mass over all of [m] is at most one by isotropy.
        let full: f64 = (0..inst.len())
            .map(|j| {
                let ah = am.sqrt().quad_form(&inst.vectors[j]);
                inst.weights[j] * (1.0 + 2.0 * alpha * ah) / k
            })
            .sum();
        assert!(full <= 1.0 + MASS_TOLERANCE);
    }

    #[test]
    fn empty_selection_has_null_removal() {
        let inst = random_isotropic(2, 8, 3, (0.0, 1.0));
        let selected = vec![false; inst.len()];
        let alpha = (2.0f64).sqrt() / 0.3;
        let k = inst.len() as f64 + 2.0 * 2.0 / 0.3;
        let am = crate::regret::compute_action_matrix(&SymMatrix::zeros(2), alpha).unwrap();
        let dist = swap_step_distributions(&selected, &inst, &am, alpha, k).unwrap();
        assert!(dist.removal.is_empty());
        assert_eq!(dist.removal_null, 1.0);
    }

    #[test]
    fn all_one_weights_remove_nothing() {
        let n = 3;
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let inst = VectorInstance::new(n, vectors, vec![1.0; n], vec![0.0; n]).unwrap();
        let selected = vec![true; n];
        let alpha = (n as f64).sqrt() / 0.2;
        let k = n as f64 + 2.0 * n as f64 / 0.2;
        let am =
            crate::regret::compute_action_matrix(&SymMatrix::identity(n), alpha).unwrap();
        let dist = swap_step_distributions(&selected, &inst, &am, alpha, k).unwrap();
        let rsum: f64 = dist.removal.iter().map(|&(_, p)| p).sum();
        assert_eq!(rsum, 0.0);
        assert_eq!(dist.removal_null, 1.0);
    }

    #[test]
    fn exact_round_integral_is_identity() {
        let vectors = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        let inst =
            VectorInstance::new(2, vectors, vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 1.0]).unwrap();
        let out = exact_round(&inst, 0.2, 77, 4.0).unwrap();
        assert_eq!(out.certificate.selected, vec![0, 1]);
        assert!(out.certificate.lambda_min >= 1.0 - 1e-12);
    }

    #[test]
    fn exact_round_certifies_lower_bound_and_cost() {
        let inst = random_isotropic(5, 80, 2024, (1.0, 2.0));
        let out = exact_round(&inst, 0.2, 3, 4.0).unwrap();
        let lmin = sym_eig(&inst.selection_moment(&out.certificate.selected))
            .unwrap()
            .lambda_min();
        assert!(lmin >= 1.0 - CERTIFICATE_SLACK, "lambda_min {lmin}");
        let bound = exact_cost_bound(&inst, 0.2);
        assert!(
            out.certificate.cost <= bound,
            "cost {} above bound {bound}",
            out.certificate.cost
        );
    }

    #[test]
    fn exact_round_tight_instance_selects_all() {
        // n coordinate pairs: a weight-1 vector sqrt(1 - eps') e_i with zero
        // cost, and a weight-eps' vector e_i at maximum cost. The only
        // zero-one selection meeting the lower bound exactly takes all 2n.
        let n = 8;
        let eps_prime = 0.2;
        let mut vectors = Vec::new();
        let mut weights = Vec::new();
        let mut costs = Vec::new();
        for i in 0..n {
            let mut v1 = vec![0.0; n];
            v1[i] = (1.0f64 - eps_prime).sqrt();
            vectors.push(v1);
            weights.push(1.0);
            costs.push(0.0);
            let mut v2 = vec![0.0; n];
            v2[i] = 1.0;
            vectors.push(v2);
            weights.push(eps_prime);
            costs.push(1.0);
        }
        let inst = VectorInstance::new(n, vectors, weights, costs).unwrap();
        assert!(inst.is_isotropic());
        let out = exact_round(&inst, 0.05, 11, 4.0).unwrap();
        assert_eq!(out.certificate.selected, (0..2 * n).collect::<Vec<_>>());
        assert_eq!(out.certificate.cost, n as f64);
        assert!(out.certificate.lambda_min >= 1.0 - CERTIFICATE_SLACK);
    }

    #[test]
    fn removal_restriction_holds_in_history() {
        // Every sampled removal must come from the restricted set. Replaying
        // the run and recomputing the thresholds would duplicate the loop, so
        // instead assert on the recorded delta_minus: the restricted-set
        // denominator keeps it below 1/(2 alpha) * 2 = 1/alpha scale.
        let inst = random_isotropic(4, 40, 17, (1.0, 2.0));
        let eps = 0.25;
        let out = randomized_swap(&inst, eps, 5, 4.0).unwrap();
        let alpha = 2.0 / eps; // sqrt(4)/eps
        for rec in &out.history {
            assert!(rec.delta_minus >= 0.0);
            assert!(rec.delta_minus <= 1.0 / (2.0 * alpha) + 1e-9);
        }
    }

    #[test]
    fn packing_covering_residuals_reported() {
        let mut inst = random_isotropic(3, 20, 8, (1.0, 1.0));
        let m = inst.len();
        inst.packing = Some(crate::instance::LinearRows {
            rows: vec![vec![1.0; m]],
            rhs: vec![5.0],
        });
        inst.covering = Some(crate::instance::LinearRows {
            rows: vec![vec![1.0; m]],
            rhs: vec![1.0],
        });
        let out = randomized_swap(&inst, 0.3, 2, 4.0).unwrap();
        let count = out.certificate.selected.len() as f64;
        assert_eq!(out.certificate.packing_residuals[0], count - 5.0);
        assert_eq!(out.certificate.covering_residuals[0], count - 1.0);
    }
}
