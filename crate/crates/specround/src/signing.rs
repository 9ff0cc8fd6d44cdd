//! The signing trick: append a cost coordinate with signs chosen so the
//! augmented moment matrix's operator norm barely grows, derandomized by
//! conditional expectations. Also a verifier for claimed two-sided rounding
//! certificates (the two-sided existence argument itself is nonconstructive,
//! so only verification is offered).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::VectorInstance;
use crate::linalg::sym_eig;
use crate::scalar::Scalar;

/// Signs with the augmented vectors and the achieved signed-sum norm.
#[derive(Debug, Clone)]
pub struct SignedAugmentation<F> {
    /// `+1`/`-1` per index.
    pub signs: Vec<i8>,
    /// `u_i = (v_i ; s_i sqrt(c_i lambda / <c, x>))` in `R^{n+1}`.
    pub augmented: Vec<Vec<F>>,
    /// `| sum_i s_i x_i sqrt(c_i lambda / <c, x>) v_i |`.
    pub achieved_norm: F,
    /// Largest input vector length `l = max_i |v_i|`.
    pub max_vector_norm: F,
}

/// Fixes signs one at a time, each choice minimizing the exact conditional
/// expectation of `| sum_i s_i w_i |^2` with `w_i = x_i sqrt(c_i lambda /
/// <c, x>) v_i` over the unfixed suffix. With prefix sum `p` and unfixed
/// vectors `w_{j+1..m}`, that expectation is `|p|^2 + sum_{i > j} |w_i|^2`,
/// so the greedy choice is `s_j = -sign(<p, w_j>)`, ties toward `+1`.
/// The final squared norm never exceeds `sum_i |w_i|^2 <= l^2 lambda`.
pub fn derandomized_signing<F: Scalar>(
    inst: &VectorInstance<F>,
    lambda: F,
) -> Result<SignedAugmentation<F>> {
    inst.validate()?;
    if lambda <= F::zero() {
        return Err(Error::InvalidParams("lambda must be positive".into()));
    }
    let cx = inst.total_weighted_cost();
    if cx <= F::zero() {
        return Err(Error::DegenerateCosts);
    }
    let n = inst.dim;
    let m = inst.len();

    let coeff: Vec<F> = inst
        .costs
        .iter()
        .map(|&c| (c * lambda / cx).sqrt())
        .collect();
    let weighted: Vec<Vec<F>> = (0..m)
        .map(|i| {
            inst.vectors[i]
                .iter()
                .map(|&v| inst.weights[i] * coeff[i] * v)
                .collect()
        })
        .collect();

    let suffix_norms: Vec<F> = {
        let mut acc = F::zero();
        let mut out = vec![F::zero(); m + 1];
        for i in (0..m).rev() {
            acc += weighted[i].iter().map(|&w| w * w).sum::<F>();
            out[i] = acc;
        }
        out
    };

    let mut prefix = vec![F::zero(); n];
    let mut signs = Vec::with_capacity(m);
    // Conditional expectation before any sign is fixed.
    let mut cond_exp = suffix_norms[0];
    for i in 0..m {
        let dot: F = prefix
            .iter()
            .zip(weighted[i].iter())
            .map(|(&p, &w)| p * w)
            .sum();
        let sign: i8 = if dot > F::zero() { -1 } else { 1 };
        let s = if sign > 0 { F::one() } else { -F::one() };
        for (p, &w) in prefix.iter_mut().zip(weighted[i].iter()) {
            *p += s * w;
        }
        signs.push(sign);
        // Monotonicity: fixing a sign never increases the conditional
        // expectation.
        let prefix_sq: F = prefix.iter().map(|&p| p * p).sum();
        let next = prefix_sq + suffix_norms[i + 1];
        debug_assert!(
            next <= cond_exp + F::cast(1e-9) * (F::one() + cond_exp),
            "conditional expectation increased at step {i}"
        );
        cond_exp = next;
    }

    let achieved_norm = prefix.iter().map(|&p| p * p).sum::<F>().sqrt();
    let max_vector_norm = inst
        .vectors
        .iter()
        .map(|v| v.iter().map(|&c| c * c).sum::<F>().sqrt())
        .fold(F::zero(), F::max);

    let augmented = (0..m)
        .map(|i| {
            let mut u = inst.vectors[i].clone();
            let s = if signs[i] > 0 { F::one() } else { -F::one() };
            u.push(s * coeff[i]);
            u
        })
        .collect();

    Ok(SignedAugmentation {
        signs,
        augmented,
        achieved_norm,
        max_vector_norm,
    })
}

/// Report of a two-sided certificate check against the `(1 +- band)` bands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSidedReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cost_ratio: f64,
    pub band: f64,
    pub spectral_pass: bool,
    pub cost_pass: bool,
    pub pass: bool,
}

/// Checks a claimed zero-one solution against the two-sided bands
/// `(1 - 8 eps) I <= sum z_i v_i v_i^T <= (1 + 8 eps) I` and the matching
/// cost band on `<c, z> / <c, x>`.
pub fn verify_two_sided<F: Scalar>(
    inst: &VectorInstance<F>,
    z: &[bool],
    eps: F,
) -> Result<TwoSidedReport> {
    if z.len() != inst.len() {
        return Err(Error::DimensionError(format!(
            "{} selection entries for {} vectors",
            z.len(),
            inst.len()
        )));
    }
    let selected: Vec<usize> = z
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    let spec = sym_eig(&inst.selection_moment(&selected))?;
    let lambda_min = spec.lambda_min();
    let lambda_max = spec.lambda_max();

    let cx = inst.total_weighted_cost();
    let cz = inst.selection_cost(&selected);
    let cost_ratio = if cx > F::zero() {
        cz / cx
    } else if cz == F::zero() {
        F::one()
    } else {
        F::infinity()
    };

    let band = F::cast(8.0) * eps;
    let lo = F::one() - band;
    let hi = F::one() + band;
    let spectral_pass = lambda_min >= lo && lambda_max <= hi;
    let cost_pass = cost_ratio >= lo && cost_ratio <= hi;
    Ok(TwoSidedReport {
        lambda_min: lambda_min.to_f64_lossy(),
        lambda_max: lambda_max.to_f64_lossy(),
        cost_ratio: cost_ratio.to_f64_lossy(),
        band: band.to_f64_lossy(),
        spectral_pass,
        cost_pass,
        pass: spectral_pass && cost_pass,
    })
}
