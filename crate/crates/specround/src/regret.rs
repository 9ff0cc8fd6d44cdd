//! Regret-minimization engine: the density action matrix of the
//! follow-the-regularized-leader strategy with the l_{1/2} regularizer,
//! `A = (alpha Z - l I)^{-2}` with `alpha Z - l I` positive definite and `l`
//! the unique normalizer making `tr(A) = 1`.
//!
//! The certificate inequalities consumed by the rounding and sparsification
//! loops are evaluated here through the shared eigenbasis of `Z` and `A`.

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Spectrum, SymMatrix};
use crate::scalar::Scalar;

/// Bisection refinement target for `|tr(A) - 1|`.
const NORMALIZER_TOLERANCE: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

/// Density matrix `A = (alpha Z - l I)^{-2}` with its normalizer, learning
/// rate, source matrix, and cached square root `A^{1/2} = (alpha Z - l I)^{-1}`
/// (queried once per candidate vector every iteration).
#[derive(Debug, Clone)]
pub struct ActionMatrix<F> {
    matrix: SymMatrix<F>,
    sqrt: SymMatrix<F>,
    normalizer: F,
    alpha: F,
    source: SymMatrix<F>,
    source_spectrum: Spectrum<F>,
}

impl<F: Scalar> ActionMatrix<F> {
    /// `A` itself.
    pub fn matrix(&self) -> &SymMatrix<F> {
        &self.matrix
    }

    /// Cached `A^{1/2}`.
    pub fn sqrt(&self) -> &SymMatrix<F> {
        &self.sqrt
    }

    /// The normalizer `l` with `l < alpha * lambda_min(Z)`.
    pub fn normalizer(&self) -> F {
        self.normalizer
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    /// The accumulated matrix `Z` the action matrix was built from.
    pub fn source(&self) -> &SymMatrix<F> {
        &self.source
    }

    pub fn source_spectrum(&self) -> &Spectrum<F> {
        &self.source_spectrum
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Eigenvalues of `A` along the shared eigenbasis (ascending in `Z`'s
    /// eigenvalues, hence descending in `A`'s).
    pub fn action_eigenvalue(&self, i: usize) -> F {
        let mu = self.alpha * self.source_spectrum.eigenvalues()[i] - self.normalizer;
        F::one() / (mu * mu)
    }

    /// Quadratic forms `(v^T A v, v^T A^{1/2} v)` for one vector.
    pub fn leverage(&self, v: &[F]) -> (F, F) {
        let coords = self.source_spectrum.coords(v);
        let mut a = F::zero();
        let mut ah = F::zero();
        for (i, &w) in coords.iter().enumerate() {
            let mu = self.alpha * self.source_spectrum.eigenvalues()[i] - self.normalizer;
            let w2 = w * w;
            a += w2 / (mu * mu);
            ah += w2 / mu;
        }
        (a, ah)
    }
}

/// Solves for the unique `l < alpha * lambda_min` with
/// `sum_i (alpha lambda_i - l)^{-2} = 1` by bisection plus one Newton polish
/// step. `g(l)` is strictly increasing on the bracket, from 0+ to infinity,
/// so bisection cannot fail. Exposed within the crate so the sparsifier can
/// normalize over the merged eigenvalues of its two diagonal blocks.
pub(crate) fn solve_normalizer<F: Scalar>(eigenvalues: &[F], alpha: F) -> Result<F> {
    let n = eigenvalues.len();
    let lambda_min = eigenvalues[0];
    let op_norm = eigenvalues
        .iter()
        .fold(F::zero(), |m, &l| m.max(l.abs()));
    let nf = F::cast(n as f64);

    let g = |l: F| -> F {
        eigenvalues
            .iter()
            .map(|&lam| {
                let mu = alpha * lam - l;
                F::one() / (mu * mu)
            })
            .sum()
    };

    let mut hi = alpha * lambda_min - F::cast(1e-12);
    // At distance nf * alpha * |Z| + nf + 1 below alpha lambda_min every term
    // is at most 1/(n+1)^2, so g < 1 there.
    let mut lo = alpha * lambda_min - nf * alpha * op_norm - nf - F::one();
    if g(hi) < F::one() {
        // Underflow guard: push hi closer to the pole until g crosses 1.
        let mut gap = F::cast(1e-12);
        let mut tries = 0;
        while g(alpha * lambda_min - gap) < F::one() {
            gap *= F::half();
            tries += 1;
            if tries > 120 {
                return Err(Error::NumericalFailure(
                    "action-matrix normalizer bracket collapsed".into(),
                ));
            }
        }
        hi = alpha * lambda_min - gap;
    }

    let mut l = (lo + hi) * F::half();
    for _ in 0..MAX_BISECTIONS {
        l = (lo + hi) * F::half();
        let val = g(l);
        if (val - F::one()).abs() <= F::cast(NORMALIZER_TOLERANCE) {
            break;
        }
        if val > F::one() {
            hi = l;
        } else {
            lo = l;
        }
        if hi - lo <= F::epsilon() * (F::one() + l.abs()) {
            break;
        }
    }
    if (g(l) - F::one()).abs() > F::cast(1e-6) {
        return Err(Error::NumericalFailure(format!(
            "action-matrix normalizer did not converge: residual {}",
            (g(l) - F::one()).to_f64_lossy()
        )));
    }

    // One Newton polish step; g'(l) = 2 sum (alpha lambda_i - l)^{-3} > 0.
    let gp: F = eigenvalues
        .iter()
        .map(|&lam| {
            let mu = alpha * lam - l;
            F::two() / (mu * mu * mu)
        })
        .sum();
    if gp > F::zero() {
        let polished = l - (g(l) - F::one()) / gp;
        if polished < alpha * lambda_min && (g(polished) - F::one()).abs() <= (g(l) - F::one()).abs()
        {
            l = polished;
        }
    }
    Ok(l)
}

/// Builds the action matrix for `Z` at learning rate `alpha`.
pub fn compute_action_matrix<F: Scalar>(z: &SymMatrix<F>, alpha: F) -> Result<ActionMatrix<F>> {
    let spectrum = sym_eig(z)?;
    compute_action_matrix_from_spectrum(z.clone(), spectrum, alpha)
}

/// Same, reusing an eigendecomposition of `Z` the caller already has.
pub fn compute_action_matrix_from_spectrum<F: Scalar>(
    z: SymMatrix<F>,
    spectrum: Spectrum<F>,
    alpha: F,
) -> Result<ActionMatrix<F>> {
    if alpha <= F::zero() {
        return Err(Error::InvalidParams("alpha must be positive".into()));
    }
    let l = solve_normalizer(spectrum.eigenvalues(), alpha)?;
    let matrix = spectrum.apply_fn(|lam| {
        let mu = alpha * lam - l;
        F::one() / (mu * mu)
    });
    let sqrt = spectrum.apply_fn(|lam| F::one() / (alpha * lam - l));
    Ok(ActionMatrix {
        matrix,
        sqrt,
        normalizer: l,
        alpha,
        source: z,
        source_spectrum: spectrum,
    })
}

/// Exact Frobenius inner products `(<Z, A>, alpha <Z, A^{1/2}>)` through the
/// shared eigenbasis. The cospectral bounds
/// `<Z, A> <= sqrt(n)/alpha + lambda_min(Z)` and
/// `alpha <Z, A^{1/2}> <= n + alpha sqrt(n) lambda_min(Z)` hold whenever `Z`
/// is PSD; callers assert them as certificates.
pub fn cospectral_bounds<F: Scalar>(z: &SymMatrix<F>, am: &ActionMatrix<F>) -> Result<(F, F)> {
    if z.dim() != am.dim() {
        return Err(Error::DimensionError(format!(
            "Z is {}x{} but action matrix is {}x{}",
            z.dim(),
            z.dim(),
            am.dim(),
            am.dim()
        )));
    }
    let mut inner_a = F::zero();
    let mut inner_sqrt = F::zero();
    for &lam in am.source_spectrum.eigenvalues().iter() {
        let mu = am.alpha * lam - am.normalizer;
        inner_a += lam / (mu * mu);
        inner_sqrt += lam / mu;
    }
    Ok((inner_a, am.alpha * inner_sqrt))
}

/// Quadratic forms `(<v v^T, A>, <v v^T, A^{1/2}>)`.
pub fn leverage<F: Scalar>(v: &[F], am: &ActionMatrix<F>) -> (F, F) {
    am.leverage(v)
}
