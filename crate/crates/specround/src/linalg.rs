//! Dense symmetric-matrix calculus: eigendecomposition, PSD functions,
//! quadratic forms.
//!
//! Matrices are stored dense and symmetrized on construction; instances are
//! desk-scale (n up to a few hundred), and the algorithms above this layer
//! recompute full eigendecompositions every iteration, so no sparse or
//! iterative machinery is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative eigenvalue floor: eigenvalues at or below
/// `RANK_FLOOR * max(1, lambda_max)` are treated as zero for rank decisions.
pub const RANK_FLOOR: f64 = 1e-10;

/// Relative tolerance for declaring a matrix not PSD in [`psd_fn`].
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Dense real symmetric matrix. Construction symmetrizes with `(M + M^T)/2`
/// so accumulated asymmetry can never drift in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<F> {
    dim: usize,
    /// Row-major `dim * dim` entries; kept exactly symmetric.
    data: Vec<F>,
}

impl<F: Scalar> SymMatrix<F> {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![F::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = F::one();
        }
        m
    }

    pub fn from_diag(diag: &[F]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = d;
        }
        m
    }

    /// Builds from row-major entries, averaging `M` and `M^T`.
    pub fn from_rows(dim: usize, rows: &[F]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionError(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                rows.len()
            )));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let mut data = vec![F::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = (rows[i * dim + j] + rows[j * dim + i]) * F::half();
            }
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> F) -> Result<Self> {
        let mut rows = vec![F::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                rows[i * dim + j] = f(i, j);
            }
        }
        Self::from_rows(dim, &rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.dim + j]
    }

    /// Symmetric entry update: sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, value: F) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn trace(&self) -> F {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
    }

    pub fn scale(&self, s: F) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.sub_assign(other);
        out
    }

    /// Rank-one update `self += coeff * v v^T`.
    pub fn add_outer(&mut self, v: &[F], coeff: F) {
        debug_assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            let vi = v[i] * coeff;
            for j in 0..self.dim {
                self.data[i * self.dim + j] += vi * v[j];
            }
        }
    }

    pub fn matvec(&self, v: &[F]) -> Vec<F> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Quadratic form `v^T M v`.
    pub fn quad_form(&self, v: &[F]) -> F {
        debug_assert_eq!(v.len(), self.dim);
        let mut acc = F::zero();
        for i in 0..self.dim {
            let mut row = F::zero();
            for j in 0..self.dim {
                row += self.get(i, j) * v[j];
            }
            acc += v[i] * row;
        }
        acc
    }

    /// Frobenius inner product `<self, other>`.
    pub fn frobenius_inner(&self, other: &Self) -> F {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> F {
        self.frobenius_inner(self).sqrt()
    }

    /// Dense product `self * other * self` is not needed; this is the plain
    /// symmetric product `self * other` symmetrized, used by the width check.
    pub fn sandwich(&self, inner: &Self) -> Self {
        debug_assert_eq!(self.dim, inner.dim);
        let n = self.dim;
        // t = inner * self
        let mut t = vec![F::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let iv = inner.get(i, k);
                if iv != F::zero() {
                    for j in 0..n {
                        t[i * n + j] += iv * self.get(k, j);
                    }
                }
            }
        }
        // out = self * t
        let mut out = vec![F::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let sv = self.get(i, k);
                if sv != F::zero() {
                    for j in 0..n {
                        out[i * n + j] += sv * t[k * n + j];
                    }
                }
            }
        }
        SymMatrix::from_rows(n, &out).expect("sandwich of finite matrices is finite")
    }

    /// Largest absolute eigenvalue.
    pub fn op_norm(&self) -> F {
        let spec = sym_eig(self).expect("finite symmetric matrix");
        spec.eigenvalues()
            .iter()
            .fold(F::zero(), |m, &l| m.max(l.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues and an
/// orthonormal basis of eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum<F> {
    dim: usize,
    /// Ascending.
    eigenvalues: Vec<F>,
    /// Row-major `dim * dim`; column `j` is the eigenvector of
    /// `eigenvalues[j]`.
    basis: Vec<F>,
}

impl<F: Scalar> Spectrum<F> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[F] {
        &self.eigenvalues
    }

    pub fn lambda_min(&self) -> F {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> F {
        self.eigenvalues[self.dim - 1]
    }

    /// Component `i` of eigenvector `j`.
    #[inline]
    pub fn basis_entry(&self, i: usize, j: usize) -> F {
        self.basis[i * self.dim + j]
    }

    pub fn eigenvector(&self, j: usize) -> Vec<F> {
        (0..self.dim).map(|i| self.basis_entry(i, j)).collect()
    }

    /// Coordinates of `v` in the eigenbasis, i.e. `V^T v`.
    pub fn coords(&self, v: &[F]) -> Vec<F> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.basis_entry(i, j) * v[i]).sum())
            .collect()
    }

    /// Assembles `sum_j f(lambda_j) v_j v_j^T`.
    pub fn apply_fn(&self, mut f: impl FnMut(F) -> F) -> SymMatrix<F> {
        let n = self.dim;
        let mapped: Vec<F> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut data = vec![F::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = F::zero();
                for k in 0..n {
                    acc += mapped[k] * self.basis_entry(i, k) * self.basis_entry(j, k);
                }
                data[i * n + j] = acc;
                data[j * n + i] = acc;
            }
        }
        SymMatrix { dim: n, data }
    }

    pub fn reconstruct(&self) -> SymMatrix<F> {
        self.apply_fn(|l| l)
    }

    /// Number of eigenvalues above the scale-invariant rank floor.
    pub fn rank(&self) -> usize {
        let floor = self.rank_floor();
        self.eigenvalues.iter().filter(|&&l| l > floor).count()
    }

    pub fn rank_floor(&self) -> F {
        let lmax = self
            .eigenvalues
            .iter()
            .fold(F::zero(), |m, &l| m.max(l.abs()));
        F::cast(RANK_FLOOR) * F::one().max(lmax)
    }
}

/// Eigendecomposition by cyclic Jacobi rotations.
///
/// Jacobi is unconditionally convergent on symmetric matrices and delivers
/// high relative accuracy, which the certificate checks downstream depend on.
pub fn sym_eig<F: Scalar>(m: &SymMatrix<F>) -> Result<Spectrum<F>> {
    if !m.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let n = m.dim;
    if n == 0 {
        return Ok(Spectrum {
            dim: 0,
            eigenvalues: vec![],
            basis: vec![],
        });
    }
    let mut a = m.data.clone();
    let mut v = vec![F::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = F::one();
    }

    let off = |a: &[F]| -> F {
        let mut s = F::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        s
    };
    let norm0 = {
        let mut s = F::zero();
        for x in a.iter() {
            s += *x * *x;
        }
        s.sqrt().max(F::one())
    };
    let stop = F::epsilon() * F::epsilon() * norm0 * norm0;

    const MAX_SWEEPS: usize = 64;
    for _sweep in 0..MAX_SWEEPS {
        if off(&a) <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == F::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Skip rotations that cannot change anything at working
                // precision; required for termination on graded matrices.
                if apq.abs() <= F::epsilon() * (app.abs() + aqq.abs()) * F::cast(0.5e-2) {
                    a[p * n + q] = F::zero();
                    a[q * n + p] = F::zero();
                    continue;
                }
                let theta = (aqq - app) / (F::two() * apq);
                let t = {
                    let denom = theta.abs() + (theta * theta + F::one()).sqrt();
                    let t = F::one() / denom;
                    if theta < F::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                let tau = s / (F::one() + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = F::zero();
                a[q * n + p] = F::zero();
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[i * n + p];
                        let aiq = a[i * n + q];
                        let new_ip = aip - s * (aiq + tau * aip);
                        let new_iq = aiq + s * (aip - tau * aiq);
                        a[i * n + p] = new_ip;
                        a[p * n + i] = new_ip;
                        a[i * n + q] = new_iq;
                        a[q * n + i] = new_iq;
                    }
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip - s * (viq + tau * vip);
                    v[i * n + q] = viq + s * (vip - tau * viq);
                }
            }
        }
    }

    // Sort ascending, permuting eigenvector columns alongside.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<F> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut basis = vec![F::zero(); n * n];
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            basis[i * n + new_j] = v[i * n + old_j];
        }
    }
    Ok(Spectrum {
        dim: n,
        eigenvalues,
        basis,
    })
}

/// Spectral functions applicable through [`psd_fn`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdFn {
    /// `M^{1/2}`.
    Sqrt,
    /// Moore-Penrose pseudo-inverse `M^dagger`.
    Pinv,
    /// `(M^dagger)^{1/2}`.
    PinvSqrt,
}

/// Applies `f` eigenvalue-wise in the eigenbasis of a PSD matrix. Eigenvalues
/// at or below the rank floor map to zero for the pseudo-inverse variants.
pub fn psd_fn<F: Scalar>(m: &SymMatrix<F>, f: PsdFn) -> Result<SymMatrix<F>> {
    let spec = sym_eig(m)?;
    psd_fn_spectrum(&spec, f)
}

/// Same as [`psd_fn`] but reuses an existing eigendecomposition.
pub fn psd_fn_spectrum<F: Scalar>(spec: &Spectrum<F>, f: PsdFn) -> Result<SymMatrix<F>> {
    let lmax_abs = spec
        .eigenvalues()
        .iter()
        .fold(F::zero(), |m, &l| m.max(l.abs()));
    let neg_tol = F::cast(PSD_TOLERANCE) * lmax_abs;
    if spec.lambda_min() < -neg_tol {
        return Err(Error::NotPsd {
            eigenvalue: spec.lambda_min().to_f64_lossy(),
            tolerance: PSD_TOLERANCE,
        });
    }
    let floor = spec.rank_floor();
    Ok(spec.apply_fn(|l| {
        let l = l.max(F::zero());
        match f {
            PsdFn::Sqrt => l.sqrt(),
            PsdFn::Pinv => {
                if l > floor {
                    F::one() / l
                } else {
                    F::zero()
                }
            }
            PsdFn::PinvSqrt => {
                if l > floor {
                    F::one() / l.sqrt()
                } else {
                    F::zero()
                }
            }
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(dim: usize, rows: &[f64]) -> SymMatrix<f64> {
        SymMatrix::from_rows(dim, rows).unwrap()
    }

    /// Closed-form 2x2 symmetric eigenvalues, the independent oracle for
    /// small cases.
    fn eig2_closed_form(a: f64, b: f64, d: f64) -> (f64, f64) {
        let tr = a + d;
        let det = a * d - b * b;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        ((tr - disc) / 2.0, (tr + disc) / 2.0)
    }

    #[test]
    fn eig_identity() {
        let spec = sym_eig(&SymMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(spec.eigenvalues(), &[1.0, 1.0]);
    }

    #[test]
    fn eig_diagonal_sorted() {
        let spec = sym_eig(&SymMatrix::from_diag(&[3.0f64, 1.0])).unwrap();
        assert!((spec.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((spec.eigenvalues()[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig_offdiagonal_matches_closed_form() {
        // [[0,1],[1,0]] has eigenvalues -1, 1 by the 2x2 formula.
        let (lo, hi) = eig2_closed_form(0.0, 1.0, 0.0);
        assert_eq!((lo, hi), (-1.0, 1.0));
        let spec = sym_eig(&mat(2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((spec.eigenvalues()[0] - lo).abs() < 1e-12);
        assert!((spec.eigenvalues()[1] - hi).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_finite() {
        let m = SymMatrix {
            dim: 2,
            data: vec![1.0, f64::NAN, f64::NAN, 1.0],
        };
        assert!(matches!(sym_eig(&m), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [1usize, 2, 3, 5, 8, 12] {
            let rows: Vec<f64> = (0..n * n).map(|_| next()).collect();
            let m = mat(n, &rows);
            let spec = sym_eig(&m).unwrap();
            let rec = spec.reconstruct();
            let err = rec.sub(&m).frobenius_norm() / m.frobenius_norm().max(1.0);
            assert!(err < 1e-9, "reconstruction error {err} at n={n}");
            // V^T V = I
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n)
                        .map(|i| spec.basis_entry(i, a) * spec.basis_entry(i, b))
                        .sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-9, "basis not orthonormal at n={n}");
                }
            }
        }
    }

    #[test]
    fn psd_sqrt_diagonal() {
        let s = psd_fn(&SymMatrix::from_diag(&[4.0f64, 9.0]), PsdFn::Sqrt).unwrap();
        assert!((s.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((s.get(1, 1) - 3.0).abs() < 1e-12);
        assert!(s.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn psd_pinv_maps_nullspace_to_zero() {
        let p = psd_fn(&SymMatrix::from_diag(&[2.0f64, 0.0]), PsdFn::Pinv).unwrap();
        assert!((p.get(0, 0) - 0.5).abs() < 1e-12);
        assert_eq!(p.get(1, 1), 0.0);
    }

    #[test]
    fn psd_pinv_sqrt_scaled_identity() {
        let m = SymMatrix::<f64>::identity(3).scale(4.0);
        let p = psd_fn(&m, PsdFn::PinvSqrt).unwrap();
        for i in 0..3 {
            assert!((p.get(i, i) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn psd_fn_rejects_indefinite() {
        let m = SymMatrix::from_diag(&[1.0f64, -0.5]);
        assert!(matches!(
            psd_fn(&m, PsdFn::Sqrt),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn sqrt_squares_back_to_matrix() {
        let mut state = 7u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in 2..=12usize {
            // Random PSD via G G^T.
            let g: Vec<f64> = (0..n * n).map(|_| next()).collect();
            let mut m = SymMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += g[i * n + k] * g[j * n + k];
                    }
                    m.set_sym(i, j, acc);
                }
            }
            let s = psd_fn(&m, PsdFn::Sqrt).unwrap();
            let ss = s.sandwich(&SymMatrix::identity(n)); // s * I * s = s^2
            let err = ss.sub(&m).frobenius_norm();
            assert!(err < 1e-7 * m.frobenius_norm().max(1.0), "sqrt^2 error {err}");

            let p = psd_fn(&m, PsdFn::Pinv).unwrap();
            // Moore-Penrose on symmetric PSD: pinv * M * pinv = pinv.
            let pmp = p.sandwich(&m);
            let err = pmp.sub(&p).frobenius_norm();
            assert!(err < 1e-7 * p.frobenius_norm().max(1.0), "pinv identity error {err}");
        }
    }

    #[test]
    fn f32_instantiation_works() {
        let m = SymMatrix::<f32>::from_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let spec = sym_eig(&m).unwrap();
        assert!((spec.eigenvalues()[0] + 1.0).abs() < 1e-5);
        assert!((spec.eigenvalues()[1] - 1.0).abs() < 1e-5);
    }
}
