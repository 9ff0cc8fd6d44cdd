//! The universal rounding input: vectors with fractional weights and costs,
//! plus optional nonnegative linear packing/covering rows evaluated on
//! rounding outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, SymMatrix};
use crate::scalar::Scalar;

/// Operator-norm tolerance under which an instance counts as isotropic.
pub const ISOTROPY_TOLERANCE: f64 = 1e-8;

/// Nonnegative linear rows `R` with right-hand sides `rhs`; packing rows are
/// read as `R z <= rhs`, covering rows as `R z >= rhs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearRows<F> {
    pub rows: Vec<Vec<F>>,
    pub rhs: Vec<F>,
}

impl<F: Scalar> LinearRows<F> {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.rows.len() != self.rhs.len() {
            return Err(Error::DimensionError(format!(
                "{} rows but {} right-hand sides",
                self.rows.len(),
                self.rhs.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionError(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if row.iter().any(|&v| v < F::zero() || !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "row {i} has a negative or non-finite entry"
                )));
            }
        }
        if self.rhs.iter().any(|&v| v < F::zero() || !v.is_finite()) {
            return Err(Error::InvalidInput("negative or non-finite rhs".into()));
        }
        Ok(())
    }

    /// Row values on a zero-one selection.
    pub fn evaluate(&self, selected: &[usize]) -> Vec<F> {
        self.rows
            .iter()
            .map(|row| selected.iter().map(|&i| row[i]).sum())
            .collect()
    }
}

/// `m` vectors in `R^n` with weights `x in [0,1]^m` and nonnegative costs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorInstance<F> {
    pub dim: usize,
    pub vectors: Vec<Vec<F>>,
    pub weights: Vec<F>,
    pub costs: Vec<F>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub packing: Option<LinearRows<F>>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub covering: Option<LinearRows<F>>,
}

impl<F: Scalar> VectorInstance<F> {
    pub fn new(dim: usize, vectors: Vec<Vec<F>>, weights: Vec<F>, costs: Vec<F>) -> Result<Self> {
        let inst = VectorInstance {
            dim,
            vectors,
            weights,
            costs,
            packing: None,
            covering: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.vectors.len();
        if self.weights.len() != m || self.costs.len() != m {
            return Err(Error::DimensionError(format!(
                "{} vectors, {} weights, {} costs",
                m,
                self.weights.len(),
                self.costs.len()
            )));
        }
        for (i, v) in self.vectors.iter().enumerate() {
            if v.len() != self.dim {
                return Err(Error::DimensionError(format!(
                    "vector {i} has dimension {}, expected {}",
                    v.len(),
                    self.dim
                )));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("vector {i} has a non-finite entry")));
            }
        }
        for (i, &x) in self.weights.iter().enumerate() {
            if !(F::zero()..=F::one()).contains(&x) || !x.is_finite() {
                return Err(Error::InvalidInput(format!("weight x[{i}] = {x} outside [0, 1]")));
            }
        }
        for (i, &c) in self.costs.iter().enumerate() {
            if c < F::zero() || !c.is_finite() {
                return Err(Error::InvalidInput(format!("cost c[{i}] = {c} negative or non-finite")));
            }
        }
        if let Some(p) = &self.packing {
            p.validate(m)?;
        }
        if let Some(c) = &self.covering {
            c.validate(m)?;
        }
        Ok(())
    }

    /// Weighted moment matrix `sum_i x_i v_i v_i^T`.
    pub fn moment_matrix(&self) -> SymMatrix<F> {
        let mut m = SymMatrix::zeros(self.dim);
        for (v, &x) in self.vectors.iter().zip(self.weights.iter()) {
            if x != F::zero() {
                m.add_outer(v, x);
            }
        }
        m
    }

    /// Unweighted moment matrix of a selection, `sum_{i in S} v_i v_i^T`.
    pub fn selection_moment(&self, selected: &[usize]) -> SymMatrix<F> {
        let mut m = SymMatrix::zeros(self.dim);
        for &i in selected {
            m.add_outer(&self.vectors[i], F::one());
        }
        m
    }

    /// `|sum_i x_i v_i v_i^T - I|_op`.
    pub fn isotropy_error(&self) -> F {
        let mut m = self.moment_matrix();
        let id = SymMatrix::identity(self.dim);
        m.sub_assign(&id);
        m.op_norm()
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropy_error() <= F::cast(ISOTROPY_TOLERANCE)
    }

    pub fn total_weighted_cost(&self) -> F {
        self.costs
            .iter()
            .zip(self.weights.iter())
            .map(|(&c, &x)| c * x)
            .sum()
    }

    pub fn selection_cost(&self, selected: &[usize]) -> F {
        selected.iter().map(|&i| self.costs[i]).sum()
    }

    pub fn max_cost(&self) -> F {
        self.costs.iter().fold(F::zero(), |m, &c| m.max(c))
    }

    /// Maps the vectors by `M^{dagger/2}` with `M = sum_i x_i v_i v_i^T` and
    /// restricts them to the range of `M`, so the result satisfies
    /// `sum_i x_i v'_i v'_i^T = I_r`. Weights and costs are unchanged.
    pub fn whiten(&self) -> Result<VectorInstance<F>> {
        let moment = self.moment_matrix();
        let spec = sym_eig(&moment)?;
        let rank = spec.rank();
        if rank == 0 {
            return Err(Error::DegenerateInstance);
        }
        let floor = spec.rank_floor();
        let n = self.dim;
        // Columns of the basis above the floor, scaled by 1/sqrt(lambda):
        // the restriction of M^{dagger/2} to range(M).
        let kept: Vec<usize> = (0..n)
            .filter(|&j| spec.eigenvalues()[j] > floor)
            .collect();
        debug_assert_eq!(kept.len(), rank);
        let inv_sqrt: Vec<F> = kept
            .iter()
            .map(|&j| F::one() / spec.eigenvalues()[j].sqrt())
            .collect();
        let vectors: Vec<Vec<F>> = self
            .vectors
            .iter()
            .map(|v| {
                kept.iter()
                    .zip(inv_sqrt.iter())
                    .map(|(&j, &s)| {
                        let mut dot = F::zero();
                        for i in 0..n {
                            dot += spec.basis_entry(i, j) * v[i];
                        }
                        dot * s
                    })
                    .collect()
            })
            .collect();
        Ok(VectorInstance {
            dim: rank,
            vectors,
            weights: self.weights.clone(),
            costs: self.costs.clone(),
            packing: self.packing.clone(),
            covering: self.covering.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn standard_basis_is_already_isotropic() {
        let vectors = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let inst =
            VectorInstance::new(2, vectors.clone(), vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(inst.is_isotropic());
        let w = inst.whiten().unwrap();
        assert_eq!(w.dim, 2);
        assert!(w.isotropy_error() < 1e-12);
    }

    #[test]
    fn whiten_scales_to_isotropy() {
        let vectors = vec![vec![2.0, 0.0], vec![0.0, 2.0]];
        let inst = VectorInstance::new(2, vectors, vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let w = inst.whiten().unwrap();
        assert!(w.isotropy_error() < 1e-10);
        assert_eq!(w.weights, vec![1.0, 1.0]);
    }

    #[test]
    fn whiten_rank_deficient_drops_to_range() {
        // Both vectors along e_0, weights 1/2 each: moment = diag(1, 0),
        // whitened dimension 1, both images equal to 1.
        let vectors: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let inst = VectorInstance::new(2, vectors, vec![0.5, 0.5], vec![0.0, 0.0]).unwrap();
        let w = inst.whiten().unwrap();
        assert_eq!(w.dim, 1);
        for v in &w.vectors {
            assert!((v[0].abs() - 1.0).abs() < 1e-12);
        }
        assert!(w.isotropy_error() < 1e-10);
    }

    #[test]
    fn whiten_all_zero_is_degenerate() {
        let inst =
            VectorInstance::new(2, vec![vec![0.0, 0.0]], vec![1.0], vec![0.0]).unwrap();
        assert!(matches!(inst.whiten(), Err(Error::DegenerateInstance)));
    }

    #[test]
    fn whiten_random_instances_hit_isotropy_tolerance() {
        let mut rng = SeededRng::new(31);
        for trial in 0..100 {
            let n = 2 + (trial % 5);
            let m = n * 4;
            let vectors: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.normal_f64()).collect())
                .collect();
            let weights: Vec<f64> = (0..m).map(|_| 0.05 + 0.95 * rng.uniform_f64()).collect();
            let costs = vec![0.0; m];
            let inst = VectorInstance::new(n, vectors, weights, costs).unwrap();
            let w = inst.whiten().unwrap();
            assert!(
                w.isotropy_error() <= 1e-8,
                "trial {trial}: isotropy error {}",
                w.isotropy_error()
            );
        }
    }

    #[test]
    fn rejects_out_of_range_weight() {
        let r = VectorInstance::new(1, vec![vec![1.0]], vec![1.5], vec![0.0]);
        assert!(r.is_err());
    }
}
