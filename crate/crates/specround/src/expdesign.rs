//! Weighted experimental design: the five classical objectives, a
//! conditional-gradient solver for the fractional relaxation under a budget,
//! and budgeted rounding via the randomized swap.
//!
//! The budgeted rounding scales the fractional solution down by `1 - 2 eps`,
//! stretches the whitened vectors by `1 / sqrt(1 - 2 eps)`, and rounds the
//! scaled instance; budget compliance is then converted from a
//! high-probability statement into a hard contract by retrying with fresh
//! seeds a bounded number of times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::instance::VectorInstance;
use crate::linalg::{sym_eig, Spectrum, SymMatrix};
use crate::rounding::{randomized_swap, CERTIFICATE_SLACK};
use crate::scalar::Scalar;

/// Objective families. `V` and `G` evaluate through the optional prediction
/// rows; when absent, the standard basis is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveTag {
    A,
    D,
    E,
    V,
    G,
}

impl std::str::FromStr for ObjectiveTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(ObjectiveTag::A),
            "D" => Ok(ObjectiveTag::D),
            "E" => Ok(ObjectiveTag::E),
            "V" => Ok(ObjectiveTag::V),
            "G" => Ok(ObjectiveTag::G),
            other => Err(Error::InvalidInput(format!("unknown objective tag '{other}'"))),
        }
    }
}

/// A budgeted design problem over the vectors and costs of `instance`
/// (instance weights are ignored as input; the solvers produce them).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignProblem<F> {
    pub instance: VectorInstance<F>,
    pub budget: F,
    pub tag: ObjectiveTag,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub v_rows: Option<Vec<Vec<F>>>,
}

fn inverse_quad_forms<F: Scalar>(spec: &Spectrum<F>, rows: &[Vec<F>]) -> Vec<F> {
    rows.iter()
        .map(|r| {
            let coords = spec.coords(r);
            coords
                .iter()
                .zip(spec.eigenvalues().iter())
                .map(|(&c, &l)| c * c / l)
                .sum()
        })
        .collect()
}

/// Evaluates the objective on a PSD moment matrix; singular matrices map to
/// `+infinity` (all five require the inverse).
pub fn objective<F: Scalar>(
    tag: ObjectiveTag,
    sigma: &SymMatrix<F>,
    v_rows: Option<&[Vec<F>]>,
) -> Result<F> {
    let spec = sym_eig(sigma)?;
    Ok(objective_from_spectrum(tag, &spec, v_rows))
}

fn objective_from_spectrum<F: Scalar>(
    tag: ObjectiveTag,
    spec: &Spectrum<F>,
    v_rows: Option<&[Vec<F>]>,
) -> F {
    let n = spec.dim();
    if spec.lambda_min() <= spec.rank_floor() {
        return F::infinity();
    }
    let nf = F::cast(n as f64);
    match tag {
        ObjectiveTag::A => {
            spec.eigenvalues().iter().map(|&l| F::one() / l).sum::<F>() / nf
        }
        ObjectiveTag::D => {
            let log_det: F = spec.eigenvalues().iter().map(|&l| l.ln()).sum();
            (-log_det / nf).exp()
        }
        ObjectiveTag::E => F::one() / spec.lambda_min(),
        ObjectiveTag::V => {
            let rows = standard_or(v_rows, n);
            inverse_quad_forms(spec, &rows).into_iter().sum()
        }
        ObjectiveTag::G => {
            let rows = standard_or(v_rows, n);
            inverse_quad_forms(spec, &rows)
                .into_iter()
                .fold(F::neg_infinity(), F::max)
        }
    }
}

fn standard_or<F: Scalar>(v_rows: Option<&[Vec<F>]>, n: usize) -> Vec<Vec<F>> {
    match v_rows {
        Some(rows) => rows.to_vec(),
        None => (0..n)
            .map(|i| (0..n).map(|j| if i == j { F::one() } else { F::zero() }).collect())
            .collect(),
    }
}

/// Gradient (or subgradient) of the objective with respect to the moment
/// matrix, assembled in the eigenbasis. For the nonsmooth `E` objective the
/// subgradient averages the outer products of an eigenspace basis whenever
/// the bottom eigenvalue is degenerate within a relative 1e-8.
fn gradient_matrix<F: Scalar>(
    tag: ObjectiveTag,
    spec: &Spectrum<F>,
    v_rows: Option<&[Vec<F>]>,
) -> SymMatrix<F> {
    let n = spec.dim();
    let nf = F::cast(n as f64);
    match tag {
        ObjectiveTag::A => spec.apply_fn(|l| -F::one() / (l * l * nf)),
        ObjectiveTag::D => {
            let value = objective_from_spectrum(ObjectiveTag::D, spec, None);
            spec.apply_fn(|l| -value / (l * nf))
        }
        ObjectiveTag::E => bottom_eigenspace_direction(spec)
            .scale(-F::one() / (spec.lambda_min() * spec.lambda_min())),
        ObjectiveTag::V => {
            let rows = standard_or(v_rows, n);
            // -Sigma^{-1} (sum_r v_r v_r^T) Sigma^{-1}
            let inv = spec.apply_fn(|l| F::one() / l);
            let mut vv = SymMatrix::zeros(n);
            for r in &rows {
                vv.add_outer(r, F::one());
            }
            inv.sandwich(&vv).scale(-F::one())
        }
        ObjectiveTag::G => {
            let rows = standard_or(v_rows, n);
            let values = inverse_quad_forms(spec, &rows);
            let mut best = 0usize;
            for (i, &v) in values.iter().enumerate() {
                if v > values[best] {
                    best = i;
                }
            }
            let inv = spec.apply_fn(|l| F::one() / l);
            let mut vv = SymMatrix::zeros(n);
            vv.add_outer(&rows[best], F::one());
            inv.sandwich(&vv).scale(-F::one())
        }
    }
}

/// Averaged outer product of the bottom eigenspace (used both for the `E`
/// subgradient and for the singular phase where `lambda_min` is pushed up).
fn bottom_eigenspace_direction<F: Scalar>(spec: &Spectrum<F>) -> SymMatrix<F> {
    let lmin = spec.lambda_min();
    let tol = F::cast(1e-8) * F::one().max(spec.lambda_max().abs());
    let bottom: Vec<usize> = (0..spec.dim())
        .filter(|&j| spec.eigenvalues()[j] <= lmin + tol)
        .collect();
    let weight = F::one() / F::cast(bottom.len() as f64);
    let mut dir = SymMatrix::zeros(spec.dim());
    for &j in &bottom {
        dir.add_outer(&spec.eigenvector(j), weight);
    }
    dir
}

/// Exact solution of `min <g, s>` over `s in [0,1]^m`, `<c, s> <= C`: a
/// fractional knapsack by cost-effectiveness ratio.
fn fractional_knapsack<F: Scalar>(g: &[F], costs: &[F], budget: F) -> Vec<F> {
    let m = g.len();
    let mut s = vec![F::zero(); m];
    let mut remaining = budget;
    // Free improving items first.
    let mut paid: Vec<usize> = Vec::new();
    for i in 0..m {
        if g[i] < F::zero() {
            if costs[i] == F::zero() {
                s[i] = F::one();
            } else {
                paid.push(i);
            }
        }
    }
    paid.sort_by(|&a, &b| {
        // Most negative g/c first.
        let ra = g[a] / costs[a];
        let rb = g[b] / costs[b];
        ra.partial_cmp(&rb).expect("finite ratios")
    });
    for &i in &paid {
        if remaining <= F::zero() {
            break;
        }
        let take = (remaining / costs[i]).min(F::one());
        s[i] = take;
        remaining -= take * costs[i];
    }
    s
}

/// Fractional relaxation result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelaxationSolution<F> {
    pub x: Vec<F>,
    pub objective: F,
    pub iterations: usize,
    /// Final conditional-gradient duality-gap estimate.
    pub gap: F,
}

/// Conditional gradient on the box-and-budget polytope: linearize, solve the
/// fractional knapsack exactly, step with an exact line search. While the
/// moment matrix is singular the surrogate direction pushes up
/// `lambda_min` instead.
pub fn solve_relaxation<F: Scalar>(
    p: &DesignProblem<F>,
    iters: usize,
    tol: F,
) -> Result<RelaxationSolution<F>> {
    p.instance.validate()?;
    if p.budget <= F::zero() {
        return Err(Error::InvalidParams("budget must be positive".into()));
    }
    let m = p.instance.len();
    let costs = &p.instance.costs;
    let total_cost: F = costs.iter().copied().sum();
    let scale = if total_cost > F::zero() {
        (p.budget / total_cost).min(F::one())
    } else {
        F::one()
    };
    let mut x = vec![scale; m];

    let moment = |x: &[F]| -> SymMatrix<F> {
        let mut s = SymMatrix::zeros(p.instance.dim);
        for (i, v) in p.instance.vectors.iter().enumerate() {
            if x[i] != F::zero() {
                s.add_outer(v, x[i]);
            }
        }
        s
    };

    let v_rows = p.v_rows.as_deref();
    let mut sigma_x = moment(&x);
    let mut spec = sym_eig(&sigma_x)?;
    let mut value = objective_from_spectrum(p.tag, &spec, v_rows);
    let mut gap = F::infinity();
    let mut done = 0usize;
    for iter in 0..iters {
        done = iter;
        let singular = spec.lambda_min() <= spec.rank_floor();
        let grad_matrix = if singular {
            // Surrogate: subgradient of -lambda_min, pointing every
            // improving index downhill.
            bottom_eigenspace_direction(&spec).scale(-F::one())
        } else {
            gradient_matrix(p.tag, &spec, v_rows)
        };
        let g: Vec<F> = p
            .instance
            .vectors
            .iter()
            .map(|v| grad_matrix.quad_form(v))
            .collect();
        let s = fractional_knapsack(&g, costs, p.budget);
        gap = g
            .iter()
            .zip(x.iter().zip(s.iter()))
            .map(|(&gi, (&xi, &si))| gi * (xi - si))
            .sum();
        if !singular && gap <= tol {
            break;
        }

        // Exact line search on the segment; the objective (or -lambda_min in
        // the singular phase) is convex along it.
        let sigma_s = moment(&s);
        let eval = |theta: F| -> F {
            let mut sig = sigma_x.scale(F::one() - theta);
            sig.add_assign(&sigma_s.scale(theta));
            let sp = sym_eig(&sig).expect("finite moment");
            if singular {
                -sp.lambda_min()
            } else {
                objective_from_spectrum(p.tag, &sp, v_rows)
            }
        };
        let mut lo = F::zero();
        let mut hi = F::one();
        for _ in 0..60 {
            let m1 = lo + (hi - lo) / F::cast(3.0);
            let m2 = hi - (hi - lo) / F::cast(3.0);
            if eval(m1) <= eval(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let theta = (lo + hi) * F::half();
        let theta = if singular && eval(theta) >= eval(F::one()) {
            F::one()
        } else {
            theta
        };
        for i in 0..m {
            x[i] = (F::one() - theta) * x[i] + theta * s[i];
        }
        sigma_x = moment(&x);
        spec = sym_eig(&sigma_x)?;
        let new_value = objective_from_spectrum(p.tag, &spec, v_rows);
        // Exact line search includes theta = 0, so the objective cannot
        // increase once finite.
        if new_value.is_finite() && value.is_finite() {
            debug_assert!(
                new_value <= value + F::cast(1e-9) * (F::one() + value.abs()),
                "objective increased"
            );
        }
        value = new_value;
    }
    if !value.is_finite() {
        return Err(Error::Infeasible { iterations: done + 1 });
    }
    Ok(RelaxationSolution {
        x,
        objective: value,
        iterations: done + 1,
        gap,
    })
}

/// Result of budgeted rounding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignRounding {
    /// Selected indices, ascending.
    pub selected: Vec<usize>,
    pub cost: f64,
    /// `lambda_min` of the rounded moment relative to the fractional moment
    /// (in whitened coordinates).
    pub lambda_min_ratio: f64,
    /// Seeds consumed, including the successful one.
    pub attempts: usize,
}

/// Maximum seeded retries when a sampled run overshoots the budget.
const MAX_ATTEMPTS: usize = 5;

/// Budgeted rounding: requires `budget >= 15 n c_inf / eps^2`, enforces
/// `<c, z> <= budget` as a hard contract via retries, and certifies the
/// rounded moment against `(1 - 4 eps)` times the fractional one.
///
/// At `eps = 1/2` the scaling `1 - 2 eps` vanishes; the stopping rule
/// `lambda_min >= 1 - 2 eps = 0` is then met by the empty selection, which
/// is returned (the spectral bound `1 - 4 eps = -1` is vacuous there).
pub fn round_design<F: Scalar>(
    p: &DesignProblem<F>,
    x: &[F],
    eps: F,
    seed: u64,
) -> Result<DesignRounding> {
    p.instance.validate()?;
    if x.len() != p.instance.len() {
        return Err(Error::DimensionError(format!(
            "{} weights for {} vectors",
            x.len(),
            p.instance.len()
        )));
    }
    if eps <= F::zero() || eps > F::half() {
        return Err(Error::InvalidParams(format!(
            "eps = {} outside (0, 1/2]",
            eps.to_f64_lossy()
        )));
    }
    let n = p.instance.dim;
    let c_inf = p.instance.max_cost();
    let required = F::cast(15.0) * F::cast(n as f64) * c_inf / (eps * eps);
    if p.budget < required * (F::one() - F::cast(1e-12)) {
        return Err(Error::BudgetTooSmall {
            budget: p.budget.to_f64_lossy(),
            required: required.to_f64_lossy(),
        });
    }

    let scale = F::one() - F::two() * eps;
    if scale <= F::zero() {
        return Ok(DesignRounding {
            selected: Vec::new(),
            cost: 0.0,
            lambda_min_ratio: 0.0,
            attempts: 1,
        });
    }

    // Whiten the fractional moment so the swap sees an isotropic instance;
    // indices are preserved.
    let fractional = VectorInstance::new(
        n,
        p.instance.vectors.clone(),
        x.to_vec(),
        p.instance.costs.clone(),
    )?;
    let whitened = fractional.whiten()?;
    let stretch = F::one() / scale.sqrt();
    let sub = VectorInstance::new(
        whitened.dim,
        whitened
            .vectors
            .iter()
            .map(|v| v.iter().map(|&c| c * stretch).collect())
            .collect(),
        x.iter().map(|&xi| xi * scale).collect(),
        p.instance.costs.clone(),
    )?;

    let threshold = (F::one() - F::cast(4.0) * eps).to_f64_lossy();
    for attempt in 0..MAX_ATTEMPTS {
        let outcome = randomized_swap(&sub, eps, seed.wrapping_add(attempt as u64), F::two())?;
        let cost = outcome.certificate.cost;
        if cost > p.budget.to_f64_lossy() {
            continue;
        }
        // Ratio in whitened coordinates: lambda_min of the selected moment
        // of the *unstretched* whitened vectors.
        let ratio = sym_eig(&whitened.selection_moment(&outcome.certificate.selected))?
            .lambda_min()
            .to_f64_lossy();
        if ratio < threshold - CERTIFICATE_SLACK {
            return Err(Error::CertificateViolation(format!(
                "rounded moment ratio {ratio} below 1 - 4 eps = {threshold}"
            )));
        }
        return Ok(DesignRounding {
            selected: outcome.certificate.selected,
            cost,
            lambda_min_ratio: ratio,
            attempts: attempt + 1,
        });
    }
    Err(Error::UnluckyRun { attempts: MAX_ATTEMPTS })
}

/// Orthonormal basis of the subspace orthogonal to the all-one vector
/// (Helmert construction), as `n - 1` rows of length `n`.
fn helmert_basis<F: Scalar>(n: usize) -> Vec<Vec<F>> {
    (1..n)
        .map(|k| {
            let kf = F::cast(k as f64);
            let norm = (kf * (kf + F::one())).sqrt();
            (0..n)
                .map(|i| {
                    if i < k {
                        F::one() / norm
                    } else if i == k {
                        -kf / norm
                    } else {
                        F::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Reduces a graph to the design vectors `H^T b_e` in the `(n-1)`-dim
/// subspace orthogonal to the all-one vector; edge costs carry over.
fn graph_design_vectors<F: Scalar>(g: &Graph<F>) -> (Vec<Vec<F>>, Vec<F>) {
    let n = g.n();
    let basis = helmert_basis::<F>(n);
    let vectors = (0..g.m())
        .map(|e| {
            let b = g.incidence_vector(e);
            basis
                .iter()
                .map(|row| row.iter().zip(b.iter()).map(|(&r, &bi)| r * bi).sum())
                .collect()
        })
        .collect();
    let costs = g.edges().iter().map(|e| e.cost).collect();
    (vectors, costs)
}

/// Algebraic-connectivity maximization under a budget as an E-design
/// problem: the moment matrix of the reduced vectors has
/// `lambda_min = lambda_2(L_x)`, so minimizing `f_E` maximizes `lambda_2`.
pub fn lambda2_problem<F: Scalar>(g: &Graph<F>, budget: F) -> Result<DesignProblem<F>> {
    let (vectors, costs) = graph_design_vectors(g);
    let m = vectors.len();
    Ok(DesignProblem {
        instance: VectorInstance::new(g.n() - 1, vectors, vec![F::zero(); m], costs)?,
        budget,
        tag: ObjectiveTag::E,
        v_rows: None,
    })
}

/// Total-effective-resistance minimization under a budget as an A-design
/// problem: total resistance equals `n * tr(Sigma^{-1})` on the reduced
/// vectors, a fixed multiple of `f_A`.
pub fn total_reff_problem<F: Scalar>(g: &Graph<F>, budget: F) -> Result<DesignProblem<F>> {
    let (vectors, costs) = graph_design_vectors(g);
    let m = vectors.len();
    Ok(DesignProblem {
        instance: VectorInstance::new(g.n() - 1, vectors, vec![F::zero(); m], costs)?,
        budget,
        tag: ObjectiveTag::A,
        v_rows: None,
    })
}
