//! Network-design pipeline: reduce a fractional edge solution to an
//! isotropic vector instance, round it exactly, and verify what the spectral
//! certificate implies for the original constraint families.
//!
//! The reduction maps edge `e` to `v_e = L_x^{dagger/2} b_e` restricted to
//! the range of `L_x`; for connected fractional support that range is the
//! `(n-1)`-dimensional subspace orthogonal to the all-one vector,
//! `sum_e x_e v_e v_e^T = I_{n-1}`, and `|v_e|^2` equals the effective
//! resistance of `e` under conductances `x`. A selection `z` with
//! `L_z >= (1 - eps) L_x` then inherits cut, effective-resistance, spectral
//! and algebraic-connectivity guarantees; the verifier checks those
//! directly, exhaustively enumerating cuts up to `n = 12`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::instance::{LinearRows, VectorInstance};
use crate::linalg::{sym_eig, SymMatrix};
use crate::rounding::{exact_round, RoundingCertificate, RoundingOutcome};
use crate::scalar::Scalar;

/// Largest vertex count for which the cut verifier enumerates every subset.
pub const EXHAUSTIVE_CUT_LIMIT: usize = 12;

/// A general network-design instance: the graph's edge weights hold the
/// fractional solution `x`, its costs hold `c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDesignInstance<F> {
    pub graph: Graph<F>,
    /// Pairwise connectivity requirements `(u, v, f_uv)`.
    #[serde(default = "Vec::new")]
    pub connectivity: Vec<(usize, usize, F)>,
    /// Per-vertex degree upper bounds.
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub degree_bounds: Option<Vec<F>>,
    /// Effective-resistance upper bounds `(u, v, r_uv)`.
    #[serde(default = "Vec::new")]
    pub reff_bounds: Vec<(usize, usize, F)>,
    /// Spectral lower-bound matrix `M` with `L_z >= M` required.
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub spectral_bound: Option<SymMatrix<F>>,
    /// Algebraic-connectivity lower bound.
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub lambda2_bound: Option<F>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub packing: Option<LinearRows<F>>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub covering: Option<LinearRows<F>>,
}

impl<F: Scalar> NetworkDesignInstance<F> {
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.n();
        let m = self.graph.m();
        if self.graph.edges().iter().any(|e| e.weight > F::one()) {
            return Err(Error::InvalidInput(
                "fractional weights must lie in [0, 1]".into(),
            ));
        }
        for &(u, v, f) in &self.connectivity {
            if u >= n || v >= n || u == v || f < F::zero() || !f.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "bad connectivity requirement ({u}, {v}, {})",
                    f.to_f64_lossy()
                )));
            }
        }
        for &(u, v, r) in &self.reff_bounds {
            if u >= n || v >= n || u == v || r < F::zero() || !r.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "bad effective-resistance bound ({u}, {v}, {})",
                    r.to_f64_lossy()
                )));
            }
        }
        if let Some(d) = &self.degree_bounds {
            if d.len() != n {
                return Err(Error::DimensionError(format!(
                    "{} degree bounds for {n} vertices",
                    d.len()
                )));
            }
        }
        if let Some(msp) = &self.spectral_bound {
            if msp.dim() != n {
                return Err(Error::DimensionError(format!(
                    "spectral bound is {}x{} for {n} vertices",
                    msp.dim(),
                    msp.dim()
                )));
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

    /// Maximum requirement separated by the cut `in_s`.
    fn requirement_across(&self, in_s: &[bool]) -> F {
        self.connectivity
            .iter()
            .filter(|&&(u, v, _)| in_s[u] != in_s[v])
            .map(|&(_, _, f)| f)
            .fold(F::zero(), F::max)
    }
}

/// Reduces the instance to isotropic vectors, one per edge, verifying the
/// norm-equals-resistance identity on every edge.
pub fn graph_to_vectors<F: Scalar>(nd: &NetworkDesignInstance<F>) -> Result<VectorInstance<F>> {
    nd.validate()?;
    let g = &nd.graph;
    let n = g.n();
    let spec = sym_eig(&g.laplacian(true))?;
    let rank = spec.rank();
    if rank != n - 1 {
        return Err(Error::DisconnectedSupport { rank, expected: n - 1 });
    }
    let raw = VectorInstance {
        dim: n,
        vectors: (0..g.m()).map(|e| g.incidence_vector(e)).collect(),
        weights: g.edges().iter().map(|e| e.weight).collect(),
        costs: g.edges().iter().map(|e| e.cost).collect(),
        packing: nd.packing.clone(),
        covering: nd.covering.clone(),
    };
    let reduced = raw.whiten()?;
    debug_assert_eq!(reduced.dim, n - 1);
    for (e, v) in reduced.vectors.iter().enumerate() {
        let norm_sq: F = v.iter().map(|&c| c * c).sum();
        let edge = &g.edges()[e];
        let reff = g.effective_resistance(edge.u, edge.v)?;
        if (norm_sq - reff).abs() > F::cast(1e-8) * F::one().max(reff) {
            return Err(Error::NumericalFailure(format!(
                "edge {e}: |v_e|^2 = {} but Reff = {}",
                norm_sq.to_f64_lossy(),
                reff.to_f64_lossy()
            )));
        }
    }
    Ok(reduced)
}

/// One constraint family's verification outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyCheck {
    /// Whether the instance declares this family (an undeclared family
    /// passes vacuously).
    pub applicable: bool,
    pub pass: bool,
    /// Worst signed residual (negative means violation for lower-bound
    /// families, positive for upper-bound families).
    pub residual: f64,
    pub note: String,
}

impl FamilyCheck {
    fn vacuous(note: &str) -> Self {
        FamilyCheck {
            applicable: false,
            pass: true,
            residual: 0.0,
            note: note.into(),
        }
    }
}

/// Verification report across all families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImplicationsReport {
    /// `L_z >= (1 - band) L_x` through the whitened difference.
    pub spectral_lower: FamilyCheck,
    pub connectivity_cuts: FamilyCheck,
    pub effective_resistance: FamilyCheck,
    pub spectral_matrix: FamilyCheck,
    pub algebraic_connectivity: FamilyCheck,
    pub degree_bounds: FamilyCheck,
    pub pass: bool,
}

/// Checks what the selection `z` guarantees for each declared family.
pub fn verify_spectral_implications<F: Scalar>(
    nd: &NetworkDesignInstance<F>,
    z: &[bool],
    eps_band: F,
) -> Result<ImplicationsReport> {
    nd.validate()?;
    let g = &nd.graph;
    let n = g.n();
    if z.len() != g.m() {
        return Err(Error::DimensionError(format!(
            "{} selection entries for {} edges",
            z.len(),
            g.m()
        )));
    }
    let one_minus = F::one() - eps_band;
    let one_plus = F::one() + eps_band;
    let selected_graph = g.with_weights(
        &z.iter()
            .map(|&b| if b { F::one() } else { F::zero() })
            .collect::<Vec<_>>(),
    )?;
    let laplacian_z = selected_graph.laplacian(true);

    // (i) Whitened lower bound: lambda_min(sum_{z_e = 1} v_e v_e^T) >= 1 - band.
    let reduced = graph_to_vectors(nd)?;
    let selected: Vec<usize> = z
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    let whitened_spec = sym_eig(&reduced.selection_moment(&selected))?;
    let lower_ok = whitened_spec.lambda_min() >= one_minus - F::cast(1e-9);
    let spectral_lower = FamilyCheck {
        applicable: true,
        pass: lower_ok,
        residual: (whitened_spec.lambda_min() - one_minus).to_f64_lossy(),
        note: format!(
            "lambda_min of whitened selection = {}",
            whitened_spec.lambda_min().to_f64_lossy()
        ),
    };

    // (v) Cut constraints.
    let connectivity_cuts = if nd.connectivity.is_empty() {
        FamilyCheck::vacuous("no connectivity requirements")
    } else if n <= EXHAUSTIVE_CUT_LIMIT {
        let mut worst = F::infinity();
        let mut pass = true;
        // Vertex 0 stays outside S; complements give the same cut.
        for mask in 1u64..(1u64 << (n - 1)) {
            let mut in_s = vec![false; n];
            for v in 1..n {
                if mask >> (v - 1) & 1 == 1 {
                    in_s[v] = true;
                }
            }
            let need = one_minus * nd.requirement_across(&in_s);
            let s: Vec<usize> = (0..n).filter(|&v| in_s[v]).collect();
            let have = selected_graph.cut_weight(&s)?;
            let slack = have - need;
            worst = worst.min(slack);
            if slack < -F::cast(1e-9) {
                pass = false;
            }
        }
        FamilyCheck {
            applicable: true,
            pass,
            residual: worst.to_f64_lossy(),
            note: format!("exhaustive over {} cuts", (1u64 << (n - 1)) - 1),
        }
    } else {
        // Too many cuts to enumerate: check singletons directly; all other
        // cuts are implied spectrally whenever the whitened lower bound
        // holds, since z(delta(S)) = chi_S^T L_z chi_S >= (1 - band)
        // chi_S^T L_x chi_S >= (1 - band) f(S) for feasible x.
        let mut worst = F::infinity();
        let mut pass = lower_ok;
        for v in 0..n {
            let mut in_s = vec![false; n];
            in_s[v] = true;
            let need = one_minus * nd.requirement_across(&in_s);
            let have = selected_graph.cut_weight(&[v])?;
            let slack = have - need;
            worst = worst.min(slack);
            if slack < -F::cast(1e-9) {
                pass = false;
            }
        }
        FamilyCheck {
            applicable: true,
            pass,
            residual: worst.to_f64_lossy(),
            note: "singleton cuts checked directly; larger cuts rely on the \
                   spectral implication (n above exhaustive limit)"
                .into(),
        }
    };

    // (ii) Effective-resistance bounds.
    let effective_resistance = if nd.reff_bounds.is_empty() {
        FamilyCheck::vacuous("no effective-resistance bounds")
    } else {
        let mut worst = F::neg_infinity();
        let mut pass = true;
        let allowed_factor = F::one() + F::two() * eps_band;
        for &(u, v, r) in &nd.reff_bounds {
            match selected_graph.effective_resistance(u, v) {
                Ok(reff) => {
                    let excess = reff - allowed_factor * r;
                    worst = worst.max(excess);
                    if excess > F::cast(1e-9) {
                        pass = false;
                    }
                }
                Err(Error::Disconnected { .. }) => {
                    pass = false;
                    worst = F::infinity();
                }
                Err(e) => return Err(e),
            }
        }
        FamilyCheck {
            applicable: true,
            pass,
            residual: worst.to_f64_lossy(),
            note: "worst Reff_z - (1 + 2 band) r_uv".into(),
        }
    };

    // (iii) Spectral matrix lower bound.
    let spectral_matrix = match &nd.spectral_bound {
        None => FamilyCheck::vacuous("no spectral bound"),
        Some(msp) => {
            let mut diff = laplacian_z.clone();
            diff.sub_assign(&msp.scale(one_minus));
            let lmin = sym_eig(&diff)?.lambda_min();
            let scale = F::one().max(msp.op_norm());
            FamilyCheck {
                applicable: true,
                pass: lmin >= -F::cast(1e-9) * scale,
                residual: lmin.to_f64_lossy(),
                note: "lambda_min(L_z - (1 - band) M)".into(),
            }
        }
    };

    // (iv) Algebraic connectivity.
    let algebraic_connectivity = match nd.lambda2_bound {
        None => FamilyCheck::vacuous("no lambda_2 bound"),
        Some(bound) => {
            let lambda2 = selected_graph.algebraic_connectivity();
            let need = one_minus * bound;
            FamilyCheck {
                applicable: true,
                pass: lambda2 >= need - F::cast(1e-9),
                residual: (lambda2 - need).to_f64_lossy(),
                note: format!("lambda_2(L_z) = {}", lambda2.to_f64_lossy()),
            }
        }
    };

    // (vi) Degree bounds, meaningful only when the upper spectral bound
    // holds as well (one-sided rounding does not promise it).
    let degree_bounds = match &nd.degree_bounds {
        None => FamilyCheck::vacuous("no degree bounds"),
        Some(bounds) => {
            let upper_holds = whitened_spec.lambda_max() <= one_plus;
            if !upper_holds {
                FamilyCheck {
                    applicable: true,
                    pass: true,
                    residual: (whitened_spec.lambda_max() - one_plus).to_f64_lossy(),
                    note: "upper spectral bound does not hold; degree bounds \
                           not implied (reported, not failed)"
                        .into(),
                }
            } else {
                let mut worst = F::neg_infinity();
                let mut pass = true;
                for v in 0..n {
                    let deg = selected_graph.cut_weight(&[v]).unwrap_or(F::zero());
                    let excess = deg - one_plus * bounds[v];
                    worst = worst.max(excess);
                    if excess > F::cast(1e-9) {
                        pass = false;
                    }
                }
                FamilyCheck {
                    applicable: true,
                    pass,
                    residual: worst.to_f64_lossy(),
                    note: "worst z(delta(v)) - (1 + band) d_v".into(),
                }
            }
        }
    };

    let pass = spectral_lower.pass
        && connectivity_cuts.pass
        && effective_resistance.pass
        && spectral_matrix.pass
        && algebraic_connectivity.pass
        && degree_bounds.pass;
    Ok(ImplicationsReport {
        spectral_lower,
        connectivity_cuts,
        effective_resistance,
        spectral_matrix,
        algebraic_connectivity,
        degree_bounds,
        pass,
    })
}

/// Linear-constraint outcome on the rounded solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkReport {
    pub cost: f64,
    /// `(1 + 6 eps) <c, x> + 15 n c_inf / eps`.
    pub cost_bound: f64,
    pub cost_bound_pass: bool,
    pub implications: ImplicationsReport,
    /// Per packing row: `<A_i, z>` against `(1 + 6 eps) a_i + 15 n |A_i|_inf / eps`.
    pub packing_pass: Vec<bool>,
    /// Per covering row: the implied shortfall `delta` with
    /// `<B_j, z> >= b_j - delta n |B_j|_inf`.
    pub covering_delta: Vec<f64>,
}

/// A rounded network solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkSolution {
    /// Zero-one edge selection.
    pub z: Vec<bool>,
    pub certificate: RoundingCertificate,
    pub report: NetworkReport,
    pub history: Vec<crate::rounding::IterationRecord>,
}

/// Runs the full pipeline: reduce, round exactly, verify.
pub fn round_network<F: Scalar>(
    nd: &NetworkDesignInstance<F>,
    eps: F,
    seed: u64,
    q_cap: F,
) -> Result<NetworkSolution> {
    let reduced = graph_to_vectors(nd)?;
    let RoundingOutcome { certificate, history } = exact_round(&reduced, eps, seed, q_cap)?;
    let m = nd.graph.m();
    let mut z = vec![false; m];
    for &e in &certificate.selected {
        z[e] = true;
    }
    // Rounding never selects outside the fractional support.
    for (e, edge) in nd.graph.edges().iter().enumerate() {
        if z[e] && edge.weight == F::zero() {
            return Err(Error::CertificateViolation(format!(
                "edge {e} selected outside the fractional support"
            )));
        }
    }

    let n = nd.graph.n();
    let cx: F = nd
        .graph
        .edges()
        .iter()
        .map(|e| e.cost * e.weight)
        .sum();
    let c_inf = nd
        .graph
        .edges()
        .iter()
        .map(|e| e.cost)
        .fold(F::zero(), F::max);
    let cost_bound = (F::one() + F::cast(6.0) * eps) * cx
        + F::cast(15.0) * F::cast(n as f64) * c_inf / eps;

    let implications = verify_spectral_implications(nd, &z, F::cast(1e-7))?;

    let packing_pass = nd
        .packing
        .as_ref()
        .map(|rows| {
            rows.rows
                .iter()
                .zip(rows.rhs.iter())
                .map(|(row, &a)| {
                    let val: F = certificate.selected.iter().map(|&i| row[i]).sum();
                    let row_inf = row.iter().fold(F::zero(), |acc, &v| acc.max(v));
                    val <= (F::one() + F::cast(6.0) * eps) * a
                        + F::cast(15.0) * F::cast(n as f64) * row_inf / eps
                })
                .collect()
        })
        .unwrap_or_default();
    let covering_delta = nd
        .covering
        .as_ref()
        .map(|rows| {
            rows.rows
                .iter()
                .zip(rows.rhs.iter())
                .map(|(row, &b)| {
                    let val: F = certificate.selected.iter().map(|&i| row[i]).sum();
                    let row_inf = row.iter().fold(F::zero(), |acc, &v| acc.max(v));
                    let denom = F::cast(n as f64) * row_inf;
                    if denom > F::zero() {
                        ((b - val) / denom).max(F::zero()).to_f64_lossy()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .unwrap_or_default();

    let cost = certificate.cost;
    Ok(NetworkSolution {
        z,
        certificate,
        report: NetworkReport {
            cost,
            cost_bound: cost_bound.to_f64_lossy(),
            cost_bound_pass: cost <= cost_bound.to_f64_lossy(),
            implications,
            packing_pass,
            covering_delta,
        },
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn half_weight_k6() -> NetworkDesignInstance<f64> {
        let g = Graph::<f64>::complete(6);
        let edges: Vec<Edge<f64>> = g
            .edges()
            .iter()
            .map(|e| Edge { weight: 0.5, cost: 1.0, ..*e })
            .collect();
        let graph = Graph::new(6, edges).unwrap();
        let connectivity = (0..6)
            .flat_map(|u| ((u + 1)..6).map(move |v| (u, v, 2.0)))
            .collect();
        NetworkDesignInstance {
            graph,
            connectivity,
            degree_bounds: None,
            reff_bounds: Vec::new(),
            spectral_bound: None,
            lambda2_bound: None,
            packing: None,
            covering: None,
        }
    }

    #[test]
    fn reduction_single_edge() {
        let graph =
            Graph::<f64>::new(2, vec![Edge { u: 0, v: 1, weight: 1.0, cost: 0.0 }]).unwrap();
        let nd = NetworkDesignInstance {
            graph,
            connectivity: vec![],
            degree_bounds: None,
            reff_bounds: vec![],
            spectral_bound: None,
            lambda2_bound: None,
            packing: None,
            covering: None,
        };
        let inst = graph_to_vectors(&nd).unwrap();
        assert_eq!(inst.dim, 1);
        assert_eq!(inst.len(), 1);
        assert!((inst.vectors[0][0].abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reduction_triangle_norms_are_resistances() {
        let g = Graph::<f64>::complete(3);
        let nd = NetworkDesignInstance {
            graph: g,
            connectivity: vec![],
            degree_bounds: None,
            reff_bounds: vec![],
            spectral_bound: None,
            lambda2_bound: None,
            packing: None,
            covering: None,
        };
        let inst = graph_to_vectors(&nd).unwrap();
        assert!(inst.is_isotropic());
        for v in &inst.vectors {
            let norm_sq: f64 = v.iter().map(|&c| c * c).sum();
            assert!((norm_sq - 2.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn reduction_path_tree_edges() {
        let g = Graph::<f64>::unit(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let nd = NetworkDesignInstance {
            graph: g,
            connectivity: vec![],
            degree_bounds: None,
            reff_bounds: vec![],
            spectral_bound: None,
            lambda2_bound: None,
            packing: None,
            covering: None,
        };
        let inst = graph_to_vectors(&nd).unwrap();
        assert!(inst.is_isotropic());
        for v in &inst.vectors {
            let norm_sq: f64 = v.iter().map(|&c| c * c).sum();
            assert!((norm_sq - 1.0).abs() < 1e-10, "tree edge Reff must be 1");
        }
    }

    #[test]
    fn disconnected_support_is_rejected() {
        let graph = Graph::new(
            4,
            vec![
                Edge { u: 0, v: 1, weight: 1.0, cost: 0.0 },
                Edge { u: 2, v: 3, weight: 1.0, cost: 0.0 },
                Edge { u: 1, v: 2, weight: 0.0, cost: 0.0 },
            ],
        )
        .unwrap();
        let nd = NetworkDesignInstance {
            graph,
            connectivity: vec![],
            degree_bounds: None,
            reff_bounds: vec![],
            spectral_bound: None,
            lambda2_bound: None,
            packing: None,
            covering: None,
        };
        assert!(matches!(
            graph_to_vectors(&nd),
            Err(Error::DisconnectedSupport { .. })
        ));
    }

    #[test]
    fn integral_solution_passes_all_families() {
        let g = Graph::<f64>::complete(5);
        let nd = NetworkDesignInstance {
            graph: g,
            connectivity: (0..5)
                .flat_map(|u| ((u + 1)..5).map(move |v| (u, v, 3.0)))
                .collect(),
            degree_bounds: Some(vec![4.0; 5]),
            reff_bounds: vec![(0, 4, 0.5)],
            spectral_bound: None,
            lambda2_bound: Some(5.0),
            packing: None,
            covering: None,
        };
        let z = vec![true; 10];
        let report = verify_spectral_implications(&nd, &z, 0.0).unwrap();
        assert!(report.pass, "{report:#?}");
        // Dropping everything fails connectivity.
        let report = verify_spectral_implications(&nd, &vec![false; 10], 0.0).unwrap();
        assert!(!report.pass);
        assert!(!report.connectivity_cuts.pass);
    }

    #[test]
    fn k5_drop_one_edge_matches_exhaustive_cuts() {
        let g = Graph::<f64>::complete(5);
        let nd = NetworkDesignInstance {
            graph: g,
            connectivity: (0..5)
                .flat_map(|u| ((u + 1)..5).map(move |v| (u, v, 2.0)))
                .collect(),
            degree_bounds: None,
            reff_bounds: vec![],
            spectral_bound: None,
            lambda2_bound: None,
            packing: None,
            covering: None,
        };
        let mut z = vec![true; 10];
        z[0] = false;
        let report = verify_spectral_implications(&nd, &z, 0.0).unwrap();
        // Brute force: every cut of K_5 minus an edge still has >= 3 edges.
        assert!(report.connectivity_cuts.pass);
        // And the residual equals the worst cut slack: min cut = 3, f = 2.
        assert!((report.connectivity_cuts.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_network_on_half_k6() {
        let nd = half_weight_k6();
        let sol = round_network(&nd, 0.2, 1, 4.0).unwrap();
        assert!(sol.certificate.lambda_min >= 1.0 - 1e-7);
        assert!(sol.report.implications.pass, "{:#?}", sol.report.implications);
        assert!(sol.report.cost_bound_pass);
        // Support constraint: z only where x > 0 (all x = 0.5 here).
        assert_eq!(sol.z.len(), 15);
    }

    #[test]
    fn spectral_implication_soundness_on_small_instances() {
        // Whenever the whitened lower bound holds, the exhaustive cut check
        // can never find a violating subset, provided the requirements are
        // themselves feasible for the fractional solution. Requirements are
        // pinned at the fractional min cut, the largest feasible uniform f.
        use crate::rng::SeededRng;
        let mut rng = SeededRng::new(1212);
        let mut checked = 0;
        while checked < 100 {
            let n = 4 + (rng.next_u64() % 9) as usize;
            let base = Graph::<f64>::complete(n);
            let edges: Vec<Edge<f64>> = base
                .edges()
                .iter()
                .map(|e| Edge {
                    weight: 0.3 + 0.7 * rng.uniform_f64(),
                    cost: 1.0,
                    ..*e
                })
                .collect();
            let graph = Graph::new(n, edges).unwrap();
            // Fractional min cut over all subsets (vertex 0 fixed outside;
            // complements have the same cut value).
            let mut min_cut = f64::INFINITY;
            for mask in 1u64..(1 << (n - 1)) {
                let s: Vec<usize> = (1..n).filter(|&v| mask >> (v - 1) & 1 == 1).collect();
                min_cut = min_cut.min(graph.cut_weight(&s).unwrap());
            }
            let connectivity = (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v, min_cut)))
                .collect();
            let nd = NetworkDesignInstance {
                graph,
                connectivity,
                degree_bounds: None,
                reff_bounds: vec![],
                spectral_bound: None,
                lambda2_bound: None,
                packing: None,
                covering: None,
            };
            let eps = 0.2;
            let Ok(sol) = round_network(&nd, eps, rng.next_u64(), 4.0) else {
                continue;
            };
            let report = verify_spectral_implications(&nd, &sol.z, 0.0).unwrap();
            if report.spectral_lower.pass {
                assert!(
                    report.connectivity_cuts.pass,
                    "cut check found a violation despite the spectral bound: {report:#?}"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn covering_row_delta_reported() {
        let mut nd = half_weight_k6();
        nd.covering = Some(LinearRows {
            rows: vec![vec![1.0; 15]],
            rhs: vec![6.0],
        });
        let sol = round_network(&nd, 0.2, 3, 4.0).unwrap();
        let picked = sol.certificate.selected.len() as f64;
        let expected = ((6.0 - picked) / 6.0).max(0.0);
        assert!((sol.report.covering_delta[0] - expected).abs() < 1e-12);
    }
}
