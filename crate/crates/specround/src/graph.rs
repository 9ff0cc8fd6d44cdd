//! Undirected weighted/costed edge-list graphs and their spectral
//! quantities: Laplacian, signless Laplacian, effective resistance,
//! algebraic connectivity, cut weights.
//!
//! Vertices are 0-based contiguous integers and edge order is input order;
//! downstream tie-breaking depends on it, so it is never reordered. Parallel
//! edges are distinct entries, and zero-weight edges are kept because they
//! may still carry cost and indices must stay stable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{psd_fn_spectrum, sym_eig, PsdFn, SymMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge<F> {
    pub u: usize,
    pub v: usize,
    pub weight: F,
    pub cost: F,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Graph<F> {
    n: usize,
    edges: Vec<Edge<F>>,
}

impl<F: Scalar> Graph<F> {
    pub fn new(n: usize, edges: Vec<Edge<F>>) -> Result<Self> {
        for (idx, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge {idx}: endpoint out of range (n = {n})"
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidInput(format!("edge {idx}: self-loop at {}", e.u)));
            }
            if !e.weight.is_finite() || e.weight < F::zero() {
                return Err(Error::InvalidInput(format!(
                    "edge {idx}: weight must be finite and nonnegative"
                )));
            }
            if !e.cost.is_finite() || e.cost < F::zero() {
                return Err(Error::InvalidInput(format!(
                    "edge {idx}: cost must be finite and nonnegative"
                )));
            }
        }
        Ok(Graph { n, edges })
    }

    /// Unit-weight, zero-cost graph from endpoint pairs.
    pub fn unit(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            n,
            pairs
                .iter()
                .map(|&(u, v)| Edge {
                    u,
                    v,
                    weight: F::one(),
                    cost: F::zero(),
                })
                .collect(),
        )
    }

    /// Complete graph on `n` vertices with unit weights, edges ordered
    /// lexicographically.
    pub fn complete(n: usize) -> Self {
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                pairs.push((u, v));
            }
        }
        Self::unit(n, &pairs).expect("complete graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<F>] {
        &self.edges
    }

    /// Unweighted maximum degree (each edge counts once per endpoint).
    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// Incidence vector `b_e = chi_u - chi_v`.
    pub fn incidence_vector(&self, edge: usize) -> Vec<F> {
        let e = &self.edges[edge];
        let mut b = vec![F::zero(); self.n];
        b[e.u] = F::one();
        b[e.v] = -F::one();
        b
    }

    /// `L = D - A`, with the stored weights or with every edge at weight 1.
    pub fn laplacian(&self, use_weights: bool) -> SymMatrix<F> {
        let mut l = SymMatrix::zeros(self.n);
        for e in &self.edges {
            let w = if use_weights { e.weight } else { F::one() };
            l.set_sym(e.u, e.u, l.get(e.u, e.u) + w);
            l.set_sym(e.v, e.v, l.get(e.v, e.v) + w);
            l.set_sym(e.u, e.v, l.get(e.u, e.v) - w);
        }
        l
    }

    /// Signless Laplacian `L+ = D + A`.
    pub fn signless_laplacian(&self) -> SymMatrix<F> {
        let mut l = SymMatrix::zeros(self.n);
        for e in &self.edges {
            let w = e.weight;
            l.set_sym(e.u, e.u, l.get(e.u, e.u) + w);
            l.set_sym(e.v, e.v, l.get(e.v, e.v) + w);
            l.set_sym(e.u, e.v, l.get(e.u, e.v) + w);
        }
        l
    }

    /// Weighted degree matrix `D` as a diagonal.
    pub fn degree_matrix(&self) -> SymMatrix<F> {
        let mut d = SymMatrix::zeros(self.n);
        for e in &self.edges {
            d.set_sym(e.u, e.u, d.get(e.u, e.u) + e.weight);
            d.set_sym(e.v, e.v, d.get(e.v, e.v) + e.weight);
        }
        d
    }

    /// Connected components of the positive-weight subgraph, as component
    /// ids per vertex.
    fn positive_components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            if e.weight > F::zero() {
                let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        (0..self.n).map(|v| find(&mut parent, v)).collect()
    }

    /// Effective resistance `b_st^T L^dagger b_st` with conductances given by
    /// the edge weights.
    pub fn effective_resistance(&self, s: usize, t: usize) -> Result<F> {
        if s >= self.n || t >= self.n {
            return Err(Error::InvalidInput(format!("vertex out of range: {s}, {t}")));
        }
        if s == t {
            return Ok(F::zero());
        }
        let comp = self.positive_components();
        if comp[s] != comp[t] {
            return Err(Error::Disconnected { s, t });
        }
        let spec = sym_eig(&self.laplacian(true))?;
        let pinv = psd_fn_spectrum(&spec, PsdFn::Pinv)?;
        let mut b = vec![F::zero(); self.n];
        b[s] = F::one();
        b[t] = -F::one();
        Ok(pinv.quad_form(&b))
    }

    /// Second-smallest eigenvalue of the weighted Laplacian.
    pub fn algebraic_connectivity(&self) -> F {
        assert!(self.n >= 2, "algebraic connectivity needs n >= 2");
        let spec = sym_eig(&self.laplacian(true)).expect("finite Laplacian");
        spec.eigenvalues()[1]
    }

    /// Total weight crossing `(S, V minus S)`.
    pub fn cut_weight(&self, s: &[usize]) -> Result<F> {
        let mut in_s = vec![false; self.n];
        for &v in s {
            if v >= self.n {
                return Err(Error::InvalidInput(format!("vertex out of range: {v}")));
            }
            in_s[v] = true;
        }
        let size = in_s.iter().filter(|&&b| b).count();
        if size == 0 || size == self.n {
            return Err(Error::InvalidCut);
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| in_s[e.u] != in_s[e.v])
            .map(|e| e.weight)
            .sum())
    }

    /// Total effective resistance `(1/2) sum_{u != v} Reff(u, v)`, defined on
    /// connected positive-weight support; equals `n * tr(L^dagger)`.
    pub fn total_effective_resistance(&self) -> Result<F> {
        let comp = self.positive_components();
        if self.n > 0 && comp.iter().any(|&c| c != comp[0]) {
            return Err(Error::Disconnected { s: 0, t: 0 });
        }
        let spec = sym_eig(&self.laplacian(true))?;
        let pinv = psd_fn_spectrum(&spec, PsdFn::Pinv)?;
        let mut total = F::zero();
        for s in 0..self.n {
            for t in (s + 1)..self.n {
                let mut b = vec![F::zero(); self.n];
                b[s] = F::one();
                b[t] = -F::one();
                total += pinv.quad_form(&b);
            }
        }
        Ok(total)
    }

    /// Replaces the edge weights, keeping endpoints and costs.
    pub fn with_weights(&self, weights: &[F]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionError(format!(
                "{} weights for {} edges",
                weights.len(),
                self.edges.len()
            )));
        }
        let edges = self
            .edges
            .iter()
            .zip(weights.iter())
            .map(|(e, &w)| Edge { weight: w, ..*e })
            .collect();
        Graph::new(self.n, edges)
    }

    /// Subgraph on the given edge indices (same vertex set).
    pub fn edge_subgraph(&self, indices: &[usize]) -> Result<Self> {
        let edges = indices
            .iter()
            .map(|&i| {
                self.edges
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("edge index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Graph::new(self.n, edges)
    }
}

/// Parses the edge-list text format: a header line `n m`, then `m` lines
/// `u v weight cost`. Blank lines and `#` comments are skipped. Errors cite
/// the 1-based line number.
pub fn parse_edge_list<F: Scalar>(text: &str) -> Result<Graph<F>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_no, header) = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty edge-list file".into()))?;
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::InvalidInput(format!("line {header_no}: bad vertex count")))?;
    let m: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::InvalidInput(format!("line {header_no}: bad edge count")))?;

    let mut edges = Vec::with_capacity(m);
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "line {line_no}: expected 'u v weight cost', got {} fields",
                fields.len()
            )));
        }
        let parse_usize = |t: &str| -> Result<usize> {
            t.parse()
                .map_err(|_| Error::InvalidInput(format!("line {line_no}: bad vertex '{t}'")))
        };
        let parse_f = |t: &str| -> Result<F> {
            t.parse::<f64>()
                .map(F::cast)
                .map_err(|_| Error::InvalidInput(format!("line {line_no}: bad number '{t}'")))
        };
        edges.push(Edge {
            u: parse_usize(fields[0])?,
            v: parse_usize(fields[1])?,
            weight: parse_f(fields[2])?,
            cost: parse_f(fields[3])?,
        });
    }
    if edges.len() != m {
        return Err(Error::InvalidInput(format!(
            "header declares {m} edges but file has {}",
            edges.len()
        )));
    }
    Graph::new(n, edges)
}

/// Renders a graph in the edge-list text format.
pub fn format_edge_list<F: Scalar>(g: &Graph<F>) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for e in g.edges() {
        out.push_str(&format!(
            "{} {} {:?} {:?}\n",
            e.u,
            e.v,
            e.weight.to_f64_lossy(),
            e.cost.to_f64_lossy()
        ));
    }
    out
}
