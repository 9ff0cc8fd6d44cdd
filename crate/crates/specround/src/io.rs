//! File formats: instance/design/network JSON schemas, result envelopes,
//! and CSV emission.
//!
//! JSON numbers are written with 17 significant digits so doubles round-trip
//! exactly and reruns with the same seed produce byte-identical files.

use std::io::Write as IoWrite;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::expdesign::{DesignProblem, DesignRounding, ObjectiveTag};
use crate::graph::{parse_edge_list, Graph};
use crate::instance::{LinearRows, VectorInstance};
use crate::linalg::SymMatrix;
use crate::netdesign::{NetworkDesignInstance, NetworkSolution};
use crate::rounding::{IterationRecord, RoundingCertificate};
use crate::sparsify::{AdditiveReport, SparsifierCertificate};

/// serde_json formatter printing every float with 17 significant digits.
#[derive(Clone, Debug, Default)]
pub struct SigDigitsFormatter;

impl Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + IoWrite>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + IoWrite>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}

/// Serializes with the 17-significant-digit float format.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitsFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::InvalidInput(format!("non-utf8 output: {e}")))
}

pub fn from_json_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad JSON: {e}")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LinearRowsFile {
    #[serde(alias = "A", alias = "B")]
    rows: Vec<Vec<f64>>,
    #[serde(alias = "a", alias = "b")]
    rhs: Vec<f64>,
}

impl From<LinearRowsFile> for LinearRows<f64> {
    fn from(f: LinearRowsFile) -> Self {
        LinearRows { rows: f.rows, rhs: f.rhs }
    }
}

/// On-disk instance schema: `n`, `m`, `vectors` (`m * n`, row-major), `x`,
/// `c`, optional `packing {A, a}` and `covering {B, b}`.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    m: usize,
    vectors: Vec<f64>,
    x: Vec<f64>,
    c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    packing: Option<LinearRowsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    covering: Option<LinearRowsFile>,
}

pub fn parse_instance(text: &str) -> Result<VectorInstance<f64>> {
    let file: InstanceFile = from_json_str(text)?;
    if file.vectors.len() != file.n * file.m {
        return Err(Error::InvalidInput(format!(
            "vectors array has {} entries, expected m * n = {}",
            file.vectors.len(),
            file.n * file.m
        )));
    }
    let vectors = (0..file.m)
        .map(|i| file.vectors[i * file.n..(i + 1) * file.n].to_vec())
        .collect();
    let inst = VectorInstance {
        dim: file.n,
        vectors,
        weights: file.x,
        costs: file.c,
        packing: file.packing.map(Into::into),
        covering: file.covering.map(Into::into),
    };
    inst.validate()?;
    Ok(inst)
}

pub fn format_instance(inst: &VectorInstance<f64>) -> Result<String> {
    let file = InstanceFile {
        n: inst.dim,
        m: inst.len(),
        vectors: inst.vectors.iter().flatten().copied().collect(),
        x: inst.weights.clone(),
        c: inst.costs.clone(),
        packing: inst.packing.as_ref().map(|p| LinearRowsFile {
            rows: p.rows.clone(),
            rhs: p.rhs.clone(),
        }),
        covering: inst.covering.as_ref().map(|c| LinearRowsFile {
            rows: c.rows.clone(),
            rhs: c.rhs.clone(),
        }),
    };
    to_json_string(&file)
}

/// On-disk design schema: the instance fields plus `budget`, `tag`, and
/// optional `v_rows`.
#[derive(Debug, Serialize, Deserialize)]
struct DesignFile {
    n: usize,
    m: usize,
    vectors: Vec<f64>,
    #[serde(default)]
    x: Option<Vec<f64>>,
    c: Vec<f64>,
    budget: f64,
    tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_rows: Option<Vec<Vec<f64>>>,
}

pub fn parse_design(text: &str) -> Result<DesignProblem<f64>> {
    let file: DesignFile = from_json_str(text)?;
    if file.vectors.len() != file.n * file.m {
        return Err(Error::InvalidInput(format!(
            "vectors array has {} entries, expected m * n = {}",
            file.vectors.len(),
            file.n * file.m
        )));
    }
    let vectors = (0..file.m)
        .map(|i| file.vectors[i * file.n..(i + 1) * file.n].to_vec())
        .collect();
    let weights = file.x.unwrap_or_else(|| vec![0.0; file.m]);
    let instance = VectorInstance::new(file.n, vectors, weights, file.c)?;
    Ok(DesignProblem {
        instance,
        budget: file.budget,
        tag: file.tag.parse::<ObjectiveTag>()?,
        v_rows: file.v_rows,
    })
}

/// Sidecar schema for network design, paired with an edge-list graph file.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct NetworkSidecar {
    #[serde(default)]
    pub connectivity: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_bounds: Option<Vec<f64>>,
    #[serde(default)]
    pub reff_bounds: Vec<(usize, usize, f64)>,
    /// Dense `n x n` rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_bound: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packing: Option<LinearRowsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covering: Option<LinearRowsFile>,
}

pub fn parse_network(graph_text: &str, sidecar_text: Option<&str>) -> Result<NetworkDesignInstance<f64>> {
    let graph: Graph<f64> = parse_edge_list(graph_text)?;
    let sidecar: NetworkSidecar = match sidecar_text {
        Some(t) => from_json_str(t)?,
        None => NetworkSidecar::default(),
    };
    let spectral_bound = sidecar
        .spectral_bound
        .map(|rows| {
            let n = rows.len();
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            SymMatrix::from_rows(n, &flat)
        })
        .transpose()?;
    let nd = NetworkDesignInstance {
        graph,
        connectivity: sidecar.connectivity,
        degree_bounds: sidecar.degree_bounds,
        reff_bounds: sidecar.reff_bounds,
        spectral_bound,
        lambda2_bound: sidecar.lambda2_bound,
        packing: sidecar.packing.map(Into::into),
        covering: sidecar.covering.map(Into::into),
    };
    nd.validate()?;
    Ok(nd)
}

/// Result envelope written by the CLI; `verify` dispatches on `kind`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResultFile {
    Round {
        eps: f64,
        seed: u64,
        q_cap: f64,
        certificate: RoundingCertificate,
    },
    ExactRound {
        eps: f64,
        seed: u64,
        q_cap: f64,
        certificate: RoundingCertificate,
    },
    Sparsify {
        eps: f64,
        q: f64,
        certificate: SparsifierCertificate,
    },
    SparsifyVerify {
        report: AdditiveReport,
    },
    Design {
        eps: f64,
        seed: u64,
        budget: f64,
        tag: String,
        x: Vec<f64>,
        objective: f64,
        rounding: DesignRounding,
    },
    Netdesign {
        eps: f64,
        seed: u64,
        solution: Box<NetworkSolution>,
    },
}

/// Per-iteration history CSV: `t, lambda_min, cost, delta_plus, delta_minus`.
pub fn history_csv(history: &[IterationRecord]) -> String {
    let mut out = String::from("t,lambda_min,cost,delta_plus,delta_minus\n");
    for rec in history {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            rec.t, rec.lambda_min, rec.cost, rec.delta_plus, rec.delta_minus
        ));
    }
    out
}

/// Concentration report CSV row set:
/// `eta, empirical_upper, bound_upper, empirical_lower, bound_lower`.
pub fn concheck_csv(rows: &[crate::concentration::TailCheck]) -> String {
    let mut out = String::from("eta,empirical_upper,bound_upper,empirical_lower,bound_lower\n");
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.eta, r.empirical_upper, r.bound_upper, r.empirical_lower, r.bound_lower
        ));
    }
    out
}
