//! Batch front end: rounding, sparsification, design, network design,
//! certificate verification, and the concentration harness.
//!
//! Exit codes: 0 certified success, 1 input error, 2 certificate violation
//! or failed verification, 3 iteration cap exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use specround::concentration::{
    simulate_and_check, DriftChain, SelfAdjustingParams, TailCheck,
};
use specround::error::Error;
use specround::expdesign::{round_design, solve_relaxation};
use specround::graph::parse_edge_list;
use specround::io;
use specround::netdesign::round_network;
use specround::rounding::{exact_round, randomized_swap, CERTIFICATE_SLACK};
use specround::signing::verify_two_sided;
use specround::sparsify::{greedy_additive_sparsify, verify_additive};

#[derive(Parser)]
#[command(
    name = "specround",
    about = "Certified spectral rounding: one-sided rounding, network design, \
             experimental design, additive sparsification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate one-sided rounding of an isotropic instance.
    Round {
        /// Instance JSON path.
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Iteration cap multiplier (cap = q_cap * k / eps).
        #[arg(long, default_value_t = 4.0)]
        q_cap: f64,
        /// Result JSON path (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write a per-iteration CSV next to the output.
        #[arg(long)]
        emit_history: bool,
    },
    /// Exact one-sided rounding (lambda_min >= 1).
    ExactRound {
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4.0)]
        q_cap: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        emit_history: bool,
    },
    /// Greedy additive unweighted sparsification of an edge-list graph.
    Sparsify {
        /// Edge-list path ("n m" header, then "u v weight cost" lines).
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Learning-rate constant.
        #[arg(long, default_value_t = 0.1)]
        q: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve the budgeted design relaxation and round it.
    Design {
        /// Design JSON path.
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Round a fractional network-design solution.
    Netdesign {
        /// Edge-list path; weights hold the fractional solution.
        graph: PathBuf,
        /// Constraint sidecar JSON path.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4.0)]
        q_cap: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        emit_history: bool,
    },
    /// Re-verify an emitted result file against its inputs.
    Verify {
        /// Result JSON path.
        result: PathBuf,
        /// Instance JSON (round, exact-round, design results).
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Edge-list graph (sparsify, netdesign results).
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Two-sided verification band (checks the selection against
        /// (1 +- 8 eps) instead of the one-sided certificate).
        #[arg(long)]
        two_sided_eps: Option<f64>,
    },
    /// Empirically validate the concentration bounds; writes a CSV report.
    Concheck {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SPECROUND_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        } else {
            eprintln!("warning: SPECROUND_THREADS is not an integer; ignoring");
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::IterationCapExceeded { .. } => 3u8,
                Error::CertificateViolation(_) => 2u8,
                _ => 1u8,
            })
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn write_out(path: &Option<PathBuf>, contents: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, contents)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display()))),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn history_path(output: &Option<PathBuf>) -> PathBuf {
    match output {
        Some(p) => p.with_extension("history.csv"),
        None => PathBuf::from("history.csv"),
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Round { input, eps, seed, q_cap, output, emit_history } => {
            let inst = io::parse_instance(&read(&input)?)?;
            let outcome = randomized_swap(&inst, eps, seed, q_cap)?;
            if emit_history {
                let p = history_path(&output);
                std::fs::write(&p, io::history_csv(&outcome.history))
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
            }
            let env = io::ResultFile::Round { eps, seed, q_cap, certificate: outcome.certificate };
            write_out(&output, &io::to_json_string(&env)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ExactRound { input, eps, seed, q_cap, output, emit_history } => {
            let inst = io::parse_instance(&read(&input)?)?;
            let outcome = exact_round(&inst, eps, seed, q_cap)?;
            if emit_history {
                let p = history_path(&output);
                std::fs::write(&p, io::history_csv(&outcome.history))
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
            }
            let env =
                io::ResultFile::ExactRound { eps, seed, q_cap, certificate: outcome.certificate };
            write_out(&output, &io::to_json_string(&env)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sparsify { input, eps, q, output } => {
            let graph = parse_edge_list::<f64>(&read(&input)?)?;
            let certificate = greedy_additive_sparsify(&graph, eps, q)?;
            let env = io::ResultFile::Sparsify { eps, q, certificate };
            write_out(&output, &io::to_json_string(&env)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Design { input, eps, seed, iters, tol, output } => {
            let problem = io::parse_design(&read(&input)?)?;
            let relaxed = solve_relaxation(&problem, iters, tol)?;
            let rounding = round_design(&problem, &relaxed.x, eps, seed)?;
            let env = io::ResultFile::Design {
                eps,
                seed,
                budget: problem.budget,
                tag: format!("{:?}", problem.tag),
                x: relaxed.x,
                objective: relaxed.objective,
                rounding,
            };
            write_out(&output, &io::to_json_string(&env)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Netdesign { graph, sidecar, eps, seed, q_cap, output, emit_history } => {
            let sidecar_text = sidecar.as_deref().map(read).transpose()?;
            let nd = io::parse_network(&read(&graph)?, sidecar_text.as_deref())?;
            let solution = round_network(&nd, eps, seed, q_cap)?;
            if emit_history {
                let p = history_path(&output);
                std::fs::write(&p, io::history_csv(&solution.history))
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
            }
            let all_pass = solution.report.implications.pass && solution.report.cost_bound_pass;
            let env = io::ResultFile::Netdesign { eps, seed, solution: Box::new(solution) };
            write_out(&output, &io::to_json_string(&env)?)?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Verify { result, instance, graph, sidecar, two_sided_eps } => {
            verify(&result, instance.as_deref(), graph.as_deref(), sidecar.as_deref(), two_sided_eps)
        }
        Command::Concheck { trials, seed, output } => concheck(trials, seed, output),
    }
}

fn verify(
    result: &Path,
    instance: Option<&Path>,
    graph: Option<&Path>,
    sidecar: Option<&Path>,
    two_sided_eps: Option<f64>,
) -> Result<ExitCode, Error> {
    let envelope: io::ResultFile = io::from_json_str(&read(result)?)?;
    let need_instance = || -> Result<specround::VectorInstance64, Error> {
        let path = instance
            .ok_or_else(|| Error::InvalidInput("--instance required for this result kind".into()))?;
        io::parse_instance(&read(path)?)
    };
    let mut failures: Vec<String> = Vec::new();
    match envelope {
        io::ResultFile::Round { eps, certificate, .. }
        | io::ResultFile::ExactRound { eps, certificate, .. }
            if two_sided_eps.is_some() =>
        {
            let _ = eps;
            let inst = need_instance()?;
            let mut z = vec![false; inst.len()];
            for &i in &certificate.selected {
                z[i] = true;
            }
            let report = verify_two_sided(&inst, &z, two_sided_eps.unwrap())?;
            println!("{}", io::to_json_string(&report)?);
            if !report.pass {
                failures.push("two-sided bands".into());
            }
        }
        io::ResultFile::Round { eps, certificate, .. } => {
            let inst = need_instance()?;
            let moment = inst.selection_moment(&certificate.selected);
            let lmin = specround::linalg::sym_eig(&moment)?.lambda_min();
            if lmin < 1.0 - 2.0 * eps - CERTIFICATE_SLACK {
                failures.push(format!("lambda_min {lmin} below 1 - 2 eps"));
            }
            if (lmin - certificate.lambda_min).abs() > 1e-7 {
                failures.push("stored lambda_min does not match".into());
            }
            let cost = inst.selection_cost(&certificate.selected);
            if (cost - certificate.cost).abs() > 1e-9 * (1.0 + cost.abs()) {
                failures.push("stored cost does not match".into());
            }
            if certificate.regret_slack < -CERTIFICATE_SLACK {
                failures.push("regret slack negative".into());
            }
        }
        io::ResultFile::ExactRound { certificate, .. } => {
            let inst = need_instance()?;
            let moment = inst.selection_moment(&certificate.selected);
            let lmin = specround::linalg::sym_eig(&moment)?.lambda_min();
            if lmin < 1.0 - CERTIFICATE_SLACK {
                failures.push(format!("lambda_min {lmin} below 1"));
            }
            if (lmin - certificate.lambda_min).abs() > 1e-7 {
                failures.push("stored lambda_min does not match".into());
            }
            let cost = inst.selection_cost(&certificate.selected);
            if (cost - certificate.cost).abs() > 1e-9 * (1.0 + cost.abs()) {
                failures.push("stored cost does not match".into());
            }
            if certificate.regret_slack < -CERTIFICATE_SLACK {
                failures.push("regret slack negative".into());
            }
        }
        io::ResultFile::Sparsify { certificate, .. } => {
            let path = graph
                .ok_or_else(|| Error::InvalidInput("--graph required for sparsify results".into()))?;
            let g = parse_edge_list::<f64>(&read(path)?)?;
            let claimed = certificate
                .upper_residual
                .max(-certificate.lower_residual)
                .max(0.0);
            let report = verify_additive(&g, &certificate.edges, claimed)?;
            if (report.upper_residual - certificate.upper_residual).abs() > 1e-9 {
                failures.push("upper residual does not match".into());
            }
            if (report.lower_residual - certificate.lower_residual).abs() > 1e-9 {
                failures.push("lower residual does not match".into());
            }
            if !report.pass {
                failures.push("residuals exceed claim".into());
            }
        }
        io::ResultFile::SparsifyVerify { .. } => {
            return Err(Error::InvalidInput(
                "a sparsify-verify report is not re-verifiable".into(),
            ));
        }
        io::ResultFile::Design { budget, rounding, .. } => {
            let path = instance
                .ok_or_else(|| Error::InvalidInput("--instance required for design results".into()))?;
            let problem = io::parse_design(&read(path)?)?;
            let cost: f64 = rounding
                .selected
                .iter()
                .map(|&i| problem.instance.costs[i])
                .sum();
            if cost > budget + 1e-9 {
                failures.push(format!("cost {cost} exceeds budget {budget}"));
            }
            if (cost - rounding.cost).abs() > 1e-9 * (1.0 + cost.abs()) {
                failures.push("stored cost does not match".into());
            }
        }
        io::ResultFile::Netdesign { eps, solution, .. } => {
            let path = graph
                .ok_or_else(|| Error::InvalidInput("--graph required for netdesign results".into()))?;
            let sidecar_text = sidecar.map(read).transpose()?;
            let nd = io::parse_network(&read(path)?, sidecar_text.as_deref())?;
            let report =
                specround::netdesign::verify_spectral_implications(&nd, &solution.z, 1e-7)?;
            if !report.pass {
                failures.push("spectral implications fail".into());
            }
            if solution.certificate.lambda_min < 1.0 - CERTIFICATE_SLACK {
                failures.push("certificate lambda_min below 1".into());
            }
            let _ = eps;
        }
    }
    if failures.is_empty() {
        println!("verify: ok");
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &failures {
            eprintln!("verify: FAIL: {f}");
        }
        Ok(ExitCode::from(2))
    }
}

fn concheck(trials: usize, seed: u64, output: Option<PathBuf>) -> Result<ExitCode, Error> {
    // Three drift chains whose hypotheses hold surely, each checked at
    // eta in {1, 2, 4}.
    let chains = [
        DriftChain { gamma: 0.5, step: 0.5, horizon: 64 },
        DriftChain { gamma: 0.25, step: 0.5, horizon: 128 },
        DriftChain { gamma: 0.1, step: 0.4, horizon: 320 },
    ];
    let mut rows: Vec<TailCheck> = Vec::new();
    let mut all_pass = true;
    for (chain_index, chain) in chains.iter().enumerate() {
        for eta in [1.0, 2.0, 4.0] {
            let params = SelfAdjustingParams {
                gamma: chain.gamma,
                beta_u: 0.0,
                beta_l: 0.0,
                sigma: chain.required_sigma(),
                eta,
            };
            let check =
                simulate_and_check(chain, &params, trials, seed.wrapping_add(chain_index as u64))?;
            println!(
                "chain {chain_index} eta {eta}: upper {:.3e} <= {:.3e}, lower {:.3e} <= {:.3e} [{}]",
                check.empirical_upper,
                check.bound_upper + check.tolerance_upper,
                check.empirical_lower,
                check.bound_lower + check.tolerance_lower,
                if check.pass { "ok" } else { "FAIL" }
            );
            all_pass &= check.pass;
            rows.push(check);
        }
    }
    let csv = io::concheck_csv(&rows);
    match output {
        Some(p) => std::fs::write(&p, csv)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?,
        None => print!("{csv}"),
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}
