//! Acceptance suite: one test per shipping criterion, each printing a
//! pass/fail line (visible with `--nocapture`). Tolerances are pinned in the
//! assertions, not configurable.

use std::time::Instant;

use specround::concentration::{
    check_rounding_drift, simulate_and_check, DriftChain, SelfAdjustingParams,
};
use specround::graph::Graph;
use specround::instance::VectorInstance;
use specround::rounding::{exact_cost_bound, exact_round, randomized_swap};
use specround::rng::SeededRng;
use specround::signing::verify_two_sided;
use specround::sparsify::greedy_additive_sparsify;

const SLACK: f64 = 1e-7;

/// Random isotropic instance: gaussian vectors, weights in [0.05, 0.95],
/// whitened into isotropic position.
fn random_isotropic(
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

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

/// 1. Exact rounding guarantee on 50 random isotropic instances
///    (n = 10, m = 150, costs uniform in [1, 2]), eps = 0.2:
///    lambda_min >= 1 - 1e-7 and the cost upper bound in at least 49 of 50
///    seeded runs, each under 10 seconds.
#[test]
fn criterion_1_exact_rounding_guarantee() {
    let eps = 0.2;
    let mut successes = 0;
    let mut slow = 0;
    for seed in 0..50u64 {
        let inst = random_isotropic(10, 150, 1000 + seed, (1.0, 2.0));
        let start = Instant::now();
        let ok = match exact_round(&inst, eps, seed, 4.0) {
            Ok(out) => {
                let lambda_ok = out.certificate.lambda_min >= 1.0 - SLACK;
                let cost_ok = out.certificate.cost <= exact_cost_bound(&inst, eps);
                lambda_ok && cost_ok
            }
            Err(_) => false,
        };
        if start.elapsed().as_secs_f64() >= 10.0 {
            slow += 1;
        }
        if ok {
            successes += 1;
        }
    }
    let pass = successes >= 49 && slow == 0;
    report(
        "1 (exact rounding guarantee)",
        pass,
        &format!("{successes}/50 certified, {slow} runs at or over 10 s"),
    );
    assert!(pass);
}

/// 2. Termination: with q_cap = 4, at least 99% of 200 runs on the fixed
///    instance terminate under the cap; every terminating run also satisfies
///    the cost upper bound.
#[test]
fn criterion_2_termination_under_cap() {
    let eps = 0.2;
    let inst = random_isotropic(10, 150, 1000, (1.0, 2.0));
    let bound = exact_cost_bound(&inst, eps);
    let mut terminated = 0;
    let mut cost_ok = 0;
    for seed in 0..200u64 {
        match exact_round(&inst, eps, seed, 4.0) {
            Ok(out) => {
                terminated += 1;
                if out.certificate.cost <= bound {
                    cost_ok += 1;
                }
            }
            Err(specround::Error::IterationCapExceeded { .. }) => {}
            Err(e) => panic!("unexpected failure: {e}"),
        }
    }
    let pass = terminated >= 198 && cost_ok == terminated;
    report(
        "2 (termination under qk/eps)",
        pass,
        &format!("{terminated}/200 under cap, {cost_ok} within the cost bound"),
    );
    assert!(pass);
}

/// 3. Per-run regret certificate: regret_slack >= -1e-7 in 100% of runs.
#[test]
fn criterion_3_regret_certificate() {
    let mut runs = 0;
    let mut ok = 0;
    for seed in 0..30u64 {
        let inst = random_isotropic(6, 80, 300 + seed, (1.0, 2.0));
        if let Ok(out) = randomized_swap(&inst, 0.15, seed, 4.0) {
            runs += 1;
            if out.certificate.regret_slack >= -SLACK {
                ok += 1;
            }
        }
        if let Ok(out) = exact_round(&inst, 0.2, seed, 4.0) {
            runs += 1;
            if out.certificate.regret_slack >= -SLACK {
                ok += 1;
            }
        }
    }
    let pass = runs > 0 && ok == runs;
    report(
        "3 (regret certificate)",
        pass,
        &format!("{ok}/{runs} runs with slack >= -1e-7"),
    );
    assert!(pass);
}

/// 4. Tight example fixture: on the coordinate-pair instance (n = 8,
///    eps' = 0.2) the exact rounding must select all 2n vectors and pay
///    exactly n * c_inf.
#[test]
fn criterion_4_tight_example_fixture() {
    let n = 8;
    let eps_prime = 0.2;
    let mut vectors = Vec::new();
    let mut weights = Vec::new();
    let mut costs = Vec::new();
    for i in 0..n {
        let mut heavy = vec![0.0; n];
        heavy[i] = (1.0f64 - eps_prime).sqrt();
        vectors.push(heavy);
        weights.push(1.0);
        costs.push(0.0);
        let mut light = vec![0.0; n];
        light[i] = 1.0;
        vectors.push(light);
        weights.push(eps_prime);
        costs.push(1.0);
    }
    let inst = VectorInstance::new(n, vectors, weights, costs).unwrap();
    assert!(inst.is_isotropic());
    let out = exact_round(&inst, 0.05, 42, 4.0).unwrap();
    let all = out.certificate.selected == (0..2 * n).collect::<Vec<_>>();
    let cost_exact = out.certificate.cost == n as f64;
    let pass = all && cost_exact && out.certificate.lambda_min >= 1.0 - SLACK;
    report(
        "4 (tight example fixture)",
        pass,
        &format!(
            "selected {} of {} vectors, cost {}",
            out.certificate.selected.len(),
            2 * n,
            out.certificate.cost
        ),
    );
    assert!(pass);
}

/// 5. Tight example scaling: the complete-graph instance with n = 10,
///    k = 5n encoded as per-edge vector copies; with eps = sqrt(n / k) the
///    cost satisfies k <= cost <= (1 + 6 eps) k + 15 n / eps on 20 seeds.
#[test]
fn criterion_5_tight_example_scaling() {
    let n = 10usize;
    let k = 5 * n;
    let eps = (n as f64 / k as f64).sqrt();
    // x_ij = 2k / (n (n - 1)) exceeds one, so every edge vector is split
    // into ceil(x) unit-cost copies with the weight divided evenly.
    let g = Graph::<f64>::complete(n);
    let x_edge = 2.0 * k as f64 / (n as f64 * (n - 1) as f64);
    let copies = x_edge.ceil() as usize;
    let scale = ((n - 1) as f64 / (2.0 * k as f64)).sqrt();
    // Orthonormal coordinates for the subspace orthogonal to the all-one
    // vector, built from the Laplacian eigenbasis of K_n.
    let iso = {
        let mut vectors = Vec::new();
        let mut weights = Vec::new();
        let mut costs = Vec::new();
        for e in 0..g.m() {
            let b = g.incidence_vector(e);
            let v: Vec<f64> = b.iter().map(|&c| c * scale).collect();
            for _ in 0..copies {
                vectors.push(v.clone());
                weights.push(x_edge / copies as f64);
                costs.push(1.0);
            }
        }
        VectorInstance::new(n, vectors, weights, costs)
            .unwrap()
            .whiten()
            .unwrap()
    };
    assert_eq!(iso.dim, n - 1);
    assert!(iso.is_isotropic());
    let budget_total: f64 = iso.total_weighted_cost();
    assert!((budget_total - k as f64).abs() < 1e-9, "<c, x> must equal k");

    let upper = (1.0 + 6.0 * eps) * k as f64 + 15.0 * n as f64 / eps;
    let mut pass = true;
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::NEG_INFINITY;
    for seed in 0..20u64 {
        let out = exact_round(&iso, eps, seed, 4.0).unwrap();
        worst_low = worst_low.min(out.certificate.cost);
        worst_high = worst_high.max(out.certificate.cost);
        if out.certificate.cost < k as f64 || out.certificate.cost > upper {
            pass = false;
        }
        if out.certificate.lambda_min < 1.0 - SLACK {
            pass = false;
        }
    }
    report(
        "5 (tight example scaling)",
        pass,
        &format!(
            "cost range [{worst_low}, {worst_high}] inside [{k}, {upper:.1}] over 20 seeds"
        ),
    );
    assert!(pass);
}

/// 6. Sparsifier on K_20 with eps = 0.5, q = 0.1: exactly ceil(n / eps^2) =
///    80 distinct edges, residual eigenvalues within 10 eps d on both sides,
///    per-iteration selection and width bounds, under 30 seconds.
#[test]
fn criterion_6_sparsifier_k20() {
    let g = Graph::<f64>::complete(20);
    let eps = 0.5;
    let start = Instant::now();
    let cert = greedy_additive_sparsify(&g, eps, 0.1).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut sorted = cert.edges.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let distinct = sorted.len() == cert.edges.len();
    let size_ok = cert.m_tilde == 80 && cert.edges.len() == 80;
    // Residual fields are already divided by d; the cap is 10 eps.
    let upper_ok = cert.upper_residual <= 10.0 * eps;
    let lower_ok = cert.lower_residual >= -10.0 * eps;
    let iteration_ok = cert.history.iter().all(|it| {
        it.inner_product >= it.selection_floor - 1e-9 && it.width <= 0.25f64.min(10.0 * eps) + 1e-9
    });
    let time_ok = elapsed < 30.0;
    let pass = distinct && size_ok && upper_ok && lower_ok && iteration_ok && time_ok;
    report(
        "6 (sparsifier on K_20)",
        pass,
        &format!(
            "|F| = {}, residuals [{:.4}, {:.4}] * d, width constant {:.3}, {elapsed:.2} s",
            cert.m_tilde, cert.lower_residual, cert.upper_residual, cert.width_constant
        ),
    );
    assert!(pass);
}

/// 7. Network pipeline on unit K_6 with x = 1/2 and pairwise requirement 2:
///    exhaustive verification over all 31 cuts plus the norm-equals-Reff
///    identity, 10 seeds out of 10.
#[test]
fn criterion_7_network_pipeline_k6() {
    use specround::graph::Edge;
    use specround::netdesign::{graph_to_vectors, round_network, NetworkDesignInstance};

    let base = Graph::<f64>::complete(6);
    let edges: Vec<Edge<f64>> = base
        .edges()
        .iter()
        .map(|e| Edge { weight: 0.5, cost: 1.0, ..*e })
        .collect();
    let graph = Graph::new(6, edges).unwrap();
    let connectivity: Vec<(usize, usize, f64)> = (0..6)
        .flat_map(|u| ((u + 1)..6).map(move |v| (u, v, 2.0)))
        .collect();
    let nd = NetworkDesignInstance {
        graph,
        connectivity,
        degree_bounds: None,
        reff_bounds: Vec::new(),
        spectral_bound: None,
        lambda2_bound: None,
        packing: None,
        covering: None,
    };

    // Norm-equals-Reff on the reduction itself.
    let reduced = graph_to_vectors(&nd).unwrap();
    let mut reff_ok = true;
    for (e, v) in reduced.vectors.iter().enumerate() {
        let norm_sq: f64 = v.iter().map(|&c| c * c).sum();
        let edge = &nd.graph.edges()[e];
        let reff = nd.graph.effective_resistance(edge.u, edge.v).unwrap();
        if (norm_sq - reff).abs() > 1e-8 {
            reff_ok = false;
        }
    }

    let mut passes = 0;
    for seed in 0..10u64 {
        let sol = round_network(&nd, 0.2, seed, 4.0).unwrap();
        let cuts = &sol.report.implications.connectivity_cuts;
        if cuts.pass && cuts.note.contains("31") && sol.report.implications.pass {
            passes += 1;
        }
    }
    let pass = reff_ok && passes == 10;
    report(
        "7 (network pipeline on K_6)",
        pass,
        &format!("{passes}/10 seeds through exhaustive cut verification, Reff identity {reff_ok}"),
    );
    assert!(pass);
}

/// 8. Budgeted design: E-design with n = 6, m = 200, eps = 0.5 and the
///    minimum allowed budget C = 15 n c_inf / eps^2; the budget holds in
///    100% of accepted runs and the lambda_min ratio stays above
///    1 - 4 eps - 1e-7.
#[test]
fn criterion_8_budgeted_design() {
    use specround::expdesign::{round_design, solve_relaxation, DesignProblem, ObjectiveTag};

    let n = 6;
    let m = 200;
    let eps = 0.5;
    let mut rng = SeededRng::new(8080);
    let vectors: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.normal_f64()).collect())
        .collect();
    let costs: Vec<f64> = (0..m).map(|_| 1.0 + rng.uniform_f64()).collect();
    let c_inf = costs.iter().cloned().fold(0.0, f64::max);
    let budget = 15.0 * n as f64 * c_inf / (eps * eps);
    let problem = DesignProblem {
        instance: VectorInstance::new(n, vectors, vec![0.0; m], costs).unwrap(),
        budget,
        tag: ObjectiveTag::E,
        v_rows: None,
    };
    let relaxed = solve_relaxation(&problem, 300, 1e-8).unwrap();
    let threshold = 1.0 - 4.0 * eps - SLACK;
    let mut accepted = 0;
    let mut ok = 0;
    for seed in 0..20u64 {
        match round_design(&problem, &relaxed.x, eps, seed) {
            Ok(out) => {
                accepted += 1;
                if out.cost <= budget && out.lambda_min_ratio >= threshold {
                    ok += 1;
                }
            }
            Err(specround::Error::UnluckyRun { .. }) => {}
            Err(e) => panic!("unexpected failure: {e}"),
        }
    }
    let pass = accepted > 0 && ok == accepted;
    report(
        "8 (budgeted design)",
        pass,
        &format!("{ok}/{accepted} accepted runs within budget {budget:.1} and ratio bound"),
    );
    assert!(pass);
}

/// 9. Concentration harness: three synthetic self-adjusting chains checked
///    at eta in {1, 2, 4} with 1e5 trials each, empirical tails within three
///    standard errors of the closed-form bounds; and the rounding cost
///    process satisfies the exact drift sandwich at every logged iteration.
#[test]
fn criterion_9_concentration_harness() {
    let chains = [
        DriftChain { gamma: 0.5, step: 0.5, horizon: 64 },
        DriftChain { gamma: 0.25, step: 0.5, horizon: 128 },
        DriftChain { gamma: 0.1, step: 0.4, horizon: 320 },
    ];
    let mut tails_ok = true;
    for (i, chain) in chains.iter().enumerate() {
        for eta in [1.0, 2.0, 4.0] {
            let params = SelfAdjustingParams {
                gamma: chain.gamma,
                beta_u: 0.0,
                beta_l: 0.0,
                sigma: chain.required_sigma(),
                eta,
            };
            let check = simulate_and_check(chain, &params, 100_000, 900 + i as u64).unwrap();
            if !check.pass {
                tails_ok = false;
            }
        }
    }

    // Rounding cost process: exact drift sandwich on a logged run (the
    // tighter eps forces a long history).
    let inst = random_isotropic(10, 150, 1000, (1.0, 2.0));
    let eps = 0.1;
    let out = randomized_swap(&inst, eps, 5, 4.0).unwrap();
    let k = inst.len() as f64 + 2.0 * inst.dim as f64 / eps;
    let drift = check_rounding_drift(
        &out.history,
        inst.total_weighted_cost(),
        k,
        inst.dim,
        eps,
        inst.max_cost(),
        1e-9,
    );
    let pass = tails_ok && drift.pass && drift.iterations > 0;
    report(
        "9 (concentration harness)",
        pass,
        &format!(
            "synthetic tails ok: {tails_ok}; drift sandwich over {} iterations, \
             violations ({:.2e}, {:.2e})",
            drift.iterations, drift.max_lower_violation, drift.max_upper_violation
        ),
    );
    assert!(pass);
}

/// 10. Oracle equivalence at micro scale (n = 2, m <= 12): exhaustive
///     enumeration with the closed-form 2x2 spectrum confirms both the
///     two-sided verifier's decisions and that the exact rounding output
///     lies in the feasible set.
#[test]
fn criterion_10_micro_oracle_equivalence() {
    let m = 12;
    let inst = random_isotropic(2, m, 777, (0.5, 1.5));
    let eps = 0.1;
    let band = 8.0 * eps;
    let cx = inst.total_weighted_cost();

    // Closed-form 2x2 spectrum per selection mask.
    let spectrum_of = |mask: u32| -> (f64, f64, f64) {
        let (mut a, mut b, mut d, mut cost) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..m {
            if mask >> i & 1 == 1 {
                let v = &inst.vectors[i];
                a += v[0] * v[0];
                b += v[0] * v[1];
                d += v[1] * v[1];
                cost += inst.costs[i];
            }
        }
        let tr = a + d;
        let disc = ((tr * tr - 4.0 * (a * d - b * b)).max(0.0)).sqrt();
        ((tr - disc) / 2.0, (tr + disc) / 2.0, cost)
    };

    let mut verifier_ok = true;
    let mut feasible = vec![false; 1 << m];
    for mask in 0..(1u32 << m) {
        let (lo, hi, cost) = spectrum_of(mask);
        feasible[mask as usize] = lo >= 1.0 - SLACK;
        let z: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
        let expect_spectral = lo >= 1.0 - band && hi <= 1.0 + band;
        let expect_cost = {
            let ratio = cost / cx;
            (1.0 - band..=1.0 + band).contains(&ratio)
        };
        let rep = verify_two_sided(&inst, &z, eps).unwrap();
        if rep.pass != (expect_spectral && expect_cost) {
            verifier_ok = false;
        }
    }

    let mut rounding_ok = true;
    for seed in 0..5u64 {
        let out = exact_round(&inst, 0.2, seed, 4.0).unwrap();
        let mut mask = 0u32;
        for &i in &out.certificate.selected {
            mask |= 1 << i;
        }
        if !feasible[mask as usize] {
            rounding_ok = false;
        }
    }
    let pass = verifier_ok && rounding_ok;
    report(
        "10 (micro oracle equivalence)",
        pass,
        &format!(
            "verifier decisions match enumeration over {} masks: {verifier_ok}; \
             exact rounding lands in the feasible set: {rounding_ok}",
            1u32 << m
        ),
    );
    assert!(pass);
}
