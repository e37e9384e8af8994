//! Acceptance suite. Every test writes one `PASS`/`FAIL` line for its
//! criterion to stderr before asserting. The line bypasses the test
//! harness's output capture, so it shows up in a plain `cargo test` run.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use clinr_core::bounds::{recursive_error_bound, recursive_gate_bound};
use clinr_core::clifford::{output_stabilizers, random_clifford, Pauli, PauliOperator};
use clinr_core::compiler::{compile, BlockKind};
use clinr_core::markov::MarkovVector;
use clinr_core::sim::{execute_ideal, run_shots, summarize, NoiseModel, SimOptions};
use clinr_core::sweep::{
    confirm, grid, markov_point, monte_carlo, ordering_agreement, pareto, within_factor,
    SweepConfig, SweepPoint, TreeShape,
};
use clinr_core::tree::{bounded_tree, capacity_t, threshold_r, CliNRTree, ImplConstants};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20261016;

fn emit(line: &str) {
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    emit(&format!(
        "criterion {id:>2} {:<4} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    ));
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

/// For a criterion whose pinned tolerance cannot be met by the exact
/// computation: the line reads FAIL, and the test asserts `exact` instead.
fn report_known_failure(id: u32, name: &str, pass: bool, detail: &str, reason: &str, exact: bool) {
    if pass {
        report(id, name, pass, detail);
        return;
    }
    emit(&format!(
        "criterion {id:>2} FAIL {name}: {detail} [known: {reason}]"
    ));
    assert!(
        exact,
        "criterion {id} ({name}) drifted from its exact value: {detail}"
    );
}

#[test]
fn c01_noiseless_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let pairs = 200;
    let mut mismatches = 0;
    for i in 0..pairs {
        let n = rng.gen_range(1..=5);
        let s = rng.gen_range(1..=60);
        let c = random_clifford(n, s, rng.gen()).unwrap();
        let tree = CliNRTree::random(s, 3, 3, 3, &mut rng);
        let program = compile(&c, &tree, i).unwrap();
        let got = execute_ideal(&program, &mut rng).unwrap();
        if got.canonical() != output_stabilizers(&c).unwrap().canonical() {
            mismatches += 1;
        }
    }
    report(
        1,
        "noiseless equivalence",
        mismatches == 0,
        &format!("{mismatches} mismatches over {pairs} (circuit, tree) pairs"),
    );
}

#[test]
fn c02_detection_rate() {
    let trials = 10_000u64;
    let n = 3;
    let c = random_clifford(n, 12, SEED).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    for r in 1..=4usize {
        let program = compile(&c, &CliNRTree::clinr1(12, r), SEED).unwrap();
        assert_eq!(program.blocks[0].kind, BlockKind::Rsp);
        // A single-qubit X on the resource state lies outside its group.
        let q = program.groups[0].qubits[n];
        let options = SimOptions {
            inject: Some((0, PauliOperator::single(program.total_qubits, q, Pauli::X))),
            ..SimOptions::default()
        };
        let results = run_shots(
            &program,
            &NoiseModel::noiseless(),
            &options,
            trials,
            SEED + r as u64,
        )
        .unwrap();
        let detected = results.iter().filter(|s| s.restarts() > 0).count() as f64;
        let rate = detected / trials as f64;
        let want = 1.0 - 0.5f64.powi(r as i32);
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        let ok = (rate - want).abs() <= 3.0 * sigma;
        pass &= ok;
        lines.push(format!("r={r} {rate:.4} vs {want:.4}"));
    }
    report(2, "detection rate 1-2^-r", pass, &lines.join(", "));
}

#[test]
fn c03_qubit_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut trees = vec![(CliNRTree::fig2a(8), 3)];
    for _ in 0..60 {
        let s = rng.gen_range(1..=40);
        trees.push((
            CliNRTree::random(s, 3, 3, 2, &mut rng),
            rng.gen_range(1..=5),
        ));
    }
    trees.push((CliNRTree::direct(9), 2));
    let mut bad = 0;
    for (tree, n) in &trees {
        let c = random_clifford(*n, tree.root_size(), rng.gen()).unwrap();
        let program = compile(&c, tree, 0).unwrap();
        if program.total_qubits != (2 * tree.depth() + 1) * n + 1 {
            bad += 1;
        }
    }
    let fig = compile(&random_clifford(3, 8, 1).unwrap(), &CliNRTree::fig2a(8), 0).unwrap();
    report(
        3,
        "qubit counts (2D+1)n+1",
        bad == 0 && fig.total_qubits == 16,
        &format!(
            "{bad} mismatches over {} trees; n=3, D=2 gives {}",
            trees.len(),
            fig.total_qubits
        ),
    );
}

#[test]
fn c04_bounded_tree_properties() {
    let k = ImplConstants::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut tested = 0;
    let mut failures = Vec::new();
    while tested < 100 {
        let p = 10f64.powf(rng.gen_range(-5.0..-2.0));
        let n = rng.gen_range(1..=100);
        let d = rng.gen_range(1..=4);
        let s = (rng.gen_range(1.0..50.0) / p).ceil() as usize;
        let Ok(t) = capacity_t(p, n, &k) else {
            continue;
        };
        let big_r = threshold_r(p, n, &k).unwrap();
        tested += 1;
        let tree = bounded_tree(s, p, n, d, &k).unwrap();
        let leaves = tree.levels().last().unwrap();
        let (lo, hi) = (
            (1.0 / (2.0 * p)).floor() as usize,
            (2.0 / (3.0 * p)).ceil() as usize,
        );
        let mut ok = tree.validate().is_empty()
            && leaves.iter().all(|v| (lo..=hi).contains(&v.s))
            && leaves.len() == (s as f64 / (2.0 / (3.0 * p))).ceil() as usize;
        for id in tree.vertex_ids() {
            if id.level == 0 {
                continue;
            }
            ok &= tree.r(id) == big_r && tree.children(id).len() <= t;
        }
        if !ok {
            failures.push(format!(
                "(s={s}, p={p:.3e}, n={n}, D={d}, sp={:.3})",
                s as f64 * p
            ));
        }
    }
    report(
        4,
        "bounded tree properties",
        failures.is_empty(),
        &format!(
            "{} of 100 tuples violate {}",
            failures.len(),
            failures.join(" ")
        ),
    );
}

#[test]
fn c05_bound_dominance() {
    let k = ImplConstants::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let shots = 2000;
    let mut bad = Vec::new();
    let mut vacuous = 0;
    for i in 0..50u64 {
        let n = rng.gen_range(2..=10);
        let s = rng.gen_range(20..=500);
        let p = 10f64.powf(rng.gen_range(-4.0..-2.0));
        let r = rng.gen_range(0..=4);
        let tree = if rng.gen_bool(0.5) {
            CliNRTree::uniform(s, rng.gen_range(1..=4), None, r).unwrap()
        } else {
            CliNRTree::uniform(s, rng.gen_range(1..=3), Some(rng.gen_range(2..=3)), r).unwrap()
        };
        let eb = recursive_error_bound(&tree, p, n, &k);
        let gb = recursive_gate_bound(&tree, p, n, &k);
        vacuous += usize::from(eb.vacuous || gb.vacuous);
        let c = random_clifford(n, s, rng.gen()).unwrap();
        let program = compile(&c, &tree, i).unwrap();
        let results = run_shots(
            &program,
            &NoiseModel::standard(p, false),
            &SimOptions::default(),
            shots,
            rng.gen(),
        )
        .unwrap();
        let mc = summarize(&program, &results);
        // With no observed failure the binomial error is zero; one failure
        // in the shot budget is the resolution floor.
        let p_sigma = mc.p_log_err.max(1.0 / shots as f64);
        if mc.p_log > eb.value + 3.0 * p_sigma || mc.omega_time > gb.value + 3.0 * mc.omega_time_err
        {
            bad.push(format!(
                "#{i} p {:.4}/{:.4} w {:.3}/{:.3}",
                mc.p_log, eb.value, mc.omega_time, gb.value
            ));
        }
    }
    report(
        5,
        "bound dominance",
        bad.is_empty(),
        &format!(
            "{} of 50 instances above a bound ({vacuous} vacuous) {}",
            bad.len(),
            bad.join(" ")
        ),
    );
}

#[test]
fn c06_markov_hand_calculation() {
    let v = MarkovVector::from_entries(vec![0.9, 0.1, 0.0])
        .unwrap()
        .step_check(0, 0.02, 0.01)
        .unwrap();
    let want = [0.873, 0.059, 0.068];
    let p_log = v.logical_rate().unwrap();
    let m0 = v.m_restart().unwrap()[0];
    let g = v.expected_gates(100.0, 10.0, 20.0, false).unwrap();
    let tol = 1e-3;
    let vector_ok = v
        .entries()
        .iter()
        .zip(want)
        .all(|(a, b)| (a - b).abs() <= tol);
    let rates_ok = (p_log - 0.0633).abs() <= tol && (m0 - 0.0730).abs() <= tol;
    let gates_ok = (g - 137.30).abs() <= tol;
    // The reference 137.30 is 130 + 100 (1/0.932 - 1) rounded to two
    // decimals; the unrounded value is 137.2961.
    let exact = 130.0 + 100.0 * (1.0 / 0.932 - 1.0);
    report_known_failure(
        6,
        "Markov hand calculation",
        vector_ok && rates_ok && gates_ok,
        &format!(
            "vector {:?}, p_log {p_log:.5}, m_restart {m0:.5}, gates {g:.4}",
            v.entries()
        ),
        "gate reference is rounded to 0.01, off the exact value by 3.9e-3",
        vector_ok && rates_ok && (g - exact).abs() <= 1e-9 && (g * 100.0).round() == 13730.0,
    );
}

#[test]
fn c07_markov_simulation_concordance() {
    // Fixed before looking at results: depth-1 and depth-2 shapes spanning
    // r = 0..3 and a range of block counts.
    let shapes = [
        (1, 1, 0, 0),
        (1, 1, 0, 1),
        (1, 1, 0, 3),
        (1, 2, 0, 1),
        (1, 2, 0, 3),
        (1, 4, 0, 2),
        (2, 1, 2, 1),
        (2, 1, 2, 3),
        (2, 2, 2, 2),
        (2, 1, 4, 2),
    ]
    .map(|(depth, t1, children, r)| TreeShape {
        depth,
        t1,
        children,
        r,
    });
    let mut within = 0;
    let mut configs = 0;
    let (mut agree, mut total) = (0, 0);
    let mut worst: f64 = 1.0;
    for n in [8, 16] {
        let config = SweepConfig {
            n,
            p: 1e-3,
            idle: false,
            shots: 500,
            circuits: 20,
            seed: SEED,
            ..SweepConfig::default()
        };
        let mut pairs = Vec::new();
        for &shape in &shapes {
            let m = markov_point(shape, &config).unwrap().markov.p_log;
            let mc = monte_carlo(shape, &config).unwrap().p_log;
            configs += 1;
            within += usize::from(within_factor(m, mc, 2.0));
            worst = worst.max(m / mc).max(mc / m);
            pairs.push((m, mc));
        }
        let (a, t) = ordering_agreement(&pairs);
        agree += a;
        total += t;
    }
    let order = agree as f64 / total as f64;
    report(
        7,
        "Markov/simulation concordance",
        within == configs && order >= 0.9,
        &format!(
            "{within}/{configs} within factor 2 (worst ratio {worst:.2}), ordering {agree}/{total} = {order:.3}"
        ),
    );
}

fn in_window(points: &[SweepPoint], depth: usize) -> Vec<&SweepPoint> {
    points
        .iter()
        .filter(|pt| pt.shape.depth == depth)
        .filter(|pt| {
            let mc = pt.mc.as_ref().unwrap();
            (15.0..=21.0).contains(&mc.omega_time)
        })
        .collect()
}

#[test]
fn c08_depth_two_beats_depth_one_at_n70() {
    let config = SweepConfig {
        n: 70,
        p: 1e-3,
        idle: false,
        shots: 40,
        circuits: 20,
        seed: SEED,
        ..SweepConfig::default()
    };
    let points = grid(&config).unwrap();
    // Per-depth Markov frontiers, confirmed up to the default cap.
    let mut frontier = Vec::new();
    for d in [1, 2] {
        let pts: Vec<SweepPoint> = points
            .iter()
            .filter(|pt| pt.shape.depth == d)
            .cloned()
            .collect();
        frontier.extend(pareto(&pts, config.omega_cap));
    }
    let confirmed: Vec<SweepPoint> = confirm(&frontier, &config)
        .unwrap()
        .into_iter()
        .filter(|pt| pt.mc.is_some())
        .collect();
    let two = in_window(&confirmed, 2);
    let one = in_window(&confirmed, 1);
    let best = two.iter().min_by(|a, b| {
        a.mc.as_ref()
            .unwrap()
            .p_log
            .total_cmp(&b.mc.as_ref().unwrap().p_log)
    });
    let (pass, detail) = match best {
        None => (false, "no depth-2 point in the window".to_string()),
        Some(b) => {
            let bm = b.mc.as_ref().unwrap();
            let mut margin = f64::INFINITY;
            for pt in &one {
                let m = pt.mc.as_ref().unwrap();
                let err = (bm.p_log_err.powi(2) + m.p_log_err.powi(2)).sqrt();
                margin = margin.min((m.p_log - bm.p_log) / err);
            }
            (
                margin > 1.0,
                format!(
                    "depth 2 {:?} p_log {:.3}±{:.3} at ω {:.2}; {} depth-1 points in window, smallest margin {margin:.2} error bars",
                    b.shape, bm.p_log, bm.p_log_err, bm.omega_time, one.len()
                ),
            )
        }
    };
    report(8, "depth 2 beats depth 1 at n=70", pass, &detail);
}

#[test]
fn c09_large_instance_markov() {
    let config = SweepConfig {
        n: 400,
        p: 1e-4,
        idle: false,
        omega_cap: 100.0,
        ..SweepConfig::default()
    };
    let points = grid(&config).unwrap();
    let front = |d: usize| {
        let pts: Vec<SweepPoint> = points
            .iter()
            .filter(|pt| pt.shape.depth == d)
            .cloned()
            .collect();
        pareto(&pts, config.omega_cap)
    };
    let (one, two) = (front(1), front(2));
    // Comparable: depth-1 frontier points no more expensive than the
    // depth-2 candidate.
    let depth_one_best = |w: f64| {
        one.iter()
            .filter(|pt| pt.markov.omega_time <= w)
            .map(|pt| pt.markov.p_log)
            .fold(f64::INFINITY, f64::min)
    };
    let candidates: Vec<&SweepPoint> = two
        .iter()
        .filter(|pt| (20.0..=30.0).contains(&pt.markov.omega_time) && pt.markov.p_log <= 0.15)
        .collect();
    let hit = candidates
        .iter()
        .find(|pt| depth_one_best(pt.markov.omega_time) >= 0.25);
    let (pass, detail) = match (hit, candidates.first()) {
        (_, None) => (
            false,
            "no depth-2 frontier point with ω in [20, 30] and p_log ≤ 0.15".to_string(),
        ),
        (Some(b), _) | (None, Some(b)) => (
            hit.is_some(),
            format!(
                "depth 2 {:?} p_log {:.3} at ω {:.2}; best depth 1 at ω ≤ that is {:.3}",
                b.shape,
                b.markov.p_log,
                b.markov.omega_time,
                depth_one_best(b.markov.omega_time)
            ),
        ),
    };
    report(9, "large-instance Markov frontier", pass, &detail);
}

fn run_cli(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_clinr"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn c10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("grid.cfg"),
        "n = 6\np = 0.002\nshots = 30\ncircuits = 3\nt1 = 1..3\nchildren = 2..3\nr = 0..4\n",
    )
    .unwrap();
    let sweep = run_cli(
        dir.path(),
        &[
            "--seed", "7", "--format", "csv", "--config", "grid.cfg", "sweep",
        ],
    );
    std::fs::write(dir.path().join("sweep.csv"), &sweep).unwrap();

    let commands: Vec<Vec<&str>> = vec![
        vec![
            "tree",
            "build",
            "--tree",
            "uniform",
            "--s",
            "40",
            "--depth",
            "2",
            "--t1",
            "2",
            "--children",
            "3",
            "--r",
            "2",
        ],
        vec![
            "--seed", "3", "compile", "--n", "3", "--tree", "fig2a", "--dump",
        ],
        vec![
            "--seed",
            "3",
            "simulate",
            "--n",
            "4",
            "--p",
            "0.003",
            "--shots",
            "100",
            "--circuits",
            "2",
            "--tree",
            "uniform",
            "--depth",
            "2",
            "--t1",
            "2",
            "--children",
            "2",
            "--r",
            "2",
        ],
        vec!["bound", "--s", "4900", "--p", "0.001", "--n", "70"],
        vec![
            "markov", "--n", "8", "--p", "0.001", "--tree", "uniform", "--depth", "1", "--t1", "3",
            "--r", "2",
        ],
        vec![
            "--seed", "7", "--format", "csv", "--config", "grid.cfg", "sweep", "--all",
        ],
        vec![
            "--seed",
            "7",
            "--format",
            "csv",
            "--config",
            "grid.cfg",
            "confirm",
            "--input",
            "sweep.csv",
        ],
        vec![
            "--seed",
            "7",
            "--config",
            "grid.cfg",
            "compare",
            "--input",
            "sweep.csv",
        ],
    ];
    let mut differing = Vec::new();
    for args in &commands {
        if run_cli(dir.path(), args) != run_cli(dir.path(), args) {
            differing.push(args.join(" "));
        }
    }
    let again = run_cli(
        dir.path(),
        &[
            "--seed", "7", "--format", "csv", "--config", "grid.cfg", "sweep",
        ],
    );
    if again != sweep {
        differing.push("sweep".into());
    }
    report(
        10,
        "CLI determinism",
        differing.is_empty(),
        &format!(
            "{} commands run twice, differing: {:?}",
            commands.len() + 1,
            differing
        ),
    );
}
