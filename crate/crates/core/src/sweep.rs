//! Grid search over uniform trees with the Markov model, Pareto frontier
//! extraction, Monte Carlo confirmation and record formats.
//!
//! CSV columns, in order:
//! `depth,t1,children,r,omega_markov,plog_markov,omega_mc,plog_mc,plog_mc_stddev,qubits,seed`.
//! Monte Carlo columns are empty for points that were not confirmed.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::random_clifford;
use crate::compiler::{compile, qubit_count};
use crate::error::{Error, Result};
use crate::estimate::{EstimateResult, Provenance};
use crate::markov::estimate_tree;
use crate::sim::{run_shots, summarize, NoiseModel, SimOptions};
use crate::tree::CliNRTree;

pub const CSV_HEADER: &str =
    "depth,t1,children,r,omega_markov,plog_markov,omega_mc,plog_mc,plog_mc_stddev,qubits,seed";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    /// Circuit size; `n²` when unset.
    pub s: Option<usize>,
    pub p: f64,
    pub idle: bool,
    pub depths: Vec<usize>,
    pub t1: RangeInclusive<usize>,
    pub children: RangeInclusive<usize>,
    pub r: RangeInclusive<usize>,
    pub omega_cap: f64,
    /// Frontier points with Markov overhead above this are not confirmed.
    pub confirm_cap: f64,
    pub shots: u64,
    pub circuits: u64,
    pub seed: u64,
    pub attempt_cap: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 70,
            s: None,
            p: 1e-3,
            idle: false,
            depths: vec![1, 2],
            t1: 1..=10,
            children: 2..=10,
            r: 0..=30,
            omega_cap: 100.0,
            confirm_cap: 21.0,
            shots: 80,
            circuits: 50,
            seed: 0,
            attempt_cap: SimOptions::default().attempt_cap,
        }
    }
}

fn parse_range(value: &str) -> Option<RangeInclusive<usize>> {
    match value.split_once("..") {
        Some((a, b)) => {
            let a = a.trim().parse().ok()?;
            let b = b.trim().trim_start_matches('=').parse().ok()?;
            Some(a..=b)
        }
        None => {
            let v = value.trim().parse().ok()?;
            Some(v..=v)
        }
    }
}

fn parse_bool(value: &str) -> Option<bool> {
    match value {
        "1" | "true" | "on" | "yes" => Some(true),
        "0" | "false" | "off" | "no" => Some(false),
        _ => None,
    }
}

impl SweepConfig {
    pub fn size(&self) -> usize {
        self.s.unwrap_or(self.n * self.n)
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel::standard(self.p, self.idle)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(0.0..1.0).contains(&self.p) {
            return bad("p must lie in [0, 1)");
        }
        if self.depths.is_empty() || self.depths.iter().any(|&d| d == 0 || d > 2) {
            return bad("depths must be a nonempty subset of {1, 2}");
        }
        if self.t1.is_empty() || *self.t1.start() == 0 {
            return bad("t1 range must be nonempty and positive");
        }
        if self.depths.contains(&2) && (self.children.is_empty() || *self.children.start() == 0) {
            return bad("children range must be nonempty and positive");
        }
        if self.r.is_empty() {
            return bad("r range must be nonempty");
        }
        if !(self.omega_cap > 1.0) {
            return bad("omega_cap must exceed 1");
        }
        if self.shots == 0 || self.circuits == 0 || self.attempt_cap == 0 {
            return bad("shots, circuits and attempt_cap must be positive");
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Config(format!("bad value `{value}` for `{key}`"));
        let v = value.trim();
        match key.trim() {
            "n" => self.n = v.parse().map_err(|_| bad())?,
            "s" => self.s = Some(v.parse().map_err(|_| bad())?),
            "p" => self.p = v.parse().map_err(|_| bad())?,
            "idle" => self.idle = parse_bool(v).ok_or_else(bad)?,
            "depths" => {
                self.depths = v
                    .split(',')
                    .map(|d| d.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?
            }
            "t1" => self.t1 = parse_range(v).ok_or_else(bad)?,
            "children" => self.children = parse_range(v).ok_or_else(bad)?,
            "r" => self.r = parse_range(v).ok_or_else(bad)?,
            "omega_cap" => self.omega_cap = v.parse().map_err(|_| bad())?,
            "confirm_cap" => self.confirm_cap = v.parse().map_err(|_| bad())?,
            "shots" => self.shots = v.parse().map_err(|_| bad())?,
            "circuits" => self.circuits = v.parse().map_err(|_| bad())?,
            "seed" => self.seed = v.parse().map_err(|_| bad())?,
            "attempt_cap" => self.attempt_cap = v.parse().map_err(|_| bad())?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of `self`. Blank lines and
    /// `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected key = value".into(),
            })?;
            self.set(k, v).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Flat `key = value` rendering that `apply_text` reads back.
    pub fn to_text(&self) -> String {
        let depths: Vec<String> = self.depths.iter().map(|d| d.to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "s = {}", self.size());
        let _ = writeln!(out, "p = {}", self.p);
        let _ = writeln!(out, "idle = {}", self.idle);
        let _ = writeln!(out, "depths = {}", depths.join(","));
        for (k, r) in [
            ("t1", &self.t1),
            ("children", &self.children),
            ("r", &self.r),
        ] {
            let _ = writeln!(out, "{k} = {}..{}", r.start(), r.end());
        }
        let _ = writeln!(out, "omega_cap = {}", self.omega_cap);
        let _ = writeln!(out, "confirm_cap = {}", self.confirm_cap);
        let _ = writeln!(out, "shots = {}", self.shots);
        let _ = writeln!(out, "circuits = {}", self.circuits);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "attempt_cap = {}", self.attempt_cap);
        out
    }
}

/// Uniform tree shape: `t1` vertices at level 1, each with `children`
/// leaves when `depth = 2`. Depth 0 is the direct implementation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeShape {
    pub depth: usize,
    pub t1: usize,
    pub children: usize,
    pub r: usize,
}

impl TreeShape {
    pub fn direct() -> Self {
        Self {
            depth: 0,
            t1: 0,
            children: 0,
            r: 0,
        }
    }

    pub fn build(&self, s: usize) -> Result<CliNRTree> {
        match self.depth {
            0 => Ok(CliNRTree::direct(s)),
            1 => CliNRTree::uniform(s, self.t1, None, self.r),
            2 => CliNRTree::uniform(s, self.t1, Some(self.children), self.r),
            d => Err(Error::InvalidTree(format!(
                "uniform shapes have depth ≤ 2, got {d}"
            ))),
        }
    }

    pub fn num_vertices(&self) -> usize {
        match self.depth {
            0 => 1,
            1 => 1 + self.t1,
            _ => 1 + self.t1 + self.t1 * self.children,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub shape: TreeShape,
    pub markov: EstimateResult,
    pub mc: Option<EstimateResult>,
    pub qubits: usize,
    /// Seed of the Monte Carlo runs behind `mc` (the master seed otherwise).
    pub seed: u64,
}

/// Every shape of the grid in canonical order.
pub fn shapes(config: &SweepConfig) -> Vec<TreeShape> {
    let mut out = Vec::new();
    let mut depths = config.depths.clone();
    depths.sort_unstable();
    depths.dedup();
    for d in depths {
        for t1 in config.t1.clone() {
            let kids: Vec<usize> = if d == 1 {
                vec![0]
            } else {
                config.children.clone().collect()
            };
            for c in kids {
                for r in config.r.clone() {
                    out.push(TreeShape {
                        depth: d,
                        t1,
                        children: c,
                        r,
                    });
                }
            }
        }
    }
    out
}

/// Markov estimate of one shape.
pub fn markov_point(shape: TreeShape, config: &SweepConfig) -> Result<SweepPoint> {
    let tree = shape.build(config.size())?;
    let markov = estimate_tree(&tree, config.n, &config.noise())?;
    Ok(SweepPoint {
        shape,
        markov,
        mc: None,
        qubits: qubit_count(&tree, config.n),
        seed: config.seed,
    })
}

/// Markov estimates of the whole grid, points above `omega_cap` (or with
/// a degenerate estimate) dropped.
pub fn grid(config: &SweepConfig) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    let points: Vec<Option<SweepPoint>> = shapes(config)
        .into_par_iter()
        .map(|shape| markov_point(shape, config).ok())
        .collect();
    Ok(points
        .into_iter()
        .flatten()
        .filter(|pt| pt.markov.omega_time <= config.omega_cap)
        .collect())
}

/// Indices of the non-dominated objectives `(ω, p_log)` (both minimised),
/// ordered by `ω`, then `p_log`, then index.
pub fn pareto_indices(objectives: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..objectives.len())
        .filter(|&i| !objectives[i].0.is_nan() && !objectives[i].1.is_nan())
        .collect();
    order.sort_by(|&a, &b| {
        let (oa, ob) = (objectives[a], objectives[b]);
        oa.0.total_cmp(&ob.0)
            .then(oa.1.total_cmp(&ob.1))
            .then(a.cmp(&b))
    });
    let mut front = Vec::new();
    // Best p_log among strictly cheaper points, and among the current ω group.
    let mut best_below = f64::INFINITY;
    let mut group_omega = f64::NAN;
    let mut group_best = f64::INFINITY;
    for i in order {
        let (w, p) = objectives[i];
        if w != group_omega {
            best_below = best_below.min(group_best);
            group_omega = w;
            group_best = p;
        }
        if p < best_below && p == group_best {
            front.push(i);
        }
    }
    front
}

/// Frontier of `points` under Markov `(ω, p_log)`, capped at
/// `omega_cap`. Ties go to fewer vertices, then smaller `r`.
pub fn pareto(points: &[SweepPoint], omega_cap: f64) -> Vec<SweepPoint> {
    pareto_by(points, omega_cap, |pt| {
        Some((pt.markov.omega_time, pt.markov.p_log))
    })
}

/// Frontier under Monte Carlo objectives; unconfirmed points are skipped.
pub fn pareto_mc(points: &[SweepPoint], omega_cap: f64) -> Vec<SweepPoint> {
    pareto_by(points, omega_cap, |pt| {
        pt.mc.as_ref().map(|m| (m.omega_time, m.p_log))
    })
}

fn pareto_by<F>(points: &[SweepPoint], omega_cap: f64, key: F) -> Vec<SweepPoint>
where
    F: Fn(&SweepPoint) -> Option<(f64, f64)>,
{
    let mut pool: Vec<(&SweepPoint, (f64, f64))> = points
        .iter()
        .filter_map(|pt| key(pt).map(|k| (pt, k)))
        .filter(|(_, k)| k.0 <= omega_cap)
        .collect();
    pool.sort_by_key(|(pt, _)| (pt.shape.num_vertices(), pt.shape.r));
    let objectives: Vec<(f64, f64)> = pool.iter().map(|(_, k)| *k).collect();
    pareto_indices(&objectives)
        .into_iter()
        .map(|i| pool[i].0.clone())
        .collect()
}

fn derived_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) * 16);
    rng.next_u64()
}

const STREAM_CIRCUIT: u64 = 1;
const STREAM_COMPILE: u64 = 2;
const STREAM_SHOTS: u64 = 3;

/// Monte Carlo estimate of `shape` averaged over random circuits. Circuit
/// `c` is the same for every shape under one master seed; the error bar
/// is the standard deviation across circuits.
pub fn monte_carlo(shape: TreeShape, config: &SweepConfig) -> Result<EstimateResult> {
    let tree = shape.build(config.size())?;
    monte_carlo_tree(&tree, shape_tag(shape), config)
}

/// As [`monte_carlo`] for any tree; `tag` separates the compile and shot
/// streams of different trees under one master seed.
pub fn monte_carlo_tree(
    tree: &CliNRTree,
    tag: u64,
    config: &SweepConfig,
) -> Result<EstimateResult> {
    config.validate()?;
    let s = config.size();
    if tree.root_size() != s {
        return Err(Error::Partition {
            circuit: s,
            tree: tree.root_size(),
        });
    }
    let noise = config.noise();
    let options = SimOptions {
        attempt_cap: config.attempt_cap,
        inject: None,
    };
    let tag = tag & !0xff;
    let per_circuit: Vec<EstimateResult> = (0..config.circuits)
        .into_par_iter()
        .map(|c| -> Result<EstimateResult> {
            let circuit = random_clifford(config.n, s, circuit_seed(config.seed, c))?;
            let program = compile(
                &circuit,
                tree,
                derived_seed(config.seed, tag | STREAM_COMPILE, c),
            )?;
            let shot_seed = derived_seed(config.seed, tag | STREAM_SHOTS, c);
            let results = run_shots(&program, &noise, &options, config.shots, shot_seed)?;
            Ok(summarize(&program, &results))
        })
        .collect::<Result<_>>()?;
    Ok(combine_circuits(&per_circuit))
}

/// Seed of random circuit `c` under a master seed.
pub fn circuit_seed(master: u64, c: u64) -> u64 {
    derived_seed(master, STREAM_CIRCUIT, c)
}

// Distinct per shape with the low byte free for the stream kind.
fn shape_tag(shape: TreeShape) -> u64 {
    ((shape.depth as u64) << 56)
        ^ ((shape.t1 as u64) << 40)
        ^ ((shape.children as u64) << 24)
        ^ ((shape.r as u64) << 8)
}

/// Mean over circuits with across-circuit standard deviations as errors.
/// Circuits whose shots were all aborted are left out of the means.
pub fn combine_circuits(per_circuit: &[EstimateResult]) -> EstimateResult {
    let usable: Vec<&EstimateResult> = per_circuit.iter().filter(|e| !e.p_log.is_nan()).collect();
    let (p, p_sd) = mean_sd(usable.iter().map(|e| e.p_log));
    let (w, w_sd) = mean_sd(usable.iter().map(|e| e.omega_time));
    EstimateResult {
        p_log: p,
        p_log_err: p_sd,
        omega_time: w,
        omega_time_err: w_sd,
        omega_space: per_circuit.first().map_or(f64::NAN, |e| e.omega_space),
        shots: per_circuit.iter().map(|e| e.shots).sum(),
        circuits: per_circuit.len() as u64,
        aborted: per_circuit.iter().map(|e| e.aborted).sum(),
        provenance: Provenance::MonteCarlo,
    }
}

/// Mean and sample standard deviation; `(NaN, NaN)` when empty.
pub fn mean_sd<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Attaches Monte Carlo estimates to every point with Markov overhead at
/// most `config.confirm_cap`; the others are returned unchanged.
pub fn confirm(points: &[SweepPoint], config: &SweepConfig) -> Result<Vec<SweepPoint>> {
    points
        .iter()
        .map(|pt| {
            if pt.markov.omega_time > config.confirm_cap {
                return Ok(pt.clone());
            }
            let mc = monte_carlo(pt.shape, config)?;
            Ok(SweepPoint {
                mc: Some(mc),
                seed: config.seed,
                ..pt.clone()
            })
        })
        .collect()
}

/// Markov against Monte Carlo on the same shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub points: Vec<SweepPoint>,
    /// Fraction of points whose two `p_log` values are within a factor 2.
    pub within_factor_two: f64,
    /// Fraction of point pairs ordered the same way by both estimates.
    pub ordering_agreement: f64,
}

pub fn compare(shapes: &[TreeShape], config: &SweepConfig) -> Result<Comparison> {
    let points: Vec<SweepPoint> = shapes
        .iter()
        .map(|&shape| {
            let mut pt = markov_point(shape, config)?;
            pt.mc = Some(monte_carlo(shape, config)?);
            Ok(pt)
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(f64, f64)> = points
        .iter()
        .map(|pt| (pt.markov.p_log, pt.mc.as_ref().expect("set").p_log))
        .collect();
    let within = pairs
        .iter()
        .filter(|(a, b)| within_factor(*a, *b, 2.0))
        .count();
    let (agree, total) = ordering_agreement(&pairs);
    Ok(Comparison {
        within_factor_two: within as f64 / pairs.len().max(1) as f64,
        ordering_agreement: if total == 0 {
            1.0
        } else {
            agree as f64 / total as f64
        },
        points,
    })
}

/// `a` and `b` within a factor `f` of each other (two zeros agree).
pub fn within_factor(a: f64, b: f64, f: f64) -> bool {
    if a == 0.0 && b == 0.0 {
        return true;
    }
    a > 0.0 && b > 0.0 && a <= f * b && b <= f * a
}

/// Agreeing and total pair counts of the orderings of two estimates.
/// Pairs tied under either estimate are skipped.
pub fn ordering_agreement(pairs: &[(f64, f64)]) -> (usize, usize) {
    let mut agree = 0;
    let mut total = 0;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let a = pairs[i].0.partial_cmp(&pairs[j].0);
            let b = pairs[i].1.partial_cmp(&pairs[j].1);
            match (a, b) {
                (Some(x), Some(y)) if x.is_ne() && y.is_ne() => {
                    total += 1;
                    if x == y {
                        agree += 1;
                    }
                }
                _ => {}
            }
        }
    }
    (agree, total)
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    depth: usize,
    t1: usize,
    children: usize,
    r: usize,
    omega_markov: f64,
    plog_markov: f64,
    omega_mc: Option<f64>,
    plog_mc: Option<f64>,
    plog_mc_stddev: Option<f64>,
    qubits: usize,
    seed: u64,
}

/// CSV rendering with header.
pub fn to_csv(points: &[SweepPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if points.is_empty() {
        w.write_record(CSV_HEADER.split(','))
            .expect("in-memory write");
    }
    for pt in points {
        let mc = pt.mc.as_ref();
        w.serialize(CsvRow {
            depth: pt.shape.depth,
            t1: pt.shape.t1,
            children: pt.shape.children,
            r: pt.shape.r,
            omega_markov: pt.markov.omega_time,
            plog_markov: pt.markov.p_log,
            omega_mc: mc.map(|m| m.omega_time),
            plog_mc: mc.map(|m| m.p_log),
            plog_mc_stddev: mc.map(|m| m.p_log_err),
            qubits: pt.qubits,
            seed: pt.seed,
        })
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Reads rows written by [`to_csv`]. Monte Carlo detail beyond the three
/// stored columns is not recoverable and is left at defaults.
pub fn from_csv(text: &str, n: usize) -> Result<Vec<SweepPoint>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header_ok = r
        .headers()
        .map(|h| h.iter().collect::<Vec<_>>().join(",") == CSV_HEADER)
        .unwrap_or(false);
    if !header_ok {
        return Err(Error::Parse {
            line: 1,
            message: "missing CSV header".into(),
        });
    }
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        let omega_space = row.qubits as f64 / n.max(1) as f64;
        let mc = match (row.omega_mc, row.plog_mc) {
            (Some(w), Some(p)) => {
                let mut m = EstimateResult::exact(p, w, omega_space, Provenance::MonteCarlo);
                m.p_log_err = row.plog_mc_stddev.unwrap_or(f64::NAN);
                Some(m)
            }
            _ => None,
        };
        out.push(SweepPoint {
            shape: TreeShape {
                depth: row.depth,
                t1: row.t1,
                children: row.children,
                r: row.r,
            },
            markov: EstimateResult::exact(
                row.plog_markov,
                row.omega_markov,
                omega_space,
                Provenance::Markov,
            ),
            mc,
            qubits: row.qubits,
            seed: row.seed,
        });
    }
    Ok(out)
}

/// One JSON object per line.
pub fn to_jsonl(points: &[SweepPoint]) -> String {
    let mut out = String::new();
    for pt in points {
        out.push_str(&serde_json::to_string(pt).expect("points serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn point(w: f64, p: f64) -> SweepPoint {
        SweepPoint {
            shape: TreeShape {
                depth: 1,
                t1: 1,
                children: 0,
                r: 0,
            },
            markov: EstimateResult::exact(p, w, 1.0, Provenance::Markov),
            mc: None,
            qubits: 0,
            seed: 0,
        }
    }

    fn brute_force(obj: &[(f64, f64)]) -> Vec<usize> {
        let mut keep: Vec<usize> = (0..obj.len())
            .filter(|&i| {
                !(0..obj.len()).any(|j| {
                    obj[j].0 <= obj[i].0
                        && obj[j].1 <= obj[i].1
                        && (obj[j].0 < obj[i].0 || obj[j].1 < obj[i].1)
                })
            })
            .collect();
        keep.sort_by(|&a, &b| {
            obj[a]
                .0
                .total_cmp(&obj[b].0)
                .then(obj[a].1.total_cmp(&obj[b].1))
                .then(a.cmp(&b))
        });
        keep
    }

    #[test]
    fn grid_counts() {
        let mut c = SweepConfig {
            depths: vec![1],
            ..Default::default()
        };
        assert_eq!(shapes(&c).len(), 310);
        c.depths = vec![2];
        assert_eq!(shapes(&c).len(), 2790);
    }

    #[test]
    fn small_frontier_by_hand() {
        let pts = vec![point(2.0, 0.5), point(3.0, 0.4), point(2.5, 0.6)];
        let f = pareto(&pts, 100.0);
        let got: Vec<(f64, f64)> = f
            .iter()
            .map(|p| (p.markov.omega_time, p.markov.p_log))
            .collect();
        assert_eq!(got, vec![(2.0, 0.5), (3.0, 0.4)]);
        assert_eq!(pareto(&pts[..1], 100.0).len(), 1);
        assert_eq!(pareto(&pts, 2.2).len(), 1);
    }

    #[test]
    fn frontier_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let k = rng.gen_range(1..40);
            // Coarse values so ties and duplicates occur.
            let obj: Vec<(f64, f64)> = (0..k)
                .map(|_| (rng.gen_range(0..8) as f64, rng.gen_range(0..8) as f64))
                .collect();
            assert_eq!(pareto_indices(&obj), brute_force(&obj));
        }
    }

    #[test]
    fn tie_break_prefers_smaller_tree() {
        let mut a = point(2.0, 0.5);
        a.shape = TreeShape {
            depth: 2,
            t1: 2,
            children: 2,
            r: 1,
        };
        let mut b = point(2.0, 0.5);
        b.shape.r = 3;
        let f = pareto(&[a.clone(), b.clone()], 10.0);
        assert_eq!(f[0].shape, b.shape);
        assert_eq!(f[1].shape, a.shape);
    }

    #[test]
    fn config_text_round_trip() {
        let mut c = SweepConfig::default();
        c.apply_text("# comment\nn = 8\np=0.002\nidle = on\ndepths = 1,2\nt1 = 2..4\nr = 3\n")
            .unwrap();
        assert_eq!(
            (c.n, c.p, c.idle, c.t1.clone(), c.r.clone()),
            (8, 0.002, true, 2..=4, 3..=3)
        );
        let mut d = SweepConfig::default();
        d.apply_text(&c.to_text()).unwrap();
        assert_eq!(d.s, Some(64));
        d.s = None;
        assert_eq!(c, d);
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("n 3").is_err());
        c.omega_cap = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut a = point(2.0, 0.125);
        let mut m = EstimateResult::exact(0.25, 2.5, 3.0, Provenance::MonteCarlo);
        m.p_log_err = 0.0625;
        a.mc = Some(m);
        a.qubits = 9;
        let text = to_csv(&[a.clone(), point(3.0, 0.5)]);
        let back = from_csv(&text, 3).unwrap();
        assert_eq!(to_csv(&back), text);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert!(text.lines().nth(2).unwrap().ends_with(",,,,0,0"));
    }

    #[test]
    fn noiseless_confirmation_is_exact() {
        let config = SweepConfig {
            n: 3,
            p: 0.0,
            shots: 5,
            circuits: 3,
            ..Default::default()
        };
        let shape = TreeShape {
            depth: 2,
            t1: 2,
            children: 2,
            r: 1,
        };
        let mc = monte_carlo(shape, &config).unwrap();
        assert_eq!(mc.p_log, 0.0);
        assert_eq!(mc.shots, 15);
        assert_eq!(monte_carlo(shape, &config).unwrap(), mc);
    }

    #[test]
    fn orderings() {
        assert_eq!(
            ordering_agreement(&[(1.0, 2.0), (2.0, 3.0), (3.0, 1.0)]),
            (1, 3)
        );
        assert!(within_factor(0.1, 0.19, 2.0));
        assert!(!within_factor(0.1, 0.21, 2.0));
        assert!(!within_factor(0.0, 0.1, 2.0));
    }
}
