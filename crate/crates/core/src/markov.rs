//! Markov-chain estimate of the logical error rate and gate overhead.
//!
//! A probability vector `P` of length `r + 2` tracks one CliNR₁ block:
//! `P[0]` no error, `P[1]` undetected error, `P[k + 2]` detection at
//! check `k`. It is initialised after RSP, stepped through the checks and
//! the injection, then read off. Tree estimates walk the vertices depth
//! first, left to right, re-initialising `P` for every block.

use serde::{Deserialize, Serialize};

use crate::compiler::{qubit_count, GateCensus};
use crate::error::{Error, Result};
use crate::estimate::{EstimateResult, Provenance};
use crate::sim::NoiseModel;
use crate::tree::{CliNRTree, VertexId};

const SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovVector {
    entries: Vec<f64>,
}

impl MarkovVector {
    /// State after RSP: `[1 − p_p, p_p, 0, …]` of length `r + 2`.
    pub fn rsp(p_p: f64, r: usize) -> Self {
        let mut entries = vec![0.0; r + 2];
        entries[0] = 1.0 - p_p;
        entries[1] = p_p;
        Self { entries }
    }

    pub fn from_entries(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidParameters(
                "vector needs length r + 2 ≥ 2".into(),
            ));
        }
        if entries.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::InvalidParameters("negative probability".into()));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameters(format!("entries sum to {sum}")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Number of checks the vector has room for.
    pub fn checks(&self) -> usize {
        self.entries.len() - 2
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Applies the transition of check `k`.
    pub fn step_check(&self, k: usize, p_de: f64, p_ue: f64) -> Result<Self> {
        if k >= self.checks() {
            return Err(Error::InvalidParameters(format!(
                "check {k} out of range for r = {}",
                self.checks()
            )));
        }
        if p_de < 0.0 || p_ue < 0.0 || p_de + p_ue > 1.0 + SUM_TOL {
            return Err(Error::InvalidParameters(format!(
                "check rates p_de = {p_de}, p_ue = {p_ue}"
            )));
        }
        let v = &self.entries;
        let mut out = v.clone();
        out[0] = v[0] * (1.0 - p_de - p_ue);
        out[1] = v[0] * p_ue + v[1] / 2.0;
        out[k + 2] += v[0] * p_de + v[1] / 2.0;
        Ok(Self { entries: out })
    }

    /// Applies the injection transition.
    pub fn step_injection(&self, p_i: f64) -> Self {
        let mut out = self.entries.clone();
        out[0] = self.entries[0] * (1.0 - p_i);
        out[1] = self.entries[1] + self.entries[0] * p_i;
        Self { entries: out }
    }

    /// `P₁ / (P₀ + P₁)`.
    pub fn logical_rate(&self) -> Result<f64> {
        let mass = self.entries[0] + self.entries[1];
        if mass <= 0.0 {
            return Err(Error::Degenerate("no surviving probability mass".into()));
        }
        Ok(self.entries[1] / mass)
    }

    /// Total detection probability.
    pub fn p_res(&self) -> f64 {
        self.entries[2..].iter().sum()
    }

    /// Expected number of restarts triggered by each check.
    pub fn m_restart(&self) -> Result<Vec<f64>> {
        let p_res = self.p_res();
        if p_res == 0.0 {
            return Ok(vec![0.0; self.checks()]);
        }
        if p_res >= 1.0 {
            return Err(Error::DivergentRestart);
        }
        let total = 1.0 / (1.0 - p_res) - 1.0;
        Ok(self.entries[2..]
            .iter()
            .map(|&d| d / p_res * total)
            .collect())
    }

    /// Expected executed gates of the block including restarts. A restart
    /// at check `k` repeats RSP and the `k` checks before it; `literal`
    /// charges `k · g_P` for those checks instead.
    pub fn expected_gates(&self, g_p: f64, g_c: f64, g_i: f64, literal: bool) -> Result<f64> {
        let r = self.checks() as f64;
        let per_check = if literal { g_p } else { g_c };
        let restarts: f64 = self
            .m_restart()?
            .iter()
            .enumerate()
            .map(|(k, m)| (g_p + k as f64 * per_check) * m)
            .sum();
        Ok(g_p + r * g_c + g_i + restarts)
    }
}

/// Where a block sits, for the error-parameter formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Stage {
    /// Leaf block wrapping `s′` gates of the input circuit.
    Leaf { s: f64 },
    /// Block above the leaves: its children executed `ŝ′` gates in
    /// expectation and left a logical error `p_log′`.
    Upper { s_hat: f64, p_log_children: f64 },
}

impl Stage {
    fn size(&self) -> f64 {
        match *self {
            Stage::Leaf { s } => s,
            Stage::Upper { s_hat, .. } => s_hat,
        }
    }
}

/// Context of one block in the walk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockContext {
    pub stage: Stage,
    pub r: usize,
    /// Logical error already on the input rails (left by the previous
    /// sibling).
    pub input_error: f64,
    /// First block after a parent boundary; its RSI is timed so the input
    /// rails do not idle.
    pub first_sibling: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorParams {
    pub p_p: f64,
    pub p_de: f64,
    pub p_ue: f64,
    pub p_i: f64,
    pub g_p: f64,
    pub g_c: f64,
    pub g_i: f64,
    pub g_idle: f64,
}

fn survival(p: f64, exponent: f64) -> Result<f64> {
    if exponent < 0.0 {
        return Err(Error::InvalidParameters(format!(
            "negative exponent {exponent}"
        )));
    }
    Ok((1.0 - p).powf(exponent))
}

/// RSP logical error rate.
pub fn rsp_rate(stage: &Stage, noise: &NoiseModel, n: usize) -> Result<f64> {
    let n = n as f64;
    let keep = match *stage {
        Stage::Leaf { s } => {
            survival(noise.p2, s / 2.0 + n)?
                * survival(noise.p1, s / 2.0 + 2.0 * n)?
                * survival(noise.p_idle, s * n / 3.0)?
        }
        Stage::Upper {
            s_hat,
            p_log_children,
        } => {
            (1.0 - p_log_children)
                * survival(noise.p2, n)?
                * survival(noise.p1, 2.0 * n)?
                * survival(noise.p_idle, s_hat)?
        }
    };
    Ok(1.0 - keep)
}

/// Detectable and undetectable error rates of one check.
pub fn check_rates(noise: &NoiseModel, n: usize) -> Result<(f64, f64)> {
    let n = n as f64;
    let p = noise.p2;
    let p_de = 1.0
        - survival(8.0 * p / 15.0, 2.0 * n / 3.0)?
            * survival(2.0 * noise.p1 / 3.0, 2.0)?
            * survival(noise.p_meas, 1.0)?;
    let p_ue = 1.0 - survival(6.0 * p / 15.0, 2.0 * n / 3.0)?;
    Ok((p_de, p_ue))
}

/// Expected idle locations on the input rails while the block prepares
/// and checks its resource state.
pub fn idle_gates(stage: &Stage, n: usize, r: usize, m_restart: &[f64]) -> f64 {
    let nf = n as f64;
    let prep = stage.size() * nf / 3.0;
    let per_check = 4.5 * nf * nf - 3.0 * nf;
    let restarts: f64 = m_restart
        .iter()
        .enumerate()
        .map(|(k, m)| (prep + k as f64 * per_check) * m)
        .sum();
    prep + r as f64 * per_check + restarts
}

/// Full parameter set of one block. `m_restart` comes from the vector
/// after the checks and only affects the idle terms.
pub fn error_params(
    ctx: &BlockContext,
    noise: &NoiseModel,
    n: usize,
    m_restart: &[f64],
) -> Result<ErrorParams> {
    let census = GateCensus::for_qubits(n);
    let nf = n as f64;
    let p_p = rsp_rate(&ctx.stage, noise, n)?;
    let (p_de, p_ue) = check_rates(noise, n)?;
    let (g_idle, idle_keep) = if ctx.first_sibling {
        (0.0, 1.0)
    } else {
        let g = idle_gates(&ctx.stage, n, ctx.r, m_restart);
        (g, survival(noise.p_idle, g)?)
    };
    let keep = (1.0 - ctx.input_error)
        * survival(noise.p2, nf)?
        * survival(noise.p1, 4.0 * nf)?
        * idle_keep;
    Ok(ErrorParams {
        p_p,
        p_de,
        p_ue,
        p_i: 1.0 - keep,
        g_p: census.bell_prep + ctx.stage.size(),
        g_c: census.check_expected,
        g_i: census.injection,
        g_idle,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovOptions {
    /// Charge `k · g_P` for the checks repeated by a restart at check `k`.
    pub literal_restart_cost: bool,
}

/// Outcome of one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEstimate {
    pub params: ErrorParams,
    pub vector: MarkovVector,
    pub p_log: f64,
    pub expected_gates: f64,
}

/// Runs one block: RSP vector, `r` checks, injection.
pub fn run_block(
    ctx: &BlockContext,
    noise: &NoiseModel,
    n: usize,
    options: &MarkovOptions,
) -> Result<BlockEstimate> {
    let p_p = rsp_rate(&ctx.stage, noise, n)?;
    let (p_de, p_ue) = check_rates(noise, n)?;
    let mut v = MarkovVector::rsp(p_p, ctx.r);
    for k in 0..ctx.r {
        v = v.step_check(k, p_de, p_ue)?;
    }
    let params = error_params(ctx, noise, n, &v.m_restart()?)?;
    run_with_params(&params, ctx.r, options)
}

/// Runs one block with explicit parameters.
pub fn run_with_params(
    params: &ErrorParams,
    r: usize,
    options: &MarkovOptions,
) -> Result<BlockEstimate> {
    let mut v = MarkovVector::rsp(params.p_p, r);
    for k in 0..r {
        v = v.step_check(k, params.p_de, params.p_ue)?;
    }
    let v = v.step_injection(params.p_i);
    let p_log = v.logical_rate()?;
    let expected_gates = v.expected_gates(
        params.g_p,
        params.g_c,
        params.g_i,
        options.literal_restart_cost,
    )?;
    Ok(BlockEstimate {
        params: *params,
        vector: v,
        p_log,
        expected_gates,
    })
}

/// Result of a subtree: error left on its output and expected gates.
#[derive(Clone, Copy, Debug)]
struct Subtree {
    p_log: f64,
    gates: f64,
}

fn walk(
    tree: &CliNRTree,
    id: VertexId,
    input_error: f64,
    first_sibling: bool,
    noise: &NoiseModel,
    n: usize,
    options: &MarkovOptions,
) -> Result<Subtree> {
    let stage = if tree.is_leaf(id) {
        Stage::Leaf {
            s: tree.s(id) as f64,
        }
    } else {
        let children = children_chain(tree, id, 0.0, noise, n, options)?;
        Stage::Upper {
            s_hat: children.gates,
            p_log_children: children.p_log,
        }
    };
    let ctx = BlockContext {
        stage,
        r: tree.r(id),
        input_error,
        first_sibling,
    };
    let est = run_block(&ctx, noise, n, options)?;
    Ok(Subtree {
        p_log: est.p_log,
        gates: est.expected_gates,
    })
}

// Children run in order on one register; each passes its output error on
// to the next.
fn children_chain(
    tree: &CliNRTree,
    id: VertexId,
    input_error: f64,
    noise: &NoiseModel,
    n: usize,
    options: &MarkovOptions,
) -> Result<Subtree> {
    let mut acc = Subtree {
        p_log: input_error,
        gates: 0.0,
    };
    for (i, child) in tree.child_ids(id).enumerate() {
        let sub = walk(tree, child, acc.p_log, i == 0, noise, n, options)?;
        acc.p_log = sub.p_log;
        acc.gates += sub.gates;
    }
    Ok(acc)
}

/// Error rate of running a size-`s` circuit directly.
pub fn direct_estimate(s: usize, noise: &NoiseModel, n: usize) -> Result<f64> {
    let s = s as f64;
    let keep = survival(noise.p2, s / 2.0)?
        * survival(noise.p1, s / 2.0)?
        * survival(noise.p_idle, s * n as f64 / 3.0)?;
    Ok(1.0 - keep)
}

/// Markov estimate of the recursive implementation on `tree`.
pub fn estimate_tree(tree: &CliNRTree, n: usize, noise: &NoiseModel) -> Result<EstimateResult> {
    estimate_tree_with(tree, n, noise, &MarkovOptions::default())
}

pub fn estimate_tree_with(
    tree: &CliNRTree,
    n: usize,
    noise: &NoiseModel,
    options: &MarkovOptions,
) -> Result<EstimateResult> {
    tree.ensure_valid()?;
    if n == 0 {
        return Err(Error::InvalidParameters("n must be positive".into()));
    }
    let s = tree.root_size();
    let top = if tree.is_leaf(VertexId::ROOT) {
        Subtree {
            p_log: direct_estimate(s, noise, n)?,
            gates: s as f64,
        }
    } else {
        children_chain(tree, VertexId::ROOT, 0.0, noise, n, options)?
    };
    let omega_time = if s == 0 { 0.0 } else { top.gates / s as f64 };
    Ok(EstimateResult::exact(
        top.p_log,
        omega_time,
        qubit_count(tree, n) as f64 / n as f64,
        Provenance::Markov,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rsp_vector_shape() {
        assert_eq!(MarkovVector::rsp(0.0, 2).entries(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(MarkovVector::rsp(0.1, 1).entries(), &[0.9, 0.1, 0.0]);
    }

    #[test]
    fn worked_example() {
        let v = MarkovVector::rsp(0.1, 1).step_check(0, 0.02, 0.01).unwrap();
        let e = v.entries();
        assert!(close(e[0], 0.873, 1e-12));
        assert!(close(e[1], 0.059, 1e-12));
        assert!(close(e[2], 0.068, 1e-12));
        assert!(close(v.logical_rate().unwrap(), 0.0633, 1e-4));
        assert!(close(v.m_restart().unwrap()[0], 0.0730, 1e-4));
        let g = v.expected_gates(100.0, 10.0, 20.0, false).unwrap();
        assert!(close(g, 137.30, 1e-2));
    }

    #[test]
    fn check_step_without_errors_is_identity() {
        let v = MarkovVector::from_entries(vec![0.7, 0.0, 0.2, 0.1]).unwrap();
        assert_eq!(v.step_check(1, 0.0, 0.0).unwrap(), v);
        assert!(v.step_check(2, 0.0, 0.0).is_err());
        assert!(v.step_check(0, 0.7, 0.5).is_err());
    }

    #[test]
    fn injection_step() {
        let v = MarkovVector::rsp(0.0, 1).step_injection(0.05);
        assert_eq!(v.entries(), &[0.95, 0.05, 0.0]);
    }

    #[test]
    fn logical_rate_edges() {
        let v = MarkovVector::from_entries(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(v.logical_rate(), Err(Error::Degenerate(_))));
        let v = MarkovVector::from_entries(vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(v.logical_rate().unwrap(), 1.0);
        assert!(v.m_restart().is_ok());
        let v = MarkovVector::from_entries(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(v.m_restart(), Err(Error::DivergentRestart)));
    }

    #[test]
    fn literal_restart_cost() {
        let v = MarkovVector::rsp(0.2, 2)
            .step_check(0, 0.1, 0.0)
            .unwrap()
            .step_check(1, 0.1, 0.0)
            .unwrap();
        let m = v.m_restart().unwrap();
        let read = v.expected_gates(50.0, 5.0, 7.0, false).unwrap();
        let lit = v.expected_gates(50.0, 5.0, 7.0, true).unwrap();
        assert!(close(lit - read, m[1] * 45.0, 1e-12));
    }

    #[test]
    fn noiseless_params_vanish() {
        let noise = NoiseModel::noiseless();
        let ctx = BlockContext {
            stage: Stage::Leaf { s: 100.0 },
            r: 3,
            input_error: 0.0,
            first_sibling: false,
        };
        let p = error_params(&ctx, &noise, 5, &[0.0; 3]).unwrap();
        assert_eq!((p.p_p, p.p_de, p.p_ue, p.p_i), (0.0, 0.0, 0.0, 0.0));
        let up = BlockContext {
            stage: Stage::Upper {
                s_hat: 300.0,
                p_log_children: 0.125,
            },
            ..ctx
        };
        assert_eq!(error_params(&up, &noise, 5, &[0.0; 3]).unwrap().p_p, 0.125);
    }

    #[test]
    fn idle_off_leaves_gate_only_product() {
        let noise = NoiseModel::standard(1e-3, false);
        let (s, n) = (40.0, 4);
        let p = rsp_rate(&Stage::Leaf { s }, &noise, n).unwrap();
        let want = 1.0 - (1.0 - 1e-3f64).powf(24.0) * (1.0 - 1e-4f64).powf(28.0);
        assert!(close(p, want, 1e-15));
    }

    #[test]
    fn noiseless_tree_counts_compiled_gates() {
        let n = 3;
        let tree = CliNRTree::fig2a(40);
        let est = estimate_tree(&tree, n, &NoiseModel::noiseless()).unwrap();
        assert_eq!(est.p_log, 0.0);
        let census = GateCensus::for_qubits(n);
        // Seven blocks: 2n Bell pairs, one check and one injection each,
        // plus the 40 circuit gates.
        let per_block = census.bell_prep + census.check_expected + census.injection;
        assert!(close(
            est.omega_time,
            (6.0 * per_block + 40.0) / 40.0,
            1e-12
        ));
        assert_eq!(est.omega_space, 16.0 / 3.0);
    }

    #[test]
    fn direct_tree_is_unit_overhead() {
        let noise = NoiseModel::standard(1e-3, false);
        let est = estimate_tree(&CliNRTree::direct(50), 5, &noise).unwrap();
        assert_eq!(est.omega_time, 1.0);
        let want = 1.0 - (1.0 - 1e-3f64).powf(25.0) * (1.0 - 1e-4f64).powf(25.0);
        assert!(close(est.p_log, want, 1e-15));
    }

    #[test]
    fn single_block_matches_chained_hand_steps() {
        let params = ErrorParams {
            p_p: 0.1,
            p_de: 0.02,
            p_ue: 0.01,
            p_i: 0.0,
            g_p: 100.0,
            g_c: 10.0,
            g_i: 20.0,
            g_idle: 0.0,
        };
        let est = run_with_params(&params, 1, &MarkovOptions::default()).unwrap();
        assert!(close(est.p_log, 0.0633, 1e-4));
        assert!(close(est.expected_gates, 137.30, 1e-2));
    }
}
