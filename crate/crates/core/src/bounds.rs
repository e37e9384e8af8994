//! Closed-form upper bounds on the logical error rate and gate overhead of
//! CliNR implementations, and the depth / overhead selection for the
//! uniformly bounded family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{ceil_tol, threshold_r, CliNRTree, ImplConstants, VertexId};

/// `g_p(x) = 1 − (1−p)^x`: probability of at least one fault in `x` locations.
pub fn g(p: f64, x: f64) -> f64 {
    1.0 - (1.0 - p).powf(x)
}

/// A bound value; `vacuous` is set when the raw value exceeded 1 (rates)
/// or a denominator was non-positive, in which case `value` is clamped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub vacuous: bool,
}

impl Bound {
    fn rate(raw: f64) -> Self {
        if raw.is_finite() && raw <= 1.0 {
            Self {
                value: raw,
                vacuous: false,
            }
        } else {
            Self::VACUOUS_RATE
        }
    }

    const VACUOUS_RATE: Bound = Bound {
        value: 1.0,
        vacuous: true,
    };

    const VACUOUS_OVERHEAD: Bound = Bound {
        value: f64::INFINITY,
        vacuous: true,
    };
}

/// Inputs of the single-block (`CliNR_{1,r}`) bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub p: f64,
    pub n: usize,
    pub r: usize,
    /// Expected gate count of the input circuit.
    pub s_hat: f64,
    /// Logical error rate of the input circuit.
    pub p_log_c: f64,
    pub constants: ImplConstants,
}

impl BoundInputs {
    pub fn new(p: f64, n: usize, r: usize, s_hat: f64, p_log_c: f64) -> Result<Self> {
        let inputs = Self {
            p,
            n,
            r,
            s_hat,
            p_log_c,
            constants: ImplConstants::default(),
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("p_log_c", self.p_log_c)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidParameters(format!(
                    "{name} = {v} outside [0, 1)"
                )));
            }
        }
        if !(self.s_hat >= 0.0 && self.s_hat.is_finite()) {
            return Err(Error::InvalidParameters(format!("s_hat = {}", self.s_hat)));
        }
        self.constants.validate()
    }

    /// `m = A_P n + r (A_V n + B_V)`, the size of one RSP + checks pass.
    pub fn m(&self) -> f64 {
        m_value(self.n, self.r, &self.constants)
    }
}

fn m_value(n: usize, r: usize, k: &ImplConstants) -> f64 {
    let n = n as f64;
    k.a_p * n + r as f64 * (k.a_v * n + k.b_v)
}

// Single-block error expression with separate check count (in 2^-r) and
// pass size m, shared by the recursive fold.
fn block_error(p: f64, n: usize, k: &ImplConstants, r: usize, m: f64, pc: f64) -> Option<f64> {
    let nf = n as f64;
    let den = (1.0 - p).powf(m) * (1.0 - pc);
    if den <= 0.0 {
        return None;
    }
    let rsp = 1.0 - (1.0 - p).powf(k.a_p * nf) * (1.0 - pc);
    let num = rsp * 2f64.powi(-(r as i32)) + 2.0 * g(p, k.a_v * nf + k.b_v);
    Some(num / den + g(p, k.a_i * nf))
}

fn block_gates(p: f64, n: usize, k: &ImplConstants, m: f64, s_hat: f64, pc: f64) -> Option<f64> {
    let den = (1.0 - p).powf(m) * (1.0 - pc);
    if den <= 0.0 {
        return None;
    }
    Some((m + s_hat) / den + k.a_i * n as f64)
}

/// Logical error bound of `CliNR_{1,r}(C)`.
pub fn clinr1_error_bound(inp: &BoundInputs) -> Bound {
    let k = &inp.constants;
    match block_error(inp.p, inp.n, k, inp.r, inp.m(), inp.p_log_c) {
        Some(v) => Bound::rate(v),
        None => Bound::VACUOUS_RATE,
    }
}

/// Gate overhead bound of `CliNR_{1,r}(C)`, relative to `ŝ`.
pub fn clinr1_gate_bound(inp: &BoundInputs) -> Bound {
    let k = &inp.constants;
    match block_gates(inp.p, inp.n, k, inp.m(), inp.s_hat, inp.p_log_c) {
        Some(v) if inp.s_hat > 0.0 => Bound {
            value: v / inp.s_hat,
            vacuous: false,
        },
        _ => Bound::VACUOUS_OVERHEAD,
    }
}

/// Per-level maxima / minima the recursive bounds fold over.
struct LevelStats {
    /// Largest number of children of a vertex at this level.
    t_max: usize,
    /// Smallest / largest `r` over the next level.
    r_min_next: usize,
    m_max_next: f64,
    /// Largest leaf size at this level (0 when it has no leaves).
    leaf_max: usize,
}

fn level_stats(tree: &CliNRTree, n: usize, k: &ImplConstants) -> Vec<LevelStats> {
    let levels = tree.levels();
    (0..levels.len())
        .map(|l| {
            let ids = (0..levels[l].len()).map(|j| VertexId::new(l, j));
            let t_max = ids
                .clone()
                .map(|id| tree.children(id).len())
                .max()
                .unwrap_or(0);
            let leaf_max = ids
                .filter(|&id| tree.is_leaf(id))
                .map(|id| tree.s(id))
                .max()
                .unwrap_or(0);
            let next = levels.get(l + 1);
            let r_min_next = next.map_or(0, |v| v.iter().map(|x| x.r).min().unwrap_or(0));
            let m_max_next = next.map_or(0.0, |v| {
                v.iter().map(|x| m_value(n, x.r, k)).fold(0.0, f64::max)
            });
            LevelStats {
                t_max,
                r_min_next,
                m_max_next,
                leaf_max,
            }
        })
        .collect()
}

/// Upper bounds on the subtree error rate at each level, `p̄_{bℓ}` for
/// `ℓ = 0..=D`; entry 0 is the bound on the whole implementation. `None`
/// marks a level where the fold went vacuous.
pub fn subtree_error_bounds(
    tree: &CliNRTree,
    p: f64,
    n: usize,
    k: &ImplConstants,
) -> Vec<Option<f64>> {
    let stats = level_stats(tree, n, k);
    let d = tree.depth();
    let mut out = vec![None; d + 1];
    // Leaves anywhere are run directly: their error is at most g(p, s).
    out[d] = Some(g(p, stats[d].leaf_max as f64));
    for l in (0..d).rev() {
        let st = &stats[l];
        let folded = out[l + 1].and_then(|pb| {
            block_error(p, n, k, st.r_min_next, st.m_max_next, pb).map(|e| st.t_max as f64 * e)
        });
        let leaf = g(p, st.leaf_max as f64);
        out[l] = folded.filter(|v| *v < 1.0 || l == 0).map(|v| v.max(leaf));
    }
    out
}

/// Logical error bound of the recursive implementation on `tree`.
pub fn recursive_error_bound(tree: &CliNRTree, p: f64, n: usize, k: &ImplConstants) -> Bound {
    match subtree_error_bounds(tree, p, n, k)[0] {
        Some(v) => Bound::rate(v),
        None => Bound::VACUOUS_RATE,
    }
}

/// Gate overhead bound of the recursive implementation on `tree`.
pub fn recursive_gate_bound(tree: &CliNRTree, p: f64, n: usize, k: &ImplConstants) -> Bound {
    let stats = level_stats(tree, n, k);
    let pb = subtree_error_bounds(tree, p, n, k);
    let d = tree.depth();
    let mut s_hat = stats[d].leaf_max as f64;
    for l in (0..d).rev() {
        let st = &stats[l];
        let Some(pb_next) = pb[l + 1] else {
            return Bound::VACUOUS_OVERHEAD;
        };
        let Some(v) = block_gates(p, n, k, st.m_max_next, s_hat, pb_next) else {
            return Bound::VACUOUS_OVERHEAD;
        };
        s_hat = (st.t_max as f64 * v).max(st.leaf_max as f64);
    }
    Bound {
        value: s_hat / tree.root_size().max(1) as f64,
        vacuous: false,
    }
}

/// `α = (9(4 A_V n + 2 B_V) + 3 A_I n) / 2`.
pub fn alpha(n: usize, k: &ImplConstants) -> f64 {
    let n = n as f64;
    (9.0 * (4.0 * k.a_v * n + 2.0 * k.b_v) + 3.0 * k.a_i * n) / 2.0
}

/// `α` with the `n` factors dropped, `(9(4 A_V + 2 B_V) + 3 A_I) / 2`.
pub fn alpha_without_n(k: &ImplConstants) -> f64 {
    (9.0 * (4.0 * k.a_v + 2.0 * k.b_v) + 3.0 * k.a_i) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedBound {
    pub bound: Bound,
    /// Whether `A_P n + 2R(A_V n + B_V) + A_I n < 1/(2p)` holds.
    pub precondition: bool,
}

/// `A_P n + 2R(A_V n + B_V) + A_I n < 1/(2p)`, checked as printed.
pub fn bounded_precondition(p: f64, n: usize, k: &ImplConstants) -> bool {
    let Ok(r) = threshold_r(p, n, k) else {
        return false;
    };
    let nf = n as f64;
    k.a_p * nf + 2.0 * r as f64 * (k.a_v * nf + k.b_v) + k.a_i * nf < 1.0 / (2.0 * p)
}

/// `s p^{D+1} α^D` for the uniformly bounded implementation of depth `d`.
pub fn bounded_error_bound(
    s: usize,
    p: f64,
    n: usize,
    d: usize,
    k: &ImplConstants,
) -> BoundedBound {
    let raw = s as f64 * p.powi(d as i32 + 1) * alpha(n, k).powi(d as i32);
    BoundedBound {
        bound: Bound::rate(raw),
        precondition: bounded_precondition(p, n, k),
    }
}

/// `2 · 12^D`.
pub fn bounded_gate_bound(d: usize) -> f64 {
    2.0 * 12f64.powi(d as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremParameters {
    pub depth: usize,
    pub omega_cap: u64,
    pub qubit_cap: usize,
}

/// Depth, gate overhead cap and qubit count of the vanishing-error
/// construction for a size-`s` circuit on `n` qubits.
pub fn theorem_parameters(s: usize, p: f64, n: usize) -> Result<TheoremParameters> {
    if s == 0 || n == 0 {
        return Err(Error::InvalidParameters("s and n must be positive".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameters(format!("p = {p} outside (0, 1)")));
    }
    let sp = s as f64 * p;
    let depth = (ceil_tol(sp.log2() + 1.0).max(1.0)) as usize;
    let omega_cap = 24 * ceil_tol(sp.powi(4)).max(0.0) as u64;
    Ok(TheoremParameters {
        depth,
        omega_cap,
        qubit_cap: (2 * depth + 1) * n + 1,
    })
}
