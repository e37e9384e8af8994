//! CliNR trees, the uniformly bounded construction and tree text format.
//!
//! A tree is stored level by level. Vertex `v(ℓ, j)` is `levels[ℓ][j]`;
//! children of a vertex are a contiguous run of the next level, so the
//! within-level order is the left-to-right order of the tree.
//!
//! Text format, one vertex per line (`-` marks the root's missing parent,
//! parents are within-level indices of the level above):
//!
//! ```text
//! # level index parent s r
//! v 0 0 - 10 0
//! v 1 0 0 10 3
//! ```

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gate-count coefficients of the RSP, check and RSI gadgets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplConstants {
    pub a_p: f64,
    pub a_v: f64,
    pub b_v: f64,
    pub a_i: f64,
}

impl Default for ImplConstants {
    fn default() -> Self {
        Self {
            a_p: 3.0,
            a_v: 1.5,
            b_v: 3.0,
            a_i: 5.0,
        }
    }
}

impl ImplConstants {
    pub fn validate(&self) -> Result<()> {
        if [self.a_p, self.a_v, self.b_v, self.a_i]
            .iter()
            .all(|c| c.is_finite() && *c > 0.0)
        {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "implementation constants must be positive".into(),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub level: usize,
    pub index: usize,
}

impl VertexId {
    pub const ROOT: VertexId = VertexId { level: 0, index: 0 };

    pub fn new(level: usize, index: usize) -> Self {
        Self { level, index }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v({},{})", self.level, self.index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub parent: Option<usize>,
    pub s: usize,
    pub r: usize,
}

/// One violated tree invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub vertex: VertexId,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.vertex, self.message)
    }
}

/// Ordered rooted tree with size map `s` and check map `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliNRTree {
    levels: Vec<Vec<Vertex>>,
}

impl CliNRTree {
    /// Builds a tree from per-level vertex lists and validates it.
    pub fn from_levels(levels: Vec<Vec<Vertex>>) -> Result<Self> {
        let tree = Self { levels };
        tree.ensure_valid()?;
        Ok(tree)
    }

    /// Root-only tree: the circuit is run directly.
    pub fn direct(s: usize) -> Self {
        Self {
            levels: vec![vec![Vertex {
                parent: None,
                s,
                r: 0,
            }]],
        }
    }

    /// Root with a single child carrying the whole circuit (`CliNR_{1,r}`).
    pub fn clinr1(s: usize, r: usize) -> Self {
        Self::uniform(s, 1, None, r).expect("one leaf always fits")
    }

    /// Uniform tree: `t1` vertices at level 1, each with `children`
    /// children at level 2 when given, constant `r` off the root. Leaf
    /// sizes are an even split of `s` with the remainder on the left.
    pub fn uniform(s: usize, t1: usize, children: Option<usize>, r: usize) -> Result<Self> {
        if t1 == 0 || children == Some(0) {
            return Err(Error::InvalidTree(
                "uniform tree needs nonzero fan-out".into(),
            ));
        }
        let fan = children.unwrap_or(1);
        let leaves = even_split(s, t1 * fan);
        let root = Vertex {
            parent: None,
            s,
            r: 0,
        };
        let mut levels = vec![vec![root]];
        match children {
            None => levels.push(leaves.iter().map(|&s| child(0, s, r)).collect()),
            Some(c) => {
                let mids = (0..t1)
                    .map(|j| child(0, leaves[j * c..(j + 1) * c].iter().sum(), r))
                    .collect();
                levels.push(mids);
                levels.push(
                    leaves
                        .iter()
                        .enumerate()
                        .map(|(i, &s)| child(i / c, s, r))
                        .collect(),
                );
            }
        }
        Self::from_levels(levels)
    }

    /// Depth-2 shape with two level-1 vertices of two leaves each, `r = 1`.
    pub fn fig2a(s: usize) -> Self {
        Self::uniform(s, 2, Some(2), 1).expect("valid shape")
    }

    pub fn depth(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn levels(&self) -> &[Vec<Vertex>] {
        &self.levels
    }

    pub fn num_vertices(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn root_size(&self) -> usize {
        self.levels[0][0].s
    }

    pub fn vertex(&self, id: VertexId) -> Result<&Vertex> {
        self.levels
            .get(id.level)
            .and_then(|l| l.get(id.index))
            .ok_or(Error::Address {
                level: id.level,
                index: id.index,
            })
    }

    pub fn s(&self, id: VertexId) -> usize {
        self.levels[id.level][id.index].s
    }

    pub fn r(&self, id: VertexId) -> usize {
        self.levels[id.level][id.index].r
    }

    pub fn set_r(&mut self, id: VertexId, r: usize) -> Result<()> {
        self.vertex(id)?;
        self.levels[id.level][id.index].r = r;
        Ok(())
    }

    /// Within-level indices of the children of `id` on level `id.level + 1`.
    pub fn children(&self, id: VertexId) -> Range<usize> {
        let Some(next) = self.levels.get(id.level + 1) else {
            return 0..0;
        };
        let start = next.partition_point(|v| v.parent.is_some_and(|p| p < id.index));
        let end = next.partition_point(|v| v.parent.is_some_and(|p| p <= id.index));
        start..end
    }

    pub fn child_ids(&self, id: VertexId) -> impl Iterator<Item = VertexId> {
        let level = id.level + 1;
        self.children(id).map(move |j| VertexId::new(level, j))
    }

    pub fn is_leaf(&self, id: VertexId) -> bool {
        self.children(id).is_empty()
    }

    /// All vertex addresses, level by level.
    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(l, vs)| (0..vs.len()).map(move |j| VertexId::new(l, j)))
    }

    /// Every violated invariant; empty iff the tree is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let root = VertexId::ROOT;
        let mut report =
            |vertex: VertexId, message: String| out.push(Violation { vertex, message });
        match self.levels.first().map(Vec::len) {
            Some(1) => {}
            Some(0) | None => {
                report(root, "tree has no vertices".into());
                return out;
            }
            Some(k) => report(
                root,
                format!("level 0 must hold exactly one vertex, found {k}"),
            ),
        }
        if self.levels[0][0].r != 0 {
            report(
                root,
                format!("root must have r = 0, found {}", self.levels[0][0].r),
            );
        }
        if self.levels[0][0].parent.is_some() {
            report(root, "root cannot have a parent".into());
        }
        for (l, level) in self.levels.iter().enumerate().skip(1) {
            if level.is_empty() {
                report(VertexId::new(l, 0), "empty level".into());
            }
            let above = self.levels[l - 1].len();
            let mut last = 0;
            for (j, v) in level.iter().enumerate() {
                let id = VertexId::new(l, j);
                match v.parent {
                    None => report(id, "missing parent".into()),
                    Some(p) if p >= above => report(id, format!("parent index {p} out of range")),
                    Some(p) if p < last => report(id, "children are out of order".into()),
                    Some(p) => last = p,
                }
            }
        }
        for l in 0..self.levels.len() {
            for j in 0..self.levels[l].len() {
                let id = VertexId::new(l, j);
                let kids = self.children(id);
                if kids.is_empty() {
                    continue;
                }
                let sum: usize = self.levels[l + 1][kids].iter().map(|v| v.s).sum();
                if sum != self.levels[l][j].s {
                    report(
                        id,
                        format!(
                            "children sizes sum to {sum}, expected {}",
                            self.levels[l][j].s
                        ),
                    );
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
            Err(Error::InvalidTree(msgs.join("; ")))
        }
    }

    /// The subtree rooted at `id` with its root's `r` set to zero.
    pub fn subtree(&self, id: VertexId) -> Result<Self> {
        let top = *self.vertex(id)?;
        let mut levels = vec![vec![Vertex {
            parent: None,
            r: 0,
            ..top
        }]];
        let mut frontier = id.index..id.index + 1;
        for l in id.level + 1..self.levels.len() {
            let level = &self.levels[l];
            let start = level.partition_point(|v| v.parent.is_some_and(|p| p < frontier.start));
            let end = level.partition_point(|v| v.parent.is_some_and(|p| p < frontier.end));
            if start == end {
                break;
            }
            levels.push(
                level[start..end]
                    .iter()
                    .map(|v| Vertex {
                        parent: v.parent.map(|p| p - frontier.start),
                        ..*v
                    })
                    .collect(),
            );
            frontier = start..end;
        }
        Self::from_levels(levels)
    }

    /// Random valid tree of depth at most `max_depth` over `s` gates with
    /// `r` drawn from `0..=max_r` off the root.
    pub fn random<R: Rng + ?Sized>(
        s: usize,
        max_depth: usize,
        max_fanout: usize,
        max_r: usize,
        rng: &mut R,
    ) -> Self {
        let mut levels = vec![vec![Vertex {
            parent: None,
            s,
            r: 0,
        }]];
        let max_fanout = max_fanout.max(1);
        for l in 0..max_depth {
            let mut next = Vec::new();
            for (j, v) in levels[l].iter().enumerate() {
                // Non-root vertices may stay leaves so irregular shapes occur.
                if l > 0 && rng.gen_bool(0.4) {
                    continue;
                }
                let k = rng.gen_range(1..=max_fanout);
                for part in random_split(v.s, k, rng) {
                    next.push(child(j, part, rng.gen_range(0..=max_r)));
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        Self { levels }
    }
}

fn child(parent: usize, s: usize, r: usize) -> Vertex {
    Vertex {
        parent: Some(parent),
        s,
        r,
    }
}

/// `s` split into `k` contiguous parts, the first `s mod k` one larger.
pub fn even_split(s: usize, k: usize) -> Vec<usize> {
    (0..k).map(|j| s / k + usize::from(j < s % k)).collect()
}

fn random_split<R: Rng + ?Sized>(s: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut cuts: Vec<usize> = (0..k - 1).map(|_| rng.gen_range(0..=s)).collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts {
        parts.push(c - prev);
        prev = c;
    }
    parts.push(s - prev);
    parts
}

/// Maximum fan-in `T(p, n)` of the uniformly bounded construction.
pub fn capacity_t(p: f64, n: usize, k: &ImplConstants) -> Result<usize> {
    check_rate(p)?;
    let n = n as f64;
    let denom = 9.0 * (4.0 * k.a_v * n + 2.0 * k.b_v) * p + 3.0 * k.a_i * n * p;
    let t = floor_tol(2.0 / denom);
    if t < 1.0 {
        Err(Error::RegimeUnreachable)
    } else {
        Ok(t as usize)
    }
}

/// Check count `R(p, n)` of the uniformly bounded construction.
pub fn threshold_r(p: f64, n: usize, k: &ImplConstants) -> Result<usize> {
    check_rate(p)?;
    let n = n as f64;
    let num = p * k.a_p * n * (1.0 - 2.0 / 3.0) + 2.0 / 3.0;
    let den = 2.0 * k.a_v * n * p;
    if num <= 0.0 || den <= 0.0 {
        return Err(Error::InvalidRegime(
            "non-positive logarithm argument".into(),
        ));
    }
    let r = ceil_tol(num.log2() - den.log2());
    if r < 0.0 {
        return Err(Error::InvalidRegime(format!("negative check count {r}")));
    }
    Ok(r as usize)
}

// Rounding that absorbs floating-point noise around exact integers, so
// e.g. 1.5 · 10⁶ · 10⁻⁵ rounds up to 15 rather than 16.
const ROUND_TOL: f64 = 1e-9;

pub(crate) fn ceil_tol(x: f64) -> f64 {
    (x - ROUND_TOL * x.abs().max(1.0)).ceil()
}

pub(crate) fn floor_tol(x: f64) -> f64 {
    (x + ROUND_TOL * x.abs().max(1.0)).floor()
}

fn check_rate(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRegime(format!(
            "error rate {p} outside (0, 1)"
        )))
    }
}

/// Uniformly bounded tree of depth `d` for a size-`s` circuit.
///
/// The fan-in `T` is only consulted when grouping levels exist (`d ≥ 2`).
pub fn bounded_tree(s: usize, p: f64, n: usize, d: usize, k: &ImplConstants) -> Result<CliNRTree> {
    if d == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let r = threshold_r(p, n, k)?;
    let t = if d >= 2 { capacity_t(p, n, k)? } else { 0 };
    let t_leaf = ceil_tol(3.0 * s as f64 * p / 2.0) as usize;
    if t_leaf == 0 || t_leaf > s {
        return Err(Error::InvalidRegime(format!(
            "{t_leaf} leaves cannot split a circuit of size {s}"
        )));
    }
    let leaves = even_split(s, t_leaf);

    // Built bottom-up; parents are filled in once the level above exists.
    let mut rev_levels: Vec<Vec<Vertex>> = vec![leaves.iter().map(|&s| child(0, s, r)).collect()];
    for _ in (1..d).rev() {
        let below = rev_levels.last_mut().expect("nonempty");
        let mut level = Vec::new();
        for (k, group) in below.chunks_mut(t).enumerate() {
            let size = group.iter().map(|v| v.s).sum();
            for v in group.iter_mut() {
                v.parent = Some(k);
            }
            level.push(child(0, size, r));
        }
        rev_levels.push(level);
    }
    rev_levels.push(vec![Vertex {
        parent: None,
        s,
        r: 0,
    }]);
    rev_levels.reverse();
    CliNRTree::from_levels(rev_levels)
}

impl fmt::Display for CliNRTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# level index parent s r")?;
        for (l, level) in self.levels.iter().enumerate() {
            for (j, v) in level.iter().enumerate() {
                match v.parent {
                    Some(p) => writeln!(f, "v {l} {j} {p} {} {}", v.s, v.r)?,
                    None => writeln!(f, "v {l} {j} - {} {}", v.s, v.r)?,
                }
            }
        }
        Ok(())
    }
}

impl FromStr for CliNRTree {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut levels: Vec<Vec<Vertex>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse {
                line: line_no,
                message: m.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let ["v", level, index, parent, s, r] = fields.as_slice() else {
                return Err(err("expected `v level index parent s r`"));
            };
            let num = |t: &str| t.parse::<usize>().map_err(|_| err("bad integer"));
            let (level, index) = (num(level)?, num(index)?);
            let parent = match *parent {
                "-" => None,
                t => Some(num(t)?),
            };
            if level > levels.len() || (level == levels.len() && index != 0) {
                return Err(err("vertices must be listed level by level"));
            }
            if level == levels.len() {
                levels.push(Vec::new());
            }
            if index != levels[level].len() {
                return Err(err("vertex indices must be consecutive"));
            }
            levels[level].push(Vertex {
                parent,
                s: num(s)?,
                r: num(r)?,
            });
        }
        CliNRTree::from_levels(levels)
    }
}
