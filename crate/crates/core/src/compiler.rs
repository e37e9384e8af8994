//! Compilation of a circuit and a CliNR tree into a block program.
//!
//! Physical qubits are grouped into `2D + 1` chunks of `n` rails plus one
//! shared check ancilla (the last qubit). Chunk 0 holds the input. Each
//! `CliNR_1` block takes its input register, allocates two fresh chunks
//! `a` and `b` for the Bell pairs, runs its subcircuit on `b` (directly at
//! a leaf, through its children otherwise), checks the `(a, b)` resource
//! state and teleports the input through it. The output lives on `b`; the
//! input and `a` chunks are released. Chunks are always taken lowest
//! first, so the layout is a pure function of the tree.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clifford::stabilizer::{basis_images, resource_from_images};
use crate::clifford::{
    output_stabilizers, random_group_element, CliffordCircuit, CliffordGate, Pauli, PauliOperator,
    StabilizerGroupView,
};
use crate::error::{Error, Result};
use crate::tree::{CliNRTree, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Rsp,
    Check,
    Rsi,
    Plain,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::Rsp => "RSP",
            BlockKind::Check => "CHECK",
            BlockKind::Rsi => "RSI",
            BlockKind::Plain => "PLAIN",
        })
    }
}

/// Stabilizer group of one resource state, in physical coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceGroup {
    pub vertex: VertexId,
    /// The `2n` resource qubits: the `a` half then the `b` half.
    pub qubits: Vec<usize>,
    pub group: StabilizerGroupView,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckSpec {
    /// Index into [`CliNRProgram::groups`].
    pub group: usize,
    /// Set when stabilizers are drawn once at compile time.
    pub fixed: Option<PauliOperator>,
}

/// Classical correction of one teleportation measurement: when the
/// outcome is 1, `pauli` is applied to the output register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub measured: usize,
    pub pauli: PauliOperator,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injection {
    pub gates: Vec<CliffordGate>,
    /// One entry per measurement, in gate order.
    pub corrections: Vec<Correction>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub vertex: VertexId,
    /// For a CHECK with fresh stabilizers this is empty: the gadget is
    /// rebuilt from a new group element on every attempt.
    pub gates: Vec<CliffordGate>,
    pub restart_target: Option<usize>,
    /// RSP block of the vertex that owns this block, if any.
    pub owner_rsp: Option<usize>,
    pub check_index: Option<usize>,
    pub check: Option<CheckSpec>,
    pub corrections: Vec<Correction>,
    /// Qubits holding live data while the block runs (idle-noise support).
    pub active: Vec<usize>,
}

impl Block {
    /// Counted operations of one pass; classical corrections included.
    pub fn counted_gates(&self) -> usize {
        self.gates.iter().filter(|g| g.is_counted()).count() + self.corrections.len() / 2
    }
}

/// Per-gadget operation counts for `n` logical qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateCensus {
    /// Bell-pair preparation: `n` H and `n` CX.
    pub bell_prep: f64,
    /// One check: expected support `1.5n`, two H and a measurement.
    pub check_expected: f64,
    /// Injection: `n` CX, `n` H, `2n` measurements, `n` corrections.
    pub injection: f64,
}

impl GateCensus {
    pub fn for_qubits(n: usize) -> Self {
        let n = n as f64;
        Self {
            bell_prep: 2.0 * n,
            check_expected: 1.5 * n + 3.0,
            injection: 5.0 * n,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompileOptions {
    /// Draw each check's stabilizer once at compile time instead of on
    /// every attempt.
    pub fixed_stabilizers: bool,
}

/// Executable block program.
#[derive(Clone, Debug)]
pub struct CliNRProgram {
    pub n: usize,
    pub total_qubits: usize,
    pub blocks: Vec<Block>,
    pub tree: CliNRTree,
    pub groups: Vec<ResourceGroup>,
    pub input_rails: Vec<usize>,
    pub output_rails: Vec<usize>,
    pub check_ancilla: usize,
    /// `U Z_i U†` of the input circuit, embedded on the output rails.
    pub output_stabilizers: Vec<PauliOperator>,
    /// Size of the input circuit.
    pub circuit_size: usize,
    pub seed: u64,
}

impl CliNRProgram {
    /// Counted operations of one noiseless pass, with expected check sizes.
    pub fn expected_single_pass_gates(&self) -> f64 {
        let census = GateCensus::for_qubits(self.n);
        self.blocks
            .iter()
            .map(|b| match (b.kind, &b.check) {
                (BlockKind::Check, Some(CheckSpec { fixed: None, .. })) => census.check_expected,
                _ => b.counted_gates() as f64,
            })
            .sum()
    }
}

/// `(2D + 1) n + 1`.
pub fn qubit_count(tree: &CliNRTree, n: usize) -> usize {
    (2 * tree.depth() + 1) * n + 1
}

/// Gate ranges `[start, end)` of every vertex, level by level. Children
/// split their parent's range in order, so leaves above the deepest level
/// are allowed.
pub fn partition_ranges(tree: &CliNRTree) -> Vec<Vec<Range<usize>>> {
    let mut out: Vec<Vec<Range<usize>>> = vec![vec![0..tree.root_size()]];
    for level in &tree.levels()[1..] {
        let above = out.last().expect("root level");
        let mut next: Vec<usize> = above.iter().map(|r| r.start).collect();
        let ranges = level
            .iter()
            .map(|v| {
                let p = v.parent.expect("validated tree");
                let r = next[p]..next[p] + v.s;
                next[p] += v.s;
                r
            })
            .collect();
        out.push(ranges);
    }
    out
}

/// Contiguous split of `c` into the subcircuits `C_{ℓ,j}`.
pub fn partition(
    c: &CliffordCircuit,
    tree: &CliNRTree,
) -> Result<BTreeMap<VertexId, CliffordCircuit>> {
    if c.size() != tree.root_size() || !c.is_unitary() {
        return Err(Error::Partition {
            circuit: c.size(),
            tree: tree.root_size(),
        });
    }
    let mut out = BTreeMap::new();
    for (l, ranges) in partition_ranges(tree).into_iter().enumerate() {
        for (j, r) in ranges.into_iter().enumerate() {
            out.insert(VertexId::new(l, j), c.slice(r.start, r.end));
        }
    }
    Ok(out)
}

/// Measurement of `stabilizer` through the ancilla: H, controlled Paulis,
/// H, measure, reset.
pub fn build_check_gadget(stabilizer: &PauliOperator, ancilla: usize) -> Result<Vec<CliffordGate>> {
    if stabilizer.is_identity() {
        return Err(Error::InvalidArgument("identity stabilizer".into()));
    }
    if ancilla < stabilizer.num_qubits() && stabilizer.get(ancilla) != Pauli::I {
        return Err(Error::Layout("stabilizer acts on the check ancilla".into()));
    }
    let mut gates = Vec::with_capacity(stabilizer.weight() + 4);
    push_check_gadget(stabilizer, ancilla, &mut gates);
    Ok(gates)
}

/// Appends the gadget; an identity element leaves only the ancilla
/// operations, whose outcome is then always 0.
pub(crate) fn push_check_gadget(p: &PauliOperator, ancilla: usize, gates: &mut Vec<CliffordGate>) {
    gates.push(CliffordGate::H(ancilla));
    for q in p.support() {
        gates.push(match p.get(q) {
            Pauli::X => CliffordGate::CX(ancilla, q),
            Pauli::Y => CliffordGate::CY(ancilla, q),
            _ => CliffordGate::CZ(ancilla, q),
        });
    }
    gates.push(CliffordGate::H(ancilla));
    gates.push(CliffordGate::M(ancilla));
    gates.push(CliffordGate::R(ancilla));
}

/// Transversal Bell measurements of `input` against the `a` half of a
/// resource state whose `b` half carries `C`; `images` are `(C X_i C†,
/// C Z_i C†)` on `n` local qubits, mapped onto `b` for the corrections.
pub fn build_injection_gadget(
    total_qubits: usize,
    input: &[usize],
    a: &[usize],
    b: &[usize],
    images: &[(PauliOperator, PauliOperator)],
) -> Result<Injection> {
    let n = input.len();
    if a.len() != n || b.len() != n || images.len() != n {
        return Err(Error::Layout("rail lengths differ".into()));
    }
    let mut seen = vec![false; total_qubits];
    for &q in input.iter().chain(a).chain(b) {
        if q >= total_qubits || std::mem::replace(&mut seen[q], true) {
            return Err(Error::Layout(format!("rail {q} repeated or out of range")));
        }
    }
    let mut gates = Vec::with_capacity(4 * n);
    let mut corrections = Vec::with_capacity(2 * n);
    for i in 0..n {
        gates.extend([
            CliffordGate::CX(input[i], a[i]),
            CliffordGate::H(input[i]),
            CliffordGate::M(input[i]),
            CliffordGate::M(a[i]),
        ]);
        let (img_x, img_z) = &images[i];
        corrections.push(Correction {
            measured: input[i],
            pauli: img_z.embed(total_qubits, b),
        });
        corrections.push(Correction {
            measured: a[i],
            pauli: img_x.embed(total_qubits, b),
        });
    }
    Ok(Injection { gates, corrections })
}

struct Builder<'a> {
    n: usize,
    total: usize,
    ancilla: usize,
    tree: &'a CliNRTree,
    parts: BTreeMap<VertexId, CliffordCircuit>,
    free: Vec<bool>,
    blocks: Vec<Block>,
    groups: Vec<ResourceGroup>,
    rng: Option<ChaCha8Rng>,
}

impl Builder<'_> {
    fn rails(&self, chunk: usize) -> Vec<usize> {
        (chunk * self.n..(chunk + 1) * self.n).collect()
    }

    fn alloc(&mut self) -> Result<usize> {
        let c = self
            .free
            .iter()
            .position(|&f| f)
            .ok_or_else(|| Error::Layout("out of register chunks".into()))?;
        self.free[c] = false;
        Ok(c)
    }

    fn active(&self, with_ancilla: bool) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.free.len())
            .filter(|&c| !self.free[c])
            .flat_map(|c| self.rails(c))
            .collect();
        if with_ancilla {
            out.push(self.ancilla);
        }
        out
    }

    fn push(&mut self, kind: BlockKind, vertex: VertexId, gates: Vec<CliffordGate>) -> usize {
        let active = self.active(kind == BlockKind::Check);
        self.blocks.push(Block {
            kind,
            vertex,
            gates,
            restart_target: None,
            owner_rsp: None,
            check_index: None,
            check: None,
            corrections: Vec::new(),
            active,
        });
        self.blocks.len() - 1
    }

    /// Emits `CliNR_{1,r}` of `v` on input chunk `inp`; returns the output chunk.
    fn vertex(&mut self, v: VertexId, inp: usize) -> Result<usize> {
        let a = self.alloc()?;
        let b = self.alloc()?;
        let (ra, rb) = (self.rails(a), self.rails(b));
        let sub = self.parts[&v].clone();

        let mut gates: Vec<CliffordGate> =
            ra.iter().chain(&rb).map(|&q| CliffordGate::R(q)).collect();
        for i in 0..self.n {
            gates.push(CliffordGate::H(ra[i]));
            gates.push(CliffordGate::CX(ra[i], rb[i]));
        }
        let leaf = self.tree.is_leaf(v);
        if leaf {
            gates.extend(sub.gates().iter().map(|g| g.remap(|q| rb[q])));
        }
        let rsp = self.push(BlockKind::Rsp, v, gates);
        self.blocks[rsp].owner_rsp = Some(rsp);

        let mut data = b;
        if !leaf {
            for child in self.tree.child_ids(v).collect::<Vec<_>>() {
                data = self.vertex(child, data)?;
            }
        }
        let rd = self.rails(data);

        let images = basis_images(&sub)?;
        let local = resource_from_images(self.n, &images);
        let mut physical: Vec<usize> = ra.clone();
        physical.extend_from_slice(&rd);
        let generators = local
            .generators()
            .iter()
            .map(|g| g.embed(self.total, &physical))
            .collect();
        let group = StabilizerGroupView::new_unchecked(self.total, generators);
        let gid = self.groups.len();
        self.groups.push(ResourceGroup {
            vertex: v,
            qubits: physical,
            group,
        });

        for k in 0..self.tree.r(v) {
            let (fixed, gates) = match self.rng.as_mut() {
                Some(rng) => {
                    let p = random_group_element(&self.groups[gid].group, rng)?;
                    let mut gates = Vec::new();
                    push_check_gadget(&p, self.ancilla, &mut gates);
                    (Some(p), gates)
                }
                None => (None, Vec::new()),
            };
            let idx = self.push(BlockKind::Check, v, gates);
            let blk = &mut self.blocks[idx];
            blk.restart_target = Some(rsp);
            blk.owner_rsp = Some(rsp);
            blk.check_index = Some(k);
            blk.check = Some(CheckSpec { group: gid, fixed });
        }

        let inj = build_injection_gadget(self.total, &self.rails(inp), &ra, &rd, &images)?;
        let idx = self.push(BlockKind::Rsi, v, inj.gates);
        self.blocks[idx].corrections = inj.corrections;
        self.blocks[idx].owner_rsp = Some(rsp);
        self.free[inp] = true;
        self.free[a] = true;
        Ok(data)
    }
}

/// Compiles with fresh stabilizers per check attempt.
pub fn compile(c: &CliffordCircuit, tree: &CliNRTree, seed: u64) -> Result<CliNRProgram> {
    compile_with(c, tree, seed, CompileOptions::default())
}

pub fn compile_with(
    c: &CliffordCircuit,
    tree: &CliNRTree,
    seed: u64,
    options: CompileOptions,
) -> Result<CliNRProgram> {
    tree.ensure_valid()?;
    let parts = partition(c, tree)?;
    let n = c.num_qubits();
    let chunks = 2 * tree.depth() + 1;
    let total = qubit_count(tree, n);
    let mut free = vec![true; chunks];
    free[0] = false;
    let mut b = Builder {
        n,
        total,
        ancilla: total - 1,
        tree,
        parts,
        free,
        blocks: Vec::new(),
        groups: Vec::new(),
        rng: options
            .fixed_stabilizers
            .then(|| ChaCha8Rng::seed_from_u64(seed)),
    };
    let root = VertexId::ROOT;
    let mut data = 0;
    if tree.is_leaf(root) {
        let rails = b.rails(0);
        let gates = c.gates().iter().map(|g| g.remap(|q| rails[q])).collect();
        b.push(BlockKind::Plain, root, gates);
    } else {
        for child in tree.child_ids(root).collect::<Vec<_>>() {
            data = b.vertex(child, data)?;
        }
    }
    let output_rails = b.rails(data);
    let stabs = output_stabilizers(c)?
        .generators()
        .iter()
        .map(|g| g.embed(total, &output_rails))
        .collect();
    Ok(CliNRProgram {
        n,
        total_qubits: total,
        input_rails: b.rails(0),
        output_rails,
        check_ancilla: b.ancilla,
        blocks: b.blocks,
        groups: b.groups,
        tree: tree.clone(),
        output_stabilizers: stabs,
        circuit_size: c.size(),
        seed,
    })
}

fn fmt_qubits(qs: &[usize]) -> String {
    // Runs of consecutive qubits are written as `a..b` (end exclusive).
    let mut parts = Vec::new();
    let mut i = 0;
    while i < qs.len() {
        let mut j = i;
        while j + 1 < qs.len() && qs[j + 1] == qs[j] + 1 {
            j += 1;
        }
        if j > i {
            parts.push(format!("{}..{}", qs[i], qs[j] + 1));
        } else {
            parts.push(qs[i].to_string());
        }
        i = j + 1;
    }
    parts.join(",")
}

/// Block-structured dump: header, layout, then one section per block.
impl fmt::Display for CliNRProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "program n={} qubits={} depth={} blocks={} seed={}",
            self.n,
            self.total_qubits,
            self.tree.depth(),
            self.blocks.len(),
            self.seed
        )?;
        writeln!(f, "input {}", fmt_qubits(&self.input_rails))?;
        writeln!(f, "output {}", fmt_qubits(&self.output_rails))?;
        writeln!(f, "ancilla {}", self.check_ancilla)?;
        for (i, b) in self.blocks.iter().enumerate() {
            write!(f, "block {i} {} {}", b.kind, b.vertex)?;
            if let Some(k) = b.check_index {
                write!(f, " k={k}")?;
            }
            if let Some(t) = b.restart_target {
                write!(f, " restart={t}")?;
            }
            if let Some(c) = &b.check {
                let g = &self.groups[c.group];
                write!(f, " group={} on={}", c.group, fmt_qubits(&g.qubits))?;
                if c.fixed.is_none() {
                    write!(f, " stabilizer=fresh")?;
                }
            }
            writeln!(f, " active={}", fmt_qubits(&b.active))?;
            for g in &b.gates {
                writeln!(f, "  {g}")?;
            }
            for c in &b.corrections {
                let sparse: Vec<String> = c
                    .pauli
                    .support()
                    .map(|q| format!("{}{q}", c.pauli.get(q)))
                    .collect();
                writeln!(f, "  if M {} then {}", c.measured, sparse.join(" "))?;
            }
        }
        Ok(())
    }
}
