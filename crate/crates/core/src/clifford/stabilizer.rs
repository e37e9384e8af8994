//! Stabilizer groups and the Heisenberg-picture operations built on them.

use rand::Rng;

use super::circuit::CliffordCircuit;
use super::pauli::{Pauli, PauliOperator};
use crate::error::{Error, Result};

/// Generating set of an abelian Pauli group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerGroupView {
    n: usize,
    generators: Vec<PauliOperator>,
}

impl StabilizerGroupView {
    /// Checks dimensions, pairwise commutation and independence.
    pub fn new(n: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.num_qubits() != n) {
            return Err(Error::Dimension {
                expected: n,
                actual: g.num_qubits(),
            });
        }
        let view = Self { n, generators };
        if !view.is_abelian() {
            return Err(Error::InvalidArgument("generators do not commute".into()));
        }
        if view.rank() != view.generators.len() {
            return Err(Error::InvalidArgument(
                "generators are not independent".into(),
            ));
        }
        Ok(view)
    }

    pub(crate) fn new_unchecked(n: usize, generators: Vec<PauliOperator>) -> Self {
        Self { n, generators }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn is_abelian(&self) -> bool {
        let g = &self.generators;
        (0..g.len()).all(|i| (i + 1..g.len()).all(|j| g[i].commutes_with(&g[j])))
    }

    /// GF(2) rank of the generators' symplectic vectors.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<u64>> = self
            .generators
            .iter()
            .map(|g| g.x_words().iter().chain(g.z_words()).copied().collect())
            .collect();
        let bits = rows.first().map_or(0, |r| r.len() * 64);
        let mut rank = 0;
        for col in 0..bits {
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & b != 0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, p)| *a ^= p);
                }
            }
            rank += 1;
        }
        rank
    }

    /// `true` iff `p` commutes with every generator.
    pub fn commutes_with_all(&self, p: &PauliOperator) -> bool {
        self.generators.iter().all(|g| g.commutes_with(p))
    }

    /// Sign-exact Gauss–Jordan elimination with pivot columns visited in
    /// the order `(x_q, z_q)` for each `q` of `qubit_order`.
    fn eliminate(&self, qubit_order: &[usize]) -> Vec<PauliOperator> {
        let mut rows = self.generators.clone();
        let mut rank = 0;
        for &q in qubit_order {
            for use_x in [true, false] {
                let bit = |p: &PauliOperator| if use_x { p.x(q) } else { p.z(q) };
                let Some(pivot) = (rank..rows.len()).find(|&r| bit(&rows[r])) else {
                    continue;
                };
                rows.swap(rank, pivot);
                let pivot_row = rows[rank].clone();
                for r in 0..rows.len() {
                    if r != rank && bit(&rows[r]) {
                        rows[r]
                            .mul_assign(&pivot_row)
                            .expect("group elements commute");
                    }
                }
                rank += 1;
            }
        }
        rows
    }

    /// Reduced row-echelon generating set. Two views generate the same
    /// signed group iff their canonical forms are equal.
    pub fn canonical(&self) -> Self {
        let order: Vec<usize> = (0..self.n).collect();
        let rows = self.eliminate(&order);
        Self {
            n: self.n,
            generators: rows.into_iter().filter(|r| !r.is_identity()).collect(),
        }
    }

    /// Subgroup of elements supported on `qubits`, re-indexed so that
    /// `qubits[i]` becomes qubit `i`.
    pub fn restrict_to(&self, qubits: &[usize]) -> Self {
        let mut inside = vec![false; self.n];
        for &q in qubits {
            inside[q] = true;
        }
        let mut order: Vec<usize> = (0..self.n).filter(|&q| !inside[q]).collect();
        order.extend_from_slice(qubits);
        let rows = self.eliminate(&order);
        let generators = rows
            .into_iter()
            .filter(|r| !r.is_identity() && r.support().all(|q| inside[q]))
            .map(|r| r.restrict(qubits))
            .collect();
        Self {
            n: qubits.len(),
            generators,
        }
    }

    /// Whether `p` (with its sign) is an element of the group.
    pub fn contains(&self, p: &PauliOperator) -> bool {
        if p.num_qubits() != self.n || !self.commutes_with_all(p) {
            return false;
        }
        let mut extended = self.generators.clone();
        extended.push(p.clone());
        let ext = Self::new_unchecked(self.n, extended);
        if ext.rank() != self.rank() {
            return false;
        }
        // `p` lies in the span; its signed copy is in the group iff the
        // product with its canonical decomposition is `+I`.
        let mut canon = self.canonical().generators;
        let mut residue = p.clone();
        let order: Vec<usize> = (0..self.n).collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for &q in &order {
            for use_x in [true, false] {
                let bit = |r: &PauliOperator| if use_x { r.x(q) } else { r.z(q) };
                if rank < canon.len() && bit(&canon[rank]) {
                    pivots.push((q, use_x));
                    rank += 1;
                }
            }
        }
        for (row, (q, use_x)) in canon.iter_mut().zip(pivots) {
            let set = if use_x { residue.x(q) } else { residue.z(q) };
            if set {
                residue.mul_assign(row).expect("commuting");
            }
        }
        residue.is_identity() && !residue.is_negative()
    }
}

/// `U P U†` for the unitary `U` implemented by `circuit`, gate by gate.
pub fn conjugate_pauli(circuit: &CliffordCircuit, p: &PauliOperator) -> Result<PauliOperator> {
    if p.num_qubits() != circuit.num_qubits() {
        return Err(Error::Dimension {
            expected: circuit.num_qubits(),
            actual: p.num_qubits(),
        });
    }
    let mut out = p.clone();
    for g in circuit.gates() {
        g.conjugate(&mut out)?;
    }
    Ok(out)
}

/// Generators `U Z_i U†` of the ideal output state `U|0…0⟩`.
pub fn output_stabilizers(circuit: &CliffordCircuit) -> Result<StabilizerGroupView> {
    let n = circuit.num_qubits();
    let generators = (0..n)
        .map(|q| conjugate_pauli(circuit, &PauliOperator::single(n, q, Pauli::Z)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilizerGroupView::new_unchecked(n, generators))
}

/// Images `(C X_i C†, C Z_i C†)` of the single-qubit Pauli basis.
pub fn basis_images(circuit: &CliffordCircuit) -> Result<Vec<(PauliOperator, PauliOperator)>> {
    let n = circuit.num_qubits();
    (0..n)
        .map(|q| {
            Ok((
                conjugate_pauli(circuit, &PauliOperator::single(n, q, Pauli::X))?,
                conjugate_pauli(circuit, &PauliOperator::single(n, q, Pauli::Z))?,
            ))
        })
        .collect()
}

/// Generators of the resource state `(I ⊗ C)|Φ⁺⟩^{⊗n}` on `2n` qubits.
///
/// Qubits `0..n` are the unprimed Bell halves, `n..2n` the primed halves
/// carrying `C`. Generators come in the order `X_i X_i'`, `Z_i Z_i'` for
/// each `i`, each conjugated by `I ⊗ C`.
pub fn resource_stabilizers(c: &CliffordCircuit) -> Result<StabilizerGroupView> {
    Ok(resource_from_images(c.num_qubits(), &basis_images(c)?))
}

pub(crate) fn resource_from_images(
    n: usize,
    images: &[(PauliOperator, PauliOperator)],
) -> StabilizerGroupView {
    let primed: Vec<usize> = (n..2 * n).collect();
    let mut generators = Vec::with_capacity(2 * n);
    for (i, (ix, iz)) in images.iter().enumerate() {
        for (img, p) in [(ix, Pauli::X), (iz, Pauli::Z)] {
            let mut g = img.embed(2 * n, &primed);
            g.set(i, p);
            generators.push(g);
        }
    }
    StabilizerGroupView::new_unchecked(2 * n, generators)
}

/// Product of a uniformly random subset of generators.
pub fn random_group_element<R: Rng + ?Sized>(
    group: &StabilizerGroupView,
    rng: &mut R,
) -> Result<PauliOperator> {
    if group.is_empty() {
        return Err(Error::InvalidArgument("empty generator list".into()));
    }
    let mut acc = PauliOperator::identity(group.num_qubits());
    for chunk in group.generators().chunks(64) {
        let mask: u64 = rng.gen();
        for (i, g) in chunk.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc.mul_assign(g)?;
            }
        }
    }
    Ok(acc)
}
