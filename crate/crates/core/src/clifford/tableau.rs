//! Stabilizer tableau simulator with destabilizers (Aaronson–Gottesman).
//!
//! Used for noiseless reference runs and compile-time checks; the Monte
//! Carlo engine tracks Pauli frames instead.

use rand::Rng;

use super::circuit::CliffordGate;
use super::pauli::{Pauli, PauliOperator};
use super::stabilizer::StabilizerGroupView;

#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    /// Rows `0..n` are destabilizers, `n..2n` stabilizers.
    rows: Vec<PauliOperator>,
}

impl Tableau {
    /// The all-zero state `|0…0⟩`.
    pub fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        for q in 0..n {
            rows.push(PauliOperator::single(n, q, Pauli::X));
        }
        for q in 0..n {
            rows.push(PauliOperator::single(n, q, Pauli::Z));
        }
        Self { n, rows }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> StabilizerGroupView {
        StabilizerGroupView::new_unchecked(self.n, self.rows[self.n..].to_vec())
    }

    /// `rows[h] ← rows[i] · rows[h]`; destabilizer phases are not tracked.
    fn rowsum(&mut self, h: usize, i: usize) {
        let src = self.rows[i].clone();
        if h < self.n {
            let neg = self.rows[h].is_negative();
            self.rows[h].xor_assign(&src);
            self.rows[h].set_negative(neg);
        } else {
            self.rows[h]
                .mul_assign(&src)
                .expect("stabilizer rows commute");
        }
    }

    /// Applies a unitary gate or a measurement/reset. Measurements return
    /// the outcome bit.
    pub fn apply<R: Rng + ?Sized>(&mut self, g: &CliffordGate, rng: &mut R) -> Option<bool> {
        match *g {
            CliffordGate::M(q) => Some(self.measure(q, rng)),
            CliffordGate::R(q) => {
                if self.measure(q, rng) {
                    self.apply_unitary(&CliffordGate::X(q));
                }
                None
            }
            _ => {
                self.apply_unitary(g);
                None
            }
        }
    }

    pub fn apply_unitary(&mut self, g: &CliffordGate) {
        for row in &mut self.rows {
            g.conjugate(row).expect("unitary gate");
        }
    }

    /// Applies a Pauli operator as gates (global phase ignored).
    pub fn apply_pauli(&mut self, p: &PauliOperator) {
        for q in p.support().collect::<Vec<_>>() {
            let g = match p.get(q) {
                Pauli::X => CliffordGate::X(q),
                Pauli::Y => CliffordGate::Y(q),
                Pauli::Z => CliffordGate::Z(q),
                Pauli::I => continue,
            };
            self.apply_unitary(&g);
        }
    }

    /// Z-basis measurement of qubit `q`; collapses the state.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| self.rows[i].x(q)) {
            for i in 0..2 * n {
                if i != p && self.rows[i].x(q) {
                    if i == p - n {
                        continue;
                    }
                    self.rowsum(i, p);
                }
            }
            self.rows[p - n] = self.rows[p].clone();
            let outcome: bool = rng.gen();
            let mut z = PauliOperator::single(n, q, Pauli::Z);
            z.set_negative(outcome);
            self.rows[p] = z;
            outcome
        } else {
            self.peek_deterministic(q)
        }
    }

    /// Outcome of a Z measurement on `q` if it is deterministic.
    pub fn deterministic_outcome(&self, q: usize) -> Option<bool> {
        if (self.n..2 * self.n).any(|i| self.rows[i].x(q)) {
            None
        } else {
            Some(self.peek_deterministic(q))
        }
    }

    fn peek_deterministic(&self, q: usize) -> bool {
        let n = self.n;
        let mut scratch = PauliOperator::identity(n);
        for i in 0..n {
            if self.rows[i].x(q) {
                scratch
                    .mul_assign(&self.rows[i + n])
                    .expect("stabilizers commute");
            }
        }
        scratch.is_negative()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_correlations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let mut t = Tableau::new(2);
            t.apply(&CliffordGate::H(0), &mut rng);
            t.apply(&CliffordGate::CX(0, 1), &mut rng);
            let a = t.measure(0, &mut rng);
            assert_eq!(t.deterministic_outcome(1), Some(a));
            assert_eq!(t.measure(1, &mut rng), a);
        }
    }

    #[test]
    fn reset_returns_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = Tableau::new(1);
        t.apply(&CliffordGate::H(0), &mut rng);
        t.apply(&CliffordGate::R(0), &mut rng);
        assert_eq!(t.deterministic_outcome(0), Some(false));
        t.apply(&CliffordGate::X(0), &mut rng);
        assert_eq!(t.deterministic_outcome(0), Some(true));
    }

    #[test]
    fn plus_state_is_random_but_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ones = 0;
        for _ in 0..200 {
            let mut t = Tableau::new(1);
            t.apply(&CliffordGate::H(0), &mut rng);
            let m = t.measure(0, &mut rng);
            assert_eq!(t.measure(0, &mut rng), m);
            ones += m as usize;
        }
        assert!((60..140).contains(&ones));
    }
}
