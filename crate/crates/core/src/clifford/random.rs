//! Uniform random Clifford unitaries.
//!
//! Sampling follows the Bravyi–Maslov canonical form (quantum Mallows
//! permutation, symmetric `Γ` and unit-lower-triangular `Δ` layers) plus
//! uniformly random signs; the resulting tableau is synthesized by greedy
//! column elimination.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::circuit::{CliffordCircuit, CliffordGate};
use super::pauli::PauliOperator;
use crate::error::{Error, Result};

type Mat = Vec<Vec<bool>>;

fn sample_qmallows<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<bool>, Vec<usize>) {
    let mut had = vec![false; n];
    let mut perm = vec![0; n];
    let mut inds: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let m = n - i;
        let eps = 4f64.powi(-(m as i32));
        let r: f64 = rng.gen();
        let index = -((r + (1.0 - r) * eps).log2().ceil()) as usize;
        had[i] = index < m;
        let k = if index < m { index } else { 2 * m - index - 1 };
        perm[i] = inds.remove(k);
    }
    (had, perm)
}

fn fill_tril<R: Rng + ?Sized>(mat: &mut Mat, rng: &mut R, symmetric: bool) {
    let n = mat.len();
    for i in 0..n {
        for j in 0..i {
            mat[i][j] = rng.gen();
            if symmetric {
                mat[j][i] = mat[i][j];
            }
        }
    }
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (rows, inner, cols) = (a.len(), b.len(), b[0].len());
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| (0..inner).fold(false, |acc, k| acc ^ (a[i][k] & b[k][j])))
                .collect()
        })
        .collect()
}

/// Inverse of a unit lower-triangular matrix by forward substitution.
fn inverse_tril(l: &Mat) -> Mat {
    let n = l.len();
    let mut inv = vec![vec![false; n]; n];
    for col in 0..n {
        inv[col][col] = true;
        for i in col + 1..n {
            inv[i][col] = (col..i).fold(false, |acc, k| acc ^ (l[i][k] & inv[k][col]));
        }
    }
    inv
}

fn transpose(m: &Mat) -> Mat {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect()
}

fn block_table(delta: &Mat, gamma: &Mat) -> Mat {
    let n = delta.len();
    let prod = matmul(gamma, delta);
    let inv = transpose(&inverse_tril(delta));
    let mut t = vec![vec![false; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            t[i][j] = delta[i][j];
            t[n + i][j] = prod[i][j];
            t[n + i][n + j] = inv[i][j];
        }
    }
    t
}

fn random_gamma<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    let mut g = vec![vec![false; n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = rng.gen();
    }
    fill_tril(&mut g, rng, true);
    g
}

fn random_delta<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    let mut d: Mat = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    fill_tril(&mut d, rng, false);
    d
}

/// Uniformly random Clifford as images `(U X_i U†, U Z_i U†)` per qubit.
pub fn random_clifford_images<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Vec<(PauliOperator, PauliOperator)> {
    let (had, perm) = sample_qmallows(n, rng);
    let gamma1 = random_gamma(n, rng);
    let gamma2 = random_gamma(n, rng);
    let delta1 = random_delta(n, rng);
    let delta2 = random_delta(n, rng);
    let table1 = block_table(&delta1, &gamma1);
    let table2 = block_table(&delta2, &gamma2);

    let mut table = vec![vec![false; 2 * n]; 2 * n];
    for i in 0..n {
        table[i] = table2[perm[i]].clone();
        table[n + i] = table2[n + perm[i]].clone();
    }
    for i in 0..n {
        if had[i] {
            table.swap(i, n + i);
        }
    }
    let symplectic = matmul(&table1, &table);

    let row_to_pauli = |row: &[bool], negative: bool| {
        let mut p = PauliOperator::identity(n);
        for q in 0..n {
            p.set_bits(q, row[q], row[n + q]);
        }
        p.set_negative(negative);
        p
    };
    let signs: Vec<bool> = (0..2 * n).map(|_| rng.gen()).collect();
    (0..n)
        .map(|i| {
            (
                row_to_pauli(&symplectic[i], signs[i]),
                row_to_pauli(&symplectic[n + i], signs[n + i]),
            )
        })
        .collect()
}

/// Circuit `U` with `U X_i U† = images[i].0` and `U Z_i U† = images[i].1`.
///
/// Fails if the images do not form a valid Clifford tableau.
pub fn synthesize(images: &[(PauliOperator, PauliOperator)]) -> Result<CliffordCircuit> {
    let n = images.len();
    let mut rows: Vec<PauliOperator> = images
        .iter()
        .flat_map(|(x, z)| [x.clone(), z.clone()])
        .collect();
    if let Some(r) = rows.iter().find(|r| r.num_qubits() != n) {
        return Err(Error::Dimension {
            expected: n,
            actual: r.num_qubits(),
        });
    }
    let mut reducer = CliffordCircuit::new(n);
    let mut apply = |g: CliffordGate, rows: &mut Vec<PauliOperator>| {
        for r in rows.iter_mut() {
            g.conjugate(r).expect("unitary");
        }
        reducer.push(g).expect("in range");
    };
    let invalid = || Error::InvalidArgument("images do not form a Clifford tableau".into());

    for i in 0..n {
        let (dx, sz) = (2 * i, 2 * i + 1);
        for j in i..n {
            match (rows[dx].x(j), rows[dx].z(j)) {
                (true, true) => apply(CliffordGate::S(j), &mut rows),
                (false, true) => apply(CliffordGate::H(j), &mut rows),
                _ => {}
            }
        }
        let pivot = (i..n).find(|&j| rows[dx].x(j)).ok_or_else(invalid)?;
        for j in pivot + 1..n {
            if rows[dx].x(j) {
                apply(CliffordGate::CX(pivot, j), &mut rows);
            }
        }
        if pivot != i {
            apply(CliffordGate::CX(i, pivot), &mut rows);
            apply(CliffordGate::CX(pivot, i), &mut rows);
            apply(CliffordGate::CX(i, pivot), &mut rows);
        }
        for j in i + 1..n {
            match (rows[sz].x(j), rows[sz].z(j)) {
                (true, false) => apply(CliffordGate::H(j), &mut rows),
                (true, true) => {
                    apply(CliffordGate::S(j), &mut rows);
                    apply(CliffordGate::H(j), &mut rows);
                }
                _ => {}
            }
            if rows[sz].z(j) {
                apply(CliffordGate::CX(j, i), &mut rows);
            }
        }
        if !rows[sz].z(i) {
            return Err(invalid());
        }
        if rows[sz].x(i) {
            apply(CliffordGate::H(i), &mut rows);
            apply(CliffordGate::S(i), &mut rows);
            apply(CliffordGate::H(i), &mut rows);
        }
        if rows[dx].is_negative() {
            apply(CliffordGate::Z(i), &mut rows);
        }
        if rows[sz].is_negative() {
            apply(CliffordGate::X(i), &mut rows);
        }
        if rows[dx].weight() != 1 || rows[sz].weight() != 1 {
            return Err(invalid());
        }
    }
    reducer.inverse()
}

/// Pads with identity-preserving gate groups, or drops trailing gates, so
/// that `size() == target`.
fn fit_size(c: &mut CliffordCircuit, target: usize) {
    let size = c.size();
    if size >= target {
        c.truncate(target);
        return;
    }
    let mut missing = target - size;
    if missing % 2 == 1 {
        // S·Sdg-style splits add one gate without changing the unitary.
        let split = c.gates().iter().rposition(|g| {
            matches!(
                g,
                CliffordGate::S(_) | CliffordGate::Sdg(_) | CliffordGate::Z(_)
            )
        });
        match split {
            Some(idx) if missing == 1 => {
                let mut gates = c.gates().to_vec();
                let replacement = match gates[idx] {
                    CliffordGate::S(q) => [CliffordGate::Sdg(q), CliffordGate::Z(q)],
                    CliffordGate::Sdg(q) => [CliffordGate::S(q), CliffordGate::Z(q)],
                    CliffordGate::Z(q) => [CliffordGate::S(q), CliffordGate::S(q)],
                    _ => unreachable!(),
                };
                gates.splice(idx..=idx, replacement);
                *c = CliffordCircuit::from_gates(c.num_qubits(), gates).expect("same qubits");
                return;
            }
            _ => {
                for g in [CliffordGate::S(0), CliffordGate::S(0), CliffordGate::Z(0)] {
                    c.push(g).expect("qubit 0 exists");
                }
                if missing < 3 {
                    c.truncate(target);
                    return;
                }
                missing -= 3;
            }
        }
    }
    for _ in 0..missing / 2 {
        c.push(CliffordGate::X(0)).expect("qubit 0 exists");
        c.push(CliffordGate::X(0)).expect("qubit 0 exists");
    }
}

/// Uniformly random `n`-qubit Clifford circuit with exactly `target_size`
/// unitary gates, deterministic in `seed`.
pub fn random_clifford(n: usize, target_size: usize, seed: u64) -> Result<CliffordCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_clifford_with_rng(n, target_size, &mut rng)
}

pub fn random_clifford_with_rng<R: Rng + ?Sized>(
    n: usize,
    target_size: usize,
    rng: &mut R,
) -> Result<CliffordCircuit> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "random Clifford needs n >= 1".into(),
        ));
    }
    let images = random_clifford_images(n, rng);
    let mut c = synthesize(&images)?;
    fit_size(&mut c, target_size);
    Ok(c)
}
