//! Bit-packed Hermitian Pauli operators.
//!
//! A `PauliOperator` stores one X bit and one Z bit per qubit plus a sign.
//! The pair `(x, z) = (1, 1)` denotes the Hermitian `Y` itself, i.e. the
//! factor `i` of `i·X·Z` is absorbed into the encoding. With that
//! convention every operator we ever need (stabilizers, check operators,
//! error frames) is Hermitian, so a `±1` sign is enough. Products are only
//! sign-exact when the factors commute; frames use [`PauliOperator::xor_assign`]
//! which ignores phases.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Index in `I, X, Y, Z` order.
    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_index(i: usize) -> Self {
        match i & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[inline]
fn words(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
fn loc(q: usize) -> (usize, u64) {
    (q >> 6, 1u64 << (q & 63))
}

/// An `n`-qubit Pauli operator with a `±1` sign.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    negative: bool,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
            negative: false,
        }
    }

    /// The operator `P` acting on qubit `q` and identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut op = Self::identity(n);
        op.set(q, p);
        op
    }

    /// Builds an operator from `(qubit, Pauli)` pairs.
    pub fn from_sparse(n: usize, terms: &[(usize, Pauli)]) -> Self {
        let mut op = Self::identity(n);
        for &(q, p) in terms {
            op.set(q, p);
        }
        op
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub fn negate(&mut self) {
        self.negative = !self.negative;
    }

    #[inline]
    pub fn x(&self, q: usize) -> bool {
        let (w, b) = loc(q);
        self.x[w] & b != 0
    }

    #[inline]
    pub fn z(&self, q: usize) -> bool {
        let (w, b) = loc(q);
        self.z[w] & b != 0
    }

    #[inline]
    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x(q), self.z(q))
    }

    #[inline]
    pub fn set_bits(&mut self, q: usize, x: bool, z: bool) {
        let (w, b) = loc(q);
        if x {
            self.x[w] |= b;
        } else {
            self.x[w] &= !b;
        }
        if z {
            self.z[w] |= b;
        } else {
            self.z[w] &= !b;
        }
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.set_bits(q, x, z);
    }

    /// Multiplies a single-qubit factor into qubit `q`, ignoring phase.
    #[inline]
    pub fn xor_bits(&mut self, q: usize, x: bool, z: bool) {
        let (w, b) = loc(q);
        if x {
            self.x[w] ^= b;
        }
        if z {
            self.z[w] ^= b;
        }
    }

    #[inline]
    pub fn clear(&mut self, q: usize) {
        let (w, b) = loc(q);
        self.x[w] &= !b;
        self.z[w] &= !b;
    }

    pub fn clear_all(&mut self) {
        self.x.fill(0);
        self.z.fill(0);
        self.negative = false;
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Qubits on which the operator acts non-trivially, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.x
            .iter()
            .zip(&self.z)
            .enumerate()
            .flat_map(|(w, (a, b))| {
                let mut bits = a | b;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        return None;
                    }
                    let t = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + t)
                })
            })
    }

    /// Symplectic-form test: commutes iff `|x1·z2| + |z1·x2|` is even.
    pub fn commutes_with(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut acc = 0u64;
        for i in 0..self.x.len() {
            acc ^= (self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i]);
        }
        acc.count_ones().is_multiple_of(2)
    }

    /// Phase-free product used for error frames.
    pub fn xor_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
    }

    /// Exponent `k` such that `self · other = i^k · (xor of the two)`.
    fn product_phase(&self, other: &Self) -> u32 {
        let mut pos = 0i64;
        let mut neg = 0i64;
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let p = (x1 & z1 & !x2 & z2) | (x1 & !z1 & x2 & z2) | (!x1 & z1 & x2 & !z2);
            let m = (x1 & z1 & x2 & !z2) | (x1 & !z1 & !x2 & z2) | (!x1 & z1 & x2 & z2);
            pos += p.count_ones() as i64;
            neg += m.count_ones() as i64;
        }
        let signs = 2 * (self.negative as i64 + other.negative as i64);
        (pos - neg + signs).rem_euclid(4) as u32
    }

    /// Sign-exact right multiplication `self ← self · other`.
    ///
    /// Fails when the operators anticommute, since the product would not be
    /// Hermitian.
    pub fn mul_assign(&mut self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                actual: other.n,
            });
        }
        let phase = self.product_phase(other);
        if phase % 2 == 1 {
            return Err(Error::InvalidArgument(
                "product of anticommuting Paulis is not Hermitian".into(),
            ));
        }
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
        self.negative = phase == 2;
        Ok(())
    }

    /// Copies the restriction to `qubits` into a new `qubits.len()`-qubit operator.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let mut out = Self::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set_bits(i, self.x(q), self.z(q));
        }
        out.negative = self.negative;
        out
    }

    /// Embeds this operator into a larger register, qubit `i` going to `qubits[i]`.
    pub fn embed(&self, n: usize, qubits: &[usize]) -> Self {
        debug_assert_eq!(qubits.len(), self.n);
        let mut out = Self::identity(n);
        for q in self.support() {
            out.set_bits(qubits[q], self.x(q), self.z(q));
        }
        out.negative = self.negative;
        out
    }

    // Conjugation rules `P ← G P G†`, sign-exact.

    pub fn apply_h(&mut self, q: usize) {
        let (x, z) = (self.x(q), self.z(q));
        self.negative ^= x & z;
        self.set_bits(q, z, x);
    }

    pub fn apply_s(&mut self, q: usize) {
        let (x, z) = (self.x(q), self.z(q));
        self.negative ^= x & z;
        self.set_bits(q, x, z ^ x);
    }

    pub fn apply_sdg(&mut self, q: usize) {
        let (x, z) = (self.x(q), self.z(q));
        let z = z ^ x;
        self.negative ^= x & z;
        self.set_bits(q, x, z);
    }

    pub fn apply_x(&mut self, q: usize) {
        self.negative ^= self.z(q);
    }

    pub fn apply_y(&mut self, q: usize) {
        self.negative ^= self.x(q) ^ self.z(q);
    }

    pub fn apply_z(&mut self, q: usize) {
        self.negative ^= self.x(q);
    }

    pub fn apply_cx(&mut self, c: usize, t: usize) {
        let (xc, zc, xt, zt) = (self.x(c), self.z(c), self.x(t), self.z(t));
        self.negative ^= xc & zt & !(xt ^ zc);
        self.set_bits(t, xt ^ xc, zt);
        self.set_bits(c, xc, zc ^ zt);
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let (xa, za, xb, zb) = (self.x(a), self.z(a), self.x(b), self.z(b));
        self.negative ^= xa & xb & (za ^ zb);
        self.set_bits(a, xa, za ^ xb);
        self.set_bits(b, xb, zb ^ xa);
    }

    /// Controlled-Y, realised as `S_t · CX · S_t†`.
    pub fn apply_cy(&mut self, c: usize, t: usize) {
        self.apply_sdg(t);
        self.apply_cx(c, t);
        self.apply_s(t);
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Dense form such as `"+XIZ"`, `"-YY"` or `"ZZ"`.
    fn from_str(s: &str) -> Result<Self> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let mut op = Self::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("bad Pauli symbol {other:?}"),
                    })
                }
            };
            op.set(q, p);
        }
        op.negative = negative;
        Ok(op)
    }
}
