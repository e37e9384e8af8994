//! Gate set, circuits and the line-oriented circuit text format.
//!
//! ```text
//! # comment
//! qubits 3
//! H 0
//! CX 0 1
//! M 2
//! ```

use std::fmt;
use std::str::FromStr;

use super::pauli::PauliOperator;
use crate::error::{Error, Result};

/// One operation of the fixed Clifford gate set.
///
/// `CY` is the controlled-Y used by stabilizer-measurement gadgets; it is
/// the sandwich `S_t · CX · S_t†` but is scheduled and counted as a single
/// two-qubit gate. `M` is a destructive Z measurement and `R` a reset to
/// `|0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    CX(usize, usize),
    CY(usize, usize),
    CZ(usize, usize),
    M(usize),
    R(usize),
}

impl CliffordGate {
    pub fn name(&self) -> &'static str {
        match self {
            CliffordGate::H(_) => "H",
            CliffordGate::S(_) => "S",
            CliffordGate::Sdg(_) => "SDG",
            CliffordGate::X(_) => "X",
            CliffordGate::Y(_) => "Y",
            CliffordGate::Z(_) => "Z",
            CliffordGate::CX(..) => "CX",
            CliffordGate::CY(..) => "CY",
            CliffordGate::CZ(..) => "CZ",
            CliffordGate::M(_) => "M",
            CliffordGate::R(_) => "R",
        }
    }

    pub fn targets(&self) -> (usize, Option<usize>) {
        use CliffordGate::*;
        match *self {
            H(q) | S(q) | Sdg(q) | X(q) | Y(q) | Z(q) | M(q) | R(q) => (q, None),
            CX(a, b) | CY(a, b) | CZ(a, b) => (a, Some(b)),
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, CliffordGate::M(_) | CliffordGate::R(_))
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(
            self,
            CliffordGate::CX(..) | CliffordGate::CY(..) | CliffordGate::CZ(..)
        )
    }

    /// Resets re-initialise freed rails and are not tallied as gates.
    pub fn is_counted(&self) -> bool {
        !matches!(self, CliffordGate::R(_))
    }

    /// The gate with its qubits renamed through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Self {
        use CliffordGate::*;
        match *self {
            H(q) => H(map(q)),
            S(q) => S(map(q)),
            Sdg(q) => Sdg(map(q)),
            X(q) => X(map(q)),
            Y(q) => Y(map(q)),
            Z(q) => Z(map(q)),
            CX(a, b) => CX(map(a), map(b)),
            CY(a, b) => CY(map(a), map(b)),
            CZ(a, b) => CZ(map(a), map(b)),
            M(q) => M(map(q)),
            R(q) => R(map(q)),
        }
    }

    /// Inverse of a unitary gate.
    pub fn inverse(&self) -> Option<Self> {
        use CliffordGate::*;
        match *self {
            S(q) => Some(Sdg(q)),
            Sdg(q) => Some(S(q)),
            M(_) | R(_) => None,
            g => Some(g),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let (a, b) = self.targets();
        let bad = |reason: String| Error::InvalidGate {
            gate: self.to_string(),
            reason,
        };
        if a >= n {
            return Err(bad(format!("target {a} out of range for {n} qubits")));
        }
        if let Some(b) = b {
            if b >= n {
                return Err(bad(format!("target {b} out of range for {n} qubits")));
            }
            if a == b {
                return Err(bad("two-qubit gate needs distinct targets".into()));
            }
        }
        Ok(())
    }

    /// Conjugates `p ← G p G†`. Fails on non-unitary gates.
    pub fn conjugate(&self, p: &mut PauliOperator) -> Result<()> {
        use CliffordGate::*;
        match *self {
            H(q) => p.apply_h(q),
            S(q) => p.apply_s(q),
            Sdg(q) => p.apply_sdg(q),
            X(q) => p.apply_x(q),
            Y(q) => p.apply_y(q),
            Z(q) => p.apply_z(q),
            CX(a, b) => p.apply_cx(a, b),
            CY(a, b) => p.apply_cy(a, b),
            CZ(a, b) => p.apply_cz(a, b),
            M(_) | R(_) => {
                return Err(Error::UnsupportedGate {
                    gate: self.to_string(),
                })
            }
        }
        Ok(())
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.targets() {
            (a, None) => write!(f, "{} {}", self.name(), a),
            (a, Some(b)) => write!(f, "{} {} {}", self.name(), a, b),
        }
    }
}

/// Ordered gate list over `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordCircuit {
    n: usize,
    gates: Vec<CliffordGate>,
}

impl CliffordCircuit {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n: usize, gates: impl IntoIterator<Item = CliffordGate>) -> Result<Self> {
        let mut c = Self::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[CliffordGate] {
        &self.gates
    }

    pub fn push(&mut self, g: CliffordGate) -> Result<()> {
        g.validate(self.n)?;
        self.gates.push(g);
        Ok(())
    }

    /// Number of unitary gates; measurements and resets are excluded.
    pub fn size(&self) -> usize {
        self.gates.iter().filter(|g| g.is_unitary()).count()
    }

    pub fn is_unitary(&self) -> bool {
        self.gates.iter().all(CliffordGate::is_unitary)
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Contiguous slice of gates `[start, end)` as its own circuit.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            n: self.n,
            gates: self.gates[start..end].to_vec(),
        }
    }

    pub fn extend(&mut self, other: &Self) -> Result<()> {
        if other.n != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                actual: other.n,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn truncate(&mut self, len: usize) {
        self.gates.truncate(len);
    }

    /// Inverse of a unitary circuit.
    pub fn inverse(&self) -> Result<Self> {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| {
                g.inverse().ok_or_else(|| Error::UnsupportedGate {
                    gate: g.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: self.n, gates })
    }
}

impl fmt::Display for CliffordCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

fn parse_gate(name: &str, qs: &[usize], line: usize) -> Result<CliffordGate> {
    use CliffordGate::*;
    let err = |m: String| Error::Parse { line, message: m };
    let one = |f: fn(usize) -> CliffordGate| -> Result<CliffordGate> {
        match qs {
            [a] => Ok(f(*a)),
            _ => Err(err(format!("{name} takes one qubit"))),
        }
    };
    let two = |f: fn(usize, usize) -> CliffordGate| -> Result<CliffordGate> {
        match qs {
            [a, b] => Ok(f(*a, *b)),
            _ => Err(err(format!("{name} takes two qubits"))),
        }
    };
    match name {
        "H" => one(H),
        "S" => one(S),
        "SDG" => one(Sdg),
        "X" => one(X),
        "Y" => one(Y),
        "Z" => one(Z),
        "M" => one(M),
        "R" => one(R),
        "CX" => two(CX),
        "CY" => two(CY),
        "CZ" => two(CZ),
        other => Err(err(format!("unknown gate {other:?}"))),
    }
}

impl FromStr for CliffordCircuit {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut circuit: Option<CliffordCircuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            let args = parts
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("bad qubit index {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match (&mut circuit, head) {
                (None, "qubits") => match args.as_slice() {
                    [n] => circuit = Some(CliffordCircuit::new(*n)),
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "qubits header takes one count".into(),
                        })
                    }
                },
                (None, _) => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "missing `qubits N` header".into(),
                    })
                }
                (Some(_), "qubits") => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "duplicate qubits header".into(),
                    })
                }
                (Some(c), name) => {
                    let g = parse_gate(name, &args, line_no)?;
                    c.push(g).map_err(|e| Error::Parse {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                }
            }
        }
        circuit.ok_or(Error::Parse {
            line: 0,
            message: "empty circuit text".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_excludes_measurements_and_resets() {
        let c = CliffordCircuit::from_gates(
            2,
            [
                CliffordGate::H(0),
                CliffordGate::CX(0, 1),
                CliffordGate::M(1),
                CliffordGate::R(1),
            ],
        )
        .unwrap();
        assert_eq!(c.size(), 2);
        assert!(!c.is_unitary());
    }

    #[test]
    fn rejects_bad_targets() {
        let mut c = CliffordCircuit::new(2);
        assert!(c.push(CliffordGate::CX(1, 1)).is_err());
        assert!(c.push(CliffordGate::H(2)).is_err());
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let text = "qubits 3\nH 0\nSDG 1\nCX 0 1\nCY 2 0\nCZ 1 2\nM 2\nR 2\n";
        let c: CliffordCircuit = text.parse().unwrap();
        assert_eq!(c.to_string(), text);
        assert_eq!(c.to_string().parse::<CliffordCircuit>().unwrap(), c);
    }

    #[test]
    fn parser_skips_comments_and_reports_lines() {
        let c: CliffordCircuit = "# header\nqubits 2 # two\n\nH 1 # gate\n".parse().unwrap();
        assert_eq!(c.gates(), &[CliffordGate::H(1)]);
        match "qubits 2\nFOO 1\n".parse::<CliffordCircuit>() {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!("H 0\n".parse::<CliffordCircuit>().is_err());
    }
}
