//! Pauli-frame Monte Carlo of compiled programs under circuit-level noise,
//! plus a noiseless tableau executor used as a reference.
//!
//! Every gate is followed by a uniformly random non-identity Pauli on its
//! support with the rate of its class; measurements flip their outcome;
//! resets and classical corrections are noiseless. With idle noise on,
//! each operation gives every other live qubit one idle opportunity.
//! Fault times are drawn as geometric gaps per class, which is exact for
//! independent Bernoulli trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{
    random_group_element, CliffordGate, Pauli, PauliOperator, StabilizerGroupView, Tableau,
};
use crate::compiler::{push_check_gadget, BlockKind, CliNRProgram};
use crate::error::{Error, Result};
use crate::estimate::{EstimateResult, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub p_meas: f64,
    pub p_idle: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, p_meas: f64, p_idle: f64) -> Result<Self> {
        for (name, v) in [
            ("p1", p1),
            ("p2", p2),
            ("p_meas", p_meas),
            ("p_idle", p_idle),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v} outside [0, 1)"
                )));
            }
        }
        Ok(Self {
            p1,
            p2,
            p_meas,
            p_idle,
        })
    }

    /// Two-qubit rate `p`, one tenth of it for single-qubit gates and
    /// measurements, and `p/1000` idle noise when enabled.
    pub fn standard(p: f64, idle: bool) -> Self {
        Self {
            p1: p / 10.0,
            p2: p,
            p_meas: p / 10.0,
            p_idle: if idle { p / 1000.0 } else { 0.0 },
        }
    }

    pub fn noiseless() -> Self {
        Self::standard(0.0, false)
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p_meas == 0.0 && self.p_idle == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Pauli applied right after the gate.
    Pauli(Vec<(usize, Pauli)>),
    /// Classical flip of a measurement outcome.
    MeasurementFlip,
}

/// Draws the fault following one gate (idle noise excluded).
pub fn sample_fault<R: Rng + ?Sized>(
    g: &CliffordGate,
    noise: &NoiseModel,
    rng: &mut R,
) -> Option<Fault> {
    match *g {
        CliffordGate::R(_) => None,
        CliffordGate::M(_) => rng.gen_bool(noise.p_meas).then_some(Fault::MeasurementFlip),
        _ => match g.targets() {
            (a, Some(b)) => rng.gen_bool(noise.p2).then(|| {
                let k = rng.gen_range(1..16);
                let mut out = Vec::with_capacity(2);
                for (q, p) in [(a, Pauli::from_index(k / 4)), (b, Pauli::from_index(k % 4))] {
                    if p != Pauli::I {
                        out.push((q, p));
                    }
                }
                Fault::Pauli(out)
            }),
            (a, None) => rng
                .gen_bool(noise.p1)
                .then(|| Fault::Pauli(vec![(a, Pauli::from_index(rng.gen_range(1..4)))])),
        },
    }
}

/// Trials until the next success of a Bernoulli(`p`) stream.
#[derive(Clone, Debug)]
struct Clock {
    log_q: f64,
    never: bool,
    skip: u64,
}

impl Clock {
    fn new<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Self {
        let mut c = Self {
            log_q: (1.0 - p).ln(),
            never: p <= 0.0,
            skip: 0,
        };
        c.skip = c.draw(rng);
        c
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.never {
            return u64::MAX;
        }
        // U in (0, 1].
        let u = 1.0 - rng.gen::<f64>();
        let g = (u.ln() / self.log_q).floor();
        if g.is_finite() && g < u64::MAX as f64 {
            g as u64
        } else {
            u64::MAX
        }
    }

    #[inline]
    fn tick<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        if self.skip > 0 {
            self.skip -= 1;
            false
        } else {
            self.skip = self.draw(rng);
            true
        }
    }

    /// Runs `m` trials, calling `hit` with the index of each success.
    #[inline]
    fn advance<R: Rng + ?Sized>(&mut self, m: u64, rng: &mut R, mut hit: impl FnMut(u64, &mut R)) {
        let mut pos = 0;
        loop {
            if self.skip >= m - pos {
                self.skip -= m - pos;
                return;
            }
            pos += self.skip;
            hit(pos, rng);
            pos += 1;
            self.skip = self.draw(rng);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOptions {
    /// Attempts allowed per RSP before the shot is aborted.
    pub attempt_cap: u64,
    /// Pauli multiplied into the frame after the first execution of the
    /// given block; a test hook for controlled error injection.
    pub inject: Option<(usize, PauliOperator)>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            attempt_cap: 10_000,
            inject: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotResult {
    pub logical_error: bool,
    /// Counted operations executed, restarts included.
    pub executed_gates: u64,
    /// Restarts triggered by the check with index `k` within its sequence.
    pub restarts_per_check: Vec<u64>,
    /// Frame on the output rails at the end of the shot.
    pub residual_frame: PauliOperator,
    /// Set when some RSP exceeded the attempt cap.
    pub aborted: bool,
}

impl ShotResult {
    pub fn restarts(&self) -> u64 {
        self.restarts_per_check.iter().sum()
    }
}

struct Shot<'a, R: Rng> {
    rng: &'a mut R,
    frame: PauliOperator,
    c1: Clock,
    c2: Clock,
    cm: Clock,
    ci: Clock,
    idle: bool,
    executed: u64,
}

impl<R: Rng> Shot<'_, R> {
    fn random_pauli(&mut self, q: usize) {
        let p = Pauli::from_index(self.rng.gen_range(1..4));
        let (x, z) = p.bits();
        self.frame.xor_bits(q, x, z);
    }

    /// Executes one operation; returns the outcome flip of a measurement.
    #[inline]
    fn step(&mut self, g: &CliffordGate, active: &[usize]) -> bool {
        let mut flipped = false;
        match *g {
            CliffordGate::R(q) => {
                self.frame.clear(q);
                return false;
            }
            CliffordGate::M(q) => {
                flipped = self.frame.x(q) ^ self.cm.tick(self.rng);
            }
            _ => {
                g.conjugate(&mut self.frame).expect("unitary");
                match g.targets() {
                    (a, Some(b)) => {
                        if self.c2.tick(self.rng) {
                            let k = self.rng.gen_range(1..16);
                            let (pa, pb) = (Pauli::from_index(k / 4), Pauli::from_index(k % 4));
                            let (xa, za) = pa.bits();
                            let (xb, zb) = pb.bits();
                            self.frame.xor_bits(a, xa, za);
                            self.frame.xor_bits(b, xb, zb);
                        }
                    }
                    (a, None) => {
                        if self.c1.tick(self.rng) {
                            self.random_pauli(a);
                        }
                    }
                }
            }
        }
        self.executed += 1;
        if self.idle {
            let (a, b) = g.targets();
            let mut hits = Vec::new();
            self.ci.advance(active.len() as u64, self.rng, |pos, _| {
                let q = active[pos as usize];
                if q != a && Some(q) != b {
                    hits.push(q);
                }
            });
            for q in hits {
                self.random_pauli(q);
            }
        }
        flipped
    }
}

/// One shot of `program` with default options.
pub fn run_shot<R: Rng>(program: &CliNRProgram, noise: &NoiseModel, rng: &mut R) -> ShotResult {
    run_shot_with(program, noise, &SimOptions::default(), rng)
}

pub fn run_shot_with<R: Rng>(
    program: &CliNRProgram,
    noise: &NoiseModel,
    options: &SimOptions,
    rng: &mut R,
) -> ShotResult {
    let total = program.total_qubits;
    let (c1, c2, cm, ci) = (
        Clock::new(noise.p1, rng),
        Clock::new(noise.p2, rng),
        Clock::new(noise.p_meas, rng),
        Clock::new(noise.p_idle, rng),
    );
    let mut shot = Shot {
        rng,
        frame: PauliOperator::identity(total),
        c1,
        c2,
        cm,
        ci,
        idle: noise.p_idle > 0.0,
        executed: 0,
    };
    let blocks = &program.blocks;
    let max_checks = blocks
        .iter()
        .filter_map(|b| b.check_index)
        .max()
        .map_or(0, |k| k + 1);
    let mut restarts = vec![0u64; max_checks];
    let mut attempts = vec![0u64; blocks.len()];
    let mut injected = false;
    let mut aborted = false;
    let mut buf: Vec<CliffordGate> = Vec::new();
    let mut element = PauliOperator::identity(total);

    let mut i = 0;
    'blocks: while i < blocks.len() {
        let b = &blocks[i];
        match b.kind {
            BlockKind::Rsp | BlockKind::Plain => {
                if b.kind == BlockKind::Rsp {
                    attempts[i] += 1;
                    if attempts[i] > options.attempt_cap {
                        aborted = true;
                        break 'blocks;
                    }
                }
                for g in &b.gates {
                    shot.step(g, &b.active);
                }
            }
            BlockKind::Check => {
                let spec = b.check.as_ref().expect("check spec");
                let gates: &[CliffordGate] = if spec.fixed.is_some() {
                    &b.gates
                } else {
                    let gens = program.groups[spec.group].group.generators();
                    element.clear_all();
                    for chunk in gens.chunks(64) {
                        let mask: u64 = shot.rng.gen();
                        for (j, g) in chunk.iter().enumerate() {
                            if mask >> j & 1 == 1 {
                                element.xor_assign(g);
                            }
                        }
                    }
                    buf.clear();
                    push_check_gadget(&element, program.check_ancilla, &mut buf);
                    &buf
                };
                let mut detected = false;
                for g in gates {
                    detected |= shot.step(g, &b.active);
                }
                if detected {
                    restarts[b.check_index.expect("check index")] += 1;
                    i = b.restart_target.expect("restart target");
                    continue 'blocks;
                }
            }
            BlockKind::Rsi => {
                let mut cursor = 0;
                for g in &b.gates {
                    let flipped = shot.step(g, &b.active);
                    if let CliffordGate::M(_) = g {
                        if flipped {
                            shot.frame.xor_assign(&b.corrections[cursor].pauli);
                        }
                        cursor += 1;
                    }
                }
                shot.executed += (b.corrections.len() / 2) as u64;
                if let Some(rsp) = b.owner_rsp {
                    attempts[rsp] = 0;
                }
            }
        }
        if let Some((at, p)) = &options.inject {
            if *at == i && !injected {
                shot.frame.xor_assign(p);
                injected = true;
            }
        }
        i += 1;
    }

    let frame = shot.frame;
    let logical_error = !aborted
        && program
            .output_stabilizers
            .iter()
            .any(|s| !s.commutes_with(&frame));
    ShotResult {
        logical_error,
        executed_gates: shot.executed,
        restarts_per_check: restarts,
        residual_frame: frame.restrict(&program.output_rails),
        aborted,
    }
}

/// `true` iff `frame` acts non-trivially on the stabilizer state `stabs`.
pub fn judge_logical(frame: &PauliOperator, stabs: &StabilizerGroupView) -> Result<bool> {
    if frame.num_qubits() != stabs.num_qubits() {
        return Err(Error::Dimension {
            expected: stabs.num_qubits(),
            actual: frame.num_qubits(),
        });
    }
    Ok(!stabs.commutes_with_all(frame))
}

/// Aggregate of many shots; per-shot streams are derived from one draw of
/// `rng`, so results do not depend on the worker count.
pub fn estimate<R: Rng + ?Sized>(
    program: &CliNRProgram,
    noise: &NoiseModel,
    shots: u64,
    rng: &mut R,
) -> Result<EstimateResult> {
    let results = run_shots(program, noise, &SimOptions::default(), shots, rng.gen())?;
    Ok(summarize(program, &results))
}

/// Runs `shots` independent shots; shot `i` uses stream `i` of `seed`.
pub fn run_shots(
    program: &CliNRProgram,
    noise: &NoiseModel,
    options: &SimOptions,
    shots: u64,
    seed: u64,
) -> Result<Vec<ShotResult>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("at least one shot required".into()));
    }
    Ok((0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            run_shot_with(program, noise, options, &mut rng)
        })
        .collect())
}

/// Logical error rate (aborted shots excluded) with binomial standard
/// error, and mean executed gates over the circuit size.
pub fn summarize(program: &CliNRProgram, results: &[ShotResult]) -> EstimateResult {
    let kept: Vec<&ShotResult> = results.iter().filter(|r| !r.aborted).collect();
    let k = kept.len() as f64;
    let s = program.circuit_size.max(1) as f64;
    let (p_log, p_err, omega, omega_err) = if kept.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    } else {
        let fails = kept.iter().filter(|r| r.logical_error).count() as f64;
        let p = fails / k;
        let gates: Vec<f64> = kept.iter().map(|r| r.executed_gates as f64 / s).collect();
        let mean = gates.iter().sum::<f64>() / k;
        let var = if kept.len() > 1 {
            gates.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        (p, (p * (1.0 - p) / k).sqrt(), mean, (var / k).sqrt())
    };
    EstimateResult {
        p_log,
        p_log_err: p_err,
        omega_time: omega,
        omega_time_err: omega_err,
        omega_space: program.total_qubits as f64 / program.n.max(1) as f64,
        shots: results.len() as u64,
        circuits: 1,
        aborted: (results.len() - kept.len()) as u64,
        provenance: Provenance::MonteCarlo,
    }
}

/// Noiseless execution on a tableau. Every check outcome is compared with
/// the sign of its stabilizer; returns the output-rail stabilizer group.
pub fn execute_ideal<R: Rng + ?Sized>(
    program: &CliNRProgram,
    rng: &mut R,
) -> Result<StabilizerGroupView> {
    let mut t = Tableau::new(program.total_qubits);
    for (i, b) in program.blocks.iter().enumerate() {
        match b.kind {
            BlockKind::Rsp | BlockKind::Plain => {
                for g in &b.gates {
                    t.apply(g, rng);
                }
            }
            BlockKind::Check => {
                let spec = b.check.as_ref().expect("check spec");
                let p = match &spec.fixed {
                    Some(p) => p.clone(),
                    None => random_group_element(&program.groups[spec.group].group, rng)?,
                };
                let mut gates = Vec::new();
                push_check_gadget(&p, program.check_ancilla, &mut gates);
                for g in &gates {
                    if let Some(outcome) = t.apply(g, rng) {
                        if outcome != p.is_negative() {
                            return Err(Error::Execution(format!(
                                "check block {i} reported {outcome} for stabilizer {p}"
                            )));
                        }
                    }
                }
            }
            BlockKind::Rsi => {
                let mut cursor = 0;
                for g in &b.gates {
                    if let Some(outcome) = t.apply(g, rng) {
                        if outcome {
                            t.apply_pauli(&b.corrections[cursor].pauli);
                        }
                        cursor += 1;
                    }
                }
            }
        }
    }
    Ok(t.stabilizers().restrict_to(&program.output_rails))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{output_stabilizers, random_clifford};
    use crate::compiler::compile;
    use crate::tree::CliNRTree;

    #[test]
    fn noiseless_model_never_faults() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noise = NoiseModel::noiseless();
        for g in [
            CliffordGate::H(0),
            CliffordGate::CX(0, 1),
            CliffordGate::M(0),
        ] {
            for _ in 0..1000 {
                assert_eq!(sample_fault(&g, &noise, &mut rng), None);
            }
        }
    }

    #[test]
    fn clock_matches_bernoulli_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = 0.03;
        let mut c = Clock::new(p, &mut rng);
        let trials = 200_000;
        let hits = (0..trials).filter(|_| c.tick(&mut rng)).count() as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - trials as f64 * p).abs() < 4.0 * sigma);
        let mut hits2 = 0u64;
        let mut c = Clock::new(p, &mut rng);
        for _ in 0..2000 {
            c.advance(100, &mut rng, |pos, _| {
                assert!(pos < 100);
                hits2 += 1;
            });
        }
        assert!((hits2 as f64 - trials as f64 * p).abs() < 4.0 * sigma);
    }

    #[test]
    fn noiseless_shot_is_clean_and_single_pass() {
        let c = random_clifford(3, 24, 3).unwrap();
        let tree = CliNRTree::uniform(24, 2, Some(2), 2).unwrap();
        let p = compile(&c, &tree, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let r = run_shot(&p, &NoiseModel::noiseless(), &mut rng);
            assert!(!r.logical_error && !r.aborted);
            assert_eq!(r.restarts(), 0);
            assert!(r.residual_frame.is_identity());
            assert!(r.executed_gates >= 24);
        }
    }

    #[test]
    fn ideal_execution_matches_direct_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..10 {
            let c = random_clifford(3, 20, seed).unwrap();
            let tree = CliNRTree::random(20, 3, 3, 2, &mut rng);
            let p = compile(&c, &tree, seed).unwrap();
            let got = execute_ideal(&p, &mut rng).unwrap();
            assert_eq!(got.canonical(), output_stabilizers(&c).unwrap().canonical());
        }
    }

    #[test]
    fn judge_identity_and_generators_are_trivial() {
        let c = random_clifford(2, 6, 5).unwrap();
        let stabs = output_stabilizers(&c).unwrap();
        assert!(!judge_logical(&PauliOperator::identity(2), &stabs).unwrap());
        for g in stabs.generators() {
            assert!(!judge_logical(g, &stabs).unwrap());
        }
        assert!(judge_logical(&PauliOperator::identity(3), &stabs).is_err());
    }

    #[test]
    fn attempt_cap_aborts() {
        let c = random_clifford(2, 10, 6).unwrap();
        let p = compile(&c, &CliNRTree::clinr1(10, 3), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let noisy = NoiseModel::new(0.0, 0.9, 0.5, 0.0).unwrap();
        let opts = SimOptions {
            attempt_cap: 1,
            inject: None,
        };
        let aborted = (0..50)
            .filter(|_| run_shot_with(&p, &noisy, &opts, &mut rng).aborted)
            .count();
        assert!(aborted > 0);
    }
}
