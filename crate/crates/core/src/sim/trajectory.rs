//! Monte-Carlo trajectories with a shared no-event path.
//!
//! Every shot draws a threshold `E ~ Exp(1)` and follows the common
//! "nothing happened" trajectory until the accumulated hazard
//! `Σ -ln(1 - r_site)` passes its threshold; only then does it copy the
//! shared state, apply the sampled event and continue on its own. This is
//! exactly the per-shot unravelling, but shots that never see an event cost
//! nothing beyond a draw from the final distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate};
use crate::sim::noise::NoiseSpec;
use crate::sim::sampling::{Cdf, ShotResult};
use crate::sim::statevector::StateVector;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy)]
enum Channel {
    /// Bit flip (state preparation).
    Flip(usize, f64),
    /// Depolarizing with parameter λ: a uniformly random Pauli (identity
    /// included) with probability λ, so λ = 1 fully mixes the operands.
    Depol1(usize, f64),
    Depol2(usize, usize, f64),
    /// Amplitude damping with decay probability γ.
    Damp(usize, f64),
    /// Phase flip.
    Dephase(usize, f64),
}

#[derive(Debug, Clone)]
enum Op {
    Gate(Gate),
    /// RZ applied as a phase on `|1⟩`; the global phase is unobservable.
    Phase(usize, C64),
    Chan(Channel),
}

fn push_relax(ops: &mut Vec<Op>, spec: &NoiseSpec, q: usize, t_ns: f64) {
    let g = spec.damping_prob(t_ns);
    if g > 0.0 {
        ops.push(Op::Chan(Channel::Damp(q, g)));
    }
    let p = spec.dephasing_prob(t_ns);
    if p > 0.0 {
        ops.push(Op::Chan(Channel::Dephase(q, p)));
    }
}

fn compile(c: &Circuit, spec: &NoiseSpec, prep: bool) -> Result<Vec<Op>> {
    let n = c.n_qubits();
    let d = spec.durations;
    let mut ops = Vec::with_capacity(4 * c.len() + 3 * n);
    if prep {
        for q in 0..n {
            if spec.err_spam > 0.0 {
                ops.push(Op::Chan(Channel::Flip(q, spec.err_spam)));
            }
            push_relax(&mut ops, spec, q, d.prep_ns);
        }
    }
    for g in c.gates() {
        match *g {
            Gate::Rz(a, q) => ops.push(Op::Phase(q, C64::from_polar(1.0, a))),
            Gate::X(q) | Gate::Sx(q) | Gate::Id(q) => {
                ops.push(Op::Gate(g.clone()));
                if spec.err_1q > 0.0 {
                    ops.push(Op::Chan(Channel::Depol1(q, spec.err_1q)));
                }
                push_relax(&mut ops, spec, q, d.gate_1q_ns);
            }
            Gate::Cx(a, b) => {
                ops.push(Op::Gate(g.clone()));
                if spec.err_2q > 0.0 {
                    ops.push(Op::Chan(Channel::Depol2(a, b, spec.err_2q)));
                }
                push_relax(&mut ops, spec, a, d.gate_2q_ns);
                push_relax(&mut ops, spec, b, d.gate_2q_ns);
            }
            Gate::Measure(_) | Gate::Barrier(_) => {}
            ref other => return Err(Error::UnsupportedGate(other.name().into())),
        }
    }
    Ok(ops)
}

fn pauli_bits(k: u32) -> (u64, u64) {
    // 0 I, 1 X, 2 Y, 3 Z
    match k & 3 {
        0 => (0, 0),
        1 => (1, 0),
        2 => (1, 1),
        _ => (0, 1),
    }
}

// Damping sites use thinning: a candidate fires with the bound `γ` and is
// accepted with the current `P(1)`, so the no-jump branch never needs `P(1)`
// and states are carried unnormalised through it.

fn candidate_prob(ch: &Channel) -> f64 {
    match *ch {
        Channel::Flip(_, p) | Channel::Depol1(_, p) | Channel::Depol2(_, _, p) | Channel::Dephase(_, p) => p,
        Channel::Damp(_, g) => g,
    }
}

fn apply_event(ch: &Channel, sv: &mut StateVector, rng: &mut ChaCha8Rng) {
    match *ch {
        Channel::Flip(q, _) => sv.apply_x(q),
        Channel::Depol1(q, _) => {
            let (x, z) = pauli_bits(rng.gen_range(0..4));
            sv.apply_pauli(x << q, z << q);
        }
        Channel::Depol2(a, b, _) => {
            let k: u32 = rng.gen_range(0..16);
            let (xa, za) = pauli_bits(k);
            let (xb, zb) = pauli_bits(k >> 2);
            sv.apply_pauli((xa << a) | (xb << b), (za << a) | (zb << b));
        }
        Channel::Damp(q, _) => sv.decay_to_zero(q),
        Channel::Dephase(q, _) => sv.apply_phase(q, C64::new(-1.0, 0.0)),
    }
}

/// State plus a pending `diag(1, d_q)` per qubit. RZ phases and the
/// no-jump damping factor are diagonal, so they are only written into the
/// amplitudes when a non-commuting operation reaches that qubit.
#[derive(Debug, Clone)]
struct Lazy {
    sv: StateVector,
    d: Vec<C64>,
    dirty: u64,
}

impl Lazy {
    fn new(sv: StateVector) -> Self {
        let n = sv.n_qubits();
        Self { sv, d: vec![C64::new(1.0, 0.0); n], dirty: 0 }
    }

    fn mul(&mut self, q: usize, f: C64) {
        self.d[q] *= f;
        self.dirty |= 1 << q;
    }

    fn flush(&mut self, q: usize) {
        if self.dirty >> q & 1 == 1 {
            self.sv.apply_phase(q, self.d[q]);
            self.d[q] = C64::new(1.0, 0.0);
            self.dirty &= !(1 << q);
        }
    }

    fn flush_all(&mut self) -> &mut StateVector {
        while self.dirty != 0 {
            self.flush(self.dirty.trailing_zeros() as usize);
        }
        &mut self.sv
    }

    fn into_state(mut self) -> StateVector {
        self.flush_all();
        self.sv
    }

    fn gate(&mut self, g: &Gate) -> Result<()> {
        match *g {
            Gate::Sx(q) if self.dirty >> q & 1 == 1 => {
                self.sv.apply_sx_phased(q, self.d[q]);
                self.d[q] = C64::new(1.0, 0.0);
                self.dirty &= !(1 << q);
            }
            // a diagonal on the control commutes with CX
            Gate::Cx(_, t) => {
                self.flush(t);
                self.sv.apply_gate(g)?;
            }
            _ => {
                for q in g.qubits() {
                    self.flush(q);
                }
                self.sv.apply_gate(g)?;
            }
        }
        Ok(())
    }

    /// Probability that a candidate event at `ch` is a real jump.
    fn accept_prob(&mut self, ch: &Channel) -> f64 {
        match *ch {
            Channel::Damp(q, _) => {
                let sv = self.flush_all();
                sv.prob_one(q) / sv.norm_sqr()
            }
            _ => 1.0,
        }
    }

    fn event(&mut self, ch: &Channel, rng: &mut ChaCha8Rng) {
        match *ch {
            Channel::Dephase(q, _) => self.mul(q, C64::new(-1.0, 0.0)),
            _ => apply_event(ch, self.flush_all(), rng),
        }
    }

    /// No-jump Kraus branch `diag(1, √(1-γ))`, left unnormalised.
    fn no_event(&mut self, ch: &Channel) {
        if let Channel::Damp(q, g) = *ch {
            self.mul(q, C64::new((1.0 - g).sqrt(), 0.0));
        }
    }

    fn op(&mut self, op: &Op, rng: &mut ChaCha8Rng) -> Result<()> {
        match op {
            Op::Gate(g) => self.gate(g)?,
            Op::Phase(q, f) => self.mul(*q, *f),
            Op::Chan(ch) => {
                let r = candidate_prob(ch);
                if r > 0.0 && rng.gen::<f64>() < r && rng.gen::<f64>() < self.accept_prob(ch) {
                    self.event(ch, rng);
                } else {
                    self.no_event(ch);
                }
            }
        }
        Ok(())
    }
}

fn run_naive(ops: &[Op], sv: StateVector, rng: &mut ChaCha8Rng) -> Result<StateVector> {
    let mut st = Lazy::new(sv);
    for op in ops {
        st.op(op, rng)?;
    }
    Ok(st.into_state())
}

fn exp1(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln()
}

fn sample_linear(sv: &StateVector, rng: &mut ChaCha8Rng) -> u64 {
    let u = rng.gen::<f64>() * sv.norm_sqr();
    let mut acc = 0.0;
    let amps = sv.amps();
    for (b, a) in amps.iter().enumerate() {
        acc += a.norm_sqr();
        if acc > u {
            return b as u64;
        }
    }
    (amps.len() - 1) as u64
}

/// Noisy executor for one state-preparation circuit followed by any number
/// of measurement-basis rotations. Each shot evolves one trajectory through
/// the preparation and is then read out once in every rotation.
#[derive(Debug, Clone)]
pub struct TrajectoryEngine {
    n: usize,
    main: Vec<Op>,
    readouts: Vec<Vec<Op>>,
    ro_damp: f64,
    ro_flip: f64,
}

impl TrajectoryEngine {
    pub fn new(prep: &Circuit, rotations: &[Circuit], spec: &NoiseSpec) -> Result<Self> {
        spec.validate()?;
        let mut readouts = Vec::with_capacity(rotations.len());
        for r in rotations {
            if r.n_qubits() != prep.n_qubits() {
                return Err(Error::QubitMismatch(prep.n_qubits(), r.n_qubits()));
            }
            readouts.push(compile(r, spec, false)?);
        }
        Ok(Self {
            n: prep.n_qubits(),
            main: compile(prep, spec, true)?,
            readouts,
            ro_damp: spec.damping_prob(spec.durations.readout_ns),
            ro_flip: spec.err_readout,
        })
    }

    fn read(&self, mut b: u64, rng: &mut ChaCha8Rng) -> u64 {
        for q in 0..self.n {
            let bit = 1u64 << q;
            if self.ro_damp > 0.0 && b & bit != 0 && rng.gen::<f64>() < self.ro_damp {
                b &= !bit;
            }
            if self.ro_flip > 0.0 && rng.gen::<f64>() < self.ro_flip {
                b ^= bit;
            }
        }
        b
    }

    fn measure_all(&self, sv: &StateVector, rng: &mut ChaCha8Rng, out: &mut [ShotResult]) -> Result<()> {
        for (ops, res) in self.readouts.iter().zip(out.iter_mut()) {
            let st = run_naive(ops, sv.clone(), rng)?;
            let b = sample_linear(&st, rng);
            res.record(self.read(b, rng));
        }
        Ok(())
    }

    /// Run `ops` from `start` for the given shots with the shared-path scheme;
    /// `on_branch` receives each shot that leaves the shared path.
    fn shared_pass(
        &self,
        ops: &[Op],
        start: StateVector,
        shots: &[usize],
        rngs: &mut [ChaCha8Rng],
        mut on_branch: impl FnMut(usize, StateVector, &mut ChaCha8Rng) -> Result<()>,
    ) -> Result<(StateVector, Vec<usize>)> {
        let mut thresholds: Vec<(f64, usize)> = shots.iter().map(|&s| (exp1(&mut rngs[s]), s)).collect();
        thresholds.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut shared = Lazy::new(start);
        let mut hazard = 0.0;
        let mut next = 0;
        for (k, op) in ops.iter().enumerate() {
            match op {
                Op::Gate(g) => shared.gate(g)?,
                Op::Phase(q, f) => shared.mul(*q, *f),
                Op::Chan(ch) => {
                    let r = candidate_prob(ch);
                    if r <= 0.0 {
                        continue;
                    }
                    let h = if r >= 1.0 { f64::INFINITY } else { hazard - (-r).ln_1p() };
                    let mut accept = None;
                    while next < thresholds.len() && thresholds[next].0 < h {
                        let s = thresholds[next].1;
                        let rng = &mut rngs[s];
                        let pa = *accept.get_or_insert_with(|| shared.accept_prob(ch));
                        if rng.gen::<f64>() < pa {
                            let mut st = Lazy::new(shared.flush_all().clone());
                            st.event(ch, rng);
                            for op in &ops[k + 1..] {
                                st.op(op, rng)?;
                            }
                            on_branch(s, st.into_state(), rng)?;
                            next += 1;
                        } else {
                            // rejected candidate: memoryless redraw past this site
                            let t = h + exp1(rng);
                            thresholds.remove(next);
                            let at = next + thresholds[next..].partition_point(|x| x.0 < t);
                            thresholds.insert(at, (t, s));
                        }
                    }
                    shared.no_event(ch);
                    hazard = h;
                }
            }
        }
        let mut shared = shared.into_state();
        shared.normalize();
        let mut rest: Vec<usize> = thresholds[next..].iter().map(|t| t.1).collect();
        rest.sort_unstable();
        Ok((shared, rest))
    }

    /// Counts per readout rotation, in the order given to [`Self::new`].
    pub fn run(&self, shots: usize, seed: u64) -> Result<Vec<ShotResult>> {
        if shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        let mut rngs: Vec<ChaCha8Rng> = (0..shots)
            .map(|s| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(s as u64);
                r
            })
            .collect();
        let mut out = vec![ShotResult::new(self.n); self.readouts.len()];
        let all: Vec<usize> = (0..shots).collect();

        let (prepared, survivors) = self.shared_pass(
            &self.main,
            StateVector::zero(self.n)?,
            &all,
            &mut rngs,
            |_, st, rng| self.measure_all(&st, rng, &mut out),
        )?;

        for (g, ops) in self.readouts.iter().enumerate() {
            let mut branched = Vec::new();
            let (rotated, rest) = self.shared_pass(ops, prepared.clone(), &survivors, &mut rngs, |_, st, rng| {
                branched.push(self.read(sample_linear(&st, rng), rng));
                Ok(())
            })?;
            for b in branched {
                out[g].record(b);
            }
            let cdf = Cdf::new(&rotated);
            for s in rest {
                let rng = &mut rngs[s];
                let b = cdf.sample(rng);
                out[g].record(self.read(b, rng));
            }
        }
        Ok(out)
    }
}

/// Sample `shots` noisy executions of a native circuit, reading all qubits
/// in the computational basis at the end. Measure and barrier gates are
/// ignored.
pub fn run_noisy(c: &Circuit, spec: &NoiseSpec, shots: usize, seed: u64) -> Result<ShotResult> {
    let engine = TrajectoryEngine::new(c, &[Circuit::new(c.n_qubits())], spec)?;
    Ok(engine.run(shots, seed)?.remove(0))
}
