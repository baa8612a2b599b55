//! Gate-level circuit IR and a small peephole transpiler targeting
//! `{id, rz, sx, x, cx}`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::pauli::{Pauli, PauliTerm};
use crate::{Error, Result, C64};

pub type Mat2 = [[C64; 2]; 2];

const ANGLE_EPS: f64 = 1e-12;
const MAX_PASSES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Id(usize),
    X(usize),
    Sx(usize),
    Rz(f64, usize),
    H(usize),
    S(usize),
    Sdg(usize),
    /// control, target
    Cx(usize, usize),
    /// `exp(i·angle·P)` for the Hermitian string with masks `(x, z)`.
    PauliEvolution { x: u64, z: u64, angle: f64 },
    Measure(usize),
    Barrier(Vec<usize>),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Id(_) => "id",
            Gate::X(_) => "x",
            Gate::Sx(_) => "sx",
            Gate::Rz(..) => "rz",
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::Cx(..) => "cx",
            Gate::PauliEvolution { .. } => "pauli_evolution",
            Gate::Measure(_) => "measure",
            Gate::Barrier(_) => "barrier",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Id(q)
            | Gate::X(q)
            | Gate::Sx(q)
            | Gate::Rz(_, q)
            | Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::Measure(q) => vec![*q],
            Gate::Cx(c, t) => vec![*c, *t],
            Gate::PauliEvolution { x, z, .. } => bits((x | z) as usize),
            Gate::Barrier(qs) => qs.clone(),
        }
    }

    pub fn is_native(&self) -> bool {
        matches!(
            self,
            Gate::Id(_) | Gate::X(_) | Gate::Sx(_) | Gate::Rz(..) | Gate::Cx(..)
        )
    }

    /// 2×2 matrix of a single-qubit unitary gate.
    pub fn matrix_1q(&self) -> Option<Mat2> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Some(match *self {
            Gate::Id(_) => [[l, o], [o, l]],
            Gate::X(_) => [[o, l], [l, o]],
            Gate::Sx(_) => {
                let p = C64::new(0.5, 0.5);
                let m = C64::new(0.5, -0.5);
                [[p, m], [m, p]]
            }
            Gate::Rz(a, _) => [
                [C64::from_polar(1.0, -a / 2.0), o],
                [o, C64::from_polar(1.0, a / 2.0)],
            ],
            Gate::H(_) => [[h, h], [h, -h]],
            Gate::S(_) => [[l, o], [o, i]],
            Gate::Sdg(_) => [[l, o], [o, -i]],
            _ => return None,
        })
    }

    fn text(&self) -> String {
        match self {
            Gate::Rz(a, q) => format!("rz {a:.4} {q}"),
            Gate::Cx(c, t) => format!("cx {c} {t}"),
            Gate::PauliEvolution { x, z, angle } => {
                let n = 64 - (x | z).leading_zeros() as usize;
                let label = PauliTerm::new(n.max(1), *x, *z, C64::new(1.0, 0.0))
                    .map(|t| t.label())
                    .unwrap_or_default();
                format!("pauli_evolution {label} {angle:.4}")
            }
            Gate::Barrier(qs) => {
                let mut s = String::from("barrier");
                for q in qs {
                    let _ = write!(s, " {q}");
                }
                s
            }
            g => format!("{} {}", g.name(), g.qubits()[0]),
        }
    }
}

fn bits(mut m: usize) -> Vec<usize> {
    let mut out = Vec::new();
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        let qs = g.qubits();
        for &q in &qs {
            if q >= self.n_qubits {
                return Err(Error::OutOfRange { index: q, n: self.n_qubits });
            }
        }
        match &g {
            Gate::Cx(c, t) if c == t => {
                return Err(Error::InvalidGate(format!("cx with control == target ({c})")))
            }
            Gate::Rz(a, _) if !a.is_finite() => {
                return Err(Error::InvalidGate("non-finite rz angle".into()))
            }
            Gate::PauliEvolution { angle, .. } if !angle.is_finite() => {
                return Err(Error::InvalidGate("non-finite evolution angle".into()))
            }
            _ => {}
        }
        self.gates.push(g);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| matches!(g, Gate::Measure(_)))
    }

    pub fn is_native(&self) -> bool {
        self.gates.iter().all(Gate::is_native)
    }

    pub fn count_ops(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.name()).or_insert(0) += 1;
        }
        m
    }

    /// One gate per line, e.g. `cx 0 1`, `rz 1.5708 3`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for g in &self.gates {
            s.push_str(&g.text());
            s.push('\n');
        }
        s
    }
}

/// Longest dependency chain; gates on disjoint qubits share a layer.
pub fn depth(c: &Circuit) -> usize {
    let mut level = vec![0usize; c.n_qubits];
    let mut d = 0;
    for g in &c.gates {
        let qs = g.qubits();
        let l = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for q in qs {
            level[q] = l;
        }
        d = d.max(l);
    }
    d
}

/// Basis change, CX ladder onto the highest support qubit, `RZ(-2·angle)`,
/// then the inverse. Equals `exp(i·angle·P)` up to global phase.
pub fn lower_pauli_evolution(n_qubits: usize, x: u64, z: u64, angle: f64) -> Result<Circuit> {
    let support = x | z;
    if support == 0 {
        return Err(Error::IdentityEvolution);
    }
    if n_qubits < 64 && support >> n_qubits != 0 {
        return Err(Error::OutOfRange {
            index: 63 - support.leading_zeros() as usize,
            n: n_qubits,
        });
    }
    let qs = bits(support as usize);
    let letter = |q: usize| Pauli::from_bits(x >> q & 1 == 1, z >> q & 1 == 1);
    let mut c = Circuit::new(n_qubits);
    for &q in &qs {
        match letter(q) {
            Pauli::X => c.push(Gate::H(q))?,
            Pauli::Y => {
                c.push(Gate::Sdg(q))?;
                c.push(Gate::H(q))?;
            }
            _ => {}
        }
    }
    for w in qs.windows(2) {
        c.push(Gate::Cx(w[0], w[1]))?;
    }
    let top = *qs.last().unwrap();
    c.push(Gate::Rz(-2.0 * angle, top))?;
    for w in qs.windows(2).rev() {
        c.push(Gate::Cx(w[0], w[1]))?;
    }
    for &q in &qs {
        match letter(q) {
            Pauli::X => c.push(Gate::H(q))?,
            Pauli::Y => {
                c.push(Gate::H(q))?;
                c.push(Gate::S(q))?;
            }
            _ => {}
        }
    }
    Ok(c)
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Wrap into (-π, π].
fn wrap(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// ZYZ angles `(θ, φ, λ)` with `m ∝ RZ(φ)·RY(θ)·RZ(λ)`, θ ∈ [0, π].
pub fn zyz_angles(m: &Mat2) -> (f64, f64, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = det.sqrt().inv();
    let v = [[m[0][0] * inv, m[0][1] * inv], [m[1][0] * inv, m[1][1] * inv]];
    let theta = 2.0 * v[1][0].norm().atan2(v[0][0].norm());
    let a1 = v[1][1].arg();
    let a2 = v[1][0].arg();
    (theta, a1 + a2, a1 - a2)
}

/// Shortest `{rz, sx, x}` sequence (circuit order) equal to `m` up to phase.
pub fn synthesize_1q(m: &Mat2, q: usize) -> Vec<Gate> {
    let (theta, phi, lam) = zyz_angles(m);
    let mut out = Vec::new();
    let rz = |a: f64, out: &mut Vec<Gate>| {
        let a = wrap(a);
        if a.abs() > ANGLE_EPS {
            out.push(Gate::Rz(a, q));
        }
    };
    if theta.abs() < 1e-10 {
        rz(phi + lam, &mut out);
    } else if (theta - PI).abs() < 1e-10 {
        rz(PI - phi + lam, &mut out);
        out.push(Gate::X(q));
    } else if (theta - FRAC_PI_2).abs() < 1e-10 {
        rz(lam - FRAC_PI_2, &mut out);
        out.push(Gate::Sx(q));
        rz(phi + FRAC_PI_2, &mut out);
    } else {
        rz(lam, &mut out);
        out.push(Gate::Sx(q));
        rz(theta + PI, &mut out);
        out.push(Gate::Sx(q));
        rz(phi + PI, &mut out);
    }
    out
}

fn expand(c: &Circuit) -> Result<Vec<Gate>> {
    let mut out = Vec::with_capacity(c.len());
    for g in &c.gates {
        match g {
            Gate::PauliEvolution { x, z, angle } => {
                out.extend(lower_pauli_evolution(c.n_qubits, *x, *z, *angle)?.gates)
            }
            g => out.push(g.clone()),
        }
    }
    Ok(out)
}

fn lower_1q(gates: Vec<Gate>) -> Vec<Gate> {
    let mut out = Vec::with_capacity(gates.len());
    for g in gates {
        match g {
            Gate::Id(_) => {}
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) => {
                out.extend(synthesize_1q(&g.matrix_1q().expect("single-qubit gate"), q))
            }
            g => out.push(g),
        }
    }
    out
}

fn is_zero_angle(a: f64) -> bool {
    wrap(a).abs() <= ANGLE_EPS
}

/// One sweep over wire-adjacent gates: merge RZ runs, drop zero-angle RZ,
/// cancel CX pairs.
fn peephole(n: usize, gates: &[Gate]) -> Vec<Gate> {
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(gates.len());
    let mut last: Vec<Option<usize>> = vec![None; n];
    for g in gates {
        match *g {
            Gate::Rz(a, q) => {
                if let Some(i) = last[q] {
                    if let Some(Gate::Rz(b, _)) = out[i] {
                        let sum = wrap(a + b);
                        if is_zero_angle(sum) {
                            out[i] = None;
                            last[q] = None;
                        } else {
                            out[i] = Some(Gate::Rz(sum, q));
                        }
                        continue;
                    }
                }
                if is_zero_angle(a) {
                    continue;
                }
            }
            Gate::Cx(c, t) => {
                if let (Some(a), Some(b)) = (last[c], last[t]) {
                    if a == b && out[a] == Some(Gate::Cx(c, t)) {
                        out[a] = None;
                        last[c] = None;
                        last[t] = None;
                        continue;
                    }
                }
            }
            _ => {}
        }
        out.push(Some(g.clone()));
        for q in g.qubits() {
            last[q] = Some(out.len() - 1);
        }
    }
    out.into_iter().flatten().collect()
}

fn to_fixpoint(n: usize, mut gates: Vec<Gate>, pass: impl Fn(usize, &[Gate]) -> Vec<Gate>) -> Vec<Gate> {
    for _ in 0..MAX_PASSES {
        let next = pass(n, &gates);
        let done = next == gates;
        gates = next;
        if done {
            break;
        }
    }
    gates
}

/// Rewrite into `{rz, sx, x, cx}` (plus any measures/barriers), preserving
/// the unitary up to global phase. Each non-native single-qubit gate is
/// synthesised on its own; the peephole passes then merge RZ, drop
/// zero-angle RZ and cancel adjacent CX pairs. Identity gates are dropped.
pub fn transpile(c: &Circuit) -> Result<Circuit> {
    let gates = lower_1q(expand(c)?);
    Ok(Circuit { n_qubits: c.n_qubits, gates: to_fixpoint(c.n_qubits, gates, peephole) })
}

fn fuse_pass(n: usize, gates: &[Gate]) -> Vec<Gate> {
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(gates.len());
    let mut last: Vec<Option<usize>> = vec![None; n];
    let mut pending: Vec<Option<Mat2>> = vec![None; n];

    fn flush(q: usize, pending: &mut [Option<Mat2>], out: &mut Vec<Option<Gate>>, last: &mut [Option<usize>]) {
        if let Some(m) = pending[q].take() {
            for g in synthesize_1q(&m, q) {
                out.push(Some(g));
                last[q] = Some(out.len() - 1);
            }
        }
    }

    for g in gates {
        if let Some(m) = g.matrix_1q() {
            let q = g.qubits()[0];
            pending[q] = Some(match pending[q] {
                Some(p) => mat_mul(&m, &p),
                None => m,
            });
            continue;
        }
        let qs = g.qubits();
        for &q in &qs {
            flush(q, &mut pending, &mut out, &mut last);
        }
        if let Gate::Cx(c, t) = *g {
            if let (Some(a), Some(b)) = (last[c], last[t]) {
                if a == b && out[a] == Some(Gate::Cx(c, t)) {
                    out[a] = None;
                    last[c] = None;
                    last[t] = None;
                    continue;
                }
            }
        }
        out.push(Some(g.clone()));
        for q in qs {
            last[q] = Some(out.len() - 1);
        }
    }
    for q in 0..n {
        flush(q, &mut pending, &mut out, &mut last);
    }
    out.into_iter().flatten().collect()
}

/// Heavier optimisation than [`transpile`]: every single-qubit run between
/// two-qubit gates is fused and re-synthesised, which lets basis changes
/// cancel and exposes further CX pairs.
pub fn transpile_fused(c: &Circuit) -> Result<Circuit> {
    let gates = expand(c)?;
    Ok(Circuit { n_qubits: c.n_qubits, gates: to_fixpoint(c.n_qubits, gates, fuse_pass) })
}
