//! Independent dense oracles shared by the integration tests.
//!
//! Nothing here calls into the crate's own matrix or mapping code: Pauli
//! strings are expanded entry by entry, fermion operators are built in the
//! occupation-number basis, gates from their textbook matrices, and the
//! pairing Hamiltonian from the hard-core-boson pair basis.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use pairing_vqe::circuit::{Circuit, Gate};
use pairing_vqe::model::{Charge, LevelScheme};
use pairing_vqe::pauli::{PauliSum, PauliTerm};
use pairing_vqe::sim::NoiseSpec;
use std::f64::consts::FRAC_1_SQRT_2;

pub type M = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Entry `⟨r|σ|c⟩` of a single-qubit Pauli given its symplectic bits.
fn pauli_entry(x: bool, z: bool, r: usize, col: usize) -> C64 {
    match (x, z) {
        (false, false) => if r == col { c(1.0, 0.0) } else { c(0.0, 0.0) },
        (true, false) => if r != col { c(1.0, 0.0) } else { c(0.0, 0.0) },
        (false, true) => match (r, col) {
            (0, 0) => c(1.0, 0.0),
            (1, 1) => c(-1.0, 0.0),
            _ => c(0.0, 0.0),
        },
        (true, true) => match (r, col) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        },
    }
}

/// Dense matrix of a weighted Pauli string; basis index bit `u` is qubit `u`.
pub fn term_matrix(t: &PauliTerm) -> M {
    let n = t.n_qubits();
    let dim = 1usize << n;
    M::from_fn(dim, dim, |r, col| {
        let mut v = t.coeff();
        for u in 0..n {
            let (x, z) = (t.x_mask() >> u & 1 == 1, t.z_mask() >> u & 1 == 1);
            v *= pauli_entry(x, z, r >> u & 1, col >> u & 1);
            if v == c(0.0, 0.0) {
                break;
            }
        }
        v
    })
}

pub fn sum_matrix(h: &PauliSum) -> M {
    let dim = 1usize << h.n_qubits();
    h.terms().iter().fold(M::zeros(dim, dim), |acc, t| acc + term_matrix(t))
}

/// Fock-space `a†_p` with the sign `(-1)^(occupied modes below p)`.
pub fn creation(p: usize, n: usize) -> M {
    let dim = 1usize << n;
    let mut m = M::zeros(dim, dim);
    for col in 0..dim {
        if col >> p & 1 == 0 {
            let below = (col & ((1 << p) - 1)).count_ones();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            m[(col | 1 << p, col)] = c(sign, 0.0);
        }
    }
    m
}

pub fn annihilation(p: usize, n: usize) -> M {
    creation(p, n).adjoint()
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `‖A − e^{iφ}B‖_max` minimised over the global phase.
pub fn phase_distance(a: &M, b: &M) -> f64 {
    let mut overlap = c(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        overlap += y.conj() * x;
    }
    let phase = if overlap.norm() > 1e-14 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    max_abs(&(a - b * phase))
}

fn embed_1q(m: [[C64; 2]; 2], q: usize, n: usize) -> M {
    let dim = 1usize << n;
    M::from_fn(dim, dim, |r, col| {
        if (r ^ col) & !(1 << q) != 0 {
            c(0.0, 0.0)
        } else {
            m[r >> q & 1][col >> q & 1]
        }
    })
}

/// Textbook matrix of a single gate on `n` qubits.
pub fn gate_matrix(g: &Gate, n: usize) -> M {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let h = c(FRAC_1_SQRT_2, 0.0);
    let dim = 1usize << n;
    match *g {
        Gate::Id(_) | Gate::Barrier(_) | Gate::Measure(_) => M::identity(dim, dim),
        Gate::X(q) => embed_1q([[o, l], [l, o]], q, n),
        Gate::Sx(q) => embed_1q([[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]], q, n),
        Gate::Rz(a, q) => embed_1q([[C64::from_polar(1.0, -a / 2.0), o], [o, C64::from_polar(1.0, a / 2.0)]], q, n),
        Gate::H(q) => embed_1q([[h, h], [h, -h]], q, n),
        Gate::S(q) => embed_1q([[l, o], [o, c(0.0, 1.0)]], q, n),
        Gate::Sdg(q) => embed_1q([[l, o], [o, c(0.0, -1.0)]], q, n),
        Gate::Cx(ctl, t) => M::from_fn(dim, dim, |r, col| {
            let target = if col >> ctl & 1 == 1 { col ^ 1 << t } else { col };
            if r == target { l } else { o }
        }),
        Gate::PauliEvolution { x, z, angle } => {
            // exp(iθP) = cos θ·I + i sin θ·P for an involutory Hermitian P
            let pm = term_matrix(&PauliTerm::new(n, x, z, c(1.0, 0.0)).unwrap());
            M::identity(dim, dim) * c(angle.cos(), 0.0) + pm * c(0.0, angle.sin())
        }
    }
}

pub fn circuit_unitary(circ: &Circuit) -> M {
    let n = circ.n_qubits();
    let dim = 1usize << n;
    circ.gates().iter().fold(M::identity(dim, dim), |u, g| gate_matrix(g, n) * u)
}

/// Pair-basis Hamiltonian: states are sets of occupied pair levels with the
/// reference number of pairs per charge;
/// `H = Σ 2e_p n_p + Σ_q V_q Σ_{p,p' ∈ q} P†_p P_p'`, `V_q = −G_q / (11 + N_q)`.
pub fn pair_basis_hamiltonian(s: &LevelScheme) -> (Vec<u64>, DMatrix<f64>) {
    let n = s.levels.len();
    let pairs_of = |q: Charge, set: u64| {
        s.levels.iter().enumerate().filter(|(i, l)| l.charge == q && set >> i & 1 == 1).count()
    };
    let want = |q: Charge| s.levels.iter().filter(|l| l.charge == q && l.occupied).count();
    let states: Vec<u64> = (0..1u64 << n)
        .filter(|&set| [Charge::Neutron, Charge::Proton].iter().all(|&q| pairs_of(q, set) == want(q)))
        .collect();
    let v = |q: Charge| -s.pairing.g_mev_per_charge[&q] / (11.0 + 2.0 * want(q) as f64);
    let dim = states.len();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (a, &sa) in states.iter().enumerate() {
        for (b, &sb) in states.iter().enumerate() {
            let diff = sa ^ sb;
            if a == b {
                let mut e = 0.0;
                for (i, l) in s.levels.iter().enumerate() {
                    if sa >> i & 1 == 1 {
                        e += 2.0 * l.e_mev + v(l.charge);
                    }
                }
                h[(a, b)] = e;
            } else if diff.count_ones() == 2 {
                let i = diff.trailing_zeros() as usize;
                let j = 63 - diff.leading_zeros() as usize;
                if s.levels[i].charge == s.levels[j].charge {
                    h[(a, b)] = v(s.levels[i].charge);
                }
            }
        }
    }
    (states, h)
}

pub fn lowest_eigenvalue(h: &DMatrix<f64>) -> f64 {
    h.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn random_unit_vector(dim: usize, rng: &mut impl rand::Rng) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let n = v.norm();
    v / c(n, 0.0)
}

// ---- density-matrix reference for the noisy executor ----

pub struct Density {
    pub n: usize,
    pub rho: M,
}

impl Density {
    pub fn zero(n: usize) -> Self {
        let dim = 1usize << n;
        let mut rho = M::zeros(dim, dim);
        rho[(0, 0)] = c(1.0, 0.0);
        Self { n, rho }
    }

    pub fn unitary(&mut self, u: &M) {
        self.rho = u * &self.rho * u.adjoint();
    }

    fn kraus(&mut self, ks: &[M]) {
        let dim = 1usize << self.n;
        let mut out = M::zeros(dim, dim);
        for k in ks {
            out += k * &self.rho * k.adjoint();
        }
        self.rho = out;
    }

    fn pauli_channel(&mut self, qubits: &[usize], p: f64) {
        // uniform over all 4^k Paulis on the listed qubits, identity included
        let k = qubits.len();
        let dim = 1usize << self.n;
        let mut mixed = M::zeros(dim, dim);
        for code in 0..(1usize << (2 * k)) {
            let (mut x, mut z) = (0u64, 0u64);
            for (a, &q) in qubits.iter().enumerate() {
                let letter = code >> (2 * a) & 3;
                let (xb, zb) = [(0, 0), (1, 0), (1, 1), (0, 1)][letter];
                x |= (xb as u64) << q;
                z |= (zb as u64) << q;
            }
            let pm = term_matrix(&PauliTerm::new(self.n, x, z, c(1.0, 0.0)).unwrap());
            mixed += &pm * &self.rho * pm.adjoint();
        }
        let scale = (1usize << (2 * k)) as f64;
        self.rho = &self.rho * c(1.0 - p, 0.0) + mixed * c(p / scale, 0.0);
    }

    fn flip(&mut self, q: usize, p: f64) {
        let x = gate_matrix(&Gate::X(q), self.n);
        self.rho = &self.rho * c(1.0 - p, 0.0) + (&x * &self.rho * &x) * c(p, 0.0);
    }

    fn relax(&mut self, q: usize, g: f64, pz: f64) {
        let o = c(0.0, 0.0);
        let k0 = embed_1q([[c(1.0, 0.0), o], [o, c((1.0 - g).sqrt(), 0.0)]], q, self.n);
        let k1 = embed_1q([[o, c(g.sqrt(), 0.0)], [o, o]], q, self.n);
        self.kraus(&[k0, k1]);
        let z = embed_1q([[c(1.0, 0.0), o], [o, c(-1.0, 0.0)]], q, self.n);
        self.rho = &self.rho * c(1.0 - pz, 0.0) + (&z * &self.rho * &z) * c(pz, 0.0);
    }

    /// Exact output distribution of a native circuit under `spec`, including
    /// preparation errors and classical readout relaxation and flips.
    pub fn run(circ: &Circuit, spec: &NoiseSpec) -> Vec<f64> {
        let n = circ.n_qubits();
        let d = spec.durations;
        let mut st = Self::zero(n);
        let relax = |st: &mut Self, q: usize, t: f64| st.relax(q, spec.damping_prob(t), spec.dephasing_prob(t));
        for q in 0..n {
            st.flip(q, spec.err_spam);
            relax(&mut st, q, d.prep_ns);
        }
        for g in circ.gates() {
            match *g {
                Gate::Rz(..) => st.unitary(&gate_matrix(g, n)),
                Gate::X(q) | Gate::Sx(q) | Gate::Id(q) => {
                    st.unitary(&gate_matrix(g, n));
                    st.pauli_channel(&[q], spec.err_1q);
                    relax(&mut st, q, d.gate_1q_ns);
                }
                Gate::Cx(a, b) => {
                    st.unitary(&gate_matrix(g, n));
                    st.pauli_channel(&[a, b], spec.err_2q);
                    relax(&mut st, a, d.gate_2q_ns);
                    relax(&mut st, b, d.gate_2q_ns);
                }
                _ => panic!("non-native gate in oracle circuit"),
            }
        }
        let mut p: Vec<f64> = (0..1usize << n).map(|i| st.rho[(i, i)].re).collect();
        let g_ro = spec.damping_prob(d.readout_ns);
        for q in 0..n {
            let mut next = vec![0.0; p.len()];
            for (b, &pb) in p.iter().enumerate() {
                let mut outcomes = vec![(b, pb)];
                if b >> q & 1 == 1 {
                    outcomes = vec![(b, pb * (1.0 - g_ro)), (b ^ 1 << q, pb * g_ro)];
                }
                for (o, w) in outcomes {
                    next[o] += w * (1.0 - spec.err_readout);
                    next[o ^ 1 << q] += w * spec.err_readout;
                }
            }
            p = next;
        }
        p
    }
}
