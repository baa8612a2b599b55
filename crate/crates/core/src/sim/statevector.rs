use crate::circuit::{Circuit, Gate, Mat2};
use crate::pauli::{i_pow, PauliSum};
use crate::{Error, Result, C64};

pub const MAX_SV_QUBITS: usize = 24;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Visit every `(|…0_q…⟩, |…1_q…⟩)` amplitude pair. Low qubits get
/// fixed-size inner loops; plain chunking is overhead-bound there.
#[inline(always)]
fn for_pairs(amps: &mut [C64], q: usize, mut f: impl FnMut(&mut C64, &mut C64)) {
    #[inline(always)]
    fn fixed<const B: usize>(amps: &mut [C64], f: &mut impl FnMut(&mut C64, &mut C64)) {
        for c in amps.chunks_exact_mut(2 * B) {
            let (lo, hi) = c.split_at_mut(B);
            for k in 0..B {
                f(&mut lo[k], &mut hi[k]);
            }
        }
    }
    match q {
        0 => fixed::<1>(amps, &mut f),
        1 => fixed::<2>(amps, &mut f),
        2 => fixed::<4>(amps, &mut f),
        3 => fixed::<8>(amps, &mut f),
        _ => {
            let bit = 1usize << q;
            for c in amps.chunks_exact_mut(bit << 1) {
                let (lo, hi) = c.split_at_mut(bit);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    f(a, b);
                }
            }
        }
    }
}

/// Swap the upper half of every `2B` block of `lo` with the same slots in `hi`.
#[inline(always)]
fn swap_upper<const B: usize>(lo: &mut [C64], hi: &mut [C64]) {
    for (l, h) in lo.chunks_exact_mut(2 * B).zip(hi.chunks_exact_mut(2 * B)) {
        for k in B..2 * B {
            std::mem::swap(&mut l[k], &mut h[k]);
        }
    }
}

/// Dense state vector; basis index bit `u` is qubit `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n > MAX_SV_QUBITS {
            return Err(Error::OutOfRange { index: n, n: MAX_SV_QUBITS });
        }
        let mut amps = vec![ZERO; 1 << n];
        if index >= amps.len() {
            return Err(Error::OutOfRange { index, n });
        }
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amps(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(Error::InvalidTerm(format!("length {} is not a power of two", amps.len())));
        }
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        if s > 0.0 {
            let inv = 1.0 / s;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability of reading qubit `q` as 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        if q < 4 {
            return (0..self.amps.len()).filter(|i| i & bit != 0).map(|i| self.amps[i].norm_sqr()).sum();
        }
        let mut p = 0.0;
        for chunk in self.amps.chunks_exact(bit << 1) {
            for a in &chunk[bit..] {
                p += a.norm_sqr();
            }
        }
        p
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let m = *m;
        for_pairs(&mut self.amps, q, |a, b| {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        });
    }

    /// `√X = ½[[1+i, 1-i], [1-i, 1+i]]` via sum and difference.
    pub fn apply_sx(&mut self, q: usize) {
        for_pairs(&mut self.amps, q, |a, b| {
            let s = (*a + *b) * 0.5;
            let d = (*a - *b) * 0.5;
            let id = C64::new(-d.im, d.re);
            *a = s + id;
            *b = s - id;
        });
    }

    /// `√X · diag(1, d)` in one pass.
    pub fn apply_sx_phased(&mut self, q: usize, d: C64) {
        for_pairs(&mut self.amps, q, |a, b| {
            let y = *b * d;
            let s = (*a + y) * 0.5;
            let e = (*a - y) * 0.5;
            let ie = C64::new(-e.im, e.re);
            *a = s + ie;
            *b = s - ie;
        });
    }

    pub fn apply_x(&mut self, q: usize) {
        for_pairs(&mut self.amps, q, std::mem::swap);
    }

    /// Multiply the `|1⟩` half of qubit `q` by `f` and the `|0⟩` half by `g`.
    pub fn apply_diag(&mut self, q: usize, g: C64, f: C64) {
        for_pairs(&mut self.amps, q, |a, b| {
            *a *= g;
            *b *= f;
        });
    }

    pub fn apply_rz(&mut self, q: usize, angle: f64) {
        self.apply_diag(
            q,
            C64::from_polar(1.0, -angle / 2.0),
            C64::from_polar(1.0, angle / 2.0),
        );
    }

    pub fn apply_cx(&mut self, c: usize, t: usize) {
        let (cb, tb) = (1usize << c, 1usize << t);
        if c > t {
            for chunk in self.amps.chunks_exact_mut(cb << 1) {
                for_pairs(&mut chunk[cb..], t, std::mem::swap);
            }
        } else {
            for chunk in self.amps.chunks_exact_mut(tb << 1) {
                let (lo, hi) = chunk.split_at_mut(tb);
                match c {
                    0 => swap_upper::<1>(lo, hi),
                    1 => swap_upper::<2>(lo, hi),
                    2 => swap_upper::<4>(lo, hi),
                    _ => {
                        for (l, h) in lo.chunks_exact_mut(cb << 1).zip(hi.chunks_exact_mut(cb << 1)) {
                            l[cb..].swap_with_slice(&mut h[cb..]);
                        }
                    }
                }
            }
        }
    }

    /// Multiply the `|1⟩` half of qubit `q` by `f` (RZ up to global phase).
    pub fn apply_phase(&mut self, q: usize, f: C64) {
        for_pairs(&mut self.amps, q, |_, b| *b *= f);
    }

    /// Project qubit `q` onto `|1⟩`, move that component to `|0⟩` and
    /// renormalise.
    pub fn decay_to_zero(&mut self, q: usize) {
        for_pairs(&mut self.amps, q, |a, b| *a = std::mem::take(b));
        self.normalize();
    }

    /// Apply the Hermitian Pauli string with masks `(x, z)`.
    pub fn apply_pauli(&mut self, x: u64, z: u64) {
        let base = i_pow((x & z).count_ones());
        let (x, z) = (x as usize, z as usize);
        if x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                if (b & z).count_ones() & 1 == 1 {
                    *a = -*a;
                }
            }
            return;
        }
        let hi = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for b in 0..self.amps.len() {
            if b & hi != 0 {
                continue;
            }
            let b2 = b ^ x;
            let s1 = if (b & z).count_ones() & 1 == 1 { -base } else { base };
            let s2 = if (b2 & z).count_ones() & 1 == 1 { -base } else { base };
            let (a1, a2) = (self.amps[b], self.amps[b2]);
            self.amps[b2] = s1 * a1;
            self.amps[b] = s2 * a2;
        }
    }

    /// `exp(i·angle·P)` applied in place.
    pub fn apply_pauli_evolution(&mut self, x: u64, z: u64, angle: f64) {
        let (s, c) = angle.sin_cos();
        let is = C64::new(0.0, s);
        let base = i_pow((x & z).count_ones());
        let (x, z) = (x as usize, z as usize);
        let phase = |b: usize| if (b & z).count_ones() & 1 == 1 { -base } else { base };
        if x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= c + is * phase(b);
            }
            return;
        }
        let hi = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for b in 0..self.amps.len() {
            if b & hi != 0 {
                continue;
            }
            let b2 = b ^ x;
            let (a1, a2) = (self.amps[b], self.amps[b2]);
            self.amps[b2] = c * a2 + is * phase(b) * a1;
            self.amps[b] = c * a1 + is * phase(b2) * a2;
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        match *g {
            Gate::X(q) => self.apply_x(q),
            Gate::Sx(q) => self.apply_sx(q),
            Gate::Rz(a, q) => self.apply_rz(q, a),
            Gate::Cx(c, t) => self.apply_cx(c, t),
            Gate::Id(_) | Gate::Barrier(_) => {}
            Gate::PauliEvolution { x, z, angle } => self.apply_pauli_evolution(x, z, angle),
            Gate::Measure(_) => return Err(Error::MeasurementInStatevector),
            ref g => {
                let m = g.matrix_1q().expect("single-qubit gate");
                self.apply_1q(g.qubits()[0], &m);
            }
        }
        Ok(())
    }

    pub fn run(&mut self, c: &Circuit) -> Result<()> {
        if c.n_qubits() != self.n {
            return Err(Error::QubitMismatch(self.n, c.n_qubits()));
        }
        for g in c.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Evolve `|0…0⟩` through a measurement-free circuit.
pub fn run_statevector(c: &Circuit) -> Result<StateVector> {
    if c.has_measurements() {
        return Err(Error::MeasurementInStatevector);
    }
    let mut sv = StateVector::zero(c.n_qubits())?;
    sv.run(c)?;
    Ok(sv)
}

/// `⟨ψ|h|ψ⟩` for Hermitian `h`.
pub fn expectation_of(sv: &StateVector, h: &PauliSum) -> Result<f64> {
    if h.n_qubits() != sv.n_qubits() {
        return Err(Error::QubitMismatch(sv.n_qubits(), h.n_qubits()));
    }
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.max_imag()));
    }
    Ok(h.expectation(sv.amps()).re)
}

pub fn exact_expectation(c: &Circuit, h: &PauliSum) -> Result<f64> {
    expectation_of(&run_statevector(c)?, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliTerm;

    #[test]
    fn empty_and_x() {
        let sv = run_statevector(&Circuit::new(3)).unwrap();
        assert_eq!(sv.amps()[0], C64::new(1.0, 0.0));
        let mut c = Circuit::new(1);
        c.push(Gate::X(0)).unwrap();
        let sv = run_statevector(&c).unwrap();
        assert_eq!(sv.amps()[1], C64::new(1.0, 0.0));
    }

    #[test]
    fn measurement_rejected() {
        let mut c = Circuit::new(1);
        c.push(Gate::Measure(0)).unwrap();
        assert!(matches!(run_statevector(&c), Err(Error::MeasurementInStatevector)));
    }

    #[test]
    fn z_expectation_on_zero() {
        let h = PauliSum::from_terms(1, vec![PauliTerm::from_label("Z", C64::new(1.0, 0.0)).unwrap()]).unwrap();
        assert!((exact_expectation(&Circuit::new(1), &h).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolution_matches_lowered_form() {
        let mut a = Circuit::new(3);
        let mut b = Circuit::new(3);
        for q in 0..3 {
            a.push(Gate::H(q)).unwrap();
            b.push(Gate::H(q)).unwrap();
        }
        a.push(Gate::PauliEvolution { x: 0b101, z: 0b110, angle: 0.37 }).unwrap();
        b.extend(&crate::circuit::lower_pauli_evolution(3, 0b101, 0b110, 0.37).unwrap())
            .unwrap();
        let sa = run_statevector(&a).unwrap();
        let sb = run_statevector(&b).unwrap();
        assert!((sa.inner(&sb).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prob_one_counts_half() {
        let mut c = Circuit::new(2);
        c.push(Gate::H(1)).unwrap();
        let sv = run_statevector(&c).unwrap();
        assert!((sv.prob_one(1) - 0.5).abs() < 1e-12);
        assert!(sv.prob_one(0).abs() < 1e-12);
    }
}
