//! Hartree-Fock preparation plus a single Trotter step of the paired
//! unitary coupled-cluster doubles (UpCCD) operator.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::fermion::pair_excitation_strings;
use crate::model::{Charge, LevelScheme};
use crate::{Error, Result};

/// Moves the pair on occupied level `from` to vacant level `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Excitation {
    pub charge: Charge,
    pub from: usize,
    pub to: usize,
}

/// Level and excitation whose amplitude starts at 1 rad.
pub const SEED_EXCITATION: (usize, usize) = (1, 3);
pub const SEED_THETA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzSpec {
    n_qubits: usize,
    occupied: Vec<usize>,
    excitations: Vec<Excitation>,
    theta: Vec<f64>,
}

impl AnsatzSpec {
    /// All like-charge pair excitations from occupied to vacant levels, ordered
    /// by (charge, from, to), at the default initial point.
    pub fn from_scheme(s: &LevelScheme) -> Result<Self> {
        let mut ex = Vec::new();
        for a in s.levels.iter().filter(|l| l.occupied) {
            for b in s.levels.iter().filter(|l| !l.occupied && l.charge == a.charge) {
                ex.push(Excitation { charge: a.charge, from: a.index, to: b.index });
            }
        }
        ex.sort();
        let theta = initial_theta(&ex)?;
        Self::new(s.n_qubits(), s.occupied_levels(), ex, theta)
    }

    pub fn new(n_qubits: usize, occupied: Vec<usize>, excitations: Vec<Excitation>, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != excitations.len() {
            return Err(Error::LengthMismatch { expected: excitations.len(), got: theta.len() });
        }
        let in_range = |l: usize| l >= 1 && 2 * l <= n_qubits;
        for &l in &occupied {
            if !in_range(l) {
                return Err(Error::OutOfRange { index: l, n: n_qubits / 2 });
            }
        }
        for e in &excitations {
            if !in_range(e.from) || !in_range(e.to) {
                return Err(Error::OutOfRange { index: e.from.max(e.to), n: n_qubits / 2 });
            }
            if !occupied.contains(&e.from) || occupied.contains(&e.to) {
                return Err(Error::Scheme(format!(
                    "excitation {}→{} must go from an occupied to a vacant level",
                    e.from, e.to
                )));
            }
        }
        Ok(Self { n_qubits, occupied, excitations, theta })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn excitations(&self) -> &[Excitation] {
        &self.excitations
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    /// Same structure with new amplitudes.
    pub fn bind(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.theta.len() {
            return Err(Error::LengthMismatch { expected: self.theta.len(), got: theta.len() });
        }
        let mut s = self.clone();
        s.theta = theta.to_vec();
        Ok(s)
    }
}

/// Zero amplitudes except the seed excitation (level 1 → 3), which starts at
/// 1 rad to keep the landscape away from its flat points at θ = nπ/2.
pub fn initial_theta(excitations: &[Excitation]) -> Result<Vec<f64>> {
    let mut theta = vec![0.0; excitations.len()];
    let k = excitations
        .iter()
        .position(|e| (e.from, e.to) == SEED_EXCITATION)
        .ok_or_else(|| {
            Error::Scheme(format!(
                "no {}→{} excitation to seed; levels must share a charge",
                SEED_EXCITATION.0, SEED_EXCITATION.1
            ))
        })?;
    check_seed_value(SEED_THETA)?;
    theta[k] = SEED_THETA;
    Ok(theta)
}

/// Rejects seed amplitudes within 1e-6 of a multiple of π/2.
pub fn check_seed_value(v: f64) -> Result<()> {
    let r = v / FRAC_PI_2;
    if (r - r.round()).abs() * FRAC_PI_2 < 1e-6 {
        return Err(Error::Config(format!("seed amplitude {v} sits on a multiple of π/2")));
    }
    Ok(())
}

/// X on both qubits of every occupied pair level.
pub fn hf_prep(spec: &AnsatzSpec) -> Result<Circuit> {
    let mut c = Circuit::new(spec.n_qubits);
    for &l in &spec.occupied {
        c.push(Gate::X(2 * (l - 1)))?;
        c.push(Gate::X(2 * (l - 1) + 1))?;
    }
    Ok(c)
}

/// HF preparation followed by `exp(θ_k τ_k)` for each excitation in order,
/// each factor split into its eight commuting Pauli evolutions.
pub fn build_upccd(spec: &AnsatzSpec) -> Result<Circuit> {
    let mut c = hf_prep(spec)?;
    for (e, &th) in spec.excitations.iter().zip(&spec.theta) {
        let (i, ib) = (2 * (e.from - 1), 2 * (e.from - 1) + 1);
        let (j, jb) = (2 * (e.to - 1), 2 * (e.to - 1) + 1);
        for (s, t) in pair_excitation_strings(i, ib, j, jb, spec.n_qubits)? {
            // τ = (i/8) Σ s·P, so exp(θτ) = Π exp(i·(sθ/8)·P)
            let phase = t.coeff();
            if phase.im.abs() > 1e-12 {
                return Err(Error::InvalidTerm("pair string with complex phase".into()));
            }
            c.push(Gate::PauliEvolution {
                x: t.x_mask(),
                z: t.z_mask(),
                angle: s * phase.re * th / 8.0,
            })?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn he6_excitations_and_seed() {
        let s = LevelScheme::bundled_he6();
        let a = AnsatzSpec::from_scheme(&s).unwrap();
        let pairs: Vec<(usize, usize)> = a.excitations().iter().map(|e| (e.from, e.to)).collect();
        assert_eq!(pairs, vec![(2, 5), (2, 6), (4, 5), (4, 6), (1, 3)]);
        assert_eq!(a.theta().iter().filter(|&&t| t != 0.0).count(), 1);
        assert_eq!(a.theta()[4], 1.0);
    }

    #[test]
    fn hf_prep_qubits() {
        let s = LevelScheme::bundled_he6();
        let a = AnsatzSpec::from_scheme(&s).unwrap();
        let qs: Vec<usize> = hf_prep(&a).unwrap().gates().iter().map(|g| g.qubits()[0]).collect();
        assert_eq!(qs, vec![0, 1, 2, 3, 6, 7]);
        let empty = AnsatzSpec::new(4, vec![], vec![], vec![]).unwrap();
        assert!(hf_prep(&empty).unwrap().is_empty());
    }

    #[test]
    fn bind_round_trip() {
        let s = LevelScheme::bundled_he6();
        let a = AnsatzSpec::from_scheme(&s).unwrap();
        let t = [0.1, 0.2, 0.3, 0.4, 0.5];
        let b = a.bind(&t).unwrap();
        assert_eq!(b.theta(), &t);
        assert_eq!(b.excitations(), a.excitations());
        assert_eq!(a.bind(&t).unwrap(), b);
        assert!(matches!(a.bind(&[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn seed_guard() {
        assert!(check_seed_value(1.0).is_ok());
        assert!(check_seed_value(FRAC_PI_2 + 1e-8).is_err());
        assert!(check_seed_value(0.0).is_err());
        assert!(check_seed_value(-std::f64::consts::PI).is_err());
    }

    #[test]
    fn circuit_shape() {
        let s = LevelScheme::bundled_he6();
        let a = AnsatzSpec::from_scheme(&s).unwrap();
        let c = build_upccd(&a).unwrap();
        assert_eq!(c.len(), 6 + 8 * 5);
    }
}
