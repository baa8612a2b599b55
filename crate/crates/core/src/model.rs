//! Pair-level schemes and the constant-pairing Hamiltonian.
//!
//! Pair level `p` (1-based) occupies qubits `2(p-1)` (the state) and
//! `2(p-1)+1` (its time conjugate). Keeping conjugates adjacent means pair
//! operators carry no Jordan-Wigner Z-chains.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::fermion::{jw_map, FermionOperator, FermionTerm, LadderOp};
use crate::pauli::{PauliSum, PauliTerm, HERMITIAN_TOL};
use crate::{Error, Result, C64};

pub const SCHEMA_VERSION: u32 = 1;

/// Illustrative ⁶He level scheme shipped with the crate.
pub const BUNDLED_HE6: &str = include_str!("../data/he6.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Charge {
    Neutron,
    Proton,
}

impl Charge {
    pub const ALL: [Charge; 2] = [Charge::Neutron, Charge::Proton];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// 1-based pair-level index.
    pub index: usize,
    pub e_mev: f64,
    pub charge: Charge,
    pub occupied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingStrength {
    pub g_mev_per_charge: BTreeMap<Charge, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub levels: Vec<Level>,
    pub pairing: PairingStrength,
}

impl LevelScheme {
    pub fn new(levels: Vec<Level>, g_neutron: f64, g_proton: f64) -> Result<Self> {
        let mut g = BTreeMap::new();
        g.insert(Charge::Neutron, g_neutron);
        g.insert(Charge::Proton, g_proton);
        let mut s = Self {
            schema_version: SCHEMA_VERSION,
            name: None,
            note: None,
            levels,
            pairing: PairingStrength { g_mev_per_charge: g },
        };
        s.normalize()?;
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut s: Self = serde_json::from_str(text)?;
        s.normalize()?;
        Ok(s)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn bundled_he6() -> Self {
        Self::from_json(BUNDLED_HE6).expect("bundled dataset is valid")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn normalize(&mut self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Scheme(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.levels.is_empty() {
            return Err(Error::Scheme("no levels".into()));
        }
        if 2 * self.levels.len() > crate::pauli::MAX_QUBITS {
            return Err(Error::Scheme(format!("{} levels is too many", self.levels.len())));
        }
        self.levels.sort_by_key(|l| l.index);
        for (k, l) in self.levels.iter().enumerate() {
            if l.index != k + 1 {
                return Err(Error::Scheme(format!(
                    "level indices must run 1..={} without gaps (found {})",
                    self.levels.len(),
                    l.index
                )));
            }
            if !l.e_mev.is_finite() {
                return Err(Error::Scheme(format!("level {} has non-finite energy", l.index)));
            }
        }
        for (q, g) in &self.pairing.g_mev_per_charge {
            if !g.is_finite() || *g < 0.0 {
                return Err(Error::Scheme(format!("pairing intensity for {q:?} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.levels.len()
    }

    /// Qubits (state, conjugate) of a 1-based level index.
    pub fn qubits_of(&self, index: usize) -> (usize, usize) {
        (2 * (index - 1), 2 * (index - 1) + 1)
    }

    pub fn level(&self, index: usize) -> Option<&Level> {
        self.levels.get(index.wrapping_sub(1))
    }

    /// Nucleon count of a charge state: two per occupied pair level.
    pub fn nucleons(&self, q: Charge) -> usize {
        2 * self
            .levels
            .iter()
            .filter(|l| l.charge == q && l.occupied)
            .count()
    }

    pub fn occupied_levels(&self) -> Vec<usize> {
        self.levels.iter().filter(|l| l.occupied).map(|l| l.index).collect()
    }

    /// Sum of occupied single-particle energies, both members of each pair.
    pub fn reference_energy(&self) -> f64 {
        self.levels
            .iter()
            .filter(|l| l.occupied)
            .map(|l| 2.0 * l.e_mev)
            .sum()
    }

    /// Computational basis index of the reference determinant.
    pub fn reference_basis(&self) -> usize {
        self.levels
            .iter()
            .filter(|l| l.occupied)
            .map(|l| 0b11usize << (2 * (l.index - 1)))
            .fold(0, |a, b| a | b)
    }

    /// Qubit mask of all modes with charge `q`.
    pub fn charge_mask(&self, q: Charge) -> u64 {
        self.levels
            .iter()
            .filter(|l| l.charge == q)
            .map(|l| 0b11u64 << (2 * (l.index - 1)))
            .fold(0, |a, b| a | b)
    }

    /// Seniority-zero basis states with the reference pair count per charge.
    pub fn pair_sector(&self) -> Vec<usize> {
        let mut states = vec![0usize];
        for q in Charge::ALL {
            let lv: Vec<usize> = self
                .levels
                .iter()
                .filter(|l| l.charge == q)
                .map(|l| l.index)
                .collect();
            let need = self.nucleons(q) / 2;
            let mut next = Vec::new();
            for mask in 0u64..(1u64 << lv.len()) {
                if mask.count_ones() as usize != need {
                    continue;
                }
                let bits = lv
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &idx)| 0b11usize << (2 * (idx - 1)))
                    .fold(0, |a, b| a | b);
                next.extend(states.iter().map(|s| s | bits));
            }
            states = next;
        }
        states.sort_unstable();
        states
    }
}

/// Constant pairing matrix element `-G_q / (11 + N_q)` (MeV).
pub fn pairing_matrix_element(scheme: &LevelScheme, q: Charge) -> Result<f64> {
    let g = scheme
        .pairing
        .g_mev_per_charge
        .get(&q)
        .copied()
        .ok_or_else(|| Error::Scheme(format!("no pairing intensity for {q:?}")))?;
    Ok(-g / (11.0 + scheme.nucleons(q) as f64))
}

#[derive(Debug, Clone)]
pub struct PairingHamiltonian {
    pub fermionic: FermionOperator,
    pub qubit: PauliSum,
    /// Sum of occupied single-particle energies (MeV).
    pub hf_energy: f64,
    pub scheme: LevelScheme,
}

impl PairingHamiltonian {
    pub fn n_qubits(&self) -> usize {
        self.qubit.n_qubits()
    }
}

/// One-body `Σ e_p (n_p + n_p̄)` plus like-charge pair scattering
/// `Σ_{p,p'} V_q a†_p a†_p̄ a_p̄' a_p'`, diagonal `p = p'` included.
///
/// The two time-conjugate orderings of each pair creation operator are equal,
/// so the half-weighted sum over both orderings collapses to a single term
/// per ordered level pair.
pub fn build_hamiltonian(scheme: &LevelScheme) -> Result<PairingHamiltonian> {
    let n = scheme.n_qubits();
    let mut op = FermionOperator::new(n);
    for l in &scheme.levels {
        let (a, abar) = scheme.qubits_of(l.index);
        for m in [a, abar] {
            op.push(FermionTerm::new(
                vec![LadderOp::create(m), LadderOp::annihilate(m)],
                C64::new(l.e_mev, 0.0),
            ))?;
        }
    }
    for q in Charge::ALL {
        let v = pairing_matrix_element(scheme, q).unwrap_or(0.0);
        if v == 0.0 {
            continue;
        }
        let lv: Vec<&Level> = scheme.levels.iter().filter(|l| l.charge == q).collect();
        for p in &lv {
            for r in &lv {
                let (a, abar) = scheme.qubits_of(p.index);
                let (b, bbar) = scheme.qubits_of(r.index);
                op.push(FermionTerm::new(
                    vec![
                        LadderOp::create(a),
                        LadderOp::create(abar),
                        LadderOp::annihilate(bbar),
                        LadderOp::annihilate(b),
                    ],
                    C64::new(v, 0.0),
                ))?;
            }
        }
    }

    let raw = jw_map(&op)?;
    let residue = raw.max_imag();
    if residue > HERMITIAN_TOL {
        return Err(Error::NotHermitian(residue));
    }
    let real_terms = raw
        .terms()
        .iter()
        .map(|t| t.with_coeff(C64::new(t.coeff().re, 0.0)))
        .collect::<Vec<PauliTerm>>();
    let qubit = PauliSum::from_terms(n, real_terms)?;

    Ok(PairingHamiltonian {
        fermionic: op,
        qubit,
        hf_energy: scheme.reference_energy(),
        scheme: scheme.clone(),
    })
}

/// `E - Σ_occ e_i`, the sum running over both members of each occupied pair.
pub fn correlation_energy(energy: f64, scheme: &LevelScheme) -> f64 {
    energy - scheme.reference_energy()
}

/// Hamiltonian restricted to [`LevelScheme::pair_sector`], built from the
/// qubit operator's action on basis states.
pub fn sector_matrix(h: &PairingHamiltonian) -> Result<(Vec<usize>, DMatrix<f64>)> {
    let basis = h.scheme.pair_sector();
    if basis.is_empty() {
        return Err(Error::EmptySector("no pair configurations".into()));
    }
    let pos: HashMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let dim = basis.len();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut imag = 0.0f64;
    for (col, &b) in basis.iter().enumerate() {
        let mut column: HashMap<usize, C64> = HashMap::new();
        for t in h.qubit.terms() {
            let (phase, target) = t.action_on_basis(b);
            *column.entry(target).or_insert(C64::new(0.0, 0.0)) += t.coeff() * phase;
        }
        for (target, v) in column {
            if let Some(&row) = pos.get(&target) {
                m[(row, col)] = v.re;
                imag = imag.max(v.im.abs());
            }
        }
    }
    if imag > 1e-10 {
        return Err(Error::NotHermitian(imag));
    }
    Ok((basis, m))
}

/// Lowest eigenvalue in the seniority-zero sector reachable from the
/// reference by pair excitations (MeV).
pub fn exact_ground(h: &PairingHamiltonian) -> Result<f64> {
    let (_, m) = sector_matrix(h)?;
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}
