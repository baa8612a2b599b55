//! Fermionic ladder operators and their Jordan-Wigner images.
//!
//! Mode `j` lives on qubit `j`; occupation `|1>` means the mode is filled.
//! `a†_j = ½ (⊗_{u<j} Z_u) ⊗ (X_j − iY_j)` and
//! `a_j  = ½ (⊗_{u<j} Z_u) ⊗ (X_j + iY_j)`.

use crate::pauli::{Pauli, PauliSum, PauliTerm};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Create,
    Annihilate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LadderOp {
    pub mode: usize,
    pub kind: Ladder,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        Self { mode, kind: Ladder::Create }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, kind: Ladder::Annihilate }
    }

    pub fn adjoint(self) -> Self {
        let kind = match self.kind {
            Ladder::Create => Ladder::Annihilate,
            Ladder::Annihilate => Ladder::Create,
        };
        Self { mode: self.mode, kind }
    }
}

/// Ordered product of ladder operators times a coefficient (MeV inside a Hamiltonian).
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub ops: Vec<LadderOp>,
    pub coeff: C64,
}

impl FermionTerm {
    pub fn new(ops: Vec<LadderOp>, coeff: C64) -> Self {
        Self { ops, coeff }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            ops: self.ops.iter().rev().map(|o| o.adjoint()).collect(),
            coeff: self.coeff.conj(),
        }
    }
}

/// Sum of fermionic terms over `n_modes` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionOperator {
    n_modes: usize,
    terms: Vec<FermionTerm>,
}

impl FermionOperator {
    pub fn new(n_modes: usize) -> Self {
        Self { n_modes, terms: Vec::new() }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> &[FermionTerm] {
        &self.terms
    }

    pub fn push(&mut self, term: FermionTerm) -> Result<()> {
        if let Some(op) = term.ops.iter().find(|o| o.mode >= self.n_modes) {
            return Err(Error::OutOfRange { index: op.mode, n: self.n_modes });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_modes: self.n_modes,
            terms: self.terms.iter().map(FermionTerm::adjoint).collect(),
        }
    }
}

/// Jordan-Wigner image of a single ladder operator (two Pauli terms).
pub fn jw_ladder(mode: usize, kind: Ladder, n_qubits: usize) -> Result<PauliSum> {
    if mode >= n_qubits {
        return Err(Error::OutOfRange { index: mode, n: n_qubits });
    }
    let chain: u64 = (1u64 << mode) - 1;
    let bit = 1u64 << mode;
    let y_sign = match kind {
        Ladder::Create => -0.5,
        Ladder::Annihilate => 0.5,
    };
    let x_term = PauliTerm::new(n_qubits, bit, chain, C64::new(0.5, 0.0))?;
    let y_term = PauliTerm::new(n_qubits, bit, chain | bit, C64::new(0.0, y_sign))?;
    PauliSum::from_terms(n_qubits, vec![x_term, y_term])
}

/// Jordan-Wigner image of a fermionic operator: product of ladder images per
/// term, summed and canonicalised.
pub fn jw_map(op: &FermionOperator) -> Result<PauliSum> {
    let n = op.n_modes;
    let one = PauliSum::from_terms(n, vec![PauliTerm::identity(n, C64::new(1.0, 0.0))?])?;
    let mut total = PauliSum::zero(n);
    for term in &op.terms {
        let mut prod = one.scale(term.coeff);
        for l in &term.ops {
            prod = prod.mul(&jw_ladder(l.mode, l.kind, n)?)?;
        }
        total = total.add(&prod)?;
    }
    Ok(total)
}

/// Letters on (j, j̄, i, ī) and sign of the eight strings in the closed form of
/// `τ = a†_j a†_j̄ a_ī a_i − h.c. = (i/8) Σ_l s_l P_l ⊗ Z-chains`.
pub const PAIR_EXCITATION_STRINGS: [(f64, [Pauli; 4]); 8] = {
    use Pauli::{X, Y};
    [
        (1.0, [X, X, X, Y]),
        (1.0, [X, X, Y, X]),
        (1.0, [Y, X, Y, Y]),
        (1.0, [X, Y, Y, Y]),
        (-1.0, [X, Y, X, X]),
        (-1.0, [Y, X, X, X]),
        (-1.0, [Y, Y, X, Y]),
        (-1.0, [Y, Y, Y, X]),
    ]
};

fn between(a: usize, b: usize) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if hi - lo < 2 {
        0
    } else {
        ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1)
    }
}

/// The eight Pauli strings of a pair excitation with their real signs.
///
/// Strings carry Z on every qubit strictly between `i` and `ī` and strictly
/// between `j` and `j̄`. The table signs hold for `i < ī`, `j < j̄` and
/// non-interleaved pairs; each reversed pair and an interleaving each flip
/// the overall sign.
pub fn pair_excitation_strings(
    i: usize,
    i_bar: usize,
    j: usize,
    j_bar: usize,
    n_qubits: usize,
) -> Result<Vec<(f64, PauliTerm)>> {
    let modes = [j, j_bar, i, i_bar];
    for (a, &m) in modes.iter().enumerate() {
        if m >= n_qubits {
            return Err(Error::OutOfRange { index: m, n: n_qubits });
        }
        if modes[..a].contains(&m) {
            return Err(Error::DuplicateMode(m));
        }
    }
    let (ilo, ihi) = (i.min(i_bar), i.max(i_bar));
    let (jlo, jhi) = (j.min(j_bar), j.max(j_bar));
    let interleaved = (ilo < jlo && jlo < ihi && ihi < jhi) || (jlo < ilo && ilo < jhi && jhi < ihi);
    let mut sign = 1.0;
    if i > i_bar {
        sign = -sign;
    }
    if j > j_bar {
        sign = -sign;
    }
    if interleaved {
        sign = -sign;
    }
    let chain = between(i, i_bar) ^ between(j, j_bar);

    PAIR_EXCITATION_STRINGS
        .iter()
        .map(|(s, letters)| {
            let mut x = 0u64;
            let mut z = 0u64;
            for (&q, &p) in modes.iter().zip(letters.iter()) {
                let (xb, zb) = p.bits();
                x |= (xb as u64) << q;
                z |= (zb as u64) << q;
            }
            let t = PauliTerm::new(n_qubits, x, z, C64::new(1.0, 0.0))?;
            let zs = PauliTerm::new(n_qubits, 0, chain, C64::new(1.0, 0.0))?;
            let prod = t.mul(&zs)?;
            // interleaved pairs put chain Zs on endpoints; keep the resulting phase
            let phase = prod.coeff();
            Ok((s * sign, prod.with_coeff(C64::new(1.0, 0.0)).scaled(phase)))
        })
        .collect()
}

/// Closed-form Jordan-Wigner image of `θ (a†_j a†_j̄ a_ī a_i − a†_i a†_ī a_j̄ a_j)`.
pub fn map_pair_excitation(
    i: usize,
    i_bar: usize,
    j: usize,
    j_bar: usize,
    theta: f64,
    n_qubits: usize,
) -> Result<PauliSum> {
    let strings = pair_excitation_strings(i, i_bar, j, j_bar, n_qubits)?;
    let terms = strings
        .into_iter()
        .map(|(s, t)| t.scaled(C64::new(0.0, s * theta / 8.0)))
        .collect();
    PauliSum::from_terms(n_qubits, terms)
}

/// `a†_j a†_j̄ a_ī a_i − h.c.` as a fermionic operator, for the generic JW path.
pub fn pair_excitation_operator(
    i: usize,
    i_bar: usize,
    j: usize,
    j_bar: usize,
    n_modes: usize,
) -> Result<FermionOperator> {
    let t = FermionTerm::new(
        vec![
            LadderOp::create(j),
            LadderOp::create(j_bar),
            LadderOp::annihilate(i_bar),
            LadderOp::annihilate(i),
        ],
        C64::new(1.0, 0.0),
    );
    let mut op = FermionOperator::new(n_modes);
    let h = t.adjoint();
    op.push(t)?;
    op.push(FermionTerm::new(h.ops, -h.coeff))?;
    Ok(op)
}
