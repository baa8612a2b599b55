//! Weighted Pauli strings in symplectic (x, z) bit-mask form.
//!
//! Qubit `u` carries `X` when only bit `u` of the x mask is set, `Z` when only
//! the z bit is set, and `Y` when both are. Operators therefore satisfy
//! `P = i^{|x & z|} X^x Z^z`, and a basis state `|b>` (qubit `u` = bit `u` of
//! the index) is mapped to `i^{|x & z|} (-1)^{|b & z|} |b ^ x>`.
//!
//! Text form puts qubit 0 leftmost: `(-0.0667) * IIXXYYIIIIII`.

use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result, C64};

/// Coefficients with a smaller modulus are dropped on canonicalisation (MeV).
pub const MERGE_EPS: f64 = 1e-12;

/// Hermiticity tolerance on imaginary parts.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
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

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `i^k` for `k` taken mod 4.
pub(crate) fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// A Pauli string on `n_qubits` qubits with a complex weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    n_qubits: usize,
    x: u64,
    z: u64,
    coeff: C64,
}

impl PauliTerm {
    pub fn new(n_qubits: usize, x: u64, z: u64, coeff: C64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidTerm(format!("unsupported qubit count {n_qubits}")));
        }
        let mask = full_mask(n_qubits);
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::InvalidTerm(format!(
                "mask bits beyond qubit {}",
                n_qubits - 1
            )));
        }
        if !(coeff.re.is_finite() && coeff.im.is_finite()) {
            return Err(Error::InvalidTerm(format!("non-finite coefficient {coeff}")));
        }
        Ok(Self { n_qubits, x, z, coeff })
    }

    pub fn identity(n_qubits: usize, coeff: C64) -> Result<Self> {
        Self::new(n_qubits, 0, 0, coeff)
    }

    /// Single-qubit Pauli `p` on qubit `q`.
    pub fn single(n_qubits: usize, q: usize, p: Pauli, coeff: C64) -> Result<Self> {
        if q >= n_qubits {
            return Err(Error::OutOfRange { index: q, n: n_qubits });
        }
        let (xb, zb) = p.bits();
        Self::new(n_qubits, (xb as u64) << q, (zb as u64) << q, coeff)
    }

    /// Parses a letter string with qubit 0 leftmost, e.g. `"XIZY"`.
    pub fn from_label(label: &str, coeff: C64) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        let mut n = 0;
        for (q, c) in label.chars().enumerate() {
            let p = Pauli::from_letter(c)
                .ok_or_else(|| Error::InvalidTerm(format!("bad letter {c:?} in {label:?}")))?;
            let (xb, zb) = p.bits();
            if q >= MAX_QUBITS {
                return Err(Error::InvalidTerm(format!("label longer than {MAX_QUBITS}")));
            }
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
            n = q + 1;
        }
        Self::new(n, x, z, coeff)
    }

    /// Builds a term from explicit `(qubit, letter)` pairs; repeated qubits multiply.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)], coeff: C64) -> Result<Self> {
        let mut t = Self::identity(n_qubits, coeff)?;
        for &(q, p) in ops {
            t = t.mul(&Self::single(n_qubits, q, p, C64::new(1.0, 0.0))?)?;
        }
        Ok(t)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn coeff(&self) -> C64 {
        self.coeff
    }

    pub fn with_coeff(mut self, coeff: C64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.coeff *= s;
        self
    }

    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn label(&self) -> String {
        (0..self.n_qubits).map(|q| self.letter(q).letter()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut t = *self;
        t.coeff = t.coeff.conj();
        t
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(())
    }

    /// Operator product `self * other`, phase folded into the coefficient.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let (ax, ay, az) = (x1 & !z1, x1 & z1, !x1 & z1);
        let (bx, by, bz) = (x2 & !z2, x2 & z2, !x2 & z2);
        // cyclic X->Y->Z gives +i, anti-cyclic gives -i
        let plus = ((ax & by) | (ay & bz) | (az & bx)).count_ones();
        let minus = ((ay & bx) | (az & by) | (ax & bz)).count_ones();
        let phase = i_pow((plus + 4 * 64 - minus) % 4);
        Ok(Self {
            n_qubits: self.n_qubits,
            x: x1 ^ x2,
            z: z1 ^ z2,
            coeff: self.coeff * other.coeff * phase,
        })
    }

    /// Global commutation of the underlying strings.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_same(other)?;
        let s = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(s % 2 == 0)
    }

    /// True iff on every qubit the letters agree or one of them is the identity.
    pub fn qwc_commutes(&self, other: &Self) -> Result<bool> {
        self.check_same(other)?;
        let both = self.support() & other.support();
        Ok((self.x ^ other.x) & both == 0 && (self.z ^ other.z) & both == 0)
    }

    /// Phase and target index of `P|b>` (coefficient excluded).
    #[inline]
    pub fn action_on_basis(&self, b: usize) -> (C64, usize) {
        let y = (self.x & self.z).count_ones();
        let sign = (b as u64 & self.z).count_ones();
        (i_pow(y + 2 * sign), b ^ self.x as usize)
    }

    /// Accumulates `coeff * P |psi>` into `out`.
    pub fn apply_add(&self, psi: &[C64], out: &mut [C64]) {
        let y = (self.x & self.z).count_ones();
        let base = self.coeff * i_pow(y);
        let x = self.x as usize;
        let z = self.z as usize;
        for (b, a) in psi.iter().enumerate() {
            let v = if (b & z).count_ones() % 2 == 1 { -*a } else { *a };
            out[b ^ x] += base * v;
        }
    }

    /// `<psi| P |psi>` for the bare string (coefficient excluded).
    pub fn string_expectation(&self, psi: &[C64]) -> C64 {
        let y = (self.x & self.z).count_ones();
        let x = self.x as usize;
        let z = self.z as usize;
        let mut acc = C64::new(0.0, 0.0);
        for (b, a) in psi.iter().enumerate() {
            let v = if (b & z).count_ones() % 2 == 1 { -*a } else { *a };
            acc += psi[b ^ x].conj() * v;
        }
        acc * i_pow(y)
    }
}

fn fmt_coeff(c: C64) -> String {
    if c.im.abs() <= HERMITIAN_TOL {
        format!("{:.4}", c.re)
    } else if c.re.abs() <= HERMITIAN_TOL {
        format!("{:.4}i", c.im)
    } else {
        format!("{:.4}{:+.4}i", c.re, c.im)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) * {}", fmt_coeff(self.coeff), self.label())
    }
}

/// Sum of Pauli terms on a common register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        for t in &terms {
            if t.n_qubits != n_qubits {
                return Err(Error::QubitMismatch(n_qubits, t.n_qubits));
            }
        }
        Ok(Self { n_qubits, terms }.canonicalize())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, t: PauliTerm) -> Result<()> {
        if t.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, t.n_qubits));
        }
        self.terms.push(t);
        Ok(())
    }

    /// Merges duplicate strings, drops |coeff| < [`MERGE_EPS`], sorts by (x, z).
    pub fn canonicalize(self) -> Self {
        let mut acc: HashMap<(u64, u64), C64> = HashMap::with_capacity(self.terms.len());
        for t in &self.terms {
            *acc.entry((t.x, t.z)).or_insert(C64::new(0.0, 0.0)) += t.coeff;
        }
        let mut terms: Vec<PauliTerm> = acc
            .into_iter()
            .filter(|(_, c)| c.norm() >= MERGE_EPS)
            .map(|((x, z), coeff)| PauliTerm { n_qubits: self.n_qubits, x, z, coeff })
            .collect();
        terms.sort_by_key(|t| (t.x, t.z));
        Self { n_qubits: self.n_qubits, terms }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(Self { n_qubits: self.n_qubits, terms }.canonicalize())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|t| t.scaled(s)).collect(),
        }
        .canonicalize()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b)?);
            }
        }
        Ok(Self { n_qubits: self.n_qubits, terms }.canonicalize())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(PauliTerm::adjoint).collect(),
        }
    }

    /// Largest |Im coeff| over all terms.
    pub fn max_imag(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.max_imag() <= HERMITIAN_TOL
    }

    /// Largest coefficient modulus of `self - other`, after canonicalisation.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let diff = self.add(&other.scale(C64::new(-1.0, 0.0)))?;
        Ok(diff.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max))
    }

    /// Coefficient of the identity string.
    pub fn constant(&self) -> C64 {
        self.terms
            .iter()
            .filter(|t| t.is_identity())
            .map(|t| t.coeff)
            .sum()
    }

    /// `H |psi>` as a dense vector.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for t in &self.terms {
            t.apply_add(psi, &mut out);
        }
        out
    }

    /// `<psi| H |psi>`.
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.string_expectation(psi))
            .sum()
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// A set of terms measurable in one common product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QwcGroup {
    /// Indices into the grouped sum's term list.
    pub members: Vec<usize>,
    /// Per-qubit measurement letter; `I` where no member acts.
    pub basis: Vec<Pauli>,
}

impl QwcGroup {
    pub fn basis_label(&self) -> String {
        self.basis.iter().map(|p| p.letter()).collect()
    }
}

/// Greedy first-fit colouring of the non-identity terms in descending |coeff|
/// order (ties broken by term index). Identity terms are left out; they enter
/// expectation values as an additive constant.
pub fn group_qwc(h: &PauliSum) -> Vec<QwcGroup> {
    let mut order: Vec<usize> = (0..h.terms.len())
        .filter(|&i| !h.terms[i].is_identity())
        .collect();
    order.sort_by(|&a, &b| {
        h.terms[b]
            .coeff
            .norm()
            .partial_cmp(&h.terms[a].coeff.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    // Each group is tracked by its merged (x, z) basis masks.
    let mut groups: Vec<(u64, u64, Vec<usize>)> = Vec::new();
    for idx in order {
        let t = &h.terms[idx];
        let slot = groups.iter_mut().find(|(gx, gz, _)| {
            let both = (gx | gz) & t.support();
            (gx ^ t.x) & both == 0 && (gz ^ t.z) & both == 0
        });
        match slot {
            Some((gx, gz, members)) => {
                *gx |= t.x;
                *gz |= t.z;
                members.push(idx);
            }
            None => groups.push((t.x, t.z, vec![idx])),
        }
    }

    groups
        .into_iter()
        .map(|(gx, gz, mut members)| {
            members.sort_unstable();
            QwcGroup {
                members,
                basis: (0..h.n_qubits)
                    .map(|q| Pauli::from_bits(gx >> q & 1 == 1, gz >> q & 1 == 1))
                    .collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn term(label: &str) -> PauliTerm {
        PauliTerm::from_label(label, c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn x_times_y_is_i_z() {
        let r = term("X").mul(&term("Y")).unwrap();
        assert_eq!(r.label(), "Z");
        assert_eq!(r.coeff(), c(0.0, 1.0));
    }

    #[test]
    fn z_squared_is_identity() {
        let r = term("Z").mul(&term("Z")).unwrap();
        assert!(r.is_identity());
        assert_eq!(r.coeff(), c(1.0, 0.0));
    }

    #[test]
    fn two_qubit_product_phase() {
        // (X⊗Z)(Z⊗X) = (XZ)⊗(ZX) = (-iY)⊗(iY) = Y⊗Y
        let r = term("XZ").mul(&term("ZX")).unwrap();
        assert_eq!(r.label(), "YY");
        assert!((r.coeff() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mismatched_qubits_rejected() {
        assert!(matches!(
            term("X").mul(&term("XX")),
            Err(Error::QubitMismatch(1, 2))
        ));
        assert!(term("X").qwc_commutes(&term("XX")).is_err());
    }

    #[test]
    fn qwc_examples() {
        assert!(term("XI").qwc_commutes(&term("XZ")).unwrap());
        assert!(!term("XI").qwc_commutes(&term("ZI")).unwrap());
        assert!(!term("XX").qwc_commutes(&term("YY")).unwrap());
        assert!(term("XX").commutes(&term("YY")).unwrap());
    }

    #[test]
    fn grouping_all_z_is_one_group() {
        let h = PauliSum::from_terms(2, vec![term("ZI"), term("IZ"), term("ZZ")]).unwrap();
        let g = group_qwc(&h);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].basis_label(), "ZZ");
        assert_eq!(g[0].members.len(), 3);
    }

    #[test]
    fn grouping_x_and_z_split() {
        let h = PauliSum::from_terms(1, vec![term("X"), term("Z")]).unwrap();
        assert_eq!(group_qwc(&h).len(), 2);
    }

    #[test]
    fn identity_left_out_of_groups() {
        let h = PauliSum::from_terms(
            2,
            vec![term("II").scaled(c(3.0, 0.0)), term("ZI"), term("IX")],
        )
        .unwrap();
        let g = group_qwc(&h);
        let n: usize = g.iter().map(|g| g.members.len()).sum();
        assert_eq!(n, 2);
        assert_eq!(h.constant(), c(3.0, 0.0));
    }

    #[test]
    fn canonicalize_merges_and_drops() {
        let s = PauliSum::from_terms(
            2,
            vec![
                term("XZ"),
                term("XZ").scaled(c(-1.0, 0.0)),
                term("ZZ").scaled(c(0.5, 0.0)),
                term("ZZ").scaled(c(0.25, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.terms()[0].label(), "ZZ");
        assert!((s.terms()[0].coeff().re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn text_form() {
        let t = PauliTerm::from_label("IIXXYY", c(-1.0 / 15.0, 0.0)).unwrap();
        assert_eq!(t.to_string(), "(-0.0667) * IIXXYY");
    }

    #[test]
    fn sparse_builder_orders_products() {
        let t = PauliTerm::from_sparse(3, &[(0, Pauli::X), (2, Pauli::Z), (0, Pauli::Y)], c(1.0, 0.0))
            .unwrap();
        // X*Y = iZ on qubit 0
        assert_eq!(t.label(), "ZIZ");
        assert_eq!(t.coeff(), c(0.0, 1.0));
    }

    #[test]
    fn z_expectation_on_zero_state() {
        let mut psi = vec![c(0.0, 0.0); 2];
        psi[0] = c(1.0, 0.0);
        let z = term("Z");
        assert_eq!(z.string_expectation(&psi), c(1.0, 0.0));
    }
}
