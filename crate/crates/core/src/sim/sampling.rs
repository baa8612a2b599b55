use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{transpile, Circuit, Gate};
use crate::model::{Charge, LevelScheme};
use crate::pauli::{group_qwc, Pauli, PauliSum};
use crate::sim::statevector::{run_statevector, StateVector};
use crate::{Error, Result};

/// Measurement outcomes; keys are basis indices (bit `u` = qubit `u`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShotResult {
    pub n_qubits: usize,
    pub counts: BTreeMap<u64, u64>,
    pub shots: u64,
}

impl ShotResult {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, counts: BTreeMap::new(), shots: 0 }
    }

    pub fn record(&mut self, outcome: u64) {
        *self.counts.entry(outcome).or_insert(0) += 1;
        self.shots += 1;
    }

    pub fn merge(&mut self, other: &ShotResult) {
        for (&k, &v) in &other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.shots += other.shots;
    }

    pub fn probability(&self, outcome: u64) -> f64 {
        self.counts.get(&outcome).copied().unwrap_or(0) as f64 / self.shots.max(1) as f64
    }

    /// Fraction of shots reading qubit `q` as 1.
    pub fn marginal_one(&self, q: usize) -> f64 {
        let ones: u64 = self
            .counts
            .iter()
            .filter(|(k, _)| *k >> q & 1 == 1)
            .map(|(_, v)| v)
            .sum();
        ones as f64 / self.shots.max(1) as f64
    }

    /// `bitstring,count` with qubit 0 leftmost.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bitstring,count\n");
        for (&k, &v) in &self.counts {
            let _ = writeln!(s, "{},{v}", bitstring(k, self.n_qubits));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

pub fn bitstring(outcome: u64, n: usize) -> String {
    (0..n)
        .map(|q| if outcome >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Total-variation distance between two empirical or exact distributions.
pub fn total_variation(p: &BTreeMap<u64, f64>, q: &BTreeMap<u64, f64>) -> f64 {
    let mut keys: Vec<&u64> = p.keys().chain(q.keys()).collect();
    keys.sort_unstable();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// One QWC group: its basis change and members as (support mask, weight).
#[derive(Debug, Clone)]
pub struct GroupPlan {
    pub basis: Vec<Pauli>,
    pub rotation: Circuit,
    pub native_rotation: Circuit,
    pub terms: Vec<(u64, f64)>,
    pub all_z: bool,
}

impl GroupPlan {
    /// Weighted eigenvalue sum for one outcome in the rotated basis.
    pub fn value(&self, outcome: u64) -> f64 {
        self.terms
            .iter()
            .map(|&(s, w)| if (outcome & s).count_ones() & 1 == 1 { -w } else { w })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    pub n_qubits: usize,
    pub constant: f64,
    pub groups: Vec<GroupPlan>,
}

impl MeasurementPlan {
    pub fn new(h: &PauliSum) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian(h.max_imag()));
        }
        let n = h.n_qubits();
        let mut groups = Vec::new();
        for g in group_qwc(h) {
            let mut rot = Circuit::new(n);
            for (q, p) in g.basis.iter().enumerate() {
                match p {
                    Pauli::X => rot.push(Gate::H(q))?,
                    Pauli::Y => {
                        rot.push(Gate::Sdg(q))?;
                        rot.push(Gate::H(q))?;
                    }
                    _ => {}
                }
            }
            let terms = g
                .members
                .iter()
                .map(|&i| {
                    let t = &h.terms()[i];
                    (t.support(), t.coeff().re)
                })
                .collect();
            groups.push(GroupPlan {
                all_z: g.basis.iter().all(|p| matches!(p, Pauli::Z | Pauli::I)),
                native_rotation: transpile(&rot)?,
                rotation: rot,
                basis: g.basis,
                terms,
            });
        }
        Ok(Self { n_qubits: n, constant: h.constant().re, groups })
    }
}

/// Pair-structure and per-charge pair-count check on Z-basis outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryFilter {
    pair_masks: Vec<u64>,
    charges: Vec<(u64, u32)>,
}

impl SymmetryFilter {
    pub fn from_scheme(s: &LevelScheme) -> Self {
        let pair_masks = s.levels.iter().map(|l| 0b11u64 << (2 * (l.index - 1))).collect();
        let charges = Charge::ALL
            .iter()
            .map(|&q| (s.charge_mask(q), s.nucleons(q) as u32))
            .collect();
        Self { pair_masks, charges }
    }

    pub fn accepts(&self, b: u64) -> bool {
        self.pair_masks
            .iter()
            .all(|&m| (b & m) == 0 || (b & m) == m)
            && self.charges.iter().all(|&(m, n)| (b & m).count_ones() == n)
    }
}

#[derive(Debug, Clone, Default)]
pub struct EstimatorOptions {
    /// Discard Z-basis outcomes outside the reference symmetry sector.
    pub filter: Option<SymmetryFilter>,
    /// Minimum retained fraction per filtered group before the estimate is
    /// rejected.
    pub min_keep_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub shots: usize,
    /// Smallest retained fraction over filtered groups (1 without a filter).
    pub kept_fraction: f64,
}

/// Combine per-group outcome counts into an energy estimate.
pub fn estimate_from_counts(
    plan: &MeasurementPlan,
    counts: &[ShotResult],
    opts: &EstimatorOptions,
) -> Result<Estimate> {
    if counts.len() != plan.groups.len() {
        return Err(Error::LengthMismatch { expected: plan.groups.len(), got: counts.len() });
    }
    let mut mean = plan.constant;
    let mut var = 0.0;
    let mut kept_fraction = 1.0f64;
    let mut shots = 0usize;
    for (g, res) in plan.groups.iter().zip(counts) {
        shots = shots.max(res.shots as usize);
        let filter = opts.filter.as_ref().filter(|_| g.all_z);
        let (mut n, mut s1, mut s2) = (0u64, 0.0, 0.0);
        for (&b, &w) in &res.counts {
            if filter.is_some_and(|f| !f.accepts(b)) {
                continue;
            }
            let v = g.value(b);
            n += w;
            s1 += w as f64 * v;
            s2 += w as f64 * v * v;
        }
        if filter.is_some() {
            let frac = n as f64 / res.shots.max(1) as f64;
            kept_fraction = kept_fraction.min(frac);
            if n == 0 || frac < opts.min_keep_fraction {
                return Err(Error::PostSelection { kept: n as usize, shots: res.shots as usize });
            }
        }
        if n == 0 {
            return Err(Error::PostSelection { kept: 0, shots: res.shots as usize });
        }
        let m = s1 / n as f64;
        mean += m;
        if n > 1 {
            let v = ((s2 - n as f64 * m * m) / (n - 1) as f64).max(0.0);
            var += v / n as f64;
        }
    }
    Ok(Estimate { mean, stderr: var.sqrt(), shots, kept_fraction })
}

/// Cumulative distribution over basis states for inverse-CDF sampling.
pub(crate) struct Cdf(Vec<f64>);

impl Cdf {
    pub(crate) fn new(sv: &StateVector) -> Self {
        let mut acc = 0.0;
        Self(
            sv.amps()
                .iter()
                .map(|a| {
                    acc += a.norm_sqr();
                    acc
                })
                .collect(),
        )
    }

    pub(crate) fn sample(&self, rng: &mut impl Rng) -> u64 {
        let total = *self.0.last().unwrap_or(&1.0);
        let u = rng.gen::<f64>() * total;
        self.0.partition_point(|&c| c <= u).min(self.0.len() - 1) as u64
    }
}

/// Noise-free sampling of every group from the exact output distribution.
pub fn sample_groups(c: &Circuit, plan: &MeasurementPlan, shots: usize, seed: u64) -> Result<Vec<ShotResult>> {
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let sv = run_statevector(c)?;
    let mut out = Vec::with_capacity(plan.groups.len());
    for (gi, g) in plan.groups.iter().enumerate() {
        let mut rotated = sv.clone();
        rotated.run(&g.rotation)?;
        let cdf = Cdf::new(&rotated);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(gi as u64);
        let mut res = ShotResult::new(c.n_qubits());
        for _ in 0..shots {
            res.record(cdf.sample(&mut rng));
        }
        out.push(res);
    }
    Ok(out)
}

/// Shot-based estimate of `⟨h⟩` with per-group basis rotations.
pub fn sampled_expectation(
    c: &Circuit,
    plan: &MeasurementPlan,
    shots: usize,
    seed: u64,
) -> Result<Estimate> {
    let counts = sample_groups(c, plan, shots, seed)?;
    estimate_from_counts(plan, &counts, &EstimatorOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliTerm;
    use crate::C64;

    #[test]
    fn eigenstate_has_zero_variance() {
        let h = PauliSum::from_terms(
            2,
            vec![
                PauliTerm::from_label("ZI", C64::new(0.7, 0.0)).unwrap(),
                PauliTerm::from_label("ZZ", C64::new(-0.2, 0.0)).unwrap(),
                PauliTerm::from_label("II", C64::new(1.5, 0.0)).unwrap(),
            ],
        )
        .unwrap();
        let plan = MeasurementPlan::new(&h).unwrap();
        assert_eq!(plan.groups.len(), 1);
        let e = sampled_expectation(&Circuit::new(2), &plan, 100, 3).unwrap();
        assert!((e.mean - 2.0).abs() < 1e-12);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn bitstring_order_and_csv() {
        assert_eq!(bitstring(0b001, 3), "100");
        let mut r = ShotResult::new(2);
        r.record(2);
        r.record(2);
        assert_eq!(r.to_csv(), "bitstring,count\n01,2\n");
    }

    #[test]
    fn filter_rejects_broken_pairs() {
        let s = LevelScheme::bundled_he6();
        let f = SymmetryFilter::from_scheme(&s);
        assert!(f.accepts(s.reference_basis() as u64));
        assert!(!f.accepts(s.reference_basis() as u64 ^ 1));
        // move the proton pair 1 -> 3: still in the sector
        assert!(f.accepts((s.reference_basis() as u64 ^ 0b11) | 0b11_0000));
        // move a proton pair onto a neutron level: wrong charge counts
        assert!(!f.accepts((s.reference_basis() as u64 ^ 0b11) | 0b1100_0000_0000));
    }

    #[test]
    fn total_variation_basic() {
        let p: BTreeMap<u64, f64> = [(0, 0.5), (1, 0.5)].into();
        let q: BTreeMap<u64, f64> = [(0, 1.0)].into();
        assert!((total_variation(&p, &q) - 0.5).abs() < 1e-15);
    }
}
