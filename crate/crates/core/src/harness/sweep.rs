use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_upccd, AnsatzSpec};
use crate::harness::config::SweepConfig;
use crate::model::{build_hamiltonian, correlation_energy, LevelScheme, PairingHamiltonian};
use crate::sim::{Backend, EnergyEstimator, EstimatorOptions, NoiseSpec, SymmetryFilter};
use crate::vqe::{mix_seed, run_vqe, RunRecord, SpsaConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub t_ms: f64,
    pub eps: f64,
    /// `None` when the cell failed to gather its successful runs.
    pub mean_e_corr_mev: Option<f64>,
    pub std_mev: Option<f64>,
    pub n_success: usize,
    pub discrepancy_pct: Option<f64>,
}

impl HeatmapCell {
    pub fn failed(&self) -> bool {
        self.mean_e_corr_mev.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct CellRun {
    pub cell: usize,
    pub slot: usize,
    pub attempt: usize,
    pub record: RunRecord,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub reference_e_corr_mev: f64,
    pub cells: Vec<HeatmapCell>,
    pub runs: Vec<CellRun>,
}

pub fn estimator_options(scheme: &LevelScheme, filter: bool, min_keep_fraction: f64) -> EstimatorOptions {
    EstimatorOptions {
        filter: filter.then(|| SymmetryFilter::from_scheme(scheme)),
        min_keep_fraction,
    }
}

/// Indices of the `k` values closest to `reference` (ties by position).
pub fn select_closest(values: &[f64], reference: f64, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        (values[a] - reference)
            .abs()
            .total_cmp(&(values[b] - reference).abs())
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, v.sqrt())
}

pub fn discrepancy_pct(mean: f64, reference: f64) -> f64 {
    (mean - reference).abs() / reference.abs() * 100.0
}

/// Statevector VQE `Ē_corr`, retrying seeds until a run succeeds.
pub fn statevector_reference(h: &PairingHamiltonian, ansatz: &AnsatzSpec, cfg: &SpsaConfig) -> Result<RunRecord> {
    let est = EnergyEstimator::statevector(&h.qubit)?;
    let mut last = None;
    for attempt in 0..10u64 {
        let c = SpsaConfig { seed: mix_seed(cfg.seed, attempt), ..*cfg };
        let r = run_vqe(h, ansatz, &est, &c)?;
        if r.succeeded() {
            return Ok(r);
        }
        last = Some(r);
    }
    Err(Error::Config(format!(
        "statevector reference did not converge: {:?}",
        last.map(|r| r.verdict)
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ReferenceCache {
    scheme: LevelScheme,
    master_seed: u64,
    max_iter: usize,
    e_corr_mev: f64,
}

/// Reference `Ē_corr`, read from `dir/reference.json` when it matches the
/// dataset and seed, otherwise computed and written there.
pub fn cached_reference(dir: &Path, scheme: &LevelScheme, cfg: &SweepConfig) -> Result<f64> {
    let path = dir.join("reference.json");
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(c) = serde_json::from_str::<ReferenceCache>(&text) {
            if &c.scheme == scheme && c.master_seed == cfg.master_seed && c.max_iter == cfg.max_iter {
                return Ok(c.e_corr_mev);
            }
        }
    }
    let h = build_hamiltonian(scheme)?;
    let ansatz = AnsatzSpec::from_scheme(scheme)?;
    let spsa = SpsaConfig { seed: cfg.master_seed, max_iter: cfg.max_iter, ..SpsaConfig::default() };
    let r = statevector_reference(&h, &ansatz, &spsa)?;
    let e = r.e_corr_bar_mev.expect("successful run has a tail average");
    std::fs::create_dir_all(dir)?;
    let cache = ReferenceCache { scheme: scheme.clone(), master_seed: cfg.master_seed, max_iter: cfg.max_iter, e_corr_mev: e };
    std::fs::write(path, serde_json::to_string_pretty(&cache)?)?;
    Ok(e)
}

fn run_cell(
    h: &PairingHamiltonian,
    ansatz: &AnsatzSpec,
    scheme: &LevelScheme,
    cfg: &SweepConfig,
    cell: usize,
    spec: NoiseSpec,
    reference: f64,
) -> Result<(HeatmapCell, Vec<CellRun>)> {
    let opts = estimator_options(scheme, cfg.symmetry_filter, cfg.min_keep_fraction);
    let est = EnergyEstimator::new(&h.qubit, Backend::Noisy(spec), cfg.shots, opts)?;
    let mut runs = Vec::new();
    let mut values = Vec::new();
    'slots: for slot in 0..cfg.repeats {
        for attempt in 0..cfg.retry_cap {
            let seed = mix_seed(mix_seed(mix_seed(cfg.master_seed, cell as u64), slot as u64), attempt as u64);
            let spsa = SpsaConfig { seed, max_iter: cfg.max_iter, ..SpsaConfig::default() };
            let r = run_vqe(h, ansatz, &est, &spsa)?;
            let ok = r.succeeded();
            if ok {
                values.push(r.e_corr_bar_mev.unwrap());
            }
            runs.push(CellRun { cell, slot, attempt, record: r });
            if ok {
                continue 'slots;
            }
        }
        // this slot exhausted its attempts
        break;
    }
    let t_ms = spec.t1_ms;
    let eps = spec.err_2q;
    if values.len() < cfg.repeats {
        return Ok((
            HeatmapCell { t_ms, eps, mean_e_corr_mev: None, std_mev: None, n_success: values.len(), discrepancy_pct: None },
            runs,
        ));
    }
    let chosen: Vec<f64> = select_closest(&values, reference, cfg.select_best)
        .into_iter()
        .map(|i| values[i])
        .collect();
    let (m, s) = mean_std(&chosen);
    Ok((
        HeatmapCell {
            t_ms,
            eps,
            mean_e_corr_mev: Some(m),
            std_mev: Some(s),
            n_success: values.len(),
            discrepancy_pct: Some(discrepancy_pct(m, reference)),
        },
        runs,
    ))
}

/// Run every (T, ε) cell. Cells run in parallel; each run derives its seed
/// from the master seed and its (cell, slot, attempt) position.
pub fn sweep(scheme: &LevelScheme, cfg: &SweepConfig, reference: f64) -> Result<SweepResult> {
    cfg.validate()?;
    let h = build_hamiltonian(scheme)?;
    let ansatz = AnsatzSpec::from_scheme(scheme)?;
    let grid: Vec<NoiseSpec> = cfg
        .t_ms
        .iter()
        .flat_map(|&t| cfg.eps.iter().map(move |&e| NoiseSpec::johor(t, e)))
        .collect();
    let results: Vec<Result<(HeatmapCell, Vec<CellRun>)>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, spec)| run_cell(&h, &ansatz, scheme, cfg, i, *spec, reference))
        .collect();
    let mut cells = Vec::new();
    let mut runs = Vec::new();
    for r in results {
        let (c, rs) = r?;
        cells.push(c);
        runs.extend(rs);
    }
    Ok(SweepResult { reference_e_corr_mev: reference, cells, runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E0Result {
    pub backend: String,
    pub values_mev: Vec<f64>,
    pub mean_mev: f64,
    pub std_mev: f64,
    pub statevector_mev: f64,
}

/// `E_corr` of the unoptimised initial ansatz, evaluated `repeats` times.
pub fn e0_experiment(
    scheme: &LevelScheme,
    backend: Backend,
    repeats: usize,
    shots: usize,
    seed: u64,
    opts: EstimatorOptions,
) -> Result<E0Result> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let h = build_hamiltonian(scheme)?;
    let ansatz = AnsatzSpec::from_scheme(scheme)?;
    let circuit = build_upccd(&ansatz)?;
    let sv = EnergyEstimator::statevector(&h.qubit)?.evaluate(&circuit, 0)?.mean;
    let est = EnergyEstimator::new(&h.qubit, backend, shots, opts)?;
    let values_mev = match backend {
        Backend::Statevector => vec![correlation_energy(sv, scheme)],
        Backend::Noisy(_) => (0..repeats)
            .map(|r| est.evaluate(&circuit, mix_seed(seed, r as u64)).map(|e| correlation_energy(e.mean, scheme)))
            .collect::<Result<_>>()?,
    };
    let (mean_mev, std_mev) = mean_std(&values_mev);
    Ok(E0Result {
        backend: backend.label(),
        values_mev,
        mean_mev,
        std_mev,
        statevector_mev: correlation_energy(sv, scheme),
    })
}
