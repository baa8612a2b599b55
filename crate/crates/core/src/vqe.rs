//! SPSA optimisation with calibrated gain, logarithmic-fit termination and
//! run recording.

use std::io::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_upccd, AnsatzSpec};
use crate::model::PairingHamiltonian;
use crate::sim::EnergyEstimator;
use crate::{Error, Result};

/// What the calibrated first step is sized against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calibration {
    /// First update changes the cost by ≈ `target` (MeV).
    Cost,
    /// First update moves each parameter by ≈ `target` (rad).
    Parameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    pub alpha: f64,
    pub gamma: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub c: f64,
    /// Learning-rate numerator; calibrated when `None`.
    pub a: Option<f64>,
    pub max_iter: usize,
    pub target_first_step_mev: f64,
    pub calibration_pairs: usize,
    pub calibration: Calibration,
    pub seed: u64,
    /// Keep iterating to `max_iter` after convergence is detected.
    pub run_to_max: bool,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.602,
            gamma: 0.101,
            big_a: 0.0,
            c: 0.1,
            a: None,
            max_iter: 200,
            target_first_step_mev: 1.0,
            calibration_pairs: 25,
            calibration: Calibration::Cost,
            seed: 0,
            run_to_max: false,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.gamma > 0.0) {
            return Err(Error::Config("alpha and gamma must be positive".into()));
        }
        if !(self.c > 0.0) {
            return Err(Error::Config("c must be positive".into()));
        }
        if self.big_a < 0.0 {
            return Err(Error::Config("A must be non-negative".into()));
        }
        if self.max_iter < 20 {
            return Err(Error::Config("max_iter must be at least 20".into()));
        }
        if let Some(a) = self.a {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Config("a must be positive".into()));
            }
        }
        Ok(())
    }

    /// `(a_k, c_k)` for zero-based gain index `k`.
    pub fn gains(&self, a: f64, k: usize) -> (f64, f64) {
        let k = k as f64;
        (
            a / (self.big_a + k + 1.0).powf(self.alpha),
            self.c / (k + 1.0).powf(self.gamma),
        )
    }
}

fn rademacher(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn checked(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteCost(v))
    }
}

fn shifted(theta: &[f64], delta: &[f64], s: f64) -> Vec<f64> {
    theta.iter().zip(delta).map(|(t, d)| t + s * d).collect()
}

/// One SPSA update with exactly two cost evaluations.
pub fn spsa_step(
    theta: &[f64],
    k: usize,
    a: f64,
    cfg: &SpsaConfig,
    rng: &mut impl Rng,
    mut eval: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let (ak, ck) = cfg.gains(a, k);
    let delta = rademacher(rng, theta.len());
    let fp = checked(eval(&shifted(theta, &delta, ck))?)?;
    let fm = checked(eval(&shifted(theta, &delta, -ck))?)?;
    let df = (fp - fm) / (2.0 * ck);
    Ok(theta.iter().zip(&delta).map(|(t, d)| t - ak * df / d).collect())
}

/// Learning-rate numerator from Rademacher pairs at magnitude `c`, with
/// `ĝ = mean|δf/2| / c` the typical gradient projection:
/// `a = target / ĝ²` for [`Calibration::Cost`], `a = target / ĝ` for
/// [`Calibration::Parameter`].
pub fn calibrate_a(
    theta0: &[f64],
    cfg: &SpsaConfig,
    rng: &mut impl Rng,
    mut eval: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<f64> {
    if !(cfg.target_first_step_mev > 0.0) {
        return Err(Error::Config("calibration target must be positive".into()));
    }
    if cfg.calibration_pairs == 0 {
        return Err(Error::Config("calibration needs at least one pair".into()));
    }
    let mut total = 0.0;
    for _ in 0..cfg.calibration_pairs {
        let delta = rademacher(rng, theta0.len());
        let fp = checked(eval(&shifted(theta0, &delta, cfg.c))?)?;
        let fm = checked(eval(&shifted(theta0, &delta, -cfg.c))?)?;
        total += ((fp - fm) / 2.0).abs();
    }
    let mean = total / cfg.calibration_pairs as f64;
    if mean < 1e-12 {
        return Err(Error::FlatLandscape(mean));
    }
    let g = mean / cfg.c;
    Ok(match cfg.calibration {
        Calibration::Cost => cfg.target_first_step_mev / (g * g),
        Calibration::Parameter => cfg.target_first_step_mev / g,
    })
}

/// Least-squares `y = m ln x + c`; returns `(m, c)`.
pub fn fit_log(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} point(s)", points.len())));
    }
    if points.iter().any(|&(x, _)| !(x >= 1.0)) {
        return Err(Error::DegenerateFit("abscissae must be >= 1".into()));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * n {
        return Err(Error::DegenerateFit("all abscissae equal".into()));
    }
    let sxy: f64 = lx.iter().zip(points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    let m = sxy / sxx;
    Ok((m, my - m * mx))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Continue,
    Converged,
    AbortRepeat,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub k: usize,
    pub m: f64,
    pub c: f64,
}

pub const SLOPE_FLOOR: f64 = 0.1;
pub const SLOPE_REL_CHANGE: f64 = 0.08;

/// Apply the three slope rules at checkpoint `k` (a multiple of 10).
pub fn check_termination(fits: &[FitPoint], k: usize) -> Result<Verdict> {
    let find = |k: usize| fits.iter().find(|f| f.k == k).ok_or(Error::MissingFit(k));
    let mk = find(k)?.m;
    if mk > 0.0 {
        return Ok(Verdict::AbortRepeat);
    }
    if k == 10 && mk.abs() < SLOPE_FLOOR {
        return Ok(Verdict::AbortRepeat);
    }
    if k >= 20 {
        let prev = find(k - 10)?.m;
        if ((mk - prev) / prev).abs() <= SLOPE_REL_CHANGE {
            return Ok(Verdict::Converged);
        }
    }
    Ok(Verdict::Continue)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub theta: Vec<f64>,
    pub e_mev: f64,
    pub e_corr_mev: f64,
    pub stderr_mev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub backend: String,
    pub a: f64,
    pub iterations: Vec<IterationRecord>,
    pub fits: Vec<FitPoint>,
    pub verdict: Verdict,
    /// Iteration at which the convergence rule fired.
    pub terminated_at: Option<usize>,
    /// Mean of the last ten `E_corr` at the stopping point.
    pub e_corr_bar_mev: Option<f64>,
    /// Mean of the last ten `E_corr` of all iterations run (differs from
    /// `e_corr_bar_mev` only with `run_to_max`).
    pub e_corr_bar_final_mev: Option<f64>,
    pub abort_reason: Option<String>,
    pub cost_evaluations: usize,
    pub monitor_evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
struct Summary<'a> {
    verdict: Verdict,
    e_corr_bar_mev: Option<f64>,
    e_corr_bar_final_mev: Option<f64>,
    iterations: usize,
    seed: u64,
    backend: &'a str,
    terminated_at: Option<usize>,
    a: f64,
    abort_reason: Option<&'a str>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        matches!(self.verdict, Verdict::Converged | Verdict::MaxIter) && self.e_corr_bar_mev.is_some()
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Summary {
            verdict: self.verdict,
            e_corr_bar_mev: self.e_corr_bar_mev,
            e_corr_bar_final_mev: self.e_corr_bar_final_mev,
            iterations: self.iterations.len(),
            seed: self.seed,
            backend: &self.backend,
            terminated_at: self.terminated_at,
            a: self.a,
            abort_reason: self.abort_reason.as_deref(),
        })?)
    }

    /// One JSON object per iteration.
    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for it in &self.iterations {
            serde_json::to_writer(&mut f, it)?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
        Ok(())
    }
}

pub fn tail_mean(xs: &[f64], n: usize) -> Option<f64> {
    if xs.len() < n || n == 0 {
        return None;
    }
    Some(xs[xs.len() - n..].iter().sum::<f64>() / n as f64)
}

/// splitmix64 finaliser, used to derive independent sub-seeds.
pub fn mix_seed(seed: u64, n: u64) -> u64 {
    let mut z = seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Optimise the ansatz from its current amplitudes.
///
/// The energy recorded for iteration `k` is a separate evaluation at the
/// updated point `θ_k`; the two perturbed SPSA evaluations are biased by the
/// landscape curvature and are used for the gradient only.
pub fn run_vqe(
    h: &PairingHamiltonian,
    ansatz: &AnsatzSpec,
    estimator: &EnergyEstimator,
    cfg: &SpsaConfig,
) -> Result<RunRecord> {
    cfg.validate()?;
    if ansatz.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch(h.n_qubits(), ansatz.n_qubits()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let eval_base = mix_seed(cfg.seed, u64::MAX);
    let mut n_eval = 0u64;
    let mut cost = |theta: &[f64]| -> Result<(f64, f64)> {
        let circuit = build_upccd(&ansatz.bind(theta)?)?;
        let e = estimator.evaluate(&circuit, mix_seed(eval_base, n_eval))?;
        n_eval += 1;
        Ok((checked(e.mean)?, e.stderr))
    };

    let mut record = RunRecord {
        seed: cfg.seed,
        backend: estimator.backend().label(),
        a: cfg.a.unwrap_or(f64::NAN),
        iterations: Vec::new(),
        fits: Vec::new(),
        verdict: Verdict::Continue,
        terminated_at: None,
        e_corr_bar_mev: None,
        e_corr_bar_final_mev: None,
        abort_reason: None,
        cost_evaluations: 0,
        monitor_evaluations: 0,
    };
    let mut cost_evals = 0usize;

    let abort = |mut r: RunRecord, err: Error, cost_evals: usize| -> Result<RunRecord> {
        match err {
            Error::PostSelection { .. } | Error::NonFiniteCost(_) | Error::FlatLandscape(_) => {
                r.verdict = Verdict::AbortRepeat;
                r.abort_reason = Some(err.to_string());
                r.cost_evaluations = cost_evals;
                Ok(r)
            }
            e => Err(e),
        }
    };

    let a = match cfg.a {
        Some(a) => a,
        None => {
            let res = calibrate_a(ansatz.theta(), cfg, &mut rng, |t| {
                cost_evals += 1;
                cost(t).map(|v| v.0)
            });
            match res {
                Ok(a) => a,
                Err(e) => return abort(record, e, cost_evals),
            }
        }
    };
    record.a = a;

    let mut theta = ansatz.theta().to_vec();
    let mut e_corr: Vec<f64> = Vec::new();
    let reference = h.hf_energy;
    for k in 1..=cfg.max_iter {
        let step = spsa_step(&theta, k - 1, a, cfg, &mut rng, |t| {
            cost_evals += 1;
            cost(t).map(|v| v.0)
        });
        theta = match step {
            Ok(t) => t,
            Err(e) => return abort(record, e, cost_evals),
        };
        let (e, se) = match cost(&theta) {
            Ok(v) => v,
            Err(e) => return abort(record, e, cost_evals),
        };
        record.monitor_evaluations += 1;
        e_corr.push(e - reference);
        record.iterations.push(IterationRecord {
            k,
            theta: theta.clone(),
            e_mev: e,
            e_corr_mev: e - reference,
            stderr_mev: se,
        });

        if k % 10 == 0 && record.terminated_at.is_none() {
            let pts: Vec<(f64, f64)> = e_corr.iter().enumerate().map(|(i, &y)| ((i + 1) as f64, y)).collect();
            let (m, c) = fit_log(&pts)?;
            record.fits.push(FitPoint { k, m, c });
            match check_termination(&record.fits, k)? {
                Verdict::AbortRepeat => {
                    record.verdict = Verdict::AbortRepeat;
                    record.abort_reason = Some(format!("slope rule at k = {k} (m = {m:.4})"));
                    record.cost_evaluations = cost_evals;
                    return Ok(record);
                }
                Verdict::Converged => {
                    record.terminated_at = Some(k);
                    record.verdict = Verdict::Converged;
                    record.e_corr_bar_mev = tail_mean(&e_corr, 10);
                    if !cfg.run_to_max {
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    if record.terminated_at.is_none() {
        record.verdict = Verdict::MaxIter;
        record.e_corr_bar_mev = tail_mean(&e_corr, 10);
    }
    record.e_corr_bar_final_mev = tail_mean(&e_corr, 10);
    record.cost_evaluations = cost_evals;
    Ok(record)
}
