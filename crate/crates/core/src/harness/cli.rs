use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::ansatz::{build_upccd, AnsatzSpec};
use crate::circuit::{depth, transpile, transpile_fused};
use crate::harness::config::SweepConfig;
use crate::harness::heatmap::emit_heatmap;
use crate::harness::sweep::{cached_reference, e0_experiment, estimator_options, sweep};
use crate::model::{build_hamiltonian, correlation_energy, exact_ground, LevelScheme};
use crate::sim::{parse_backend, EnergyEstimator};
use crate::vqe::{run_vqe, SpsaConfig, Verdict};
use crate::Result;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pairing-vqe", version, about = "VQE laboratory for nuclear pairing correlation energies")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Level-scheme JSON (defaults to the bundled ⁶He scheme).
    #[arg(long, global = true)]
    levels: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact ground-state and correlation energy of the pair sector.
    Exact {
        #[command(flatten)]
        common: Common,
    },
    /// One VQE optimisation on a backend.
    Run {
        #[command(flatten)]
        common: Common,
        /// statevector | guadalupe-mean | johor:T=<ms>,eps=<p>
        #[arg(long, default_value = "statevector")]
        backend: String,
        #[arg(long, default_value_t = 2048)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Disable symmetry post-selection of Z-basis outcomes.
        #[arg(long)]
        no_filter: bool,
        /// Keep iterating to --max-iter after the convergence rule fires.
        #[arg(long)]
        run_to_max: bool,
    },
    /// Coherence-time × error-rate sweep with heatmap output.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// JSON file with sweep settings; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Start from the full 7×7 grid.
        #[arg(long)]
        full_grid: bool,
        /// Comma-separated coherence times (ms).
        #[arg(long, value_delimiter = ',')]
        t_ms: Option<Vec<f64>>,
        /// Comma-separated error probabilities.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        select_best: Option<usize>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long)]
        no_filter: bool,
    },
    /// Energy of the unoptimised initial ansatz over repeated evaluations.
    E0 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "statevector")]
        backend: String,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 8192)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Enable symmetry post-selection of Z-basis outcomes.
        #[arg(long)]
        filter: bool,
    },
    /// Print the native-gate ansatz circuit and its depth.
    Transpile {
        #[command(flatten)]
        common: Common,
        /// Comma-separated amplitudes to bind (defaults to the initial point).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        /// Fuse and re-synthesise single-qubit runs as well.
        #[arg(long)]
        fuse_1q: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_scheme(c: &Common) -> Result<LevelScheme> {
    match &c.levels {
        Some(p) => LevelScheme::from_file(p),
        None => Ok(LevelScheme::bundled_he6()),
    }
}

fn run_dir(base: &Path) -> Result<PathBuf> {
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S").to_string();
    let mut dir = base.join(&stamp);
    let mut n = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{n}"));
        n += 1;
    }
    std::fs::create_dir_all(dir.join("records"))?;
    Ok(dir)
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Exact { common } => {
            let s = load_scheme(&common)?;
            let h = build_hamiltonian(&s)?;
            let e = exact_ground(&h)?;
            println!("reference energy  {:.6} MeV", s.reference_energy());
            println!("ground energy     {e:.6} MeV");
            println!("E_corr            {:.6} MeV", correlation_energy(e, &s));
            Ok(EXIT_OK)
        }
        Command::Run { common, backend, shots, seed, out, max_iter, no_filter, run_to_max } => {
            let s = load_scheme(&common)?;
            let backend = parse_backend(&backend)?;
            let h = build_hamiltonian(&s)?;
            let ansatz = AnsatzSpec::from_scheme(&s)?;
            let est = EnergyEstimator::new(&h.qubit, backend, shots, estimator_options(&s, !no_filter, 0.5))?;
            let cfg = SpsaConfig { seed, max_iter, run_to_max, ..SpsaConfig::default() };
            cfg.validate()?;
            let r = run_vqe(&h, &ansatz, &est, &cfg)?;
            let dir = run_dir(&out)?;
            r.write_jsonl(dir.join("records").join("run.jsonl"))?;
            let summary = r.summary_json()?;
            std::fs::write(dir.join("summary.json"), &summary)?;
            println!("{summary}");
            println!("written to {}", dir.display());
            Ok(if r.verdict == Verdict::Converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
        }
        Command::Sweep {
            common,
            config,
            full_grid,
            t_ms,
            eps,
            repeats,
            select_best,
            shots,
            seed,
            max_iter,
            out,
            no_filter,
        } => {
            let s = load_scheme(&common)?;
            let mut cfg = match (&config, full_grid) {
                (Some(p), _) => SweepConfig::from_file(p)?,
                (None, true) => SweepConfig::full_grid(),
                (None, false) => SweepConfig::default(),
            };
            if let Some(v) = t_ms {
                cfg.t_ms = v;
            }
            if let Some(v) = eps {
                cfg.eps = v;
            }
            if let Some(v) = repeats {
                cfg.repeats = v;
                cfg.select_best = cfg.select_best.min(v);
            }
            if let Some(v) = select_best {
                cfg.select_best = v;
            }
            if let Some(v) = shots {
                cfg.shots = v;
            }
            if let Some(v) = seed {
                cfg.master_seed = v;
            }
            if let Some(v) = max_iter {
                cfg.max_iter = v;
            }
            if no_filter {
                cfg.symmetry_filter = false;
            }
            cfg.validate()?;
            let reference = match cfg.reference_e_corr_mev {
                Some(r) => r,
                None => cached_reference(&out, &s, &cfg)?,
            };
            let res = sweep(&s, &cfg, reference)?;
            let dir = run_dir(&out)?;
            for r in &res.runs {
                r.record.write_jsonl(
                    dir.join("records")
                        .join(format!("cell{:02}-slot{}-attempt{}.jsonl", r.cell, r.slot, r.attempt)),
                )?;
            }
            emit_heatmap(&res.cells, dir.join("heatmap.csv"), dir.join("heatmap.svg"))?;
            let summary = json!({
                "reference_e_corr_mev": reference,
                "config": cfg,
                "cells": res.cells,
                "runs": res.runs.iter().map(|r| json!({
                    "cell": r.cell, "slot": r.slot, "attempt": r.attempt,
                    "verdict": r.record.verdict,
                    "e_corr_bar_mev": r.record.e_corr_bar_mev,
                    "iterations": r.record.iterations.len(),
                    "seed": r.record.seed,
                    "abort_reason": r.record.abort_reason,
                })).collect::<Vec<_>>(),
            });
            std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
            for c in &res.cells {
                match (c.mean_e_corr_mev, c.std_mev, c.discrepancy_pct) {
                    (Some(m), Some(sd), Some(d)) => println!(
                        "T={:<7} eps={:<8e} E_corr={m:.5}±{sd:.5} MeV  discrepancy={d:.2}%  n={}",
                        c.t_ms, c.eps, c.n_success
                    ),
                    _ => println!("T={:<7} eps={:<8e} failed (n={})", c.t_ms, c.eps, c.n_success),
                }
            }
            println!("written to {}", dir.display());
            Ok(EXIT_OK)
        }
        Command::E0 { common, backend, repeats, shots, seed, out, filter } => {
            let s = load_scheme(&common)?;
            let backend = parse_backend(&backend)?;
            let r = e0_experiment(&s, backend, repeats, shots, seed, estimator_options(&s, filter, 0.0))?;
            let text = serde_json::to_string_pretty(&r)?;
            if let Some(p) = out {
                std::fs::write(p, &text)?;
            }
            println!("{text}");
            Ok(EXIT_OK)
        }
        Command::Transpile { common, theta, fuse_1q, out } => {
            let s = load_scheme(&common)?;
            let mut ansatz = AnsatzSpec::from_scheme(&s)?;
            if let Some(t) = theta {
                ansatz = ansatz.bind(&t)?;
            }
            let abstract_circuit = build_upccd(&ansatz)?;
            let native = if fuse_1q { transpile_fused(&abstract_circuit)? } else { transpile(&abstract_circuit)? };
            let text = native.to_text();
            match out {
                Some(p) => std::fs::write(p, &text)?,
                None => print!("{text}"),
            }
            let ops: Vec<String> = native.count_ops().iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("# depth {} ({})", depth(&native), ops.join(", "));
            Ok(EXIT_OK)
        }
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(parsed.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
