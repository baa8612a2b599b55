use crate::circuit::{transpile, Circuit};
use crate::pauli::PauliSum;
use crate::sim::noise::Backend;
use crate::sim::sampling::{estimate_from_counts, Estimate, EstimatorOptions, MeasurementPlan};
use crate::sim::statevector::{expectation_of, run_statevector};
use crate::sim::trajectory::TrajectoryEngine;
use crate::{Error, Result};

/// Energy oracle for a fixed Hamiltonian on a chosen backend.
#[derive(Debug, Clone)]
pub struct EnergyEstimator {
    h: PauliSum,
    plan: MeasurementPlan,
    backend: Backend,
    shots: usize,
    options: EstimatorOptions,
}

impl EnergyEstimator {
    pub fn new(h: &PauliSum, backend: Backend, shots: usize, options: EstimatorOptions) -> Result<Self> {
        if matches!(backend, Backend::Noisy(_)) && shots == 0 {
            return Err(Error::Config("noisy backends need at least one shot".into()));
        }
        if let Backend::Noisy(spec) = &backend {
            spec.validate()?;
        }
        Ok(Self { plan: MeasurementPlan::new(h)?, h: h.clone(), backend, shots, options })
    }

    pub fn statevector(h: &PauliSum) -> Result<Self> {
        Self::new(h, Backend::Statevector, 0, EstimatorOptions::default())
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn plan(&self) -> &MeasurementPlan {
        &self.plan
    }

    pub fn options(&self) -> &EstimatorOptions {
        &self.options
    }

    /// `⟨H⟩` on the state prepared by `c`; `seed` drives shot noise.
    pub fn evaluate(&self, c: &Circuit, seed: u64) -> Result<Estimate> {
        match &self.backend {
            Backend::Statevector => {
                let sv = run_statevector(c)?;
                Ok(Estimate { mean: expectation_of(&sv, &self.h)?, stderr: 0.0, shots: 0, kept_fraction: 1.0 })
            }
            Backend::Noisy(spec) => {
                let native = transpile(c)?;
                let rotations: Vec<Circuit> =
                    self.plan.groups.iter().map(|g| g.native_rotation.clone()).collect();
                let engine = TrajectoryEngine::new(&native, &rotations, spec)?;
                let counts = engine.run(self.shots, seed)?;
                estimate_from_counts(&self.plan, &counts, &self.options)
            }
        }
    }
}
