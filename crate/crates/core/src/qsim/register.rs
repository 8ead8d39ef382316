use rand::Rng;

use crate::error::{Error, Result};

use super::density::DensityMatrix;
use super::gates;
use super::matrix::ComplexMatrix;
use super::state::StateVector;

/// Which single-qubit basis a site is read out in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasurementBasis {
    Computational,
    /// Hadamard-conjugated computational basis, `{|+>, |->}`.
    Diagonal,
}

impl MeasurementBasis {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementBasis::Computational => "computational",
            MeasurementBasis::Diagonal => "diagonal",
        }
    }
}

/// A register is carried either as a sampled pure state or as an exact
/// density matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

/// An `N`-site register, `N >= 2`, with 1-based site labels.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRegister {
    repr: Representation,
}

/// One branch of an exact measurement.
#[derive(Clone, Debug)]
pub struct Branch {
    pub outcome: bool,
    pub probability: f64,
    /// `None` when the branch has zero probability.
    pub state: Option<QuantumRegister>,
}

impl QuantumRegister {
    pub fn from_state(state: StateVector) -> Result<Self> {
        check_size(state.n_qubits())?;
        Ok(Self { repr: Representation::Pure(state) })
    }

    pub fn from_density(rho: DensityMatrix) -> Result<Self> {
        check_size(rho.n_qubits())?;
        Ok(Self { repr: Representation::Mixed(rho) })
    }

    pub fn n_sites(&self) -> usize {
        match &self.repr {
            Representation::Pure(s) => s.n_qubits(),
            Representation::Mixed(r) => r.n_qubits(),
        }
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.repr, Representation::Mixed(_))
    }

    pub fn to_density(&self) -> DensityMatrix {
        match &self.repr {
            Representation::Pure(s) => s.to_density(),
            Representation::Mixed(r) => r.clone(),
        }
    }

    pub fn apply_gate(&mut self, gate: &ComplexMatrix, sites: &[usize]) -> Result<()> {
        match &mut self.repr {
            Representation::Pure(s) => s.apply_gate(gate, sites),
            Representation::Mixed(r) => r.apply_gate(gate, sites),
        }
    }

    pub(crate) fn repr_mut(&mut self) -> &mut Representation {
        &mut self.repr
    }

    fn prob_one(&self, site: usize) -> Result<f64> {
        match &self.repr {
            Representation::Pure(s) => s.prob_one(site),
            Representation::Mixed(r) => r.prob_one(site),
        }
    }

    fn project(&mut self, site: usize, outcome: bool) -> Result<f64> {
        match &mut self.repr {
            Representation::Pure(s) => s.project(site, outcome),
            Representation::Mixed(r) => r.project(site, outcome),
        }
    }

    /// Born-rule probabilities `[p(0), p(1)]` for reading `site` in `basis`.
    pub fn branch_probabilities(&self, site: usize, basis: MeasurementBasis) -> Result<[f64; 2]> {
        let p1 = match basis {
            MeasurementBasis::Computational => self.prob_one(site)?,
            MeasurementBasis::Diagonal => {
                let mut rotated = self.clone();
                rotated.apply_gate(&gates::hadamard(), &[site])?;
                rotated.prob_one(site)?
            }
        };
        let p1 = p1.clamp(0.0, 1.0);
        Ok([1.0 - p1, p1])
    }

    /// Deterministic branch: the post-measurement register given `outcome`,
    /// with its probability. Zero-probability branches are an error.
    pub fn measure_branch(
        &self,
        site: usize,
        basis: MeasurementBasis,
        outcome: bool,
    ) -> Result<(f64, QuantumRegister)> {
        let mut post = self.clone();
        let p = post.collapse(site, basis, outcome)?;
        Ok((p, post))
    }

    /// Both branches, each flagged impossible (`state == None`) when its
    /// probability vanishes.
    pub fn enumerate_branches(&self, site: usize, basis: MeasurementBasis) -> Result<[Branch; 2]> {
        let probs = self.branch_probabilities(site, basis)?;
        let branch = |outcome: bool| -> Result<Branch> {
            match self.measure_branch(site, basis, outcome) {
                Ok((p, state)) => Ok(Branch { outcome, probability: p, state: Some(state) }),
                Err(Error::ImpossibleBranch { .. }) => {
                    Ok(Branch { outcome, probability: probs[outcome as usize], state: None })
                }
                Err(e) => Err(e),
            }
        };
        Ok([branch(false)?, branch(true)?])
    }

    /// Samples a measurement of `site` in `basis` and collapses the register.
    pub fn measure<R: Rng + ?Sized>(&mut self, site: usize, basis: MeasurementBasis, rng: &mut R) -> Result<bool> {
        let [_, p1] = self.branch_probabilities(site, basis)?;
        let outcome = rng.random::<f64>() < p1;
        self.collapse(site, basis, outcome)?;
        Ok(outcome)
    }

    fn collapse(&mut self, site: usize, basis: MeasurementBasis, outcome: bool) -> Result<f64> {
        match basis {
            MeasurementBasis::Computational => self.project(site, outcome),
            MeasurementBasis::Diagonal => {
                let h = gates::hadamard();
                self.apply_gate(&h, &[site])?;
                let p = self.project(site, outcome)?;
                self.apply_gate(&h, &[site])?;
                Ok(p)
            }
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Validation(format!("register needs at least 2 sites, got {n}")));
    }
    Ok(())
}
