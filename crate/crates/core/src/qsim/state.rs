use crate::error::{Error, Result};

use super::density::DensityMatrix;
use super::matrix::{apply_to_amplitudes, check_sites, site_mask, ComplexMatrix, C64, ONE, ZERO};

pub(crate) const UNITARY_TOL: f64 = 1e-12;

/// Pure state of `n` qubits: `2^n` amplitudes, site 1 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::Validation(format!(
                "{n_qubits} qubits need {} amplitudes, got {}",
                1usize << n_qubits,
                amps.len()
            )));
        }
        let sv = Self { n_qubits, amps };
        let norm = sv.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("state norm^2 is {norm}, expected 1")));
        }
        Ok(sv)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` to the listed 1-based sites.
    pub fn apply_gate(&mut self, gate: &ComplexMatrix, sites: &[usize]) -> Result<()> {
        check_gate(gate, sites.len())?;
        check_sites(self.n_qubits, sites)?;
        apply_to_amplitudes(&mut self.amps, self.n_qubits, gate, sites);
        Ok(())
    }

    /// Probability that `site` reads 1 in the computational basis.
    pub fn prob_one(&self, site: usize) -> Result<f64> {
        check_sites(self.n_qubits, &[site])?;
        let m = site_mask(self.n_qubits, site);
        Ok(self.amps.iter().enumerate().filter(|(i, _)| i & m != 0).map(|(_, a)| a.norm_sqr()).sum())
    }

    /// Projects `site` onto `outcome` and renormalizes; returns the branch
    /// probability.
    pub fn project(&mut self, site: usize, outcome: bool) -> Result<f64> {
        let p1 = self.prob_one(site)?;
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p <= 1e-15 {
            return Err(Error::ImpossibleBranch { outcome: outcome as u8 });
        }
        let m = site_mask(self.n_qubits, site);
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & m != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(p)
    }

    /// `self ⊗ other`; `other`'s sites follow this state's sites.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { n_qubits: self.n_qubits + other.n_qubits, amps }
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

pub(crate) fn check_gate(gate: &ComplexMatrix, n_sites: usize) -> Result<()> {
    let dim = 1usize << n_sites;
    if gate.rows() != dim || gate.cols() != dim {
        return Err(Error::Validation(format!(
            "gate of shape {}x{} cannot act on {n_sites} sites",
            gate.rows(),
            gate.cols()
        )));
    }
    if !gate.is_unitary(UNITARY_TOL) {
        return Err(Error::Validation("gate is not unitary".into()));
    }
    Ok(())
}
