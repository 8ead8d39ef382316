use crate::error::{Error, Result};
use crate::spectra::hermitian_eigenvalues;

use super::matrix::{apply_to_amplitudes, check_sites, gather, site_mask, spread, ComplexMatrix, C64, ZERO};
use super::state::{check_gate, StateVector};

/// Tolerance for trace and Hermiticity checks.
pub const DENSITY_TOL: f64 = 1e-12;
/// Floor below which an eigenvalue counts as negative.
pub const PSD_FLOOR: f64 = -1e-10;

/// Mixed state of `n` qubits as a `2^n x 2^n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        Self { n_qubits: state.n_qubits(), matrix: ComplexMatrix::outer(state.amplitudes()) }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self { n_qubits, matrix: ComplexMatrix::identity(d).scale(1.0 / d as f64) }
    }

    /// Wraps a matrix after checking shape, unit trace and Hermiticity.
    /// Positivity is checked separately by [`DensityMatrix::validate`].
    pub fn from_matrix(n_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        let d = 1usize << n_qubits;
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::Validation(format!("{n_qubits}-qubit density matrix must be {d}x{d}")));
        }
        let dm = Self { n_qubits, matrix };
        let tr = dm.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        if !dm.matrix.is_hermitian(1e-10) {
            return Err(Error::Validation("density matrix is not Hermitian".into()));
        }
        Ok(dm)
    }

    /// Full check: unit trace, Hermitian, eigenvalues above [`PSD_FLOOR`].
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > DENSITY_TOL * (1usize << self.n_qubits) as f64 {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        if !self.matrix.is_hermitian(DENSITY_TOL) {
            return Err(Error::Validation("density matrix is not Hermitian".into()));
        }
        let min = hermitian_eigenvalues(&self.matrix)?[0];
        if min < PSD_FLOOR {
            return Err(Error::Validation(format!("density matrix has negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `rho -> U rho U^†` with `U` acting on the listed sites.
    pub fn apply_gate(&mut self, gate: &ComplexMatrix, sites: &[usize]) -> Result<()> {
        check_gate(gate, sites.len())?;
        check_sites(self.n_qubits, sites)?;
        // Row-major rho is a 2n-site amplitude array: row index on sites
        // 1..=n, column index on sites n+1..=2n. U acts on rows, conj(U) on
        // columns.
        let n = self.n_qubits;
        let col_sites: Vec<usize> = sites.iter().map(|s| s + n).collect();
        let data = self.matrix.entries_mut();
        apply_to_amplitudes(data, 2 * n, gate, sites);
        apply_to_amplitudes(data, 2 * n, &gate.conj(), &col_sites);
        Ok(())
    }

    pub fn prob_one(&self, site: usize) -> Result<f64> {
        check_sites(self.n_qubits, &[site])?;
        let m = site_mask(self.n_qubits, site);
        let d = 1usize << self.n_qubits;
        Ok((0..d).filter(|i| i & m != 0).map(|i| self.matrix.get(i, i).re).sum())
    }

    pub fn project(&mut self, site: usize, outcome: bool) -> Result<f64> {
        let p1 = self.prob_one(site)?;
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p <= 1e-15 {
            return Err(Error::ImpossibleBranch { outcome: outcome as u8 });
        }
        let m = site_mask(self.n_qubits, site);
        let d = 1usize << self.n_qubits;
        for i in 0..d {
            for j in 0..d {
                let keep = ((i & m != 0) == outcome) && ((j & m != 0) == outcome);
                let v = if keep { self.matrix.get(i, j) / p } else { ZERO };
                self.matrix.set(i, j, v);
            }
        }
        Ok(p)
    }

    /// Reduced state on the `keep` sites (in ascending site order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::Validation("partial trace must keep at least one site".into()));
        }
        check_sites(self.n_qubits, keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let n = self.n_qubits;
        let traced: Vec<usize> = (1..=n).filter(|s| !keep.contains(s)).collect();
        let k = keep.len();
        let mut out = ComplexMatrix::zeros(1 << k, 1 << k);
        for env in 0..(1usize << traced.len()) {
            let env_bits = spread(n, &traced, env);
            for a in 0..(1usize << k) {
                let i = env_bits | spread(n, &keep, a);
                for b in 0..(1usize << k) {
                    let j = env_bits | spread(n, &keep, b);
                    let v = out.get(a, b) + self.matrix.get(i, j);
                    out.set(a, b, v);
                }
            }
        }
        Ok(DensityMatrix { n_qubits: k, matrix: out })
    }

    /// Global depolarizing channel `r rho + (1 - r) I/d`.
    pub fn depolarize(&self, r: f64) -> Result<DensityMatrix> {
        check_rate(r)?;
        let d = 1usize << self.n_qubits;
        let mut m = self.matrix.scale(r);
        let shift = (1.0 - r) / d as f64;
        for i in 0..d {
            let v = m.get(i, i) + shift;
            m.set(i, i, v);
        }
        Ok(DensityMatrix { n_qubits: self.n_qubits, matrix: m })
    }

    /// Single-qubit depolarizing channel on one site, identity elsewhere:
    /// `r rho + (1 - r) Tr_site(rho) ⊗ I/2`.
    pub fn depolarize_site(&mut self, site: usize, r: f64) -> Result<()> {
        check_rate(r)?;
        check_sites(self.n_qubits, &[site])?;
        if r == 1.0 {
            return Ok(());
        }
        let m = site_mask(self.n_qubits, site);
        let d = 1usize << self.n_qubits;
        let src = self.matrix.clone();
        for i in 0..d {
            for j in 0..d {
                let mut v = src.get(i, j) * r;
                if (i & m) == (j & m) {
                    let avg = (src.get(i & !m, j & !m) + src.get(i | m, j | m)) * 0.5;
                    v += avg * (1.0 - r);
                }
                self.matrix.set(i, j, v);
            }
        }
        Ok(())
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        Self { n_qubits: self.n_qubits + other.n_qubits, matrix: self.matrix.kron(&other.matrix) }
    }

    /// Probability of `|v>` (a basis-state index over the listed sites)
    /// after tracing out the rest; used by exact-mode tests.
    pub fn marginal_probability(&self, sites: &[usize], outcome: usize) -> Result<f64> {
        check_sites(self.n_qubits, sites)?;
        let d = 1usize << self.n_qubits;
        Ok((0..d).filter(|&i| gather(self.n_qubits, sites, i) == outcome).map(|i| self.matrix.get(i, i).re).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        let d = 1usize << self.n_qubits;
        (0..d).map(|i| self.matrix.get(i, i)).collect()
    }
}

pub(crate) fn check_rate(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) || r.is_nan() {
        return Err(Error::Validation(format!("depolarizing rate {r} outside [0, 1]")));
    }
    Ok(())
}
