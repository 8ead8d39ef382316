//! Dense state-vector and density-matrix engine.
//!
//! Sites are 1-based; site 1 is the leftmost factor of a ket and the most
//! significant bit of a basis index. Registers come in two flavours: sampled
//! pure states (protocol runs, up to [`MAX_SAMPLED_QUBITS`]) and exact
//! density matrices (analysis, up to [`MAX_EXACT_QUBITS`]).

mod density;
pub mod gates;
mod matrix;
mod register;
mod state;

use rand::Rng;

use crate::error::{Error, Result};

pub use density::{DensityMatrix, DENSITY_TOL, PSD_FLOOR};
pub use matrix::{embed_operator, ComplexMatrix, C64};
pub use register::{Branch, MeasurementBasis, QuantumRegister, Representation};
pub use state::StateVector;

pub const MAX_SAMPLED_QUBITS: usize = 20;
pub const MAX_EXACT_QUBITS: usize = 11;

/// How a register is prepared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegisterMode {
    /// Pure state with explicit random decoy bits.
    Sampled,
    /// Density matrix with the decoys replaced by `I/2` factors.
    Exact,
}

/// `|B_{x0 x1}> = (Z^{x0} X^{x1} ⊗ I) CNOT (H ⊗ I) |00>`.
pub fn bell_prepare(x0: bool, x1: bool) -> StateVector {
    let mut s = StateVector::zero(2);
    encode_pair(&mut s, 1, 2, x0, x1).expect("two-site preparation is always in range");
    s
}

fn encode_pair(s: &mut StateVector, k: usize, l: usize, x0: bool, x1: bool) -> Result<()> {
    s.apply_gate(&gates::hadamard(), &[k])?;
    s.apply_gate(&gates::cnot(), &[k, l])?;
    if x1 {
        s.apply_gate(&gates::pauli_x(), &[k])?;
    }
    if x0 {
        s.apply_gate(&gates::pauli_z(), &[k])?;
    }
    Ok(())
}

/// Validates `1 <= k < l <= n`.
pub fn check_pair(n: usize, k: usize, l: usize) -> Result<()> {
    if k == 0 || k >= l || l > n {
        return Err(Error::Validation(format!("index pair ({k}, {l}) must satisfy 1 <= k < l <= {n}")));
    }
    Ok(())
}

/// Builds the sender's register: a Bell pair `|B_{x0 x1}>` on `(k, l)` and
/// uniformly random classical bits (or, exactly, `I/2`) on every other site.
pub fn prepare_register<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    l: usize,
    x0: bool,
    x1: bool,
    mode: RegisterMode,
    rng: &mut R,
) -> Result<QuantumRegister> {
    check_pair(n, k, l)?;
    match mode {
        RegisterMode::Sampled => {
            if n > MAX_SAMPLED_QUBITS {
                return Err(Error::Capacity { what: "sampled register size", requested: n, cap: MAX_SAMPLED_QUBITS });
            }
            // Bell pair on (k, l) tensored with a basis state elsewhere; the
            // amplitudes are written directly instead of running 2^n-wide
            // gates on every decoy.
            let mut decoys = 0usize;
            for site in (1..=n).filter(|&s| s != k && s != l) {
                if rng.random::<bool>() {
                    decoys |= 1 << (n - site);
                }
            }
            let pair = bell_prepare(x0, x1);
            let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
            for (local, amp) in pair.amplitudes().iter().enumerate() {
                let idx = decoys | (((local >> 1) & 1) << (n - k)) | ((local & 1) << (n - l));
                amps[idx] = *amp;
            }
            QuantumRegister::from_state(StateVector::from_amplitudes(n, amps)?)
        }
        RegisterMode::Exact => {
            if n > MAX_EXACT_QUBITS {
                return Err(Error::Capacity { what: "exact register size", requested: n, cap: MAX_EXACT_QUBITS });
            }
            let proj = gates::bell_projector(x0, x1);
            let embedded = embed_operator(n, &proj, &[k, l])?;
            let rho = embedded.scale(1.0 / (1usize << (n - 2)) as f64);
            QuantumRegister::from_density(DensityMatrix::from_matrix(n, rho)?)
        }
    }
}

/// Gate-by-gate preparation following the sender's circuit literally; used
/// to cross-check the direct amplitude construction.
pub fn prepare_register_by_gates<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    l: usize,
    x0: bool,
    x1: bool,
    rng: &mut R,
) -> Result<QuantumRegister> {
    check_pair(n, k, l)?;
    let mut s = StateVector::zero(n);
    encode_pair(&mut s, k, l, x0, x1)?;
    for site in (1..=n).filter(|&s| s != k && s != l) {
        if rng.random::<bool>() {
            s.apply_gate(&gates::pauli_x(), &[site])?;
        }
    }
    QuantumRegister::from_state(s)
}

/// Measures one site of `register`, returning the outcome and the collapsed
/// register.
pub fn measure_site<R: Rng + ?Sized>(
    mut register: QuantumRegister,
    site: usize,
    basis: MeasurementBasis,
    rng: &mut R,
) -> Result<(bool, QuantumRegister)> {
    let bit = register.measure(site, basis, rng)?;
    Ok((bit, register))
}

/// Global depolarizing channel on a density matrix.
pub fn depolarize(rho: &DensityMatrix, r: f64) -> Result<DensityMatrix> {
    rho.depolarize(r)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}
