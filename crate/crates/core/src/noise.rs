//! Storage models: time-dependent depolarizing noise (NQSM) and the
//! memory-bound event of the bounded-storage model (BQSM).
//!
//! Time is a tick counter. A cell held for `t` ticks under per-tick rate `r`
//! goes through `depolarize(·, r^t)`, so advancing by `t1` then `t2` equals
//! advancing by `t1 + t2`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::qsim::{gates, MeasurementBasis, QuantumRegister, Representation};

/// Per-cell depolarizing storage noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NqsmModel {
    rate: f64,
    tau_ticks: u64,
}

impl NqsmModel {
    pub fn new(rate: f64, tau_ticks: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Validation(format!("noise rate {rate} outside [0, 1]")));
        }
        Ok(Self { rate, tau_ticks })
    }

    /// The model whose `tau` is the smallest tick count with
    /// `rate^tau <= 2^-sigma`.
    pub fn from_sigma(rate: f64, sigma: u32) -> Result<Self> {
        let tau = min_tau_for_sigma(rate, sigma)
            .ok_or_else(|| Error::Validation(format!("rate {rate} never decays below 2^-{sigma}")))?;
        Self::new(rate, tau)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn tau_ticks(&self) -> u64 {
        self.tau_ticks
    }

    /// Surviving fraction `r^ticks` of a cell after `ticks`.
    pub fn decay(&self, ticks: u64) -> f64 {
        decay_factor(self.rate, ticks)
    }

    /// Surviving fraction after the full wait.
    pub fn residual_at_tau(&self) -> f64 {
        self.decay(self.tau_ticks)
    }
}

fn decay_factor(rate: f64, ticks: u64) -> f64 {
    if ticks == 0 {
        return 1.0;
    }
    // powi takes i32; clamp since any rate < 1 has long underflowed by then.
    rate.powi(ticks.min(i32::MAX as u64) as i32)
}

/// Smallest `tau` with `rate^tau <= 2^-sigma`; `None` if the rate never gets
/// there (`rate == 1`).
pub fn min_tau_for_sigma(rate: f64, sigma: u32) -> Option<u64> {
    let target = 2f64.powi(-(sigma as i32));
    if rate <= target {
        return Some(if sigma == 0 { 0 } else { 1 });
    }
    if rate >= 1.0 {
        return None;
    }
    let mut tau = (target.ln() / rate.ln()).floor().max(0.0) as u64;
    while decay_factor(rate, tau) > target {
        tau += 1;
    }
    while tau > 0 && decay_factor(rate, tau - 1) <= target {
        tau -= 1;
    }
    Some(tau)
}

/// A noise process applied to a register held in storage.
pub trait StorageChannel {
    fn advance<R: Rng + ?Sized>(&self, register: QuantumRegister, ticks: u64, rng: &mut R) -> Result<QuantumRegister>;
}

impl StorageChannel for NqsmModel {
    fn advance<R: Rng + ?Sized>(&self, register: QuantumRegister, ticks: u64, rng: &mut R) -> Result<QuantumRegister> {
        advance_storage(register, ticks, self, rng)
    }
}

/// Passes every cell through `depolarize(·, r^ticks)`.
///
/// Exact registers get the channel applied to the density matrix. Sampled
/// registers get one Kraus branch per cell: untouched with probability
/// `r^ticks`, otherwise a uniformly random Pauli from `{I, X, Y, Z}`.
pub fn advance_storage<R: Rng + ?Sized>(
    mut register: QuantumRegister,
    ticks: u64,
    model: &NqsmModel,
    rng: &mut R,
) -> Result<QuantumRegister> {
    let survive = model.decay(ticks);
    if survive >= 1.0 {
        return Ok(register);
    }
    let n = register.n_sites();
    match register.repr_mut() {
        Representation::Mixed(rho) => {
            for site in 1..=n {
                rho.depolarize_site(site, survive)?;
            }
        }
        Representation::Pure(state) => {
            for site in 1..=n {
                if rng.random::<f64>() >= survive {
                    let pauli = rng.random_range(0..4usize);
                    if pauli != 0 {
                        state.apply_gate(&gates::pauli(pauli), &[site])?;
                    }
                }
            }
        }
    }
    Ok(register)
}

/// The BQSM memory bound: at `bound_tick`, all but `memory_bound` stored
/// qubits are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BqsmModel {
    pub memory_bound: usize,
    pub bound_tick: u64,
}

impl BqsmModel {
    pub fn new(memory_bound: usize, bound_tick: u64) -> Self {
        Self { memory_bound, bound_tick }
    }
}

/// Result of the memory-bound event.
#[derive(Clone, Debug)]
pub struct MemoryBoundOutcome {
    /// Register after the forced measurements. Kept sites are untouched.
    pub register: QuantumRegister,
    pub kept: Vec<usize>,
    /// `(site, bit)` for every forcibly measured site, in site order.
    pub forced: Vec<(usize, bool)>,
}

/// Measures every stored site outside `selection` in the computational
/// basis and keeps `selection` coherent.
pub fn apply_memory_bound<R: Rng + ?Sized>(
    mut register: QuantumRegister,
    stored: &[usize],
    selection: &[usize],
    model: &BqsmModel,
    rng: &mut R,
) -> Result<MemoryBoundOutcome> {
    if selection.len() > model.memory_bound {
        return Err(Error::ModelViolation(format!(
            "selection keeps {} qubits, memory bound is {}",
            selection.len(),
            model.memory_bound
        )));
    }
    let n = register.n_sites();
    for (i, &s) in stored.iter().enumerate() {
        if s == 0 || s > n {
            return Err(Error::SiteOutOfRange { site: s, n_sites: n });
        }
        if stored[..i].contains(&s) {
            return Err(Error::Validation(format!("stored site {s} listed twice")));
        }
    }
    for (i, &s) in selection.iter().enumerate() {
        if !stored.contains(&s) {
            return Err(Error::Validation(format!("selected site {s} is not in storage")));
        }
        if selection[..i].contains(&s) {
            return Err(Error::Validation(format!("selected site {s} listed twice")));
        }
    }
    let mut measured: Vec<usize> = stored.iter().copied().filter(|s| !selection.contains(s)).collect();
    measured.sort_unstable();
    let mut forced = Vec::with_capacity(measured.len());
    for site in measured {
        let bit = register.measure(site, MeasurementBasis::Computational, rng)?;
        forced.push((site, bit));
    }
    let mut kept = selection.to_vec();
    kept.sort_unstable();
    Ok(MemoryBoundOutcome { register, kept, forced })
}

/// Probability that a uniformly chosen `M`-subset of `N` sites contains the
/// secret pair, with the doubled variant reported alongside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalProbability {
    /// `C(M,2)/C(N,2) = M(M-1)/(N(N-1))`.
    pub combinatorial: f64,
    /// `2·(M/N)·((M-1)/(N-1))`, twice the combinatorial value.
    pub doubled: f64,
}

pub fn bqsm_survival_probability(n: usize, m: usize) -> Result<SurvivalProbability> {
    if n < 2 {
        return Err(Error::Validation(format!("N = {n} must be at least 2")));
    }
    if m > n {
        return Err(Error::Validation(format!("memory bound {m} exceeds N = {n}")));
    }
    if m < 2 {
        return Ok(SurvivalProbability { combinatorial: 0.0, doubled: 0.0 });
    }
    let (nf, mf) = (n as f64, m as f64);
    let combinatorial = mf * (mf - 1.0) / (nf * (nf - 1.0));
    Ok(SurvivalProbability { combinatorial, doubled: 2.0 * combinatorial })
}

/// Storage-capacity bound `2^{-N·γ(R)}` for a caller-supplied rate function.
#[derive(Clone, Copy, Debug)]
pub struct StorageBoundParams {
    pub n: usize,
    pub rate: f64,
    pub gamma: Option<fn(f64) -> f64>,
}

impl StorageBoundParams {
    /// `None` when no `gamma` is supplied.
    pub fn bound(&self) -> Result<Option<f64>> {
        let Some(gamma) = self.gamma else {
            return Ok(None);
        };
        let g = gamma(self.rate);
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::Validation(format!("gamma({}) = {g} must be positive", self.rate)));
        }
        Ok(Some(2f64.powf(-(self.n as f64) * g)))
    }
}
