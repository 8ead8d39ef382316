//! Concrete receiver-side attacks and their empirical success rates.
//!
//! Every attack is a named strategy, not an optimal adversary: the audit is
//! one-sided and checks measured full-pair success against `1/2 + 1/N`.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::noise::{advance_storage, apply_memory_bound, BqsmModel, NqsmModel};
use crate::protocol::{
    basis_for_choice, sender_run, sender_run_with_pair, ProtocolParams, SenderInputs, SenderMessage, Variant,
};
use crate::qsim::{gates, MeasurementBasis, QuantumRegister, RegisterMode};
use crate::rng::{derive_rng, SimRng};
use crate::spectra::IndexEncodingSet;

/// Guess of both sender bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttackOutcome {
    pub guessed_x0: bool,
    pub guessed_x1: bool,
    pub both_correct: bool,
    pub any_correct: bool,
    /// Whether the secret pair survived in quantum storage, where relevant.
    pub pair_stored: bool,
}

impl AttackOutcome {
    pub fn judge(guess: (bool, bool), truth: SenderInputs, pair_stored: bool) -> Self {
        let c0 = guess.0 == truth.x0;
        let c1 = guess.1 == truth.x1;
        Self { guessed_x0: guess.0, guessed_x1: guess.1, both_correct: c0 && c1, any_correct: c0 || c1, pair_stored }
    }
}

/// Aggregated frequencies over independent trials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackStats {
    pub trials: usize,
    pub both: usize,
    pub single: usize,
    pub stored: usize,
    pub success_both: f64,
    pub success_any_single: f64,
    pub stored_pair: f64,
    /// `sqrt(p(1-p)/trials)` for `success_both`.
    pub std_error: f64,
}

impl AttackStats {
    pub fn from_counts(trials: usize, both: usize, single: usize, stored: usize) -> Self {
        let t = trials.max(1) as f64;
        let p = both as f64 / t;
        Self {
            trials,
            both,
            single,
            stored,
            success_both: p,
            success_any_single: single as f64 / t,
            stored_pair: stored as f64 / t,
            std_error: (p * (1.0 - p) / t).sqrt(),
        }
    }

    /// Standard error of the stored-pair frequency.
    pub fn stored_std_error(&self) -> f64 {
        let p = self.stored_pair;
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }
}

/// Runs `trials` independent trials in parallel, trial `t` seeded by
/// `derive_rng(seed, label, t)`. Counts are summed so the result does not
/// depend on scheduling.
pub fn run_trials<F>(trials: usize, seed: u64, label: &str, trial: F) -> Result<AttackStats>
where
    F: Fn(&mut SimRng) -> Result<AttackOutcome> + Sync,
{
    let counts = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let o = trial(&mut derive_rng(seed, label, t))?;
            Ok::<_, Error>([o.both_correct as usize, o.any_correct as usize, o.pair_stored as usize])
        })
        .try_reduce(|| [0; 3], |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2]]))?;
    Ok(AttackStats::from_counts(trials, counts[0], counts[1], counts[2]))
}

/// Bell-basis measurement of `(k, l)`: undo the encoding circuit and read
/// both sites. Site `k` yields `x0`, site `l` yields `x1`.
pub fn sdc_attack<R: Rng + ?Sized>(
    register: &QuantumRegister,
    k: usize,
    l: usize,
    rng: &mut R,
) -> Result<(bool, bool)> {
    let mut reg = register.clone();
    reg.apply_gate(&gates::cnot(), &[k, l])?;
    reg.apply_gate(&gates::hadamard(), &[k])?;
    let x0 = reg.measure(k, MeasurementBasis::Computational, rng)?;
    let x1 = reg.measure(l, MeasurementBasis::Computational, rng)?;
    Ok((x0, x1))
}

/// Exact probability that the Bell measurement on `(k, l)` returns
/// `(x0, x1)`.
pub fn sdc_success_probability(register: &QuantumRegister, k: usize, l: usize, x0: bool, x1: bool) -> Result<f64> {
    let mut reg = register.clone();
    reg.apply_gate(&gates::cnot(), &[k, l])?;
    reg.apply_gate(&gates::hadamard(), &[k])?;
    let rho = reg.to_density();
    rho.marginal_probability(&[k, l], ((x0 as usize) << 1) | x1 as usize)
}

fn random_inputs<R: Rng + ?Sized>(rng: &mut R) -> SenderInputs {
    SenderInputs::new(rng.random(), rng.random())
}

fn register_of(msg: &SenderMessage) -> Result<&QuantumRegister> {
    match msg {
        SenderMessage::Register(m) => Ok(&m.register),
        SenderMessage::Bundle(m) => Ok(&m.register),
        SenderMessage::Index(_) => Err(Error::Validation("first message carries no register".into())),
    }
}

/// Known-index superdense coding: the indices leak before the register
/// decoheres. Model-violating by construction.
pub fn sdc_known_indices_attack(n: usize, trials: usize, seed: u64) -> Result<AttackStats> {
    let params = ProtocolParams::new(Variant::Nqsm2Msg, n);
    run_trials(trials, seed, "sdc-known", |rng| {
        let truth = random_inputs(rng);
        let out = sender_run(&params, truth, rng)?;
        let (k, l) = out.pair;
        let guess = sdc_attack(register_of(&out.messages[0])?, k, l, rng)?;
        Ok(AttackOutcome::judge(guess, truth, true))
    })
}

/// Bell-measures a uniformly guessed pair without waiting for the indices.
pub fn sdc_blind_attack(n: usize, trials: usize, seed: u64) -> Result<AttackStats> {
    let params = ProtocolParams::new(Variant::Nqsm2Msg, n);
    let set = IndexEncodingSet::new(n)?;
    run_trials(trials, seed, "sdc-blind", |rng| {
        let truth = random_inputs(rng);
        let out = sender_run(&params, truth, rng)?;
        let (gk, gl) = set.sample(rng);
        let guess = sdc_attack(register_of(&out.messages[0])?, gk, gl, rng)?;
        Ok(AttackOutcome::judge(guess, truth, (gk, gl) == out.pair))
    })
}

/// The honest receiver for choice `y`, guessing the other bit uniformly.
pub fn honest_receiver_attack(n: usize, y: bool, trials: usize, seed: u64) -> Result<AttackStats> {
    let params = ProtocolParams::new(Variant::Nqsm2Msg, n);
    run_trials(trials, seed, "honest", |rng| {
        let truth = random_inputs(rng);
        let out = sender_run(&params, truth, rng)?;
        let (k, l) = out.pair;
        let mut reg = register_of(&out.messages[0])?.clone();
        let basis = basis_for_choice(y);
        let mk = reg.measure(k, basis, rng)?;
        let ml = reg.measure(l, basis, rng)?;
        let learned = mk ^ ml;
        let other = rng.random::<bool>();
        let guess = if y { (other, learned) } else { (learned, other) };
        Ok(AttackOutcome::judge(guess, truth, false))
    })
}

/// BQSM attack against `bqsm_2msg`: keep a uniform `M`-subset, measure the
/// rest in the `y` basis before the bound. Bell-measure if both indices
/// were kept; otherwise decode `x_y` honestly and guess the other bit.
pub fn bqsm_subset_attack(n: usize, m: usize, y: bool, trials: usize, seed: u64) -> Result<AttackStats> {
    if m > n {
        return Err(Error::Validation(format!("memory bound {m} exceeds N = {n}")));
    }
    let params = ProtocolParams::new(Variant::Bqsm2Msg, n);
    let model = BqsmModel::new(m, 0);
    let basis = basis_for_choice(y);
    run_trials(trials, seed, "bqsm-subset", |rng| {
        let truth = random_inputs(rng);
        let out = sender_run(&params, truth, rng)?;
        let mut reg = register_of(&out.messages[0])?.clone();
        let selection: Vec<usize> = sample(rng, n, m).into_iter().map(|i| i + 1).collect();
        let mut bits = vec![None; n + 1];
        for site in (1..=n).filter(|s| !selection.contains(s)) {
            bits[site] = Some(reg.measure(site, basis, rng)?);
        }
        let bound = apply_memory_bound(reg, &selection, &selection, &model, rng)?;
        let mut reg = bound.register;
        let (k, l) = out.pair;
        let stored = selection.contains(&k) && selection.contains(&l);
        let guess = if stored {
            sdc_attack(&reg, k, l, rng)?
        } else {
            for site in [k, l] {
                if bits[site].is_none() {
                    bits[site] = Some(reg.measure(site, basis, rng)?);
                }
            }
            let learned = bits[k].expect("measured") ^ bits[l].expect("measured");
            let other = rng.random::<bool>();
            if y {
                (other, learned)
            } else {
                (learned, other)
            }
        };
        Ok(AttackOutcome::judge(guess, truth, stored))
    })
}

/// NQSM delay attack against `nqsm_2msg`: store everything through the
/// wait, let every cell decay by `rate^tau_ticks`, then Bell-measure the
/// revealed pair.
pub fn nqsm_delay_attack(n: usize, rate: f64, tau_ticks: u64, trials: usize, seed: u64) -> Result<AttackStats> {
    let mut params = ProtocolParams::new(Variant::Nqsm2Msg, n);
    params.tau_ticks = tau_ticks.max(1);
    let model = NqsmModel::new(rate, tau_ticks)?;
    run_trials(trials, seed, "nqsm-delay", |rng| {
        let truth = random_inputs(rng);
        let out = sender_run(&params, truth, rng)?;
        let stored = advance_storage(register_of(&out.messages[0])?.clone(), tau_ticks, &model, rng)?;
        let (k, l) = out.pair;
        let guess = sdc_attack(&stored, k, l, rng)?;
        Ok(AttackOutcome::judge(guess, truth, true))
    })
}

/// Exact delay-attack success averaged over all pairs and messages, from
/// density matrices.
pub fn delay_attack_exact_success(n: usize, survive: f64) -> Result<f64> {
    let set = IndexEncodingSet::new(n)?;
    let model = NqsmModel::new(survive, 1)?;
    let mut total = 0.0;
    let mut count = 0usize;
    let mut rng = derive_rng(0, "delay-exact", 0);
    let mut params = ProtocolParams::new(Variant::Nqsm2Msg, n);
    params.mode = RegisterMode::Exact;
    for &(k, l) in set.pairs() {
        for (x0, x1) in [(false, false), (false, true), (true, false), (true, true)] {
            let out = sender_run_with_pair(&params, SenderInputs::new(x0, x1), (k, l), &mut rng)?;
            let stored = advance_storage(register_of(&out.messages[0])?.clone(), 1, &model, &mut rng)?;
            total += sdc_success_probability(&stored, k, l, x0, x1)?;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Closed-form delay-attack success: `p² + (1 - p²)/4` for `p = rate^tau`.
pub fn delay_attack_closed_form(survive: f64) -> f64 {
    let p2 = survive * survive;
    p2 + (1.0 - p2) / 4.0
}

/// Closed-form subset-attack success: pair stored with probability `s`,
/// otherwise one bit known and one guessed.
pub fn subset_attack_closed_form(survival: f64) -> f64 {
    survival + (1.0 - survival) / 2.0
}

/// Outcome of checking one attack against the guessing bound.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditVerdict {
    pub bound: f64,
    pub observed: f64,
    pub std_error: f64,
    pub pass: bool,
    /// Digest of the audited statistics, for failure reports.
    pub digest: String,
}

impl AuditVerdict {
    pub fn into_result(self) -> Result<Self> {
        if self.pass {
            Ok(self)
        } else {
            Err(Error::Audit(format!(
                "full-pair success {:.6} exceeds bound {:.6} + 3·{:.6} (stats {})",
                self.observed, self.bound, self.std_error, self.digest
            )))
        }
    }
}

/// `1/2 + 1/N`.
pub fn guess_bound(n: usize) -> f64 {
    0.5 + 1.0 / n as f64
}

/// Passes when `success_both <= 1/2 + 1/N + 3·std_error`.
pub fn bound_audit(stats: &AttackStats, n: usize) -> AuditVerdict {
    let bound = guess_bound(n);
    let mut h = Sha256::new();
    h.update(format!("{n},{},{},{},{}", stats.trials, stats.both, stats.single, stats.stored));
    AuditVerdict {
        bound,
        observed: stats.success_both,
        std_error: stats.std_error,
        pass: stats.success_both <= bound + 3.0 * stats.std_error,
        digest: hex::encode(&h.finalize()[..8]),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AttackKind {
    /// Superdense coding with the indices leaked early.
    Sdc,
    SdcBlind,
    Subset,
    Delay,
    Honest,
}

impl AttackKind {
    pub const ALL: [AttackKind; 5] =
        [AttackKind::Sdc, AttackKind::SdcBlind, AttackKind::Subset, AttackKind::Delay, AttackKind::Honest];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::Sdc => "sdc",
            AttackKind::SdcBlind => "sdc_blind",
            AttackKind::Subset => "subset",
            AttackKind::Delay => "delay",
            AttackKind::Honest => "honest",
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            AttackKind::Subset => Variant::Bqsm2Msg,
            _ => Variant::Nqsm2Msg,
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown attack '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackConfig {
    pub attack: AttackKind,
    pub n: usize,
    pub m: usize,
    pub rate: f64,
    pub tau_ticks: u64,
    pub trials: usize,
    pub seed: u64,
    pub y: bool,
}

/// One row of the attack CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackReport {
    pub config: AttackConfig,
    pub stats: AttackStats,
    pub verdict: AuditVerdict,
}

pub const ATTACK_CSV_HEADER: &str = "attack,variant,N,M,r,tau,trials,success_both,success_single,std_err,bound,verdict";

impl AttackReport {
    pub fn csv_row(&self) -> String {
        let c = &self.config;
        format!(
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
            c.attack,
            c.attack.variant(),
            c.n,
            c.m,
            c.rate,
            c.tau_ticks,
            self.stats.trials,
            self.stats.success_both,
            self.stats.success_any_single,
            self.stats.std_error,
            self.verdict.bound,
            if self.verdict.pass { "pass" } else { "fail" }
        )
    }
}

pub fn run_attack(config: &AttackConfig) -> Result<AttackReport> {
    let c = config;
    let stats = match c.attack {
        AttackKind::Sdc => sdc_known_indices_attack(c.n, c.trials, c.seed)?,
        AttackKind::SdcBlind => sdc_blind_attack(c.n, c.trials, c.seed)?,
        AttackKind::Subset => bqsm_subset_attack(c.n, c.m, c.y, c.trials, c.seed)?,
        AttackKind::Delay => nqsm_delay_attack(c.n, c.rate, c.tau_ticks, c.trials, c.seed)?,
        AttackKind::Honest => honest_receiver_attack(c.n, c.y, c.trials, c.seed)?,
    };
    let verdict = bound_audit(&stats, c.n);
    Ok(AttackReport { config: *config, stats, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::prepare_register;
    use crate::rng::rng_from_seed;

    #[test]
    fn sdc_recovers_both_bits_exhaustively() {
        let mut rng = rng_from_seed(1);
        for (k, l) in [(1, 2), (1, 4), (2, 3), (3, 4)] {
            for (x0, x1) in [(false, false), (false, true), (true, false), (true, true)] {
                let reg = prepare_register(4, k, l, x0, x1, RegisterMode::Sampled, &mut rng).unwrap();
                assert_eq!(sdc_attack(&reg, k, l, &mut rng).unwrap(), (x0, x1));
                let exact = prepare_register(4, k, l, x0, x1, RegisterMode::Exact, &mut rng).unwrap();
                assert!((sdc_success_probability(&exact, k, l, x0, x1).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_site_sdc_always_wins() {
        let s = sdc_known_indices_attack(2, 200, 3).unwrap();
        assert_eq!(s.both, 200);
        let blind = sdc_blind_attack(2, 200, 3).unwrap();
        assert_eq!(blind.both, 200);
    }

    #[test]
    fn delay_exact_matches_closed_form() {
        for p in [0.0, 0.3, 0.5, 1.0] {
            let exact = delay_attack_exact_success(3, p).unwrap();
            assert!((exact - delay_attack_closed_form(p)).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let a = nqsm_delay_attack(4, 0.8, 3, 500, 17).unwrap();
        let b = nqsm_delay_attack(4, 0.8, 3, 500, 17).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn audit_flags_excess() {
        let stats = AttackStats::from_counts(1000, 1000, 1000, 0);
        assert!(!bound_audit(&stats, 4).pass);
        assert!(bound_audit(&stats, 4).into_result().is_err());
        let ok = AttackStats::from_counts(1000, 500, 1000, 0);
        assert!(bound_audit(&ok, 4).pass);
    }

    #[test]
    fn subset_rejects_oversized_memory() {
        assert!(bqsm_subset_attack(4, 5, true, 10, 0).is_err());
    }
}
