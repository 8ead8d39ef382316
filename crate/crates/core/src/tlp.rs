//! Weak time-lock puzzle from an iterated SHA-256 chain.
//!
//! `h_0 = seed`, `h_{i+1} = SHA-256(h_i)`. The pad is the counter-mode
//! expansion `SHA-256(h_tau ‖ i)` for 4-byte big-endian `i`, and the
//! ciphertext is the payload XOR the pad. Generation walks the same chain as
//! solving, so both cost `tau` hashes.

use std::time::{Duration, Instant};

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const PUZZLE_MAGIC: [u8; 4] = *b"QTLP";
pub const PUZZLE_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 8 + 32 + 4;

/// Counts SHA-256 invocations, split by role.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HashMeter {
    pub chain: u64,
    pub pad: u64,
}

/// `s = (k, l, r)` with `r` held as `⌈λ/8⌉` big-endian bytes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PuzzleSolution {
    pub k: u32,
    pub l: u32,
    r: Vec<u8>,
    lambda: u32,
}

pub fn randomness_width(lambda: u32) -> usize {
    lambda.div_ceil(8) as usize
}

impl PuzzleSolution {
    pub fn new(k: u32, l: u32, r: Vec<u8>, lambda: u32) -> Result<Self> {
        if k == 0 || k >= l {
            return Err(Error::Validation(format!("indices ({k}, {l}) must satisfy 1 <= k < l")));
        }
        if r.len() != randomness_width(lambda) {
            return Err(Error::Validation(format!(
                "randomness has {} bytes, lambda = {lambda} needs {}",
                r.len(),
                randomness_width(lambda)
            )));
        }
        if let Some(&top) = r.first() {
            let spare = (8 * r.len() as u32 - lambda) as u8;
            if spare > 0 && top >> (8 - spare) != 0 {
                return Err(Error::Validation(format!("randomness exceeds 2^{lambda}")));
            }
        }
        Ok(Self { k, l, r, lambda })
    }

    /// Fresh uniform `r` in `[0, 2^λ)`.
    pub fn random<R: Rng + ?Sized>(k: u32, l: u32, lambda: u32, rng: &mut R) -> Result<Self> {
        let mut r = vec![0u8; randomness_width(lambda)];
        rng.fill(r.as_mut_slice());
        if let Some(top) = r.first_mut() {
            let spare = 8 * randomness_width(lambda) as u32 - lambda;
            *top &= 0xffu8.checked_shr(spare).unwrap_or(0);
        }
        Self::new(k, l, r, lambda)
    }

    pub fn r(&self) -> &[u8] {
        &self.r
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn encoded_len(lambda: u32) -> usize {
        8 + randomness_width(lambda)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::encoded_len(self.lambda));
        out.extend_from_slice(&self.k.to_be_bytes());
        out.extend_from_slice(&self.l.to_be_bytes());
        out.extend_from_slice(&self.r);
        out
    }

    /// Inverse of [`encode`](Self::encode); index violations are integrity
    /// errors since they signal a corrupted puzzle.
    pub fn decode(bytes: &[u8], lambda: u32) -> Result<Self> {
        if bytes.len() != Self::encoded_len(lambda) {
            return Err(Error::Decode(format!(
                "solution encoding has {} bytes, expected {}",
                bytes.len(),
                Self::encoded_len(lambda)
            )));
        }
        let k = u32::from_be_bytes(bytes[0..4].try_into().expect("4 bytes"));
        let l = u32::from_be_bytes(bytes[4..8].try_into().expect("4 bytes"));
        Self::new(k, l, bytes[8..].to_vec(), lambda).map_err(|e| Error::Integrity(e.to_string()))
    }
}

/// A sealed payload: seed, chain length and ciphertext.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Puzzle {
    tau_steps: u64,
    seed: [u8; 32],
    ciphertext: Vec<u8>,
}

impl Puzzle {
    pub fn tau_steps(&self) -> u64 {
        self.tau_steps
    }

    pub fn seed(&self) -> &[u8; 32] {
        &self.seed
    }

    pub fn ciphertext(&self) -> &[u8] {
        &self.ciphertext
    }

    pub fn ciphertext_mut(&mut self) -> &mut [u8] {
        &mut self.ciphertext
    }

    /// λ of a single-solution puzzle, rounded to whole bytes.
    pub fn lambda_bits(&self) -> Option<u32> {
        self.ciphertext.len().checked_sub(8).map(|b| 8 * b as u32)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.ciphertext.len());
        out.extend_from_slice(&PUZZLE_MAGIC);
        out.push(PUZZLE_VERSION);
        out.extend_from_slice(&self.tau_steps.to_be_bytes());
        out.extend_from_slice(&self.seed);
        out.extend_from_slice(&(self.ciphertext.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Decode(format!("puzzle too short: {} bytes", bytes.len())));
        }
        if bytes[0..4] != PUZZLE_MAGIC {
            return Err(Error::Decode("bad puzzle magic".into()));
        }
        if bytes[4] != PUZZLE_VERSION {
            return Err(Error::Decode(format!("unsupported puzzle version {}", bytes[4])));
        }
        let tau_steps = u64::from_be_bytes(bytes[5..13].try_into().expect("8 bytes"));
        if tau_steps == 0 {
            return Err(Error::Decode("puzzle tau must be at least 1".into()));
        }
        let seed: [u8; 32] = bytes[13..45].try_into().expect("32 bytes");
        let len = u32::from_be_bytes(bytes[45..49].try_into().expect("4 bytes")) as usize;
        if bytes.len() - HEADER_LEN != len {
            return Err(Error::Decode(format!(
                "ciphertext length field {len} disagrees with {} trailing bytes",
                bytes.len() - HEADER_LEN
            )));
        }
        Ok(Self { tau_steps, seed, ciphertext: bytes[HEADER_LEN..].to_vec() })
    }
}

/// `h_steps` from `h_0 = seed`.
pub fn hash_chain(seed: &[u8; 32], steps: u64, meter: &mut HashMeter) -> [u8; 32] {
    let mut h = *seed;
    for _ in 0..steps {
        h = Sha256::digest(h).into();
        meter.chain += 1;
    }
    h
}

/// Counter-mode pad of `len` bytes keyed by the chain end.
pub fn expand_pad(head: &[u8; 32], len: usize, meter: &mut HashMeter) -> Vec<u8> {
    let mut pad = Vec::with_capacity(len.next_multiple_of(32));
    let mut counter = 0u32;
    while pad.len() < len {
        let mut hasher = Sha256::new();
        hasher.update(head);
        hasher.update(counter.to_be_bytes());
        pad.extend_from_slice(&hasher.finalize());
        meter.pad += 1;
        counter += 1;
    }
    pad.truncate(len);
    pad
}

fn xor_in_place(data: &mut [u8], pad: &[u8]) {
    for (d, p) in data.iter_mut().zip(pad) {
        *d ^= p;
    }
}

fn check_tau(tau: u64) -> Result<()> {
    if tau == 0 {
        return Err(Error::Validation("tau must be at least 1".into()));
    }
    Ok(())
}

/// Seals an arbitrary payload under a fresh random seed.
pub fn seal<R: Rng + ?Sized>(tau: u64, payload: &[u8], rng: &mut R, meter: &mut HashMeter) -> Result<Puzzle> {
    let mut seed = [0u8; 32];
    rng.fill(&mut seed);
    seal_with_seed(tau, seed, payload, meter)
}

pub fn seal_with_seed(tau: u64, seed: [u8; 32], payload: &[u8], meter: &mut HashMeter) -> Result<Puzzle> {
    check_tau(tau)?;
    let head = hash_chain(&seed, tau, meter);
    let mut ciphertext = payload.to_vec();
    xor_in_place(&mut ciphertext, &expand_pad(&head, payload.len(), meter));
    Ok(Puzzle { tau_steps: tau, seed, ciphertext })
}

/// Recovers the payload by walking all `tau` chain steps.
pub fn unseal(puzzle: &Puzzle, meter: &mut HashMeter) -> Vec<u8> {
    let head = hash_chain(&puzzle.seed, puzzle.tau_steps, meter);
    let mut plain = puzzle.ciphertext.clone();
    let pad = expand_pad(&head, plain.len(), meter);
    xor_in_place(&mut plain, &pad);
    plain
}

pub fn puzzle_gen<R: Rng + ?Sized>(tau: u64, s: &PuzzleSolution, rng: &mut R) -> Result<Puzzle> {
    seal(tau, &s.encode(), rng, &mut HashMeter::default())
}

pub fn puzzle_gen_metered<R: Rng + ?Sized>(
    tau: u64,
    s: &PuzzleSolution,
    rng: &mut R,
    meter: &mut HashMeter,
) -> Result<Puzzle> {
    seal(tau, &s.encode(), rng, meter)
}

pub fn puzzle_sol(z: &Puzzle, lambda: u32) -> Result<PuzzleSolution> {
    puzzle_sol_metered(z, lambda, &mut HashMeter::default())
}

pub fn puzzle_sol_metered(z: &Puzzle, lambda: u32, meter: &mut HashMeter) -> Result<PuzzleSolution> {
    PuzzleSolution::decode(&unseal(z, meter), lambda)
}

/// One puzzle hiding many solutions, concatenated in order.
pub fn puzzle_gen_batch<R: Rng + ?Sized>(
    tau: u64,
    solutions: &[PuzzleSolution],
    rng: &mut R,
    meter: &mut HashMeter,
) -> Result<Puzzle> {
    let mut payload = Vec::new();
    for s in solutions {
        payload.extend_from_slice(&s.encode());
    }
    seal(tau, &payload, rng, meter)
}

pub fn puzzle_sol_batch(z: &Puzzle, lambda: u32, meter: &mut HashMeter) -> Result<Vec<PuzzleSolution>> {
    let width = PuzzleSolution::encoded_len(lambda);
    let plain = unseal(z, meter);
    if !plain.len().is_multiple_of(width) {
        return Err(Error::Decode(format!("batch payload of {} bytes is not a multiple of {width}", plain.len())));
    }
    plain.chunks(width).map(|c| PuzzleSolution::decode(c, lambda)).collect()
}

/// Outcome of the budget-limited distinguishing game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistinguisherReport {
    pub trials: usize,
    pub correct: usize,
    /// `correct/trials - 1/2`.
    pub advantage: f64,
    pub std_error: f64,
}

/// Game: `b` uniform, `Z = gen(tau, s_b)`. The distinguisher walks the chain
/// for `min(depth_budget, tau)` steps, unmasks with the pad from wherever it
/// stopped, and answers `b'` if the result equals `s_{b'}`; otherwise it
/// flips a coin.
pub fn indistinguishability_smoke<R: Rng + ?Sized>(
    s0: &PuzzleSolution,
    s1: &PuzzleSolution,
    tau: u64,
    depth_budget: u64,
    trials: usize,
    rng: &mut R,
) -> Result<DistinguisherReport> {
    check_tau(tau)?;
    if s0.lambda != s1.lambda {
        return Err(Error::Validation("solutions must share lambda".into()));
    }
    let (e0, e1) = (s0.encode(), s1.encode());
    let mut correct = 0usize;
    for _ in 0..trials {
        let b = rng.random::<bool>();
        let z = puzzle_gen(tau, if b { s1 } else { s0 }, rng)?;
        let mut meter = HashMeter::default();
        let head = hash_chain(&z.seed, depth_budget.min(tau), &mut meter);
        let mut guess = z.ciphertext.clone();
        let pad = expand_pad(&head, guess.len(), &mut meter);
        xor_in_place(&mut guess, &pad);
        let b_guess = if guess == e1 {
            true
        } else if guess == e0 {
            false
        } else {
            rng.random::<bool>()
        };
        correct += (b_guess == b) as usize;
    }
    let p = correct as f64 / trials.max(1) as f64;
    Ok(DistinguisherReport {
        trials,
        correct,
        advantage: p - 0.5,
        std_error: (p * (1.0 - p) / trials.max(1) as f64).sqrt(),
    })
}

/// Wall time of one full solve at `tau`.
pub fn time_solve(tau: u64) -> Result<Duration> {
    let z = seal_with_seed(tau, [7u8; 32], &[0u8; 16], &mut HashMeter::default())?;
    let start = Instant::now();
    let out = unseal(&z, &mut HashMeter::default());
    std::hint::black_box(out);
    Ok(start.elapsed())
}

/// Least-squares line `y = slope·x + intercept` and its `R²`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}
