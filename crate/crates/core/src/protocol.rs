//! The three oblivious-transfer protocols as tick-driven party state
//! machines over an in-process channel.
//!
//! * `nqsm_2msg`: register at tick 0, indices at tick `tau`.
//! * `bqsm_2msg`: register and indices at tick 0.
//! * `oneshot_tlp`: one message carrying the register and a time-lock
//!   puzzle hiding the indices.
//!
//! The receiver reads every site on arrival, in the diagonal basis for
//! `y = 0` and the computational basis for `y = 1`, then outputs
//! `m_k ⊕ m_l`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qsim::{
    check_pair, prepare_register, MeasurementBasis, QuantumRegister, RegisterMode, Representation, MAX_EXACT_QUBITS,
    MAX_SAMPLED_QUBITS,
};
use crate::rng::derive_rng;
use crate::spectra::IndexEncodingSet;
use crate::tlp::{self, HashMeter, Puzzle, PuzzleSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Nqsm2Msg,
    Bqsm2Msg,
    OneShotTlp,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Nqsm2Msg, Variant::Bqsm2Msg, Variant::OneShotTlp];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Nqsm2Msg => "nqsm_2msg",
            Variant::Bqsm2Msg => "bqsm_2msg",
            Variant::OneShotTlp => "oneshot_tlp",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown protocol variant '{s}'")))
    }
}

/// Protocol parameters. `tau_ticks` is the wait for `nqsm_2msg` and the
/// puzzle delay for `oneshot_tlp`; the puzzle walks
/// `tau_ticks · hashes_per_tick` chain steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolParams {
    pub n: usize,
    pub sigma: u32,
    pub tau_ticks: u64,
    pub variant: Variant,
    pub lambda: u32,
    pub hashes_per_tick: u64,
    pub mode: RegisterMode,
}

impl ProtocolParams {
    pub fn new(variant: Variant, n: usize) -> Self {
        Self {
            n,
            sigma: usize::BITS - n.max(1).leading_zeros() - 1,
            tau_ticks: if variant == Variant::Bqsm2Msg { 0 } else { 4 },
            variant,
            lambda: 32,
            hashes_per_tick: 16,
            mode: RegisterMode::Sampled,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation(format!("N = {} must be at least 2", self.n)));
        }
        let cap = match self.mode {
            RegisterMode::Sampled => MAX_SAMPLED_QUBITS,
            RegisterMode::Exact => MAX_EXACT_QUBITS,
        };
        if self.n > cap {
            return Err(Error::Capacity { what: "protocol register size", requested: self.n, cap });
        }
        match self.variant {
            Variant::Nqsm2Msg if self.tau_ticks == 0 => Err(Error::Validation("nqsm_2msg needs tau_ticks >= 1".into())),
            Variant::OneShotTlp if self.puzzle_tau() == 0 => {
                Err(Error::Validation("oneshot_tlp needs tau_ticks >= 1 and hashes_per_tick >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Chain length of the one-shot puzzle.
    pub fn puzzle_tau(&self) -> u64 {
        self.tau_ticks.saturating_mul(self.hashes_per_tick)
    }

    /// Ticks between the register and the indices becoming usable.
    pub fn index_delay(&self) -> u64 {
        match self.variant {
            Variant::Bqsm2Msg => 0,
            _ => self.tau_ticks,
        }
    }
}

/// Register size `2^sigma` for which the guessing bound is `1/2 + 2^-sigma`.
pub fn honest_register_size(sigma: u32) -> Result<usize> {
    let n = 1usize.checked_shl(sigma).filter(|_| sigma < usize::BITS).ok_or(Error::Capacity {
        what: "security-level register size",
        requested: usize::MAX,
        cap: MAX_SAMPLED_QUBITS,
    })?;
    if n > MAX_SAMPLED_QUBITS {
        return Err(Error::Capacity { what: "security-level register size", requested: n, cap: MAX_SAMPLED_QUBITS });
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SenderInputs {
    pub x0: bool,
    pub x1: bool,
}

impl SenderInputs {
    pub fn new(x0: bool, x1: bool) -> Self {
        Self { x0, x1 }
    }

    pub fn chosen(&self, y: bool) -> bool {
        if y {
            self.x1
        } else {
            self.x0
        }
    }
}

/// Honest receiver basis for choice bit `y`.
pub fn basis_for_choice(y: bool) -> MeasurementBasis {
    if y {
        MeasurementBasis::Computational
    } else {
        MeasurementBasis::Diagonal
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegisterMessage {
    pub register: QuantumRegister,
    pub send_tick: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexMessage {
    pub k: u32,
    pub l: u32,
    pub send_tick: u64,
}

impl IndexMessage {
    pub const ENCODED_LEN: usize = 16;

    pub fn to_bytes(&self) -> [u8; Self::ENCODED_LEN] {
        let mut out = [0u8; Self::ENCODED_LEN];
        out[0..4].copy_from_slice(&self.k.to_be_bytes());
        out[4..8].copy_from_slice(&self.l.to_be_bytes());
        out[8..16].copy_from_slice(&self.send_tick.to_be_bytes());
        out
    }

    /// Decodes without range checks; the receiver checks against `N`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(Error::Decode(format!("index message has {} bytes", bytes.len())));
        }
        Ok(Self {
            k: u32::from_be_bytes(bytes[0..4].try_into().expect("4 bytes")),
            l: u32::from_be_bytes(bytes[4..8].try_into().expect("4 bytes")),
            send_tick: u64::from_be_bytes(bytes[8..16].try_into().expect("8 bytes")),
        })
    }
}

/// Register and puzzle sent together as the only message.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleMessage {
    pub register: QuantumRegister,
    pub puzzle: Puzzle,
    pub lambda: u32,
    pub send_tick: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SenderMessage {
    Register(RegisterMessage),
    Index(IndexMessage),
    Bundle(BundleMessage),
}

impl SenderMessage {
    pub fn send_tick(&self) -> u64 {
        match self {
            SenderMessage::Register(m) => m.send_tick,
            SenderMessage::Index(m) => m.send_tick,
            SenderMessage::Bundle(m) => m.send_tick,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SenderMessage::Register(_) => "register",
            SenderMessage::Index(_) => "index",
            SenderMessage::Bundle(_) => "bundle",
        }
    }

    pub fn digest(&self) -> [u8; 8] {
        let mut h = Sha256::new();
        h.update(self.kind().as_bytes());
        match self {
            SenderMessage::Register(m) => h.update(register_snapshot(&m.register)),
            SenderMessage::Index(m) => h.update(m.to_bytes()),
            SenderMessage::Bundle(m) => {
                h.update(register_snapshot(&m.register));
                h.update(m.puzzle.to_bytes());
            }
        }
        short_digest(h)
    }
}

fn short_digest(h: Sha256) -> [u8; 8] {
    h.finalize()[..8].try_into().expect("8 bytes")
}

/// Debug snapshot: the amplitudes (pure) or matrix entries (mixed) as
/// big-endian `f64` pairs.
pub fn register_snapshot(register: &QuantumRegister) -> Vec<u8> {
    let entries = match register.representation() {
        Representation::Pure(s) => s.amplitudes().to_vec(),
        Representation::Mixed(r) => r.matrix().entries().to_vec(),
    };
    let mut out = Vec::with_capacity(entries.len() * 16 + 1);
    out.push(register.is_exact() as u8);
    for z in entries {
        out.extend_from_slice(&z.re.to_be_bytes());
        out.extend_from_slice(&z.im.to_be_bytes());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    Sender,
    Receiver,
}

impl Party {
    pub fn name(self) -> &'static str {
        match self {
            Party::Sender => "sender",
            Party::Receiver => "receiver",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    SenderToReceiver,
    ReceiverToSender,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    Send { direction: Direction, message: &'static str },
    Receive { direction: Direction, message: &'static str },
    Measure { site: usize, basis: MeasurementBasis },
    Wait { ticks: u64 },
    Decoherence { ticks: u64 },
    PuzzleSolve { hashes: u64 },
    Output { bit: bool },
    Abort { reason: String },
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = |d: &Direction| match d {
            Direction::SenderToReceiver => "s2r",
            Direction::ReceiverToSender => "r2s",
        };
        match self {
            EventKind::Send { direction, message } => write!(f, "send:{}:{message}", dir(direction)),
            EventKind::Receive { direction, message } => write!(f, "recv:{}:{message}", dir(direction)),
            EventKind::Measure { site, basis } => write!(f, "measure:{site}:{}", basis.name()),
            EventKind::Wait { ticks } => write!(f, "wait:{ticks}"),
            EventKind::Decoherence { ticks } => write!(f, "decohere:{ticks}"),
            EventKind::PuzzleSolve { hashes } => write!(f, "solve:{hashes}"),
            EventKind::Output { bit } => write!(f, "output:{}", *bit as u8),
            EventKind::Abort { reason } => write!(f, "abort:{}", reason.replace(',', ";")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub tick: u64,
    pub party: Party,
    pub kind: EventKind,
    pub digest: Option<[u8; 8]>,
}

/// Ordered record of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProtocolTranscript {
    events: Vec<Event>,
}

impl ProtocolTranscript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tick: u64, party: Party, kind: EventKind, digest: Option<[u8; 8]>) {
        self.events.push(Event { tick, party, kind, digest });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Ticks of every `Send` in `direction`.
    pub fn send_ticks(&self, direction: Direction) -> Vec<u64> {
        self.events
            .iter()
            .filter(|e| matches!(&e.kind, EventKind::Send { direction: d, .. } if *d == direction))
            .map(|e| e.tick)
            .collect()
    }

    pub fn measurements(&self, party: Party) -> Vec<(u64, usize)> {
        self.events
            .iter()
            .filter(|e| e.party == party)
            .filter_map(|e| match e.kind {
                EventKind::Measure { site, .. } => Some((e.tick, site)),
                _ => None,
            })
            .collect()
    }

    /// Checks the message shape of `variant`.
    pub fn check_shape(&self, variant: Variant, tau_ticks: u64) -> Result<()> {
        let back = self.send_ticks(Direction::ReceiverToSender);
        if !back.is_empty() {
            return Err(Error::Audit(format!("{} receiver-to-sender messages", back.len())));
        }
        let fwd = self.send_ticks(Direction::SenderToReceiver);
        let expected = if variant == Variant::OneShotTlp { 1 } else { 2 };
        if fwd.len() != expected {
            return Err(Error::Audit(format!("{variant}: expected {expected} sender messages, found {}", fwd.len())));
        }
        if variant == Variant::Nqsm2Msg && fwd[1] - fwd[0] < tau_ticks {
            return Err(Error::Audit(format!("messages {} ticks apart, wait is {tau_ticks}", fwd[1] - fwd[0])));
        }
        Ok(())
    }

    /// `tick,party,event,digest` lines with a header.
    pub fn to_log(&self) -> String {
        let mut out = String::from("tick,party,event,digest\n");
        for e in &self.events {
            let digest = e.digest.map(hex::encode).unwrap_or_else(|| "-".into());
            out.push_str(&format!("{},{},{},{}\n", e.tick, e.party.name(), e.kind, digest));
        }
        out
    }

    /// Events the sender can see: its own and anything sent back to it.
    pub fn sender_view(&self) -> Vec<String> {
        self.events
            .iter()
            .filter(|e| {
                e.party == Party::Sender
                    || matches!(e.kind, EventKind::Send { direction: Direction::ReceiverToSender, .. })
            })
            .map(|e| format!("{},{},{}", e.tick, e.kind, e.digest.map(hex::encode).unwrap_or_default()))
            .collect()
    }
}

/// The sender's messages and its secret pair.
#[derive(Clone, Debug)]
pub struct SenderOutput {
    pub messages: Vec<SenderMessage>,
    pub pair: (usize, usize),
}

/// Samples `(k, l)` uniformly from `E` and emits the variant's messages.
pub fn sender_run<R: Rng + ?Sized>(params: &ProtocolParams, inputs: SenderInputs, rng: &mut R) -> Result<SenderOutput> {
    params.validate()?;
    let pair = IndexEncodingSet::new(params.n)?.sample(rng);
    sender_run_with_pair(params, inputs, pair, rng)
}

/// [`sender_run`] with the pair fixed, for exhaustive checks.
pub fn sender_run_with_pair<R: Rng + ?Sized>(
    params: &ProtocolParams,
    inputs: SenderInputs,
    pair: (usize, usize),
    rng: &mut R,
) -> Result<SenderOutput> {
    params.validate()?;
    let (k, l) = pair;
    check_pair(params.n, k, l)?;
    let register = prepare_register(params.n, k, l, inputs.x0, inputs.x1, params.mode, rng)?;
    let messages = match params.variant {
        Variant::Nqsm2Msg | Variant::Bqsm2Msg => vec![
            SenderMessage::Register(RegisterMessage { register, send_tick: 0 }),
            SenderMessage::Index(IndexMessage { k: k as u32, l: l as u32, send_tick: params.index_delay() }),
        ],
        Variant::OneShotTlp => {
            let s = PuzzleSolution::random(k as u32, l as u32, params.lambda, rng)?;
            let puzzle = tlp::puzzle_gen(params.puzzle_tau(), &s, rng)?;
            vec![SenderMessage::Bundle(BundleMessage { register, puzzle, lambda: params.lambda, send_tick: 0 })]
        }
    };
    Ok(SenderOutput { messages, pair })
}

#[derive(Clone, Debug, PartialEq)]
enum ReceiverState {
    AwaitRegister,
    Measured { bits: Vec<bool> },
    Done,
    Aborted,
}

/// Honest receiver. Holds only classical bits between ticks.
#[derive(Clone, Debug)]
pub struct Receiver {
    params: ProtocolParams,
    y: bool,
    state: ReceiverState,
    output: Option<bool>,
}

impl Receiver {
    pub fn new(params: ProtocolParams, y: bool) -> Self {
        Self { params, y, state: ReceiverState::AwaitRegister, output: None }
    }

    pub fn output(&self) -> Option<bool> {
        self.output
    }

    /// Handles one delivered message at `tick`; returns the output bit once
    /// known. Any error leaves the receiver aborted.
    pub fn on_message<R: Rng + ?Sized>(
        &mut self,
        msg: &SenderMessage,
        tick: u64,
        rng: &mut R,
        transcript: &mut ProtocolTranscript,
    ) -> Result<Option<bool>> {
        transcript.push(
            tick,
            Party::Receiver,
            EventKind::Receive { direction: Direction::SenderToReceiver, message: msg.kind() },
            Some(msg.digest()),
        );
        let result = self.step(msg, tick, rng, transcript);
        if let Err(e) = &result {
            self.state = ReceiverState::Aborted;
            transcript.push(tick, Party::Receiver, EventKind::Abort { reason: e.to_string() }, None);
        }
        result
    }

    fn step<R: Rng + ?Sized>(
        &mut self,
        msg: &SenderMessage,
        tick: u64,
        rng: &mut R,
        transcript: &mut ProtocolTranscript,
    ) -> Result<Option<bool>> {
        match (&self.state, msg) {
            (ReceiverState::AwaitRegister, SenderMessage::Register(m)) => {
                let bits = self.measure_all(&m.register, tick, rng, transcript)?;
                self.state = ReceiverState::Measured { bits };
                Ok(None)
            }
            (ReceiverState::Measured { bits }, SenderMessage::Index(m)) => {
                let out = decode_output(bits, self.params.n, m.k, m.l)?;
                self.finish(out, tick, transcript)
            }
            (ReceiverState::AwaitRegister, SenderMessage::Bundle(m)) => {
                let bits = self.measure_all(&m.register, tick, rng, transcript)?;
                let mut meter = HashMeter::default();
                let s = tlp::puzzle_sol_metered(&m.puzzle, m.lambda, &mut meter)
                    .map_err(|e| Error::ProtocolAbort(format!("puzzle: {e}")))?;
                let solved_at = tick + self.params.tau_ticks;
                transcript.push(solved_at, Party::Receiver, EventKind::PuzzleSolve { hashes: meter.chain }, None);
                let out = decode_output(&bits, self.params.n, s.k, s.l)?;
                self.finish(out, solved_at, transcript)
            }
            (state, msg) => Err(Error::ProtocolAbort(format!("unexpected {} message in state {state:?}", msg.kind()))),
        }
    }

    fn measure_all<R: Rng + ?Sized>(
        &self,
        register: &QuantumRegister,
        tick: u64,
        rng: &mut R,
        transcript: &mut ProtocolTranscript,
    ) -> Result<Vec<bool>> {
        if register.n_sites() != self.params.n {
            return Err(Error::ProtocolAbort(format!(
                "register has {} sites, expected {}",
                register.n_sites(),
                self.params.n
            )));
        }
        let basis = basis_for_choice(self.y);
        let mut reg = register.clone();
        let mut bits = Vec::with_capacity(self.params.n);
        for site in 1..=self.params.n {
            bits.push(reg.measure(site, basis, rng)?);
            transcript.push(tick, Party::Receiver, EventKind::Measure { site, basis }, None);
        }
        Ok(bits)
    }

    fn finish(&mut self, bit: bool, tick: u64, transcript: &mut ProtocolTranscript) -> Result<Option<bool>> {
        self.state = ReceiverState::Done;
        self.output = Some(bit);
        transcript.push(tick, Party::Receiver, EventKind::Output { bit }, None);
        Ok(Some(bit))
    }
}

/// `m_k ⊕ m_l` after checking `1 <= k < l <= n`.
pub fn decode_output(bits: &[bool], n: usize, k: u32, l: u32) -> Result<bool> {
    let (k, l) = (k as usize, l as usize);
    check_pair(n, k, l).map_err(|e| Error::ProtocolAbort(format!("malformed indices: {e}")))?;
    Ok(bits[k - 1] ^ bits[l - 1])
}

/// One complete run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub output: bool,
    pub pair: (usize, usize),
    pub transcript: ProtocolTranscript,
}

/// Delivers the sender's messages in tick order to an honest receiver.
pub fn deliver(
    params: &ProtocolParams,
    y: bool,
    sender: &SenderOutput,
    receiver_rng: &mut impl Rng,
) -> Result<(Option<bool>, ProtocolTranscript)> {
    let mut transcript = ProtocolTranscript::new();
    let mut receiver = Receiver::new(*params, y);
    let mut queue: Vec<&SenderMessage> = sender.messages.iter().collect();
    queue.sort_by_key(|m| m.send_tick());
    let mut last_tick = 0;
    for msg in queue {
        let tick = msg.send_tick();
        if tick > last_tick {
            transcript.push(last_tick, Party::Sender, EventKind::Wait { ticks: tick - last_tick }, None);
            last_tick = tick;
        }
        transcript.push(
            tick,
            Party::Sender,
            EventKind::Send { direction: Direction::SenderToReceiver, message: msg.kind() },
            Some(msg.digest()),
        );
        receiver.on_message(msg, tick, receiver_rng, &mut transcript)?;
    }
    Ok((receiver.output(), transcript))
}

/// Runs the protocol with party randomness derived from `seed`.
pub fn run_protocol(params: &ProtocolParams, x0: bool, x1: bool, y: bool, seed: u64) -> Result<RunResult> {
    let mut sender_rng = derive_rng(seed, "sender", 0);
    let sender = sender_run(params, SenderInputs::new(x0, x1), &mut sender_rng)?;
    finish_run(params, y, sender, seed)
}

/// [`run_protocol`] with the pair forced.
pub fn run_protocol_with_pair(
    params: &ProtocolParams,
    x0: bool,
    x1: bool,
    y: bool,
    pair: (usize, usize),
    seed: u64,
) -> Result<RunResult> {
    let mut sender_rng = derive_rng(seed, "sender", 0);
    let sender = sender_run_with_pair(params, SenderInputs::new(x0, x1), pair, &mut sender_rng)?;
    finish_run(params, y, sender, seed)
}

fn finish_run(params: &ProtocolParams, y: bool, sender: SenderOutput, seed: u64) -> Result<RunResult> {
    let mut receiver_rng = derive_rng(seed, "receiver", 0);
    let (output, transcript) = deliver(params, y, &sender, &mut receiver_rng)?;
    let output = output.ok_or_else(|| Error::ProtocolAbort("receiver produced no output".into()))?;
    transcript.check_shape(params.variant, params.index_delay())?;
    Ok(RunResult { output, pair: sender.pair, transcript })
}

/// Distribution of the sender's view over all pairs, keyed by the view's
/// lines joined. Uses exact registers.
pub fn sender_view_distribution(
    params: &ProtocolParams,
    inputs: SenderInputs,
    y: bool,
    seed: u64,
) -> Result<BTreeMap<String, f64>> {
    let mut exact = *params;
    exact.mode = RegisterMode::Exact;
    let set = IndexEncodingSet::new(exact.n)?;
    let weight = 1.0 / set.len() as f64;
    let mut dist = BTreeMap::new();
    for &pair in set.pairs() {
        let run = run_protocol_with_pair(&exact, inputs.x0, inputs.x1, y, pair, seed)?;
        *dist.entry(run.transcript.sender_view().join("\n")).or_insert(0.0) += weight;
    }
    Ok(dist)
}
