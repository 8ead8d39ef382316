//! One-shot semi-honest two-party computation.
//!
//! The garbler (circuit party 1) sends a single message holding the garbled
//! circuit, its own active input labels, the sender side of one bit-OT per
//! evaluator input wire and label bit, and the output map. The evaluator
//! (party 2) runs every OT receiver with its input bit as the choice,
//! reassembles its active labels bit by bit, evaluates and decodes. Nothing
//! flows back to the garbler.

use std::fmt;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gc::{self, BooleanCircuit, GarbledCircuit, Garbling, OutputMap, Reader, WireLabel};
use crate::protocol::{basis_for_choice, decode_output, ProtocolParams, Variant};
use crate::qsim::{prepare_register, ComplexMatrix, DensityMatrix, QuantumRegister, Representation, StateVector, C64};
use crate::rng::derive_rng;
use crate::spectra::IndexEncodingSet;
use crate::tlp::{self, HashMeter, Puzzle, PuzzleSolution};

pub const MESSAGE_MAGIC: &[u8; 4] = b"Q1SM";
pub const MESSAGE_VERSION: u32 = 1;

/// How the evaluator's labels are transferred.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OtBackend {
    /// Ideal bit-OT: the payload carries both bits and the receiver's
    /// decoder reads only the chosen one.
    Ideal,
    /// Simulated quantum OT with one time-lock puzzle covering every
    /// instance.
    QuantumSim(ProtocolParams),
}

impl OtBackend {
    pub fn quantum(params: ProtocolParams) -> Result<Self> {
        if params.variant != Variant::OneShotTlp {
            return Err(Error::Validation(format!(
                "quantum OT backend needs variant oneshot_tlp, got {}",
                params.variant
            )));
        }
        params.validate()?;
        Ok(Self::QuantumSim(params))
    }

    pub fn name(&self) -> &'static str {
        match self {
            OtBackend::Ideal => "ideal",
            OtBackend::QuantumSim(_) => "quantum_sim",
        }
    }
}

/// Sender side of every bit-OT, wire-major then label-bit order.
#[derive(Clone, Debug, PartialEq)]
pub enum OtPayloads {
    Ideal(Vec<(bool, bool)>),
    Quantum { registers: Vec<QuantumRegister>, puzzle: Puzzle, lambda: u32 },
}

impl OtPayloads {
    pub fn len(&self) -> usize {
        match self {
            OtPayloads::Ideal(p) => p.len(),
            OtPayloads::Quantum { registers, .. } => registers.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn kind(&self) -> &'static str {
        match self {
            OtPayloads::Ideal(_) => "ideal",
            OtPayloads::Quantum { .. } => "quantum_sim",
        }
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            OtPayloads::Ideal(pairs) => {
                out.push(0);
                out.extend_from_slice(&(pairs.len() as u64).to_be_bytes());
                out.extend(pairs.iter().map(|&(x0, x1)| ((x0 as u8) << 1) | x1 as u8));
            }
            OtPayloads::Quantum { registers, puzzle, lambda } => {
                out.push(1);
                out.extend_from_slice(&(registers.len() as u64).to_be_bytes());
                out.extend_from_slice(&lambda.to_be_bytes());
                put_section(&mut out, &puzzle.to_bytes());
                for r in registers {
                    put_section(&mut out, &register_to_bytes(r));
                }
            }
        }
        out
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let kind = r.take(1)?[0];
        let count = r.u64()? as usize;
        let out = match kind {
            0 => {
                let raw = r.take(count)?;
                if let Some(b) = raw.iter().find(|&&b| b > 3) {
                    return Err(Error::Decode(format!("bad ideal OT payload byte {b:#04x}")));
                }
                OtPayloads::Ideal(raw.iter().map(|&b| (b & 2 != 0, b & 1 != 0)).collect())
            }
            1 => {
                let lambda = r.u32()?;
                let puzzle = Puzzle::from_bytes(take_section(&mut r)?)?;
                let registers =
                    (0..count).map(|_| register_from_bytes(take_section(&mut r)?)).collect::<Result<_>>()?;
                OtPayloads::Quantum { registers, puzzle, lambda }
            }
            k => return Err(Error::Decode(format!("unknown OT payload kind {k}"))),
        };
        r.finish()?;
        Ok(out)
    }
}

/// The only message of a compiled run.
#[derive(Clone, Debug, PartialEq)]
pub struct OneShotMessage {
    pub garbled: GarbledCircuit,
    pub garbler_labels: Vec<WireLabel>,
    pub ot: OtPayloads,
    pub output_map: OutputMap,
}

impl OneShotMessage {
    /// Magic, version, then the four sections in fixed order, each prefixed
    /// by its length as a big-endian `u64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MESSAGE_MAGIC);
        out.extend_from_slice(&MESSAGE_VERSION.to_be_bytes());
        put_section(&mut out, &self.garbled.to_bytes());
        let mut labels = Vec::new();
        let width = self.garbler_labels.first().map_or(0, |l| l.bytes().len());
        labels.extend_from_slice(&(self.garbler_labels.len() as u32).to_be_bytes());
        labels.extend_from_slice(&(width as u32).to_be_bytes());
        for l in &self.garbler_labels {
            labels.extend_from_slice(l.bytes());
        }
        put_section(&mut out, &labels);
        put_section(&mut out, &self.ot.to_bytes());
        put_section(&mut out, &self.output_map.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MESSAGE_MAGIC {
            return Err(Error::Decode("not a one-shot message".into()));
        }
        let version = r.u32()?;
        if version != MESSAGE_VERSION {
            return Err(Error::Decode(format!("unsupported message version {version}")));
        }
        let garbled = GarbledCircuit::from_bytes(take_section(&mut r)?)?;
        let mut lr = Reader::new(take_section(&mut r)?);
        let count = lr.u32()? as usize;
        let width = lr.u32()? as usize;
        let garbler_labels =
            (0..count).map(|_| Ok(WireLabel::from_bytes(lr.take(width)?.to_vec()))).collect::<Result<_>>()?;
        lr.finish()?;
        let ot = OtPayloads::from_bytes(take_section(&mut r)?)?;
        let output_map = OutputMap::from_bytes(take_section(&mut r)?)?;
        r.finish()?;
        Ok(Self { garbled, garbler_labels, ot, output_map })
    }

    pub fn digest(&self) -> [u8; 8] {
        Sha256::digest(self.to_bytes())[..8].try_into().expect("8 bytes")
    }
}

fn put_section(out: &mut Vec<u8>, section: &[u8]) {
    out.extend_from_slice(&(section.len() as u64).to_be_bytes());
    out.extend_from_slice(section);
}

fn take_section<'a>(r: &mut Reader<'a>) -> Result<&'a [u8]> {
    let len = usize::try_from(r.u64()?).map_err(|_| Error::Decode("section too long".into()))?;
    r.take(len)
}

/// Mode byte, site count, then amplitudes (pure) or matrix entries (mixed)
/// as big-endian `f64` pairs.
fn register_to_bytes(register: &QuantumRegister) -> Vec<u8> {
    let (mode, entries) = match register.representation() {
        Representation::Pure(s) => (0u8, s.amplitudes()),
        Representation::Mixed(r) => (1u8, r.matrix().entries()),
    };
    let mut out = Vec::with_capacity(5 + entries.len() * 16);
    out.push(mode);
    out.extend_from_slice(&(register.n_sites() as u32).to_be_bytes());
    for z in entries {
        out.extend_from_slice(&z.re.to_be_bytes());
        out.extend_from_slice(&z.im.to_be_bytes());
    }
    out
}

fn register_from_bytes(bytes: &[u8]) -> Result<QuantumRegister> {
    let mut r = Reader::new(bytes);
    let mode = r.take(1)?[0];
    let n = r.u32()? as usize;
    if !(2..=crate::qsim::MAX_SAMPLED_QUBITS).contains(&n) {
        return Err(Error::Decode(format!("register of {n} sites")));
    }
    let dim = 1usize << n;
    let count = if mode == 0 { dim } else { dim * dim };
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let re = f64::from_be_bytes(r.take(8)?.try_into().expect("8 bytes"));
        let im = f64::from_be_bytes(r.take(8)?.try_into().expect("8 bytes"));
        entries.push(C64::new(re, im));
    }
    r.finish()?;
    match mode {
        0 => QuantumRegister::from_state(StateVector::from_amplitudes(n, entries)?),
        1 => QuantumRegister::from_density(DensityMatrix::from_matrix(n, ComplexMatrix::new(dim, dim, entries)?)?),
        m => Err(Error::Decode(format!("unknown register mode {m}"))),
    }
}

fn check_width(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Validation(format!("{what} has {got} bits, circuit expects {want}")));
    }
    Ok(())
}

/// Garbles `circuit`, selects the garbler's active labels and builds one
/// bit-OT sender message per evaluator input wire and label bit. Returns
/// the garbler's secrets alongside the message.
pub fn garbler_compile<R: Rng + ?Sized>(
    circuit: &BooleanCircuit,
    garbler_input: &[bool],
    backend: &OtBackend,
    label_bits: usize,
    rng: &mut R,
) -> Result<(OneShotMessage, Garbling)> {
    let [w_g, w_e] = circuit.input_widths();
    check_width("garbler input", garbler_input.len(), w_g)?;
    let garbling = gc::garble(circuit, label_bits, rng)?;
    let garbler_labels = garbling.inputs.encode(0, garbler_input);
    let mut pairs = Vec::with_capacity(w_e * label_bits);
    for wire in w_g..w_g + w_e {
        let [l0, l1] = garbling.inputs.pair(wire);
        pairs.extend((0..label_bits).map(|j| (l0.bit(j), l1.bit(j))));
    }
    let ot = match backend {
        OtBackend::Ideal => OtPayloads::Ideal(pairs),
        OtBackend::QuantumSim(params) => quantum_ot_send(params, &pairs, rng)?,
    };
    let message = OneShotMessage {
        garbled: garbling.circuit.clone(),
        garbler_labels,
        ot,
        output_map: garbling.output_map.clone(),
    };
    Ok((message, garbling))
}

fn quantum_ot_send<R: Rng + ?Sized>(
    params: &ProtocolParams,
    pairs: &[(bool, bool)],
    rng: &mut R,
) -> Result<OtPayloads> {
    params.validate()?;
    let set = IndexEncodingSet::new(params.n)?;
    let mut registers = Vec::with_capacity(pairs.len());
    let mut solutions = Vec::with_capacity(pairs.len());
    for &(x0, x1) in pairs {
        let (k, l) = set.sample(rng);
        registers.push(prepare_register(params.n, k, l, x0, x1, params.mode, rng)?);
        solutions.push(PuzzleSolution::random(k as u32, l as u32, params.lambda, rng)?);
    }
    let puzzle = tlp::puzzle_gen_batch(params.puzzle_tau(), &solutions, rng, &mut HashMeter::default())?;
    Ok(OtPayloads::Quantum { registers, puzzle, lambda: params.lambda })
}

/// What the evaluator learns.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluatorOutput {
    pub output: Vec<bool>,
    /// Reassembled active labels of the evaluator's input wires.
    pub input_labels: Vec<WireLabel>,
    /// Chain hashes spent opening the puzzle (zero for the ideal backend).
    pub puzzle_hashes: u64,
}

/// Runs every OT receiver with the wire's input bit as choice, reassembles
/// the labels, evaluates and decodes.
pub fn evaluator_execute<R: Rng + ?Sized>(
    msg: &OneShotMessage,
    circuit: &BooleanCircuit,
    evaluator_input: &[bool],
    backend: &OtBackend,
    rng: &mut R,
) -> Result<EvaluatorOutput> {
    let [w_g, w_e] = circuit.input_widths();
    check_width("evaluator input", evaluator_input.len(), w_e)?;
    check_width("garbler label list", msg.garbler_labels.len(), w_g)?;
    if msg.ot.kind() != backend.name() {
        return Err(Error::Validation(format!(
            "message carries {} OT payloads, backend is {}",
            msg.ot.kind(),
            backend.name()
        )));
    }
    let label_bits = msg.garbled.label_bits();
    let expected = w_e * label_bits;
    if msg.ot.len() != expected {
        return Err(Error::Corruption(format!("{} OT payloads, expected {expected}", msg.ot.len())));
    }
    let choices: Vec<bool> = evaluator_input.iter().flat_map(|&y| std::iter::repeat_n(y, label_bits)).collect();
    let (bits, puzzle_hashes) = match &msg.ot {
        OtPayloads::Ideal(pairs) => {
            (pairs.iter().zip(&choices).map(|(&(x0, x1), &y)| if y { x1 } else { x0 }).collect(), 0)
        }
        OtPayloads::Quantum { registers, puzzle, lambda } => {
            quantum_ot_receive(registers, puzzle, *lambda, &choices, rng)?
        }
    };
    let input_labels: Vec<WireLabel> = bits.chunks(label_bits.max(1)).map(WireLabel::from_bits).collect();
    let mut active = msg.garbler_labels.clone();
    active.extend(input_labels.iter().cloned());
    let out_labels = gc::evaluate(&msg.garbled, circuit, &active)?;
    let output = gc::decode(&out_labels, &msg.output_map)?;
    Ok(EvaluatorOutput { output, input_labels, puzzle_hashes })
}

fn quantum_ot_receive<R: Rng + ?Sized>(
    registers: &[QuantumRegister],
    puzzle: &Puzzle,
    lambda: u32,
    choices: &[bool],
    rng: &mut R,
) -> Result<(Vec<bool>, u64)> {
    // Read every register on arrival; only classical bits are kept.
    let mut readouts = Vec::with_capacity(registers.len());
    for (reg, &y) in registers.iter().zip(choices) {
        let mut reg = reg.clone();
        let basis = basis_for_choice(y);
        let bits = (1..=reg.n_sites()).map(|s| reg.measure(s, basis, rng)).collect::<Result<Vec<_>>>()?;
        readouts.push(bits);
    }
    let mut meter = HashMeter::default();
    let solutions = tlp::puzzle_sol_batch(puzzle, lambda, &mut meter)?;
    if solutions.len() != registers.len() {
        return Err(Error::Corruption(format!(
            "puzzle hides {} index pairs for {} registers",
            solutions.len(),
            registers.len()
        )));
    }
    let bits =
        readouts.iter().zip(&solutions).map(|(m, s)| decode_output(m, m.len(), s.k, s.l)).collect::<Result<_>>()?;
    Ok((bits, meter.chain))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Garbler,
    Evaluator,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Garbler => "garbler",
            Role::Evaluator => "evaluator",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RecordKind {
    Send { to: Role, label: String, bytes: usize, digest: [u8; 8] },
    Local(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordEvent {
    pub tick: u64,
    pub party: Role,
    pub kind: RecordKind,
}

impl fmt::Display for RecordEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RecordKind::Send { to, label, bytes, digest } => {
                write!(f, "{},{},send:{label}->{to}:{bytes}B,{}", self.tick, self.party, hex::encode(digest))
            }
            RecordKind::Local(what) => write!(f, "{},{},{what},", self.tick, self.party),
        }
    }
}

/// Event log of a two-party run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    events: Vec<RecordEvent>,
}

impl RunRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[RecordEvent] {
        &self.events
    }

    pub fn push_send(&mut self, tick: u64, from: Role, to: Role, label: &str, payload: &[u8]) {
        let digest = Sha256::digest(payload)[..8].try_into().expect("8 bytes");
        self.events.push(RecordEvent {
            tick,
            party: from,
            kind: RecordKind::Send { to, label: label.to_string(), bytes: payload.len(), digest },
        });
    }

    pub fn push_local(&mut self, tick: u64, party: Role, what: impl Into<String>) {
        self.events.push(RecordEvent { tick, party, kind: RecordKind::Local(what.into()) });
    }

    /// `(from, to)` of every message event.
    pub fn messages(&self) -> Vec<(Role, Role)> {
        self.events
            .iter()
            .filter_map(|e| match &e.kind {
                RecordKind::Send { to, .. } => Some((e.party, *to)),
                RecordKind::Local(_) => None,
            })
            .collect()
    }

    pub fn to_log(&self) -> String {
        let mut out = String::from("tick,party,event,digest\n");
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

/// Passes iff the record holds exactly one message, garbler to evaluator.
pub fn transcript_audit(record: &RunRecord) -> Result<()> {
    let messages = record.messages();
    if messages == [(Role::Garbler, Role::Evaluator)] {
        return Ok(());
    }
    Err(Error::Audit(format!(
        "expected exactly one garbler->evaluator message, found {}:\n{}",
        messages.len(),
        record.to_log()
    )))
}

/// A finished compiled run.
#[derive(Clone, Debug)]
pub struct TwoPartyRun {
    pub output: Vec<bool>,
    pub message_bytes: usize,
    pub ot_payloads: usize,
    pub record: RunRecord,
}

/// Compiled run with party randomness derived from `seed`. The message
/// crosses the channel as bytes.
pub fn run_2pc(
    circuit: &BooleanCircuit,
    garbler_input: &[bool],
    evaluator_input: &[bool],
    backend: &OtBackend,
    label_bits: usize,
    seed: u64,
) -> Result<TwoPartyRun> {
    let mut record = RunRecord::new();
    let mut g_rng = derive_rng(seed, "garbler", 0);
    let (msg, _) = garbler_compile(circuit, garbler_input, backend, label_bits, &mut g_rng)?;
    record.push_local(0, Role::Garbler, format!("garble:{}_gates", circuit.gates().len()));
    let wire = msg.to_bytes();
    record.push_send(0, Role::Garbler, Role::Evaluator, "oneshot", &wire);
    let received = OneShotMessage::from_bytes(&wire)?;
    let mut e_rng = derive_rng(seed, "evaluator", 0);
    let out = evaluator_execute(&received, circuit, evaluator_input, backend, &mut e_rng)?;
    let done = match backend {
        OtBackend::Ideal => 0,
        OtBackend::QuantumSim(p) => {
            record.push_local(0, Role::Evaluator, format!("measure:{}_registers", received.ot.len()));
            record.push_local(p.tau_ticks, Role::Evaluator, format!("puzzle_solve:{}_hashes", out.puzzle_hashes));
            p.tau_ticks
        }
    };
    record.push_local(done, Role::Evaluator, "evaluate");
    record.push_local(done, Role::Evaluator, format!("output:{}", bits_to_string(&out.output)));
    Ok(TwoPartyRun { output: out.output, message_bytes: wire.len(), ot_payloads: received.ot.len(), record })
}

/// Textbook interactive Yao with a two-message OT: the evaluator's OT
/// request precedes the garbler's reply. Same output, but the record shows
/// two messages in opposite directions.
pub fn run_interactive_baseline(
    circuit: &BooleanCircuit,
    garbler_input: &[bool],
    evaluator_input: &[bool],
    label_bits: usize,
    seed: u64,
) -> Result<TwoPartyRun> {
    let [_, w_e] = circuit.input_widths();
    check_width("evaluator input", evaluator_input.len(), w_e)?;
    let mut record = RunRecord::new();
    let request: Vec<u8> = evaluator_input.iter().map(|&b| b as u8).collect();
    record.push_send(0, Role::Evaluator, Role::Garbler, "ot_request", &request);
    let mut g_rng = derive_rng(seed, "garbler", 0);
    let (msg, _) = garbler_compile(circuit, garbler_input, &OtBackend::Ideal, label_bits, &mut g_rng)?;
    let wire = msg.to_bytes();
    record.push_send(1, Role::Garbler, Role::Evaluator, "gc_and_ot_reply", &wire);
    let mut e_rng = derive_rng(seed, "evaluator", 0);
    let out = evaluator_execute(&msg, circuit, evaluator_input, &OtBackend::Ideal, &mut e_rng)?;
    record.push_local(1, Role::Evaluator, format!("output:{}", bits_to_string(&out.output)));
    Ok(TwoPartyRun { output: out.output, message_bytes: request.len() + wire.len(), ot_payloads: msg.ot.len(), record })
}

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
