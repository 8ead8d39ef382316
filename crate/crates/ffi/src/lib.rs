//! C ABI over `qot-core`.
//!
//! Conventions:
//! - Every fallible function returns a [`QotStatus`]; on failure a message
//!   is kept per thread and read with [`qot_last_error_message`].
//! - Objects are opaque heap handles released by their `_free` function.
//!   Passing NULL to a `_free` function is a no-op.
//! - Strings returned to the caller are owned by the caller and released
//!   with [`qot_string_free`].
//! - Bit arrays are `uint8_t` arrays holding 0 or 1, least significant
//!   bit first.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use qot_core::compile2pc::{run_2pc, transcript_audit, OtBackend};
use qot_core::gc::{parse_bristol, BooleanCircuit};
use qot_core::protocol::{run_protocol, ProtocolParams, ProtocolTranscript, Variant};
use qot_core::spectra::guess_bound;
use qot_core::tlp::{self, HashMeter, Puzzle, PuzzleSolution};
use qot_core::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QotStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    ModelViolation = 4,
    Integrity = 5,
    Decode = 6,
    ProtocolAbort = 7,
    AuditFailed = 8,
    BufferTooSmall = 9,
    Io = 10,
    Panic = 11,
}

/// OT backend for [`qot_2pc_run`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QotBackend {
    Ideal = 0,
    QuantumSim = 1,
}

/// OT protocol variant.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QotVariant {
    Nqsm2Msg = 0,
    Bqsm2Msg = 1,
    OneshotTlp = 2,
}

impl From<QotVariant> for Variant {
    fn from(v: QotVariant) -> Self {
        match v {
            QotVariant::Nqsm2Msg => Variant::Nqsm2Msg,
            QotVariant::Bqsm2Msg => Variant::Bqsm2Msg,
            QotVariant::OneshotTlp => Variant::OneShotTlp,
        }
    }
}

/// Opaque parsed Bristol-fashion circuit.
pub struct QotCircuit(BooleanCircuit);

/// Opaque protocol transcript.
pub struct QotTranscript(ProtocolTranscript);

/// Opaque time-lock puzzle.
pub struct QotPuzzle(Puzzle);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> QotStatus {
    match err {
        Error::Validation(_) | Error::SiteOutOfRange { .. } | Error::Usage(_) | Error::Parse { .. } => {
            QotStatus::InvalidArgument
        }
        Error::Capacity { .. } => QotStatus::Capacity,
        Error::ModelViolation(_) | Error::ImpossibleBranch { .. } => QotStatus::ModelViolation,
        Error::Integrity(_) | Error::Corruption(_) => QotStatus::Integrity,
        Error::Decode(_) => QotStatus::Decode,
        Error::ProtocolAbort(_) => QotStatus::ProtocolAbort,
        Error::Audit(_) => QotStatus::AuditFailed,
        Error::Io(_) => QotStatus::Io,
    }
}

struct Failure(QotStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QotStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> QotStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QotStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside qot");
            QotStatus::Panic
        }
    }
}

unsafe fn bits_in(ptr: *const u8, len: usize, what: &str) -> Result<Vec<bool>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    let raw = slice::from_raw_parts(ptr, len);
    raw.iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Failure(QotStatus::InvalidArgument, format!("{what} holds byte {b}, expected 0 or 1"))),
        })
        .collect()
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn qot_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The caller
/// frees the result with [`qot_string_free`].
#[no_mangle]
pub extern "C" fn qot_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qot_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The full-pair guessing bound `1/2 + 1/N`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qot_guess_bound(n: usize, out: *mut f64) -> QotStatus {
    guard(|| {
        if n < 2 {
            return Err(Failure(QotStatus::InvalidArgument, format!("N = {n} must be at least 2")));
        }
        write_out(out, guess_bound(n), "out")
    })
}

/// Runs one honest OT. Writes the receiver's bit to `out_bit` and, when
/// `out_transcript` is not NULL, a transcript handle.
///
/// # Safety
/// `out_bit` must be valid for writes; `out_transcript` must be NULL or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qot_ot_run(
    variant: QotVariant,
    n: usize,
    x0: bool,
    x1: bool,
    y: bool,
    seed: u64,
    out_bit: *mut bool,
    out_transcript: *mut *mut QotTranscript,
) -> QotStatus {
    guard(|| {
        if out_bit.is_null() {
            return Err(null("out_bit"));
        }
        let params = ProtocolParams::new(variant.into(), n);
        let run = run_protocol(&params, x0, x1, y, seed)?;
        write_out(out_bit, run.output, "out_bit")?;
        if !out_transcript.is_null() {
            out_transcript.write(Box::into_raw(Box::new(QotTranscript(run.transcript))));
        }
        Ok(())
    })
}

/// The transcript as `tick,party,event,digest` lines. Caller frees.
///
/// # Safety
/// `t` must be a live transcript handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qot_transcript_log(t: *const QotTranscript, out: *mut *mut c_char) -> QotStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("transcript"))?;
        write_out(out, to_c_string(t.0.to_log()), "out")
    })
}

/// # Safety
/// `t` must be NULL or a live transcript handle.
#[no_mangle]
pub unsafe extern "C" fn qot_transcript_free(t: *mut QotTranscript) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Parses Bristol-fashion circuit text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qot_circuit_parse(text: *const c_char, out: *mut *mut QotCircuit) -> QotStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure(QotStatus::InvalidArgument, format!("circuit text is not UTF-8: {e}")))?;
        let c = parse_bristol(text)?;
        write_out(out, Box::into_raw(Box::new(QotCircuit(c))), "out")
    })
}

/// Input widths of parties 1 and 2 and the output width.
///
/// # Safety
/// `c` must be a live circuit handle; the out pointers must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn qot_circuit_widths(
    c: *const QotCircuit,
    out_garbler: *mut usize,
    out_evaluator: *mut usize,
    out_outputs: *mut usize,
) -> QotStatus {
    guard(|| {
        let c = &c.as_ref().ok_or_else(|| null("circuit"))?.0;
        let [g, e] = c.input_widths();
        write_out(out_garbler, g, "out_garbler")?;
        write_out(out_evaluator, e, "out_evaluator")?;
        write_out(out_outputs, c.output_width(), "out_outputs")
    })
}

/// # Safety
/// `c` must be NULL or a live circuit handle.
#[no_mangle]
pub unsafe extern "C" fn qot_circuit_free(c: *mut QotCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// One-shot 2PC: party 1 garbles, party 2 evaluates. The quantum backend
/// uses `N = 4` registers. Writes the output bits and whether the
/// single-message audit passed. `out_bits_len` must be at least the
/// circuit's output width.
///
/// # Safety
/// `c` must be a live circuit handle; input arrays must hold the stated
/// number of bytes; the out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qot_2pc_run(
    c: *const QotCircuit,
    garbler_bits: *const u8,
    garbler_len: usize,
    evaluator_bits: *const u8,
    evaluator_len: usize,
    backend: QotBackend,
    label_bits: usize,
    seed: u64,
    out_bits: *mut u8,
    out_bits_len: usize,
    out_audit_pass: *mut bool,
) -> QotStatus {
    guard(|| {
        let c = &c.as_ref().ok_or_else(|| null("circuit"))?.0;
        let g = bits_in(garbler_bits, garbler_len, "garbler_bits")?;
        let e = bits_in(evaluator_bits, evaluator_len, "evaluator_bits")?;
        if out_bits.is_null() {
            return Err(null("out_bits"));
        }
        if out_bits_len < c.output_width() {
            return Err(Failure(
                QotStatus::BufferTooSmall,
                format!("output needs {} bytes, buffer has {out_bits_len}", c.output_width()),
            ));
        }
        let backend = match backend {
            QotBackend::Ideal => OtBackend::Ideal,
            QotBackend::QuantumSim => OtBackend::quantum(ProtocolParams::new(Variant::OneShotTlp, 4))?,
        };
        let run = run_2pc(c, &g, &e, &backend, label_bits, seed)?;
        let out = slice::from_raw_parts_mut(out_bits, out_bits_len);
        for (dst, &b) in out.iter_mut().zip(&run.output) {
            *dst = b as u8;
        }
        write_out(out_audit_pass, transcript_audit(&run.record).is_ok(), "out_audit_pass")
    })
}

/// Seals `(k, l)` with fresh randomness derived from `seed` behind a
/// `tau`-step hash chain.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qot_puzzle_gen(
    tau: u64,
    k: u32,
    l: u32,
    lambda: u32,
    seed: u64,
    out: *mut *mut QotPuzzle,
) -> QotStatus {
    guard(|| {
        let mut rng = qot_core::rng::derive_rng(seed, "ffi-puzzle", 0);
        let s = PuzzleSolution::random(k, l, lambda, &mut rng)?;
        let z = tlp::puzzle_gen(tau, &s, &mut rng)?;
        write_out(out, Box::into_raw(Box::new(QotPuzzle(z))), "out")
    })
}

/// Solves a puzzle sequentially, reporting the chain hashes spent.
///
/// # Safety
/// `z` must be a live puzzle handle; the out pointers must be valid for
/// writes (`out_hashes` may be NULL).
#[no_mangle]
pub unsafe extern "C" fn qot_puzzle_solve(
    z: *const QotPuzzle,
    lambda: u32,
    out_k: *mut u32,
    out_l: *mut u32,
    out_hashes: *mut u64,
) -> QotStatus {
    guard(|| {
        let z = &z.as_ref().ok_or_else(|| null("puzzle"))?.0;
        let mut meter = HashMeter::default();
        let s = tlp::puzzle_sol_metered(z, lambda, &mut meter)?;
        write_out(out_k, s.k, "out_k")?;
        write_out(out_l, s.l, "out_l")?;
        if !out_hashes.is_null() {
            out_hashes.write(meter.chain);
        }
        Ok(())
    })
}

/// # Safety
/// `z` must be NULL or a live puzzle handle.
#[no_mangle]
pub unsafe extern "C" fn qot_puzzle_free(z: *mut QotPuzzle) {
    if !z.is_null() {
        drop(Box::from_raw(z));
    }
}
