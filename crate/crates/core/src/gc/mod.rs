//! Semi-honest Yao garbled circuits over Bristol-fashion boolean circuits.
//!
//! Classic four-row point-and-permute without free-XOR: each wire has two
//! random labels whose low bits differ, each gate row encrypts the output
//! label plus four zero bytes under `SHA-256(A ‖ B ‖ gate_id ‖ row)`, and the
//! evaluator decrypts exactly the row its labels point to.

mod bristol;
mod garble;

pub use bristol::{bits_from_u64, parse_bristol, u64_from_bits, BooleanCircuit, Gate, GateKind};
pub(crate) use garble::Reader;
pub use garble::{
    decode, decrypt_row, evaluate, evaluate_traced, garble, GarbledCircuit, GarbledGate, Garbling, InputEncoding,
    OutputEntry, OutputMap, WireLabel, DEFAULT_LABEL_BITS, MAX_LABEL_BITS, PAD_BYTES,
};

/// The bundled 8-bit ripple-carry adder: party 1 and party 2 each supply 8
/// bits least significant first; the 8 outputs are the sum mod 256.
pub const ADDER8_BRISTOL: &str = include_str!("../../circuits/adder8.txt");
