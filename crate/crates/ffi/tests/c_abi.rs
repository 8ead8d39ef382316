use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use qot_ffi::*;

const AND: &str = "1 3\n2 1 1\n1 1\n\n2 1 0 1 2 AND\n";

fn last_error() -> String {
    let p = qot_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { qot_string_free(p) };
    s
}

#[test]
fn guess_bound_and_errors() {
    let mut v = 0.0;
    assert_eq!(unsafe { qot_guess_bound(4, &mut v) }, QotStatus::Ok);
    assert_eq!(v, 0.75);
    assert!(qot_last_error_message().is_null());
    assert_eq!(unsafe { qot_guess_bound(1, &mut v) }, QotStatus::InvalidArgument);
    assert!(last_error().contains("at least 2"));
    assert_eq!(unsafe { qot_guess_bound(4, ptr::null_mut()) }, QotStatus::NullPointer);
}

#[test]
fn ot_returns_chosen_bit_and_transcript() {
    for variant in [QotVariant::Nqsm2Msg, QotVariant::Bqsm2Msg, QotVariant::OneshotTlp] {
        for (x0, x1, y) in [(false, true, false), (false, true, true), (true, false, false)] {
            let mut bit = false;
            let mut t = ptr::null_mut();
            assert_eq!(unsafe { qot_ot_run(variant, 4, x0, x1, y, 7, &mut bit, &mut t) }, QotStatus::Ok);
            assert_eq!(bit, if y { x1 } else { x0 });
            let mut log = ptr::null_mut();
            assert_eq!(unsafe { qot_transcript_log(t, &mut log) }, QotStatus::Ok);
            let text = unsafe { CStr::from_ptr(log) }.to_str().unwrap().to_string();
            assert!(text.starts_with("tick,party,event,digest"));
            unsafe {
                qot_string_free(log);
                qot_transcript_free(t);
            }
        }
    }
    let mut bit = false;
    let status = unsafe { qot_ot_run(QotVariant::Nqsm2Msg, 1, false, false, false, 0, &mut bit, ptr::null_mut()) };
    assert_eq!(status, QotStatus::InvalidArgument);
}

#[test]
fn two_party_and_gate() {
    let text = CString::new(AND).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { qot_circuit_parse(text.as_ptr(), &mut c) }, QotStatus::Ok);
    let (mut g, mut e, mut o) = (0, 0, 0);
    assert_eq!(unsafe { qot_circuit_widths(c, &mut g, &mut e, &mut o) }, QotStatus::Ok);
    assert_eq!((g, e, o), (1, 1, 1));
    for backend in [QotBackend::Ideal, QotBackend::QuantumSim] {
        for (a, b) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
            let mut out = [9u8];
            let mut pass = false;
            let bits = if backend == QotBackend::Ideal { 128 } else { 8 };
            let s = unsafe { qot_2pc_run(c, &a, 1, &b, 1, backend, bits, 3, out.as_mut_ptr(), 1, &mut pass) };
            assert_eq!(s, QotStatus::Ok);
            assert_eq!(out[0], a & b);
            assert!(pass);
        }
    }
    let mut pass = false;
    let bad = 2u8;
    let mut out = [0u8];
    let s = unsafe { qot_2pc_run(c, &bad, 1, &bad, 1, QotBackend::Ideal, 128, 3, out.as_mut_ptr(), 1, &mut pass) };
    assert_eq!(s, QotStatus::InvalidArgument);
    let s = unsafe { qot_2pc_run(c, &1, 1, &1, 1, QotBackend::Ideal, 128, 3, out.as_mut_ptr(), 0, &mut pass) };
    assert_eq!(s, QotStatus::BufferTooSmall);
    unsafe { qot_circuit_free(c) };
}

#[test]
fn bad_circuit_text_reports_the_line() {
    let text = CString::new("1 3\n2 1 1\n1 1\n\n2 1 0 7 2 AND\n").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { qot_circuit_parse(text.as_ptr(), &mut c) }, QotStatus::InvalidArgument);
    assert!(last_error().contains("line 5"));
    assert!(c.is_null());
}

#[test]
fn puzzle_round_trip_counts_hashes() {
    let mut z = ptr::null_mut();
    assert_eq!(unsafe { qot_puzzle_gen(1000, 3, 9, 32, 1, &mut z) }, QotStatus::Ok);
    let (mut k, mut l, mut h) = (0, 0, 0);
    assert_eq!(unsafe { qot_puzzle_solve(z, 32, &mut k, &mut l, &mut h) }, QotStatus::Ok);
    assert_eq!((k, l, h), (3, 9, 1000));
    unsafe {
        qot_puzzle_free(z);
        qot_puzzle_free(ptr::null_mut());
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(qot_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qot.h")).unwrap();
    for name in [
        "qot_last_error_message",
        "qot_string_free",
        "qot_ot_run",
        "qot_2pc_run",
        "qot_puzzle_solve",
        "typedef struct QotCircuit QotCircuit",
        "QOT_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles a small C program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    // Test binaries live in `deps/`, next to the library's build outputs.
    let deps: PathBuf = std::env::current_exe().unwrap().parent().unwrap().into();
    let lib = deps.join("libqot_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "qot.h"
int main(void) {
    bool bit = false;
    if (qot_ot_run(QOT_VARIANT_ONESHOT_TLP, 4, false, true, true, 7, &bit, NULL) != QOT_STATUS_OK) return 2;
    double g = 0;
    if (qot_guess_bound(1, &g) != QOT_STATUS_INVALID_ARGUMENT) return 3;
    char *msg = qot_last_error_message();
    if (msg == NULL) return 4;
    qot_string_free(msg);
    printf("%d\n", bit ? 1 : 0);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1");
}
