//! Standard single- and two-qubit operators.

use std::f64::consts::FRAC_1_SQRT_2;

use super::matrix::{ComplexMatrix, C64};

pub fn identity() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    ComplexMatrix::new(2, 2, vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)]).expect("2x2 literal")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// The usual Hadamard, `H|0> = |+>`, `H^2 = I`.
pub fn hadamard() -> ComplexMatrix {
    let h = FRAC_1_SQRT_2;
    ComplexMatrix::from_real(2, 2, &[h, h, h, -h])
}

/// CNOT with the first listed site as control.
pub fn cnot() -> ComplexMatrix {
    ComplexMatrix::from_real(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
}

/// `I, X, Y, Z` for `index` 0..4.
pub fn pauli(index: usize) -> ComplexMatrix {
    match index {
        0 => identity(),
        1 => pauli_x(),
        2 => pauli_y(),
        3 => pauli_z(),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// `|B_{x0 x1}><B_{x0 x1}|` as a 4x4 matrix.
pub fn bell_projector(x0: bool, x1: bool) -> ComplexMatrix {
    ComplexMatrix::outer(super::bell_prepare(x0, x1).amplitudes())
}
