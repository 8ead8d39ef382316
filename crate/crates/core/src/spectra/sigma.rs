use crate::error::{Error, Result};
use crate::qsim::{embed_operator, gates, ComplexMatrix, MAX_EXACT_QUBITS};

use super::encoding::{Message, MessageEncodingVector};

/// Unnormalized message-encoding state: a sum of embedded Bell projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaState {
    n: usize,
    matrix: ComplexMatrix,
}

impl SigmaState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `|E| 2^{N-2}`, the trace every `sigma_m` must have.
    pub fn expected_trace(n: usize) -> f64 {
        (n * (n - 1) / 2) as f64 * (1u64 << (n - 2)) as f64
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Validation(format!("sigma needs N >= 2, got {n}")));
    }
    if n > MAX_EXACT_QUBITS {
        return Err(Error::Capacity { what: "dense operator size", requested: n, cap: MAX_EXACT_QUBITS });
    }
    Ok(())
}

fn bell_term(n: usize, pair: (usize, usize), msg: Message) -> Result<ComplexMatrix> {
    embed_operator(n, &gates::bell_projector(msg.x0, msg.x1), &[pair.0, pair.1])
}

/// `sigma_m = Σ_{k<l} |B_{m(k,l)}><B_{m(k,l)}|_{k,l} ⊗ I`.
pub fn build_sigma(m: &MessageEncodingVector) -> Result<SigmaState> {
    let n = m.n();
    check_n(n)?;
    let dim = 1usize << n;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (pair, msg) in m.iter() {
        acc.add_assign(&bell_term(n, pair, msg)?);
    }
    Ok(SigmaState { n, matrix: acc })
}

/// Star component centred on site `n`: the terms of `m` whose pair ends at
/// `n`, i.e. `sigma_N - sigma_{N-1}`.
pub fn build_star_component(m: &MessageEncodingVector) -> Result<SigmaState> {
    let n = m.n();
    check_n(n)?;
    let dim = 1usize << n;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (pair, msg) in m.iter().filter(|((_, l), _)| *l == n) {
        acc.add_assign(&bell_term(n, pair, msg)?);
    }
    Ok(SigmaState { n, matrix: acc })
}

/// Star graph `Σ_{j<N} |B_label><B_label|_{j,N} ⊗ I`.
pub fn build_sigma_star_labeled(n: usize, label: Message) -> Result<SigmaState> {
    check_n(n)?;
    let dim = 1usize << n;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for j in 1..n {
        acc.add_assign(&bell_term(n, (j, n), label)?);
    }
    Ok(SigmaState { n, matrix: acc })
}

/// Star graph built from the singlet `|B_11>`.
pub fn build_sigma_star(n: usize) -> Result<SigmaState> {
    build_sigma_star_labeled(n, Message::new(true, true))
}

/// Heisenberg-star Hamiltonian `(1/4) Σ_{j<N} (X_j X_N + Y_j Y_N + Z_j Z_N)`.
pub fn heisenberg_star(n: usize) -> Result<ComplexMatrix> {
    check_n(n)?;
    let coupling = gates::pauli_x()
        .kron(&gates::pauli_x())
        .add(&gates::pauli_y().kron(&gates::pauli_y()))
        .add(&gates::pauli_z().kron(&gates::pauli_z()))
        .scale(0.25);
    let dim = 1usize << n;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for j in 1..n {
        acc.add_assign(&embed_operator(n, &coupling, &[j, n])?);
    }
    Ok(acc)
}

/// `N^2/4 + N/4 - 1/2`, the ceiling on `lambda_max(sigma_m)`.
pub fn lambda_max_bound(n: usize) -> f64 {
    let n = n as f64;
    n * n / 4.0 + n / 4.0 - 0.5
}

/// `1/2 + 1/N`.
pub fn guess_bound(n: usize) -> f64 {
    0.5 + 1.0 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::lambda_max;

    #[test]
    fn two_site_sigma_is_single_projector() {
        let m = MessageEncodingVector::constant(2, Message::new(false, false)).unwrap();
        let s = build_sigma(&m).unwrap();
        assert_eq!(s.matrix(), &gates::bell_projector(false, false));
    }

    #[test]
    fn trace_is_pairs_times_identity_weight() {
        let m = MessageEncodingVector::constant(3, Message::new(true, false)).unwrap();
        let s = build_sigma(&m).unwrap();
        assert!((s.matrix().trace().re - 6.0).abs() < 1e-12);
        assert_eq!(SigmaState::expected_trace(3), 6.0);
    }

    #[test]
    fn small_star_eigenvalues() {
        assert!((lambda_max(build_sigma_star(2).unwrap().matrix()).unwrap() - 1.0).abs() < 1e-12);
        assert!((lambda_max(build_sigma_star(3).unwrap().matrix()).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bound_formulas() {
        assert_eq!(lambda_max_bound(8), 17.5);
        assert_eq!(guess_bound(4), 0.75);
        // lambda bound over |E| is the guess bound.
        for n in 2..40 {
            let e = (n * (n - 1) / 2) as f64;
            assert!((lambda_max_bound(n) / e - guess_bound(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn oversized_operators_hit_the_cap() {
        assert!(matches!(build_sigma_star(MAX_EXACT_QUBITS + 1), Err(Error::Capacity { .. })));
        assert!(build_sigma_star(1).is_err());
    }
}
