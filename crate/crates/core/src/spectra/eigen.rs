//! Hermitian eigen-decomposition. Backed by nalgebra's symmetric
//! tridiagonal QR solver; real-symmetric inputs (every operator built in
//! this crate) take the cheaper real path.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::qsim::{ComplexMatrix, C64};

/// Inputs further than this from Hermitian are rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues (ascending) and matching orthonormal eigenvectors, one per
/// column.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Validation(format!("eigenvalues need a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    if !m.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::Validation("matrix is not Hermitian".into()));
    }
    Ok(())
}

fn real_part(m: &ComplexMatrix) -> DMatrix<f64> {
    let d = m.rows();
    DMatrix::from_fn(d, d, |i, j| 0.5 * (m.get(i, j).re + m.get(j, i).re))
}

fn complex_part(m: &ComplexMatrix) -> DMatrix<C64> {
    let d = m.rows();
    DMatrix::from_fn(d, d, |i, j| (m.get(i, j) + m.get(j, i).conj()) * 0.5)
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let mut values: Vec<f64> = if m.is_real(0.0) {
        SymmetricEigen::new(real_part(m)).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(complex_part(m)).eigenvalues.iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues with eigenvectors, ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    let d = m.rows();
    let (values, columns): (Vec<f64>, Vec<Vec<C64>>) = if m.is_real(0.0) {
        let e = SymmetricEigen::new(real_part(m));
        (
            e.eigenvalues.iter().copied().collect(),
            (0..d).map(|c| e.eigenvectors.column(c).iter().map(|&x| C64::new(x, 0.0)).collect()).collect(),
        )
    } else {
        let e = SymmetricEigen::new(complex_part(m));
        (
            e.eigenvalues.iter().copied().collect(),
            (0..d).map(|c| e.eigenvectors.column(c).iter().copied().collect()).collect(),
        )
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut vectors = ComplexMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        for (row, v) in columns[src].iter().enumerate() {
            vectors.set(row, dst, *v);
        }
    }
    Ok(HermitianEigen { values: order.iter().map(|&i| values[i]).collect(), vectors })
}

pub fn lambda_max(m: &ComplexMatrix) -> Result<f64> {
    Ok(*hermitian_eigenvalues(m)?.last().expect("non-empty matrix"))
}

pub fn lambda_min(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?[0])
}

/// `‖A‖₁ = Σ |λ_i|` for Hermitian `A`.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.iter().map(|x| x.abs()).sum())
}

impl HermitianEigen {
    /// `V f(Λ) V^†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(d, d);
        for (c, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let vi = self.vectors.get(i, c) * w;
                if vi == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + vi * self.vectors.get(j, c).conj();
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}
