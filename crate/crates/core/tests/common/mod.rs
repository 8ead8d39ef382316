//! Test-only oracles, written independently of the library code paths they
//! check.
#![allow(dead_code)]

use qot_core::qsim::{ComplexMatrix, C64};

/// Cyclic Jacobi eigenvalues of a real symmetric matrix (row-major `a`).
pub fn jacobi_symmetric(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Hermitian eigenvalues through the real embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is each eigenvalue twice.
pub fn jacobi_hermitian(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    let d = 2 * n;
    let mut a = vec![0.0; d * d];
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            a[i * d + j] = z.re;
            a[(i + n) * d + j + n] = z.re;
            a[i * d + j + n] = -z.im;
            a[(i + n) * d + j] = z.im;
        }
    }
    jacobi_symmetric(a, d).into_iter().step_by(2).collect()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Bell state amplitudes from the closed form
/// `(|0 x1> + (-1)^{x0} |1 !x1>)/sqrt 2`.
pub fn bell_amplitudes(x0: bool, x1: bool) -> [C64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = [c(0.0, 0.0); 4];
    amps[x1 as usize] = c(h, 0.0);
    amps[2 | (!x1) as usize] = c(if x0 { -h } else { h }, 0.0);
    amps
}

pub fn bell_projector_oracle(x0: bool, x1: bool) -> ComplexMatrix {
    ComplexMatrix::outer(&bell_amplitudes(x0, x1))
}

/// Standard error of a Bernoulli frequency.
pub fn std_error(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}
