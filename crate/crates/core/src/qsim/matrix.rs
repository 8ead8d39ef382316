use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Validation(format!(
                "matrix of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major entries. Panics on a length
    /// mismatch; meant for literal constants.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        Self { rows, cols, data: entries.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v><v|` for a column vector `v`.
    pub fn outer(v: &[C64]) -> Self {
        let d = v.len();
        let mut data = Vec::with_capacity(d * d);
        for a in v {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Self { rows: d, cols: d, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for p in 0..rhs.rows {
                    for q in 0..rhs.cols {
                        out.data[(i * rhs.rows + p) * cols + j * rhs.cols + q] = a * rhs.get(p, q);
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.rows)) <= tol
    }

    /// True when every imaginary part is within `tol` of zero.
    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Bit of the basis index that carries 1-based `site` in an `n`-site
/// register. Site 1 is the most significant (leftmost in a ket).
#[inline]
pub(crate) fn site_mask(n: usize, site: usize) -> usize {
    1 << (n - site)
}

pub(crate) fn check_sites(n: usize, sites: &[usize]) -> Result<()> {
    for (i, &s) in sites.iter().enumerate() {
        if s == 0 || s > n {
            return Err(Error::SiteOutOfRange { site: s, n_sites: n });
        }
        if sites[..i].contains(&s) {
            return Err(Error::Validation(format!("site {s} listed twice")));
        }
    }
    Ok(())
}

/// Scatters a local index over the listed sites (first listed site is the
/// most significant local bit).
#[inline]
pub(crate) fn spread(n: usize, sites: &[usize], local: usize) -> usize {
    let k = sites.len();
    sites.iter().enumerate().fold(0, |acc, (t, &s)| acc | (((local >> (k - 1 - t)) & 1) << (n - s)))
}

#[inline]
pub(crate) fn gather(n: usize, sites: &[usize], global: usize) -> usize {
    sites.iter().fold(0, |acc, &s| (acc << 1) | ((global >> (n - s)) & 1))
}

/// Embeds `op` (acting on `sites`, in listed order) into an `n`-site
/// operator that is the identity everywhere else.
pub fn embed_operator(n: usize, op: &ComplexMatrix, sites: &[usize]) -> Result<ComplexMatrix> {
    check_sites(n, sites)?;
    let local = 1usize << sites.len();
    if op.rows() != local || op.cols() != local {
        return Err(Error::Validation(format!(
            "operator of shape {}x{} does not act on {} sites",
            op.rows(),
            op.cols(),
            sites.len()
        )));
    }
    let dim = 1usize << n;
    let mask = sites.iter().fold(0, |m, &s| m | site_mask(n, s));
    let offsets: Vec<usize> = (0..local).map(|b| spread(n, sites, b)).collect();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        let base = i & !mask;
        let a = gather(n, sites, i);
        for (b, off) in offsets.iter().enumerate() {
            let v = op.get(a, b);
            if v != ZERO {
                out.set(i, base | off, v);
            }
        }
    }
    Ok(out)
}

/// Applies a `2^k`-dimensional gate to the listed sites of an amplitude
/// array over `n` sites, in place.
pub(crate) fn apply_to_amplitudes(amps: &mut [C64], n: usize, gate: &ComplexMatrix, sites: &[usize]) {
    let local = 1usize << sites.len();
    let mask = sites.iter().fold(0, |m, &s| m | site_mask(n, s));
    let offsets: Vec<usize> = (0..local).map(|b| spread(n, sites, b)).collect();
    let mut buf = vec![ZERO; local];
    let mut out = vec![ZERO; local];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (slot, off) in buf.iter_mut().zip(&offsets) {
            *slot = amps[base | off];
        }
        for (a, o) in out.iter_mut().enumerate() {
            *o = (0..local).map(|b| gate.get(a, b) * buf[b]).sum();
        }
        for (v, off) in out.iter().zip(&offsets) {
            amps[base | off] = *v;
        }
    }
}
