//! Dense complex linear algebra for small multipartite systems.
//!
//! Subsystem 0 is the leftmost tensor factor and composite indices are
//! row-major, so for dims `[d0, d1, d2]` the basis index of `|i j k>` is
//! `(i * d1 + j) * d2 + k`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for the Hermiticity, trace and positivity checks on density matrices.
pub const STATE_TOL: f64 = 1e-9;

const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// `|psi><psi|`
    pub fn outer(psi: &[C64]) -> Self {
        Self::from_fn(psi.len(), psi.len(), |r, c| psi[r] * psi[c].conj())
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|M - M^dag|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs.data[k * rhs.cols + c];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

/// Tensor (Kronecker) product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a[(ar, ac)];
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product of state vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Row-major strides of a composite index space.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets into the full index space for every joint value of the listed subsystems,
/// enumerated row-major over those subsystems.
pub(crate) fn offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &k in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &base in &out {
            for digit in 0..dims[k] {
                next.push(base + digit * st[k]);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn check_index_set(indices: &[usize], count: usize) -> Result<Vec<usize>> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidPartition(format!(
                "subsystem {} listed twice",
                w[0]
            )));
        }
    }
    if let Some(&bad) = sorted.iter().find(|&&i| i >= count) {
        return Err(Error::IndexOutOfRange { index: bad, count });
    }
    Ok(sorted)
}

/// A unit-trace, Hermitian, positive-semidefinite matrix on a tensor product space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates every density-matrix invariant, including positivity.
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::check_shape(&matrix, &dims)?;
        let dev = matrix.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace is {tr}, expected 1"
            )));
        }
        let spec = eigvalsh(&matrix)?;
        let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "smallest eigenvalue {min:e} is negative"
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Skips the spectral checks; for results of trace-preserving maps on valid states.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert!(Self::check_shape(&matrix, &dims).is_ok());
        Self { matrix, dims }
    }

    fn check_shape(matrix: &ComplexMatrix, dims: &[usize]) -> Result<()> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "matrix is {}x{}, not square",
                matrix.rows, matrix.cols
            )));
        }
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidDensityMatrix(format!(
                "subsystem dimensions must all be >= 2, got {dims:?}"
            )));
        }
        let total: usize = dims.iter().product();
        if total != matrix.rows {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} give {total}, matrix side is {}",
                matrix.rows
            )));
        }
        Ok(())
    }

    pub fn from_pure(amplitudes: &[C64], dims: Vec<usize>) -> Result<Self> {
        let m = ComplexMatrix::outer(amplitudes);
        Self::check_shape(&m, &dims)?;
        Ok(Self::new_unchecked(m, dims))
    }

    /// `I / d` on the given dims.
    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let m = ComplexMatrix::from_real_diagonal(&vec![1.0 / d as f64; d]);
        Self::new_unchecked(m, dims)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new_unchecked(kron(&self.matrix, &other.matrix), dims)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn spectrum(&self) -> Result<SpectrumResult> {
        eigvalsh(&self.matrix)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> Result<usize> {
        Ok(self
            .spectrum()?
            .eigenvalues
            .iter()
            .filter(|&&l| l > tol)
            .count())
    }

    /// Conjugates by `u`, which must act on the full space.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = u.matmul(&self.matrix)?.matmul(&u.adjoint())?;
        Ok(Self::new_unchecked(m, self.dims.clone()))
    }

    /// Reorders tensor factors so that new factor `k` is old factor `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let sorted = check_index_set(order, n)?;
        if sorted.len() != n {
            return Err(Error::InvalidPartition(format!(
                "permutation {order:?} does not cover {n} subsystems"
            )));
        }
        let new_dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        let map = offsets(&self.dims, order);
        let d = self.dim();
        let m = ComplexMatrix::from_fn(d, d, |r, c| self.matrix[(map[r], map[c])]);
        Ok(Self::new_unchecked(m, new_dims))
    }

    /// Regroups consecutive factors, e.g. `[2,2,2]` into `[2,4]` with `sizes = [1,2]`.
    pub fn regroup(&self, sizes: &[usize]) -> Result<Self> {
        if sizes.iter().sum::<usize>() != self.dims.len() || sizes.contains(&0) {
            return Err(Error::InvalidPartition(format!(
                "group sizes {sizes:?} do not cover {} subsystems",
                self.dims.len()
            )));
        }
        let mut dims = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes {
            dims.push(self.dims[start..start + s].iter().product());
            start += s;
        }
        Ok(Self::new_unchecked(self.matrix.clone(), dims))
    }
}

/// Traces out every subsystem not listed in `keep`.
///
/// The result's factors appear in their original order whatever the order of `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let kept = check_index_set(keep, rho.num_subsystems())?;
    if kept.is_empty() {
        return Err(Error::InvalidPartition("keep set is empty".into()));
    }
    let traced: Vec<usize> = (0..rho.num_subsystems())
        .filter(|k| !kept.contains(k))
        .collect();
    let ko = offsets(rho.dims(), &kept);
    let to = offsets(rho.dims(), &traced);
    let m = &rho.matrix;
    let out = ComplexMatrix::from_fn(ko.len(), ko.len(), |r, c| {
        to.iter().map(|&t| m[(ko[r] + t, ko[c] + t)]).sum()
    });
    let dims = kept.iter().map(|&k| rho.dims[k]).collect();
    Ok(DensityMatrix::new_unchecked(out, dims))
}

/// Partial transpose of an arbitrary square matrix on the factor `party`.
pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    party: usize,
) -> Result<ComplexMatrix> {
    if party >= dims.len() {
        return Err(Error::IndexOutOfRange {
            index: party,
            count: dims.len(),
        });
    }
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}x{} does not match dims {dims:?}",
            m.rows, m.cols
        )));
    }
    let stride = strides(dims)[party];
    let d = dims[party];
    let digit = |i: usize| (i / stride) % d;
    let mut out = ComplexMatrix::zeros(total, total);
    for r in 0..total {
        let dr = digit(r);
        for c in 0..total {
            let dc = digit(c);
            let r2 = r - dr * stride + dc * stride;
            let c2 = c - dc * stride + dr * stride;
            out[(r2, c2)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// `rho^{T_party}`
pub fn partial_transpose(rho: &DensityMatrix, party: usize) -> Result<ComplexMatrix> {
    partial_transpose_matrix(rho.matrix(), rho.dims(), party)
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: Option<ComplexMatrix>,
}

impl SpectrumResult {
    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }
}

pub fn eigvalsh(m: &ComplexMatrix) -> Result<SpectrumResult> {
    hermitian_eigen(m, false)
}

pub fn eigh(m: &ComplexMatrix) -> Result<SpectrumResult> {
    hermitian_eigen(m, true)
}

fn hermitian_eigen(m: &ComplexMatrix, want_vectors: bool) -> Result<SpectrumResult> {
    let dev = m.hermitian_deviation();
    if dev > STATE_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let (values, vectors) = jacobi(m, want_vectors)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = vectors.map(|v| {
        let n = v.rows;
        ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])])
    });
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Cyclic complex Jacobi rotations. Each rotation first removes the phase of the
/// pivot `a_pq`, then applies the real symmetric Jacobi rotation that zeroes it.
fn jacobi(m: &ComplexMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<ComplexMatrix>)> {
    let n = m.rows;
    // Work on the exactly Hermitian part.
    let mut a = ComplexMatrix::from_fn(n, n, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let threshold = JACOBI_OFF_TOL * a.frobenius_norm().max(1.0);

    let off_norm = |a: &ComplexMatrix| {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += a[(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = n < 2;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        if converged || off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g < f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / g;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * u_pp + vkq * u_qp;
                        v[(k, q)] = vkp * u_pq + vkq * u_qq;
                    }
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            off_norm: off_norm(&a),
        });
    }
    Ok(((0..n).map(|i| a[(i, i)].re).collect(), v))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigvalsh(m)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        ComplexMatrix::from_vec(2, 2, vec![o, l, l, o]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        let o = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        ComplexMatrix::from_vec(2, 2, vec![o, -i, i, o]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }
}
