//! Dense complex matrices and multi-qubit density matrices.
//!
//! Basis ordering is `|0>, |1>` per qubit with `sigma_z |0> = +|0>`, and a
//! multi-qubit basis index is big-endian over the subsystem dimension list
//! (the first subsystem is the most significant digit).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity tolerance for a valid density matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for a valid density matrix.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated as numerical noise.
pub const NEGATIVITY_TOL: f64 = 1e-10;
/// Hermiticity tolerance accepted by the eigensolver.
pub const EIG_HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros inside the entropy.
pub const ENTROPY_CLAMP: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; fails unless `data.len() == dim²`.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// The projector `|psi><psi|` (no normalization applied).
    pub fn outer(ket: &[C64]) -> Self {
        let dim = ket.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = ket[i] * ket[j].conj();
            }
        }
        m
    }

    pub fn pauli_x() -> Self {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        ComplexMatrix {
            dim: 2,
            data: vec![o, l, l, o],
        }
    }

    pub fn pauli_y() -> Self {
        let o = C64::new(0.0, 0.0);
        ComplexMatrix {
            dim: 2,
            data: vec![o, C64::new(0.0, -1.0), C64::new(0.0, 1.0), o],
        }
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diagonal(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus of `M - M†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        m
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        &(u * self) * &u.adjoint()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product `a ⊗ b`, left factor major.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Diagnostics for a candidate density matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    /// Minimum eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.hermiticity_defect <= HERMITIAN_TOL
            && self.trace_defect <= TRACE_TOL
            && self.min_eigenvalue >= -NEGATIVITY_TOL
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hermiticity defect {:.3e} (tol {HERMITIAN_TOL:e}), trace defect {:.3e} (tol {TRACE_TOL:e}), min eigenvalue {:.3e} (tol -{NEGATIVITY_TOL:e})",
            self.hermiticity_defect, self.trace_defect, self.min_eigenvalue
        )
    }
}

/// Reports Hermiticity defect, trace defect and the minimum eigenvalue.
pub fn validate(m: &ComplexMatrix) -> ValidationReport {
    let hermiticity_defect = m.hermiticity_defect();
    let tr = m.trace();
    let trace_defect = (tr - C64::new(1.0, 0.0)).norm();
    let min_eigenvalue = jacobi_eigen(&m.hermitian_part(), false)
        .0
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    ValidationReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
    }
}

/// A validated multi-qubit density matrix together with its subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates `matrix` against the density-matrix invariants.
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, matrix.dim())?;
        let report = validate(&matrix);
        if !report.is_valid() {
            return Err(Error::InvalidState(report));
        }
        Ok(DensityMatrix { matrix, dims })
    }

    /// Wraps a matrix produced by a trace-preserving operation on a valid state.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.dim());
        DensityMatrix { matrix, dims }
    }

    /// Normalized projector onto `ket`.
    pub fn from_pure(ket: &[C64], dims: Vec<usize>) -> Result<Self> {
        let norm_sq: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::InvalidArgument("ket has zero or non-finite norm".into()));
        }
        let m = ComplexMatrix::outer(ket).scale_real(1.0 / norm_sq);
        Self::new(m, dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        let m = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
        DensityMatrix { matrix: m, dims }
    }

    /// `rho_a ⊗ rho_b`, concatenating subsystem lists.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        let mut dims = a.dims.clone();
        dims.extend_from_slice(&b.dims);
        DensityMatrix {
            matrix: tensor(&a.matrix, &b.matrix),
            dims,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// `Tr rho²`.
    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.matrix[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        acc
    }

    /// Same state with the subsystem list regrouped; the product must match.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        Ok(DensityMatrix {
            matrix: self.matrix.clone(),
            dims,
        })
    }

    /// `U rho U†` for a unitary `U` of matching dimension.
    pub fn unitarily_transformed(&self, u: &ComplexMatrix) -> Self {
        DensityMatrix {
            matrix: self.matrix.conjugate_by(u),
            dims: self.dims.clone(),
        }
    }
}

fn check_dims(dims: &[usize], dim: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidArgument(format!(
            "subsystem dimensions must be positive, got {dims:?}"
        )));
    }
    let prod: usize = dims.iter().product();
    if prod != dim {
        return Err(Error::InvalidArgument(format!(
            "subsystem dimensions {dims:?} do not multiply to matrix dimension {dim}"
        )));
    }
    Ok(())
}

/// Reduced state over the subsystems listed in `keep`, in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n_sub = rho.dims.len();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set is empty".into()));
    }
    let mut kept = vec![false; n_sub];
    for &k in keep {
        if k >= n_sub {
            return Err(Error::InvalidArgument(format!(
                "subsystem index {k} out of range for {n_sub} subsystems"
            )));
        }
        kept[k] = true;
    }
    let keep_dims: Vec<usize> = (0..n_sub).filter(|&i| kept[i]).map(|i| rho.dims[i]).collect();
    let trace_dims: Vec<usize> = (0..n_sub).filter(|&i| !kept[i]).map(|i| rho.dims[i]).collect();
    let d_keep: usize = keep_dims.iter().product();
    let d_trace: usize = trace_dims.iter().product();

    // Maps (kept index, traced index) to the full big-endian index.
    let full_index = |ik: usize, it: usize| -> usize {
        let mut digits = vec![0usize; n_sub];
        let (mut rk, mut rt) = (ik, it);
        for s in (0..n_sub).rev() {
            if kept[s] {
                digits[s] = rk % rho.dims[s];
                rk /= rho.dims[s];
            } else {
                digits[s] = rt % rho.dims[s];
                rt /= rho.dims[s];
            }
        }
        digits
            .iter()
            .zip(&rho.dims)
            .fold(0usize, |acc, (&d, &base)| acc * base + d)
    };

    let table: Vec<Vec<usize>> = (0..d_keep)
        .map(|ik| (0..d_trace).map(|it| full_index(ik, it)).collect())
        .collect();

    let mut out = ComplexMatrix::zeros(d_keep);
    for i in 0..d_keep {
        for j in 0..d_keep {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..d_trace {
                acc += rho.matrix[(table[i][t], table[j][t])];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_trusted(out, keep_dims))
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let (mut values, _) = jacobi_eigen(m, false);
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Eigenvalues (descending) with the matching orthonormal eigenvectors.
pub fn eigh_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    check_hermitian(m)?;
    let (values, vectors) = jacobi_eigen(m, true);
    let vectors = vectors.expect("vectors requested");
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| vectors[(i, k)]).collect())
        .collect();
    Ok((sorted_values, sorted_vectors))
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    let defect = m.hermiticity_defect();
    if !(defect <= EIG_HERMITIAN_TOL) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Cyclic complex Jacobi on the Hermitian part of `m`.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// the real symmetric Jacobi rotation, so `A <- G† A G` stays Hermitian.
fn jacobi_eigen(m: &ComplexMatrix, want_vectors: bool) -> (Vec<f64>, Option<ComplexMatrix>) {
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let scale = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = D R with D = diag(1, conj(phase)) on the (p, q) plane.
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                // A <- A G (columns p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                // A <- G† A (rows p, q)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * g_pp + vkq * g_qp;
                        v[(k, q)] = vkp * g_pq + vkq * g_qq;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// Shannon entropy in bits of a spectrum, with values below the clamp treated as zero.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > ENTROPY_CLAMP)
        .map(|&l| -l * l.log2())
        .sum()
}

/// von Neumann entropy `-Tr(rho log2 rho)` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let (values, _) = jacobi_eigen(&rho.matrix, false);
    spectrum_entropy(&values).max(0.0)
}

/// Binary entropy `H2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    spectrum_entropy(&[p, 1.0 - p])
}
