#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use weakcorr::qstate::ComplexMatrix;
use weakcorr::{BellDiagonalParams, DensityMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Full-rank random state `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_density(rng: &mut ChaCha8Rng, dims: Vec<usize>) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = ComplexMatrix::from_row_major(n, (0..n * n).map(|_| complex_normal(rng)).collect()).unwrap();
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let m = m.scale_real(1.0 / tr).hermitian_part();
    DensityMatrix::new(m, dims).unwrap()
}

pub fn random_ket(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| complex_normal(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_pure(rng: &mut ChaCha8Rng, dims: Vec<usize>) -> DensityMatrix {
    let n: usize = dims.iter().product();
    DensityMatrix::from_pure(&random_ket(rng, n), dims).unwrap()
}

/// Haar-ish unitary via Gram-Schmidt on Ginibre columns.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| complex_normal(rng)).collect();
        for c in &cols {
            let overlap: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= overlap * ci;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut u = ComplexMatrix::zeros(n);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            u[(i, j)] = c[i];
        }
    }
    u
}

/// Uniform sample of the Bell-diagonal tetrahedron by rejection from the cube.
pub fn random_bell_diagonal(rng: &mut ChaCha8Rng) -> BellDiagonalParams {
    loop {
        let c = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
        if let Ok(p) = BellDiagonalParams::new(c[0], c[1], c[2]) {
            return p;
        }
    }
}

fn xlog2x(v: f64) -> f64 {
    if v > 0.0 {
        v * v.log2()
    } else {
        0.0
    }
}

/// Bell-diagonal super discord written out term by term; `t` is `tanh x` (1 for projective).
pub fn eq7_oracle(c1: f64, c2: f64, c3: f64, t: f64) -> f64 {
    let c = c1.abs().max(c2.abs()).max(c3.abs());
    let spectral = xlog2x(1.0 - c1 - c2 - c3) / 4.0
        + xlog2x(1.0 - c1 + c2 + c3) / 4.0
        + xlog2x(1.0 + c1 - c2 + c3) / 4.0
        + xlog2x(1.0 + c1 + c2 - c3) / 4.0;
    spectral - xlog2x(1.0 - c * t) / 2.0 - xlog2x(1.0 + c * t) / 2.0
}

/// Bell-diagonal super classical correlation; `t` is `tanh x`.
pub fn eq9_oracle(c: f64, t: f64) -> f64 {
    xlog2x(1.0 - c * t) / 2.0 + xlog2x(1.0 + c * t) / 2.0
}

/// Eigenvalues of a Hermitian matrix through nalgebra's solver (independent of the crate's Jacobi).
pub fn nalgebra_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        let z = m[(i, j)];
        nalgebra::Complex::new(z.re, z.im)
    });
    let mut ev: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}
