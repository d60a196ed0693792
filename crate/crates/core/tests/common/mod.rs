//! Seeded random generators shared by the integration suites.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use psfm_core::forms::Form;
use psfm_core::psfm::{Atom, DiscretePSFM};
use psfm_core::{CMatrix, CVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| random_complex(rng))
}

/// Random PSD matrix of exact rank `rank`: `A A^H` with `A` of shape
/// `n × rank`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMatrix {
    if rank == 0 {
        return CMatrix::zeros(n, n);
    }
    let a = random_matrix(rng, n, rank);
    &a * a.adjoint()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

/// Random unitary via Gram–Schmidt on a random matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let mut u = CMatrix::zeros(n, n);
    let mut col = 0;
    while col < n {
        let mut v = random_vector(rng, n);
        for k in 0..col {
            let q = u.column(k);
            let coeff = q.dotc(&v);
            v -= q * coeff;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            u.set_column(col, &(v / Complex64::new(norm, 0.0)));
            col += 1;
        }
    }
    u
}

/// Random PSFM with `m` atoms of varied rank (possibly zero).
pub fn random_psfm(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DiscretePSFM {
    let atoms = (0..m)
        .map(|i| {
            let rank = rng.random_range(0..=n);
            Atom {
                label: format!("w{}", i + 1),
                form: Form::new(random_psd(rng, n, rank)).unwrap(),
            }
        })
        .collect();
    DiscretePSFM::new(n, atoms, 1e-10).unwrap()
}

/// Random strict PSFM: every total is positive definite (one atom gets a
/// full-rank component).
pub fn random_strict_psfm(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DiscretePSFM {
    let mut atoms: Vec<Atom> = (0..m.saturating_sub(1))
        .map(|i| {
            let rank = rng.random_range(0..=n);
            Atom {
                label: format!("w{}", i + 1),
                form: Form::new(random_psd(rng, n, rank)).unwrap(),
            }
        })
        .collect();
    let full = random_psd(rng, n, n) + CMatrix::identity(n, n).scale(0.1);
    atoms.push(Atom {
        label: format!("w{m}"),
        form: Form::new(full).unwrap(),
    });
    DiscretePSFM::new(n, atoms, 1e-10).unwrap()
}

/// Random semispectral measure: PSD atoms renormalized by the inverse
/// square root of their sum so that `E_Ω = I`.
pub fn random_semispectral(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DiscretePSFM {
    let raw: Vec<CMatrix> = (0..m)
        .map(|i| {
            let rank = rng.random_range(1..=n);
            let mut a = random_psd(rng, n, rank);
            if i == 0 {
                a += CMatrix::identity(n, n).scale(0.05);
            }
            a
        })
        .collect();
    let mut total = CMatrix::zeros(n, n);
    for a in &raw {
        total += a;
    }
    let inv_sqrt = hermitian_power(&total, -0.5);
    let atoms = raw
        .into_iter()
        .enumerate()
        .map(|(i, a)| Atom {
            label: format!("w{}", i + 1),
            form: Form::new(&inv_sqrt * a * &inv_sqrt).unwrap(),
        })
        .collect();
    DiscretePSFM::new(n, atoms, 1e-9).unwrap()
}

/// Random spectral measure: eigenprojections of a random Hermitian matrix,
/// grouped into `m` atoms.
pub fn random_spectral(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DiscretePSFM {
    let u = random_unitary(rng, n);
    let m = m.min(n);
    let atoms = (0..m)
        .map(|g| {
            let mut p = CMatrix::zeros(n, n);
            let mut k = g;
            while k < n {
                let col = u.column(k);
                p += col * col.adjoint();
                k += m;
            }
            Atom {
                label: format!("p{}", g + 1),
                form: Form::new(p).unwrap(),
            }
        })
        .collect();
    DiscretePSFM::new(n, atoms, 1e-10).unwrap()
}

/// Hermitian fractional power through the eigendecomposition.
pub fn hermitian_power(m: &CMatrix, p: f64) -> CMatrix {
    let (vals, vecs) = psfm_core::linalg::hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let col = vecs.column(k);
        out += (col * col.adjoint()).scale(vals[k].max(0.0).powf(p));
    }
    out
}

/// Random normal matrix with the given eigenvalues (unitary-conjugated
/// diagonal).
pub fn normal_with_eigenvalues(rng: &mut ChaCha8Rng, eigenvalues: &[Complex64]) -> CMatrix {
    let n = eigenvalues.len();
    let u = random_unitary(rng, n);
    let d = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            eigenvalues[i]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &u * d * u.adjoint()
}
