//! Seeded random instances: standard-normal real and imaginary parts,
//! Hermitian draws as `(A + A†)/2`, PSD draws as `A†A`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_cmatrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        entries.push(random_complex(rng));
    }
    CMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j])
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    random_cmatrix(rng, n, n).hermitian_part()
}

pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let a = random_cmatrix(rng, n, n);
    a.adjoint() * a
}

/// Real symmetric matrix with standard-normal entries.
pub fn random_real_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.sample(StandardNormal);
            a.set(i, j, C64::from(x));
            a.set(j, i, C64::from(x));
        }
    }
    a
}
