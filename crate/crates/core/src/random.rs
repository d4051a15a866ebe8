//! Seeded randomness. Every stream in the crate comes from a ChaCha8
//! generator keyed by an explicit `u64`, so runs are reproducible bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::{Complex64, ComplexMatrix, ComplexVector};

pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream label (SplitMix64 finaliser), so e.g.
/// iteration `m` of run `seed` gets its own independent stream.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_vector(n: usize, seed: u64) -> ComplexVector {
    let mut rng = seeded_rng(seed);
    ComplexVector::new(
        (0..n)
            .map(|_| Complex64::new(gaussian(&mut rng), gaussian(&mut rng)))
            .collect(),
    )
}

pub fn random_real_vector(n: usize, seed: u64) -> ComplexVector {
    let mut rng = seeded_rng(seed);
    ComplexVector::new((0..n).map(|_| Complex64::new(gaussian(&mut rng), 0.0)).collect())
}

/// `(G + G^H) / 2` with complex Gaussian `G`.
pub fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = seeded_rng(seed);
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(gaussian(&mut rng), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(gaussian(&mut rng), gaussian(&mut rng)) * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Haar-distributed real orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = seeded_rng(seed);
    let g: Vec<f64> = (0..n * n).map(|_| gaussian(&mut rng)).collect();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| Complex64::new(g[i * n + j], 0.0)).collect())
        .collect();
    from_orthonormal_columns(gram_schmidt(cols), n)
}

/// Haar-distributed unitary matrix, same construction over complex Gaussians.
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = seeded_rng(seed);
    let cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(gaussian(&mut rng), gaussian(&mut rng)))
                .collect()
        })
        .collect();
    from_orthonormal_columns(gram_schmidt(cols), n)
}

/// Modified Gram-Schmidt, run twice for orthogonality at machine precision.
/// Equivalent to QR with a positive real diagonal in `R`.
fn gram_schmidt(mut cols: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let n = cols.len();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex64 = cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let (done, rest) = cols.split_at_mut(j);
                for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                    *x -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    cols
}

fn from_orthonormal_columns(cols: Vec<Vec<Complex64>>, n: usize) -> ComplexMatrix {
    let mut q = ComplexMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            q[(i, j)] = z;
        }
    }
    q
}
