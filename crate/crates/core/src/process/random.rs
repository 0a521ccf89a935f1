use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Instrument, InstrumentSet};
use crate::linalg::ComplexMatrix;

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`), from
/// Gram–Schmidt on a complex Gaussian matrix.
fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v: Vec<Complex64> = (0..rows).map(|_| gaussian(rng)).collect();
        // two passes keep the columns orthogonal to machine precision
        for _ in 0..2 {
            for u in &basis {
                let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= dot * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        basis.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| basis[j][i])
}

/// Haar-distributed `n × n` unitary.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    random_isometry(n, n, rng)
}

fn random_pure_state(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let v = random_isometry(d, 1, rng);
    ComplexMatrix::outer(v.as_slice(), v.as_slice())
}

/// One random instrument: an even mixture of a random measure-and-prepare
/// instrument and a random coherent instrument whose Kraus operators come
/// from a random isometry and are split among the outcomes.
pub fn random_instrument(d_in: usize, d_out: usize, outcomes: usize, rng: &mut impl Rng) -> Instrument {
    let n = d_in * d_out;
    let mut maps = vec![ComplexMatrix::zeros(n, n); outcomes];

    let basis = random_unitary(d_in, rng);
    let shift = rng.gen_range(0..outcomes);
    let prepared: Vec<ComplexMatrix> = (0..outcomes).map(|_| random_pure_state(d_out, rng)).collect();
    for j in 0..d_in {
        let a = (j + shift) % outcomes;
        let col: Vec<Complex64> = (0..d_in).map(|i| basis[(i, j)]).collect();
        let proj = ComplexMatrix::outer(&col, &col);
        maps[a].add_scaled(&crate::linalg::kron(&proj, &prepared[a]), 0.5);
    }

    let per_outcome = d_in.div_ceil(outcomes * d_out).max(1);
    let kraus_count = outcomes * per_outcome;
    let v = random_isometry(kraus_count * d_out, d_in, rng);
    for m in 0..kraus_count {
        let vec: Vec<Complex64> = (0..d_in)
            .flat_map(|i| (0..d_out).map(move |o| (i, o)))
            .map(|(i, o)| v[(m * d_out + o, i)])
            .collect();
        maps[m / per_outcome].add_scaled(&ComplexMatrix::outer(&vec, &vec), 0.5);
    }
    Instrument::new(d_in, d_out, maps).expect("shapes are consistent")
}

/// Random instrument set with one instrument per input, reproducible from `seed`.
pub fn random_instruments(d_in: usize, d_out: usize, inputs: usize, outcomes: usize, seed: u64) -> InstrumentSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instruments_with(d_in, d_out, inputs, outcomes, &mut rng)
}

pub fn random_instruments_with(d_in: usize, d_out: usize, inputs: usize, outcomes: usize, rng: &mut impl Rng) -> InstrumentSet {
    InstrumentSet::new((0..inputs).map(|_| random_instrument(d_in, d_out, outcomes, rng)).collect()).expect("uniform shapes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn always_valid() {
        for seed in 0..100 {
            let set = random_instruments(2, 2, 2, 2, seed);
            let r = set.validate().unwrap();
            assert!(r.normalization_error < 1e-12 && r.min_eigenvalue > -1e-12, "seed {seed}: {r:?}");
        }
        for (di, dout, k) in [(3, 3, 2), (1, 2, 3), (4, 1, 2), (2, 3, 5)] {
            let set = random_instruments(di, dout, 3, k, 11);
            assert!(set.validate().unwrap().passes(1e-10), "{di},{dout},{k}");
            assert_eq!((set.inputs(), set.outcomes()), (3, k));
        }
    }

    #[test]
    fn seeds_differ_and_repeat() {
        let a = random_instruments(2, 2, 2, 2, 1);
        assert_eq!(a, random_instruments(2, 2, 2, 2, 1));
        assert_ne!(a, random_instruments(2, 2, 2, 2, 2));
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = random_unitary(5, &mut rng);
        let p = u.adjoint().matmul(&u).unwrap();
        assert!((&p - &ComplexMatrix::identity(5)).frobenius_norm() < 1e-13);
    }
}
