use num_complex::Complex64;
use rand::Rng;

use crate::linalg::ComplexMatrix;

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    g.hermitian_part()
}
