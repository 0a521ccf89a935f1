//! Dense complex matrices over tensor-product spaces.
//!
//! Every multi-factor operator in this crate uses row-major index
//! flattening with the first factor most significant, so an operator on
//! `A_I ⊗ A_O ⊗ B_I ⊗ B_O` has index `((i_AI * d_AO + i_AO) * d_BI + i_BI) * d_BO + i_BO`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative Hermiticity tolerance, scaled by the Frobenius norm.
pub const TOL_HERM: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("matrix entries must be finite".into()));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Projector onto the computational basis state `|k>` in dimension `n`.
    pub fn basis_projector(n: usize, k: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.data[k * n + k] = ONE;
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn pauli_y() -> Self {
        Self::from_vec(
            2,
            2,
            vec![ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO],
        )
        .unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`, in place.
    pub fn add_scaled(&mut self, other: &ComplexMatrix, s: f64) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Real Hilbert–Schmidt inner product `Re tr(self† other)`.
    pub fn inner(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex64 {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        acc
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Distance from Hermiticity, `‖m − m†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol * self.frobenius_norm().max(1.0)
    }

    /// `(m + m†)/2`.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        let n = self.rows;
        Self::from_fn(n, n, |i, j| (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexMatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexMatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ComplexMatrixJson::deserialize(d)?;
        let data = raw.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::from_vec(raw.rows, raw.cols, data).map_err(serde::de::Error::custom)
    }
}

/// Ordered list of Hilbert-space factor dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSpace {
    dims: Vec<usize>,
}

impl TensorSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid factor dimensions {dims:?}")));
        }
        Ok(TensorSpace { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn check_operator(&self, m: &ComplexMatrix) -> Result<()> {
        let n = self.total_dim();
        if m.rows != n || m.cols != n {
            return Err(Error::Dimension(format!(
                "operator is {}x{} but space {:?} has dimension {n}",
                m.rows, m.cols, self.dims
            )));
        }
        Ok(())
    }

    fn check_factors(&self, factors: &BTreeSet<usize>) -> Result<()> {
        if let Some(&f) = factors.iter().find(|&&f| f >= self.dims.len()) {
            return Err(Error::Dimension(format!(
                "factor index {f} out of range for {} factors",
                self.dims.len()
            )));
        }
        Ok(())
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..b.rows {
                let base = (i * b.rows + k) * cols + j * b.cols;
                for l in 0..b.cols {
                    out.data[base + l] = aij * b.data[k * b.cols + l];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(1);
    for f in factors {
        acc = kron(&acc, f);
    }
    acc
}

/// Splits a tensor space into (kept, traced) strides used for index arithmetic.
struct FactorSplit {
    kept_dim: usize,
    traced_dim: usize,
    /// Flat full index for each (kept, traced) pair.
    full_index: Vec<usize>,
}

impl FactorSplit {
    fn new(space: &TensorSpace, traced: &BTreeSet<usize>) -> Self {
        let dims = &space.dims;
        let kept_dim: usize = dims.iter().enumerate().filter(|(i, _)| !traced.contains(i)).map(|(_, d)| d).product();
        let traced_dim: usize = dims.iter().enumerate().filter(|(i, _)| traced.contains(i)).map(|(_, d)| d).product();
        let total = space.total_dim();
        let mut full_index = vec![0; total];
        for flat in 0..total {
            let mut rem = flat;
            let mut kept = 0;
            let mut kept_stride = 1;
            let mut tr = 0;
            let mut tr_stride = 1;
            for (f, &d) in dims.iter().enumerate().rev() {
                let digit = rem % d;
                rem /= d;
                if traced.contains(&f) {
                    tr += digit * tr_stride;
                    tr_stride *= d;
                } else {
                    kept += digit * kept_stride;
                    kept_stride *= d;
                }
            }
            full_index[kept * traced_dim + tr] = flat;
        }
        FactorSplit {
            kept_dim,
            traced_dim,
            full_index,
        }
    }

    fn at(&self, kept: usize, traced: usize) -> usize {
        self.full_index[kept * self.traced_dim + traced]
    }
}

/// Partial trace over the listed factors; the remaining factors keep their order.
pub fn partial_trace(m: &ComplexMatrix, space: &TensorSpace, traced: &BTreeSet<usize>) -> Result<ComplexMatrix> {
    space.check_operator(m)?;
    space.check_factors(traced)?;
    let split = FactorSplit::new(space, traced);
    let n = m.cols;
    let mut out = ComplexMatrix::zeros(split.kept_dim, split.kept_dim);
    for i in 0..split.kept_dim {
        for j in 0..split.kept_dim {
            let mut acc = ZERO;
            for t in 0..split.traced_dim {
                acc += m.data[split.at(i, t) * n + split.at(j, t)];
            }
            out.data[i * split.kept_dim + j] = acc;
        }
    }
    Ok(out)
}

/// `_X W = 1^X/d_X ⊗ tr_X W`, with the identity reinserted in place of the traced factors.
pub fn replace_with_identity(w: &ComplexMatrix, space: &TensorSpace, factors: &BTreeSet<usize>) -> Result<ComplexMatrix> {
    if factors.is_empty() {
        return Err(Error::Invalid("replace_with_identity needs at least one factor".into()));
    }
    space.check_operator(w)?;
    space.check_factors(factors)?;
    let split = FactorSplit::new(space, factors);
    let n = w.cols;
    let inv_d = 1.0 / split.traced_dim as f64;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..split.kept_dim {
        for j in 0..split.kept_dim {
            let mut acc = ZERO;
            for t in 0..split.traced_dim {
                acc += w.data[split.at(i, t) * n + split.at(j, t)];
            }
            let v = acc * inv_d;
            for t in 0..split.traced_dim {
                out.data[split.at(i, t) * n + split.at(j, t)] = v;
            }
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V†` for a spectral function `f`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &wk) in weights.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors.data[i * n + k] * wk;
                for j in 0..n {
                    out.data[i * n + j] += vik * self.vectors.data[j * n + k].conj();
                }
            }
        }
        out
    }
}

/// Hermitian eigendecomposition (faer), eigenvalues sorted descending.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigendecomposition needs a square matrix, got {}x{}", m.rows, m.cols)));
    }
    let defect = m.hermiticity_defect();
    if defect > TOL_HERM * m.frobenius_norm().max(f64::MIN_POSITIVE) && defect > 0.0 {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let h = m.hermitian_part();
    let fm = faer::Mat::<Complex64>::from_fn(n, n, |i, j| h.data[i * n + j]);
    let eig = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let lambda: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
    if lambda.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lambda[j].total_cmp(&lambda[i]));
    let values = order.iter().map(|&k| lambda[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| u[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// Nearest positive semidefinite matrix in Frobenius norm.
pub fn psd_project(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    Ok(psd_project_from(m, &eig))
}

/// PSD projection reusing an existing decomposition of `m`; works from
/// whichever side of the spectrum has fewer terms.
pub fn psd_project_from(m: &ComplexMatrix, eig: &HermitianEigen) -> ComplexMatrix {
    let negatives = eig.values.iter().filter(|&&l| l < 0.0).count();
    if negatives == 0 {
        return m.hermitian_part();
    }
    if negatives <= eig.values.len() / 2 {
        let correction = eig.reconstruct_with(|l| if l < 0.0 { l } else { 0.0 });
        &m.hermitian_part() - &correction
    } else {
        eig.reconstruct_with(|l| l.max(0.0))
    }
}

/// Factor-index set helper.
pub fn factors(list: &[usize]) -> BTreeSet<usize> {
    list.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_hermitian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).frobenius_norm() <= tol
    }

    #[test]
    fn kron_identity_and_paulis() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let z = ComplexMatrix::pauli_z();
        assert_eq!(kron(&z, &z), ComplexMatrix::diag(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_matches_scalar_entry_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = ComplexMatrix::from_fn(2, 3, |_, _| Complex64::new(rng.gen(), rng.gen()));
        let b = ComplexMatrix::from_fn(3, 2, |_, _| Complex64::new(rng.gen(), rng.gen()));
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 3 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
        let xz = kron(&ComplexMatrix::pauli_x(), &ComplexMatrix::pauli_z());
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[0., 0., 1., 0., 0., 0., 0., -1., 1., 0., 0., 0., 0., -1., 0., 0.],
        )
        .unwrap();
        assert_eq!(xz, expected);
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_hermitian(3, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let space = TensorSpace::new(vec![3, 2]).unwrap();
        let reduced = partial_trace(&kron(&a, &b), &space, &factors(&[1])).unwrap();
        let expected = a.scale_complex(b.trace());
        assert!(approx_eq(&reduced, &expected, 1e-13 * expected.frobenius_norm()));
        let reduced_b = partial_trace(&kron(&a, &b), &space, &factors(&[0])).unwrap();
        assert!(approx_eq(&reduced_b, &b.scale_complex(a.trace()), 1e-13));
    }

    #[test]
    fn partial_trace_identity_and_bell_state() {
        let space = TensorSpace::new(vec![2, 2]).unwrap();
        let r = partial_trace(&ComplexMatrix::identity(4), &space, &factors(&[1])).unwrap();
        assert_eq!(r, ComplexMatrix::identity(2).scale(2.0));

        // 2|Φ+><Φ+| expanded by hand: entries (0,0),(0,3),(3,0),(3,3) equal 1.
        let mut phi = ComplexMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            phi[(i, j)] = ONE;
        }
        for f in 0..2 {
            let r = partial_trace(&phi, &space, &factors(&[f])).unwrap();
            assert_eq!(r, ComplexMatrix::identity(2));
        }
    }

    #[test]
    fn partial_trace_rejects_mismatch() {
        let space = TensorSpace::new(vec![2, 3]).unwrap();
        assert!(partial_trace(&ComplexMatrix::identity(4), &space, &factors(&[0])).is_err());
        let space = TensorSpace::new(vec![2, 2]).unwrap();
        assert!(partial_trace(&ComplexMatrix::identity(4), &space, &factors(&[2])).is_err());
    }

    #[test]
    fn replace_with_identity_fixed_point_and_trace() {
        let space = TensorSpace::new(vec![2, 2, 2, 2]).unwrap();
        let id = ComplexMatrix::identity(16);
        assert!(approx_eq(&replace_with_identity(&id, &space, &factors(&[1, 3])).unwrap(), &id, 1e-15));
        assert!(replace_with_identity(&id, &space, &BTreeSet::new()).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_hermitian(16, &mut rng);
        let once = replace_with_identity(&w, &space, &factors(&[1])).unwrap();
        let twice = replace_with_identity(&once, &space, &factors(&[1])).unwrap();
        assert!(approx_eq(&once, &twice, 1e-12 * w.frobenius_norm()));
        assert!((once.trace() - w.trace()).norm() <= 1e-12 * w.trace().norm().max(1.0));
    }

    #[test]
    fn replace_with_identity_kills_paulis_on_traced_factor() {
        let (i, x, z) = (ComplexMatrix::identity(2), ComplexMatrix::pauli_x(), ComplexMatrix::pauli_z());
        let zzzi = kron_all(&[&z, &z, &z, &i]);
        let zixx = kron_all(&[&z, &i, &x, &x]);
        let space = TensorSpace::new(vec![2, 2, 2, 2]).unwrap();
        let ao = factors(&[1]);
        assert!(replace_with_identity(&zzzi, &space, &ao).unwrap().frobenius_norm() < 1e-15);
        assert!(approx_eq(&replace_with_identity(&zixx, &space, &ao).unwrap(), &zixx, 1e-15));
    }

    #[test]
    fn eig_small_cases() {
        let e = hermitian_eig(&ComplexMatrix::diag(&[1.0, 3.0])).unwrap();
        assert_eq!(e.values.len(), 2);
        assert!((e.values[0] - 3.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);

        let e = hermitian_eig(&ComplexMatrix::pauli_x()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // eigenvector for +1 is (|0>+|1>)/√2 up to a phase
        let v0 = e.vectors[(0, 0)];
        let v1 = e.vectors[(1, 0)];
        assert!((v0.norm() - s).abs() < 1e-12 && (v1 - v0).norm() < 1e-12);
        let w0 = e.vectors[(0, 1)];
        let w1 = e.vectors[(1, 1)];
        assert!((w0.norm() - s).abs() < 1e-12 && (w1 + w0).norm() < 1e-12);
    }

    #[test]
    fn eig_matches_characteristic_polynomial() {
        // 2x2: [[a, b], [b*, c]] → (a+c)/2 ± sqrt(((a−c)/2)² + |b|²)
        let b = Complex64::new(0.3, -0.7);
        let m = ComplexMatrix::from_vec(2, 2, vec![Complex64::new(1.5, 0.0), b, b.conj(), Complex64::new(-0.25, 0.0)]).unwrap();
        let mean = (1.5 - 0.25) / 2.0;
        let rad = (((1.5 + 0.25) / 2.0f64).powi(2) + b.norm_sqr()).sqrt();
        let e = hermitian_eig(&m).unwrap();
        assert!((e.values[0] - (mean + rad)).abs() < 1e-10);
        assert!((e.values[1] - (mean - rad)).abs() < 1e-10);

        // 3x3 with a known spectrum: U diag(4, 1, -2) U† for a complex rotation U.
        let c = (0.4f64).cos();
        let s = (0.4f64).sin();
        let ph = Complex64::from_polar(1.0, 0.9);
        let u = ComplexMatrix::from_vec(
            3,
            3,
            vec![
                Complex64::new(c, 0.0), -ph * s, ZERO,
                ph.conj() * s, Complex64::new(c, 0.0), ZERO,
                ZERO, ZERO, ONE,
            ],
        )
        .unwrap();
        let m = &(&u * &ComplexMatrix::diag(&[4.0, 1.0, -2.0])) * &u.adjoint();
        let e = hermitian_eig(&m).unwrap();
        for (got, want) in e.values.iter().zip([4.0, 1.0, -2.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1, 2, 5, 16, 33] {
            let m = random_hermitian(n, &mut rng);
            let e = hermitian_eig(&m).unwrap();
            let rec = e.reconstruct_with(|l| l);
            assert!((&rec - &m).frobenius_norm() <= 1e-10 * m.frobenius_norm(), "n={n}");
            let vv = &e.vectors.adjoint() * &e.vectors;
            assert!((&vv - &ComplexMatrix::identity(n)).frobenius_norm() < 1e-11 * n as f64);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_handles_degenerate_and_block_spectra() {
        let space = TensorSpace::new(vec![2, 2, 2, 2]).unwrap();
        let m = replace_with_identity(&kron_all(&[&ComplexMatrix::pauli_z(), &ComplexMatrix::identity(8)]), &space, &factors(&[1])).unwrap();
        let e = hermitian_eig(&m).unwrap();
        assert!((e.reconstruct_with(|l| l).sub(&m)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn psd_projection_basics() {
        let p = psd_project(&ComplexMatrix::diag(&[2.0, -1.0])).unwrap();
        assert!(approx_eq(&p, &ComplexMatrix::diag(&[2.0, 0.0]), 1e-14));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = ComplexMatrix::from_fn(6, 6, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let psd = &g * &g.adjoint();
        assert!(approx_eq(&psd_project(&psd).unwrap(), &psd, 1e-11 * psd.frobenius_norm()));
    }

    #[test]
    fn psd_projection_is_nearest_among_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = random_hermitian(5, &mut rng);
        let p = psd_project(&m).unwrap();
        let best = (&m - &p).frobenius_norm();
        for _ in 0..100 {
            let g = ComplexMatrix::from_fn(5, 5, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let cand = &g * &g.adjoint();
            assert!(best <= (&m - &cand).frobenius_norm() + 1e-12);
        }
        let again = psd_project(&p).unwrap();
        assert!(approx_eq(&again, &p, 1e-12 * m.frobenius_norm()));
        assert!(hermitian_eig(&p).unwrap().min_value() >= -1e-12 * m.frobenius_norm());
    }

    #[test]
    fn json_shape() {
        let m = ComplexMatrix::pauli_y();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"entries":[[0.0,0.0],[0.0,-1.0],[0.0,1.0],[0.0,0.0]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"entries":[[0.0,0.0]]}"#).is_err());
    }
}
