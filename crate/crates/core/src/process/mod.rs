//! Process matrices, instruments and the bilinear probability rule.
//!
//! Operators on Alice's and Bob's laboratories use the factor order
//! `A_I ⊗ A_O ⊗ B_I ⊗ B_O`. Instruments are stored as Choi operators
//! `CJ(E) = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` on `input ⊗ output`.

mod examples;
mod instrument;
mod lift;
mod random;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{factors, hermitian_eig, replace_with_identity, ComplexMatrix, TensorSpace};

pub use examples::{
    mix_wmax, ocb_example_w, pauli_string, real_roots, standard_instruments, wmax_coefficients, wmax_gyni_polynomial,
    wmax_gyni_value, wmax_qubit, WmaxVariant,
};
pub use instrument::{
    alice_contraction, bob_contraction, correlation, correlation_unchecked, Instrument, InstrumentReport, InstrumentSet,
};
pub use lift::{lift_convex, pad_inputs, Lifted};
pub use random::{random_instrument, random_instruments, random_instruments_with, random_unitary};

/// Default pass/fail tolerance for validity checks.
pub const VALIDATION_TOL: f64 = 1e-9;

pub const A_IN: usize = 0;
pub const A_OUT: usize = 1;
pub const B_IN: usize = 2;
pub const B_OUT: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 4]", into = "[usize; 4]")]
pub struct ProcessDims {
    pub a_in: usize,
    pub a_out: usize,
    pub b_in: usize,
    pub b_out: usize,
}

impl ProcessDims {
    pub fn new(a_in: usize, a_out: usize, b_in: usize, b_out: usize) -> Result<Self> {
        if [a_in, a_out, b_in, b_out].contains(&0) {
            return Err(Error::Dimension(format!("process dimensions must be positive, got {a_in},{a_out},{b_in},{b_out}")));
        }
        Ok(ProcessDims { a_in, a_out, b_in, b_out })
    }

    /// All four systems of dimension `d`.
    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(d, d, d, d)
    }

    pub fn qubits() -> Self {
        ProcessDims { a_in: 2, a_out: 2, b_in: 2, b_out: 2 }
    }

    pub fn alice_dim(&self) -> usize {
        self.a_in * self.a_out
    }

    pub fn bob_dim(&self) -> usize {
        self.b_in * self.b_out
    }

    pub fn total(&self) -> usize {
        self.alice_dim() * self.bob_dim()
    }

    pub fn space(&self) -> TensorSpace {
        TensorSpace::new(self.as_array().to_vec()).expect("dimensions are positive")
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.a_in, self.a_out, self.b_in, self.b_out]
    }

    /// Required trace `d_AO · d_BO`.
    pub fn required_trace(&self) -> f64 {
        (self.a_out * self.b_out) as f64
    }
}

impl TryFrom<[usize; 4]> for ProcessDims {
    type Error = Error;
    fn try_from(d: [usize; 4]) -> Result<Self> {
        Self::new(d[0], d[1], d[2], d[3])
    }
}

impl From<ProcessDims> for [usize; 4] {
    fn from(d: ProcessDims) -> Self {
        d.as_array()
    }
}

impl fmt::Display for ProcessDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a_in, self.a_out, self.b_in, self.b_out)
    }
}

impl std::str::FromStr for ProcessDims {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| Error::Parse(format!("dims '{s}': {e}"))))
            .collect::<Result<_>>()?;
        let arr: [usize; 4] = parts
            .try_into()
            .map_err(|_| Error::Parse(format!("dims '{s}' must have four entries dAI,dAO,dBI,dBO")))?;
        Self::try_from(arr)
    }
}

/// Per-condition residuals of the process-matrix validity conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    /// Smallest eigenvalue of `W`.
    pub min_eigenvalue: f64,
    /// `|tr W − d_AO d_BO|`.
    pub trace_error: f64,
    /// `‖_{B_I B_O}W − _{A_O B_I B_O}W‖_F`.
    pub bob_last: f64,
    /// `‖_{A_I A_O}W − _{A_I A_O B_O}W‖_F`.
    pub alice_last: f64,
    /// `‖W − (_{B_O}W + _{A_O}W − _{A_O B_O}W)‖_F`.
    pub no_loops: f64,
    /// Distance from Hermiticity.
    pub hermiticity: f64,
}

impl ValidityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_eigenvalue >= -tol
            && self.trace_error <= tol
            && self.bob_last <= tol
            && self.alice_last <= tol
            && self.no_loops <= tol
            && self.hermiticity <= tol
    }

    /// Largest violation among the five conditions.
    pub fn worst(&self) -> f64 {
        [(-self.min_eigenvalue).max(0.0), self.trace_error, self.bob_last, self.alice_last, self.no_loops, self.hermiticity]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    dims: ProcessDims,
    w: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessMatrixJson {
    dims: ProcessDims,
    matrix: ComplexMatrix,
}

impl ProcessMatrix {
    /// Wraps a matrix of the right shape. Validity is not checked here.
    pub fn new(dims: ProcessDims, w: ComplexMatrix) -> Result<Self> {
        let n = dims.total();
        if w.rows() != n || w.cols() != n {
            return Err(Error::Dimension(format!(
                "process matrix for dims {dims} must be {n}x{n}, got {}x{}",
                w.rows(),
                w.cols()
            )));
        }
        Ok(ProcessMatrix { dims, w })
    }

    /// `d_AO d_BO · 𝟙 / (d_A d_B)`: the maximally mixed process.
    pub fn maximally_mixed(dims: ProcessDims) -> Self {
        let n = dims.total();
        let w = ComplexMatrix::identity(n).scale(dims.required_trace() / n as f64);
        ProcessMatrix { dims, w }
    }

    pub fn dims(&self) -> ProcessDims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.w
    }

    pub fn validate(&self) -> Result<ValidityReport> {
        validate_process_matrix(&self.w, self.dims)
    }

    /// `q·self + (1−q)·other`.
    pub fn mix(&self, q: f64, other: &ProcessMatrix) -> Result<ProcessMatrix> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!("cannot mix dims {} and {}", self.dims, other.dims)));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Invalid(format!("mixing weight {q} outside [0,1]")));
        }
        let mut w = self.w.scale(q);
        w.add_scaled(&other.w, 1.0 - q);
        Ok(ProcessMatrix { dims: self.dims, w })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProcessMatrixJson {
            dims: self.dims,
            matrix: self.w.clone(),
        })
        .expect("process matrix serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: ProcessMatrixJson = serde_json::from_str(s)?;
        Self::new(raw.dims, raw.matrix)
    }
}

/// Residuals of every validity condition for `w` on the given dimensions.
pub fn validate_process_matrix(w: &ComplexMatrix, dims: ProcessDims) -> Result<ValidityReport> {
    let space = dims.space();
    let n = dims.total();
    if w.rows() != n || w.cols() != n {
        return Err(Error::Dimension(format!("expected {n}x{n} matrix for dims {dims}, got {}x{}", w.rows(), w.cols())));
    }
    let hermiticity = w.hermiticity_defect();
    let herm = w.hermitian_part();
    let min_eigenvalue = hermitian_eig(&herm)?.min_value();
    let trace_error = (w.trace() - dims.required_trace()).norm();
    let r = |f: &[usize]| replace_with_identity(w, &space, &factors(f));
    let bob_last = (&r(&[B_IN, B_OUT])? - &r(&[A_OUT, B_IN, B_OUT])?).frobenius_norm();
    let alice_last = (&r(&[A_IN, A_OUT])? - &r(&[A_IN, A_OUT, B_OUT])?).frobenius_norm();
    let mut expected = r(&[B_OUT])?;
    expected.add_scaled(&r(&[A_OUT])?, 1.0);
    expected.add_scaled(&r(&[A_OUT, B_OUT])?, -1.0);
    let no_loops = (w - &expected).frobenius_norm();
    Ok(ValidityReport {
        min_eigenvalue,
        trace_error,
        bob_last,
        alice_last,
        no_loops,
        hermiticity,
    })
}

/// Orthogonal projection (in the Hilbert–Schmidt sense) onto the linear
/// subspace cut out by the three replace-with-identity conditions.
pub fn project_valid_subspace(w: &ComplexMatrix, dims: ProcessDims) -> Result<ComplexMatrix> {
    let space = dims.space();
    let terms: [(&[usize], f64); 7] = [
        (&[B_OUT], 1.0),
        (&[A_OUT], 1.0),
        (&[A_OUT, B_OUT], -1.0),
        (&[B_IN, B_OUT], -1.0),
        (&[A_OUT, B_IN, B_OUT], 1.0),
        (&[A_IN, A_OUT], -1.0),
        (&[A_IN, A_OUT, B_OUT], 1.0),
    ];
    let mut out = ComplexMatrix::zeros(w.rows(), w.cols());
    for (f, s) in terms {
        out.add_scaled(&replace_with_identity(w, &space, &factors(f))?, s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_all, psd_project};
    use num_complex::Complex64;
    use rand::SeedableRng;

    fn phi_plus_projector() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = [Complex64::new(h, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(h, 0.0)];
        ComplexMatrix::outer(&v, &v)
    }

    #[test]
    fn maximally_mixed_is_valid() {
        for dims in [ProcessDims::qubits(), ProcessDims::new(2, 3, 1, 2).unwrap(), ProcessDims::uniform(3).unwrap()] {
            let w = ProcessMatrix::maximally_mixed(dims);
            let r = w.validate().unwrap();
            assert!(r.passes(1e-12), "{dims}: {r:?}");
        }
    }

    #[test]
    fn causal_loop_is_rejected() {
        let p = phi_plus_projector();
        let w = kron_all(&[&p, &p]).scale(4.0);
        let r = validate_process_matrix(&w, ProcessDims::qubits()).unwrap();
        assert!(r.min_eigenvalue >= -1e-12 && r.trace_error < 1e-12);
        assert!(r.no_loops > 0.1, "{r:?}");
        assert!(!r.passes(VALIDATION_TOL));
    }

    #[test]
    fn shape_is_checked() {
        assert!(ProcessMatrix::new(ProcessDims::qubits(), ComplexMatrix::identity(8)).is_err());
        assert!(ProcessDims::new(2, 0, 2, 2).is_err());
        assert_eq!("2,3,2,3".parse::<ProcessDims>().unwrap(), ProcessDims::new(2, 3, 2, 3).unwrap());
        assert!("2,3,2".parse::<ProcessDims>().is_err());
    }

    #[test]
    fn valid_subspace_projector_is_self_adjoint_and_idempotent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let dims = ProcessDims::new(2, 2, 3, 2).unwrap();
        let n = dims.total();
        let x = crate::testutil::random_hermitian(n, &mut rng);
        let y = crate::testutil::random_hermitian(n, &mut rng);
        let px = project_valid_subspace(&x, dims).unwrap();
        let py = project_valid_subspace(&y, dims).unwrap();
        let ppx = project_valid_subspace(&px, dims).unwrap();
        assert!((&ppx - &px).frobenius_norm() < 1e-12);
        assert!((px.inner(&y) - x.inner(&py)).abs() < 1e-10);
        // a PSD point of the subspace with the right trace is a valid process matrix
        let mut w = ComplexMatrix::identity(n).scale(dims.required_trace() / n as f64);
        w.add_scaled(&px, 0.01 / px.max_abs());
        let w = w.scale(dims.required_trace() / w.trace().re);
        let r = validate_process_matrix(&w, dims).unwrap();
        assert!(r.passes(1e-10), "{r:?}");
        // the PSD projection of an arbitrary matrix is not in general
        let q = psd_project(&x).unwrap();
        assert!(validate_process_matrix(&q, dims).unwrap().no_loops > 1e-3);
    }

    #[test]
    fn json_roundtrip() {
        let w = ProcessMatrix::maximally_mixed(ProcessDims::new(2, 2, 1, 3).unwrap());
        let js = w.to_json();
        assert_eq!(ProcessMatrix::from_json(&js).unwrap(), w);
        assert!(js.contains("\"dims\""));
        assert!(ProcessMatrix::from_json(r#"{"dims":[2,2,2,2],"matrix":{"rows":1,"cols":1,"entries":[[1,0]]}}"#).is_err());
    }
}
