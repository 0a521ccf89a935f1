use serde::{Deserialize, Serialize};

use super::{ProcessDims, ProcessMatrix, VALIDATION_TOL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, partial_trace, ComplexMatrix, TensorSpace};
use crate::polytope::{CorrelationTable, Scenario};

/// Tolerance on negativity and normalization of computed probabilities.
const PROBABILITY_TOL: f64 = 1e-10;

/// One classical input's collection of CP maps, indexed by outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    d_in: usize,
    d_out: usize,
    maps: Vec<ComplexMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InstrumentReport {
    /// Smallest eigenvalue over all maps.
    pub min_eigenvalue: f64,
    /// `‖tr_out Σ_a M_a − 𝟙‖_F`.
    pub normalization_error: f64,
    /// Largest distance from Hermiticity over all maps.
    pub hermiticity: f64,
}

impl InstrumentReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_eigenvalue >= -tol && self.normalization_error <= tol && self.hermiticity <= tol
    }

    fn merge(self, other: InstrumentReport) -> InstrumentReport {
        InstrumentReport {
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
            normalization_error: self.normalization_error.max(other.normalization_error),
            hermiticity: self.hermiticity.max(other.hermiticity),
        }
    }
}

impl Instrument {
    pub fn new(d_in: usize, d_out: usize, maps: Vec<ComplexMatrix>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::Dimension("instrument dimensions must be positive".into()));
        }
        if maps.is_empty() {
            return Err(Error::Dimension("instrument needs at least one outcome".into()));
        }
        let n = d_in * d_out;
        if let Some(m) = maps.iter().find(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::Dimension(format!("instrument map is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
        }
        Ok(Instrument { d_in, d_out, maps })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn outcomes(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[ComplexMatrix] {
        &self.maps
    }

    pub fn map(&self, a: usize) -> &ComplexMatrix {
        &self.maps[a]
    }

    /// `tr_out Σ_a M_a`.
    pub fn trace_out_sum(&self) -> ComplexMatrix {
        let n = self.d_in * self.d_out;
        let mut sum = ComplexMatrix::zeros(n, n);
        for m in &self.maps {
            sum.add_scaled(m, 1.0);
        }
        let space = TensorSpace::new(vec![self.d_in, self.d_out]).expect("positive dims");
        partial_trace(&sum, &space, &[1].into_iter().collect()).expect("shape checked on construction")
    }

    pub fn validate(&self) -> Result<InstrumentReport> {
        let mut min_eigenvalue = f64::INFINITY;
        let mut hermiticity: f64 = 0.0;
        for m in &self.maps {
            hermiticity = hermiticity.max(m.hermiticity_defect());
            min_eigenvalue = min_eigenvalue.min(hermitian_eig(&m.hermitian_part())?.min_value());
        }
        let normalization_error = (&self.trace_out_sum() - &ComplexMatrix::identity(self.d_in)).frobenius_norm();
        Ok(InstrumentReport {
            min_eigenvalue,
            normalization_error,
            hermiticity,
        })
    }
}

/// One instrument per classical input, all on the same systems and with the
/// same number of outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct InstrumentSet {
    d_in: usize,
    d_out: usize,
    instruments: Vec<Instrument>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstrumentJson {
    input: usize,
    maps: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstrumentSetJson {
    dims: [usize; 2],
    instruments: Vec<InstrumentJson>,
}

impl InstrumentSet {
    pub fn new(instruments: Vec<Instrument>) -> Result<Self> {
        let first = instruments.first().ok_or_else(|| Error::Dimension("instrument set is empty".into()))?;
        let (d_in, d_out, k) = (first.d_in, first.d_out, first.outcomes());
        if instruments.iter().any(|i| i.d_in != d_in || i.d_out != d_out) {
            return Err(Error::Dimension("instruments in a set must share dimensions".into()));
        }
        if instruments.iter().any(|i| i.outcomes() != k) {
            return Err(Error::Dimension("instruments in a set must share the number of outcomes".into()));
        }
        Ok(InstrumentSet { d_in, d_out, instruments })
    }

    /// Builds a set from maps indexed `[input][outcome]`.
    pub fn from_maps(d_in: usize, d_out: usize, maps: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        Self::new(maps.into_iter().map(|m| Instrument::new(d_in, d_out, m)).collect::<Result<_>>()?)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn inputs(&self) -> usize {
        self.instruments.len()
    }

    pub fn outcomes(&self) -> usize {
        self.instruments[0].outcomes()
    }

    pub fn instrument(&self, x: usize) -> &Instrument {
        &self.instruments[x]
    }

    pub fn instruments(&self) -> &[Instrument] {
        &self.instruments
    }

    pub fn map(&self, x: usize, a: usize) -> &ComplexMatrix {
        self.instruments[x].map(a)
    }

    /// Worst-case residuals over all instruments in the set.
    pub fn validate(&self) -> Result<InstrumentReport> {
        let mut report = self.instruments[0].validate()?;
        for i in &self.instruments[1..] {
            report = report.merge(i.validate()?);
        }
        Ok(report)
    }

    pub fn to_json(&self) -> String {
        let raw = InstrumentSetJson {
            dims: [self.d_in, self.d_out],
            instruments: self
                .instruments
                .iter()
                .enumerate()
                .map(|(x, i)| InstrumentJson {
                    input: x,
                    maps: i.maps.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("instrument set serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut raw: InstrumentSetJson = serde_json::from_str(s)?;
        raw.instruments.sort_by_key(|i| i.input);
        if raw.instruments.iter().enumerate().any(|(x, i)| i.input != x) {
            return Err(Error::Parse("instrument inputs must be 0, 1, ..., n-1 without repeats".into()));
        }
        let [d_in, d_out] = raw.dims;
        Self::new(
            raw.instruments
                .into_iter()
                .map(|i| Instrument::new(d_in, d_out, i.maps))
                .collect::<Result<_>>()?,
        )
    }
}

fn check_dims(dims: ProcessDims, a: &InstrumentSet, b: &InstrumentSet) -> Result<()> {
    if (a.d_in, a.d_out) != (dims.a_in, dims.a_out) || (b.d_in, b.d_out) != (dims.b_in, dims.b_out) {
        return Err(Error::Dimension(format!(
            "instrument dims ({},{}) and ({},{}) do not match process dims {dims}",
            a.d_in, a.d_out, b.d_in, b.d_out
        )));
    }
    Ok(())
}

/// `tr_B[W (𝟙 ⊗ M_B)]`: the operator on Alice's space whose trace against
/// `M_A` gives `tr[(M_A ⊗ M_B) W]`.
pub fn bob_contraction(w: &ComplexMatrix, dims: ProcessDims, mb: &ComplexMatrix) -> ComplexMatrix {
    let da = dims.alice_dim();
    let db = dims.bob_dim();
    let n = da * db;
    let wd = w.as_slice();
    let md = mb.as_slice();
    let mut g = ComplexMatrix::zeros(da, da);
    let gd = g.as_mut_slice();
    for j in 0..da {
        for i in 0..da {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for l in 0..db {
                let row = &wd[(j * db + l) * n + i * db..(j * db + l) * n + i * db + db];
                for (k, wv) in row.iter().enumerate() {
                    acc += md[k * db + l] * wv;
                }
            }
            gd[j * da + i] = acc;
        }
    }
    g
}

/// `tr_A[W (M_A ⊗ 𝟙)]`: the operator on Bob's space whose trace against
/// `M_B` gives `tr[(M_A ⊗ M_B) W]`.
pub fn alice_contraction(w: &ComplexMatrix, dims: ProcessDims, ma: &ComplexMatrix) -> ComplexMatrix {
    let da = dims.alice_dim();
    let db = dims.bob_dim();
    let n = da * db;
    let wd = w.as_slice();
    let md = ma.as_slice();
    let mut h = ComplexMatrix::zeros(db, db);
    let hd = h.as_mut_slice();
    for j in 0..da {
        for i in 0..da {
            let m = md[i * da + j];
            if m.re == 0.0 && m.im == 0.0 {
                continue;
            }
            for l in 0..db {
                let row = &wd[(j * db + l) * n + i * db..(j * db + l) * n + i * db + db];
                for (k, wv) in row.iter().enumerate() {
                    hd[l * db + k] += m * wv;
                }
            }
        }
    }
    h
}

/// `p(a,b|x,y) = tr[(M_{a|x} ⊗ M_{b|y}) W]` in scenario order, without validity checks.
pub fn correlation_unchecked(w: &ProcessMatrix, a_set: &InstrumentSet, b_set: &InstrumentSet) -> Result<CorrelationTable<f64>> {
    let dims = w.dims();
    check_dims(dims, a_set, b_set)?;
    let s = Scenario::new(a_set.inputs(), b_set.inputs(), a_set.outcomes(), b_set.outcomes())?;
    let mut p = vec![0.0; s.len()];
    for y in 0..s.inputs_b {
        for b in 0..s.outputs_b {
            let g = bob_contraction(w.matrix(), dims, b_set.map(y, b));
            for x in 0..s.inputs_a {
                for a in 0..s.outputs_a {
                    p[s.index(x, y, a, b)] = a_set.map(x, a).trace_product(&g).re;
                }
            }
        }
    }
    CorrelationTable::new_unchecked(s, p)
}

/// The probability rule with validity checks on all inputs and on the result.
pub fn correlation(w: &ProcessMatrix, a_set: &InstrumentSet, b_set: &InstrumentSet) -> Result<CorrelationTable<f64>> {
    check_dims(w.dims(), a_set, b_set)?;
    let rw = w.validate()?;
    if !rw.passes(VALIDATION_TOL) {
        return Err(Error::Validation(format!("process matrix fails validity (worst residual {:.3e})", rw.worst())));
    }
    for (name, set) in [("Alice", a_set), ("Bob", b_set)] {
        let r = set.validate()?;
        if !r.passes(VALIDATION_TOL) {
            return Err(Error::Validation(format!("{name}'s instruments are invalid: {r:?}")));
        }
    }
    let t = correlation_unchecked(w, a_set, b_set)?;
    let s = t.scenario();
    if let Some((i, v)) = t.values().iter().enumerate().find(|(_, v)| **v < -PROBABILITY_TOL) {
        return Err(Error::Numerical(format!("negative probability {v:e} at flat index {i}")));
    }
    for x in 0..s.inputs_a {
        for y in 0..s.inputs_b {
            let total: f64 = (0..s.outputs_a).flat_map(|a| (0..s.outputs_b).map(move |b| (a, b))).map(|(a, b)| t.get(x, y, a, b)).sum();
            if (total - 1.0).abs() > PROBABILITY_TOL {
                return Err(Error::Numerical(format!("p(.,.|{x},{y}) sums to {total}")));
            }
        }
    }
    Ok(t)
}
