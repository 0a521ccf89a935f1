use std::sync::Arc;

use num_complex::Complex64;

use super::SdpProblem;
use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix};
use crate::polytope::Scenario;
use crate::process::{alice_contraction, bob_contraction, project_valid_subspace, validate_process_matrix, InstrumentSet, ProcessDims, ProcessMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

fn scenario_of(a_set: &InstrumentSet, b_set: &InstrumentSet, coeffs: &[f64]) -> Result<Scenario> {
    let s = Scenario::new(a_set.inputs(), b_set.inputs(), a_set.outcomes(), b_set.outcomes())?;
    if coeffs.len() != s.len() {
        return Err(Error::Dimension(format!("{} coefficients for a scenario with {} cells", coeffs.len(), s.len())));
    }
    Ok(s)
}

/// Optimization over `W` with fixed instruments: cost `Σ c·(M_{a|x} ⊗ M_{b|y})`.
pub fn build_w_step(coeffs: &[f64], a_set: &InstrumentSet, b_set: &InstrumentSet, dims: ProcessDims) -> Result<SdpProblem> {
    let s = scenario_of(a_set, b_set, coeffs)?;
    if a_set.d_in() != dims.a_in || a_set.d_out() != dims.a_out || b_set.d_in() != dims.b_in || b_set.d_out() != dims.b_out {
        return Err(Error::Dimension(format!("instruments do not match dims {dims}")));
    }
    let n = dims.total();
    let mut cost = ComplexMatrix::zeros(n, n);
    for x in 0..s.inputs_a {
        for a in 0..s.outputs_a {
            let mut bob = ComplexMatrix::zeros(dims.bob_dim(), dims.bob_dim());
            let mut any = false;
            for y in 0..s.inputs_b {
                for b in 0..s.outputs_b {
                    let c = coeffs[s.index(x, y, a, b)];
                    if c != 0.0 {
                        bob.add_scaled(b_set.map(y, b), c);
                        any = true;
                    }
                }
            }
            if any {
                cost.add_scaled(&kron(a_set.map(x, a), &bob), 1.0);
            }
        }
    }
    let mut p = SdpProblem::single(cost.hermitian_part())?;
    p.set_subspace(Arc::new(move |x: &[ComplexMatrix]| vec![project_valid_subspace(&x[0], dims).expect("shape checked by solver")]));
    p.add_equality(vec![ComplexMatrix::identity(n)], dims.required_trace())?;
    let report = move |x: &[ComplexMatrix]| validate_process_matrix(&x[0], dims).expect("shape checked by solver");
    p.add_condition("bob_last", Arc::new(move |x: &[ComplexMatrix]| report(x).bob_last));
    p.add_condition("alice_last", Arc::new(move |x: &[ComplexMatrix]| report(x).alice_last));
    p.add_condition("no_loops", Arc::new(move |x: &[ComplexMatrix]| report(x).no_loops));
    p.set_interior_point(vec![ProcessMatrix::maximally_mixed(dims).into_matrix()])?;
    Ok(p)
}

/// Orthonormal basis of `d × d` Hermitian matrices.
fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        out.push(ComplexMatrix::basis_projector(d, j));
        for k in j + 1..d {
            let mut re = ComplexMatrix::zeros(d, d);
            re[(j, k)] = Complex64::new(h, 0.0);
            re[(k, j)] = Complex64::new(h, 0.0);
            let mut im = ComplexMatrix::zeros(d, d);
            im[(j, k)] = Complex64::new(0.0, h);
            im[(k, j)] = Complex64::new(0.0, -h);
            out.push(re);
            out.push(im);
        }
    }
    out
}

/// Cost operators `C_{x,a}` on the optimizing party's space.
fn party_costs(coeffs: &[f64], w: &ProcessMatrix, other: &InstrumentSet, party: Party, s: &Scenario) -> Vec<Vec<ComplexMatrix>> {
    let dims = w.dims();
    let (own_inputs, own_outcomes, d) = match party {
        Party::Alice => (s.inputs_a, s.outputs_a, dims.alice_dim()),
        Party::Bob => (s.inputs_b, s.outputs_b, dims.bob_dim()),
    };
    let mut costs = vec![vec![ComplexMatrix::zeros(d, d); own_outcomes]; own_inputs];
    for v in 0..other.inputs() {
        for o in 0..other.outcomes() {
            let g = match party {
                Party::Alice => bob_contraction(w.matrix(), dims, other.map(v, o)),
                Party::Bob => alice_contraction(w.matrix(), dims, other.map(v, o)),
            };
            for (u, row) in costs.iter_mut().enumerate() {
                for (k, c) in row.iter_mut().enumerate() {
                    let idx = match party {
                        Party::Alice => s.index(u, v, k, o),
                        Party::Bob => s.index(v, u, o, k),
                    };
                    if coeffs[idx] != 0.0 {
                        c.add_scaled(&g, coeffs[idx]);
                    }
                }
            }
        }
    }
    for row in costs.iter_mut() {
        for c in row.iter_mut() {
            *c = c.hermitian_part();
        }
    }
    costs
}

fn party_scenario(coeffs: &[f64], w: &ProcessMatrix, other: &InstrumentSet, party: Party, own: (usize, usize)) -> Result<Scenario> {
    let dims = w.dims();
    let (d_in, d_out) = match party {
        Party::Alice => (dims.b_in, dims.b_out),
        Party::Bob => (dims.a_in, dims.a_out),
    };
    if other.d_in() != d_in || other.d_out() != d_out {
        return Err(Error::Dimension(format!("fixed instruments do not match dims {dims}")));
    }
    let s = match party {
        Party::Alice => Scenario::new(own.0, other.inputs(), own.1, other.outcomes())?,
        Party::Bob => Scenario::new(other.inputs(), own.0, other.outcomes(), own.1)?,
    };
    if coeffs.len() != s.len() {
        return Err(Error::Dimension(format!("{} coefficients for a scenario with {} cells", coeffs.len(), s.len())));
    }
    Ok(s)
}

fn party_dims(dims: ProcessDims, party: Party) -> (usize, usize) {
    match party {
        Party::Alice => (dims.a_in, dims.a_out),
        Party::Bob => (dims.b_in, dims.b_out),
    }
}

/// Adds `Σ_a tr_O M_a = 𝟙_I` for the given block range.
fn add_instrument_constraints(p: &mut SdpProblem, blocks: std::ops::Range<usize>, d_in: usize, d_out: usize) -> Result<()> {
    let n = p.block_sizes().len();
    let id_out = ComplexMatrix::identity(d_out);
    for e in hermitian_basis(d_in) {
        let lifted = kron(&e, &id_out);
        let a: Vec<ComplexMatrix> = (0..n)
            .map(|i| if blocks.contains(&i) { lifted.clone() } else { ComplexMatrix::zeros(d_in * d_out, d_in * d_out) })
            .collect();
        p.add_equality(a, e.trace().re)?;
    }
    Ok(())
}

/// Optimization over one party's instruments, all inputs in a single problem.
/// Blocks are ordered `(input, outcome)` with the outcome fastest.
pub fn build_party_step(coeffs: &[f64], w: &ProcessMatrix, other: &InstrumentSet, party: Party, inputs: usize, outcomes: usize) -> Result<SdpProblem> {
    let s = party_scenario(coeffs, w, other, party, (inputs, outcomes))?;
    let (d_in, d_out) = party_dims(w.dims(), party);
    let costs = party_costs(coeffs, w, other, party, &s);
    let mut p = SdpProblem::new(costs.into_iter().flatten().collect())?;
    for u in 0..inputs {
        add_instrument_constraints(&mut p, u * outcomes..(u + 1) * outcomes, d_in, d_out)?;
    }
    let m0 = ComplexMatrix::identity(d_in * d_out).scale(1.0 / (outcomes * d_out) as f64);
    p.set_interior_point(vec![m0; inputs * outcomes])?;
    Ok(p)
}

/// The same optimization split into independent problems, one per input.
pub fn build_party_step_per_input(coeffs: &[f64], w: &ProcessMatrix, other: &InstrumentSet, party: Party, inputs: usize, outcomes: usize) -> Result<Vec<SdpProblem>> {
    let s = party_scenario(coeffs, w, other, party, (inputs, outcomes))?;
    let (d_in, d_out) = party_dims(w.dims(), party);
    let m0 = ComplexMatrix::identity(d_in * d_out).scale(1.0 / (outcomes * d_out) as f64);
    party_costs(coeffs, w, other, party, &s)
        .into_iter()
        .map(|row| {
            let mut p = SdpProblem::new(row)?;
            add_instrument_constraints(&mut p, 0..outcomes, d_in, d_out)?;
            p.set_interior_point(vec![m0.clone(); outcomes])?;
            Ok(p)
        })
        .collect()
}
