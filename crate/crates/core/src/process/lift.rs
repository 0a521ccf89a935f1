use super::{InstrumentSet, ProcessDims, ProcessMatrix};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// A process matrix with the instruments of both parties.
#[derive(Clone, Debug, PartialEq)]
pub struct Lifted {
    pub w: ProcessMatrix,
    pub alice: InstrumentSet,
    pub bob: InstrumentSet,
}

/// Embeds square `m` on `old ⊗ out` into `new ⊗ out` (`new ≥ old`), leaving the padded block zero.
fn embed_input(m: &ComplexMatrix, old: usize, new: usize, out: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(new * out, new * out);
    for i in 0..old * out {
        for j in 0..old * out {
            e[(i, j)] = m[(i, j)];
        }
    }
    e
}

fn pad_instruments(set: &InstrumentSet, new_in: usize) -> Result<InstrumentSet> {
    let (old, out) = (set.d_in(), set.d_out());
    if new_in == old {
        return Ok(set.clone());
    }
    // the padded inputs get a trivial instrument: outcome 0, output maximally mixed
    let mut filler = ComplexMatrix::zeros(new_in * out, new_in * out);
    for i in old * out..new_in * out {
        filler[(i, i)] = (1.0 / out as f64).into();
    }
    let maps = set
        .instruments()
        .iter()
        .map(|inst| {
            inst.maps()
                .iter()
                .enumerate()
                .map(|(a, m)| {
                    let mut e = embed_input(m, old, new_in, out);
                    if a == 0 {
                        e.add_scaled(&filler, 1.0);
                    }
                    e
                })
                .collect()
        })
        .collect();
    InstrumentSet::from_maps(new_in, out, maps)
}

/// Enlarges the input systems of a process and its instruments to
/// `(a_in, b_in)`. Correlations and validity are preserved.
pub fn pad_inputs(w: &ProcessMatrix, alice: &InstrumentSet, bob: &InstrumentSet, a_in: usize, b_in: usize) -> Result<Lifted> {
    let d = w.dims();
    if a_in < d.a_in || b_in < d.b_in {
        return Err(Error::Dimension(format!("cannot shrink inputs of {d} to {a_in},{b_in}")));
    }
    let nd = ProcessDims::new(a_in, d.a_out, b_in, d.b_out)?;
    let (ao, bo) = (d.a_out, d.b_out);
    let old_b = d.bob_dim();
    let new_b = nd.bob_dim();
    let remap = |idx: usize| {
        let (alice, bob) = (idx / old_b, idx % old_b);
        let (ai, aout) = (alice / ao, alice % ao);
        let (bi, bout) = (bob / bo, bob % bo);
        ((ai * ao + aout) * new_b) + bi * bo + bout
    };
    let n = d.total();
    let mut nw = ComplexMatrix::zeros(nd.total(), nd.total());
    for i in 0..n {
        for j in 0..n {
            nw[(remap(i), remap(j))] = w.matrix()[(i, j)];
        }
    }
    Ok(Lifted {
        w: ProcessMatrix::new(nd, nw)?,
        alice: pad_instruments(alice, a_in)?,
        bob: pad_instruments(bob, b_in)?,
    })
}

fn check_pair(w: &ProcessMatrix, a: &InstrumentSet, b: &InstrumentSet) -> Result<()> {
    let d = w.dims();
    if (a.d_in(), a.d_out(), b.d_in(), b.d_out()) != (d.a_in, d.a_out, d.b_in, d.b_out) {
        return Err(Error::Dimension(format!("instruments do not match process dims {d}")));
    }
    Ok(())
}

fn block_diag_instruments(s0: &InstrumentSet, s1: &InstrumentSet) -> Result<InstrumentSet> {
    if (s0.inputs(), s0.outcomes()) != (s1.inputs(), s1.outcomes()) {
        return Err(Error::Dimension("instrument sets have different numbers of inputs or outcomes".into()));
    }
    let m = s0.d_in() * s0.d_out();
    let maps = (0..s0.inputs())
        .map(|x| {
            (0..s0.outcomes())
                .map(|a| {
                    let mut e = ComplexMatrix::zeros(2 * m, 2 * m);
                    for i in 0..m {
                        for j in 0..m {
                            e[(i, j)] = s0.map(x, a)[(i, j)];
                            e[(m + i, m + j)] = s1.map(x, a)[(i, j)];
                        }
                    }
                    e
                })
                .collect()
        })
        .collect();
    InstrumentSet::from_maps(2 * s0.d_in(), s0.d_out(), maps)
}

/// Realizes `q·p₀ + (1−q)·p₁` with a single process on inputs enlarged by an
/// ancillary qubit per party (ancilla first within each input factor):
/// `W = q|00⟩⟨00| ⊗ W₀ + (1−q)|11⟩⟨11| ⊗ W₁` and block-diagonal instruments.
///
/// Input systems of unequal size are padded first; output dimensions must agree.
#[allow(clippy::too_many_arguments)]
pub fn lift_convex(
    w0: &ProcessMatrix,
    w1: &ProcessMatrix,
    q: f64,
    a0: &InstrumentSet,
    a1: &InstrumentSet,
    b0: &InstrumentSet,
    b1: &InstrumentSet,
) -> Result<Lifted> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Invalid(format!("mixing weight {q} outside [0,1]")));
    }
    check_pair(w0, a0, b0)?;
    check_pair(w1, a1, b1)?;
    let (d0, d1) = (w0.dims(), w1.dims());
    if (d0.a_out, d0.b_out) != (d1.a_out, d1.b_out) {
        return Err(Error::Dimension(format!("output dimensions differ: {d0} vs {d1}")));
    }
    let a_in = d0.a_in.max(d1.a_in);
    let b_in = d0.b_in.max(d1.b_in);
    let p0 = pad_inputs(w0, a0, b0, a_in, b_in)?;
    let p1 = pad_inputs(w1, a1, b1, a_in, b_in)?;
    let d = p0.w.dims();
    let (da, db) = (d.alice_dim(), d.bob_dim());
    let nd = ProcessDims::new(2 * a_in, d.a_out, 2 * b_in, d.b_out)?;
    let nb = 2 * db;
    let mut w = ComplexMatrix::zeros(nd.total(), nd.total());
    for (c, weight, src) in [(0, q, &p0.w), (1, 1.0 - q, &p1.w)] {
        let at = |alice: usize, bob: usize| (c * da + alice) * nb + c * db + bob;
        for i in 0..da * db {
            for j in 0..da * db {
                w[(at(i / db, i % db), at(j / db, j % db))] = src.matrix()[(i, j)] * weight;
            }
        }
    }
    Ok(Lifted {
        w: ProcessMatrix::new(nd, w)?,
        alice: block_diag_instruments(&p0.alice, &p1.alice)?,
        bob: block_diag_instruments(&p0.bob, &p1.bob)?,
    })
}
