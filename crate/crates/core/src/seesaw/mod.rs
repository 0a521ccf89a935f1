//! Alternating maximization of a linear correlation functional over the
//! process matrix and both parties' instruments.
//!
//! Each cycle solves three SDPs in the order `W`, Alice, Bob. A step's
//! output replaces the current point only when it improves the objective,
//! so the per-restart value sequence never decreases. Results are lower
//! bounds on the true maximum.

mod boundary;
mod objective;

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::process::{correlation_unchecked, random_instruments_with, Instrument, InstrumentSet, ProcessDims, ProcessMatrix};
use crate::sdp::{build_party_step_per_input, build_w_step, solve, Party, SdpStatus, SolveOptions};

pub use boundary::{boundary_csv, boundary_scan, BoundaryPoint};
pub use objective::{Objective, ObjectiveLabel};

/// Label attached to every optimizer result.
pub const BOUND_KIND: &str = "lower bound";

/// Validation tolerance for returned triples.
pub const RESULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SeeSawOptions {
    /// Stop once a full cycle improves the value by less than this.
    pub tol: f64,
    pub max_cycles: usize,
    /// Per-step solver settings. Every step starts cold: the previous
    /// step's dual state belongs to a different cost and slows ADMM down.
    pub sdp: SolveOptions,
    /// Run restarts on the rayon pool (ignored without the `parallel` feature).
    pub parallel: bool,
}

impl Default for SeeSawOptions {
    fn default() -> Self {
        SeeSawOptions {
            tol: 1e-7,
            max_cycles: 200,
            sdp: SolveOptions {
                tol: 1e-6,
                max_iter: 2_500,
                ..SolveOptions::default()
            },
            parallel: true,
        }
    }
}

/// Default number of restarts for local dimension `d`.
pub fn default_restarts(dims: ProcessDims) -> usize {
    match dims.as_array().into_iter().max().unwrap_or(2) {
        0..=2 => 50,
        3 => 20,
        _ => 10,
    }
}

#[derive(Clone, Debug)]
pub struct RestartOutcome {
    pub value: f64,
    pub cycles: usize,
    /// Objective value after every accepted-or-rejected step.
    pub history: Vec<f64>,
    pub w: ProcessMatrix,
    pub a_set: InstrumentSet,
    pub b_set: InstrumentSet,
}

#[derive(Clone, Debug)]
pub struct SeeSawResult {
    pub label: String,
    pub dims: ProcessDims,
    pub seed: u64,
    pub best_value: f64,
    pub best_restart: usize,
    pub w: ProcessMatrix,
    pub a_set: InstrumentSet,
    pub b_set: InstrumentSet,
    /// `None` for restarts that failed.
    pub per_restart_values: Vec<Option<f64>>,
    pub iterations_per_restart: Vec<usize>,
    pub histories: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Summary<'a> {
    objective: &'a str,
    dims: [usize; 4],
    seed: u64,
    restarts: usize,
    bound_kind: &'a str,
    best_value: f64,
    best_restart: usize,
    per_restart_values: &'a [Option<f64>],
    iterations_per_restart: &'a [usize],
}

impl SeeSawResult {
    /// Base name shared by all files written for this result.
    pub fn file_stem(&self) -> String {
        let d = self.dims.as_array();
        format!("{}_{}-{}-{}-{}_seed{}", self.label, d[0], d[1], d[2], d[3], self.seed)
    }

    pub fn summary_json(&self) -> String {
        let s = Summary {
            objective: &self.label,
            dims: self.dims.as_array(),
            seed: self.seed,
            restarts: self.per_restart_values.len(),
            bound_kind: BOUND_KIND,
            best_value: self.best_value,
            best_restart: self.best_restart,
            per_restart_values: &self.per_restart_values,
            iterations_per_restart: &self.iterations_per_restart,
        };
        serde_json::to_string_pretty(&s).expect("plain data serializes")
    }

    /// Writes `<stem>_result.json`, `<stem>_w.json`, `<stem>_alice.json` and
    /// `<stem>_bob.json` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let stem = self.file_stem();
        let files = [
            (format!("{stem}_result.json"), self.summary_json()),
            (format!("{stem}_w.json"), self.w.to_json()),
            (format!("{stem}_alice.json"), self.a_set.to_json()),
            (format!("{stem}_bob.json"), self.b_set.to_json()),
        ];
        let mut out = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body + "\n")?;
            out.push(path);
        }
        Ok(out)
    }
}

fn check_scenario(obj: &Objective) -> Result<()> {
    if obj.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(Error::Invalid("objective coefficients must be finite".into()));
    }
    Ok(())
}

/// Runs one restart from instruments drawn with the given RNG stream.
pub fn run_restart(obj: &Objective, dims: ProcessDims, seed: u64, restart: usize, opts: &SeeSawOptions) -> Result<RestartOutcome> {
    check_scenario(obj)?;
    let s = obj.scenario();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let mut a_set = random_instruments_with(dims.a_in, dims.a_out, s.inputs_a, s.outputs_a, &mut rng);
    let mut b_set = random_instruments_with(dims.b_in, dims.b_out, s.inputs_b, s.outputs_b, &mut rng);
    let mut w: Option<ProcessMatrix> = None;
    let mut value = f64::NEG_INFINITY;
    let mut history = Vec::new();
    let mut cycles = 0;

    for cycle in 1..=opts.max_cycles {
        cycles = cycle;
        let start = value;

        let p = build_w_step(obj.coeffs(), &a_set, &b_set, dims)?;
        let sol = solve(&p, &opts.sdp)?;
        if sol.status == SdpStatus::Infeasible {
            return Err(Error::Optimization("W-step reported infeasibility".into()));
        }
        if sol.value > value || w.is_none() {
            value = sol.value;
            w = Some(ProcessMatrix::new(dims, sol.x.into_iter().next().expect("one block"))?);
        }
        history.push(value);
        let w_ref = w.as_ref().expect("set in first cycle");

        if let Some((v, set)) = party_step(obj, w_ref, &b_set, Party::Alice, opts)? {
            if v > value {
                value = v;
                a_set = set;
            }
        }
        history.push(value);

        if let Some((v, set)) = party_step(obj, w_ref, &a_set, Party::Bob, opts)? {
            if v > value {
                value = v;
                b_set = set;
            }
        }
        history.push(value);

        if value - start < opts.tol {
            break;
        }
    }

    let w = w.ok_or_else(|| Error::Optimization("no cycle completed".into()))?;
    let value = obj.evaluate(&correlation_unchecked(&w, &a_set, &b_set)?);
    let rw = w.validate()?;
    let ra = a_set.validate()?;
    let rb = b_set.validate()?;
    if !rw.passes(RESULT_TOL) || !ra.passes(RESULT_TOL) || !rb.passes(RESULT_TOL) {
        return Err(Error::Validation(format!("restart {restart} produced an invalid triple: {rw:?} {ra:?} {rb:?}")));
    }
    Ok(RestartOutcome {
        value,
        cycles,
        history,
        w,
        a_set,
        b_set,
    })
}

/// One party's step, solved input by input. `None` when any sub-problem fails
/// to produce a usable point, in which case the current instruments are kept.
fn party_step(obj: &Objective, w: &ProcessMatrix, other: &InstrumentSet, party: Party, opts: &SeeSawOptions) -> Result<Option<(f64, InstrumentSet)>> {
    let s = obj.scenario();
    let (inputs, outcomes, d_in, d_out) = match party {
        Party::Alice => (s.inputs_a, s.outputs_a, w.dims().a_in, w.dims().a_out),
        Party::Bob => (s.inputs_b, s.outputs_b, w.dims().b_in, w.dims().b_out),
    };
    let problems = build_party_step_per_input(obj.coeffs(), w, other, party, inputs, outcomes)?;
    let mut total = 0.0;
    let mut instruments = Vec::with_capacity(inputs);
    for p in &problems {
        let sol = solve(p, &opts.sdp)?;
        if sol.status == SdpStatus::Infeasible {
            return Ok(None);
        }
        total += sol.value;
        let maps: Vec<ComplexMatrix> = sol.x;
        instruments.push(Instrument::new(d_in, d_out, maps)?);
    }
    Ok(Some((total, InstrumentSet::new(instruments)?)))
}

/// Best of `restarts` independent See-Saw runs. Restart `r` draws its initial
/// instruments from the ChaCha stream `r` of `seed`, so results do not depend
/// on scheduling.
pub fn optimize(obj: &Objective, dims: ProcessDims, restarts: usize, seed: u64, opts: &SeeSawOptions) -> Result<SeeSawResult> {
    if restarts == 0 {
        return Err(Error::Invalid("need at least one restart".into()));
    }
    check_scenario(obj)?;
    let run = |r: usize| run_restart(obj, dims, seed, r, opts);
    let outcomes: Vec<Result<RestartOutcome>> = run_all(restarts, opts.parallel, run);

    let mut per_restart_values = Vec::with_capacity(restarts);
    let mut iterations_per_restart = Vec::with_capacity(restarts);
    let mut histories = Vec::with_capacity(restarts);
    let mut best: Option<(usize, RestartOutcome)> = None;
    for (r, out) in outcomes.into_iter().enumerate() {
        match out {
            Ok(o) => {
                per_restart_values.push(Some(o.value));
                iterations_per_restart.push(o.cycles);
                histories.push(o.history.clone());
                if best.as_ref().is_none_or(|(_, b)| o.value > b.value) {
                    best = Some((r, o));
                }
            }
            Err(e) => {
                log::warn!("restart {r} discarded: {e}");
                per_restart_values.push(None);
                iterations_per_restart.push(0);
                histories.push(Vec::new());
            }
        }
    }
    let (best_restart, b) = best.ok_or_else(|| Error::Optimization(format!("all {restarts} restarts failed")))?;
    Ok(SeeSawResult {
        label: obj.label().to_string(),
        dims,
        seed,
        best_value: b.value,
        best_restart,
        w: b.w,
        a_set: b.a_set,
        b_set: b.b_set,
        per_restart_values,
        iterations_per_restart,
        histories,
    })
}

#[cfg(feature = "parallel")]
fn run_all<T: Send>(n: usize, parallel: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_all<T: Send>(n: usize, _parallel: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}
