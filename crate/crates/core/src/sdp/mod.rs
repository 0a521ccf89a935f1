//! ADMM for block semidefinite programs of the form
//!
//! maximize `Σ_i Re tr(C_i X_i)` subject to `X ∈ L`, `⟨A_k, X⟩ = b_k`, `X_i ⪰ 0`,
//!
//! where `L` is a linear subspace given by its orthogonal projector.

mod steps;

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, psd_project_from, ComplexMatrix};

pub use steps::{build_party_step, build_party_step_per_input, build_w_step, Party};

/// A point of the block variable space.
pub type Blocks = Vec<ComplexMatrix>;

/// Orthogonal projector onto a linear subspace of the block space.
pub type SubspaceProjector = Arc<dyn Fn(&[ComplexMatrix]) -> Blocks + Send + Sync>;

/// Named residual of a structured condition, `0` when satisfied.
pub type ResidualFn = Arc<dyn Fn(&[ComplexMatrix]) -> f64 + Send + Sync>;

fn block_inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

fn block_norm(a: &[ComplexMatrix]) -> f64 {
    block_inner(a, a).sqrt()
}

fn axpy(y: &mut [ComplexMatrix], s: f64, x: &[ComplexMatrix]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        yi.add_scaled(xi, s);
    }
}

fn diff_norm(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.as_slice().iter().zip(y.as_slice()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone)]
pub struct SdpProblem {
    blocks: Vec<usize>,
    objective: Blocks,
    subspace: Option<SubspaceProjector>,
    conditions: Vec<(String, ResidualFn)>,
    equalities: Vec<(Blocks, f64)>,
    interior: Option<Blocks>,
}

impl std::fmt::Debug for SdpProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdpProblem")
            .field("blocks", &self.blocks)
            .field("equalities", &self.equalities.len())
            .field("conditions", &self.conditions.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>())
            .field("has_subspace", &self.subspace.is_some())
            .finish()
    }
}

impl SdpProblem {
    /// Problem with the given Hermitian cost blocks and no constraints beyond PSD.
    pub fn new(objective: Blocks) -> Result<Self> {
        if objective.is_empty() {
            return Err(Error::Dimension("SDP needs at least one block".into()));
        }
        let mut blocks = Vec::with_capacity(objective.len());
        for c in &objective {
            if !c.is_square() {
                return Err(Error::Dimension(format!("cost block is {}x{}", c.rows(), c.cols())));
            }
            if !c.is_hermitian(1e-10) {
                return Err(Error::NotHermitian(c.hermiticity_defect()));
            }
            blocks.push(c.rows());
        }
        Ok(SdpProblem {
            blocks,
            objective,
            subspace: None,
            conditions: Vec::new(),
            equalities: Vec::new(),
            interior: None,
        })
    }

    /// Single-block convenience constructor.
    pub fn single(objective: ComplexMatrix) -> Result<Self> {
        Self::new(vec![objective])
    }

    fn check_shape(&self, x: &[ComplexMatrix]) -> Result<()> {
        if x.len() != self.blocks.len() || x.iter().zip(&self.blocks).any(|(m, &n)| m.rows() != n || m.cols() != n) {
            return Err(Error::Dimension(format!("expected blocks of sizes {:?}", self.blocks)));
        }
        Ok(())
    }

    /// Adds `Σ_i Re tr(A_i X_i) = b`.
    pub fn add_equality(&mut self, a: Blocks, b: f64) -> Result<()> {
        self.check_shape(&a)?;
        if a.iter().any(|m| !m.is_hermitian(1e-10)) {
            return Err(Error::NotHermitian(a.iter().map(|m| m.hermiticity_defect()).fold(0.0, f64::max)));
        }
        self.equalities.push((a, b));
        Ok(())
    }

    /// Restricts the variable to the range of an orthogonal projector.
    pub fn set_subspace(&mut self, projector: SubspaceProjector) {
        self.subspace = Some(projector);
    }

    /// Registers a named residual for reporting.
    pub fn add_condition(&mut self, name: &str, residual: ResidualFn) {
        self.conditions.push((name.to_string(), residual));
    }

    /// A strictly feasible point, used to restore exact feasibility of the returned iterate.
    pub fn set_interior_point(&mut self, x: Blocks) -> Result<()> {
        self.check_shape(&x)?;
        self.interior = Some(x);
        Ok(())
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.blocks
    }

    pub fn objective(&self) -> &[ComplexMatrix] {
        &self.objective
    }

    pub fn equality_count(&self) -> usize {
        self.equalities.len()
    }

    pub fn condition_names(&self) -> Vec<&str> {
        self.conditions.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn has_subspace(&self) -> bool {
        self.subspace.is_some()
    }

    pub fn value(&self, x: &[ComplexMatrix]) -> f64 {
        block_inner(&self.objective, x)
    }

    /// Residuals of every declared equality and structured condition at `x`.
    pub fn constraint_residuals(&self, x: &[ComplexMatrix]) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .equalities
            .iter()
            .enumerate()
            .map(|(k, (a, b))| (format!("eq{k}"), (block_inner(a, x) - b).abs()))
            .collect();
        if let Some(p) = &self.subspace {
            out.push(("subspace".into(), diff_norm(&p(x), x)));
        }
        for (name, f) in &self.conditions {
            out.push((name.clone(), f(x)));
        }
        out
    }

    fn project_subspace(&self, x: &[ComplexMatrix]) -> Blocks {
        match &self.subspace {
            Some(p) => p(x),
            None => x.to_vec(),
        }
    }

    fn compile_affine(&self) -> Result<AffineProjector> {
        let mut basis: Vec<(Blocks, f64)> = Vec::new();
        for (a, b) in &self.equalities {
            let mut q = self.project_subspace(a);
            let mut c = *b;
            for _ in 0..2 {
                for (qj, cj) in &basis {
                    let dot = block_inner(qj, &q);
                    axpy(&mut q, -dot, qj);
                    c -= dot * cj;
                }
            }
            let norm = block_norm(&q);
            let scale = block_norm(a).max(1.0);
            if norm <= 1e-10 * scale {
                if c.abs() > 1e-8 * scale.max(b.abs()) {
                    return Err(Error::Optimization("equality constraints are inconsistent".into()));
                }
                continue;
            }
            for m in q.iter_mut() {
                *m = m.scale(1.0 / norm);
            }
            basis.push((q, c / norm));
        }
        Ok(AffineProjector { basis })
    }

    fn project_affine(&self, aff: &AffineProjector, y: &[ComplexMatrix]) -> Blocks {
        let mut x = self.project_subspace(y);
        for (q, c) in &aff.basis {
            let dot = block_inner(q, &x);
            axpy(&mut x, c - dot, q);
        }
        for m in x.iter_mut() {
            *m = m.hermitian_part();
        }
        x
    }
}

struct AffineProjector {
    basis: Vec<(Blocks, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Converged,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub tol_obj: f64,
    /// Iterations of stagnation above `stagnation_level` before declaring infeasibility.
    pub stagnation_window: usize,
    pub stagnation_level: f64,
    /// Record `(iteration, value, primal, dual)` every iteration.
    pub trace: bool,
    /// Previous `(Z, U, rho)` state to start from.
    pub warm_start: Option<WarmStart>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rho: 1.0,
            tol: 1e-8,
            max_iter: 50_000,
            tol_obj: 1e-7,
            stagnation_window: 5_000,
            stagnation_level: 1e-3,
            trace: false,
            warm_start: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WarmStart {
    pub z: Blocks,
    pub u: Blocks,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Feasible point: satisfies every affine constraint and is PSD up to rounding.
    pub x: Blocks,
    pub value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SdpStatus,
    /// Final ADMM state, for warm-starting a related problem.
    pub state: WarmStart,
    pub trace: Vec<TraceRow>,
}

impl SdpSolution {
    /// Iteration trace as CSV with header `iteration,value,primal_residual,dual_residual`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,value,primal_residual,dual_residual\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{:e},{:e},{:e}", r.iteration, r.value, r.primal_residual, r.dual_residual);
        }
        out
    }
}

/// Residual balancing: period, threshold ratio, and the iteration after which `rho` is frozen.
const BALANCE_EVERY: usize = 50;
const BALANCE_RATIO: f64 = 10.0;
const BALANCE_UNTIL: usize = 2_000;
const OBJ_WINDOW: usize = 50;
const RELAXATION: f64 = 1.6;

/// Solves the problem by ADMM on the splitting `X ∈ affine set`, `Z ⪰ 0`, `X = Z`.
pub fn solve(p: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    let aff = match p.compile_affine() {
        Ok(a) => a,
        Err(Error::Optimization(msg)) => {
            log::debug!("SDP infeasible: {msg}");
            let zero: Blocks = p.blocks.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect();
            return Ok(SdpSolution {
                x: zero.clone(),
                value: f64::NAN,
                primal_residual: f64::INFINITY,
                dual_residual: f64::INFINITY,
                iterations: 0,
                status: SdpStatus::Infeasible,
                state: WarmStart {
                    z: zero.clone(),
                    u: zero,
                    rho: opts.rho,
                },
                trace: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    let (mut z, mut u, mut rho) = match &opts.warm_start {
        Some(w) => {
            p.check_shape(&w.z)?;
            p.check_shape(&w.u)?;
            (w.z.clone(), w.u.clone(), w.rho)
        }
        None => {
            let z = match &p.interior {
                Some(x0) => x0.clone(),
                None => p.blocks.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect(),
            };
            let u = p.blocks.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect();
            (z, u, opts.rho)
        }
    };
    let c_norm = block_norm(&p.objective).max(1e-300);
    let mut status = SdpStatus::MaxIter;
    let mut trace = Vec::new();
    let mut history: std::collections::VecDeque<f64> = std::collections::VecDeque::with_capacity(OBJ_WINDOW + 1);
    let mut stagnant = 0usize;
    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        // X-update: affine projection of the shifted point
        let mut y = z.clone();
        axpy(&mut y, -1.0, &u);
        axpy(&mut y, 1.0 / rho, &p.objective);
        let x = p.project_affine(&aff, &y);
        // Z-update: blockwise PSD projection
        let z_prev = std::mem::take(&mut z);
        // over-relaxed point  a·X + (1−a)·Z_prev
        let mut xr = x.iter().map(|m| m.scale(RELAXATION)).collect::<Blocks>();
        axpy(&mut xr, 1.0 - RELAXATION, &z_prev);
        let mut v = xr.clone();
        axpy(&mut v, 1.0, &u);
        z = v
            .iter()
            .map(|m| hermitian_eig(m).map(|e| psd_project_from(m, &e)))
            .collect::<Result<_>>()?;
        // dual update
        for ((ui, xi), zi) in u.iter_mut().zip(&xr).zip(&z) {
            ui.add_scaled(xi, 1.0);
            ui.add_scaled(zi, -1.0);
        }
        r_norm = diff_norm(&x, &z);
        s_norm = rho * diff_norm(&z, &z_prev);
        let value = p.value(&z);
        if opts.trace {
            trace.push(TraceRow {
                iteration: it,
                value,
                primal_residual: r_norm,
                dual_residual: s_norm,
            });
        }
        history.push_back(value);
        if history.len() > OBJ_WINDOW {
            history.pop_front();
        }
        let scale = block_norm(&x).max(block_norm(&z)).max(1.0);
        let dual_scale = (rho * block_norm(&u)).max(c_norm).max(1.0);
        let stable = history.len() == OBJ_WINDOW && {
            let (lo, hi) = history.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            hi - lo <= opts.tol_obj * value.abs().max(1.0)
        };
        if r_norm <= opts.tol * scale && s_norm <= opts.tol * dual_scale && stable {
            status = SdpStatus::Converged;
            break;
        }
        if r_norm.max(s_norm) > opts.stagnation_level {
            stagnant += 1;
            if stagnant >= opts.stagnation_window {
                status = SdpStatus::Infeasible;
                break;
            }
        } else {
            stagnant = 0;
        }
        if it % BALANCE_EVERY == 0 && it <= BALANCE_UNTIL {
            if r_norm > BALANCE_RATIO * s_norm {
                rho *= 2.0;
                u.iter_mut().for_each(|m| *m = m.scale(0.5));
            } else if s_norm > BALANCE_RATIO * r_norm {
                rho /= 2.0;
                u.iter_mut().for_each(|m| *m = m.scale(2.0));
            }
        }
    }
    let state = WarmStart { z: z.clone(), u, rho };
    let x = restore_feasibility(p, &aff, &z)?;
    Ok(SdpSolution {
        value: p.value(&x),
        x,
        primal_residual: r_norm,
        dual_residual: s_norm,
        iterations,
        status,
        state,
        trace,
    })
}

/// Projects onto the affine set and, if that leaves negative eigenvalues,
/// mixes with the interior point just enough to restore positivity.
fn restore_feasibility(p: &SdpProblem, aff: &AffineProjector, z: &[ComplexMatrix]) -> Result<Blocks> {
    let x = p.project_affine(aff, z);
    let Some(x0) = &p.interior else { return Ok(x) };
    let mut t: f64 = 0.0;
    for (xi, x0i) in x.iter().zip(x0) {
        let lx = hermitian_eig(xi)?.min_value();
        if lx >= 0.0 {
            continue;
        }
        let l0 = hermitian_eig(x0i)?.min_value();
        if l0 <= 0.0 {
            return Err(Error::Optimization("interior point is not positive definite".into()));
        }
        // a little slack so rounding cannot leave a tiny negative eigenvalue
        t = t.max((-lx * (1.0 + 1e-6) + 1e-15) / (-lx + l0));
    }
    if t == 0.0 {
        return Ok(x);
    }
    let t = t.min(1.0);
    Ok(x.iter()
        .zip(x0)
        .map(|(xi, x0i)| {
            let mut m = xi.scale(1.0 - t);
            m.add_scaled(x0i, t);
            m
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_hermitian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trace_one(n: usize) -> (Blocks, f64) {
        (vec![ComplexMatrix::identity(n)], 1.0)
    }

    fn density_problem(c: ComplexMatrix) -> SdpProblem {
        let n = c.rows();
        let mut p = SdpProblem::single(c).unwrap();
        let (a, b) = trace_one(n);
        p.add_equality(a, b).unwrap();
        p.set_interior_point(vec![ComplexMatrix::identity(n).scale(1.0 / n as f64)]).unwrap();
        p
    }

    #[test]
    fn diagonal_maximum() {
        let p = density_problem(ComplexMatrix::diag(&[1.0, 2.0]));
        let s = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Converged);
        assert!((s.value - 2.0).abs() < 1e-7, "{}", s.value);
        assert!((&s.x[0] - &ComplexMatrix::diag(&[0.0, 1.0])).max_abs() < 1e-6);
    }

    #[test]
    fn largest_eigenvalue_of_negative_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 5] {
            let h = random_hermitian(n, &mut rng);
            let shift = hermitian_eig(&h).unwrap().max_value() + 0.5;
            let mut c = h.clone();
            c.add_scaled(&ComplexMatrix::identity(n), -shift);
            let p = density_problem(c.clone());
            let s = solve(&p, &SolveOptions::default()).unwrap();
            let oracle = hermitian_eig(&c).unwrap().max_value();
            assert!((s.value - oracle).abs() < 1e-6, "n={n}: {} vs {oracle}", s.value);
            assert!(hermitian_eig(&s.x[0]).unwrap().min_value() >= -1e-12);
            assert!((s.x[0].trace().re - 1.0).abs() < 1e-12);
        }
    }

    /// `min_y b₂y + b₁ λ_max(C − y A₂)`, the dual of the two-constraint problem
    /// with `A₁ = 𝟙`, by golden-section search.
    fn dual_oracle(c: &ComplexMatrix, a2: &ComplexMatrix, b1: f64, b2: f64) -> f64 {
        let f = |y: f64| {
            let mut m = c.clone();
            m.add_scaled(a2, -y);
            b2 * y + b1 * hermitian_eig(&m).unwrap().max_value()
        };
        let (mut lo, mut hi) = (-200.0, 200.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        f(0.5 * (lo + hi))
    }

    #[test]
    fn agrees_with_dual_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..12 {
            let n = rng.gen_range(2..=8);
            let c = random_hermitian(n, &mut rng);
            let a2 = random_hermitian(n, &mut rng);
            // strictly feasible: b from a random positive definite point
            let g = random_hermitian(n, &mut rng);
            let mut x0 = g.matmul(&g).unwrap();
            x0.add_scaled(&ComplexMatrix::identity(n), 0.1);
            let x0 = x0.scale(1.0 / x0.trace().re);
            let b2 = a2.inner(&x0);
            let mut p = SdpProblem::single(c.clone()).unwrap();
            p.add_equality(vec![ComplexMatrix::identity(n)], 1.0).unwrap();
            p.add_equality(vec![a2.clone()], b2).unwrap();
            p.set_interior_point(vec![x0]).unwrap();
            let s = solve(&p, &SolveOptions::default()).unwrap();
            let oracle = dual_oracle(&c, &a2, 1.0, b2);
            assert!((s.value - oracle).abs() < 1e-5, "trial {trial} n={n}: {} vs {oracle}", s.value);
            for (name, r) in p.constraint_residuals(&s.x) {
                assert!(r < 1e-10, "{name}: {r}");
            }
        }
    }

    #[test]
    fn objective_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_hermitian(4, &mut rng);
        let s1 = solve(&density_problem(c.clone()), &SolveOptions::default()).unwrap();
        let s3 = solve(&density_problem(c.scale(3.0)), &SolveOptions::default()).unwrap();
        assert!((s3.value - 3.0 * s1.value).abs() < 1e-6);
        // each argmax is optimal for the other problem
        assert!((c.inner(&s3.x[0]) - s1.value).abs() < 1e-6);
    }

    #[test]
    fn inconsistent_constraints_are_infeasible() {
        let mut p = SdpProblem::single(ComplexMatrix::identity(2)).unwrap();
        p.add_equality(vec![ComplexMatrix::identity(2)], 1.0).unwrap();
        p.add_equality(vec![ComplexMatrix::identity(2).scale(2.0)], 3.0).unwrap();
        assert_eq!(solve(&p, &SolveOptions::default()).unwrap().status, SdpStatus::Infeasible);
        // consistent but redundant constraints are fine
        let mut q = density_problem(ComplexMatrix::diag(&[0.0, 1.0]));
        q.add_equality(vec![ComplexMatrix::identity(2).scale(2.0)], 2.0).unwrap();
        assert_eq!(solve(&q, &SolveOptions::default()).unwrap().status, SdpStatus::Converged);
    }

    #[test]
    fn psd_infeasible_problem_stagnates() {
        // tr X = -1 has no PSD solution
        let mut p = SdpProblem::single(ComplexMatrix::identity(2)).unwrap();
        p.add_equality(vec![ComplexMatrix::identity(2)], -1.0).unwrap();
        let opts = SolveOptions {
            stagnation_window: 500,
            ..SolveOptions::default()
        };
        assert_eq!(solve(&p, &opts).unwrap().status, SdpStatus::Infeasible);
    }

    #[test]
    fn warm_start_and_trace() {
        let p = density_problem(ComplexMatrix::diag(&[1.0, 2.0, 0.5]));
        let opts = SolveOptions {
            trace: true,
            ..SolveOptions::default()
        };
        let cold = solve(&p, &opts).unwrap();
        let warm = solve(
            &p,
            &SolveOptions {
                warm_start: Some(cold.state.clone()),
                ..opts
            },
        )
        .unwrap();
        assert!(warm.iterations <= cold.iterations);
        assert!((warm.value - cold.value).abs() < 1e-7);
        let csv = cold.trace_csv();
        assert!(csv.starts_with("iteration,value,primal_residual,dual_residual\n"));
        assert_eq!(csv.lines().count(), cold.iterations + 1);
    }
}
