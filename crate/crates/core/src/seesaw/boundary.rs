use std::fmt::Write as _;

use serde::Serialize;

use super::{optimize, Objective, SeeSawOptions, SeeSawResult};
use crate::error::{Error, Result};
use crate::numfmt::sig;
use crate::polytope::project_signaling_plane;
use crate::process::{correlation_unchecked, ProcessDims};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
    pub pa: f64,
    pub pb: f64,
}

/// Maximizes `cos θ·p(a=y) + sin θ·p(b=x)` for `θ = 2πi/n`, angle `i` using
/// seed `seed + i`. Points come back in angle order with the optimizer
/// result that produced them.
pub fn boundary_scan(dims: ProcessDims, n_angles: usize, restarts: usize, seed: u64, opts: &SeeSawOptions) -> Result<Vec<(BoundaryPoint, SeeSawResult)>> {
    if n_angles < 4 {
        return Err(Error::Invalid(format!("boundary scan needs at least 4 angles, got {n_angles}")));
    }
    (0..n_angles)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n_angles as f64;
            let (alpha, beta) = (theta.cos(), theta.sin());
            let res = optimize(&Objective::weighted(alpha, beta), dims, restarts, seed.wrapping_add(i as u64), opts)?;
            let t = correlation_unchecked(&res.w, &res.a_set, &res.b_set)?;
            let (pa, pb) = project_signaling_plane(&t)?;
            let point = BoundaryPoint {
                theta,
                alpha,
                beta,
                value: res.best_value,
                pa,
                pb,
            };
            Ok((point, res))
        })
        .collect()
}

/// CSV with header `theta,alpha,beta,value,pa,pb`.
pub fn boundary_csv(points: &[BoundaryPoint]) -> String {
    let mut out = String::from("theta,alpha,beta,value,pa,pb\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{},{},{}", sig(p.theta), sig(p.alpha), sig(p.beta), sig(p.value), sig(p.pa), sig(p.pb));
    }
    out
}
