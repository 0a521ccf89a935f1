use std::fmt::Debug;

use num_traits::{One, ToPrimitive, Zero};

use super::{Rational, Scenario};
use crate::error::{Error, Result};

/// Scalar type a correlation table can hold: exact rationals or doubles.
pub trait Probability: Clone + Debug + PartialOrd + Zero + One + std::ops::Sub<Output = Self> + std::ops::Mul<Output = Self> {
    /// Tolerance-aware zero test (exact for rationals).
    fn negligible(&self) -> bool;
    fn to_f64(&self) -> f64;
}

/// Tolerance used for floating-point marginal and normalization checks.
pub const F64_TOL: f64 = 1e-12;

impl Probability for f64 {
    fn negligible(&self) -> bool {
        self.abs() <= F64_TOL
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Probability for Rational {
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// A conditional distribution `p(a,b|x,y)`, stored in [`Scenario::index`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTable<T> {
    scenario: Scenario,
    p: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignalingReport {
    pub signals_to_a: bool,
    pub signals_to_b: bool,
}

impl<T: Probability> CorrelationTable<T> {
    /// Builds a table, checking nonnegativity and per-`(x,y)` normalization.
    pub fn new(scenario: Scenario, p: Vec<T>) -> Result<Self> {
        let t = Self::new_unchecked(scenario, p)?;
        t.validate()?;
        Ok(t)
    }

    /// Builds a table without the probability checks (shape is still checked).
    pub fn new_unchecked(scenario: Scenario, p: Vec<T>) -> Result<Self> {
        if p.len() != scenario.len() {
            return Err(Error::Dimension(format!(
                "scenario {scenario} needs {} entries, got {}",
                scenario.len(),
                p.len()
            )));
        }
        Ok(CorrelationTable { scenario, p })
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Result<Self> {
        let p = scenario.cells().map(|(x, y, a, b)| f(x, y, a, b)).collect();
        Self::new(scenario, p)
    }

    pub fn uniform(scenario: Scenario) -> Self
    where
        T: std::ops::Div<Output = T>,
    {
        let n = (0..scenario.outputs_a * scenario.outputs_b).fold(T::zero(), |acc, _| acc + T::one());
        let v = T::one() / n;
        CorrelationTable {
            scenario,
            p: vec![v; scenario.len()],
        }
    }

    fn validate(&self) -> Result<()> {
        let s = self.scenario;
        for (i, v) in self.p.iter().enumerate() {
            if *v < T::zero() && !v.negligible() {
                let (x, y, a, b) = s.unindex(i);
                return Err(Error::Invalid(format!("negative probability p({a},{b}|{x},{y}) = {v:?}")));
            }
        }
        for x in 0..s.inputs_a {
            for y in 0..s.inputs_b {
                let mut total = T::zero();
                for a in 0..s.outputs_a {
                    for b in 0..s.outputs_b {
                        total = total + self.get(x, y, a, b).clone();
                    }
                }
                if !(total.clone() - T::one()).negligible() {
                    return Err(Error::Invalid(format!("p(.,.|{x},{y}) sums to {total:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn values(&self) -> &[T] {
        &self.p
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> &T {
        &self.p[self.scenario.index(x, y, a, b)]
    }

    /// Alice's marginal `p(a|x,y)`.
    pub fn marginal_a(&self, x: usize, y: usize, a: usize) -> T {
        (0..self.scenario.outputs_b).fold(T::zero(), |acc, b| acc + self.get(x, y, a, b).clone())
    }

    /// Bob's marginal `p(b|x,y)`.
    pub fn marginal_b(&self, x: usize, y: usize, b: usize) -> T {
        (0..self.scenario.outputs_a).fold(T::zero(), |acc, a| acc + self.get(x, y, a, b).clone())
    }

    pub fn check_signaling(&self) -> SignalingReport {
        let s = self.scenario;
        let signals_to_a = (0..s.inputs_a).any(|x| {
            (0..s.outputs_a).any(|a| {
                let first = self.marginal_a(x, 0, a);
                (1..s.inputs_b).any(|y| !(self.marginal_a(x, y, a) - first.clone()).negligible())
            })
        });
        let signals_to_b = (0..s.inputs_b).any(|y| {
            (0..s.outputs_b).any(|b| {
                let first = self.marginal_b(0, y, b);
                (1..s.inputs_a).any(|x| !(self.marginal_b(x, y, b) - first.clone()).negligible())
            })
        });
        SignalingReport {
            signals_to_a,
            signals_to_b,
        }
    }

    /// Is every entry 0 or 1?
    pub fn is_deterministic(&self) -> bool {
        self.p.iter().all(|v| v.negligible() || (v.clone() - T::one()).negligible())
    }

    pub fn to_f64(&self) -> CorrelationTable<f64> {
        CorrelationTable {
            scenario: self.scenario,
            p: self.p.iter().map(Probability::to_f64).collect(),
        }
    }

    /// Entrywise affine combination `q·self + (1−q)·other` without validity checks.
    pub fn mix(&self, q: &T, other: &Self) -> Result<Self> {
        if self.scenario != other.scenario {
            return Err(Error::Dimension("tables belong to different scenarios".into()));
        }
        let one_minus = T::one() - q.clone();
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| q.clone() * a.clone() + one_minus.clone() * b.clone())
            .collect();
        Ok(CorrelationTable {
            scenario: self.scenario,
            p,
        })
    }
}

/// Mixes an `A ≺ B` correlation with a `B ≺ A` correlation with weight `q` on the former.
pub fn q_mix<T: Probability>(q: &T, p_ab: &CorrelationTable<T>, p_ba: &CorrelationTable<T>) -> Result<CorrelationTable<T>> {
    if *q < T::zero() || *q > T::one() {
        return Err(Error::Invalid(format!("mixing weight {q:?} outside [0,1]")));
    }
    p_ab.validate()?;
    p_ba.validate()?;
    if p_ab.check_signaling().signals_to_a {
        return Err(Error::Invalid("first table signals to Alice; it is not compatible with A before B".into()));
    }
    if p_ba.check_signaling().signals_to_b {
        return Err(Error::Invalid("second table signals to Bob; it is not compatible with B before A".into()));
    }
    p_ab.mix(q, p_ba)
}

/// Coordinates `(p(a=y), p(b=x))` for uniformly distributed binary inputs.
pub fn project_signaling_plane<T: Probability>(t: &CorrelationTable<T>) -> Result<(f64, f64)> {
    let s = t.scenario();
    if !s.is_binary() {
        return Err(Error::Unsupported(format!("signaling-plane projection needs binary inputs and outputs, got {s}")));
    }
    let mut pa = 0.0;
    let mut pb = 0.0;
    for (i, (x, y, a, b)) in s.cells().enumerate() {
        let v = t.values()[i].to_f64();
        if a == y {
            pa += v;
        }
        if b == x {
            pb += v;
        }
    }
    Ok((pa / 4.0, pb / 4.0))
}
