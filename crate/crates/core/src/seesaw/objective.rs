use std::fmt;

use crate::error::{Error, Result};
use crate::numfmt::sig;
use crate::polytope::{CausalInequality, CorrelationTable, Scenario};

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectiveLabel {
    Gyni,
    Lgyni,
    Weighted { alpha: f64, beta: f64 },
    Custom(String),
}

impl fmt::Display for ObjectiveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveLabel::Gyni => write!(f, "gyni"),
            ObjectiveLabel::Lgyni => write!(f, "lgyni"),
            ObjectiveLabel::Weighted { alpha, beta } => write!(f, "weighted_{}_{}", sig(*alpha), sig(*beta)),
            ObjectiveLabel::Custom(name) => write!(f, "custom_{name}"),
        }
    }
}

/// `ω = Σ c(x,y,a,b)·p(a,b|x,y)` with coefficients in scenario order.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    scenario: Scenario,
    coeffs: Vec<f64>,
    label: ObjectiveLabel,
}

impl Objective {
    pub fn gyni() -> Self {
        Self::from_inequality(&CausalInequality::gyni(false, false, false, false), ObjectiveLabel::Gyni)
    }

    pub fn lgyni() -> Self {
        Self::from_inequality(&CausalInequality::lgyni(false, false, false, false), ObjectiveLabel::Lgyni)
    }

    /// `α p(a=y) + β p(b=x)` for uniform binary inputs.
    pub fn weighted(alpha: f64, beta: f64) -> Self {
        let s = Scenario::binary();
        let coeffs = s
            .cells()
            .map(|(x, y, a, b)| {
                let mut c = 0.0;
                if a == y {
                    c += alpha / 4.0;
                }
                if b == x {
                    c += beta / 4.0;
                }
                c
            })
            .collect();
        Objective {
            scenario: s,
            coeffs,
            label: ObjectiveLabel::Weighted { alpha, beta },
        }
    }

    /// The left-hand side of an arbitrary inequality.
    pub fn custom(name: &str, ineq: &CausalInequality) -> Self {
        Self::from_inequality(ineq, ObjectiveLabel::Custom(name.to_string()))
    }

    pub fn from_coeffs(scenario: Scenario, coeffs: Vec<f64>, name: &str) -> Result<Self> {
        if coeffs.len() != scenario.len() {
            return Err(Error::Dimension(format!("{} coefficients for a scenario with {} cells", coeffs.len(), scenario.len())));
        }
        Ok(Objective {
            scenario,
            coeffs,
            label: ObjectiveLabel::Custom(name.to_string()),
        })
    }

    fn from_inequality(ineq: &CausalInequality, label: ObjectiveLabel) -> Self {
        Objective {
            scenario: ineq.scenario(),
            coeffs: ineq.coeffs_f64(),
            label,
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn label(&self) -> &ObjectiveLabel {
        &self.label
    }

    pub fn evaluate(&self, t: &CorrelationTable<f64>) -> f64 {
        self.coeffs.iter().zip(t.values()).map(|(c, p)| c * p).sum()
    }

    /// `Σ_{x,y} max_{a,b} c(x,y,a,b)`: the largest value any normalized table can give.
    pub fn algebraic_max(&self) -> f64 {
        let s = self.scenario;
        let block = s.outputs_a * s.outputs_b;
        self.coeffs.chunks(block).map(|c| c.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).sum()
    }
}
