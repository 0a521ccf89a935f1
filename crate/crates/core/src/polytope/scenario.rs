use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input/output cardinalities `(m_A, m_B, k_A, k_B)` of a bipartite scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 4]", into = "[usize; 4]")]
pub struct Scenario {
    pub inputs_a: usize,
    pub inputs_b: usize,
    pub outputs_a: usize,
    pub outputs_b: usize,
}

impl Scenario {
    pub fn new(inputs_a: usize, inputs_b: usize, outputs_a: usize, outputs_b: usize) -> Result<Self> {
        if inputs_a == 0 || inputs_b == 0 || outputs_a == 0 || outputs_b == 0 {
            return Err(Error::Invalid(format!(
                "scenario cardinalities must be positive, got ({inputs_a},{inputs_b},{outputs_a},{outputs_b})"
            )));
        }
        Ok(Scenario {
            inputs_a,
            inputs_b,
            outputs_a,
            outputs_b,
        })
    }

    /// One bit of input and output per party.
    pub fn binary() -> Self {
        Scenario {
            inputs_a: 2,
            inputs_b: 2,
            outputs_a: 2,
            outputs_b: 2,
        }
    }

    pub fn is_binary(&self) -> bool {
        *self == Self::binary()
    }

    /// Number of entries `p(a,b|x,y)`.
    pub fn len(&self) -> usize {
        self.inputs_a * self.inputs_b * self.outputs_a * self.outputs_b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        debug_assert!(x < self.inputs_a && y < self.inputs_b && a < self.outputs_a && b < self.outputs_b);
        ((x * self.inputs_b + y) * self.outputs_a + a) * self.outputs_b + b
    }

    /// Inverse of [`Scenario::index`].
    pub fn unindex(&self, mut i: usize) -> (usize, usize, usize, usize) {
        let b = i % self.outputs_b;
        i /= self.outputs_b;
        let a = i % self.outputs_a;
        i /= self.outputs_a;
        let y = i % self.inputs_b;
        (i / self.inputs_b, y, a, b)
    }

    /// All `(x, y, a, b)` in index order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        (0..self.len()).map(|i| self.unindex(i))
    }

    /// Dimension of the normalized probability space, `m_A m_B (k_A k_B − 1)`.
    pub fn probability_dimension(&self) -> usize {
        self.inputs_a * self.inputs_b * (self.outputs_a * self.outputs_b - 1)
    }

    /// Dimension of the correlations compatible with `A ≺ B`.
    pub fn ordered_dimension_a_first(&self) -> usize {
        self.probability_dimension() - self.inputs_a * (self.inputs_b - 1) * (self.outputs_a - 1)
    }

    /// Dimension of the correlations compatible with `B ≺ A`.
    pub fn ordered_dimension_b_first(&self) -> usize {
        self.probability_dimension() - (self.inputs_a - 1) * self.inputs_b * (self.outputs_b - 1)
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.inputs_a, self.inputs_b, self.outputs_a, self.outputs_b]
    }
}

impl TryFrom<[usize; 4]> for Scenario {
    type Error = Error;
    fn try_from(v: [usize; 4]) -> Result<Self> {
        Scenario::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Scenario> for [usize; 4] {
    fn from(s: Scenario) -> Self {
        s.as_array()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.inputs_a, self.inputs_b, self.outputs_a, self.outputs_b)
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| Error::Parse(format!("scenario '{s}': {e}"))))
            .collect::<Result<_>>()?;
        let arr: [usize; 4] = parts
            .try_into()
            .map_err(|_| Error::Parse(format!("scenario '{s}' must have four comma-separated values")))?;
        Scenario::try_from(arr)
    }
}
