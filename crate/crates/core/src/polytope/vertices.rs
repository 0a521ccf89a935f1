use std::fmt::Write as _;

use num_traits::{One, Zero};

use super::{CorrelationTable, Rational, Scenario};
use crate::error::{Error, Result};

/// Enumeration is refused above this many vertices unless a larger limit is passed.
pub const DEFAULT_VERTEX_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CausalOrder {
    ABeforeB,
    BBeforeA,
}

impl CausalOrder {
    pub fn tag(&self) -> &'static str {
        match self {
            CausalOrder::ABeforeB => "AB",
            CausalOrder::BBeforeA => "BA",
        }
    }
}

/// A deterministic strategy compatible with one causal order.
///
/// For `A ≺ B`, `first_response[x]` is Alice's output and
/// `second_response[x * m_B + y]` is Bob's. For `B ≺ A` the roles swap:
/// `first_response[y]` is Bob's output and `second_response[x * m_B + y]`
/// is Alice's.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub order: CausalOrder,
    pub first_response: Vec<usize>,
    pub second_response: Vec<usize>,
}

impl DeterministicStrategy {
    /// Outputs `(a, b)` produced on inputs `(x, y)`.
    pub fn outputs(&self, s: &Scenario, x: usize, y: usize) -> (usize, usize) {
        let joint = x * s.inputs_b + y;
        match self.order {
            CausalOrder::ABeforeB => (self.first_response[x], self.second_response[joint]),
            CausalOrder::BBeforeA => (self.second_response[joint], self.first_response[y]),
        }
    }

    /// Is the second party's response independent of the first party's input?
    pub fn is_non_signaling(&self, s: &Scenario) -> bool {
        match self.order {
            CausalOrder::ABeforeB => (0..s.inputs_a)
                .all(|x| (0..s.inputs_b).all(|y| self.second_response[x * s.inputs_b + y] == self.second_response[y])),
            CausalOrder::BBeforeA => (0..s.inputs_a).all(|x| {
                (0..s.inputs_b).all(|y| self.second_response[x * s.inputs_b + y] == self.second_response[x * s.inputs_b])
            }),
        }
    }

    pub fn table(&self, s: &Scenario) -> CorrelationTable<Rational> {
        let mut p = vec![Rational::zero(); s.len()];
        for x in 0..s.inputs_a {
            for y in 0..s.inputs_b {
                let (a, b) = self.outputs(s, x, y);
                p[s.index(x, y, a, b)] = Rational::one();
            }
        }
        CorrelationTable::new_unchecked(*s, p).expect("shape matches scenario")
    }

    /// 0/1 indicator vector of the table, in index order.
    pub fn indicator(&self, s: &Scenario) -> Vec<u8> {
        let mut p = vec![0u8; s.len()];
        for x in 0..s.inputs_a {
            for y in 0..s.inputs_b {
                let (a, b) = self.outputs(s, x, y);
                p[s.index(x, y, a, b)] = 1;
            }
        }
        p
    }
}

fn checked_pow(base: usize, exp: usize) -> Result<u128> {
    (base as u128)
        .checked_pow(u32::try_from(exp).map_err(|_| Error::Overflow("vertex count".into()))?)
        .ok_or_else(|| Error::Overflow("vertex count".into()))
}

/// `k_A^{m_A} k_B^{m_A m_B} + k_A^{m_A m_B} k_B^{m_B} − k_A^{m_A} k_B^{m_B}`.
pub fn vertex_count(s: &Scenario) -> Result<u128> {
    let overflow = || Error::Overflow("vertex count".into());
    let joint = s.inputs_a.checked_mul(s.inputs_b).ok_or_else(overflow)?;
    let ab = checked_pow(s.outputs_a, s.inputs_a)?
        .checked_mul(checked_pow(s.outputs_b, joint)?)
        .ok_or_else(overflow)?;
    let ba = checked_pow(s.outputs_a, joint)?
        .checked_mul(checked_pow(s.outputs_b, s.inputs_b)?)
        .ok_or_else(overflow)?;
    let ns = checked_pow(s.outputs_a, s.inputs_a)?
        .checked_mul(checked_pow(s.outputs_b, s.inputs_b)?)
        .ok_or_else(overflow)?;
    ab.checked_add(ba).and_then(|t| t.checked_sub(ns)).ok_or_else(overflow)
}

/// Iterates all functions `{0..n} → {0..k}` as digit vectors, little-endian.
fn functions(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (k as u128).pow(n as u32);
    (0..total).map(move |mut code| {
        let mut f = vec![0; n];
        for v in f.iter_mut() {
            *v = (code % k as u128) as usize;
            code /= k as u128;
        }
        f
    })
}

/// All deterministic causal strategies, each vertex exactly once.
///
/// `A ≺ B` strategies come first (non-signaling ones are tagged `A ≺ B`),
/// followed by the `B ≺ A` strategies that signal to Alice.
pub fn enumerate_strategies(s: &Scenario, limit: u128) -> Result<Vec<DeterministicStrategy>> {
    let count = vertex_count(s)?;
    if count > limit {
        return Err(Error::TooLarge { count, limit });
    }
    let joint = s.inputs_a * s.inputs_b;
    let mut out = Vec::with_capacity(count as usize);
    for alpha in functions(s.inputs_a, s.outputs_a) {
        for beta in functions(joint, s.outputs_b) {
            out.push(DeterministicStrategy {
                order: CausalOrder::ABeforeB,
                first_response: alpha.clone(),
                second_response: beta,
            });
        }
    }
    for beta in functions(s.inputs_b, s.outputs_b) {
        for alpha in functions(joint, s.outputs_a) {
            let strat = DeterministicStrategy {
                order: CausalOrder::BBeforeA,
                first_response: beta.clone(),
                second_response: alpha,
            };
            if !strat.is_non_signaling(s) {
                out.push(strat);
            }
        }
    }
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

/// Vertices of the causal polytope as (strategy, table) pairs.
pub fn enumerate_vertices(s: &Scenario) -> Result<Vec<(DeterministicStrategy, CorrelationTable<Rational>)>> {
    enumerate_vertices_with_limit(s, DEFAULT_VERTEX_LIMIT)
}

pub fn enumerate_vertices_with_limit(s: &Scenario, limit: u128) -> Result<Vec<(DeterministicStrategy, CorrelationTable<Rational>)>> {
    Ok(enumerate_strategies(s, limit)?
        .into_iter()
        .map(|st| {
            let t = st.table(s);
            (st, t)
        })
        .collect())
}

/// Vertex list as CSV: a comment describing the column order, a header and one row per vertex.
pub fn vertices_csv(s: &Scenario, strategies: &[DeterministicStrategy]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# scenario {s}; columns p(a,b|x,y) in flat order ((x*{}+y)*{}+a)*{}+b; order is AB, BA or NS (both)",
        s.inputs_b, s.outputs_a, s.outputs_b
    );
    out.push_str("order");
    for (x, y, a, b) in s.cells() {
        let _ = write!(out, ",p_x{x}_y{y}_a{a}_b{b}");
    }
    out.push('\n');
    for st in strategies {
        let tag = if st.is_non_signaling(s) { "NS" } else { st.order.tag() };
        out.push_str(tag);
        for v in st.indicator(s) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn closed_form_counts() {
        assert_eq!(vertex_count(&Scenario::binary()).unwrap(), 112);
        assert_eq!(vertex_count(&Scenario::new(2, 4, 2, 2).unwrap()).unwrap(), 5056);
        assert_eq!(vertex_count(&Scenario::new(1, 1, 2, 2).unwrap()).unwrap(), 4);
        assert!(matches!(vertex_count(&Scenario::new(40, 40, 9, 9).unwrap()), Err(Error::Overflow(_))));
    }

    #[test]
    fn enumeration_matches_count_and_is_distinct() {
        for s in [
            Scenario::binary(),
            Scenario::new(1, 1, 2, 3).unwrap(),
            Scenario::new(2, 3, 2, 2).unwrap(),
            Scenario::new(3, 2, 2, 2).unwrap(),
            Scenario::new(2, 2, 3, 2).unwrap(),
        ] {
            let v = enumerate_strategies(&s, DEFAULT_VERTEX_LIMIT).unwrap();
            assert_eq!(v.len() as u128, vertex_count(&s).unwrap(), "{s}");
            let tables: HashSet<Vec<u8>> = v.iter().map(|st| st.indicator(&s)).collect();
            assert_eq!(tables.len(), v.len());
        }
    }

    #[test]
    fn trivial_scenario_vertices_do_not_signal() {
        let s = Scenario::new(1, 1, 2, 3).unwrap();
        let v = enumerate_vertices(&s).unwrap();
        assert_eq!(v.len(), 6);
        for (st, t) in &v {
            assert!(st.is_non_signaling(&s));
            let r = t.check_signaling();
            assert!(!r.signals_to_a && !r.signals_to_b);
            assert!(t.is_deterministic());
        }
    }

    #[test]
    fn orders_respect_signaling_constraints() {
        let s = Scenario::binary();
        for (st, t) in enumerate_vertices(&s).unwrap() {
            let r = t.check_signaling();
            match st.order {
                CausalOrder::ABeforeB => assert!(!r.signals_to_a),
                CausalOrder::BBeforeA => assert!(!r.signals_to_b && r.signals_to_a),
            }
        }
    }

    #[test]
    fn size_guard() {
        let s = Scenario::new(3, 3, 3, 3).unwrap();
        assert!(matches!(enumerate_strategies(&s, DEFAULT_VERTEX_LIMIT), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn csv_layout() {
        let s = Scenario::new(1, 1, 2, 2).unwrap();
        let csv = vertices_csv(&s, &enumerate_strategies(&s, 10).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "order,p_x0_y0_a0_b0,p_x0_y0_a0_b1,p_x0_y0_a1_b0,p_x0_y0_a1_b1");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[2], "NS,1,0,0,0");
    }
}
