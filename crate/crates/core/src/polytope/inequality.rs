use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::hull::facets_with_chart;
use super::rank::{affine_dimension_of_indicators, to_primitive_integers};
use super::vertices::{enumerate_strategies, DeterministicStrategy, DEFAULT_VERTEX_LIMIT};
use super::{rational, CorrelationTable, Probability, Rational, Scenario};
use crate::error::{Error, Result};

/// `Σ coeffs(x,y,a,b) · p(a,b|x,y) ≤ bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CausalInequality {
    scenario: Scenario,
    coeffs: Vec<Rational>,
    bound: Rational,
}

fn bit(v: bool) -> usize {
    v as usize
}

impl CausalInequality {
    pub fn new(scenario: Scenario, coeffs: Vec<Rational>, bound: Rational) -> Result<Self> {
        if coeffs.len() != scenario.len() {
            return Err(Error::Dimension(format!(
                "scenario {scenario} needs {} coefficients, got {}",
                scenario.len(),
                coeffs.len()
            )));
        }
        Ok(CausalInequality { scenario, coeffs, bound })
    }

    pub fn from_fn(scenario: Scenario, bound: Rational, mut f: impl FnMut(usize, usize, usize, usize) -> Rational) -> Self {
        let coeffs = scenario.cells().map(|(x, y, a, b)| f(x, y, a, b)).collect();
        CausalInequality { scenario, coeffs, bound }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn coeff(&self, x: usize, y: usize, a: usize, b: usize) -> &Rational {
        &self.coeffs[self.scenario.index(x, y, a, b)]
    }

    /// Left-hand side on an exact table.
    pub fn lhs(&self, t: &CorrelationTable<Rational>) -> Rational {
        self.coeffs.iter().zip(t.values()).map(|(c, p)| c * p).sum()
    }

    /// Left-hand side on a floating-point table.
    pub fn lhs_f64<T: Probability>(&self, t: &CorrelationTable<T>) -> f64 {
        self.coeffs.iter().zip(t.values()).map(|(c, p)| c.to_f64() * p.to_f64()).sum()
    }

    /// Left-hand side on a deterministic strategy, without building its table.
    pub fn lhs_strategy(&self, st: &DeterministicStrategy) -> Rational {
        let s = &self.scenario;
        let mut acc = Rational::zero();
        for x in 0..s.inputs_a {
            for y in 0..s.inputs_b {
                let (a, b) = st.outputs(s, x, y);
                acc += self.coeff(x, y, a, b);
            }
        }
        acc
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(Probability::to_f64).collect()
    }

    /// Normal form of the inequality on the normalized probability space:
    /// each `(x,y)` block is shifted so its smallest coefficient is zero,
    /// then coefficients and bound are scaled to coprime integers.
    ///
    /// Two inequalities describe the same half-space of the affine hull of
    /// the correlations iff their canonical forms coincide.
    pub fn canonical(&self) -> CausalInequality {
        let s = self.scenario;
        let block = s.outputs_a * s.outputs_b;
        let mut coeffs = self.coeffs.clone();
        let mut bound = self.bound.clone();
        for chunk in coeffs.chunks_mut(block) {
            let min = chunk.iter().min().cloned().unwrap_or_else(Rational::zero);
            for c in chunk.iter_mut() {
                *c -= &min;
            }
            bound -= &min;
        }
        let mut all = coeffs;
        all.push(bound);
        let ints = to_primitive_integers(&all);
        let mut vals: Vec<Rational> = ints.into_iter().map(Rational::from_integer).collect();
        let bound = vals.pop().expect("bound present");
        CausalInequality {
            scenario: s,
            coeffs: vals,
            bound,
        }
    }

    /// GYNI-type inequality with relabeling parameters:
    /// `¼ Σ [a ⊕ α₁x ⊕ α₀ = y][b ⊕ β₁y ⊕ β₀ = x] p(a,b|x,y) ≤ ½`.
    pub fn gyni(alpha0: bool, alpha1: bool, beta0: bool, beta1: bool) -> Self {
        let quarter = rational(1, 4);
        let (a0, a1, b0, b1) = (bit(alpha0), bit(alpha1), bit(beta0), bit(beta1));
        Self::from_fn(Scenario::binary(), rational(1, 2), |x, y, a, b| {
            if (a ^ (a1 & x) ^ a0) == y && (b ^ (b1 & y) ^ b0) == x {
                quarter.clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// LGYNI-type inequality with relabeling parameters:
    /// `¼ Σ [(x⊕α₁)(a⊕α₀⊕y) = 0][(y⊕β₁)(b⊕β₀⊕x) = 0] p(a,b|x,y) ≤ ¾`.
    pub fn lgyni(alpha0: bool, alpha1: bool, beta0: bool, beta1: bool) -> Self {
        let quarter = rational(1, 4);
        let (a0, a1, b0, b1) = (bit(alpha0), bit(alpha1), bit(beta0), bit(beta1));
        Self::from_fn(Scenario::binary(), rational(3, 4), |x, y, a, b| {
            if ((x ^ a1) & (a ^ a0 ^ y)) == 0 && ((y ^ b1) & (b ^ b0 ^ x)) == 0 {
                quarter.clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// `−p(a,b|x,y) ≤ 0`.
    pub fn nonnegativity(s: Scenario, x: usize, y: usize, a: usize, b: usize) -> Self {
        let target = s.index(x, y, a, b);
        let coeffs = (0..s.len()).map(|i| if i == target { -Rational::one() } else { Rational::zero() }).collect();
        CausalInequality {
            scenario: s,
            coeffs,
            bound: Rational::zero(),
        }
    }

    /// `α p(a=y) + β p(b=x) ≤ bound` for uniform binary inputs.
    pub fn signaling_plane(alpha: Rational, beta: Rational, bound: Rational) -> Self {
        let qa = &alpha / rational(4, 1);
        let qb = &beta / rational(4, 1);
        Self::from_fn(Scenario::binary(), bound, |x, y, a, b| {
            let mut c = Rational::zero();
            if a == y {
                c += &qa;
            }
            if b == x {
                c += &qb;
            }
            c
        })
    }

    /// The four inequalities bounding the causal polytope's projection onto the
    /// `(p(a=y), p(b=x))` plane, with their causal bounds.
    pub fn signaling_plane_family() -> [Self; 4] {
        let h = rational(1, 2);
        let mh = rational(-1, 2);
        [
            Self::signaling_plane(h.clone(), h.clone(), rational(3, 4)),
            Self::signaling_plane(h.clone(), mh.clone(), rational(1, 4)),
            Self::signaling_plane(mh.clone(), h.clone(), rational(1, 4)),
            Self::signaling_plane(mh.clone(), mh, rational(-1, 4)),
        ]
    }

    /// Coefficients with the same scenario and bound, transformed by an index permutation:
    /// `result[perm[i]] = self[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut coeffs = vec![Rational::zero(); self.coeffs.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[perm[i]] = c.clone();
        }
        CausalInequality {
            scenario: self.scenario,
            coeffs,
            bound: self.bound.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("inequality JSON serializes")
    }

    fn to_raw(&self) -> InequalityJson {
        let mut coeffs = BTreeMap::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (x, y, a, b) = self.scenario.unindex(i);
            coeffs.insert(format!("{x},{y},{a},{b}"), format_rational(c));
        }
        InequalityJson {
            scenario: self.scenario.as_array(),
            coeffs,
            bound: format_rational(&self.bound),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_raw(serde_json::from_str(s)?)
    }

    fn from_raw(raw: InequalityJson) -> Result<Self> {
        let scenario = Scenario::try_from(raw.scenario)?;
        let mut coeffs = vec![Rational::zero(); scenario.len()];
        for (key, value) in &raw.coeffs {
            let idx: Vec<usize> = key
                .split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|e| Error::Parse(format!("coefficient key '{key}': {e}"))))
                .collect::<Result<_>>()?;
            let [x, y, a, b]: [usize; 4] = idx
                .try_into()
                .map_err(|_| Error::Parse(format!("coefficient key '{key}' must be x,y,a,b")))?;
            if x >= scenario.inputs_a || y >= scenario.inputs_b || a >= scenario.outputs_a || b >= scenario.outputs_b {
                return Err(Error::Parse(format!("coefficient key '{key}' out of range for scenario {scenario}")));
            }
            coeffs[scenario.index(x, y, a, b)] = parse_rational(value)?;
        }
        Ok(CausalInequality {
            scenario,
            coeffs,
            bound: parse_rational(&raw.bound)?,
        })
    }
}

/// JSON array of inequalities in the single-inequality format.
pub fn inequalities_to_json(list: &[CausalInequality]) -> String {
    let raw: Vec<InequalityJson> = list.iter().map(CausalInequality::to_raw).collect();
    serde_json::to_string_pretty(&raw).expect("inequality JSON serializes")
}

pub fn inequalities_from_json(s: &str) -> Result<Vec<CausalInequality>> {
    let raw: Vec<InequalityJson> = serde_json::from_str(s)?;
    raw.into_iter().map(CausalInequality::from_raw).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InequalityJson {
    scenario: [usize; 4],
    coeffs: BTreeMap<String, String>,
    bound: String,
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("rational '{s}': {e}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|e| bad(&e))?;
    let den: BigInt = den.parse().map_err(|e| bad(&e))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("rational '{s}' has zero denominator")));
    }
    Ok(Rational::new(num, den))
}

/// Exact maximum of the left-hand side over the causal polytope's vertices.
pub fn causal_bound(ineq: &CausalInequality, s: &Scenario) -> Result<Rational> {
    causal_bound_with_limit(ineq, s, DEFAULT_VERTEX_LIMIT)
}

pub fn causal_bound_with_limit(ineq: &CausalInequality, s: &Scenario, limit: u128) -> Result<Rational> {
    check_scenario(ineq, s)?;
    enumerate_strategies(s, limit)?
        .iter()
        .map(|st| ineq.lhs_strategy(st))
        .max()
        .ok_or_else(|| Error::Degenerate("no vertices".into()))
}

fn check_scenario(ineq: &CausalInequality, s: &Scenario) -> Result<()> {
    if ineq.scenario() != *s {
        return Err(Error::Dimension(format!("inequality is for scenario {} but {s} was requested", ineq.scenario())));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetReport {
    pub saturating_vertex_count: usize,
    pub saturating_affine_dim: usize,
    pub polytope_dim: usize,
    pub is_facet: bool,
    /// Maximum of the left-hand side over the vertices (the causal bound).
    pub max_lhs: Rational,
    /// No vertex exceeds the stated bound.
    pub is_valid: bool,
}

/// Saturation analysis of an inequality against the causal polytope.
pub fn facet_report(ineq: &CausalInequality, s: &Scenario) -> Result<FacetReport> {
    facet_report_with_limit(ineq, s, DEFAULT_VERTEX_LIMIT)
}

pub fn facet_report_with_limit(ineq: &CausalInequality, s: &Scenario, limit: u128) -> Result<FacetReport> {
    check_scenario(ineq, s)?;
    let strategies = enumerate_strategies(s, limit)?;
    let mut max_lhs: Option<Rational> = None;
    let mut saturating = Vec::new();
    let mut all = Vec::with_capacity(strategies.len());
    for st in &strategies {
        let lhs = ineq.lhs_strategy(st);
        let ind = st.indicator(s);
        if lhs == *ineq.bound() {
            saturating.push(ind.clone());
        }
        if max_lhs.as_ref().is_none_or(|m| lhs > *m) {
            max_lhs = Some(lhs);
        }
        all.push(ind);
    }
    let max_lhs = max_lhs.ok_or_else(|| Error::Degenerate("no vertices".into()))?;
    let polytope_dim = affine_dimension_of_indicators(&all);
    let saturating_affine_dim = affine_dimension_of_indicators(&saturating);
    let is_valid = max_lhs <= *ineq.bound();
    Ok(FacetReport {
        saturating_vertex_count: saturating.len(),
        saturating_affine_dim,
        polytope_dim,
        is_facet: is_valid && !saturating.is_empty() && saturating_affine_dim + 1 == polytope_dim,
        max_lhs,
        is_valid,
    })
}

/// Complete, irredundant facet list of the convex hull of correlation tables,
/// in canonical form.
///
/// When the vertices span the full normalized probability space the hull is
/// computed in the chart that drops the last outcome pair of every `(x,y)` block.
pub fn enumerate_facets(vertices: &[CorrelationTable<Rational>]) -> Result<Vec<CausalInequality>> {
    let first = vertices.first().ok_or_else(|| Error::Degenerate("no vertices".into()))?;
    let s = first.scenario();
    if vertices.iter().any(|v| v.scenario() != s) {
        return Err(Error::Dimension("vertices belong to different scenarios".into()));
    }
    let points: Vec<Vec<Rational>> = vertices.iter().map(|v| v.values().to_vec()).collect();
    let block = s.outputs_a * s.outputs_b;
    let chart: Vec<usize> = (0..s.len()).filter(|i| i % block != block - 1).collect();
    let full = super::rank::affine_dimension_of_points(&points) == s.probability_dimension();
    let (halfspaces, stats) = facets_with_chart(&points, if full { Some(&chart) } else { None })?;
    log::debug!("double description: {} facets, peak {} rays, {} adjacency tests", halfspaces.len(), stats.rays_peak, stats.adjacency_tests);
    let mut out: Vec<CausalInequality> = halfspaces
        .into_iter()
        .map(|h| CausalInequality::new(s, h.normal, h.offset).map(|i| i.canonical()))
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| a.coeffs.cmp(&b.coeffs).then_with(|| a.bound.cmp(&b.bound)));
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::vertices::enumerate_vertices;
    use num_traits::Signed;

    fn two_way() -> CorrelationTable<Rational> {
        CorrelationTable::from_fn(Scenario::binary(), |x, y, a, b| if a == y && b == x { Rational::one() } else { Rational::zero() }).unwrap()
    }

    #[test]
    fn gyni_values() {
        let g = CausalInequality::gyni(false, false, false, false);
        assert_eq!(g.lhs(&two_way()), Rational::one());
        assert_eq!(g.lhs(&CorrelationTable::uniform(Scenario::binary())), rational(1, 4));
        assert_eq!(causal_bound(&g, &Scenario::binary()).unwrap(), rational(1, 2));
        let total: Rational = g.coeffs().iter().sum();
        assert_eq!(total, Rational::one());
    }

    #[test]
    fn lgyni_values() {
        let l = CausalInequality::lgyni(false, false, false, false);
        assert_eq!(l.lhs(&two_way()), Rational::one());
        assert_eq!(l.lhs(&CorrelationTable::uniform(Scenario::binary())), rational(9, 16));
        assert_eq!(causal_bound(&l, &Scenario::binary()).unwrap(), rational(3, 4));
    }

    #[test]
    fn relabeled_families_share_bounds() {
        let s = Scenario::binary();
        for code in 0..16u8 {
            let p = |k: u8| code >> k & 1 == 1;
            assert_eq!(causal_bound(&CausalInequality::gyni(p(0), p(1), p(2), p(3)), &s).unwrap(), rational(1, 2));
            assert_eq!(causal_bound(&CausalInequality::lgyni(p(0), p(1), p(2), p(3)), &s).unwrap(), rational(3, 4));
        }
    }

    #[test]
    fn signaling_plane_bounds() {
        let s = Scenario::binary();
        let expected = [rational(3, 4), rational(1, 4), rational(1, 4), rational(-1, 4)];
        for (ineq, want) in CausalInequality::signaling_plane_family().iter().zip(expected) {
            assert_eq!(causal_bound(ineq, &s).unwrap(), want);
        }
        let pure_a = CausalInequality::signaling_plane(Rational::one(), Rational::zero(), Rational::one());
        assert_eq!(causal_bound(&pure_a, &s).unwrap(), Rational::one());
    }

    #[test]
    fn canonical_form_is_invariant_under_normalization_shifts() {
        let g = CausalInequality::gyni(true, false, true, true);
        let s = g.scenario();
        // add 3·(Σ_ab p(ab|x=1,y=0) − 1) and scale by 5/2
        let shifted = CausalInequality::from_fn(s, (g.bound() + rational(3, 1)) * rational(5, 2), |x, y, a, b| {
            let mut c = g.coeff(x, y, a, b).clone();
            if (x, y) == (1, 0) {
                c += rational(3, 1);
            }
            c * rational(5, 2)
        });
        assert_eq!(shifted.canonical(), g.canonical());
        let nn = CausalInequality::nonnegativity(s, 0, 1, 1, 0).canonical();
        assert_eq!(*nn.bound(), Rational::one());
        assert!(nn.coeffs().iter().all(|c| !c.is_negative()));
    }

    #[test]
    fn json_roundtrip_is_byte_identical() {
        let l = CausalInequality::lgyni(true, true, false, true);
        let js = l.to_json();
        let back = CausalInequality::from_json(&js).unwrap();
        assert_eq!(back, l);
        assert_eq!(back.to_json(), js);
        assert!(js.contains("\"3/4\""));
        let list = vec![l.clone(), CausalInequality::gyni(false, false, false, false)];
        let lj = inequalities_to_json(&list);
        assert_eq!(inequalities_from_json(&lj).unwrap(), list);
        assert_eq!(inequalities_to_json(&inequalities_from_json(&lj).unwrap()), lj);
        assert!(CausalInequality::from_json(r#"{"scenario":[2,2,2,2],"coeffs":{"2,0,0,0":"1"},"bound":"1"}"#).is_err());
        assert!(CausalInequality::from_json(r#"{"scenario":[2,2,2,2],"coeffs":{},"bound":"1/0"}"#).is_err());
        assert!(CausalInequality::from_json(r#"{"scenario":[2,2,2,2],"coeffs":{},"bound":"1","extra":1}"#).is_err());
    }

    #[test]
    fn facet_reports_binary() {
        let s = Scenario::binary();
        let g = facet_report(&CausalInequality::gyni(false, false, false, false), &s).unwrap();
        assert!(g.is_facet && g.is_valid);
        assert_eq!((g.saturating_affine_dim, g.polytope_dim), (11, 12));
        let [pp, ..] = CausalInequality::signaling_plane_family();
        let r = facet_report(&pp, &s).unwrap();
        assert!(r.is_valid && !r.is_facet);
    }

    #[test]
    fn facets_of_a_trivial_scenario() {
        // a single input each and binary outputs: the polytope is the 3-simplex
        let s = Scenario::new(1, 1, 2, 2).unwrap();
        let verts: Vec<_> = enumerate_vertices(&s).unwrap().into_iter().map(|(_, t)| t).collect();
        let f = enumerate_facets(&verts).unwrap();
        assert_eq!(f.len(), 4);
        for (i, ineq) in f.iter().enumerate() {
            let (x, y, a, b) = s.unindex(i);
            assert_eq!(*ineq, CausalInequality::nonnegativity(s, x, y, a, b).canonical());
        }
    }
}
