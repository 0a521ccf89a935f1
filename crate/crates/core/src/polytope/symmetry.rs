//! Relabeling symmetries of the binary scenario.

use std::collections::HashMap;

use super::{CausalInequality, CorrelationTable, Probability, Scenario};
use crate::error::{Error, Result};

/// A relabeling of inputs and outputs, applied as: output flips
/// `a → a⊕α₁x⊕α₀`, `b → b⊕β₁y⊕β₀`, then input flips, then an optional party swap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Relabeling {
    pub swap: bool,
    pub flip_x: bool,
    pub flip_y: bool,
    pub alpha0: bool,
    pub alpha1: bool,
    pub beta0: bool,
    pub beta1: bool,
}

impl Relabeling {
    /// All 128 relabelings.
    pub fn all() -> Vec<Relabeling> {
        (0u8..128)
            .map(|c| {
                let b = |k: u8| c >> k & 1 == 1;
                Relabeling {
                    swap: b(0),
                    flip_x: b(1),
                    flip_y: b(2),
                    alpha0: b(3),
                    alpha1: b(4),
                    beta0: b(5),
                    beta1: b(6),
                }
            })
            .collect()
    }

    pub fn apply_cell(&self, x: usize, y: usize, a: usize, b: usize) -> (usize, usize, usize, usize) {
        let a = a ^ (self.alpha1 as usize & x) ^ self.alpha0 as usize;
        let b = b ^ (self.beta1 as usize & y) ^ self.beta0 as usize;
        let x = x ^ self.flip_x as usize;
        let y = y ^ self.flip_y as usize;
        if self.swap {
            (y, x, b, a)
        } else {
            (x, y, a, b)
        }
    }

    /// Index permutation `i ↦ g(i)` on the flattened binary table.
    pub fn permutation(&self) -> Vec<usize> {
        let s = Scenario::binary();
        s.cells()
            .map(|(x, y, a, b)| {
                let (x, y, a, b) = self.apply_cell(x, y, a, b);
                s.index(x, y, a, b)
            })
            .collect()
    }

    pub fn apply_inequality(&self, ineq: &CausalInequality) -> Result<CausalInequality> {
        require_binary(&ineq.scenario())?;
        Ok(ineq.permuted(&self.permutation()))
    }

    pub fn apply_table<T: Probability>(&self, t: &CorrelationTable<T>) -> Result<CorrelationTable<T>> {
        require_binary(&t.scenario())?;
        let perm = self.permutation();
        let mut p = t.values().to_vec();
        for (i, v) in t.values().iter().enumerate() {
            p[perm[i]] = v.clone();
        }
        CorrelationTable::new_unchecked(t.scenario(), p)
    }
}

fn require_binary(s: &Scenario) -> Result<()> {
    if !s.is_binary() {
        return Err(Error::Unsupported(format!("relabeling symmetries are implemented for the binary scenario, got {s}")));
    }
    Ok(())
}

/// Smallest canonical form in the orbit of `ineq`.
pub fn orbit_representative(ineq: &CausalInequality) -> Result<CausalInequality> {
    require_binary(&ineq.scenario())?;
    let mut best: Option<CausalInequality> = None;
    for g in Relabeling::all() {
        let c = g.apply_inequality(ineq)?.canonical();
        if best.as_ref().is_none_or(|b| (c.coeffs(), c.bound()) < (b.coeffs(), b.bound())) {
            best = Some(c);
        }
    }
    Ok(best.expect("group is nonempty"))
}

/// Groups facets into relabeling orbits, returning lists of indices into `facets`.
/// Orbits are ordered by their smallest member index.
pub fn classify_facets(facets: &[CausalInequality]) -> Result<Vec<Vec<usize>>> {
    let mut orbits: HashMap<CausalInequality, Vec<usize>> = HashMap::new();
    for (i, f) in facets.iter().enumerate() {
        orbits.entry(orbit_representative(f)?).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = orbits.into_values().collect();
    out.sort_by_key(|o| o[0]);
    Ok(out)
}

/// Named facet families of the binary causal polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FacetFamily {
    Trivial,
    Gyni,
    Lgyni,
    Other,
}

impl std::fmt::Display for FacetFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FacetFamily::Trivial => "trivial",
            FacetFamily::Gyni => "GYNI",
            FacetFamily::Lgyni => "LGYNI",
            FacetFamily::Other => "other",
        })
    }
}

/// Family of a binary-scenario inequality, by comparing orbit representatives.
pub fn facet_family(ineq: &CausalInequality) -> Result<FacetFamily> {
    let rep = orbit_representative(ineq)?;
    let s = Scenario::binary();
    let candidates = [
        (FacetFamily::Trivial, CausalInequality::nonnegativity(s, 0, 0, 0, 0)),
        (FacetFamily::Gyni, CausalInequality::gyni(false, false, false, false)),
        (FacetFamily::Lgyni, CausalInequality::lgyni(false, false, false, false)),
    ];
    for (family, member) in candidates {
        if orbit_representative(&member)? == rep {
            return Ok(family);
        }
    }
    Ok(FacetFamily::Other)
}
