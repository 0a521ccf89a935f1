//! Causal polytopes: deterministic vertices, exact facet enumeration,
//! causal inequalities and their relabeling symmetries.

mod hull;
mod inequality;
mod rank;
mod scenario;
mod symmetry;
mod table;
mod vertices;

pub use hull::{facets_of_points, facets_with_chart, HalfSpace, HullStats};
pub use inequality::{
    causal_bound, causal_bound_with_limit, enumerate_facets, inequalities_from_json, inequalities_to_json, facet_report, facet_report_with_limit, format_rational,
    parse_rational, CausalInequality, FacetReport,
};
pub use rank::{affine_dimension, affine_dimension_of_points};
pub use scenario::Scenario;
pub use symmetry::{classify_facets, facet_family, orbit_representative, FacetFamily, Relabeling};
pub use table::{project_signaling_plane, q_mix, CorrelationTable, Probability, SignalingReport, F64_TOL};
pub use vertices::{
    enumerate_strategies, enumerate_vertices, enumerate_vertices_with_limit, vertex_count, vertices_csv, CausalOrder,
    DeterministicStrategy, DEFAULT_VERTEX_LIMIT,
};

/// Exact rational number.
pub type Rational = num_rational::BigRational;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
