//! Facet enumeration of a convex hull by the double description method.
//!
//! Given points `v`, the valid inequalities `h·x ≤ h₀` form the polyhedral
//! cone `{(h, h₀) : h₀ − h·v ≥ 0 for all v}`. When the points span their
//! ambient space this cone is pointed and its extreme rays are exactly the
//! facets. The cone is built one constraint at a time (Motzkin's double
//! description), keeping only rays generated by adjacent pairs. Adjacency is
//! decided algebraically: two rays are adjacent iff the constraints tight at
//! both have rank `n − 2` in the `n`-dimensional cone space.
//!
//! All arithmetic is exact.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rank::{integer_rank, make_primitive, small_integer_rank, to_primitive_integers, EchelonBasis};
use super::Rational;
use crate::error::{Error, Result};

/// `normal · x ≤ offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfSpace {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl HalfSpace {
    pub fn slack(&self, point: &[Rational]) -> Rational {
        let lhs: Rational = self.normal.iter().zip(point).map(|(h, x)| h * x).sum();
        &self.offset - lhs
    }
}

#[derive(Clone, Debug, Default)]
pub struct HullStats {
    pub rays_peak: usize,
    pub adjacency_tests: usize,
}

/// Facets of the convex hull of `points`, in the coordinates of `points`.
///
/// Lower-dimensional point sets are handled by working in a coordinate chart
/// on which the affine hull projects injectively; the returned inequalities
/// then have zero coefficients outside the chart.
pub fn facets_of_points(points: &[Vec<Rational>]) -> Result<Vec<HalfSpace>> {
    facets_with_chart(points, None).map(|(f, _)| f)
}

/// Like [`facets_of_points`], optionally with an explicit chart of coordinates.
pub fn facets_with_chart(points: &[Vec<Rational>], chart: Option<&[usize]>) -> Result<(Vec<HalfSpace>, HullStats)> {
    let Some(first) = points.first() else {
        return Err(Error::Degenerate("no points".into()));
    };
    let width = first.len();
    if points.iter().any(|p| p.len() != width) {
        return Err(Error::Dimension("points have different lengths".into()));
    }
    let mut basis = EchelonBasis::new();
    let mut pivots = Vec::new();
    for p in &points[1..] {
        let diff: Vec<Rational> = p.iter().zip(first).map(|(a, b)| a - b).collect();
        let before = basis.rank();
        let reduced = basis.reduce(to_primitive_integers(&diff));
        if let Some(col) = reduced.iter().position(|x| !x.is_zero()) {
            basis.insert(reduced);
            pivots.push(col);
        }
        debug_assert!(basis.rank() >= before);
    }
    let dim = basis.rank();
    if dim == 0 {
        return Err(Error::Degenerate("points have affine dimension 0".into()));
    }
    let chart: Vec<usize> = match chart {
        Some(c) => {
            if c.len() != dim || c.iter().any(|&i| i >= width) {
                return Err(Error::Dimension(format!("chart must list {dim} valid coordinates")));
            }
            c.to_vec()
        }
        None => {
            let mut c = pivots;
            c.sort_unstable();
            c
        }
    };
    let projected: Vec<Vec<Rational>> = points.iter().map(|p| chart.iter().map(|&i| p[i].clone()).collect()).collect();
    if super::rank::affine_dimension_of_points(&projected) != dim {
        return Err(Error::Dimension("chart does not embed the affine hull injectively".into()));
    }
    let (facets, stats) = full_dimensional_facets(&projected)?;
    let lifted = facets
        .into_iter()
        .map(|f| {
            let mut normal = vec![Rational::zero(); width];
            for (&i, h) in chart.iter().zip(f.normal) {
                normal[i] = h;
            }
            HalfSpace { normal, offset: f.offset }
        })
        .collect();
    Ok((lifted, stats))
}

struct Constraint {
    big: Vec<BigInt>,
    small: Option<Vec<i64>>,
}

struct Ray {
    coords: Vec<BigInt>,
    zeros: Bitset,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bitset(Vec<u64>);

impl Bitset {
    fn new(n: usize) -> Self {
        Bitset(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &Bitset) -> Bitset {
        Bitset(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b))
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Facets of full-dimensional points.
fn full_dimensional_facets(points: &[Vec<Rational>]) -> Result<(Vec<HalfSpace>, HullStats)> {
    let dim = points[0].len();
    let n = dim + 1;

    // Constraint rows (−L·v, L), inserted in lexicographic order of the points.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].cmp(&points[j]));
    order.dedup_by(|a, b| points[*a] == points[*b]);
    let rows: Vec<Constraint> = order
        .iter()
        .map(|&i| {
            let mut v: Vec<Rational> = points[i].iter().map(|x| -x).collect();
            v.push(Rational::one());
            let big = to_primitive_integers(&v);
            let small = big.iter().map(|x| x.to_i64()).collect::<Option<Vec<_>>>();
            Constraint { big, small }
        })
        .collect();

    // Initial simplicial cone from n independent rows.
    let mut basis = EchelonBasis::new();
    let mut initial = Vec::with_capacity(n);
    for (i, r) in rows.iter().enumerate() {
        if basis.insert(r.big.clone()) {
            initial.push(i);
            if initial.len() == n {
                break;
            }
        }
    }
    if initial.len() < n {
        return Err(Error::Degenerate("points are not full-dimensional in the chart".into()));
    }
    let mut sequence: Vec<usize> = initial.clone();
    sequence.extend((0..rows.len()).filter(|i| !initial.contains(i)));
    // position in the insertion sequence, used as bit index
    let total = sequence.len();

    let inverse = invert(&initial.iter().map(|&i| rows[i].big.clone()).collect::<Vec<_>>())?;
    let mut rays: Vec<Ray> = (0..n)
        .map(|j| {
            let col: Vec<Rational> = (0..n).map(|i| inverse[i][j].clone()).collect();
            let mut zeros = Bitset::new(total);
            for k in 0..n {
                if k != j {
                    zeros.set(k);
                }
            }
            Ray {
                coords: to_primitive_integers(&col),
                zeros,
            }
        })
        .collect();

    let mut stats = HullStats {
        rays_peak: rays.len(),
        adjacency_tests: 0,
    };
    for (pos, &row_idx) in sequence.iter().enumerate().skip(n) {
        let a = &rows[row_idx].big;
        let values: Vec<BigInt> = rays.iter().map(|r| dot(a, &r.coords)).collect();
        if values.iter().all(|v| !v.is_negative()) {
            for (r, v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    r.zeros.set(pos);
                }
            }
            continue;
        }
        let positive: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let negative: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
        let mut created = Vec::new();
        for &p in &positive {
            for &q in &negative {
                let common = rays[p].zeros.and(&rays[q].zeros);
                if common.count() < n - 2 {
                    continue;
                }
                stats.adjacency_tests += 1;
                if tight_rank(&rows, &sequence, &common) != n - 2 {
                    continue;
                }
                let coords: Vec<BigInt> = rays[q]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(rq, rp)| &values[p] * rq - &values[q] * rp)
                    .collect();
                let mut zeros = common;
                zeros.set(pos);
                created.push(Ray {
                    coords: make_primitive(coords),
                    zeros,
                });
            }
        }
        let mut next = Vec::with_capacity(rays.len() + created.len());
        for (mut r, v) in rays.into_iter().zip(values) {
            if v.is_zero() {
                r.zeros.set(pos);
                next.push(r);
            } else if v.is_positive() {
                next.push(r);
            }
        }
        next.extend(created);
        rays = next;
        stats.rays_peak = stats.rays_peak.max(rays.len());
    }

    let mut facets: Vec<HalfSpace> = rays
        .into_iter()
        .map(|r| {
            let normal = r.coords[..dim].iter().map(|x| Rational::from_integer(x.clone())).collect();
            HalfSpace {
                normal,
                offset: Rational::from_integer(r.coords[dim].clone()),
            }
        })
        .collect();
    facets.sort();
    Ok((facets, stats))
}

fn tight_rank(rows: &[Constraint], sequence: &[usize], tight: &Bitset) -> usize {
    let selected: Vec<&Constraint> = tight.iter().map(|pos| &rows[sequence[pos]]).collect();
    if selected.iter().all(|c| c.small.is_some()) {
        let refs: Vec<&[i64]> = selected.iter().map(|c| c.small.as_deref().unwrap()).collect();
        small_integer_rank(&refs)
    } else {
        integer_rank(&selected.iter().map(|c| c.big.clone()).collect::<Vec<_>>())
    }
}

/// Inverse of a nonsingular integer matrix, by Gauss–Jordan over the rationals.
fn invert(m: &[Vec<BigInt>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Rational> = row.iter().map(|x| Rational::from_integer(x.clone())).collect();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .find(|&i| !a[i][col].is_zero())
            .ok_or_else(|| Error::Numerical("singular initial basis".into()))?;
        a.swap(col, p);
        let pv = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x / &pv;
        }
        let pivot_row = a[col].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = &*x - &f * p;
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::rank::affine_dimension_of_points;
    use crate::polytope::rational;

    fn pts(v: &[&[i64]]) -> Vec<Vec<Rational>> {
        v.iter().map(|p| p.iter().map(|&x| rational(x, 1)).collect()).collect()
    }

    fn check_valid_and_tight(points: &[Vec<Rational>], facets: &[HalfSpace]) {
        let dim = affine_dimension_of_points(points);
        for f in facets {
            let tight: Vec<Vec<Rational>> = points.iter().filter(|p| f.slack(p).is_zero()).cloned().collect();
            assert!(points.iter().all(|p| !f.slack(p).is_negative()));
            assert_eq!(affine_dimension_of_points(&tight), dim - 1);
        }
    }

    #[test]
    fn cube_has_six_facets() {
        let mut cube = Vec::new();
        for i in 0..8i64 {
            cube.push(vec![rational(i & 1, 1), rational((i >> 1) & 1, 1), rational((i >> 2) & 1, 1)]);
        }
        let f = facets_of_points(&cube).unwrap();
        assert_eq!(f.len(), 6);
        check_valid_and_tight(&cube, &f);
    }

    #[test]
    fn triangle_has_three_facets() {
        let tri = pts(&[&[0, 0], &[2, 0], &[0, 3]]);
        let f = facets_of_points(&tri).unwrap();
        assert_eq!(f.len(), 3);
        check_valid_and_tight(&tri, &f);
    }

    #[test]
    fn interior_and_duplicate_points_are_ignored() {
        let sq = pts(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2], &[1, 1], &[1, 0], &[0, 0]]);
        assert_eq!(facets_of_points(&sq).unwrap().len(), 4);
    }

    #[test]
    fn lower_dimensional_input_uses_a_chart() {
        // a triangle embedded in the plane z = 1 of R^3
        let tri = pts(&[&[0, 0, 1], &[1, 0, 1], &[0, 1, 1]]);
        let f = facets_of_points(&tri).unwrap();
        assert_eq!(f.len(), 3);
        check_valid_and_tight(&tri, &f);
        assert!(matches!(facets_of_points(&pts(&[&[1, 2], &[1, 2]])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn matches_brute_force_on_random_polytopes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(5..10);
            let points: Vec<Vec<Rational>> = (0..n).map(|_| (0..3).map(|_| rational(rng.gen_range(-3..4), 1)).collect()).collect();
            if affine_dimension_of_points(&points) < 3 {
                continue;
            }
            let got = facets_of_points(&points).unwrap();
            check_valid_and_tight(&points, &got);
            // brute force: every triple spanning a plane with all points on one side
            let mut expected = std::collections::BTreeSet::new();
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        let u: Vec<Rational> = (0..3).map(|c| &points[j][c] - &points[i][c]).collect();
                        let v: Vec<Rational> = (0..3).map(|c| &points[k][c] - &points[i][c]).collect();
                        let normal = [
                            &u[1] * &v[2] - &u[2] * &v[1],
                            &u[2] * &v[0] - &u[0] * &v[2],
                            &u[0] * &v[1] - &u[1] * &v[0],
                        ];
                        if normal.iter().all(Zero::is_zero) {
                            continue;
                        }
                        let off: Rational = normal.iter().zip(&points[i]).map(|(a, b)| a * b).sum();
                        let side: Vec<Rational> = points.iter().map(|p| normal.iter().zip(p).map(|(a, b)| a * b).sum::<Rational>() - &off).collect();
                        for sign in [1i64, -1] {
                            if side.iter().all(|s| (s * rational(sign, 1)) <= Rational::zero()) {
                                let mut nv: Vec<Rational> = normal.iter().map(|x| x * rational(sign, 1)).collect();
                                nv.push(&off * rational(sign, 1));
                                expected.insert(to_primitive_integers(&nv));
                            }
                        }
                    }
                }
            }
            let got_keys: std::collections::BTreeSet<Vec<BigInt>> = got
                .iter()
                .map(|f| {
                    let mut v = f.normal.clone();
                    v.push(f.offset.clone());
                    to_primitive_integers(&v)
                })
                .collect();
            assert_eq!(got_keys, expected);
        }
    }
}
