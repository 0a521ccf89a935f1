//! Exact rank computations over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{CorrelationTable, Rational};

/// Clears denominators of a rational vector, returning a primitive integer vector
/// with the same direction.
pub fn to_primitive_integers(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::from(1), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = v.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    make_primitive(ints)
}

/// Divides out the gcd of the entries.
pub fn make_primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    v
}

/// Row-echelon basis built incrementally with fraction-free elimination.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; returns the residual.
    pub fn reduce(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        for (pivot, row) in &self.rows {
            if v[*pivot].is_zero() {
                continue;
            }
            let g = v[*pivot].gcd(&row[*pivot]);
            let fv = &row[*pivot] / &g;
            let fr = &v[*pivot] / &g;
            for (x, r) in v.iter_mut().zip(row) {
                *x = &*x * &fv - r * &fr;
            }
            v = make_primitive(v);
        }
        v
    }

    /// Adds `v`; returns whether it increased the rank.
    pub fn insert(&mut self, v: Vec<BigInt>) -> bool {
        let v = self.reduce(v);
        match v.iter().position(|x| !x.is_zero()) {
            Some(pivot) => {
                let v = if v[pivot].is_negative() { v.into_iter().map(|x| -x).collect() } else { v };
                self.rows.push((pivot, v));
                true
            }
            None => false,
        }
    }
}

/// Rank of a list of integer rows.
pub fn integer_rank(rows: &[Vec<BigInt>]) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut basis = EchelonBasis::new();
    for r in rows {
        if basis.rank() == width {
            break;
        }
        basis.insert(r.clone());
    }
    basis.rank()
}

/// Rank of small-integer rows, with exact fraction-free elimination in `i128`
/// and a big-integer fallback on overflow.
pub fn small_integer_rank(rows: &[&[i64]]) -> usize {
    match small_rank_i128(rows) {
        Some(r) => r,
        None => integer_rank(&rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect::<Vec<_>>()),
    }
}

fn small_rank_i128(rows: &[&[i64]]) -> Option<usize> {
    let width = rows.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..m.len()).find(|&i| m[i][col] != 0) else { continue };
        m.swap(rank, p);
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pv = pivot_row[col];
        for row in rest.iter_mut() {
            let f = row[col];
            if f == 0 {
                continue;
            }
            let g = gcd_i128(pv, f);
            let (a, b) = (pv / g, f / g);
            let mut h = 0i128;
            for c in col..width {
                row[c] = row[c].checked_mul(a)?.checked_sub(pivot_row[c].checked_mul(b)?)?;
                h = gcd_i128(h, row[c]);
            }
            if h > 1 {
                for v in &mut row[col..width] {
                    *v /= h;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    Some(rank)
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Affine dimension of a point set given as rational vectors.
pub fn affine_dimension_of_points(points: &[Vec<Rational>]) -> usize {
    let Some(first) = points.first() else { return 0 };
    let width = first.len();
    let mut basis = EchelonBasis::new();
    for p in &points[1..] {
        if basis.rank() == width {
            break;
        }
        let diff: Vec<Rational> = p.iter().zip(first).map(|(a, b)| a - b).collect();
        basis.insert(to_primitive_integers(&diff));
    }
    basis.rank()
}

/// Affine dimension of a nonempty list of correlation tables (0 for an empty list).
pub fn affine_dimension(points: &[CorrelationTable<Rational>]) -> usize {
    let vecs: Vec<Vec<Rational>> = points.iter().map(|t| t.values().to_vec()).collect();
    affine_dimension_of_points(&vecs)
}

/// Affine dimension of 0/1 indicator vectors.
pub fn affine_dimension_of_indicators(points: &[Vec<u8>]) -> usize {
    let Some(first) = points.first() else { return 0 };
    let width = first.len();
    let mut basis = EchelonBasis::new();
    for p in &points[1..] {
        if basis.rank() == width {
            break;
        }
        let diff: Vec<BigInt> = p.iter().zip(first).map(|(&a, &b)| BigInt::from(a as i64 - b as i64)).collect();
        basis.insert(diff);
    }
    basis.rank()
}
