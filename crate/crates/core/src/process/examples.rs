use num_complex::Complex64;

use super::{InstrumentSet, ProcessDims, ProcessMatrix};
use crate::error::{Error, Result};
use crate::linalg::{kron_all, ComplexMatrix};

/// Kronecker product of single-qubit Paulis, e.g. `"ZIXX"`.
pub fn pauli_string(s: &str) -> Result<ComplexMatrix> {
    let mats: Vec<ComplexMatrix> = s
        .chars()
        .map(|c| match c {
            'I' => Ok(ComplexMatrix::identity(2)),
            'X' => Ok(ComplexMatrix::pauli_x()),
            'Y' => Ok(ComplexMatrix::pauli_y()),
            'Z' => Ok(ComplexMatrix::pauli_z()),
            _ => Err(Error::Parse(format!("unknown Pauli '{c}' in '{s}'"))),
        })
        .collect::<Result<_>>()?;
    Ok(kron_all(&mats.iter().collect::<Vec<_>>()))
}

fn pauli_sum(terms: &[(f64, &str)]) -> ComplexMatrix {
    let mut w = ComplexMatrix::identity(16);
    for (c, s) in terms {
        w.add_scaled(&pauli_string(s).expect("fixed Pauli labels"), *c);
    }
    w.scale(0.25)
}

/// `¼[𝟙 + (Z Z Z 𝟙 + Z 𝟙 X X)/√2]` on qubits.
pub fn ocb_example_w() -> ProcessMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let w = pauli_sum(&[(h, "ZZZI"), (h, "ZIXX")]);
    ProcessMatrix::new(ProcessDims::qubits(), w).expect("16x16")
}

/// Input 0: transmit the system untouched and output 1. Input 1: measure
/// in the Z basis, output the result and send out `|0⟩`.
pub fn standard_instruments() -> InstrumentSet {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let phi = [one, zero, zero, one];
    let transmit = ComplexMatrix::outer(&phi, &phi);
    let measure0 = ComplexMatrix::basis_projector(4, 0);
    let measure1 = ComplexMatrix::basis_projector(4, 2);
    InstrumentSet::from_maps(2, 2, vec![vec![ComplexMatrix::zeros(4, 4), transmit], vec![measure0, measure1]]).expect("fixed shapes")
}

fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().fold(0.0, |acc, &a| acc * x + a)
}

/// Real roots of a polynomial given with the leading coefficient first,
/// in increasing order.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let start = coeffs.iter().position(|&c| c != 0.0).unwrap_or(coeffs.len());
    let c = &coeffs[start..];
    match c.len() {
        0 | 1 => return Vec::new(),
        2 => return vec![-c[1] / c[0]],
        _ => {}
    }
    let deg = c.len() - 1;
    let derivative: Vec<f64> = c[..deg].iter().enumerate().map(|(i, &a)| a * (deg - i) as f64).collect();
    let bound = 1.0 + c[1..].iter().map(|a| (a / c[0]).abs()).fold(0.0, f64::max);
    let scale = c.iter().map(|a| a.abs()).fold(0.0, f64::max);
    let mut knots = vec![-bound];
    knots.extend(real_roots(&derivative).into_iter().filter(|r| r.abs() < bound));
    knots.push(bound);
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&l| (r - l).abs() > 1e-12 * (1.0 + r.abs())) {
            roots.push(r);
        }
    };
    for win in knots.windows(2) {
        let (mut lo, mut hi) = (win[0], win[1]);
        let (flo, fhi) = (eval(c, lo), eval(c, hi));
        if flo.abs() <= 1e-14 * scale {
            push(lo, &mut roots);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if eval(c, mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        push(0.5 * (lo + hi), &mut roots);
    }
    if eval(c, bound).abs() <= 1e-14 * scale {
        push(bound, &mut roots);
    }
    roots
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WmaxVariant {
    Unprimed,
    Primed,
}

const WMAX_POLYS: [[[f64; 5]; 5]; 2] = [
    [
        [4608.0, -1575.0, 525.0, -117.0, -1.0],
        [221184.0, 142479.0, -19701.0, -15603.0, 2363.0],
        [9216.0, -16857.0, 11724.0, -3660.0, 430.0],
        [221184.0, -50895.0, -16200.0, 1368.0, 602.0],
        [221184.0, 16335.0, -37008.0, -11400.0, 3440.0],
    ],
    [
        [4608.0, 8595.0, 5583.0, 873.0, -43.0],
        [221184.0, -101601.0, -1701.0, 2745.0, 305.0],
        [3072.0, -2229.0, 540.0, -60.0, 4.0],
        [221184.0, -294975.0, 145080.0, -31224.0, 2492.0],
        [221184.0, 16335.0, -37008.0, -11400.0, 3440.0],
    ],
];

const WMAX_APPROX: [[f64; 5]; 2] = [[0.2744, 0.2178, 0.3628, 0.3114, 0.2097], [0.0390, 0.3355, 0.2451, 0.4291, 0.2097]];

/// Half-width of the window around each approximate coefficient searched for a root.
const ROOT_WINDOW: f64 = 0.05;

/// Quartic whose smallest real root is the GYNI value of the qubit optimum.
pub fn wmax_gyni_polynomial() -> [f64; 5] {
    [1769472.0, -2884032.0, 1630800.0, -380052.0, 34087.0]
}

/// Smallest real root of [`wmax_gyni_polynomial`].
pub fn wmax_gyni_value() -> f64 {
    real_roots(&wmax_gyni_polynomial())[0]
}

/// Coefficients `a₀…a₄`, each the real root of its quartic closest to the
/// tabulated approximation.
pub fn wmax_coefficients(variant: WmaxVariant) -> Result<[f64; 5]> {
    let v = variant as usize;
    let mut out = [0.0; 5];
    for k in 0..5 {
        let target = WMAX_APPROX[v][k];
        let best = real_roots(&WMAX_POLYS[v][k])
            .into_iter()
            .filter(|r| (r - target).abs() <= ROOT_WINDOW)
            .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
            .ok_or_else(|| Error::Numerical(format!("no real root of quartic {k} within {ROOT_WINDOW} of {target}")))?;
        out[k] = best;
    }
    Ok(out)
}

/// The qubit process matrices reaching the best GYNI value found with the
/// standard instruments.
pub fn wmax_qubit(variant: WmaxVariant) -> Result<ProcessMatrix> {
    let [a0, a1, a2, a3, a4] = wmax_coefficients(variant)?;
    let w = pauli_sum(&[
        (a0, "ZIZI"),
        (-a1, "ZIII"),
        (-a1, "IIZI"),
        (-a2, "ZIIZ"),
        (-a2, "IZZI"),
        (a3, "ZIZZ"),
        (a3, "ZZZI"),
        (a4, "ZIXX"),
        (-a4, "ZIYY"),
        (a4, "XXZI"),
        (-a4, "YYZI"),
    ]);
    ProcessMatrix::new(ProcessDims::qubits(), w)
}

/// `q·W_max + (1−q)·W′_max`.
pub fn mix_wmax(q: f64) -> Result<ProcessMatrix> {
    wmax_qubit(WmaxVariant::Unprimed)?.mix(q, &wmax_qubit(WmaxVariant::Primed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use crate::polytope::{CausalInequality, CorrelationTable};
    use crate::process::{correlation, Instrument};

    fn gyni(t: &CorrelationTable<f64>) -> f64 {
        CausalInequality::gyni(false, false, false, false).lhs_f64(t)
    }

    fn lgyni(t: &CorrelationTable<f64>) -> f64 {
        CausalInequality::lgyni(false, false, false, false).lhs_f64(t)
    }

    #[test]
    fn roots_of_known_polynomials() {
        let r = real_roots(&[1.0, -6.0, 11.0, -6.0]);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(real_roots(&[1.0, 0.0, 1.0]).is_empty());
        let double = real_roots(&[1.0, -2.0, 1.0]);
        assert_eq!(double.len(), 1);
        assert!((double[0] - 1.0).abs() < 1e-7);
        assert!((real_roots(&[0.0, 2.0, -1.0])[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ocb_w_matches_termwise_construction() {
        let w = ocb_example_w();
        let (i, x, z) = (ComplexMatrix::identity(2), ComplexMatrix::pauli_x(), ComplexMatrix::pauli_z());
        let zzzi = kron(&kron(&kron(&z, &z), &z), &i);
        let zixx = kron(&kron(&kron(&z, &i), &x), &x);
        let mut oracle = ComplexMatrix::identity(16);
        oracle.add_scaled(&(&zzzi + &zixx), std::f64::consts::FRAC_1_SQRT_2);
        let oracle = oracle.scale(0.25);
        assert!((w.matrix() - &oracle).max_abs() < 1e-15);
        assert!((w.matrix()[(0, 0)].re - 0.25 * (1.0 + std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-15);
        assert!((w.matrix().trace().re - 4.0).abs() < 1e-14);
        assert!(w.validate().unwrap().passes(1e-12));
    }

    #[test]
    fn standard_instruments_are_valid() {
        let s = standard_instruments();
        assert!(s.validate().unwrap().passes(1e-14));
        assert_eq!(s.map(0, 0).max_abs(), 0.0);
        let identity_cj = s.map(0, 1);
        assert!((identity_cj.trace().re - 2.0).abs() < 1e-15);
        assert!(Instrument::new(2, 2, vec![identity_cj.clone()]).unwrap().validate().unwrap().passes(1e-14));
    }

    #[test]
    fn simple_violation_values() {
        let inst = standard_instruments();
        let t = correlation(&ocb_example_w(), &inst, &inst).unwrap();
        let expected = 5.0 / 16.0 * (1.0 + std::f64::consts::FRAC_1_SQRT_2);
        assert!((gyni(&t) - expected).abs() < 1e-12);
        assert!((lgyni(&t) - expected - 0.25).abs() < 1e-12);
    }

    #[test]
    fn wmax_pair() {
        let a = wmax_coefficients(WmaxVariant::Unprimed).unwrap();
        let b = wmax_coefficients(WmaxVariant::Primed).unwrap();
        assert!((a[4] - b[4]).abs() < 1e-10);
        for (got, want) in a.iter().chain(&b).zip(WMAX_APPROX.iter().flatten()) {
            assert!((got - want).abs() < 6e-5, "{got} vs {want}");
        }
        let inst = standard_instruments();
        let target = wmax_gyni_value();
        assert!((target - 0.5694).abs() < 1e-4);
        for q in [0.0, 0.3, 1.0] {
            let w = mix_wmax(q).unwrap();
            assert!(w.validate().unwrap().passes(1e-8), "q={q}");
            let t = correlation(&w, &inst, &inst).unwrap();
            assert!((gyni(&t) - target).abs() < 1e-6, "q={q}: {}", gyni(&t));
            assert!((lgyni(&t) - gyni(&t) - 0.25).abs() < 1e-8);
        }
    }
}
