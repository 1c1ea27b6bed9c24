//! One-dimensional quadrature: adaptive Simpson for smooth integrands on short
//! intervals, and globally adaptive Gauss–Kronrod (7/15) for oscillatory ones.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Adaptive Simpson with absolute tolerance `tol` and a recursion limit.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<Quadrature> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut err = 0.0;
    let value = simpson_rec(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut err);
    let q = Quadrature { value, error: err };
    if err > tol || !value.is_finite() {
        return Err(Error::Quadrature {
            value,
            error_bound: err,
        });
    }
    Ok(q)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Quadrature {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Quadrature {
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    }
}

struct Piece {
    a: f64,
    b: f64,
    q: Quadrature,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.q.error == other.q.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.q.error.total_cmp(&other.q.error)
    }
}

/// Globally adaptive Gauss–Kronrod over the initial pieces `breaks`
/// (at least two points). Stops when the summed error estimate falls below
/// `max(abs_tol, rel_tol·|value|)`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_pieces: usize,
) -> Result<Quadrature> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap: BinaryHeap<Piece> = breaks
        .windows(2)
        .map(|w| Piece {
            a: w[0],
            b: w[1],
            q: gk15(&f, w[0], w[1]),
        })
        .collect();
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.q.value, e + p.q.error));
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature { value, error });
        }
        if heap.len() >= max_pieces {
            return Err(Error::Quadrature {
                value,
                error_bound: error,
            });
        }
        let worst = heap.pop().expect("nonempty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            return Err(Error::Quadrature {
                value,
                error_bound: error,
            });
        }
        heap.push(Piece {
            a: worst.a,
            b: m,
            q: gk15(&f, worst.a, m),
        });
        heap.push(Piece {
            a: m,
            b: worst.b,
            q: gk15(&f, m, worst.b),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_exp() {
        let q = simpson(|x| x * x * x, 0.0, 2.0, 1e-12, 30).unwrap();
        assert!((q.value - 4.0).abs() < 1e-12);
        let q = simpson(f64::exp, 0.0, 1.0, 1e-12, 40).unwrap();
        assert!((q.value - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn gauss_kronrod_oscillatory() {
        // ∫_0^{20π} sin(x)²/x... use a known closed form: ∫_0^{10} cos(5x) = sin(50)/5
        let q = gauss_kronrod(|x| (5.0 * x).cos(), &[0.0, 10.0], 1e-13, 0.0, 1000).unwrap();
        assert!((q.value - 50f64.sin() / 5.0).abs() < 1e-12);
        let q = gauss_kronrod(|x| (-x * x).exp(), &[0.0, 3.0, 10.0], 1e-14, 0.0, 1000).unwrap();
        assert!((q.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn gauss_kronrod_reports_failure() {
        let r = gauss_kronrod(|x| 1.0 / x.abs().sqrt().max(1e-300), &[-1.0, 1.0], 1e-15, 0.0, 8);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
