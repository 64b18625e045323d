//! Adaptive Gauss–Kronrod quadrature, Brent root bracketing, and a pivoted
//! 2×2 solver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Default absolute tolerance for the strategy integrals.
pub const QUAD_TOL: f64 = 1e-10;

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &mut impl FnMut(f64) -> f64, lo: f64, hi: f64) -> Panel {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Panel {
        lo,
        hi,
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// Integrates `f` over the partition given by `breaks` (sorted, at least two
/// points), refining the worst panel until the summed error estimate drops
/// below `tol`.
///
/// The tolerance is absolute, floored at a few ulps of the integral so that
/// large integrands do not chase round-off.
pub fn integrate(mut f: impl FnMut(f64) -> f64, breaks: &[f64], tol: f64) -> Result<f64> {
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let (mut value, mut error) = (0.0, 0.0);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let p = gk15(&mut f, w[0], w[1]);
            value += p.value;
            error += p.error;
            heap.push(p);
        }
    }
    let max_panels = heap.len() + 4000;
    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature {
                estimate: f64::INFINITY,
                tolerance: tol,
            });
        }
        let target = tol.max(1e-14 * value.abs());
        if error <= target {
            return Ok(value);
        }
        if heap.len() >= max_panels {
            return Err(Error::Quadrature {
                estimate: error,
                tolerance: target,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::Quadrature {
                estimate: error,
                tolerance: target,
            });
        }
        let l = gk15(&mut f, worst.lo, mid);
        let r = gk15(&mut f, mid, worst.hi);
        value += l.value + r.value - worst.value;
        error += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
}

/// Single fixed 15-point Kronrod rule on [lo, hi]; used where the integrand
/// is known to be smooth on a short panel.
pub fn kronrod15(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> f64 {
    gk15(&mut f, lo, hi).value
}

/// Brent's method on a bracket with `f(lo)` and `f(hi)` of opposite sign.
pub fn brent(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Root(format!(
            "no sign change on [{lo}, {hi}] (f = {fa:e}, {fb:e})"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::Root("Brent iteration limit reached".into()))
}

/// Solves the 2×2 system `m · x = rhs` by elimination with partial pivoting.
///
/// Returns the solution together with the determinant relative to the
/// product of the row norms; callers treat small values as singular.
pub fn solve2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> ([f64; 2], f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0].hypot(m[0][1]) * m[1][0].hypot(m[1][1]);
    let rel = if scale > 0.0 { det.abs() / scale } else { 0.0 };
    let (p, q) = if m[0][0].abs() >= m[1][0].abs() {
        (0, 1)
    } else {
        (1, 0)
    };
    let piv = m[p][0];
    if piv == 0.0 {
        return ([f64::NAN; 2], 0.0);
    }
    let l = m[q][0] / piv;
    let u11 = m[q][1] - l * m[p][1];
    let y1 = rhs[q] - l * rhs[p];
    let x1 = y1 / u11;
    let x0 = (rhs[p] - m[p][1] * x1) / piv;
    ([x0, x1], rel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = integrate(|x| x.exp() * (3.0 * x).sin(), &[0.0, 4.0], 1e-12).unwrap();
        let exact = {
            let f = |x: f64| x.exp() * ((3.0 * x).sin() - 3.0 * (3.0 * x).cos()) / 10.0;
            f(4.0) - f(0.0)
        };
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let v = integrate(|x| (x - 1.3f64).abs(), &[0.0, 1.3, 2.0], 1e-13).unwrap();
        assert!((v - (0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7)).abs() < 1e-13);
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(|x| 1.0 / (x * x), &[-1.0, 1.0], 1e-10);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn brent_finds_roots() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 3.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn solve2_pivots() {
        let (x, rel) = solve2([[1e-20, 1.0], [1.0, 1.0]], [1.0, 2.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert!(rel > 0.5);
        let (_, rel) = solve2([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0]);
        assert!(rel < 1e-14);
    }
}
