//! Exponential moment kernels shared by the market model and the strategy
//! integrals.
//!
//! All of them cancel catastrophically near `a·t = 0` when written in the
//! closed form, so below `|a·t| < SERIES_CUTOFF` they are summed as power
//! series instead. A cut-off of 0.5 keeps the closed branch within about one
//! and a half digits of full precision even for Υ, whose numerator vanishes
//! like `(a·t)³`.

use num_complex::Complex64;

const SERIES_CUTOFF: f64 = 0.5;
const MAX_TERMS: usize = 40;

/// Ψ(a,t) = ∫₀ᵗ e^{-a u} du.
pub(crate) fn psi(a: f64, t: f64) -> f64 {
    let x = a * t;
    if x.abs() < SERIES_CUTOFF {
        // t · Σ (-x)^n / (n+1)!
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..MAX_TERMS {
            term *= -x / (n as f64 + 1.0);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        t * sum
    } else {
        -(-x).exp_m1() / a
    }
}

/// Θ(a,t) = ∫₀ᵗ Ψ(a,s) ds.
pub(crate) fn theta(a: f64, t: f64) -> f64 {
    let x = a * t;
    if x.abs() < SERIES_CUTOFF {
        // t² · Σ (-x)^n / (n+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for n in 1..MAX_TERMS {
            term *= -x / (n as f64 + 2.0);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        t * t * sum
    } else {
        (x + (-x).exp_m1()) / (a * a)
    }
}

/// Υ(a,t) = ∫₀ᵗ Ψ(a,s)² ds.
pub(crate) fn upsilon(a: f64, t: f64) -> f64 {
    let x = a * t;
    if x.abs() < SERIES_CUTOFF {
        // Expanding e^{-x} and e^{-2x} in the closed form, the orders 0..2
        // cancel and what is left is
        //   t³/2 · Σ_{n≥3} (-1)^n (4 - 2^n) x^{n-3} / n!
        let mut sum = 0.0f64;
        let mut xp = 1.0; // x^{n-3}
        let mut fact = 6.0; // n!
        let mut two_n = 8.0; // 2^n
        for n in 3..MAX_TERMS + 3 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * (4.0 - two_n) * xp / fact;
            sum += term;
            if n > 3 && term.abs() < 1e-18 * sum.abs() {
                break;
            }
            xp *= x;
            fact *= (n + 1) as f64;
            two_n *= 2.0;
        }
        0.5 * t * t * t * sum
    } else {
        (2.0 * x + 4.0 * (-x).exp_m1() - (-2.0 * x).exp_m1()) / (2.0 * a * a * a)
    }
}

/// M_j(z,t) = ∫₀ᵗ v^j e^{-z v} dv for complex z, for j = 0, 1, 2.
///
/// Returned as `[M_0, M_1, M_2]`.
pub(crate) fn exp_moments(z: Complex64, t: f64) -> [Complex64; 3] {
    let x = z * t;
    if x.norm() < SERIES_CUTOFF {
        // M_j = t^{j+1} Σ (-x)^n / (n! (n+j+1))
        let mut out = [Complex64::new(0.0, 0.0); 3];
        let mut pow = Complex64::new(1.0, 0.0); // (-x)^n / n!
        for n in 0..MAX_TERMS {
            let nf = n as f64;
            for (j, o) in out.iter_mut().enumerate() {
                *o += pow / (nf + j as f64 + 1.0);
            }
            if n > 0 && pow.norm() < 1e-18 {
                break;
            }
            pow *= -x / (nf + 1.0);
        }
        out[0] *= t;
        out[1] *= t * t;
        out[2] *= t * t * t;
        out
    } else {
        let e = (-x).exp();
        let m0 = (Complex64::new(1.0, 0.0) - e) / z;
        let m1 = (m0 - t * e) / z;
        let m2 = (2.0 * m1 - t * t * e) / z;
        [m0, m1, m2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn series_and_closed_branches_meet() {
        for &t in &[0.3, 1.0, 7.0, 40.0] {
            let a = SERIES_CUTOFF / t;
            let lo = a * (1.0 - 1e-12);
            let hi = a * (1.0 + 1e-12);
            for f in [psi, theta, upsilon] {
                let (l, h) = (f(lo, t), f(hi, t));
                assert!(((l - h) / h).abs() < 1e-11, "t={t}: {l} vs {h}");
            }
        }
    }

    #[test]
    fn kernels_match_simpson() {
        for &(a, t) in &[
            (0.06, 20.0),
            (0.08, 20.0),
            (1e-3, 5.0),
            (-0.2, 3.0),
            (2.5, 4.0),
        ] {
            let p = simpson(|u| (-a * u).exp(), 0.0, t, 4000);
            let th = simpson(|s| psi(a, s), 0.0, t, 4000);
            let u = simpson(|s| psi(a, s).powi(2), 0.0, t, 4000);
            assert!((psi(a, t) - p).abs() < 1e-10 * p.abs().max(1.0));
            assert!((theta(a, t) - th).abs() < 1e-9 * th.abs().max(1.0));
            assert!((upsilon(a, t) - u).abs() < 1e-9 * u.abs().max(1.0));
        }
    }

    #[test]
    fn complex_moments_match_simpson() {
        let cases = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.01, 0.0),
            Complex64::new(-0.3, 0.0),
            Complex64::new(0.06, 0.4),
            Complex64::new(0.0, -1.3),
        ];
        for &z in &cases {
            for &t in &[0.5, 3.0, 20.0] {
                let m = exp_moments(z, t);
                for j in 0..3 {
                    let re = simpson(|v| (v.powi(j as i32) * (-z * v).exp()).re, 0.0, t, 20000);
                    let im = simpson(|v| (v.powi(j as i32) * (-z * v).exp()).im, 0.0, t, 20000);
                    let err = (m[j] - Complex64::new(re, im)).norm();
                    assert!(
                        err < 1e-8 * m[j].norm().max(1.0),
                        "z={z} t={t} j={j}: {err}"
                    );
                }
            }
        }
    }
}
