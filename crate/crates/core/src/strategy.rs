//! Deterministic exposure profiles on [0, T].
//!
//! Exposures are in volatility units: a bond exposure of `f` means the
//! portfolio carries `f` units of the rate shock `dW^r`, an equity exposure
//! `f` means `f / σ_S` of wealth in stocks.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel;
use crate::numerics;

/// Horizons shorter than this are rejected instead of producing zeros.
pub const MIN_HORIZON: f64 = 1e-9;

/// Default number of grid intervals when a profile is sampled.
pub const DEFAULT_INTERVALS: usize = 2000;

/// Analytic profile families. Coefficients are in exposure units and the
/// rates `c`, `c1`, `c2` per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// b0 + b1·e^{c1 s} + b2·e^{c2 s}
    Exponential {
        b0: f64,
        b1: f64,
        c1: f64,
        b2: f64,
        c2: f64,
    },
    /// b0 + b1·sin(c s) + b2·cos(c s)
    Trigonometric { b0: f64, b1: f64, b2: f64, c: f64 },
    /// b0 + b1·s + b2·s²
    Quadratic { b0: f64, b1: f64, b2: f64 },
}

/// One quasi-polynomial term `coef · s^power · e^{rate s}`; the profile is
/// the real part of the sum of its terms.
#[derive(Debug, Clone, Copy)]
struct Term {
    coef: Complex64,
    power: u8,
    rate: Complex64,
}

impl ClosedForm {
    fn terms(&self) -> [Term; 3] {
        let re = |x: f64| Complex64::new(x, 0.0);
        let t = |coef: Complex64, power: u8, rate: Complex64| Term { coef, power, rate };
        let zero = re(0.0);
        match *self {
            ClosedForm::Exponential { b0, b1, c1, b2, c2 } => [
                t(re(b0), 0, zero),
                t(re(b1), 0, re(c1)),
                t(re(b2), 0, re(c2)),
            ],
            // b1 sin + b2 cos = Re[(b2 - i b1) e^{i c s}]
            ClosedForm::Trigonometric { b0, b1, b2, c } => [
                t(re(b0), 0, zero),
                t(Complex64::new(b2, -b1), 0, Complex64::new(0.0, c)),
                t(zero, 0, zero),
            ],
            ClosedForm::Quadratic { b0, b1, b2 } => {
                [t(re(b0), 0, zero), t(re(b1), 1, zero), t(re(b2), 2, zero)]
            }
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match *self {
            ClosedForm::Exponential { b0, b1, c1, b2, c2 } => {
                b0 + b1 * (c1 * s).exp() + b2 * (c2 * s).exp()
            }
            ClosedForm::Trigonometric { b0, b1, b2, c } => {
                let (sn, cs) = (c * s).sin_cos();
                b0 + b1 * sn + b2 * cs
            }
            ClosedForm::Quadratic { b0, b1, b2 } => b0 + s * (b1 + s * b2),
        }
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        match *self {
            ClosedForm::Exponential { b1, c1, b2, c2, .. } => {
                b1 * c1 * c1 * (c1 * s).exp() + b2 * c2 * c2 * (c2 * s).exp()
            }
            ClosedForm::Trigonometric { b1, b2, c, .. } => {
                let (sn, cs) = (c * s).sin_cos();
                -c * c * (b1 * sn + b2 * cs)
            }
            ClosedForm::Quadratic { b2, .. } => 2.0 * b2,
        }
    }

    /// ∫_u^T f_s e^{-d(s-u)} ds in closed form.
    fn feedback(&self, horizon: f64, decay: f64, u: f64) -> f64 {
        let len = horizon - u;
        let mut acc = Complex64::new(0.0, 0.0);
        for term in self.terms() {
            if term.coef == Complex64::new(0.0, 0.0) {
                continue;
            }
            let m = kernel::exp_moments(Complex64::new(decay, 0.0) - term.rate, len);
            // (u + v)^k expanded in powers of v
            let poly = match term.power {
                0 => m[0],
                1 => u * m[0] + m[1],
                _ => u * u * m[0] + 2.0 * u * m[1] + m[2],
            };
            acc += term.coef * (term.rate * u).exp() * poly;
        }
        acc.re
    }
}

/// Exposures on a uniform grid `s_k = k·step`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    step: f64,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let n = self.values.len() - 1;
        let k = ((s / self.step).floor() as usize).min(n - 1);
        (k, s - k as f64 * self.step)
    }

    fn value(&self, s: f64) -> f64 {
        let (k, w) = self.locate(s);
        let slope = (self.values[k + 1] - self.values[k]) / self.step;
        self.values[k] + slope * w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    Constant(f64),
    ClosedForm(ClosedForm),
    Sampled(SampledPath),
}

/// A deterministic exposure profile over a fixed horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    horizon: f64,
    kind: StrategyKind,
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon.is_finite() && horizon >= MIN_HORIZON {
        Ok(())
    } else {
        Err(Error::param(
            "T",
            format!("horizon must be finite and at least {MIN_HORIZON:e} years, got {horizon}"),
        ))
    }
}

impl Strategy {
    pub fn constant(horizon: f64, level: f64) -> Result<Self> {
        check_horizon(horizon)?;
        if !level.is_finite() {
            return Err(Error::param("exposure", "must be finite"));
        }
        Ok(Strategy {
            horizon,
            kind: StrategyKind::Constant(level),
        })
    }

    pub fn closed_form(horizon: f64, form: ClosedForm) -> Result<Self> {
        check_horizon(horizon)?;
        let finite = match form {
            ClosedForm::Exponential { b0, b1, c1, b2, c2 } => {
                [b0, b1, c1, b2, c2].iter().all(|v| v.is_finite())
            }
            ClosedForm::Trigonometric { b0, b1, b2, c } => {
                [b0, b1, b2, c].iter().all(|v| v.is_finite())
            }
            ClosedForm::Quadratic { b0, b1, b2 } => [b0, b1, b2].iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err(Error::param("coefficients", "must be finite"));
        }
        Ok(Strategy {
            horizon,
            kind: StrategyKind::ClosedForm(form),
        })
    }

    /// Exposures `values[k]` at `s = k·horizon/(len-1)`.
    pub fn sampled(horizon: f64, values: Vec<f64>) -> Result<Self> {
        check_horizon(horizon)?;
        if values.len() < 2 {
            return Err(Error::param(
                "values",
                "a sampled strategy needs at least two points",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("values", "must be finite"));
        }
        let step = horizon / (values.len() - 1) as f64;
        Ok(Strategy {
            horizon,
            kind: StrategyKind::Sampled(SampledPath { step, values }),
        })
    }

    /// Samples `f` on `intervals + 1` equally spaced points.
    pub fn sample_fn(horizon: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_horizon(horizon)?;
        let n = intervals.max(1);
        let values = (0..=n).map(|k| f(horizon * k as f64 / n as f64)).collect();
        Strategy::sampled(horizon, values)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kind(&self) -> &StrategyKind {
        &self.kind
    }

    /// Exposure at time `s`; errors outside [0, T].
    pub fn value(&self, s: f64) -> Result<f64> {
        self.check_time(s)?;
        Ok(self.eval(s))
    }

    pub(crate) fn check_time(&self, s: f64) -> Result<()> {
        let slack = 1e-12 * self.horizon;
        if s.is_finite() && s >= -slack && s <= self.horizon + slack {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                what: "time",
                value: s,
                lo: 0.0,
                hi: self.horizon,
            })
        }
    }

    pub(crate) fn eval(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.horizon);
        match &self.kind {
            StrategyKind::Constant(c) => *c,
            StrategyKind::ClosedForm(cf) => cf.value(s),
            StrategyKind::Sampled(p) => p.value(s),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            StrategyKind::Constant(c) => *c == 0.0,
            StrategyKind::Sampled(p) => p.values.iter().all(|v| *v == 0.0),
            StrategyKind::ClosedForm(_) => false,
        }
    }

    /// Natural panel boundaries for integrating functions of this profile.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            StrategyKind::Sampled(p) => {
                let n = p.values.len() - 1;
                (0..=n)
                    .map(|k| {
                        if k == n {
                            self.horizon
                        } else {
                            k as f64 * p.step
                        }
                    })
                    .collect()
            }
            _ => {
                // A handful of panels keeps the adaptive rule from sampling a
                // long horizon too sparsely on its first pass.
                let n = (self.horizon / 5.0).ceil().clamp(1.0, 16.0) as usize;
                (0..=n)
                    .map(|k| self.horizon * k as f64 / n as f64)
                    .collect()
            }
        }
    }

    /// Writes `s,exposure` rows, one per grid point (or `points` samples for
    /// analytic profiles).
    pub fn to_csv(&self, points: usize) -> String {
        let mut out = String::from("s,exposure\n");
        let grid: Vec<f64> = match &self.kind {
            StrategyKind::Sampled(_) => self.breakpoints(),
            _ => {
                let n = points.max(1);
                (0..=n)
                    .map(|k| self.horizon * k as f64 / n as f64)
                    .collect()
            }
        };
        for s in grid {
            let _ = writeln!(out, "{},{}", s, self.eval(s));
        }
        out
    }

    /// Reads the `s,exposure` format back as a sampled strategy. Times must
    /// start at 0 and be equally spaced.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(|h| h.replace(' ', "")) {
            Some(h) if h == "s,exposure" => {}
            _ => return Err(Error::param("csv", "expected header `s,exposure`")),
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let parse = |p: Option<&str>| -> Result<f64> {
                p.and_then(|v| v.trim().parse().ok()).ok_or_else(|| {
                    Error::param("csv", format!("malformed row {}: `{line}`", i + 2))
                })
            };
            times.push(parse(parts.next())?);
            values.push(parse(parts.next())?);
        }
        if times.len() < 2 {
            return Err(Error::param("csv", "need at least two rows"));
        }
        let horizon = *times.last().expect("non-empty");
        let step = horizon / (times.len() - 1) as f64;
        for (k, t) in times.iter().enumerate() {
            if (t - k as f64 * step).abs() > 1e-9 * horizon.max(1.0) {
                return Err(Error::param(
                    "csv",
                    "times must start at 0 and be equally spaced",
                ));
            }
        }
        Strategy::sampled(horizon, values)
    }
}

/// Evaluates the feedback integral ∫_u^T f_s e^{-d(s-u)} ds of a strategy.
///
/// Analytic for constant and closed-form profiles; for sampled profiles
/// the integral over each linear panel is exact and the panels are chained
/// by a backward recursion precomputed once per decay rate.
pub(crate) struct Feedback<'a> {
    strategy: &'a Strategy,
    decay: f64,
    // I(s_k) for sampled strategies.
    nodes: Vec<f64>,
}

impl<'a> Feedback<'a> {
    pub(crate) fn new(strategy: &'a Strategy, decay: f64) -> Self {
        let nodes = match &strategy.kind {
            StrategyKind::Sampled(p) => {
                let n = p.values.len() - 1;
                let h = p.step;
                let (m0, m1) = linear_panel_moments(decay, h);
                let damp = (-decay * h).exp();
                let mut nodes = vec![0.0; n + 1];
                for k in (0..n).rev() {
                    let slope = (p.values[k + 1] - p.values[k]) / h;
                    nodes[k] = damp * nodes[k + 1] + p.values[k] * m0 + slope * m1;
                }
                nodes
            }
            _ => Vec::new(),
        };
        Feedback {
            strategy,
            decay,
            nodes,
        }
    }

    pub(crate) fn at(&self, u: f64) -> f64 {
        let t = self.strategy.horizon;
        let u = u.clamp(0.0, t);
        match &self.strategy.kind {
            StrategyKind::Constant(c) => c * kernel::psi(self.decay, t - u),
            StrategyKind::ClosedForm(cf) => cf.feedback(t, self.decay, u),
            StrategyKind::Sampled(p) => {
                let (k, w) = p.locate(u);
                let rest = p.step - w;
                let slope = (p.values[k + 1] - p.values[k]) / p.step;
                let (m0, m1) = linear_panel_moments(self.decay, rest);
                p.value(u) * m0 + slope * m1 + (-self.decay * rest).exp() * self.nodes[k + 1]
            }
        }
    }
}

/// (∫₀ʰ e^{-dv} dv, ∫₀ʰ v e^{-dv} dv)
fn linear_panel_moments(decay: f64, h: f64) -> (f64, f64) {
    let m0 = kernel::psi(decay, h);
    (m0, h * m0 - kernel::theta(decay, h))
}

/// The same feedback integral by adaptive quadrature; an independent check
/// on [`Feedback`].
pub(crate) fn feedback_by_quadrature(
    strategy: &Strategy,
    decay: f64,
    u: f64,
    tol: f64,
) -> Result<f64> {
    let t = strategy.horizon;
    if u >= t {
        return Ok(0.0);
    }
    let mut breaks = vec![u];
    breaks.extend(
        strategy
            .breakpoints()
            .into_iter()
            .filter(|&s| s > u && s < t),
    );
    breaks.push(t);
    numerics::integrate(
        |s| strategy.eval(s) * (-decay * (s - u)).exp(),
        &breaks,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forms() -> Vec<ClosedForm> {
        vec![
            ClosedForm::Exponential {
                b0: 0.3,
                b1: -0.1,
                c1: 0.07,
                b2: 0.2,
                c2: -0.07,
            },
            ClosedForm::Exponential {
                b0: 0.0,
                b1: 1.0,
                c1: 0.06,
                b2: 0.0,
                c2: 0.0,
            },
            ClosedForm::Trigonometric {
                b0: 0.2,
                b1: 0.05,
                b2: -0.1,
                c: 0.3,
            },
            ClosedForm::Quadratic {
                b0: 0.1,
                b1: 0.02,
                b2: -0.001,
            },
        ]
    }

    #[test]
    fn analytic_feedback_matches_quadrature() {
        for form in forms() {
            let s = Strategy::closed_form(20.0, form).unwrap();
            for &d in &[0.0, 0.06, 0.5, -0.1] {
                let fb = Feedback::new(&s, d);
                for &u in &[0.0, 3.3, 12.0, 19.99, 20.0] {
                    let a = fb.at(u);
                    let q = feedback_by_quadrature(&s, d, u, 1e-13).unwrap();
                    assert!(
                        (a - q).abs() < 1e-11 * q.abs().max(1.0),
                        "{form:?} d={d} u={u}: {a} vs {q}"
                    );
                }
            }
        }
    }

    #[test]
    fn sampled_feedback_matches_quadrature() {
        let s = Strategy::sample_fn(15.0, 37, |t| 0.4 - 0.02 * t + 0.1 * (t / 3.0).sin()).unwrap();
        for &d in &[0.0, 0.08, 1.5] {
            let fb = Feedback::new(&s, d);
            for &u in &[0.0, 0.1, 7.77, 14.9, 15.0] {
                let a = fb.at(u);
                let q = feedback_by_quadrature(&s, d, u, 1e-13).unwrap();
                assert!((a - q).abs() < 1e-11, "d={d} u={u}: {a} vs {q}");
            }
        }
    }

    #[test]
    fn constant_feedback_is_scaled_psi() {
        let s = Strategy::constant(20.0, 0.3).unwrap();
        let fb = Feedback::new(&s, 0.06);
        assert!((fb.at(5.0) - 0.3 * kernel::psi(0.06, 15.0)).abs() < 1e-15);
        assert_eq!(fb.at(20.0), 0.0);
    }

    #[test]
    fn second_derivative_by_differences() {
        for form in forms() {
            let h = 1e-3;
            for &s in &[1.0, 9.0] {
                let fd = (form.value(s + h) - 2.0 * form.value(s) + form.value(s - h)) / (h * h);
                assert!((fd - form.second_derivative(s)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn evaluation_domain() {
        let s = Strategy::constant(10.0, 1.0).unwrap();
        assert!(s.value(-0.1).is_err());
        assert!(s.value(10.1).is_err());
        assert_eq!(s.value(10.0).unwrap(), 1.0);
        assert!(Strategy::constant(1e-10, 1.0).is_err());
        assert!(Strategy::sampled(1.0, vec![1.0]).is_err());
        assert!(Strategy::sampled(1.0, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = Strategy::sample_fn(12.0, 24, |t| 0.3 - 0.01 * t).unwrap();
        let back = Strategy::from_csv(&s.to_csv(0)).unwrap();
        assert!((back.horizon() - 12.0).abs() < 1e-12);
        for t in [0.0, 3.1, 12.0] {
            assert!((back.eval(t) - s.eval(t)).abs() < 1e-12);
        }
        assert!(Strategy::from_csv("t,f\n0,1\n1,1\n").is_err());
        assert!(Strategy::from_csv("s,exposure\n0,1\n1,1\n3,1\n").is_err());
    }
}
