//! Extremal equity strategies.
//!
//! Stationarity of the Lagrangian gives the Volterra equation
//!
//!   ξ_s - f_s + 2ν h_s - 2ν R ∫₀ˢ h_u e^{-α(s-u)} du = 0,   R = σ_x/σ_S,
//!
//! which differentiates into A f'' + C f + D = 0 with
//! A = 1 - 2ν, C = 2ν(α - R)² - α², D = α² x̄/σ_S. The two integration
//! constants of the ODE solution are fixed by substituting back into the
//! integral equation, which leaves a 2×2 linear system per solution type.

use std::fmt;

use super::Nu;
use crate::error::{Error, Result};
use crate::kernel;
use crate::market_model::{EquityParams, MarketState};
use crate::numerics;
use crate::portfolio_distribution::{horizon_moments_equity_only, xi_unchecked, LogNormalSummary};
use crate::strategy::{ClosedForm, Feedback, Strategy, StrategyKind, MIN_HORIZON};

/// Relative determinant below which a coefficient system is singular.
const SINGULAR_DET: f64 = 1e-14;

/// Grid size used by the residual checks.
pub const RESIDUAL_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionType {
    /// b0 + b1 e^{c s} + b2 e^{-c s}
    I,
    /// b0 + b1 sin(c s) + b2 cos(c s)
    II,
    /// b0 + b1 s + b2 s²
    III,
}

impl fmt::Display for SolutionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionType::I => "I",
            SolutionType::II => "II",
            SolutionType::III => "III",
        })
    }
}

/// (A, C, D) of the extremal ODE.
fn ode_coefficients(ep: &EquityParams, nu: f64) -> (f64, f64, f64) {
    let r = ep.feedback_ratio();
    let al = ep.alpha;
    (
        1.0 - 2.0 * nu,
        2.0 * nu * (al - r) * (al - r) - al * al,
        al * al * ep.x_bar / ep.sigma_s,
    )
}

fn classify(ep: &EquityParams, nu: f64) -> SolutionType {
    let (a, c, _) = ode_coefficients(ep, nu);
    let r = ep.feedback_ratio();
    if c.abs() <= 1e-12 * r * r {
        SolutionType::III
    } else if (a > 0.0) != (c > 0.0) {
        SolutionType::I
    } else {
        SolutionType::II
    }
}

/// Solution type of the equity extremal at a finite ν ≠ 1/2.
pub fn classify_solution_type(ep: &EquityParams, nu: Nu) -> Result<SolutionType> {
    ep.validate()?;
    nu.reject_half()?;
    match nu {
        Nu::Finite(v) => Ok(classify(ep, v)),
        _ => Err(Error::param(
            "nu",
            "classification needs a finite multiplier",
        )),
    }
}

/// An equity extremal together with the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EquityExtremalSolution {
    pub nu: Nu,
    pub kind: SolutionType,
    pub params: EquityParams,
    pub state: MarketState,
    pub horizon: f64,
    strategy: Strategy,
}

/// Flat coefficient record `type,nu,b0,b1,b2,c1,c2`.
///
/// For type II, `c1` holds the frequency and `c2` is zero; for type III both
/// rates are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientRecord {
    pub kind: SolutionType,
    pub nu: Nu,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl CoefficientRecord {
    pub const CSV_HEADER: &'static str = "type,nu,b0,b1,b2,c1,c2";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.kind, self.nu, self.b0, self.b1, self.b2, self.c1, self.c2
        )
    }
}

impl EquityExtremalSolution {
    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn coefficients(&self) -> CoefficientRecord {
        let (b0, b1, b2, c1, c2) = match self.strategy.kind() {
            StrategyKind::Constant(c) => (*c, 0.0, 0.0, 0.0, 0.0),
            StrategyKind::ClosedForm(ClosedForm::Exponential { b0, b1, c1, b2, c2 }) => {
                (*b0, *b1, *b2, *c1, *c2)
            }
            StrategyKind::ClosedForm(ClosedForm::Trigonometric { b0, b1, b2, c }) => {
                (*b0, *b1, *b2, *c, 0.0)
            }
            StrategyKind::ClosedForm(ClosedForm::Quadratic { b0, b1, b2 }) => {
                (*b0, *b1, *b2, 0.0, 0.0)
            }
            StrategyKind::Sampled(_) => unreachable!("extremals are analytic"),
        };
        CoefficientRecord {
            kind: self.kind,
            nu: self.nu,
            b0,
            b1,
            b2,
            c1,
            c2,
        }
    }

    /// Glidepath CSV `s,exposure,equity_share` on `points` equal steps, with
    /// the equity share f^S/σ_S.
    pub fn glidepath_csv(&self, points: usize) -> String {
        let n = points.max(1);
        let mut out = String::from("s,exposure,equity_share\n");
        for k in 0..=n {
            let s = self.horizon * k as f64 / n as f64;
            let f = self.strategy.eval(s);
            out.push_str(&format!("{s},{f},{}\n", f / self.params.sigma_s));
        }
        out
    }

    /// Equity-only (μ_T, σ_T²) of this strategy.
    pub fn moments(&self) -> Result<LogNormalSummary> {
        horizon_moments_equity_only(&self.params, &self.state, &self.strategy)
    }

    /// Sup-norm of the integral-equation residual on a 1001-point grid.
    pub fn residual_integral_equation(&self) -> Result<f64> {
        match self.nu {
            Nu::Finite(v) => integral_equation_residual(
                &self.params,
                &self.state,
                v,
                &self.strategy,
                RESIDUAL_POINTS,
            ),
            _ => Err(Error::param("nu", "residuals need a finite multiplier")),
        }
    }

    /// Sup-norm of A f'' + C f + D on a 1001-point grid.
    pub fn residual_ode(&self) -> Result<f64> {
        let nu = self
            .nu
            .finite()
            .ok_or_else(|| Error::param("nu", "residuals need a finite multiplier"))?;
        let (a, c, d) = ode_coefficients(&self.params, nu);
        let form = match self.strategy.kind() {
            StrategyKind::ClosedForm(f) => *f,
            _ => unreachable!("finite-nu extremals are closed forms"),
        };
        let n = RESIDUAL_POINTS - 1;
        Ok((0..=n)
            .map(|k| {
                let s = self.horizon * k as f64 / n as f64;
                (a * form.second_derivative(s) + c * form.value(s) + d).abs()
            })
            .fold(0.0, f64::max))
    }
}

/// Sup-norm over `points` grid nodes of the left-hand side of the extremal
/// integral equation for an arbitrary strategy `f`.
pub fn integral_equation_residual(
    ep: &EquityParams,
    st: &MarketState,
    nu: f64,
    f: &Strategy,
    points: usize,
) -> Result<f64> {
    ep.validate()?;
    st.validate()?;
    if points < 2 {
        return Err(Error::param("points", "need at least two grid points"));
    }
    let t = f.horizon();
    let r = ep.feedback_ratio();
    let al = ep.alpha;
    let fb = Feedback::new(f, al);
    let h = |u: f64| f.eval(u) - r * fb.at(u);
    let kinks = f.breakpoints();
    let n = points - 1;
    // h cancels when f is large, and a closed form near the type III
    // boundary carries large cancelling terms, so the panel tolerance
    // follows the size of those terms rather than the panel integral.
    let scale = match f.kind() {
        StrategyKind::ClosedForm(form) => term_bound(form, t),
        _ => (0..=n)
            .map(|k| f.eval(t * k as f64 / n as f64).abs())
            .fold(0.0, f64::max),
    }
    .max(1.0);
    let mut conv = 0.0; // ∫₀ˢ h_u e^{-α(s-u)} du
    let mut worst = 0.0f64;
    let mut prev = 0.0;
    for k in 0..=n {
        let s = if k == n { t } else { t * k as f64 / n as f64 };
        if k > 0 {
            let mut breaks = vec![prev];
            breaks.extend(kinks.iter().copied().filter(|&x| x > prev && x < s));
            breaks.push(s);
            let panel =
                numerics::integrate(|u| h(u) * (-al * (s - u)).exp(), &breaks, 1e-15 * scale)?;
            conv = conv * (-al * (s - prev)).exp() + panel;
        }
        let lhs = xi_unchecked(ep, st, s) - f.eval(s) + 2.0 * nu * h(s) - 2.0 * nu * r * conv;
        worst = worst.max(lhs.abs());
        prev = s;
    }
    Ok(worst)
}

/// Sum of the absolute sizes of the terms of `form` on [0, t].
fn term_bound(form: &ClosedForm, t: f64) -> f64 {
    let grow = |c: f64| (c * t).exp().max(1.0);
    match *form {
        ClosedForm::Exponential { b0, b1, c1, b2, c2 } => {
            b0.abs() + b1.abs() * grow(c1) + b2.abs() * grow(c2)
        }
        ClosedForm::Trigonometric { b0, b1, b2, .. } => b0.abs() + b1.abs() + b2.abs(),
        ClosedForm::Quadratic { b0, b1, b2 } => b0.abs() + b1.abs() * t + b2.abs() * t * t,
    }
}

fn solve_or_singular(nu: f64, m: [[f64; 2]; 2], rhs: [f64; 2]) -> Result<[f64; 2]> {
    let (x, rel) = numerics::solve2(m, rhs);
    if rel.is_nan() || rel < SINGULAR_DET || !x.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularNu { nu, det: rel });
    }
    Ok(x)
}

/// Extremal equity strategy for multiplier ν on horizon T.
pub fn equity_extremal(
    ep: &EquityParams,
    st: &MarketState,
    t: f64,
    nu: Nu,
) -> Result<EquityExtremalSolution> {
    ep.validate()?;
    st.validate()?;
    nu.reject_half()?;
    if !(t.is_finite() && t >= MIN_HORIZON) {
        return Err(Error::param(
            "T",
            format!("horizon must be at least {MIN_HORIZON:e} years"),
        ));
    }
    let build = |kind: SolutionType, form: ClosedForm| -> Result<EquityExtremalSolution> {
        Ok(EquityExtremalSolution {
            nu,
            kind,
            params: *ep,
            state: *st,
            horizon: t,
            strategy: Strategy::closed_form(t, form)?,
        })
    };
    let v = match nu {
        Nu::Finite(v) => v,
        // Both limits force h ≡ 0, whose only solution is f ≡ 0.
        _ => {
            return Ok(EquityExtremalSolution {
                nu,
                kind: SolutionType::I,
                params: *ep,
                state: *st,
                horizon: t,
                strategy: Strategy::constant(t, 0.0)?,
            })
        }
    };
    let kind = classify(ep, v);
    let (al, ss, sx) = (ep.alpha, ep.sigma_s, ep.sigma_x);
    let (xbar, x0) = (ep.x_bar, st.x0);
    let r = ep.feedback_ratio();
    let (a, c, d) = ode_coefficients(ep, v);

    // f = ξ/(1-2ν): the unconstrained optimum at ν = 0, and the whole family
    // when the premium has no volatility of its own.
    if v == 0.0 || sx == 0.0 {
        return build(
            kind,
            ClosedForm::Exponential {
                b0: xbar / (ss * a),
                b1: 0.0,
                c1: al,
                b2: (x0 - xbar) / (ss * a),
                c2: -al,
            },
        );
    }

    // α = R/2 makes c = α, where the general type I system degenerates.
    if (al - 0.5 * r).abs() <= 1e-12 * r {
        let damp = (-al * t).exp();
        let den = 2.0 * v * damp * damp - 1.0;
        if den.abs() < SINGULAR_DET {
            return Err(Error::SingularNu {
                nu: v,
                det: den.abs(),
            });
        }
        let b2 = (-x0 / ss + xbar / ss * (1.0 - 4.0 * v / a * (damp - 1.0))) / den;
        return build(
            kind,
            ClosedForm::Exponential {
                b0: xbar / (ss * a),
                b1: 0.0,
                c1: al,
                b2,
                c2: -al,
            },
        );
    }

    match kind {
        SolutionType::I => {
            let c1 = (-c / a).sqrt();
            if c1 * t > 700.0 {
                return Err(Error::Overflow(format!(
                    "type I exponent c·T = {} at nu = {v}",
                    c1 * t
                )));
            }
            let b0 = -d / c;
            let neg_c = -c;
            let m = [
                [(c1 * t).exp() / (c1 - al), (-c1 * t).exp() / (-c1 - al)],
                [r / (c1 + al - r), r / (-c1 + al - r)],
            ];
            let rhs = [
                al * xbar / (ss * neg_c),
                -x0 / ss + (al * xbar / ss) * (al - 2.0 * v * (al - r)) / neg_c,
            ];
            let [b1, b2] = solve_or_singular(v, m, rhs)?;
            build(
                kind,
                ClosedForm::Exponential {
                    b0,
                    b1,
                    c1,
                    b2,
                    c2: -c1,
                },
            )
        }
        SolutionType::II => {
            let w = (c / a).sqrt();
            let b0 = -d / c;
            let (k1, k2) = (w * t).sin_cos();
            let rt = r - al;
            let m = [[k1 * al + k2 * w, k2 * al - k1 * w], [w, rt]];
            let rhs = [
                (al * xbar / ss) * (1.0 / a + al * al / c),
                (x0 / sx) * (w * w + rt * rt) + (al * xbar / ss) * (1.0 / a + al * rt / c),
            ];
            let [b1, b2] = solve_or_singular(v, m, rhs)?;
            build(kind, ClosedForm::Trigonometric { b0, b1, b2, c: w })
        }
        SolutionType::III => {
            let b2 = -d / (2.0 * a);
            let rt = r - al;
            let m = [[al, t * al + 1.0], [r, r / rt]];
            let lead = xbar * al / (ss * a);
            // The x0 term carries 1/σ_S; substituting back into the integral
            // equation confirms it (a 1/σ_x here leaves an O(1) residual).
            let rhs = [
                lead * (0.5 * t * t * al * al + t * al + 1.0),
                (x0 / ss) * rt + lead * r / rt,
            ];
            let [b0, b1] = solve_or_singular(v, m, rhs)?;
            build(kind, ClosedForm::Quadratic { b0, b1, b2 })
        }
    }
}

/// (μ_T, σ_T²) of a constant equity exposure `c`, in closed form.
///
/// The variance is c²[T((α̃-1)/α̃)² + 2(α̃-1)(1-e^{-αT})/(α α̃²) +
/// (1-e^{-2αT})/(2α α̃²)], which is ∫(h^S)² integrated exactly. Without
/// mean reversion the expansion is undefined and quadrature is used.
pub fn constant_equity_moments(
    ep: &EquityParams,
    st: &MarketState,
    t: f64,
    c: f64,
) -> Result<LogNormalSummary> {
    ep.validate()?;
    st.validate()?;
    let strat = Strategy::constant(t, c)?;
    let al = ep.alpha;
    if al == 0.0 {
        return horizon_moments_equity_only(ep, st, &strat);
    }
    let mu =
        c / ep.sigma_s * (t * ep.x_bar + (st.x0 - ep.x_bar) * kernel::psi(al, t)) - 0.5 * t * c * c;
    let sigma2 = if ep.sigma_x == 0.0 {
        c * c * t
    } else {
        let at = al * ep.sigma_s / ep.sigma_x;
        let e1 = -(-al * t).exp_m1();
        let e2 = -(-2.0 * al * t).exp_m1();
        c * c
            * (t * ((at - 1.0) / at).powi(2)
                + 2.0 * (at - 1.0) / (al * at * at) * e1
                + e2 / (2.0 * al * at * at))
    };
    Ok(LogNormalSummary { mu, sigma2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn stationary() -> MarketState {
        MarketState { r0: 0.0, x0: 0.045 }
    }

    /// α̃ on the type III boundary for ν > 0 (the root that stays positive).
    fn boundary_ratio(nu: f64) -> f64 {
        let s = (8.0 * nu).sqrt();
        if nu > 0.5 {
            (4.0 * nu + s) / (2.0 * (2.0 * nu - 1.0))
        } else {
            (4.0 * nu - s) / (2.0 * (2.0 * nu - 1.0))
        }
    }

    #[test]
    fn classification_examples() {
        let ep = presets::equity_moderate();
        let r = ep.feedback_ratio();
        for v in [-100.0, -1.0, -0.01] {
            assert_eq!(
                classify_solution_type(&ep, Nu::Finite(v)).unwrap(),
                SolutionType::I
            );
        }
        let p = EquityParams {
            alpha: 0.9 * r,
            ..ep
        };
        assert_eq!(
            classify_solution_type(&p, Nu::Finite(2.0)).unwrap(),
            SolutionType::II
        );
        let p = EquityParams {
            alpha: boundary_ratio(2.0) * r,
            ..ep
        };
        assert_eq!(
            classify_solution_type(&p, Nu::Finite(2.0)).unwrap(),
            SolutionType::III
        );
        assert_eq!(
            classify_solution_type(&ep, Nu::Finite(0.5)),
            Err(Error::HalfNu)
        );
        assert!(classify_solution_type(&ep, Nu::NegativeInfinity).is_err());
    }

    #[test]
    fn unconstrained_optimum_is_xi() {
        let ep = presets::equity_moderate();
        let sol = equity_extremal(&ep, &stationary(), 20.0, Nu::Finite(0.0)).unwrap();
        for s in [0.0, 10.0, 20.0] {
            assert!((sol.strategy().eval(s) - 0.3).abs() < 1e-15);
        }
        assert_eq!(sol.residual_integral_equation().unwrap(), 0.0);
    }

    #[test]
    fn risk_free_limit_is_zero() {
        let ep = presets::equity_high();
        let sol = equity_extremal(&ep, &stationary(), 20.0, Nu::NegativeInfinity).unwrap();
        assert!(sol.strategy().is_zero());
        let m = sol.moments().unwrap();
        assert_eq!((m.mu, m.sigma2), (0.0, 0.0));
    }

    #[test]
    fn special_half_ratio_case() {
        let mut ep = presets::equity_moderate();
        ep.alpha = 0.5 * ep.feedback_ratio();
        let st = MarketState { r0: 0.0, x0: 0.03 };
        for v in [-3.0, -0.2, 0.3] {
            let sol = equity_extremal(&ep, &st, 25.0, Nu::Finite(v)).unwrap();
            let c = sol.coefficients();
            assert_eq!(c.b1, 0.0);
            assert!((c.c1 - ep.alpha).abs() < 1e-15 && (c.c2 + ep.alpha).abs() < 1e-15);
            assert!(sol.residual_integral_equation().unwrap() < 1e-10);
            assert!(sol.residual_ode().unwrap() < 1e-12);
        }
    }

    #[test]
    fn all_three_types_solve_the_integral_equation() {
        let base = presets::equity_moderate();
        let r = base.feedback_ratio();
        let st = MarketState { r0: 0.0, x0: 0.03 };
        let cases = [
            (base, -2.0, SolutionType::I),
            (base, 0.45, SolutionType::I),
            (base, 5.0, SolutionType::II),
            (
                EquityParams {
                    alpha: boundary_ratio(2.0) * r,
                    ..base
                },
                2.0,
                SolutionType::III,
            ),
            (
                EquityParams {
                    alpha: boundary_ratio(0.2) * r,
                    ..base
                },
                0.2,
                SolutionType::III,
            ),
            (EquityParams { alpha: 0.0, ..base }, -1.0, SolutionType::I),
            (EquityParams { alpha: 0.0, ..base }, 0.3, SolutionType::II),
        ];
        for (ep, v, kind) in cases {
            let sol = equity_extremal(&ep, &st, 20.0, Nu::Finite(v)).unwrap();
            assert_eq!(sol.kind, kind, "nu={v}");
            let ie = sol.residual_integral_equation().unwrap();
            let ode = sol.residual_ode().unwrap();
            assert!(ie < 1e-10, "{kind} nu={v}: integral residual {ie:e}");
            assert!(ode < 1e-12, "{kind} nu={v}: ode residual {ode:e}");
        }
    }

    #[test]
    fn perturbation_shows_in_residual() {
        let ep = presets::equity_moderate();
        let st = stationary();
        let sol = equity_extremal(&ep, &st, 20.0, Nu::Finite(-1.0)).unwrap();
        let f = sol.strategy();
        let bumped = Strategy::sample_fn(20.0, 2000, |s| f.eval(s) + 0.01).unwrap();
        let res = integral_equation_residual(&ep, &st, -1.0, &bumped, RESIDUAL_POINTS).unwrap();
        assert!(res >= 1e-3, "{res}");
    }

    #[test]
    fn constant_moments_against_quadrature() {
        let st = MarketState { r0: 0.0, x0: 0.03 };
        for name in ["mr-2", "mr-4", "mr-7", "mr-A", "mr-F", "mr-G", "mr-1"] {
            let ep = presets::equity_by_name(name).unwrap();
            for c in [0.0, 0.3, -0.2] {
                let cf = constant_equity_moments(&ep, &st, 20.0, c).unwrap();
                let q =
                    horizon_moments_equity_only(&ep, &st, &Strategy::constant(20.0, c).unwrap())
                        .unwrap();
                assert!((cf.mu - q.mu).abs() < 1e-10 * q.mu.abs().max(1.0), "{name}");
                assert!(
                    (cf.sigma2 - q.sigma2).abs() < 1e-10 * q.sigma2.max(1.0),
                    "{name}"
                );
            }
        }
        let ep = presets::equity_moderate();
        let s = constant_equity_moments(&ep, &stationary(), 20.0, 0.3).unwrap();
        assert!((s.mu - 0.9).abs() < 1e-12);
        assert!((s.sigma2 - 0.8638).abs() < 1e-4);
    }

    #[test]
    fn glidepath_shares() {
        let ep = presets::equity_moderate();
        let sol = equity_extremal(&ep, &stationary(), 20.0, Nu::Finite(0.0)).unwrap();
        let csv = sol.glidepath_csv(4);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("s,exposure,equity_share"));
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(row[0], 0.0);
        assert!((row[2] - 2.0).abs() < 1e-12);
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn coefficient_record_row() {
        let ep = presets::equity_moderate();
        let sol = equity_extremal(&ep, &stationary(), 20.0, Nu::Finite(-1.0)).unwrap();
        let row = sol.coefficients().csv_row();
        assert!(row.starts_with("I,-1,"));
        assert_eq!(row.split(',').count(), 7);
    }
}
