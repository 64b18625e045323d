//! Log-normal horizon distribution of a portfolio run with deterministic
//! exposures.
//!
//! For exposures `f = (f^r, f^S)` the log return log(V_T/V_0) is Gaussian.
//! Its variance is ∫ h'Ch du, where the effective weights `h` add to each
//! exposure the "indirect" impact that a shock at time `u` has on all later
//! returns through the mean-reverting factors.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::kernel;
use crate::market_model::{EquityParams, MarketState, RateParams};
use crate::numerics::{self, QUAD_TOL};
use crate::strategy::{feedback_by_quadrature, Feedback, Strategy};

/// Mean and variance of a Gaussian log return or log multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalSummary {
    pub mu: f64,
    pub sigma2: f64,
}

impl LogNormalSummary {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::param(
                "summary",
                format!("need finite mu and sigma2 >= 0, got ({mu}, {sigma2})"),
            ));
        }
        Ok(LogNormalSummary { mu, sigma2 })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Sum of two independent log returns.
    pub fn plus(&self, other: &LogNormalSummary) -> LogNormalSummary {
        LogNormalSummary {
            mu: self.mu + other.mu,
            sigma2: self.sigma2 + other.sigma2,
        }
    }
}

/// Rate and equity exposures over a common horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct JointExposure {
    rate: Strategy,
    equity: Strategy,
}

impl JointExposure {
    pub fn new(rate: Strategy, equity: Strategy) -> Result<Self> {
        let (a, b) = (rate.horizon(), equity.horizon());
        if (a - b).abs() > 1e-12 * a.max(b) {
            return Err(Error::param(
                "horizon",
                format!("rate and equity horizons differ ({a} vs {b})"),
            ));
        }
        Ok(JointExposure { rate, equity })
    }

    pub fn rate(&self) -> &Strategy {
        &self.rate
    }

    pub fn equity(&self) -> &Strategy {
        &self.equity
    }

    pub fn horizon(&self) -> f64 {
        self.rate.horizon()
    }
}

/// How the inner integrals of the `h` weights are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerIntegral {
    /// Closed form per panel or per basis function.
    Analytic,
    /// Nested adaptive quadrature; slow, kept as a cross-check.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    pub tol: f64,
    pub inner: InnerIntegral,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            tol: QUAD_TOL,
            inner: InnerIntegral::Analytic,
        }
    }
}

/// Expected market price of equity risk (x̄ + e^{-αs}(x0 - x̄))/σ_S.
pub fn xi(ep: &EquityParams, st: &MarketState, s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param("s", "must be a non-negative time"));
    }
    Ok(xi_unchecked(ep, st, s))
}

pub(crate) fn xi_unchecked(ep: &EquityParams, st: &MarketState, s: f64) -> f64 {
    (ep.x_bar + (-ep.alpha * s).exp() * (st.x0 - ep.x_bar)) / ep.sigma_s
}

/// Feedback integral through one of the two evaluation routes; quadrature
/// failures are parked in `err` so closures stay infallible.
struct Inner<'a> {
    analytic: Feedback<'a>,
    strategy: &'a Strategy,
    decay: f64,
    opts: MomentOptions,
    err: &'a Cell<Option<Error>>,
}

impl<'a> Inner<'a> {
    fn new(
        strategy: &'a Strategy,
        decay: f64,
        opts: MomentOptions,
        err: &'a Cell<Option<Error>>,
    ) -> Self {
        Inner {
            analytic: Feedback::new(strategy, decay),
            strategy,
            decay,
            opts,
            err,
        }
    }

    fn at(&self, u: f64) -> f64 {
        match self.opts.inner {
            InnerIntegral::Analytic => self.analytic.at(u),
            InnerIntegral::Quadrature => {
                match feedback_by_quadrature(self.strategy, self.decay, u, 0.01 * self.opts.tol) {
                    Ok(v) => v,
                    Err(e) => {
                        self.err.set(Some(e));
                        f64::NAN
                    }
                }
            }
        }
    }
}

/// h^r_u = σ_r Ψ(κ, T-u) + f^r_u + (a-κ) ∫_u^T f^r_s e^{-κ(s-u)} ds.
pub fn weight_h_r(rp: &RateParams, f_r: &Strategy, u: f64) -> Result<f64> {
    rp.validate()?;
    f_r.check_time(u)?;
    let t = f_r.horizon();
    let indirect = if rp.a == rp.kappa {
        0.0
    } else {
        (rp.a - rp.kappa) * Feedback::new(f_r, rp.kappa).at(u)
    };
    Ok(rp.sigma_r * kernel::psi(rp.kappa, t - u) + f_r.eval(u) + indirect)
}

/// h^S_u = f^S_u - (σ_x/σ_S) ∫_u^T f^S_s e^{-α(s-u)} ds.
pub fn weight_h_s(ep: &EquityParams, f_s: &Strategy, u: f64) -> Result<f64> {
    ep.validate()?;
    f_s.check_time(u)?;
    if ep.sigma_x == 0.0 {
        return Ok(f_s.eval(u));
    }
    Ok(f_s.eval(u) - ep.feedback_ratio() * Feedback::new(f_s, ep.alpha).at(u))
}

fn merged_breaks(a: &Strategy, b: &Strategy) -> Vec<f64> {
    let mut v = a.breakpoints();
    v.extend(b.breakpoints());
    v.sort_by(f64::total_cmp);
    v.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    v
}

fn finish(mu: f64, sigma2: f64, err: &Cell<Option<Error>>) -> Result<LogNormalSummary> {
    if let Some(e) = err.take() {
        return Err(e);
    }
    // Quadrature noise can push an exact zero a hair below.
    Ok(LogNormalSummary {
        mu,
        sigma2: sigma2.max(0.0),
    })
}

/// Deterministic part m^0_T of the accumulated short rate.
fn money_market_mean(rp: &RateParams, st: &MarketState, t: f64) -> f64 {
    t * rp.r_bar + (st.r0 - rp.r_bar) * kernel::psi(rp.kappa, t)
}

pub fn horizon_moments_general(
    rp: &RateParams,
    ep: &EquityParams,
    st: &MarketState,
    j: &JointExposure,
) -> Result<LogNormalSummary> {
    horizon_moments_general_with(rp, ep, st, j, MomentOptions::default())
}

/// Mean and variance of log(V_T/V_0) for joint deterministic exposures.
pub fn horizon_moments_general_with(
    rp: &RateParams,
    ep: &EquityParams,
    st: &MarketState,
    j: &JointExposure,
    opts: MomentOptions,
) -> Result<LogNormalSummary> {
    rp.validate()?;
    ep.validate()?;
    st.validate()?;
    let (fr, fs) = (&j.rate, &j.equity);
    let t = j.horizon();
    let err = Cell::new(None);
    let rate_fb = Inner::new(fr, rp.kappa, opts, &err);
    let eq_fb = Inner::new(fs, ep.alpha, opts, &err);
    let ratio = ep.feedback_ratio();
    let (dk, rho) = (rp.a - rp.kappa, ep.rho);
    let h_r = |u: f64| {
        let ind = if dk == 0.0 { 0.0 } else { dk * rate_fb.at(u) };
        rp.sigma_r * kernel::psi(rp.kappa, t - u) + fr.eval(u) + ind
    };
    let h_s = |u: f64| {
        let ind = if ratio == 0.0 {
            0.0
        } else {
            ratio * eq_fb.at(u)
        };
        fs.eval(u) - ind
    };
    let breaks = merged_breaks(fr, fs);
    let lam0 = rp.a * (rp.r_bar - rp.b) / rp.sigma_r;
    let lam1 = dk * (st.r0 - rp.r_bar) / rp.sigma_r;
    let mu_int = numerics::integrate(
        |s| {
            let (a, b) = (fr.eval(s), fs.eval(s));
            let lam_r = lam0 + lam1 * (-rp.kappa * s).exp();
            lam_r * a - 0.5 * a * a + xi_unchecked(ep, st, s) * b - 0.5 * b * b - rho * a * b
        },
        &breaks,
        opts.tol,
    )?;
    let var = numerics::integrate(
        |u| {
            let (a, b) = (h_r(u), h_s(u));
            a * a + b * b + 2.0 * rho * a * b
        },
        &breaks,
        opts.tol,
    )?;
    finish(money_market_mean(rp, st, t) + mu_int, var, &err)
}

pub fn horizon_moments_rates_only(
    rp: &RateParams,
    st: &MarketState,
    f_r: &Strategy,
) -> Result<LogNormalSummary> {
    horizon_moments_rates_only_with(rp, st, f_r, MomentOptions::default())
}

/// Rates-only moments under a constant market price of rate risk:
/// μ = m^0 + λ^r∫f - ½∫f², σ² = ∫(σ_rΨ(κ,T-s) + f_s)² ds.
pub fn horizon_moments_rates_only_with(
    rp: &RateParams,
    st: &MarketState,
    f_r: &Strategy,
    opts: MomentOptions,
) -> Result<LogNormalSummary> {
    rp.validate()?;
    st.validate()?;
    let lambda = crate::market_model::lambda_r_const(rp)?;
    let t = f_r.horizon();
    let breaks = f_r.breakpoints();
    let mu_int = numerics::integrate(
        |s| {
            let f = f_r.eval(s);
            lambda * f - 0.5 * f * f
        },
        &breaks,
        opts.tol,
    )?;
    let var = numerics::integrate(
        |s| {
            let h = rp.sigma_r * kernel::psi(rp.kappa, t - s) + f_r.eval(s);
            h * h
        },
        &breaks,
        opts.tol,
    )?;
    finish(money_market_mean(rp, st, t) + mu_int, var, &Cell::new(None))
}

pub fn horizon_moments_equity_only(
    ep: &EquityParams,
    st: &MarketState,
    f_s: &Strategy,
) -> Result<LogNormalSummary> {
    horizon_moments_equity_only_with(ep, st, f_s, MomentOptions::default())
}

/// Excess log return from equity exposure alone:
/// μ = ∫(ξ_s f_s - f_s²/2) ds, σ² = ∫(h^S_u)² du.
pub fn horizon_moments_equity_only_with(
    ep: &EquityParams,
    st: &MarketState,
    f_s: &Strategy,
    opts: MomentOptions,
) -> Result<LogNormalSummary> {
    ep.validate()?;
    st.validate()?;
    let err = Cell::new(None);
    let fb = Inner::new(f_s, ep.alpha, opts, &err);
    let ratio = ep.feedback_ratio();
    let breaks = f_s.breakpoints();
    let mu = numerics::integrate(
        |s| {
            let f = f_s.eval(s);
            xi_unchecked(ep, st, s) * f - 0.5 * f * f
        },
        &breaks,
        opts.tol,
    )?;
    let var = numerics::integrate(
        |u| {
            let h = f_s.eval(u) - if ratio == 0.0 { 0.0 } else { ratio * fb.at(u) };
            h * h
        },
        &breaks,
        opts.tol,
    )?;
    finish(mu, var, &err)
}
