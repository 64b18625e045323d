//! Parameters of the two-factor market, the Ψ/Θ/Υ integrals, Vasicek bond
//! prices and yields, and the volatility diagnostics of the equity factor.
//!
//! The short rate follows `dr = κ(r̄ - r)dt + σ_r dW^r` under the real-world
//! measure and prices bonds with the affine parameters `(a, b)`. The equity
//! premium `x` is an OU process driven by `-dW^S`, so a positive stock shock
//! lowers the expected premium.

use crate::error::{Error, Result};
use crate::kernel;

/// Short-rate dynamics and bond pricing parameters, all per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub kappa: f64,
    pub r_bar: f64,
    pub sigma_r: f64,
    pub a: f64,
    pub b: f64,
}

impl RateParams {
    pub fn new(kappa: f64, r_bar: f64, sigma_r: f64, a: f64, b: f64) -> Result<Self> {
        let p = RateParams {
            kappa,
            r_bar,
            sigma_r,
            a,
            b,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("r_bar", self.r_bar),
            ("sigma_r", self.sigma_r),
            ("a", self.a),
            ("b", self.b),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.sigma_r <= 0.0 {
            return Err(Error::param("sigma_r", "must be positive"));
        }
        if self.kappa < 0.0 {
            return Err(Error::param("kappa", "must be non-negative"));
        }
        if self.a < 0.0 {
            return Err(Error::param("a", "must be non-negative"));
        }
        Ok(())
    }

    /// True when the market price of rate risk is constant (a = κ).
    pub fn has_constant_price_of_risk(&self) -> bool {
        (self.a - self.kappa).abs() <= 1e-12 * self.a.abs().max(self.kappa.abs()).max(1.0)
    }

    pub(crate) fn require_constant_price_of_risk(&self) -> Result<()> {
        if self.has_constant_price_of_risk() {
            Ok(())
        } else {
            Err(Error::PriceOfRiskNotConstant {
                a: self.a,
                kappa: self.kappa,
            })
        }
    }
}

/// Equity premium dynamics, per year, plus the correlation with the rate
/// driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquityParams {
    pub x_bar: f64,
    pub sigma_s: f64,
    pub sigma_x: f64,
    pub alpha: f64,
    pub rho: f64,
}

impl EquityParams {
    pub fn new(x_bar: f64, sigma_s: f64, sigma_x: f64, alpha: f64, rho: f64) -> Result<Self> {
        let p = EquityParams {
            x_bar,
            sigma_s,
            sigma_x,
            alpha,
            rho,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("x_bar", self.x_bar),
            ("sigma_s", self.sigma_s),
            ("sigma_x", self.sigma_x),
            ("alpha", self.alpha),
            ("rho", self.rho),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.sigma_s <= 0.0 {
            return Err(Error::param("sigma_s", "must be positive"));
        }
        if self.sigma_x < 0.0 {
            return Err(Error::param("sigma_x", "must be non-negative"));
        }
        if self.alpha < 0.0 {
            return Err(Error::param("alpha", "must be non-negative"));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::param("rho", "must lie in [-1, 1]"));
        }
        Ok(())
    }

    /// σ_x / σ_S, the strength of the premium feedback.
    pub fn feedback_ratio(&self) -> f64 {
        self.sigma_x / self.sigma_s
    }
}

/// Initial values of the two factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub r0: f64,
    pub x0: f64,
}

impl MarketState {
    pub fn new(r0: f64, x0: f64) -> Result<Self> {
        let s = MarketState { r0, x0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r0.is_finite() {
            return Err(Error::param("r0", "must be finite"));
        }
        if !self.x0.is_finite() {
            return Err(Error::param("x0", "must be finite"));
        }
        Ok(())
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            "t",
            format!("must be a finite non-negative time, got {t}"),
        ))
    }
}

/// Ψ(a,t) = (1 - e^{-at})/a, equal to t at a = 0.
pub fn psi(a: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(kernel::psi(a, t))
}

/// Θ(a,t) = ∫₀ᵗ Ψ(a,s) ds.
pub fn theta(a: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(kernel::theta(a, t))
}

/// Υ(a,t) = ∫₀ᵗ Ψ(a,s)² ds.
pub fn upsilon(a: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(kernel::upsilon(a, t))
}

/// Log price of the zero-coupon bond with time to maturity `delta`.
pub(crate) fn log_zcb(rp: &RateParams, r_t: f64, delta: f64) -> f64 {
    let s2 = rp.sigma_r * rp.sigma_r;
    -delta * rp.b - kernel::psi(rp.a, delta) * (r_t - rp.b)
        + 0.5 * s2 * kernel::upsilon(rp.a, delta)
}

/// Zero-coupon bond price p_t(t + delta) given the current short rate.
pub fn zcb_price(rp: &RateParams, r_t: f64, delta: f64) -> Result<f64> {
    check_time(delta)?;
    Ok(log_zcb(rp, r_t, delta).exp())
}

/// The same price through the textbook affine form exp{G(Δ) - H(Δ) r}.
///
/// Kept as an independent cross-check of [`zcb_price`]. It divides by `a`,
/// so `a = 0` is rejected.
pub fn zcb_price_affine(rp: &RateParams, r_t: f64, delta: f64) -> Result<f64> {
    check_time(delta)?;
    if rp.a <= 0.0 {
        return Err(Error::param("a", "the affine form needs a > 0"));
    }
    let a = rp.a;
    let s2 = rp.sigma_r * rp.sigma_r;
    let h = (1.0 - (-a * delta).exp()) / a;
    let g = (rp.b - s2 / (2.0 * a * a)) * (h - delta) - s2 * h * h / (4.0 * a);
    Ok((g - h * r_t).exp())
}

/// Continuously compounded zero yield for maturity `delta`; r_t at delta = 0.
pub fn zero_yield(rp: &RateParams, r_t: f64, delta: f64) -> Result<f64> {
    check_time(delta)?;
    if delta == 0.0 {
        return Ok(r_t);
    }
    Ok(-log_zcb(rp, r_t, delta) / delta)
}

/// Constant market price of rate risk κ(r̄ - b)/σ_r; requires a = κ.
pub fn lambda_r_const(rp: &RateParams) -> Result<f64> {
    rp.require_constant_price_of_risk()?;
    Ok(rp.kappa * (rp.r_bar - rp.b) / rp.sigma_r)
}

/// Mean-reversion ratio α̃ = α σ_S / σ_x.
pub fn mean_reversion_ratio(ep: &EquityParams) -> Result<f64> {
    if ep.sigma_x <= 0.0 {
        return Err(Error::param(
            "sigma_x",
            "zero premium volatility makes the mean-reversion ratio infinite",
        ));
    }
    Ok(ep.alpha * ep.sigma_s / ep.sigma_x)
}

/// Annualised volatility sqrt(Var[log S̃_t]/t) of log excess stock returns.
pub fn excess_vol_profile(ep: &EquityParams, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    let (sx, ss, a) = (ep.sigma_x, ep.sigma_s, ep.alpha);
    let var = sx * sx * kernel::upsilon(a, t) + ss * ss * t - 2.0 * sx * ss * kernel::theta(a, t);
    Ok((var.max(0.0) / t).sqrt())
}

/// Long-horizon limit |σ_S - σ_x/α| of [`excess_vol_profile`].
///
/// Infinite when α = 0 and σ_x > 0: the variance then grows like t³.
pub fn asymptotic_vol(ep: &EquityParams) -> f64 {
    if ep.sigma_x == 0.0 {
        ep.sigma_s
    } else if ep.alpha == 0.0 {
        f64::INFINITY
    } else {
        (ep.sigma_s - ep.sigma_x / ep.alpha).abs()
    }
}

/// Standard deviation σ_x/√(2α) of the stationary premium distribution.
pub fn stationary_premium_sd(ep: &EquityParams) -> Result<f64> {
    if ep.sigma_x == 0.0 {
        return Ok(0.0);
    }
    if ep.alpha <= 0.0 {
        return Err(Error::param(
            "alpha",
            "no stationary premium without mean reversion",
        ));
    }
    Ok(ep.sigma_x / (2.0 * ep.alpha).sqrt())
}
