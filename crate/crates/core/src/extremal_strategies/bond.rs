//! Extremal bond strategies f^r_s = (λ^r + 2ν g_s)/(1 - 2ν), with
//! g_s = σ_r Ψ(κ, T-s) the volatility of the T-bond at time s.

use super::Nu;
use crate::error::{Error, Result};
use crate::kernel;
use crate::market_model::{lambda_r_const, log_zcb, EquityParams, MarketState, RateParams};
use crate::portfolio_distribution::LogNormalSummary;
use crate::strategy::{ClosedForm, Feedback, Strategy, DEFAULT_INTERVALS, MIN_HORIZON};

#[derive(Debug, Clone, PartialEq)]
pub struct BondExtremalSolution {
    pub nu: Nu,
    pub lambda_r: f64,
    pub horizon: f64,
    strategy: Strategy,
}

impl BondExtremalSolution {
    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if t.is_finite() && t >= MIN_HORIZON {
        Ok(())
    } else {
        Err(Error::param(
            "T",
            format!("horizon must be at least {MIN_HORIZON:e} years"),
        ))
    }
}

/// The profile p + q·Ψ(κ, T-s) as a closed form in s.
fn offset_plus_bond_vol(p: f64, q: f64, kappa: f64, t: f64) -> ClosedForm {
    if kappa == 0.0 {
        ClosedForm::Quadratic {
            b0: p + q * t,
            b1: -q,
            b2: 0.0,
        }
    } else {
        // Ψ(κ, T-s) = (1 - e^{-κT} e^{κs})/κ
        ClosedForm::Exponential {
            b0: p + q / kappa,
            b1: -q * (-kappa * t).exp() / kappa,
            c1: kappa,
            b2: 0.0,
            c2: 0.0,
        }
    }
}

/// Extremal bond strategy for multiplier ν on horizon T; requires a = κ.
pub fn bond_extremal(rp: &RateParams, t: f64, nu: Nu) -> Result<BondExtremalSolution> {
    rp.validate()?;
    check_horizon(t)?;
    nu.reject_half()?;
    let lambda = lambda_r_const(rp)?;
    let (p, q) = match nu {
        Nu::Finite(v) => {
            let d = 1.0 - 2.0 * v;
            (lambda / d, 2.0 * v * rp.sigma_r / d)
        }
        // Both limits hedge the T-bond exactly.
        _ => (0.0, -rp.sigma_r),
    };
    let strategy = Strategy::closed_form(t, offset_plus_bond_vol(p, q, rp.kappa, t))?;
    Ok(BondExtremalSolution {
        nu,
        lambda_r: lambda,
        horizon: t,
        strategy,
    })
}

/// Variance of the ν = 0 strategy; the whole family has variance
/// `base / (1-2ν)²`.
pub fn bond_base_variance(rp: &RateParams, t: f64) -> Result<f64> {
    rp.validate()?;
    check_horizon(t)?;
    let lambda = lambda_r_const(rp)?;
    let d = rp.r_bar - rp.b;
    Ok(
        t * (lambda * lambda + 2.0 * d) - 2.0 * kernel::psi(rp.kappa, t) * d
            + rp.sigma_r * rp.sigma_r * kernel::upsilon(rp.kappa, t),
    )
}

/// Closed-form (μ_T, σ_T²) of the extremal bond strategy.
pub fn bond_closed_form_moments(
    rp: &RateParams,
    st: &MarketState,
    t: f64,
    nu: Nu,
) -> Result<LogNormalSummary> {
    st.validate()?;
    nu.reject_half()?;
    let base = bond_base_variance(rp, t)?;
    let v = match nu {
        Nu::Finite(v) => v,
        _ => {
            return Ok(LogNormalSummary {
                mu: -log_zcb(rp, st.r0, t),
                sigma2: 0.0,
            })
        }
    };
    let lambda = lambda_r_const(rp)?;
    let q = 1.0 - 2.0 * v;
    let (rb, b, l2) = (rp.r_bar, rp.b, lambda * lambda);
    let psi = kernel::psi(rp.kappa, t);
    let ups = kernel::upsilon(rp.kappa, t);
    let w = 2.0 * v / q;
    let mu = t * (rb / q - w * b + l2 / q - l2 / (2.0 * q * q) - w * (rb - b) / q)
        + psi * (st.r0 - rb / q + w * b + w * (rb - b) / q)
        - 0.5 * rp.sigma_r * rp.sigma_r * w * w * ups;
    Ok(LogNormalSummary {
        mu,
        sigma2: base / (q * q),
    })
}

/// The maximising (ν < 1/2) and minimising (ν > 1/2) multipliers whose
/// strategies have variance `target`.
pub fn bond_nu_for_variance(rp: &RateParams, t: f64, target: f64) -> Result<(Nu, Nu)> {
    if !(target.is_finite() && target >= 0.0) {
        return Err(Error::param(
            "target_sigma2",
            "must be finite and non-negative",
        ));
    }
    let base = bond_base_variance(rp, t)?;
    if target == 0.0 {
        return Ok((Nu::NegativeInfinity, Nu::PositiveInfinity));
    }
    let eta = 0.5 * (base / target).sqrt();
    Ok((Nu::Finite(0.5 - eta), Nu::Finite(0.5 + eta)))
}

/// Rate strategy that is extremal given a fixed equity exposure under
/// correlated drivers: (λ^r + 2ν g_s + ρ(2ν h^S_s - f^S_s))/(1 - 2ν).
pub fn bond_extremal_given_equity(
    rp: &RateParams,
    ep: &EquityParams,
    t: f64,
    nu: Nu,
    f_s: &Strategy,
    rho: f64,
) -> Result<Strategy> {
    ep.validate()?;
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::param("rho", "must lie in [-1, 1]"));
    }
    if (f_s.horizon() - t).abs() > 1e-12 * t {
        return Err(Error::param("T", "equity strategy has a different horizon"));
    }
    let base = bond_extremal(rp, t, nu)?;
    if rho == 0.0 || f_s.is_zero() {
        return Ok(base.strategy);
    }
    let fb = Feedback::new(f_s, ep.alpha);
    let ratio = ep.feedback_ratio();
    let h_s = |s: f64| f_s.eval(s) - ratio * fb.at(s);
    let g = |s: f64| rp.sigma_r * kernel::psi(rp.kappa, t - s);
    let lambda = base.lambda_r;
    Strategy::sample_fn(t, DEFAULT_INTERVALS, |s| match nu {
        Nu::Finite(v) => {
            (lambda + 2.0 * v * g(s) + rho * (2.0 * v * h_s(s) - f_s.eval(s))) / (1.0 - 2.0 * v)
        }
        _ => -g(s) - rho * h_s(s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio_distribution::horizon_moments_rates_only;
    use crate::presets;

    #[test]
    fn family_members() {
        let rp = presets::rates_moderate();
        let lam = lambda_r_const(&rp).unwrap();
        let t = 20.0;
        let zero = bond_extremal(&rp, t, Nu::Finite(0.0)).unwrap();
        for s in [0.0, 7.0, 20.0] {
            assert!((zero.strategy().eval(s) - lam).abs() < 1e-15);
        }
        let hedge = bond_extremal(&rp, t, Nu::NegativeInfinity).unwrap();
        let m1 = bond_extremal(&rp, t, Nu::Finite(-1.0)).unwrap();
        for s in [0.0, 3.3, 19.0, 20.0] {
            let g = rp.sigma_r * kernel::psi(rp.kappa, t - s);
            assert!((hedge.strategy().eval(s) + g).abs() < 1e-15);
            assert!((m1.strategy().eval(s) - (lam - 2.0 * g) / 3.0).abs() < 1e-15);
        }
        assert_eq!(bond_extremal(&rp, t, Nu::Finite(0.5)), Err(Error::HalfNu));
        let off = RateParams { a: 0.1, ..rp };
        assert!(bond_extremal(&off, t, Nu::Finite(0.0)).is_err());
    }

    #[test]
    fn zero_kappa_uses_linear_profile() {
        let rp = RateParams::new(0.0, 0.02, 0.01, 0.0, 0.02).unwrap();
        let sol = bond_extremal(&rp, 10.0, Nu::NegativeInfinity).unwrap();
        assert!((sol.strategy().eval(4.0) + 0.01 * 6.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_anchor() {
        let rp = presets::rates_moderate();
        let st = MarketState { r0: 0.0, x0: 0.0 };
        let s = bond_closed_form_moments(&rp, &st, 20.0, Nu::Finite(0.0)).unwrap();
        assert!((s.sigma2 - 0.6902).abs() < 1e-4);
        assert!((s.sigma() - 0.8308).abs() < 1e-4);
        let y = s.mu + log_zcb(&rp, 0.0, 20.0);
        assert!((y - 0.345).abs() < 5e-4);
        assert!((y.exp() - 1.412).abs() < 5e-4);
    }

    #[test]
    fn risk_free_limit() {
        let rp = presets::rates_low();
        for r0 in [-0.01, 0.0, 0.05] {
            let st = MarketState { r0, x0: 0.0 };
            let s = bond_closed_form_moments(&rp, &st, 30.0, Nu::NegativeInfinity).unwrap();
            assert_eq!(s.sigma2, 0.0);
            assert!((s.mu.exp() * log_zcb(&rp, r0, 30.0).exp() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let rp = presets::rates_moderate();
        let st = MarketState { r0: 0.013, x0: 0.0 };
        for &nu in &[-10.0, -1.0, -0.0625, 0.0, 0.3, 0.7, 4.0] {
            for &t in &[1.0, 20.0, 60.0] {
                let sol = bond_extremal(&rp, t, Nu::Finite(nu)).unwrap();
                let q = horizon_moments_rates_only(&rp, &st, sol.strategy()).unwrap();
                let c = bond_closed_form_moments(&rp, &st, t, Nu::Finite(nu)).unwrap();
                assert!(((q.mu - c.mu) / c.mu).abs() < 1e-10, "nu={nu} t={t}");
                assert!(
                    ((q.sigma2 - c.sigma2) / c.sigma2).abs() < 1e-10,
                    "nu={nu} t={t}"
                );
            }
        }
    }

    #[test]
    fn variance_inversion() {
        let rp = presets::rates_moderate();
        let base = bond_base_variance(&rp, 20.0).unwrap();
        assert_eq!(
            bond_nu_for_variance(&rp, 20.0, base).unwrap(),
            (Nu::Finite(0.0), Nu::Finite(1.0))
        );
        assert_eq!(
            bond_nu_for_variance(&rp, 20.0, base / 4.0).unwrap(),
            (Nu::Finite(-0.5), Nu::Finite(1.5))
        );
        assert_eq!(
            bond_nu_for_variance(&rp, 20.0, 0.0).unwrap(),
            (Nu::NegativeInfinity, Nu::PositiveInfinity)
        );
        assert!(bond_nu_for_variance(&rp, 20.0, -1.0).is_err());
    }

    #[test]
    fn correlated_correction() {
        let rp = presets::rates_moderate();
        let ep = presets::equity_moderate();
        let lam = lambda_r_const(&rp).unwrap();
        let fs = Strategy::constant(20.0, 0.1).unwrap();
        let f = bond_extremal_given_equity(&rp, &ep, 20.0, Nu::Finite(0.0), &fs, 0.5).unwrap();
        for s in [0.0, 10.0, 20.0] {
            assert!((f.eval(s) - (lam - 0.05)).abs() < 1e-12);
        }
        let plain = bond_extremal(&rp, 20.0, Nu::Finite(-1.0)).unwrap();
        let same = bond_extremal_given_equity(&rp, &ep, 20.0, Nu::Finite(-1.0), &fs, 0.0).unwrap();
        assert_eq!(&same, plain.strategy());
        let zero = Strategy::constant(20.0, 0.0).unwrap();
        let same =
            bond_extremal_given_equity(&rp, &ep, 20.0, Nu::Finite(-1.0), &zero, 0.7).unwrap();
        assert_eq!(&same, plain.strategy());
    }
}
