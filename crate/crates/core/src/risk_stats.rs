//! Loss statistics of log-normal multipliers, tables over (T, ν) grids, and
//! CSV output.
//!
//! A multiplier M = e^G with G ~ N(μ, σ²) is compared with 1, the outcome
//! of the risk-free strategy. Loss statistics use the partial moment
//! E[(1 - M)^+] = Φ(-μ/σ) - e^{μ+σ²/2} Φ(-μ/σ - σ).

use std::fmt::Write as _;

use libm::erfc;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extremal_strategies::{
    bond_closed_form_moments, equity_extremal, FactorModel, Nu, ProfilePoint,
};
use crate::market_model::{log_zcb, MarketState, RateParams};
use crate::portfolio_distribution::LogNormalSummary;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskStats {
    pub median: f64,
    /// P(M < 1).
    pub prob_loss: f64,
    /// E[1 - M | M < 1]; zero when a loss is impossible.
    pub cond_loss: f64,
    /// E[(1 - M)^+].
    pub exp_loss: f64,
}

/// Statistics of M = e^G, G ~ N(mu, sigma²). `sigma = 0` gives the
/// deterministic multiplier e^mu.
pub fn lognormal_stats(mu: f64, sigma: f64) -> Result<RiskStats> {
    if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::param(
            "sigma",
            format!("need finite mu and sigma >= 0, got ({mu}, {sigma})"),
        ));
    }
    let median = mu.exp();
    let (prob_loss, exp_loss) = if sigma == 0.0 {
        if mu < 0.0 {
            (1.0, -mu.exp_m1())
        } else {
            (0.0, 0.0)
        }
    } else {
        let z = -mu / sigma;
        let p = normal_cdf(z);
        (
            p,
            (p - (mu + 0.5 * sigma * sigma).exp() * normal_cdf(z - sigma)).max(0.0),
        )
    };
    let cond_loss = if prob_loss > 0.0 {
        exp_loss / prob_loss
    } else {
        0.0
    };
    Ok(RiskStats {
        median,
        prob_loss,
        cond_loss,
        exp_loss,
    })
}

impl RiskStats {
    pub fn of(summary: &LogNormalSummary) -> Result<Self> {
        lognormal_stats(summary.mu, summary.sigma())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierKind {
    /// Y_T = V_T p_0(T)/V_0: the rate portfolio relative to the T-bond.
    RateMultiplierY,
    /// Z_T: the equity factor of the portfolio value.
    EquityMultiplierZ,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierContext {
    pub which: MultiplierKind,
    pub summary: LogNormalSummary,
}

impl MultiplierContext {
    pub fn equity(summary: LogNormalSummary) -> Self {
        MultiplierContext {
            which: MultiplierKind::EquityMultiplierZ,
            summary,
        }
    }

    pub fn stats(&self) -> Result<RiskStats> {
        RiskStats::of(&self.summary)
    }
}

/// Turns the summary of log(V_T/V_0) for a rates-only portfolio into the
/// summary of log Y_T by adding log p_0(T); the result no longer depends
/// on r0.
pub fn multiplier_from_portfolio(
    rp: &RateParams,
    st: &MarketState,
    t: f64,
    summary: LogNormalSummary,
) -> Result<MultiplierContext> {
    rp.validate()?;
    st.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("T", "horizon must be finite and non-negative"));
    }
    Ok(MultiplierContext {
        which: MultiplierKind::RateMultiplierY,
        summary: LogNormalSummary {
            mu: summary.mu + log_zcb(rp, st.r0, t),
            sigma2: summary.sigma2,
        },
    })
}

/// One (T, ν) cell of a statistics table.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsCell {
    pub horizon: f64,
    pub nu: Nu,
    /// Summary of the log multiplier (Y for rates, Z for equity).
    pub summary: Option<LogNormalSummary>,
    pub stats: Option<RiskStats>,
    pub failure: Option<String>,
}

fn cell_summary(model: &FactorModel, st: &MarketState, t: f64, nu: Nu) -> Result<LogNormalSummary> {
    match model {
        FactorModel::Rates(rp) => {
            let s = bond_closed_form_moments(rp, st, t, nu)?;
            Ok(multiplier_from_portfolio(rp, st, t, s)?.summary)
        }
        FactorModel::Equity(ep) => equity_extremal(ep, st, t, nu)?.moments(),
    }
}

/// Risk statistics of the extremal multiplier for every (T, ν) pair, in
/// row-major order (horizons outer). Cells without an extremal strategy are
/// kept with the reason.
pub fn stats_table(
    model: &FactorModel,
    st: &MarketState,
    horizons: &[f64],
    nus: &[Nu],
) -> Result<Vec<StatsCell>> {
    st.validate()?;
    match model {
        FactorModel::Rates(rp) => rp.validate()?,
        FactorModel::Equity(ep) => ep.validate()?,
    }
    if let Some(&t) = horizons.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::param(
            "T",
            format!("horizons must be positive, got {t}"),
        ));
    }
    let cells: Vec<(f64, Nu)> = horizons
        .iter()
        .flat_map(|&t| nus.iter().map(move |&nu| (t, nu)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(t, nu)| {
            match cell_summary(model, st, t, nu).and_then(|s| Ok((s, RiskStats::of(&s)?))) {
                Ok((s, r)) => StatsCell {
                    horizon: t,
                    nu,
                    summary: Some(s),
                    stats: Some(r),
                    failure: None,
                },
                Err(e) => StatsCell {
                    horizon: t,
                    nu,
                    summary: None,
                    stats: None,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect())
}

pub const STATS_HEADER: &str = "T,nu,median,prob_loss,cond_loss,exp_loss,\
median_full,prob_loss_full,cond_loss_full,exp_loss_full,mu,sigma,note";

/// Statistics table as CSV: the four statistics rounded to three decimals,
/// then at full precision, then the log-multiplier summary. Failed cells
/// leave the numbers empty and carry the reason in `note`.
pub fn stats_csv(cells: &[StatsCell]) -> String {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for c in cells {
        match (c.stats, c.summary) {
            (Some(r), Some(s)) => {
                let _ = writeln!(
                    out,
                    "{},{},{:.3},{:.3},{:.3},{:.3},{},{},{},{},{},{},",
                    c.horizon,
                    c.nu,
                    r.median,
                    r.prob_loss,
                    r.cond_loss,
                    r.exp_loss,
                    r.median,
                    r.prob_loss,
                    r.cond_loss,
                    r.exp_loss,
                    s.mu,
                    s.sigma()
                );
            }
            _ => {
                let note = c.failure.as_deref().unwrap_or("failed").replace(',', ";");
                let _ = writeln!(out, "{},{},,,,,,,,,,,{}", c.horizon, c.nu, note);
            }
        }
    }
    out
}

/// Risk-reward profile as CSV `sigma,mu,nu`, sorted by ν. Points without an
/// extremal strategy are omitted.
pub fn profile_csv(points: &[ProfilePoint]) -> String {
    let mut rows: Vec<(Nu, LogNormalSummary)> = points
        .iter()
        .filter_map(|p| p.summary.map(|s| (p.nu, s)))
        .collect();
    rows.sort_by(|a, b| a.0.value().total_cmp(&b.0.value()));
    let mut out = String::from("sigma,mu,nu\n");
    for (nu, s) in rows {
        let _ = writeln!(out, "{},{},{}", s.sigma(), s.mu, nu);
    }
    out
}
