//! Sweeps over the multiplier, wedge detection, and variance targeting.

use rayon::prelude::*;

use super::bond::{bond_closed_form_moments, bond_extremal, BondExtremalSolution};
use super::equity::{equity_extremal, EquityExtremalSolution};
use super::Nu;
use crate::error::{Error, Result};
use crate::market_model::{EquityParams, MarketState, RateParams};
use crate::numerics;
use crate::portfolio_distribution::LogNormalSummary;

/// Margin by which a point must clear both branch envelopes to count as
/// interior.
pub const WEDGE_TOL: f64 = 1e-6;

/// Which single-factor family a sweep runs over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorModel {
    Rates(RateParams),
    Equity(EquityParams),
}

/// One sweep result; `summary` is `None` where no extremal exists and
/// `failure` then says why.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub nu: Nu,
    pub summary: Option<LogNormalSummary>,
    pub failure: Option<String>,
}

fn point_at(model: &FactorModel, st: &MarketState, t: f64, nu: Nu) -> Result<LogNormalSummary> {
    match model {
        FactorModel::Rates(rp) => bond_closed_form_moments(rp, st, t, nu),
        FactorModel::Equity(ep) => equity_extremal(ep, st, t, nu)?.moments(),
    }
}

/// Extremal (μ_T, σ_T²) at every ν of `grid`, in grid order.
///
/// Inputs are validated up front; failures at individual multipliers
/// (ν = 1/2, singular ν, quadrature trouble) are reported inline.
pub fn profile_sweep(
    model: &FactorModel,
    st: &MarketState,
    t: f64,
    grid: &[Nu],
) -> Result<Vec<ProfilePoint>> {
    st.validate()?;
    match model {
        FactorModel::Rates(rp) => {
            bond_extremal(rp, t, Nu::NegativeInfinity)?;
        }
        FactorModel::Equity(ep) => {
            equity_extremal(ep, st, t, Nu::NegativeInfinity)?;
        }
    }
    Ok(grid
        .par_iter()
        .map(|&nu| match point_at(model, st, t, nu) {
            Ok(s) => ProfilePoint {
                nu,
                summary: Some(s),
                failure: None,
            },
            Err(e) => ProfilePoint {
                nu,
                summary: None,
                failure: Some(e.to_string()),
            },
        })
        .collect())
}

/// `n` multipliers below 1/2: ν = -∞ followed by n - 1 points equally
/// spaced in u = 1/(1 - 2ν) on (0, u_max]. u_max = 1 stops at ν = 0.
pub fn compact_grid(n: usize, u_max: f64) -> Vec<Nu> {
    let mut v = vec![Nu::NegativeInfinity];
    v.extend((1..n).map(|k| Nu::from_compact(u_max * k as f64 / (n - 1) as f64)));
    v
}

/// `n` log-spaced multipliers on [lo, hi], both positive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<Nu> {
    if n == 1 {
        return vec![Nu::Finite(lo)];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| Nu::Finite((a + (b - a) * k as f64 / (n - 1) as f64).exp()))
        .collect()
}

/// Consecutive (in ν) pairs of computed points, as (σ, μ) segments.
fn segments(points: &[&ProfilePoint]) -> Vec<[(f64, f64); 2]> {
    points
        .windows(2)
        .filter_map(|w| match (w[0].summary, w[1].summary) {
            (Some(a), Some(b)) => Some([(a.sigma(), a.mu), (b.sigma(), b.mu)]),
            _ => None,
        })
        .collect()
}

fn interpolate(seg: &[(f64, f64); 2], sigma: f64) -> Option<f64> {
    let [(s0, m0), (s1, m1)] = *seg;
    let (lo, hi) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
    if sigma < lo || sigma > hi {
        return None;
    }
    if hi == lo {
        return Some(m0.max(m1));
    }
    Some(m0 + (m1 - m0) * (sigma - s0) / (s1 - s0))
}

fn sorted_by_nu<'a>(points: impl Iterator<Item = &'a ProfilePoint>) -> Vec<&'a ProfilePoint> {
    let mut v: Vec<_> = points.collect();
    v.sort_by(|a, b| a.nu.value().total_cmp(&b.nu.value()));
    v
}

/// Points with ν > 1/2 whose μ lies strictly inside the wedge formed by the
/// two branch envelopes at the same σ.
///
/// The upper envelope is the piecewise-linear ν < 1/2 curve (maximising
/// strategies). The lower envelope is the least μ reached at that σ by the
/// piecewise-linear ν > 1/2 curve, which is the minimising branch. A point
/// counts when it clears both by more than [`WEDGE_TOL`]; points outside the
/// σ-range of either envelope never count. Segments adjacent to a failed ν
/// are dropped so that singularities are not bridged.
pub fn interior_wedge(points: &[ProfilePoint]) -> Vec<ProfilePoint> {
    let upper = sorted_by_nu(points.iter().filter(|p| p.nu.value() < 0.5));
    let lower = sorted_by_nu(points.iter().filter(|p| p.nu.value() > 0.5));
    let up_segs = segments(&upper);
    let low_segs = segments(&lower);
    lower
        .iter()
        .filter(|p| {
            let Some(s) = p.summary else { return false };
            let sigma = s.sigma();
            let top = up_segs.iter().filter_map(|g| interpolate(g, sigma)).reduce(f64::max);
            let bottom = low_segs.iter().filter_map(|g| interpolate(g, sigma)).reduce(f64::min);
            matches!((top, bottom), (Some(t), Some(b)) if t - s.mu > WEDGE_TOL && s.mu - b > WEDGE_TOL)
        })
        .map(|p| (*p).clone())
        .collect()
}

/// The ν ≤ 0 whose equity extremal has variance `target`.
///
/// Root-finds on u = 1/(1 - 2ν) ∈ [0, 1], where u = 0 is the risk-free
/// limit and u = 1 the unconstrained optimum f = ξ.
pub fn equity_nu_for_variance(
    ep: &EquityParams,
    st: &MarketState,
    t: f64,
    target: f64,
) -> Result<Nu> {
    if !(target.is_finite() && target >= 0.0) {
        return Err(Error::param(
            "target_sigma2",
            "must be finite and non-negative",
        ));
    }
    let top = equity_extremal(ep, st, t, Nu::Finite(0.0))?
        .moments()?
        .sigma2;
    if target == 0.0 {
        return Ok(Nu::NegativeInfinity);
    }
    if (target - top).abs() <= 1e-12 * top {
        return Ok(Nu::Finite(0.0));
    }
    if target > top {
        return Err(Error::OutOfRange {
            what: "target_sigma2",
            value: target,
            lo: 0.0,
            hi: top,
        });
    }
    let mut failure = None;
    let mut gap = |u: f64| -> f64 {
        if u == 0.0 {
            return -target;
        }
        match equity_extremal(ep, st, t, Nu::from_compact(u)).and_then(|s| s.moments()) {
            Ok(m) => m.sigma2 - target,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let u = numerics::brent(&mut gap, 0.0, 1.0, 1e-15)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Nu::from_compact(u))
}

/// Extremal bond and equity strategies at the same ν with their combined
/// summary; needs independent drivers (ρ = 0).
pub fn joint_pair(
    rp: &RateParams,
    ep: &EquityParams,
    st: &MarketState,
    t: f64,
    nu: Nu,
) -> Result<(
    BondExtremalSolution,
    EquityExtremalSolution,
    LogNormalSummary,
)> {
    if ep.rho != 0.0 {
        return Err(Error::param(
            "rho",
            "extremal pairs are only known for independent drivers",
        ));
    }
    let bond = bond_extremal(rp, t, nu)?;
    let equity = equity_extremal(ep, st, t, nu)?;
    let total = bond_closed_form_moments(rp, st, t, nu)?.plus(&equity.moments()?);
    Ok((bond, equity, total))
}
