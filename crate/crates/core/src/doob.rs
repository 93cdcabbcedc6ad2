//! Sharp maximal-inequality constants: the classical and refined L^p and
//! L^1 bounds, the p in (0,1) fixed point, and the improved L^1 constant.

use crate::boundary::{BoundaryFn, BoundaryVector};
use crate::bounds::{ub_functional, zero_tail_level, QuadratureGrid, UbOptions};
use crate::embedding::{extremal_ll, extremal_moments};
use crate::error::{Error, Result};
use crate::phi::PhiSpec;
use crate::stats::parallel_mean_stderr;
use crate::types::{BoundReport, MonteCarloEnsemble};

/// Normalized terminal moments driving all closed-form constants:
/// m1 = E[X_T]/X0, m_p = E[X_T^p]/X0^p, ll = E[(X_T/X0) ln(X_T/X0)].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    pub x0: f64,
    pub p: f64,
    pub m1: f64,
    pub mp: f64,
    pub ll: f64,
    pub provenance: MomentProvenance,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MomentProvenance {
    Analytic,
    Sample { m1_se: f64, mp_se: f64, ll_se: f64 },
}

impl MomentSummary {
    /// Closed-form moments of the linear-boundary extremal martingale.
    pub fn analytic_extremal(alpha: f64, x0: f64, p: f64) -> Result<Self> {
        let m = extremal_moments(alpha, x0, p)?;
        Ok(MomentSummary {
            x0,
            p,
            m1: 1.0,
            mp: m.terminal_p / x0.powf(p),
            ll: extremal_ll(alpha),
            provenance: MomentProvenance::Analytic,
        })
    }

    /// Sample moments of the terminal marginal, with standard errors.
    /// Terminal values must be non-negative; 0 ln 0 is taken as 0.
    pub fn from_ensemble(ens: &MonteCarloEnsemble, p: f64) -> Result<Self> {
        let x0 = ens.start();
        if !(x0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample moments need x0 > 0, got {x0}"
            )));
        }
        let terminals = ens.terminal_values();
        if terminals.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidParameter(
                "sample moments need non-negative terminal values".into(),
            ));
        }
        let n = terminals.len();
        let (m1, m1_se) = parallel_mean_stderr(n, |j| terminals[j] / x0);
        let (mp, mp_se) = parallel_mean_stderr(n, |j| (terminals[j] / x0).powf(p));
        let xlogx = |r: f64| if r == 0.0 { 0.0 } else { r * r.ln() };
        let (ll, ll_se) = parallel_mean_stderr(n, |j| xlogx(terminals[j] / x0));
        Ok(MomentSummary {
            x0,
            p,
            m1,
            mp,
            ll,
            provenance: MomentProvenance::Sample { m1_se, mp_se, ll_se },
        })
    }

    fn noise_allowance(&self) -> f64 {
        match &self.provenance {
            MomentProvenance::Analytic => 1e-12,
            MomentProvenance::Sample { m1_se, mp_se, .. } => 1e-12 + 3.0 * (m1_se + mp_se),
        }
    }
}

/// (p/(p-1))^p E[X_T^p] - (p/(p-1)) X0^p.
pub fn doob_lp_classical(p: f64, e_xtp: f64, x0: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("classical L^p bound needs p > 1, got {p}")));
    }
    let q = p / (p - 1.0);
    Ok(q.powf(p) * e_xtp - q * x0.powf(p))
}

/// V(x) = x - x ln x.
pub fn v_transform(x: f64) -> f64 {
    x - x * x.ln()
}

/// e/(e-1) * (E[X_T ln X_T] + V(max(1, X0))).
pub fn doob_l1_classical(e_xlogx: f64, x0: f64) -> f64 {
    let e = std::f64::consts::E;
    e / (e - 1.0) * (e_xlogx + v_transform(x0.max(1.0)))
}

fn grid_or_auto(
    ens: &MonteCarloEnsemble,
    b: &BoundaryVector,
    q: Option<&QuadratureGrid>,
) -> Result<QuadratureGrid> {
    match q {
        Some(g) => Ok(g.clone()),
        None => {
            let m_max = zero_tail_level(ens, b)?;
            QuadratureGrid::default_geometric(ens.start(), m_max)
        }
    }
}

/// Refined L^p bound: the upper-bound functional with the stage-uniform
/// boundary of slope (p-1)/p and the p-th power payoff. This is the
/// boundary case of the integrability condition, so truncation is certified
/// empirically (zero integrand past the grid end).
pub fn doob_lp_refined(
    ens: &MonteCarloEnsemble,
    p: f64,
    q: Option<&QuadratureGrid>,
) -> Result<BoundReport> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("refined L^p bound needs p > 1, got {p}")));
    }
    let b = BoundaryVector::repeated(
        BoundaryFn::linear((p - 1.0) / p)?,
        ens.stages(),
        ens.start(),
    )?;
    let grid = grid_or_auto(ens, &b, q)?;
    ub_functional(ens, &b, &PhiSpec::power(p)?, &grid, &UbOptions::default())
}

/// Refined L^1 bound: identity payoff with the floored boundary of slope
/// 1/e below the level 1.
pub fn doob_l1_refined(ens: &MonteCarloEnsemble, q: Option<&QuadratureGrid>) -> Result<BoundReport> {
    let e = std::f64::consts::E;
    let b = BoundaryVector::repeated(
        BoundaryFn::floored_linear(1.0 / e, 1.0)?,
        ens.stages(),
        ens.start(),
    )?;
    let grid = grid_or_auto(ens, &b, q)?;
    ub_functional(ens, &b, &PhiSpec::identity(), &grid, &UbOptions::default())
}

fn h_fn(p: f64, m1: f64, mp: f64, a: f64) -> f64 {
    1.0 - p + p * m1 - (1.0 - p + p * a) * mp * a.powf(-p)
}

/// Unique root in (0, 1] of h(a) = 1 - p + p m1 - (1 - p + p a) m_p a^{-p};
/// h is continuous and strictly increasing, so bisection applies.
pub fn alpha_hat(p: f64, ms: &MomentSummary) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("fixed point needs p in (0,1), got {p}")));
    }
    let allow = ms.noise_allowance();
    if ms.m1 < 1.0 - allow {
        return Err(Error::MomentInvariant(format!(
            "m1 = {} below 1 beyond the stderr allowance",
            ms.m1
        )));
    }
    if ms.mp > ms.m1.powf(p) + allow {
        return Err(Error::MomentInvariant(format!(
            "m_p = {} exceeds m1^p = {} beyond the stderr allowance",
            ms.mp,
            ms.m1.powf(p)
        )));
    }
    let h1 = h_fn(p, ms.m1, ms.mp, 1.0);
    if h1.abs() <= 1e-12 || (h1 < 0.0 && h1 >= -allow) {
        return Ok(1.0);
    }
    if h1 < 0.0 {
        return Err(Error::MomentInvariant(format!(
            "h(1) = {h1} negative: 1 - p + p m1 < m_p"
        )));
    }
    let mut lo = 0.5;
    while h_fn(p, ms.m1, ms.mp, lo) >= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::NoSignChange {
                lo,
                hi: 1.0,
                g_lo: h_fn(p, ms.m1, ms.mp, lo),
                g_hi: h1,
            });
        }
    }
    let mut hi = 1.0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if h_fn(p, ms.m1, ms.mp, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy)]
pub struct SmallPBound {
    pub sharp: f64,
    pub relaxed: f64,
    pub alpha_hat: f64,
}

/// Sharp and relaxed maximal bounds for p in (0,1):
/// sharp = X0^p m_p a^{-p} at the fixed point a, relaxed replaces a by 0.
pub fn doob_small_p(p: f64, ms: &MomentSummary) -> Result<SmallPBound> {
    let a = alpha_hat(p, ms)?;
    let xp = ms.x0.powf(p);
    let sharp = xp * ms.mp * a.powf(-p);
    // the fixed-point equation rearranged; both routes must agree
    let alt = xp * (1.0 - p + p * ms.m1) / (1.0 - p + p * a);
    if (sharp - alt).abs() > 1e-9 * sharp.abs().max(1.0) {
        return Err(Error::NumericalInconsistency(format!(
            "fixed-point identity violated: {sharp} vs {alt}"
        )));
    }
    let relaxed = xp * (1.0 - p + p * ms.m1) / (1.0 - p);
    if !(sharp < relaxed) {
        return Err(Error::NumericalInconsistency(format!(
            "sharp bound {sharp} not strictly below relaxed {relaxed}"
        )));
    }
    Ok(SmallPBound {
        sharp,
        relaxed,
        alpha_hat: a,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct AlphaHatL1 {
    pub value: f64,
    /// True when more than one sign-change bracket was observed.
    pub multiple_roots: bool,
}

fn g_fn(m1: f64, ll: f64, a: f64) -> f64 {
    a * (1.0 + ll) - m1 * (1.0 + a * a.ln())
}

/// Root in (0, 1] of g(a) = a (1 + ll) - m1 (1 + a ln a), located by a
/// geometric sign-change scan followed by bisection. The smallest root is
/// returned; additional brackets are flagged rather than assumed away.
pub fn alpha_hat_l1(ms: &MomentSummary) -> Result<AlphaHatL1> {
    if !ms.ll.is_finite() {
        return Err(Error::InvalidParameter("entropy moment ll must be finite".into()));
    }
    let g = |a: f64| g_fn(ms.m1, ms.ll, a);
    const POINTS: usize = 1024;
    let lo0: f64 = 1e-8;
    let ratio = (1.0f64 / lo0).powf(1.0 / (POINTS - 1) as f64);
    let grid: Vec<f64> = (0..POINTS).map(|k| lo0 * ratio.powi(k as i32)).collect();
    let mut brackets = Vec::new();
    for w in grid.windows(2) {
        let (ga, gb) = (g(w[0]), g(w[1]));
        if ga == 0.0 {
            brackets.push((w[0], w[0]));
        } else if ga < 0.0 && gb >= 0.0 || ga > 0.0 && gb <= 0.0 {
            brackets.push((w[0], w[1]));
        }
    }
    if brackets.is_empty() {
        if g(1.0).abs() <= 1e-9 {
            return Ok(AlphaHatL1 {
                value: 1.0,
                multiple_roots: false,
            });
        }
        return Err(Error::NoSignChange {
            lo: lo0,
            hi: 1.0,
            g_lo: g(lo0),
            g_hi: g(1.0),
        });
    }
    let (mut lo, mut hi) = brackets[0];
    let rising = g(lo) <= 0.0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if (gm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut value = 0.5 * (lo + hi);
    // endpoint root: cancellation makes g indistinguishable from 0 on a
    // ~1e-8 neighborhood of 1, so snap when 1 is an exact root
    if (1.0 - value).abs() < 1e-7 && g(1.0).abs() <= 1e-12 {
        value = 1.0;
    }
    Ok(AlphaHatL1 {
        value,
        multiple_roots: brackets.len() > 1,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ImprovedL1 {
    pub bound: f64,
    pub alpha_hat: f64,
    pub classical: f64,
}

/// E[max] <= E[X_T] / alpha-hat, compared with the classical L log L value
/// computed from the same moments.
pub fn improved_l1(ms: &MomentSummary) -> Result<ImprovedL1> {
    let root = alpha_hat_l1(ms)?;
    let a = root.value;
    let bound = ms.x0 * ms.m1 / a;
    let e_xlogx = ms.x0 * ms.ll + ms.x0 * ms.m1 * ms.x0.ln();
    let classical = doob_l1_classical(e_xlogx, ms.x0);
    if ms.x0 >= 1.0 {
        let tol = match &ms.provenance {
            MomentProvenance::Analytic => 1e-9,
            MomentProvenance::Sample { m1_se, ll_se, .. } => 1e-9 + 3.0 * (m1_se + ll_se) / a,
        };
        if bound > classical + tol {
            return Err(Error::NumericalInconsistency(format!(
                "improved bound {bound} exceeds the classical value {classical}"
            )));
        }
    }
    Ok(ImprovedL1 {
        bound,
        alpha_hat: a,
        classical,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum StrictnessMode {
    Lp { p: f64 },
    L1,
}

/// One empirically evaluated strictness condition.
#[derive(Debug, Clone, Copy)]
pub struct ConditionFlag {
    pub holds: bool,
    pub statistic: f64,
    pub stderr: f64,
}

/// Empirical checks of the conditions under which the refined bounds are
/// strictly below the classical ones.
#[derive(Debug, Clone, Copy)]
pub struct StrictnessFlags {
    /// L^p: positive mass of X_T below (p-1)/p * X0.
    /// L^1: positive mass of the terminal maximum below 1.
    pub mass_below_boundary: ConditionFlag,
    /// Terminal mean strictly above the reference (X0, or max(X0, 1) for
    /// L^1) at 3 standard errors.
    pub strict_submartingale: ConditionFlag,
}

pub fn strictness_diagnostics(ens: &MonteCarloEnsemble, mode: StrictnessMode) -> StrictnessFlags {
    let x0 = ens.start();
    let n = ens.len();
    let (freq, freq_se) = match mode {
        StrictnessMode::Lp { p } => {
            let cut = (p - 1.0) / p * x0;
            parallel_mean_stderr(n, |j| f64::from(ens.snapshots[j].terminal() < cut))
        }
        StrictnessMode::L1 => {
            parallel_mean_stderr(n, |j| f64::from(ens.snapshots[j].terminal_max() < 1.0))
        }
    };
    let reference = match mode {
        StrictnessMode::Lp { .. } => x0,
        StrictnessMode::L1 => x0.max(1.0),
    };
    let (mean, mean_se) = parallel_mean_stderr(n, |j| ens.snapshots[j].terminal());
    StrictnessFlags {
        mass_below_boundary: ConditionFlag {
            holds: freq > 0.0,
            statistic: freq,
            stderr: freq_se,
        },
        strict_submartingale: ConditionFlag {
            holds: mean - reference > 3.0 * mean_se,
            statistic: mean - reference,
            stderr: mean_se,
        },
    }
}
