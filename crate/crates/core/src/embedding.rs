//! Exact simulation of the iterated Azema-Yor type embedding, a fine-mesh
//! random-walk oracle, and closed-form tail laws and moments of the extremal
//! martingales.
//!
//! The exact sampler never discretizes time. Per stage it decomposes the
//! stopped state into two events with known laws: the path hits the boundary
//! value at the current maximum before the maximum grows (a two-barrier
//! hitting probability), or the maximum grows to a level drawn from the
//! excursion survival function exp(-int ds/(s - xi(s))).

use crate::boundary::{BoundaryFn, LinearPiece, StoppingBoundaryVector};
use crate::error::{Error, Result};
use crate::rng::{open_unit, path_rng, GENERATOR_ID};
use crate::types::{ExtReal, MarginalSnapshot, MonteCarloEnsemble, TimeGrid};
use rand::Rng;
use rand_distr::StandardNormal;

/// Current process value and running maximum between stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageState {
    pub b: f64,
    pub s: f64,
    pub stage: usize,
}

/// Hard cap on walk-oracle steps per stage.
pub const DEFAULT_STEP_CAP: u64 = 100_000_000;

/// Default walk-oracle mesh for a given start value.
pub fn default_walk_dt(x0: f64) -> f64 {
    1.0e-5 * x0 * x0
}

const TANGENCY_REL: f64 = 1e-9;

fn tangency_check(z: f64, denom: f64) -> Result<()> {
    if denom < TANGENCY_REL * z.abs().max(1.0) {
        return Err(Error::Tangency { z, gap: denom });
    }
    Ok(())
}

/// int_{z0}^{z1} dz / (z - xi(z)), in closed form per linear piece.
///
/// For xi(z) = a z + c the integrand is 1/((1-a)z - c): a log for a != 1,
/// a constant for a = 1. Pieces where xi is unbounded below contribute 0.
pub fn hazard_integral(xi: &BoundaryFn, z0: f64, z1: f64) -> Result<f64> {
    if z1 < z0 {
        return Err(Error::InvalidParameter(format!(
            "hazard integral needs z0 <= z1, got [{z0}, {z1}]"
        )));
    }
    if z1 == z0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (a0, a1, piece) in xi.pieces(z0, z1) {
        match piece {
            LinearPiece::UnboundedBelow => {}
            LinearPiece::Affine { a, c } => {
                // denominator (1-a)z - c equals z - xi(z); affine in z, so its
                // minimum over the piece is at an endpoint
                let d0 = (1.0 - a) * a0 - c;
                let d1 = (1.0 - a) * a1 - c;
                tangency_check(a0, d0)?;
                tangency_check(a1, d1)?;
                if a == 1.0 {
                    total += (a1 - a0) / (-c);
                } else {
                    total += (d1 / d0).ln() / (1.0 - a);
                }
            }
        }
    }
    Ok(total)
}

/// P(max >= y) for the single-boundary embedding started at x0:
/// exp(-int_{x0}^{y} dz/(z - xi(z))).
pub fn survival_single(xi: &BoundaryFn, x0: f64, y: f64) -> Result<f64> {
    if y < x0 {
        return Err(Error::InvalidParameter(format!(
            "survival level y={y} below start x0={x0}"
        )));
    }
    Ok((-hazard_integral(xi, x0, y)?).exp())
}

/// Probability that a Brownian path at (b, s) hits the level xi(s) before
/// the running maximum grows past s.
pub fn phase_one_probability(b: f64, s: f64, xi_at_s: ExtReal) -> f64 {
    match xi_at_s {
        ExtReal::NegInf => 0.0,
        ExtReal::Finite(z) => ((s - b) / (s - z)).clamp(0.0, 1.0),
    }
}

/// Solves exp(-int_s^y dz/(z - xi(z))) = u for y >= s by bracketing
/// bisection; the survival function is strictly decreasing in y.
pub fn invert_max_tail(xi: &BoundaryFn, s: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::InvalidParameter(format!("survival value {u} not in (0, 1]")));
    }
    let target = -u.ln();
    if target == 0.0 {
        return Ok(s);
    }
    let mut lo = s;
    let mut hi = s + s.abs().max(1.0);
    let mut doublings = 0;
    while hazard_integral(xi, s, hi)? < target {
        lo = hi;
        hi = s + 2.0 * (hi - s);
        doublings += 1;
        if doublings > 600 {
            return Err(Error::NumericalInconsistency(format!(
                "survival target {u} not bracketed from s={s}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let h = hazard_integral(xi, s, mid)?;
        if (h - target).abs() <= 1e-12 {
            return Ok(mid);
        }
        if h < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn finite_boundary_value(xi: &BoundaryFn, m: f64) -> Result<f64> {
    xi.eval(m).finite().ok_or_else(|| {
        Error::NumericalInconsistency(format!("boundary unbounded below at drawn maximum {m}"))
    })
}

/// Draws one path of the n-stage embedding exactly. The returned snapshot
/// holds the stopped value and running maximum after every stage.
pub fn sample_iterated_ay_exact(
    xi: &StoppingBoundaryVector,
    rng: &mut impl Rng,
) -> Result<MarginalSnapshot> {
    let x0 = xi.x0();
    let n = xi.len();
    let mut x = Vec::with_capacity(n + 1);
    let mut s_out = Vec::with_capacity(n + 1);
    x.push(x0);
    s_out.push(x0);
    let mut b = x0;
    let mut s = x0;
    for i in 0..n {
        let component = xi.component(i);
        let at_max = component.eval(s);
        let stop_now = match at_max {
            ExtReal::NegInf => false,
            ExtReal::Finite(z) => b <= z,
        };
        if !stop_now {
            let p1 = phase_one_probability(b, s, at_max);
            if p1 > 0.0 && rng.gen::<f64>() < p1 {
                b = at_max.finite().unwrap();
            } else {
                let u = open_unit(rng);
                let m = invert_max_tail(component, s, u)?;
                b = finite_boundary_value(component, m)?;
                s = m;
            }
        }
        x.push(b);
        s_out.push(s);
    }
    MarginalSnapshot::new(x, s_out)
}

/// Discrete-time oracle for the exact sampler: Gaussian increments of
/// variance `dt`, stopping each stage at the first step at or below the
/// boundary evaluated at the running maximum.
pub fn sample_iterated_ay_walk(
    xi: &StoppingBoundaryVector,
    dt: f64,
    step_cap: u64,
    rng: &mut impl Rng,
) -> Result<MarginalSnapshot> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("walk mesh dt={dt} must be positive")));
    }
    let x0 = xi.x0();
    let n = xi.len();
    let sd = dt.sqrt();
    let mut x = Vec::with_capacity(n + 1);
    let mut s_out = Vec::with_capacity(n + 1);
    x.push(x0);
    s_out.push(x0);
    let mut b = x0;
    let mut s = x0;
    for i in 0..n {
        let component = xi.component(i);
        let stopped = |b: f64, s: f64| match component.eval(s) {
            ExtReal::NegInf => false,
            ExtReal::Finite(z) => b <= z,
        };
        let mut steps = 0u64;
        while !stopped(b, s) {
            if steps >= step_cap {
                return Err(Error::StepBudgetExceeded {
                    stage: i + 1,
                    cap: step_cap,
                });
            }
            let z: f64 = rng.sample(StandardNormal);
            b += sd * z;
            s = s.max(b);
            steps += 1;
        }
        x.push(b);
        s_out.push(s);
    }
    MarginalSnapshot::new(x, s_out)
}

/// Samples `paths` exact embedding paths in parallel, one substream each.
pub fn exact_ensemble(
    xi: &StoppingBoundaryVector,
    paths: usize,
    seed: u64,
) -> Result<MonteCarloEnsemble> {
    use rayon::prelude::*;
    let snapshots: Vec<MarginalSnapshot> = (0..paths)
        .into_par_iter()
        .map(|idx| {
            let mut rng = path_rng(seed, idx as u64);
            sample_iterated_ay_exact(xi, &mut rng)
        })
        .collect::<Result<_>>()?;
    MonteCarloEnsemble::new(TimeGrid::unit(xi.len()), snapshots, seed, GENERATOR_ID)
}

/// A walk-oracle ensemble together with the number of paths that exhausted
/// the per-stage step cap and were dropped.
#[derive(Debug, Clone)]
pub struct WalkEnsemble {
    pub ensemble: MonteCarloEnsemble,
    pub capped: usize,
}

/// Samples walk-oracle paths; paths that hit the step cap are dropped and
/// counted so callers can judge the truncation bias.
pub fn walk_ensemble(
    xi: &StoppingBoundaryVector,
    dt: f64,
    step_cap: u64,
    paths: usize,
    seed: u64,
) -> Result<WalkEnsemble> {
    use rayon::prelude::*;
    let drawn: Vec<Option<MarginalSnapshot>> = (0..paths)
        .into_par_iter()
        .map(|idx| {
            let mut rng = path_rng(seed, idx as u64);
            match sample_iterated_ay_walk(xi, dt, step_cap, &mut rng) {
                Ok(snap) => Ok(Some(snap)),
                Err(Error::StepBudgetExceeded { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let capped = drawn.iter().filter(|d| d.is_none()).count();
    let snapshots: Vec<MarginalSnapshot> = drawn.into_iter().flatten().collect();
    let ensemble = MonteCarloEnsemble::new(TimeGrid::unit(xi.len()), snapshots, seed, GENERATOR_ID)?;
    Ok(WalkEnsemble { ensemble, capped })
}

/// Closed-form moments of the single-stage linear-boundary embedding, whose
/// maximum M is Pareto with tail (X0/y)^{1/(1-alpha)} and terminal value
/// alpha M.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalMoments {
    /// E[M^p]
    pub max_p: f64,
    /// E[(alpha M)^p]
    pub terminal_p: f64,
    /// E[alpha M] = X0
    pub terminal_mean: f64,
}

pub fn extremal_moments(alpha: f64, x0: f64, p: f64) -> Result<ExtremalMoments> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("slope {alpha} not in (0,1)")));
    }
    if !(x0 > 0.0) {
        return Err(Error::InvalidParameter(format!("start {x0} must be positive")));
    }
    if p >= 1.0 / (1.0 - alpha) {
        return Err(Error::InfiniteMoment { p, alpha });
    }
    let max_p = x0.powf(p) / (1.0 - p + p * alpha);
    Ok(ExtremalMoments {
        max_p,
        terminal_p: alpha.powf(p) * max_p,
        terminal_mean: x0,
    })
}

/// E[(X_T/X0) ln(X_T/X0)] for the linear-boundary extremal martingale;
/// scale-invariant, equal to ln(alpha) + (1 - alpha)/alpha.
pub fn extremal_ll(alpha: f64) -> f64 {
    alpha.ln() + (1.0 - alpha) / alpha
}

/// Deterministic test martingales and submartingales that exercise the
/// inequalities away from the extremal construction.
pub mod fixtures {
    use super::*;
    use rand_distr::Poisson;

    /// Discrete Gaussian random walk observed at stage ends; a martingale
    /// with per-stage variance `stage_scale^2`.
    pub fn gaussian_walk_ensemble(
        x0: f64,
        n: usize,
        steps_per_stage: usize,
        stage_scale: f64,
        paths: usize,
        seed: u64,
    ) -> Result<MonteCarloEnsemble> {
        use rayon::prelude::*;
        let sd = stage_scale / (steps_per_stage as f64).sqrt();
        let snapshots: Vec<MarginalSnapshot> = (0..paths)
            .into_par_iter()
            .map(|idx| {
                let mut rng = path_rng(seed, idx as u64);
                let mut b = x0;
                let mut s = x0;
                let mut x = vec![x0];
                let mut s_out = vec![x0];
                for _ in 0..n {
                    for _ in 0..steps_per_stage {
                        let z: f64 = rng.sample(StandardNormal);
                        b += sd * z;
                        s = s.max(b);
                    }
                    x.push(b);
                    s_out.push(s);
                }
                MarginalSnapshot::new(x, s_out)
            })
            .collect::<Result<_>>()?;
        MonteCarloEnsemble::new(TimeGrid::unit(n), snapshots, seed, GENERATOR_ID)
    }

    /// Compound-Poisson walk: per unit-length stage, a Poisson(rate) number
    /// of centered jumps of size +-`jump`, then a deterministic `drift`
    /// increment. drift = 0 gives a martingale, drift > 0 a strict
    /// submartingale.
    pub fn jump_walk_ensemble(
        x0: f64,
        n: usize,
        rate: f64,
        jump: f64,
        drift: f64,
        paths: usize,
        seed: u64,
    ) -> Result<MonteCarloEnsemble> {
        use rayon::prelude::*;
        if !(rate > 0.0) || !(jump > 0.0) || drift < 0.0 {
            return Err(Error::InvalidParameter(
                "jump fixture needs rate > 0, jump > 0, drift >= 0".into(),
            ));
        }
        let law = Poisson::new(rate)
            .map_err(|e| Error::InvalidParameter(format!("poisson rate: {e}")))?;
        let snapshots: Vec<MarginalSnapshot> = (0..paths)
            .into_par_iter()
            .map(|idx| {
                let mut rng = path_rng(seed, idx as u64);
                let mut b = x0;
                let mut s = x0;
                let mut x = vec![x0];
                let mut s_out = vec![x0];
                for _ in 0..n {
                    let count = rng.sample(law) as u64;
                    for _ in 0..count {
                        b += if rng.gen::<bool>() { jump } else { -jump };
                        s = s.max(b);
                    }
                    b += drift;
                    s = s.max(b);
                    x.push(b);
                    s_out.push(s);
                }
                MarginalSnapshot::new(x, s_out)
            })
            .collect::<Result<_>>()?;
        MonteCarloEnsemble::new(TimeGrid::unit(n), snapshots, seed, GENERATOR_ID)
    }

    /// Martingale that jumps once (in stage 1) to lo or hi with the
    /// mean-preserving probabilities, then stays constant.
    pub fn two_point_ensemble(
        x0: f64,
        lo: f64,
        hi: f64,
        n: usize,
        paths: usize,
        seed: u64,
    ) -> Result<MonteCarloEnsemble> {
        use rayon::prelude::*;
        if !(lo <= x0 && x0 <= hi && lo < hi) || n == 0 {
            return Err(Error::InvalidParameter(
                "two-point fixture needs lo <= x0 <= hi, lo < hi, n >= 1".into(),
            ));
        }
        let p_hi = (x0 - lo) / (hi - lo);
        let snapshots: Vec<MarginalSnapshot> = (0..paths)
            .into_par_iter()
            .map(|idx| {
                let mut rng = path_rng(seed, idx as u64);
                let v = if rng.gen::<f64>() < p_hi { hi } else { lo };
                let s = x0.max(v);
                let mut x = vec![x0];
                let mut s_out = vec![x0];
                for _ in 0..n {
                    x.push(v);
                    s_out.push(s);
                }
                MarginalSnapshot::new(x, s_out)
            })
            .collect::<Result<_>>()?;
        MonteCarloEnsemble::new(TimeGrid::unit(n), snapshots, seed, GENERATOR_ID)
    }

    /// Submartingale started below 1: constant at x0 through stage 1, then
    /// rises deterministically to 1 and is stopped on a linear boundary
    /// within stage 2.
    pub fn delayed_start_ensemble(
        x0: f64,
        alpha: f64,
        paths: usize,
        seed: u64,
    ) -> Result<MonteCarloEnsemble> {
        use rayon::prelude::*;
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delayed-start fixture needs x0 in (0,1), got {x0}"
            )));
        }
        let stage = StoppingBoundaryVector::repeated(BoundaryFn::linear(alpha)?, 1, 1.0)?;
        let snapshots: Vec<MarginalSnapshot> = (0..paths)
            .into_par_iter()
            .map(|idx| {
                let mut rng = path_rng(seed, idx as u64);
                let inner = sample_iterated_ay_exact(&stage, &mut rng)?;
                MarginalSnapshot::new(
                    vec![x0, x0, inner.x[1]],
                    vec![x0, x0, inner.s[1].max(x0)],
                )
            })
            .collect::<Result<_>>()?;
        MonteCarloEnsemble::new(TimeGrid::unit(2), snapshots, seed, GENERATOR_ID)
    }

    /// Constant martingale x == x0.
    pub fn constant_ensemble(x0: f64, n: usize, paths: usize) -> Result<MonteCarloEnsemble> {
        let snap = MarginalSnapshot::new(vec![x0; n + 1], vec![x0; n + 1])?;
        MonteCarloEnsemble::new(TimeGrid::unit(n), vec![snap; paths], 0, "constant")
    }
}
