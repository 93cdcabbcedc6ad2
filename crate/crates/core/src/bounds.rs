//! The marginal upper-bound functional, its quadrature, boundary
//! optimization, and the two-martingale ordering comparison harness.

use crate::boundary::{check_integrability, BoundaryFn, BoundaryVector, StoppingBoundaryVector};
use crate::embedding::exact_ensemble;
use crate::error::{Error, Result};
use crate::pathwise::lambda_sum;
use crate::phi::PhiSpec;
use crate::stats::{golden_section, mean_stderr, pairwise_sum, parallel_mean_stderr};
use crate::types::{BoundReport, ExtReal, GridDescription, MonteCarloEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    Geometric,
    Uniform,
    AtomsOnly,
}

/// Levels in (x0, m_max] discretizing the d(phi) integral. Density payoffs
/// integrate over the cells between consecutive levels; atoms are always
/// handled exactly and need no levels.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub levels: Vec<f64>,
    pub rule: QuadratureRule,
    pub m_max: f64,
}

pub const DEFAULT_QUAD_LEVELS: usize = 512;
const FIRST_LEVEL_OFFSET: f64 = 1e-4;

impl QuadratureGrid {
    pub fn geometric(x0: f64, m_max: f64, count: usize) -> Result<Self> {
        if !(x0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric grid needs x0 > 0, got {x0}"
            )));
        }
        let start = x0 * (1.0 + FIRST_LEVEL_OFFSET);
        if !(m_max > start) || count < 2 {
            return Err(Error::InvalidParameter(format!(
                "geometric grid needs m_max > {start} and count >= 2"
            )));
        }
        let ratio = (m_max / start).powf(1.0 / (count - 1) as f64);
        let mut levels: Vec<f64> = (0..count).map(|k| start * ratio.powi(k as i32)).collect();
        *levels.last_mut().unwrap() = m_max;
        Ok(QuadratureGrid {
            levels,
            rule: QuadratureRule::Geometric,
            m_max,
        })
    }

    pub fn uniform(x0: f64, m_max: f64, count: usize) -> Result<Self> {
        if !(m_max > x0) || count < 2 {
            return Err(Error::InvalidParameter(
                "uniform grid needs m_max > x0 and count >= 2".into(),
            ));
        }
        let h = (m_max - x0) / count as f64;
        let levels = (1..=count).map(|k| x0 + k as f64 * h).collect();
        Ok(QuadratureGrid {
            levels,
            rule: QuadratureRule::Uniform,
            m_max,
        })
    }

    /// Grid for purely atomic payoffs; no cells, only the exact atoms.
    pub fn atoms_only(phi: &PhiSpec, x0: f64) -> Result<Self> {
        let m_max = phi
            .atoms()
            .iter()
            .map(|(loc, _)| *loc)
            .fold(f64::NEG_INFINITY, f64::max);
        if !m_max.is_finite() || m_max <= x0 {
            return Err(Error::InvalidParameter(
                "atoms-only grid needs an atom above x0".into(),
            ));
        }
        Ok(QuadratureGrid {
            levels: vec![],
            rule: QuadratureRule::AtomsOnly,
            m_max,
        })
    }

    pub fn default_geometric(x0: f64, m_max: f64) -> Result<Self> {
        Self::geometric(x0, m_max, DEFAULT_QUAD_LEVELS)
    }

    /// Cells (a, b] with midpoints, the first starting at x0.
    fn cells(&self, x0: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.levels.len());
        let mut a = x0;
        for &b in &self.levels {
            out.push((a, b, 0.5 * (a + b)));
            a = b;
        }
        out
    }
}

/// How the mass of the d(phi) integral beyond m_max is accounted for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRule {
    /// Pareto tail bound from a linear lower bound of slope `alpha` on the
    /// first boundary component.
    Analytic { alpha: f64 },
    /// Require the empirical integrand to vanish at m_max (possible whenever
    /// m_max is past every sample divided by the boundary slope); the
    /// truncation is then exactly zero for the sampled paths.
    EmpiricalZero,
}

#[derive(Debug, Clone, Copy)]
pub struct UbOptions {
    pub tail: TailRule,
    /// Maximum allowed truncation tail as a fraction of the estimate.
    pub tail_fraction: f64,
}

impl Default for UbOptions {
    fn default() -> Self {
        UbOptions {
            tail: TailRule::EmpiricalZero,
            tail_fraction: 1e-3,
        }
    }
}

/// Monte Carlo mean and standard error of the level-m integrand: the
/// per-path sum of normalized call spreads across stages.
pub fn ub_at_level(
    ens: &MonteCarloEnsemble,
    b: &BoundaryVector,
    m: f64,
) -> Result<(f64, f64)> {
    if b.len() != ens.stages() {
        return Err(Error::InvalidParameter(format!(
            "boundary vector has {} components for a {}-stage ensemble",
            b.len(),
            ens.stages()
        )));
    }
    let zvals = b.evaluate_all(m)?;
    Ok(parallel_mean_stderr(ens.len(), |j| {
        lambda_sum(&ens.snapshots[j], m, &zvals)
    }))
}

/// Tail of int_{m_max}^inf gamma m^{gamma-1} (x0/m)^beta dm for the
/// Pareto-type survival bound with exponent beta = 1/(1-alpha).
pub fn analytic_tail_bound(x0: f64, m_max: f64, alpha: f64, gamma: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("tail slope {alpha} not in (0,1)")));
    }
    let beta = 1.0 / (1.0 - alpha);
    if beta <= gamma {
        return Err(Error::IntegrabilityFailed {
            slope: alpha,
            growth: gamma,
        });
    }
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    Ok(gamma * x0.powf(beta) * m_max.powf(gamma - beta) / (beta - gamma))
}

/// Smallest level past which every sampled marginal value lies below the
/// first boundary component, so the level integrand is identically zero.
pub fn zero_tail_level(ens: &MonteCarloEnsemble, b: &BoundaryVector) -> Result<f64> {
    let xmax = ens
        .snapshots
        .iter()
        .flat_map(|s| s.x.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    let x0 = ens.start();
    let cleared = |m: f64| match b.evaluate(1, m) {
        Ok(ExtReal::Finite(z)) => z >= xmax,
        _ => false,
    };
    let mut hi = x0.max(xmax) + x0.abs().max(1.0);
    let mut lo = x0;
    let mut doublings = 0;
    while !cleared(hi) {
        lo = hi;
        hi = x0 + 2.0 * (hi - x0);
        doublings += 1;
        if doublings > 600 {
            return Err(Error::NumericalInconsistency(
                "first boundary component never clears the sample maximum".into(),
            ));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cleared(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-9 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(hi * (1.0 + 1e-9))
}

struct EvalPoint {
    m: f64,
    weight: f64,
    zvals: Vec<ExtReal>,
    is_cell: bool,
}

/// The upper-bound functional phi(x0) + int ub_at_level(m) dphi(m),
/// midpoint rule over grid cells plus exact atom contributions.
///
/// The standard error covers only the Monte Carlo noise (computed from
/// per-path aggregated totals); the midpoint-rule budget and the truncation
/// tail are reported separately in the returned [`BoundReport`].
pub fn ub_functional(
    ens: &MonteCarloEnsemble,
    b: &BoundaryVector,
    phi: &PhiSpec,
    q: &QuadratureGrid,
    opts: &UbOptions,
) -> Result<BoundReport> {
    use rayon::prelude::*;
    if b.len() != ens.stages() {
        return Err(Error::InvalidParameter(format!(
            "boundary vector has {} components for a {}-stage ensemble",
            b.len(),
            ens.stages()
        )));
    }
    let x0 = ens.start();
    let mut notes = Vec::new();
    let chk = check_integrability(b, phi);
    if !phi.is_atomic() && !chk.satisfied {
        match opts.tail {
            TailRule::Analytic { .. } => {
                return Err(Error::IntegrabilityFailed {
                    slope: chk.witness_alpha.unwrap_or(0.0),
                    growth: chk.phi_growth,
                });
            }
            TailRule::EmpiricalZero => {
                notes.push(
                    "integrability witness not strict; truncation certified empirically".into(),
                );
            }
        }
    }
    if !phi.is_atomic() && q.levels.is_empty() {
        return Err(Error::InvalidParameter(
            "density payoff needs a grid with levels".into(),
        ));
    }

    let mut points: Vec<EvalPoint> = Vec::new();
    if !phi.is_atomic() {
        for (a, bb, mid) in q.cells(x0) {
            let w = phi.measure(a, bb);
            points.push(EvalPoint {
                m: mid,
                weight: w,
                zvals: b.evaluate_all(mid)?,
                is_cell: true,
            });
        }
    }
    for (loc, mass) in phi.atoms() {
        if loc > x0 {
            points.push(EvalPoint {
                m: loc,
                weight: mass,
                zvals: b.evaluate_all(loc)?,
                is_cell: false,
            });
        }
    }

    let base = phi.eval(x0);
    let n_paths = ens.len();
    let idx: Vec<usize> = (0..n_paths).collect();
    let per_chunk: Vec<(Vec<f64>, Vec<f64>)> = idx
        .par_chunks(1024)
        .map(|chunk| {
            let mut point_terms: Vec<Vec<f64>> =
                vec![Vec::with_capacity(chunk.len()); points.len()];
            let mut totals = Vec::with_capacity(chunk.len());
            for &j in chunk {
                let snap = &ens.snapshots[j];
                let mut tot = base;
                for (k, pt) in points.iter().enumerate() {
                    let v = lambda_sum(snap, pt.m, &pt.zvals);
                    point_terms[k].push(v);
                    tot += pt.weight * v;
                }
                totals.push(tot);
            }
            let sums: Vec<f64> = point_terms.iter().map(|t| pairwise_sum(t)).collect();
            (totals, sums)
        })
        .collect();

    let totals: Vec<f64> = per_chunk.iter().flat_map(|c| c.0.iter().copied()).collect();
    let (value, stderr) = mean_stderr(&totals);
    let point_means: Vec<f64> = (0..points.len())
        .map(|k| {
            let partials: Vec<f64> = per_chunk.iter().map(|c| c.1[k]).collect();
            pairwise_sum(&partials) / n_paths as f64
        })
        .collect();

    // midpoint-rule budget: half the total variation of the cell means,
    // weighted by the cell masses
    let mut quad_budget = 0.0;
    let mut prev_cell: Option<f64> = None;
    for (k, pt) in points.iter().enumerate() {
        if !pt.is_cell {
            continue;
        }
        if let Some(p) = prev_cell {
            quad_budget += 0.5 * pt.weight * (point_means[k] - p).abs();
        }
        prev_cell = Some(point_means[k]);
    }

    let truncation_tail = if phi.is_atomic() {
        0.0
    } else {
        match opts.tail {
            TailRule::Analytic { alpha } => {
                analytic_tail_bound(x0, q.m_max, alpha, phi.growth_exponent())?
            }
            TailRule::EmpiricalZero => {
                let (tail_mean, _) = ub_at_level(ens, b, q.m_max)?;
                if tail_mean > 1e-12 {
                    return Err(Error::TailBudgetExceeded {
                        tail: tail_mean,
                        estimate: value,
                        limit: 0.0,
                    });
                }
                0.0
            }
        }
    };
    if truncation_tail > opts.tail_fraction * value.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::TailBudgetExceeded {
            tail: truncation_tail,
            estimate: value,
            limit: opts.tail_fraction,
        });
    }

    Ok(BoundReport {
        value,
        stderr,
        grid: GridDescription {
            m_min: q.levels.first().copied().unwrap_or(q.m_max),
            m_max: q.m_max,
            count: points.len(),
            rule: format!("{:?}", q.rule),
        },
        truncation_tail,
        quad_budget,
        path_count: n_paths,
        notes,
    })
}

/// Monte Carlo estimate of E[phi(terminal running maximum)].
pub fn empirical_max_functional(ens: &MonteCarloEnsemble, phi: &PhiSpec) -> (f64, f64) {
    parallel_mean_stderr(ens.len(), |j| phi.eval(ens.snapshots[j].terminal_max()))
}

/// Sorted samples of one marginal with suffix sums, giving O(log n) call
/// prices mean((x - c)^+).
pub struct SortedStage {
    sorted: Vec<f64>,
    suffix_sum: Vec<f64>,
}

impl SortedStage {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut suffix = vec![0.0; values.len() + 1];
        for i in (0..values.len()).rev() {
            suffix[i] = suffix[i + 1] + values[i];
        }
        Ok(SortedStage {
            sorted: values,
            suffix_sum: suffix,
        })
    }

    pub fn mean_call(&self, c: f64) -> f64 {
        let k = self.sorted.partition_point(|&x| x <= c);
        let count = (self.sorted.len() - k) as f64;
        (self.suffix_sum[k] - count * c) / self.sorted.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }
}

/// Minimizes zeta -> mean((x - zeta)^+) / (m - zeta) over [min sample,
/// m - eps) by golden section; the empirical objective is the smallest chord
/// slope of the put-price function and therefore unimodal.
pub fn optimize_zeta_single(samples: &[f64], m: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let stage = SortedStage::new(samples.to_vec())?;
    let eps = 1e-9 * m.abs().max(1.0);
    let lo = stage.min();
    let hi = m - eps;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "level m={m} must exceed the sample minimum {lo}"
        )));
    }
    let obj = |z: f64| stage.mean_call(z) / (m - z);
    Ok(golden_section(obj, lo, hi, 1e-9 * (hi - lo).max(1.0)))
}

/// Parametric boundary families for [`optimize_zeta_vector`].
#[derive(Debug, Clone)]
pub enum ZetaFamily {
    /// One slope per stage; the ordering constraint is slope monotonicity.
    Linear { slopes: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct OptimizedZeta {
    pub boundary: BoundaryVector,
    pub slopes: Vec<f64>,
    pub value: f64,
}

const SLOPE_LO: f64 = 1e-4;
const SLOPE_HI: f64 = 1.0 - 1e-4;

/// Coordinate descent on the quadrature-truncated upper-bound functional
/// over the family parameters, with the stage-ordering constraint enforced
/// through neighbor brackets and a final suffix-minimum projection. Returns
/// a local optimum.
///
/// A grid truncated well below the sample range is fine, and preferable for
/// heavy-tailed ensembles: the integrand under the generating boundary is
/// dominated level by level, so the argmin is unchanged by truncation while
/// the tail noise is cut off.
pub fn optimize_zeta_vector(
    ens: &MonteCarloEnsemble,
    phi: &PhiSpec,
    family: &ZetaFamily,
    q: &QuadratureGrid,
) -> Result<OptimizedZeta> {
    let ZetaFamily::Linear { slopes: init } = family;
    let n = ens.stages();
    if init.len() != n {
        return Err(Error::InvalidParameter(format!(
            "family has {} parameters for a {n}-stage ensemble",
            init.len()
        )));
    }
    let x0 = ens.start();
    let stages: Vec<SortedStage> = (1..=n)
        .map(|i| SortedStage::new(ens.snapshots.iter().map(|s| s.x[i]).collect()))
        .collect::<Result<_>>()?;

    let mut points: Vec<(f64, f64)> = Vec::new();
    if !phi.is_atomic() {
        for (a, bb, mid) in q.cells(x0) {
            points.push((mid, phi.measure(a, bb)));
        }
    }
    for (loc, mass) in phi.atoms() {
        if loc > x0 {
            points.push((loc, mass));
        }
    }

    let objective = |slopes: &[f64]| -> f64 {
        let mut total = phi.eval(x0);
        for &(m, w) in &points {
            let mut level = 0.0;
            for i in 0..n {
                let zi = slopes[i] * m;
                level += stages[i].mean_call(zi) / (m - zi);
                if i + 1 < n {
                    let znext = slopes[i + 1] * m;
                    level -= stages[i].mean_call(znext) / (m - znext);
                }
            }
            total += w * level;
        }
        total
    };

    let mut slopes: Vec<f64> = init
        .iter()
        .map(|&a| a.clamp(SLOPE_LO, SLOPE_HI))
        .collect();
    // project the initial guess to the ordered cone
    for i in (0..n.saturating_sub(1)).rev() {
        slopes[i] = slopes[i].min(slopes[i + 1]);
    }
    for _sweep in 0..24 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let lo = if i == 0 { SLOPE_LO } else { slopes[i - 1] };
            let hi = if i + 1 < n { slopes[i + 1] } else { SLOPE_HI };
            if hi - lo < 1e-10 {
                continue;
            }
            let (best, _) = golden_section(
                |a| {
                    let mut trial = slopes.clone();
                    trial[i] = a;
                    objective(&trial)
                },
                lo,
                hi,
                1e-7,
            );
            moved = moved.max((best - slopes[i]).abs());
            slopes[i] = best;
        }
        if moved < 1e-6 {
            break;
        }
    }
    for i in (0..n.saturating_sub(1)).rev() {
        slopes[i] = slopes[i].min(slopes[i + 1]);
    }
    let value = objective(&slopes);
    let components: Vec<BoundaryFn> = slopes
        .iter()
        .map(|&a| BoundaryFn::linear(a))
        .collect::<Result<_>>()?;
    Ok(OptimizedZeta {
        boundary: BoundaryVector::new(components, x0)?,
        slopes,
        value,
    })
}

/// One scanned level of a [`compare_orderings`] run: the bound on the same
/// ensemble under its own generating boundary and under the other one.
#[derive(Debug, Clone)]
pub struct OrderingScanRow {
    pub m: f64,
    pub own: f64,
    pub own_se: f64,
    pub other: f64,
    pub other_se: f64,
    /// Paired per-path mean of other - own; the two estimates share the
    /// sample, so this is the statistic whose error is small.
    pub diff: f64,
    pub diff_se: f64,
}

/// A level interval on which the paired margin `other - own` exceeded three
/// of its standard errors at every scanned level.
#[derive(Debug, Clone, Copy)]
pub struct OrderingWitness {
    pub m_lo: f64,
    pub m_hi: f64,
    pub levels: usize,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub rows_x1: Vec<OrderingScanRow>,
    pub rows_x2: Vec<OrderingScanRow>,
    pub interval_x1: OrderingWitness,
    pub interval_x2: OrderingWitness,
}

#[derive(Debug, Clone, Copy)]
pub struct CompareConfig {
    /// Width of the region where the reconstructed stopping boundaries are
    /// strictly ordered, as a fraction of x0.
    pub epsilon_fraction: f64,
    pub paths: usize,
    pub seed: u64,
    /// Number of scanned indicator levels.
    pub levels: usize,
    /// Scan range upper end as a multiple of x0.
    pub span: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            epsilon_fraction: 0.05,
            paths: 100_000,
            seed: 1,
            levels: 256,
            span: 8.0,
        }
    }
}

fn uniform_linear_slope(b: &BoundaryVector) -> Option<f64> {
    let mut slope = None;
    for c in b.components() {
        match c {
            BoundaryFn::Linear { alpha } => match slope {
                None => slope = Some(*alpha),
                Some(s) if s == *alpha => {}
                _ => return None,
            },
            _ => return None,
        }
    }
    slope
}

/// Builds n stopping boundaries whose stagewise suffix minima all equal
/// alpha * m: equal to the line outside (x0, x0 + eps), strictly ordered
/// (stage n lowest) inside via a triangular bump that keeps every component
/// non-decreasing.
pub fn ordered_stopping_from_slope(
    alpha: f64,
    n: usize,
    x0: f64,
    eps: f64,
) -> Result<StoppingBoundaryVector> {
    if !(x0 > 0.0 && eps > 0.0) {
        return Err(Error::InvalidParameter(
            "ordered reconstruction needs x0 > 0 and eps > 0".into(),
        ));
    }
    // bump amplitude chosen so the downslope never exceeds the line's slope
    let denom = 4.0 * (n.max(2) - 1) as f64;
    let amp = alpha * eps / denom;
    let far = x0 + eps + x0.abs().max(1.0);
    let mut comps = Vec::with_capacity(n);
    for j in 1..=n {
        let lift = (n - j) as f64 * amp;
        let c = if lift == 0.0 {
            BoundaryFn::linear(alpha)?
        } else {
            let mid = x0 + 0.5 * eps;
            BoundaryFn::piecewise_linear(vec![
                (x0, alpha * x0),
                (mid, alpha * mid + lift),
                (x0 + eps, alpha * (x0 + eps)),
                (far, alpha * far),
            ])?
        };
        comps.push(c);
    }
    StoppingBoundaryVector::new(comps, x0)
}

fn longest_margin_run(rows: &[OrderingScanRow]) -> Option<OrderingWitness> {
    let ok = |r: &OrderingScanRow| r.diff > 0.0 && r.diff > 3.0 * r.diff_se;
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, r) in rows.iter().enumerate() {
        if ok(r) {
            if start.is_none() {
                start = Some(i);
            }
            let s = start.unwrap();
            if best.map_or(true, |(bs, be)| i - s > be - bs) {
                best = Some((s, i));
            }
        } else {
            start = None;
        }
    }
    best.map(|(s, e)| OrderingWitness {
        m_lo: rows[s].m,
        m_hi: rows[e].m,
        levels: e - s + 1,
    })
}

/// Demonstrates that neither of two distinct boundary vectors dominates the
/// other: builds one extremal martingale per vector and scans indicator
/// levels for an interval where each martingale's own bound is strictly
/// below the bound computed with the other vector.
pub fn compare_orderings(
    z1: &BoundaryVector,
    z2: &BoundaryVector,
    cfg: &CompareConfig,
) -> Result<CompareReport> {
    if z1.len() != z2.len() || z1.x0() != z2.x0() {
        return Err(Error::InvalidParameter(
            "boundary vectors must share the stage count and start value".into(),
        ));
    }
    let (a1, a2) = match (uniform_linear_slope(z1), uniform_linear_slope(z2)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidParameter(
                "comparison supports stage-uniform linear boundary vectors".into(),
            ))
        }
    };
    if a1 == a2 {
        return Err(Error::BoundariesEqual);
    }
    let n = z1.len();
    let x0 = z1.x0();
    let eps = cfg.epsilon_fraction * x0;
    let xi1 = ordered_stopping_from_slope(a1, n, x0, eps)?;
    let xi2 = ordered_stopping_from_slope(a2, n, x0, eps)?;
    let ens1 = exact_ensemble(&xi1, cfg.paths, cfg.seed)?;
    let ens2 = exact_ensemble(&xi2, cfg.paths, cfg.seed.wrapping_add(1))?;

    let start = x0 * (1.0 + 1e-3);
    let ratio = (cfg.span * x0 / start).powf(1.0 / (cfg.levels - 1) as f64);
    let scan = |ens: &MonteCarloEnsemble,
                own: &BoundaryVector,
                other: &BoundaryVector|
     -> Result<Vec<OrderingScanRow>> {
        (0..cfg.levels)
            .map(|k| {
                let m = start * ratio.powi(k as i32);
                let (o, ose) = ub_at_level(ens, own, m)?;
                let (t, tse) = ub_at_level(ens, other, m)?;
                let z_own = own.evaluate_all(m)?;
                let z_other = other.evaluate_all(m)?;
                let (d, dse) = parallel_mean_stderr(ens.len(), |j| {
                    let snap = &ens.snapshots[j];
                    lambda_sum(snap, m, &z_other) - lambda_sum(snap, m, &z_own)
                });
                Ok(OrderingScanRow {
                    m,
                    own: o,
                    own_se: ose,
                    other: t,
                    other_se: tse,
                    diff: d,
                    diff_se: dse,
                })
            })
            .collect()
    };
    let rows_x1 = scan(&ens1, z1, z2)?;
    let rows_x2 = scan(&ens2, z2, z1)?;
    let interval_x1 = longest_margin_run(&rows_x1).ok_or_else(|| {
        Error::Inconclusive(format!(
            "no level interval with margin > 3 SE for the first martingale at {} paths",
            cfg.paths
        ))
    })?;
    let interval_x2 = longest_margin_run(&rows_x2).ok_or_else(|| {
        Error::Inconclusive(format!(
            "no level interval with margin > 3 SE for the second martingale at {} paths",
            cfg.paths
        ))
    })?;
    Ok(CompareReport {
        rows_x1,
        rows_x2,
        interval_x1,
        interval_x2,
    })
}
