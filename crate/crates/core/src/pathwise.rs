//! The pathwise functional dominating the running-maximum indicator, the
//! per-marginal payoff differences, and verification harnesses.

use crate::boundary::BoundaryVector;
use crate::error::{Error, Result};
use crate::types::{ExtReal, MarginalSnapshot, MonteCarloEnsemble};

/// Term-by-term breakdown of the pathwise functional.
#[derive(Debug, Clone)]
pub struct UpsilonBreakdown {
    pub total: f64,
    pub first_sum_terms: Vec<f64>,
    pub second_sum_terms: Vec<f64>,
    /// 1 when the terminal running maximum reaches the level m.
    pub indicator: u8,
}

fn check_zvals(zvals: &[ExtReal], m: f64) -> Result<()> {
    let mut seen_finite = false;
    let mut prev = ExtReal::NegInf;
    for z in zvals {
        match z {
            ExtReal::NegInf if seen_finite => return Err(Error::SentinelNotLeading),
            ExtReal::NegInf => {}
            ExtReal::Finite(_) => seen_finite = true,
        }
        if !prev.le(*z) {
            return Err(Error::UnorderedBoundaries { m, index: 0 });
        }
        prev = *z;
    }
    if !prev.lt_level(m) {
        return Err(Error::BoundaryAboveLevel {
            m,
            value: prev.finite().unwrap_or(f64::NEG_INFINITY),
        });
    }
    Ok(())
}

/// (x - z)^+ / (m - z), with the exact limit 1 for an unbounded-below z.
#[inline]
fn call_ratio(x: f64, m: f64, z: ExtReal) -> f64 {
    match z {
        ExtReal::NegInf => 1.0,
        ExtReal::Finite(z) => (x - z).max(0.0) / (m - z),
    }
}

/// Evaluates the pathwise functional: a sum over stages of normalised call
/// payoffs and crossing-indicator corrections which dominates
/// 1{terminal max >= m} along every path.
pub fn upsilon(snap: &MarginalSnapshot, m: f64, zvals: &[ExtReal]) -> Result<UpsilonBreakdown> {
    let n = snap.stages();
    if zvals.len() != n {
        return Err(Error::InvalidParameter(format!(
            "expected {n} boundary values, got {}",
            zvals.len()
        )));
    }
    if m < snap.x[0] {
        return Err(Error::LevelBelowPathStart { m, x0: snap.x[0] });
    }
    check_zvals(zvals, m)?;

    let x = &snap.x;
    let s = &snap.s;
    let mut first = Vec::with_capacity(n);
    for i in 1..=n {
        let z = zvals[i - 1];
        let mut term = call_ratio(x[i], m, z);
        if s[i - 1] < m && m <= s[i] {
            // crossing correction; vanishes in the unbounded-below limit
            if let ExtReal::Finite(z) = z {
                term += (m - x[i]) / (m - z);
            }
        }
        first.push(term);
    }
    let mut second = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let z = zvals[i]; // zeta_{i+1}
        let mut term = call_ratio(x[i], m, z);
        if m <= s[i] {
            if let ExtReal::Finite(z) = z {
                if z <= x[i] {
                    term += (x[i + 1] - x[i]) / (m - z);
                }
            }
            // unbounded-below z: increment term has limit 0
        }
        second.push(term);
    }
    let total = first.iter().sum::<f64>() - second.iter().sum::<f64>();
    let indicator = u8::from(s[n] >= m);
    Ok(UpsilonBreakdown {
        total,
        first_sum_terms: first,
        second_sum_terms: second,
        indicator,
    })
}

/// Normalised call spread between consecutive boundaries at one marginal:
/// (x - zeta_i)^+/(m - zeta_i) - (x - zeta_{i+1})^+/(m - zeta_{i+1}) 1{i<n}.
pub fn lambda_i(x: f64, m: f64, zvals: &[ExtReal], i: usize) -> Result<f64> {
    let n = zvals.len();
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    check_zvals(zvals, m)?;
    let mut v = call_ratio(x, m, zvals[i - 1]);
    if i < n {
        v -= call_ratio(x, m, zvals[i]);
    }
    Ok(v)
}

/// Per-path sum of the marginal payoffs; the Monte Carlo mean of this over
/// paths is the level-m integrand of the upper-bound functional.
pub fn lambda_sum(snap: &MarginalSnapshot, m: f64, zvals: &[ExtReal]) -> f64 {
    let n = snap.stages();
    let mut total = 0.0;
    for i in 1..=n {
        let mut v = call_ratio(snap.x[i], m, zvals[i - 1]);
        if i < n {
            v -= call_ratio(snap.x[i], m, zvals[i]);
        }
        total += v;
    }
    total
}

/// Converts embedding boundaries to inequality boundaries at a level m by
/// taking suffix minima; the output is non-decreasing in the stage index.
pub fn zeta_from_xi(xi: &crate::boundary::StoppingBoundaryVector, m: f64) -> Result<Vec<ExtReal>> {
    if m <= xi.x0() {
        return Err(Error::LevelBelowStart { m, x0: xi.x0() });
    }
    let vals: Vec<ExtReal> = xi.components().iter().map(|c| c.eval(m)).collect();
    let mut out = vals.clone();
    for i in (0..vals.len().saturating_sub(1)).rev() {
        if !out[i].le(out[i + 1]) {
            // keep the smaller suffix value
            out[i] = out[i + 1];
        }
    }
    Ok(out)
}

/// Result of scanning an ensemble for pathwise-inequality violations.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// Pairs with indicator - total above the residual tolerance.
    pub violations: usize,
    /// Largest indicator - total over all pairs (negative when the
    /// functional strictly dominates everywhere).
    pub worst_residual: f64,
    /// Largest |total - indicator|; relevant on equality ensembles.
    pub worst_equality_gap: f64,
    pub pairs: usize,
}

pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Evaluates indicator - functional on every (snapshot, level) pair and
/// counts residuals above [`RESIDUAL_TOLERANCE`].
pub fn verify_inequality(
    ens: &MonteCarloEnsemble,
    b: &BoundaryVector,
    m_grid: &[f64],
) -> Result<VerifyReport> {
    use rayon::prelude::*;
    let zvals_per_m: Vec<Vec<ExtReal>> = m_grid
        .iter()
        .map(|&m| b.evaluate_all(m))
        .collect::<Result<_>>()?;
    let per_level: Vec<(usize, f64, f64)> = m_grid
        .par_iter()
        .zip(zvals_per_m.par_iter())
        .map(|(&m, zvals)| {
            let mut violations = 0usize;
            let mut worst = f64::NEG_INFINITY;
            let mut worst_gap = 0.0f64;
            for snap in &ens.snapshots {
                let up = upsilon(snap, m, zvals).expect("validated inputs");
                let residual = f64::from(up.indicator) - up.total;
                if residual > RESIDUAL_TOLERANCE {
                    violations += 1;
                }
                worst = worst.max(residual);
                worst_gap = worst_gap.max(residual.abs());
            }
            (violations, worst, worst_gap)
        })
        .collect();
    let mut report = VerifyReport {
        violations: 0,
        worst_residual: f64::NEG_INFINITY,
        worst_equality_gap: 0.0,
        pairs: m_grid.len() * ens.len(),
    };
    for (v, w, g) in per_level {
        report.violations += v;
        report.worst_residual = report.worst_residual.max(w);
        report.worst_equality_gap = report.worst_equality_gap.max(g);
    }
    Ok(report)
}
