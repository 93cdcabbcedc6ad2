//! Shared domain types: time grids, marginal snapshots, ensembles, reports.

use crate::error::{Error, Result};

/// Extended real used for boundary values. `NegInf` is the unbounded-below
/// sentinel: it compares below every finite value and must never enter
/// floating-point arithmetic; call sites branch on it and apply the exact
/// limit values of the ratio terms instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
}

impl ExtReal {
    pub fn is_neg_inf(self) -> bool {
        matches!(self, ExtReal::NegInf)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::NegInf => None,
            ExtReal::Finite(v) => Some(v),
        }
    }

    /// `self <= other` in the extended order.
    pub fn le(self, other: ExtReal) -> bool {
        match (self, other) {
            (ExtReal::NegInf, _) => true,
            (ExtReal::Finite(_), ExtReal::NegInf) => false,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a <= b,
        }
    }

    /// `self < m` for a finite level m.
    pub fn lt_level(self, m: f64) -> bool {
        match self {
            ExtReal::NegInf => true,
            ExtReal::Finite(v) => v < m,
        }
    }
}

/// Monitoring times 0 = t0 <= t1 <= ... <= tn = T.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidParameter(
                "time grid needs t0 and at least one later time".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidParameter("time grid must start at 0".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("time grid must be non-decreasing".into()));
        }
        Ok(TimeGrid { times })
    }

    /// Unit-spaced grid 0, 1, ..., n.
    pub fn unit(n: usize) -> Self {
        TimeGrid {
            times: (0..=n).map(|i| i as f64).collect(),
        }
    }

    /// Number of intermediate stages n.
    pub fn stages(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

/// One simulated path observed at the grid times: values and running maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSnapshot {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
}

impl MarginalSnapshot {
    pub fn new(x: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if x.len() != s.len() || x.len() < 2 {
            return Err(Error::InvalidParameter(
                "snapshot needs matching x/s of length n+1 >= 2".into(),
            ));
        }
        if s[0] != x[0] {
            return Err(Error::InvalidParameter("snapshot must start with s[0] = x[0]".into()));
        }
        if s.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("running maxima must be non-decreasing".into()));
        }
        if x.iter().zip(&s).any(|(xi, si)| si < xi) {
            return Err(Error::InvalidParameter("running maximum below path value".into()));
        }
        Ok(MarginalSnapshot { x, s })
    }

    /// Number of stages n.
    pub fn stages(&self) -> usize {
        self.x.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.x[0]
    }

    pub fn terminal(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn terminal_max(&self) -> f64 {
        *self.s.last().unwrap()
    }
}

/// A batch of snapshots sharing a grid, a start value and a seed.
#[derive(Debug, Clone)]
pub struct MonteCarloEnsemble {
    pub grid: TimeGrid,
    pub snapshots: Vec<MarginalSnapshot>,
    pub seed: u64,
    pub generator_id: String,
}

impl MonteCarloEnsemble {
    pub fn new(
        grid: TimeGrid,
        snapshots: Vec<MarginalSnapshot>,
        seed: u64,
        generator_id: impl Into<String>,
    ) -> Result<Self> {
        let len = grid.stages() + 1;
        if snapshots.is_empty() {
            return Err(Error::EmptySamples);
        }
        let x0 = snapshots[0].start();
        for snap in &snapshots {
            if snap.x.len() != len {
                return Err(Error::InvalidParameter("snapshot length does not match grid".into()));
            }
            if snap.start() != x0 {
                return Err(Error::InvalidParameter("snapshots disagree on the start value".into()));
            }
        }
        Ok(MonteCarloEnsemble {
            grid,
            snapshots,
            seed,
            generator_id: generator_id.into(),
        })
    }

    pub fn stages(&self) -> usize {
        self.grid.stages()
    }

    pub fn start(&self) -> f64 {
        self.snapshots[0].start()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Terminal values X_T of every path.
    pub fn terminal_values(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.terminal()).collect()
    }

    /// Terminal running maxima of every path.
    pub fn terminal_maxima(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.terminal_max()).collect()
    }
}

/// Description of the level grid a bound was computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDescription {
    pub m_min: f64,
    pub m_max: f64,
    pub count: usize,
    pub rule: String,
}

/// A bound estimate. `stderr` covers only the Monte Carlo component;
/// quadrature and truncation errors are reported separately.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub value: f64,
    pub stderr: f64,
    pub grid: GridDescription,
    pub truncation_tail: f64,
    pub quad_budget: f64,
    pub path_count: usize,
    pub notes: Vec<String>,
}
