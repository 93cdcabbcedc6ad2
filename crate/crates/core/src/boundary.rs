//! Boundary function families and their ordered vectors.

use crate::error::{Error, Result};
use crate::phi::PhiSpec;
use crate::types::ExtReal;

/// One boundary function of the running maximum.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryFn {
    /// m -> alpha * m with slope in (0, 1).
    Linear { alpha: f64 },
    /// Unbounded below for m < floor, alpha * m for m >= floor.
    FlooredLinear { alpha: f64, floor: f64 },
    /// Piecewise-linear interpolation through ordered breakpoints, extended
    /// beyond the ends with the adjacent segment's slope. A single breakpoint
    /// means a constant function.
    PiecewiseLinear { points: Vec<(f64, f64)> },
}

impl BoundaryFn {
    pub fn linear(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("linear slope {alpha} not in (0,1)")));
        }
        Ok(BoundaryFn::Linear { alpha })
    }

    pub fn floored_linear(alpha: f64, floor: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !alpha.is_finite() || !floor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "floored-linear slope {alpha} not in (0,1) or floor {floor} not finite"
            )));
        }
        Ok(BoundaryFn::FlooredLinear { alpha, floor })
    }

    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("piecewise-linear needs breakpoints".into()));
        }
        if points
            .windows(2)
            .any(|w| w[1].0 <= w[0].0 || !w[0].0.is_finite() || !w[0].1.is_finite())
            || points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite())
        {
            return Err(Error::InvalidParameter(
                "piecewise-linear breakpoints must be finite and strictly increasing in m".into(),
            ));
        }
        Ok(BoundaryFn::PiecewiseLinear { points })
    }

    pub fn eval(&self, m: f64) -> ExtReal {
        match self {
            BoundaryFn::Linear { alpha } => ExtReal::Finite(alpha * m),
            BoundaryFn::FlooredLinear { alpha, floor } => {
                if m < *floor {
                    ExtReal::NegInf
                } else {
                    ExtReal::Finite(alpha * m)
                }
            }
            BoundaryFn::PiecewiseLinear { points } => ExtReal::Finite(eval_pwl(points, m)),
        }
    }

    /// Slope of the function for large m; used by the integrability check.
    pub fn asymptotic_slope(&self) -> f64 {
        match self {
            BoundaryFn::Linear { alpha } | BoundaryFn::FlooredLinear { alpha, .. } => *alpha,
            BoundaryFn::PiecewiseLinear { points } => {
                if points.len() < 2 {
                    0.0
                } else {
                    let a = points[points.len() - 2];
                    let b = points[points.len() - 1];
                    (b.1 - a.1) / (b.0 - a.0)
                }
            }
        }
    }

    /// Breakpoints in the argument, if any.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            BoundaryFn::Linear { .. } => vec![],
            BoundaryFn::FlooredLinear { floor, .. } => vec![*floor],
            BoundaryFn::PiecewiseLinear { points } => points.iter().map(|p| p.0).collect(),
        }
    }

    /// Linear pieces `(z0, z1, piece)` covering `[lo, hi]`.
    pub fn pieces(&self, lo: f64, hi: f64) -> Vec<(f64, f64, LinearPiece)> {
        debug_assert!(hi >= lo);
        let mut cuts: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .filter(|&b| b > lo && b < hi)
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out = Vec::with_capacity(cuts.len() + 1);
        let mut z0 = lo;
        for z1 in cuts.into_iter().chain(std::iter::once(hi)) {
            let mid = 0.5 * (z0 + z1);
            out.push((z0, z1, self.piece_at(mid)));
            z0 = z1;
        }
        out
    }

    fn piece_at(&self, z: f64) -> LinearPiece {
        match self {
            BoundaryFn::Linear { alpha } => LinearPiece::Affine { a: *alpha, c: 0.0 },
            BoundaryFn::FlooredLinear { alpha, floor } => {
                if z < *floor {
                    LinearPiece::UnboundedBelow
                } else {
                    LinearPiece::Affine { a: *alpha, c: 0.0 }
                }
            }
            BoundaryFn::PiecewiseLinear { points } => {
                if points.len() == 1 {
                    return LinearPiece::Affine { a: 0.0, c: points[0].1 };
                }
                let idx = match points.iter().position(|p| p.0 > z) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => points.len() - 2,
                };
                let (m0, v0) = points[idx];
                let (m1, v1) = points[idx + 1];
                let a = (v1 - v0) / (m1 - m0);
                LinearPiece::Affine { a, c: v0 - a * m0 }
            }
        }
    }
}

/// A boundary restricted to one linear piece: xi(z) = a z + c, or the
/// unbounded-below sentinel region of a floored boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearPiece {
    Affine { a: f64, c: f64 },
    UnboundedBelow,
}

fn eval_pwl(points: &[(f64, f64)], m: f64) -> f64 {
    if points.len() == 1 {
        return points[0].1;
    }
    let idx = match points.iter().position(|p| p.0 > m) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => points.len() - 2,
    };
    let (m0, v0) = points[idx];
    let (m1, v1) = points[idx + 1];
    v0 + (v1 - v0) * (m - m0) / (m1 - m0)
}

/// Validation grid: all breakpoints above x0 plus a 1024-point geometric grid
/// of offsets over (x0, 1e6 * max(1, x0)].
fn validation_grid(x0: f64, components: &[BoundaryFn]) -> Vec<f64> {
    let upper = 1.0e6 * x0.max(1.0);
    let span = upper - x0;
    let scale = x0.abs().max(1.0);
    let u_min = 1.0e-9 * scale;
    let ratio = (span / u_min).powf(1.0 / 1023.0);
    let mut grid: Vec<f64> = (0..1024).map(|k| x0 + u_min * ratio.powi(k)).collect();
    for c in components {
        for b in c.breakpoints() {
            if b > x0 && b <= upper {
                grid.push(b);
                // just after the breakpoint, to exercise the right limit
                grid.push(b + u_min);
            }
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

/// Ordered inequality boundaries zeta_1 <= ... <= zeta_n < id on (x0, inf).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryVector {
    components: Vec<BoundaryFn>,
    x0: f64,
}

impl BoundaryVector {
    /// Validates the ordering on the union of all breakpoints and a dense
    /// geometric grid; parametric families make this check exhaustive for
    /// the supported shapes.
    pub fn new(components: Vec<BoundaryFn>, x0: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("boundary vector needs components".into()));
        }
        let grid = validation_grid(x0, &components);
        for &m in &grid {
            let mut prev = ExtReal::NegInf;
            for (i, c) in components.iter().enumerate() {
                let v = c.eval(m);
                if !prev.le(v) {
                    return Err(Error::UnorderedBoundaries { m, index: i + 1 });
                }
                prev = v;
            }
            if !prev.lt_level(m) {
                return Err(Error::BoundaryAboveLevel {
                    m,
                    value: prev.finite().unwrap_or(f64::NEG_INFINITY),
                });
            }
        }
        Ok(BoundaryVector { components, x0 })
    }

    /// n-fold repetition of one boundary.
    pub fn repeated(component: BoundaryFn, n: usize, x0: f64) -> Result<Self> {
        Self::new(vec![component; n], x0)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn components(&self) -> &[BoundaryFn] {
        &self.components
    }

    /// zeta_i(m), one-based index.
    pub fn evaluate(&self, i: usize, m: f64) -> Result<ExtReal> {
        if i == 0 || i > self.components.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.components.len(),
            });
        }
        if m <= self.x0 {
            return Err(Error::LevelBelowStart { m, x0: self.x0 });
        }
        Ok(self.components[i - 1].eval(m))
    }

    /// All component values at m.
    pub fn evaluate_all(&self, m: f64) -> Result<Vec<ExtReal>> {
        if m <= self.x0 {
            return Err(Error::LevelBelowStart { m, x0: self.x0 });
        }
        Ok(self.components.iter().map(|c| c.eval(m)).collect())
    }
}

/// zeta_i(m) for a standalone vector; `i` is one-based.
pub fn evaluate_boundary(b: &BoundaryVector, i: usize, m: f64) -> Result<ExtReal> {
    b.evaluate(i, m)
}

/// Result of the integrability condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityCheck {
    pub satisfied: bool,
    /// Largest verifiable linear lower-bound slope of zeta_1, if positive.
    pub witness_alpha: Option<f64>,
    /// Polynomial growth exponent of phi.
    pub phi_growth: f64,
}

/// Checks the finiteness condition relating the first boundary's asymptotic
/// slope alpha to the growth of phi: phi must grow slower than m^gamma for
/// some gamma < 1/(1-alpha), strictly. Asymptotic slopes are read from the
/// parametric representation (last segment for piecewise shapes).
pub fn check_integrability(b: &BoundaryVector, phi: &PhiSpec) -> IntegrabilityCheck {
    let slope = b.components()[0].asymptotic_slope();
    let growth = phi.growth_exponent();
    let witness = if slope > 0.0 { Some(slope) } else { None };
    let satisfied = match witness {
        None => false,
        Some(a) if a >= 1.0 => true,
        Some(a) => growth < 1.0 / (1.0 - a),
    };
    IntegrabilityCheck {
        satisfied,
        witness_alpha: witness,
        phi_growth: growth,
    }
}

/// Non-decreasing stopping boundaries xi_1..xi_n, each below the diagonal.
/// No ordering across components is required.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingBoundaryVector {
    components: Vec<BoundaryFn>,
    x0: f64,
}

impl StoppingBoundaryVector {
    pub fn new(components: Vec<BoundaryFn>, x0: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("stopping vector needs components".into()));
        }
        let grid = validation_grid(x0, &components);
        let tol = 1e-12 * x0.abs().max(1.0);
        for (i, c) in components.iter().enumerate() {
            let mut prev = ExtReal::NegInf;
            for &m in &grid {
                let v = c.eval(m);
                match (prev, v) {
                    (ExtReal::Finite(p), ExtReal::Finite(cur)) if cur < p - tol => {
                        return Err(Error::NotMonotone { m, index: i + 1 });
                    }
                    (ExtReal::Finite(_), ExtReal::NegInf) => {
                        return Err(Error::NotMonotone { m, index: i + 1 });
                    }
                    _ => {}
                }
                if !v.lt_level(m) {
                    return Err(Error::BoundaryAboveLevel {
                        m,
                        value: v.finite().unwrap_or(f64::NEG_INFINITY),
                    });
                }
                prev = v;
            }
        }
        Ok(StoppingBoundaryVector { components, x0 })
    }

    pub fn repeated(component: BoundaryFn, n: usize, x0: f64) -> Result<Self> {
        Self::new(vec![component; n], x0)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn components(&self) -> &[BoundaryFn] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &BoundaryFn {
        &self.components[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_eval() {
        let b = BoundaryVector::repeated(BoundaryFn::linear(0.5).unwrap(), 1, 0.0).unwrap();
        assert_eq!(evaluate_boundary(&b, 1, 2.0).unwrap(), ExtReal::Finite(1.0));
    }

    #[test]
    fn floored_linear_below_floor_is_sentinel() {
        let alpha = 1.0 / std::f64::consts::E;
        let b = BoundaryVector::repeated(BoundaryFn::floored_linear(alpha, 1.0).unwrap(), 1, 0.1).unwrap();
        assert_eq!(evaluate_boundary(&b, 1, 0.5).unwrap(), ExtReal::NegInf);
        let v = evaluate_boundary(&b, 1, 2.0).unwrap().finite().unwrap();
        assert!((v - 2.0 * alpha).abs() < 1e-15);
    }

    #[test]
    fn pwl_interpolates() {
        let f = BoundaryFn::piecewise_linear(vec![(1.0, 0.2), (2.0, 0.9)]).unwrap();
        let b = BoundaryVector::new(vec![f], 0.0).unwrap();
        let v = evaluate_boundary(&b, 1, 1.5).unwrap().finite().unwrap();
        assert!((v - 0.55).abs() < 1e-15);
    }

    #[test]
    fn evaluate_errors() {
        let b = BoundaryVector::repeated(BoundaryFn::linear(0.5).unwrap(), 2, 1.0).unwrap();
        assert!(matches!(
            evaluate_boundary(&b, 3, 2.0),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            evaluate_boundary(&b, 1, 0.5),
            Err(Error::LevelBelowStart { .. })
        ));
    }

    #[test]
    fn constructor_rejects_unordered_vector() {
        let hi = BoundaryFn::linear(0.7).unwrap();
        let lo = BoundaryFn::linear(0.3).unwrap();
        assert!(BoundaryVector::new(vec![hi.clone(), lo.clone()], 1.0).is_err());
        assert!(BoundaryVector::new(vec![lo, hi], 1.0).is_ok());
    }

    #[test]
    fn constructor_rejects_diagonal_crossing() {
        // crosses the diagonal beyond the last breakpoint (slope 2)
        let f = BoundaryFn::piecewise_linear(vec![(1.0, 0.5), (2.0, 2.5)]).unwrap();
        assert!(BoundaryVector::new(vec![f], 0.5).is_err());
    }

    #[test]
    fn stopping_vector_rejects_decreasing_component() {
        let f = BoundaryFn::piecewise_linear(vec![(1.0, 0.9), (2.0, 0.2)]).unwrap();
        assert!(StoppingBoundaryVector::new(vec![f], 0.5).is_err());
    }

    #[test]
    fn integrability_examples() {
        // Power(p) against the p-optimal slope: boundary case is rejected.
        let p = 2.0;
        let crit = BoundaryVector::repeated(BoundaryFn::linear((p - 1.0) / p).unwrap(), 1, 1.0).unwrap();
        let chk = check_integrability(&crit, &PhiSpec::power(p).unwrap());
        assert!(!chk.satisfied);
        assert_eq!(chk.witness_alpha, Some(0.5));

        let ok = BoundaryVector::repeated(BoundaryFn::linear(0.6).unwrap(), 1, 1.0).unwrap();
        assert!(check_integrability(&ok, &PhiSpec::power(p).unwrap()).satisfied);

        // Bounded payoff works for any positive slope.
        let half = BoundaryVector::repeated(BoundaryFn::linear(0.5).unwrap(), 1, 1.0).unwrap();
        assert!(check_integrability(&half, &PhiSpec::indicator(2.0).unwrap()).satisfied);

        // Final slope 0 cannot carry a superlinear payoff.
        let flat = BoundaryFn::piecewise_linear(vec![(1.0, 0.2), (2.0, 0.2)]).unwrap();
        let flat = BoundaryVector::new(vec![flat], 0.5).unwrap();
        assert!(!check_integrability(&flat, &PhiSpec::power(1.5).unwrap()).satisfied);
    }
}
