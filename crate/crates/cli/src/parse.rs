//! Structured-text specs for boundaries and payoffs.

use maxbound::boundary::BoundaryFn;
use maxbound::phi::PhiSpec;

fn num(s: &str, what: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("invalid {what} '{s}'"))
}

/// `linear:<alpha>`, `floored:<alpha>:<floor>` or `pwl:<m:v,m:v,...>`.
pub fn boundary_spec(s: &str) -> Result<BoundaryFn, String> {
    let (kind, rest) = match s.split_once(':') {
        Some((k, r)) => (k, r),
        None => (s, ""),
    };
    match kind {
        "linear" => BoundaryFn::linear(num(rest, "slope")?).map_err(|e| e.to_string()),
        "floored" => {
            let (a, c) = rest
                .split_once(':')
                .ok_or_else(|| format!("floored boundary needs '<alpha>:<floor>', got '{rest}'"))?;
            BoundaryFn::floored_linear(num(a, "slope")?, num(c, "floor")?)
                .map_err(|e| e.to_string())
        }
        "pwl" => {
            let points = rest
                .split(',')
                .map(|pair| {
                    let (m, v) = pair
                        .split_once(':')
                        .ok_or_else(|| format!("pwl point '{pair}' is not '<m>:<v>'"))?;
                    Ok((num(m, "pwl abscissa")?, num(v, "pwl value")?))
                })
                .collect::<Result<Vec<_>, String>>()?;
            BoundaryFn::piecewise_linear(points).map_err(|e| e.to_string())
        }
        _ => Err(format!(
            "unknown boundary kind '{kind}' (expected linear, floored or pwl)"
        )),
    }
}

/// `power:<p>`, `identity` or `indicator:<m>`.
pub fn phi_spec(s: &str) -> Result<PhiSpec, String> {
    let (kind, rest) = match s.split_once(':') {
        Some((k, r)) => (k, r),
        None => (s, ""),
    };
    match kind {
        "power" => PhiSpec::power(num(rest, "exponent")?).map_err(|e| e.to_string()),
        "identity" => Ok(PhiSpec::identity()),
        "indicator" => PhiSpec::indicator(num(rest, "threshold")?).map_err(|e| e.to_string()),
        _ => Err(format!(
            "unknown payoff kind '{kind}' (expected power, identity or indicator)"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        assert!(matches!(
            boundary_spec("linear:0.5"),
            Ok(BoundaryFn::Linear { .. })
        ));
        assert!(boundary_spec("floored:0.36:1.0").is_ok());
        assert!(boundary_spec("pwl:1.0:0.4,2.0:1.1").is_ok());
        assert!(boundary_spec("spline:1").is_err());
        assert!(boundary_spec("linear:x").is_err());
        assert!(phi_spec("power:2").is_ok());
        assert!(phi_spec("identity").is_ok());
        assert!(phi_spec("indicator:2.5").is_ok());
        assert!(phi_spec("step").is_err());
    }
}
