//! End-to-end acceptance suite: one criterion per numbered check, each
//! printing a single pass/fail line. Run with --nocapture to see the lines
//! on success.

use maxbound::boundary::{BoundaryFn, BoundaryVector, StoppingBoundaryVector};
use maxbound::bounds::{
    compare_orderings, empirical_max_functional, optimize_zeta_vector, CompareConfig,
    QuadratureGrid, ZetaFamily,
};
use maxbound::doob::{
    alpha_hat, doob_l1_classical, doob_l1_refined, doob_lp_classical, doob_lp_refined,
    doob_small_p, improved_l1, MomentSummary,
};
use maxbound::embedding::{exact_ensemble, extremal_moments, fixtures, walk_ensemble};
use maxbound::pathwise::{upsilon, verify_inequality, zeta_from_xi};
use maxbound::stats::{ks_critical_one, ks_critical_two, ks_one_sample, ks_two_sample, mean_stderr};
use std::time::Instant;

const E: f64 = std::f64::consts::E;

fn check(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn scan_levels(x0: f64, m_max: f64) -> Vec<f64> {
    QuadratureGrid::geometric(x0, m_max, 256).unwrap().levels
}

fn linear_vec(alpha: f64, n: usize, x0: f64) -> BoundaryVector {
    BoundaryVector::repeated(BoundaryFn::linear(alpha).unwrap(), n, x0).unwrap()
}

/// 1. The pathwise functional dominates the level indicator on every
/// (path, level) pair, for continuous and jump-augmented fixtures.
fn c01_pathwise_inequality() -> Result<(), String> {
    let start = Instant::now();
    let levels = scan_levels(1.0, 8.0);
    for n in [1usize, 2, 4] {
        let cont =
            fixtures::gaussian_walk_ensemble(1.0, n, 8, 0.5, 100_000, 101 + n as u64).unwrap();
        let jump =
            fixtures::jump_walk_ensemble(1.0, n, 2.0, 0.25, 0.05, 100_000, 201 + n as u64).unwrap();
        for ens in [&cont, &jump] {
            let b = linear_vec(0.5, n, 1.0);
            let rep = verify_inequality(ens, &b, &levels).map_err(|e| e.to_string())?;
            check(
                rep.violations == 0,
                format!(
                    "n={n}: {} violations, worst residual {}",
                    rep.violations, rep.worst_residual
                ),
            )?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 120.0, format!("runtime {secs:.1}s exceeds 120s"))
}

/// 2. Equality of the functional and the indicator on ensembles stopped on
/// the boundaries that generate the suffix-minima vector.
fn c02_pathwise_equality() -> Result<(), String> {
    let start = Instant::now();
    let xi = StoppingBoundaryVector::new(
        vec![
            BoundaryFn::piecewise_linear(vec![(1.0, 0.4), (1.5, 0.8), (3.0, 1.6)]).unwrap(),
            BoundaryFn::linear(0.5).unwrap(),
        ],
        1.0,
    )
    .unwrap();
    let ens = exact_ensemble(&xi, 10_000, 7).unwrap();
    let mut worst: f64 = 0.0;
    for &m in &scan_levels(1.0, 8.0) {
        let zvals = zeta_from_xi(&xi, m).map_err(|e| e.to_string())?;
        for snap in &ens.snapshots {
            let up = upsilon(snap, m, &zvals).map_err(|e| e.to_string())?;
            worst = worst.max((up.total - f64::from(up.indicator)).abs());
        }
    }
    check(worst <= 1e-9, format!("worst equality gap {worst:e}"))?;
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, format!("runtime {secs:.1}s exceeds 60s"))
}

/// 3. One-sample KS of the exact sampler's maximum against the power tail
/// law, below the 0.1% critical value.
fn c03_tail_law() -> Result<(), String> {
    let crit = ks_critical_one(100_000, 0.001);
    for (i, &alpha) in [0.3, 0.5, 1.0 / E].iter().enumerate() {
        let xi =
            StoppingBoundaryVector::repeated(BoundaryFn::linear(alpha).unwrap(), 1, 1.0).unwrap();
        let ens = exact_ensemble(&xi, 100_000, 301 + i as u64).unwrap();
        let mut maxima = ens.terminal_maxima();
        let beta = 1.0 / (1.0 - alpha);
        let stat = ks_one_sample(&mut maxima, |y| {
            if y < 1.0 {
                0.0
            } else {
                1.0 - y.powf(-beta)
            }
        });
        check(
            stat < crit,
            format!("alpha={alpha}: KS {stat:.5} vs critical {crit:.5}"),
        )?;
    }
    Ok(())
}

/// 4. Two-sample KS between the exact sampler and the fine random-walk
/// oracle, for a linear boundary and a two-stage piecewise-linear one.
fn c04_sampler_oracle() -> Result<(), String> {
    let lin = StoppingBoundaryVector::repeated(BoundaryFn::linear(0.7).unwrap(), 1, 1.0).unwrap();
    let pwl = StoppingBoundaryVector::new(
        vec![
            BoundaryFn::piecewise_linear(vec![(1.0, 0.55), (2.0, 1.3), (4.0, 2.8)]).unwrap(),
            BoundaryFn::linear(0.65).unwrap(),
        ],
        1.0,
    )
    .unwrap();
    for (name, xi) in [("linear", &lin), ("pwl", &pwl)] {
        let exact = exact_ensemble(xi, 100_000, 401).unwrap();
        let walked = walk_ensemble(xi, 1e-5, 50_000_000, 10_000, 402).unwrap();
        check(
            walked.capped <= 5,
            format!("{name}: {} capped walk paths", walked.capped),
        )?;
        let crit = ks_critical_two(exact.len(), walked.ensemble.len(), 0.001);
        let mut a = exact.terminal_maxima();
        let mut b = walked.ensemble.terminal_maxima();
        let stat_max = ks_two_sample(&mut a, &mut b);
        let mut a = exact.terminal_values();
        let mut b = walked.ensemble.terminal_values();
        let stat_term = ks_two_sample(&mut a, &mut b);
        check(
            stat_max < crit && stat_term < crit,
            format!("{name}: KS max {stat_max:.5} / terminal {stat_term:.5} vs critical {crit:.5}"),
        )?;
    }
    Ok(())
}

/// 5. L^p sharpness for p = 2: the analytic gap sequence, the Monte Carlo
/// sandwich around the refined bound, and the analytic small-eps limit of
/// the first-term gap.
fn c05_lp_sharpness() -> Result<(), String> {
    let p = 2.0;
    // classical minus E[max^2] for the ensemble with moment exponent 2 + eps
    let gap = |eps: f64| {
        let a = (p + eps - 1.0) / (p + eps);
        let mm = extremal_moments(a, 1.0, p).unwrap();
        doob_lp_classical(p, mm.terminal_p, 1.0).unwrap() - mm.max_p
    };
    let gaps = [gap(1.0), gap(0.5), gap(0.1)];
    check(
        (gaps[0] - 1.0 / 3.0).abs() < 1e-10
            && (gaps[1] - 0.2).abs() < 1e-10
            && (gaps[2] - 1.0 / 21.0).abs() < 1e-10
            && gaps[0] > gaps[1]
            && gaps[1] > gaps[2],
        format!("analytic gaps {gaps:?}"),
    )?;

    for eps in [1.0, 0.5, 0.1] {
        let a = (p + eps - 1.0) / (p + eps);
        let xi = StoppingBoundaryVector::repeated(BoundaryFn::linear(a).unwrap(), 1, 1.0).unwrap();
        let ens = exact_ensemble(&xi, 100_000, 501).unwrap();
        let refined = doob_lp_refined(&ens, p, None).map_err(|e| e.to_string())?;
        let (emp, emp_se) =
            empirical_max_functional(&ens, &maxbound::phi::PhiSpec::power(p).unwrap());
        let xt2: Vec<f64> = ens.terminal_values().iter().map(|x| x * x).collect();
        let (m2, m2_se) = mean_stderr(&xt2);
        let classical = doob_lp_classical(p, m2, 1.0).unwrap();
        let classical_se = 4.0 * m2_se;
        let budget = refined.quad_budget + 1e-3 * refined.value;
        let lo_slack = 3.0 * (emp_se.powi(2) + refined.stderr.powi(2)).sqrt() + budget;
        let hi_slack = 3.0 * (classical_se.powi(2) + refined.stderr.powi(2)).sqrt() + budget;
        check(
            emp <= refined.value + lo_slack && refined.value <= classical + hi_slack,
            format!(
                "eps={eps}: sandwich {emp} <= {} <= {classical} broken (slacks {lo_slack}, {hi_slack})",
                refined.value
            ),
        )?;
    }

    // first-term gap (p/(p-1))^p E[X_T^p] - E[max^p] tends to p/(p-1) * x0^p;
    // one Richardson step removes the O(eps) error
    let first_gap = |eps: f64| {
        let a = (p + eps - 1.0) / (p + eps);
        let mm = extremal_moments(a, 1.0, p).unwrap();
        (p / (p - 1.0)).powf(p) * mm.terminal_p - mm.max_p
    };
    let eps = 1e-4;
    let limit = 2.0 * first_gap(eps / 2.0) - first_gap(eps);
    check(
        (limit - p / (p - 1.0)).abs() < 1e-6,
        format!("extrapolated gap limit {limit} vs {}", p / (p - 1.0)),
    )
}

/// 6. L^1 equality at slope 1/e: empirical mean maximum, the classical
/// bound from sample moments, and the refined bound all meet at e; the
/// delayed-start fixture with x0 = 1/2 reproduces the equality.
fn c06_l1_equality() -> Result<(), String> {
    let xi =
        StoppingBoundaryVector::repeated(BoundaryFn::linear(1.0 / E).unwrap(), 1, 1.0).unwrap();
    let ens = exact_ensemble(&xi, 100_000, 601).unwrap();
    let (emp, emp_se) = mean_stderr(&ens.terminal_maxima());
    check(
        (emp - E).abs() <= 3.0 * emp_se,
        format!("empirical mean max {emp} vs e, se {emp_se}"),
    )?;
    let xlogx: Vec<f64> = ens.terminal_values().iter().map(|x| x * x.ln()).collect();
    let (ll, ll_se) = mean_stderr(&xlogx);
    let classical = doob_l1_classical(ll, 1.0);
    let classical_se = E / (E - 1.0) * ll_se;
    check(
        (classical - E).abs() <= 3.0 * classical_se,
        format!("classical {classical} vs e, se {classical_se}"),
    )?;
    let refined = doob_l1_refined(&ens, None).map_err(|e| e.to_string())?;
    let slack = 3.0 * (refined.stderr.powi(2) + emp_se.powi(2)).sqrt() + refined.quad_budget;
    check(
        (refined.value - emp).abs() <= slack,
        format!("refined {} vs empirical {emp}, slack {slack}", refined.value),
    )?;

    let delayed = fixtures::delayed_start_ensemble(0.5, 1.0 / E, 100_000, 602).unwrap();
    let (emp_d, emp_d_se) = mean_stderr(&delayed.terminal_maxima());
    let xlogx: Vec<f64> = delayed
        .terminal_values()
        .iter()
        .map(|x| x * x.ln())
        .collect();
    let (ll_d, ll_d_se) = mean_stderr(&xlogx);
    let classical_d = doob_l1_classical(ll_d, 0.5);
    let se_d = E / (E - 1.0) * ll_d_se;
    check(
        (classical_d - emp_d).abs() <= 3.0 * (se_d.powi(2) + emp_d_se.powi(2)).sqrt(),
        format!("delayed start: classical {classical_d} vs empirical {emp_d}"),
    )?;
    let refined_d = doob_l1_refined(&delayed, None).map_err(|e| e.to_string())?;
    let slack_d =
        3.0 * (refined_d.stderr.powi(2) + emp_d_se.powi(2)).sqrt() + refined_d.quad_budget;
    check(
        (refined_d.value - emp_d).abs() <= slack_d,
        format!(
            "delayed start: refined {} vs empirical {emp_d}, slack {slack_d}",
            refined_d.value
        ),
    )
}

/// 7. The p in (0,1) fixed point recovers the generating slope from
/// analytic moments; the sharp constant matches the closed form and the
/// relaxed bound stays strictly above it.
fn c07_small_p_fixed_point() -> Result<(), String> {
    for p in [0.3, 0.5, 0.7] {
        for a in [0.2, 0.5, 0.8] {
            let ms = MomentSummary::analytic_extremal(a, 1.0, p).map_err(|e| e.to_string())?;
            let ah = alpha_hat(p, &ms).map_err(|e| e.to_string())?;
            check(
                (ah - a).abs() <= 1e-8,
                format!("p={p} a={a}: alpha_hat {ah}"),
            )?;
            let out = doob_small_p(p, &ms).map_err(|e| e.to_string())?;
            let closed = 1.0 / (1.0 - p + p * a);
            check(
                (out.sharp - closed).abs() <= 1e-9,
                format!("p={p} a={a}: sharp {} vs {closed}", out.sharp),
            )?;
            check(
                out.relaxed > out.sharp,
                format!("p={p} a={a}: relaxed {} not above sharp {}", out.relaxed, out.sharp),
            )?;
        }
    }
    Ok(())
}

/// 8. The improved L^1 constant: fixed point recovery, the bound equals the
/// mean maximum 1/alpha, and it beats the classical bound except exactly at
/// slope 1/e.
fn c08_improved_l1() -> Result<(), String> {
    for a in [0.2, 1.0 / E, 0.5, 0.8] {
        let ms = MomentSummary::analytic_extremal(a, 1.0, 0.5).map_err(|e| e.to_string())?;
        let out = improved_l1(&ms).map_err(|e| e.to_string())?;
        check(
            (out.alpha_hat - a).abs() <= 1e-8,
            format!("a={a}: alpha_hat {}", out.alpha_hat),
        )?;
        check(
            (out.bound - 1.0 / a).abs() <= 1e-9,
            format!("a={a}: bound {} vs {}", out.bound, 1.0 / a),
        )?;
        let diff = out.classical - out.bound;
        let at_pivot = (a - 1.0 / E).abs() < 1e-15;
        check(
            if at_pivot { diff.abs() < 1e-9 } else { diff > 1e-6 },
            format!("a={a}: classical {} vs bound {}", out.classical, out.bound),
        )?;
    }
    Ok(())
}

/// 9. Neither of two distinct stage-uniform boundary vectors dominates the
/// other: each extremal martingale exhibits a level interval where its own
/// vector gives the strictly smaller bound.
fn c09_ordering_witnesses() -> Result<(), String> {
    let start = Instant::now();
    let z1 = linear_vec(0.5, 2, 1.0);
    let z2 = linear_vec(0.6, 2, 1.0);
    let rep = compare_orderings(&z1, &z2, &CompareConfig::default()).map_err(|e| e.to_string())?;
    check(
        rep.interval_x1.levels >= 1 && rep.interval_x2.levels >= 1,
        format!(
            "intervals ({}, {}) x1 and ({}, {}) x2",
            rep.interval_x1.m_lo, rep.interval_x1.m_hi, rep.interval_x2.m_lo, rep.interval_x2.m_hi
        ),
    )?;
    let secs = start.elapsed().as_secs_f64();
    check(secs < 180.0, format!("runtime {secs:.1}s exceeds 180s"))
}

/// 10. The boundary-vector optimizer recovers the generating slope of the
/// extremal ensemble for each power payoff.
fn c10_optimizer_recovery() -> Result<(), String> {
    for p in [1.5, 2.0, 3.0] {
        let a_star = (p - 1.0) / p;
        let xi =
            StoppingBoundaryVector::repeated(BoundaryFn::linear(a_star).unwrap(), 1, 1.0).unwrap();
        let ens = exact_ensemble(&xi, 100_000, 1).unwrap();
        let phi = maxbound::phi::PhiSpec::power(p).unwrap();
        // tightly truncated grid: the argmin is unchanged while the heavy
        // tail of the terminal law stays out of the objective noise
        let q = QuadratureGrid::geometric(1.0, 3.0, 256).unwrap();
        let family = ZetaFamily::Linear { slopes: vec![0.3] };
        let out = optimize_zeta_vector(&ens, &phi, &family, &q).map_err(|e| e.to_string())?;
        check(
            (out.slopes[0] - a_star).abs() < 1e-2,
            format!("p={p}: slope {} vs {a_star}", out.slopes[0]),
        )?;
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Result<(), String>)> = vec![
        ("01 pathwise inequality", c01_pathwise_inequality),
        ("02 pathwise equality", c02_pathwise_equality),
        ("03 tail law", c03_tail_law),
        ("04 sampler oracle equivalence", c04_sampler_oracle),
        ("05 doob lp sharpness", c05_lp_sharpness),
        ("06 doob l1 equality", c06_l1_equality),
        ("07 small-p fixed point", c07_small_p_fixed_point),
        ("08 improved l1", c08_improved_l1),
        ("09 ordering witnesses", c09_ordering_witnesses),
        ("10 optimizer recovery", c10_optimizer_recovery),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        match run() {
            Ok(()) => println!(
                "criterion {name}: pass ({:.1}s)",
                start.elapsed().as_secs_f64()
            ),
            Err(msg) => {
                println!("criterion {name}: FAIL ({msg})");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
