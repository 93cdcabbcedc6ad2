//! Deterministic reductions and small statistical utilities.
//!
//! All Monte Carlo reductions go through [`pairwise_sum`] so that results are
//! reproducible to 1e-12 regardless of worker count: partial sums are produced
//! per fixed-size chunk in index order and combined in a fixed binary tree.

const CHUNK: usize = 1024;

/// Pairwise (cascade) summation over a slice. Deterministic for a fixed input
/// order, with O(log n) rounding growth.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n if n <= 8 => values.iter().sum(),
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Sums `f(i)` over `0..n` in parallel over fixed chunks, combining the chunk
/// partials pairwise in index order. Thread-count independent.
pub fn parallel_sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    use rayon::prelude::*;
    let chunks: Vec<f64> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let terms: Vec<f64> = chunk.iter().map(|&i| f(i)).collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&chunks)
}

/// Sample mean and standard error of `f(i)` over `0..n`.
pub fn parallel_mean_stderr<F>(n: usize, f: F) -> (f64, f64)
where
    F: Fn(usize) -> f64 + Sync,
{
    use rayon::prelude::*;
    assert!(n > 0, "mean of empty sample");
    let partials: Vec<(f64, f64)> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let terms: Vec<f64> = chunk.iter().map(|&i| f(i)).collect();
            let sq: Vec<f64> = terms.iter().map(|t| t * t).collect();
            (pairwise_sum(&terms), pairwise_sum(&sq))
        })
        .collect();
    let sums: Vec<f64> = partials.iter().map(|p| p.0).collect();
    let sqs: Vec<f64> = partials.iter().map(|p| p.1).collect();
    let sum = pairwise_sum(&sums);
    let sumsq = pairwise_sum(&sqs);
    let mean = sum / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = ((sumsq - sum * mean).max(0.0)) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Mean and standard error of a slice.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    parallel_mean_stderr(values.len(), |i| values[i])
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    let n = samples.len() as f64;
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let fx = cdf(x);
        d = d.max(((i + 1) as f64 / n - fx).abs());
        d = d.max((i as f64 / n - fx).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let xa = a[i];
        let xb = b[j];
        let x = xa.min(xb);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic one-sample KS critical value at significance `alpha`.
pub fn ks_critical_one(n: usize, alpha: f64) -> f64 {
    kolmogorov_coefficient(alpha) / (n as f64).sqrt()
}

/// Asymptotic two-sample KS critical value at significance `alpha`.
pub fn ks_critical_two(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    kolmogorov_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

fn kolmogorov_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Golden-section minimisation of a unimodal function on [lo, hi].
/// Returns (argmin, min value). `tol` is an absolute tolerance on the argument.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - INVPHI * (hi - lo);
    let mut b = lo + INVPHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INVPHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INVPHI * (hi - lo);
            fb = f(b);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-12);
    }

    #[test]
    fn parallel_sum_is_thread_independent_value() {
        // The chunked pairwise sum must give the exact same bits as the
        // sequential chunked reduction.
        let n = 10_000;
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let par = parallel_sum_by(n, f);
        let chunks: Vec<f64> = (0..n)
            .collect::<Vec<_>>()
            .chunks(1024)
            .map(|c| pairwise_sum(&c.iter().map(|&i| f(i)).collect::<Vec<_>>()))
            .collect();
        assert_eq!(par, pairwise_sum(&chunks));
    }

    #[test]
    fn ks_uniform_sanity() {
        // Deterministic stratified uniform sample has tiny KS distance.
        let n = 1000;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_one_sample(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(d < 1.0 / n as f64 + 1e-12);
    }

    #[test]
    fn golden_finds_parabola_min() {
        let (x, _) = golden_section(|x| (x - 1.25) * (x - 1.25), -3.0, 4.0, 1e-10);
        assert!((x - 1.25).abs() < 1e-8);
    }
}
