//! Statistical helpers shared by the simulation modules and the test
//! harness: summation, goodness-of-fit tests and least-squares fits.
//!
//! The special functions (log-gamma, regularized incomplete gamma,
//! Kolmogorov survival) are implemented directly so that p-values are
//! bit-reproducible across platforms.

/// Pairwise (cascade) summation in index order.
///
/// Deterministic for a fixed input order and accurate to O(log n) ulps,
/// which keeps replica aggregation independent of worker count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2, "need at least two samples");
    let mean = pairwise_sum(xs) / n as f64;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Standard error of a Bernoulli proportion estimate.
pub fn binomial_stderr(p_hat: f64, n: u64) -> f64 {
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0");
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_cf(a: f64, x: f64) -> f64 {
    // Lentz's continued fraction
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Survival function of the chi-square distribution with `df` degrees of
/// freedom.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k as f64) * (k as f64) * x * x).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Outcome of a goodness-of-fit test.
#[derive(Debug, Clone, Copy)]
pub struct GofResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov-Smirnov test of `samples` against the CDF `cdf`.
///
/// Uses the Stephens small-sample correction on the statistic before the
/// asymptotic Kolmogorov p-value, accurate for n in the hundreds and above.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> GofResult {
    let n = samples.len();
    assert!(n >= 8, "KS test needs a reasonable sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS sample"));
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        let lo = (f - i as f64 / nf).abs();
        let hi = ((i as f64 + 1.0) / nf - f).abs();
        d = d.max(lo).max(hi);
    }
    let corrected = (nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d;
    GofResult {
        statistic: d,
        p_value: kolmogorov_sf(corrected),
    }
}

/// Chi-square goodness-of-fit of observed counts against cell
/// probabilities. Degrees of freedom are `cells - 1`.
pub fn chi_square_gof(observed: &[u64], probabilities: &[f64]) -> GofResult {
    assert_eq!(observed.len(), probabilities.len());
    assert!(observed.len() >= 2);
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (o, p) in observed.iter().zip(probabilities) {
        let e = total as f64 * p;
        assert!(e > 0.0, "expected count must be positive");
        let diff = *o as f64 - e;
        stat += diff * diff / e;
    }
    GofResult {
        statistic: stat,
        p_value: chi_square_sf(stat, observed.len() as f64 - 1.0),
    }
}

/// Least-squares line fit. Returns `(slope, intercept, slope_stderr)`.
///
/// The slope standard error is the usual OLS estimate from the residual
/// variance; with two points it is zero by convention.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len();
    assert_eq!(n, ys.len());
    assert!(n >= 2);
    let nf = n as f64;
    let mx = pairwise_sum(xs) / nf;
    let my = pairwise_sum(ys) / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    assert!(sxx > 0.0, "degenerate x values");
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if n == 2 {
        return (slope, intercept, 0.0);
    }
    let mut ss_res = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        ss_res += r * r;
    }
    let se = (ss_res / (nf - 2.0) / sxx).sqrt();
    (slope, intercept, se)
}

/// Empirical CDF value of `samples` at `x` (fraction of samples <= x).
pub fn ecdf_at(sorted: &[f64], x: f64) -> f64 {
    let mut lo = 0usize;
    let mut hi = sorted.len();
    while lo < hi {
        let mid = (lo + hi) / 2;
        if sorted[mid] <= x {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo as f64 / sorted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs = [1.0, 2.0, 3.0, 4.5];
        assert_eq!(pairwise_sum(&xs), 10.5);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-13);
        assert!((ln_gamma(2.0)).abs() < 1e-13);
        // Gamma(5) = 24
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        // Gamma(1/2) = sqrt(pi)
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn chi_square_sf_closed_forms() {
        // df = 2: survival is exp(-x/2)
        for &x in &[0.5, 1.0, 3.0, 10.0] {
            assert!((chi_square_sf(x, 2.0) - (-x / 2.0).exp()).abs() < 1e-12);
        }
        // df = 4: survival is exp(-x/2) (1 + x/2)
        for &x in &[0.5f64, 2.0, 8.0] {
            let exact = (-x / 2.0).exp() * (1.0 + x / 2.0);
            assert!((chi_square_sf(x, 4.0) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn kolmogorov_critical_point() {
        // The 1% critical value of the Kolmogorov distribution is ~1.6276
        let p = kolmogorov_sf(1.6276);
        assert!((p - 0.01).abs() < 2e-4, "p = {p}");
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shifted() {
        use crate::stream::derive_stream;
        use rand::Rng;
        let mut rng = derive_stream(3, "ks-unit", 0);
        let unif: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        let res = ks_test(&unif, |x| x.clamp(0.0, 1.0));
        assert!(res.p_value > 0.01);
        let skew: Vec<f64> = unif.iter().map(|u| u.powi(2)).collect();
        let res = ks_test(&skew, |x| x.clamp(0.0, 1.0));
        assert!(res.p_value < 1e-6);
    }

    #[test]
    fn chi_square_accepts_fair_die_and_rejects_loaded() {
        use crate::stream::derive_stream;
        use rand::Rng;
        let mut rng = derive_stream(4, "chi2-unit", 0);
        let mut counts = [0u64; 6];
        for _ in 0..60_000 {
            counts[rng.gen_range(0..6)] += 1;
        }
        let p = [1.0 / 6.0; 6];
        assert!(chi_square_gof(&counts, &p).p_value > 0.01);
        counts[0] += 800;
        assert!(chi_square_gof(&counts, &p).p_value < 1e-6);
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let (slope, intercept, se) = linear_fit(&xs, &ys);
        assert!((slope + 2.0).abs() < 1e-12);
        assert!((intercept - 3.0).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn ecdf_midpoints() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ecdf_at(&s, 0.5), 0.0);
        assert_eq!(ecdf_at(&s, 2.0), 0.5);
        assert_eq!(ecdf_at(&s, 9.0), 1.0);
    }
}
