//! Statistics helpers shared by the law engine and the harness: Gaussian
//! tails, Kolmogorov–Smirnov distances, Wilson intervals, least squares and
//! moment summaries. All `f64`.

/// Upper tail of the standard normal, `P{Z > z}`, via `erfc`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F1 - F2|`.
/// Both inputs must be sorted ascending.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0f64;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value used by the law-match verdict: `1.95 * sqrt(2/N)` for two
/// equal samples of size `N`.
pub fn ks_critical(n: usize) -> f64 {
    1.95 * (2.0 / n as f64).sqrt()
}

/// Sup distance between an empirical CDF (sorted samples) and a reference
/// CDF evaluated on a grid of points. The step function is compared from
/// both sides at every grid point.
pub fn sup_norm_cdf_on_grid(sorted: &[f64], cdf: impl Fn(f64) -> f64, grid: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut worst = 0f64;
    for &x in grid {
        let idx = sorted.partition_point(|&v| v <= x) as f64;
        let f_emp = idx / n;
        let f_ref = cdf(x);
        worst = worst.max((f_emp - f_ref).abs());
    }
    worst
}

/// Half-width of the Wilson score interval at `z` standard errors for `k`
/// successes out of `n`.
pub fn wilson_halfwidth(k: u64, n: u64, z: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    (z / denom) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt()
}

/// Ordinary least squares fit `y ~ slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0f64;
    let mut sxy = 0f64;
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Sample skewness and excess-free kurtosis (i.e. the raw fourth
/// standardized moment; 3 for a Gaussian).
pub fn skewness_kurtosis(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let mut m2 = 0f64;
    let mut m3 = 0f64;
    let mut m4 = 0f64;
    for &x in xs {
        let d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2))
}
