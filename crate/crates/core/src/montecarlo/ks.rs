//! Kolmogorov-Smirnov statistics.

/// Asymptotic 1% coefficient `c(α)` of the KS distribution.
pub const KS_C_1PCT: f64 = 1.63;

/// `sup |F̂ₐ − F̂_b|` for two samples; both are sorted in place.
pub fn two_sample_ks(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (m, n) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // step past every copy of the smaller value so ties move both cdfs together
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    d
}

/// `c·√((m+n)/(m·n))`.
pub fn two_sample_critical(c: f64, m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    c * ((m + n) / (m * n)).sqrt()
}

/// `sup |F̂ − F|` against a continuous cdf; sorts `sample` in place.
pub fn one_sample_ks(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let m = sample.len() as f64;
    sample.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m)
    })
}

pub fn one_sample_critical(c: f64, m: usize) -> f64 {
    c / (m as f64).sqrt()
}
