//! Seeded i.i.d. samples, order statistics and the empirical df.

mod schedule;

use std::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionModel;
use crate::error::{Error, Result};

pub use schedule::{QuantileSchedule, Regime, ScheduleRule, Side};

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one replication's random stream.
///
/// The ChaCha key is derived from `(master, experiment)` and the 64-bit stream
/// id from `(n, replication)`, so every replication owns an independent
/// stream whatever order replications are executed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub master: u64,
    pub experiment: u64,
    pub n: u64,
    pub replication: u64,
}

impl SeedPath {
    pub fn new(master: u64, experiment: u64, n: u64, replication: u64) -> Self {
        Self {
            master,
            experiment,
            n,
            replication,
        }
    }

    pub fn stream(&self) -> UniformStream {
        let mut state = self.master ^ splitmix64(&mut self.experiment.clone());
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        let mut s = self.n.rotate_left(32) ^ splitmix64(&mut self.replication.clone());
        rng.set_stream(splitmix64(&mut s));
        UniformStream { rng }
    }
}

impl fmt::Display for SeedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.master, self.experiment, self.n, self.replication)
    }
}

pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    /// Uniform draw on the open interval `(0, 1)`, on the grid
    /// `(j + ½)·2⁻⁵²`.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
        ((self.rng.next_u64() >> 12) as f64 + 0.5) * SCALE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub values: Vec<f64>,
    pub seed_path: Option<SeedPath>,
}

impl Sample {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sample must contain at least one value"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("sample contains NaN"));
        }
        Ok(Self {
            values,
            seed_path: None,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn kth_order_statistic(&self, k: usize) -> Result<f64> {
        kth_order_statistic(&self.values, k)
    }

    pub fn empirical_quantile(&self, p: f64) -> Result<f64> {
        let k = exact_rank(p, self.n())?;
        self.kth_order_statistic(k)
    }

    pub fn empirical_cdf_at(&self, x: f64) -> Rational {
        empirical_cdf_at(&self.values, x)
    }
}

/// `values[i] = Q(Uᵢ)` for the uniform stream keyed by `seed_path`.
pub fn sample_iid(model: &DistributionModel, n: usize, seed_path: SeedPath) -> Result<Sample> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let mut values = vec![0.0; n];
    fill_iid(model, seed_path, &mut values);
    Ok(Sample {
        values,
        seed_path: Some(seed_path),
    })
}

/// Overwrites `buf` with the sample for `seed_path`; used to reuse buffers.
pub fn fill_iid(model: &DistributionModel, seed_path: SeedPath, buf: &mut [f64]) {
    let mut stream = seed_path.stream();
    for slot in buf.iter_mut() {
        *slot = model.quantile_unchecked(stream.next_open01());
    }
}

/// A count over a sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub count: u64,
    pub n: u64,
}

impl Rational {
    pub fn value(&self) -> f64 {
        self.count as f64 / self.n as f64
    }
}

fn check_rank(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("rank k = {k} outside 1..={n}")));
    }
    Ok(())
}

/// Recovers `k` from `p = k/n`; rejects `p` that is not of that form.
pub fn exact_rank(p: f64, n: usize) -> Result<usize> {
    let scaled = p * n as f64;
    let k = scaled.round();
    if !(k >= 1.0 && k <= n as f64) || (scaled - k).abs() > 1e-9 * k.max(1.0) {
        return Err(Error::domain(format!("p = {p} is not of the form k/{n}")));
    }
    Ok(k as usize)
}

/// Reorders `values` so that index `k − 1` holds the `k`-th smallest value,
/// smaller-or-equal values before it and larger-or-equal after it.
pub fn select_kth_in_place(values: &mut [f64], k: usize) -> Result<f64> {
    check_rank(k, values.len())?;
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// `X_{k:n}` by expected linear-time selection on a copy of the data.
pub fn kth_order_statistic(values: &[f64], k: usize) -> Result<f64> {
    check_rank(k, values.len())?;
    let mut scratch = values.to_vec();
    select_kth_in_place(&mut scratch, k)
}

/// `Fₙ(x)` as the exact count `#{i : Xᵢ ≤ x}` over `n`.
pub fn empirical_cdf_at(values: &[f64], x: f64) -> Rational {
    let count = values.iter().filter(|&&v| v <= x).count() as u64;
    Rational {
        count,
        n: values.len() as u64,
    }
}

/// Sorted `k` i.i.d. Uniform(0, α) draws: the law of `(U_{1:n}, …, U_{k:n})`
/// given that exactly `k` of `n` uniforms fall below `α`.
pub fn conditional_uniform_order_stats(n: usize, alpha: f64, k: usize, seed_path: SeedPath) -> Result<Vec<f64>> {
    check_conditional(n, alpha, k)?;
    let mut stream = seed_path.stream();
    let mut out: Vec<f64> = (0..k).map(|_| alpha * stream.next_open01()).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Ground-truth conditional law by rejection: draws full Uniform(0,1) samples
/// of size `n` until one has exactly `k` points at or below `α`, then returns
/// its lowest `k` order statistics.
pub fn rejection_conditional_sampler(
    n: usize,
    alpha: f64,
    k: usize,
    seed_path: SeedPath,
    max_tries: u64,
) -> Result<Vec<f64>> {
    check_conditional(n, alpha, k)?;
    let mut stream = seed_path.stream();
    let mut buf = vec![0.0; n];
    for _ in 0..max_tries {
        let mut below = 0;
        for slot in buf.iter_mut() {
            *slot = stream.next_open01();
            if *slot <= alpha {
                below += 1;
            }
        }
        if below == k {
            let mut lowest: Vec<f64> = buf.iter().copied().filter(|&u| u <= alpha).collect();
            lowest.sort_by(f64::total_cmp);
            return Ok(lowest);
        }
    }
    Err(Error::RetryBudget { tries: max_tries })
}

fn check_conditional(n: usize, alpha: f64, k: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    if k > n {
        return Err(Error::domain(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}
