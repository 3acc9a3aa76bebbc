//! Closed forms for the dependency-waiting model and their Monte Carlo
//! counterparts.
//!
//! Model: each of `m` tasks has `k` dependencies, each unresolved
//! independently with probability `p`. A task waits when any of its
//! dependencies is unresolved; `W` counts waiting tasks.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::{self, Stream};

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("probability {p} outside [0, 1]")))
    }
}

/// `m * (1 - (1 - p)^k)`.
pub fn expected_waiting_time(m: usize, k: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    if k >= m {
        return Err(Error::invalid(format!("degree k={k} must be below m={m}")));
    }
    Ok(m as f64 * (1.0 - (1.0 - p).powi(k as i32)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

const CHUNK: u64 = 4096;

/// Samples `W` directly from the `m * k` Bernoulli outcomes of each trial.
/// Successes are located by geometric skips, so the cost per trial scales
/// with the number of waiting tasks rather than with `m * k`.
pub fn monte_carlo_waiting(m: usize, k: usize, p: f64, trials: u64, seed: u64) -> Result<Estimate> {
    expected_waiting_time(m, k, p)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if p == 0.0 || k == 0 {
        return Ok(Estimate {
            mean: 0.0,
            std_error: 0.0,
            trials,
        });
    }
    let geometric = Geometric::new(p).map_err(|e| Error::invalid(e.to_string()))?;
    let slots = (m * k) as u64;
    let chunks = trials.div_ceil(CHUNK);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::rng(seed, Stream::MonteCarlo, &[c]);
            let n = CHUNK.min(trials - c * CHUNK);
            let (mut s, mut s2) = (0u128, 0u128);
            for _ in 0..n {
                let w = sample_waiting(&mut rng, &geometric, slots, k as u64) as u128;
                s += w;
                s2 += w * w;
            }
            (s, s2)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = if trials > 1 {
        ((sum_sq as f64 - sum as f64 * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
    })
}

fn sample_waiting<R: Rng>(rng: &mut R, geometric: &Geometric, slots: u64, k: u64) -> u64 {
    let mut waiting = 0;
    let mut pos = 0u64;
    loop {
        pos = pos.saturating_add(geometric.sample(rng));
        if pos >= slots {
            return waiting;
        }
        waiting += 1;
        // Later outcomes of this task cannot change it; skip to the next.
        pos = (pos / k + 1) * k;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullyConnected {
    /// `m * (1 - (1 - p)^(m - 1))`.
    pub exact: f64,
    /// `m * p^(m - 1)`.
    pub proxy: f64,
}

pub fn fully_connected_waiting(m: usize, p: f64) -> Result<FullyConnected> {
    if m < 2 {
        return Err(Error::invalid(format!("fully connected model needs m >= 2, got {m}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("probability {p} outside (0, 1)")));
    }
    let d = (m - 1) as i32;
    Ok(FullyConnected {
        exact: m as f64 * (1.0 - (1.0 - p).powi(d)),
        proxy: m as f64 * p.powi(d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KendallTau {
    /// Tau-b, corrected for ties in either variable.
    pub tau: f64,
    /// Normal approximation of the tie-corrected null distribution of `S`.
    pub z: f64,
}

pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<KendallTau> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(Error::invalid("kendall tau needs two equal-length samples of at least 3"));
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            let b = (y[i] - y[j]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            s += a * b;
        }
    }
    let ties = |v: &[f64]| {
        let mut sorted = v.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut groups = Vec::new();
        let mut run = 1usize;
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                groups.push(run as f64);
                run = 1;
            }
        }
        groups.push(run as f64);
        groups
    };
    let (tx, ty) = (ties(x), ties(y));
    let nf = n as f64;
    let n0 = nf * (nf - 1.0) / 2.0;
    let pairs = |t: &[f64]| t.iter().map(|t| t * (t - 1.0) / 2.0).sum::<f64>();
    let denom = ((n0 - pairs(&tx)) * (n0 - pairs(&ty))).sqrt();
    let tau = if denom > 0.0 { s as f64 / denom } else { 0.0 };

    let sum = |t: &[f64], f: &dyn Fn(f64) -> f64| t.iter().map(|&t| f(t)).sum::<f64>();
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt = sum(&tx, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(&ty, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let t2 = sum(&tx, &|t| t * (t - 1.0) * (t - 2.0)) * sum(&ty, &|t| t * (t - 1.0) * (t - 2.0));
    let t1 = sum(&tx, &|t| t * (t - 1.0)) * sum(&ty, &|t| t * (t - 1.0));
    let var = (v0 - vt - vu) / 18.0
        + t2 / (9.0 * nf * (nf - 1.0) * (nf - 2.0))
        + t1 / (2.0 * nf * (nf - 1.0));
    let z = if var > 0.0 { s as f64 / var.sqrt() } else { 0.0 };
    Ok(KendallTau { tau, z })
}
