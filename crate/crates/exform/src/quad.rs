//! Quasi-random quadrature over balls and half-balls.
//!
//! Halton points with a seeded Cranley-Patterson rotation, rejection-mapped
//! into the ball. Error bars come from independent rotation replicates, so
//! every estimate is reproducible from the config seed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::par;

const PRIMES: [usize; 9] = [2, 3, 5, 7, 11, 13, 17, 19, 23];

/// Value with a replicate-based standard-error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Total node budget across all replicates.
    pub nodes: usize,
    pub seed: u64,
    pub replicates: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            nodes: 100_000,
            seed: 0,
            replicates: 8,
        }
    }
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Low-discrepancy points in the unit ball (or upper half ball), produced
/// by folding rotated Halton cube points and rejecting outside the sphere.
/// Deterministic in (seed, replicate).
pub fn unit_ball_points(
    n: usize,
    count: usize,
    seed: u64,
    replicate: u64,
    half: bool,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(replicate + 1)));
    let shifts: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 1usize;
    while out.len() < count {
        let mut p: Vec<f64> = (0..n)
            .map(|d| {
                let u = (radical_inverse(i, PRIMES[d]) + shifts[d]).fract();
                2.0 * u - 1.0
            })
            .collect();
        i += 1;
        let norm2: f64 = p.iter().map(|x| x * x).sum();
        if norm2 <= 1.0 {
            if half {
                p[n - 1] = p[n - 1].abs();
            }
            out.push(p);
        }
    }
    out
}

/// Volume of the n-ball of radius r.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    // π^{n/2} / Γ(n/2 + 1) · rⁿ, by the two-step recurrence
    let mut v = match n % 2 {
        0 => 1.0,
        _ => 2.0 * r,
    };
    let mut k = if n % 2 == 0 { 0 } else { 1 };
    while k < n {
        k += 2;
        v *= 2.0 * std::f64::consts::PI * r * r / k as f64;
    }
    v
}

/// Averaged integral (1/vol) ∫ f over B_r(center) (∩ upper half when
/// `half`), with a replicate standard error.
pub fn average_over_ball<F>(
    n: usize,
    center: &[f64],
    r: f64,
    half: bool,
    cfg: &QuadConfig,
    f: F,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let per = (cfg.nodes / cfg.replicates).max(1);
    let mut means = Vec::with_capacity(cfg.replicates);
    for rep in 0..cfg.replicates {
        let pts = unit_ball_points(n, per, cfg.seed, rep as u64, half);
        let scaled: Vec<Vec<f64>> = pts
            .iter()
            .map(|u| {
                u.iter()
                    .zip(center)
                    .map(|(x, c)| c + r * x)
                    .collect()
            })
            .collect();
        let vals = par::map_collect(&scaled, |p| f(p));
        let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
        means.push(vals.iter().sum::<f64>() / vals.len() as f64);
    }
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    let var = means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (means.len().saturating_sub(1).max(1)) as f64;
    Ok(Estimate {
        value: mean,
        std_err: (var / means.len() as f64).sqrt(),
    })
}

/// Plain integral ∫ f over the (half-)ball: averaged value times volume.
pub fn integral_over_ball<F>(
    n: usize,
    center: &[f64],
    r: f64,
    half: bool,
    cfg: &QuadConfig,
    f: F,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let avg = average_over_ball(n, center, r, half, cfg, f)?;
    let vol = ball_volume(n, r) * if half { 0.5 } else { 1.0 };
    Ok(Estimate {
        value: avg.value * vol,
        std_err: avg.std_err * vol,
    })
}
