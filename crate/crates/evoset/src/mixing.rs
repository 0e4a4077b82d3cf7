//! Ground-truth oracles: exact distributions by matrix powering, mixing
//! times taken literally as first hitting of the mixing criterion, chi-square
//! distance, spectral gaps, and continuous-time kernels by uniformization.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chain::ChainKernel;

#[derive(Debug, Error)]
pub enum MixError {
    #[error("criterion not met within n_max = {0} steps")]
    NotMixed(u64),
    #[error("criterion not met within t_max = {0}")]
    NotMixedContinuous(f64),
    #[error("spectral gap requires a reversible chain")]
    NotReversible,
    #[error("dense eigensolve limited to 4096 states (got {0})")]
    TooLarge(usize),
}

/// `mu_n = p^n(x, .)` by repeated vector-kernel multiplication.
pub fn distribution_at(chain: &ChainKernel, x: usize, n: usize) -> Vec<f64> {
    let mut mu = vec![0.0; chain.n()];
    mu[x] = 1.0;
    let mut next = vec![0.0; chain.n()];
    for step in 0..n {
        next.iter_mut().for_each(|e| *e = 0.0);
        for (z, &w) in mu.iter().enumerate() {
            if w != 0.0 {
                for &(y, p) in chain.row(z) {
                    next[y as usize] += w * p;
                }
            }
        }
        std::mem::swap(&mut mu, &mut next);
        if step % 100 == 99 {
            let sum: f64 = mu.iter().sum();
            mu.iter_mut().for_each(|e| *e /= sum);
        }
    }
    mu
}

/// `chi^2(mu, pi) = sum_y pi(y) (mu(y)/pi(y) - 1)^2`.
///
/// The equivalent form `sum mu^2/pi - 1` is computed alongside as a
/// cross-check; the two agree to rounding for probability vectors.
pub fn chi_square(mu: &[f64], pi: &[f64]) -> f64 {
    let direct: f64 = mu
        .iter()
        .zip(pi.iter())
        .map(|(&m, &p)| {
            let d = m / p - 1.0;
            p * d * d
        })
        .sum();
    let alt: f64 = mu.iter().zip(pi.iter()).map(|(&m, &p)| m * m / p).sum::<f64>() - 1.0;
    debug_assert!(
        (direct - alt).abs() <= 1e-12 * (1.0 + direct.abs()),
        "chi-square forms disagree: {direct} vs {alt}"
    );
    direct
}

/// Total variation distance `||mu - nu|| = (1/2) sum |mu - nu|`.
pub fn total_variation(mu: &[f64], nu: &[f64]) -> f64 {
    0.5 * mu.iter().zip(nu.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Drives `visit(n, matrix)` over `P^n` for n = 0, 1, ... until `visit`
/// returns true or `n_max` is passed. The matrix is row-major `n x n`.
fn power_scan(
    chain: &ChainKernel,
    n_max: u64,
    mut visit: impl FnMut(u64, &[f64]) -> bool,
) -> bool {
    let n = chain.n();
    let mut m = vec![0.0f64; n * n];
    for x in 0..n {
        m[x * n + x] = 1.0;
    }
    let mut next = vec![0.0f64; n * n];
    let mut step = 0u64;
    loop {
        if visit(step, &m) {
            return true;
        }
        if step == n_max {
            return false;
        }
        next.par_chunks_mut(n).zip(m.par_chunks(n)).for_each(|(out, row)| {
            out.iter_mut().for_each(|e| *e = 0.0);
            for (z, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    for &(y, p) in chain.row(z) {
                        out[y as usize] += w * p;
                    }
                }
            }
        });
        std::mem::swap(&mut m, &mut next);
        step += 1;
        if step % 100 == 0 {
            m.chunks_mut(n).for_each(|row| {
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|e| *e /= sum);
            });
        }
    }
}

fn uniform_deviation(m: &[f64], pi: &[f64]) -> f64 {
    let n = pi.len();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let dev = (m[x * n + y] - pi[y]).abs() / pi[y];
            worst = worst.max(dev);
        }
    }
    worst
}

fn tv_deviation(m: &[f64], pi: &[f64]) -> f64 {
    let n = pi.len();
    (0..n)
        .map(|x| total_variation(&m[x * n..(x + 1) * n], pi))
        .fold(0.0, f64::max)
}

/// Epsilon-uniform mixing time: the literal minimum of
/// `{ n : |p^n(x,y) - pi(y)|/pi(y) <= eps for all x, y }`, scanning
/// n = 0, 1, ... with no monotonicity assumed.
pub fn tau_uniform(chain: &ChainKernel, eps: f64, n_max: u64) -> Result<u64, MixError> {
    let mut found = None;
    power_scan(chain, n_max, |n, m| {
        if uniform_deviation(m, chain.pi()) <= eps {
            found = Some(n);
            true
        } else {
            false
        }
    });
    found.ok_or(MixError::NotMixed(n_max))
}

/// Epsilon mixing time in total variation.
pub fn tau_tv(chain: &ChainKernel, eps: f64, n_max: u64) -> Result<u64, MixError> {
    let mut found = None;
    power_scan(chain, n_max, |n, m| {
        if tv_deviation(m, chain.pi()) <= eps {
            found = Some(n);
            true
        } else {
            false
        }
    });
    found.ok_or(MixError::NotMixed(n_max))
}

/// Spectral gap `1 - lambda_2` of a reversible chain via a dense symmetric
/// eigensolve of `D^{1/2} P D^{-1/2}`.
pub fn spectral_gap(chain: &ChainKernel) -> Result<f64, MixError> {
    if !chain.is_reversible() {
        return Err(MixError::NotReversible);
    }
    let n = chain.n();
    if n > 4096 {
        return Err(MixError::TooLarge(n));
    }
    let pi = chain.pi();
    let mut b = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        for &(y, p) in chain.row(x) {
            b[(x, y as usize)] = (pi[x] / pi[y as usize]).sqrt() * p;
        }
    }
    // Symmetrize away round-off before the eigensolve.
    let b = (&b + b.transpose()) * 0.5;
    let eigen = b.symmetric_eigen();
    let mut vals: Vec<f64> = eigen.eigenvalues.iter().cloned().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(1.0 - vals[1])
}

/// Continuous-time kernel row `h_t(x, .) = e^{t(P-I)}(x, .)` by
/// uniformization: the Poisson(t) mixture of discrete powers, truncated when
/// the remaining Poisson tail falls below `tail_tol` and renormalized.
pub fn continuous_distribution(chain: &ChainKernel, x: usize, t: f64, tail_tol: f64) -> Vec<f64> {
    assert!(t >= 0.0 && tail_tol > 0.0);
    let n = chain.n();
    let mut mu = vec![0.0; n];
    mu[x] = 1.0;
    if t == 0.0 {
        return mu;
    }
    let mut h = vec![0.0; n];
    let mut next = vec![0.0; n];
    let ln_t = t.ln();
    let mut ln_fact = 0.0f64;
    let mut cum = 0.0f64;
    let mut j = 0u64;
    loop {
        // log Poisson weight: -t + j ln t - ln j!
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        let w = (-t + j as f64 * ln_t - ln_fact).exp();
        cum += w;
        if w > 0.0 {
            for (hy, &m) in h.iter_mut().zip(mu.iter()) {
                *hy += w * m;
            }
        }
        if j as f64 >= t && 1.0 - cum < tail_tol {
            break;
        }
        next.iter_mut().for_each(|e| *e = 0.0);
        for (z, &wz) in mu.iter().enumerate() {
            if wz != 0.0 {
                for &(y, p) in chain.row(z) {
                    next[y as usize] += wz * p;
                }
            }
        }
        std::mem::swap(&mut mu, &mut next);
        j += 1;
    }
    h.iter_mut().for_each(|e| *e /= cum);
    h
}

fn continuous_uniform_ok(chain: &ChainKernel, t: f64, eps: f64) -> bool {
    let pi = chain.pi();
    (0..chain.n()).all(|x| {
        let h = continuous_distribution(chain, x, t, 1e-12);
        h.iter()
            .zip(pi.iter())
            .all(|(&hy, &py)| (hy - py).abs() / py <= eps)
    })
}

/// Continuous epsilon-uniform mixing time: the first grid time at which the
/// uniform criterion holds, refined by bisection to `resolution / 100`.
pub fn tau_uniform_continuous(
    chain: &ChainKernel,
    eps: f64,
    t_max: f64,
    resolution: f64,
) -> Result<f64, MixError> {
    assert!(resolution > 0.0);
    let mut t_lo = 0.0f64;
    let mut t_hi = None;
    let mut k = 1u64;
    loop {
        let t = k as f64 * resolution;
        if t > t_max * (1.0 + 1e-12) {
            break;
        }
        if continuous_uniform_ok(chain, t, eps) {
            t_hi = Some(t);
            break;
        }
        t_lo = t;
        k += 1;
    }
    let mut hi = t_hi.ok_or(MixError::NotMixedContinuous(t_max))?;
    while hi - t_lo > resolution / 100.0 {
        let mid = (hi + t_lo) / 2.0;
        if continuous_uniform_ok(chain, mid, eps) {
            hi = mid;
        } else {
            t_lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiPoint {
    pub n: u64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportParams {
    pub x: usize,
    pub n_max: u64,
}

/// Exactly measured mixing quantities, serialized as
/// `{tau:{eps:..}, tau_tv:{..}, gap, chi_curve:[{n,value}], params}`.
#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub tau: BTreeMap<String, Option<u64>>,
    pub tau_tv: BTreeMap<String, Option<u64>>,
    pub gap: Option<f64>,
    pub chi_curve: Vec<ChiPoint>,
    pub params: ReportParams,
}

/// One powering pass recording, for every epsilon in `eps_list`, the first
/// step at which each mixing criterion holds, plus the chi-square curve from
/// start state `x`. Entries stay `None` when `n_max` is exceeded.
pub fn mixing_report(
    chain: &ChainKernel,
    x: usize,
    eps_list: &[f64],
    n_max: u64,
) -> MixingReport {
    let pi = chain.pi();
    let n = chain.n();
    let mut tau: Vec<Option<u64>> = vec![None; eps_list.len()];
    let mut tau_tv: Vec<Option<u64>> = vec![None; eps_list.len()];
    let mut chi_curve = Vec::new();
    power_scan(chain, n_max, |step, m| {
        let udev = uniform_deviation(m, pi);
        let tdev = tv_deviation(m, pi);
        for (i, &eps) in eps_list.iter().enumerate() {
            if tau[i].is_none() && udev <= eps {
                tau[i] = Some(step);
            }
            if tau_tv[i].is_none() && tdev <= eps {
                tau_tv[i] = Some(step);
            }
        }
        chi_curve.push(ChiPoint { n: step, value: chi_square(&m[x * n..(x + 1) * n], pi) });
        tau.iter().all(|t| t.is_some()) && tau_tv.iter().all(|t| t.is_some())
    });
    let gap = spectral_gap(chain).ok();
    let key = |e: f64| format!("{e}");
    MixingReport {
        tau: eps_list.iter().cloned().map(key).zip(tau).collect(),
        tau_tv: eps_list.iter().cloned().map(key).zip(tau_tv).collect(),
        gap,
        chi_curve,
        params: ReportParams { x, n_max },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiTimePoint {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuousReportParams {
    pub x: usize,
    pub t_max: f64,
    pub resolution: f64,
}

/// Continuous-time analogue of [`MixingReport`]: uniform mixing times on a
/// refined grid and the chi-square curve over grid times.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuousMixingReport {
    pub tau: BTreeMap<String, Option<f64>>,
    pub gap: Option<f64>,
    pub chi_curve: Vec<ChiTimePoint>,
    pub params: ContinuousReportParams,
}

pub fn continuous_mixing_report(
    chain: &ChainKernel,
    x: usize,
    eps_list: &[f64],
    t_max: f64,
    resolution: f64,
) -> ContinuousMixingReport {
    let tau = eps_list
        .iter()
        .map(|&eps| {
            (format!("{eps}"), tau_uniform_continuous(chain, eps, t_max, resolution).ok())
        })
        .collect();
    let mut chi_curve = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * resolution;
        if t > t_max * (1.0 + 1e-12) {
            break;
        }
        let h = continuous_distribution(chain, x, t, 1e-12);
        chi_curve.push(ChiTimePoint { t, value: chi_square(&h, chain.pi()) });
        k += 1;
    }
    ContinuousMixingReport {
        tau,
        gap: spectral_gap(chain).ok(),
        chi_curve,
        params: ContinuousReportParams { x, t_max, resolution },
    }
}
