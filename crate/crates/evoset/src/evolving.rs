//! The evolving-set process.
//!
//! From a current set `S`, draw `U` uniform on (0,1) and move to the
//! super-level set `{y : Q(S,y) >= U pi(y)}`. The map `u -> next set` is a
//! step function of `u`; its breakpoints are the distinct ratios
//! `Q(S,y)/pi(y)`, which makes single steps, the exact kernel `K` on subset
//! space, its Doob transform `K_hat`, and the boundary gauges psi / varphi /
//! theta all computable in closed form.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{ChainKernel, StateSet};
use crate::tol;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("subset-space kernel limited to 20 states (got {0})")]
    TooLarge(usize),
    #[error("evolving-set trace cannot start from the empty set")]
    EmptyStart,
    #[error("Doob transform is undefined at the empty set")]
    DoobUndefined,
}

/// The threshold partition of (0,1] induced by a set `S`.
///
/// Interval `j` (1-based over `thresholds`) is `(t_{j-1}, t_j]` with
/// `t_0 = 0`; every `u` in it maps to the same next set `A_j`, namely the
/// states whose ratio `Q(S,y)/pi(y)` is at least `t_j`. A trailing interval
/// `(t_m, 1)` maps to the empty set when `t_m < 1`.
pub(crate) struct Partition {
    /// Distinct threshold ratios, ascending, deduplicated within 1e-14.
    pub thresholds: Vec<f64>,
    /// States carrying positive ratio, sorted by (ratio, id) ascending.
    pub states_sorted: Vec<u32>,
    /// `A_j = states_sorted[suffix_start[j]..]`.
    pub suffix_start: Vec<usize>,
    /// `pi(A_j)` for each interval.
    pub set_measures: Vec<f64>,
}

impl Partition {
    pub fn build(chain: &ChainKernel, s: &StateSet) -> Partition {
        let mut q: std::collections::HashMap<u32, f64> = std::collections::HashMap::new();
        for x in s.iter() {
            let w = chain.pi_of(x);
            for &(y, p) in chain.row(x) {
                *q.entry(y).or_insert(0.0) += w * p;
            }
        }
        // Ratios live in (0, 1]; round-off can push Q(S,y)/pi(y) a hair past 1.
        let mut ratios: Vec<(f64, u32)> = q
            .into_iter()
            .filter(|&(_, v)| v > 0.0)
            .map(|(y, v)| ((v / chain.pi_of(y as usize)).min(1.0), y))
            .collect();
        ratios.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut thresholds: Vec<f64> = Vec::new();
        let mut suffix_start: Vec<usize> = Vec::new();
        let states_sorted: Vec<u32> = ratios.iter().map(|&(_, y)| y).collect();
        for (i, &(r, _)) in ratios.iter().enumerate() {
            match thresholds.last() {
                Some(&last) if (r - last).abs() <= tol::BREAKPOINT_DEDUP => {}
                _ => {
                    thresholds.push(r);
                    suffix_start.push(i);
                }
            }
        }
        let mut set_measures = vec![0.0; thresholds.len()];
        let mut acc = 0.0;
        let mut j = thresholds.len();
        let mut i = states_sorted.len();
        while j > 0 {
            j -= 1;
            while i > suffix_start[j] {
                i -= 1;
                acc += chain.pi_of(states_sorted[i] as usize);
            }
            set_measures[j] = acc;
        }
        Partition { thresholds, states_sorted, suffix_start, set_measures }
    }

    /// The set reached by a draw `u` in (0,1): the shortest suffix whose
    /// threshold is >= u, or the empty set beyond the last threshold.
    pub fn set_for(&self, u: f64) -> &[u32] {
        let j = self.thresholds.partition_point(|&t| t < u);
        if j == self.thresholds.len() {
            &[]
        } else {
            &self.states_sorted[self.suffix_start[j]..]
        }
    }

    /// Iterates `(interval length, suffix index)`, the atoms of `K(S, .)`.
    /// The empty-set atom, if present, is reported with suffix index
    /// `thresholds.len()`.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        let m = self.thresholds.len();
        let tail = 1.0 - self.thresholds.last().copied().unwrap_or(0.0);
        (0..m)
            .map(move |j| {
                let lo = if j == 0 { 0.0 } else { self.thresholds[j - 1] };
                (self.thresholds[j] - lo, j)
            })
            .chain((tail > tol::BREAKPOINT_DEDUP).then_some((tail, m)))
    }
}

/// One step of the evolving-set process with explicit uniform `u` in (0,1):
/// returns `{y : Q(S,y) >= u pi(y)}`.
pub fn evolve_step(chain: &ChainKernel, s: &StateSet, u: f64) -> StateSet {
    assert!(u > 0.0 && u < 1.0, "u must lie in (0,1)");
    if s.is_empty() || s.is_full() {
        return s.clone();
    }
    let part = Partition::build(chain, s);
    StateSet::new(chain, part.set_for(u).iter().map(|&y| y as usize))
}

/// Sorted distinct values of `Q(S,y)/pi(y)` over the support of `Q(S,.)`,
/// clipped to (0,1]. The evolving-set map `u -> next set` is constant
/// between consecutive breakpoints.
pub fn breakpoints(chain: &ChainKernel, s: &StateSet) -> Vec<f64> {
    assert!(!s.is_empty() && !s.is_full(), "breakpoints need a proper nonempty set");
    Partition::build(chain, s).thresholds
}

/// Root gauge `psi(S) = 1 - E sqrt(pi(S~)/pi(S))`, exact via breakpoint
/// integration over (0,1].
pub fn psi(chain: &ChainKernel, s: &StateSet) -> f64 {
    assert!(!s.is_empty() && !s.is_full(), "psi needs a proper nonempty set");
    let part = Partition::build(chain, s);
    psi_from_partition(&part, s.measure())
}

pub(crate) fn psi_from_partition(part: &Partition, measure: f64) -> f64 {
    let mut expectation = 0.0;
    for (len, j) in part.intervals() {
        if j < part.set_measures.len() {
            expectation += len * (part.set_measures[j] / measure).sqrt();
        }
    }
    1.0 - expectation
}

/// `varphi(S) = (1/2 pi(S)) sum_y min(Q(S,y), Q(S^c,y))`, exact.
pub fn varphi(chain: &ChainKernel, s: &StateSet) -> f64 {
    assert!(!s.is_empty() && !s.is_full(), "varphi needs a proper nonempty set");
    let mut q = vec![0.0; chain.n()];
    for x in s.iter() {
        let w = chain.pi_of(x);
        for &(y, p) in chain.row(x) {
            q[y as usize] += w * p;
        }
    }
    let sum: f64 = q
        .iter()
        .enumerate()
        .map(|(y, &qs)| qs.min((chain.pi_of(y) - qs).max(0.0)))
        .sum();
    sum / (2.0 * s.measure())
}

/// `theta(S) = (1/pi(S)) sum_{y in S} sqrt(pi(y) Q(S^c,y))`, exact.
pub fn theta(chain: &ChainKernel, s: &StateSet) -> f64 {
    assert!(!s.is_empty() && !s.is_full(), "theta needs a proper nonempty set");
    let mut q = vec![0.0; chain.n()];
    for x in s.iter() {
        let w = chain.pi_of(x);
        for &(y, p) in chain.row(x) {
            q[y as usize] += w * p;
        }
    }
    let sum: f64 = s
        .iter()
        .map(|y| {
            let pi_y = chain.pi_of(y);
            (pi_y * (pi_y - q[y]).max(0.0)).sqrt()
        })
        .sum();
    sum / s.measure()
}

/// Exact transition kernel of the evolving-set process over all `2^n`
/// subsets, with its Doob transform.
///
/// Subset indices are the natural bit encoding of membership. The Doob rows
/// are `K_hat(S,A) = pi(A)/pi(S) K(S,A)`; the row at the empty set is
/// undefined and stored as `None`.
pub struct SetChainKernel {
    n_states: usize,
    rows: Vec<Vec<(u32, f64)>>,
    doob_rows: Vec<Option<Vec<(u32, f64)>>>,
    subset_pi: Vec<f64>,
}

impl SetChainKernel {
    pub fn subset_count(&self) -> usize {
        self.rows.len()
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// `K(S, .)` as a sparse row over subset indices.
    pub fn k_row(&self, s: usize) -> &[(u32, f64)] {
        &self.rows[s]
    }

    /// `K_hat(S, .)`; `Err(DoobUndefined)` at the empty set.
    pub fn doob_row(&self, s: usize) -> Result<&[(u32, f64)], EvolveError> {
        self.doob_rows[s].as_deref().ok_or(EvolveError::DoobUndefined)
    }

    /// `pi(A)` for a subset index.
    pub fn subset_measure(&self, a: usize) -> f64 {
        self.subset_pi[a]
    }

    /// Advances a distribution over subsets one step under `K`.
    pub fn step_distribution(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (s, &w) in v.iter().enumerate() {
            if w != 0.0 {
                for &(a, p) in &self.rows[s] {
                    out[a as usize] += w * p;
                }
            }
        }
        out
    }

    /// Advances a distribution over subsets one step under `K_hat`.
    pub fn step_distribution_doob(&self, v: &[f64]) -> Result<Vec<f64>, EvolveError> {
        let mut out = vec![0.0; v.len()];
        for (s, &w) in v.iter().enumerate() {
            if w != 0.0 {
                let row = self.doob_row(s)?;
                for &(a, p) in row {
                    out[a as usize] += w * p;
                }
            }
        }
        Ok(out)
    }
}

/// Enumerates the exact evolving-set kernel. Limited to 20 states since the
/// kernel stores one row per subset.
pub fn set_kernel(chain: &ChainKernel) -> Result<SetChainKernel, EvolveError> {
    let n = chain.n();
    if n > 20 {
        return Err(EvolveError::TooLarge(n));
    }
    let count = 1usize << n;
    let full = (count - 1) as u32;
    let subset_pi: Vec<f64> = (0..count)
        .map(|mask| (0..n).filter(|&x| mask >> x & 1 == 1).map(|x| chain.pi_of(x)).sum())
        .collect();

    let rows: Vec<Vec<(u32, f64)>> = (0..count)
        .into_par_iter()
        .map(|mask| {
            if mask == 0 {
                return vec![(0u32, 1.0)];
            }
            if mask == full as usize {
                return vec![(full, 1.0)];
            }
            let s = StateSet::from_mask(chain, mask as u64);
            let part = Partition::build(chain, &s);
            // Masks of the nested suffix sets.
            let mut suffix_masks = vec![0u32; part.thresholds.len()];
            let mut acc = 0u32;
            let mut i = part.states_sorted.len();
            for j in (0..part.thresholds.len()).rev() {
                while i > part.suffix_start[j] {
                    i -= 1;
                    acc |= 1 << part.states_sorted[i];
                }
                suffix_masks[j] = acc;
            }
            let mut row: Vec<(u32, f64)> = part
                .intervals()
                .map(|(len, j)| {
                    let target = if j < suffix_masks.len() { suffix_masks[j] } else { 0 };
                    (target, len)
                })
                .collect();
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();

    let doob_rows: Vec<Option<Vec<(u32, f64)>>> = rows
        .iter()
        .enumerate()
        .map(|(mask, row)| {
            if mask == 0 {
                return None;
            }
            let m = subset_pi[mask];
            Some(
                row.iter()
                    .filter(|&&(a, _)| a != 0)
                    .map(|&(a, p)| (a, p * subset_pi[a as usize] / m))
                    .collect(),
            )
        })
        .collect();

    Ok(SetChainKernel { n_states: n, rows, doob_rows, subset_pi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// Iterate `evolve_step` with fresh uniforms.
    Plain,
    /// Plain trajectory carrying importance weights `pi(S_k)/pi(S_0)`.
    DoobWeighted,
    /// Sample each step from `K_hat` directly over the breakpoint partition,
    /// without enumerating subset space.
    DoobExact,
}

impl TraceMode {
    pub fn parse(s: &str) -> Option<TraceMode> {
        match s {
            "plain" => Some(TraceMode::Plain),
            "doob-weighted" => Some(TraceMode::DoobWeighted),
            "doob-exact" => Some(TraceMode::DoobExact),
            _ => None,
        }
    }
}

/// A sampled evolving-set trajectory.
///
/// `u_draws[k]` reproduces the transition: `sets[k+1]` equals
/// `evolve_step(chain, sets[k], u_draws[k])`. Under `DoobExact` the recorded
/// draw is the midpoint of the sampled breakpoint interval.
/// `weights[k] = pi(S_k)/pi(S_0)`.
#[derive(Debug)]
pub struct EvolvingTrace {
    pub sets: Vec<StateSet>,
    pub u_draws: Vec<f64>,
    pub weights: Vec<f64>,
    pub mode: TraceMode,
}

fn draw_open_unit(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Samples an evolving-set trajectory of `steps` transitions from `s0`.
pub fn sample_trace(
    chain: &ChainKernel,
    s0: &StateSet,
    steps: usize,
    seed: u64,
    mode: TraceMode,
) -> Result<EvolvingTrace, EvolveError> {
    if s0.is_empty() {
        return Err(EvolveError::EmptyStart);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sets = Vec::with_capacity(steps + 1);
    let mut u_draws = Vec::with_capacity(steps);
    let mut weights = Vec::with_capacity(steps + 1);
    let base = s0.measure();
    sets.push(s0.clone());
    weights.push(1.0);
    for _ in 0..steps {
        let current = sets.last().unwrap();
        let next = if current.is_empty() || current.is_full() {
            let u = draw_open_unit(&mut rng);
            u_draws.push(u);
            current.clone()
        } else {
            let part = Partition::build(chain, current);
            match mode {
                TraceMode::Plain | TraceMode::DoobWeighted => {
                    let u = draw_open_unit(&mut rng);
                    u_draws.push(u);
                    StateSet::new(chain, part.set_for(u).iter().map(|&y| y as usize))
                }
                TraceMode::DoobExact => {
                    // P(interval j) = len_j * pi(A_j) / pi(S); the empty-set
                    // atom has zero Doob mass and is never chosen.
                    let measure = current.measure();
                    let u = draw_open_unit(&mut rng);
                    let mut acc = 0.0;
                    let mut chosen = None;
                    for (len, j) in part.intervals() {
                        if j >= part.thresholds.len() {
                            continue;
                        }
                        acc += len * part.set_measures[j] / measure;
                        if u <= acc {
                            chosen = Some(j);
                            break;
                        }
                    }
                    // Round-off can leave acc marginally below 1; take the
                    // last positive-measure interval in that case.
                    let j = chosen.unwrap_or(part.thresholds.len() - 1);
                    // Record the interval midpoint: it reproduces the chosen
                    // set through evolve_step and stays inside (0,1).
                    let lo = if j == 0 { 0.0 } else { part.thresholds[j - 1] };
                    u_draws.push((lo + part.thresholds[j]) / 2.0);
                    StateSet::new(
                        chain,
                        part.states_sorted[part.suffix_start[j]..]
                            .iter()
                            .map(|&y| y as usize),
                    )
                }
            }
        };
        weights.push(next.measure() / base);
        sets.push(next);
    }
    Ok(EvolvingTrace { sets, u_draws, weights, mode })
}

/// Estimates `p^n(x,y)` as `(pi(y)/pi(x)) P(y in S_n)` over plain traces
/// started from `{x}`. Returns the estimate and its standard error.
pub fn estimate_transition(
    chain: &ChainKernel,
    x: usize,
    y: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    assert!(samples >= 1);
    let s0 = StateSet::new(chain, [x]);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut current = s0.clone();
        for _ in 0..n {
            if current.is_empty() || current.is_full() {
                break;
            }
            let part = Partition::build(chain, &current);
            let u = draw_open_unit(&mut rng);
            current = StateSet::new(chain, part.set_for(u).iter().map(|&v| v as usize));
        }
        if current.contains(y) {
            hits += 1;
        }
    }
    let ratio = chain.pi_of(y) / chain.pi_of(x);
    let p_hat = hits as f64 / samples as f64;
    let se = ratio * (p_hat * (1.0 - p_hat) / samples as f64).sqrt();
    (ratio * p_hat, se)
}

/// Trace dump (CSV): step, set (hex bitmask for n <= 64, comma-joined ids
/// otherwise), measure, weight, and the uniform consumed at that step (empty
/// on the final row).
pub fn write_trace_csv(trace: &EvolvingTrace, path: &Path) -> std::io::Result<()> {
    let mut out = String::from("step,set,measure,weight,u\n");
    for (k, set) in trace.sets.iter().enumerate() {
        let u = trace
            .u_draws
            .get(k)
            .map(|&u| crate::fmt_g17(u))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{k},{},{},{},{u}",
            set.label(),
            crate::fmt_g17(set.measure()),
            crate::fmt_g17(trace.weights[k]),
        );
    }
    std::fs::write(path, out)
}
