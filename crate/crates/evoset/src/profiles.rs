//! Conductance-style profiles: step functions `r -> inf{ gauge(S) : pi(S) <= r }`.
//!
//! The profile of a gauge is stored as the exact lower envelope over the
//! distinct set measures, i.e. a staircase keyed by the measures at which the
//! running infimum drops. Values are constant past r = 1/2 (the tail rule).
//!
//! Three construction methods:
//! * `Enumerate` — exact infimum over all subsets (Gray-code sweep, up to 24
//!   states; nothing is stored per subset, only the envelope);
//! * `Family` — the same envelope restricted to a supplied set family, an
//!   upper bound on the true profile;
//! * `MonteCarlo` — greedy connected set growth from random seeds, also an
//!   upper estimate.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{ChainKernel, StateSet};
use crate::tol;

/// Exact profile enumeration sweeps all subsets; feasible through 24 states.
/// (The subset-space kernel keeps the lower limit of 20 because it stores
/// every row; the sweep here stores only the envelope.)
pub const PROFILE_ENUM_MAX: usize = 24;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("exact enumeration limited to {PROFILE_ENUM_MAX} states (got {0})")]
    TooLarge(usize),
    #[error("set family contains no proper nonempty set of measure <= 1/2")]
    EmptyFamily,
    #[error("gauge {0} vanished on some set; chain is effectively reducible")]
    ZeroGauge(Gauge),
    #[error("profile undefined below its floor: r = {r}, floor = {floor}")]
    BelowFloor { r: f64, floor: f64 },
    #[error("profile file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    Phi,
    Psi,
    Theta,
    PsiRestricted,
}

impl Gauge {
    pub fn name(self) -> &'static str {
        match self {
            Gauge::Phi => "phi",
            Gauge::Psi => "psi",
            Gauge::Theta => "theta",
            Gauge::PsiRestricted => "psi_restricted",
        }
    }

    pub fn parse(s: &str) -> Option<Gauge> {
        match s {
            "phi" => Some(Gauge::Phi),
            "psi" => Some(Gauge::Psi),
            "theta" => Some(Gauge::Theta),
            "psi_restricted" => Some(Gauge::PsiRestricted),
            _ => None,
        }
    }
}

impl std::fmt::Display for Gauge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Family,
    MonteCarlo,
    Analytic,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Family => "family",
            Provenance::MonteCarlo => "monte-carlo",
            Provenance::Analytic => "analytic",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        match s {
            "exact" => Some(Provenance::Exact),
            "family" => Some(Provenance::Family),
            "monte-carlo" => Some(Provenance::MonteCarlo),
            "analytic" => Some(Provenance::Analytic),
            _ => None,
        }
    }
}

#[derive(Clone, Copy)]
pub enum ProfileMethod<'a> {
    Enumerate,
    Family(&'a [StateSet]),
    MonteCarlo { samples: usize, seed: u64 },
}

/// A monotone nonincreasing step function with exact breakpoints.
///
/// `points[i] = (r_i, v_i)` gives the value `v_i` on `[r_i, r_{i+1})`; the
/// last value extends as `tail_value` beyond the final breakpoint (profiles
/// are constant past r = 1/2). `floor` is the start of the domain, the
/// smallest measure any contributing set had.
#[derive(Debug, Clone)]
pub struct StepFunctionProfile {
    gauge: Gauge,
    points: Vec<(f64, f64)>,
    tail_value: f64,
    floor: f64,
    provenance: Provenance,
}

impl StepFunctionProfile {
    pub fn new(
        gauge: Gauge,
        points: Vec<(f64, f64)>,
        provenance: Provenance,
    ) -> Result<Self, ProfileError> {
        if points.is_empty() {
            return Err(ProfileError::EmptyFamily);
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(ProfileError::Parse(format!(
                    "breakpoints not strictly increasing at r = {}",
                    w[1].0
                )));
            }
            if w[1].1 > w[0].1 {
                return Err(ProfileError::Parse(format!(
                    "values increase at r = {}: profile must be nonincreasing",
                    w[1].0
                )));
            }
        }
        if points.iter().any(|&(_, v)| v <= 0.0) {
            return Err(ProfileError::ZeroGauge(gauge));
        }
        let floor = points[0].0;
        let tail_value = points.last().unwrap().1;
        Ok(StepFunctionProfile { gauge, points, tail_value, floor, provenance })
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn tail_value(&self) -> f64 {
        self.tail_value
    }

    /// Domain start; `pi_*` for enumerated profiles.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// The profile infimum, i.e. the value at r = 1/2 and beyond
    /// (`Phi_*`, `psi_*`, `h_2^+` depending on the gauge).
    pub fn star(&self) -> f64 {
        self.tail_value
    }

    /// Profile CSV: a metadata line, then `r,value` rows ascending in r,
    /// all floats with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<(), ProfileError> {
        let mut out = String::from("gauge,floor,tail,provenance\n");
        let _ = writeln!(
            out,
            "{},{},{},{}",
            self.gauge.name(),
            crate::fmt_g17(self.floor),
            crate::fmt_g17(self.tail_value),
            self.provenance.name()
        );
        out.push_str("r,value\n");
        for &(r, v) in &self.points {
            let _ = writeln!(out, "{},{}", crate::fmt_g17(r), crate::fmt_g17(v));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self, ProfileError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| ProfileError::Parse("empty file".into()))?;
        if head.trim() != "gauge,floor,tail,provenance" {
            return Err(ProfileError::Parse(format!("bad metadata header {head:?}")));
        }
        let meta = lines.next().ok_or_else(|| ProfileError::Parse("missing metadata".into()))?;
        let fields: Vec<&str> = meta.trim().split(',').collect();
        if fields.len() != 4 {
            return Err(ProfileError::Parse(format!("bad metadata line {meta:?}")));
        }
        let gauge = Gauge::parse(fields[0])
            .ok_or_else(|| ProfileError::Parse(format!("unknown gauge {:?}", fields[0])))?;
        let floor: f64 = fields[1]
            .parse()
            .map_err(|_| ProfileError::Parse(format!("bad floor {:?}", fields[1])))?;
        let tail: f64 = fields[2]
            .parse()
            .map_err(|_| ProfileError::Parse(format!("bad tail {:?}", fields[2])))?;
        let provenance = Provenance::parse(fields[3])
            .ok_or_else(|| ProfileError::Parse(format!("unknown provenance {:?}", fields[3])))?;
        let rows = lines.next().ok_or_else(|| ProfileError::Parse("missing rows header".into()))?;
        if rows.trim() != "r,value" {
            return Err(ProfileError::Parse(format!("bad rows header {rows:?}")));
        }
        let mut points = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 2 {
                return Err(ProfileError::Parse(format!("bad row {line:?}")));
            }
            let r: f64 = fields[0]
                .parse()
                .map_err(|_| ProfileError::Parse(format!("bad r {:?}", fields[0])))?;
            let v: f64 = fields[1]
                .parse()
                .map_err(|_| ProfileError::Parse(format!("bad value {:?}", fields[1])))?;
            points.push((r, v));
        }
        let profile = Self::new(gauge, points, provenance)?;
        if (profile.floor - floor).abs() > 1e-12 || (profile.tail_value - tail).abs() > 1e-12 {
            return Err(ProfileError::Parse(
                "metadata floor/tail do not match the staircase".into(),
            ));
        }
        Ok(profile)
    }
}

/// Step-function evaluation with the constant tail.
pub fn profile_query(profile: &StepFunctionProfile, r: f64) -> Result<f64, ProfileError> {
    if r + 1e-15 < profile.floor {
        return Err(ProfileError::BelowFloor { r, floor: profile.floor });
    }
    let idx = profile.points.partition_point(|&(ri, _)| ri <= r);
    if idx == 0 {
        // r within 1e-15 below the first breakpoint: closed left endpoint.
        Ok(profile.points[0].1)
    } else if idx == profile.points.len() {
        Ok(profile.tail_value)
    } else {
        Ok(profile.points[idx - 1].1)
    }
}

/// `Phi(r) = inf{ Q(S,S^c)/pi(S) : pi(S) <= r }`.
pub fn conductance_profile(
    chain: &ChainKernel,
    method: ProfileMethod,
) -> Result<StepFunctionProfile, ProfileError> {
    gauge_profile(chain, Gauge::Phi, method)
}

/// `psi(r) = inf{ psi(S) : pi(S) <= r }`, the root profile.
pub fn root_profile(
    chain: &ChainKernel,
    method: ProfileMethod,
) -> Result<StepFunctionProfile, ProfileError> {
    gauge_profile(chain, Gauge::Psi, method)
}

/// Profile of the square-root boundary gauge theta.
pub fn theta_profile(
    chain: &ChainKernel,
    method: ProfileMethod,
) -> Result<StepFunctionProfile, ProfileError> {
    gauge_profile(chain, Gauge::Theta, method)
}

/// `h_2^+ = inf{ theta_S : pi(S) <= 1/2 }`.
pub fn h2_plus(chain: &ChainKernel, method: ProfileMethod) -> Result<f64, ProfileError> {
    Ok(theta_profile(chain, method)?.star())
}

pub fn gauge_profile(
    chain: &ChainKernel,
    gauge: Gauge,
    method: ProfileMethod,
) -> Result<StepFunctionProfile, ProfileError> {
    let (envelope, provenance) = match method {
        ProfileMethod::Enumerate => (enumerate_envelope(chain, gauge)?, Provenance::Exact),
        ProfileMethod::Family(sets) => (family_envelope(chain, gauge, sets)?, Provenance::Family),
        ProfileMethod::MonteCarlo { samples, seed } => {
            (monte_carlo_envelope(chain, gauge, samples, seed)?, Provenance::MonteCarlo)
        }
    };
    let reported = match (gauge, provenance) {
        (Gauge::Psi, Provenance::Family) => Gauge::PsiRestricted,
        (g, _) => g,
    };
    envelope_to_profile(reported, envelope, provenance)
}

fn envelope_to_profile(
    gauge: Gauge,
    envelope: BTreeMap<u64, f64>,
    provenance: Provenance,
) -> Result<StepFunctionProfile, ProfileError> {
    if envelope.is_empty() {
        return Err(ProfileError::EmptyFamily);
    }
    // Compress to the strictly dropping staircase, absorbing float noise:
    // measures within 1e-13 are one breakpoint, and a value counts as a drop
    // only beyond a relative 1e-13. Keeps e.g. a chain and its reversal, or
    // symmetric states with solver-level measure differences, structurally
    // identical.
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (bits, v) in envelope {
        let r = f64::from_bits(bits);
        match points.last_mut() {
            None => points.push((r, v)),
            Some(last) => {
                if r - last.0 <= 1e-13 {
                    if v < last.1 {
                        last.1 = v;
                    }
                } else if v < last.1 * (1.0 - 1e-13) {
                    points.push((r, v));
                }
            }
        }
    }
    StepFunctionProfile::new(gauge, points, provenance)
}

/// Canonical set measure: stationary masses summed in ascending state order,
/// so the same subset always produces bit-identical keys.
fn canonical_measure(pi: &[f64], mask: u32) -> f64 {
    let mut rest = mask;
    let mut acc = 0.0;
    while rest != 0 {
        let x = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        acc += pi[x];
    }
    acc
}

struct GaugeScratch {
    q: Vec<f64>,
    ratios: Vec<(f64, f64)>,
    suffix: Vec<f64>,
}

fn gauge_value(
    chain: &ChainKernel,
    gauge: Gauge,
    mask: u32,
    q: &[f64],
    r: f64,
    scratch: &mut Vec<(f64, f64)>,
    suffix: &mut Vec<f64>,
) -> f64 {
    let pi = chain.pi();
    match gauge {
        Gauge::Phi => {
            let mut boundary = 0.0;
            for (y, &qy) in q.iter().enumerate() {
                if mask >> y & 1 == 0 {
                    boundary += qy;
                }
            }
            boundary / r
        }
        Gauge::Psi | Gauge::PsiRestricted => {
            scratch.clear();
            for (y, &qy) in q.iter().enumerate() {
                if qy > 0.0 {
                    scratch.push((qy / pi[y], pi[y]));
                }
            }
            scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            suffix.clear();
            suffix.resize(scratch.len(), 0.0);
            let mut acc = 0.0;
            for i in (0..scratch.len()).rev() {
                acc += scratch[i].1;
                suffix[i] = acc;
            }
            let mut expectation = 0.0;
            let mut prev_t = 0.0;
            for i in 0..scratch.len() {
                let t = scratch[i].0;
                if i > 0 && t - prev_t <= tol::BREAKPOINT_DEDUP {
                    continue;
                }
                expectation += (t - prev_t) * (suffix[i] / r).sqrt();
                prev_t = t;
            }
            1.0 - expectation
        }
        Gauge::Theta => {
            let mut rest = mask;
            let mut sum = 0.0;
            while rest != 0 {
                let y = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                sum += (pi[y] * (pi[y] - q[y]).max(0.0)).sqrt();
            }
            sum / r
        }
    }
}

/// Exact envelope by a partitioned Gray-code sweep over all subsets.
///
/// Each rayon task owns a block of high bits and walks the low bits in Gray
/// order, maintaining `Q(S, .)` incrementally (one sparse row per toggle) and
/// recomputing the measure canonically per subset. Partition-local envelopes
/// merge by pointwise minimum, so the result is deterministic.
fn enumerate_envelope(
    chain: &ChainKernel,
    gauge: Gauge,
) -> Result<BTreeMap<u64, f64>, ProfileError> {
    let n = chain.n();
    if n > PROFILE_ENUM_MAX {
        return Err(ProfileError::TooLarge(n));
    }
    let low = n.min(16);
    let high_count = 1u32 << (n - low);
    let low_count = 1u32 << low;
    let full = (1u64 << n) - 1;

    let maps: Vec<BTreeMap<u64, f64>> = (0..high_count)
        .into_par_iter()
        .map(|high| {
            let mut env: BTreeMap<u64, f64> = BTreeMap::new();
            let mut scratch = GaugeScratch {
                q: vec![0.0; n],
                ratios: Vec::with_capacity(n),
                suffix: Vec::with_capacity(n),
            };
            let base = high << low;
            // Seed Q(S, .) for the partition's base subset.
            scratch.q.iter_mut().for_each(|e| *e = 0.0);
            let mut rest = base;
            while rest != 0 {
                let x = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let w = chain.pi_of(x);
                for &(y, p) in chain.row(x) {
                    scratch.q[y as usize] += w * p;
                }
            }
            let mut mask = base;
            let consider = |mask: u32, scratch: &mut GaugeScratch, env: &mut BTreeMap<u64, f64>| {
                if mask == 0 || u64::from(mask) == full {
                    return;
                }
                let r = canonical_measure(chain.pi(), mask);
                if r > 0.5 + tol::HALF_SLACK {
                    return;
                }
                let v = gauge_value(chain, gauge, mask, &scratch.q, r, &mut scratch.ratios, &mut scratch.suffix);
                env.entry(r.to_bits())
                    .and_modify(|cur| *cur = cur.min(v))
                    .or_insert(v);
            };
            consider(mask, &mut scratch, &mut env);
            for i in 1..low_count {
                let bit = i.trailing_zeros() as usize;
                let x = bit;
                let entering = mask >> x & 1 == 0;
                let w = chain.pi_of(x);
                if entering {
                    for &(y, p) in chain.row(x) {
                        scratch.q[y as usize] += w * p;
                    }
                    mask |= 1 << x;
                } else {
                    for &(y, p) in chain.row(x) {
                        scratch.q[y as usize] -= w * p;
                    }
                    mask &= !(1 << x);
                }
                consider(mask, &mut scratch, &mut env);
            }
            env
        })
        .collect();

    let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
    for map in maps {
        for (k, v) in map {
            merged.entry(k).and_modify(|cur| *cur = cur.min(v)).or_insert(v);
        }
    }
    Ok(merged)
}

fn family_envelope(
    chain: &ChainKernel,
    gauge: Gauge,
    sets: &[StateSet],
) -> Result<BTreeMap<u64, f64>, ProfileError> {
    let mut env: BTreeMap<u64, f64> = BTreeMap::new();
    for s in sets {
        if s.is_empty() || s.is_full() {
            return Err(ProfileError::EmptyFamily);
        }
        let r = s.measure();
        if r > 0.5 + tol::HALF_SLACK {
            continue;
        }
        let v = match gauge {
            Gauge::Phi => crate::q_flow(chain, s, &s.complement(chain)) / r,
            Gauge::Psi | Gauge::PsiRestricted => crate::psi(chain, s),
            Gauge::Theta => crate::theta(chain, s),
        };
        if v <= 0.0 {
            return Err(ProfileError::ZeroGauge(gauge));
        }
        env.entry(r.to_bits()).and_modify(|cur| *cur = cur.min(v)).or_insert(v);
    }
    if env.is_empty() {
        return Err(ProfileError::EmptyFamily);
    }
    Ok(env)
}

/// Greedy isoperimetric growth: from a random start vertex, repeatedly add
/// the adjacent vertex that minimizes the conductance of the grown set, and
/// record every prefix. A heuristic upper estimate, clearly labeled as such.
fn monte_carlo_envelope(
    chain: &ChainKernel,
    gauge: Gauge,
    samples: usize,
    seed: u64,
) -> Result<BTreeMap<u64, f64>, ProfileError> {
    let n = chain.n();
    let pi = chain.pi();
    // Undirected support adjacency.
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for x in 0..n {
        for &(y, p) in chain.row(x) {
            if p > 0.0 && y as usize != x {
                adj[x].push(y);
                adj[y as usize].push(x as u32);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut env: BTreeMap<u64, f64> = BTreeMap::new();
    let mut scratch = Vec::with_capacity(n);
    let mut suffix = Vec::with_capacity(n);

    for _ in 0..samples.max(1) {
        let start = rng.gen_range(0..n);
        let mut members = vec![false; n];
        let mut member_list: Vec<usize> = Vec::new();
        let mut q = vec![0.0; n];
        let mut r = 0.0;
        let mut boundary_flow = 0.0;
        let mut frontier: Vec<usize> = Vec::new();

        let add_vertex = |x: usize,
                              members: &mut Vec<bool>,
                              member_list: &mut Vec<usize>,
                              q: &mut Vec<f64>,
                              r: &mut f64,
                              boundary_flow: &mut f64,
                              frontier: &mut Vec<usize>| {
            // New boundary flow, before q is updated.
            let mut out_of_set = 0.0;
            for &(y, p) in chain.row(x) {
                if y as usize != x && !members[y as usize] {
                    out_of_set += pi[x] * p;
                }
            }
            *boundary_flow = *boundary_flow - q[x] + out_of_set;
            for &(y, p) in chain.row(x) {
                q[y as usize] += pi[x] * p;
            }
            *r += pi[x];
            members[x] = true;
            member_list.push(x);
            frontier.retain(|&v| v != x);
            for &y in &adj[x] {
                if !members[y as usize] && !frontier.contains(&(y as usize)) {
                    frontier.push(y as usize);
                }
            }
        };

        add_vertex(start, &mut members, &mut member_list, &mut q, &mut r, &mut boundary_flow, &mut frontier);

        loop {
            if r > 0.5 + tol::HALF_SLACK || member_list.len() >= n - 1 {
                break;
            }
            // Record the current prefix.
            let mask_measure = {
                let mut acc = 0.0;
                let mut sorted: Vec<usize> = member_list.clone();
                sorted.sort_unstable();
                for &x in &sorted {
                    acc += pi[x];
                }
                acc
            };
            if mask_measure <= 0.5 + tol::HALF_SLACK {
                let v = match gauge {
                    Gauge::Phi => boundary_flow / mask_measure,
                    Gauge::Psi | Gauge::PsiRestricted => {
                        gauge_psi_from_q(&q, pi, mask_measure, &mut scratch, &mut suffix)
                    }
                    Gauge::Theta => {
                        let sum: f64 = member_list
                            .iter()
                            .map(|&y| (pi[y] * (pi[y] - q[y]).max(0.0)).sqrt())
                            .sum();
                        sum / mask_measure
                    }
                };
                if v <= 0.0 {
                    return Err(ProfileError::ZeroGauge(gauge));
                }
                env.entry(mask_measure.to_bits())
                    .and_modify(|cur| *cur = cur.min(v))
                    .or_insert(v);
            }
            // Greedy step: candidate minimizing the conductance of the grown set.
            let mut best: Option<(f64, usize)> = None;
            for &w in &frontier {
                let mut out_of_set = 0.0;
                for &(y, p) in chain.row(w) {
                    if y as usize != w && !members[y as usize] {
                        out_of_set += pi[w] * p;
                    }
                }
                let new_flow = boundary_flow - q[w] + out_of_set;
                let new_phi = new_flow / (r + pi[w]);
                let better = match best {
                    None => true,
                    Some((phi, v)) => new_phi < phi - 1e-15 || (new_phi < phi + 1e-15 && w < v),
                };
                if better {
                    best = Some((new_phi, w));
                }
            }
            match best {
                Some((_, w)) => add_vertex(w, &mut members, &mut member_list, &mut q, &mut r, &mut boundary_flow, &mut frontier),
                None => break,
            }
        }
    }
    if env.is_empty() {
        return Err(ProfileError::EmptyFamily);
    }
    Ok(env)
}

fn gauge_psi_from_q(
    q: &[f64],
    pi: &[f64],
    r: f64,
    scratch: &mut Vec<(f64, f64)>,
    suffix: &mut Vec<f64>,
) -> f64 {
    scratch.clear();
    for (y, &qy) in q.iter().enumerate() {
        if qy > 0.0 {
            scratch.push((qy / pi[y], pi[y]));
        }
    }
    scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
    suffix.clear();
    suffix.resize(scratch.len(), 0.0);
    let mut acc = 0.0;
    for i in (0..scratch.len()).rev() {
        acc += scratch[i].1;
        suffix[i] = acc;
    }
    let mut expectation = 0.0;
    let mut prev_t = 0.0;
    for i in 0..scratch.len() {
        let t = scratch[i].0;
        if i > 0 && t - prev_t <= tol::BREAKPOINT_DEDUP {
            continue;
        }
        expectation += (t - prev_t) * (suffix[i] / r).sqrt();
        prev_t = t;
    }
    1.0 - expectation
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{hypercube, lazy_cycle, random_chain};
    use approx::assert_abs_diff_eq;

    #[test]
    fn c2_and_c3_phi_profiles() {
        let c2 = lazy_cycle(2).unwrap();
        let p = conductance_profile(&c2, ProfileMethod::Enumerate).unwrap();
        assert_eq!(p.points().len(), 1);
        assert_abs_diff_eq!(p.points()[0].0, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.points()[0].1, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.tail_value(), 0.5, epsilon = 1e-15);

        let c3 = lazy_cycle(3).unwrap();
        let p = conductance_profile(&c3, ProfileMethod::Enumerate).unwrap();
        assert_eq!(p.points().len(), 1);
        assert_abs_diff_eq!(p.points()[0].0, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.points()[0].1, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn c2_and_c3_root_profiles() {
        let c2 = lazy_cycle(2).unwrap();
        let p = root_profile(&c2, ProfileMethod::Enumerate).unwrap();
        assert_eq!(p.points().len(), 1);
        assert_abs_diff_eq!(p.points()[0].1, 1.0 - 2f64.sqrt() / 2.0, epsilon = 1e-14);

        let c3 = lazy_cycle(3).unwrap();
        let p = root_profile(&c3, ProfileMethod::Enumerate).unwrap();
        assert_abs_diff_eq!(p.points()[0].0, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.points()[0].1, 1.0 - (3f64.sqrt() + 1.0) / 4.0, epsilon = 1e-14);
    }

    #[test]
    fn h2_plus_examples() {
        let c3 = lazy_cycle(3).unwrap();
        assert_abs_diff_eq!(
            h2_plus(&c3, ProfileMethod::Enumerate).unwrap(),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-14
        );
        let c2 = lazy_cycle(2).unwrap();
        assert_abs_diff_eq!(
            h2_plus(&c2, ProfileMethod::Enumerate).unwrap(),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn h2_plus_dominates_phi_star_on_reversible_chains() {
        for seed in 0..20 {
            let c = crate::bench::random_reversible_chain(7, seed).unwrap();
            let h2 = h2_plus(&c, ProfileMethod::Enumerate).unwrap();
            let phi = conductance_profile(&c, ProfileMethod::Enumerate).unwrap();
            assert!(h2 >= phi.star() - 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn query_semantics() {
        let c3 = lazy_cycle(3).unwrap();
        let p = conductance_profile(&c3, ProfileMethod::Enumerate).unwrap();
        assert_abs_diff_eq!(profile_query(&p, 0.4).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(profile_query(&p, 10.0).unwrap(), p.tail_value(), epsilon = 1e-15);
        assert_abs_diff_eq!(profile_query(&p, p.floor()).unwrap(), p.points()[0].1, epsilon = 1e-15);
        assert!(matches!(
            profile_query(&p, 0.1),
            Err(ProfileError::BelowFloor { .. })
        ));
    }

    #[test]
    fn reversal_preserves_phi_profile() {
        for seed in 0..20 {
            let c = random_chain(7, 0.1, 0.8, seed).unwrap();
            let p = conductance_profile(&c, ProfileMethod::Enumerate).unwrap();
            let rp = conductance_profile(&crate::time_reversal(&c), ProfileMethod::Enumerate).unwrap();
            assert_eq!(p.points().len(), rp.points().len(), "seed {seed}");
            for (a, b) in p.points().iter().zip(rp.points()) {
                assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-12);
                assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn profiles_are_nonincreasing() {
        for seed in 0..10 {
            let c = random_chain(8, 0.1, 0.8, seed).unwrap();
            for gauge in [Gauge::Phi, Gauge::Psi, Gauge::Theta] {
                let p = gauge_profile(&c, gauge, ProfileMethod::Enumerate).unwrap();
                for w in p.points().windows(2) {
                    assert!(w[1].1 <= w[0].1);
                }
            }
        }
    }

    #[test]
    fn family_profile_dominates_exact() {
        let (c, family) = hypercube(4).unwrap();
        let exact = conductance_profile(&c, ProfileMethod::Enumerate).unwrap();
        let fam = conductance_profile(&c, ProfileMethod::Family(&family)).unwrap();
        for &(r, v) in fam.points() {
            let below = profile_query(&exact, r).unwrap();
            assert!(v >= below - 1e-12, "family value {v} below exact {below} at r = {r}");
        }
        // Restricted psi gets the dedicated gauge tag.
        let fam_psi = root_profile(&c, ProfileMethod::Family(&family)).unwrap();
        assert_eq!(fam_psi.gauge(), Gauge::PsiRestricted);
    }

    #[test]
    fn psi_profile_dominates_half_phi_squared_for_lazy_chains() {
        for seed in 0..10 {
            let c = crate::lazify(&random_chain(7, 0.1, 0.8, seed).unwrap(), 0.5);
            let phi = conductance_profile(&c, ProfileMethod::Enumerate).unwrap();
            let psi = root_profile(&c, ProfileMethod::Enumerate).unwrap();
            for &(r, v) in psi.points() {
                let base = profile_query(&phi, r).unwrap();
                assert!(v >= base * base / 2.0 - 1e-12, "seed {seed} r {r}");
            }
        }
    }

    #[test]
    fn monte_carlo_is_upper_estimate() {
        let (c, _) = hypercube(4).unwrap();
        let exact = conductance_profile(&c, ProfileMethod::Enumerate).unwrap();
        let mc = conductance_profile(&c, ProfileMethod::MonteCarlo { samples: 8, seed: 3 }).unwrap();
        assert_eq!(mc.provenance(), Provenance::MonteCarlo);
        for &(r, v) in mc.points() {
            let below = profile_query(&exact, r).unwrap();
            assert!(v >= below - 1e-12);
        }
    }

    #[test]
    fn too_large_for_enumeration() {
        let (c, _) = hypercube(5).unwrap();
        assert!(matches!(
            conductance_profile(&c, ProfileMethod::Enumerate),
            Err(ProfileError::TooLarge(32))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let c3 = lazy_cycle(3).unwrap();
        let p = root_profile(&c3, ProfileMethod::Enumerate).unwrap();
        let dir = std::env::temp_dir().join("evoset_profile_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c3_psi.csv");
        p.write_csv(&path).unwrap();
        let back = StepFunctionProfile::read_csv(&path).unwrap();
        assert_eq!(back.gauge(), p.gauge());
        assert_eq!(back.provenance(), p.provenance());
        assert_eq!(back.points(), p.points());
        assert_eq!(back.tail_value(), p.tail_value());
    }

    #[test]
    fn hamming_ball_psi_scaling() {
        // psi_E(r) >= (c/n) log(1/r) with a stable fitted constant.
        let mut constants = Vec::new();
        for n in 6..=10 {
            let (c, family) = hypercube(n).unwrap();
            let p = root_profile(&c, ProfileMethod::Family(&family)).unwrap();
            let mut fitted = f64::INFINITY;
            for &(r, v) in p.points() {
                if r < 0.5 {
                    fitted = fitted.min(n as f64 * v / (1.0 / r).ln());
                }
            }
            assert!(fitted > 0.0);
            constants.push(fitted);
        }
        let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = constants.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo <= 2.0, "fitted constants {constants:?}");
    }
}
