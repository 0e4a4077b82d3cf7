//! Finite Markov chains: validated transition kernels, state sets, time
//! reversal, lazification, and the stationary flow `Q(x,y) = pi(x) p(x,y)`.
//!
//! A [`ChainKernel`] is immutable once built. Construction normalizes rows,
//! checks strong connectivity of the support graph, and either validates a
//! supplied stationary vector or solves for it (dense LU for small chains,
//! power iteration beyond).

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::tol;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("row {row} is not stochastic (sum = {sum})")]
    NotStochastic { row: usize, sum: f64 },
    #[error("negative probability {p} at ({x},{y})")]
    NegativeEntry { x: usize, y: usize, p: f64 },
    #[error("support graph is not strongly connected")]
    Reducible,
    #[error("supplied stationary vector fails pi P = pi (max residual {residual})")]
    BadStationary { residual: f64 },
    #[error("stationary solve did not converge (residual {residual})")]
    StationaryNotConverged { residual: f64 },
    #[error("chain has no states")]
    Empty,
    #[error("chain file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An irreducible transition kernel together with its stationary distribution.
///
/// Invariants established at construction:
/// * every row sums to 1 within 1e-12;
/// * `pi` is strictly positive, sums to 1, and satisfies `pi P = pi`
///   componentwise within 1e-12;
/// * the support graph is strongly connected;
/// * `gamma == min_x p(x,x)` exactly as stored;
/// * `reversible` is true iff `pi(x)p(x,y) = pi(y)p(y,x)` within 1e-12
///   for every pair.
#[derive(Debug, Clone)]
pub struct ChainKernel {
    n: usize,
    rows: Vec<Vec<(u32, f64)>>,
    pi: Vec<f64>,
    gamma: f64,
    reversible: bool,
}

impl ChainKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Sparse row of state `x`, sorted by target id.
    pub fn row(&self, x: usize) -> &[(u32, f64)] {
        &self.rows[x]
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn pi_of(&self, x: usize) -> f64 {
        self.pi[x]
    }

    /// Smallest stationary mass, `pi_* = min_x pi(x)`.
    pub fn pi_star(&self) -> f64 {
        self.pi.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Minimum holding probability `min_x p(x,x)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        match self.rows[x].binary_search_by(|e| e.0.cmp(&(y as u32))) {
            Ok(i) => self.rows[x][i].1,
            Err(_) => 0.0,
        }
    }

    /// `Q(x,y) = pi(x) p(x,y)`.
    pub fn q(&self, x: usize, y: usize) -> f64 {
        self.pi[x] * self.p(x, y)
    }

    /// Builds a kernel directly from already-validated parts. Used by tests
    /// that need a deliberately degenerate (e.g. reducible) mock.
    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(rows: Vec<Vec<(u32, f64)>>, pi: Vec<f64>) -> Self {
        let gamma = diag_min(&rows);
        let reversible = check_reversible(&rows, &pi);
        ChainKernel { n: rows.len(), rows, pi, gamma, reversible }
    }
}

fn diag_min(rows: &[Vec<(u32, f64)>]) -> f64 {
    rows.iter()
        .enumerate()
        .map(|(x, row)| {
            row.iter()
                .find(|&&(y, _)| y as usize == x)
                .map_or(0.0, |&(_, p)| p)
        })
        .fold(f64::INFINITY, f64::min)
}

fn check_reversible(rows: &[Vec<(u32, f64)>], pi: &[f64]) -> bool {
    for (x, row) in rows.iter().enumerate() {
        for &(y, p) in row {
            let y = y as usize;
            let back = match rows[y].binary_search_by(|e| e.0.cmp(&(x as u32))) {
                Ok(i) => rows[y][i].1,
                Err(_) => 0.0,
            };
            if (pi[x] * p - pi[y] * back).abs() > tol::CONSTRUCT {
                return false;
            }
        }
    }
    true
}

/// Both-direction BFS reachability from state 0 on the support graph.
fn strongly_connected(rows: &[Vec<(u32, f64)>]) -> bool {
    let n = rows.len();
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (x, row) in rows.iter().enumerate() {
        for &(y, p) in row {
            if p > 0.0 {
                rev[y as usize].push(x as u32);
            }
        }
    }
    let bfs = |out: &dyn Fn(usize) -> Vec<usize>| -> bool {
        let mut seen = vec![false; n];
        let mut queue = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop() {
            for y in out(x) {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push(y);
                }
            }
        }
        count == n
    };
    bfs(&|x| rows[x].iter().filter(|e| e.1 > 0.0).map(|e| e.0 as usize).collect())
        && bfs(&|x| rev[x].iter().map(|&v| v as usize).collect())
}

fn solve_stationary(rows: &[Vec<(u32, f64)>]) -> Result<Vec<f64>, ChainError> {
    let n = rows.len();
    if n <= 2000 {
        // (P^T - I) x = 0 with the last equation replaced by sum(x) = 1.
        let mut a = DMatrix::<f64>::zeros(n, n);
        for (x, row) in rows.iter().enumerate() {
            for &(y, p) in row {
                a[(y as usize, x)] += p;
            }
            a[(x, x)] -= 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(n);
        b[n - 1] = 1.0;
        let lu = a.lu();
        let x = lu
            .solve(&b)
            .ok_or(ChainError::StationaryNotConverged { residual: f64::INFINITY })?;
        let pi: Vec<f64> = x.iter().cloned().collect();
        let residual = stationary_residual(rows, &pi);
        if residual > tol::CONSTRUCT || pi.iter().any(|&w| w <= 0.0) {
            return Err(ChainError::StationaryNotConverged { residual });
        }
        Ok(pi)
    } else {
        let mut v = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for _ in 0..500_000 {
            next.iter_mut().for_each(|e| *e = 0.0);
            for (x, row) in rows.iter().enumerate() {
                let w = v[x];
                for &(y, p) in row {
                    next[y as usize] += w * p;
                }
            }
            let sum: f64 = next.iter().sum();
            next.iter_mut().for_each(|e| *e /= sum);
            residual = v
                .iter()
                .zip(next.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            std::mem::swap(&mut v, &mut next);
            if residual <= 1e-13 {
                return Ok(v);
            }
        }
        Err(ChainError::StationaryNotConverged { residual })
    }
}

fn stationary_residual(rows: &[Vec<(u32, f64)>], pi: &[f64]) -> f64 {
    let n = rows.len();
    let mut out = vec![0.0; n];
    for (x, row) in rows.iter().enumerate() {
        for &(y, p) in row {
            out[y as usize] += pi[x] * p;
        }
    }
    out.iter()
        .zip(pi.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Builds and validates a [`ChainKernel`] from sparse stochastic rows.
///
/// Rows may carry up to 1e-9 of round-off in their sums; they are
/// renormalized exactly. When `pi` is omitted the stationary distribution is
/// solved for (dense LU for n <= 2000, power iteration beyond); when supplied
/// it is validated against `pi P = pi`.
pub fn build_chain(
    rows: Vec<Vec<(u32, f64)>>,
    pi: Option<Vec<f64>>,
) -> Result<ChainKernel, ChainError> {
    let n = rows.len();
    if n == 0 {
        return Err(ChainError::Empty);
    }
    let mut clean: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    for (x, row) in rows.into_iter().enumerate() {
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
        let mut sorted = row;
        sorted.sort_by_key(|e| e.0);
        for (y, p) in sorted {
            if p < 0.0 {
                return Err(ChainError::NegativeEntry { x, y: y as usize, p });
            }
            if y as usize >= n {
                return Err(ChainError::Parse(format!("target {y} out of range in row {x}")));
            }
            if p == 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.0 == y => last.1 += p,
                _ => merged.push((y, p)),
            }
        }
        let sum: f64 = merged.iter().map(|e| e.1).sum();
        if (sum - 1.0).abs() > tol::INPUT_ROW_SUM {
            return Err(ChainError::NotStochastic { row: x, sum });
        }
        for e in &mut merged {
            e.1 /= sum;
        }
        clean.push(merged);
    }
    if !strongly_connected(&clean) {
        return Err(ChainError::Reducible);
    }
    let pi = match pi {
        Some(mut supplied) => {
            if supplied.len() != n {
                return Err(ChainError::Parse("pi length mismatch".into()));
            }
            if supplied.iter().any(|&w| w <= 0.0) {
                return Err(ChainError::BadStationary { residual: f64::INFINITY });
            }
            let sum: f64 = supplied.iter().sum();
            supplied.iter_mut().for_each(|w| *w /= sum);
            let residual = stationary_residual(&clean, &supplied);
            if residual > tol::CONSTRUCT {
                return Err(ChainError::BadStationary { residual });
            }
            supplied
        }
        None => solve_stationary(&clean)?,
    };
    let gamma = diag_min(&clean);
    let reversible = check_reversible(&clean, &pi);
    Ok(ChainKernel { n, rows: clean, pi, gamma, reversible })
}

/// Time reversal: `p_rev(z,y) = pi(y) p(y,z) / pi(z)`; same stationary
/// distribution, same conductance profile, gamma recomputed.
pub fn time_reversal(chain: &ChainKernel) -> ChainKernel {
    let n = chain.n;
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (y, row) in chain.rows.iter().enumerate() {
        for &(z, p) in row {
            rows[z as usize].push((y as u32, chain.pi[y] * p / chain.pi[z as usize]));
        }
    }
    build_chain(rows, Some(chain.pi.clone())).expect("reversal of a valid chain is valid")
}

/// `(1 - beta) P + beta I`; stationary distribution unchanged.
///
/// Requires `0 <= beta < 1`.
pub fn lazify(chain: &ChainKernel, beta: f64) -> ChainKernel {
    assert!((0.0..1.0).contains(&beta), "beta must lie in [0,1)");
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(chain.n);
    for (x, row) in chain.rows.iter().enumerate() {
        let mut r: Vec<(u32, f64)> =
            row.iter().map(|&(y, p)| (y, (1.0 - beta) * p)).collect();
        match r.binary_search_by(|e| e.0.cmp(&(x as u32))) {
            Ok(i) => r[i].1 += beta,
            Err(i) => r.insert(i, (x as u32, beta)),
        }
        rows.push(r);
    }
    build_chain(rows, Some(chain.pi.clone())).expect("lazification of a valid chain is valid")
}

/// A subset of states with its stationary measure cached.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    n: usize,
    blocks: Box<[u64]>,
    measure: f64,
}

impl StateSet {
    pub fn new(chain: &ChainKernel, members: impl IntoIterator<Item = usize>) -> Self {
        let n = chain.n;
        let mut blocks = vec![0u64; n.div_ceil(64)].into_boxed_slice();
        for x in members {
            assert!(x < n, "state {x} out of range");
            blocks[x / 64] |= 1 << (x % 64);
        }
        let mut set = StateSet { n, blocks, measure: 0.0 };
        set.measure = set.iter().map(|x| chain.pi[x]).sum();
        set
    }

    /// Builds a set from a membership bitmask; only for chains with n <= 64.
    pub fn from_mask(chain: &ChainKernel, mask: u64) -> Self {
        assert!(chain.n <= 64);
        StateSet::new(chain, (0..chain.n).filter(|&x| mask >> x & 1 == 1))
    }

    pub fn empty(chain: &ChainKernel) -> Self {
        StateSet::new(chain, std::iter::empty())
    }

    pub fn full(chain: &ChainKernel) -> Self {
        StateSet::new(chain, 0..chain.n)
    }

    pub fn complement(&self, chain: &ChainKernel) -> Self {
        StateSet::new(chain, (0..self.n).filter(|&x| !self.contains(x)))
    }

    /// The normalization `S#`: `S` when `pi(S) <= 1/2`, the complement otherwise.
    pub fn sharp(&self, chain: &ChainKernel) -> Self {
        if self.measure <= 0.5 {
            self.clone()
        } else {
            self.complement(chain)
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.blocks[x / 64] >> (x % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.n
    }

    /// Cached `pi(S)`.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(i, &b)| {
            let mut rest = b;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let t = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(i * 64 + t)
                }
            })
        })
    }

    /// Membership bitmask for chains with n <= 64.
    pub fn mask64(&self) -> Option<u64> {
        (self.n <= 64).then(|| self.blocks.first().copied().unwrap_or(0))
    }

    /// Compact label: hex bitmask for n <= 64, comma-joined ids otherwise.
    pub fn label(&self) -> String {
        match self.mask64() {
            Some(mask) => format!("{mask:x}"),
            None => {
                let mut s = String::new();
                for (i, x) in self.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    let _ = write!(s, "{x}");
                }
                s
            }
        }
    }
}

/// `Q(S,A) = sum over s in S, a in A of pi(s) p(s,a)`.
pub fn q_flow(chain: &ChainKernel, s: &StateSet, a: &StateSet) -> f64 {
    s.iter()
        .map(|x| {
            let w = chain.pi[x];
            chain.rows[x]
                .iter()
                .filter(|&&(y, _)| a.contains(y as usize))
                .map(|&(_, p)| w * p)
                .sum::<f64>()
        })
        .sum()
}

/// `Q(S,y)` for a single target state.
pub fn q_flow_to(chain: &ChainKernel, s: &StateSet, y: usize) -> f64 {
    s.iter().map(|x| chain.q(x, y)).sum()
}

// ---------------------------------------------------------------------------
// Chain file format (TSV): `states <n>`, then `<x> <y> <p>` lines, then an
// optional `pi` block of `<x> <weight>` lines. 17 significant digits out.
// ---------------------------------------------------------------------------

pub fn write_chain_tsv(chain: &ChainKernel, path: &Path) -> Result<(), ChainError> {
    let mut out = String::new();
    let _ = writeln!(out, "states {}", chain.n);
    for (x, row) in chain.rows.iter().enumerate() {
        for &(y, p) in row {
            let _ = writeln!(out, "{x}\t{y}\t{}", crate::fmt_g17(p));
        }
    }
    let _ = writeln!(out, "pi");
    for (x, w) in chain.pi.iter().enumerate() {
        let _ = writeln!(out, "{x}\t{}", crate::fmt_g17(*w));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_chain_tsv(path: &Path) -> Result<ChainKernel, ChainError> {
    let text = std::fs::read_to_string(path)?;
    parse_chain_tsv(&text)
}

pub fn parse_chain_tsv(text: &str) -> Result<ChainKernel, ChainError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| ChainError::Parse("empty file".into()))?;
    let mut hp = header.split_whitespace();
    let n: usize = match (hp.next(), hp.next()) {
        (Some("states"), Some(v)) => v
            .parse()
            .map_err(|_| ChainError::Parse(format!("bad state count {v:?}")))?,
        _ => return Err(ChainError::Parse("expected header `states <n>`".into())),
    };
    if n == 0 {
        return Err(ChainError::Empty);
    }
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut pi: Option<Vec<f64>> = None;
    for line in lines {
        let trimmed = line.trim();
        if trimmed == "pi" {
            pi = Some(vec![f64::NAN; n]);
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match &mut pi {
            None => {
                if fields.len() != 3 {
                    return Err(ChainError::Parse(format!("bad edge line {trimmed:?}")));
                }
                let x: usize = fields[0]
                    .parse()
                    .map_err(|_| ChainError::Parse(format!("bad state {:?}", fields[0])))?;
                let y: u32 = fields[1]
                    .parse()
                    .map_err(|_| ChainError::Parse(format!("bad state {:?}", fields[1])))?;
                let p: f64 = fields[2]
                    .parse()
                    .map_err(|_| ChainError::Parse(format!("bad probability {:?}", fields[2])))?;
                if x >= n {
                    return Err(ChainError::Parse(format!("state {x} out of range")));
                }
                rows[x].push((y, p));
            }
            Some(weights) => {
                if fields.len() != 2 {
                    return Err(ChainError::Parse(format!("bad pi line {trimmed:?}")));
                }
                let x: usize = fields[0]
                    .parse()
                    .map_err(|_| ChainError::Parse(format!("bad state {:?}", fields[0])))?;
                let w: f64 = fields[1]
                    .parse()
                    .map_err(|_| ChainError::Parse(format!("bad weight {:?}", fields[1])))?;
                if x >= n {
                    return Err(ChainError::Parse(format!("state {x} out of range")));
                }
                weights[x] = w;
            }
        }
    }
    if let Some(weights) = &pi {
        if weights.iter().any(|w| w.is_nan()) {
            return Err(ChainError::Parse("pi block incomplete".into()));
        }
    }
    build_chain(rows, pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn c2() -> ChainKernel {
        build_chain(vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 0.5), (1, 0.5)]], None).unwrap()
    }

    pub(crate) fn c3() -> ChainKernel {
        let rows = (0..3)
            .map(|x| {
                vec![
                    (x as u32, 0.5),
                    (((x + 1) % 3) as u32, 0.25),
                    (((x + 2) % 3) as u32, 0.25),
                ]
            })
            .collect();
        build_chain(rows, None).unwrap()
    }

    #[test]
    fn c2_construction() {
        let c = c2();
        assert_abs_diff_eq!(c.pi_of(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.pi_of(1), 0.5, epsilon = 1e-15);
        assert_eq!(c.gamma(), 0.5);
        assert!(c.is_reversible());
    }

    #[test]
    fn c3_construction() {
        let c = c3();
        for x in 0..3 {
            assert_abs_diff_eq!(c.pi_of(x), 1.0 / 3.0, epsilon = 1e-14);
        }
        assert_eq!(c.gamma(), 0.5);
    }

    #[test]
    fn identity_kernel_is_reducible() {
        let err = build_chain(vec![vec![(0, 1.0)], vec![(1, 1.0)]], None).unwrap_err();
        assert!(matches!(err, ChainError::Reducible));
    }

    #[test]
    fn bad_row_sum_rejected() {
        let err = build_chain(vec![vec![(0, 0.5), (1, 0.6)], vec![(0, 1.0)]], None).unwrap_err();
        assert!(matches!(err, ChainError::NotStochastic { .. }));
    }

    #[test]
    fn bad_supplied_pi_rejected() {
        let rows = vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 0.25), (1, 0.75)]];
        let err = build_chain(rows, Some(vec![0.5, 0.5])).unwrap_err();
        assert!(matches!(err, ChainError::BadStationary { .. }));
    }

    #[test]
    fn reversal_fixes_reversible_chains() {
        let c = c2();
        let r = time_reversal(&c);
        for x in 0..2 {
            for y in 0..2 {
                assert_abs_diff_eq!(c.p(x, y), r.p(x, y), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn reversal_of_deterministic_cycle() {
        let rows = vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(0, 1.0)]];
        let c = build_chain(rows, None).unwrap();
        let r = time_reversal(&c);
        assert_abs_diff_eq!(r.p(1, 0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.p(0, 2), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.p(2, 1), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn double_reversal_restores_random_chain() {
        let c = crate::bench::random_chain(5, 0.05, 0.9, 99).unwrap();
        let rr = time_reversal(&time_reversal(&c));
        for x in 0..5 {
            for y in 0..5 {
                assert_abs_diff_eq!(c.p(x, y), rr.p(x, y), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn lazify_cases() {
        let c = c3();
        let same = lazify(&c, 0.0);
        for x in 0..3 {
            for y in 0..3 {
                assert_abs_diff_eq!(c.p(x, y), same.p(x, y), epsilon = 1e-15);
            }
        }
        let lz = lazify(&c, 0.5);
        assert_abs_diff_eq!(lz.gamma(), 0.75, epsilon = 1e-15);
        for (a, b) in c.pi().iter().zip(lz.pi()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }

        let cyc = build_chain(vec![vec![(1, 1.0)], vec![(0, 1.0)]], None).unwrap();
        let lzc = lazify(&cyc, 0.5);
        for x in 0..2 {
            for y in 0..2 {
                assert_abs_diff_eq!(lzc.p(x, y), 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn q_flow_examples() {
        let c = c2();
        let s = StateSet::new(&c, [0]);
        let a = StateSet::new(&c, [1]);
        assert_abs_diff_eq!(q_flow(&c, &s, &a), 0.25, epsilon = 1e-15);

        let c = c3();
        let s = StateSet::new(&c, [0, 1]);
        let a = StateSet::new(&c, [2]);
        assert_abs_diff_eq!(q_flow(&c, &s, &a), 1.0 / 6.0, epsilon = 1e-15);
        // Q(V, y) = pi(y) by stationarity.
        let v = StateSet::full(&c);
        for y in 0..3 {
            assert_abs_diff_eq!(q_flow_to(&c, &v, y), c.pi_of(y), epsilon = 1e-12);
        }
    }

    #[test]
    fn state_set_basics() {
        let c = c3();
        let s = StateSet::new(&c, [0, 2]);
        assert!(s.contains(0) && !s.contains(1) && s.contains(2));
        assert_abs_diff_eq!(s.measure(), 2.0 / 3.0, epsilon = 1e-14);
        let cc = s.complement(&c).complement(&c);
        assert_eq!(s, cc);
        assert_eq!(s.sharp(&c), s.complement(&c));
        assert_eq!(s.label(), "5");
    }

    #[test]
    fn tsv_round_trip() {
        let dir = std::env::temp_dir().join("evoset_chain_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c3.tsv");
        let c = crate::bench::random_chain(6, 0.1, 0.8, 7).unwrap();
        write_chain_tsv(&c, &path).unwrap();
        let back = read_chain_tsv(&path).unwrap();
        assert_eq!(back.n(), c.n());
        for x in 0..c.n() {
            for y in 0..c.n() {
                assert_abs_diff_eq!(c.p(x, y), back.p(x, y), epsilon = 1e-15);
            }
            assert_abs_diff_eq!(c.pi_of(x), back.pi_of(x), epsilon = 1e-15);
        }
        assert_eq!(back.gamma(), c.gamma());
    }
}
