//! Benchmark chain generators: lazy boxes (with holes), percolation
//! clusters, lamplighter cycles, hypercubes, cliques, and two expanders
//! joined by a single edge, plus seeded random chains for test corpora.
//!
//! Every generator returns a fully validated [`ChainKernel`] with its
//! stationary distribution supplied explicitly, and is a pure function of
//! its parameters and seed.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::chain::{build_chain, ChainError, ChainKernel, StateSet};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("grid is disconnected after removing holes")]
    Disconnected,
    #[error("largest percolation component has fewer than 2 vertices")]
    NoGiantComponent,
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("bad degree: {0}")]
    BadDegree(String),
    #[error("state space too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Lazy walk on the n-cycle: hold 1/2, step 1/4 each way. The 2- and
/// 3-cycles are the standing small examples.
pub fn lazy_cycle(n: usize) -> Result<ChainKernel, BenchError> {
    if n < 2 {
        return Err(BenchError::BadParameter("cycle needs n >= 2".into()));
    }
    let rows = (0..n)
        .map(|x| {
            let mut row = vec![(x as u32, 0.5)];
            for step in [n - 1, 1] {
                let y = ((x + step) % n) as u32;
                match row.iter_mut().find(|e| e.0 == y) {
                    Some(e) => e.1 += 0.25,
                    None => row.push((y, 0.25)),
                }
            }
            row
        })
        .collect();
    let pi = vec![1.0 / n as f64; n];
    Ok(build_chain(rows, Some(pi))?)
}

fn grid_walk(
    side: usize,
    cells: &[usize],
    has_edge: impl Fn(usize, usize) -> bool,
) -> Result<ChainKernel, BenchError> {
    let mut index = vec![usize::MAX; side * side];
    for (i, &cell) in cells.iter().enumerate() {
        index[cell] = i;
    }
    let neighbors = |cell: usize| -> Vec<usize> {
        let (r, c) = (cell / side, cell % side);
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push(cell - side);
        }
        if r + 1 < side {
            out.push(cell + side);
        }
        if c > 0 {
            out.push(cell - 1);
        }
        if c + 1 < side {
            out.push(cell + 1);
        }
        out.into_iter()
            .filter(|&other| index[other] != usize::MAX && has_edge(cell, other))
            .collect()
    };
    let mut rows = Vec::with_capacity(cells.len());
    let mut degrees = Vec::with_capacity(cells.len());
    for &cell in cells {
        let nbrs = neighbors(cell);
        if nbrs.is_empty() {
            return Err(BenchError::Disconnected);
        }
        let deg = nbrs.len() as f64;
        let mut row = vec![(index[cell] as u32, 0.5)];
        for other in nbrs {
            row.push((index[other] as u32, 0.5 / deg));
        }
        rows.push(row);
        degrees.push(deg);
    }
    let total: f64 = degrees.iter().sum();
    let pi = degrees.iter().map(|d| d / total).collect();
    Ok(build_chain(rows, Some(pi))?)
}

/// Lazy random walk in an n x n box, optionally with holes: hold 1/2, split
/// the moving half equally among the surviving grid neighbors (stationary
/// mass proportional to degree). Also returns the family of left rectangles
/// (columns 0..=k) for restricted profiles.
pub fn lazy_box(
    side: usize,
    holes: &[(usize, usize)],
) -> Result<(ChainKernel, Vec<StateSet>), BenchError> {
    if side < 2 {
        return Err(BenchError::BadParameter("box needs side >= 2".into()));
    }
    let mut removed = vec![false; side * side];
    for &(r, c) in holes {
        if r >= side || c >= side {
            return Err(BenchError::BadParameter(format!("hole ({r},{c}) outside the grid")));
        }
        removed[r * side + c] = true;
    }
    let cells: Vec<usize> = (0..side * side).filter(|&c| !removed[c]).collect();
    if cells.len() < 2 {
        return Err(BenchError::Disconnected);
    }
    // Connectivity of the hole-punched grid.
    let mut seen = vec![false; side * side];
    let mut queue = vec![cells[0]];
    seen[cells[0]] = true;
    let mut count = 1;
    while let Some(cell) = queue.pop() {
        let (r, c) = (cell / side, cell % side);
        let mut push = |other: usize| {
            if !removed[other] && !seen[other] {
                seen[other] = true;
                count += 1;
                queue.push(other);
            }
        };
        if r > 0 {
            push(cell - side);
        }
        if r + 1 < side {
            push(cell + side);
        }
        if c > 0 {
            push(cell - 1);
        }
        if c + 1 < side {
            push(cell + 1);
        }
    }
    if count != cells.len() {
        return Err(BenchError::Disconnected);
    }
    let chain = grid_walk(side, &cells, |_, _| true)?;
    let mut family = Vec::new();
    for k in 0..side - 1 {
        let members: Vec<usize> = cells
            .iter()
            .enumerate()
            .filter(|(_, &cell)| cell % side <= k)
            .map(|(i, _)| i)
            .collect();
        if !members.is_empty() && members.len() < cells.len() {
            family.push(StateSet::new(&chain, members));
        }
    }
    Ok((chain, family))
}

/// Bond percolation on the n x n grid: every edge is kept independently with
/// probability `p_keep`; the lazy walk runs on the largest connected
/// component. Deterministic given the seed.
pub fn percolation_box(side: usize, p_keep: f64, seed: u64) -> Result<ChainKernel, BenchError> {
    if side < 2 {
        return Err(BenchError::BadParameter("box needs side >= 2".into()));
    }
    if !(p_keep > 0.5 && p_keep <= 1.0) {
        return Err(BenchError::BadParameter(format!(
            "p_keep must lie in (1/2, 1], got {p_keep}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n2 = side * side;
    // kept[cell] = (right edge kept, down edge kept); drawn in row-major order.
    let mut kept = vec![(false, false); n2];
    for cell in 0..n2 {
        let (r, c) = (cell / side, cell % side);
        if c + 1 < side {
            kept[cell].0 = rng.gen::<f64>() < p_keep;
        }
        if r + 1 < side {
            kept[cell].1 = rng.gen::<f64>() < p_keep;
        }
    }
    let has_edge = |a: usize, b: usize| -> bool {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if hi == lo + 1 {
            kept[lo].0
        } else {
            kept[lo].1
        }
    };
    // Largest component over kept edges; ties go to the smallest root cell.
    let mut component = vec![usize::MAX; n2];
    let mut best: Option<(usize, usize)> = None;
    for start in 0..n2 {
        if component[start] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        component[start] = start;
        let mut stack = vec![start];
        while let Some(cell) = stack.pop() {
            let (r, c) = (cell / side, cell % side);
            let mut push = |other: usize| {
                if component[other] == usize::MAX && has_edge(cell, other) {
                    component[other] = start;
                    members.push(other);
                    stack.push(other);
                }
            };
            if c + 1 < side {
                push(cell + 1);
            }
            if c > 0 {
                push(cell - 1);
            }
            if r + 1 < side {
                push(cell + side);
            }
            if r > 0 {
                push(cell - side);
            }
        }
        if best.as_ref().is_none_or(|&(_, size)| members.len() > size) {
            best = Some((start, members.len()));
        }
    }
    let (root, size) = best.unwrap();
    if size < 2 {
        return Err(BenchError::NoGiantComponent);
    }
    let cells: Vec<usize> = (0..n2).filter(|&c| component[c] == root).collect();
    grid_walk(side, &cells, has_edge)
}

/// Lamplighter walk on a cycle of `lamps` lamps: state = (configuration,
/// position), `lamps * 2^lamps` states. The active step is uniform over
/// {toggle current lamp, move left, move right}; the chain holds with
/// probability 1/2. Stationary distribution uniform.
pub fn lamplighter_cycle(lamps: usize) -> Result<ChainKernel, BenchError> {
    if lamps < 3 {
        return Err(BenchError::BadParameter("lamplighter needs >= 3 lamps".into()));
    }
    if lamps > 12 {
        return Err(BenchError::TooLarge(format!("lamplighter with {lamps} lamps")));
    }
    let configs = 1usize << lamps;
    let n = lamps * configs;
    let id = |pos: usize, config: usize| (pos * configs + config) as u32;
    let mut rows = Vec::with_capacity(n);
    for pos in 0..lamps {
        for config in 0..configs {
            let mut row = vec![(id(pos, config), 0.5)];
            let third = 0.5 / 3.0;
            for target in [
                id(pos, config ^ (1 << pos)),
                id((pos + lamps - 1) % lamps, config),
                id((pos + 1) % lamps, config),
            ] {
                match row.iter_mut().find(|e| e.0 == target) {
                    Some(e) => e.1 += third,
                    None => row.push((target, third)),
                }
            }
            rows.push(row);
        }
    }
    let pi = vec![1.0 / n as f64; n];
    Ok(build_chain(rows, Some(pi))?)
}

/// Lazy walk on the n-dimensional hypercube: hold 1/2, flip a uniform
/// coordinate. Also returns the Hamming-ball family around the all-zeros
/// vertex, interpolated between radii by numeric order within the next
/// sphere so every achievable measure scale appears (balls only past 12
/// dimensions, where the interpolated family would be enormous).
pub fn hypercube(dim: usize) -> Result<(ChainKernel, Vec<StateSet>), BenchError> {
    if !(2..=20).contains(&dim) {
        return Err(BenchError::TooLarge(format!("hypercube dimension {dim}")));
    }
    let n = 1usize << dim;
    let mut rows = Vec::with_capacity(n);
    for x in 0..n {
        let mut row = vec![(x as u32, 0.5)];
        for i in 0..dim {
            row.push(((x ^ (1 << i)) as u32, 0.5 / dim as f64));
        }
        row.sort_by_key(|e| e.0);
        rows.push(row);
    }
    let pi = vec![1.0 / n as f64; n];
    let chain = build_chain(rows, Some(pi))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| (x.count_ones(), x));
    let mut family = Vec::new();
    if dim <= 12 {
        for len in 1..n {
            family.push(StateSet::new(&chain, order[..len].iter().cloned()));
        }
    } else {
        let mut len = 0;
        for radius in 0..dim {
            while len < n && order[len].count_ones() as usize <= radius {
                len += 1;
            }
            if len > 0 && len < n {
                family.push(StateSet::new(&chain, order[..len].iter().cloned()));
            }
        }
    }
    Ok((chain, family))
}

/// Lazy walk on the complete graph: hold 1/2, else jump uniformly to one of
/// the other vertices.
pub fn clique(n: usize) -> Result<ChainKernel, BenchError> {
    if n < 2 {
        return Err(BenchError::BadParameter("clique needs n >= 2".into()));
    }
    let rows = (0..n)
        .map(|x| {
            let mut row = vec![(x as u32, 0.5)];
            let p = 0.5 / (n - 1) as f64;
            for y in 0..n {
                if y != x {
                    row.push((y as u32, p));
                }
            }
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    let pi = vec![1.0 / n as f64; n];
    Ok(build_chain(rows, Some(pi))?)
}

/// Configuration-model random regular multigraph on `n` vertices with the
/// given degree; self-loops occupy two stubs and later collapse into
/// holding. Returns per-vertex edge multiplicities.
fn configuration_multigraph(
    n: usize,
    degree: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<std::collections::BTreeMap<u32, u32>> {
    let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    stubs.shuffle(rng);
    let mut counts: Vec<std::collections::BTreeMap<u32, u32>> = vec![Default::default(); n];
    for pair in stubs.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == b {
            *counts[a as usize].entry(a).or_insert(0) += 2;
        } else {
            *counts[a as usize].entry(b).or_insert(0) += 1;
            *counts[b as usize].entry(a).or_insert(0) += 1;
        }
    }
    counts
}

/// Two random regular graphs (configuration model) of sizes `n1` and `n2`,
/// joined by a single edge between their first vertices, then lazified by
/// 1/2. Expansion is whatever the random graphs deliver, measured rather
/// than certified. Seeds that produce a disconnected graph are retried with
/// derived seeds, deterministically.
pub fn two_expanders(
    n1: usize,
    n2: usize,
    degree: usize,
    seed: u64,
) -> Result<ChainKernel, BenchError> {
    if degree < 3 {
        return Err(BenchError::BadDegree(format!("degree {degree} < 3")));
    }
    if n1 < degree + 1 || n2 < degree + 1 {
        return Err(BenchError::BadDegree("each side needs at least degree + 1 vertices".into()));
    }
    if n1 + n2 > 4096 {
        return Err(BenchError::TooLarge(format!("{} vertices", n1 + n2)));
    }
    if (n1 * degree) % 2 != 0 || (n2 * degree) % 2 != 0 {
        return Err(BenchError::BadDegree("n * degree must be even on each side".into()));
    }
    let n = n1 + n2;
    for attempt in 0..32u64 {
        let derived = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha12Rng::seed_from_u64(derived);
        let side_a = configuration_multigraph(n1, degree, &mut rng);
        let side_b = configuration_multigraph(n2, degree, &mut rng);
        let mut counts: Vec<std::collections::BTreeMap<u32, u32>> = vec![Default::default(); n];
        for (v, adj) in side_a.into_iter().enumerate() {
            for (w, c) in adj {
                counts[v].insert(w, c);
            }
        }
        for (v, adj) in side_b.into_iter().enumerate() {
            for (w, c) in adj {
                counts[n1 + v].insert(w + n1 as u32, c);
            }
        }
        *counts[0].entry(n1 as u32).or_insert(0) += 1;
        *counts[n1].entry(0).or_insert(0) += 1;

        let degrees: Vec<f64> = counts
            .iter()
            .map(|adj| adj.values().map(|&c| c as f64).sum())
            .collect();
        let rows: Vec<Vec<(u32, f64)>> = counts
            .iter()
            .enumerate()
            .map(|(v, adj)| {
                let mut row: Vec<(u32, f64)> = adj
                    .iter()
                    .map(|(&w, &c)| (w, 0.5 * c as f64 / degrees[v]))
                    .collect();
                match row.binary_search_by(|e| e.0.cmp(&(v as u32))) {
                    Ok(i) => row[i].1 += 0.5,
                    Err(i) => row.insert(i, (v as u32, 0.5)),
                }
                row
            })
            .collect();
        let total: f64 = degrees.iter().sum();
        let pi = degrees.iter().map(|d| d / total).collect();
        match build_chain(rows, Some(pi)) {
            Ok(chain) => return Ok(chain),
            Err(ChainError::Reducible) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(BenchError::Disconnected)
}

/// Seeded random irreducible chain for test corpora: a cycle backbone plus a
/// couple of random extra targets per state, with holding probabilities
/// drawn from `[gamma_lo, gamma_hi]`.
pub fn random_chain(
    n: usize,
    gamma_lo: f64,
    gamma_hi: f64,
    seed: u64,
) -> Result<ChainKernel, BenchError> {
    assert!(n >= 2 && gamma_lo > 0.0 && gamma_hi < 1.0 && gamma_lo <= gamma_hi);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for x in 0..n {
        let holding = rng.gen_range(gamma_lo..=gamma_hi);
        let mut targets = vec![(x + 1) % n];
        for _ in 0..2 {
            let t = rng.gen_range(0..n);
            if t != x && !targets.contains(&t) {
                targets.push(t);
            }
        }
        let weights: Vec<f64> = targets.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut row = vec![(x as u32, holding)];
        for (t, w) in targets.iter().zip(weights) {
            row.push((*t as u32, (1.0 - holding) * w / total));
        }
        rows.push(row);
    }
    Ok(build_chain(rows, None)?)
}

/// Seeded random reversible chain: a symmetric weighted graph (cycle
/// backbone, random chords, self-loops) walked proportionally to edge
/// weight, so the stationary mass is the weighted degree.
pub fn random_reversible_chain(n: usize, seed: u64) -> Result<ChainKernel, BenchError> {
    assert!(n >= 2);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut weight = vec![vec![0.0f64; n]; n];
    for x in 0..n {
        let w = rng.gen_range(0.1..1.0);
        let y = (x + 1) % n;
        weight[x][y] += w;
        weight[y][x] += w;
        weight[x][x] = rng.gen_range(0.1..1.0);
    }
    for _ in 0..n {
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        if x != y {
            let w = rng.gen_range(0.1..1.0);
            weight[x][y] += w;
            weight[y][x] += w;
        }
    }
    let degrees: Vec<f64> = weight.iter().map(|row| row.iter().sum()).collect();
    let rows: Vec<Vec<(u32, f64)>> = (0..n)
        .map(|x| {
            (0..n)
                .filter(|&y| weight[x][y] > 0.0)
                .map(|y| (y as u32, weight[x][y] / degrees[x]))
                .collect()
        })
        .collect();
    let total: f64 = degrees.iter().sum();
    let pi = degrees.iter().map(|d| d / total).collect();
    Ok(build_chain(rows, Some(pi))?)
}
