//! Property-check suites behind the `verify` front end and the acceptance
//! tests: structural identities of the evolving-set process, the gauge
//! inequality chain, and soundness of every bound against the exact oracles.
//!
//! Each check reports its worst observed violation; a check passes when the
//! violation stays within its tolerance (1e-12 for exact identities, zero
//! slack expressed through the same mechanism for inequalities).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::bounds;
use crate::chain::{ChainKernel, StateSet};
use crate::evolving::{self, SetChainKernel};
use crate::mixing;
use crate::profiles::{self, ProfileMethod};

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(name: impl Into<String>, max_violation: f64, tolerance: f64) -> Self {
        let pass = max_violation <= tolerance;
        CheckRow { name: name.into(), max_violation, tolerance, pass }
    }
}

pub fn all_pass(rows: &[CheckRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

/// Proper nonempty subsets to sweep: exhaustive through 12 states, a seeded
/// sample beyond.
fn subset_sweep(chain: &ChainKernel, seed: u64) -> Vec<StateSet> {
    let n = chain.n();
    if n <= 12 {
        (1..(1u64 << n) - 1).map(|mask| StateSet::from_mask(chain, mask)).collect()
    } else {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(1000);
        while out.len() < 1000 {
            let members: Vec<usize> = (0..n).filter(|_| rng.gen::<bool>()).collect();
            if !members.is_empty() && members.len() < n {
                out.push(StateSet::new(chain, members));
            }
        }
        out
    }
}

fn phi_of(chain: &ChainKernel, s: &StateSet) -> f64 {
    crate::q_flow(chain, s, &s.complement(chain)) / s.measure()
}

/// Structural identity suite: stochasticity, stationarity, flow symmetry,
/// reversal profile, and the evolving-set kernel identities (martingale,
/// duality, Doob normalization and powers, the transition-probability
/// identity, the Z-recursion, and the two-replica chi-square identity).
pub fn identity_suite(chain: &ChainKernel, seed: u64) -> Vec<CheckRow> {
    let tol = 1e-12;
    let n = chain.n();
    let mut rows = Vec::new();

    let row_sum_violation = (0..n)
        .map(|x| (chain.row(x).iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    rows.push(CheckRow::new("row_stochastic", row_sum_violation, tol));

    let mut flow = vec![0.0; n];
    for x in 0..n {
        for &(y, p) in chain.row(x) {
            flow[y as usize] += chain.pi_of(x) * p;
        }
    }
    let stat_violation = flow
        .iter()
        .zip(chain.pi())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    rows.push(CheckRow::new("stationarity", stat_violation, tol));

    let q_violation = subset_sweep(chain, seed)
        .iter()
        .map(|s| {
            let sc = s.complement(chain);
            (crate::q_flow(chain, s, &sc) - crate::q_flow(chain, &sc, s)).abs()
        })
        .fold(0.0, f64::max);
    rows.push(CheckRow::new("q_flow_symmetry", q_violation, tol));

    if n <= profiles::PROFILE_ENUM_MAX {
        let fwd = profiles::conductance_profile(chain, ProfileMethod::Enumerate);
        let bwd =
            profiles::conductance_profile(&crate::time_reversal(chain), ProfileMethod::Enumerate);
        if let (Ok(fwd), Ok(bwd)) = (fwd, bwd) {
            let mut violation: f64 = if fwd.points().len() == bwd.points().len() {
                0.0
            } else {
                f64::INFINITY
            };
            for (a, b) in fwd.points().iter().zip(bwd.points()) {
                violation = violation.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
            }
            rows.push(CheckRow::new("reversal_profile", violation, tol));
        }
    }

    if n <= 16 {
        if let Ok(kernel) = evolving::set_kernel(chain) {
            rows.extend(set_kernel_identities(chain, &kernel));
        }
    }
    rows
}

fn set_kernel_identities(chain: &ChainKernel, kernel: &SetChainKernel) -> Vec<CheckRow> {
    let tol = 1e-12;
    let n = chain.n();
    let count = kernel.subset_count();
    let full = count - 1;
    let mut rows = Vec::new();

    let mut martingale: f64 = 0.0;
    let mut duality: f64 = 0.0;
    let mut doob_norm: f64 = 0.0;
    for s in 0..count {
        let expected: f64 = kernel
            .k_row(s)
            .iter()
            .map(|&(a, p)| p * kernel.subset_measure(a as usize))
            .sum();
        martingale = martingale.max((expected - kernel.subset_measure(s)).abs());
        for &(a, p) in kernel.k_row(s) {
            let dual = kernel
                .k_row(full - s)
                .iter()
                .find(|e| e.0 as usize == full - a as usize)
                .map_or(0.0, |e| e.1);
            duality = duality.max((p - dual).abs());
        }
        if s > 0 {
            let sum: f64 = kernel.doob_row(s).unwrap().iter().map(|e| e.1).sum();
            doob_norm = doob_norm.max((sum - 1.0).abs());
        }
    }
    rows.push(CheckRow::new("martingale", martingale, tol));
    rows.push(CheckRow::new("duality", duality, tol));
    rows.push(CheckRow::new("doob_rows_normalized", doob_norm, tol));

    // K_hat^n(S,A) = pi(A)/pi(S) K^n(S,A), by direct powering from singletons.
    let mut doob_power: f64 = 0.0;
    for x in 0..n {
        let start = 1usize << x;
        let mut v = vec![0.0; count];
        let mut w = vec![0.0; count];
        v[start] = 1.0;
        w[start] = 1.0;
        for _ in 0..5 {
            v = kernel.step_distribution(&v);
            w = kernel.step_distribution_doob(&w).unwrap();
            for a in 0..count {
                let scaled = v[a] * kernel.subset_measure(a) / kernel.subset_measure(start);
                doob_power = doob_power.max((w[a] - scaled).abs());
            }
        }
    }
    rows.push(CheckRow::new("doob_power_identity", doob_power, tol));

    // Transition identity p^n(x,y) = (pi(y)/pi(x)) P(y in S_n), all pairs, n <= 20.
    let mut transition_violation: f64 = 0.0;
    for x in 0..n {
        let mut v = vec![0.0; count];
        v[1 << x] = 1.0;
        let mut mu = vec![0.0; n];
        mu[x] = 1.0;
        for _ in 1..=20 {
            v = kernel.step_distribution(&v);
            let mut next = vec![0.0; n];
            for (z, &m) in mu.iter().enumerate() {
                if m != 0.0 {
                    for &(y, p) in chain.row(z) {
                        next[y as usize] += m * p;
                    }
                }
            }
            mu = next;
            for y in 0..n {
                let hit: f64 = v
                    .iter()
                    .enumerate()
                    .filter(|(a, _)| a >> y & 1 == 1)
                    .map(|(_, &p)| p)
                    .sum();
                transition_violation = transition_violation.max((mu[y] - chain.pi_of(y) / chain.pi_of(x) * hit).abs());
            }
        }
    }
    rows.push(CheckRow::new("transition_identity", transition_violation, 1e-10));

    // Z-recursion: the Doob expectation of Z_{n+1}/Z_n given S equals the
    // plain expectation of sqrt(pi(Snext#)/pi(S#)), and is at most
    // 1 - psi(pi(S)) for the root profile with its constant tail.
    if n <= 12 {
        if let Ok(psi_profile) = profiles::root_profile(chain, ProfileMethod::Enumerate) {
            let sharp_measure = |a: usize| {
                let m = kernel.subset_measure(a);
                if m <= 0.5 {
                    m
                } else {
                    kernel.subset_measure(full - a)
                }
            };
            let z_of = |a: usize| sharp_measure(a).sqrt() / kernel.subset_measure(a);
            let mut identity: f64 = 0.0;
            let mut bound: f64 = 0.0;
            for s in 1..full {
                let lhs: f64 = kernel
                    .doob_row(s)
                    .unwrap()
                    .iter()
                    .map(|&(a, p)| p * z_of(a as usize) / z_of(s))
                    .sum();
                let rhs: f64 = kernel
                    .k_row(s)
                    .iter()
                    .map(|&(a, p)| p * (sharp_measure(a as usize) / sharp_measure(s)).sqrt())
                    .sum();
                identity = identity.max((lhs - rhs).abs());
                let cap =
                    1.0 - profiles::profile_query(&psi_profile, kernel.subset_measure(s)).unwrap();
                bound = bound.max(rhs - cap);
            }
            rows.push(CheckRow::new("z_recursion_identity", identity, 1e-12));
            rows.push(CheckRow::new("z_recursion_bound", bound.max(0.0), 1e-12));
        }
    }

    // Two-replica chi-square identity, n <= 4 steps.
    if n <= 8 {
        let mut replica: f64 = 0.0;
        let inter_measure = |a: usize, b: usize| {
            let mut m = a & b;
            let mut acc = 0.0;
            while m != 0 {
                let y = m.trailing_zeros() as usize;
                m &= m - 1;
                acc += chain.pi_of(y);
            }
            acc
        };
        for x in 0..n {
            let mut v = vec![0.0; count];
            v[1 << x] = 1.0;
            for step in 1..=4 {
                v = kernel.step_distribution(&v);
                let mu = mixing::distribution_at(chain, x, step);
                let chi2 = mixing::chi_square(&mu, chain.pi());
                let mut expect = 0.0;
                for (a, &pa) in v.iter().enumerate() {
                    if pa == 0.0 {
                        continue;
                    }
                    for (b, &pb) in v.iter().enumerate() {
                        if pb == 0.0 {
                            continue;
                        }
                        expect += pa
                            * pb
                            * (inter_measure(a, b)
                                - kernel.subset_measure(a) * kernel.subset_measure(b));
                    }
                }
                let px = chain.pi_of(x);
                replica = replica.max((chi2 - expect / (px * px)).abs());
            }
        }
        rows.push(CheckRow::new("chi_square_replica_identity", replica, 1e-10));
    }
    rows
}

/// Gauge and distance inequality suite.
pub fn inequality_suite(chain: &ChainKernel, seed: u64) -> Vec<CheckRow> {
    let n = chain.n();
    let gamma = chain.gamma();
    let mut rows = Vec::new();
    let sweep = subset_sweep(chain, seed);

    let mut root_gamma_violation: f64 = 0.0;
    let mut root_lazy_violation: f64 = 0.0;
    let mut split_mean_first: f64 = 0.0;
    let mut split_mean_second: f64 = 0.0;
    let mut theta_bound: f64 = 0.0;
    let mut theta_vs_phi: f64 = 0.0;
    for s in &sweep {
        let psi = evolving::psi(chain, s);
        let phi = phi_of(chain, s);
        let vphi = evolving::varphi(chain, s);
        if gamma > 0.0 {
            let c = gamma * gamma / (2.0 * (1.0 - gamma) * (1.0 - gamma));
            root_gamma_violation = root_gamma_violation.max(c.min(0.5) * phi * phi - psi);
        }
        if gamma >= 0.5 {
            root_lazy_violation = root_lazy_violation.max(phi * phi / 2.0 - psi);
        }
        let mid = ((1.0 + 2.0 * vphi).sqrt() + (1.0 - 2.0 * vphi).max(0.0).sqrt()) / 2.0;
        split_mean_first = split_mean_first.max((1.0 - psi) - mid);
        split_mean_second = split_mean_second.max(mid - (1.0 - vphi * vphi / 2.0));
        if gamma >= 0.5 {
            let th = evolving::theta(chain, s);
            theta_bound = theta_bound.max(th * th / (8.0 * (2.0 / (th * th)).ln()) - psi);
        }
        if chain.is_reversible() {
            theta_vs_phi = theta_vs_phi.max(phi - evolving::theta(chain, s));
        }
    }
    if gamma > 0.0 {
        rows.push(CheckRow::new("root_vs_conductance_gamma", root_gamma_violation.max(0.0), 1e-12));
    }
    if gamma >= 0.5 {
        rows.push(CheckRow::new("root_vs_conductance_lazy", root_lazy_violation.max(0.0), 1e-12));
        rows.push(CheckRow::new("theta_log_bound", theta_bound.max(0.0), 1e-12));
    }
    rows.push(CheckRow::new("split_mean_upper_bound", split_mean_first.max(0.0), 1e-12));
    rows.push(CheckRow::new("split_mean_scalar_bound", split_mean_second.max(0.0), 1e-12));
    if chain.is_reversible() {
        rows.push(CheckRow::new("theta_dominates_phi", theta_vs_phi.max(0.0), 1e-12));
    }

    // Cauchy-Schwarz chain: 2 TV <= chi, over all starts and steps <= 10.
    let mut eq15: f64 = 0.0;
    for x in 0..n {
        for step in 0..=10 {
            let mu = mixing::distribution_at(chain, x, step);
            let tv = mixing::total_variation(&mu, chain.pi());
            let chi = mixing::chi_square(&mu, chain.pi()).sqrt();
            eq15 = eq15.max(2.0 * tv - chi);
        }
    }
    rows.push(CheckRow::new("chi_dominates_tv", eq15.max(0.0), 1e-12));

    // chi(mu_n, pi) <= (1/pi(x)) E sqrt(pi(S_n#)), exact set-kernel expectation.
    if n <= 16 {
        if let Ok(kernel) = evolving::set_kernel(chain) {
            let full = kernel.subset_count() - 1;
            let mut eq30: f64 = 0.0;
            for x in 0..n {
                let mut v = vec![0.0; kernel.subset_count()];
                v[1 << x] = 1.0;
                for step in 1..=5 {
                    v = kernel.step_distribution(&v);
                    let mu = mixing::distribution_at(chain, x, step);
                    let chi = mixing::chi_square(&mu, chain.pi()).sqrt();
                    let esqrt: f64 = v
                        .iter()
                        .enumerate()
                        .map(|(a, &p)| {
                            let m = kernel.subset_measure(a);
                            let sharp = if m <= 0.5 {
                                m
                            } else {
                                kernel.subset_measure(full - a)
                            };
                            p * sharp.sqrt()
                        })
                        .sum();
                    eq30 = eq30.max(chi - esqrt / chain.pi_of(x));
                }
            }
            rows.push(CheckRow::new("chi_evolving_set_bound", eq30.max(0.0), 1e-12));
        }
    }

    // Scalar fact: (sqrt(1+2b) + sqrt(1-2b))/2 <= sqrt(1-b^2) <= 1 - b^2/2.
    let mut split_sqrt: f64 = 0.0;
    for i in 0..10_000 {
        let beta = -0.5 + i as f64 / 9_999.0;
        let lhs = ((1.0 + 2.0 * beta).sqrt() + (1.0 - 2.0 * beta).sqrt()) / 2.0;
        let mid = (1.0 - beta * beta).sqrt();
        split_sqrt = split_sqrt.max(lhs - mid).max(mid - (1.0 - beta * beta / 2.0));
    }
    rows.push(CheckRow::new("split_sqrt_scalar_grid", split_sqrt.max(0.0), 1e-12));

    // E[Z f(2Z)] >= (EZ/2) f(EZ) for nonnegative Z, increasing f.
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(0x18));
    let mut scaled_decay: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.gen_range(2..8);
        let atoms: Vec<(f64, f64)> =
            (0..k).map(|_| (rng.gen_range(0.0..5.0), rng.gen_range(0.01..1.0))).collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let a: f64 = rng.gen_range(0.1..3.0);
        let b: f64 = rng.gen_range(0.0..2.0);
        let f = |z: f64| b + a * z.powi(3);
        let ez: f64 = atoms.iter().map(|&(z, w)| z * w / total).sum();
        let lhs: f64 = atoms.iter().map(|&(z, w)| z * f(2.0 * z) * w / total).sum();
        scaled_decay = scaled_decay.max(ez / 2.0 * f(ez) - lhs);
    }
    rows.push(CheckRow::new("scaled_decay_expectation", scaled_decay.max(0.0), 1e-12));

    rows
}

/// Bound-soundness suite: every bound evaluated over exact profiles must
/// dominate the exact mixing quantity it controls.
pub fn bound_suite(chain: &ChainKernel, eps_list: &[f64]) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let gamma = chain.gamma().min(0.5);
    if gamma <= 0.0 {
        rows.push(CheckRow::new("bounds_need_positive_gamma", f64::INFINITY, 0.0));
        return rows;
    }
    let phi = match profiles::conductance_profile(chain, ProfileMethod::Enumerate) {
        Ok(p) => p,
        Err(e) => {
            rows.push(CheckRow::new(format!("phi_profile_failed: {e}"), f64::INFINITY, 0.0));
            return rows;
        }
    };
    let psi = profiles::root_profile(chain, ProfileMethod::Enumerate).expect("psi profile");
    let n = chain.n();

    for &eps in eps_list {
        let tau = mixing::tau_uniform(chain, eps, 200_000);
        let bound = bounds::tau_uniform_bound(&phi, eps, gamma, None, None).expect("hk bound");
        let violation = match &tau {
            Ok(t) => (*t as f64 - bound.bound.as_f64()).max(0.0),
            Err(_) => f64::INFINITY,
        };
        rows.push(CheckRow::new(format!("thm_uniform_soundness_eps_{eps}"), violation, 0.0));

        let mut psith_violation: f64 = 0.0;
        for x in 0..n {
            let report =
                bounds::chi_square_bound(&psi, chain.pi_of(x), eps).expect("psith bound");
            let mut first = None;
            let mut mu = vec![0.0; n];
            mu[x] = 1.0;
            for step in 0..=200_000u64 {
                if mixing::chi_square(&mu, chain.pi()) <= eps {
                    first = Some(step);
                    break;
                }
                let mut next = vec![0.0; n];
                for (z, &w) in mu.iter().enumerate() {
                    if w != 0.0 {
                        for &(y, p) in chain.row(z) {
                            next[y as usize] += w * p;
                        }
                    }
                }
                mu = next;
            }
            match first {
                Some(t) => {
                    psith_violation =
                        psith_violation.max((t as f64 - report.bound.as_f64()).max(0.0))
                }
                None => psith_violation = f64::INFINITY,
            }
        }
        rows.push(CheckRow::new(format!("psith_soundness_eps_{eps}"), psith_violation, 0.0));

        let cont = bounds::continuous_bound(&phi, None, None, eps).expect("cont bound");
        let t_exact = mixing::tau_uniform_continuous(chain, eps, cont.bound.as_f64() + 1.0, 0.25);
        let violation = match t_exact {
            Ok(t) => (t - cont.bound.as_f64()).max(0.0),
            Err(_) => f64::INFINITY,
        };
        rows.push(CheckRow::new(format!("cont1_soundness_eps_{eps}"), violation, 0.0));
    }
    rows
}
