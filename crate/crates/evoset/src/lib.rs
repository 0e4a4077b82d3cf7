//! Evolving-set processes, conductance profiles, and mixing-time bounds for
//! finite Markov chains.
//!
//! The crate has three layers:
//!
//! * ground truth — [`chain`] holds validated transition kernels and state
//!   sets; [`mixing`] computes exact distributions, mixing times, chi-square
//!   curves, spectral gaps, and continuous-time kernels by matrix powering
//!   and uniformization;
//! * the set process — [`evolving`] implements the evolving-set step, its
//!   exact kernel on subset space, the Doob transform, the boundary gauges
//!   psi / varphi / theta, and Monte-Carlo trace sampling;
//! * bounds — [`profiles`] builds step-function conductance and root
//!   profiles, and [`bounds`] evaluates every integral mixing-time bound
//!   over them in closed form.
//!
//! [`bench`] generates the benchmark chains (boxes, percolation clusters,
//! lamplighter cycles, hypercubes, cliques, joined expanders) and [`checks`]
//! bundles the identity / inequality / bound-soundness suites used by the
//! command-line `verify` front end and the acceptance tests.

pub mod bench;
pub mod bounds;
pub mod chain;
pub mod checks;
pub mod evolving;
pub mod mixing;
pub mod profiles;
pub(crate) mod tol;

pub use chain::{build_chain, lazify, q_flow, q_flow_to, time_reversal, ChainError, ChainKernel, StateSet};
pub use evolving::{
    breakpoints, estimate_transition, evolve_step, psi, sample_trace, set_kernel, theta, varphi,
    EvolveError, EvolvingTrace, SetChainKernel, TraceMode,
};
pub use profiles::{
    conductance_profile, h2_plus, profile_query, root_profile, theta_profile, Gauge,
    ProfileError, ProfileMethod, Provenance, StepFunctionProfile,
};

/// Formats a float with 17 significant digits, enough for exact f64 round trips.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}
