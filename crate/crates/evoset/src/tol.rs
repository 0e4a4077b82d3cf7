//! Numeric tolerances shared across the crate.

/// Row sums, stationarity residuals and reversibility checks after construction.
pub const CONSTRUCT: f64 = 1e-12;

/// Row-sum acceptance for raw input; loose enough to absorb file round-trip noise.
pub const INPUT_ROW_SUM: f64 = 1e-9;

/// Breakpoint deduplication: threshold ratios closer than this are one breakpoint.
pub const BREAKPOINT_DEDUP: f64 = 1e-14;

/// Slack used when testing a set measure against 1/2 in profile envelopes.
pub const HALF_SLACK: f64 = 1e-12;
