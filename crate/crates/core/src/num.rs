//! Small numeric helpers shared across modules.

/// Slack used when rounding products like `epsilon * n` that should be exact.
pub const ROUND_SLACK: f64 = 1e-9;

/// `ceil(x)` that treats values within [`ROUND_SLACK`] above an integer as that integer,
/// so `0.1 * 30` rounds to 3 rather than 4.
pub fn ceil_slack(x: f64) -> i64 {
    (x - ROUND_SLACK).ceil() as i64
}

/// Non-negative `ceil_slack`, for counts.
pub fn ceil_count(x: f64) -> usize {
    ceil_slack(x).max(0) as usize
}

pub fn floor_slack(x: f64) -> i64 {
    (x + ROUND_SLACK).floor() as i64
}

pub fn is_power_of_two(r: u64) -> bool {
    r != 0 && r & (r - 1) == 0
}
