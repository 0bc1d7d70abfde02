//! Help/nohelp decision rules.

/// Usage gaps smaller than this default the literal rule to nohelp.
pub const NEAR_ZERO_USAGE_GAP: f64 = 1e-9;

/// Branch values closer than this are treated as tied, and ties go to the
/// lower action. Keeps decisions stable against round-off such as
/// `-0.7 + 0.9 > 0.2`.
pub const TIE_TOL: f64 = 1e-12;

/// `help iff dS > r * dM`, resolved per sign quadrant so no ratio is formed.
///
/// Equal branch values (within [`TIE_TOL`]) yield nohelp.
pub fn prefers_help(delta_success: f64, delta_usage: f64, r: f64) -> bool {
    let (ds, dm) = (delta_success, delta_usage);
    match (ds > TIE_TOL, dm > 0.0) {
        // more success for no extra usage
        (true, false) => true,
        // no more success and no less usage
        (false, true) => false,
        (false, false) if dm == 0.0 => false,
        // trade-offs: success gain against usage, or usage saving against success loss
        _ => ds - r * dm > TIE_TOL,
    }
}

/// `help iff r < dp / dM` with `dp = p_help - p_nohelp` and
/// `dM = p_help * M_help - p_nohelp * M_nohelp`.
///
/// Defaults to nohelp when `|dM|` is below [`NEAR_ZERO_USAGE_GAP`]. For
/// negative `dM` the division flips the inequality, so the test becomes
/// `dp < r * dM`.
pub fn literal_prefers_help(p_help: f64, p_nohelp: f64, m_help: f64, m_nohelp: f64, r: f64) -> bool {
    let dp = p_help - p_nohelp;
    let dm = p_help * m_help - p_nohelp * m_nohelp;
    if dm.abs() < NEAR_ZERO_USAGE_GAP {
        false
    } else if dm > 0.0 {
        r * dm < dp
    } else {
        r * dm > dp
    }
}
