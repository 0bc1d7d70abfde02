use crate::error::Result;
use crate::key::ActionKind;
use crate::model::TransitionModel;
use crate::success::{Provenance, SuccessModel};

/// Exact `p(s, a)` when `a` is taken at `s` and nohelp is followed afterwards.
///
/// The continuation probability is the least fixed point of
/// `q(s) = sum P_nohelp(s'|s) q(s')` (terminal success = 1), reached by
/// iterating from zero. States without a nohelp row continue with their
/// lowest available action; states without rows have `q = 0`.
pub fn continuation_success(model: &TransitionModel) -> Result<SuccessModel> {
    let n = model.len();
    let mut q: Vec<f64> = model
        .states()
        .iter()
        .map(|s| s.terminal().map_or(0.0, |o| o.reward()))
        .collect();
    let follow: Vec<Option<&crate::model::Row>> = (0..n)
        .map(|i| {
            if model.key(i).is_terminal() {
                None
            } else {
                model.row(i, ActionKind::NoHelp).or_else(|| model.rows(i).first())
            }
        })
        .collect();
    for _ in 0..1_000_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| follow[i].map_or(q[i], |row| row.expect(&q)))
            .collect();
        let delta = next
            .iter()
            .zip(&q)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        q = next;
        if delta < 1e-15 {
            break;
        }
    }
    let mut out = SuccessModel::new(Provenance::Exact);
    for i in 0..n {
        for row in model.rows(i) {
            let p = row.expect(&q).clamp(0.0, 1.0);
            out.insert(model.key(i).clone(), row.action, p, 0)?;
        }
    }
    Ok(out)
}
