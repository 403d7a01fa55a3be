use crate::error::{input, Result};

/// Effective arm count after the small-`N` runtime extension.
pub fn effective_arms(epsilon: f64, actions: usize) -> usize {
    let inv = 1.0 / epsilon;
    let ratio = inv.ln() / inv.max(3.0).ln().ln();
    let floor = ratio.max(0.0).cbrt().ceil() as usize;
    actions.max(floor)
}

/// Rounds after which the swap-regret bandit reaches average swap regret
/// `epsilon` with `actions` arms, given the hidden constant `c`.
pub fn schedule_b(epsilon: f64, actions: usize, c: f64) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(input(format!("schedule needs a positive target, got {epsilon}")));
    }
    if actions == 0 {
        return Err(input("schedule needs at least one action"));
    }
    if actions == 1 {
        return Ok(1);
    }
    let n = effective_arms(epsilon, actions) as f64;
    Ok((c * n.powi(3) * n.max(2.0).ln() / (epsilon * epsilon)).ceil() as u64)
}
