//! Exact solver by subset enumeration; the quality oracle for the
//! approximation bounds. Capped, since the problem is intractable at scale.

use std::time::Instant;

use crate::error::{Error, Result};

use super::{EngineKind, ProblemInstance, SelectionResult, SolverCtx};

/// Maximum-diversity eligible composition containing the target module.
/// Ties prefer the lexicographically smallest module-id set.
pub fn exhaustive(instance: &ProblemInstance, cap: usize) -> Result<SelectionResult> {
    let start = Instant::now();
    let ctx = SolverCtx::new(instance)?;
    let n = ctx.len();
    if n > cap {
        return Err(Error::ExhaustiveCapExceeded { modules: n, cap });
    }
    let others: Vec<usize> = (0..n).filter(|&k| k != ctx.target).collect();
    let mut best: Option<(u64, Vec<usize>)> = None;
    for mask in 0u64..(1u64 << others.len()) {
        let mut selection = vec![ctx.target];
        for (bit, &k) in others.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                selection.push(k);
            }
        }
        selection.sort_unstable();
        let stats = ctx.stats(&selection);
        if !ctx.is_eligible(&stats) {
            continue;
        }
        if super::better_selection(&best, stats.diversity, &selection) {
            best = Some((stats.diversity, selection));
        }
    }
    let selection = match best {
        Some((_, sel)) => sel,
        None => {
            let fallback = ctx.fallback_selection();
            if !ctx.is_eligible(&ctx.stats(&fallback)) {
                return Err(Error::NoEligibleComposition);
            }
            fallback
        }
    };
    Ok(ctx.result_from(&selection, EngineKind::Exhaustive, start.elapsed(), None))
}
