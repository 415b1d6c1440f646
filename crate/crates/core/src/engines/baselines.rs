//! Baseline solvers: greedy by diversity gain, and uniform random growth.
//! Both grow from the target module and only ever add a module that keeps
//! the composition eligible under the canonical predicate.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

use super::{EngineKind, ProblemInstance, SelectionResult, SolverCtx};

fn eligible_with(ctx: &SolverCtx<'_>, selection: &[usize], extra: usize) -> bool {
    let mut probe = selection.to_vec();
    probe.push(extra);
    probe.sort_unstable();
    ctx.is_eligible(&ctx.stats(&probe))
}

fn seed_selection(ctx: &SolverCtx<'_>) -> Result<Vec<usize>> {
    let selection = ctx.fallback_selection();
    if !ctx.is_eligible(&ctx.stats(&selection)) {
        return Err(Error::NoEligibleComposition);
    }
    Ok(selection)
}

/// Repeatedly adds the eligible-preserving module with the largest diversity
/// increase; ties prefer the lowest module id. Stops when nothing qualifies.
pub fn greedy(instance: &ProblemInstance) -> Result<SelectionResult> {
    let start = Instant::now();
    let ctx = SolverCtx::new(instance)?;
    let mut selection = seed_selection(&ctx)?;
    let mut pool: Vec<usize> = (0..ctx.len()).filter(|k| !selection.contains(k)).collect();

    loop {
        let mask = ctx.union_mask(&selection);
        let mut best: Option<(usize, u64)> = None; // (pool position, gain)
        for (pos, &k) in pool.iter().enumerate() {
            if !eligible_with(&ctx, &selection, k) {
                continue;
            }
            let gain = ctx.masks[k].count_minus(&mask);
            let better = match best {
                None => true,
                Some((bpos, bgain)) => gain > bgain || (gain == bgain && k < pool[bpos]),
            };
            if better {
                best = Some((pos, gain));
            }
        }
        match best {
            Some((pos, _)) => {
                let k = pool.swap_remove(pos);
                selection.push(k);
                selection.sort_unstable();
            }
            None => break,
        }
    }
    Ok(ctx.result_from(&selection, EngineKind::Greedy, start.elapsed(), None))
}

/// Repeatedly adds a uniformly random eligible-preserving module until none
/// remains. Bit-reproducible for a fixed seed.
pub fn random_baseline(instance: &ProblemInstance, seed: u64) -> Result<SelectionResult> {
    let start = Instant::now();
    let ctx = SolverCtx::new(instance)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut selection = seed_selection(&ctx)?;
    let mut pool: Vec<usize> = (0..ctx.len()).filter(|k| !selection.contains(k)).collect();

    loop {
        let feasible: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&k| eligible_with(&ctx, &selection, k))
            .collect();
        if feasible.is_empty() {
            break;
        }
        let k = feasible[rng.gen_range(0..feasible.len())];
        pool.retain(|&p| p != k);
        selection.push(k);
        selection.sort_unstable();
    }
    Ok(ctx.result_from(&selection, EngineKind::Random, start.elapsed(), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ds::ModuleId;
    use crate::engines::tests_support::{fresh_module, instance_from, super_module};
    use crate::rational::{ratio, CiLevel};

    #[test]
    fn greedy_stops_at_target_when_nothing_fits() {
        let modules = vec![
            super_module("m1", &["a1", "a2"], &["t1"], 2, ratio(1, 4), ratio(1, 8)),
            super_module("m2", &["b1", "b2", "b3"], &["t2"], 3, ratio(1, 4), ratio(1, 8)),
        ];
        // Budget admits only the target.
        let instance = instance_from(modules, "m1", 2, CiLevel::from_exp(ratio(1000, 1)));
        let result = greedy(&instance).unwrap();
        assert_eq!(result.chosen.len(), 1);
    }

    #[test]
    fn greedy_prefers_new_transactions() {
        // m2 shares every transaction with the target; m3 brings new ones.
        let modules = vec![
            super_module("m1", &["a1", "a2"], &["t1", "t2"], 2, ratio(1, 4), ratio(1, 8)),
            super_module("m2", &["b1", "b2"], &["t1", "t2"], 2, ratio(1, 4), ratio(1, 8)),
            super_module("m3", &["c1", "c2"], &["t3", "t4"], 2, ratio(1, 4), ratio(1, 8)),
        ];
        let instance = instance_from(modules, "m1", 4, CiLevel::from_exp(ratio(1000, 1)));
        let result = greedy(&instance).unwrap();
        assert!(result.chosen.contains(&ModuleId("m3".into())));
        assert!(!result.chosen.contains(&ModuleId("m2".into())));
        assert_eq!(result.diversity, 4);
    }

    #[test]
    fn greedy_trace_is_deterministic() {
        // Hand-simulated: m3 first (gain 2), then f1 (gain 1), then m2
        // (gain 0 but still eligible); budget stops there.
        let modules = vec![
            super_module("m1", &["a1", "a2"], &["t1", "t2"], 2, ratio(1, 4), ratio(1, 8)),
            super_module("m2", &["b1", "b2"], &["t1", "t2"], 2, ratio(1, 4), ratio(1, 8)),
            super_module("m3", &["c1", "c2"], &["t3", "t4"], 2, ratio(1, 4), ratio(1, 8)),
            fresh_module("f1", "x1", "t5"),
        ];
        let instance = instance_from(modules, "m1", 7, CiLevel::from_exp(ratio(1000, 1)));
        let result = greedy(&instance).unwrap();
        let chosen: Vec<String> = result.chosen.iter().map(|m| m.0.clone()).collect();
        assert_eq!(chosen, vec!["f1", "m1", "m2", "m3"]);
        assert_eq!(result.size, 7);
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let modules = vec![
            super_module("m1", &["a1", "a2"], &["t1"], 2, ratio(1, 4), ratio(1, 8)),
            super_module("m2", &["b1", "b2"], &["t2"], 2, ratio(1, 5), ratio(1, 9)),
            super_module("m3", &["c1", "c2"], &["t3"], 2, ratio(1, 5), ratio(1, 9)),
            fresh_module("f1", "x1", "t4"),
        ];
        let instance = instance_from(modules, "m1", 6, CiLevel::from_exp(ratio(1000, 1)));
        let a = random_baseline(&instance, 42).unwrap();
        let b = random_baseline(&instance, 42).unwrap();
        assert_eq!(a.chosen, b.chosen);
        assert!(a.eligible);

        // A single feasible candidate is chosen regardless of seed.
        let modules = vec![
            super_module("m1", &["a1", "a2"], &["t1"], 2, ratio(1, 4), ratio(1, 8)),
            fresh_module("f1", "x1", "t2"),
        ];
        let instance = instance_from(modules, "m1", 10, CiLevel::from_exp(ratio(1000, 1)));
        let x = random_baseline(&instance, 1).unwrap();
        let y = random_baseline(&instance, 999).unwrap();
        assert_eq!(x.chosen, y.chosen);
        assert_eq!(x.chosen.len(), 2);
    }
}
