//! The progressive solver: per extreme pair, knapsack the degree budget,
//! then repair the coin budget greedily.

use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::ratio_u64;

use super::{
    better_selection, delta_kp, enumerate_pairs, window_tx_fanout, EngineKind, KnapsackItem, Pair,
    ProblemInstance, SelectionResult, SolverCtx,
};

pub fn progressive(instance: &ProblemInstance, delta: f64) -> Result<SelectionResult> {
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::InvalidParams(format!("delta {delta} outside (0,1)")));
    }
    let start = Instant::now();
    let ctx = SolverCtx::new(instance)?;
    let pairs = enumerate_pairs(&ctx);

    let candidates: Vec<(u64, Vec<usize>)> = pairs
        .par_iter()
        .map(|pair| solve_pair(&ctx, pair, delta))
        .collect();

    let mut best: Option<(u64, Vec<usize>)> = None;
    for (diversity, selection) in candidates {
        if better_selection(&best, diversity, &selection) {
            best = Some((diversity, selection));
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
    Ok(ctx.result_from(&selection, EngineKind::Progressive, start.elapsed(), None))
}

/// Solves one extreme pair; every returned selection is eligible by
/// construction (window extremes dominate the composition's own).
fn solve_pair(ctx: &SolverCtx<'_>, pair: &Pair, delta: f64) -> (u64, Vec<usize>) {
    let budget = ctx.instance.budget;
    let omega_mask = ctx.union_mask(&pair.omega);
    let o_max_w = window_tx_fanout(ctx, &pair.window);

    // Diversity of each window module excluding the core's transactions,
    // scaled by the window fanout bound.
    let items: Vec<KnapsackItem<usize>> = pair
        .window
        .iter()
        .map(|&k| KnapsackItem {
            id: k,
            weight: ctx.contrib[k],
            value: ratio_u64(ctx.masks[k].count_minus(&omega_mask), 1)
                / BigRational::from_integer(o_max_w.into()),
        })
        .collect();

    let chosen: Vec<usize> = match pair.cap.headroom(pair.branch_omega) {
        None => items.iter().map(|it| it.id).collect(), // unbounded degree
        Some(headroom) => delta_kp(&items, headroom, delta),
    };

    let kp_size: u64 = chosen.iter().map(|&k| ctx.sizes[k]).sum();
    let selection = if pair.size_omega + kp_size > budget {
        repair_for_budget(ctx, pair, &omega_mask)
    } else {
        let mut sel = pair.omega.clone();
        sel.extend(&chosen);
        sel.sort_unstable();
        sel
    };
    let diversity = ctx.union_mask(&selection).count();
    (diversity, selection)
}

/// Rebuilds from the mandatory core, adding window modules by best
/// diversity-gain per coin while both the coin budget and the degree cap
/// still admit them.
fn repair_for_budget(ctx: &SolverCtx<'_>, pair: &Pair, omega_mask: &super::TxMask) -> Vec<usize> {
    let budget = ctx.instance.budget;
    let mut selection = pair.omega.clone();
    let mut mask = omega_mask.clone();
    let mut size = pair.size_omega;
    let mut branch = pair.branch_omega;
    let mut pool: Vec<usize> = pair.window.to_vec();

    loop {
        let mut best: Option<(usize, u64)> = None; // (pool position, gain)
        for (pos, &k) in pool.iter().enumerate() {
            if size + ctx.sizes[k] > budget || !pair.cap.admits(branch + ctx.contrib[k]) {
                continue;
            }
            let gain = ctx.masks[k].count_minus(&mask);
            let better = match best {
                None => true,
                // Compare gain/size by cross-multiplication; ties keep the
                // lower module index.
                Some((bpos, bgain)) => {
                    let (bk, bsize) = (pool[bpos], ctx.sizes[pool[bpos]]);
                    let lhs = gain as u128 * bsize as u128;
                    let rhs = bgain as u128 * ctx.sizes[k] as u128;
                    lhs > rhs || (lhs == rhs && k < bk)
                }
            };
            if better {
                best = Some((pos, gain));
            }
        }
        match best {
            Some((pos, _)) => {
                let k = pool.swap_remove(pos);
                mask.or_with(&ctx.masks[k]);
                size += ctx.sizes[k];
                branch += ctx.contrib[k];
                selection.push(k);
            }
            None => break,
        }
    }
    selection.sort_unstable();
    selection
}
