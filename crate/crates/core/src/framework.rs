//! Batch-oriented spend flow: partition the block stream into coin batches,
//! keep each batch's related set disjoint-superset, and guard the fresh-coin
//! count so a spendable ring always exists.

use std::collections::{BTreeMap, BTreeSet};

use crate::chain::{ChainTrace, CoinId, RelatedRsSet, RingSignature, RsId, TxId};
use crate::ci::replay;
use crate::ds::{extract_modules, tx_fanout_bounds, ModuleKind};
use crate::engines::{run_engine, EngineKind, EngineParams, ProblemInstance, SelectionResult};
use crate::error::{Error, Result};
use crate::rational::CiLevel;
use num_traits::One;

/// One contiguous block range whose coins form a mixin universe.
#[derive(Debug, Clone)]
pub struct Batch {
    pub batch_id: usize,
    pub first_height: u64,
    pub last_height: u64,
    pub universe: BTreeSet<CoinId>,
    pub rs_set: RelatedRsSet,
    pub lambda: u64,
    /// Max coins observed in a single block, measured from the trace.
    pub lambda_prime: u64,
    /// A trailing batch that never reached the coin threshold.
    pub partial: bool,
}

impl Batch {
    /// Coins not contained in any ring signature of the batch.
    pub fn fresh(&self) -> BTreeSet<CoinId> {
        let members = self.rs_set.member_coins();
        self.universe
            .iter()
            .filter(|c| !members.contains(*c))
            .cloned()
            .collect()
    }
}

/// Splits the trace into consecutive batches: blocks accumulate until the
/// batch holds at least `lambda` coins. Ring signatures attach to the batch
/// whose universe contains all their members; a ring spanning batches is an
/// error. Empty blocks never close a batch. The trailing batch may be
/// partial and is flagged.
pub fn build_batches(trace: &ChainTrace, lambda: u64) -> Result<Vec<Batch>> {
    if lambda < 2 {
        return Err(Error::InvalidParams("lambda must be at least 2".into()));
    }
    let blocks = trace.blocks_ordered();
    let lambda_prime = blocks
        .iter()
        .map(|b| b.tx_outputs.iter().map(|g| g.len() as u64).sum::<u64>())
        .max()
        .unwrap_or(0);

    let mut batches: Vec<Batch> = Vec::new();
    let mut current: Option<Batch> = None;
    for block in &blocks {
        let coins: Vec<CoinId> = block.tx_outputs.iter().flatten().cloned().collect();
        if coins.is_empty() && current.is_none() {
            continue;
        }
        let batch = current.get_or_insert_with(|| Batch {
            batch_id: batches.len(),
            first_height: block.height,
            last_height: block.height,
            universe: BTreeSet::new(),
            rs_set: RelatedRsSet::empty(),
            lambda,
            lambda_prime,
            partial: false,
        });
        batch.last_height = block.height;
        batch.universe.extend(coins);
        if batch.universe.len() as u64 >= lambda {
            batches.push(current.take().unwrap());
        }
    }
    if let Some(mut tail) = current.take() {
        tail.partial = true;
        batches.push(tail);
    }

    // Attach each ring to the unique batch containing its members.
    let mut assignments: BTreeMap<usize, Vec<RingSignature>> = BTreeMap::new();
    for rs in trace.all_ring_signatures() {
        let home = batches
            .iter()
            .position(|b| rs.members.iter().all(|c| b.universe.contains(c)));
        match home {
            Some(idx) => assignments.entry(idx).or_default().push(rs.clone()),
            None => {
                return Err(Error::SpanningRs {
                    rs_id: rs.rs_id.0.clone(),
                })
            }
        }
    }
    for (idx, list) in assignments {
        batches[idx].rs_set = RelatedRsSet::new(list)?;
    }
    Ok(batches)
}

/// Spend request parameters for [`select_in_batch`].
#[derive(Debug, Clone)]
pub struct SpendRequest {
    pub coin: CoinId,
    pub budget: u64,
    pub level: CiLevel,
    pub engine: EngineKind,
    pub params: EngineParams,
}

/// Builds the batch's module set, runs the engine, enforces the fresh-coin
/// guard, and commits the resulting ring to the batch. Returns the engine
/// result and the committed ring.
pub fn select_in_batch(
    batch: &mut Batch,
    coin_tx: &BTreeMap<CoinId, TxId>,
    request: &SpendRequest,
) -> Result<(SelectionResult, RingSignature)> {
    if !batch.universe.contains(&request.coin) {
        return Err(Error::SpendOutsideBatch {
            coin: request.coin.0.clone(),
        });
    }
    let state = replay(&batch.rs_set)?;
    if state.pr_spent(&request.coin).is_one() {
        return Err(Error::SpendForced {
            coin: request.coin.0.clone(),
        });
    }

    let modules = extract_modules(&batch.rs_set, &batch.universe, coin_tx)?;
    let target = modules
        .iter()
        .find(|m| m.coins.contains(&request.coin))
        .expect("universe partition covers the spend coin")
        .module_id
        .clone();
    let (o_max, o_min) = tx_fanout_bounds(&modules, coin_tx);
    let instance = ProblemInstance {
        modules,
        target_module: target,
        budget: request.budget,
        level: request.level.clone(),
        coin_tx: batch
            .universe
            .iter()
            .filter_map(|c| coin_tx.get(c).map(|t| (c.clone(), t.clone())))
            .collect(),
        o_max,
        o_min,
    };
    instance.validate()?;

    let mut result = run_engine(&instance, request.engine, &request.params)?;
    if !result.eligible {
        return Err(Error::NoEligibleComposition);
    }
    result = repair_fresh_guard(batch, &instance, result, request)?;

    let members: BTreeSet<CoinId> = result
        .chosen
        .iter()
        .flat_map(|id| instance.module(id).expect("chosen from pool").coins.clone())
        .collect();
    let rs = RingSignature {
        rs_id: RsId(format!("spend_{}_{}", batch.batch_id, request.coin)),
        members,
        order_index: batch.rs_set.len() as u64 + 1,
    };
    batch.rs_set = batch.rs_set.with_appended(rs.clone());
    debug_assert!(crate::ds::check_ds(&batch.rs_set).is_ds);
    debug_assert_ne!(batch.fresh().len(), 1);
    Ok((result, rs))
}

/// Keeps the batch's fresh-coin count away from exactly one: first try
/// adding one more fresh coin, then try dropping a chosen fresh coin, then
/// give up.
fn repair_fresh_guard(
    batch: &Batch,
    instance: &ProblemInstance,
    result: SelectionResult,
    request: &SpendRequest,
) -> Result<SelectionResult> {
    let fresh_after = |chosen: &BTreeSet<crate::ds::ModuleId>| -> usize {
        let consumed: BTreeSet<&CoinId> = chosen
            .iter()
            .flat_map(|id| instance.module(id).expect("chosen from pool").coins.iter())
            .collect();
        batch
            .fresh()
            .iter()
            .filter(|c| !consumed.contains(*c))
            .count()
    };
    if fresh_after(&result.chosen) != 1 {
        return Ok(result);
    }

    let ctx = crate::engines::SolverCtx::new(instance)?;
    let index_of = |id: &crate::ds::ModuleId| ctx.modules.iter().position(|m| &m.module_id == id);

    // One fresh coin would remain; pull it in if the ring still fits.
    let leftover: Vec<usize> = (0..ctx.len())
        .filter(|&k| {
            ctx.modules[k].kind == ModuleKind::FreshCoin
                && !result.chosen.contains(&ctx.modules[k].module_id)
        })
        .collect();
    if let &[extra] = leftover.as_slice() {
        let mut selection: Vec<usize> = result
            .chosen
            .iter()
            .filter_map(|id| index_of(id))
            .collect();
        selection.push(extra);
        selection.sort_unstable();
        let stats = ctx.stats(&selection);
        if ctx.is_eligible(&stats) {
            return Ok(ctx.result_from(&selection, request.engine, result.elapsed, result.rounds));
        }
    }

    // Otherwise drop one chosen fresh coin (never the spend's own module).
    let target_id = &instance.target_module;
    for id in result.chosen.iter().rev() {
        if id == target_id {
            continue;
        }
        let Some(k) = index_of(id) else { continue };
        if ctx.modules[k].kind != ModuleKind::FreshCoin {
            continue;
        }
        let selection: Vec<usize> = result
            .chosen
            .iter()
            .filter(|other| *other != id)
            .filter_map(|other| index_of(other))
            .collect();
        let stats = ctx.stats(&selection);
        if ctx.is_eligible(&stats) && fresh_after(&selection.iter().map(|&k| ctx.modules[k].module_id.clone()).collect()) != 1 {
            return Ok(ctx.result_from(&selection, request.engine, result.elapsed, result.rounds));
        }
    }
    Err(Error::FreshGuard)
}
