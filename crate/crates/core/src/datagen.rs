//! Instance and trace generators: synthetic module pools, real-shaped pools
//! drawn from a trace, nested-chain traces whose extraction reproduces the
//! generated shapes, and the bundled block-stream fixture.
//!
//! Every generator is deterministic for a fixed seed; the stream is ChaCha12
//! and all draws happen in a documented, fixed order.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::chain::{Block, ChainTrace, Coin, CoinId, RelatedRsSet, RingSignature, TxId};
use crate::ds::{tx_fanout_bounds, ModuleId, ModuleKind, ModuleSummary};
use crate::engines::ProblemInstance;
use crate::error::{Error, Result};
use crate::rational::{from_f64, ratio_u64, CiLevel, Prob};

/// Synthetic pool settings; defaults are the bold column of the synthetic
/// experiment grid.
#[derive(Debug, Clone)]
pub struct SyntheticParams {
    pub n: usize,
    /// Historical transaction count.
    pub o: usize,
    pub budget: u64,
    pub level: CiLevel,
    pub degree_range: (u64, u64),
    pub size_range: (u64, u64),
    pub pr_max_range: (f64, f64),
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            n: 50,
            o: 70,
            budget: 150,
            level: CiLevel::from_epsilon(1.8),
            degree_range: (1, 9),
            size_range: (14, 18),
            pr_max_range: (0.1, 0.5),
            seed: 0,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.o == 0 {
            return Err(Error::InvalidParams("n and o must be positive".into()));
        }
        if self.degree_range.0 > self.degree_range.1
            || self.size_range.0 > self.size_range.1
            || self.pr_max_range.0 > self.pr_max_range.1
        {
            return Err(Error::InvalidParams("empty parameter range".into()));
        }
        if self.degree_range.0 < 1 || self.size_range.0 < 1 {
            return Err(Error::InvalidParams("degrees and sizes start at 1".into()));
        }
        Ok(())
    }
}

/// Solves the level equality for the minimal marginal: with
/// `A = e^eps * (1 - pr_max) / ((d-1) * pr_max + 1)`, the matching
/// `pr_min` is `(1 - A) / (1 + A * (d - 1))`, clamped at zero.
pub fn pr_min_from_ci(pr_max: &Prob, degree: u64, level: &CiLevel) -> Prob {
    assert!(degree >= 1);
    let exp_eps = match level.exp_exact() {
        Some(q) => q.clone(),
        None => from_f64(level.exp_f64()),
    };
    let d_minus_1 = ratio_u64(degree - 1, 1);
    let a = exp_eps * (Prob::one() - pr_max) / (&d_minus_1 * pr_max + Prob::one());
    let pr_min = (Prob::one() - &a) / (Prob::one() + a * d_minus_1);
    if pr_min.is_negative() {
        Prob::zero()
    } else {
        pr_min
    }
}

fn tx_label(i: usize) -> TxId {
    TxId(format!("t{i:03}"))
}

/// Draws one synthetic module pool. Draw order per module: size, degree
/// (redrawn until it fits the size), pr_max; then every coin's source
/// transaction; finally the target module.
///
/// The target is drawn among modules that keep a positive appended
/// branching (degree at least 2); a degree-1 module's coins would be
/// deducibly spent in any realizable history.
pub fn gen_synthetic(params: &SyntheticParams) -> Result<ProblemInstance> {
    params.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let width = (params.n.max(2) - 1).to_string().len();
    let mut modules = Vec::with_capacity(params.n);
    let mut coin_tx: BTreeMap<CoinId, TxId> = BTreeMap::new();

    for i in 0..params.n {
        let size = rng.gen_range(params.size_range.0..=params.size_range.1);
        let mut degree = rng.gen_range(params.degree_range.0..=params.degree_range.1);
        while degree > size {
            degree = rng.gen_range(params.degree_range.0..=params.degree_range.1);
        }
        let pr_max_f = rng.gen_range(params.pr_max_range.0..=params.pr_max_range.1);
        let pr_max = from_f64(pr_max_f);
        let pr_min = pr_min_from_ci(&pr_max, degree, &params.level);

        let module_id = ModuleId(format!("m{i:0width$}"));
        let mut coins = BTreeSet::new();
        let mut st = BTreeSet::new();
        for c in 0..size {
            let coin = CoinId(format!("{module_id}_c{c:02}"));
            let tx = tx_label(rng.gen_range(0..params.o));
            st.insert(tx.clone());
            coin_tx.insert(coin.clone(), tx);
            coins.insert(coin);
        }
        modules.push(ModuleSummary {
            module_id,
            kind: ModuleKind::SuperRs,
            ns: size - degree,
            degree,
            dive: st.len() as u64,
            st,
            coins,
            pr_max,
            pr_min,
        });
    }

    let spendable: Vec<usize> = (0..params.n)
        .filter(|&i| modules[i].branching_contribution() >= 1)
        .collect();
    let target_idx = if spendable.is_empty() {
        rng.gen_range(0..params.n)
    } else {
        spendable[rng.gen_range(0..spendable.len())]
    };
    let target_module = modules[target_idx].module_id.clone();
    let (o_max, o_min) = tx_fanout_bounds(&modules, &coin_tx);

    let instance = ProblemInstance {
        modules,
        target_module,
        budget: params.budget,
        level: params.level.clone(),
        coin_tx,
        o_max,
        o_min,
    };
    instance.validate()?;
    Ok(instance)
}

/// Conditions under which a generated pool deserves a warning.
pub fn pool_warnings(instance: &ProblemInstance) -> Vec<String> {
    let mut warnings = Vec::new();
    let dead = instance
        .modules
        .iter()
        .filter(|m| m.kind == ModuleKind::SuperRs && m.degree <= 1)
        .count();
    if dead > 0 {
        warnings.push(format!(
            "{dead} module(s) have degree 1: their coins are deducibly spent in any \
             realizable history and they cannot anchor a spend"
        ));
    }
    warnings
}

/// Real-shaped pool settings; defaults are the bold column of the real
/// experiment grid.
#[derive(Debug, Clone)]
pub struct RealShapedParams {
    pub budget: u64,
    pub level: CiLevel,
    pub degree_range: (u64, u64),
    pub pr_max_range: (f64, f64),
    pub rs_count: usize,
    pub rs_size: usize,
    pub seed: u64,
}

impl Default for RealShapedParams {
    fn default() -> Self {
        RealShapedParams {
            budget: 80,
            level: CiLevel::from_epsilon(1.5),
            degree_range: (1, 7),
            pr_max_range: (0.1, 0.6),
            rs_count: 57,
            rs_size: 11,
            seed: 0,
        }
    }
}

/// Samples `rs_count` modules of `rs_size` coins each from the trace without
/// replacement; every unsampled coin becomes a fresh-coin module. Source
/// transactions are the trace's own; degrees and maximal marginals are drawn
/// uniformly and the minimal marginal closes the level equality.
pub fn gen_real_shaped(trace: &ChainTrace, params: &RealShapedParams) -> Result<ProblemInstance> {
    let needed = params.rs_count * params.rs_size;
    if trace.coins.len() < needed {
        return Err(Error::InsufficientCoins {
            needed,
            available: trace.coins.len(),
        });
    }
    if params.degree_range.0 < 1 || params.degree_range.0 > params.degree_range.1 {
        return Err(Error::InvalidParams("bad degree range".into()));
    }
    let coin_tx_all = trace.coin_tx_map();
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let mut pool: Vec<CoinId> = coin_tx_all.keys().cloned().collect();
    pool.shuffle(&mut rng);

    let width = (params.rs_count.max(2) - 1).to_string().len();
    let mut modules = Vec::new();
    let mut coin_tx: BTreeMap<CoinId, TxId> = BTreeMap::new();
    for i in 0..params.rs_count {
        let coins: BTreeSet<CoinId> = pool[i * params.rs_size..(i + 1) * params.rs_size]
            .iter()
            .cloned()
            .collect();
        let mut degree = rng.gen_range(params.degree_range.0..=params.degree_range.1);
        if degree > params.rs_size as u64 {
            degree = params.rs_size as u64;
        }
        let pr_max_f = rng.gen_range(params.pr_max_range.0..=params.pr_max_range.1);
        let pr_max = from_f64(pr_max_f);
        let pr_min = pr_min_from_ci(&pr_max, degree, &params.level);
        let st: BTreeSet<TxId> = coins.iter().map(|c| coin_tx_all[c].clone()).collect();
        for c in &coins {
            coin_tx.insert(c.clone(), coin_tx_all[c].clone());
        }
        modules.push(ModuleSummary {
            module_id: ModuleId(format!("m{i:0width$}")),
            kind: ModuleKind::SuperRs,
            ns: params.rs_size as u64 - degree,
            degree,
            dive: st.len() as u64,
            st,
            coins,
            pr_max,
            pr_min,
        });
    }
    for coin in &pool[needed..] {
        let tx = coin_tx_all[coin].clone();
        coin_tx.insert(coin.clone(), tx.clone());
        modules.push(ModuleSummary {
            module_id: ModuleId(format!("fresh_{coin}")),
            kind: ModuleKind::FreshCoin,
            coins: BTreeSet::from([coin.clone()]),
            ns: 0,
            degree: 1,
            st: BTreeSet::from([tx]),
            dive: 1,
            pr_max: Prob::zero(),
            pr_min: Prob::zero(),
        });
    }
    modules.sort_by(|a, b| a.module_id.cmp(&b.module_id));

    let spendable: Vec<usize> = (0..modules.len())
        .filter(|&i| modules[i].branching_contribution() >= 1)
        .collect();
    let target_idx = spendable[rng.gen_range(0..spendable.len())];
    let target_module = modules[target_idx].module_id.clone();
    let (o_max, o_min) = tx_fanout_bounds(&modules, &coin_tx);
    let instance = ProblemInstance {
        modules,
        target_module,
        budget: params.budget,
        level: params.level.clone(),
        coin_tx,
        o_max,
        o_min,
    };
    instance.validate()?;
    Ok(instance)
}

/// Shape of a random disjoint-superset related set for oracle-equivalence
/// testing.
#[derive(Debug, Clone)]
pub struct DsSetConfig {
    pub max_rs: usize,
    pub max_coins: usize,
    /// Chance that a chain step repeats the previous coin set exactly.
    pub equal_set_prob: f64,
    /// Historical transactions are about `coins / tx_scale`.
    pub tx_scale: usize,
    /// Lower bound on every ring's branching at its append position;
    /// 2 keeps all marginals strictly below one.
    pub min_degree: u64,
    /// Upper bound on the permutation count, enforced during generation so
    /// the enumeration stays desk-scale.
    pub max_leaves: u64,
}

impl Default for DsSetConfig {
    fn default() -> Self {
        DsSetConfig {
            max_rs: 12,
            max_coins: 24,
            equal_set_prob: 0.15,
            tx_scale: 2,
            min_degree: 1,
            max_leaves: 50_000,
        }
    }
}

/// A random disjoint-superset related set: coins are split into groups and
/// each group carries a nested (occasionally equal-set) chain of rings.
/// Every ring keeps at least one assignable coin, so the permutation tree is
/// feasible by construction.
pub fn gen_ds_related_set(
    cfg: &DsSetConfig,
    seed: u64,
) -> (RelatedRsSet, BTreeSet<CoinId>, BTreeMap<CoinId, TxId>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n_coins = rng.gen_range(4..=cfg.max_coins.max(4));
    let coins: Vec<CoinId> = (0..n_coins).map(|i| CoinId(format!("c{i:02}"))).collect();
    let n_txs = (n_coins / cfg.tx_scale.max(1)).max(1);
    let coin_tx: BTreeMap<CoinId, TxId> = coins
        .iter()
        .map(|c| (c.clone(), tx_label(rng.gen_range(0..n_txs))))
        .collect();

    let mut shuffled = coins.clone();
    shuffled.shuffle(&mut rng);
    let n_groups = rng.gen_range(1..=4.min(n_coins / 2).max(1));
    let mut groups: Vec<Vec<CoinId>> = vec![Vec::new(); n_groups];
    for (i, coin) in shuffled.into_iter().enumerate() {
        groups[i % n_groups].push(coin);
    }

    let mut chains: Vec<Vec<Vec<CoinId>>> = Vec::new();
    let mut total_rs = 0usize;
    let min_degree = cfg.min_degree.max(1) as usize;
    let mut leaf_budget = cfg.max_leaves.max(1);
    for group in &groups {
        if total_rs >= cfg.max_rs {
            break;
        }
        let max_len = group.len().min(cfg.max_rs - total_rs).min(4);
        if max_len == 0 {
            continue;
        }
        let len = rng.gen_range(0..=max_len);
        if len == 0 {
            continue;
        }
        let mut chain = Vec::with_capacity(len);
        let mut prev_size = 0usize;
        for k in 0..len {
            // A ring at chain position k has k earlier nested subsets, so
            // its branching at append is its size minus k; keep that at
            // least min_degree and within the leaf budget.
            let min_size = (k + min_degree).max(prev_size);
            let max_branch = (leaf_budget as usize).min(group.len());
            let max_size = (k + max_branch).min(group.len());
            if min_size > max_size {
                break;
            }
            let size = if prev_size >= k + min_degree && rng.gen_bool(cfg.equal_set_prob) {
                prev_size // equal coin set as the previous ring
            } else {
                rng.gen_range(min_size..=max_size)
            };
            leaf_budget /= (size - k) as u64;
            chain.push(group[..size].to_vec());
            prev_size = size;
            if leaf_budget == 0 {
                break;
            }
        }
        if chain.is_empty() {
            continue;
        }
        total_rs += chain.len();
        chains.push(chain);
    }

    // Random merge that preserves each chain's internal order.
    let mut cursors = vec![0usize; chains.len()];
    let mut rs_list = Vec::new();
    let mut order = 1u64;
    loop {
        let open: Vec<usize> = (0..chains.len())
            .filter(|&g| cursors[g] < chains[g].len())
            .collect();
        if open.is_empty() {
            break;
        }
        let g = open[rng.gen_range(0..open.len())];
        let members = chains[g][cursors[g]].clone();
        cursors[g] += 1;
        rs_list.push(RingSignature::new(format!("r{order:02}"), members, order));
        order += 1;
    }

    let rs_set = RelatedRsSet::new(rs_list).expect("generated rings are non-empty");
    (rs_set, coins.into_iter().collect(), coin_tx)
}

/// Settings for [`gen_history_trace`].
#[derive(Debug, Clone)]
pub struct HistoryParams {
    pub n_modules: usize,
    pub o: usize,
    pub degree_range: (u64, u64),
    pub size_range: (u64, u64),
    pub fresh_coins: usize,
    pub seed: u64,
}

impl Default for HistoryParams {
    fn default() -> Self {
        HistoryParams {
            n_modules: 8,
            o: 20,
            degree_range: (2, 6),
            size_range: (4, 9),
            fresh_coins: 4,
            seed: 0,
        }
    }
}

/// Builds a trace whose extracted modules reproduce the drawn sizes and
/// degrees exactly: each module is realized as a nested chain of `ns` rings
/// under one super ring, all inside one block. Spend marginals then follow
/// from the replay rather than from fabrication. Degrees below 2 are lifted
/// to 2 (with a warning) since a degree-1 super ring leaves nothing
/// spendable.
pub fn gen_history_trace(params: &HistoryParams) -> Result<(ChainTrace, Vec<String>)> {
    if params.size_range.0 < 2 || params.size_range.0 > params.size_range.1 {
        return Err(Error::InvalidParams("history sizes start at 2".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let mut warnings = Vec::new();
    let mut coins = Vec::new();
    let mut blocks = Vec::new();
    let mut order = 1u64;

    for i in 0..params.n_modules {
        let size = rng.gen_range(params.size_range.0..=params.size_range.1);
        let mut degree = rng
            .gen_range(params.degree_range.0..=params.degree_range.1)
            .min(size);
        if degree < 2 {
            warnings.push(format!(
                "module {i}: degree raised to 2; a degree-1 super ring makes all its coins \
                 deducibly spent"
            ));
            degree = 2;
        }
        let ns = size - degree;
        let module_coins: Vec<CoinId> =
            (0..size).map(|c| CoinId(format!("b{i:02}_c{c:02}"))).collect();
        let mut groups: BTreeMap<TxId, Vec<CoinId>> = BTreeMap::new();
        for coin in &module_coins {
            let tx = tx_label(rng.gen_range(0..params.o));
            coins.push(Coin {
                coin_id: coin.clone(),
                tx_id: tx.clone(),
            });
            groups.entry(tx).or_default().push(coin.clone());
        }
        let mut ring_signatures = Vec::new();
        for k in 1..=ns {
            ring_signatures.push(RingSignature::new(
                format!("b{i:02}_r{k:02}"),
                module_coins[..(k + 1) as usize].iter().cloned(),
                order,
            ));
            order += 1;
        }
        ring_signatures.push(RingSignature::new(
            format!("b{i:02}_super"),
            module_coins.iter().cloned(),
            order,
        ));
        order += 1;
        blocks.push(Block {
            height: i as u64 + 1,
            tx_outputs: groups.into_values().collect(),
            ring_signatures,
        });
    }

    if params.fresh_coins > 0 {
        let mut groups: BTreeMap<TxId, Vec<CoinId>> = BTreeMap::new();
        for c in 0..params.fresh_coins {
            let coin = CoinId(format!("fx_c{c:02}"));
            let tx = tx_label(rng.gen_range(0..params.o));
            coins.push(Coin {
                coin_id: coin.clone(),
                tx_id: tx.clone(),
            });
            groups.entry(tx).or_default().push(coin);
        }
        blocks.push(Block {
            height: params.n_modules as u64 + 1,
            tx_outputs: groups.into_values().collect(),
            ring_signatures: vec![],
        });
    }

    let trace = ChainTrace { coins, blocks };
    trace.validate()?;
    Ok((trace, warnings))
}

/// Realizes an instance's module pool as a concrete trace: each super-ring
/// module becomes a nested chain of `ns` rings under one super ring holding
/// exactly the module's coins, one block per module; fresh-coin modules
/// share a trailing block. Extracting the trace reproduces every module's
/// coin set, source transactions, size, and degree; spend marginals follow
/// from the replay instead of the fabricated values, which is flagged when
/// the two cannot agree (degree-1 modules pin every marginal at one).
pub fn realize_history(instance: &ProblemInstance) -> Result<(ChainTrace, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut coins = Vec::new();
    let mut blocks = Vec::new();
    let mut order = 1u64;
    let mut height = 1u64;
    let mut fresh_groups: BTreeMap<TxId, Vec<CoinId>> = BTreeMap::new();

    for module in &instance.modules {
        let module_coins: Vec<CoinId> = module.coins.iter().cloned().collect();
        for coin in &module_coins {
            let tx = instance
                .coin_tx
                .get(coin)
                .cloned()
                .ok_or_else(|| Error::UnknownId(format!("coin {coin} has no transaction")))?;
            coins.push(Coin {
                coin_id: coin.clone(),
                tx_id: tx.clone(),
            });
            if module.kind == ModuleKind::FreshCoin {
                fresh_groups.entry(tx).or_default().push(coin.clone());
            }
        }
        if module.kind == ModuleKind::FreshCoin {
            continue;
        }
        if module.degree <= 1 {
            warnings.push(format!(
                "module {}: realized with an equal-set tail; its replayed marginals are all 1, \
                 not the fabricated values",
                module.module_id
            ));
        }
        let mut groups: BTreeMap<TxId, Vec<CoinId>> = BTreeMap::new();
        for coin in &module_coins {
            groups
                .entry(instance.coin_tx[coin].clone())
                .or_default()
                .push(coin.clone());
        }
        let mut ring_signatures = Vec::new();
        let ns = module.ns as usize;
        for k in 1..=ns {
            // Nested prefixes; the last may equal the full set (degree 1).
            let take = (k + 1).min(module_coins.len());
            ring_signatures.push(RingSignature::new(
                format!("{}_r{k:02}", module.module_id),
                module_coins[..take].iter().cloned(),
                order,
            ));
            order += 1;
        }
        ring_signatures.push(RingSignature::new(
            format!("{}_super", module.module_id),
            module_coins.iter().cloned(),
            order,
        ));
        order += 1;
        blocks.push(Block {
            height,
            tx_outputs: groups.into_values().collect(),
            ring_signatures,
        });
        height += 1;
    }
    if !fresh_groups.is_empty() {
        blocks.push(Block {
            height,
            tx_outputs: fresh_groups.into_values().collect(),
            ring_signatures: vec![],
        });
    }
    let trace = ChainTrace { coins, blocks };
    trace.validate()?;
    Ok((trace, warnings))
}

/// A ring-free block stream for framework stress: the history is then built
/// up entirely by committed spends.
pub fn gen_blocks_trace(seed: u64, n_blocks: usize, coins_per_block: (usize, usize)) -> ChainTrace {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut coins = Vec::new();
    let mut blocks = Vec::new();
    let mut coin_no = 0usize;
    let mut tx_no = 0usize;
    for h in 0..n_blocks {
        let count = rng.gen_range(coins_per_block.0..=coins_per_block.1);
        let mut remaining = count;
        let mut tx_outputs = Vec::new();
        while remaining > 0 {
            let group = rng.gen_range(1..=remaining.min(3));
            let tx = TxId(format!("t{tx_no:04}"));
            tx_no += 1;
            let mut ids = Vec::new();
            for _ in 0..group {
                let coin = CoinId(format!("c{coin_no:04}"));
                coin_no += 1;
                coins.push(Coin {
                    coin_id: coin.clone(),
                    tx_id: tx.clone(),
                });
                ids.push(coin);
            }
            tx_outputs.push(ids);
            remaining -= group;
        }
        blocks.push(Block {
            height: h as u64 + 1,
            tx_outputs,
            ring_signatures: vec![],
        });
    }
    let trace = ChainTrace { coins, blocks };
    trace.validate().expect("generated trace is consistent");
    trace
}

/// The bundled hour-of-blocks fixture: 32 blocks, 285 transactions, 633
/// coins, and 57 disjoint 11-coin ring signatures, with one single-coin
/// block and one 77-coin block. Every ring draws from a single block, so
/// any batching threshold keeps it inside one batch; 6 coins stay fresh.
pub fn monero_shaped_trace() -> ChainTrace {
    const FIRST_HEIGHT: u64 = 2_028_242;
    // (block index, coin count) special cases; the rest: 20 blocks of 22,
    // then 5 of 11, then 5 of 12.
    let mut sizes = Vec::new();
    let mut plain = 0usize;
    for idx in 0..32usize {
        let size = match idx {
            5 => 77,
            10 => 1,
            _ => {
                plain += 1;
                match plain {
                    1..=20 => 22,
                    21..=25 => 11,
                    _ => 12,
                }
            }
        };
        sizes.push(size);
    }
    debug_assert_eq!(sizes.iter().sum::<usize>(), 633);

    let mut coins = Vec::new();
    let mut blocks = Vec::new();
    let mut coin_no = 0usize;
    let mut tx_no = 0usize;
    let mut rs_no = 0usize;
    let mut order = 1u64;
    for (idx, &size) in sizes.iter().enumerate() {
        // Transaction layout per block size; sums match the block size.
        let tx_sizes: Vec<usize> = match size {
            77 => vec![16, 16, 16, 16, 2, 2, 3, 3, 3],
            1 => vec![1],
            22 => vec![2; 11],
            11 => vec![2, 2, 2, 2, 3],
            12 => vec![2; 6],
            _ => unreachable!(),
        };
        debug_assert_eq!(tx_sizes.iter().sum::<usize>(), size);
        let mut tx_outputs = Vec::new();
        let mut block_coins = Vec::new();
        for group in tx_sizes {
            let tx = TxId(format!("tx{tx_no:04}"));
            tx_no += 1;
            let mut ids = Vec::new();
            for _ in 0..group {
                let coin = CoinId(format!("c{coin_no:04}"));
                coin_no += 1;
                coins.push(Coin {
                    coin_id: coin.clone(),
                    tx_id: tx.clone(),
                });
                ids.push(coin.clone());
                block_coins.push(coin);
            }
            tx_outputs.push(ids);
        }
        let mut ring_signatures = Vec::new();
        for chunk in block_coins.chunks(11) {
            if chunk.len() < 11 {
                break; // leftovers stay fresh
            }
            ring_signatures.push(RingSignature::new(
                format!("rs{rs_no:03}"),
                chunk.iter().cloned(),
                order,
            ));
            rs_no += 1;
            order += 1;
        }
        blocks.push(Block {
            height: FIRST_HEIGHT + idx as u64,
            tx_outputs,
            ring_signatures,
        });
    }
    let trace = ChainTrace { coins, blocks };
    trace.validate().expect("fixture is consistent");
    debug_assert_eq!(trace.coin_count(), 633);
    debug_assert_eq!(trace.tx_count(), 285);
    debug_assert_eq!(trace.all_ring_signatures().len(), 57);
    trace
}

/// Substitutes the generated extremes back into both sides of the level
/// equality; used by tests to confirm the closure is exact.
pub fn ci_equality_gap(pr_max: &Prob, pr_min: &Prob, degree: u64, level: &CiLevel) -> f64 {
    let exp_eps = match level.exp_exact() {
        Some(q) => q.clone(),
        None => from_f64(level.exp_f64()),
    };
    let d_minus_1 = ratio_u64(degree - 1, 1);
    let lhs = exp_eps * (Prob::one() - pr_max) / (&d_minus_1 * pr_max + Prob::one());
    let rhs = (Prob::one() - pr_min) / (&d_minus_1 * pr_min + Prob::one());
    crate::rational::to_f64(&(lhs - rhs))
}
