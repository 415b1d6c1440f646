//! Shared constructors for engine tests.

use std::collections::{BTreeMap, BTreeSet};

use crate::chain::{CoinId, TxId};
use crate::ds::{ModuleId, ModuleKind, ModuleSummary};
use crate::rational::{CiLevel, Prob};
use num_traits::Zero;

use super::ProblemInstance;

/// A super-ring module whose coins are spread uniformly over the given
/// transactions (round-robin).
pub fn super_module(
    id: &str,
    coins: &[&str],
    txs: &[&str],
    degree: u64,
    pr_max: Prob,
    pr_min: Prob,
) -> ModuleSummary {
    assert!(degree <= coins.len() as u64);
    ModuleSummary {
        module_id: ModuleId(id.into()),
        kind: ModuleKind::SuperRs,
        coins: coins.iter().map(|c| CoinId(c.to_string())).collect(),
        ns: coins.len() as u64 - degree,
        degree,
        st: txs.iter().map(|t| TxId(t.to_string())).collect(),
        dive: txs.len() as u64,
        pr_max,
        pr_min,
    }
}

pub fn fresh_module(id: &str, coin: &str, tx: &str) -> ModuleSummary {
    ModuleSummary {
        module_id: ModuleId(id.into()),
        kind: ModuleKind::FreshCoin,
        coins: BTreeSet::from([CoinId(coin.into())]),
        ns: 0,
        degree: 1,
        st: BTreeSet::from([TxId(tx.into())]),
        dive: 1,
        pr_max: Prob::zero(),
        pr_min: Prob::zero(),
    }
}

/// Wires modules into an instance, assigning each coin to its module's
/// transactions round-robin.
pub fn instance_from(
    modules: Vec<ModuleSummary>,
    target: &str,
    budget: u64,
    level: CiLevel,
) -> ProblemInstance {
    let mut coin_tx: BTreeMap<CoinId, TxId> = BTreeMap::new();
    for m in &modules {
        let txs: Vec<&TxId> = m.st.iter().collect();
        for (i, coin) in m.coins.iter().enumerate() {
            coin_tx.insert(coin.clone(), txs[i % txs.len()].clone());
        }
    }
    let mut counts: BTreeMap<&TxId, u64> = BTreeMap::new();
    for tx in coin_tx.values() {
        *counts.entry(tx).or_insert(0) += 1;
    }
    let o_max = counts.values().max().copied().unwrap_or(1);
    let o_min = counts.values().min().copied().unwrap_or(1);
    let instance = ProblemInstance {
        modules,
        target_module: ModuleId(target.into()),
        budget,
        level,
        coin_tx,
        o_max,
        o_min,
    };
    instance.validate().expect("test instance is valid");
    instance
}
