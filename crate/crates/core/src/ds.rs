//! Disjoint-superset preprocessing: validation, maximal-ring detection, and
//! extraction of the selection units ("modules") with their attributes.
//!
//! A module is either a super ring signature (an inclusion-maximal ring; for
//! equal coin sets the latest one) or a single coin not contained in any
//! ring yet. Two degree notions coexist:
//!
//! * `degree` of a module: `|str| - ns`, where `ns` counts the strict
//!   subsets plus equal-set rings with an earlier order index. This is the
//!   additive quantity of [`module_union_degree`].
//! * the branching a module contributes when a new ring is composed from
//!   it: the super ring itself also consumes one of its coins inside the
//!   permutation tree, so the contribution is `degree - 1` for super-ring
//!   modules and 1 for fresh coins. [`composition_branching`] sums these and
//!   equals the appended ring's permutation-tree branching, which is what
//!   every indistinguishability check takes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::chain::{CoinId, RelatedRsSet, RsId, TxId};
use crate::ci::replay;
use crate::error::{Error, Result};
use crate::rational::{ratio_serde, Prob};
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModuleId(pub String);

impl std::fmt::Display for ModuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModuleKind {
    SuperRs,
    FreshCoin,
}

impl std::fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModuleKind::SuperRs => f.write_str("super-rs"),
            ModuleKind::FreshCoin => f.write_str("fresh-coin"),
        }
    }
}

/// One selection unit with all the attributes the solvers consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleSummary {
    pub module_id: ModuleId,
    pub kind: ModuleKind,
    /// The module's coin set.
    #[serde(rename = "str")]
    pub coins: BTreeSet<CoinId>,
    /// Rings nested inside (strict subsets, plus equal sets ordered earlier).
    pub ns: u64,
    /// `|str| - ns`.
    pub degree: u64,
    /// Source transactions of the coins.
    pub st: BTreeSet<TxId>,
    /// `|st|`.
    pub dive: u64,
    #[serde(with = "ratio_serde")]
    pub pr_max: Prob,
    #[serde(with = "ratio_serde")]
    pub pr_min: Prob,
}

impl ModuleSummary {
    pub fn size(&self) -> u64 {
        self.coins.len() as u64
    }

    /// Branching added to the permutation tree when this module joins a new
    /// composed ring. Zero means the module's coins are fully consumed by
    /// its own history.
    pub fn branching_contribution(&self) -> u64 {
        match self.kind {
            ModuleKind::FreshCoin => 1,
            ModuleKind::SuperRs => self.degree.saturating_sub(1),
        }
    }
}

/// Result of the pairwise disjoint-or-nested test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DsDiagnostics {
    pub is_ds: bool,
    pub violating_pair: Option<(RsId, RsId)>,
}

/// A related set is disjoint-superset when every pair of rings is disjoint
/// or nested (either direction, equality allowed).
pub fn check_ds(rs_set: &RelatedRsSet) -> DsDiagnostics {
    let list = rs_set.as_slice();
    for i in 0..list.len() {
        for j in (i + 1)..list.len() {
            let (a, b) = (&list[i], &list[j]);
            if a.is_disjoint_from(b) || a.is_subset_of(b) || b.is_subset_of(a) {
                continue;
            }
            return DsDiagnostics {
                is_ds: false,
                violating_pair: Some((a.rs_id.clone(), b.rs_id.clone())),
            };
        }
    }
    DsDiagnostics {
        is_ds: true,
        violating_pair: None,
    }
}

/// The super (maximal) rings of a disjoint-superset set, in order.
///
/// A ring is super when no other ring strictly contains it and no later
/// ring equals it; equal-set chains elect the latest member.
pub fn super_rs(rs_set: &RelatedRsSet) -> Result<Vec<RsId>> {
    let diag = check_ds(rs_set);
    if let Some((a, b)) = diag.violating_pair {
        return Err(Error::NotDisjointSuperset { a: a.0, b: b.0 });
    }
    let list = rs_set.as_slice();
    let mut supers = Vec::new();
    'outer: for (i, rs) in list.iter().enumerate() {
        for (j, other) in list.iter().enumerate() {
            if i == j {
                continue;
            }
            let strictly_contained = rs.is_subset_of(other) && !other.is_subset_of(rs);
            let equal_later = rs.members == other.members && j > i;
            if strictly_contained || equal_later {
                continue 'outer;
            }
        }
        supers.push(rs.rs_id.clone());
    }
    Ok(supers)
}

/// Builds the module set of `(rs_set, universe)`: one module per super ring
/// plus one per fresh coin, with spend extremes taken from the iterative
/// replay of the whole set. Output is sorted by module id and partitions the
/// universe.
pub fn extract_modules(
    rs_set: &RelatedRsSet,
    universe: &BTreeSet<CoinId>,
    coin_tx: &BTreeMap<CoinId, TxId>,
) -> Result<Vec<ModuleSummary>> {
    let super_ids = super_rs(rs_set)?;
    for rs in rs_set.iter() {
        for coin in &rs.members {
            if !universe.contains(coin) {
                return Err(Error::Integrity(format!(
                    "ring member {coin} is outside the universe"
                )));
            }
        }
    }
    let state = replay(rs_set)?;
    let list = rs_set.as_slice();
    let mut modules = Vec::new();
    let mut covered: BTreeSet<CoinId> = BTreeSet::new();

    for id in &super_ids {
        let rs = rs_set.by_id(id).expect("super id comes from the set");
        let ns = list
            .iter()
            .filter(|other| {
                if other.rs_id == rs.rs_id {
                    return false;
                }
                let strict = other.is_subset_of(rs) && other.members != rs.members;
                let equal_earlier = other.members == rs.members && other.order_index < rs.order_index;
                strict || equal_earlier
            })
            .count() as u64;
        let st: BTreeSet<TxId> = rs
            .members
            .iter()
            .map(|c| {
                coin_tx
                    .get(c)
                    .cloned()
                    .ok_or_else(|| Error::UnknownId(format!("coin {c} has no source transaction")))
            })
            .collect::<Result<_>>()?;
        let marginals: Vec<Prob> = rs.members.iter().map(|c| state.pr_spent(c)).collect();
        let pr_max = marginals.iter().max().cloned().expect("ring is non-empty");
        let pr_min = marginals.iter().min().cloned().expect("ring is non-empty");
        covered.extend(rs.members.iter().cloned());
        modules.push(ModuleSummary {
            module_id: ModuleId(format!("srs_{}", rs.rs_id)),
            kind: ModuleKind::SuperRs,
            coins: rs.members.clone(),
            ns,
            degree: rs.len() as u64 - ns,
            dive: st.len() as u64,
            st,
            pr_max,
            pr_min,
        });
    }

    // Everything in no ring at all becomes a fresh-coin module.
    let ring_members = rs_set.member_coins();
    for coin in universe {
        if ring_members.contains(coin) {
            if !covered.contains(coin) {
                return Err(Error::Integrity(format!(
                    "coin {coin} is in a ring but not under any super ring"
                )));
            }
            continue;
        }
        let tx = coin_tx
            .get(coin)
            .cloned()
            .ok_or_else(|| Error::UnknownId(format!("coin {coin} has no source transaction")))?;
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
    Ok(modules)
}

fn assert_disjoint(selected: &[&ModuleSummary]) -> Result<()> {
    let mut seen: BTreeSet<&CoinId> = BTreeSet::new();
    for m in selected {
        for c in &m.coins {
            if !seen.insert(c) {
                return Err(Error::Integrity(format!(
                    "modules overlap on coin {c}"
                )));
            }
        }
    }
    Ok(())
}

/// Additive degree of a composed ring: the sum of member module degrees.
pub fn module_union_degree(selected: &[&ModuleSummary]) -> Result<u64> {
    assert_disjoint(selected)?;
    Ok(selected.iter().map(|m| m.degree).sum())
}

/// Permutation-tree branching of the composed ring: the additive degree
/// minus one per super-ring module.
pub fn composition_branching(selected: &[&ModuleSummary]) -> u64 {
    selected.iter().map(|m| m.branching_contribution()).sum()
}

/// Exact diversity of a composed ring: distinct source transactions.
pub fn union_diversity(selected: &[&ModuleSummary]) -> u64 {
    let mut txs: BTreeSet<&TxId> = BTreeSet::new();
    for m in selected {
        txs.extend(m.st.iter());
    }
    txs.len() as u64
}

/// Max/min number of candidate coins sharing one source transaction.
pub fn tx_fanout_bounds(modules: &[ModuleSummary], coin_tx: &BTreeMap<CoinId, TxId>) -> (u64, u64) {
    let mut counts: BTreeMap<&TxId, u64> = BTreeMap::new();
    for m in modules {
        for c in &m.coins {
            if let Some(tx) = coin_tx.get(c) {
                *counts.entry(tx).or_insert(0) += 1;
            }
        }
    }
    let max = counts.values().max().copied().unwrap_or(1);
    let min = counts.values().min().copied().unwrap_or(1);
    (max, min)
}
