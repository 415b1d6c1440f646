//! Exact spent-coin enumeration.
//!
//! Builds the permutation tree of a related ring signature set level by
//! level, with prefix sharing, and derives every probability from leaf
//! counts. This is the ground truth that the iterative fast paths are
//! validated against; it works on arbitrary related sets, not just
//! disjoint-superset ones.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::chain::{CoinId, RelatedRsSet};
use crate::error::{Error, Result};
use crate::rational::{ratio_u64, Prob};

pub const DEFAULT_LEAF_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy)]
struct Node {
    /// Index of the parent in the previous level; unused at depth 1.
    parent: u32,
    /// Index of the spent coin in the tree's coin table.
    spent: u32,
}

/// The spent-coin permutation tree of a related set.
///
/// Level `d` (1-based) holds every valid assignment prefix of length `d`;
/// the prefix of a node is recovered by following parents. Leaves of the
/// truncated tree over the first `i` signatures are exactly level `i`.
#[derive(Debug, Clone)]
pub struct PermutationTree {
    coins: Vec<CoinId>,
    coin_index: BTreeMap<CoinId, u32>,
    levels: Vec<Vec<Node>>,
    rs_ids: Vec<String>,
    /// members[k] = coin indices of the signature with order k+1.
    members: Vec<Vec<u32>>,
}

impl PermutationTree {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// |N_{m,d}| for the full tree: number of nodes at depth `d` (1-based).
    pub fn level_count(&self, depth: usize) -> u64 {
        if depth == 0 || depth > self.levels.len() {
            return 0;
        }
        self.levels[depth - 1].len() as u64
    }

    /// Leaf count of the full tree.
    pub fn leaf_count(&self) -> u64 {
        self.level_count(self.depth())
    }

    /// |N_{i,i}^{k,t}|: nodes at depth `i` whose k-th path element is `coin`.
    pub fn count_with_assignment(&self, depth: usize, rs_order: usize, coin: &CoinId) -> u64 {
        let Some(&coin_idx) = self.coin_index.get(coin) else {
            return 0;
        };
        if depth == 0 || depth > self.levels.len() || rs_order == 0 || rs_order > depth {
            return 0;
        }
        let mut count = 0u64;
        for node in &self.levels[depth - 1] {
            if self.path_element(depth, node, rs_order) == coin_idx {
                count += 1;
            }
        }
        count
    }

    fn path_element(&self, depth: usize, node: &Node, rs_order: usize) -> u32 {
        let mut level = depth;
        let mut current = *node;
        while level > rs_order {
            current = self.levels[level - 2][current.parent as usize];
            level -= 1;
        }
        current.spent
    }

    /// The probabilities read off the sub-tree of the first `depth` signatures.
    pub fn probabilities_at(&self, depth: usize) -> ExactProbabilities {
        assert!(depth >= 1 && depth <= self.depth());
        let total = self.level_count(depth);
        let n_coins = self.coins.len();
        // counts[k][coin] = |N_{depth,depth}^{k,coin}|
        let mut counts = vec![vec![0u64; n_coins]; depth];
        for node in &self.levels[depth - 1] {
            let mut level = depth;
            let mut current = *node;
            loop {
                counts[level - 1][current.spent as usize] += 1;
                if level == 1 {
                    break;
                }
                current = self.levels[level - 2][current.parent as usize];
                level -= 1;
            }
        }
        let mut pr_in_rs = BTreeMap::new();
        let mut pr_spent: BTreeMap<CoinId, Prob> = BTreeMap::new();
        for (k, row) in counts.iter().enumerate() {
            for (coin_idx, &count) in row.iter().enumerate() {
                let coin = &self.coins[coin_idx];
                if self.members[k].contains(&(coin_idx as u32)) {
                    let p = ratio_u64(count, total);
                    pr_spent
                        .entry(coin.clone())
                        .and_modify(|acc| *acc += &p)
                        .or_insert_with(|| p.clone());
                    pr_in_rs.insert((coin.clone(), k + 1), p);
                }
            }
        }
        ExactProbabilities {
            pr_in_rs,
            pr_spent,
            rs_ids: self.rs_ids[..depth].to_vec(),
        }
    }

    /// Probabilities of the full tree.
    pub fn probabilities(&self) -> ExactProbabilities {
        self.probabilities_at(self.depth())
    }

    /// Pr(coin is the spend of the signature at `rs_order`), full tree.
    pub fn pr_in_rs(&self, coin: &CoinId, rs_order: usize) -> Result<Prob> {
        if rs_order == 0 || rs_order > self.depth() {
            return Err(Error::UnknownId(format!("ring signature order {rs_order}")));
        }
        let member = self
            .coin_index
            .get(coin)
            .map(|idx| self.members[rs_order - 1].contains(idx))
            .unwrap_or(false);
        if !member {
            return Err(Error::CoinNotInRs {
                coin: coin.0.clone(),
                rs: self.rs_ids[rs_order - 1].clone(),
            });
        }
        let count = self.count_with_assignment(self.depth(), rs_order, coin);
        Ok(ratio_u64(count, self.leaf_count()))
    }

    /// Pr(coin has been spent at all); 0 for coins outside every signature.
    pub fn pr_spent(&self, coin: &CoinId) -> Prob {
        let Some(&coin_idx) = self.coin_index.get(coin) else {
            return Prob::zero();
        };
        let mut count = 0u64;
        let depth = self.depth();
        for node in &self.levels[depth - 1] {
            let mut level = depth;
            let mut current = *node;
            loop {
                if current.spent == coin_idx {
                    count += 1;
                    break;
                }
                if level == 1 {
                    break;
                }
                current = self.levels[level - 2][current.parent as usize];
                level -= 1;
            }
        }
        ratio_u64(count, self.leaf_count())
    }

    /// All `(coin, rs_order)` pairs whose spend probability is exactly 1:
    /// the assignments deducible by elimination.
    pub fn forced_spent(&self) -> Vec<(CoinId, usize)> {
        let probs = self.probabilities();
        let mut forced: Vec<(CoinId, usize)> = probs
            .pr_in_rs
            .iter()
            .filter(|(_, p)| p.is_one())
            .map(|((coin, order), _)| (coin.clone(), *order))
            .collect();
        forced.sort();
        forced
    }
}

/// Eqs. for coin/signature and plain coin spend probabilities, exact.
#[derive(Debug, Clone)]
pub struct ExactProbabilities {
    /// (coin, rs order) -> probability the coin is that signature's spend.
    pub pr_in_rs: BTreeMap<(CoinId, usize), Prob>,
    /// coin -> probability the coin has been spent anywhere in the set.
    pub pr_spent: BTreeMap<CoinId, Prob>,
    pub rs_ids: Vec<String>,
}

impl ExactProbabilities {
    pub fn pr_spent_of(&self, coin: &CoinId) -> Prob {
        self.pr_spent.get(coin).cloned().unwrap_or_else(Prob::zero)
    }

    pub fn pr_in_rs_of(&self, coin: &CoinId, rs_order: usize) -> Prob {
        self.pr_in_rs
            .get(&(coin.clone(), rs_order))
            .cloned()
            .unwrap_or_else(Prob::zero)
    }

    /// Pr(spent in rs | spent at all) as joint over marginal.
    pub fn conditional(&self, coin: &CoinId, rs_order: usize) -> Option<BigRational> {
        let marginal = self.pr_spent_of(coin);
        if marginal.is_zero() {
            return None;
        }
        Some(self.pr_in_rs_of(coin, rs_order) / marginal)
    }
}

/// Builds the permutation tree, sharing prefixes level by level.
///
/// Fails with `InfeasibleTree` when some signature has no assignable coin on
/// any branch, and with `LeafCapExceeded` when a level would exceed
/// `leaf_cap` nodes.
pub fn build_tree(rs_set: &RelatedRsSet, leaf_cap: u64) -> Result<PermutationTree> {
    let mut coins: Vec<CoinId> = Vec::new();
    let mut coin_index: BTreeMap<CoinId, u32> = BTreeMap::new();
    for rs in rs_set.iter() {
        for coin in &rs.members {
            if !coin_index.contains_key(coin) {
                coin_index.insert(coin.clone(), coins.len() as u32);
                coins.push(coin.clone());
            }
        }
    }
    let members: Vec<Vec<u32>> = rs_set
        .iter()
        .map(|rs| rs.members.iter().map(|c| coin_index[c]).collect())
        .collect();
    let rs_ids: Vec<String> = rs_set.iter().map(|rs| rs.rs_id.0.clone()).collect();

    let mut levels: Vec<Vec<Node>> = Vec::with_capacity(members.len());
    for (depth_idx, rs_members) in members.iter().enumerate() {
        let mut level: Vec<Node> = Vec::new();
        if depth_idx == 0 {
            for &coin in rs_members {
                level.push(Node { parent: 0, spent: coin });
            }
        } else {
            let parents = &levels[depth_idx - 1];
            for (parent_idx, _) in parents.iter().enumerate() {
                // Collect the parent's path to test membership.
                let mut path = Vec::with_capacity(depth_idx);
                let mut level_no = depth_idx;
                let mut current = parents[parent_idx];
                loop {
                    path.push(current.spent);
                    if level_no == 1 {
                        break;
                    }
                    current = levels[level_no - 2][current.parent as usize];
                    level_no -= 1;
                }
                for &coin in rs_members {
                    if !path.contains(&coin) {
                        if level.len() as u64 >= leaf_cap {
                            return Err(Error::LeafCapExceeded {
                                cap: leaf_cap,
                                depth: depth_idx + 1,
                            });
                        }
                        level.push(Node {
                            parent: parent_idx as u32,
                            spent: coin,
                        });
                    }
                }
            }
        }
        if level.len() as u64 > leaf_cap {
            return Err(Error::LeafCapExceeded {
                cap: leaf_cap,
                depth: depth_idx + 1,
            });
        }
        if level.is_empty() {
            return Err(Error::InfeasibleTree {
                rs_id: rs_ids[depth_idx].clone(),
            });
        }
        levels.push(level);
    }

    Ok(PermutationTree {
        coins,
        coin_index,
        levels,
        rs_ids,
        members,
    })
}
