//! Core chain model: coins, ring signatures, ordered related sets, and the
//! trace file format.
//!
//! Everything here is immutable after construction and safe to share across
//! threads. Ordering is always explicit via `order_index`; coin and
//! transaction ids are opaque strings and never ordered semantically.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoinId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TxId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RsId(pub String);

impl std::fmt::Display for CoinId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}
impl std::fmt::Display for TxId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}
impl std::fmt::Display for RsId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// An unspent transaction output: an id plus the transaction that created it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coin {
    pub coin_id: CoinId,
    pub tx_id: TxId,
}

/// A ring signature: a set of member coins, one of which is the hidden spend.
///
/// `order_index` is the position in spending-timestamp order within its
/// related set; it is never derived from the id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSignature {
    pub rs_id: RsId,
    pub members: BTreeSet<CoinId>,
    pub order_index: u64,
}

impl RingSignature {
    pub fn new(rs_id: impl Into<String>, members: impl IntoIterator<Item = CoinId>, order_index: u64) -> Self {
        RingSignature {
            rs_id: RsId(rs_id.into()),
            members: members.into_iter().collect(),
            order_index,
        }
    }

    pub fn contains(&self, coin: &CoinId) -> bool {
        self.members.contains(coin)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_subset_of(&self, other: &RingSignature) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn is_disjoint_from(&self, other: &RingSignature) -> bool {
        self.members.is_disjoint(&other.members)
    }
}

/// The related ring signatures of a mixin universe, ascending by timestamp.
///
/// Invariant: after construction the contained order indices are exactly
/// `1..=m` with no gaps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelatedRsSet {
    rs_list: Vec<RingSignature>,
}

impl RelatedRsSet {
    /// Re-indexes the given signatures to `1..=m`, preserving their relative
    /// order by existing `order_index`.
    pub fn new(mut rs_list: Vec<RingSignature>) -> Result<Self> {
        rs_list.sort_by_key(|rs| rs.order_index);
        for rs in &rs_list {
            if rs.members.is_empty() {
                return Err(Error::Integrity(format!("ring signature {} has no members", rs.rs_id)));
            }
        }
        for (pos, rs) in rs_list.iter_mut().enumerate() {
            rs.order_index = pos as u64 + 1;
        }
        Ok(RelatedRsSet { rs_list })
    }

    pub fn empty() -> Self {
        RelatedRsSet { rs_list: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rs_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rs_list.is_empty()
    }

    /// Signatures in ascending order; `order_index` of element `k` is `k+1`.
    pub fn iter(&self) -> impl Iterator<Item = &RingSignature> {
        self.rs_list.iter()
    }

    /// 1-based access matching `order_index`.
    pub fn by_order(&self, order: usize) -> Option<&RingSignature> {
        if order == 0 {
            return None;
        }
        self.rs_list.get(order - 1)
    }

    pub fn by_id(&self, id: &RsId) -> Option<&RingSignature> {
        self.rs_list.iter().find(|rs| &rs.rs_id == id)
    }

    pub fn as_slice(&self) -> &[RingSignature] {
        &self.rs_list
    }

    /// A new set with `rs` appended as the latest signature.
    pub fn with_appended(&self, rs: RingSignature) -> Self {
        let mut list = self.rs_list.clone();
        let mut rs = rs;
        rs.order_index = list.len() as u64 + 1;
        list.push(rs);
        RelatedRsSet { rs_list: list }
    }

    /// All member coins of all signatures.
    pub fn member_coins(&self) -> BTreeSet<CoinId> {
        self.rs_list
            .iter()
            .flat_map(|rs| rs.members.iter().cloned())
            .collect()
    }
}

/// One block: output coins grouped per transaction, plus ring signatures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub tx_outputs: Vec<Vec<CoinId>>,
    pub ring_signatures: Vec<RingSignature>,
}

/// A parsed chain trace: the carrier for every file-based input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub coins: Vec<Coin>,
    pub blocks: Vec<Block>,
}

impl ChainTrace {
    /// Validates referential integrity; required after any manual construction.
    pub fn validate(&self) -> Result<()> {
        let mut coin_tx: HashMap<&CoinId, &TxId> = HashMap::new();
        for coin in &self.coins {
            if coin.tx_id.0.is_empty() {
                return Err(Error::Integrity(format!("coin {} has an empty tx id", coin.coin_id)));
            }
            if coin_tx.insert(&coin.coin_id, &coin.tx_id).is_some() {
                return Err(Error::Integrity(format!("duplicate coin id {}", coin.coin_id)));
            }
        }
        let mut heights = HashSet::new();
        let mut seen_outputs: HashSet<&CoinId> = HashSet::new();
        let mut rs_ids: HashSet<&RsId> = HashSet::new();
        for block in &self.blocks {
            if !heights.insert(block.height) {
                return Err(Error::Integrity(format!("duplicate block height {}", block.height)));
            }
            for group in &block.tx_outputs {
                let mut group_tx: Option<&TxId> = None;
                for coin_id in group {
                    let tx = coin_tx
                        .get(coin_id)
                        .ok_or_else(|| Error::Integrity(format!("block output references unknown coin {coin_id}")))?;
                    match group_tx {
                        None => group_tx = Some(tx),
                        Some(prev) if prev == *tx => {}
                        Some(prev) => {
                            return Err(Error::Integrity(format!(
                                "coins {group:?} grouped under one transaction but map to {prev} and {tx}"
                            )))
                        }
                    }
                    if !seen_outputs.insert(coin_id) {
                        return Err(Error::Integrity(format!("coin {coin_id} appears in two blocks")));
                    }
                }
            }
            for rs in &block.ring_signatures {
                if rs.members.is_empty() {
                    return Err(Error::Integrity(format!("ring signature {} has no members", rs.rs_id)));
                }
                if !rs_ids.insert(&rs.rs_id) {
                    return Err(Error::Integrity(format!("duplicate ring signature id {}", rs.rs_id)));
                }
                for coin_id in &rs.members {
                    if !coin_tx.contains_key(coin_id) {
                        return Err(Error::Integrity(format!(
                            "ring signature {} references unknown coin {coin_id}",
                            rs.rs_id
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Blocks in ascending height order.
    pub fn blocks_ordered(&self) -> Vec<&Block> {
        let mut blocks: Vec<&Block> = self.blocks.iter().collect();
        blocks.sort_by_key(|b| b.height);
        blocks
    }

    pub fn coin_tx_map(&self) -> BTreeMap<CoinId, TxId> {
        self.coins
            .iter()
            .map(|c| (c.coin_id.clone(), c.tx_id.clone()))
            .collect()
    }

    pub fn coin_count(&self) -> usize {
        self.coins.len()
    }

    pub fn tx_count(&self) -> usize {
        self.coins.iter().map(|c| &c.tx_id).collect::<HashSet<_>>().len()
    }

    /// All ring signatures across blocks, ordered by `order_index`.
    pub fn all_ring_signatures(&self) -> Vec<&RingSignature> {
        let mut all: Vec<&RingSignature> = self
            .blocks
            .iter()
            .flat_map(|b| b.ring_signatures.iter())
            .collect();
        all.sort_by_key(|rs| rs.order_index);
        all
    }
}

/// Loads and validates a trace file.
pub fn load_trace(path: impl AsRef<Path>) -> Result<ChainTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let trace: ChainTrace = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    trace.validate()?;
    Ok(trace)
}

/// Writes a trace; `load_trace(save_trace(t))` is structurally identical to `t`.
pub fn save_trace(trace: &ChainTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(trace).expect("trace serializes");
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// All ring signatures intersecting `universe`, re-indexed `1..=m` in
/// timestamp order.
pub fn related_rs_set(trace: &ChainTrace, universe: &BTreeSet<CoinId>) -> Result<RelatedRsSet> {
    let related: Vec<RingSignature> = trace
        .all_ring_signatures()
        .into_iter()
        .filter(|rs| rs.members.iter().any(|c| universe.contains(c)))
        .cloned()
        .collect();
    RelatedRsSet::new(related)
}
