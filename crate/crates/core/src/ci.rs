//! Coin-indistinguishability verification.
//!
//! Two routes are provided for every check. The full route enumerates the
//! permutation tree and works on arbitrary related sets. The iterative route
//! applies the constant-time update rules that hold on disjoint-superset
//! sets: appending a signature of degree `d` moves every member's spend
//! marginal from `p` to `p + (1-p)/d`, freezes the member's joint
//! probability for that signature at `(1-p)/d`, and leaves everything else
//! untouched. The O(|r|) membership test compares only the extreme
//! marginals of the candidate ring.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::chain::{CoinId, RelatedRsSet, RingSignature};
use crate::error::{Error, Result};
use crate::oracle::{build_tree, ExactProbabilities};
use crate::rational::{ratio_u64, to_f64, CiLevel, Prob};

/// Outcome of a CI query on one ring signature.
#[derive(Debug, Clone)]
pub struct CiReport {
    /// ln of the maximal pairwise conditional ratio; infinite when one
    /// member's conditional is zero while another's is not.
    pub epsilon_required: f64,
    /// The ratio itself, exact, when finite.
    pub max_ratio: Option<BigRational>,
    pub satisfied: bool,
    /// (coin with the largest conditional, coin with the smallest).
    pub worst_pair: Option<(CoinId, CoinId)>,
}

fn report_from_conditionals(conditionals: &[(CoinId, Prob)], level: &CiLevel) -> CiReport {
    debug_assert!(!conditionals.is_empty());
    if conditionals.len() == 1 {
        return CiReport {
            epsilon_required: 0.0,
            max_ratio: Some(BigRational::one()),
            satisfied: true,
            worst_pair: None,
        };
    }
    let (max_coin, max_p) = conditionals
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .unwrap();
    let (min_coin, min_p) = conditionals
        .iter()
        .min_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)))
        .unwrap();
    if max_p.is_zero() {
        // Every conditional is zero; vacuously indistinguishable.
        return CiReport {
            epsilon_required: 0.0,
            max_ratio: Some(BigRational::one()),
            satisfied: true,
            worst_pair: None,
        };
    }
    if min_p.is_zero() {
        return CiReport {
            epsilon_required: f64::INFINITY,
            max_ratio: None,
            satisfied: false,
            worst_pair: Some((max_coin.clone(), min_coin.clone())),
        };
    }
    let ratio = max_p / min_p;
    let satisfied = level.admits_ratio(&ratio);
    CiReport {
        epsilon_required: to_f64(&ratio).ln().max(0.0),
        max_ratio: Some(ratio),
        satisfied,
        worst_pair: Some((max_coin.clone(), min_coin.clone())),
    }
}

/// CI of the signature at `rs_order`, judged at the final state of `rs_set`,
/// by exact enumeration.
pub fn check_ci_full(
    rs_set: &RelatedRsSet,
    rs_order: usize,
    level: &CiLevel,
    leaf_cap: u64,
) -> Result<CiReport> {
    let rs = rs_set
        .by_order(rs_order)
        .ok_or_else(|| Error::UnknownId(format!("ring signature order {rs_order}")))?;
    let tree = build_tree(rs_set, leaf_cap)?;
    let probs = tree.probabilities();
    let conditionals = rs_conditionals(&probs, rs, rs_order);
    Ok(report_from_conditionals(&conditionals, level))
}

fn rs_conditionals(
    probs: &ExactProbabilities,
    rs: &RingSignature,
    rs_order: usize,
) -> Vec<(CoinId, Prob)> {
    rs.members
        .iter()
        .map(|coin| {
            let cond = probs.conditional(coin, rs_order).unwrap_or_else(Prob::zero);
            (coin.clone(), cond)
        })
        .collect()
}

/// Would appending `new_rs` keep every signature (including itself) within
/// the required level? Judged by full enumeration.
pub fn check_cik(
    rs_set: &RelatedRsSet,
    new_rs: &RingSignature,
    level: &CiLevel,
    leaf_cap: u64,
) -> Result<bool> {
    let appended = rs_set.with_appended(new_rs.clone());
    let tree = build_tree(&appended, leaf_cap)?;
    let probs = tree.probabilities();
    for (k, rs) in appended.iter().enumerate() {
        let conditionals = rs_conditionals(&probs, rs, k + 1);
        if !report_from_conditionals(&conditionals, level).satisfied {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The O(|r|) membership inequality for a candidate ring over a
/// disjoint-superset set:
///
///   e^eps * (1 - pr_max) / ((d-1) * pr_max + 1)  >=  (1 - pr_min) / ((d-1) * pr_min + 1)
///
/// `pr_max`/`pr_min` are the extreme member marginals before appending and
/// `degree` is the branching the candidate adds to the permutation tree.
/// For superset-composed candidates this decides exactly the same predicate
/// as [`check_cik`], provided the pre-existing signatures already satisfy
/// the level.
pub fn check_cik_fast(pr_max: &Prob, pr_min: &Prob, degree: u64, level: &CiLevel) -> bool {
    debug_assert!(pr_min <= pr_max);
    if degree == 0 {
        // Nothing left for the candidate to spend.
        return false;
    }
    let d_minus_1 = ratio_u64(degree - 1, 1);
    let lhs = (Prob::one() - pr_max) * (&d_minus_1 * pr_min + Prob::one());
    let rhs = (Prob::one() - pr_min) * (&d_minus_1 * pr_max + Prob::one());
    level.scaled_ge(&lhs, &rhs)
}

/// Smallest epsilon (as the exact conditional ratio) for which
/// [`check_cik_fast`] holds, for reporting slack.
pub fn fast_required_ratio(pr_max: &Prob, pr_min: &Prob, degree: u64) -> Option<BigRational> {
    if degree == 0 {
        return None;
    }
    let d_minus_1 = ratio_u64(degree - 1, 1);
    let lhs = (Prob::one() - pr_max) * (&d_minus_1 * pr_min + Prob::one());
    let rhs = (Prob::one() - pr_min) * (&d_minus_1 * pr_max + Prob::one());
    if lhs.is_zero() {
        if rhs.is_zero() {
            Some(BigRational::one())
        } else {
            None // unbounded: one conditional is zero, another not
        }
    } else {
        Some(rhs / lhs)
    }
}

/// Spend marginals and frozen joints of a disjoint-superset set, maintained
/// iteratively. A value type: updates return nothing but mutate `self`;
/// clone to snapshot.
#[derive(Debug, Clone, Default)]
pub struct IterativeState {
    pr_spent: BTreeMap<CoinId, Prob>,
    /// joint[k-1] = (coins of r_k -> Pr(r_k, c)), frozen at creation.
    joints: Vec<BTreeMap<CoinId, Prob>>,
}

impl IterativeState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pr_i(c) at the current state; 0 for unseen coins.
    pub fn pr_spent(&self, coin: &CoinId) -> Prob {
        self.pr_spent.get(coin).cloned().unwrap_or_else(Prob::zero)
    }

    pub fn rs_count(&self) -> usize {
        self.joints.len()
    }

    /// The frozen joint Pr(r_k, c) recorded when signature `k` was appended.
    pub fn joint(&self, rs_order: usize, coin: &CoinId) -> Prob {
        self.joints
            .get(rs_order - 1)
            .and_then(|m| m.get(coin).cloned())
            .unwrap_or_else(Prob::zero)
    }

    /// Appends `rs` with the given branching degree: members move from `p`
    /// to `p + (1-p)/d` and their joints for this signature freeze at
    /// `(1-p)/d`. Non-members are untouched.
    pub fn update(&mut self, rs: &RingSignature, degree: u64) -> Result<()> {
        if degree < 1 {
            return Err(Error::DegreeInvalid);
        }
        let d = ratio_u64(degree, 1);
        let mut joint = BTreeMap::new();
        for coin in &rs.members {
            let old = self.pr_spent(coin);
            let j = (Prob::one() - &old) / &d;
            joint.insert(coin.clone(), j.clone());
            self.pr_spent.insert(coin.clone(), old + j);
        }
        self.joints.push(joint);
        Ok(())
    }

    /// Pr(r_j | c) = frozen joint over current marginal.
    pub fn conditional(&self, rs_order: usize, coin: &CoinId) -> Result<Prob> {
        let joint = self.joint(rs_order, coin);
        let marginal = self.pr_spent(coin);
        if marginal.is_zero() {
            return Err(Error::ZeroMarginal {
                coin: coin.0.clone(),
            });
        }
        Ok(joint / marginal)
    }

    /// CI report of signature `rs_order` computed iteratively.
    pub fn check_ci(&self, rs_set: &RelatedRsSet, rs_order: usize, level: &CiLevel) -> Result<CiReport> {
        let rs = rs_set
            .by_order(rs_order)
            .ok_or_else(|| Error::UnknownId(format!("ring signature order {rs_order}")))?;
        let conditionals: Vec<(CoinId, Prob)> = rs
            .members
            .iter()
            .map(|coin| Ok((coin.clone(), self.conditional(rs_order, coin)?)))
            .collect::<Result<_>>()?;
        Ok(report_from_conditionals(&conditionals, level))
    }
}

/// Branching each signature added when it was appended: its size minus the
/// number of earlier signatures nested inside it.
pub fn append_degrees(rs_set: &RelatedRsSet) -> Result<Vec<u64>> {
    let list = rs_set.as_slice();
    let mut degrees = Vec::with_capacity(list.len());
    for (i, rs) in list.iter().enumerate() {
        let nested_earlier = list[..i]
            .iter()
            .filter(|prev| prev.is_subset_of(rs))
            .count() as u64;
        let degree = (rs.len() as u64).saturating_sub(nested_earlier);
        if degree == 0 {
            return Err(Error::InfeasibleTree {
                rs_id: rs.rs_id.0.clone(),
            });
        }
        degrees.push(degree);
    }
    Ok(degrees)
}

/// Replays a whole set through the iterative rules.
pub fn replay(rs_set: &RelatedRsSet) -> Result<IterativeState> {
    Ok(replay_steps(rs_set)?
        .into_iter()
        .last()
        .unwrap_or_default())
}

/// As [`replay`], but returns the state after every append: element `i` is
/// the state of the first `i+1` signatures.
pub fn replay_steps(rs_set: &RelatedRsSet) -> Result<Vec<IterativeState>> {
    let degrees = append_degrees(rs_set)?;
    let mut state = IterativeState::new();
    let mut steps = Vec::with_capacity(degrees.len());
    for (rs, degree) in rs_set.iter().zip(degrees) {
        state.update(rs, degree)?;
        steps.push(state.clone());
    }
    Ok(steps)
}

/// The exact maximal conditional ratio of every signature at the final
/// state, from a single tree build. `None` means unbounded (some member's
/// conditional is zero while another's is not).
pub fn rs_requirements(rs_set: &RelatedRsSet, leaf_cap: u64) -> Result<Vec<Option<BigRational>>> {
    let tree = build_tree(rs_set, leaf_cap)?;
    let probs = tree.probabilities();
    Ok(rs_set
        .iter()
        .enumerate()
        .map(|(k, rs)| {
            let conditionals = rs_conditionals(&probs, rs, k + 1);
            let report = report_from_conditionals(&conditionals, &CiLevel::from_epsilon(0.0));
            if report.epsilon_required.is_infinite() {
                None
            } else {
                Some(report.max_ratio.expect("finite requirement has a ratio"))
            }
        })
        .collect())
}

/// Posterior bound under an adversary prior: e^eps * pi(c) / sum over the
/// ring of pi, clamped to 1.
pub fn posterior_bound(
    prior: &BTreeMap<CoinId, Prob>,
    rs: &RingSignature,
    level: &CiLevel,
    coin: &CoinId,
) -> Result<Prob> {
    if !rs.contains(coin) {
        return Err(Error::CoinNotInRs {
            coin: coin.0.clone(),
            rs: rs.rs_id.0.clone(),
        });
    }
    for c in &rs.members {
        if prior.get(c).map(|w| w.is_negative()).unwrap_or(false) {
            return Err(Error::InvalidParams("negative prior weight".into()));
        }
    }
    let total: Prob = rs
        .members
        .iter()
        .map(|c| prior.get(c).cloned().unwrap_or_else(Prob::zero))
        .sum();
    if total.is_zero() {
        return Err(Error::AllZeroPrior);
    }
    let own = prior.get(coin).cloned().unwrap_or_else(Prob::zero);
    let base = own / total;
    let bound = match level.exp_exact() {
        Some(q) => q * base,
        None => crate::rational::from_f64(level.exp_f64() * to_f64(&base)),
    };
    Ok(bound.min(Prob::one()))
}
