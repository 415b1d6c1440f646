//! The CIA-MS-DS solvers.
//!
//! All engines consume a [`ProblemInstance`] and produce a
//! [`SelectionResult`]; they are pure given `(instance, params)`, so pair
//! evaluation and benchmark repetitions may run in parallel without changing
//! any output.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::chain::{CoinId, TxId};
use crate::ci::check_cik_fast;
use crate::ds::{ModuleId, ModuleKind, ModuleSummary};
use crate::error::{Error, Result};
use crate::rational::{CiLevel, Prob};

mod baselines;
mod exhaustive;
mod game;
mod knapsack;
mod progressive;
#[cfg(test)]
pub(crate) mod tests_support;

pub use baselines::{greedy, random_baseline};
pub use exhaustive::exhaustive;
pub use game::{game, game_detailed, PairGame, PairOutcome};
pub use knapsack::{brute_force_value, delta_kp, KnapsackItem};
pub use progressive::progressive;

/// One CIA-MS-DS instance: the module pool, the module holding the spend,
/// and the constraint levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemInstance {
    /// Sorted by module id; pairwise coin-disjoint.
    pub modules: Vec<ModuleSummary>,
    pub target_module: ModuleId,
    pub budget: u64,
    pub level: CiLevel,
    pub coin_tx: BTreeMap<CoinId, TxId>,
    /// Max/min coins sharing one source transaction over the module pool.
    pub o_max: u64,
    pub o_min: u64,
}

impl ProblemInstance {
    pub fn validate(&self) -> Result<()> {
        let target = self
            .modules
            .iter()
            .find(|m| m.module_id == self.target_module)
            .ok_or_else(|| Error::UnknownId(format!("target module {}", self.target_module)))?;
        let minimum = target.size().max(2);
        if self.budget < minimum {
            return Err(Error::BudgetTooSmall {
                budget: self.budget,
                minimum,
            });
        }
        let mut seen: BTreeSet<&CoinId> = BTreeSet::new();
        for m in &self.modules {
            for c in &m.coins {
                if !seen.insert(c) {
                    return Err(Error::Integrity(format!("modules overlap on coin {c}")));
                }
            }
        }
        Ok(())
    }

    pub fn module(&self, id: &ModuleId) -> Option<&ModuleSummary> {
        self.modules.iter().find(|m| &m.module_id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Progressive,
    Game,
    Greedy,
    Random,
    Exhaustive,
}

impl EngineKind {
    pub const ALL: [EngineKind; 5] = [
        EngineKind::Progressive,
        EngineKind::Game,
        EngineKind::Greedy,
        EngineKind::Random,
        EngineKind::Exhaustive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EngineKind::Progressive => "progressive",
            EngineKind::Game => "game",
            EngineKind::Greedy => "greedy",
            EngineKind::Random => "random",
            EngineKind::Exhaustive => "exhaustive",
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EngineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "progressive" => Ok(EngineKind::Progressive),
            "game" => Ok(EngineKind::Game),
            "greedy" => Ok(EngineKind::Greedy),
            "random" => Ok(EngineKind::Random),
            "exhaustive" => Ok(EngineKind::Exhaustive),
            other => Err(Error::UnknownId(format!("engine {other}"))),
        }
    }
}

/// Tunables shared across engines.
#[derive(Debug, Clone)]
pub struct EngineParams {
    /// Knapsack precision.
    pub delta: f64,
    pub seed: u64,
    pub max_sweeps: u64,
    pub exhaustive_cap: usize,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            delta: 0.1,
            seed: 0,
            max_sweeps: 100_000,
            exhaustive_cap: 20,
        }
    }
}

/// The mixin set chosen for one spend, plus diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Chosen module ids; always contains the target module.
    pub chosen: BTreeSet<ModuleId>,
    pub diversity: u64,
    /// Total coins.
    pub size: u64,
    /// Permutation-tree branching of the composed ring.
    pub degree: u64,
    pub eligible: bool,
    pub engine: EngineKind,
    #[serde(skip)]
    pub elapsed: Duration,
    /// Best-response sweeps (game engine only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u64>,
}

/// Upper bound on the branching a candidate ring may add while staying
/// within the level, given the extreme member marginals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeCap {
    Unbounded,
    Bounded(u64),
}

impl DegreeCap {
    pub fn admits(&self, branching: u64) -> bool {
        match self {
            DegreeCap::Unbounded => true,
            DegreeCap::Bounded(d) => branching <= *d,
        }
    }

    pub fn headroom(&self, used: u64) -> Option<u64> {
        match self {
            DegreeCap::Unbounded => None,
            DegreeCap::Bounded(d) => Some(d.saturating_sub(used)),
        }
    }
}

/// Solves `X * d >= Y` for the largest admissible degree, with
/// `X = e^eps * pr_min * (1 - pr_max) - pr_max * (1 - pr_min)` and
/// `Y = (e^eps - 1) * (1 - pr_max) * (pr_min - 1)`; `X >= 0` means any
/// degree is admissible. The closed form is then nudged until it agrees
/// exactly with [`check_cik_fast`] so float and exact levels share one
/// boundary.
pub fn degree_cap(pr_max: &Prob, pr_min: &Prob, level: &CiLevel) -> DegreeCap {
    use crate::rational::from_f64;
    use num_traits::{One, Signed};

    let one = Prob::one();
    let exp_eps = match level.exp_exact() {
        Some(q) => q.clone(),
        None => from_f64(level.exp_f64()),
    };
    let x = &exp_eps * pr_min * (&one - pr_max) - pr_max * (&one - pr_min);
    if !x.is_negative() {
        return DegreeCap::Unbounded;
    }
    let y = (&exp_eps - &one) * (&one - pr_max) * (pr_min - &one);
    let mut cap = crate::rational::floor_u64(&(y / x));
    // Float levels carry a comparison margin; realign with the predicate.
    while cap > 0 && !check_cik_fast(pr_max, pr_min, cap, level) {
        cap -= 1;
    }
    while check_cik_fast(pr_max, pr_min, cap + 1, level) {
        cap += 1;
        if cap > (1 << 40) {
            return DegreeCap::Unbounded;
        }
    }
    DegreeCap::Bounded(cap)
}

/// Bitmask over the instance's source transactions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TxMask {
    words: Vec<u64>,
}

impl TxMask {
    pub fn new(bits: usize) -> Self {
        TxMask {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn or_with(&mut self, other: &TxMask) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Bits of `self` not present in `other`.
    pub fn count_minus(&self, other: &TxMask) -> u64 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(w, o)| (w & !o).count_ones() as u64)
            .sum()
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter_map(move |b| if w & (1 << b) != 0 { Some(i * 64 + b) } else { None })
        })
    }
}

/// Precomputed per-instance solver context. Module indices are positions in
/// the id-sorted module list, so index order equals id order.
pub struct SolverCtx<'a> {
    pub instance: &'a ProblemInstance,
    pub modules: Vec<&'a ModuleSummary>,
    pub target: usize,
    pub tx_index: BTreeMap<&'a TxId, usize>,
    pub masks: Vec<TxMask>,
    pub sizes: Vec<u64>,
    pub contrib: Vec<u64>,
}

impl<'a> SolverCtx<'a> {
    pub fn new(instance: &'a ProblemInstance) -> Result<Self> {
        instance.validate()?;
        let mut modules: Vec<&ModuleSummary> = instance.modules.iter().collect();
        modules.sort_by(|a, b| a.module_id.cmp(&b.module_id));
        let target = modules
            .iter()
            .position(|m| m.module_id == instance.target_module)
            .expect("validated above");
        let mut tx_index: BTreeMap<&TxId, usize> = BTreeMap::new();
        for m in &modules {
            for tx in &m.st {
                let next = tx_index.len();
                tx_index.entry(tx).or_insert(next);
            }
        }
        let bits = tx_index.len();
        let masks: Vec<TxMask> = modules
            .iter()
            .map(|m| {
                let mut mask = TxMask::new(bits);
                for tx in &m.st {
                    mask.set(tx_index[tx]);
                }
                mask
            })
            .collect();
        let sizes = modules.iter().map(|m| m.size()).collect();
        let contrib = modules.iter().map(|m| m.branching_contribution()).collect();
        Ok(SolverCtx {
            instance,
            modules,
            target,
            tx_index,
            masks,
            sizes,
            contrib,
        })
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn union_mask(&self, selected: &[usize]) -> TxMask {
        let mut mask = TxMask::new(self.tx_index.len());
        for &k in selected {
            mask.or_with(&self.masks[k]);
        }
        mask
    }

    pub fn stats(&self, selected: &[usize]) -> CompositionStats {
        debug_assert!(selected.contains(&self.target));
        let size = selected.iter().map(|&k| self.sizes[k]).sum();
        let branching = selected.iter().map(|&k| self.contrib[k]).sum();
        let lemma1_degree = selected.iter().map(|&k| self.modules[k].degree).sum();
        let diversity = self.union_mask(selected).count();
        let pr_max = selected
            .iter()
            .map(|&k| &self.modules[k].pr_max)
            .max()
            .cloned()
            .expect("non-empty selection");
        let pr_min = selected
            .iter()
            .map(|&k| &self.modules[k].pr_min)
            .min()
            .cloned()
            .expect("non-empty selection");
        CompositionStats {
            size,
            branching,
            lemma1_degree,
            diversity,
            pr_max,
            pr_min,
        }
    }

    /// The single canonical eligibility predicate: budget plus the fast
    /// membership inequality on the composition's own extremes and
    /// branching.
    pub fn is_eligible(&self, stats: &CompositionStats) -> bool {
        stats.size <= self.instance.budget
            && stats.branching >= 1
            && check_cik_fast(
                &stats.pr_max,
                &stats.pr_min,
                stats.branching,
                &self.instance.level,
            )
    }

    /// Guaranteed-existence selection: the target module alone, or together
    /// with the lowest-id other fresh coin when the target is fresh.
    pub fn fallback_selection(&self) -> Vec<usize> {
        let mut selection = vec![self.target];
        if self.modules[self.target].kind == ModuleKind::FreshCoin {
            let extra = (0..self.len())
                .find(|&k| k != self.target && self.modules[k].kind == ModuleKind::FreshCoin);
            if let Some(k) = extra {
                if self.sizes[self.target] + self.sizes[k] <= self.instance.budget {
                    selection.push(k);
                    selection.sort_unstable();
                }
            }
        }
        selection
    }

    pub fn result_from(
        &self,
        selected: &[usize],
        engine: EngineKind,
        elapsed: Duration,
        rounds: Option<u64>,
    ) -> SelectionResult {
        let stats = self.stats(selected);
        SelectionResult {
            chosen: selected
                .iter()
                .map(|&k| self.modules[k].module_id.clone())
                .collect(),
            diversity: stats.diversity,
            size: stats.size,
            degree: stats.branching,
            eligible: self.is_eligible(&stats),
            engine,
            elapsed,
            rounds,
        }
    }
}

/// Stats of an explicit module-id selection; for reporting layers that do
/// not hold a [`SolverCtx`].
pub fn stats_for_chosen(
    instance: &ProblemInstance,
    chosen: &BTreeSet<ModuleId>,
) -> Result<CompositionStats> {
    let ctx = SolverCtx::new(instance)?;
    let mut selected = Vec::new();
    for id in chosen {
        let idx = ctx
            .modules
            .iter()
            .position(|m| &m.module_id == id)
            .ok_or_else(|| Error::UnknownId(format!("module {id}")))?;
        selected.push(idx);
    }
    selected.sort_unstable();
    Ok(ctx.stats(&selected))
}

#[derive(Debug, Clone)]
pub struct CompositionStats {
    pub size: u64,
    /// Permutation-tree branching of the composed ring.
    pub branching: u64,
    /// Additive module degree.
    pub lemma1_degree: u64,
    pub diversity: u64,
    pub pr_max: Prob,
    pub pr_min: Prob,
}

/// One admissible extreme pair `(i, j)` and its restricted candidate window.
#[derive(Debug, Clone)]
pub struct Pair {
    pub idx: usize,
    pub i: usize,
    pub j: usize,
    /// Mandatory core `{m_i, m_j, m_tau}` as sorted indices.
    pub omega: Vec<usize>,
    /// Candidates with `pr_max <= pr_max_i` and `pr_min >= pr_min_j`,
    /// excluding the core; sorted.
    pub window: Vec<usize>,
    pub cap: DegreeCap,
    pub branch_omega: u64,
    pub size_omega: u64,
}

/// Enumerates extreme pairs per the shared solver scheme: `m_i` bounds the
/// maximal marginal from above, `m_j` the minimal from below, and both must
/// admit the target's extremes. Pairs whose mandatory core already violates
/// the budget or the degree cap are dropped.
pub fn enumerate_pairs(ctx: &SolverCtx<'_>) -> Vec<Pair> {
    let n = ctx.len();
    let tau = ctx.target;
    let mut pairs = Vec::new();
    for i in 0..n {
        if ctx.modules[i].pr_max < ctx.modules[tau].pr_max {
            continue;
        }
        for j in 0..n {
            if ctx.modules[j].pr_max > ctx.modules[i].pr_max {
                continue; // m_j must sit inside the window of m_i
            }
            if ctx.modules[j].pr_min > ctx.modules[tau].pr_min {
                continue;
            }
            if ctx.modules[i].pr_min < ctx.modules[j].pr_min {
                continue; // the core itself must lie inside the window
            }
            let mut omega = vec![i, j, tau];
            omega.sort_unstable();
            omega.dedup();
            let cap = degree_cap(
                &ctx.modules[i].pr_max,
                &ctx.modules[j].pr_min,
                &ctx.instance.level,
            );
            let branch_omega: u64 = omega.iter().map(|&k| ctx.contrib[k]).sum();
            let size_omega: u64 = omega.iter().map(|&k| ctx.sizes[k]).sum();
            if size_omega > ctx.instance.budget || branch_omega == 0 || !cap.admits(branch_omega) {
                continue;
            }
            let window: Vec<usize> = (0..n)
                .filter(|&k| {
                    !omega.contains(&k)
                        && ctx.modules[k].pr_max <= ctx.modules[i].pr_max
                        && ctx.modules[k].pr_min >= ctx.modules[j].pr_min
                })
                .collect();
            pairs.push(Pair {
                idx: pairs.len(),
                i,
                j,
                omega,
                window,
                cap,
                branch_omega,
                size_omega,
            });
        }
    }
    pairs
}

/// Max coins per source transaction among the window modules.
pub fn window_tx_fanout(ctx: &SolverCtx<'_>, window: &[usize]) -> u64 {
    let mut counts: BTreeMap<&TxId, u64> = BTreeMap::new();
    for &k in window {
        for coin in &ctx.modules[k].coins {
            if let Some(tx) = ctx.instance.coin_tx.get(coin) {
                *counts.entry(tx).or_insert(0) += 1;
            }
        }
    }
    counts.values().max().copied().unwrap_or(1)
}

/// Chooses the better of two candidate selections: higher diversity first,
/// then the lexicographically smaller index set, then the earlier pair.
pub(crate) fn better_selection(
    best: &Option<(u64, Vec<usize>)>,
    diversity: u64,
    selection: &[usize],
) -> bool {
    match best {
        None => true,
        Some((best_div, best_sel)) => {
            diversity > *best_div || (diversity == *best_div && selection < best_sel.as_slice())
        }
    }
}

/// Runs the requested engine.
pub fn run_engine(
    instance: &ProblemInstance,
    engine: EngineKind,
    params: &EngineParams,
) -> Result<SelectionResult> {
    match engine {
        EngineKind::Progressive => progressive(instance, params.delta),
        EngineKind::Game => game(instance, params.seed, params.max_sweeps),
        EngineKind::Greedy => greedy(instance),
        EngineKind::Random => random_baseline(instance, params.seed),
        EngineKind::Exhaustive => exhaustive(instance, params.exhaustive_cap),
    }
}
