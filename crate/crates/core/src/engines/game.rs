//! The game-theoretic solver: per extreme pair, windowed modules play a
//! best-response game whose common payoff is the composed ring's diversity
//! when the configuration is eligible and zero otherwise. That payoff is
//! also the potential, so the game is an exact potential game and every
//! best-response run halts in a pure Nash equilibrium.

use std::time::Instant;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{
    better_selection, enumerate_pairs, EngineKind, Pair, ProblemInstance, SelectionResult,
    SolverCtx, TxMask,
};

/// One pair's game, exposed so diagnostics and tests can replay utilities,
/// potentials, and equilibrium checks.
pub struct PairGame<'a, 'b> {
    ctx: &'a SolverCtx<'b>,
    pub pair: &'a Pair,
    /// Player module indices, in fixed id order.
    pub players: Vec<usize>,
}

impl<'a, 'b> PairGame<'a, 'b> {
    pub fn new(ctx: &'a SolverCtx<'b>, pair: &'a Pair) -> Self {
        PairGame {
            ctx,
            pair,
            players: pair.window.clone(),
        }
    }

    fn config_parts(&self, strategies: &[bool]) -> (u64, u64, TxMask) {
        let mut size = self.pair.size_omega;
        let mut branch = self.pair.branch_omega;
        let mut mask = self.ctx.union_mask(&self.pair.omega);
        for (p, &s) in self.players.iter().zip(strategies) {
            if s {
                size += self.ctx.sizes[*p];
                branch += self.ctx.contrib[*p];
                mask.or_with(&self.ctx.masks[*p]);
            }
        }
        (size, branch, mask)
    }

    fn config_eligible(&self, size: u64, branch: u64) -> bool {
        size <= self.ctx.instance.budget && self.pair.cap.admits(branch)
    }

    /// The common utility of every player under `strategies`:
    /// diversity / player count when eligible, zero otherwise.
    pub fn utility(&self, strategies: &[bool]) -> Rational64 {
        let (size, branch, mask) = self.config_parts(strategies);
        if self.config_eligible(size, branch) {
            // A playerless pair is a trivial game over the core alone.
            Rational64::new(mask.count() as i64, self.players.len().max(1) as i64)
        } else {
            Rational64::from_integer(0)
        }
    }

    /// The exact potential; identical to the utility by construction, kept
    /// as a separate entry point so the identity can be exercised.
    pub fn potential(&self, strategies: &[bool]) -> Rational64 {
        self.utility(strategies)
    }

    /// Runs best-response sweeps in fixed player order until stable.
    /// Ties always resolve to not-selected.
    pub fn run(&self, rng: &mut ChaCha12Rng, max_sweeps: u64) -> Result<(Vec<bool>, u64)> {
        let mut strategies: Vec<bool> = self.players.iter().map(|_| rng.gen_bool(0.5)).collect();
        let mut sweeps = 0u64;
        loop {
            sweeps += 1;
            if sweeps > max_sweeps {
                return Err(Error::MaxSweepsExceeded { max_sweeps });
            }
            let mut changed = false;
            for p in 0..self.players.len() {
                let current = strategies[p];
                strategies[p] = true;
                let with = self.utility(&strategies);
                strategies[p] = false;
                let without = self.utility(&strategies);
                let next = with > without;
                strategies[p] = next;
                if next != current {
                    changed = true;
                }
            }
            if !changed {
                return Ok((strategies, sweeps));
            }
        }
    }

    /// True when no single player can strictly raise its own utility.
    pub fn is_nash(&self, strategies: &[bool]) -> bool {
        let base = self.utility(strategies);
        let mut probe = strategies.to_vec();
        for p in 0..self.players.len() {
            probe[p] = !probe[p];
            if self.utility(&probe) > base {
                return false;
            }
            probe[p] = strategies[p];
        }
        true
    }

    pub fn selection(&self, strategies: &[bool]) -> Vec<usize> {
        let mut sel = self.pair.omega.clone();
        sel.extend(
            self.players
                .iter()
                .zip(strategies)
                .filter(|(_, &s)| s)
                .map(|(&p, _)| p),
        );
        sel.sort_unstable();
        sel
    }
}

/// Equilibrium reached in one pair's game.
#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub pair_idx: usize,
    pub i: usize,
    pub j: usize,
    pub players: Vec<usize>,
    pub strategies: Vec<bool>,
    pub sweeps: u64,
    pub selection: Vec<usize>,
    pub diversity: u64,
}

pub fn game(instance: &ProblemInstance, seed: u64, max_sweeps: u64) -> Result<SelectionResult> {
    game_detailed(instance, seed, max_sweeps).map(|(result, _)| result)
}

/// As [`game`], but also returns every pair's equilibrium for inspection.
pub fn game_detailed(
    instance: &ProblemInstance,
    seed: u64,
    max_sweeps: u64,
) -> Result<(SelectionResult, Vec<PairOutcome>)> {
    let start = Instant::now();
    let ctx = SolverCtx::new(instance)?;
    let pairs = enumerate_pairs(&ctx);
    let n = ctx.len() as u64;

    let outcomes: Result<Vec<PairOutcome>> = pairs
        .par_iter()
        .map(|pair| {
            let pair_game = PairGame::new(&ctx, pair);
            // A per-pair stream keeps runs bit-identical regardless of how
            // pairs are scheduled.
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream((pair.i as u64) * n + pair.j as u64 + 1);
            let (strategies, sweeps) = pair_game.run(&mut rng, max_sweeps)?;
            debug_assert!(pair_game.is_nash(&strategies));
            let selection = pair_game.selection(&strategies);
            let diversity = ctx.union_mask(&selection).count();
            Ok(PairOutcome {
                pair_idx: pair.idx,
                i: pair.i,
                j: pair.j,
                players: pair_game.players.clone(),
                strategies,
                sweeps,
                selection,
                diversity,
            })
        })
        .collect();
    let outcomes = outcomes?;

    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut max_sweeps_seen = 0u64;
    for outcome in &outcomes {
        max_sweeps_seen = max_sweeps_seen.max(outcome.sweeps);
        if better_selection(&best, outcome.diversity, &outcome.selection) {
            best = Some((outcome.diversity, outcome.selection.clone()));
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
    let result = ctx.result_from(
        &selection,
        EngineKind::Game,
        start.elapsed(),
        Some(max_sweeps_seen),
    );
    Ok((result, outcomes))
}
