//! The `select` command: one spend, one engine, one chosen mixin set.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::json;

use ringmix_core::ds::tx_fanout_bounds;
use ringmix_core::engines::{stats_for_chosen, EngineParams};
use ringmix_core::rational::to_f64;
use ringmix_core::{
    extract_modules, fast_required_ratio, load_trace, related_rs_set, run_engine, CiLevel, CoinId,
    EngineKind, ProblemInstance,
};

use crate::GlobalOpts;

#[derive(Args)]
pub struct SelectArgs {
    /// Trace file; modules are extracted from its ring signatures.
    #[arg(long, conflicts_with = "instance")]
    trace: Option<PathBuf>,
    /// Pre-generated instance file instead of a trace.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Coin to spend; with --instance defaults to the stored target.
    #[arg(long)]
    spend: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    exp_epsilon: Option<String>,
    #[arg(long)]
    engine: EngineKindArg,
    /// Modules cap for the exhaustive engine.
    #[arg(long, default_value_t = 20)]
    exhaustive_cap: usize,
}

#[derive(Clone)]
pub struct EngineKindArg(pub EngineKind);

impl std::str::FromStr for EngineKindArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(EngineKindArg).map_err(|e| e.to_string())
    }
}

/// Builds the instance either from a trace (extraction) or a file.
pub(crate) fn build_instance(
    trace_path: Option<&PathBuf>,
    instance_path: Option<&PathBuf>,
    spend: Option<&str>,
    budget: Option<u64>,
    level: Option<CiLevel>,
) -> Result<ProblemInstance> {
    let mut instance = match (trace_path, instance_path) {
        (Some(path), None) => {
            let trace = load_trace(path)?;
            let universe: BTreeSet<CoinId> =
                trace.coins.iter().map(|c| c.coin_id.clone()).collect();
            let rs_set = related_rs_set(&trace, &universe)?;
            let coin_tx = trace.coin_tx_map();
            let modules = extract_modules(&rs_set, &universe, &coin_tx)?;
            let (o_max, o_min) = tx_fanout_bounds(&modules, &coin_tx);
            let spend = spend.context("--spend is required with --trace")?;
            let spend_coin = CoinId(spend.to_string());
            let target_module = modules
                .iter()
                .find(|m| m.coins.contains(&spend_coin))
                .with_context(|| format!("coin {spend} not in trace"))?
                .module_id
                .clone();
            ProblemInstance {
                modules,
                target_module,
                budget: budget.context("--budget is required with --trace")?,
                level: level
                    .clone()
                    .context("--epsilon or --exp-epsilon is required with --trace")?,
                coin_tx,
                o_max,
                o_min,
            }
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut instance: ProblemInstance =
                serde_json::from_str(&text).context("parsing instance file")?;
            if let Some(spend) = spend {
                let coin = CoinId(spend.to_string());
                instance.target_module = instance
                    .modules
                    .iter()
                    .find(|m| m.coins.contains(&coin))
                    .with_context(|| format!("coin {spend} not in instance"))?
                    .module_id
                    .clone();
            }
            if let Some(b) = budget {
                instance.budget = b;
            }
            if let Some(l) = level {
                instance.level = l;
            }
            instance
        }
        _ => bail!("exactly one of --trace or --instance is required"),
    };
    instance.modules.sort_by(|a, b| a.module_id.cmp(&b.module_id));
    instance.validate()?;
    Ok(instance)
}

pub fn select(global: &GlobalOpts, args: SelectArgs) -> Result<()> {
    let level = if args.epsilon.is_some() || args.exp_epsilon.is_some() {
        Some(super::level_from(args.epsilon, args.exp_epsilon.as_deref())?)
    } else {
        None
    };
    let instance = build_instance(
        args.trace.as_ref(),
        args.instance.as_ref(),
        args.spend.as_deref(),
        args.budget,
        level,
    )?;
    let params = EngineParams {
        delta: global.delta,
        seed: global.seed,
        exhaustive_cap: args.exhaustive_cap,
        ..Default::default()
    };
    let result = run_engine(&instance, args.engine.0, &params)?;

    let stats = stats_for_chosen(&instance, &result.chosen)?;
    let epsilon_required = fast_required_ratio(&stats.pr_max, &stats.pr_min, stats.branching)
        .map(|r| to_f64(&r).ln().max(0.0));
    let chosen_coins: Vec<String> = result
        .chosen
        .iter()
        .flat_map(|id| {
            instance
                .module(id)
                .expect("chosen module exists")
                .coins
                .iter()
                .map(|c| c.0.clone())
        })
        .collect();

    let mut doc = json!({
        "engine": result.engine.name(),
        "chosen_modules": result.chosen.iter().map(|m| m.0.clone()).collect::<Vec<_>>(),
        "chosen_coins": chosen_coins,
        "diversity": result.diversity,
        "size": result.size,
        "degree": result.degree,
        "eligible": result.eligible,
        "epsilon_required": epsilon_required,
        "rounds": result.rounds,
    });
    if global.timings {
        doc["elapsed_ms"] = json!(result.elapsed.as_secs_f64() * 1000.0);
    }
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}
