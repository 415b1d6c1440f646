//! Batch partitioning and framework-driven spending.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use ringmix_core::engines::EngineParams;
use ringmix_core::framework::SpendRequest;
use ringmix_core::{build_batches, load_trace, save_trace, select_in_batch, Block, CoinId};

use crate::commands::selection::EngineKindArg;
use crate::GlobalOpts;

#[derive(Args)]
pub struct BatchArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Coin threshold per batch.
    #[arg(long)]
    lambda: u64,
    /// Output format.
    #[arg(long, default_value = "text", value_parser = ["text", "csv"])]
    format: String,
}

pub fn batch(_global: &GlobalOpts, args: BatchArgs) -> Result<()> {
    let trace = load_trace(&args.trace)?;
    let batches = build_batches(&trace, args.lambda)?;
    if args.format == "csv" {
        println!("batch_id,first_height,last_height,coins,rings,fresh,partial");
        for b in &batches {
            println!(
                "{},{},{},{},{},{},{}",
                b.batch_id,
                b.first_height,
                b.last_height,
                b.universe.len(),
                b.rs_set.len(),
                b.fresh().len(),
                b.partial
            );
        }
    } else {
        println!(
            "{:>8} {:>12} {:>12} {:>7} {:>6} {:>6} {:>8}",
            "batch", "first", "last", "coins", "rings", "fresh", "partial"
        );
        for b in &batches {
            println!(
                "{:>8} {:>12} {:>12} {:>7} {:>6} {:>6} {:>8}",
                b.batch_id,
                b.first_height,
                b.last_height,
                b.universe.len(),
                b.rs_set.len(),
                b.fresh().len(),
                b.partial
            );
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct SpendArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Coin to spend.
    #[arg(long)]
    coin: String,
    #[arg(long)]
    lambda: u64,
    #[arg(long)]
    budget: u64,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    exp_epsilon: Option<String>,
    #[arg(long)]
    engine: EngineKindArg,
    /// Where the trace with the committed ring is written.
    #[arg(long)]
    out: PathBuf,
}

pub fn spend(global: &GlobalOpts, args: SpendArgs) -> Result<()> {
    let level = super::level_from(args.epsilon, args.exp_epsilon.as_deref())?;
    let trace = load_trace(&args.trace)?;
    let coin_tx = trace.coin_tx_map();
    let mut batches = build_batches(&trace, args.lambda)?;
    let coin = CoinId(args.coin.clone());
    let batch = batches
        .iter_mut()
        .find(|b| b.universe.contains(&coin))
        .with_context(|| format!("coin {} is in no batch", args.coin))?;

    let request = SpendRequest {
        coin,
        budget: args.budget,
        level,
        engine: args.engine.0,
        params: EngineParams {
            delta: global.delta,
            seed: global.seed,
            ..Default::default()
        },
    };
    let (result, mut rs) = select_in_batch(batch, &coin_tx, &request)?;

    // Commit: the new ring goes into a fresh trailing block with the next
    // global order index.
    let mut out_trace = trace;
    let next_height = out_trace.blocks.iter().map(|b| b.height).max().unwrap_or(0) + 1;
    let next_order = out_trace
        .all_ring_signatures()
        .last()
        .map(|r| r.order_index)
        .unwrap_or(0)
        + 1;
    rs.order_index = next_order;
    println!("committed={}", rs.rs_id);
    println!("members={}", rs.members.len());
    println!("diversity={}", result.diversity);
    println!("degree={}", result.degree);
    out_trace.blocks.push(Block {
        height: next_height,
        tx_outputs: vec![],
        ring_signatures: vec![rs],
    });
    out_trace.validate()?;
    save_trace(&out_trace, &args.out)?;
    println!("out={}", args.out.display());
    Ok(())
}
