//! Instance and fixture generation.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use ringmix_core::datagen::{
    gen_real_shaped, gen_synthetic, monero_shaped_trace, pool_warnings, realize_history,
    RealShapedParams, SyntheticParams,
};
use ringmix_core::{load_trace, save_trace, CiLevel};

use crate::GlobalOpts;

#[derive(Args)]
pub struct GenArgs {
    /// synthetic: fabricated module pool; real: pool sampled from a trace;
    /// trace: the bundled block-stream fixture.
    #[arg(long, value_parser = ["synthetic", "real", "trace"])]
    mode: String,
    /// Output file (instance JSON, or trace JSON for --mode trace).
    #[arg(long)]
    out: PathBuf,
    /// Also write `<out>.trace.json`, a chain trace realizing the pool.
    #[arg(long, default_value_t = false)]
    with_history: bool,
    /// Source trace for real mode.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    o: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// e.g. --degree-range 1,9
    #[arg(long, value_parser = parse_u64_pair)]
    degree_range: Option<(u64, u64)>,
    #[arg(long, value_parser = parse_u64_pair)]
    size_range: Option<(u64, u64)>,
    /// e.g. --pr-max-range 0.1,0.5
    #[arg(long, value_parser = parse_f64_pair)]
    pr_max_range: Option<(f64, f64)>,
    #[arg(long)]
    rs_count: Option<usize>,
    #[arg(long)]
    rs_size: Option<usize>,
}

fn parse_u64_pair(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn parse_f64_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

pub fn gen(global: &GlobalOpts, args: GenArgs) -> Result<()> {
    match args.mode.as_str() {
        "trace" => {
            let trace = monero_shaped_trace();
            save_trace(&trace, &args.out)?;
            println!("out={}", args.out.display());
            println!(
                "coins={} txs={} rings={}",
                trace.coin_count(),
                trace.tx_count(),
                trace.all_ring_signatures().len()
            );
            return Ok(());
        }
        "synthetic" => {
            let mut params = SyntheticParams {
                seed: global.seed,
                ..Default::default()
            };
            if let Some(n) = args.n {
                params.n = n;
            }
            if let Some(o) = args.o {
                params.o = o;
            }
            if let Some(b) = args.budget {
                params.budget = b;
            }
            if let Some(e) = args.epsilon {
                params.level = CiLevel::from_epsilon(e);
            }
            if let Some(r) = args.degree_range {
                params.degree_range = r;
            }
            if let Some(r) = args.size_range {
                params.size_range = r;
            }
            if let Some(r) = args.pr_max_range {
                params.pr_max_range = r;
            }
            let instance = gen_synthetic(&params)?;
            for warning in pool_warnings(&instance) {
                eprintln!("warning: {warning}");
            }
            super::write_output(&args.out, &serde_json::to_string_pretty(&instance)?)?;
            println!("out={}", args.out.display());
            if args.with_history {
                let (trace, warnings) = realize_history(&instance)?;
                for warning in warnings {
                    eprintln!("warning: {warning}");
                }
                let trace_path = args.out.with_extension("trace.json");
                save_trace(&trace, &trace_path)?;
                println!("trace={}", trace_path.display());
            }
        }
        "real" => {
            let trace_path = args
                .trace
                .as_ref()
                .context("--trace is required for real mode")?;
            let trace = load_trace(trace_path)?;
            let mut params = RealShapedParams {
                seed: global.seed,
                ..Default::default()
            };
            if let Some(b) = args.budget {
                params.budget = b;
            }
            if let Some(e) = args.epsilon {
                params.level = CiLevel::from_epsilon(e);
            }
            if let Some(r) = args.degree_range {
                params.degree_range = r;
            }
            if let Some(r) = args.pr_max_range {
                params.pr_max_range = r;
            }
            if let Some(c) = args.rs_count {
                params.rs_count = c;
            }
            if let Some(s) = args.rs_size {
                params.rs_size = s;
            }
            let instance = gen_real_shaped(&trace, &params)?;
            for warning in pool_warnings(&instance) {
                eprintln!("warning: {warning}");
            }
            super::write_output(&args.out, &serde_json::to_string_pretty(&instance)?)?;
            println!("out={}", args.out.display());
            if args.with_history {
                let (history, warnings) = realize_history(&instance)?;
                for warning in warnings {
                    eprintln!("warning: {warning}");
                }
                let trace_path = args.out.with_extension("trace.json");
                save_trace(&history, &trace_path)?;
                println!("trace={}", trace_path.display());
            }
        }
        other => bail!("unknown mode {other}"),
    }
    Ok(())
}
