//! The `bench` command: run a sweep spec and emit CSV (plus optional plot).

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use ringmix_core::harness::{emit_results, load_spec, run_sweep};

use crate::GlobalOpts;

#[derive(Args)]
pub struct BenchArgs {
    /// Sweep spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write an SVG plot per sweep.
    #[arg(long, default_value_t = false)]
    plot: bool,
}

pub fn bench(global: &GlobalOpts, args: BenchArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let table = run_sweep(&spec)?;
    let written = emit_results(&table, &args.out, global.timings, args.plot)?;
    println!("rows={}", table.rows.len());
    for path in written {
        println!("out={}", path.display());
    }
    Ok(())
}
