//! Read-only trace inspection: exact probabilities, level checks, modules.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use ringmix_core::ci::replay;
use ringmix_core::rational::{fmt_ratio, fmt_sig12};
use ringmix_core::{
    build_tree, check_ci_full, check_ds, extract_modules, load_trace, related_rs_set, CoinId,
    RsId,
};

use crate::GlobalOpts;

#[derive(Args)]
pub struct OracleArgs {
    /// Trace file.
    #[arg(long)]
    trace: PathBuf,
}

pub fn oracle(global: &GlobalOpts, args: OracleArgs) -> Result<()> {
    let trace = load_trace(&args.trace)?;
    let universe: BTreeSet<CoinId> = trace.coins.iter().map(|c| c.coin_id.clone()).collect();
    let rs_set = related_rs_set(&trace, &universe)?;
    if rs_set.is_empty() {
        bail!("trace holds no ring signatures");
    }
    let tree = build_tree(&rs_set, global.leaf_cap)?;
    let probs = tree.probabilities();
    let mut out = String::from("coin_id,rs_id,numerator,denominator\n");
    for ((coin, order), p) in &probs.pr_in_rs {
        let rs_id = &rs_set.by_order(*order).expect("order in range").rs_id;
        out.push_str(&format!("{coin},{rs_id},{},{}\n", p.numer(), p.denom()));
    }
    for (coin, p) in &probs.pr_spent {
        out.push_str(&format!("{coin},,{},{}\n", p.numer(), p.denom()));
    }
    print!("{out}");
    Ok(())
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Ring signature to check.
    #[arg(long)]
    rs: String,
    /// Required level.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Exact e^epsilon as a rational `p/q`.
    #[arg(long)]
    exp_epsilon: Option<String>,
    /// Use the iterative disjoint-superset path instead of enumeration.
    #[arg(long, default_value_t = false)]
    fast: bool,
}

pub fn verify(global: &GlobalOpts, args: VerifyArgs) -> Result<()> {
    let level = super::level_from(args.epsilon, args.exp_epsilon.as_deref())?;
    let trace = load_trace(&args.trace)?;
    let universe: BTreeSet<CoinId> = trace.coins.iter().map(|c| c.coin_id.clone()).collect();
    let rs_set = related_rs_set(&trace, &universe)?;
    let rs_id = RsId(args.rs.clone());
    let order = rs_set
        .iter()
        .position(|rs| rs.rs_id == rs_id)
        .map(|p| p + 1)
        .with_context(|| format!("ring signature {} not in trace", args.rs))?;

    let report = if args.fast {
        let diag = check_ds(&rs_set);
        if let Some((a, b)) = diag.violating_pair {
            bail!("--fast needs a disjoint-superset set; {a} and {b} overlap without nesting");
        }
        let state = replay(&rs_set)?;
        state.check_ci(&rs_set, order, &level)?
    } else {
        check_ci_full(&rs_set, order, &level, global.leaf_cap)?
    };

    println!("rs={} order={order}", args.rs);
    println!("satisfied={}", report.satisfied);
    println!("epsilon_required={}", fmt_sig12(report.epsilon_required));
    match &report.max_ratio {
        Some(r) => println!("max_ratio={}", fmt_ratio(r)),
        None => println!("max_ratio=unbounded"),
    }
    match &report.worst_pair {
        Some((hi, lo)) => println!("worst_pair={hi},{lo}"),
        None => println!("worst_pair="),
    }
    Ok(())
}

#[derive(Args)]
pub struct ModulesArgs {
    #[arg(long)]
    trace: PathBuf,
}

pub fn modules(_global: &GlobalOpts, args: ModulesArgs) -> Result<()> {
    let trace = load_trace(&args.trace)?;
    let universe: BTreeSet<CoinId> = trace.coins.iter().map(|c| c.coin_id.clone()).collect();
    let rs_set = related_rs_set(&trace, &universe)?;
    let coin_tx = trace.coin_tx_map();
    let modules = extract_modules(&rs_set, &universe, &coin_tx)?;
    let mut out = String::from("module_id,kind,size,ns,degree,dive,pr_max,pr_min\n");
    for m in &modules {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            m.module_id,
            m.kind,
            m.size(),
            m.ns,
            m.degree,
            m.dive,
            fmt_ratio(&m.pr_max),
            fmt_ratio(&m.pr_min),
        ));
    }
    print!("{out}");
    Ok(())
}
