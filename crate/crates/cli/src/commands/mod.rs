mod flow;
mod generate;
mod inspect;
mod selection;
mod sweep;

pub use flow::{batch, spend, BatchArgs, SpendArgs};
pub use generate::{gen, GenArgs};
pub use inspect::{modules, oracle, verify, ModulesArgs, OracleArgs, VerifyArgs};
pub use selection::{select, SelectArgs};
pub use sweep::{bench, BenchArgs};

use anyhow::{bail, Context, Result};
use ringmix_core::rational::parse_ratio;
use ringmix_core::CiLevel;

/// Builds the level from either `--epsilon` or an exact `--exp-epsilon p/q`.
pub(crate) fn level_from(epsilon: Option<f64>, exp_epsilon: Option<&str>) -> Result<CiLevel> {
    match (epsilon, exp_epsilon) {
        (None, Some(q)) => {
            let q = parse_ratio(q).context("exp-epsilon must be a rational like 7/1")?;
            if q < num_traits::One::one() {
                bail!("exp-epsilon must be at least 1");
            }
            Ok(CiLevel::from_exp(q))
        }
        (Some(e), None) => {
            if e < 0.0 {
                bail!("epsilon must be non-negative");
            }
            Ok(CiLevel::from_epsilon(e))
        }
        (None, None) => bail!("one of --epsilon or --exp-epsilon is required"),
        (Some(_), Some(_)) => bail!("--epsilon conflicts with --exp-epsilon"),
    }
}

/// Writes a file, creating parent directories.
pub(crate) fn write_output(path: &std::path::Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
