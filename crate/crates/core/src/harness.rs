//! Experiment runner: one-parameter sweeps with fixed-seed sampling,
//! mean diversity/time aggregation, CSV emission, and simple SVG plots.
//!
//! Samples share seeds across sweep points (sample `s` always uses
//! `seed_base + s`), so a sweep varies exactly one thing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::{gen_real_shaped, gen_synthetic, RealShapedParams, SyntheticParams};
use crate::engines::{run_engine, EngineKind, EngineParams, ProblemInstance};
use crate::error::{Error, Result};
use crate::rational::CiLevel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Synthetic,
    Real,
}

/// The parameter being varied; exactly one per spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    N,
    O,
    Budget,
    Epsilon,
    DegreeRange,
    SizeRange,
    PrMaxRange,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::O => "o",
            SweepParam::Budget => "budget",
            SweepParam::Epsilon => "epsilon",
            SweepParam::DegreeRange => "degree_range",
            SweepParam::SizeRange => "size_range",
            SweepParam::PrMaxRange => "pr_max_range",
        }
    }
}

/// A swept value: a scalar or an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Scalar(f64),
    Range([f64; 2]),
}

impl SweepValue {
    pub fn label(&self) -> String {
        match self {
            SweepValue::Scalar(x) => {
                if x.fract() == 0.0 {
                    format!("{}", *x as i64)
                } else {
                    format!("{x}")
                }
            }
            SweepValue::Range([lo, hi]) => {
                if lo.fract() == 0.0 && hi.fract() == 0.0 {
                    format!("{}..{}", *lo as i64, *hi as i64)
                } else {
                    format!("{lo}..{hi}")
                }
            }
        }
    }
}

/// Optional overrides of the fixed defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedOverrides {
    pub n: Option<usize>,
    pub o: Option<usize>,
    pub budget: Option<u64>,
    pub epsilon: Option<f64>,
    pub degree_range: Option<[u64; 2]>,
    pub size_range: Option<[u64; 2]>,
    pub pr_max_range: Option<[f64; 2]>,
    pub rs_count: Option<usize>,
    pub rs_size: Option<usize>,
    pub delta: Option<f64>,
}

/// One sweep: vary `param` over `values`, everything else at defaults (or
/// `fixed` overrides), `samples` instances per point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub mode: SweepMode,
    pub param: SweepParam,
    pub values: Vec<SweepValue>,
    pub engines: Vec<EngineKind>,
    #[serde(default = "default_samples")]
    pub samples: u32,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default)]
    pub fixed: FixedOverrides,
    /// Trace file for real mode.
    #[serde(default)]
    pub trace: Option<PathBuf>,
}

fn default_samples() -> u32 {
    50
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<SweepSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: String,
    pub engine: EngineKind,
    pub mean_diversity: f64,
    pub mean_time_ms: f64,
    pub samples: u32,
    pub seed_base: u64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub spec_name: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn mean_diversity(&self, value_label: &str, engine: EngineKind) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.value == value_label && r.engine == engine)
            .map(|r| r.mean_diversity)
    }
}

fn synthetic_params(spec: &SweepSpec, value: &SweepValue, seed: u64) -> Result<SyntheticParams> {
    let mut p = SyntheticParams {
        seed,
        ..Default::default()
    };
    let f = &spec.fixed;
    if let Some(n) = f.n {
        p.n = n;
    }
    if let Some(o) = f.o {
        p.o = o;
    }
    if let Some(b) = f.budget {
        p.budget = b;
    }
    if let Some(e) = f.epsilon {
        p.level = CiLevel::from_epsilon(e);
    }
    if let Some([lo, hi]) = f.degree_range {
        p.degree_range = (lo, hi);
    }
    if let Some([lo, hi]) = f.size_range {
        p.size_range = (lo, hi);
    }
    if let Some([lo, hi]) = f.pr_max_range {
        p.pr_max_range = (lo, hi);
    }
    apply_synthetic_value(&mut p, spec.param, value)?;
    Ok(p)
}

fn apply_synthetic_value(
    p: &mut SyntheticParams,
    param: SweepParam,
    value: &SweepValue,
) -> Result<()> {
    let scalar = |v: &SweepValue| -> Result<f64> {
        match v {
            SweepValue::Scalar(x) => Ok(*x),
            SweepValue::Range(_) => Err(Error::InvalidParams(format!(
                "parameter {} takes a scalar",
                param.name()
            ))),
        }
    };
    let range = |v: &SweepValue| -> Result<(f64, f64)> {
        match v {
            SweepValue::Range([lo, hi]) => Ok((*lo, *hi)),
            SweepValue::Scalar(_) => Err(Error::InvalidParams(format!(
                "parameter {} takes a range",
                param.name()
            ))),
        }
    };
    match param {
        SweepParam::N => p.n = scalar(value)? as usize,
        SweepParam::O => p.o = scalar(value)? as usize,
        SweepParam::Budget => p.budget = scalar(value)? as u64,
        SweepParam::Epsilon => p.level = CiLevel::from_epsilon(scalar(value)?),
        SweepParam::DegreeRange => {
            let (lo, hi) = range(value)?;
            p.degree_range = (lo as u64, hi as u64);
        }
        SweepParam::SizeRange => {
            let (lo, hi) = range(value)?;
            p.size_range = (lo as u64, hi as u64);
        }
        SweepParam::PrMaxRange => {
            let (lo, hi) = range(value)?;
            p.pr_max_range = (lo, hi);
        }
    }
    Ok(())
}

fn real_params(spec: &SweepSpec, value: &SweepValue, seed: u64) -> Result<RealShapedParams> {
    let mut p = RealShapedParams {
        seed,
        ..Default::default()
    };
    let f = &spec.fixed;
    if let Some(b) = f.budget {
        p.budget = b;
    }
    if let Some(e) = f.epsilon {
        p.level = CiLevel::from_epsilon(e);
    }
    if let Some([lo, hi]) = f.degree_range {
        p.degree_range = (lo, hi);
    }
    if let Some([lo, hi]) = f.pr_max_range {
        p.pr_max_range = (lo, hi);
    }
    if let Some(c) = f.rs_count {
        p.rs_count = c;
    }
    if let Some(s) = f.rs_size {
        p.rs_size = s;
    }
    match spec.param {
        SweepParam::Budget => p.budget = scalar_of(value)? as u64,
        SweepParam::Epsilon => p.level = CiLevel::from_epsilon(scalar_of(value)?),
        SweepParam::DegreeRange => {
            let (lo, hi) = range_of(value)?;
            p.degree_range = (lo as u64, hi as u64);
        }
        SweepParam::PrMaxRange => {
            let (lo, hi) = range_of(value)?;
            p.pr_max_range = (lo, hi);
        }
        other => {
            return Err(Error::InvalidParams(format!(
                "parameter {} is not part of the real grid",
                other.name()
            )))
        }
    }
    Ok(p)
}

fn scalar_of(v: &SweepValue) -> Result<f64> {
    match v {
        SweepValue::Scalar(x) => Ok(*x),
        SweepValue::Range(_) => Err(Error::InvalidParams("expected a scalar value".into())),
    }
}

fn range_of(v: &SweepValue) -> Result<(f64, f64)> {
    match v {
        SweepValue::Range([lo, hi]) => Ok((*lo, *hi)),
        SweepValue::Scalar(_) => Err(Error::InvalidParams("expected a range value".into())),
    }
}

fn build_instance(
    spec: &SweepSpec,
    trace: Option<&crate::chain::ChainTrace>,
    value: &SweepValue,
    seed: u64,
) -> Result<ProblemInstance> {
    match spec.mode {
        SweepMode::Synthetic => gen_synthetic(&synthetic_params(spec, value, seed)?),
        SweepMode::Real => {
            let trace = trace.ok_or_else(|| {
                Error::InvalidParams("real mode needs a trace file".into())
            })?;
            gen_real_shaped(trace, &real_params(spec, value, seed)?)
        }
    }
}

/// Runs the sweep: per `(value, engine)` the mean diversity and mean
/// wall-clock time over `samples` seeded instances. Any engine failure
/// aborts with the failing seed.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let trace = match (&spec.trace, spec.mode) {
        (Some(path), _) => Some(crate::chain::load_trace(path)?),
        (None, SweepMode::Real) => {
            return Err(Error::InvalidParams("real mode needs a trace file".into()))
        }
        _ => None,
    };
    let delta = spec.fixed.delta.unwrap_or(0.1);
    let mut rows = Vec::new();
    for value in &spec.values {
        let mut diversity_sums: BTreeMap<EngineKind, (u64, f64)> = BTreeMap::new();
        for s in 0..spec.samples {
            let seed = spec.seed_base + s as u64;
            let instance = build_instance(spec, trace.as_ref(), value, seed)?;
            for &engine in &spec.engines {
                let params = EngineParams {
                    delta,
                    seed,
                    ..Default::default()
                };
                let result =
                    run_engine(&instance, engine, &params).map_err(|e| Error::EngineFailure {
                        engine: engine.name().to_string(),
                        seed,
                        source: Box::new(e),
                    })?;
                let entry = diversity_sums.entry(engine).or_insert((0, 0.0));
                entry.0 += result.diversity;
                entry.1 += result.elapsed.as_secs_f64() * 1000.0;
            }
        }
        for &engine in &spec.engines {
            let (div_sum, time_sum) = diversity_sums[&engine];
            rows.push(SweepRow {
                param: spec.param.name().to_string(),
                value: value.label(),
                engine,
                mean_diversity: div_sum as f64 / spec.samples as f64,
                mean_time_ms: time_sum / spec.samples as f64,
                samples: spec.samples,
                seed_base: spec.seed_base,
            });
        }
    }
    Ok(SweepTable {
        spec_name: spec.name.clone(),
        rows,
    })
}

/// CSV with the fixed column set. `with_timings` keeps wall-clock means;
/// otherwise the time column is zeroed so output is byte-reproducible.
pub fn render_csv(table: &SweepTable, with_timings: bool) -> String {
    let mut out = String::from("param,value,engine,mean_diversity,mean_time_ms,samples,seed_base\n");
    for row in &table.rows {
        let time = if with_timings { row.mean_time_ms } else { 0.0 };
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{},{}\n",
            row.param, row.value, row.engine, row.mean_diversity, time, row.samples, row.seed_base
        ));
    }
    out
}

/// Writes the CSV and, when asked, an SVG line plot of mean diversity.
pub fn emit_results(
    table: &SweepTable,
    out_dir: impl AsRef<Path>,
    with_timings: bool,
    with_plot: bool,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    let csv_path = out_dir.join(format!("{}.csv", table.spec_name));
    std::fs::write(&csv_path, render_csv(table, with_timings)).map_err(|source| Error::Io {
        path: csv_path.display().to_string(),
        source,
    })?;
    written.push(csv_path);
    if with_plot {
        let svg_path = out_dir.join(format!("{}.svg", table.spec_name));
        std::fs::write(&svg_path, render_svg(table)).map_err(|source| Error::Io {
            path: svg_path.display().to_string(),
            source,
        })?;
        written.push(svg_path);
    }
    Ok(written)
}

/// A minimal deterministic line plot: mean diversity vs sweep value, one
/// polyline per engine.
pub fn render_svg(table: &SweepTable) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const MARGIN: f64 = 50.0;
    let mut values: Vec<&str> = Vec::new();
    for row in &table.rows {
        if !values.contains(&row.value.as_str()) {
            values.push(&row.value);
        }
    }
    let mut engines: Vec<EngineKind> = Vec::new();
    for row in &table.rows {
        if !engines.contains(&row.engine) {
            engines.push(row.engine);
        }
    }
    let y_max = table
        .rows
        .iter()
        .map(|r| r.mean_diversity)
        .fold(1.0f64, f64::max);
    let x_of = |i: usize| {
        if values.len() <= 1 {
            W / 2.0
        } else {
            MARGIN + (W - 2.0 * MARGIN) * i as f64 / (values.len() - 1) as f64
        }
    };
    let y_of = |v: f64| H - MARGIN - (H - 2.0 * MARGIN) * v / y_max;
    let colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN
    ));
    for (i, value) in values.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            x_of(i),
            H - MARGIN + 16.0,
            value
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{:.1}</text>\n",
        MARGIN - 6.0,
        MARGIN + 4.0,
        y_max
    ));
    for (e_idx, engine) in engines.iter().enumerate() {
        let mut points = Vec::new();
        for (i, value) in values.iter().enumerate() {
            if let Some(row) = table
                .rows
                .iter()
                .find(|r| r.value == *value && r.engine == *engine)
            {
                points.push(format!("{:.1},{:.1}", x_of(i), y_of(row.mean_diversity)));
            }
        }
        let color = colors[e_idx % colors.len()];
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
            color,
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{}\">{}</text>\n",
            W - MARGIN + 4.0,
            MARGIN + 14.0 * e_idx as f64,
            color,
            engine
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
