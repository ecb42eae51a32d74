//! Scenario ingestion, orchestration and CSV output for the `ym2` binary.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use ym2_core::curve_geometry::enclosed_area;
use ym2_core::mc_oracle::RNG_NAME;
use ym2_core::{exact_simple_loop, mc_wilson, wilson_series, AdmissibleLoop, EngineConfig, GaugeChoice, Representation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub lambda: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub group: String,
    pub rep: String,
    /// Horizontal pieces as vertex lists [x, y], in traversal order.
    pub pieces: Vec<Vec<[f64; 2]>>,
    pub gauges: Vec<String>,
    pub max_order: usize,
    pub lattice_schedule: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// A gauge column of a scenario: a lattice series or the exact reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaugeSpec {
    Series(GaugeChoice),
    Exact,
}

impl fmt::Display for GaugeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeSpec::Series(g) => write!(f, "{g}"),
            GaugeSpec::Exact => write!(f, "exact"),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| anyhow!("scenario parse error at line {}, column {}: {e}", e.line(), e.column()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn representation(&self) -> Result<Representation> {
        Representation::parse(&format!("{}:{}", self.group, self.rep))
            .map_err(|e| anyhow!("field `group`/`rep` ({}:{}): {e}", self.group, self.rep))
    }

    pub fn admissible_loop(&self) -> Result<AdmissibleLoop> {
        let pieces = self.pieces.iter().map(|p| p.iter().map(|v| (v[0], v[1])).collect()).collect();
        AdmissibleLoop::from_vertices(pieces).map_err(|e| anyhow!("field `pieces`: {e}"))
    }

    pub fn gauge_specs(&self) -> Result<Vec<GaugeSpec>> {
        self.gauges
            .iter()
            .enumerate()
            .map(|(i, g)| {
                if g == "exact" {
                    Ok(GaugeSpec::Exact)
                } else {
                    GaugeChoice::parse(g).map(GaugeSpec::Series).map_err(|e| anyhow!("field `gauges[{i}]`: {e}"))
                }
            })
            .collect()
    }

    /// One-line summary attached to backend errors.
    pub fn echo(&self) -> String {
        format!(
            "{}:{} loop with {} pieces, gauges {:?}, K = {}, schedule {:?}",
            self.group,
            self.rep,
            self.pieces.len(),
            self.gauges,
            self.max_order,
            self.lattice_schedule
        )
    }
}

/// One CSV row; `n = None` marks extrapolated or exact values.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub gauge: String,
    pub order: usize,
    pub n: Option<usize>,
    pub coefficient: f64,
    pub error_estimate: Option<f64>,
    pub flags: Vec<String>,
}

pub const CSV_HEADER: &str = "gauge,order,N,coefficient,error_estimate,flags";

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Row {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.gauge,
            self.order,
            self.n.map_or("inf".to_string(), |n| n.to_string()),
            fmt_float(self.coefficient),
            self.error_estimate.map_or(String::new(), fmt_float),
            self.flags.join(";")
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            bail!("expected 6 fields, got {}: {line}", f.len());
        }
        Ok(Row {
            gauge: f[0].to_string(),
            order: f[1].parse()?,
            n: if f[2] == "inf" { None } else { Some(f[2].parse()?) },
            coefficient: f[3].parse()?,
            error_estimate: if f[4].is_empty() { None } else { Some(f[4].parse()?) },
            flags: if f[5].is_empty() { Vec::new() } else { f[5].split(';').map(str::to_string).collect() },
        })
    }
}

/// Extrapolated (or exact) values for one gauge.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeBlock {
    pub gauge: String,
    pub coefficients: Vec<f64>,
    pub error_estimate: Vec<f64>,
    pub raw: Vec<(usize, Vec<f64>)>,
    pub flags: Vec<String>,
}

fn exact_block(scenario: &Scenario, rep: &Representation, lp: &AdmissibleLoop) -> Result<GaugeBlock> {
    if !lp.is_simple() {
        bail!("gauge `exact` needs a simple loop; this loop is self-intersecting (use a lattice gauge instead)");
    }
    let area = enclosed_area(lp)?;
    let v = exact_simple_loop(rep, area)?;
    Ok(GaugeBlock {
        gauge: "exact".into(),
        coefficients: v.coefficients(scenario.max_order),
        error_estimate: vec![0.0; scenario.max_order + 1],
        raw: Vec::new(),
        flags: Vec::new(),
    })
}

/// Evaluates every gauge of the scenario.
pub fn evaluate(scenario: &Scenario, cfg: &EngineConfig) -> Result<Vec<GaugeBlock>> {
    let rep = scenario.representation()?;
    let lp = scenario.admissible_loop()?;
    let specs = scenario.gauge_specs()?;
    let mut out = Vec::new();
    for spec in specs {
        let block = match spec {
            GaugeSpec::Exact => exact_block(scenario, &rep, &lp)?,
            GaugeSpec::Series(g) => {
                let r = wilson_series(&lp, &rep, g, scenario.max_order, &scenario.lattice_schedule, cfg)
                    .with_context(|| format!("gauge {g}; scenario: {}", scenario.echo()))?;
                GaugeBlock {
                    gauge: g.to_string(),
                    coefficients: r.coefficients,
                    error_estimate: r.error_estimate,
                    raw: r.lattice_schedule.into_iter().zip(r.raw).collect(),
                    flags: r.flags,
                }
            }
        };
        out.push(block);
    }
    Ok(out)
}

/// Raw per-N rows plus extrapolated rows, sorted by (gauge, order, N).
pub fn run_compute(scenario: &Scenario, cfg: &EngineConfig) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for b in evaluate(scenario, cfg)? {
        for (n, raw) in &b.raw {
            for (k, &c) in raw.iter().enumerate() {
                rows.push(Row { gauge: b.gauge.clone(), order: k, n: Some(*n), coefficient: c, error_estimate: None, flags: Vec::new() });
            }
        }
        for (k, &c) in b.coefficients.iter().enumerate() {
            rows.push(Row {
                gauge: b.gauge.clone(),
                order: k,
                n: None,
                coefficient: c,
                error_estimate: Some(b.error_estimate[k]),
                flags: b.flags.clone(),
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.gauge.as_str(), a.order, a.n.unwrap_or(usize::MAX)).cmp(&(b.gauge.as_str(), b.order, b.n.unwrap_or(usize::MAX)))
    });
    Ok(rows)
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<Row>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => bail!("unexpected CSV header {other:?}"),
    }
    lines.map(Row::from_csv).collect()
}

/// Writes via a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| anyhow!("output path {} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderComparison {
    pub order: usize,
    pub max_difference: f64,
    /// Combined error estimate of the worst pair.
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub gauges: Vec<String>,
    pub orders: Vec<OrderComparison>,
}

impl CompareReport {
    pub fn pass(&self) -> bool {
        self.orders.iter().all(|o| o.pass)
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gauges: {}", self.gauges.join(", "))?;
        for o in &self.orders {
            writeln!(
                f,
                "order {}: max |Δ| = {:.3e}, tightest tolerance {:.3e}: {}",
                o.order,
                o.max_difference,
                o.tolerance,
                if o.pass { "pass" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.pass() { "pass" } else { "FAIL" })
    }
}

fn compare_blocks(blocks: &[GaugeBlock]) -> CompareReport {
    let k = blocks.iter().map(|b| b.coefficients.len()).min().unwrap_or(0);
    let orders = (0..k)
        .map(|order| {
            let mut worst = OrderComparison { order, max_difference: 0.0, tolerance: 0.0, pass: true };
            let mut least_slack = f64::INFINITY;
            for (i, a) in blocks.iter().enumerate() {
                for b in &blocks[i + 1..] {
                    let d = (a.coefficients[order] - b.coefficients[order]).abs();
                    let tol = a.error_estimate[order] + b.error_estimate[order];
                    // rounding slack for exactly agreeing values
                    let ok = d <= tol + 1e-12 * (1.0 + a.coefficients[order].abs());
                    worst.max_difference = worst.max_difference.max(d);
                    if tol - d < least_slack {
                        least_slack = tol - d;
                        worst.tolerance = tol;
                    }
                    worst.pass &= ok;
                }
            }
            worst
        })
        .collect();
    CompareReport { gauges: blocks.iter().map(|b| b.gauge.clone()).collect(), orders }
}

/// Pairwise per-order comparison of all gauges of one scenario, or of the
/// gauges of two scenarios against each other.
pub fn run_compare(scenario: &Scenario, against: Option<&Scenario>, cfg: &EngineConfig) -> Result<CompareReport> {
    let mut blocks = evaluate(scenario, cfg)?;
    if let Some(other) = against {
        for b in &mut blocks {
            b.gauge = format!("a:{}", b.gauge);
        }
        for mut b in evaluate(other, cfg)? {
            b.gauge = format!("b:{}", b.gauge);
            blocks.push(b);
        }
    }
    if blocks.len() < 2 {
        bail!("compare needs at least two gauges (field `gauges`), got {}", blocks.len());
    }
    Ok(compare_blocks(&blocks))
}

#[derive(Clone, Debug, PartialEq)]
pub struct McRow {
    pub lambda: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub n_rejected: usize,
    pub lattice_n: usize,
    pub seed: u64,
    pub series_value: f64,
    pub series_error: f64,
    pub z: f64,
    pub flagged: bool,
}

pub const MC_HEADER: &str = "lambda,mean,stderr,n_samples,n_rejected,N,seed,series_value,series_error,z,flags,rng";

impl McRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_float(self.lambda),
            fmt_float(self.mean),
            fmt_float(self.stderr),
            self.n_samples,
            self.n_rejected,
            self.lattice_n,
            self.seed,
            fmt_float(self.series_value),
            fmt_float(self.series_error),
            fmt_float(self.z),
            if self.flagged { "rejections_over_1pct" } else { "" },
            RNG_NAME.replace(',', ";")
        )
    }
}

/// Monte-Carlo estimates per λ, against the truncated ax series.
///
/// The series uncertainty adds the extrapolation errors and the size of the
/// last kept term as a truncation proxy. MC runs on the finest lattice.
pub fn run_mc(scenario: &Scenario, cfg: &EngineConfig) -> Result<Vec<McRow>> {
    let mc = scenario.mc.as_ref().ok_or_else(|| anyhow!("field `mc` is required for the mc command"))?;
    if mc.samples == 0 {
        bail!("no samples requested");
    }
    if mc.lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        bail!("MC requires λ > 0");
    }
    let rep = scenario.representation()?;
    let lp = scenario.admissible_loop()?;
    let n = *scenario.lattice_schedule.last().ok_or_else(|| anyhow!("field `lattice_schedule` is empty"))?;
    let series = wilson_series(&lp, &rep, GaugeChoice::Ax, scenario.max_order, &scenario.lattice_schedule, cfg)
        .with_context(|| format!("ax series; scenario: {}", scenario.echo()))?;
    let mut rows = Vec::new();
    for &lambda in &mc.lambda {
        let est = mc_wilson(&lp, &rep, lambda, n, mc.samples, mc.seed).with_context(|| format!("MC at λ = {lambda}"))?;
        let powers: Vec<f64> = (0..series.coefficients.len()).map(|k| lambda.powi(k as i32)).collect();
        let value: f64 = series.coefficients.iter().zip(&powers).map(|(c, p)| c * p).sum();
        let k = series.coefficients.len() - 1;
        let trunc = if k == 0 { 0.0 } else { (series.coefficients[k] * powers[k]).abs() };
        let err: f64 = series.error_estimate.iter().zip(&powers).map(|(e, p)| e * p).sum::<f64>() + trunc;
        let z = (est.mean - value) / (est.stderr * est.stderr + err * err).sqrt();
        rows.push(McRow {
            lambda,
            mean: est.mean,
            stderr: est.stderr,
            n_samples: est.n_samples,
            n_rejected: est.n_rejected,
            lattice_n: n,
            seed: est.seed,
            series_value: value,
            series_error: err,
            z,
            flagged: est.flagged,
        });
    }
    Ok(rows)
}

pub fn mc_rows_to_csv(rows: &[McRow]) -> String {
    let mut s = String::from(MC_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Output path: the command-line value, else the scenario's `output`.
pub fn output_path(cli: Option<&Path>, scenario: &Scenario) -> Result<PathBuf> {
    cli.map(Path::to_path_buf)
        .or_else(|| scenario.output.clone())
        .ok_or_else(|| anyhow!("no output path: pass --out or set `output` in the scenario"))
}

/// Exit code for an error: 3 for resource limits, 2 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let resource = err.chain().any(|e| e.downcast_ref::<ym2_core::Error>().is_some_and(|e| e.is_resource()));
    if resource {
        3
    } else {
        2
    }
}
