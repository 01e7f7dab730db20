//! Shared pieces of the `wassquant` binary: config schema, number
//! formatting, transport-plan serialization, and the SVG plot writer.
//!
//! Everything here is deterministic: the same inputs produce byte-identical
//! strings, which the golden-file tests rely on.

use serde::{Deserialize, Serialize};

use wassquant::error::{Error, Result};
use wassquant::rates::{RateConfig, RateMode, RateResult};
use wassquant::transport::OTResult;
use wassquant::Sampler;

/// Versioned experiment description for the `rates` subcommand. Unknown
/// fields are rejected so typos fail loudly instead of silently running a
/// default.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must be `"v1"`.
    pub schema: String,
    /// Sampler descriptor, e.g. `uniform-cube:d=2` or
    /// `uniform-sphere-surface:d=1:D=10`.
    pub sampler: String,
    pub mode: RateMode,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_ref_multiplier")]
    pub ref_multiplier: usize,
    #[serde(default = "default_kmeans_constant")]
    pub kmeans_constant: f64,
    pub seed: u64,
}

fn default_trials() -> usize {
    10
}

fn default_ref_multiplier() -> usize {
    16
}

fn default_kmeans_constant() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("experiment config: {e}")))?;
        if cfg.schema != "v1" {
            return Err(Error::Format(format!(
                "unsupported config schema `{}`, expected `v1`",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn to_rate_config(&self) -> Result<RateConfig<f64>> {
        let sampler = Sampler::from_descriptor(&self.sampler, self.seed)?;
        Ok(RateConfig {
            sampler,
            n_grid: self.n_grid.clone(),
            trials: self.trials,
            ref_multiplier: self.ref_multiplier,
            mode: self.mode,
            kmeans_constant: self.kmeans_constant,
            seed: self.seed,
        })
    }
}

/// Formats with 12 significant digits in plain decimal notation, the
/// contract for every distance and cost the binary prints.
pub fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:.11}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let precision = (11 - magnitude).max(0) as usize;
    format!("{v:.precision$}")
}

/// Serializable form of a solved transport instance for `--plan`.
#[derive(Serialize, Deserialize)]
pub struct PlanFile {
    pub p: f64,
    pub cost: f64,
    pub source_len: usize,
    pub target_len: usize,
    pub entries: Vec<PlanRow>,
}

#[derive(Serialize, Deserialize)]
pub struct PlanRow {
    pub row: usize,
    pub col: usize,
    pub mass: f64,
}

impl PlanFile {
    pub fn from_result(res: &OTResult<f64>) -> Self {
        PlanFile {
            p: res.p,
            cost: res.cost,
            source_len: res.plan.source_len(),
            target_len: res.plan.target_len(),
            entries: res
                .plan
                .entries()
                .iter()
                .map(|e| PlanRow {
                    row: e.row,
                    col: e.col,
                    mass: e.mass,
                })
                .collect(),
        }
    }
}

/// Maps library errors onto the documented exit codes: 2 for malformed
/// files, 3 for dimension mismatches, 4 for out-of-domain parameters, and 1
/// for internal solver faults.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Format(_) | Error::Io(_) | Error::Json(_) => 2,
        Error::DimensionMismatch { .. } => 3,
        Error::InvalidParameter(_)
        | Error::TooManyClusters { .. }
        | Error::InvalidWeights(_)
        | Error::EmptyInput(_) => 4,
        Error::SolverStalled(_) => 1,
    }
}

/// Renders a log-log scatter of per-n medians with the fitted line as a
/// standalone SVG document.
pub fn render_svg(result: &RateResult<f64>) -> String {
    let width = 640.0;
    let height = 440.0;
    let margin_l = 70.0;
    let margin_r = 20.0;
    let margin_t = 40.0;
    let margin_b = 60.0;

    let xs: Vec<f64> = result.medians.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = result
        .medians
        .iter()
        .map(|&(_, v)| v.max(f64::MIN_POSITIVE).ln())
        .collect();
    let (x_lo, x_hi) = span(&xs);
    let (y_lo, y_hi) = span(&ys);
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        let u = (x - x_lo) / (x_hi - x_lo);
        let v = (y - y_lo) / (y_hi - y_lo);
        (
            margin_l + u * (width - margin_l - margin_r),
            height - margin_b - v * (height - margin_t - margin_b),
        )
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{} / {} : slope {:.4} (band {:.4} .. {:.4})</text>\n",
        margin_l,
        result.sampler_name,
        result.mode.as_str(),
        result.fit.slope,
        result.band.0,
        result.band.1
    ));
    svg.push_str(&format!(
        "<rect x=\"{margin_l}\" y=\"{margin_t}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        width - margin_l - margin_r,
        height - margin_t - margin_b
    ));

    // Fitted line across the x range.
    let (px0, py0) = to_px(x_lo, result.fit.intercept + result.fit.slope * x_lo);
    let (px1, py1) = to_px(x_hi, result.fit.intercept + result.fit.slope * x_hi);
    svg.push_str(&format!(
        "<line x1=\"{px0:.2}\" y1=\"{py0:.2}\" x2=\"{px1:.2}\" y2=\"{py1:.2}\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n"
    ));

    for (&(n, v), (&x, &y)) in result.medians.iter().zip(xs.iter().zip(&ys)) {
        let (px, py) = to_px(x, y);
        svg.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"4\" fill=\"crimson\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">n={n} ({v:.3e})</text>\n",
            px + 7.0,
            py - 5.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\">log n</text>\n",
        width / 2.0 - 20.0,
        height - 20.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\">log median distance</text>\n",
        height / 2.0,
        height / 2.0
    ));
    svg.push_str("</svg>\n");
    svg
}

fn span(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(hi > lo) {
        // Degenerate span: pad so the projection stays finite.
        lo -= 0.5;
        hi += 0.5;
    }
    (lo, hi)
}
