//! `wassquant`: exact transport distances, codebook fitting, and rate
//! experiments from the command line.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wassquant::error::Result;
use wassquant::io::{read_measure, write_codebook, write_measure};
use wassquant::quantization::{lloyd, LloydConfig};
use wassquant::rates::run_rate_experiment;
use wassquant::transport::wasserstein;
use wassquant_cli::{exit_code, render_svg, sig12, ExperimentConfig, PlanFile};

#[derive(Parser)]
#[command(name = "wassquant", version, about = "Exact Wasserstein distances and quantization experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact p-Wasserstein distance between two measure files.
    Ot {
        /// Source measure (JSON).
        mu: PathBuf,
        /// Target measure (JSON).
        nu: PathBuf,
        /// Order of the distance.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Also write the optimal coupling to this path (JSON).
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Fit a k-point codebook to a sample file; write the codebook and the
    /// induced measure, print the mean squared distance.
    Quantize {
        /// Sample measure file (JSON); weights are ignored, points are the
        /// sample.
        sample: PathBuf,
        /// Number of centers.
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent k-means++ restarts.
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the rate experiment described by a config file; write trial CSV
    /// and summary JSON.
    Rates {
        /// Experiment config (JSON, schema `v1`).
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also render a log-log plot of the per-n medians.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

/// `WASSQUANT_THREADS` caps worker parallelism; 0 or unset means automatic.
fn configure_threads() {
    if let Ok(text) = std::env::var("WASSQUANT_THREADS") {
        if let Ok(n) = text.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Ot { mu, nu, p, plan } => {
            let mu = read_measure(&mu)?;
            let nu = read_measure(&nu)?;
            let res = wasserstein(&mu, &nu, p)?;
            if let Some(path) = plan {
                let file = PlanFile::from_result(&res);
                fs::write(&path, serde_json::to_string_pretty(&file)?)?;
            }
            println!("{}", sig12(res.cost));
            Ok(())
        }
        Cmd::Quantize {
            sample,
            k,
            seed,
            restarts,
            out_dir,
        } => {
            let points = read_measure(&sample)?.support().to_vec();
            let cfg = LloydConfig::new(k, seed).with_restarts(restarts);
            let q = lloyd(&points, &cfg)?;
            let induced = wassquant::DiscreteMeasure::empirical(&points)?
                .push_forward(&q.codebook)?;
            fs::create_dir_all(&out_dir)?;
            write_codebook(&out_dir.join("codebook.json"), &q.codebook)?;
            write_measure(&out_dir.join("induced_measure.json"), &induced)?;
            println!("{}", sig12(q.empirical_cost));
            Ok(())
        }
        Cmd::Rates {
            config,
            out_dir,
            svg,
        } => {
            let text = fs::read_to_string(&config)?;
            let cfg = ExperimentConfig::parse(&text)?.to_rate_config()?;
            let result = run_rate_experiment(&cfg)?;
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join("rates.csv"), result.csv())?;
            fs::write(
                out_dir.join("summary.json"),
                serde_json::to_string_pretty(&result.summary())?,
            )?;
            if let Some(path) = svg {
                fs::write(&path, render_svg(&result))?;
            }
            let summary = result.summary();
            println!(
                "slope {} stderr {} band [{}, {}] in_band {}",
                summary.slope, summary.stderr, summary.band_low, summary.band_high, summary.in_band
            );
            Ok(())
        }
    }
}
