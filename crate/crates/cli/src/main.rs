// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stepdist::error::Error;
use stepdist::geo;
use stepdist::pipeline::{compare_metrics, run_analysis, PipelineConfig};
use stepdist::synthetic::{export_suite, geo_fixture, regime_suite_specs, GEO_FIXTURE_SEED, SUITE_SEED};

#[derive(Parser)]
#[command(name = "stepdist", version, about = "Step-function distances between time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance, alignment, affinity and (with metadata) consistency matrices,
    /// dendrograms, cluster assignments and a summary.
    Run(Options),
    /// Hausdorff, modified Hausdorff and MJ change-point set metrics next to
    /// the L^p metric. Uses the built-in ten-series suite without --series.
    CompareMetrics(Options),
    /// Writes the ten-series synthetic suite with its manifest.
    GenerateSuite {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = SUITE_SEED)]
        seed: u64,
    },
    /// Writes the six-station synthetic geography fixture.
    GenerateFixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = GEO_FIXTURE_SEED)]
        seed: u64,
    },
}

#[derive(Args)]
struct Options {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long)]
    metadata: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `mean` or `variance`.
    #[arg(long)]
    attribute: Option<String>,
    /// Norm exponent, a number >= 1 or `inf`.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    significance: Option<String>,
    #[arg(long)]
    min_segment: Option<String>,
    #[arg(long)]
    permutations: Option<String>,
    /// `single`, `average` or `complete`.
    #[arg(long)]
    linkage: Option<String>,
    /// Number of clusters or `auto` for the eigengap choice.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl Options {
    fn config(&self) -> Result<PipelineConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        let paths = [("series", &self.series), ("metadata", &self.metadata), ("out", &self.out)];
        for (key, value) in paths {
            if let Some(v) = value {
                cfg.set(key, &v.to_string_lossy())?;
            }
        }
        let flags = [
            ("attribute", &self.attribute),
            ("p", &self.p),
            ("significance", &self.significance),
            ("min_segment", &self.min_segment),
            ("permutations", &self.permutations),
            ("linkage", &self.linkage),
            ("k", &self.k),
            ("seed", &self.seed),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(opts) => {
            let summary = run_analysis(&opts.config()?)?;
            for s in &summary.series {
                println!("magnitude\t{}\t{}", s.id, s.magnitude);
            }
            if let Some(n) = summary.consistency_norms {
                println!("consistency_norm\tunscaled\t{}", n.unscaled);
                println!("consistency_norm\tnormalized\t{}", n.normalized);
                println!("consistency_norm\talignment\t{}", n.alignment);
            }
        }
        Command::CompareMetrics(opts) => {
            let summary = compare_metrics(&opts.config()?)?;
            for (name, merges) in &summary.first_merges {
                let text: Vec<String> = merges.iter().map(|m| format!("{{{}}}", m.join(","))).collect();
                println!("first_merges\t{name}\t{}", text.join(" "));
            }
        }
        Command::GenerateSuite { out, seed } => export_suite(&out, &regime_suite_specs(seed), seed)?,
        Command::GenerateFixture { out, seed } => {
            let fx = geo_fixture(seed)?;
            export_suite(&out, &fx.specs, seed)?;
            let path = out.join("stations.csv");
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            geo::write_stations(&fx.stations, file)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
