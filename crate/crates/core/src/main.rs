use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use planar_emd::bench::{
    calibrate_with, run_distortion_experiment, run_nn_experiment, run_scaling_sweep,
    write_sweep_csv, ExperimentConfig, NnConfig,
};
use planar_emd::embedding::{embed_with, grid_to_torus_probability, Variant};
use planar_emd::measures::{read_measure, MeasureFormat, MeasureKind, ProbabilityMeasure, Topology};
use planar_emd::transport::{emd, GroundMetric};
use planar_emd::{Error, Result};

#[derive(Parser)]
#[command(name = "planar-emd", version, about = "Exact planar Earthmover distance and its L1 embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact transportation cost between two probability measures.
    Emd {
        a: PathBuf,
        b: PathBuf,
        /// Override the topology declared in the files.
        #[arg(long)]
        metric: Option<Topology>,
        /// Write the optimal coupling to this file.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Force the input layout instead of inferring it.
        #[arg(long)]
        format: Option<MeasureFormat>,
    },
    /// Embed a probability measure; grid inputs are first placed in the 2n torus.
    Embed {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "ab")]
        variant: Variant,
        #[arg(long)]
        format: Option<MeasureFormat>,
    },
    /// Distortion of the embedding over seeded random pairs.
    Distortion {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        pairs: usize,
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distortion reports for several side lengths, as CSV.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 300)]
        pairs: usize,
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nearest-neighbour recall of the embedding against exact transport.
    Nn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dataset: usize,
        #[arg(long)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "ab")]
        variant: Variant,
        #[arg(long, default_value = "torus")]
        metric: Topology,
        #[arg(long)]
        mix: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scale constant κ = max τ / embedded distance over a seeded sample.
    Calibrate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "ab")]
        variant: Variant,
        #[arg(long, default_value = "torus")]
        metric: Topology,
        #[arg(long)]
        mix: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "ab")]
    variant: Variant,
    #[arg(long, default_value = "torus")]
    metric: Topology,
    /// Generator weights, e.g. `dirac=0.4,sparse:8=0.4,dense=0.2`.
    #[arg(long)]
    mix: Option<String>,
    #[arg(long, default_value_t = 200)]
    calibration_samples: usize,
    /// Report measured wall time instead of 0.
    #[arg(long)]
    record_timing: bool,
}

impl ExperimentArgs {
    fn config(&self, n: usize, pairs: usize) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(n, pairs, self.seed);
        cfg.variant = self.variant;
        cfg.topology = self.metric;
        cfg.calibration_samples = self.calibration_samples;
        cfg.record_timing = self.record_timing;
        if let Some(mix) = &self.mix {
            cfg.mix = parse_mix(mix)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_mix(spec: &str) -> Result<Vec<(MeasureKind, f64)>> {
    spec.split(',')
        .map(|item| {
            let (kind, weight) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("mix entry `{item}` lacks `=weight`")))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad weight in `{item}`")))?;
            let kind = match kind.trim() {
                "dirac" => MeasureKind::DiracPair,
                "dense" => MeasureKind::DenseDirichlet,
                other => match other.strip_prefix("sparse:").map(str::parse) {
                    Some(Ok(k)) => MeasureKind::SparseK(k),
                    _ => return Err(Error::Config(format!("unknown generator `{other}`"))),
                },
            };
            Ok((kind, weight))
        })
        .collect()
}

fn load_probability(path: &Path, format: Option<MeasureFormat>) -> Result<ProbabilityMeasure> {
    let text = fs::read_to_string(path)?;
    ProbabilityMeasure::new(read_measure(&text, format)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("cannot serialise report: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct CalibrationReport {
    n: usize,
    variant: Variant,
    topology: Topology,
    samples: usize,
    seed: u64,
    kappa: f64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Emd {
            a,
            b,
            metric,
            plan,
            format,
        } => {
            let mut mu = load_probability(&a, format)?;
            let mut nu = load_probability(&b, format)?;
            if let Some(t) = metric {
                mu = ProbabilityMeasure::new(mu.as_signed().with_topology(t))?;
                nu = ProbabilityMeasure::new(nu.as_signed().with_topology(t))?;
            }
            let result = emd(&mu, &nu, &GroundMetric::new(mu.domain()))?;
            if let Some(path) = plan {
                let mut buf = Vec::new();
                result.write_text(&mut buf)?;
                fs::write(path, buf)?;
            }
            println!("{}", result.cost);
        }
        Command::Embed {
            file,
            out,
            variant,
            format,
        } => {
            let mut mu = load_probability(&file, format)?;
            if mu.domain().topology() == Topology::Grid {
                mu = grid_to_torus_probability(&mu)?;
            }
            let mut buf = Vec::new();
            embed_with(&mu, variant)?.write_text(&mut buf)?;
            fs::write(out, buf)?;
        }
        Command::Distortion {
            n,
            pairs,
            common,
            out,
        } => {
            let report = run_distortion_experiment(&common.config(n, pairs)?)?;
            emit(out.as_deref(), &json(&report)?)?;
        }
        Command::Sweep {
            ns,
            pairs,
            common,
            out,
        } => {
            let first = *ns.first().ok_or_else(|| Error::Config("empty --ns".into()))?;
            let reports = run_scaling_sweep(&ns, &common.config(first, pairs)?)?;
            let mut buf = Vec::new();
            write_sweep_csv(&reports, &mut buf)?;
            emit(out.as_deref(), &String::from_utf8_lossy(&buf))?;
        }
        Command::Nn {
            n,
            dataset,
            queries,
            seed,
            variant,
            metric,
            mix,
            out,
        } => {
            let mut cfg = NnConfig::new(n, dataset, queries, seed);
            cfg.variant = variant;
            cfg.topology = metric;
            if let Some(mix) = mix {
                cfg.mix = parse_mix(&mix)?;
            }
            emit(out.as_deref(), &json(&run_nn_experiment(&cfg)?)?)?;
        }
        Command::Calibrate {
            n,
            samples,
            seed,
            variant,
            metric,
            mix,
            out,
        } => {
            let mut cfg = ExperimentConfig::new(n, 1, seed);
            cfg.calibration_samples = samples;
            cfg.variant = variant;
            cfg.topology = metric;
            if let Some(mix) = mix {
                cfg.mix = parse_mix(&mix)?;
            }
            let kappa = calibrate_with(&cfg)?;
            match out {
                Some(path) => {
                    let report = CalibrationReport {
                        n,
                        variant,
                        topology: metric,
                        samples,
                        seed,
                        kappa,
                    };
                    fs::write(path, json(&report)?)?;
                }
                None => println!("{kappa}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 3 } else { 2 })
        }
    }
}
