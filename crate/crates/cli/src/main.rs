//! `gmmfit`: sampling, density estimation, fitting, evaluation and system
//! export. Every written artifact gets a `<path>.manifest.json` next to it.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use gmmfit::density::{estimate_density, parse_samples, DensityEstimate};
use gmmfit::fit::{encode_system, DEFAULT_T_CAP};
use gmmfit::learner::{enumerate_allocations, learn_family, learn_well_behaved, Allocation, GeneralContext, LearnConfig};
use gmmfit::mixture::{ak_distance, l1_distance, Contamination, Family, MixtureParams};
use gmmfit::LearnError;

const THREADS_ENV: &str = "GMMFIT_THREADS";

#[derive(Parser)]
#[command(name = "gmmfit", version, about = "Proper agnostic learning of univariate mixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Metric {
    L1,
    Ak,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples from a mixture, optionally with uniform contamination.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fraction of draws taken from the contaminant, in [0, 1).
        #[arg(long, default_value_t = 0.0)]
        contaminate: f64,
        /// Contaminant interval; defaults to the model's window.
        #[arg(long, allow_hyphen_values = true)]
        contaminant_lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        contaminant_hi: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn a k-mixture from samples.
    Fit {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "gaussian")]
        family: String,
        /// Precision bound for the well-behaved algorithm.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, requires = "gamma")]
        well_behaved: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Piecewise-polynomial density estimate of samples.
    EstimateDensity {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distance between two mixtures.
    Eval {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        /// Number of intervals for the A_K metric; defaults to 4·max(k_a, k_b).
        #[arg(long = "K")]
        big_k: Option<usize>,
        /// Optional JSON record of the result.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the polynomial system for fitting a density.
    ExportSystem {
        #[arg(long)]
        density: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        nu: f64,
        /// Components per density piece, comma separated; defaults to the
        /// first allocation (all components on the first piece).
        #[arg(long, value_delimiter = ',')]
        allocation: Option<Vec<usize>>,
        #[arg(long, default_value_t = DEFAULT_T_CAP)]
        t_cap: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn invalid(msg: impl fmt::Display) -> Self {
        Self {
            code: 2,
            msg: msg.to_string(),
        }
    }
}

impl From<LearnError> for Failure {
    fn from(e: LearnError) -> Self {
        let code = if matches!(e, LearnError::Infeasible) { 1 } else { 2 };
        Self {
            code,
            msg: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    args: Vec<String>,
    inputs: Vec<&'a Path>,
    outputs: Vec<&'a Path>,
    seed: Option<u64>,
    config: serde_json::Value,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifests(m: &RunManifest) -> Result<(), Failure> {
    let text = to_json(m);
    for out in &m.outputs {
        write(&manifest_path(out), &text)?;
    }
    Ok(())
}

fn read_samples(path: &Path) -> Result<Vec<f64>, Failure> {
    parse_samples(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn samples_csv(xs: &[f64]) -> String {
    let mut s = String::with_capacity(xs.len() * 20);
    for x in xs {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    s
}

fn run(cli: Cli, args: Vec<String>) -> Result<(), Failure> {
    match cli.command {
        Command::Sample {
            model,
            n,
            seed,
            contaminate,
            contaminant_lo,
            contaminant_hi,
            out,
        } => {
            let m: MixtureParams = read_json(&model)?;
            let w = m.window();
            let c = Contamination::new(contaminate, contaminant_lo.unwrap_or(w.lo), contaminant_hi.unwrap_or(w.hi))
                .map_err(Failure::invalid)?;
            write(&out, &samples_csv(&c.sample(&m, n, seed)))?;
            write_manifests(&RunManifest {
                tool: "gmmfit",
                version: env!("CARGO_PKG_VERSION"),
                subcommand: "sample",
                args,
                inputs: vec![&model],
                outputs: vec![&out],
                seed: Some(seed),
                config: json!({ "n": n, "contamination": c }),
            })
        }
        Command::Fit {
            samples,
            k,
            eps,
            family,
            gamma,
            well_behaved,
            out,
            report,
            seed,
        } => {
            let family: Family = family.parse().map_err(Failure::invalid)?;
            let xs = read_samples(&samples)?;
            let mut cfg = LearnConfig::new(k, eps)?.with_seed(seed);
            if let Some(g) = gamma {
                cfg = cfg.with_gamma(g);
            }
            let rep = if well_behaved {
                if family != Family::Gaussian {
                    return Err(Failure::invalid("the well-behaved algorithm is Gaussian only"));
                }
                learn_well_behaved(&xs, &cfg)?
            } else {
                learn_family(&xs, &cfg, family)?
            };
            write(&out, &to_json(&rep.model))?;
            write(&report, &to_json(&rep))?;
            write_manifests(&RunManifest {
                tool: "gmmfit",
                version: env!("CARGO_PKG_VERSION"),
                subcommand: "fit",
                args,
                inputs: vec![&samples],
                outputs: vec![&out, &report],
                seed: Some(seed),
                config: json!({ "family": family, "well_behaved": well_behaved, "learn": cfg }),
            })
        }
        Command::EstimateDensity { samples, k, eps, out } => {
            let xs = read_samples(&samples)?;
            let est = estimate_density(&xs, k, eps).map_err(|e| Failure::from(LearnError::from(e)))?;
            write(&out, &to_json(&est))?;
            write_manifests(&RunManifest {
                tool: "gmmfit",
                version: env!("CARGO_PKG_VERSION"),
                subcommand: "estimate-density",
                args,
                inputs: vec![&samples],
                outputs: vec![&out],
                seed: None,
                config: json!({ "k": k, "eps": eps }),
            })
        }
        Command::Eval {
            a,
            b,
            metric,
            big_k,
            out,
        } => {
            let ma: MixtureParams = read_json(&a)?;
            let mb: MixtureParams = read_json(&b)?;
            let intervals = big_k.unwrap_or(4 * ma.k().max(mb.k()));
            if intervals == 0 {
                return Err(Failure::invalid("K must be at least 1"));
            }
            let value = match metric {
                Metric::L1 => l1_distance(&ma, &mb),
                Metric::Ak => ak_distance(&ma, &mb, intervals),
            };
            println!("{value}");
            if let Some(out) = out {
                let k_field = matches!(metric, Metric::Ak).then_some(intervals);
                write(&out, &to_json(&json!({ "metric": metric, "K": k_field, "value": value })))?;
                write_manifests(&RunManifest {
                    tool: "gmmfit",
                    version: env!("CARGO_PKG_VERSION"),
                    subcommand: "eval",
                    args,
                    inputs: vec![&a, &b],
                    outputs: vec![&out],
                    seed: None,
                    config: json!({ "metric": metric, "K": k_field }),
                })?;
            }
            Ok(())
        }
        Command::ExportSystem {
            density,
            k,
            eps,
            nu,
            allocation,
            t_cap,
            out,
        } => {
            let est: DensityEstimate = read_json(&density)?;
            let unit = est.rescale_to_unit().map_err(|e| Failure::from(LearnError::from(e)))?;
            let cfg = LearnConfig::new(k, eps)?;
            let ctx = GeneralContext::new(unit, Family::Gaussian, cfg)?;
            let v = match allocation {
                Some(counts) => {
                    if counts.len() != ctx.s() {
                        return Err(Failure::invalid(format!(
                            "allocation has {} entries, density has {} pieces",
                            counts.len(),
                            ctx.s()
                        )));
                    }
                    Allocation::new(counts, k)?
                }
                None => enumerate_allocations(k, ctx.s()).swap_remove(0),
            };
            let problem = ctx.problem(&v)?;
            let sys = encode_system(&problem, nu, t_cap).map_err(|e| Failure::from(LearnError::from(e)))?;
            if sys.clauses.is_none() {
                eprintln!(
                    "t = {} exceeds the cap {t_cap}; writing counts and schema only ({:e} clauses)",
                    sys.counts.t, sys.counts.clauses
                );
            }
            write(&out, &sys.export())?;
            write_manifests(&RunManifest {
                tool: "gmmfit",
                version: env!("CARGO_PKG_VERSION"),
                subcommand: "export-system",
                args,
                inputs: vec![&density],
                outputs: vec![&out],
                seed: None,
                config: json!({ "k": k, "eps": eps, "nu": nu, "allocation": v, "t_cap": t_cap }),
            })
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::invalid(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(Failure::invalid)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_threads().and_then(|()| run(cli, args.into_iter().skip(1).collect())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
