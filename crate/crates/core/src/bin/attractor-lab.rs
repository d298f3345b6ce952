use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use attractor_lab::config::{DiffusionKind, RunConfig};
use attractor_lab::equilibria::{BranchLabel, Sign};
use attractor_lab::pipeline;
use attractor_lab::{LabError, Result};

#[derive(Parser)]
#[command(name = "attractor-lab", version, about = "Nonlocal Chafee-Infante laboratory")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Number of sine modes K.
    #[arg(long = "modes", short = 'K', global = true)]
    modes: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate equilibria (JSON array of records).
    Equilibria {
        /// Continue in tau over n + 1 uniform points instead.
        #[arg(long, value_name = "n")]
        tau_grid: Option<usize>,
        /// Use the counterexample diffusion with these delta and J.
        #[arg(long, num_args = 2, value_names = ["delta", "J"])]
        counterexample: Option<Vec<f64>>,
    },
    /// Linearized spectra.
    Spectrum {
        #[arg(long, conflicts_with = "branch")]
        all: bool,
        /// Branch index (0 for zero) and sign.
        #[arg(long, num_args = 2, value_names = ["j", "sign"])]
        branch: Option<Vec<String>>,
    },
    /// Connection search with trajectory CSVs.
    Connect {
        #[arg(long, num_args = 2, value_names = ["j", "sign"])]
        source: Option<Vec<String>>,
    },
    /// Connection graph against the connection matrix.
    MorseCheck,
    /// Connection graph of the model flow on the n-disk.
    Modelflow {
        #[arg(long)]
        n: usize,
    },
    /// Continuation from constant diffusion.
    ContinueTau {
        #[arg(long, default_value_t = pipeline::TAU_STEPS)]
        steps: usize,
    },
    /// Equilibria along a lambda grid (CSV).
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 2.0, 5.0, 10.0])]
        grid: Vec<f64>,
    },
    /// Every check, one JSON report.
    VerifyPaper,
    /// Counterexample scan over the (delta, J) grid, or at one point.
    Counterexample {
        #[arg(long, requires = "slope")]
        delta: Option<f64>,
        #[arg(long = "J", requires = "delta")]
        slope: Option<f64>,
    },
}

fn label(args: &[String]) -> Result<BranchLabel> {
    let j: usize = args[0].parse().map_err(|_| LabError::InvalidInput(format!("bad branch index {:?}", args[0])))?;
    if j == 0 {
        return Ok(BranchLabel::Zero);
    }
    let sign = match args[1].as_str() {
        "+" | "plus" => Sign::Plus,
        "-" | "minus" => Sign::Minus,
        s => return Err(LabError::InvalidInput(format!("sign must be + or -, got {s:?}"))),
    };
    Ok(BranchLabel::branch(j, sign))
}

fn load(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(l) = c.lambda {
        cfg.model.lambda = l;
    }
    if let Some(k) = c.modes {
        cfg.discretization.modes = k;
    }
    if let Some(s) = c.samples {
        cfg.search.samples = s;
    }
    if let Some(s) = c.seed {
        cfg.search.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output.dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let io = |e: std::io::Error| LabError::InvalidInput(format!("cannot write {}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(name), text).map_err(io)?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Runs one subcommand; `Ok(false)` is a criterion failure.
fn run(cli: Cli) -> Result<bool> {
    let mut cfg = load(&cli.common)?;
    let dir = cfg.output.dir.clone();
    match cli.command {
        Command::Equilibria { tau_grid: Some(n), counterexample: None } => {
            write(&dir, "tau_continuation.json", &json(&pipeline::continue_tau(&cfg, n)?))?;
        }
        Command::Equilibria { tau_grid: None, counterexample } => {
            if let Some(v) = counterexample {
                cfg.model.a = DiffusionKind::Counterexample;
                cfg.model.a_params.delta = Some(v[0]);
                cfg.model.a_params.slope = Some(v[1]);
            }
            let eqs = pipeline::equilibria(&cfg)?;
            for e in &eqs {
                println!("{:>8}  D = {:.10}  E = {:.10}  index {}", e.label.to_string(), e.d, e.energy, e.morse_index.unwrap_or(0));
            }
            write(&dir, "equilibria.json", &json(&eqs))?;
        }
        Command::Equilibria { .. } => {
            return Err(LabError::InvalidInput("--tau-grid and --counterexample are exclusive".into()));
        }
        Command::Spectrum { all: _, branch } => {
            let selection = branch.as_deref().map(label).transpose()?;
            write(&dir, "spectrum.json", &json(&pipeline::spectra(&cfg, selection)?))?;
        }
        Command::Connect { source } => {
            let source = source.as_deref().map(label).transpose()?;
            let out = pipeline::connect(&cfg, source)?;
            for s in &out.searches {
                let t: Vec<String> = s.targets.iter().map(|t| t.to_string()).collect();
                println!("{} -> {} ({} samples, {} unresolved)", s.source, t.join(", "), s.samples.len(), s.unresolved);
            }
            write(&dir, "connections.json", &json(&out))?;
            write(&dir, "graph.json", &json(&out.graph.to_json()))?;
            write(&dir, "graph.dot", &out.graph.to_dot())?;
            for (src, csv) in &out.trajectories {
                write(&dir, &format!("trajectory_{}.csv", file_label(*src)), csv)?;
            }
        }
        Command::MorseCheck => {
            let check = pipeline::morse_check(&cfg)?;
            write(&dir, "morse_check.json", &json(&check))?;
            write(&dir, "graph.json", &json(&check.graph.to_json()))?;
            write(&dir, "graph.dot", &check.graph.to_dot())?;
            println!("morse-check {}", if check.passed { "passed" } else { "FAILED" });
            return Ok(check.passed);
        }
        Command::Modelflow { n } => {
            let run = pipeline::modelflow(n, &cfg.modelflow())?;
            write(&dir, "modelflow.json", &json(&run))?;
            write(&dir, "modelflow_graph.json", &json(&run.graph.to_json()))?;
            write(&dir, "modelflow.dot", &run.graph.to_dot())?;
            return Ok(run.unresolved == 0);
        }
        Command::ContinueTau { steps } => {
            write(&dir, "tau_continuation.json", &json(&pipeline::continue_tau(&cfg, steps)?))?;
        }
        Command::Sweep { grid } => {
            write(&dir, "sweep.csv", &pipeline::sweep(&cfg, &grid)?.to_csv())?;
        }
        Command::VerifyPaper => {
            let report = pipeline::verify_paper(&cfg)?;
            print!("{}", report.summary());
            write(&dir, "report.json", &(report.to_json() + "\n"))?;
            return Ok(report.passed);
        }
        Command::Counterexample { delta, slope } => {
            let grid = match (delta, slope) {
                (Some(d), Some(j)) => vec![(d, j)],
                _ => pipeline::default_scan_grid(&cfg)?,
            };
            let scan = pipeline::counterexample(&cfg, &grid)?;
            for p in &scan.points {
                println!("delta {:.5} J {:.5}: {} positive equilibria, unstable counts {:?}", p.delta, p.slope, p.d.len(), p.positive_eigenvalues);
            }
            write(&dir, "counterexample.json", &json(&scan))?;
            return Ok(scan.passed);
        }
    }
    Ok(true)
}

fn file_label(l: BranchLabel) -> String {
    match l {
        BranchLabel::Zero => "zero".into(),
        BranchLabel::Branch { j, sign } => format!("phi_{j}_{}", if sign == Sign::Plus { "plus" } else { "minus" }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match pipeline::with_worker_cap(|| run(cli)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(e)) | Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
