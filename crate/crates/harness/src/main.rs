use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use picnet::netbuilder::CompiledNet;
use picnet::transformer::{transformerify, TransformerNet};
use picnet::w1net::{build_w1_contextual, build_w1_uniform};
use picnet_harness::config::ExperimentConfig;
use picnet_harness::experiment::{run_experiment, write_csv};
use picnet_harness::plot::{read_error_curve, render_svg};
use picnet_harness::verify::{verify_equal, verify_w1};
use picnet_harness::{budget_from_env, HarnessError, Result};

#[derive(Parser)]
#[command(
    name = "picnet",
    version,
    about = "Compile and check in-context networks"
)]
struct Cli {
    /// Seed for verification sweeps (experiments use the seed in their config).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an exact W1 network for contexts with weights in Δ_{C,N}.
    #[command(name = "compile-w1")]
    CompileW1 {
        #[arg(long = "C")]
        c: u32,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Build the uniform-weight network (requires C = N).
        #[arg(long)]
        uniform: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a compiled W1 network with the assignment oracle.
    #[command(name = "verify-w1")]
    VerifyW1 {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, default_value_t = 500)]
        trials: usize,
    },
    /// Run an experiment and write its CSV report.
    Approx {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write run metadata and timings as JSON.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Convert a network into a transformer.
    Transformerify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tokens: usize,
    },
    /// Compare a transformer with the network it came from.
    #[command(name = "verify-equal")]
    VerifyEqual {
        #[arg(long)]
        mlp: PathBuf,
        #[arg(long)]
        tf: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Plot error against delta from a CSV report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        plot: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    Ok(fs::write(path, contents)?)
}

fn run(cli: Cli) -> Result<String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let budget = budget_from_env()?;
    match cli.command {
        Command::CompileW1 {
            c,
            n,
            d,
            uniform,
            out,
        } => {
            let net = if uniform {
                if c as usize != n {
                    return Err(HarnessError::Config(format!(
                        "--uniform needs C = N, got C={c} N={n}"
                    )));
                }
                build_w1_uniform(n, d, &budget)?
            } else {
                build_w1_contextual(c, n, d, &budget)?
            };
            write(&out, serde_json::to_string(&net)?)?;
            let m = net.meta();
            Ok(format!("depth={} width={} nnz={}", m.depth, m.width, m.nnz))
        }
        Command::VerifyW1 { net, trials } => {
            let net: CompiledNet = serde_json::from_str(&read(&net)?)?;
            let s = verify_w1(&net, trials, cli.seed)?;
            Ok(format!("ok trials={} max_err={:e}", s.trials, s.max_err))
        }
        Command::Approx { config, out, meta } => {
            let config = ExperimentConfig::from_json(&read(&config)?)?;
            let report = run_experiment(&config, &budget)?;
            write_csv(&report.rows, fs::File::create(&out)?)?;
            if let Some(path) = meta {
                write(&path, serde_json::to_string_pretty(&report.meta)?)?;
            }
            Ok(format!("rows={}", report.rows.len()))
        }
        Command::Transformerify { input, out, tokens } => {
            let net: CompiledNet = serde_json::from_str(&read(&input)?)?;
            let tf = transformerify(&net, tokens)?;
            write(&out, serde_json::to_string(&tf)?)?;
            let m = tf.meta();
            Ok(format!(
                "blocks={} heads={} nnz={}",
                tf.blocks().len(),
                m.max_heads,
                m.nnz
            ))
        }
        Command::VerifyEqual { mlp, tf, trials } => {
            let mlp: CompiledNet = serde_json::from_str(&read(&mlp)?)?;
            let tf: TransformerNet = serde_json::from_str(&read(&tf)?)?;
            let s = verify_equal(&mlp, &tf, trials, cli.seed)?;
            Ok(format!("ok trials={} max_err={:e}", s.trials, s.max_err))
        }
        Command::Report { input, plot } => {
            let points = read_error_curve(fs::File::open(&input).map_err(|e| {
                HarnessError::Config(format!("cannot read {}: {e}", input.display()))
            })?)?;
            write(&plot, render_svg(&points))?;
            Ok(format!("points={}", points.len()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            eprintln!("error=config {}", first.lines().next().unwrap_or(""));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = if e.exit_code() == 1 {
                "verification"
            } else {
                "config"
            };
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error={kind} {msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
