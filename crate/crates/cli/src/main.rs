//! `sigmin`: command-line driver for the experiment suite. Every
//! subcommand loads the shared TOML config, runs one experiment, writes
//! CSV/JSON artifacts, and exits 0 on pass, 1 on a property violation,
//! and 2 on configuration or runtime errors.

use clap::{Parser, Subcommand};
use sigmin_core::config::Config;
use sigmin_core::harness::{
    distance_tail_experiment, invertibility_via_distance_check,
    normal_vector_structure_experiment, sigma_tail_experiment, NormalStructureOptions,
};
use sigmin_core::nets::{
    b_kappa, rounding_column_bound_check, unstructured_fraction_experiment,
    LatticeSpec, UnstructuredOptions, WeightVector,
};
use sigmin_core::report::{
    distance_csv, json_summary, line_plot_svg, rlcd_curve_csv, tail_csv, tail_plot_svg,
    unstructured_csv, write_text, Series,
};
use sigmin_core::rlcd::rlcd;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sigmin", version, about = "Singular-value and lattice-structure experiments")]
struct Cli {
    /// TOML config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV/JSON/SVG outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Also write SVG plots where the subcommand supports them.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tail of the smallest singular value over the epsilon grid.
    SigmaTail,
    /// Column-span distance tails for the configured columns.
    DistTail,
    /// Classify unit normals and their RLCD level sets.
    NormalStructure {
        /// Column whose span is removed.
        #[arg(long, default_value_t = 0)]
        column: usize,
        /// Fail (exit 1) when the structured fraction exceeds this.
        #[arg(long, default_value_t = 1.0)]
        max_structured: f64,
    },
    /// Deterministic distance containment on sampled matrices.
    InvdistCheck,
    /// Lattice-point experiments.
    #[command(subcommand)]
    Lattice(LatticeCommand),
    /// Weighted-net operations.
    #[command(subcommand)]
    Net(NetCommand),
    /// RLCD evaluation of a direction read from a file.
    #[command(subcommand)]
    Rlcd(RlcdCommand),
    /// Re-render stored reports.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Subcommand)]
enum LatticeCommand {
    /// Fraction of uniform lattice points with RLCD below threshold.
    Unstructured {
        /// Fail (exit 1) when the structured fraction exceeds this.
        #[arg(long, default_value_t = 0.01)]
        max_fraction: f64,
    },
}

#[derive(Subcommand)]
enum NetCommand {
    /// Water-filling minimization of the weighted column norms.
    Bkappa,
    /// Random rounding contract on one sampled matrix.
    Round,
}

#[derive(Subcommand)]
enum RlcdCommand {
    /// Print the RLCD of a direction vector.
    Eval {
        /// File of whitespace- or comma-separated coordinates.
        #[arg(long)]
        vector: PathBuf,
    },
    /// Write the full objective curve along the search grid.
    Curve {
        #[arg(long)]
        vector: PathBuf,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Plot a stored tail CSV as SVG next to it.
    Plot {
        /// CSV produced by sigma-tail or dist-tail.
        #[arg(long)]
        input: PathBuf,
    },
}

fn err(e: impl Display) -> String {
    e.to_string()
}

fn load_config(cli: &Cli) -> Result<Config, String> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path).map_err(err)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    Ok(config)
}

fn out_path(cli: &Cli, name: &str) -> Result<PathBuf, String> {
    std::fs::create_dir_all(&cli.out_dir).map_err(err)?;
    Ok(cli.out_dir.join(name))
}

fn save(cli: &Cli, name: &str, content: &str) -> Result<PathBuf, String> {
    let path = out_path(cli, name)?;
    write_text(&path, content).map_err(err)?;
    Ok(path)
}

fn read_vector(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("failed to read {}: {e}", path.display()))?;
    let values: Result<Vec<f64>, _> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(str::parse::<f64>)
        .collect();
    let values = values.map_err(|e| format!("bad coordinate in {}: {e}", path.display()))?;
    if values.is_empty() {
        return Err(format!("{} holds no coordinates", path.display()));
    }
    Ok(values)
}

/// Runs the selected experiment. `Ok(true)` means a property violation
/// (exit 1), `Err` a configuration or runtime failure (exit 2).
fn run(cli: &Cli) -> Result<bool, String> {
    let config = load_config(cli)?;
    let seed = config.seed();
    let curve = config.constants.curve();
    match &cli.command {
        Command::SigmaTail => {
            let ensemble = config.ensemble.build().map_err(err)?;
            let report = sigma_tail_experiment(
                &ensemble,
                &config.experiment.epsilon,
                config.experiment.trials,
                seed,
                curve,
            )
            .map_err(err)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            let csv = save(cli, "sigma_tail.csv", &tail_csv(&report))?;
            save(
                cli,
                "sigma_tail.json",
                &json_summary(&config, &report, &config.constants).map_err(err)?,
            )?;
            if cli.plot {
                save(cli, "sigma_tail.svg", &tail_plot_svg(&report).map_err(err)?)?;
            }
            let violated = report
                .p_hat
                .iter()
                .zip(&report.curve)
                .any(|(p, bound)| *p > bound.min(1.0));
            println!(
                "sigma-tail: {} trials of {} -> {}{}",
                report.trials,
                report.ensemble,
                csv.display(),
                if violated { " (tail above bound curve)" } else { "" }
            );
            Ok(violated)
        }
        Command::DistTail => {
            let ensemble = config.ensemble.build().map_err(err)?;
            let report = distance_tail_experiment(
                &ensemble,
                &config.experiment.columns,
                &config.experiment.epsilon,
                config.experiment.trials,
                seed,
                config.experiment.r,
                curve,
            )
            .map_err(err)?;
            for warning in &report.pooled.warnings {
                eprintln!("warning: {warning}");
            }
            let csv = save(cli, "dist_tail.csv", &distance_csv(&report))?;
            save(
                cli,
                "dist_tail.json",
                &json_summary(&config, &report, &config.constants).map_err(err)?,
            )?;
            if cli.plot {
                save(cli, "dist_tail.svg", &tail_plot_svg(&report.pooled).map_err(err)?)?;
            }
            let violated = report
                .pooled
                .p_hat
                .iter()
                .zip(&report.pooled.curve)
                .any(|(p, bound)| *p > bound.min(1.0));
            println!(
                "dist-tail: pooled over {} columns -> {}{}",
                report.per_column.len(),
                csv.display(),
                if violated { " (tail above bound curve)" } else { "" }
            );
            Ok(violated)
        }
        Command::NormalStructure { column, max_structured } => {
            let ensemble = config.ensemble.build().map_err(err)?;
            let params = config.sphere.build().map_err(err)?;
            let opts = NormalStructureOptions {
                mc_samples: config.rlcd.mc_samples,
                grid_points: config.rlcd.grid_points,
                ..NormalStructureOptions::default()
            };
            let report = normal_vector_structure_experiment(
                &ensemble,
                *column,
                config.rlcd.gamma,
                config.rlcd.u,
                config.experiment.trials,
                seed,
                &params,
                &opts,
            )
            .map_err(err)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            save(
                cli,
                "normal_structure.json",
                &json_summary(&config, &report, &config.constants).map_err(err)?,
            )?;
            let violated = report.structured_fraction > *max_structured;
            println!(
                "normal-structure: {} included, compressible {:.4}, censored {:.4}, structured {:.4}",
                report.included,
                report.compressible_fraction,
                report.censored_fraction,
                report.structured_fraction
            );
            Ok(violated)
        }
        Command::InvdistCheck => {
            let ensemble = config.ensemble.build().map_err(err)?;
            let params = config.sphere.build().map_err(err)?;
            let mut applicable = 0usize;
            let mut failures = 0usize;
            for trial in 0..config.experiment.trials {
                let a = ensemble.sample_matrix(seed.with_stream(trial as u64));
                let check = invertibility_via_distance_check(&a, &params).map_err(err)?;
                if check.applicable {
                    applicable += 1;
                    if !check.holds {
                        failures += 1;
                    }
                }
            }
            let results = serde_json::json!({
                "trials": config.experiment.trials,
                "applicable": applicable,
                "failures": failures,
            });
            save(
                cli,
                "invdist.json",
                &json_summary(&config, &results, &config.constants).map_err(err)?,
            )?;
            println!(
                "invdist-check: {applicable} applicable of {} trials, {failures} failures",
                config.experiment.trials
            );
            Ok(failures > 0)
        }
        Command::Lattice(LatticeCommand::Unstructured { max_fraction }) => {
            let ensemble = config.ensemble.build().map_err(err)?;
            let law = ensemble
                .iid_law()
                .ok_or("lattice unstructured needs an iid ensemble")?
                .clone();
            let n = ensemble.cols();
            let spec = LatticeSpec::uniform(config.experiment.lambda, n).map_err(err)?;
            let params = config.sphere.build().map_err(err)?;
            let opts = UnstructuredOptions {
                grid_points: config.rlcd.grid_points,
                grid_span: config.rlcd.grid_span,
                mc_samples: config.rlcd.mc_samples,
                ..UnstructuredOptions::default()
            };
            let report = unstructured_fraction_experiment(
                &spec,
                &params,
                &vec![law; n],
                config.rlcd.gamma,
                config.rlcd.u,
                config.experiment.samples,
                seed,
                &opts,
            )
            .map_err(err)?;
            let csv = save(cli, "unstructured.csv", &unstructured_csv(&report))?;
            save(
                cli,
                "unstructured.json",
                &json_summary(&config, &report, &config.constants).map_err(err)?,
            )?;
            let violated = report.fraction > *max_fraction;
            println!(
                "lattice unstructured: fraction {:.5} (threshold RLCD < {:.1}) -> {}{}",
                report.fraction,
                report.threshold,
                csv.display(),
                if violated { " (above allowed fraction)" } else { "" }
            );
            Ok(violated)
        }
        Command::Net(NetCommand::Bkappa) => {
            let ensemble = config.ensemble.build().map_err(err)?;
            let a = ensemble.sample_matrix(seed);
            let solution = b_kappa(&a, config.experiment.kappa).map_err(err)?;
            save(
                cli,
                "bkappa.json",
                &json_summary(&config, &solution, &config.constants).map_err(err)?,
            )?;
            let violated =
                solution.kkt_residual > 1e-6 || solution.constraint_residual > 1e-6;
            println!(
                "net bkappa: value {:.6}, kkt residual {:.2e}, constraint residual {:.2e}",
                solution.value, solution.kkt_residual, solution.constraint_residual
            );
            Ok(violated)
        }
        Command::Net(NetCommand::Round) => {
            let ensemble = config.ensemble.build().map_err(err)?;
            let a = ensemble.sample_matrix(seed);
            let n = a.ncols();
            // Deterministic generic unit direction.
            let mut x: Vec<f64> = (0..n).map(|j| 1.0 + (j as f64 + 1.0).sqrt()).collect();
            let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            x.iter_mut().for_each(|t| *t /= norm);
            let alpha =
                WeightVector::new(vec![1.0; n], config.experiment.kappa).map_err(err)?;
            let check = rounding_column_bound_check(
                &a,
                &x,
                &alpha,
                config.experiment.round_epsilon,
                config.experiment.trials,
                seed.with_stream(1),
            )
            .map_err(err)?;
            save(
                cli,
                "round.json",
                &json_summary(&config, &check, &config.constants).map_err(err)?,
            )?;
            println!(
                "net round: mean image error {:.6e} vs bound {:.6e} over {} draws",
                check.mean_sq, check.bound, check.trials
            );
            Ok(!check.holds)
        }
        Command::Rlcd(command) => {
            let (vector, keep_curve) = match command {
                RlcdCommand::Eval { vector } => (vector, false),
                RlcdCommand::Curve { vector } => (vector, true),
            };
            let v = read_vector(vector)?;
            let ensemble = config.ensemble.build().map_err(err)?;
            let law = ensemble
                .iid_law()
                .ok_or("rlcd evaluation needs an iid ensemble law")?
                .clone();
            let laws = vec![law; v.len()];
            let mut q = config.rlcd.query(v.len(), seed.with_stream(1)).map_err(err)?;
            if keep_curve {
                q = q.with_curve();
            }
            let value = rlcd(&laws, &v, &q).map_err(err)?;
            save(
                cli,
                "rlcd.json",
                &json_summary(&config, &value, &config.constants).map_err(err)?,
            )?;
            match value.outcome {
                sigmin_core::rlcd::RlcdOutcome::Finite(t) => {
                    println!("rlcd: {t:.9}");
                }
                sigmin_core::rlcd::RlcdOutcome::Censored(cap) => {
                    println!("rlcd: censored at theta_max {cap:.3}");
                }
            }
            if keep_curve {
                let csv = save(cli, "rlcd_curve.csv", &rlcd_curve_csv(&value))?;
                if cli.plot {
                    let objective: Vec<(f64, f64)> =
                        value.curve.iter().map(|p| (p.theta, p.objective)).collect();
                    let threshold: Vec<(f64, f64)> =
                        value.curve.iter().map(|p| (p.theta, p.threshold)).collect();
                    save(
                        cli,
                        "rlcd_curve.svg",
                        &line_plot_svg(
                            "rlcd search curve",
                            "theta",
                            "objective",
                            &[
                                Series::new("objective", objective),
                                Series::new("threshold", threshold),
                            ],
                        )
                        .map_err(err)?,
                    )?;
                }
                println!("curve -> {}", csv.display());
            }
            Ok(false)
        }
        Command::Report(ReportCommand::Plot { input }) => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| format!("failed to read {}: {e}", input.display()))?;
            let mut lines = text.lines();
            let header: Vec<&str> =
                lines.next().ok_or("empty csv")?.split(',').collect();
            let need = |name: &str| {
                header
                    .iter()
                    .position(|h| *h == name)
                    .ok_or_else(|| format!("column {name} missing from {}", input.display()))
            };
            let (xe, pe, ce) = (need("epsilon")?, need("p_hat")?, need("curve")?);
            let mut empirical = Vec::new();
            let mut bound = Vec::new();
            for line in lines {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() <= xe.max(pe).max(ce) {
                    continue;
                }
                let parse = |s: &str| s.parse::<f64>().map_err(err);
                let x = parse(fields[xe])?;
                empirical.push((x, parse(fields[pe])?));
                bound.push((x, parse(fields[ce])?));
            }
            let svg = line_plot_svg(
                "stored tail report",
                "epsilon",
                "P",
                &[Series::new("empirical", empirical), Series::new("bound curve", bound)],
            )
            .map_err(err)?;
            let out = input.with_extension("svg");
            write_text(&out, &svg).map_err(err)?;
            println!("report plot: {}", out.display());
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::from(0),
        Ok(true) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
