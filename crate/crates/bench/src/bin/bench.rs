use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use feigh_bench::grid::{sibling_path, write_failures, write_summary};
use feigh_bench::{
    demo_learner, fit_scaling, median_ratio_at_largest_m, parse_m_grid, read_records, run_grid,
    summarize, write_records, Algorithm, BenchConfig, DemoConfig, RankSpec,
};

#[derive(Parser)]
#[command(name = "bench", about = "Timing and demo harness for feigh")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time the decompositions over a grid of row counts.
    Run {
        /// START:END:xFACTOR or a comma-separated list.
        #[arg(long, default_value = "1024:262144:x2")]
        m_grid: String,
        /// Basis rank: a count or `m/3`.
        #[arg(long, default_value = "1")]
        n: RankSpec,
        #[arg(long, default_value = "1")]
        nx: RankSpec,
        #[arg(long, default_value = "1")]
        ny: RankSpec,
        #[arg(long, default_value_t = 11)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated subset of feigh, svd, dense.
        #[arg(long, default_value = "feigh,svd")]
        algorithms: String,
        /// Largest m for which dense cells are run.
        #[arg(long, default_value_t = 512)]
        dense_max_m: usize,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
    },
    /// Fit log-log slopes to a results CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run the metric learner on a synthetic two-cluster stream.
    DemoLearner {
        #[arg(long, default_value_t = 128)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        rank_cap: usize,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        decay: f64,
        #[arg(long, default_value_t = 0.05)]
        gain: f64,
        #[arg(long, default_value_t = 4)]
        batch_per_class: usize,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            m_grid,
            n,
            nx,
            ny,
            repeats,
            seed,
            algorithms,
            dense_max_m,
            out,
        } => {
            let cfg = BenchConfig {
                m_grid: parse_m_grid(&m_grid)?,
                n,
                nx,
                ny,
                repeats,
                seed,
                algorithms: algorithms
                    .split(',')
                    .map(str::parse::<Algorithm>)
                    .collect::<anyhow::Result<_>>()?,
                dense_max_m,
            };
            let res = run_grid(&cfg)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_records(BufWriter::new(file), &res.records)?;

            let summary = summarize(&res.records);
            let summary_path = sibling_path(&out, "summary");
            write_summary(BufWriter::new(File::create(&summary_path)?), &summary)?;
            for s in &summary {
                println!(
                    "{:>6} m={:<8} median={:.3e}s  [{:.3e}, {:.3e}]  normalized={:.3e}",
                    s.algorithm, s.m, s.median, s.q10, s.q90, s.normalized_median
                );
            }
            if !res.failures.is_empty() {
                let path = sibling_path(&out, "errors");
                write_failures(BufWriter::new(File::create(&path)?), &res.failures)?;
                eprintln!(
                    "{} cells failed; see {}",
                    res.failures.len(),
                    path.display()
                );
            }
            println!(
                "wrote {} records to {} and summary to {}",
                res.records.len(),
                out.display(),
                summary_path.display()
            );
        }
        Command::Fit { input } => {
            let file =
                File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let records = read_records(file)?;
            let mut algorithms: Vec<&str> = records.iter().map(|r| r.algorithm.as_str()).collect();
            algorithms.sort();
            algorithms.dedup();
            let mut fitted = 0;
            for alg in algorithms {
                let subset: Vec<_> = records
                    .iter()
                    .filter(|r| r.algorithm == alg)
                    .cloned()
                    .collect();
                match fit_scaling(&subset) {
                    Ok(fits) => {
                        for f in fits {
                            fitted += 1;
                            println!(
                                "{:>6} slope={:.3} normalized last/first={:.3} over m={:?}",
                                f.algorithm, f.slope, f.normalized_ratio, f.fitted_m
                            );
                        }
                    }
                    Err(e) => eprintln!("{alg:>6} not fitted: {e}"),
                }
            }
            if fitted == 0 {
                anyhow::bail!("no algorithm had enough grid points to fit");
            }
            if let Some((m, r)) = median_ratio_at_largest_m(&records, "feigh", "svd") {
                println!("feigh/svd median time ratio at m={m}: {r:.3}");
            }
        }
        Command::DemoLearner {
            m,
            rank_cap,
            iters,
            seed,
            decay,
            gain,
            batch_per_class,
            out,
        } => {
            let cfg = DemoConfig {
                m,
                rank_cap,
                iters,
                seed,
                decay,
                gain,
                batch_per_class,
                ..DemoConfig::default()
            };
            let report = demo_learner(&cfg)?;
            println!(
                "initial: regular {:.4}  irregular {:.4}",
                report.initial.mean_distance_regular, report.initial.mean_distance_irregular
            );
            for it in &report.iterations {
                println!(
                    "iter {:>3}: regular {:.4}  irregular {:.4}  alpha {:.4e}  floored {}",
                    it.iteration,
                    it.model.mean_distance_regular,
                    it.model.mean_distance_irregular,
                    it.model.alpha,
                    it.floored
                );
            }
            if let Some(acc) = report.accuracy {
                println!(
                    "accuracy {:.3} at threshold {:.4}",
                    acc,
                    report.threshold.unwrap_or(f64::NAN)
                );
            }
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            serde_json::to_writer_pretty(BufWriter::new(file), &report)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
