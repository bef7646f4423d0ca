use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use popaudit_core::audit::{ExperimentConfig, Pipeline, FIGURE_IDS};
use popaudit_core::synth::{generate, write_movielens, SynthConfig};
use popaudit_core::{Error, ErrorClass};

/// Popularity bias and calibration audit for top-N recommenders.
#[derive(Parser)]
#[command(name = "popaudit", version)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Override the split seed and every algorithm seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of the configured algorithm names.
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
    /// Output directory, overriding the config.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Load, filter and split the data.
    Prepare(Common),
    /// Grid-search hyperparameters on an inner validation split.
    Tune(Common),
    /// Fit every configured algorithm.
    Train(Common),
    /// Write top-N lists for every training user.
    Recommend(Common),
    /// Compute precision, popularity lift, miscalibration and cohort tests.
    Evaluate(Common),
    /// Assemble report.json and report.txt and print the text report.
    Report(Common),
    /// Write the data behind one or more figures.
    ExportFig {
        #[command(flatten)]
        common: Common,
        /// Figure ids (fig2..fig9); all when omitted.
        ids: Vec<String>,
    },
    /// Every stage in order.
    Run(Common),
    /// Write a synthetic dataset in MovieLens 1M format.
    Synth {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 600)]
        users: usize,
        #[arg(long, default_value_t = 400)]
        items: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(common: &Common) -> Result<Pipeline, Error> {
    if !common.config.is_file() {
        return Err(Error::Config(format!("config file {} not found", common.config.display())));
    }
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.override_seed(seed);
    }
    if !common.algorithms.is_empty() {
        config.retain_algorithms(&common.algorithms)?;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    Ok(Pipeline::new(config))
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Prepare(c) => {
            let mut p = load(&c)?;
            let s = &p.prepare()?.summary;
            println!(
                "{} ratings, {} users, {} items; {} train / {} test",
                s.ratings, s.users, s.items, s.train_ratings, s.test_ratings
            );
        }
        Command::Tune(c) => {
            let outcomes = load(&c)?.tune()?;
            for (name, o) in outcomes {
                println!("{name}: {}", serde_json::to_string(&o.best)?);
            }
        }
        Command::Train(c) => load(&c)?.train()?,
        Command::Recommend(c) => load(&c)?.recommend()?,
        Command::Evaluate(c) => {
            for a in load(&c)?.evaluate()? {
                println!(
                    "{}: precision {:.4}, total PL {}, total MC {:.4}",
                    a.name,
                    a.precision,
                    a.total.lift.map_or("n/a".into(), |l| format!("{l:.4}")),
                    a.total.miscalibration
                );
            }
        }
        Command::Report(c) => print!("{}", load(&c)?.report()?.render_text()),
        Command::Run(c) => print!("{}", load(&c)?.run()?.render_text()),
        Command::ExportFig { common, ids } => {
            let mut p = load(&common)?;
            let ids: Vec<String> = if ids.is_empty() {
                FIGURE_IDS.iter().map(|s| s.to_string()).collect()
            } else {
                ids
            };
            for id in ids {
                println!("{}", p.export_figure(&id)?.display());
            }
        }
        Command::Synth { out, users, items, seed } => {
            let data = generate(&SynthConfig {
                users,
                items,
                seed,
                ..Default::default()
            })?;
            let files = write_movielens(&data, &out)?;
            println!("{}", files.ratings.display());
            println!("{}", files.movies.display());
            println!("{}", files.users.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let text = s.to_string();
                if !msg.contains(&text) {
                    msg.push_str(&format!("\n  caused by: {text}"));
                }
                source = s.source();
            }
            eprintln!("{msg}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Data => 2,
                ErrorClass::Numerical => 3,
            })
        }
    }
}
