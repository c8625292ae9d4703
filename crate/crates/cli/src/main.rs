//! `vcwidth` command-line tool.
//!
//! Exit codes: 0 on success, 1 for usage and domain errors, 2 for I/O errors.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vcwidth::bounds::width_range;
use vcwidth::dataset::{fetch_builtin, BuiltinDataset};
use vcwidth::exec::Execution;
use vcwidth::harness::emit::{bounds_table_text, emit_sweep_plot, TableFormat};
use vcwidth::harness::shatter::{load_points, run_shatter};
use vcwidth::harness::sweep::{prepare_partitions, run_sweep};
use vcwidth::harness::{DatasetConfig, SweepConfig, Widths};
use vcwidth::network::SigmoidNetwork;
use vcwidth::train::{init_network, train, TrainConfig};
use vcwidth::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "vcwidth", version, about = "Hidden-layer width bounds and width sweeps for sigmoid networks")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Width bracket for n attributes and r samples.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: u64,
        /// Also print the VC-dimension bracket of a network of this width.
        #[arg(long)]
        vc_width: Option<usize>,
    },
    /// Bound table over a range of attribute counts.
    Table {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
        /// csv or markdown.
        #[arg(long, default_value = "csv")]
        format: TableFormat,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one network and report its final errors.
    Train(TrainArgs),
    /// Train across widths and seeds; write a CSV report and optional plot.
    Sweep(SweepArgs),
    /// Count the labelings of a small point set a network can ε-identify.
    Shatter(ShatterArgs),
    /// Download a built-in data set into the data directory.
    Fetch {
        /// glass, thyroid, wine or all.
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
}

/// Options shared by `train` and `sweep`. Anything left unset falls back to
/// the config file, then to built-in defaults.
#[derive(Args, Debug)]
struct RunArgs {
    /// TOML file with [dataset], [train] and [sweep] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in data set: glass, thyroid or wine.
    #[arg(long)]
    dataset: Option<BuiltinDataset>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    eta: Option<f64>,
    /// Maximum epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Base seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Early-stop window; 0 disables.
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    init_scale: Option<f64>,
    #[arg(long)]
    target_mse: Option<f64>,
    /// Min-max scale features (default true); `--normalize false` disables.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    normalize: Option<bool>,
    /// Train/validation/test proportions, e.g. 0.7,0.15,0.15.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    split: Option<Vec<f64>>,
}

impl RunArgs {
    fn config(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::load(path)?,
            None => SweepConfig::default(),
        };
        if let Some(which) = self.dataset {
            cfg.dataset = DatasetConfig::builtin(which, cfg.dataset.data_dir.clone());
        }
        if let Some(dir) = &self.data_dir {
            cfg.dataset.data_dir = dir.clone();
        }
        let t = &mut cfg.train;
        t.eta = self.eta.unwrap_or(t.eta);
        t.max_epochs = self.epochs.unwrap_or(t.max_epochs);
        t.seed = self.seed.unwrap_or(t.seed);
        t.patience = self.patience.unwrap_or(t.patience);
        t.init_scale = self.init_scale.unwrap_or(t.init_scale);
        t.target_mse = self.target_mse.or(t.target_mse);
        if let Some(b) = self.normalize {
            cfg.sweep.normalize = b;
        }
        if let Some(s) = &self.split {
            cfg.sweep.split = [s[0], s[1], s[2]];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Hidden width; required unless --load is given.
    #[arg(long)]
    width: Option<usize>,
    /// Start from a saved weight matrix instead of a random network.
    #[arg(long)]
    load: Option<PathBuf>,
    /// Write the trained weight matrix here.
    #[arg(long)]
    save: Option<PathBuf>,
    /// Write the per-epoch error trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Explicit widths, e.g. 1,2,3.
    #[arg(long, value_delimiter = ',', conflicts_with = "auto")]
    widths: Option<Vec<usize>>,
    /// Every width inside the computed bracket.
    #[arg(long)]
    auto: bool,
    /// Widths added to the list, e.g. to probe outside the bracket.
    #[arg(long, value_delimiter = ',')]
    extra_widths: Option<Vec<usize>>,
    /// Seeds per width.
    #[arg(long)]
    seeds: Option<usize>,
    /// Worker threads: 0 for all cores, 1 for sequential.
    #[arg(long)]
    jobs: Option<usize>,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG bar chart; a `<name>_values.csv` sidecar is written next to it.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ShatterArgs {
    /// One point per line, comma or whitespace separated.
    #[arg(long)]
    points_file: PathBuf,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 10_000)]
    epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    init_scale: f64,
    /// Worker threads: 0 for all cores, 1 for sequential.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn cmd_bounds(n: usize, r: u64, vc_width: Option<usize>) -> Result<()> {
    let mut b = width_range(n, r)?;
    if let Some(m) = vc_width {
        b = b.with_vc_bracket(m)?;
    }
    println!("n={} r={}", b.n, b.r);
    println!("beta={} gamma={} l_m={}", b.beta, b.gamma, b.l_m);
    println!("k1={} k2={} L_m={}", b.k1, b.k2, b.upper);
    println!("lo={} hi={}", b.lo, b.hi);
    println!("range={}", b.range_label());
    if let Some((lo, hi)) = b.vc_bracket {
        println!("vc_lower={lo} vc_upper={hi}");
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = args.run.config()?;
    let data = cfg.dataset.load()?;
    let parts = prepare_partitions(&data, cfg.sweep.split, cfg.train.seed, cfg.sweep.normalize)?;
    let net0 = match (&args.load, args.width) {
        (Some(path), _) => {
            let net = SigmoidNetwork::load(path)?;
            if args.width.is_some_and(|w| w != net.width()) {
                return Err(Error::InvalidConfig(format!(
                    "--width {} disagrees with the loaded network's width {}",
                    args.width.unwrap_or_default(),
                    net.width()
                )));
            }
            net
        }
        (None, Some(w)) => init_network(data.attributes(), w, &cfg.train)?,
        (None, None) => return Err(Error::InvalidConfig("--width is required unless --load is given".into())),
    };
    let trace = train(&net0, &parts, &cfg.train)?;
    let [tr, va, te] = trace.final_mse();
    println!("dataset={} r={} n={} width={}", data.name(), data.len(), data.attributes(), net0.width());
    println!("initial_train_mse={}", trace.initial_mse[0]);
    println!("final_train_mse={tr} final_val_mse={va} final_test_mse={te}");
    println!("epochs_run={} stop_reason={}", trace.epochs_run, trace.stop_reason.as_str());
    if trace.epochs_run > 0 {
        println!("dissimilarity={}", vcwidth::metrics::dissimilarity(&trace.curves()?));
    }
    if let Some(path) = &args.save {
        trace.final_net.save(path)?;
    }
    if let Some(path) = &args.trace {
        trace.save_csv(path)?;
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut cfg = args.run.config()?;
    if let Some(w) = &args.widths {
        cfg.sweep.widths = Widths::List(w.clone());
    }
    if args.auto {
        cfg.sweep.widths = Widths::auto();
    }
    if let Some(extra) = &args.extra_widths {
        cfg.sweep.extra_widths = extra.clone();
    }
    if let Some(s) = args.seeds {
        cfg.sweep.seeds_per_width = s;
    }
    if let Some(j) = args.jobs {
        cfg.sweep.jobs = j;
    }
    let report = run_sweep(&cfg)?;
    write_output(args.out.as_deref(), &report.to_csv())?;
    if let Some(path) = &args.plot {
        emit_sweep_plot(&report, path)?;
    }
    if args.out.is_some() {
        match report.best_width {
            Some(w) => println!("best_width={w}"),
            None => println!("best_width=none"),
        }
    }
    Ok(())
}

fn cmd_shatter(args: &ShatterArgs) -> Result<()> {
    let points = load_points(&args.points_file)?;
    let budget = TrainConfig {
        eta: args.eta,
        max_epochs: args.epochs,
        seed: args.seed,
        init_scale: args.init_scale,
        ..TrainConfig::default()
    };
    let report = run_shatter(&points, args.width, args.epsilon, &budget, args.restarts, Execution::from_jobs(args.jobs))?;
    write_output(args.out.as_deref(), &report.to_csv())?;
    if args.out.is_some() {
        println!("identified={}/{}", report.identified_count, report.labelings());
    }
    Ok(())
}

fn cmd_fetch(name: &str, data_dir: &Path) -> Result<()> {
    let which: Vec<BuiltinDataset> = if name.eq_ignore_ascii_case("all") {
        BuiltinDataset::ALL.to_vec()
    } else {
        vec![name.parse()?]
    };
    std::fs::create_dir_all(data_dir).map_err(|e| Error::io(data_dir, e))?;
    for w in which {
        for path in fetch_builtin(w, data_dir)? {
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bounds { n, r, vc_width } => cmd_bounds(n, r, vc_width),
        Command::Table { r, n_from, n_to, format, out } => {
            write_output(out.as_deref(), &bounds_table_text(r, n_from, n_to, format)?)
        }
        Command::Train(args) => cmd_train(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Shatter(args) => cmd_shatter(&args),
        Command::Fetch { name, data_dir } => cmd_fetch(&name, &data_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
