use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gsa_bench::config::{GridConfig, Hyperparams, RunConfig, RunFile};
use gsa_bench::fetch::{default_cache_dir, fetch_dataset};
use gsa_bench::model_io::save_model;
use gsa_bench::registry::{TaskKind, REGISTRY};
use gsa_bench::report::{grid_markdown, parse_csv, records_to_csv};
use gsa_bench::runner::{run_experiment, run_grid, GridReport};
use gsa_core::data::{load_libsvm_path, ParseOptions, Task};
use gsa_core::metrics::MinLossTracker;

/// Benchmark harness for the greedy-step-averaging optimizer and its
/// SGD/Adadelta/SCSG baselines on LIBSVM datasets.
#[derive(Parser)]
#[command(name = "gsa-bench", version, about)]
struct Cli {
    /// Dataset cache directory (default: $GSA_BENCH_CACHE or ~/.cache/gsa-bench).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Never touch the network; fail if a dataset is not cached.
    #[arg(long, global = true)]
    offline: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download datasets into the cache (idempotent, checksum-verified).
    Fetch {
        /// Registry names to fetch; default: every non-large dataset.
        names: Vec<String>,
        /// Include the large datasets (url, rcv1, news20, aloi, mnist, sector).
        #[arg(long)]
        full: bool,
        /// List the registry and exit.
        #[arg(long)]
        list: bool,
    },
    /// Run one experiment and write metrics.csv (plus optional model/trace).
    Run(Box<RunArgs>),
    /// Run an optimizer grid from a TOML config and write grid.csv/grid.md.
    Grid {
        /// Grid TOML file.
        #[arg(long)]
        config: PathBuf,
        /// Parallel grid cells.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override the base output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Parse a LIBSVM file and report its shape, labels, and any errors.
    ParseCheck {
        path: PathBuf,
        /// Do not append the constant bias column.
        #[arg(long)]
        no_bias: bool,
        /// Parse labels as real-valued regression targets.
        #[arg(long)]
        regression: bool,
    },
    /// Re-render a metrics CSV as a markdown table.
    Report {
        /// Input metrics.csv (schema as emitted by run/grid).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Markdown)]
        format: ReportFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Markdown,
}

#[derive(Args)]
struct RunArgs {
    /// Run TOML file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    /// logistic | softmax | linear
    #[arg(long)]
    model: Option<String>,
    /// gsa | sgd | adadelta | scsg
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    passes: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated pass indices to evaluate (default: every pass).
    #[arg(long, value_delimiter = ',')]
    eval_passes: Option<Vec<u32>>,
    #[arg(long)]
    test_path: Option<PathBuf>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    add_bias: Option<bool>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// SGD/SCSG learning rate.
    #[arg(long)]
    rate: Option<f64>,
    /// Adadelta eps.
    #[arg(long)]
    eps: Option<f64>,
    /// SCSG anchor batch size.
    #[arg(long)]
    batch_size: Option<usize>,
    /// GSA confidence threshold (default 0.95).
    #[arg(long)]
    p_hat: Option<f64>,
    /// Save the trained model to <output_dir>/model.txt.
    #[arg(long)]
    save_model: bool,
    /// Save the GSA step-size trace to <output_dir>/trace.csv.
    #[arg(long)]
    trace: bool,
}

impl RunArgs {
    fn to_run_file(&self) -> RunFile {
        RunFile {
            dataset: self.dataset.clone(),
            model: self.model.clone(),
            optimizer: self.optimizer.clone(),
            passes: self.passes,
            seed: self.seed,
            add_bias: self.add_bias,
            output_dir: self.output_dir.clone(),
            eval_passes: self.eval_passes.clone(),
            test_path: self.test_path.clone(),
            test_fraction: self.test_fraction,
            hyperparams: Hyperparams {
                rate: self.rate,
                eps: self.eps,
                batch_size: self.batch_size,
                p_hat: self.p_hat,
                clamp_negative: None,
                eta_max: None,
            },
        }
    }
}

fn main() -> Result<()> {
    // Die quietly when stdout is a closed pipe (e.g. `gsa-bench fetch --list | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let cache = cli.cache_dir.clone().unwrap_or_else(default_cache_dir);
    match cli.command {
        Command::Fetch { names, full, list } => cmd_fetch(names, full, list, &cache, cli.offline),
        Command::Run(args) => cmd_run(&args, &cache, cli.offline),
        Command::Grid { config, jobs, output_dir } => {
            cmd_grid(&config, jobs, output_dir, &cache, cli.offline)
        }
        Command::ParseCheck { path, no_bias, regression } => {
            cmd_parse_check(&path, no_bias, regression)
        }
        Command::Report { input, format, output } => cmd_report(&input, format, output),
    }
}

fn cmd_fetch(
    names: Vec<String>,
    full: bool,
    list: bool,
    cache: &Path,
    offline: bool,
) -> Result<()> {
    if list {
        for d in REGISTRY {
            let evals: Vec<String> = d.eval_passes.iter().map(u32::to_string).collect();
            println!(
                "{:22} {:10} passes={:<3} eval=[{}]{}{} {}",
                d.name,
                match d.kind {
                    TaskKind::Binary => "binary",
                    TaskKind::Multiclass => "multiclass",
                },
                d.default_passes,
                evals.join(","),
                if d.test_url.is_some() { "  official-test" } else { "  80/20-split" },
                if d.large { "  large" } else { "" },
                d.url
            );
        }
        return Ok(());
    }
    let targets: Vec<String> = if names.is_empty() {
        REGISTRY.iter().filter(|d| full || !d.large).map(|d| d.name.to_string()).collect()
    } else {
        names
    };
    for name in targets {
        let resolved =
            fetch_dataset(&name, cache, offline).with_context(|| format!("fetching {name}"))?;
        println!("{name}: {}", resolved.train.display());
        if let Some(test) = resolved.test {
            println!("{name} (test): {}", test.display());
        }
    }
    Ok(())
}

fn cmd_run(args: &RunArgs, cache: &Path, offline: bool) -> Result<()> {
    let mut raw = match &args.config {
        Some(path) => RunFile::from_path(path)?,
        None => RunFile::default(),
    };
    raw = raw.overlay(args.to_run_file());
    let cfg = RunConfig::from_file(&raw)?;

    let (output, data) = run_experiment(&cfg, cache, offline)?;
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;

    let csv_path = cfg.output_dir.join("metrics.csv");
    fs::write(&csv_path, records_to_csv(&output.records)?)?;

    let mut min_loss = MinLossTracker::new();
    for r in &output.records {
        println!(
            "pass {:>3}  loss {:<12} precision {:<8} auc {:<8} {}",
            r.pass,
            format!("{:.6}", r.loss),
            r.precision.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into()),
            r.auc.map(|a| format!("{a:.4}")).unwrap_or_else(|| "-".into()),
            if r.diverged { "DIVERGED" } else { "" }
        );
        if !r.diverged {
            min_loss.observe(r.loss);
        }
    }
    if let Some(m) = min_loss.min() {
        println!("min test loss over evaluated passes: {m:.6}");
    }
    println!("wrote {}", csv_path.display());

    if args.trace {
        match &output.trace {
            Some(trace) => {
                let trace_path = cfg.output_dir.join("trace.csv");
                fs::write(&trace_path, trace.to_csv())?;
                println!("wrote {}", trace_path.display());
            }
            None => eprintln!("--trace only applies to the gsa optimizer; ignored"),
        }
    }
    if args.save_model {
        let model_path = cfg.output_dir.join("model.txt");
        save_model(&output.model, data.train.has_bias, &model_path)?;
        println!("wrote {}", model_path.display());
    }
    Ok(())
}

fn cmd_grid(
    config: &Path,
    jobs: usize,
    output_dir: Option<PathBuf>,
    cache: &Path,
    offline: bool,
) -> Result<()> {
    let mut grid = GridConfig::from_path(config)?;
    if let Some(dir) = output_dir {
        grid.base.output_dir = dir;
    }
    let report = run_grid(&grid, cache, offline, jobs)?;
    fs::create_dir_all(&grid.base.output_dir)?;

    let csv_path = grid.base.output_dir.join("grid.csv");
    fs::write(&csv_path, records_to_csv(&report.records)?)?;
    let md_path = grid.base.output_dir.join("grid.md");
    let md = grid_markdown(&report)?;
    fs::write(&md_path, &md)?;
    print!("{md}");
    println!("wrote {} and {}", csv_path.display(), md_path.display());
    Ok(())
}

fn cmd_parse_check(path: &Path, no_bias: bool, regression: bool) -> Result<()> {
    let opts = ParseOptions {
        add_bias: !no_bias,
        task: if regression { Task::Regression } else { Task::Classification },
    };
    let ds = load_libsvm_path(path, &opts)?;
    println!("samples:    {}", ds.len());
    println!("features:   {}{}", ds.n_features, if ds.has_bias { " (incl. bias)" } else { "" });
    println!("classes:    {}", ds.n_classes);
    if !ds.label_map.is_empty() {
        println!("label map:");
        for (raw, idx) in &ds.label_map {
            println!("  {raw:?} -> {idx}");
        }
    }
    let nnz: usize = ds.samples.iter().map(|s| s.features.nnz()).sum();
    println!("avg nnz:    {:.2}", nnz as f64 / ds.len() as f64);
    Ok(())
}

fn cmd_report(input: &Path, format: ReportFormat, output: Option<PathBuf>) -> Result<()> {
    let text = fs::read_to_string(input)?;
    let records = parse_csv(&text)?;
    let rendered = match format {
        ReportFormat::Csv => records_to_csv(&records)?,
        ReportFormat::Markdown => {
            let dataset = records[0].dataset.clone();
            let mut eval_passes: Vec<u32> = records.iter().map(|r| r.pass).collect();
            eval_passes.sort_unstable();
            eval_passes.dedup();
            let report = GridReport { dataset, eval_passes, records };
            grid_markdown(&report)?
        }
    };
    match output {
        Some(path) => {
            fs::write(&path, rendered)?;
            println!("wrote {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
