use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use memsense::io::{
    generate_scene, monte_carlo, report_costs, run_experiment, save_frame, save_mask, sweep_csv,
    sweep_transfer, ExperimentConfig, SaveMode,
};
use memsense::{ArchitectureKind, ArrayGeometry};

const SEED_ENV: &str = "MEMSENSE_SEED";

#[derive(Parser)]
#[command(name = "memsense", version, about = "Memristive analog frame-differencing sensor simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one detection experiment and write frames, masks and summary.json.
    Simulate(Common),
    /// Render the synthetic scene and its ground-truth masks.
    Scene(Common),
    /// DC transfer sweep over V_in for both memristor states, as CSV.
    Sweep(SweepArgs),
    /// Circuit count, power, area and latency of an architecture.
    Report {
        #[command(flatten)]
        common: Common,
        /// Print JSON only.
        #[arg(long)]
        json: bool,
    },
    /// Repeat the experiment over seeds for several variation levels.
    Montecarlo(MonteCarloArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["parallel", "column"])]
    arch: Option<String>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Memristor mismatch fraction p in [0, 1).
    #[arg(long)]
    variation: Option<f64>,
    /// Device seed; falls back to MEMSENSE_SEED, then the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Detection threshold in volts (default: half the full-scale difference).
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    delay: Option<usize>,
    #[arg(long, value_parser = ["none", "median3", "median5"])]
    filter: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Input graymaps (PGM); the synthetic scene is used when omitted.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    input: Vec<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Reference voltage V_r.
    #[arg(long, default_value_t = 1.0)]
    v_r: f64,
    /// Number of evenly spaced V_in points in [0, 1 V].
    #[arg(long, default_value_t = 11)]
    points: usize,
}

#[derive(Args)]
struct MonteCarloArgs {
    #[command(flatten)]
    common: Common,
    /// Variation levels to evaluate.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5])]
    levels: Vec<f64>,
    /// Number of seeds per level, starting at --seed.
    #[arg(long, default_value_t = 20)]
    seeds: usize,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        if let Ok(seed) = std::env::var(SEED_ENV) {
            config
                .set("seed", &seed)
                .map_err(anyhow::Error::msg)
                .with_context(|| format!("{SEED_ENV}={seed}"))?;
        }
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            config
                .merge(&text)
                .with_context(|| format!("in config {}", path.display()))?;
        }
        let flags: [(&str, Option<String>); 10] = [
            ("arch", self.arch.clone()),
            ("rows", self.rows.map(|v| v.to_string())),
            ("cols", self.cols.map(|v| v.to_string())),
            ("variation", self.variation.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("threshold", self.threshold.map(|v| v.to_string())),
            ("delay", self.delay.map(|v| v.to_string())),
            ("filter", self.filter.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("threads", self.threads.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                config.set(key, &value).map_err(anyhow::Error::msg)?;
            }
        }
        if !self.input.is_empty() {
            config.inputs = self.input.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

fn simulate(common: &Common) -> Result<()> {
    let config = common.resolve()?;
    let summary = run_experiment(&config)?;
    let out = config.out.as_deref().map(Path::display);
    match (summary.mean_iou, summary.min_iou) {
        (Some(mean), Some(min)) => println!(
            "{} {}x{} p={} seed={} filter={}: mean IoU {mean:.4}, min IoU {min:.4}",
            summary.architecture, summary.n, summary.m, summary.variation_p, summary.seed, summary.filter
        ),
        _ => println!(
            "{} {}x{}: {} difference frames",
            summary.architecture,
            summary.n,
            summary.m,
            summary.frames.len()
        ),
    }
    match out {
        Some(dir) => println!("outputs written to {dir}"),
        None => print!("{}", summary.to_json()?),
    }
    Ok(())
}

fn scene(common: &Common) -> Result<()> {
    let config = common.resolve()?;
    let Some(dir) = &config.out else {
        bail!("scene requires --out");
    };
    let spec = config.scene_spec()?;
    let scene = generate_scene(&spec, &mut memsense::device::device_rng(config.seed))?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (t, frame) in scene.frames.iter().enumerate() {
        save_frame(frame, &dir.join(format!("frame_{t:04}.pgm")), SaveMode::Raw)?;
    }
    for (k, truth) in scene.ground_truth.iter().enumerate() {
        save_mask(truth, &dir.join(format!("truth_{:04}.pgm", k + spec.delay)))?;
    }
    println!(
        "{} frames and {} ground-truth masks written to {}",
        scene.frames.len(),
        scene.ground_truth.len(),
        dir.display()
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let config = args.common.resolve()?;
    let csv = sweep_csv(&sweep_transfer(&config.circuit, args.v_r, args.points)?);
    match &config.out {
        Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn report(common: &Common, json: bool) -> Result<()> {
    let config = common.resolve()?;
    let geometry = ArrayGeometry::new(config.rows, config.cols)?;
    let mut reports = Vec::new();
    let kinds: &[ArchitectureKind] = if common.arch.is_some() {
        std::slice::from_ref(&config.architecture)
    } else {
        &[ArchitectureKind::PixelParallel, ArchitectureKind::ColumnSequential]
    };
    for &kind in kinds {
        reports.push(report_costs(kind, geometry, config.costs)?);
    }
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])?
    } else {
        serde_json::to_string_pretty(&reports)?
    };
    if !json {
        for r in &reports {
            println!("{}", r.to_table());
        }
    }
    match &config.out {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn montecarlo(args: &MonteCarloArgs) -> Result<()> {
    let config = args.common.resolve()?;
    let base = ExperimentConfig { out: None, ..config.clone() };
    let report = monte_carlo(&base, &args.levels, args.seeds)?;
    println!("{:<10}{:>6}{:>10}{:>10}{:>10}", "p", "runs", "mean", "min", "max");
    for l in &report.levels {
        println!(
            "{:<10}{:>6}{:>10.4}{:>10.4}{:>10.4}",
            l.variation_p, l.runs, l.iou_mean, l.iou_min, l.iou_max
        );
    }
    if let Some(dir) = &config.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("montecarlo.json");
        fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Scene(c) => scene(c),
        Command::Sweep(a) => sweep(a),
        Command::Report { common, json } => report(common, *json),
        Command::Montecarlo(a) => montecarlo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("memsense: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
