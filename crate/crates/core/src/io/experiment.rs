//! End-to-end experiment runs and their JSON summaries.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::{ArchitectureKind, ArrayArchitecture, ArrayGeometry, CostParams, CostReport};
use crate::circuit::{amplifier_stage, transfer, CircuitConfig, PixelPairInput};
use crate::device::{device_rng, MemristorState};
use crate::error::{Error, Result};
use crate::frame::Mask;
use crate::io::config::ExperimentConfig;
use crate::io::pgm::{load_sequence, save_frame, save_mask, SaveMode};
use crate::io::scene::generate_scene;
use crate::pipeline::{dynamic_difference, threshold_mask, DetectionResult};

pub const SCHEMA_VERSION: &str = "1";

/// Metrics for one differenced frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    /// Index of the current (`V_in`) frame in the input sequence.
    pub frame_index: usize,
    pub iou: Option<f64>,
    pub pixel_error_rate: Option<f64>,
    pub detected_pixels: usize,
    pub threshold: f64,
    pub variation_p: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: String,
    pub source: String,
    pub architecture: ArchitectureKind,
    pub n: usize,
    pub m: usize,
    pub variation_p: f64,
    pub seed: u64,
    pub threshold: f64,
    pub delay: usize,
    pub filter: String,
    pub frames: Vec<FrameRecord>,
    pub mean_iou: Option<f64>,
    pub min_iou: Option<f64>,
    pub costs: CostReport,
}

impl Summary {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Everything a run produces, before anything is written to disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: Summary,
    pub results: Vec<DetectionResult>,
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs the pipeline in memory: sample devices, difference, threshold,
/// filter, score.
pub fn evaluate(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    with_threads(config.threads, || evaluate_inner(config))?
}

fn evaluate_inner(config: &ExperimentConfig) -> Result<RunOutput> {
    let (frames, truth, source): (_, Option<Vec<Mask>>, _) = if config.inputs.is_empty() {
        let spec = config.scene_spec()?;
        // Scene placement uses its own stream so it never shifts device draws.
        let scene = generate_scene(&spec, &mut device_rng(config.seed ^ 0x5ce_e5ce))?;
        (scene.frames, Some(scene.ground_truth), "synthetic")
    } else {
        (load_sequence(&config.inputs)?, None, "files")
    };
    let first = frames
        .first()
        .ok_or(Error::SequenceTooShort { len: 0, delay: config.delay })?;
    let geometry = ArrayGeometry::new(first.height(), first.width())?;

    let arch = ArrayArchitecture::sampled(
        config.architecture,
        geometry,
        MemristorState::LowResistance,
        &config.circuit,
        config.variation,
        config.seed,
    )?
    .with_costs(config.costs);
    let threshold = config.effective_threshold();
    let differences = dynamic_difference(&frames, &arch, &config.circuit, config.delay)?;

    let mut results = Vec::with_capacity(differences.len());
    let mut records = Vec::with_capacity(differences.len());
    for (k, diff) in differences.iter().enumerate() {
        let mut result = threshold_mask(diff, threshold)?;
        if let Some(window) = config.filter.window() {
            result = result.filtered(window)?;
        }
        if let Some(truth) = &truth {
            result = result.evaluate(&truth[k])?;
        }
        records.push(FrameRecord {
            frame_index: k + config.delay,
            iou: result.metrics.map(|m| m.iou),
            pixel_error_rate: result.metrics.map(|m| m.pixel_error_rate),
            detected_pixels: result.mask.count(),
            threshold,
            variation_p: config.variation,
            seed: config.seed,
        });
        results.push(result);
    }
    let ious: Vec<f64> = records.iter().filter_map(|r| r.iou).collect();
    let (mean_iou, min_iou) = if ious.is_empty() {
        (None, None)
    } else {
        (
            Some(ious.iter().sum::<f64>() / ious.len() as f64),
            Some(ious.iter().copied().fold(f64::INFINITY, f64::min)),
        )
    };
    let summary = Summary {
        schema_version: SCHEMA_VERSION.to_string(),
        source: source.to_string(),
        architecture: config.architecture,
        n: geometry.n_rows(),
        m: geometry.n_cols(),
        variation_p: config.variation,
        seed: config.seed,
        threshold,
        delay: config.delay,
        filter: config.filter.as_str().to_string(),
        frames: records,
        mean_iou,
        min_iou,
        costs: arch.cost_report(),
    };
    Ok(RunOutput { summary, results })
}

/// Writes `difference_NNNN.pgm`, `mask_NNNN.pgm` and `summary.json`.
pub fn write_outputs(output: &RunOutput, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let full_scale = config.circuit.full_scale_difference();
    let mode = SaveMode::SignedDifference {
        full_scale_millivolts: (full_scale * 1000.0).round() as u32,
    };
    for (record, result) in output.summary.frames.iter().zip(&output.results) {
        let idx = record.frame_index;
        save_frame(&result.difference, &dir.join(format!("difference_{idx:04}.pgm")), mode)?;
        save_mask(&result.mask, &dir.join(format!("mask_{idx:04}.pgm")))?;
    }
    let path = dir.join("summary.json");
    fs::write(&path, output.summary.to_json()?).map_err(|e| Error::io(path, e))
}

/// Runs one experiment and, if an output directory is configured, writes
/// every frame, mask and the summary there.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Summary> {
    let output = evaluate(config)?;
    if let Some(dir) = &config.out {
        write_outputs(&output, config, dir)?;
    }
    Ok(output.summary)
}

/// IoU statistics for one variation level across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationStats {
    pub variation_p: f64,
    pub runs: usize,
    pub iou_mean: f64,
    pub iou_min: f64,
    pub iou_max: f64,
    /// Mean IoU of each run, in seed order.
    pub per_seed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub schema_version: String,
    pub architecture: ArchitectureKind,
    pub filter: String,
    pub first_seed: u64,
    pub levels: Vec<VariationStats>,
}

/// Repeats [`evaluate`] on the synthetic scene for each variation level and
/// seeds `first_seed .. first_seed + seeds`.
pub fn monte_carlo(base: &ExperimentConfig, levels: &[f64], seeds: usize) -> Result<MonteCarloReport> {
    if seeds == 0 {
        return Err(Error::invalid("seeds", "must be at least one"));
    }
    if !base.inputs.is_empty() {
        return Err(Error::invalid("inputs", "Monte Carlo runs need the synthetic scene"));
    }
    let mut out = Vec::with_capacity(levels.len());
    for &p in levels {
        let per_seed = (0..seeds as u64)
            .map(|s| {
                let cfg = ExperimentConfig {
                    variation: p,
                    seed: base.seed.wrapping_add(s),
                    out: None,
                    ..base.clone()
                };
                evaluate(&cfg)?
                    .summary
                    .mean_iou
                    .ok_or_else(|| Error::invalid("scene", "no ground truth"))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(VariationStats {
            variation_p: p,
            runs: seeds,
            iou_mean: per_seed.iter().sum::<f64>() / seeds as f64,
            iou_min: per_seed.iter().copied().fold(f64::INFINITY, f64::min),
            iou_max: per_seed.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            per_seed,
        });
    }
    Ok(MonteCarloReport {
        schema_version: SCHEMA_VERSION.to_string(),
        architecture: base.architecture,
        filter: base.filter.as_str().to_string(),
        first_seed: base.seed,
        levels: out,
    })
}

/// One point of the DC transfer sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub v_in: f64,
    pub v_a: f64,
    pub v_o_ron: f64,
    pub v_o_roff: f64,
}

/// Sweeps `V_in` over `points` evenly spaced values in `[0, 1 V]` with a
/// fixed reference, for both nominal memristor states.
pub fn sweep_transfer(config: &CircuitConfig, v_r: f64, points: usize) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if points < 2 {
        return Err(Error::invalid("points", "a sweep needs at least two points"));
    }
    let ron = config.nominal_device(MemristorState::LowResistance)?;
    let roff = config.nominal_device(MemristorState::HighResistance)?;
    (0..points)
        .map(|k| {
            let v_in = k as f64 / (points - 1) as f64;
            let input = PixelPairInput::new(v_in, v_r);
            Ok(SweepRow {
                v_in,
                v_a: amplifier_stage(v_in, config),
                v_o_ron: transfer(input, &ron, config)?,
                v_o_roff: transfer(input, &roff, config)?,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("v_in,v_a,v_o_ron,v_o_roff\n");
    for r in rows {
        out.push_str(&format!("{:.6},{:.6},{:.6},{:.6}\n", r.v_in, r.v_a, r.v_o_ron, r.v_o_roff));
    }
    out
}

pub fn report_costs(kind: ArchitectureKind, geometry: ArrayGeometry, costs: CostParams) -> Result<CostReport> {
    let config = CircuitConfig::default();
    Ok(ArrayArchitecture::nominal(kind, geometry, MemristorState::LowResistance, &config)?
        .with_costs(costs)
        .cost_report())
}
