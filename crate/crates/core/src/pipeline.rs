//! Image-level processing: voltage mapping, dynamic and static differencing,
//! neighborhood similarity, thresholding, median filtering and detection
//! metrics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::ArrayArchitecture;
use crate::circuit::{self, CircuitConfig, PixelPairInput};
use crate::device::MemristorState;
use crate::error::{Error, Result};
use crate::frame::{Frame, Grid, Mask};

/// Voltage of a white pixel; matches the 1 V reference used for the
/// circuit characterisation.
pub const FULL_SCALE_VOLTS: f64 = 1.0;

/// Maps an 8-bit gray level linearly onto `[0, 1 V]`.
pub fn pixel_to_voltage(gray: u32) -> Result<f64> {
    level_to_voltage(gray, 255)
}

/// Maps a gray level with an arbitrary `maxval` onto `[0, 1 V]`.
pub fn level_to_voltage(level: u32, maxval: u32) -> Result<f64> {
    if maxval == 0 || level > maxval {
        return Err(Error::invalid(
            "gray level",
            format!("{level} is outside [0, {maxval}]"),
        ));
    }
    Ok(level as f64 / maxval as f64 * FULL_SCALE_VOLTS)
}

/// Inverse of [`pixel_to_voltage`]: rounds to the nearest level and clamps.
pub fn voltage_to_pixel(volts: f64) -> u8 {
    let level = (volts / FULL_SCALE_VOLTS * 255.0).round();
    if level.is_nan() {
        0
    } else {
        level.clamp(0.0, 255.0) as u8
    }
}

/// Builds a voltage frame from 8-bit gray levels.
pub fn frame_from_gray(width: usize, height: usize, gray: &[u8]) -> Result<Frame> {
    let values = gray.iter().map(|&g| g as f64 / 255.0 * FULL_SCALE_VOLTS).collect();
    Frame::new(width, height, values, (0.0, FULL_SCALE_VOLTS))
}

/// Time-domain differencing: `output[k]` compares `sequence[k + delay]`
/// (as `V_in`) with `sequence[k]` (as `V_r`).
pub fn dynamic_difference(
    sequence: &[Frame],
    arch: &ArrayArchitecture,
    config: &CircuitConfig,
    delay: usize,
) -> Result<Vec<Frame>> {
    if delay == 0 {
        return Err(Error::invalid("delay", "must be at least one frame"));
    }
    if sequence.len() <= delay {
        return Err(Error::SequenceTooShort {
            len: sequence.len(),
            delay,
        });
    }
    arch.ensure_state(MemristorState::LowResistance)?;
    for f in sequence {
        arch.geometry().check_frame(f)?;
    }
    sequence
        .windows(delay + 1)
        .map(|w| arch.process_frame_pair(&w[0], &w[delay], config))
        .collect()
}

/// Single-image mode: the background drives `V_r`, the input drives `V_in`,
/// and every memristor is programmed to `state`. `HighResistance` yields the
/// background through a fixed affine map; `LowResistance` subtracts it.
pub fn static_mode(
    background: &Frame,
    input: &Frame,
    state: MemristorState,
    arch: &ArrayArchitecture,
    config: &CircuitConfig,
) -> Result<Frame> {
    background.ensure_same_shape(input)?;
    arch.programmed(state).process_frame_pair(background, input, config)
}

fn check_window(window: usize) -> Result<()> {
    match window {
        3 | 5 => Ok(()),
        w if w % 2 == 0 => Err(Error::invalid("window", format!("{w} is even"))),
        w => Err(Error::invalid("window", format!("{w} is not 3 or 5"))),
    }
}

/// Average similarity of each pixel to its `window × window` neighborhood.
///
/// Each neighbor `k` is compared with the center through a nominal `Ron`
/// circuit (`V_in` = neighbor, `V_r` = center) and the `window² - 1` outputs
/// are averaged. Borders use replicate padding.
pub fn neighborhood_similarity(
    frame: &Frame,
    window: usize,
    config: &CircuitConfig,
) -> Result<Frame> {
    check_window(window)?;
    if frame.width() < window || frame.height() < window {
        return Err(Error::invalid(
            "frame",
            format!(
                "{}x{} is smaller than the {window}x{window} window",
                frame.height(),
                frame.width()
            ),
        ));
    }
    let device = config.nominal_device(MemristorState::LowResistance)?;
    let half = (window / 2) as isize;
    let count = (window * window - 1) as f64;
    let (w, h) = (frame.width(), frame.height());
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w)
        .enumerate()
        .try_for_each(|(i, row)| -> Result<()> {
            for (j, slot) in row.iter_mut().enumerate() {
                let center = frame.get(i, j);
                let mut sum = 0.0;
                for di in -half..=half {
                    for dj in -half..=half {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let neighbor = frame.replicated(i as isize + di, j as isize + dj);
                        sum += circuit::transfer(PixelPairInput::new(neighbor, center), &device, config)?;
                    }
                }
                *slot = sum / count;
            }
            Ok(())
        })?;
    Ok(Frame::from_parts_unchecked(w, h, out, (-config.v_dd, config.v_dd)))
}

/// Intersection-over-union and per-pixel error rate against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub iou: f64,
    pub pixel_error_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub difference: Frame,
    pub mask: Mask,
    pub threshold: f64,
    pub metrics: Option<DetectionMetrics>,
}

impl DetectionResult {
    /// Replaces the mask with its median-filtered version.
    pub fn filtered(self, window: usize) -> Result<Self> {
        let mask = median_filter(&self.mask, window)?;
        Ok(Self { mask, ..self })
    }

    pub fn evaluate(mut self, ground_truth: &Mask) -> Result<Self> {
        self.metrics = Some(DetectionMetrics {
            iou: iou(&self.mask, ground_truth)?,
            pixel_error_rate: pixel_error_rate(&self.mask, ground_truth)?,
        });
        Ok(self)
    }
}

/// Marks every pixel whose absolute difference reaches `threshold`.
pub fn threshold_mask(difference: &Frame, threshold: f64) -> Result<DetectionResult> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::invalid("threshold", format!("{threshold} must be >= 0")));
    }
    let bits = difference.values().iter().map(|v| v.abs() >= threshold).collect();
    Ok(DetectionResult {
        difference: difference.clone(),
        mask: Mask::new(difference.width(), difference.height(), bits)?,
        threshold,
        metrics: None,
    })
}

/// Median over a `window × window` neighborhood with replicate padding.
/// On masks this is a majority vote.
pub fn median_filter<G: Grid + Sync>(input: &G, window: usize) -> Result<G>
where
    G::Cell: Send,
{
    check_window(window)?;
    let (w, h) = (input.grid_width(), input.grid_height());
    let half = (window / 2) as isize;
    let cells: Vec<G::Cell> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = ((idx / w) as isize, (idx % w) as isize);
            let mut buf = Vec::with_capacity(window * window);
            for di in -half..=half {
                for dj in -half..=half {
                    buf.push(input.replicated(i + di, j + dj));
                }
            }
            buf.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            buf[buf.len() / 2]
        })
        .collect();
    Ok(input.with_cells(cells))
}

/// `|A ∩ B| / |A ∪ B|`, with two empty masks scoring 1.
pub fn iou(mask: &Mask, ground_truth: &Mask) -> Result<f64> {
    mask.ensure_same_shape(ground_truth)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in mask.bits().iter().zip(ground_truth.bits()) {
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Fraction of pixels where the masks disagree.
pub fn pixel_error_rate(mask: &Mask, ground_truth: &Mask) -> Result<f64> {
    mask.ensure_same_shape(ground_truth)?;
    let wrong = mask
        .bits()
        .iter()
        .zip(ground_truth.bits())
        .filter(|(a, b)| a != b)
        .count();
    Ok(wrong as f64 / mask.bits().len() as f64)
}
