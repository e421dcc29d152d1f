//! Row-major pixel grids: analog voltage frames and binary masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A grid of pixel voltages with its declared voltage range.
///
/// `height` is the number of rows (`n`) and `width` the number of columns
/// (`m`). Values are stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    width: usize,
    height: usize,
    values: Vec<f64>,
    range: (f64, f64),
}

impl Frame {
    pub fn new(width: usize, height: usize, values: Vec<f64>, range: (f64, f64)) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("frame", "dimensions must be non-zero"));
        }
        if values.len() != width * height {
            return Err(Error::invalid(
                "frame",
                format!("{} values for a {width}x{height} frame", values.len()),
            ));
        }
        if range.0.is_nan() || range.1.is_nan() || range.0 > range.1 {
            return Err(Error::invalid("frame", format!("empty range {range:?}")));
        }
        if let Some(v) = values.iter().find(|v| !(range.0..=range.1).contains(*v)) {
            return Err(Error::invalid(
                "frame",
                format!("value {v} outside declared range {range:?}"),
            ));
        }
        Ok(Self {
            width,
            height,
            values,
            range,
        })
    }

    /// A frame with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: f64, range: (f64, f64)) -> Result<Self> {
        Self::new(width, height, vec![value; width * height], range)
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        values: Vec<f64>,
        range: (f64, f64),
    ) -> Self {
        debug_assert_eq!(values.len(), width * height);
        Self {
            width,
            height,
            values,
            range,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Scales every value; the declared range scales with it.
    pub fn scaled(&self, factor: f64) -> Self {
        let (a, b) = (self.range.0 * factor, self.range.1 * factor);
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            range: (a.min(b), a.max(b)),
            ..*self
        }
    }

    pub fn ensure_same_shape<G: Grid>(&self, other: &G) -> Result<()> {
        ensure_shape(self.height, self.width, other)
    }
}

/// A binary detection mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::invalid(
                "mask",
                format!("{} bits for a {width}x{height} mask", bits.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn ensure_same_shape<G: Grid>(&self, other: &G) -> Result<()> {
        ensure_shape(self.height, self.width, other)
    }
}

/// Common view over [`Frame`] and [`Mask`] for windowed operations.
pub trait Grid: Sized {
    type Cell: Copy + PartialOrd;

    fn grid_width(&self) -> usize;
    fn grid_height(&self) -> usize;
    fn cells(&self) -> &[Self::Cell];
    /// Rebuilds a grid of the same shape and metadata from new cells.
    fn with_cells(&self, cells: Vec<Self::Cell>) -> Self;

    /// Cell at `(row, col)` with out-of-range coordinates clamped to the
    /// nearest edge (replicate padding).
    fn replicated(&self, row: isize, col: isize) -> Self::Cell {
        let r = row.clamp(0, self.grid_height() as isize - 1) as usize;
        let c = col.clamp(0, self.grid_width() as isize - 1) as usize;
        self.cells()[r * self.grid_width() + c]
    }
}

impl Grid for Frame {
    type Cell = f64;

    fn grid_width(&self) -> usize {
        self.width
    }
    fn grid_height(&self) -> usize {
        self.height
    }
    fn cells(&self) -> &[f64] {
        &self.values
    }
    fn with_cells(&self, cells: Vec<f64>) -> Self {
        Self::from_parts_unchecked(self.width, self.height, cells, self.range)
    }
}

impl Grid for Mask {
    type Cell = bool;

    fn grid_width(&self) -> usize {
        self.width
    }
    fn grid_height(&self) -> usize {
        self.height
    }
    fn cells(&self) -> &[bool] {
        &self.bits
    }
    fn with_cells(&self, cells: Vec<bool>) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: cells,
        }
    }
}

fn ensure_shape<G: Grid>(rows: usize, cols: usize, other: &G) -> Result<()> {
    if other.grid_height() == rows && other.grid_width() == cols {
        Ok(())
    } else {
        Err(Error::GeometryMismatch {
            expected_rows: rows,
            expected_cols: cols,
            found_rows: other.grid_height(),
            found_cols: other.grid_width(),
        })
    }
}
