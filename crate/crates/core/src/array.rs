//! Pixel-array architectures built from the differencing circuit.
//!
//! * `PixelParallel`: one circuit per pixel. All pixels settle at once.
//! * `ColumnSequential`: one circuit per row, shared across columns. The
//!   array is scanned one column at a time; the previous frame's column is
//!   held in an [`AnalogRowMemory`] while the `n` circuits evaluate it. This
//!   needs `n` circuits instead of `n * m` (a saving of `1 - 1/m`) at the
//!   cost of `m` sequential settle steps per frame.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{self, CircuitConfig, PixelPairInput};
use crate::device::{sample_devices, MemristorDevice, MemristorState};
use crate::error::{Error, Result};
use crate::frame::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrayGeometry {
    n_rows: usize,
    n_cols: usize,
}

impl ArrayGeometry {
    pub fn new(n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid(
                "geometry",
                format!("{n_rows}x{n_cols} must have at least one row and column"),
            ));
        }
        Ok(Self { n_rows, n_cols })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn pixels(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn check_frame(&self, frame: &Frame) -> Result<()> {
        if frame.height() == self.n_rows && frame.width() == self.n_cols {
            Ok(())
        } else {
            Err(Error::GeometryMismatch {
                expected_rows: self.n_rows,
                expected_cols: self.n_cols,
                found_rows: frame.height(),
                found_cols: frame.width(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArchitectureKind {
    #[serde(rename = "parallel")]
    PixelParallel,
    #[serde(rename = "column")]
    ColumnSequential,
}

impl ArchitectureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ArchitectureKind::PixelParallel => "parallel",
            ArchitectureKind::ColumnSequential => "column",
        }
    }
}

impl std::str::FromStr for ArchitectureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" | "pixel-parallel" => Ok(Self::PixelParallel),
            "column" | "column-sequential" => Ok(Self::ColumnSequential),
            other => Err(Error::invalid(
                "architecture",
                format!("{other:?} (expected parallel or column)"),
            )),
        }
    }
}

impl std::fmt::Display for ArchitectureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-circuit cost figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub per_circuit_power_w: f64,
    pub per_circuit_area_um2: f64,
    pub row_settle_time_s: f64,
}

impl Default for CostParams {
    /// 96.64 mW and 531.66 µm² per circuit (180 nm design); 1 µs settle.
    fn default() -> Self {
        Self {
            per_circuit_power_w: 0.09664,
            per_circuit_area_um2: 531.66,
            row_settle_time_s: 1e-6,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("per_circuit_power_w", self.per_circuit_power_w),
            ("per_circuit_area_um2", self.per_circuit_area_um2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("{v} must be non-negative")));
            }
        }
        if !(self.row_settle_time_s.is_finite() && self.row_settle_time_s > 0.0) {
            return Err(Error::invalid(
                "row_settle_time_s",
                format!("{} must be positive", self.row_settle_time_s),
            ));
        }
        Ok(())
    }
}

/// Flat, serializable cost summary of an architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub architecture: ArchitectureKind,
    pub n: usize,
    pub m: usize,
    pub circuits: usize,
    pub power_w: f64,
    pub area_um2: f64,
    pub latency_s: f64,
    /// Circuit saving relative to pixel-parallel, in percent.
    pub reduction_percent: f64,
}

impl CostReport {
    /// Human-readable two-column table.
    pub fn to_table(&self) -> String {
        let rows = [
            ("architecture", self.architecture.to_string()),
            ("rows (n)", self.n.to_string()),
            ("cols (m)", self.m.to_string()),
            ("circuits", self.circuits.to_string()),
            ("power", format!("{:.6} W ({:.2} mW)", self.power_w, self.power_w * 1e3)),
            ("area", format!("{:.2} um^2", self.area_um2)),
            ("latency", format!("{:.3e} s", self.latency_s)),
            ("reduction", format!("{:.4} %", self.reduction_percent)),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<14}{v}\n"));
        }
        out
    }
}

/// Ideal sample-and-hold buffer for one column of previous-frame voltages.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogRowMemory {
    stored: Vec<f64>,
    valid: bool,
}

impl AnalogRowMemory {
    pub fn new(len: usize) -> Self {
        Self {
            stored: vec![0.0; len],
            valid: false,
        }
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }

    pub fn write(&mut self, values: impl IntoIterator<Item = f64>) -> Result<()> {
        let mut n = 0;
        for (slot, v) in self.stored.iter_mut().zip(values) {
            *slot = v;
            n += 1;
        }
        if n != self.stored.len() {
            self.valid = false;
            return Err(Error::invalid(
                "row memory write",
                format!("{n} values for a memory of length {}", self.stored.len()),
            ));
        }
        self.valid = true;
        Ok(())
    }

    pub fn read(&self) -> Result<&[f64]> {
        if self.valid {
            Ok(&self.stored)
        } else {
            Err(Error::MemoryNotWritten)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayArchitecture {
    kind: ArchitectureKind,
    geometry: ArrayGeometry,
    devices: Vec<MemristorDevice>,
    costs: CostParams,
}

impl ArrayArchitecture {
    /// Number of memristors an architecture of this shape holds.
    pub fn device_count(kind: ArchitectureKind, geometry: ArrayGeometry) -> usize {
        match kind {
            ArchitectureKind::PixelParallel => geometry.pixels(),
            ArchitectureKind::ColumnSequential => geometry.n_rows(),
        }
    }

    pub fn with_devices(
        kind: ArchitectureKind,
        geometry: ArrayGeometry,
        devices: Vec<MemristorDevice>,
        costs: CostParams,
    ) -> Result<Self> {
        let expected = Self::device_count(kind, geometry);
        if devices.len() != expected {
            return Err(Error::invalid(
                "devices",
                format!("{kind} {}x{} needs {expected} devices, got {}", geometry.n_rows(), geometry.n_cols(), devices.len()),
            ));
        }
        costs.validate()?;
        Ok(Self {
            kind,
            geometry,
            devices,
            costs,
        })
    }

    /// All devices ideal and programmed to `state`.
    pub fn nominal(
        kind: ArchitectureKind,
        geometry: ArrayGeometry,
        state: MemristorState,
        config: &CircuitConfig,
    ) -> Result<Self> {
        Self::sampled(kind, geometry, state, config, 0.0, 0)
    }

    /// Devices with mismatch drawn from `seed`. Pixel-parallel devices are
    /// drawn in row-major order, so a column-sequential array from the same
    /// seed gets the first `n` draws.
    pub fn sampled(
        kind: ArchitectureKind,
        geometry: ArrayGeometry,
        state: MemristorState,
        config: &CircuitConfig,
        variation_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let devices = sample_devices(
            Self::device_count(kind, geometry),
            config.r_on,
            config.r_off,
            state,
            variation_fraction,
            seed,
        )?;
        Self::with_devices(kind, geometry, devices, CostParams::default())
    }

    #[must_use]
    pub fn with_costs(self, costs: CostParams) -> Self {
        Self { costs, ..self }
    }

    /// Reprograms every device, keeping their mismatch.
    #[must_use]
    pub fn programmed(&self, state: MemristorState) -> Self {
        Self {
            devices: self.devices.iter().map(|d| d.program(state)).collect(),
            ..self.clone()
        }
    }

    pub fn kind(&self) -> ArchitectureKind {
        self.kind
    }

    pub fn geometry(&self) -> ArrayGeometry {
        self.geometry
    }

    pub fn devices(&self) -> &[MemristorDevice] {
        &self.devices
    }

    pub fn costs(&self) -> CostParams {
        self.costs
    }

    /// The device that evaluates pixel `(row, col)`.
    pub fn device_for(&self, row: usize, col: usize) -> &MemristorDevice {
        match self.kind {
            ArchitectureKind::PixelParallel => &self.devices[row * self.geometry.n_cols() + col],
            ArchitectureKind::ColumnSequential => &self.devices[row],
        }
    }

    pub fn ensure_state(&self, state: MemristorState) -> Result<()> {
        match self.devices.iter().position(|d| d.state() != state) {
            None => Ok(()),
            Some(index) => Err(Error::WrongDeviceState {
                index,
                expected: state,
                found: self.devices[index].state(),
            }),
        }
    }

    pub fn circuit_count(&self) -> usize {
        Self::device_count(self.kind, self.geometry)
    }

    /// Fraction of circuits saved relative to a pixel-parallel array.
    pub fn reduction(&self) -> f64 {
        let parallel = self.geometry.pixels();
        (parallel - self.circuit_count()) as f64 / parallel as f64
    }

    pub fn power_report(&self) -> f64 {
        self.circuit_count() as f64 * self.costs.per_circuit_power_w
    }

    pub fn area_report(&self) -> f64 {
        self.circuit_count() as f64 * self.costs.per_circuit_area_um2
    }

    pub fn frame_latency(&self) -> f64 {
        match self.kind {
            ArchitectureKind::PixelParallel => self.costs.row_settle_time_s,
            ArchitectureKind::ColumnSequential => {
                self.geometry.n_cols() as f64 * self.costs.row_settle_time_s
            }
        }
    }

    pub fn cost_report(&self) -> CostReport {
        CostReport {
            architecture: self.kind,
            n: self.geometry.n_rows(),
            m: self.geometry.n_cols(),
            circuits: self.circuit_count(),
            power_w: self.power_report(),
            area_um2: self.area_report(),
            latency_s: self.frame_latency(),
            reduction_percent: self.reduction() * 100.0,
        }
    }

    /// Runs every pixel pair through its circuit: `previous` feeds `V_r`,
    /// `current` feeds `V_in`. Output range is `[-v_dd, v_dd]`.
    pub fn process_frame_pair(
        &self,
        previous: &Frame,
        current: &Frame,
        config: &CircuitConfig,
    ) -> Result<Frame> {
        self.geometry.check_frame(previous)?;
        self.geometry.check_frame(current)?;
        config.validate()?;
        let (n, m) = (self.geometry.n_rows(), self.geometry.n_cols());
        let mut out = vec![0.0; n * m];
        match self.kind {
            ArchitectureKind::PixelParallel => {
                out.par_chunks_mut(m)
                    .enumerate()
                    .try_for_each(|(i, row)| -> Result<()> {
                        for (j, slot) in row.iter_mut().enumerate() {
                            let input = PixelPairInput::new(current.get(i, j), previous.get(i, j));
                            *slot = circuit::transfer(input, self.device_for(i, j), config)?;
                        }
                        Ok(())
                    })?;
            }
            ArchitectureKind::ColumnSequential => {
                let mut memory = AnalogRowMemory::new(n);
                for j in 0..m {
                    memory.write((0..n).map(|i| previous.get(i, j)))?;
                    let held = memory.read()?;
                    for (i, &v_r) in held.iter().enumerate() {
                        let input = PixelPairInput::new(current.get(i, j), v_r);
                        out[i * m + j] = circuit::transfer(input, &self.devices[i], config)?;
                    }
                }
            }
        }
        Ok(Frame::from_parts_unchecked(m, n, out, (-config.v_dd, config.v_dd)))
    }
}
