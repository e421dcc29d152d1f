//! Ideal-op-amp model of the two-stage differencing circuit.
//!
//! The first stage is a non-inverting amplifier with gain `1 + R2/R1`
//! applied to the input pixel. The second stage combines the amplified
//! input `V_a` with the reference pixel `V_r` through the memristor `R_m`:
//!
//! ```text
//! V_o = V_r (R4/R_m + R4/R3 + 1) - V_a R4/R_m
//! ```
//!
//! With the default component values this reduces to `3 V_r - 3 V_in` when
//! the memristor is at `Ron` and `2.01 V_r - 0.03 V_in` at `Roff`. Both
//! stages saturate at the symmetric supply rails `±V_DD`.

use serde::{Deserialize, Serialize};

use crate::device::MemristorDevice;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    /// Supply rail; outputs are clamped to `[-v_dd, v_dd]`.
    pub v_dd: f64,
    pub r_on: f64,
    pub r_off: f64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            r1: 1e3,
            r2: 2e3,
            r3: 1e3,
            r4: 1e3,
            v_dd: 4.0,
            r_on: 1e3,
            r_off: 100e3,
        }
    }
}

impl CircuitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r1", self.r1),
            ("r2", self.r2),
            ("r3", self.r3),
            ("r4", self.r4),
            ("v_dd", self.v_dd),
            ("r_on", self.r_on),
            ("r_off", self.r_off),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("{value} must be positive")));
            }
        }
        if self.r_off <= self.r_on {
            return Err(Error::invalid("r_off", "must exceed r_on"));
        }
        Ok(())
    }

    /// Gain of the non-inverting amplifier, `1 + R2/R1`.
    pub fn amplifier_gain(&self) -> f64 {
        1.0 + self.r2 / self.r1
    }

    /// Magnitude of the output for a full-scale (1 V) input step with a
    /// nominal `Ron` memristor: `gain * R4 / Ron`. This is 3 V by default.
    pub fn full_scale_difference(&self) -> f64 {
        self.amplifier_gain() * self.r4 / self.r_on
    }

    /// Default detection threshold: half of [`Self::full_scale_difference`].
    pub fn default_threshold(&self) -> f64 {
        0.5 * self.full_scale_difference()
    }

    /// A mismatch-free device with this configuration's nominal states.
    pub fn nominal_device(&self, state: crate::MemristorState) -> Result<MemristorDevice> {
        MemristorDevice::new(self.r_on, self.r_off, state)
    }
}

/// A current pixel and its reference, both already mapped to volts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPairInput {
    pub v_in: f64,
    pub v_r: f64,
}

impl PixelPairInput {
    pub fn new(v_in: f64, v_r: f64) -> Self {
        Self { v_in, v_r }
    }
}

pub fn clamp_to_rails(v: f64, config: &CircuitConfig) -> f64 {
    v.clamp(-config.v_dd, config.v_dd)
}

/// `V_a = V_in (1 + R2/R1)`, saturated at the rails.
pub fn amplifier_stage(v_in: f64, config: &CircuitConfig) -> f64 {
    clamp_to_rails(v_in * config.amplifier_gain(), config)
}

/// The memristive difference stage, unclamped.
pub fn difference_stage(v_a: f64, v_r: f64, r_m: f64, config: &CircuitConfig) -> Result<f64> {
    if !(r_m.is_finite() && r_m > 0.0) {
        return Err(Error::invalid("r_m", format!("{r_m} must be positive")));
    }
    let k = config.r4 / r_m;
    Ok(v_r * (k + config.r4 / config.r3 + 1.0) - v_a * k)
}

/// Full circuit: amplifier, difference stage with the device's effective
/// resistance, then rail clamping.
pub fn transfer(
    input: PixelPairInput,
    device: &MemristorDevice,
    config: &CircuitConfig,
) -> Result<f64> {
    let v_a = amplifier_stage(input.v_in, config);
    let v_o = difference_stage(v_a, input.v_r, device.effective_resistance(), config)?;
    Ok(clamp_to_rails(v_o, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MemristorState::{HighResistance, LowResistance};
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn cfg() -> CircuitConfig {
        CircuitConfig::default()
    }

    fn ron() -> MemristorDevice {
        cfg().nominal_device(LowResistance).unwrap()
    }

    fn roff() -> MemristorDevice {
        cfg().nominal_device(HighResistance).unwrap()
    }

    fn t(v_in: f64, v_r: f64, d: &MemristorDevice) -> f64 {
        transfer(PixelPairInput::new(v_in, v_r), d, &cfg()).unwrap()
    }

    #[test]
    fn amplifier_examples() {
        assert_eq!(amplifier_stage(0.0, &cfg()), 0.0);
        assert!((amplifier_stage(1.0, &cfg()) - 3.0).abs() < TOL);
        assert!((amplifier_stage(0.4, &cfg()) - 1.2).abs() < TOL);
        assert_eq!(amplifier_stage(2.0, &cfg()), 4.0);
    }

    #[test]
    fn difference_stage_examples() {
        assert!(difference_stage(3.0, 1.0, 1e3, &cfg()).unwrap().abs() < TOL);
        assert_eq!(difference_stage(0.0, 0.0, 1e3, &cfg()).unwrap(), 0.0);
        // 1 * (0.01 + 1 + 1) - 1.5 * 0.01
        let v = difference_stage(1.5, 1.0, 100e3, &cfg()).unwrap();
        assert!((v - 1.995).abs() < TOL);
        assert!((v - (2.01 * 1.0 - 0.03 * 0.5)).abs() < TOL);
    }

    #[test]
    fn difference_stage_rejects_non_positive_memristance() {
        assert!(difference_stage(1.0, 1.0, 0.0, &cfg()).is_err());
        assert!(difference_stage(1.0, 1.0, -5.0, &cfg()).is_err());
    }

    #[test]
    fn transfer_examples() {
        assert!(t(1.0, 1.0, &ron()).abs() < TOL);
        assert!((t(0.0, 1.0, &ron()) - 3.0).abs() < TOL);
        assert!((t(1.0, 1.0, &roff()) - 1.98).abs() < TOL);
        // 3 * 0.2 - 3 * 0.8 = -1.8 stays inside the ±4 V rails
        assert!((t(0.8, 0.2, &ron()) + 1.8).abs() < TOL);
    }

    #[test]
    fn transfer_saturates() {
        let weak = MemristorDevice::with_mismatch(1e3, 1e5, LowResistance, 0.5).unwrap();
        // unclamped: 1 * (2 + 2) - 0 = 4 exactly at the rail; -6 below it
        assert_eq!(t(1.0, 0.0, &weak), -4.0);
        assert!((t(0.0, 1.0, &weak) - 4.0).abs() < TOL);
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_to_rails(10.0, &cfg()), 4.0);
        assert_eq!(clamp_to_rails(-10.0, &cfg()), -4.0);
        assert_eq!(clamp_to_rails(1.5, &cfg()), 1.5);
    }

    #[test]
    fn default_threshold_is_half_full_scale() {
        assert!((cfg().full_scale_difference() - 3.0).abs() < TOL);
        assert!((cfg().default_threshold() - 1.5).abs() < TOL);
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        assert!(CircuitConfig { r3: 0.0, ..cfg() }.validate().is_err());
        assert!(CircuitConfig { v_dd: -1.0, ..cfg() }.validate().is_err());
        assert!(CircuitConfig { r_off: 500.0, ..cfg() }.validate().is_err());
    }

    #[test]
    fn roff_slope_is_one_hundredth_of_ron() {
        let ron_slope = t(1.0, 1.0, &ron()) - t(0.0, 1.0, &ron());
        let roff_slope = t(1.0, 1.0, &roff()) - t(0.0, 1.0, &roff());
        assert!((ron_slope + 3.0).abs() < TOL);
        assert!((roff_slope + 0.03).abs() < TOL);
        assert!((roff_slope / ron_slope - 0.01).abs() < TOL);
    }

    proptest! {
        #[test]
        fn matches_closed_forms(v_in in 0.0f64..=1.0, v_r in 0.0f64..=1.0) {
            prop_assert!((t(v_in, v_r, &ron()) - (3.0 * v_r - 3.0 * v_in)).abs() < TOL);
            prop_assert!((t(v_in, v_r, &roff()) - (2.01 * v_r - 0.03 * v_in)).abs() < TOL);
        }

        #[test]
        fn ron_difference_is_antisymmetric(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            prop_assert!((t(x, y, &ron()) + t(y, x, &ron())).abs() < TOL);
        }

        #[test]
        fn affine_before_clamping(
            a in (0.0f64..=1.0, 0.0f64..=1.0),
            b in (0.0f64..=1.0, 0.0f64..=1.0),
            alpha in 0.0f64..=1.0,
            mismatch in 0.7f64..=1.3,
        ) {
            // |V_o| ≤ 1/0.7 + 2 < 4 over this box, so nothing clamps
            let d = MemristorDevice::with_mismatch(1e3, 1e5, LowResistance, mismatch).unwrap();
            let mix = (alpha * a.0 + (1.0 - alpha) * b.0, alpha * a.1 + (1.0 - alpha) * b.1);
            let lhs = t(mix.0, mix.1, &d);
            let rhs = alpha * t(a.0, a.1, &d) + (1.0 - alpha) * t(b.0, b.1, &d);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn monotone_and_rail_bounded(
            v_in in -2.0f64..=2.0,
            v_r in -2.0f64..=2.0,
            dv in 0.0f64..=1.0,
            mismatch in 0.01f64..=1.99,
            high in any::<bool>(),
        ) {
            let state = if high { HighResistance } else { LowResistance };
            let d = MemristorDevice::with_mismatch(1e3, 1e5, state, mismatch).unwrap();
            let base = t(v_in, v_r, &d);
            prop_assert!(t(v_in + dv, v_r, &d) <= base + 1e-12);
            prop_assert!(t(v_in, v_r + dv, &d) >= base - 1e-12);
            prop_assert!(base.abs() <= cfg().v_dd);
        }
    }
}
