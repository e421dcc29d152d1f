//! Two-state memristor model with multiplicative programming mismatch.
//!
//! A device is programmed to either its low (`Ron`) or high (`Roff`)
//! resistance state. Programming is imperfect: each device carries a single
//! mismatch factor, sampled once when the device is built, which scales
//! whichever nominal resistance is currently selected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemristorState {
    /// `Ron`: the circuit computes a pixel difference.
    LowResistance,
    /// `Roff`: the circuit preserves the reference pixel.
    HighResistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemristorDevice {
    r_on_nominal: f64,
    r_off_nominal: f64,
    state: MemristorState,
    mismatch: f64,
}

impl MemristorDevice {
    /// Builds an ideal device (mismatch of exactly 1).
    pub fn new(r_on_nominal: f64, r_off_nominal: f64, state: MemristorState) -> Result<Self> {
        Self::with_mismatch(r_on_nominal, r_off_nominal, state, 1.0)
    }

    pub fn with_mismatch(
        r_on_nominal: f64,
        r_off_nominal: f64,
        state: MemristorState,
        mismatch: f64,
    ) -> Result<Self> {
        if !(r_on_nominal.is_finite() && r_on_nominal > 0.0) {
            return Err(Error::invalid("r_on", format!("{r_on_nominal} must be positive")));
        }
        if !(r_off_nominal.is_finite() && r_off_nominal > r_on_nominal) {
            return Err(Error::invalid(
                "r_off",
                format!("{r_off_nominal} must exceed r_on = {r_on_nominal}"),
            ));
        }
        if !(mismatch.is_finite() && mismatch > 0.0) {
            return Err(Error::invalid("mismatch", format!("{mismatch} must be positive")));
        }
        Ok(Self {
            r_on_nominal,
            r_off_nominal,
            state,
            mismatch,
        })
    }

    /// Reprograms the device. Nominal values and mismatch are kept.
    #[must_use]
    pub fn program(self, state: MemristorState) -> Self {
        Self { state, ..self }
    }

    pub fn effective_resistance(&self) -> f64 {
        let nominal = match self.state {
            MemristorState::LowResistance => self.r_on_nominal,
            MemristorState::HighResistance => self.r_off_nominal,
        };
        nominal * self.mismatch
    }

    pub fn state(&self) -> MemristorState {
        self.state
    }

    pub fn mismatch(&self) -> f64 {
        self.mismatch
    }

    pub fn r_on_nominal(&self) -> f64 {
        self.r_on_nominal
    }

    pub fn r_off_nominal(&self) -> f64 {
        self.r_off_nominal
    }
}

/// Checks that a variation fraction lies in `[0, 1)`.
pub fn validate_variation(variation_fraction: f64) -> Result<()> {
    if (0.0..1.0).contains(&variation_fraction) {
        Ok(())
    } else {
        Err(Error::invalid(
            "variation fraction",
            format!("{variation_fraction} is outside [0, 1)"),
        ))
    }
}

/// Draws one mismatch factor uniformly from `[1 - p, 1 + p]`.
pub fn sample_mismatch<R: Rng + ?Sized>(rng: &mut R, variation_fraction: f64) -> Result<f64> {
    validate_variation(variation_fraction)?;
    // Always consume one draw so the stream position depends only on the draw count.
    let unit: f64 = rng.gen();
    Ok(1.0 - variation_fraction + 2.0 * variation_fraction * unit)
}

/// The random stream used for device sampling.
pub fn device_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Samples `count` devices in `state` from one seeded stream.
///
/// Device `k` always receives the `k`-th draw, so two populations built from
/// the same seed agree on their common prefix.
pub fn sample_devices(
    count: usize,
    r_on_nominal: f64,
    r_off_nominal: f64,
    state: MemristorState,
    variation_fraction: f64,
    seed: u64,
) -> Result<Vec<MemristorDevice>> {
    validate_variation(variation_fraction)?;
    let mut rng = device_rng(seed);
    (0..count)
        .map(|_| {
            let mismatch = sample_mismatch(&mut rng, variation_fraction)?;
            MemristorDevice::with_mismatch(r_on_nominal, r_off_nominal, state, mismatch)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use MemristorState::{HighResistance, LowResistance};

    fn dev(state: MemristorState, mismatch: f64) -> MemristorDevice {
        MemristorDevice::with_mismatch(1e3, 100e3, state, mismatch).unwrap()
    }

    #[test]
    fn program_switches_state_only() {
        assert_eq!(dev(HighResistance, 1.0).program(LowResistance).state(), LowResistance);
        assert_eq!(dev(LowResistance, 1.0).program(LowResistance), dev(LowResistance, 1.0));
        let d = dev(HighResistance, 1.1).program(LowResistance);
        assert_eq!(d.mismatch(), 1.1);
        assert_eq!(d.r_on_nominal(), 1e3);
        assert_eq!(d.r_off_nominal(), 100e3);
    }

    #[test]
    fn effective_resistance_examples() {
        assert_eq!(dev(LowResistance, 1.0).effective_resistance(), 1000.0);
        assert_eq!(dev(HighResistance, 1.0).effective_resistance(), 100_000.0);
        assert!((dev(LowResistance, 1.3).effective_resistance() - 1300.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_nominals() {
        assert!(MemristorDevice::new(0.0, 1e3, LowResistance).is_err());
        assert!(MemristorDevice::new(1e3, 1e3, LowResistance).is_err());
        assert!(MemristorDevice::new(1e3, 500.0, LowResistance).is_err());
        assert!(MemristorDevice::with_mismatch(1e3, 1e5, LowResistance, 0.0).is_err());
    }

    #[test]
    fn zero_variation_is_exactly_one() {
        let mut rng = device_rng(7);
        for _ in 0..1000 {
            assert_eq!(sample_mismatch(&mut rng, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn rejects_variation_of_one_or_more() {
        let mut rng = device_rng(0);
        assert!(sample_mismatch(&mut rng, 1.0).is_err());
        assert!(sample_mismatch(&mut rng, 1.5).is_err());
        assert!(sample_mismatch(&mut rng, -0.1).is_err());
        assert!(sample_mismatch(&mut rng, f64::NAN).is_err());
    }

    #[test]
    fn same_seed_same_sequence() {
        let a = sample_devices(64, 1e3, 1e5, LowResistance, 0.5, 42).unwrap();
        let b = sample_devices(64, 1e3, 1e5, LowResistance, 0.5, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_devices(64, 1e3, 1e5, LowResistance, 0.5, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shorter_population_is_a_prefix() {
        let long = sample_devices(100, 1e3, 1e5, LowResistance, 0.3, 9).unwrap();
        let short = sample_devices(10, 1e3, 1e5, LowResistance, 0.3, 9).unwrap();
        assert_eq!(&long[..10], &short[..]);
    }

    #[test]
    fn hundred_thousand_draws_stay_in_bounds() {
        for &p in &[0.1, 0.3, 0.5, 0.999] {
            let mut rng = device_rng(1234);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..100_000 {
                let m = sample_mismatch(&mut rng, p).unwrap();
                assert!((1.0 - p..=1.0 + p).contains(&m), "p={p} m={m}");
                lo = lo.min(m);
                hi = hi.max(m);
            }
            // uniform draws should cover nearly the whole interval
            assert!(lo < 1.0 - 0.99 * p && hi > 1.0 + 0.99 * p);
        }
    }

    proptest! {
        #[test]
        fn sampled_mismatch_within_bounds(seed in any::<u64>(), p in 0.0f64..0.999) {
            let mut rng = device_rng(seed);
            for _ in 0..200 {
                let m = sample_mismatch(&mut rng, p).unwrap();
                prop_assert!(m >= 1.0 - p && m <= 1.0 + p);
                let d = dev(LowResistance, m);
                prop_assert!(d.effective_resistance() > 0.0);
                prop_assert_eq!(d.program(HighResistance).effective_resistance(), 100e3 * m);
                prop_assert_eq!(d.program(HighResistance).program(LowResistance).effective_resistance(), 1e3 * m);
            }
        }
    }
}
