//! Synthetic moving-rectangle scenes with exact ground truth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::frame::{Frame, Mask};
use crate::pipeline::frame_from_gray;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSceneSpec {
    pub geometry: ArrayGeometry,
    /// Object size as (rows, cols).
    pub object_size: (usize, usize),
    /// Top-left corner in frame 0. `None` picks a random position that keeps
    /// the object inside the frame for the whole sequence.
    pub start: Option<(usize, usize)>,
    /// Displacement per frame as (rows, cols).
    pub velocity: (i64, i64),
    pub frames: usize,
    pub foreground: u8,
    pub background: u8,
    /// Frame distance used for the ground-truth motion masks.
    pub delay: usize,
}

impl SyntheticSceneSpec {
    /// 64x64 frames, a 16x16 white square on black moving 2 px/frame to the
    /// right for 10 frames.
    pub fn standard() -> Self {
        Self {
            geometry: ArrayGeometry::new(64, 64).expect("non-zero geometry"),
            object_size: (16, 16),
            start: Some((24, 8)),
            velocity: (0, 2),
            frames: 10,
            foreground: 255,
            background: 0,
            delay: 1,
        }
    }

    fn position(&self, start: (usize, usize), t: usize) -> (i64, i64) {
        (
            start.0 as i64 + self.velocity.0 * t as i64,
            start.1 as i64 + self.velocity.1 * t as i64,
        )
    }

    fn fits(&self, start: (usize, usize)) -> Option<usize> {
        let (n, m) = (self.geometry.n_rows() as i64, self.geometry.n_cols() as i64);
        let (h, w) = (self.object_size.0 as i64, self.object_size.1 as i64);
        (0..self.frames).find(|&t| {
            let (r, c) = self.position(start, t);
            r < 0 || c < 0 || r + h > n || c + w > m
        })
    }

    fn footprint(&self, start: (usize, usize), t: usize) -> Mask {
        let (n, m) = (self.geometry.n_rows(), self.geometry.n_cols());
        let (r0, c0) = self.position(start, t);
        let (r0, c0) = (r0 as usize, c0 as usize);
        let mut mask = Mask::empty(m, n).expect("non-zero geometry");
        for i in r0..r0 + self.object_size.0 {
            for j in c0..c0 + self.object_size.1 {
                mask.set(i, j, true);
            }
        }
        mask
    }

    pub fn validate(&self) -> Result<()> {
        if self.object_size.0 == 0 || self.object_size.1 == 0 {
            return Err(Error::invalid("object size", "must be non-zero"));
        }
        if self.frames == 0 {
            return Err(Error::invalid("frames", "must be at least one"));
        }
        if self.delay == 0 {
            return Err(Error::invalid("delay", "must be at least one frame"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub frames: Vec<Frame>,
    /// `ground_truth[k]` is the motion mask between frames `k` and
    /// `k + delay`, aligned with the outputs of dynamic differencing.
    pub ground_truth: Vec<Mask>,
    pub start: (usize, usize),
}

/// Renders the scene. The RNG is consulted only when no start is given.
pub fn generate_scene<R: Rng + ?Sized>(spec: &SyntheticSceneSpec, rng: &mut R) -> Result<Scene> {
    spec.validate()?;
    let out_of_bounds = |frame| Error::SceneOutOfBounds {
        rows: spec.geometry.n_rows(),
        cols: spec.geometry.n_cols(),
        frame,
    };
    let start = match spec.start {
        Some(s) => {
            if let Some(t) = spec.fits(s) {
                return Err(out_of_bounds(t));
            }
            s
        }
        None => {
            let (n, m) = (spec.geometry.n_rows() as i64, spec.geometry.n_cols() as i64);
            let last = spec.frames as i64 - 1;
            let span = |len: i64, size: usize, v: i64| {
                let lo = (-v * last).max(0);
                let hi = len - size as i64 - (v * last).max(0);
                (lo, hi)
            };
            let (rlo, rhi) = span(n, spec.object_size.0, spec.velocity.0);
            let (clo, chi) = span(m, spec.object_size.1, spec.velocity.1);
            if rlo > rhi || clo > chi {
                return Err(out_of_bounds(spec.fits((0, 0)).unwrap_or(0)));
            }
            (rng.gen_range(rlo..=rhi) as usize, rng.gen_range(clo..=chi) as usize)
        }
    };

    let footprints: Vec<Mask> = (0..spec.frames).map(|t| spec.footprint(start, t)).collect();
    let frames = footprints
        .iter()
        .map(|fp| {
            let gray: Vec<u8> = fp
                .bits()
                .iter()
                .map(|&b| if b { spec.foreground } else { spec.background })
                .collect();
            frame_from_gray(fp.width(), fp.height(), &gray)
        })
        .collect::<Result<Vec<_>>>()?;
    let ground_truth = footprints
        .iter()
        .zip(footprints.iter().skip(spec.delay))
        .map(|(a, b)| {
            let bits = a.bits().iter().zip(b.bits()).map(|(x, y)| x != y).collect();
            Mask::new(a.width(), a.height(), bits)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scene {
        frames,
        ground_truth,
        start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::device_rng;

    fn spec(n: usize, m: usize, size: (usize, usize), velocity: (i64, i64), frames: usize) -> SyntheticSceneSpec {
        SyntheticSceneSpec {
            geometry: ArrayGeometry::new(n, m).unwrap(),
            object_size: size,
            start: Some((0, 0)),
            velocity,
            frames,
            foreground: 255,
            background: 0,
            delay: 1,
        }
    }

    #[test]
    fn still_object_has_empty_ground_truth() {
        let s = SyntheticSceneSpec { start: Some((3, 3)), ..spec(10, 10, (2, 2), (0, 0), 5) };
        let scene = generate_scene(&s, &mut device_rng(0)).unwrap();
        assert_eq!(scene.frames.len(), 5);
        assert_eq!(scene.ground_truth.len(), 4);
        assert!(scene.ground_truth.iter().all(|m| m.count() == 0));
    }

    #[test]
    fn single_pixel_object_leaves_two_pixels() {
        let scene = generate_scene(&spec(4, 8, (1, 1), (0, 1), 6), &mut device_rng(0)).unwrap();
        for (k, gt) in scene.ground_truth.iter().enumerate() {
            assert_eq!(gt.count(), 2);
            assert!(gt.get(0, k) && gt.get(0, k + 1));
        }
    }

    #[test]
    fn square_moving_two_columns_leaves_two_stripes() {
        let s = SyntheticSceneSpec { start: Some((4, 4)), ..spec(20, 20, (8, 8), (0, 2), 3) };
        let scene = generate_scene(&s, &mut device_rng(0)).unwrap();
        let gt = &scene.ground_truth[0];
        assert_eq!(gt.count(), 32);
        for i in 0..20 {
            for j in 0..20 {
                let expected = (4..12).contains(&i) && ((4..6).contains(&j) || (12..14).contains(&j));
                assert_eq!(gt.get(i, j), expected, "({i},{j})");
            }
        }
    }

    #[test]
    fn frames_render_intensities() {
        let scene = generate_scene(&spec(3, 3, (1, 1), (1, 1), 2), &mut device_rng(0)).unwrap();
        assert_eq!(scene.frames[0].get(0, 0), 1.0);
        assert_eq!(scene.frames[0].get(1, 1), 0.0);
        assert_eq!(scene.frames[1].get(1, 1), 1.0);
    }

    #[test]
    fn out_of_bounds_is_rejected() {
        let s = spec(8, 8, (4, 4), (0, 2), 4);
        assert!(matches!(
            generate_scene(&s, &mut device_rng(0)),
            Err(Error::SceneOutOfBounds { frame: 3, .. })
        ));
        let too_big = SyntheticSceneSpec { start: None, ..spec(8, 8, (4, 4), (0, 3), 4) };
        assert!(generate_scene(&too_big, &mut device_rng(0)).is_err());
    }

    #[test]
    fn random_start_is_seeded_and_in_bounds() {
        let s = SyntheticSceneSpec { start: None, ..spec(32, 32, (5, 5), (-1, 2), 6) };
        let a = generate_scene(&s, &mut device_rng(5)).unwrap();
        let b = generate_scene(&s, &mut device_rng(5)).unwrap();
        assert_eq!(a, b);
        for seed in 0..50 {
            generate_scene(&s, &mut device_rng(seed)).unwrap();
        }
    }

    #[test]
    fn standard_scene_shape() {
        let scene = generate_scene(&SyntheticSceneSpec::standard(), &mut device_rng(0)).unwrap();
        assert_eq!(scene.frames.len(), 10);
        assert_eq!(scene.ground_truth.len(), 9);
        assert!(scene.ground_truth.iter().all(|m| m.count() == 64));
    }
}
