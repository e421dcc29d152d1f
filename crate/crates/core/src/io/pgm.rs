//! Minimal PGM (portable graymap) codec: ASCII `P2` and binary `P5` in,
//! binary `P5` out.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{Frame, Mask};
use crate::pipeline::level_to_voltage;

/// A decoded graymap. Samples are stored widened to `u16`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl Graymap {
    pub fn to_frame(&self) -> Result<Frame> {
        let values = self
            .samples
            .iter()
            .map(|&s| level_to_voltage(s as u32, self.maxval as u32))
            .collect::<Result<Vec<_>>>()?;
        Frame::new(self.width, self.height, values, (0.0, 1.0))
    }

    /// Encodes as binary `P5`.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        if self.maxval < 256 {
            out.extend(self.samples.iter().map(|&s| s as u8));
        } else {
            out.extend(self.samples.iter().flat_map(|s| s.to_be_bytes()));
        }
        out
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Cursor<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::MalformedPgm {
            path: self.path.to_path_buf(),
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self.data.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn integer(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                let mut e = self.error(format!("{what} out of range"));
                if let Error::MalformedPgm { offset, .. } = &mut e {
                    *offset = start;
                }
                e
            })
    }
}

/// Decodes a `P2` or `P5` graymap. `path` is used only for diagnostics.
pub fn decode(data: &[u8], path: &Path) -> Result<Graymap> {
    let mut cur = Cursor { data, pos: 0, path };
    let binary = match data.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(cur.error("missing P2/P5 magic number")),
    };
    cur.pos = 2;
    let width = cur.integer("width")? as usize;
    let height = cur.integer("height")? as usize;
    let maxval = cur.integer("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.error(format!("zero dimension {width}x{height}")));
    }
    if maxval == 0 || maxval > u16::MAX as u32 {
        return Err(cur.error(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| cur.error("dimensions overflow"))?;
    let mut samples = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        match data.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(cur.error("expected whitespace after maxval")),
        }
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let need = count * bytes_per;
        let raster = data
            .get(cur.pos..cur.pos + need)
            .ok_or_else(|| cur.error(format!("raster truncated: need {need} bytes, have {}", data.len() - cur.pos)))?;
        for (k, chunk) in raster.chunks(bytes_per).enumerate() {
            let s = if bytes_per == 1 {
                chunk[0] as u16
            } else {
                u16::from_be_bytes([chunk[0], chunk[1]])
            };
            if s as u32 > maxval {
                cur.pos += k * bytes_per;
                return Err(cur.error(format!("sample {s} exceeds maxval {maxval}")));
            }
            samples.push(s);
        }
    } else {
        for _ in 0..count {
            let start = {
                cur.skip_whitespace_and_comments();
                cur.pos
            };
            let s = cur.integer("sample")?;
            if s > maxval {
                cur.pos = start;
                return Err(cur.error(format!("sample {s} exceeds maxval {maxval}")));
            }
            samples.push(s as u16);
        }
    }
    Ok(Graymap {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}

pub fn read_graymap(path: &Path) -> Result<Graymap> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&data, path)
}

/// Loads a sequence of same-sized graymaps as voltage frames.
pub fn load_sequence<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<Frame>> {
    let mut frames: Vec<Frame> = Vec::with_capacity(paths.len());
    for path in paths {
        let path = path.as_ref();
        let frame = read_graymap(path)?.to_frame()?;
        if let Some(first) = frames.first() {
            if (first.width(), first.height()) != (frame.width(), frame.height()) {
                return Err(Error::invalid(
                    "sequence",
                    format!(
                        "{}: {}x{} does not match the first frame's {}x{}",
                        path.display(),
                        frame.height(),
                        frame.width(),
                        first.height(),
                        first.width()
                    ),
                ));
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// How a frame's values are mapped to 8-bit gray levels on export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaveMode {
    /// `[-full_scale, +full_scale]` onto `[0, 255]` with 0 V at 128. Each
    /// half is linear, so both endpoints are reached exactly.
    SignedDifference { full_scale_millivolts: u32 },
    /// Non-zero values become 255.
    Mask,
    /// The frame's declared range onto `[0, 255]`.
    Raw,
}

impl SaveMode {
    /// Signed difference mode for the default ±3 V full-scale output.
    pub const DIFFERENCE: SaveMode = SaveMode::SignedDifference {
        full_scale_millivolts: 3000,
    };
}

pub fn frame_to_gray(frame: &Frame, mode: SaveMode) -> Vec<u8> {
    let quantize = |x: f64| x.round().clamp(0.0, 255.0) as u8;
    match mode {
        SaveMode::SignedDifference {
            full_scale_millivolts,
        } => {
            let fs = full_scale_millivolts as f64 / 1000.0;
            frame
                .values()
                .iter()
                .map(|v| {
                    let half = if *v < 0.0 { 128.0 } else { 127.0 };
                    quantize(128.0 + v / fs * half)
                })
                .collect()
        }
        SaveMode::Mask => frame.values().iter().map(|v| if *v != 0.0 { 255 } else { 0 }).collect(),
        SaveMode::Raw => {
            let (lo, hi) = frame.range();
            let span = hi - lo;
            frame
                .values()
                .iter()
                .map(|v| if span > 0.0 { quantize((v - lo) / span * 255.0) } else { 0 })
                .collect()
        }
    }
}

fn write_gray(width: usize, height: usize, gray: Vec<u8>, path: &Path) -> Result<()> {
    let map = Graymap {
        width,
        height,
        maxval: 255,
        samples: gray.into_iter().map(u16::from).collect(),
    };
    fs::write(path, map.encode()).map_err(|e| Error::io(PathBuf::from(path), e))
}

pub fn save_frame(frame: &Frame, path: &Path, mode: SaveMode) -> Result<()> {
    write_gray(frame.width(), frame.height(), frame_to_gray(frame, mode), path)
}

pub fn save_mask(mask: &Mask, path: &Path) -> Result<()> {
    let gray = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_gray(mask.width(), mask.height(), gray, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> &'static Path {
        Path::new("test.pgm")
    }

    #[test]
    fn decodes_ascii_with_comments() {
        let src = b"P2\n# a comment\n4 4\n# another\n255\n0 17 34 51\n68 85 102 119\n136 153 170 187\n204 221 238 255\n";
        let g = decode(src, p()).unwrap();
        assert_eq!((g.width, g.height, g.maxval), (4, 4, 255));
        let f = g.to_frame().unwrap();
        assert_eq!(f.values().len(), 16);
        assert_eq!(f.get(0, 0), 0.0);
        assert_eq!(f.get(3, 3), 1.0);
        assert!(f.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn decodes_binary_black() {
        let mut src = b"P5 3 2 255\n".to_vec();
        src.extend([0u8; 6]);
        let f = decode(&src, p()).unwrap().to_frame().unwrap();
        assert!(f.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn decodes_sixteen_bit() {
        let mut src = b"P5 2 1 65535\n".to_vec();
        src.extend([0xff, 0xff, 0x00, 0x00]);
        let g = decode(&src, p()).unwrap();
        assert_eq!(g.samples, vec![65535, 0]);
        assert_eq!(g.to_frame().unwrap().values(), &[1.0, 0.0]);
    }

    fn offset_of(r: Result<Graymap>) -> usize {
        match r {
            Err(Error::MalformedPgm { offset, path, .. }) => {
                assert_eq!(path, PathBuf::from("test.pgm"));
                offset
            }
            other => panic!("expected malformed header, got {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs_report_offsets() {
        assert_eq!(offset_of(decode(b"P6 1 1 255\n\0", p())), 0);
        assert_eq!(offset_of(decode(b"P2 4 x 255\n", p())), 5);
        assert_eq!(offset_of(decode(b"P2 1 1 0\n0", p())), 8);
        assert_eq!(offset_of(decode(b"P2 2 1 10\n3 11\n", p())), 12);
        assert_eq!(offset_of(decode(b"P5 2 2 255\n\0\0", p())), 11);
        assert_eq!(offset_of(decode(b"P5 1 1 255", p())), 10);
        let msg = decode(b"P2 1 1 255\n", p()).unwrap_err().to_string();
        assert!(msg.contains("test.pgm") && msg.contains("byte 11"), "{msg}");
    }

    #[test]
    fn difference_and_mask_levels() {
        let f = Frame::new(3, 1, vec![0.0, 3.0, -3.0], (-4.0, 4.0)).unwrap();
        assert_eq!(frame_to_gray(&f, SaveMode::DIFFERENCE), vec![128, 255, 0]);
        let m = Frame::new(2, 1, vec![1.0, 0.0], (0.0, 1.0)).unwrap();
        assert_eq!(frame_to_gray(&m, SaveMode::Mask), vec![255, 0]);
        let zero = Frame::filled(4, 4, 0.0, (-4.0, 4.0)).unwrap();
        assert!(frame_to_gray(&zero, SaveMode::DIFFERENCE).iter().all(|g| *g == 128));
    }

    proptest! {
        #[test]
        fn raw_round_trip_within_one_level(gray in proptest::collection::vec(any::<u8>(), 12)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("f.pgm");
            let ascii = format!(
                "P2\n4 3\n255\n{}\n",
                gray.iter().map(u8::to_string).collect::<Vec<_>>().join(" ")
            );
            fs::write(&path, ascii).unwrap();
            let frames = load_sequence(&[&path]).unwrap();
            save_frame(&frames[0], &path, SaveMode::Raw).unwrap();
            let back = read_graymap(&path).unwrap();
            prop_assert_eq!(back.maxval, 255);
            for (a, b) in gray.iter().zip(&back.samples) {
                prop_assert!((*a as i32 - *b as i32).abs() <= 1);
            }
        }
    }
}
