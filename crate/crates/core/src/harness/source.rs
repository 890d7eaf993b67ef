use std::fs;
use std::path::{Path, PathBuf};

use super::pnm::read_pnm;
use crate::imgcore::Frame;
use crate::{Error, Result};

/// `frame_%06d.ppm` or `.pgm`.
pub fn frame_file_name(index: usize, color: bool) -> String {
    format!("frame_{index:06}.{}", if color { "ppm" } else { "pgm" })
}

fn parse_frame_name(name: &str) -> Option<usize> {
    let stem = name.strip_prefix("frame_")?;
    let (digits, ext) = stem.split_once('.')?;
    if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) || !matches!(ext, "ppm" | "pgm") {
        return None;
    }
    digits.parse().ok()
}

/// An ordered, gap-free run of frame files. Timestamps are `index / fps`.
#[derive(Debug, Clone)]
pub struct FrameSource {
    paths: Vec<PathBuf>,
    first_index: usize,
    fps: f64,
}

impl FrameSource {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }

    /// Reads frame `i` of the run (not the file index).
    pub fn read(&self, i: usize) -> Result<Frame> {
        let t = (self.first_index + i) as f64 / self.fps;
        Ok(read_pnm(&self.paths[i])?.with_timestamp(t))
    }

    /// Lazily reads every frame, checking that all share the first frame's
    /// dimensions.
    pub fn frames(&self) -> impl Iterator<Item = Result<Frame>> + '_ {
        let mut dims = None;
        (0..self.len()).map(move |i| {
            let f = self.read(i)?;
            match dims {
                None => dims = Some(f.dims()),
                Some(d) if d != f.dims() => {
                    return Err(Error::format(
                        &self.paths[i],
                        format!("frame is {:?}, expected {:?}", f.dims(), d),
                    ))
                }
                Some(_) => {}
            }
            Ok(f)
        })
    }

    pub fn read_all(&self) -> Result<Vec<Frame>> {
        self.frames().collect()
    }
}

/// Collects `frame_NNNNNN.ppm|pgm` files from `dir`, which must form a
/// contiguous index run starting at the smallest index present.
pub fn load_frames(dir: &Path, fps: f64) -> Result<FrameSource> {
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(Error::param(format!("fps must be positive, got {fps}")));
    }
    let mut found: Vec<(usize, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if let Some(i) = path.file_name().and_then(|n| n.to_str()).and_then(parse_frame_name) {
            found.push((i, path));
        }
    }
    found.sort();
    if found.is_empty() {
        return Err(Error::format(dir, "no frame_NNNNNN.ppm/.pgm files"));
    }
    let first_index = found[0].0;
    for (k, (i, path)) in found.iter().enumerate() {
        let expected = first_index + k;
        if *i != expected {
            if *i < expected {
                return Err(Error::format(path, "duplicate frame index"));
            }
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("ppm");
            return Err(Error::MissingFrame(dir.join(frame_file_name(expected, ext == "ppm"))));
        }
    }
    Ok(FrameSource {
        paths: found.into_iter().map(|(_, p)| p).collect(),
        first_index,
        fps,
    })
}
