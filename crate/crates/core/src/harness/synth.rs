//! Seeded synthetic scenarios: a static scene, optional face patch and
//! palm/fist actors, rendered with per-frame noise.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pnm::{write_pnm, PnmEncoding};
use super::shapes::{ShapeJitter, Silhouette};
use super::source::frame_file_name;
use super::truth::{format_intervals, format_truth, Interval, TruthRow};
use crate::cpdh::Gesture;
use crate::imgcore::{hsv_to_rgb, BinaryMask, Frame, Rect};
use crate::{par, Error, Result};

const TRAIN_STREAM: u64 = 1 << 40;
const MASK_STREAM: u64 = 2 << 40;
const EVENT_STREAM: u64 = 3 << 40;
const TEXTURE_STREAM: u64 = 4 << 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Background {
    Flat { color: [u8; 3] },
    Textured { seed: u64 },
}

impl Default for Background {
    fn default() -> Self {
        Background::Textured { seed: 1 }
    }
}

/// Static skin-coloured ellipse standing in for a face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacePatch {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    #[serde(default = "default_hue")]
    pub hue: f64,
}

impl FacePatch {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.w, self.h)
    }
}

/// A hand shown from frame `t_start` to `t_end` inclusive, moving along
/// `trajectory` (palm centres, evenly spread over the event).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorEvent {
    pub t_start: usize,
    pub t_end: usize,
    pub shape: Gesture,
    pub trajectory: Vec<[f64; 2]>,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "default_hue")]
    pub hue: f64,
    #[serde(default = "default_saturation")]
    pub saturation: f64,
    #[serde(default = "default_value")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default = "default_height")]
    pub height: usize,
    #[serde(default = "default_fps")]
    pub fps: f64,
    /// Number of scenario frames.
    pub duration: usize,
    /// Actor-free frames for background training.
    #[serde(default = "default_train_frames")]
    pub train_frames: usize,
    /// Uniform per-channel noise amplitude, grey levels.
    #[serde(default = "default_noise")]
    pub noise_amp: u8,
    #[serde(default)]
    pub background: Background,
    #[serde(default)]
    pub face: Option<FacePatch>,
    /// Labelled silhouette masks to write for database building.
    #[serde(default)]
    pub mask_samples: usize,
    #[serde(default, rename = "event")]
    pub events: Vec<ActorEvent>,
}

fn one() -> f64 {
    1.0
}
fn default_hue() -> f64 {
    20.0
}
fn default_saturation() -> f64 {
    140.0
}
fn default_value() -> f64 {
    210.0
}
fn default_width() -> usize {
    320
}
fn default_height() -> usize {
    240
}
fn default_fps() -> f64 {
    10.0
}
fn default_train_frames() -> usize {
    90
}
fn default_noise() -> u8 {
    4
}

impl ScenarioSpec {
    pub fn new(duration: usize) -> Self {
        ScenarioSpec {
            width: default_width(),
            height: default_height(),
            fps: default_fps(),
            duration,
            train_frames: default_train_frames(),
            noise_amp: default_noise(),
            background: Background::default(),
            face: None,
            mask_samples: 0,
            events: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 16 || self.height < 16 {
            return Err(Error::param("frames must be at least 16x16"));
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(Error::param("fps must be positive"));
        }
        if self.duration == 0 {
            return Err(Error::param("duration must be >= 1 frame"));
        }
        if let Some(f) = &self.face {
            if !f.rect().fits_in(self.width, self.height) || f.w == 0 || f.h == 0 {
                return Err(Error::param("face patch must lie inside the frame"));
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            if e.t_start > e.t_end || e.t_end >= self.duration {
                return Err(Error::param(format!(
                    "event {i}: frames {}..={} outside 0..{}",
                    e.t_start, e.t_end, self.duration
                )));
            }
            if !(e.scale > 0.0) || e.trajectory.is_empty() {
                return Err(Error::param(format!("event {i}: needs scale > 0 and a trajectory")));
            }
        }
        Ok(())
    }

    /// Palm events as `[t_start / fps, t_end / fps]`.
    pub fn raise_intervals(&self) -> Vec<Interval> {
        self.events
            .iter()
            .filter(|e| e.shape == Gesture::Palm)
            .map(|e| Interval::new(e.t_start as f64 / self.fps, e.t_end as f64 / self.fps))
            .collect()
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn skin_rgb(hue: f64, saturation: f64, value: f64) -> [u8; 3] {
    hsv_to_rgb(hue, saturation, value)
}

/// A pure renderer for one scenario and seed.
pub struct Scenario {
    spec: ScenarioSpec,
    seed: u64,
    background: Frame,
    jitters: Vec<ShapeJitter>,
}

impl Scenario {
    pub fn new(spec: ScenarioSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let background = render_background(&spec);
        let jitters = (0..spec.events.len())
            .map(|i| ShapeJitter::random(&mut rng_for(seed, EVENT_STREAM + i as u64)))
            .collect();
        Ok(Scenario {
            spec,
            seed,
            background,
            jitters,
        })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    /// The noise-free static scene.
    pub fn background(&self) -> &Frame {
        &self.background
    }

    fn noisy(&self, mut frame: Frame, stream: u64) -> Frame {
        let amp = self.spec.noise_amp as i16;
        if amp > 0 {
            let mut rng = rng_for(self.seed, stream);
            for v in frame.data_mut() {
                let n: i16 = rng.random_range(-amp..=amp);
                *v = (*v as i16 + n).clamp(0, 255) as u8;
            }
        }
        frame
    }

    pub fn train_frame(&self, i: usize) -> Frame {
        self.noisy(self.background.clone(), TRAIN_STREAM + i as u64)
            .with_timestamp(i as f64 / self.spec.fps)
    }

    fn active_event(&self, i: usize) -> Option<usize> {
        self.spec
            .events
            .iter()
            .rposition(|e| e.t_start <= i && i <= e.t_end)
    }

    fn silhouette(&self, k: usize, i: usize) -> Silhouette {
        let e = &self.spec.events[k];
        let span = (e.t_end - e.t_start) as f64;
        let p = if span > 0.0 { (i - e.t_start) as f64 / span } else { 0.0 };
        let pts = &e.trajectory;
        let center = if pts.len() == 1 {
            pts[0]
        } else {
            let pos = p * (pts.len() - 1) as f64;
            let seg = (pos.floor() as usize).min(pts.len() - 2);
            let f = pos - seg as f64;
            [
                pts[seg][0] + f * (pts[seg + 1][0] - pts[seg][0]),
                pts[seg][1] + f * (pts[seg + 1][1] - pts[seg][1]),
            ]
        };
        Silhouette::new(e.shape, (center[0], center[1]), e.scale, &self.jitters[k])
    }

    /// Actor silhouette in frame `i`, if any.
    pub fn actor_mask(&self, i: usize) -> Option<(Gesture, BinaryMask)> {
        let k = self.active_event(i)?;
        let mask = self.silhouette(k, i).rasterize(self.spec.width, self.spec.height);
        Some((self.spec.events[k].shape, mask))
    }

    /// Scenario frame `i` with its ground truth.
    pub fn frame(&self, i: usize) -> (Frame, TruthRow) {
        let mut frame = self.background.clone();
        let mut row = TruthRow {
            index: i,
            label: None,
            bbox: None,
        };
        if let Some((gesture, mask)) = self.actor_mask(i) {
            let e = &self.spec.events[self.active_event(i).expect("active")];
            let rgb = skin_rgb(e.hue, e.saturation, e.value);
            for (p, &on) in frame.data_mut().chunks_exact_mut(3).zip(mask.bits()) {
                if on {
                    p.copy_from_slice(&rgb);
                }
            }
            row.bbox = mask.bounding_box();
            row.label = row.bbox.map(|_| gesture);
        }
        let frame = self.noisy(frame, i as u64).with_timestamp(i as f64 / self.spec.fps);
        (frame, row)
    }

    pub fn truth(&self) -> Vec<TruthRow> {
        par::map_range(self.spec.duration, |i| self.frame(i).1)
    }
}

fn render_background(spec: &ScenarioSpec) -> Frame {
    let (w, h) = (spec.width, spec.height);
    let mut data = vec![0u8; w * h * 3];
    match spec.background {
        Background::Flat { color } => {
            for p in data.chunks_exact_mut(3) {
                p.copy_from_slice(&color);
            }
        }
        Background::Textured { seed } => {
            let mut rng = rng_for(seed, TEXTURE_STREAM);
            let waves: Vec<(f64, f64, f64, f64)> = (0..4)
                .map(|_| {
                    (
                        rng.random_range(0.01..0.06),
                        rng.random_range(0.01..0.06),
                        rng.random_range(0.0..std::f64::consts::TAU),
                        rng.random_range(4.0..10.0),
                    )
                })
                .collect();
            for y in 0..h {
                for x in 0..w {
                    let shade: f64 = waves
                        .iter()
                        .map(|&(fx, fy, ph, amp)| amp * (fx * x as f64 + fy * y as f64 + ph).sin())
                        .sum();
                    let d: f64 = rng.random_range(-2.0..2.0);
                    let base = [88.0, 100.0, 122.0];
                    let i = (y * w + x) * 3;
                    for c in 0..3 {
                        data[i + c] = (base[c] + shade + d).round().clamp(0.0, 255.0) as u8;
                    }
                }
            }
        }
    }
    let mut frame = Frame::rgb(w, h, data).expect("sized buffer");
    if let Some(face) = &spec.face {
        let rgb = skin_rgb(face.hue, 120.0, 190.0);
        let (cx, cy) = (face.x as f64 + face.w as f64 / 2.0, face.y as f64 + face.h as f64 / 2.0);
        let (rx, ry) = (face.w as f64 / 2.0, face.h as f64 / 2.0);
        let data = frame.data_mut();
        for y in face.y..face.y + face.h {
            for x in face.x..face.x + face.w {
                let (dx, dy) = ((x as f64 + 0.5 - cx) / rx, (y as f64 + 0.5 - cy) / ry);
                if dx * dx + dy * dy <= 1.0 {
                    let i = (y * w + x) * 3;
                    data[i..i + 3].copy_from_slice(&rgb);
                }
            }
        }
    }
    frame
}

/// `count` labelled masks alternating palm and fist, each on a
/// `size x size` canvas with random scale in `[0.7, 1.3]`, placement,
/// rotation and finger variation.
pub fn sample_masks(count: usize, seed: u64, size: usize) -> Vec<(BinaryMask, Gesture)> {
    par::map_range(count, |i| {
        let mut rng = rng_for(seed, MASK_STREAM + i as u64);
        let gesture = Gesture::ALL[i % 2];
        let scale = rng.random_range(0.7..=1.3);
        let margin = size as f64 * 0.08;
        let center = (
            size as f64 / 2.0 + rng.random_range(-margin..=margin),
            size as f64 * 0.53 + rng.random_range(-margin..=margin),
        );
        let jitter = ShapeJitter::random(&mut rng);
        (Silhouette::new(gesture, center, scale, &jitter).rasterize(size, size), gesture)
    })
}

/// Canvas side used for database masks.
pub const MASK_CANVAS: usize = 180;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSummary {
    pub frames: usize,
    pub train_frames: usize,
    pub masks: usize,
    pub raises: Vec<Interval>,
}

/// Writes `frames/`, `train/`, `masks/` (when `mask_samples > 0`),
/// `truth.tsv`, `raises.tsv` and a copy of the spec to `out`.
pub fn gen_synthetic(spec: &ScenarioSpec, seed: u64, out: &Path) -> Result<SynthSummary> {
    let scenario = Scenario::new(spec.clone(), seed)?;
    let frames_dir = out.join("frames");
    let train_dir = out.join("train");
    fs::create_dir_all(&frames_dir)?;
    fs::create_dir_all(&train_dir)?;
    let truth = par::map_range(spec.duration, |i| -> Result<TruthRow> {
        let (frame, row) = scenario.frame(i);
        write_pnm(&frames_dir.join(frame_file_name(i, true)), &frame, PnmEncoding::Binary)?;
        Ok(row)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    par::map_range(spec.train_frames, |i| {
        write_pnm(
            &train_dir.join(frame_file_name(i, true)),
            &scenario.train_frame(i),
            PnmEncoding::Binary,
        )
    })
    .into_iter()
    .collect::<Result<()>>()?;
    if spec.mask_samples > 0 {
        let masks_dir = out.join("masks");
        fs::create_dir_all(&masks_dir)?;
        let masks = sample_masks(spec.mask_samples, seed, MASK_CANVAS);
        for (i, (mask, g)) in masks.iter().enumerate() {
            write_pnm(&masks_dir.join(format!("{g}_{i:04}.pgm")), &mask.to_gray(), PnmEncoding::Binary)?;
        }
    }
    let raises = spec.raise_intervals();
    fs::write(out.join("truth.tsv"), format_truth(&truth))?;
    fs::write(out.join("raises.tsv"), format_intervals(&raises))?;
    fs::write(out.join("scenario.toml"), spec.to_toml())?;
    Ok(SynthSummary {
        frames: spec.duration,
        train_frames: spec.train_frames,
        masks: spec.mask_samples,
        raises,
    })
}
