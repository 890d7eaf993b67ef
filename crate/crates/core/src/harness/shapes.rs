//! Procedural palm and fist silhouettes.

use rand::Rng;

use crate::cpdh::Gesture;
use crate::imgcore::{BinaryMask, Rect};

/// Silhouette size in pixels at scale 1 (wrist to fingertip of a palm).
pub const HAND_UNIT_PX: f64 = 90.0;

#[derive(Debug, Clone, Copy)]
struct Capsule {
    a: (f64, f64),
    b: (f64, f64),
    r: f64,
}

impl Capsule {
    fn contains(&self, p: (f64, f64)) -> bool {
        let (dx, dy) = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p.0 - self.a.0) * dx + (p.1 - self.a.1) * dy) / len2).clamp(0.0, 1.0)
        };
        let (qx, qy) = (self.a.0 + t * dx - p.0, self.a.1 + t * dy - p.1);
        qx * qx + qy * qy <= self.r * self.r
    }
}

#[derive(Debug, Clone, Copy)]
struct RoundedBox {
    center: (f64, f64),
    half: (f64, f64),
    r: f64,
}

impl RoundedBox {
    fn contains(&self, p: (f64, f64)) -> bool {
        let qx = ((p.0 - self.center.0).abs() - (self.half.0 - self.r)).max(0.0);
        let qy = ((p.1 - self.center.1).abs() - (self.half.1 - self.r)).max(0.0);
        qx * qx + qy * qy <= self.r * self.r
    }
}

/// Per-instance shape variation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeJitter {
    /// Radians, positive is clockwise on screen.
    pub rotation: f64,
    /// Extra finger fan, radians per finger step.
    pub spread: f64,
    /// Multipliers for thumb and four finger lengths.
    pub lengths: [f64; 5],
}

impl Default for ShapeJitter {
    fn default() -> Self {
        ShapeJitter {
            rotation: 0.0,
            spread: 0.0,
            lengths: [1.0; 5],
        }
    }
}

impl ShapeJitter {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut lengths = [1.0; 5];
        for l in &mut lengths {
            *l = rng.random_range(0.9..1.1);
        }
        ShapeJitter {
            rotation: rng.random_range(-0.15..0.15),
            spread: rng.random_range(-0.03..0.05),
            lengths,
        }
    }
}

/// A hand silhouette placed in image coordinates.
#[derive(Debug, Clone)]
pub struct Silhouette {
    center: (f64, f64),
    unit: f64,
    cos: f64,
    sin: f64,
    capsules: Vec<Capsule>,
    boxes: Vec<RoundedBox>,
}

impl Silhouette {
    /// `center` is the palm centre in pixels; `scale` multiplies
    /// [`HAND_UNIT_PX`].
    pub fn new(gesture: Gesture, center: (f64, f64), scale: f64, jitter: &ShapeJitter) -> Self {
        let wrist = RoundedBox {
            center: (0.0, 0.36),
            half: (0.16, 0.12),
            r: 0.03,
        };
        let (capsules, boxes) = match gesture {
            Gesture::Palm => {
                let body = RoundedBox {
                    center: (0.0, 0.1),
                    half: (0.24, 0.2),
                    r: 0.08,
                };
                let mut caps = Vec::new();
                let l = jitter.lengths;
                caps.push(Capsule {
                    a: (-0.2, 0.12),
                    b: polar_end((-0.2, 0.12), -1.0 - jitter.spread, 0.3 * l[0]),
                    r: 0.055,
                });
                let base_x = [-0.18, -0.06, 0.06, 0.18];
                let fan = [-1.5, -0.5, 0.5, 1.5];
                let len = [0.36, 0.42, 0.44, 0.36];
                for k in 0..4 {
                    let a = (base_x[k], -0.04);
                    let angle = fan[k] * (0.14 + jitter.spread);
                    caps.push(Capsule {
                        a,
                        b: polar_end(a, angle, len[k] * l[k + 1]),
                        r: 0.045,
                    });
                }
                (caps, vec![body, wrist])
            }
            Gesture::Fist => {
                let body = RoundedBox {
                    center: (0.0, 0.05),
                    half: (0.24, 0.22),
                    r: 0.1,
                };
                let mut caps: Vec<Capsule> = [-0.18, -0.06, 0.06, 0.18]
                    .iter()
                    .map(|&x| Capsule {
                        a: (x, -0.15),
                        b: (x, -0.15),
                        r: 0.07,
                    })
                    .collect();
                caps.push(Capsule {
                    a: (-0.25, 0.14),
                    b: (-0.22, -0.02 - 0.05 * (jitter.lengths[0] - 1.0)),
                    r: 0.065,
                });
                (caps, vec![body, wrist])
            }
        };
        let unit = HAND_UNIT_PX * scale;
        Silhouette {
            center,
            unit,
            cos: jitter.rotation.cos(),
            sin: jitter.rotation.sin(),
            capsules,
            boxes,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = ((x - self.center.0) / self.unit, (y - self.center.1) / self.unit);
        let p = (self.cos * dx + self.sin * dy, -self.sin * dx + self.cos * dy);
        self.boxes.iter().any(|b| b.contains(p)) || self.capsules.iter().any(|c| c.contains(p))
    }

    /// Pixels whose centres fall inside the silhouette, clipped to the canvas.
    pub fn rasterize(&self, width: usize, height: usize) -> BinaryMask {
        let mut mask = BinaryMask::new(width, height);
        let reach = self.unit;
        let x0 = (self.center.0 - reach).floor().max(0.0) as usize;
        let y0 = (self.center.1 - reach).floor().max(0.0) as usize;
        let x1 = ((self.center.0 + reach).ceil().max(0.0) as usize).min(width);
        let y1 = ((self.center.1 + reach).ceil().max(0.0) as usize).min(height);
        for y in y0..y1 {
            for x in x0..x1 {
                if self.contains(x as f64 + 0.5, y as f64 + 0.5) {
                    mask.set(x, y, true);
                }
            }
        }
        mask
    }

    pub fn bounding_box(&self, width: usize, height: usize) -> Option<Rect> {
        self.rasterize(width, height).bounding_box()
    }
}

// angle measured from straight up, clockwise on screen
fn polar_end(a: (f64, f64), angle: f64, len: f64) -> (f64, f64) {
    (a.0 + len * angle.sin(), a.1 - len * angle.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::connected_components;

    #[test]
    fn palm_is_taller_and_sparser_than_fist() {
        let palm = Silhouette::new(Gesture::Palm, (80.0, 90.0), 1.0, &ShapeJitter::default()).rasterize(160, 180);
        let fist = Silhouette::new(Gesture::Fist, (80.0, 90.0), 1.0, &ShapeJitter::default()).rasterize(160, 180);
        let (pb, fb) = (palm.bounding_box().unwrap(), fist.bounding_box().unwrap());
        assert!(pb.h > fb.h + 20, "{pb:?} vs {fb:?}");
        let fill = |m: &BinaryMask, b: Rect| m.count() as f64 / b.area() as f64;
        assert!(fill(&palm, pb) < fill(&fist, fb));
        assert_eq!(connected_components(&palm).len(), 1);
        assert_eq!(connected_components(&fist).len(), 1);
    }

    #[test]
    fn scale_scales_the_area() {
        let j = ShapeJitter::default();
        let a = Silhouette::new(Gesture::Fist, (100.0, 100.0), 0.7, &j).rasterize(200, 200).count() as f64;
        let b = Silhouette::new(Gesture::Fist, (100.0, 100.0), 1.3, &j).rasterize(200, 200).count() as f64;
        let ratio = b / a;
        assert!((ratio - (1.3f64 / 0.7).powi(2)).abs() < 0.15, "{ratio}");
    }

    #[test]
    fn clipping_at_the_border() {
        let s = Silhouette::new(Gesture::Palm, (0.0, 0.0), 1.0, &ShapeJitter::default());
        let m = s.rasterize(50, 50);
        assert!(m.count() > 0);
        assert!(m.get(0, 0));
    }
}
