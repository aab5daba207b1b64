//! Procedural stand-in for the animal-silhouette dataset: 12 binary 28x28
//! images, four variants each of bird, cat and dog. Variants of a class
//! share the gross shape (so classes separate) and differ in pose, scale
//! and mirroring (so individuals separate).

use super::{LabeledImage, CLASS_NAMES, VARIANTS_PER_CLASS};
use crate::encoder::{IMAGE_PIXELS, IMAGE_SIDE};
use crate::numerics::Rng;

/// Jitter and pose knobs for one drawn variant.
struct Pose {
    dx: f64,
    dy: f64,
    scale: f64,
    aspect: f64,
    flip: bool,
    /// Primary pose accent (wing angle, tail sweep, ear droop), 0..1.
    accent: f64,
}

impl Pose {
    fn sample(rng: &mut Rng, variant: usize) -> Pose {
        Pose {
            dx: rng.uniform(-1.6, 1.6).unwrap(),
            dy: rng.uniform(-1.4, 1.4).unwrap(),
            scale: rng.uniform(0.85, 1.12).unwrap(),
            aspect: rng.uniform(0.9, 1.1).unwrap(),
            flip: variant % 2 == 1,
            // Spread the accents systematically across variants and add a
            // little noise so no two variants share a pose.
            accent: 0.12 + 0.27 * variant as f64 + rng.uniform(0.0, 0.08).unwrap(),
        }
    }

    fn point(&self, x: f64, y: f64) -> (f64, f64) {
        let centered_x = if self.flip { 28.0 - x - 14.0 } else { x - 14.0 };
        (
            14.0 + centered_x * self.scale + self.dx,
            14.0 + (y - 14.0) * self.scale + self.dy,
        )
    }
}

struct Canvas {
    pixels: Vec<f64>,
}

impl Canvas {
    fn new() -> Canvas {
        Canvas {
            pixels: vec![0.0; IMAGE_PIXELS],
        }
    }

    fn paint(&mut self, mut inside: impl FnMut(f64, f64) -> bool) {
        for row in 0..IMAGE_SIDE {
            for col in 0..IMAGE_SIDE {
                // Sample at pixel centers.
                if inside(col as f64 + 0.5, row as f64 + 0.5) {
                    self.pixels[row * IMAGE_SIDE + col] = 1.0;
                }
            }
        }
    }

    fn ellipse(&mut self, pose: &Pose, cx: f64, cy: f64, rx: f64, ry: f64) {
        let (cx, cy) = pose.point(cx, cy);
        let rx = rx * pose.scale * pose.aspect;
        let ry = ry * pose.scale;
        self.paint(|x, y| {
            let nx = (x - cx) / rx;
            let ny = (y - cy) / ry;
            nx * nx + ny * ny <= 1.0
        });
    }

    fn triangle(&mut self, pose: &Pose, a: (f64, f64), b: (f64, f64), c: (f64, f64)) {
        let a = pose.point(a.0, a.1);
        let b = pose.point(b.0, b.1);
        let c = pose.point(c.0, c.1);
        let cross = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
            (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
        };
        self.paint(|x, y| {
            let p = (x, y);
            let d1 = cross(a, b, p);
            let d2 = cross(b, c, p);
            let d3 = cross(c, a, p);
            let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
            let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
            !(has_neg && has_pos)
        });
    }

    /// Thick line segment with round caps.
    fn stroke(&mut self, pose: &Pose, a: (f64, f64), b: (f64, f64), thickness: f64) {
        let a = pose.point(a.0, a.1);
        let b = pose.point(b.0, b.1);
        let half = thickness * pose.scale / 2.0;
        let (abx, aby) = (b.0 - a.0, b.1 - a.1);
        let len_sq = (abx * abx + aby * aby).max(1e-9);
        self.paint(|x, y| {
            let t = (((x - a.0) * abx + (y - a.1) * aby) / len_sq).clamp(0.0, 1.0);
            let px = a.0 + t * abx;
            let py = a.1 + t * aby;
            let dx = x - px;
            let dy = y - py;
            dx * dx + dy * dy <= half * half
        });
    }
}

fn draw_bird(canvas: &mut Canvas, pose: &Pose) {
    canvas.ellipse(pose, 13.0, 16.5, 6.3, 3.9);
    canvas.ellipse(pose, 19.3, 10.8, 2.8, 2.8);
    // Beak.
    canvas.triangle(pose, (21.4, 9.8), (21.4, 11.8), (25.6, 10.8));
    // Wing: raised for small accents, swept back for large ones.
    let tip_y = 15.0 - 9.5 * pose.accent;
    canvas.triangle(pose, (9.5, 15.5), (16.0, 15.0), (11.5, tip_y));
    // Tail feathers.
    canvas.triangle(pose, (7.5, 15.5), (8.0, 18.5), (2.8, 19.5));
    // Legs.
    canvas.stroke(pose, (12.0, 20.0), (12.0, 24.0), 1.0);
    canvas.stroke(pose, (15.0, 20.0), (15.0, 24.0), 1.0);
}

fn draw_cat(canvas: &mut Canvas, pose: &Pose) {
    canvas.ellipse(pose, 14.0, 18.5, 6.8, 4.3);
    canvas.ellipse(pose, 14.0, 9.8, 4.1, 4.0);
    // Ears grow with the accent.
    let ear_tip = 4.8 - 2.6 * pose.accent;
    canvas.triangle(pose, (10.6, 8.2), (12.6, ear_tip), (14.0, 7.0));
    canvas.triangle(pose, (17.4, 8.2), (15.4, ear_tip), (14.0, 7.0));
    // Tail sweeps from horizontal to upright.
    let tail_tip = (24.6, 18.0 - 9.0 * pose.accent);
    canvas.stroke(pose, (20.2, 19.5), tail_tip, 1.6);
    // Front legs.
    canvas.stroke(pose, (10.8, 21.5), (10.8, 25.6), 1.3);
    canvas.stroke(pose, (17.2, 21.5), (17.2, 25.6), 1.3);
}

fn draw_dog(canvas: &mut Canvas, pose: &Pose) {
    canvas.ellipse(pose, 12.5, 15.8, 7.4, 4.1);
    canvas.ellipse(pose, 20.8, 10.2, 3.3, 3.0);
    // Snout.
    canvas.ellipse(pose, 24.4, 11.2, 2.1, 1.3);
    // Floppy ear droops further as the accent grows.
    canvas.triangle(
        pose,
        (18.6, 7.6),
        (21.0, 7.0),
        (19.6, 11.0 + 3.0 * pose.accent),
    );
    // Four legs.
    canvas.stroke(pose, (7.6, 18.5), (7.6, 24.8), 1.4);
    canvas.stroke(pose, (11.2, 19.3), (11.2, 25.2), 1.4);
    canvas.stroke(pose, (14.8, 19.3), (14.8, 25.2), 1.4);
    canvas.stroke(pose, (17.8, 18.5), (17.8, 24.8), 1.4);
    // Tail wags between low and high.
    let tail_tip = (2.4, 13.8 - 5.5 * pose.accent);
    canvas.stroke(pose, (5.8, 14.2), tail_tip, 1.3);
}

/// Generates the canonical 12-image set: four deterministic pose variants
/// per class, binary pixels, reproducible per seed.
pub fn generate_silhouettes(seed: u64) -> Vec<LabeledImage> {
    let mut rng = Rng::new(seed);
    let mut images = Vec::with_capacity(CLASS_NAMES.len() * VARIANTS_PER_CLASS);
    for (class_index, class_name) in CLASS_NAMES.iter().enumerate() {
        for variant in 0..VARIANTS_PER_CLASS {
            let pose = Pose::sample(&mut rng, variant);
            let mut canvas = Canvas::new();
            match class_index {
                0 => draw_bird(&mut canvas, &pose),
                1 => draw_cat(&mut canvas, &pose),
                _ => draw_dog(&mut canvas, &pose),
            }
            images.push(LabeledImage {
                id: format!("{class_name}-{variant}"),
                class_index,
                individual_index: class_index * VARIANTS_PER_CLASS + variant,
                pixels: canvas.pixels,
            });
        }
    }
    images
}
