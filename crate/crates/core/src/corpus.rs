//! Synthetic 8-bit precover corpus.
//!
//! Four families cycle by index: smooth fields, periodic textures, piecewise
//! constant shapes with soft edges, and multi-octave value noise. Every image
//! carries a little sensor-like noise so that rounding errors are spread out.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::jpeg::GrayImage;
use crate::sideinfo::gaussian_blur;
use crate::jpeg::SpatialImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Smooth,
    Texture,
    Shapes,
    ValueNoise,
}

impl Family {
    pub fn for_index(index: usize) -> Self {
        match index % 4 {
            0 => Family::Smooth,
            1 => Family::Texture,
            2 => Family::Shapes,
            _ => Family::ValueNoise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub count: usize,
    pub size: usize,
    pub seed: u64,
    /// Scales every structural amplitude around the image's base level.
    pub contrast: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            count: 200,
            size: 64,
            seed: 2024,
            contrast: 1.0,
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let (u, v): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

fn smooth(size: usize, rng: &mut ChaCha8Rng) -> Grid<f64> {
    let base = rng.gen_range(60.0..190.0);
    let (gx, gy) = (rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(4.0..16.0),
                rng.gen_range(0.01..0.06),
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    Grid::from_fn(size, size, |r, c| {
        let (x, y) = (c as f64, r as f64);
        base + gx * x
            + gy * y
            + waves
                .iter()
                .map(|&(a, f, th, ph)| a * (2.0 * PI * f * (x * th.cos() + y * th.sin()) + ph).sin())
                .sum::<f64>()
    })
}

fn texture(size: usize, rng: &mut ChaCha8Rng) -> Grid<f64> {
    let base = rng.gen_range(80.0..170.0);
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(1.0..6.0),
                rng.gen_range(0.06..0.3),
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    Grid::from_fn(size, size, |r, c| {
        let (x, y) = (c as f64, r as f64);
        base + waves
            .iter()
            .map(|&(a, f, th, ph)| a * (2.0 * PI * f * (x * th.cos() + y * th.sin()) + ph).sin())
            .sum::<f64>()
    })
}

fn shapes(size: usize, rng: &mut ChaCha8Rng) -> Grid<f64> {
    let base = rng.gen_range(60.0..190.0);
    let mut g = Grid::filled(size, size, base);
    let s = size as f64;
    for _ in 0..rng.gen_range(3..7) {
        let level = base + rng.gen_range(-35.0..35.0);
        let (cx, cy) = (rng.gen_range(0.0..s), rng.gen_range(0.0..s));
        let rad = rng.gen_range(0.1 * s..0.4 * s);
        let disc = rng.gen_bool(0.5);
        for r in 0..size {
            for c in 0..size {
                let (dx, dy) = (c as f64 - cx, r as f64 - cy);
                let inside = if disc {
                    dx * dx + dy * dy < rad * rad
                } else {
                    dx.abs() < rad && dy.abs() < 0.6 * rad
                };
                if inside {
                    *g.get_mut(r, c) = level;
                }
            }
        }
    }
    gaussian_blur(&SpatialImage::new(g), rng.gen_range(1.0..2.5)).pixels
}

fn value_noise(size: usize, rng: &mut ChaCha8Rng) -> Grid<f64> {
    let mut acc = Grid::filled(size, size, rng.gen_range(90.0..160.0));
    let mut amp = rng.gen_range(10.0..25.0);
    let mut cell = (size / 4).max(2);
    while cell >= 2 {
        let n = size / cell + 2;
        let lattice: Vec<f64> = (0..n * n).map(|_| gauss(rng)).collect();
        for r in 0..size {
            for c in 0..size {
                let (fy, fx) = (r as f64 / cell as f64, c as f64 / cell as f64);
                let (iy, ix) = (fy as usize, fx as usize);
                let (ty, tx) = (fy - iy as f64, fx - ix as f64);
                let (sy, sx) = (ty * ty * (3.0 - 2.0 * ty), tx * tx * (3.0 - 2.0 * tx));
                let at = |y: usize, x: usize| lattice[y * n + x];
                let top = at(iy, ix) * (1.0 - sx) + at(iy, ix + 1) * sx;
                let bot = at(iy + 1, ix) * (1.0 - sx) + at(iy + 1, ix + 1) * sx;
                *acc.get_mut(r, c) += amp * (top * (1.0 - sy) + bot * sy);
            }
        }
        amp *= 0.45;
        cell /= 2;
    }
    acc
}

/// Image `index` of the corpus; independent of the other images.
pub fn synthetic_image(spec: &CorpusSpec, index: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let size = spec.size;
    let mut field = match Family::for_index(index) {
        Family::Smooth => smooth(size, &mut rng),
        Family::Texture => texture(size, &mut rng),
        Family::Shapes => shapes(size, &mut rng),
        Family::ValueNoise => value_noise(size, &mut rng),
    };
    let mean = field.as_slice().iter().sum::<f64>() / field.len() as f64;
    field.as_mut_slice().iter_mut().for_each(|v| *v = mean + spec.contrast * (*v - mean));
    let noise = rng.gen_range(0.5..2.0);
    for v in field.as_mut_slice() {
        *v += noise * gauss(&mut rng);
    }
    GrayImage::new(field.map(|&v| v.round().clamp(0.0, 255.0) as u8))
}

pub fn synthetic_corpus(spec: &CorpusSpec) -> Vec<GrayImage> {
    (0..spec.count).map(|i| synthetic_image(spec, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_independent() {
        let spec = CorpusSpec {
            count: 8,
            size: 32,
            seed: 5,
            contrast: 1.0,
        };
        let a = synthetic_corpus(&spec);
        assert_eq!(a, synthetic_corpus(&spec));
        assert_eq!(a[6], synthetic_image(&spec, 6));
        for i in 0..8 {
            assert_eq!(a[i].height(), 32);
            for j in 0..i {
                assert_ne!(a[i], a[j]);
            }
        }
    }

    #[test]
    fn images_are_not_flat() {
        let spec = CorpusSpec {
            count: 12,
            size: 64,
            seed: 1,
            contrast: 1.0,
        };
        for img in synthetic_corpus(&spec) {
            let px = img.pixels.as_slice();
            let mean = px.iter().map(|&p| p as f64).sum::<f64>() / px.len() as f64;
            let var = px.iter().map(|&p| (p as f64 - mean).powi(2)).sum::<f64>() / px.len() as f64;
            assert!(var > 1.0);
            let saturated = px.iter().filter(|&&p| p == 0 || p == 255).count();
            assert!(saturated < px.len() / 4);
        }
    }
}
