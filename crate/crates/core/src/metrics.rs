//! Image-fidelity metrics used to score precover estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jpeg::SpatialImage;

/// Windowed SSIM parameters. The window is Gaussian-weighted and slides over
/// every fully-contained position; the result is the mean over positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub window_sigma: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Exponent on the luminance term.
    pub l: f64,
    /// Exponent on the contrast term.
    pub m: f64,
    /// Exponent on the structure term.
    pub n: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        let c2 = (0.03f64 * 255.0).powi(2);
        Self {
            window: 11,
            window_sigma: 1.5,
            c1: (0.01f64 * 255.0).powi(2),
            c2,
            c3: c2 / 2.0,
            l: 1.0,
            m: 1.0,
            n: 1.0,
        }
    }
}

impl SsimParams {
    fn validate(&self) -> Result<()> {
        let positive = [self.window_sigma, self.c1, self.c2, self.c3, self.l, self.m, self.n];
        if self.window == 0 || positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter(
                "SSIM window, constants and exponents must be positive".into(),
            ));
        }
        Ok(())
    }

    fn weights(&self) -> Vec<f64> {
        let r = (self.window as f64 - 1.0) / 2.0;
        let mut w = Vec::with_capacity(self.window * self.window);
        for y in 0..self.window {
            for x in 0..self.window {
                let (dy, dx) = (y as f64 - r, x as f64 - r);
                w.push((-(dx * dx + dy * dy) / (2.0 * self.window_sigma * self.window_sigma)).exp());
            }
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        w
    }
}

/// Mean squared difference per pixel.
pub fn mse(x: &SpatialImage, y: &SpatialImage) -> Result<f64> {
    x.pixels.ensure_same_shape(&y.pixels)?;
    let sum: f64 = x
        .pixels
        .as_slice()
        .iter()
        .zip(y.pixels.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / x.pixels.len() as f64)
}

#[inline]
fn signed_pow(v: f64, e: f64) -> f64 {
    if e == 1.0 {
        v
    } else {
        v.signum() * v.abs().powf(e)
    }
}

/// `mean over windows of L^l · C^m · S^n`.
pub fn ssim(x: &SpatialImage, y: &SpatialImage, params: &SsimParams) -> Result<f64> {
    params.validate()?;
    x.pixels.ensure_same_shape(&y.pixels)?;
    let (h, w) = x.pixels.shape();
    let win = params.window;
    if win > h || win > w {
        return Err(Error::WindowTooLarge {
            height: h,
            width: w,
            window: win,
        });
    }
    let weights = params.weights();
    let (xs, ys) = (x.pixels.as_slice(), y.pixels.as_slice());
    let mut total = 0.0;
    let mut count = 0usize;
    for top in 0..=h - win {
        for left in 0..=w - win {
            let (mut mx, mut my) = (0.0, 0.0);
            for r in 0..win {
                let base = (top + r) * w + left;
                for c in 0..win {
                    let k = weights[r * win + c];
                    mx += k * xs[base + c];
                    my += k * ys[base + c];
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for r in 0..win {
                let base = (top + r) * w + left;
                for c in 0..win {
                    let k = weights[r * win + c];
                    let (dx, dy) = (xs[base + c] - mx, ys[base + c] - my);
                    vx += k * dx * dx;
                    vy += k * dy * dy;
                    cxy += k * dx * dy;
                }
            }
            // sqrt(v·v) == |v| exactly, so identical windows give exactly 1.
            let sxy = (vx * vy).sqrt();
            let lum = (2.0 * mx * my + params.c1) / (mx * mx + my * my + params.c1);
            let con = (2.0 * sxy + params.c2) / (vx + vy + params.c2);
            let st = (cxy + params.c3) / (sxy + params.c3);
            total += signed_pow(lum, params.l) * signed_pow(con, params.m) * signed_pow(st, params.n);
            count += 1;
        }
    }
    Ok(total / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LossMode {
    /// `(1 − SSIM) + MSE`; zero for a perfect estimate.
    #[default]
    Dissimilarity,
    /// `SSIM + MSE` as literally written; equals 1 for a perfect estimate.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimationLoss {
    pub value: f64,
    pub ssim: f64,
    pub mse: f64,
    pub mode: LossMode,
}

pub fn estimation_loss(
    x: &SpatialImage,
    y: &SpatialImage,
    params: &SsimParams,
    mode: LossMode,
) -> Result<EstimationLoss> {
    let s = ssim(x, y, params)?;
    let e = mse(x, y)?;
    let value = match mode {
        LossMode::Dissimilarity => (1.0 - s) + e,
        LossMode::Literal => s + e,
    };
    Ok(EstimationLoss {
        value,
        ssim: s,
        mse: e,
        mode,
    })
}
