//! Pooled statistics of truncated Gabor residuals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gabor::{tlu, Kernel};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::jpeg::SpatialImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    /// TLU threshold.
    pub t: f64,
    /// Histogram bins over `[−t, t]`; odd so that zero sits in the centre bin.
    pub bins: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self { t: 8.0, bins: 5 }
    }
}

impl FeatureParams {
    pub fn per_filter(&self) -> usize {
        2 + self.bins
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || self.bins == 0 || self.bins.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "feature params need t > 0 and an odd bin count, got t = {}, bins = {}",
                self.t, self.bins
            )));
        }
        Ok(())
    }
}

/// Same-size 2-D correlation with edge replication.
pub fn filter_same(img: &Grid<f64>, kernel: &Grid<f64>) -> Grid<f64> {
    let (h, w) = img.shape();
    let k = kernel.height();
    let half = (k / 2) as isize;
    let src = img.as_slice();
    let taps = kernel.as_slice();
    Grid::from_fn(h, w, |r, c| {
        let mut acc = 0.0;
        for i in 0..k {
            let rr = (r as isize + i as isize - half).clamp(0, h as isize - 1) as usize;
            let row = &src[rr * w..(rr + 1) * w];
            let trow = &taps[i * k..(i + 1) * k];
            for (j, t) in trow.iter().enumerate() {
                let cc = (c as isize + j as isize - half).clamp(0, w as isize - 1) as usize;
                acc += t * row[cc];
            }
        }
        acc
    })
}

fn pool(res: &Grid<f64>, p: &FeatureParams, out: &mut Vec<f64>) {
    let vals = res.as_slice();
    let n = vals.len() as f64;
    let mean_abs = vals.iter().map(|v| v.abs()).sum::<f64>() / n;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    out.push(mean_abs);
    out.push(var);
    let width = 2.0 * p.t / p.bins as f64;
    let mut hist = vec![0.0; p.bins];
    for &v in vals {
        let b = (((v + p.t) / width).floor() as isize).clamp(0, p.bins as isize - 1) as usize;
        hist[b] += 1.0;
    }
    out.extend(hist.into_iter().map(|c| c / n));
}

/// Filters with every kernel, truncates, and concatenates
/// `[mean |r|, var r, histogram…]` per kernel in bank order.
pub fn extract_features(img: &SpatialImage, bank: &[Kernel], params: &FeatureParams) -> Result<Vec<f64>> {
    params.validate()?;
    let (h, w) = img.pixels.shape();
    if let Some(k) = bank.iter().map(|k| k.taps.height()).max() {
        if h <= k || w <= k {
            return Err(Error::WindowTooLarge {
                height: h,
                width: w,
                window: k,
            });
        }
    }
    let mut out = Vec::with_capacity(bank.len() * params.per_filter());
    for k in bank {
        let res = tlu(&filter_same(&img.pixels, &k.taps), params.t)?;
        pool(&res, params, &mut out);
    }
    Ok(out)
}

/// Features for many images in parallel; output order follows input order.
pub fn extract_many(imgs: &[SpatialImage], bank: &[Kernel], params: &FeatureParams) -> Result<Vec<Vec<f64>>> {
    imgs.par_iter().map(|i| extract_features(i, bank, params)).collect()
}
