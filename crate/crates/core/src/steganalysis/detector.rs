//! Ridge-regularized Fisher linear discriminant and the detection error `P_E`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_EXAMPLES: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Fraction of image pairs used for training.
    pub train_fraction: f64,
    /// Ridge added to the standardized within-class scatter, relative to its mean diagonal.
    pub ridge: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            train_fraction: 0.5,
            ridge: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub p_e: f64,
    pub p_fa: f64,
    pub p_md: f64,
    pub cover_accuracy: f64,
    pub stego_accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub dropped_features: usize,
    pub seed: u64,
    pub params: DetectorParams,
}

/// `min over thresholds of ½(P_FA + P_MD)`, taking whichever score polarity is better.
///
/// Returns `(P_E, P_FA, P_MD)` at the optimum.
pub fn detection_error(cover_scores: &[f64], stego_scores: &[f64]) -> (f64, f64, f64) {
    let (nc, ns) = (cover_scores.len() as f64, stego_scores.len() as f64);
    let mut all: Vec<(f64, bool)> = cover_scores
        .iter()
        .map(|&s| (s, false))
        .chain(stego_scores.iter().map(|&s| (s, true)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // threshold below everything: all called stego
    let (mut fa, mut md) = (nc, 0.0);
    let mut best = (0.5, 0.5, 0.5);
    let mut consider = |fa: f64, md: f64| {
        let (pfa, pmd) = (fa / nc, md / ns);
        let err = 0.5 * (pfa + pmd);
        if err < best.0 {
            best = (err, pfa, pmd);
        }
        if 1.0 - err < best.0 {
            best = (1.0 - err, 1.0 - pfa, 1.0 - pmd);
        }
    };
    consider(fa, md);
    let mut i = 0;
    while i < all.len() {
        let v = all[i].0;
        while i < all.len() && all[i].0 == v {
            if all[i].1 {
                md += 1.0;
            } else {
                fa -= 1.0;
            }
            i += 1;
        }
        consider(fa, md);
    }
    best
}

/// Splits image pairs by a seeded shuffle, standardizes on the training
/// half, fits the Fisher direction and reports `P_E` on the held-out half.
///
/// `cover[i]` and `stego[i]` must come from the same image; both land on the
/// same side of the split.
pub fn train_eval_detector(
    cover: &[Vec<f64>],
    stego: &[Vec<f64>],
    seed: u64,
    params: &DetectorParams,
) -> Result<DetectionReport> {
    let n = cover.len().min(stego.len());
    if n < MIN_EXAMPLES {
        return Err(Error::TooFewExamples {
            got: n,
            need: MIN_EXAMPLES,
        });
    }
    if cover.len() != stego.len() {
        return Err(Error::InvalidParameter(format!(
            "{} cover and {} stego feature vectors are not paired",
            cover.len(),
            stego.len()
        )));
    }
    if !(params.train_fraction > 0.0 && params.train_fraction < 1.0) || !(params.ridge > 0.0) {
        return Err(Error::InvalidParameter("train fraction must be in (0, 1) and ridge > 0".into()));
    }
    let d = cover[0].len();
    if cover.iter().chain(stego).any(|f| f.len() != d) {
        return Err(Error::InvalidParameter("feature vectors differ in length".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((n as f64 * params.train_fraction).round() as usize).clamp(1, n - 1);
    let (train, test) = order.split_at(n_train);

    // standardize on the training rows of both classes
    let rows = (2 * train.len()) as f64;
    let mut mean = vec![0.0; d];
    for &i in train {
        for j in 0..d {
            mean[j] += cover[i][j] + stego[i][j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows);
    let mut sd = vec![0.0; d];
    for &i in train {
        for j in 0..d {
            sd[j] += (cover[i][j] - mean[j]).powi(2) + (stego[i][j] - mean[j]).powi(2);
        }
    }
    sd.iter_mut().for_each(|s| *s = (*s / rows).sqrt());
    let keep: Vec<usize> = (0..d).filter(|&j| sd[j] > 1e-12 * (1.0 + mean[j].abs())).collect();
    let dropped = d - keep.len();
    if dropped > 0 {
        warn!("dropping {dropped} zero-variance feature(s)");
    }
    let z = |f: &[f64]| DVector::from_iterator(keep.len(), keep.iter().map(|&j| (f[j] - mean[j]) / sd[j]));

    let k = keep.len();
    let (mut mc, mut ms) = (DVector::zeros(k), DVector::zeros(k));
    let zc: Vec<_> = train.iter().map(|&i| z(&cover[i])).collect();
    let zs: Vec<_> = train.iter().map(|&i| z(&stego[i])).collect();
    for (a, b) in zc.iter().zip(&zs) {
        mc += a;
        ms += b;
    }
    mc /= train.len() as f64;
    ms /= train.len() as f64;
    let mut sw = DMatrix::<f64>::zeros(k, k);
    for v in &zc {
        let c = v - &mc;
        sw += &c * c.transpose();
    }
    for v in &zs {
        let c = v - &ms;
        sw += &c * c.transpose();
    }
    sw /= rows;
    let ridge = params.ridge * (sw.trace() / k.max(1) as f64).max(1e-12);
    for i in 0..k {
        sw[(i, i)] += ridge;
    }
    let diff = &ms - &mc;
    let w = sw
        .cholesky()
        .map(|c| c.solve(&diff))
        .ok_or_else(|| Error::InvalidParameter("within-class scatter is not positive definite".into()))?;

    let score = |f: &[f64]| w.dot(&z(f));
    let sc: Vec<f64> = test.iter().map(|&i| score(&cover[i])).collect();
    let ss: Vec<f64> = test.iter().map(|&i| score(&stego[i])).collect();
    let (p_e, p_fa, p_md) = detection_error(&sc, &ss);
    Ok(DetectionReport {
        p_e,
        p_fa,
        p_md,
        cover_accuracy: 1.0 - p_fa,
        stego_accuracy: 1.0 - p_md,
        n_train: 2 * train.len(),
        n_test: 2 * test.len(),
        n_features: k,
        dropped_features: dropped,
        seed,
        params: *params,
    })
}
