//! Precover estimation and estimated side-information.
//!
//! An estimator turns rounded coefficients into a real-valued spatial guess
//! of the precover. Re-quantizing that guess without rounding and subtracting
//! the cover coefficients gives `ê`, which may exceed 0.5 in magnitude.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::jpeg::{quantize, RoundedPlane, SideInfoMap, SpatialImage};

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoverEstimate {
    pub image: SpatialImage,
    pub estimator: String,
}

pub trait PrecoverEstimator {
    fn estimate(&self, cover: &RoundedPlane) -> Result<PrecoverEstimate>;
}

/// Decompress, then Gaussian-denoise with standard deviation `strength` pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineEstimator {
    pub strength: f64,
}

impl Default for BaselineEstimator {
    fn default() -> Self {
        Self { strength: 0.8 }
    }
}

impl PrecoverEstimator for BaselineEstimator {
    fn estimate(&self, cover: &RoundedPlane) -> Result<PrecoverEstimate> {
        estimate_precover_baseline(cover, self.strength)
    }
}

/// An estimate produced elsewhere (e.g. a trained network) and loaded from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedEstimate {
    pub image: SpatialImage,
    pub source: String,
}

impl PrecoverEstimator for ImportedEstimate {
    fn estimate(&self, cover: &RoundedPlane) -> Result<PrecoverEstimate> {
        cover.coeffs.ensure_same_shape(&self.image.pixels)?;
        Ok(PrecoverEstimate {
            image: self.image.clone(),
            estimator: format!("import:{}", self.source),
        })
    }
}

pub fn estimate_precover_baseline(cover: &RoundedPlane, strength: f64) -> Result<PrecoverEstimate> {
    if !(strength >= 0.0) || !strength.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "denoise strength {strength} must be >= 0"
        )));
    }
    let decoded = cover.decompress();
    Ok(PrecoverEstimate {
        image: gaussian_blur(&decoded, strength),
        estimator: format!("baseline:{strength}"),
    })
}

/// Separable Gaussian blur with edge replication; `sigma == 0` is the identity.
pub fn gaussian_blur(img: &SpatialImage, sigma: f64) -> SpatialImage {
    if sigma == 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);

    let (h, w) = img.pixels.shape();
    let src = &img.pixels;
    let rows: Grid<f64> = Grid::from_fn(h, w, |r, c| {
        taps.iter()
            .enumerate()
            .map(|(k, t)| {
                let cc = (c as isize + k as isize - radius).clamp(0, w as isize - 1) as usize;
                t * src.get(r, cc)
            })
            .sum()
    });
    SpatialImage::new(Grid::from_fn(h, w, |r, c| {
        taps.iter()
            .enumerate()
            .map(|(k, t)| {
                let rr = (r as isize + k as isize - radius).clamp(0, h as isize - 1) as usize;
                t * rows.get(rr, c)
            })
            .sum()
    }))
}

/// `ê = DCT(estimate)/Q − C`, not clipped.
pub fn estimated_side_info(cover: &RoundedPlane, est: &PrecoverEstimate) -> Result<SideInfoMap> {
    cover.coeffs.ensure_same_shape(&est.image.pixels)?;
    let u = quantize(&est.image, &cover.quant)?;
    Ok(SideInfoMap(u.coeffs.zip_map(&cover.coeffs, |&u, &c| u - c as f64)?))
}

#[inline]
fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Fraction of selected coefficients whose estimated sign equals the true sign.
pub fn polarity_agreement_masked(e_true: &SideInfoMap, e_hat: &SideInfoMap, mask: &Grid<bool>) -> Result<f64> {
    e_true.0.ensure_same_shape(&e_hat.0)?;
    e_true.0.ensure_same_shape(mask)?;
    let (mut agree, mut total) = (0usize, 0usize);
    for ((&t, &e), &m) in e_true.0.as_slice().iter().zip(e_hat.0.as_slice()).zip(mask.as_slice()) {
        if m {
            total += 1;
            agree += (sign(t) == sign(e)) as usize;
        }
    }
    if total == 0 {
        return Err(Error::EmptySelection);
    }
    Ok(agree as f64 / total as f64)
}

/// Polarity agreement over coefficients with a non-zero true rounding error.
pub fn polarity_agreement(e_true: &SideInfoMap, e_hat: &SideInfoMap) -> Result<f64> {
    let mask = e_true.0.map(|&e| e != 0.0);
    polarity_agreement_masked(e_true, e_hat, &mask)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideInfoSummary {
    pub mean_abs: f64,
    pub fraction_above_half: f64,
    pub max_abs: f64,
}

pub fn summarize(e: &SideInfoMap) -> SideInfoSummary {
    let n = e.0.len().max(1) as f64;
    let vals = e.0.as_slice();
    SideInfoSummary {
        mean_abs: vals.iter().map(|v| v.abs()).sum::<f64>() / n,
        fraction_above_half: vals.iter().filter(|v| v.abs() > 0.5).count() as f64 / n,
        max_abs: vals.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{adjust_costs_esi, adjust_costs_si, EsiParams};
    use crate::coding::CostMap;
    use crate::jpeg::{compress, rounding_error, GrayImage};
    use crate::metrics::mse;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ramp(seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (rng.gen_range(0.2..0.9), rng.gen_range(0.2..0.9), rng.gen_range(40.0..90.0));
        GrayImage::new(Grid::from_fn(64, 64, |r, col| {
            (c + a * r as f64 + b * col as f64 + 6.0 * ((r + col) as f64 / 9.0).sin()).round() as u8
        }))
    }

    #[test]
    fn zero_strength_is_plain_decompression() {
        let (c, _) = compress(&ramp(1), 75).unwrap();
        let est = estimate_precover_baseline(&c, 0.0).unwrap();
        assert_eq!(est.image, c.decompress());
        let e_hat = estimated_side_info(&c, &est).unwrap();
        assert!(e_hat.0.as_slice().iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn constant_precover_estimate_is_exact() {
        let img = GrayImage::new(Grid::filled(32, 32, 77));
        let (c, _) = compress(&img, 75).unwrap();
        let est = estimate_precover_baseline(&c, 1.5).unwrap();
        for (a, b) in est.image.pixels.as_slice().iter().zip(c.decompress().pixels.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn baseline_beats_decompression_on_smooth_ramps() {
        for seed in 0..5 {
            let img = ramp(seed);
            let (c, _) = compress(&img, 75).unwrap();
            let truth = img.to_real();
            let est = BaselineEstimator::default().estimate(&c).unwrap();
            assert!(mse(&est.image, &truth).unwrap() <= mse(&c.decompress(), &truth).unwrap());
        }
    }

    #[test]
    fn true_precover_reproduces_rounding_error() {
        let img = ramp(9);
        let (c, u) = compress(&img, 75).unwrap();
        let est = ImportedEstimate {
            image: img.to_real(),
            source: "truth".into(),
        }
        .estimate(&c)
        .unwrap();
        let e_hat = estimated_side_info(&c, &est).unwrap();
        let e = rounding_error(&u, &c).unwrap();
        assert_eq!(e_hat, e);
        assert!(e_hat.0.as_slice().iter().all(|v| v.abs() <= 0.5));
        assert_eq!(polarity_agreement(&e, &e_hat).unwrap(), 1.0);

        let rho = CostMap::symmetric(Grid::filled(64, 64, 1.3)).unwrap();
        assert_eq!(
            adjust_costs_si(&rho, &e).unwrap(),
            adjust_costs_esi(&rho, &e_hat, &EsiParams::new(0.5, 0.9).unwrap()).unwrap()
        );
    }

    #[test]
    fn polarity_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = SideInfoMap(Grid::from_fn(100, 100, |_, _| rng.gen_range(0.01..0.5) * if rng.gen() { 1.0 } else { -1.0 }));
        let neg = SideInfoMap(e.0.map(|v| -v));
        assert_eq!(polarity_agreement(&e, &e).unwrap(), 1.0);
        assert_eq!(polarity_agreement(&e, &neg).unwrap(), 0.0);
        let indep = SideInfoMap(Grid::from_fn(100, 100, |_, _| rng.gen_range(-0.5..0.5)));
        let a = polarity_agreement(&e, &indep).unwrap();
        assert!((a - 0.5).abs() < 3.0 * (0.25f64 / 1e4).sqrt());
        let none = Grid::filled(100, 100, false);
        assert!(matches!(
            polarity_agreement_masked(&e, &e, &none),
            Err(Error::EmptySelection)
        ));
    }

    #[test]
    fn imported_estimate_checks_shape() {
        let (c, _) = compress(&ramp(2), 75).unwrap();
        let bad = ImportedEstimate {
            image: SpatialImage::new(Grid::filled(8, 8, 0.0)),
            source: "x".into(),
        };
        assert!(bad.estimate(&c).is_err());
    }
}
