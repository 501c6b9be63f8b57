//! 2-D Gabor filters and the truncated linear unit.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;

pub const DEFAULT_KERNEL_SIZE: usize = 11;
pub const GAMMA: f64 = 0.5;
/// `σ = 0.56·λ`.
pub const SIGMA_PER_WAVELENGTH: f64 = 0.56;
pub const BANK_SIGMAS: [f64; 2] = [0.75, 1.0];
pub const BANK_THETAS: [f64; 4] = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
pub const BANK_PHIS: [f64; 2] = [0.0, PI / 2.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    pub lambda: f64,
    pub theta: f64,
    pub phi: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub size: usize,
}

impl GaborParams {
    /// Ties the wavelength to `sigma` and uses the default aspect ratio and size.
    pub fn new(sigma: f64, theta: f64, phi: f64) -> Self {
        Self {
            lambda: sigma / SIGMA_PER_WAVELENGTH,
            theta,
            phi,
            sigma,
            gamma: GAMMA,
            size: DEFAULT_KERNEL_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub params: GaborParams,
    pub taps: Grid<f64>,
}

fn sample(p: &GaborParams) -> Grid<f64> {
    let half = (p.size / 2) as f64;
    let (s, c) = p.theta.sin_cos();
    Grid::from_fn(p.size, p.size, |row, col| {
        let (x, y) = (col as f64 - half, row as f64 - half);
        let u = x * c + y * s;
        let v = -x * s + y * c;
        (-(u * u + p.gamma * p.gamma * v * v) / (2.0 * p.sigma * p.sigma)).exp()
            * (2.0 * PI * u / p.lambda + p.phi).cos()
    })
}

/// Samples the filter on the centred integer grid; `x` runs along columns and
/// `y` along rows. Zero-phase kernels have their mean removed.
pub fn gabor_kernel(params: &GaborParams) -> Result<Kernel> {
    let GaborParams {
        lambda,
        phi,
        sigma,
        gamma,
        size,
        ..
    } = *params;
    if size % 2 == 0 {
        return Err(Error::InvalidParameter(format!("kernel size {size} must be odd")));
    }
    if !(lambda > 0.0 && sigma > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidParameter("gabor lambda, sigma, gamma must be > 0".into()));
    }
    let mut taps = sample(params);
    if phi == 0.0 {
        let mean = taps.as_slice().iter().sum::<f64>() / taps.len() as f64;
        taps.as_mut_slice().iter_mut().for_each(|t| *t -= mean);
    }
    Ok(Kernel {
        params: *params,
        taps,
    })
}

/// The 16-filter bank, ordered σ-major, then θ, then φ.
pub fn gabor_bank() -> Vec<Kernel> {
    let mut bank = Vec::with_capacity(16);
    for &sigma in &BANK_SIGMAS {
        for &theta in &BANK_THETAS {
            for &phi in &BANK_PHIS {
                bank.push(gabor_kernel(&GaborParams::new(sigma, theta, phi)).expect("bank parameters are valid"));
            }
        }
    }
    bank
}

/// Elementwise clamp to `[−t, t]`.
pub fn tlu(x: &Grid<f64>, t: f64) -> Result<Grid<f64>> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("TLU threshold {t} must be > 0")));
    }
    Ok(x.map(|&v| v.clamp(-t, t)))
}
