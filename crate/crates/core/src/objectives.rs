//! GAN objectives evaluated on supplied probability maps and classifier outputs.
//!
//! Cross-entropy uses the natural log; capacity is in bits so that it can be
//! compared with `ε·q`. The capacity functional comes in two forms: the
//! printed one whose third term is `−(1−p⁰)·log₂(1−p⁰)`, and the standard
//! ternary entropy. The two agree only where `p⁰ = ½`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coding::{ternary_entropy_cell, PayloadSpec, ProbabilityMap};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io::gridfile::{GridData, GridFile};

const LOG_FLOOR: f64 = 1e-12;

/// Softmax pair and its one-hot label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierOutput {
    z: [f64; 2],
    label: [f64; 2],
}

impl ClassifierOutput {
    pub fn new(z: [f64; 2], label: [f64; 2]) -> Result<Self> {
        if z.iter().any(|v| !(*v >= 0.0)) || (z[0] + z[1] - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("{z:?} is not a softmax pair")));
        }
        if !(label == [1.0, 0.0] || label == [0.0, 1.0]) {
            return Err(Error::InvalidParameter(format!("{label:?} is not one-hot")));
        }
        Ok(Self { z, label })
    }

    pub fn scores(&self) -> [f64; 2] {
        self.z
    }

    pub fn label(&self) -> [f64; 2] {
        self.label
    }
}

/// `−Σ zᵢ′ ln zᵢ`, with `ln` floored at `ln 1e−12`.
pub fn loss_discriminator(out: &ClassifierOutput) -> f64 {
    let l: f64 = out
        .label
        .iter()
        .zip(out.z.iter())
        .map(|(t, z)| -t * z.max(LOG_FLOOR).ln())
        .sum();
    // −0.0 → 0.0
    l + 0.0
}

pub fn loss_generator_adversarial(l_d: f64) -> f64 {
    -l_d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityMode {
    #[default]
    StandardTernary,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Capacity {
    pub bits: f64,
    pub mode: CapacityMode,
}

#[inline]
fn h2(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

#[inline]
fn capacity_cell(p_plus: f64, p_minus: f64, mode: CapacityMode) -> f64 {
    match mode {
        CapacityMode::StandardTernary => ternary_entropy_cell(p_plus, p_minus),
        CapacityMode::Literal => {
            let p0 = 1.0 - p_plus - p_minus;
            h2(p_minus) + h2(p_plus) + h2(1.0 - p0)
        }
    }
}

/// Embedding capacity `C_a` in bits.
pub fn capacity(probs: &ProbabilityMap, mode: CapacityMode) -> Capacity {
    let bits = probs
        .plus
        .as_slice()
        .iter()
        .zip(probs.minus.as_slice())
        .map(|(&a, &b)| capacity_cell(a, b, mode))
        .sum();
    Capacity { bits, mode }
}

/// `∂C_a/∂pᵢ` for a symmetric map, with `pᵢ` the total change probability.
pub fn capacity_gradient(total: &Grid<f64>, mode: CapacityMode) -> Grid<f64> {
    total.map(|&p| match mode {
        // d/dp [−p·log₂(p/2) − (1−p)·log₂(1−p)]
        CapacityMode::StandardTernary => (2.0 * (1.0 - p) / p).log2(),
        // d/dp [−p·log₂(p/2) − p·log₂ p]
        CapacityMode::Literal => -(p * p / 2.0).log2() - 2.0 / std::f64::consts::LN_2,
    })
}

/// `l_G² = (C_a − ε·q)²`.
pub fn loss_generator_capacity(probs: &ProbabilityMap, payload: &PayloadSpec, mode: CapacityMode) -> f64 {
    let d = capacity(probs, mode).bits - payload.bits();
    d * d
}

/// `∂l_G²/∂pᵢ = 2·(C_a − ε·q)·∂C_a/∂pᵢ` for a symmetric map.
pub fn loss_generator_capacity_gradient(total: &Grid<f64>, payload: &PayloadSpec, mode: CapacityMode) -> Result<Grid<f64>> {
    let probs = ProbabilityMap::symmetric(total)?;
    let d = capacity(&probs, mode).bits - payload.bits();
    Ok(capacity_gradient(total, mode).map(|g| 2.0 * d * g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1e-7,
        }
    }
}

impl ObjectiveWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::InvalidParameter("objective weights must be >= 0".into()));
        }
        Ok(Self { alpha, beta })
    }
}

pub fn loss_generator_total(l1: f64, l2: f64, w: &ObjectiveWeights) -> f64 {
    w.alpha * l1 + w.beta * l2
}

/// Loads a map of total change probabilities (float32 GridFile, values in `[0, 1]`).
pub fn import_probability_map(path: impl AsRef<Path>) -> Result<ProbabilityMap> {
    probability_map_from_file(GridFile::load(path)?)
}

pub fn probability_map_from_file(file: GridFile) -> Result<ProbabilityMap> {
    let GridData::Float32(g) = file.data else {
        return Err(Error::GridFile("probability maps must be float32".into()));
    };
    g.ensure_block_aligned()?;
    if let Some((index, &v)) = g
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::OutOfRange {
            index,
            value: v as f64,
        });
    }
    ProbabilityMap::symmetric(&g.map(|&v| v as f64))
}

/// Writes the total change probability `p⁺ + p⁻` as float32.
pub fn export_probability_map(probs: &ProbabilityMap, path: impl AsRef<Path>) -> Result<()> {
    GridFile::from_real(&probs.total()).save(path)
}
