//! Embedding variants and detection-error experiments over a corpus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::{solve_lambda, CostMap, PayloadSpec, DEFAULT_TOLERANCE};
use crate::costs::{
    adjust_costs_esi, adjust_costs_si, energy_costs, flat_costs, smooth_costs, EsiParams, DEFAULT_SMOOTH_RADIUS,
    DEFAULT_SMOOTH_SIGMA,
};
use crate::error::{Error, Result};
use crate::jpeg::{compress, rounding_error, GrayImage, RoundedPlane, SideInfoMap};
use crate::sideinfo::{estimate_precover_baseline, estimated_side_info};
use crate::simulate::{apply_modifications, asymmetric_simulate, empirical_change_rates, sample_noise_stream, ChangeRates};
use crate::steganalysis::detector::{train_eval_detector, DetectionReport, DetectorParams};
use crate::steganalysis::features::{extract_features, FeatureParams};
use crate::steganalysis::gabor::{gabor_bank, Kernel};

pub const THREADS_ENV: &str = "JSTEG_THREADS";

/// Runs `f` on a rayon pool capped by `JSTEG_THREADS` when it is set.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Variant {
    Symmetric,
    /// Rounding-error side-information from the true precover.
    TrueSi,
    /// The ESI rule applied to the true rounding error.
    OracleEsi { delta: f64, eta: f64 },
    /// The ESI rule applied to `ê` from the baseline precover estimator.
    EstimatedEsi { delta: f64, eta: f64, strength: f64 },
}

impl Variant {
    pub fn tag(&self) -> String {
        match *self {
            Variant::Symmetric => "sym".into(),
            Variant::TrueSi => "si".into(),
            Variant::OracleEsi { delta, eta } => format!("oracle-esi(d={delta},e={eta})"),
            Variant::EstimatedEsi { delta, eta, strength } => format!("esi(d={delta},e={eta},s={strength})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostSource {
    Flat,
    #[default]
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    pub sigma: f64,
    pub radius: usize,
}

impl Default for Smoothing {
    fn default() -> Self {
        Self {
            sigma: DEFAULT_SMOOTH_SIGMA,
            radius: DEFAULT_SMOOTH_RADIUS,
        }
    }
}

pub fn base_costs(cover: &RoundedPlane, source: CostSource, smoothing: Option<Smoothing>) -> Result<CostMap> {
    let raw = match source {
        CostSource::Flat => flat_costs(cover),
        CostSource::Energy => energy_costs(cover),
    };
    match smoothing {
        Some(s) => smooth_costs(&raw, s.sigma, s.radius),
        None => Ok(raw),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedOutcome {
    #[serde(skip)]
    pub stego: RoundedPlane,
    pub lambda: f64,
    pub target_bits: f64,
    pub achieved_entropy: f64,
    pub iterations: usize,
    pub change_rates: ChangeRates,
}

/// Solves for the payload, simulates with noise `(seed, stream)` and applies.
pub fn embed_with_costs(
    cover: &RoundedPlane,
    costs: &CostMap,
    payload: &PayloadSpec,
    seed: u64,
    stream: u64,
) -> Result<EmbedOutcome> {
    let sol = solve_lambda(costs, payload, DEFAULT_TOLERANCE)?;
    let (h, w) = cover.shape();
    let noise = sample_noise_stream(h, w, seed, stream);
    let m = asymmetric_simulate(&sol.probabilities, &noise)?;
    let stego = apply_modifications(cover, &m)?;
    let change_rates = empirical_change_rates(cover, &stego)?;
    Ok(EmbedOutcome {
        stego,
        lambda: sol.lambda,
        target_bits: payload.bits(),
        achieved_entropy: sol.achieved_entropy,
        iterations: sol.iterations,
        change_rates,
    })
}

/// Per-image state shared by every variant.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    pub cover: RoundedPlane,
    pub side_info: SideInfoMap,
    pub costs: CostMap,
    pub cover_features: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub qf: u32,
    pub cost: CostSource,
    pub smoothing: Option<Smoothing>,
    pub features: FeatureParams,
    pub detector: DetectorParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            qf: 75,
            cost: CostSource::Energy,
            smoothing: Some(Smoothing::default()),
            features: FeatureParams::default(),
            detector: DetectorParams::default(),
        }
    }
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub images: Vec<PreparedImage>,
    bank: Vec<Kernel>,
}

impl Experiment {
    /// Compresses every precover and caches costs, side-information and cover features.
    pub fn prepare(precovers: &[GrayImage], config: ExperimentConfig) -> Result<Self> {
        let bank = gabor_bank();
        let images = with_pool(|| {
            precovers
                .par_iter()
                .map(|img| {
                    let (cover, unrounded) = compress(img, config.qf)?;
                    let side_info = rounding_error(&unrounded, &cover)?;
                    let costs = base_costs(&cover, config.cost, config.smoothing)?;
                    let cover_features = extract_features(&cover.decompress(), &bank, &config.features)?;
                    Ok(PreparedImage {
                        cover,
                        side_info,
                        costs,
                        cover_features,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(Self { config, images, bank })
    }

    pub fn variant_costs(&self, index: usize, variant: &Variant) -> Result<CostMap> {
        let img = &self.images[index];
        match *variant {
            Variant::Symmetric => Ok(img.costs.clone()),
            Variant::TrueSi => adjust_costs_si(&img.costs, &img.side_info),
            Variant::OracleEsi { delta, eta } => adjust_costs_esi(&img.costs, &img.side_info, &EsiParams::new(delta, eta)?),
            Variant::EstimatedEsi { delta, eta, strength } => {
                let est = estimate_precover_baseline(&img.cover, strength)?;
                let e_hat = estimated_side_info(&img.cover, &est)?;
                adjust_costs_esi(&img.costs, &e_hat, &EsiParams::new(delta, eta)?)
            }
        }
    }

    pub fn embed(&self, index: usize, variant: &Variant, rate: f64, seed: u64) -> Result<EmbedOutcome> {
        let img = &self.images[index];
        let costs = self.variant_costs(index, variant)?;
        let payload = PayloadSpec::for_cover(rate, &img.cover)?;
        embed_with_costs(&img.cover, &costs, &payload, seed, index as u64)
    }

    /// Embeds every image, extracts stego features and trains the detector.
    /// `seed` drives both the embedding noise and the train/test split.
    pub fn evaluate(&self, variant: &Variant, rate: f64, seed: u64) -> Result<DetectionReport> {
        let stego: Vec<Vec<f64>> = with_pool(|| {
            (0..self.images.len())
                .into_par_iter()
                .map(|i| {
                    let out = self.embed(i, variant, rate, seed)?;
                    extract_features(&out.stego.decompress(), &self.bank, &self.config.features)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let cover: Vec<Vec<f64>> = self.images.iter().map(|i| i.cover_features.clone()).collect();
        train_eval_detector(&cover, &stego, seed, &self.config.detector)
    }

    pub fn evaluate_seeds(&self, variant: &Variant, rate: f64, seeds: &[u64]) -> Result<SeedSummary> {
        if seeds.is_empty() {
            return Err(Error::InvalidParameter("no seeds given".into()));
        }
        let p_e = seeds
            .iter()
            .map(|&s| self.evaluate(variant, rate, s).map(|r| r.p_e))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeedSummary::new(variant.tag(), rate, seeds.to_vec(), p_e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub variant: String,
    pub rate: f64,
    pub seeds: Vec<u64>,
    pub p_e: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl SeedSummary {
    pub fn new(variant: String, rate: f64, seeds: Vec<u64>, p_e: Vec<f64>) -> Self {
        let n = p_e.len() as f64;
        let mean = p_e.iter().sum::<f64>() / n;
        let std = if p_e.len() > 1 {
            (p_e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            variant,
            rate,
            seeds,
            p_e,
            mean,
            std,
        }
    }
}
