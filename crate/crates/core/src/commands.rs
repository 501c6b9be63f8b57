//! End-to-end commands behind the `jsteg` binary.
//!
//! Every command is deterministic given its inputs and seed. Outputs are never
//! overwritten unless `force` is set.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::coding::{cost_from_probability, CostMap, PayloadSpec};
use crate::corpus::{synthetic_corpus, CorpusSpec};
use crate::costs::{adjust_costs_esi, adjust_costs_si, smooth_costs, EsiParams};
use crate::error::{Error, Result};
use crate::experiment::{base_costs, embed_with_costs, with_pool, CostSource, Experiment, ExperimentConfig, Smoothing, Variant};
use crate::io::gridfile::{save_side_info, load_side_info, GridData, GridFile};
use crate::io::pgm;
use crate::jpeg::{compress, quantize, rounding_error, GrayImage, RoundedPlane, SideInfoMap, SpatialImage};
use crate::objectives::probability_map_from_file;
use crate::sideinfo::{
    estimate_precover_baseline, estimated_side_info, polarity_agreement, summarize, PrecoverEstimate, SideInfoSummary,
};
use crate::steganalysis::detector::{train_eval_detector, DetectionReport, DetectorParams};
use crate::steganalysis::features::{extract_many, FeatureParams};
use crate::steganalysis::gabor::gabor_bank;

fn ensure_writable(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::WouldOverwrite(path.to_path_buf()));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path, force: bool) -> Result<()> {
    ensure_writable(path, force)?;
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

// ---------------------------------------------------------------- compress

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressReport {
    pub input: PathBuf,
    pub qf: u32,
    pub height: usize,
    pub width: usize,
    pub nnz_ac: usize,
    pub rounded: PathBuf,
    pub unrounded: PathBuf,
}

pub fn compress_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let s = prefix.as_os_str().to_string_lossy();
    (PathBuf::from(format!("{s}.C.grid")), PathBuf::from(format!("{s}.U.grid")))
}

/// PGM → rounded plane `<prefix>.C.grid` and non-rounded plane `<prefix>.U.grid`.
pub fn cmd_compress(input: &Path, qf: u32, prefix: &Path, force: bool) -> Result<CompressReport> {
    let img = pgm::read(input)?;
    let (c, u) = compress(&img, qf)?;
    let (cp, up) = compress_paths(prefix);
    ensure_writable(&cp, force)?;
    ensure_writable(&up, force)?;
    GridFile::from_rounded(&c).save(&cp)?;
    GridFile::from_unrounded(&u).save(&up)?;
    let (height, width) = c.shape();
    Ok(CompressReport {
        input: input.to_path_buf(),
        qf,
        height,
        width,
        nnz_ac: c.count_nnz_ac(),
        rounded: cp,
        unrounded: up,
    })
}

// ---------------------------------------------------------------- inputs

pub fn load_rounded(path: &Path) -> Result<RoundedPlane> {
    GridFile::load(path)?.into_rounded()
}

/// A spatial image from a PGM or a float32 grid without a quantization table.
pub fn load_spatial_any(path: &Path) -> Result<SpatialImage> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
        return Ok(pgm::read(path)?.to_real());
    }
    let f = GridFile::load(path)?;
    match (&f.data, &f.quant) {
        (GridData::Float32(_), None) => Ok(SpatialImage::new(f.into_real()?)),
        _ => Err(Error::GridFile(format!(
            "{} is not a spatial image (expected PGM or float32 grid without quant table)",
            path.display()
        ))),
    }
}

/// Side-information from a precover file: a non-rounded plane (float32 with a
/// quantization table) is used directly, a spatial image is re-quantized.
pub fn side_info_from_precover(cover: &RoundedPlane, path: &Path) -> Result<SideInfoMap> {
    if !path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
        let f = GridFile::load(path)?;
        if f.quant.is_some() {
            let u = f.into_unrounded()?;
            if u.quant != cover.quant {
                return Err(Error::Config("precover plane uses a different quantization table".into()));
            }
            cover.coeffs.ensure_same_shape(&u.coeffs)?;
            return Ok(SideInfoMap(u.coeffs.zip_map(&cover.coeffs, |&u, &c| u - c as f64)?));
        }
    }
    let img = load_spatial_any(path)?;
    cover.coeffs.ensure_same_shape(&img.pixels)?;
    let u = quantize(&img, &cover.quant)?;
    Ok(SideInfoMap(u.coeffs.zip_map(&cover.coeffs, |&u, &c| u - c as f64)?))
}

// ---------------------------------------------------------------- embed

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedMode {
    #[default]
    Sym,
    Si,
    Esi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub payload: f64,
    pub mode: EmbedMode,
    pub esi: EsiParams,
    /// Built-in cost model, used when neither `probs` nor `costs` is given.
    pub cost_source: CostSource,
    pub smoothing: Option<Smoothing>,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            payload: 0.4,
            mode: EmbedMode::Sym,
            esi: EsiParams::default(),
            cost_source: CostSource::Energy,
            smoothing: Some(Smoothing::default()),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbedInputs {
    pub cover: PathBuf,
    /// True precover (SI) or an estimate (ESI), as a plane or spatial image.
    pub precover: Option<PathBuf>,
    /// Precomputed `e` or `ê`; takes precedence over `precover`.
    pub side_info: Option<PathBuf>,
    pub probs: Option<PathBuf>,
    pub costs: Option<PathBuf>,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedReport {
    pub variant: EmbedMode,
    pub config: EmbedConfig,
    pub cost_origin: String,
    pub cover: PathBuf,
    pub stego: PathBuf,
    pub nnz_ac: usize,
    pub target_bits: f64,
    pub lambda: f64,
    pub achieved_entropy: f64,
    pub iterations: usize,
    pub change_rates: crate::simulate::ChangeRates,
}

pub fn embed_report_path(inputs: &EmbedInputs) -> PathBuf {
    inputs.report.clone().unwrap_or_else(|| {
        let mut p = inputs.out.clone().into_os_string();
        p.push(".json");
        PathBuf::from(p)
    })
}

fn symmetric_costs(cover: &RoundedPlane, cfg: &EmbedConfig, inputs: &EmbedInputs) -> Result<(CostMap, String)> {
    let (raw, origin) = match (&inputs.probs, &inputs.costs) {
        (Some(_), Some(_)) => return Err(Error::Config("give either --probs or --costs, not both".into())),
        (Some(p), None) => {
            let probs = probability_map_from_file(GridFile::load(p)?)?;
            (cost_from_probability(&probs), format!("probs:{}", p.display()))
        }
        (None, Some(c)) => {
            let rho = GridFile::load(c)?.into_real()?;
            (CostMap::symmetric(rho)?, format!("costs:{}", c.display()))
        }
        (None, None) => {
            let name = match cfg.cost_source {
                CostSource::Flat => "flat",
                CostSource::Energy => "energy",
            };
            return Ok((base_costs(cover, cfg.cost_source, cfg.smoothing)?, name.into()));
        }
    };
    cover.coeffs.ensure_same_shape(&raw.plus)?;
    let smoothed = match cfg.smoothing {
        Some(s) => smooth_costs(&raw, s.sigma, s.radius)?,
        None => raw,
    };
    Ok((smoothed, origin))
}

/// Costs → smoothing → SI/ESI adjustment → λ solve → simulation → stego plane and report.
pub fn cmd_embed(cfg: &EmbedConfig, inputs: &EmbedInputs, force: bool) -> Result<EmbedReport> {
    cfg.esi.validate()?;
    let report_path = embed_report_path(inputs);
    ensure_writable(&inputs.out, force)?;
    ensure_writable(&report_path, force)?;

    let cover = load_rounded(&inputs.cover)?;
    let (costs, cost_origin) = symmetric_costs(&cover, cfg, inputs)?;
    let side_info = || -> Result<SideInfoMap> {
        match (&inputs.side_info, &inputs.precover) {
            (Some(p), _) => {
                let e = load_side_info(p)?;
                cover.coeffs.ensure_same_shape(&e.0)?;
                Ok(e)
            }
            (None, Some(p)) => side_info_from_precover(&cover, p),
            (None, None) => Err(Error::Config(format!(
                "mode {:?} needs --precover or --side-info",
                cfg.mode
            ))),
        }
    };
    let costs = match cfg.mode {
        EmbedMode::Sym => costs,
        EmbedMode::Si => adjust_costs_si(&costs, &side_info()?)?,
        EmbedMode::Esi => adjust_costs_esi(&costs, &side_info()?, &cfg.esi)?,
    };
    let payload = PayloadSpec::for_cover(cfg.payload, &cover)?;
    let out = embed_with_costs(&cover, &costs, &payload, cfg.seed, 0)?;

    for (i, (s, c)) in out.stego.coeffs.as_slice().iter().zip(cover.coeffs.as_slice()).enumerate() {
        let diff = *s as i64 - *c as i64;
        if diff.abs() > 1 {
            let (row, col) = cover.coeffs.position(i);
            return Err(Error::NonTernary { row, col, diff });
        }
    }
    GridFile::from_rounded(&out.stego).save(&inputs.out)?;
    let report = EmbedReport {
        variant: cfg.mode,
        config: cfg.clone(),
        cost_origin,
        cover: inputs.cover.clone(),
        stego: inputs.out.clone(),
        nnz_ac: payload.nnz_ac,
        target_bits: out.target_bits,
        lambda: out.lambda,
        achieved_entropy: out.achieved_entropy,
        iterations: out.iterations,
        change_rates: out.change_rates,
    };
    write_json(&report, &report_path, force)?;
    Ok(report)
}

// ---------------------------------------------------------------- estimate-si

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec {
    Baseline { strength: f64 },
    Import { path: PathBuf },
}

impl std::str::FromStr for EstimatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("baseline", v)) => v
                .parse()
                .map(|strength| EstimatorSpec::Baseline { strength })
                .map_err(|_| Error::Config(format!("bad baseline strength {v:?}"))),
            Some(("import", p)) if !p.is_empty() => Ok(EstimatorSpec::Import { path: p.into() }),
            None if s == "baseline" => Ok(EstimatorSpec::Baseline { strength: 0.8 }),
            _ => Err(Error::Config(format!(
                "estimator {s:?} is not baseline:<strength> or import:<path>"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub out: PathBuf,
    pub summary: SideInfoSummary,
    pub polarity_agreement: Option<f64>,
}

pub fn cmd_estimate_si(
    cover_path: &Path,
    estimator: &EstimatorSpec,
    truth: Option<&Path>,
    out: &Path,
    force: bool,
) -> Result<EstimateReport> {
    ensure_writable(out, force)?;
    let cover = load_rounded(cover_path)?;
    let est = match estimator {
        EstimatorSpec::Baseline { strength } => estimate_precover_baseline(&cover, *strength)?,
        EstimatorSpec::Import { path } => {
            let image = load_spatial_any(path)?;
            cover.coeffs.ensure_same_shape(&image.pixels)?;
            PrecoverEstimate {
                image,
                estimator: format!("import:{}", path.display()),
            }
        }
    };
    let e_hat = estimated_side_info(&cover, &est)?;
    let polarity = match truth {
        Some(p) => {
            let e = side_info_from_precover(&cover, p)?;
            match polarity_agreement(&e, &e_hat) {
                Ok(a) => Some(a),
                Err(Error::EmptySelection) => None,
                Err(err) => return Err(err),
            }
        }
        None => None,
    };
    save_side_info(&e_hat, out)?;
    Ok(EstimateReport {
        estimator: est.estimator,
        out: out.to_path_buf(),
        summary: summarize(&e_hat),
        polarity_agreement: polarity,
    })
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateReport {
    pub cover_dir: PathBuf,
    pub stego_dir: PathBuf,
    pub pairs: usize,
    pub features: FeatureParams,
    pub detection: DetectionReport,
}

/// Decompressed image from a rounded plane (`.grid`) or a PGM.
fn load_for_features(path: &Path) -> Result<SpatialImage> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
        Ok(pgm::read(path)?.to_real())
    } else {
        Ok(load_rounded(path)?.decompress())
    }
}

fn corpus_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let usable = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("grid") || e.eq_ignore_ascii_case("pgm"));
        if path.is_file() && usable {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                out.insert(name.to_string(), path);
            }
        }
    }
    Ok(out)
}

/// Pairs files by name, extracts features and trains the detector.
pub fn cmd_evaluate(
    cover_dir: &Path,
    stego_dir: &Path,
    seed: u64,
    out: &Path,
    force: bool,
) -> Result<EvaluateReport> {
    ensure_writable(out, force)?;
    let covers = corpus_files(cover_dir)?;
    let stegos = corpus_files(stego_dir)?;
    let unpaired: Vec<&String> = covers.keys().filter(|k| !stegos.contains_key(*k)).collect();
    let extra: Vec<&String> = stegos.keys().filter(|k| !covers.contains_key(*k)).collect();
    if !unpaired.is_empty() || !extra.is_empty() {
        return Err(Error::Config(format!(
            "unpaired files: {} cover-only, {} stego-only (first: {:?})",
            unpaired.len(),
            extra.len(),
            unpaired.first().or(extra.first())
        )));
    }
    let names: Vec<&String> = covers.keys().collect();
    let load = |m: &BTreeMap<String, PathBuf>| -> Result<Vec<SpatialImage>> {
        names.iter().map(|n| load_for_features(&m[*n])).collect()
    };
    let params = FeatureParams::default();
    let bank = gabor_bank();
    let (cf, sf) = with_pool(|| -> Result<_> {
        Ok((extract_many(&load(&covers)?, &bank, &params)?, extract_many(&load(&stegos)?, &bank, &params)?))
    })?;
    let detection = train_eval_detector(&cf, &sf, seed, &DetectorParams::default())?;
    let report = EvaluateReport {
        cover_dir: cover_dir.to_path_buf(),
        stego_dir: stego_dir.to_path_buf(),
        pairs: names.len(),
        features: params,
        detection,
    };
    write_json(&report, out, force)?;
    Ok(report)
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Sym,
    Si,
    /// ESI rule on the true rounding error.
    OracleEsi,
    /// ESI rule on the baseline estimate.
    Esi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCorpus {
    /// Directory of PGM precovers; a synthetic corpus is generated when absent.
    pub dir: Option<PathBuf>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default = "default_corpus_seed")]
    pub seed: u64,
    #[serde(default = "default_contrast")]
    pub contrast: f64,
}

fn default_count() -> usize {
    CorpusSpec::default().count
}
fn default_size() -> usize {
    CorpusSpec::default().size
}
fn default_corpus_seed() -> u64 {
    CorpusSpec::default().seed
}
fn default_contrast() -> f64 {
    CorpusSpec::default().contrast
}

impl Default for SweepCorpus {
    fn default() -> Self {
        let s = CorpusSpec::default();
        Self {
            dir: None,
            count: s.count,
            size: s.size,
            seed: s.seed,
            contrast: s.contrast,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub modes: Vec<SweepMode>,
    #[serde(default)]
    pub payloads: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
    #[serde(default = "default_strength")]
    pub strength: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_qf")]
    pub qf: u32,
    #[serde(default)]
    pub cost: CostSource,
    #[serde(default = "default_smoothing")]
    pub smoothing: Option<Smoothing>,
    #[serde(default)]
    pub corpus: SweepCorpus,
}

fn default_deltas() -> Vec<f64> {
    vec![EsiParams::default().delta]
}
fn default_etas() -> Vec<f64> {
    vec![EsiParams::default().eta]
}
fn default_strength() -> f64 {
    0.8
}
fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}
fn default_qf() -> u32 {
    75
}
fn default_smoothing() -> Option<Smoothing> {
    Some(Smoothing::default())
}

impl SweepGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("sweep grid: {e}")))
    }

    /// Cartesian product of the axes; δ and η collapse for modes that ignore them.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            for &q in &self.payloads {
                let params: Vec<(Option<f64>, Option<f64>)> = match mode {
                    SweepMode::Sym | SweepMode::Si => vec![(None, None)],
                    SweepMode::OracleEsi | SweepMode::Esi => self
                        .deltas
                        .iter()
                        .flat_map(|&d| self.etas.iter().map(move |&e| (Some(d), Some(e))))
                        .collect(),
                };
                for (delta, eta) in params {
                    out.push(SweepCell { mode, payload: q, delta, eta });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub mode: SweepMode,
    pub payload: f64,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
}

impl SweepCell {
    pub fn id(&self) -> String {
        let mode = match self.mode {
            SweepMode::Sym => "sym",
            SweepMode::Si => "si",
            SweepMode::OracleEsi => "oracle-esi",
            SweepMode::Esi => "esi",
        };
        let mut s = format!("{mode}_q{}", self.payload);
        if let (Some(d), Some(e)) = (self.delta, self.eta) {
            let _ = write!(s, "_d{d}_e{e}");
        }
        s
    }

    pub fn variant(&self, strength: f64) -> Variant {
        let (delta, eta) = (self.delta.unwrap_or(0.0), self.eta.unwrap_or(1.0));
        match self.mode {
            SweepMode::Sym => Variant::Symmetric,
            SweepMode::Si => Variant::TrueSi,
            SweepMode::OracleEsi => Variant::OracleEsi { delta, eta },
            SweepMode::Esi => Variant::EstimatedEsi { delta, eta, strength },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: SweepCell,
    pub variant: Variant,
    pub seeds: Vec<u64>,
    pub p_e: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Done(CellReport),
    Skipped(CellReport),
    Failed { cell: SweepCell, error: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub outcomes: Vec<CellOutcome>,
    pub table: PathBuf,
}

pub fn load_precovers(corpus: &SweepCorpus) -> Result<Vec<GrayImage>> {
    match &corpus.dir {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
                .collect();
            paths.sort();
            paths.iter().map(pgm::read).collect()
        }
        None => Ok(synthetic_corpus(&CorpusSpec {
            count: corpus.count,
            size: corpus.size,
            seed: corpus.seed,
            contrast: corpus.contrast,
        })),
    }
}

pub fn render_table(rows: &[CellOutcome]) -> String {
    let mut s = format!("{:<12} {:>7} {:>6} {:>6} {:>8} {:>8}\n", "variant", "q", "delta", "eta", "P_E", "std");
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| v.to_string());
    for row in rows {
        match row {
            CellOutcome::Done(r) | CellOutcome::Skipped(r) => {
                let c = &r.cell;
                let _ = writeln!(
                    s,
                    "{:<12} {:>7} {:>6} {:>6} {:>8.4} {:>8.4}",
                    c.id().split('_').next().unwrap_or(""),
                    c.payload,
                    opt(c.delta),
                    opt(c.eta),
                    r.mean,
                    r.std
                );
            }
            CellOutcome::Failed { cell, error } => {
                let _ = writeln!(
                    s,
                    "{:<12} {:>7} {:>6} {:>6} error: {error}",
                    cell.id().split('_').next().unwrap_or(""),
                    cell.payload,
                    opt(cell.delta),
                    opt(cell.eta)
                );
            }
        }
    }
    s
}

/// One detector evaluation per cell, averaged over the grid's seeds.
///
/// Cell reports land in `<out>/cells/<id>.json`; existing ones are reused, so
/// an interrupted sweep resumes where it stopped. Failed cells are reported
/// in the table and retried on the next run.
pub fn cmd_sweep(grid: &SweepGrid, out: &Path, force: bool) -> Result<SweepSummary> {
    let cells_dir = out.join("cells");
    fs::create_dir_all(&cells_dir)?;
    let cells = grid.cells();
    let mut outcomes = Vec::with_capacity(cells.len());
    let mut experiment: Option<Experiment> = None;

    for cell in cells {
        let path = cells_dir.join(format!("{}.json", cell.id()));
        if path.exists() && !force {
            let prior: CellReport = serde_json::from_str(&fs::read_to_string(&path)?)?;
            info!("skipping completed cell {}", cell.id());
            outcomes.push(CellOutcome::Skipped(prior));
            continue;
        }
        if experiment.is_none() {
            let config = ExperimentConfig {
                qf: grid.qf,
                cost: grid.cost,
                smoothing: grid.smoothing,
                ..Default::default()
            };
            experiment = Some(Experiment::prepare(&load_precovers(&grid.corpus)?, config)?);
        }
        let ex = experiment.as_ref().expect("prepared above");
        let variant = cell.variant(grid.strength);
        match ex.evaluate_seeds(&variant, cell.payload, &grid.seeds) {
            Ok(s) => {
                let report = CellReport {
                    cell,
                    variant,
                    seeds: s.seeds,
                    p_e: s.p_e,
                    mean: s.mean,
                    std: s.std,
                };
                write_json(&report, &path, true)?;
                outcomes.push(CellOutcome::Done(report));
            }
            Err(e) => {
                warn!("cell {} failed: {e}", cell.id());
                outcomes.push(CellOutcome::Failed {
                    cell,
                    error: e.to_string(),
                });
            }
        }
    }
    let table = out.join("table.txt");
    fs::write(&table, render_table(&outcomes))?;
    Ok(SweepSummary { outcomes, table })
}

// ---------------------------------------------------------------- helpers used by tests and examples

/// Writes a rounded plane, failing if `path` exists and `force` is off.
pub fn save_rounded(plane: &RoundedPlane, path: &Path, force: bool) -> Result<()> {
    ensure_writable(path, force)?;
    GridFile::from_rounded(plane).save(path)
}

/// True side-information of a precover image under `qf`.
pub fn true_side_info(img: &GrayImage, qf: u32) -> Result<(RoundedPlane, SideInfoMap)> {
    let (c, u) = compress(img, qf)?;
    let e = rounding_error(&u, &c)?;
    Ok((c, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_spec_parsing() {
        assert_eq!("baseline:1.5".parse::<EstimatorSpec>().unwrap(), EstimatorSpec::Baseline { strength: 1.5 });
        assert_eq!("baseline".parse::<EstimatorSpec>().unwrap(), EstimatorSpec::Baseline { strength: 0.8 });
        assert_eq!(
            "import:a/b.pgm".parse::<EstimatorSpec>().unwrap(),
            EstimatorSpec::Import { path: "a/b.pgm".into() }
        );
        assert!("magic:3".parse::<EstimatorSpec>().is_err());
        assert!("baseline:x".parse::<EstimatorSpec>().is_err());
    }

    #[test]
    fn grid_cells_and_ids() {
        let g = SweepGrid::from_toml(
            r#"
            modes = ["sym", "oracle-esi"]
            payloads = [0.4]
            deltas = [0.0]
            etas = [0.65, 1.0]
            "#,
        )
        .unwrap();
        let ids: Vec<String> = g.cells().iter().map(|c| c.id()).collect();
        assert_eq!(ids, ["sym_q0.4", "oracle-esi_q0.4_d0_e0.65", "oracle-esi_q0.4_d0_e1"]);
        assert_eq!(g.seeds, vec![1, 2, 3, 4, 5]);
        assert!(SweepGrid::from_toml("modes = []").unwrap().cells().is_empty());
        assert!(SweepGrid::from_toml("bogus = 1").is_err());
        assert_eq!(
            g.cells()[1].variant(0.8),
            Variant::OracleEsi { delta: 0.0, eta: 0.65 }
        );
    }
}
