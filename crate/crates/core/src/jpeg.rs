//! JPEG coefficient-domain model.
//!
//! Grayscale only. The block transform is the orthonormal 8×8 DCT-II applied
//! after a −128 level shift, so a DC-only block with coefficient `d` decodes
//! to the flat value `128 + d / 8`. Quantized coefficients are rounded half
//! away from zero, which bounds every rounding error by 0.5.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid::{ensure_block_aligned, Grid};

pub const BLOCK: usize = 8;

/// Annex K luminance table, row-major.
pub const BASE_LUMINANCE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub pixels: Grid<u8>,
}

/// Real-valued raster (decoder output, estimates). Never rounded or clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialImage {
    pub pixels: Grid<f64>,
}

impl GrayImage {
    pub fn new(pixels: Grid<u8>) -> Self {
        Self { pixels }
    }

    pub fn height(&self) -> usize {
        self.pixels.height()
    }

    pub fn width(&self) -> usize {
        self.pixels.width()
    }

    pub fn to_real(&self) -> SpatialImage {
        SpatialImage {
            pixels: self.pixels.map(|&p| p as f64),
        }
    }

    /// Pads by edge replication to the next multiple of 8 in each dimension.
    pub fn pad_to_blocks(&self) -> GrayImage {
        let h = self.height().div_ceil(BLOCK) * BLOCK;
        let w = self.width().div_ceil(BLOCK) * BLOCK;
        let (sh, sw) = self.pixels.shape();
        GrayImage {
            pixels: Grid::from_fn(h, w, |r, c| *self.pixels.get(r.min(sh - 1), c.min(sw - 1))),
        }
    }
}

impl SpatialImage {
    pub fn new(pixels: Grid<f64>) -> Self {
        Self { pixels }
    }

    pub fn height(&self) -> usize {
        self.pixels.height()
    }

    pub fn width(&self) -> usize {
        self.pixels.width()
    }

    /// Rounds and clamps to 8 bits.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            pixels: self.pixels.map(|&p| p.round().clamp(0.0, 255.0) as u8),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantTable {
    entries: [u16; 64],
}

impl QuantTable {
    pub fn new(entries: [u16; 64]) -> Result<Self> {
        if let Some(i) = entries.iter().position(|&q| q == 0 || q > 255) {
            return Err(Error::InvalidParameter(format!(
                "quantization entry {} at position {i} outside [1, 255]",
                entries[i]
            )));
        }
        Ok(Self { entries })
    }

    /// Standard luminance table scaled to quality `qf`.
    pub fn for_quality(qf: u32) -> Result<Self> {
        if !(1..=100).contains(&qf) {
            return Err(Error::QualityFactor(qf));
        }
        let scale = if qf < 50 { 5000 / qf } else { 200 - 2 * qf };
        let mut entries = [0u16; 64];
        for (e, &base) in entries.iter_mut().zip(BASE_LUMINANCE.iter()) {
            *e = ((base as u32 * scale + 50) / 100).clamp(1, 255) as u16;
        }
        Ok(Self { entries })
    }

    /// Entry for DCT mode (row `u`, column `v`).
    #[inline]
    pub fn at(&self, u: usize, v: usize) -> u16 {
        self.entries[u * BLOCK + v]
    }

    /// Entry for the mode a plane position falls on.
    #[inline]
    pub fn for_position(&self, row: usize, col: usize) -> f64 {
        self.at(row % BLOCK, col % BLOCK) as f64
    }

    pub fn entries(&self) -> &[u16; 64] {
        &self.entries
    }
}

/// Rounded quantized coefficients (the cover `C` or stego `S`).
#[derive(Debug, Clone, PartialEq)]
pub struct RoundedPlane {
    pub coeffs: Grid<i32>,
    pub quant: QuantTable,
}

/// Non-rounded quantized coefficients (`U`).
#[derive(Debug, Clone, PartialEq)]
pub struct UnroundedPlane {
    pub coeffs: Grid<f64>,
    pub quant: QuantTable,
}

/// Per-coefficient rounding error, true (`U − C`) or estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct SideInfoMap(pub Grid<f64>);

impl RoundedPlane {
    pub fn new(coeffs: Grid<i32>, quant: QuantTable) -> Result<Self> {
        coeffs.ensure_block_aligned()?;
        Ok(Self { coeffs, quant })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.coeffs.shape()
    }

    /// Dequantized coefficients.
    pub fn dequantize(&self) -> Grid<f64> {
        let mut out = self.coeffs.map(|&c| c as f64);
        let w = out.width();
        for (i, v) in out.as_mut_slice().iter_mut().enumerate() {
            *v *= self.quant.for_position(i / w, i % w);
        }
        out
    }

    /// Decoder output without pixel rounding.
    pub fn decompress(&self) -> SpatialImage {
        inverse_block_dct(&self.dequantize()).expect("rounded planes are block aligned")
    }

    /// Non-zero coefficients outside each block's DC position.
    pub fn count_nnz_ac(&self) -> usize {
        let w = self.coeffs.width();
        self.coeffs
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(i, &c)| c != 0 && !is_dc(i / w, i % w))
            .count()
    }
}

#[inline]
pub fn is_dc(row: usize, col: usize) -> bool {
    row.is_multiple_of(BLOCK) && col.is_multiple_of(BLOCK)
}

/// Orthonormal DCT-II basis: `basis[u][i] = c(u)/2 · cos((2i+1)uπ/16)`.
fn basis() -> &'static [[f64; 8]; 8] {
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut b = [[0.0; 8]; 8];
        for (u, row) in b.iter_mut().enumerate() {
            let cu = if u == 0 { 0.5_f64.sqrt() } else { 1.0 };
            for (i, v) in row.iter_mut().enumerate() {
                *v = 0.5
                    * cu
                    * (((2 * i + 1) * u) as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        b
    })
}

fn dct8x8(block: &[[f64; 8]; 8]) -> [[f64; 8]; 8] {
    let b = basis();
    let mut tmp = [[0.0; 8]; 8];
    // rows: tmp[i][v] = Σ_j block[i][j] b[v][j]
    for i in 0..8 {
        for v in 0..8 {
            tmp[i][v] = (0..8).map(|j| block[i][j] * b[v][j]).sum();
        }
    }
    let mut out = [[0.0; 8]; 8];
    for u in 0..8 {
        for v in 0..8 {
            out[u][v] = (0..8).map(|i| b[u][i] * tmp[i][v]).sum();
        }
    }
    out
}

fn idct8x8(coef: &[[f64; 8]; 8]) -> [[f64; 8]; 8] {
    let b = basis();
    let mut tmp = [[0.0; 8]; 8];
    for u in 0..8 {
        for j in 0..8 {
            tmp[u][j] = (0..8).map(|v| coef[u][v] * b[v][j]).sum();
        }
    }
    let mut out = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            out[i][j] = (0..8).map(|u| b[u][i] * tmp[u][j]).sum();
        }
    }
    out
}

fn for_each_block(
    input: &Grid<f64>,
    offset_in: f64,
    offset_out: f64,
    transform: fn(&[[f64; 8]; 8]) -> [[f64; 8]; 8],
) -> Result<Grid<f64>> {
    ensure_block_aligned(input.height(), input.width())?;
    let mut out = Grid::filled(input.height(), input.width(), 0.0);
    for br in (0..input.height()).step_by(BLOCK) {
        for bc in (0..input.width()).step_by(BLOCK) {
            let mut block = [[0.0; 8]; 8];
            for (r, row) in block.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = input.get(br + r, bc + c) + offset_in;
                }
            }
            let t = transform(&block);
            for (r, row) in t.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    *out.get_mut(br + r, bc + c) = v + offset_out;
                }
            }
        }
    }
    Ok(out)
}

/// Per-block orthonormal DCT of the level-shifted image.
pub fn forward_block_dct(img: &SpatialImage) -> Result<Grid<f64>> {
    for_each_block(&img.pixels, -128.0, 0.0, dct8x8)
}

/// Inverse of [`forward_block_dct`], un-shifted but not rounded or clamped.
pub fn inverse_block_dct(coeffs: &Grid<f64>) -> Result<SpatialImage> {
    Ok(SpatialImage::new(for_each_block(coeffs, 0.0, 128.0, idct8x8)?))
}

/// Quantizes a real image; shared by [`compress`] and the side-information estimator.
pub fn quantize(img: &SpatialImage, quant: &QuantTable) -> Result<UnroundedPlane> {
    let mut coeffs = forward_block_dct(img)?;
    let w = coeffs.width();
    for (i, v) in coeffs.as_mut_slice().iter_mut().enumerate() {
        *v /= quant.for_position(i / w, i % w);
    }
    Ok(UnroundedPlane {
        coeffs,
        quant: *quant,
    })
}

/// JPEG compression of an 8-bit image to its rounded and non-rounded planes.
pub fn compress(img: &GrayImage, qf: u32) -> Result<(RoundedPlane, UnroundedPlane)> {
    let quant = QuantTable::for_quality(qf)?;
    compress_with(img, &quant)
}

pub fn compress_with(img: &GrayImage, quant: &QuantTable) -> Result<(RoundedPlane, UnroundedPlane)> {
    let unrounded = quantize(&img.to_real(), quant)?;
    let rounded = RoundedPlane {
        coeffs: unrounded.coeffs.map(|&u| u.round() as i32),
        quant: *quant,
    };
    Ok((rounded, unrounded))
}

/// `e = U − C`.
pub fn rounding_error(unrounded: &UnroundedPlane, rounded: &RoundedPlane) -> Result<SideInfoMap> {
    Ok(SideInfoMap(
        unrounded
            .coeffs
            .zip_map(&rounded.coeffs, |&u, &c| u - c as f64)?,
    ))
}
