//! `JSGD` grid container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "JSGD"
//! 4       2     version, u16 LE (= 1)
//! 6       1     dtype: 0 = int32, 1 = float32
//! 7       1     reserved (= 0)
//! 8       4     height, u32 LE
//! 12      4     width, u32 LE
//! 16      1     quant-table flag (0 or 1)
//! 17      128   (flag = 1 only) 64 × u16 LE quantization entries, row-major
//! ..      4·h·w row-major LE payload
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::jpeg::{QuantTable, RoundedPlane, SideInfoMap, SpatialImage, UnroundedPlane};

pub const MAGIC: &[u8; 4] = b"JSGD";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum GridData {
    Int32(Grid<i32>),
    Float32(Grid<f32>),
}

impl GridData {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            GridData::Int32(g) => g.shape(),
            GridData::Float32(g) => g.shape(),
        }
    }

    fn dtype(&self) -> u8 {
        match self {
            GridData::Int32(_) => 0,
            GridData::Float32(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub data: GridData,
    pub quant: Option<QuantTable>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::GridFile(msg.into())
}

impl GridFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let (h, w) = self.data.shape();
        let mut out = Vec::with_capacity(17 + 128 + 4 * h * w);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.data.dtype());
        out.push(0);
        out.extend_from_slice(&(h as u32).to_le_bytes());
        out.extend_from_slice(&(w as u32).to_le_bytes());
        match &self.quant {
            Some(q) => {
                out.push(1);
                for e in q.entries() {
                    out.extend_from_slice(&e.to_le_bytes());
                }
            }
            None => out.push(0),
        }
        match &self.data {
            GridData::Int32(g) => g.as_slice().iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
            GridData::Float32(g) => g.as_slice().iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 17 {
            return Err(bad("truncated header"));
        }
        if &bytes[0..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let dtype = bytes[6];
        if dtype > 1 {
            return Err(bad(format!("unknown dtype {dtype}")));
        }
        if bytes[7] != 0 {
            return Err(bad("reserved byte is not zero"));
        }
        let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let w = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let mut pos = 17;
        let quant = match bytes[16] {
            0 => None,
            1 => {
                if bytes.len() < pos + 128 {
                    return Err(bad("truncated quantization table"));
                }
                let mut entries = [0u16; 64];
                for (i, e) in entries.iter_mut().enumerate() {
                    *e = u16::from_le_bytes([bytes[pos + 2 * i], bytes[pos + 2 * i + 1]]);
                }
                pos += 128;
                Some(QuantTable::new(entries)?)
            }
            f => return Err(bad(format!("bad quantization flag {f}"))),
        };
        let n = h.checked_mul(w).ok_or_else(|| bad("dimensions overflow"))?;
        let payload = &bytes[pos..];
        if payload.len() != 4 * n {
            return Err(bad(format!(
                "payload is {} bytes, header declares {}x{} ({} bytes)",
                payload.len(),
                h,
                w,
                4 * n
            )));
        }
        let words = payload.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]);
        let data = if dtype == 0 {
            GridData::Int32(Grid::from_vec(h, w, words.map(i32::from_le_bytes).collect())?)
        } else {
            GridData::Float32(Grid::from_vec(h, w, words.map(f32::from_le_bytes).collect())?)
        };
        Ok(Self { data, quant })
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn from_rounded(plane: &RoundedPlane) -> Self {
        Self {
            data: GridData::Int32(plane.coeffs.clone()),
            quant: Some(plane.quant),
        }
    }

    pub fn from_unrounded(plane: &UnroundedPlane) -> Self {
        Self {
            data: GridData::Float32(plane.coeffs.map(|&v| v as f32)),
            quant: Some(plane.quant),
        }
    }

    pub fn from_real(grid: &Grid<f64>) -> Self {
        Self {
            data: GridData::Float32(grid.map(|&v| v as f32)),
            quant: None,
        }
    }

    pub fn into_rounded(self) -> Result<RoundedPlane> {
        match (self.data, self.quant) {
            (GridData::Int32(g), Some(q)) => RoundedPlane::new(g, q),
            (GridData::Int32(_), None) => Err(bad("rounded plane needs a quantization table")),
            (GridData::Float32(_), _) => Err(bad("expected int32 coefficients")),
        }
    }

    pub fn into_unrounded(self) -> Result<UnroundedPlane> {
        match (self.data, self.quant) {
            (GridData::Float32(g), Some(quant)) => {
                g.ensure_block_aligned()?;
                Ok(UnroundedPlane {
                    coeffs: g.map(|&v| v as f64),
                    quant,
                })
            }
            _ => Err(bad("expected float32 coefficients with a quantization table")),
        }
    }

    /// Float payload widened to f64.
    pub fn into_real(self) -> Result<Grid<f64>> {
        match self.data {
            GridData::Float32(g) => Ok(g.map(|&v| v as f64)),
            GridData::Int32(_) => Err(bad("expected float32 payload")),
        }
    }
}

pub fn save_side_info(e: &SideInfoMap, path: impl AsRef<Path>) -> Result<()> {
    GridFile::from_real(&e.0).save(path)
}

pub fn load_side_info(path: impl AsRef<Path>) -> Result<SideInfoMap> {
    Ok(SideInfoMap(GridFile::load(path)?.into_real()?))
}

pub fn save_spatial(img: &SpatialImage, path: impl AsRef<Path>) -> Result<()> {
    GridFile::from_real(&img.pixels).save(path)
}

pub fn load_spatial(path: impl AsRef<Path>) -> Result<SpatialImage> {
    Ok(SpatialImage::new(GridFile::load(path)?.into_real()?))
}
