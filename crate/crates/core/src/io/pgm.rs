//! Binary PGM (P5), 8-bit only.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::jpeg::GrayImage;

pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(Error::Pgm("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            pos += 1;
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(Error::Pgm("not a binary PGM (P5)".into()));
    }
    let mut number = |what: &str| -> Result<usize> {
        token()?
            .parse()
            .map_err(|_| Error::Pgm(format!("bad {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Pgm("empty image".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("maxval {maxval} is not 8-bit")));
    }
    // exactly one whitespace byte separates the header from the raster
    let data = bytes
        .get(pos + 1..)
        .ok_or_else(|| Error::Pgm("missing raster".into()))?;
    if data.len() < width * height {
        return Err(Error::Pgm(format!(
            "raster has {} bytes, expected {}",
            data.len(),
            width * height
        )));
    }
    Ok(GrayImage::new(Grid::from_vec(
        height,
        width,
        data[..width * height].to_vec(),
    )?))
}

pub fn encode(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels.as_slice());
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode(&fs::read(path)?)
}

pub fn write(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_comments() {
        let img = GrayImage::new(Grid::from_fn(3, 5, |r, c| (r * 5 + c) as u8));
        assert_eq!(decode(&encode(&img)).unwrap(), img);

        let mut b = b"P5\n# made by hand\n5 3\n# max\n255\n".to_vec();
        b.extend_from_slice(img.pixels.as_slice());
        assert_eq!(decode(&b).unwrap(), img);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(decode(b"P2\n1 1\n255\n0").is_err());
        assert!(decode(b"P5\n2 2\n255\n\x00\x01").is_err());
        assert!(decode(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(decode(b"P5\n1").is_err());
    }
}
