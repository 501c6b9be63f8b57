//! Compress a precover and inspect the rounding error.
//!
//! cargo run --example compress -- [image.pgm] [qf]

use jsteg::corpus::{synthetic_image, CorpusSpec};
use jsteg::io::pgm;
use jsteg::jpeg::{compress, rounding_error};
use jsteg::sideinfo::summarize;

fn main() -> jsteg::Result<()> {
    let mut args = std::env::args().skip(1);
    let img = match args.next() {
        Some(path) => pgm::read(path)?,
        None => synthetic_image(&CorpusSpec::default(), 0),
    };
    let qf = args.next().map_or(Ok(75), |s| s.parse()).unwrap_or(75);

    let (c, u) = compress(&img, qf)?;
    let e = rounding_error(&u, &c)?;
    let s = summarize(&e);
    println!("{}x{} at QF {qf}", img.height(), img.width());
    println!("non-zero AC coefficients: {}", c.count_nnz_ac());
    println!("rounding error: mean |e| {:.4}, max |e| {:.4}", s.mean_abs, s.max_abs);

    let decoded = c.decompress();
    let err = img
        .to_real()
        .pixels
        .as_slice()
        .iter()
        .zip(decoded.pixels.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("max pixel error after decode: {err:.2}");
    Ok(())
}
