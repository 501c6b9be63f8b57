//! Estimate the precover and score the estimate.

use jsteg::corpus::{synthetic_image, CorpusSpec};
use jsteg::jpeg::{compress, rounding_error};
use jsteg::metrics::{estimation_loss, LossMode, SsimParams};
use jsteg::sideinfo::{estimate_precover_baseline, estimated_side_info, polarity_agreement, summarize};

fn main() -> jsteg::Result<()> {
    let spec = CorpusSpec::default();
    println!("{:>5} {:>8} {:>8} {:>8} {:>8} {:>9}", "image", "strength", "ssim", "mse", "|ê|", "polarity");
    for index in 0..4 {
        let img = synthetic_image(&spec, index);
        let (cover, unrounded) = compress(&img, 75)?;
        let e = rounding_error(&unrounded, &cover)?;
        for strength in [0.0, 0.5, 0.8, 1.2] {
            let est = estimate_precover_baseline(&cover, strength)?;
            let loss = estimation_loss(&img.to_real(), &est.image, &SsimParams::default(), LossMode::Dissimilarity)?;
            let e_hat = estimated_side_info(&cover, &est)?;
            let agree = polarity_agreement(&e, &e_hat).map_or("-".to_string(), |a| format!("{a:.3}"));
            println!(
                "{index:>5} {strength:>8} {:>8.4} {:>8.3} {:>8.4} {agree:>9}",
                loss.ssim,
                loss.mse,
                summarize(&e_hat).mean_abs
            );
        }
    }
    Ok(())
}
