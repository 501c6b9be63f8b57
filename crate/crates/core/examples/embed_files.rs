//! File-level pipeline: PGM → planes → ESI estimate → stego → detector report.

use jsteg::commands::*;
use jsteg::corpus::{synthetic_corpus, CorpusSpec};
use jsteg::io::pgm;

fn main() -> jsteg::Result<()> {
    let root = std::env::temp_dir().join("jsteg-embed-files");
    let (pre, cov, steg) = (root.join("precover"), root.join("cover"), root.join("stego"));
    for d in [&pre, &cov, &steg, &root.join("si")] {
        std::fs::create_dir_all(d)?;
    }
    let imgs = synthetic_corpus(&CorpusSpec {
        count: 60,
        ..Default::default()
    });
    let cfg = EmbedConfig {
        mode: EmbedMode::Esi,
        seed: 11,
        ..Default::default()
    };
    for (i, img) in imgs.iter().enumerate() {
        let name = format!("{i:03}");
        let pgm_path = pre.join(format!("{name}.pgm"));
        pgm::write(img, &pgm_path)?;
        let r = cmd_compress(&pgm_path, 75, &root.join(&name), true)?;
        let cover = cov.join(format!("{name}.grid"));
        std::fs::rename(&r.rounded, &cover)?;
        let si = root.join("si").join(format!("{name}.grid"));
        cmd_estimate_si(&cover, &EstimatorSpec::Baseline { strength: 0.8 }, Some(&r.unrounded), &si, true)?;
        let inputs = EmbedInputs {
            cover,
            side_info: Some(si),
            out: steg.join(format!("{name}.grid")),
            report: Some(root.join(format!("{name}.json"))),
            ..Default::default()
        };
        let rep = cmd_embed(&cfg, &inputs, true)?;
        if i < 3 {
            println!(
                "{name}: lambda {:.3}, {:.1} bits, +{:.4} -{:.4}",
                rep.lambda, rep.achieved_entropy, rep.change_rates.plus, rep.change_rates.minus
            );
        }
    }
    let r = cmd_evaluate(&cov, &steg, 1, &root.join("evaluate.json"), true)?;
    println!("P_E {:.3} over {} pairs", r.detection.p_e, r.pairs);
    Ok(())
}
