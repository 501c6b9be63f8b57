//! Gabor features and the linear detector on a small corpus.
//!
//! JSTEG_THREADS caps the worker pool.

use jsteg::corpus::{synthetic_corpus, CorpusSpec};
use jsteg::experiment::{Experiment, ExperimentConfig, Variant};
use jsteg::steganalysis::gabor::gabor_bank;

fn main() -> jsteg::Result<()> {
    for k in gabor_bank().iter().take(4) {
        let p = &k.params;
        println!(
            "kernel sigma {:.2} theta {:.3} phi {:.3} lambda {:.3}: sum {:+.1e}",
            p.sigma,
            p.theta,
            p.phi,
            p.lambda,
            k.taps.as_slice().iter().sum::<f64>()
        );
    }

    let precovers = synthetic_corpus(&CorpusSpec {
        count: 100,
        ..Default::default()
    });
    let ex = Experiment::prepare(&precovers, ExperimentConfig::default())?;
    for q in [0.1, 0.5, 1.0] {
        let r = ex.evaluate(&Variant::Symmetric, q, 1)?;
        println!(
            "q={q}: P_E {:.3} (P_FA {:.3}, P_MD {:.3}) on {} test examples, {} features",
            r.p_e, r.p_fa, r.p_md, r.n_test, r.n_features
        );
    }
    Ok(())
}
