//! Solve for λ so the Gibbs distribution carries exactly q·ε bits.

use std::time::Instant;

use jsteg::coding::{distortion, solve_lambda, ternary_entropy, PayloadSpec, DEFAULT_TOLERANCE};
use jsteg::corpus::{synthetic_image, CorpusSpec};
use jsteg::costs::energy_costs;
use jsteg::jpeg::compress;
use jsteg::simulate::{apply_modifications, asymmetric_simulate, sample_noise};

fn main() -> jsteg::Result<()> {
    let img = synthetic_image(&CorpusSpec::default(), 1);
    let (cover, _) = compress(&img, 75)?;
    let costs = energy_costs(&cover);

    println!("{:>5} {:>10} {:>10} {:>12} {:>6} {:>9}", "q", "bits", "lambda", "entropy", "iters", "time");
    for q in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let payload = PayloadSpec::for_cover(q, &cover)?;
        let t = Instant::now();
        let sol = solve_lambda(&costs, &payload, DEFAULT_TOLERANCE)?;
        let dt = t.elapsed();
        println!(
            "{q:>5} {:>10.1} {:>10.4} {:>12.4} {:>6} {:>9.2?}",
            payload.bits(),
            sol.lambda,
            ternary_entropy(&sol.probabilities),
            sol.iterations,
            dt
        );
        if q == 0.4 {
            let (h, w) = cover.shape();
            let m = asymmetric_simulate(&sol.probabilities, &sample_noise(h, w, 7))?;
            let stego = apply_modifications(&cover, &m)?;
            println!("      simulated distortion at q = 0.4: {:.2}", distortion(&cover, &stego, &costs)?);
        }
    }
    Ok(())
}
