//! Adversarial and capacity losses over a probability map.

use jsteg::coding::{solve_lambda, PayloadSpec, DEFAULT_TOLERANCE};
use jsteg::corpus::{synthetic_image, CorpusSpec};
use jsteg::costs::energy_costs;
use jsteg::jpeg::compress;
use jsteg::objectives::{
    capacity, loss_discriminator, loss_generator_adversarial, loss_generator_capacity, loss_generator_total,
    CapacityMode, ClassifierOutput, ObjectiveWeights,
};

fn main() -> jsteg::Result<()> {
    let (cover, _) = compress(&synthetic_image(&CorpusSpec::default(), 2), 75)?;
    let payload = PayloadSpec::for_cover(0.4, &cover)?;
    let sol = solve_lambda(&energy_costs(&cover), &payload, DEFAULT_TOLERANCE)?;

    for mode in [CapacityMode::StandardTernary, CapacityMode::Literal] {
        println!(
            "{mode:?}: capacity {:.1} bits for a {:.1}-bit payload, capacity loss {:.3}",
            capacity(&sol.probabilities, mode).bits,
            payload.bits(),
            loss_generator_capacity(&sol.probabilities, &payload, mode)
        );
    }

    let l2 = loss_generator_capacity(&sol.probabilities, &payload, CapacityMode::default());
    let weights = ObjectiveWeights::default();
    for z in [[0.9, 0.1], [0.5, 0.5], [0.2, 0.8]] {
        let l_d = loss_discriminator(&ClassifierOutput::new(z, [1.0, 0.0])?);
        let l1 = loss_generator_adversarial(l_d);
        println!(
            "scores {z:?}: l_D {l_d:.4}, l_G1 {l1:.4}, l_G {:.4}",
            loss_generator_total(l1, l2, &weights)
        );
    }
    Ok(())
}
