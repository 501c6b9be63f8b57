//! Staircase, relaxed and asymmetric simulators, and their gradients.

use jsteg::coding::ProbabilityMap;
use jsteg::simulate::{
    asymmetric_simulate, relaxed_simulate, sample_noise, simulator_gradient, staircase_simulate, ModificationMap,
    Simulator,
};
use jsteg::Grid;

fn main() -> jsteg::Result<()> {
    let side = 512;
    let cells = (side * side) as f64;
    let noise = sample_noise(side, side, 1);
    for p in [0.1, 0.4, 0.8] {
        let total = Grid::filled(side, side, p);
        let probs = ProbabilityMap::symmetric(&total)?;
        let ModificationMap::Ternary(m) = staircase_simulate(&probs, &noise)? else { unreachable!() };
        let plus = m.as_slice().iter().filter(|&&v| v == 1).count() as f64 / cells;
        let minus = m.as_slice().iter().filter(|&&v| v == -1).count() as f64 / cells;
        let ModificationMap::Relaxed(r) = relaxed_simulate(&probs, &noise)? else { unreachable!() };
        let mean_abs = r.as_slice().iter().map(|v| v.abs()).sum::<f64>() / cells;
        let gs = simulator_gradient(Simulator::Staircase, &total, &noise)?;
        let gr = simulator_gradient(Simulator::Relaxed, &total, &noise)?;
        let nonzero = |g: &Grid<f64>| g.as_slice().iter().filter(|v| **v != 0.0).count() as f64 / cells;
        println!(
            "p={p}: staircase +{plus:.4} -{minus:.4} | relaxed mean |m| {mean_abs:.3} | non-zero grad: staircase {:.3}, relaxed {:.3}",
            nonzero(&gs),
            nonzero(&gr)
        );
    }

    // asymmetric: three times as many +1 as -1
    let probs = ProbabilityMap::new(Grid::filled(side, side, 0.3), Grid::filled(side, side, 0.1))?;
    let ModificationMap::Ternary(m) = asymmetric_simulate(&probs, &noise)? else { unreachable!() };
    let plus = m.as_slice().iter().filter(|&&v| v == 1).count() as f64 / cells;
    let minus = m.as_slice().iter().filter(|&&v| v == -1).count() as f64 / cells;
    println!("asymmetric (0.3, 0.1): +{plus:.4} -{minus:.4}");
    Ok(())
}
