//! Cost source → inter-block smoothing → SI and ESI adjustment.

use jsteg::coding::{probability_from_cost, CostMap};
use jsteg::corpus::{synthetic_image, CorpusSpec};
use jsteg::costs::{adjust_costs_esi, adjust_costs_si, energy_costs, smooth_costs, EsiParams};
use jsteg::jpeg::{compress, rounding_error};
use jsteg::sideinfo::{estimate_precover_baseline, estimated_side_info};

fn finite_mean(g: &jsteg::Grid<f64>) -> f64 {
    let v: Vec<f64> = g.as_slice().iter().copied().filter(|v| v.is_finite()).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn show(name: &str, c: &CostMap) {
    let p = probability_from_cost(c);
    println!(
        "{name:<10} mean rho+ {:>7.3}  mean rho- {:>7.3}  symmetric {}  mean p(lambda=1) {:.4}",
        finite_mean(&c.plus),
        finite_mean(&c.minus),
        c.is_symmetric(),
        finite_mean(&p.total())
    );
}

fn main() -> jsteg::Result<()> {
    let img = synthetic_image(&CorpusSpec::default(), 3);
    let (cover, unrounded) = compress(&img, 75)?;
    let e = rounding_error(&unrounded, &cover)?;

    let raw = energy_costs(&cover);
    let smooth = smooth_costs(&raw, 1.0, 2)?;
    show("raw", &raw);
    show("smoothed", &smooth);
    show("si", &adjust_costs_si(&smooth, &e)?);

    let est = estimate_precover_baseline(&cover, 0.8)?;
    let e_hat = estimated_side_info(&cover, &est)?;
    for (delta, eta) in [(0.0, 0.65), (0.05, 0.65), (0.5, 0.65), (0.0, 1.0)] {
        let c = adjust_costs_esi(&smooth, &e_hat, &EsiParams::new(delta, eta)?)?;
        show(&format!("esi {delta}/{eta}"), &c);
    }
    Ok(())
}
