//! Embedding simulators.
//!
//! Noise comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`, with the ChaCha stream id set to the image index.
//! Distinct `(seed, stream)` pairs give independent fields; the generator is
//! part of the reproducibility contract and must not change.
//!
//! The staircase simulator is what actual embedding uses. The relaxed
//! simulator `m = p·(1 − 2[n > 0.5])` keeps a unit derivative in `p` and is
//! only ever evaluated, never applied to coefficients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::coding::ProbabilityMap;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::jpeg::RoundedPlane;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    pub values: Grid<f64>,
    pub seed: u64,
    pub stream: u64,
}

pub fn sample_noise(height: usize, width: usize, seed: u64) -> NoiseField {
    sample_noise_stream(height, width, seed, 0)
}

/// Uniform `[0, 1)` field for image `stream` under `seed`.
pub fn sample_noise_stream(height: usize, width: usize, seed: u64, stream: u64) -> NoiseField {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let values = Grid::from_fn(height, width, |_, _| rng.gen::<f64>());
    NoiseField {
        values,
        seed,
        stream,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModificationMap {
    /// Values in {−1, 0, +1}.
    Ternary(Grid<i8>),
    /// Values in [−1, 1]; objective evaluation only.
    Relaxed(Grid<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Simulator {
    Staircase,
    Relaxed,
}

#[inline]
pub fn staircase_cell(p: f64, n: f64) -> i8 {
    if n < p / 2.0 {
        -1
    } else if n > 1.0 - p / 2.0 {
        1
    } else {
        0
    }
}

#[inline]
pub fn relaxed_cell(p: f64, n: f64) -> f64 {
    p * (1.0 - 2.0 * ((n > 0.5) as u8 as f64))
}

#[inline]
pub fn asymmetric_cell(p_plus: f64, p_minus: f64, n: f64) -> i8 {
    if n < p_plus {
        1
    } else if n >= 1.0 - p_minus {
        -1
    } else {
        0
    }
}

pub fn staircase_simulate(probs: &ProbabilityMap, noise: &NoiseField) -> Result<ModificationMap> {
    let p = probs.total();
    Ok(ModificationMap::Ternary(
        p.zip_map(&noise.values, |&p, &n| staircase_cell(p, n))?,
    ))
}

/// Ternary sampling of `(p⁺, p⁻)`: `+1` if `n < p⁺`, `−1` if `n ≥ 1 − p⁻`.
pub fn asymmetric_simulate(probs: &ProbabilityMap, noise: &NoiseField) -> Result<ModificationMap> {
    probs.plus.ensure_same_shape(&noise.values)?;
    let w = noise.values.width();
    let mut out = Vec::with_capacity(noise.values.len());
    for (i, ((&a, &b), &n)) in probs
        .plus
        .as_slice()
        .iter()
        .zip(probs.minus.as_slice())
        .zip(noise.values.as_slice())
        .enumerate()
    {
        if a + b > 1.0 + 1e-12 {
            return Err(Error::ProbabilitySum {
                row: i / w,
                col: i % w,
                sum: a + b,
            });
        }
        out.push(asymmetric_cell(a, b, n));
    }
    Ok(ModificationMap::Ternary(Grid::from_vec(
        noise.values.height(),
        w,
        out,
    )?))
}

pub fn relaxed_simulate(probs: &ProbabilityMap, noise: &NoiseField) -> Result<ModificationMap> {
    let p = probs.total();
    Ok(ModificationMap::Relaxed(
        p.zip_map(&noise.values, |&p, &n| relaxed_cell(p, n))?,
    ))
}

/// Analytic `∂m/∂p`. The staircase derivative is 0 off its two breakpoints
/// and undefined (NaN) on them; the relaxed derivative is `±1` everywhere.
pub fn simulator_gradient(sim: Simulator, p: &Grid<f64>, noise: &NoiseField) -> Result<Grid<f64>> {
    p.zip_map(&noise.values, |&p, &n| match sim {
        Simulator::Staircase => {
            if n == p / 2.0 || n == 1.0 - p / 2.0 {
                f64::NAN
            } else {
                0.0
            }
        }
        Simulator::Relaxed => 1.0 - 2.0 * ((n > 0.5) as u8 as f64),
    })
}

/// `S = C + M`.
pub fn apply_modifications(cover: &RoundedPlane, m: &ModificationMap) -> Result<RoundedPlane> {
    let ModificationMap::Ternary(m) = m else {
        return Err(Error::RelaxedModification);
    };
    Ok(RoundedPlane {
        coeffs: cover.coeffs.zip_map(m, |&c, &d| c + d as i32)?,
        quant: cover.quant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChangeRates {
    pub plus: f64,
    pub minus: f64,
    pub zero: f64,
}

impl ChangeRates {
    pub fn changed(&self) -> f64 {
        self.plus + self.minus
    }
}

pub fn empirical_change_rates(cover: &RoundedPlane, stego: &RoundedPlane) -> Result<ChangeRates> {
    cover.coeffs.ensure_same_shape(&stego.coeffs)?;
    let w = cover.coeffs.width();
    let (mut up, mut down) = (0usize, 0usize);
    for (i, (&c, &s)) in cover
        .coeffs
        .as_slice()
        .iter()
        .zip(stego.coeffs.as_slice())
        .enumerate()
    {
        match s as i64 - c as i64 {
            0 => {}
            1 => up += 1,
            -1 => down += 1,
            diff => {
                return Err(Error::NonTernary {
                    row: i / w,
                    col: i % w,
                    diff,
                })
            }
        }
    }
    let n = cover.coeffs.len() as f64;
    Ok(ChangeRates {
        plus: up as f64 / n,
        minus: down as f64 / n,
        zero: (cover.coeffs.len() - up - down) as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{gibbs_probabilities, solve_lambda, ternary_entropy_cell, CostMap, PayloadSpec};
    use crate::jpeg::QuantTable;

    fn probs(h: usize, w: usize, p: f64) -> ProbabilityMap {
        ProbabilityMap::symmetric(&Grid::filled(h, w, p)).unwrap()
    }

    fn field(values: Grid<f64>) -> NoiseField {
        NoiseField {
            values,
            seed: 0,
            stream: 0,
        }
    }

    fn ternary(m: ModificationMap) -> Grid<i8> {
        match m {
            ModificationMap::Ternary(g) => g,
            ModificationMap::Relaxed(_) => panic!("expected ternary"),
        }
    }

    fn binomial_ok(count: usize, n: usize, p: f64) -> bool {
        let rate = count as f64 / n as f64;
        (rate - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn noise_is_reproducible_and_stream_separated() {
        let a = sample_noise_stream(16, 16, 42, 3);
        let b = sample_noise_stream(16, 16, 42, 3);
        let c = sample_noise_stream(16, 16, 42, 4);
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert!(a.values.as_slice().iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn noise_mean_and_ks() {
        let n = sample_noise(1000, 1000, 5);
        let mean = n.values.as_slice().iter().sum::<f64>() / 1e6;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");

        let mut v: Vec<f64> = sample_noise(1, 100_000, 6).values.into_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = v.len() as f64;
        let d = v
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
            .fold(0.0, f64::max);
        // 1% critical value ≈ 1.628 / √n
        assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
    }

    #[test]
    fn staircase_cases() {
        let m = ternary(staircase_simulate(&probs(1, 1, 0.5), &field(Grid::filled(1, 1, 0.2))).unwrap());
        assert_eq!(m.as_slice(), &[-1]);
        assert_eq!(staircase_cell(0.5, 0.9), 1);
        assert_eq!(staircase_cell(0.5, 0.5), 0);
        let noise = sample_noise(64, 64, 1);
        let m = ternary(staircase_simulate(&probs(64, 64, 0.0), &noise).unwrap());
        assert!(m.as_slice().iter().all(|&v| v == 0));
        assert!(staircase_simulate(&probs(8, 8, 0.1), &sample_noise(8, 16, 1)).is_err());
    }

    #[test]
    fn staircase_marginals() {
        let n = 1_000_000;
        let m = ternary(staircase_simulate(&probs(1000, 1000, 0.4), &sample_noise(1000, 1000, 2)).unwrap());
        let up = m.as_slice().iter().filter(|&&v| v == 1).count();
        let down = m.as_slice().iter().filter(|&&v| v == -1).count();
        assert!(binomial_ok(up, n, 0.2), "{up}");
        assert!(binomial_ok(down, n, 0.2), "{down}");
    }

    #[test]
    fn asymmetric_cases() {
        let p = ProbabilityMap::new(Grid::filled(32, 32, 1.0), Grid::filled(32, 32, 0.0)).unwrap();
        let m = ternary(asymmetric_simulate(&p, &sample_noise(32, 32, 3)).unwrap());
        assert!(m.as_slice().iter().all(|&v| v == 1));

        let bad = ProbabilityMap {
            plus: Grid::filled(1, 1, 0.7),
            minus: Grid::filled(1, 1, 0.6),
        };
        assert!(matches!(
            asymmetric_simulate(&bad, &sample_noise(1, 1, 0)),
            Err(Error::ProbabilitySum { .. })
        ));

        let n = 1_000_000;
        let p = ProbabilityMap::new(Grid::filled(1000, 1000, 0.3), Grid::filled(1000, 1000, 0.1)).unwrap();
        let m = ternary(asymmetric_simulate(&p, &sample_noise(1000, 1000, 4)).unwrap());
        let up = m.as_slice().iter().filter(|&&v| v == 1).count();
        let down = m.as_slice().iter().filter(|&&v| v == -1).count();
        assert!(binomial_ok(up, n, 0.3));
        assert!(binomial_ok(down, n, 0.1));

        // symmetric split has the staircase marginals
        let m = ternary(asymmetric_simulate(&probs(1000, 1000, 0.4), &sample_noise(1000, 1000, 5)).unwrap());
        let up = m.as_slice().iter().filter(|&&v| v == 1).count();
        let down = m.as_slice().iter().filter(|&&v| v == -1).count();
        assert!(binomial_ok(up, n, 0.2) && binomial_ok(down, n, 0.2));
    }

    #[test]
    fn relaxed_cases() {
        assert_eq!(relaxed_cell(0.3, 0.7), -0.3);
        assert_eq!(relaxed_cell(0.3, 0.2), 0.3);
        assert_eq!(relaxed_cell(0.0, 0.9), 0.0);
        let noise = sample_noise(1000, 1000, 6);
        let p = Grid::from_fn(1000, 1000, |r, c| ((r * 7 + c * 13) % 100) as f64 / 100.0);
        let ModificationMap::Relaxed(m) =
            relaxed_simulate(&ProbabilityMap::symmetric(&p).unwrap(), &noise).unwrap()
        else {
            panic!()
        };
        for (mv, pv) in m.as_slice().iter().zip(p.as_slice()) {
            assert_eq!(mv.abs(), *pv);
        }
        let sign_mean = noise
            .values
            .as_slice()
            .iter()
            .map(|&n| 1.0 - 2.0 * ((n > 0.5) as u8 as f64))
            .sum::<f64>()
            / 1e6;
        assert!(sign_mean.abs() < 3e-3);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let noise = sample_noise(100, 100, 7);
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let p = Grid::from_fn(100, 100, |_, _| rng.gen_range(0.001..0.999));
        let gs = simulator_gradient(Simulator::Staircase, &p, &noise).unwrap();
        let gr = simulator_gradient(Simulator::Relaxed, &p, &noise).unwrap();
        let h = 1e-6;
        let mut checked = 0;
        for i in 0..p.len() {
            let (pv, n) = (p.as_slice()[i], noise.values.as_slice()[i]);
            if (n - pv / 2.0).abs() < 1e-3 || (n - (1.0 - pv / 2.0)).abs() < 1e-3 || (n - 0.5).abs() < 1e-3 {
                continue;
            }
            checked += 1;
            let fd_s = (staircase_cell(pv + h, n) - staircase_cell(pv - h, n)) as f64 / (2.0 * h);
            let fd_r = (relaxed_cell(pv + h, n) - relaxed_cell(pv - h, n)) / (2.0 * h);
            assert_eq!(gs.as_slice()[i], 0.0);
            assert!((fd_s - gs.as_slice()[i]).abs() < 1e-4);
            assert!((fd_r - gr.as_slice()[i]).abs() < 1e-4);
            assert_eq!(gr.as_slice()[i].abs(), 1.0);
        }
        assert!(checked > 9000);
        assert_eq!(simulator_gradient(Simulator::Staircase, &Grid::filled(1, 1, 0.4), &field(Grid::filled(1, 1, 0.9))).unwrap().as_slice(), &[0.0]);
        assert_eq!(simulator_gradient(Simulator::Relaxed, &Grid::filled(1, 1, 0.2), &field(Grid::filled(1, 1, 0.7))).unwrap().as_slice(), &[-1.0]);
    }

    fn cover() -> RoundedPlane {
        RoundedPlane::new(
            Grid::from_fn(16, 16, |r, c| (r as i32 - c as i32) % 5),
            QuantTable::for_quality(75).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn apply_and_rates() {
        let c = cover();
        let zero = ModificationMap::Ternary(Grid::filled(16, 16, 0));
        assert_eq!(apply_modifications(&c, &zero).unwrap(), c);
        assert_eq!(
            empirical_change_rates(&c, &c).unwrap(),
            ChangeRates { plus: 0.0, minus: 0.0, zero: 1.0 }
        );

        let mut m = Grid::filled(16, 16, 0i8);
        *m.get_mut(3, 4) = 1;
        *m.get_mut(5, 5) = -1;
        *m.get_mut(9, 1) = -1;
        let s = apply_modifications(&c, &ModificationMap::Ternary(m.clone())).unwrap();
        let diff = s.coeffs.zip_map(&c.coeffs, |a, b| (a - b) as i8).unwrap();
        assert_eq!(diff, m);
        let r = empirical_change_rates(&c, &s).unwrap();
        assert_eq!(r.plus, 1.0 / 256.0);
        assert_eq!(r.minus, 2.0 / 256.0);

        assert!(matches!(
            apply_modifications(&c, &ModificationMap::Relaxed(Grid::filled(16, 16, 0.1))),
            Err(Error::RelaxedModification)
        ));
        let mut far = c.clone();
        *far.coeffs.get_mut(0, 0) += 2;
        assert!(matches!(empirical_change_rates(&c, &far), Err(Error::NonTernary { .. })));
    }

    #[test]
    fn simulated_embedding_hits_payload_entropy() {
        // Large plane with textured costs; q = 0.4 over the non-zero ACs.
        let (h, w) = (512, 512);
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let rho = Grid::from_fn(h, w, |_, _| rng.gen_range(0.1..4.0));
        let costs = CostMap::symmetric(rho).unwrap();
        let payload = PayloadSpec::new(0.4, h * w * 3 / 4).unwrap();
        let sol = solve_lambda(&costs, &payload, 1e-8).unwrap();
        let c = RoundedPlane::new(Grid::filled(h, w, 0), QuantTable::for_quality(75).unwrap()).unwrap();
        let m = asymmetric_simulate(&sol.probabilities, &sample_noise(h, w, 11)).unwrap();
        let s = apply_modifications(&c, &m).unwrap();
        let r = empirical_change_rates(&c, &s).unwrap();
        let observed = (h * w) as f64 * ternary_entropy_cell(r.plus, r.minus);
        // Uniform-rate entropy upper-bounds the per-cell sum; compare against the
        // same pooled quantity computed from the Gibbs probabilities.
        let tp: f64 = sol.probabilities.plus.as_slice().iter().sum::<f64>() / (h * w) as f64;
        let tm: f64 = sol.probabilities.minus.as_slice().iter().sum::<f64>() / (h * w) as f64;
        let expected = (h * w) as f64 * ternary_entropy_cell(tp, tm);
        assert!((observed / expected - 1.0).abs() < 0.02, "{observed} vs {expected}");

        let uniform = CostMap::symmetric(Grid::filled(h, w, 1.0)).unwrap();
        let sol = solve_lambda(&uniform, &payload, 1e-8).unwrap();
        let m = asymmetric_simulate(&sol.probabilities, &sample_noise(h, w, 12)).unwrap();
        let s = apply_modifications(&c, &m).unwrap();
        let r = empirical_change_rates(&c, &s).unwrap();
        let observed = (h * w) as f64 * ternary_entropy_cell(r.plus, r.minus);
        assert!((observed / payload.bits() - 1.0).abs() < 0.02, "{observed} vs {}", payload.bits());
        let _ = gibbs_probabilities(&uniform, sol.lambda).unwrap();
    }

    #[test]
    fn average_distortion_matches_expectation() {
        let (h, w) = (64, 64);
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let costs = CostMap::asymmetric(
            Grid::from_fn(h, w, |_, _| rng.gen_range(0.1..3.0)),
            Grid::from_fn(h, w, |_, _| rng.gen_range(0.1..3.0)),
        )
        .unwrap();
        let sol = solve_lambda(&costs, &PayloadSpec::new(0.4, 3000).unwrap(), 1e-8).unwrap();
        let expected: f64 = (0..h * w)
            .map(|i| {
                sol.probabilities.plus.as_slice()[i] * costs.plus.as_slice()[i]
                    + sol.probabilities.minus.as_slice()[i] * costs.minus.as_slice()[i]
            })
            .sum();
        let c = RoundedPlane::new(Grid::filled(h, w, 0), QuantTable::for_quality(75).unwrap()).unwrap();
        let mut total = 0.0;
        for trial in 0..100 {
            let m = asymmetric_simulate(&sol.probabilities, &sample_noise_stream(h, w, 14, trial)).unwrap();
            let s = apply_modifications(&c, &m).unwrap();
            total += crate::coding::distortion(&c, &s, &costs).unwrap();
        }
        let avg = total / 100.0;
        assert!((avg / expected - 1.0).abs() < 0.05, "{avg} vs {expected}");
    }
}
