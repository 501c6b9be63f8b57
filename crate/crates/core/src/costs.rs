//! Cost post-processing: inter-block smoothing and asymmetric adjustment
//! from (estimated) rounding errors, plus two built-in cost sources for
//! running the pipeline without a learned probability map.
//!
//! Order of application: cost source → [`smooth_costs`] → SI/ESI adjustment.

use serde::{Deserialize, Serialize};

use crate::coding::CostMap;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::jpeg::{is_dc, RoundedPlane, SideInfoMap, BLOCK};

pub const DEFAULT_SMOOTH_SIGMA: f64 = 1.0;
pub const DEFAULT_SMOOTH_RADIUS: usize = 2;

/// Amplitude threshold δ and polarity factor η of the estimated-side-information rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsiParams {
    pub delta: f64,
    pub eta: f64,
}

impl Default for EsiParams {
    fn default() -> Self {
        Self {
            delta: 0.05,
            eta: 0.65,
        }
    }
}

impl EsiParams {
    pub fn new(delta: f64, eta: f64) -> Result<Self> {
        let p = Self { delta, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!(
                "delta {} outside [0, 0.5]",
                self.delta
            )));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidParameter(format!("eta {} outside (0, 1]", self.eta)));
        }
        Ok(())
    }

    /// Multiplier applied to the cost of changing toward `sign(ê)`.
    #[inline]
    pub fn gain(&self, e_hat: f64) -> f64 {
        if e_hat.abs() <= self.delta {
            amplitude_gain(e_hat)
        } else {
            self.eta
        }
    }
}

#[inline]
fn amplitude_gain(e: f64) -> f64 {
    1.0 - 2.0 * e.abs()
}

fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut k = Vec::with_capacity((2 * radius + 1).pow(2));
    for dy in -r..=r {
        for dx in -r..=r {
            k.push((-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Smooths each DCT mode's cross-block cost grid with a normalized Gaussian.
///
/// Borders replicate the edge block. Wet (`+∞`) cells stay wet and are left
/// out of their neighbours' averages, with the remaining weights renormalized.
pub fn smooth_costs(costs: &CostMap, sigma: f64, radius: usize) -> Result<CostMap> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma {sigma} must be positive")));
    }
    costs.plus.ensure_block_aligned()?;
    let kernel = gaussian_kernel(sigma, radius);
    let plus = smooth_plane(&costs.plus, &kernel, radius);
    let minus = if costs.is_symmetric() {
        plus.clone()
    } else {
        smooth_plane(&costs.minus, &kernel, radius)
    };
    Ok(CostMap { plus, minus })
}

fn smooth_plane(rho: &Grid<f64>, kernel: &[f64], radius: usize) -> Grid<f64> {
    let (h, w) = rho.shape();
    let (bh, bw) = (h / BLOCK, w / BLOCK);
    let r = radius as isize;
    let side = 2 * radius + 1;
    Grid::from_fn(h, w, |row, col| {
        let centre = *rho.get(row, col);
        if !centre.is_finite() {
            return centre;
        }
        let (u, v) = (row % BLOCK, col % BLOCK);
        let (by, bx) = ((row / BLOCK) as isize, (col / BLOCK) as isize);
        let mut acc = 0.0;
        let mut weight = 0.0;
        for dy in -r..=r {
            let ny = (by + dy).clamp(0, bh as isize - 1) as usize;
            for dx in -r..=r {
                let nx = (bx + dx).clamp(0, bw as isize - 1) as usize;
                let val = *rho.get(ny * BLOCK + u, nx * BLOCK + v);
                if val.is_finite() {
                    let k = kernel[(dy + r) as usize * side + (dx + r) as usize];
                    acc += k * val;
                    weight += k;
                }
            }
        }
        acc / weight
    })
}

fn require_symmetric(costs: &CostMap) -> Result<&Grid<f64>> {
    if !costs.is_symmetric() {
        return Err(Error::InvalidParameter(
            "side-information adjustment expects a symmetric cost map".into(),
        ));
    }
    Ok(&costs.plus)
}

/// Lowers the cost toward `sign(e)` by `gain(e)`; the other direction keeps ρ.
fn adjust_toward_sign(rho: &Grid<f64>, side: &Grid<f64>, gain: impl Fn(f64) -> f64) -> CostMap {
    let mut plus = rho.clone();
    let mut minus = rho.clone();
    for (i, (&r, &e)) in rho.as_slice().iter().zip(side.as_slice()).enumerate() {
        if e == 0.0 || !r.is_finite() {
            continue;
        }
        let lowered = gain(e) * r;
        if e > 0.0 {
            plus.as_mut_slice()[i] = lowered;
        } else {
            minus.as_mut_slice()[i] = lowered;
        }
    }
    CostMap { plus, minus }
}

/// Side-informed costs from the true rounding error:
/// `ρ(toward sign e) = (1 − 2|e|)·ρ`.
pub fn adjust_costs_si(costs: &CostMap, e: &SideInfoMap) -> Result<CostMap> {
    let rho = require_symmetric(costs)?;
    rho.ensure_same_shape(&e.0)?;
    if let Some((i, &v)) = e.0.as_slice().iter().enumerate().find(|(_, v)| v.abs() > 0.5) {
        let (row, col) = e.0.position(i);
        return Err(Error::RoundingErrorRange { row, col, value: v });
    }
    Ok(adjust_toward_sign(rho, &e.0, amplitude_gain))
}

/// Costs from an estimated rounding error: amplitude rule for `|ê| ≤ δ`,
/// constant factor η beyond. `ê` is not required to lie in `[−0.5, 0.5]`.
pub fn adjust_costs_esi(costs: &CostMap, e_hat: &SideInfoMap, params: &EsiParams) -> Result<CostMap> {
    params.validate()?;
    let rho = require_symmetric(costs)?;
    rho.ensure_same_shape(&e_hat.0)?;
    Ok(adjust_toward_sign(rho, &e_hat.0, |e| params.gain(e)))
}

/// ρ = 1 everywhere.
pub fn flat_costs(cover: &RoundedPlane) -> CostMap {
    let (h, w) = cover.shape();
    let rho = Grid::filled(h, w, 1.0);
    CostMap {
        plus: rho.clone(),
        minus: rho,
    }
}

/// Block-energy baseline: `ρ = q(mode) / (D_b + ¼ Σ D_neighbours + 1)` where
/// `D_b` is the dequantized AC magnitude of block `b`; DC coefficients are wet.
///
/// Not a learned cost. Textured neighbourhoods get cheap changes, flat ones
/// expensive changes, and low frequencies are cheaper than high.
pub fn energy_costs(cover: &RoundedPlane) -> CostMap {
    let (h, w) = cover.shape();
    let (bh, bw) = (h / BLOCK, w / BLOCK);
    let mut energy = vec![0.0; bh * bw];
    for row in 0..h {
        for col in 0..w {
            if !is_dc(row, col) {
                energy[(row / BLOCK) * bw + col / BLOCK] +=
                    (*cover.coeffs.get(row, col) as f64).abs() * cover.quant.for_position(row, col);
            }
        }
    }
    let mut local = vec![0.0; bh * bw];
    for by in 0..bh {
        for bx in 0..bw {
            let mut neighbours = 0.0;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dy == 0 && dx == 0 {
                        continue;
                    }
                    let (ny, nx) = (by as isize + dy, bx as isize + dx);
                    if ny >= 0 && nx >= 0 && (ny as usize) < bh && (nx as usize) < bw {
                        neighbours += energy[ny as usize * bw + nx as usize];
                    }
                }
            }
            local[by * bw + bx] = energy[by * bw + bx] + 0.25 * neighbours + 1.0;
        }
    }
    let rho = Grid::from_fn(h, w, |row, col| {
        if is_dc(row, col) {
            f64::INFINITY
        } else {
            cover.quant.for_position(row, col) / local[(row / BLOCK) * bw + col / BLOCK]
        }
    });
    CostMap {
        plus: rho.clone(),
        minus: rho,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(rho: Grid<f64>) -> CostMap {
        CostMap::symmetric(rho).unwrap()
    }

    fn random_rho(h: usize, w: usize, seed: u64) -> Grid<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Grid::from_fn(h, w, |_, _| rng.gen_range(0.0..10.0))
    }

    #[test]
    fn smoothing_keeps_constants() {
        let c = sym(Grid::filled(32, 24, 3.5));
        let s = smooth_costs(&c, 1.0, 2).unwrap();
        assert!(s.plus.as_slice().iter().all(|v| (v - 3.5).abs() < 1e-12));
    }

    #[test]
    fn smoothing_separates_modes() {
        let mut rho = Grid::filled(40, 40, 0.0);
        *rho.get_mut(2 * 8 + 2, 2 * 8 + 3) = 100.0;
        let s = smooth_costs(&sym(rho), 1.0, 2).unwrap();
        for row in 0..40 {
            for col in 0..40 {
                let v = *s.plus.get(row, col);
                if (row % 8, col % 8) == (2, 3) {
                    assert!(v > 0.0, "mode (2,3) at ({row},{col}) got {v}");
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn smoothing_matches_brute_force_convolution() {
        let rho = random_rho(48, 40, 3);
        let (sigma, radius) = (1.3, 2usize);
        let got = smooth_costs(&sym(rho.clone()), sigma, radius).unwrap();
        let (bh, bw) = (6isize, 5isize);
        for u in 0..8 {
            for v in 0..8 {
                for by in 0..bh {
                    for bx in 0..bw {
                        let (mut num, mut den) = (0.0, 0.0);
                        for dy in -2isize..=2 {
                            for dx in -2isize..=2 {
                                let g = (-((dy * dy + dx * dx) as f64) / (2.0 * sigma * sigma)).exp();
                                let y = (by + dy).max(0).min(bh - 1) as usize;
                                let x = (bx + dx).max(0).min(bw - 1) as usize;
                                num += g * rho.get(y * 8 + u, x * 8 + v);
                                den += g;
                            }
                        }
                        let want = num / den;
                        let have = got.plus.get(by as usize * 8 + u, bx as usize * 8 + v);
                        assert!((have - want).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn smoothing_is_linear_and_shift_commuting() {
        let a = random_rho(24, 24, 1);
        let b = random_rho(24, 24, 2);
        let sa = smooth_costs(&sym(a.clone()), 1.0, 2).unwrap().plus;
        let sb = smooth_costs(&sym(b.clone()), 1.0, 2).unwrap().plus;
        let sum = a.zip_map(&b, |x, y| 2.0 * x + y + 7.0).unwrap();
        let ssum = smooth_costs(&sym(sum), 1.0, 2).unwrap().plus;
        for i in 0..sa.len() {
            let want = 2.0 * sa.as_slice()[i] + sb.as_slice()[i] + 7.0;
            assert!((ssum.as_slice()[i] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn smoothing_keeps_wet_cells_wet() {
        let mut rho = Grid::filled(16, 16, 1.0);
        *rho.get_mut(0, 0) = f64::INFINITY;
        let s = smooth_costs(&sym(rho), 1.0, 1).unwrap();
        assert_eq!(*s.plus.get(0, 0), f64::INFINITY);
        assert!((s.plus.get(8, 0) - 1.0).abs() < 1e-12);
        assert!(smooth_costs(&sym(Grid::filled(8, 8, 1.0)), 0.0, 2).is_err());
    }

    #[test]
    fn si_adjustment_cases() {
        let rho = sym(Grid::filled(8, 8, 2.0));
        let mut e = Grid::filled(8, 8, 0.0);
        *e.get_mut(0, 1) = 0.3;
        *e.get_mut(0, 2) = -0.3;
        *e.get_mut(0, 3) = 0.5;
        let out = adjust_costs_si(&rho, &SideInfoMap(e.clone())).unwrap();
        assert!((out.plus.get(0, 1) - 0.8).abs() < 1e-12);
        assert_eq!(*out.minus.get(0, 1), 2.0);
        assert!((out.minus.get(0, 2) - 0.8).abs() < 1e-12);
        assert_eq!(*out.plus.get(0, 2), 2.0);
        assert_eq!(*out.plus.get(0, 3), 0.0);
        assert_eq!(*out.plus.get(0, 0), 2.0);
        assert_eq!(*out.minus.get(0, 0), 2.0);

        *e.get_mut(1, 1) = 0.6;
        assert!(matches!(
            adjust_costs_si(&rho, &SideInfoMap(e)),
            Err(Error::RoundingErrorRange { row: 1, col: 1, .. })
        ));
    }

    #[test]
    fn esi_adjustment_cases() {
        let rho = sym(Grid::filled(8, 8, 1.0));
        let params = EsiParams::default();
        let mut e = Grid::filled(8, 8, 0.0);
        *e.get_mut(0, 0) = 0.03;
        *e.get_mut(0, 1) = 0.2;
        *e.get_mut(0, 2) = -1.7;
        let out = adjust_costs_esi(&rho, &SideInfoMap(e.clone()), &params).unwrap();
        assert!((out.plus.get(0, 0) - 0.94).abs() < 1e-12);
        assert!((out.plus.get(0, 1) - 0.65).abs() < 1e-12);
        assert!((out.minus.get(0, 2) - 0.65).abs() < 1e-12);
        assert_eq!(*out.minus.get(0, 0), 1.0);

        let noop = adjust_costs_esi(&rho, &SideInfoMap(e), &EsiParams::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(noop, rho);

        assert!(EsiParams::new(0.6, 0.5).is_err());
        assert!(EsiParams::new(0.1, 0.0).is_err());
        assert!(EsiParams::new(0.1, 1.1).is_err());
    }

    #[test]
    fn esi_with_large_delta_reproduces_si() {
        let rho = sym(random_rho(16, 16, 8));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = SideInfoMap(Grid::from_fn(16, 16, |_, _| rng.gen_range(-0.5..=0.5)));
        let si = adjust_costs_si(&rho, &e).unwrap();
        let esi = adjust_costs_esi(&rho, &e, &EsiParams::new(0.5, 0.3).unwrap()).unwrap();
        assert_eq!(si, esi);
    }

    #[test]
    fn adjusters_reject_asymmetric_input() {
        let c = CostMap::asymmetric(Grid::filled(8, 8, 1.0), Grid::filled(8, 8, 2.0)).unwrap();
        let e = SideInfoMap(Grid::filled(8, 8, 0.1));
        assert!(adjust_costs_si(&c, &e).is_err());
        assert!(adjust_costs_esi(&c, &e, &EsiParams::default()).is_err());
    }

    #[test]
    fn energy_costs_shape_and_wet_dc() {
        let q = crate::jpeg::QuantTable::for_quality(75).unwrap();
        let mut coeffs = Grid::filled(16, 16, 0);
        *coeffs.get_mut(1, 1) = 10; // texture in block (0,0)
        let plane = RoundedPlane::new(coeffs, q).unwrap();
        let c = energy_costs(&plane);
        assert!(c.is_symmetric());
        assert_eq!(*c.plus.get(0, 0), f64::INFINITY);
        assert_eq!(*c.plus.get(8, 8), f64::INFINITY);
        // textured block is cheaper than its far corner neighbour
        assert!(c.plus.get(0, 1) < c.plus.get(8, 9));
        // low frequency cheaper than high within a block
        assert!(c.plus.get(8, 9) < c.plus.get(15, 15));
        assert!(flat_costs(&plane).plus.as_slice().iter().all(|&v| v == 1.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn esi_with_zero_delta_uses_only_sign(e in -3.0f64..3.0, scale in 0.01f64..5.0, rho in 0.0f64..10.0, eta in 0.05f64..1.0) {
                let c = sym(Grid::filled(8, 8, rho));
                let p = EsiParams::new(0.0, eta).unwrap();
                let a = adjust_costs_esi(&c, &SideInfoMap(Grid::filled(8, 8, e)), &p).unwrap();
                let b = adjust_costs_esi(&c, &SideInfoMap(Grid::filled(8, 8, e * scale)), &p).unwrap();
                prop_assert_eq!(a, b);
            }

            #[test]
            fn adjusters_never_go_negative_and_keep_unfavoured(e in -0.5f64..=0.5, rho in 0.0f64..10.0, delta in 0.0f64..=0.5, eta in 0.01f64..=1.0) {
                let c = sym(Grid::filled(8, 8, rho));
                let side = SideInfoMap(Grid::filled(8, 8, e));
                let si = adjust_costs_si(&c, &side).unwrap();
                let esi = adjust_costs_esi(&c, &side, &EsiParams::new(delta, eta).unwrap()).unwrap();
                for out in [&si, &esi] {
                    let (p, m) = (out.plus.as_slice()[0], out.minus.as_slice()[0]);
                    prop_assert!(p >= 0.0 && m >= 0.0);
                    prop_assert!(p * m <= rho * rho + 1e-12);
                    if e > 0.0 { prop_assert_eq!(m, rho) } else { prop_assert_eq!(p, rho) }
                }
            }

            #[test]
            fn amplitude_branch_is_monotone(a in 0.0f64..0.5, b in 0.0f64..0.5) {
                let p = EsiParams::new(0.5, 0.65).unwrap();
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                prop_assert!(p.gain(hi) <= p.gain(lo));
            }
        }
    }
}
