//! Additive-distortion embedding: cost maps, the optimal (Gibbs) change
//! distribution, and the payload-constrained search for its temperature λ.
//!
//! Every coefficient changes independently, so the optimal distribution
//! factorizes into per-coefficient ternary distributions
//! `π± = exp(−λρ±) / Z`, `π⁰ = 1 / Z`. Payload is measured in bits.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::jpeg::RoundedPlane;

/// Probabilities are clamped to `[P_MIN, 1]` before taking `ln(2/p − 1)`.
pub const P_MIN: f64 = 1e-9;

const LAMBDA_LO: f64 = 1e-6;
const LAMBDA_HI: f64 = 1e4;
const MAX_ITERS: usize = 200;
const BRACKET_LIMIT: f64 = 1e300;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Costs of a +1 and a −1 change. `+∞` marks a forbidden direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMap {
    pub plus: Grid<f64>,
    pub minus: Grid<f64>,
}

impl CostMap {
    pub fn symmetric(rho: Grid<f64>) -> Result<Self> {
        validate_costs(&rho)?;
        Ok(Self {
            plus: rho.clone(),
            minus: rho,
        })
    }

    pub fn asymmetric(plus: Grid<f64>, minus: Grid<f64>) -> Result<Self> {
        plus.ensure_same_shape(&minus)?;
        validate_costs(&plus)?;
        validate_costs(&minus)?;
        Ok(Self { plus, minus })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.plus.shape()
    }

    pub fn is_symmetric(&self) -> bool {
        self.plus
            .as_slice()
            .iter()
            .zip(self.minus.as_slice())
            .all(|(a, b)| a == b)
    }

    /// Multiplies both directions by `factor` (`factor > 0`).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            plus: self.plus.map(|&r| r * factor),
            minus: self.minus.map(|&r| r * factor),
        }
    }
}

fn validate_costs(rho: &Grid<f64>) -> Result<()> {
    if let Some((i, v)) = rho
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, v)| v.is_nan() || **v < 0.0)
    {
        return Err(Error::InvalidParameter(format!(
            "cost {v} at index {i} is not a nonnegative number"
        )));
    }
    Ok(())
}

/// Per-coefficient change probabilities `(p⁺, p⁻)`; `p⁰ = 1 − p⁺ − p⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    pub plus: Grid<f64>,
    pub minus: Grid<f64>,
}

impl ProbabilityMap {
    /// Splits a total change probability `p` evenly: `p⁺ = p⁻ = p/2`.
    pub fn symmetric(total: &Grid<f64>) -> Result<Self> {
        if let Some((index, &value)) = total
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::OutOfRange { index, value });
        }
        let half = total.map(|&p| p / 2.0);
        Ok(Self {
            plus: half.clone(),
            minus: half,
        })
    }

    pub fn new(plus: Grid<f64>, minus: Grid<f64>) -> Result<Self> {
        plus.ensure_same_shape(&minus)?;
        for (i, (&a, &b)) in plus.as_slice().iter().zip(minus.as_slice()).enumerate() {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(Error::OutOfRange {
                    index: i,
                    value: if (0.0..=1.0).contains(&a) { b } else { a },
                });
            }
            if a + b > 1.0 + 1e-12 {
                let (row, col) = plus.position(i);
                return Err(Error::ProbabilitySum { row, col, sum: a + b });
            }
        }
        Ok(Self { plus, minus })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.plus.shape()
    }

    /// Total change probability `p⁺ + p⁻`.
    pub fn total(&self) -> Grid<f64> {
        self.plus
            .zip_map(&self.minus, |a, b| a + b)
            .expect("probability planes share a shape")
    }

    pub fn zero(&self) -> Grid<f64> {
        self.plus
            .zip_map(&self.minus, |a, b| 1.0 - a - b)
            .expect("probability planes share a shape")
    }
}

/// Payload in bits per non-zero AC coefficient, together with the count it scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadSpec {
    pub rate: f64,
    pub nnz_ac: usize,
}

impl PayloadSpec {
    pub fn new(rate: f64, nnz_ac: usize) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("payload rate {rate} must be >= 0")));
        }
        Ok(Self { rate, nnz_ac })
    }

    pub fn for_cover(rate: f64, cover: &RoundedPlane) -> Result<Self> {
        Self::new(rate, cover.count_nnz_ac())
    }

    /// Message length `m = q·ε` in bits.
    pub fn bits(&self) -> f64 {
        self.rate * self.nnz_ac as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSolution {
    pub lambda: f64,
    pub probabilities: ProbabilityMap,
    pub achieved_entropy: f64,
    pub iterations: usize,
}

/// `D(C, S) = Σ ρ± |S − C|`, directional.
pub fn distortion(cover: &RoundedPlane, stego: &RoundedPlane, costs: &CostMap) -> Result<f64> {
    cover.coeffs.ensure_same_shape(&stego.coeffs)?;
    cover.coeffs.ensure_same_shape(&costs.plus)?;
    let mut total = 0.0;
    let w = cover.coeffs.width();
    for (i, (&c, &s)) in cover
        .coeffs
        .as_slice()
        .iter()
        .zip(stego.coeffs.as_slice())
        .enumerate()
    {
        total += match s as i64 - c as i64 {
            0 => 0.0,
            1 => costs.plus.as_slice()[i],
            -1 => costs.minus.as_slice()[i],
            diff => {
                return Err(Error::NonTernary {
                    row: i / w,
                    col: i % w,
                    diff,
                })
            }
        };
    }
    Ok(total)
}

#[inline]
fn gibbs_cell(rho_plus: f64, rho_minus: f64, lambda: f64) -> (f64, f64) {
    // exp(−∞) = 0 handles wet directions.
    let a = (-lambda * rho_plus).exp();
    let b = (-lambda * rho_minus).exp();
    let z = 1.0 + a + b;
    (a / z, b / z)
}

pub fn gibbs_probabilities(costs: &CostMap, lambda: f64) -> Result<ProbabilityMap> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda {lambda} must be positive")));
    }
    let (h, w) = costs.shape();
    let mut plus = Vec::with_capacity(h * w);
    let mut minus = Vec::with_capacity(h * w);
    for (&rp, &rm) in costs.plus.as_slice().iter().zip(costs.minus.as_slice()) {
        let (a, b) = gibbs_cell(rp, rm, lambda);
        plus.push(a);
        minus.push(b);
    }
    Ok(ProbabilityMap {
        plus: Grid::from_vec(h, w, plus)?,
        minus: Grid::from_vec(h, w, minus)?,
    })
}

#[inline]
fn h2(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Ternary entropy in bits of a single coefficient's change distribution.
#[inline]
pub fn ternary_entropy_cell(p_plus: f64, p_minus: f64) -> f64 {
    h2(p_plus) + h2(p_minus) + h2(1.0 - p_plus - p_minus)
}

pub fn ternary_entropy(probs: &ProbabilityMap) -> f64 {
    probs
        .plus
        .as_slice()
        .iter()
        .zip(probs.minus.as_slice())
        .map(|(&a, &b)| ternary_entropy_cell(a, b))
        .sum()
}

fn entropy_at(costs: &CostMap, lambda: f64) -> f64 {
    costs
        .plus
        .as_slice()
        .iter()
        .zip(costs.minus.as_slice())
        .map(|(&rp, &rm)| {
            let (a, b) = gibbs_cell(rp, rm, lambda);
            ternary_entropy_cell(a, b)
        })
        .sum()
}

/// Entropy in the λ → 0⁺ limit: `log₂ k` per coefficient with `k` finite options.
pub fn max_entropy(costs: &CostMap) -> f64 {
    costs
        .plus
        .as_slice()
        .iter()
        .zip(costs.minus.as_slice())
        .map(|(rp, rm)| {
            let k = 1 + rp.is_finite() as u32 + rm.is_finite() as u32;
            (k as f64).log2()
        })
        .sum()
}

/// Finds λ with `|H(π_λ) − m| ≤ tol·m`.
///
/// Geometric bracket expansion from `[1e-6, 1e4]`, then bisection on `ln λ`
/// (entropy is strictly decreasing in λ). A zero payload returns the
/// no-change distribution at the upper bracket.
pub fn solve_lambda(costs: &CostMap, payload: &PayloadSpec, tol: f64) -> Result<LambdaSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let m = payload.bits();
    let (h, w) = costs.shape();
    if m == 0.0 {
        let zeros = Grid::filled(h, w, 0.0);
        return Ok(LambdaSolution {
            lambda: LAMBDA_HI,
            probabilities: ProbabilityMap {
                plus: zeros.clone(),
                minus: zeros,
            },
            achieved_entropy: 0.0,
            iterations: 0,
        });
    }
    let capacity = max_entropy(costs);
    let slack = tol * m;
    if m > capacity + slack {
        return Err(Error::InfeasiblePayload {
            requested: m,
            capacity,
        });
    }

    let mut lo = LAMBDA_LO;
    let mut h_lo = entropy_at(costs, lo);
    while h_lo < m - slack {
        if lo < 1.0 / BRACKET_LIMIT {
            return Err(Error::InfeasiblePayload {
                requested: m,
                capacity: h_lo,
            });
        }
        lo /= 10.0;
        h_lo = entropy_at(costs, lo);
    }
    let mut hi = LAMBDA_HI.max(lo);
    let mut h_hi = entropy_at(costs, hi);
    while h_hi > m + slack && hi < BRACKET_LIMIT {
        hi *= 10.0;
        h_hi = entropy_at(costs, hi);
    }

    let (mut lambda, mut achieved) = if (h_lo - m).abs() <= slack {
        (lo, h_lo)
    } else if (h_hi - m).abs() <= slack {
        (hi, h_hi)
    } else {
        (lo, h_lo)
    };
    let mut iterations = 0;
    if (achieved - m).abs() > slack {
        while iterations < MAX_ITERS {
            iterations += 1;
            let mid = (0.5 * (lo.ln() + hi.ln())).exp();
            let h_mid = entropy_at(costs, mid);
            lambda = mid;
            achieved = h_mid;
            if (h_mid - m).abs() <= slack {
                break;
            }
            if h_mid > m {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(LambdaSolution {
        lambda,
        probabilities: gibbs_probabilities(costs, lambda)?,
        achieved_entropy: achieved,
        iterations,
    })
}

/// `ρ = ln(2/p − 1)` on the total change probability.
pub fn cost_from_probability(probs: &ProbabilityMap) -> CostMap {
    let rho = probs.total().map(|&p| {
        // p = 1 maps to exactly 0; only the lower end needs the clamp.
        (2.0 / p.clamp(P_MIN, 1.0) - 1.0).ln().max(0.0)
    });
    CostMap {
        plus: rho.clone(),
        minus: rho,
    }
}

/// Inverse of [`cost_from_probability`]: `p = 2 / (e^ρ + 1)`, split evenly.
pub fn probability_from_cost(costs: &CostMap) -> ProbabilityMap {
    let half = costs.plus.map(|&rho| 1.0 / (rho.exp() + 1.0));
    ProbabilityMap {
        plus: half.clone(),
        minus: half,
    }
}
