//! Spot and load-duration prices.
//!
//! The spot price is the dispatch shadow price `λ(t)` itself.
//!
//! The load-duration price `π̃(t)` solves, for every plant `j`,
//!
//! ```text
//! 2 q2_j P_j'(t) (T - t) + d/dt [ (T - t) C_j'(P_j(t)) - π̃(t) (T - t) ] = 0,   π̃(0) = λ(0).
//! ```
//!
//! Integrating once gives the bounded quantity
//!
//! ```text
//! g(t) = π̃(t) (T - t) = λ(0) T + ∫_0^t [ (c(s) + μ'(s)) (T - s) - μ(s) ] ds
//! ```
//!
//! with `c = 2 q2 P'` and `μ = C'(P)`. Both are plant-independent at an
//! interior optimum (`c = μ' = λ'`, `μ = λ`), so every plant sees the same
//! price. Under a non-decreasing load the duration of a level reached at time
//! `t` is `m = T - t`, hence `π(m) = π̃(T - m)` and `π(m) m = g(T - m)`, which
//! stays finite as `m → 0`.

use alloc::vec::Vec;

use thiserror::Error;

use crate::curves::{LoadCurve, MeasureFunction, PiecewiseLinear};
use crate::dispatch::DispatchSolution;
use crate::quadrature::{
    lebesgue_integrate, riemann_integrate, riemann_integrate_aligned, QuadratureConfig,
    QuadratureError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error(
        "duration pricing needs a non-decreasing load; rearrange it into its duration curve first"
    )]
    NonMonotoneLoad,
    #[error("duration pricing is undefined for bound-clamped dispatch")]
    ClampedDispatch,
    #[error("duration price is singular at t = {t} (evaluable up to t = {limit})")]
    Singular { t: f64, limit: f64 },
    #[error("{value} is outside [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    #[error("unit energy price is undefined: block carries no energy")]
    ZeroEnergy,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpotPrice {
    curve: PiecewiseLinear,
}

impl SpotPrice {
    pub fn curve(&self) -> &PiecewiseLinear {
        &self.curve
    }

    pub fn at(&self, t: f64) -> f64 {
        self.curve.value_at(t)
    }
}

pub fn spot_price(sol: &DispatchSolution) -> SpotPrice {
    SpotPrice {
        curve: sol.lambda().clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationPrice {
    horizon: f64,
    anchor: f64,
    m_floor: f64,
    marginal: PiecewiseLinear,
    coefficient: Vec<f64>,
    knot_values: Vec<f64>,
}

/// One-step Simpson; the integrand is affine within a segment.
fn segment_rule() -> QuadratureConfig {
    QuadratureConfig::simpson(2).expect("2 panels is a valid simpson rule")
}

impl DurationPrice {
    fn build(
        marginal: PiecewiseLinear,
        coefficient: Vec<f64>,
        anchor: f64,
        cfg: &QuadratureConfig,
    ) -> Result<Self, PricingError> {
        let horizon = marginal.horizon();
        let mut knot_values = Vec::with_capacity(marginal.len());
        let mut g = anchor * horizon;
        knot_values.push(g);
        for k in 0..marginal.segment_count() {
            let (t0, t1) = (marginal.times()[k], marginal.times()[k + 1]);
            let integrand = Self::integrand(&marginal, &coefficient, horizon, k);
            g += riemann_integrate(integrand, t0, t1, cfg)?;
            knot_values.push(g);
        }
        Ok(Self {
            horizon,
            anchor,
            m_floor: 1e-6 * horizon,
            marginal,
            coefficient,
            knot_values,
        })
    }

    fn integrand<'a>(
        marginal: &'a PiecewiseLinear,
        coefficient: &'a [f64],
        horizon: f64,
        k: usize,
    ) -> impl Fn(f64) -> f64 + 'a {
        let weight = coefficient[k] + marginal.slope(k);
        move |s| weight * (horizon - s) - marginal.value_in_segment(k, s)
    }

    /// Smallest duration (and distance from `T`) at which prices are evaluated.
    pub fn with_m_floor(mut self, m_floor: f64) -> Self {
        self.m_floor = m_floor;
        self
    }

    pub fn m_floor(&self) -> f64 {
        self.m_floor
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `π̃(0) = λ(0)`, also the price of the longest duration, `π(T)`.
    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// `g(t) = π̃(t) (T - t)` for `t` in `[0, T]` (clamped).
    pub fn duration_value(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.horizon);
        let k = self.marginal.segment_index(t);
        let t0 = self.marginal.times()[k];
        let integrand = Self::integrand(&self.marginal, &self.coefficient, self.horizon, k);
        let partial = riemann_integrate(integrand, t0, t, &segment_rule())
            .expect("affine integrand on an ordered interval");
        self.knot_values[k] + partial
    }

    /// Duration price in time view, `π̃(t)`, for `0 <= t <= T - m_floor`.
    pub fn time_price(&self, t: f64) -> Result<f64, PricingError> {
        let limit = self.horizon - self.m_floor;
        if t < 0.0 || t.is_nan() {
            return Err(PricingError::OutOfDomain {
                value: t,
                lo: 0.0,
                hi: limit,
            });
        }
        if t > limit {
            return Err(PricingError::Singular { t, limit });
        }
        if t == 0.0 {
            return Ok(self.anchor);
        }
        Ok(self.duration_value(t) / (self.horizon - t))
    }

    /// Duration price in measure view, `π(m)`, for `m_floor <= m <= T`.
    pub fn measure_price(&self, m: f64) -> Result<f64, PricingError> {
        if !(self.m_floor..=self.horizon).contains(&m) {
            return Err(PricingError::OutOfDomain {
                value: m,
                lo: self.m_floor,
                hi: self.horizon,
            });
        }
        if m == self.horizon {
            return Ok(self.anchor);
        }
        Ok(self.duration_value(self.horizon - m) / m)
    }

    /// `π(m) m`, bounded on the closed interval `[0, T]`.
    pub fn revenue_density(&self, m: f64) -> f64 {
        self.duration_value(self.horizon - m.clamp(0.0, self.horizon))
    }
}

fn check_duration_inputs(sol: &DispatchSolution) -> Result<(), PricingError> {
    if sol.is_clamped() {
        return Err(PricingError::ClampedDispatch);
    }
    if !sol.load().is_non_decreasing() {
        return Err(PricingError::NonMonotoneLoad);
    }
    Ok(())
}

/// Market duration price built from `λ(t)`.
pub fn duration_price(
    sol: &DispatchSolution,
    cfg: &QuadratureConfig,
) -> Result<DurationPrice, PricingError> {
    check_duration_inputs(sol)?;
    let lambda = sol.lambda().clone();
    let coefficient = (0..lambda.segment_count())
        .map(|k| lambda.slope(k))
        .collect();
    let anchor = lambda.values()[0];
    DurationPrice::build(lambda, coefficient, anchor, cfg)
}

/// Duration price built from plant `j`'s own first-order condition
/// (`c = 2 q2_j P_j'`, `μ = 2 q2_j P_j + q1_j`). Equals [`duration_price`] at
/// an interior optimum.
pub fn duration_price_from_plant(
    sol: &DispatchSolution,
    j: usize,
    cfg: &QuadratureConfig,
) -> Result<DurationPrice, PricingError> {
    check_duration_inputs(sol)?;
    let cost = sol.plants()[j].cost();
    let out = sol.output(j);
    let marginal = out.as_piecewise().map_affine(2.0 * cost.q2(), cost.q1());
    let coefficient = (0..out.segment_count())
        .map(|k| 2.0 * cost.q2() * out.slope(k))
        .collect();
    let anchor = sol.lambda().values()[0];
    DurationPrice::build(marginal, coefficient, anchor, cfg)
}

/// Energy-weighted average of the spot price over `[t1, t2]` for one output.
pub fn unit_energy_price_spot(
    price: &SpotPrice,
    curve: &LoadCurve,
    t1: f64,
    t2: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, PricingError> {
    let horizon = curve.horizon();
    if !(0.0 <= t1 && t1 < t2 && t2 <= horizon) {
        return Err(PricingError::OutOfDomain {
            value: if t1 < 0.0 || t1 >= t2 { t1 } else { t2 },
            lo: 0.0,
            hi: horizon,
        });
    }
    let mut breaks: Vec<f64> = curve.times().to_vec();
    breaks.extend_from_slice(price.curve().times());
    let energy = riemann_integrate_aligned(|t| curve.value_at(t), t1, t2, &breaks, cfg)?;
    if energy <= 0.0 {
        return Err(PricingError::ZeroEnergy);
    }
    let value =
        riemann_integrate_aligned(|t| price.at(t) * curve.value_at(t), t1, t2, &breaks, cfg)?;
    Ok(value / energy)
}

/// Value per MWh of the power band `[y1, y2]` of one output,
/// `∫ π(m(y)) m(y) dy / ∫ m(y) dy`.
pub fn unit_energy_price_duration(
    price: &DurationPrice,
    m: &MeasureFunction,
    y1: f64,
    y2: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, PricingError> {
    let (energy, value) = band_value(price, m, y1, y2, cfg)?;
    if energy <= 0.0 {
        return Err(PricingError::ZeroEnergy);
    }
    Ok(value / energy)
}

/// `(∫ m dy, ∫ π(m) m dy)` over `[y1, y2]`.
pub(crate) fn band_value(
    price: &DurationPrice,
    m: &MeasureFunction,
    y1: f64,
    y2: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64), PricingError> {
    if y1 >= y2 || y1.is_nan() || y2.is_nan() || y1 < 0.0 {
        return Err(PricingError::OutOfDomain {
            value: y1,
            lo: 0.0,
            hi: y2,
        });
    }
    let energy = lebesgue_integrate(m, y1, y2, |d| d, cfg)?;
    let value = lebesgue_integrate(m, y1, y2, |d| price.revenue_density(d), cfg)?;
    Ok((energy, value))
}
