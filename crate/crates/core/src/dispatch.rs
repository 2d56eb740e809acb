//! Continuous-time economic dispatch.
//!
//! With quadratic costs and no active bounds the shadow price of the power
//! balance is an affine function of the load,
//!
//! ```text
//! λ(t) = (P_d(t) + Σ q1_j / (2 q2_j)) / Σ 1 / (2 q2_j)
//! ```
//!
//! and each plant produces where its marginal cost meets `λ(t)`. Because the
//! load is piecewise linear, `λ` and every output are piecewise linear on the
//! load's breakpoints and the solution is exact.
//!
//! [`solve_clamped`] is the opt-in variant for bounded plants: it inverts the
//! aggregate supply curve `S(λ) = Σ clamp(P_j(λ), p_min, p_max)`, inserting
//! breakpoints wherever the load crosses a level at which some plant hits a
//! bound.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::cost::QuadraticCost;
use crate::curves::{CurveError, LoadCurve, PiecewiseLinear};
use crate::quadrature::{riemann_integrate_aligned, QuadratureConfig, QuadratureError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispatchError {
    #[error("at least one plant is required")]
    NoPlants,
    #[error("plant {plant}: p_min = {p_min} exceeds p_max = {p_max}")]
    InvalidBounds {
        plant: String,
        p_min: f64,
        p_max: f64,
    },
    #[error("plant {plant}: p_min = {p_min} must be finite and >= 0")]
    NegativeMinimum { plant: String, p_min: f64 },
    #[error(
        "plant {plant} violates its {bound:?} bound {limit} MW on t in [{start}, {end}] \
         (unconstrained dispatch is infeasible)"
    )]
    InfeasibleUnconstrained {
        plant: String,
        bound: BoundKind,
        limit: f64,
        start: f64,
        end: f64,
    },
    #[error("load {load} MW at t = {time} is outside the fleet range [{min}, {max}]")]
    LoadOutsideCapacity {
        time: f64,
        load: f64,
        min: f64,
        max: f64,
    },
    #[error("clamped dispatch has a price jump at t = {time}: every plant is at a bound")]
    PriceDiscontinuity { time: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    id: String,
    cost: QuadraticCost,
    p_min: f64,
    p_max: Option<f64>,
}

impl Plant {
    pub fn new(id: impl Into<String>, cost: QuadraticCost) -> Self {
        Self {
            id: id.into(),
            cost,
            p_min: 0.0,
            p_max: None,
        }
    }

    pub fn with_bounds(mut self, p_min: f64, p_max: Option<f64>) -> Result<Self, DispatchError> {
        if !(p_min.is_finite() && p_min >= 0.0) {
            return Err(DispatchError::NegativeMinimum {
                plant: self.id,
                p_min,
            });
        }
        if let Some(max) = p_max {
            if max.is_nan() || p_min > max {
                return Err(DispatchError::InvalidBounds {
                    plant: self.id,
                    p_min,
                    p_max: max,
                });
            }
        }
        self.p_min = p_min;
        self.p_max = p_max;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn cost(&self) -> &QuadraticCost {
        &self.cost
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> Option<f64> {
        self.p_max
    }

    fn upper(&self) -> f64 {
        self.p_max.unwrap_or(f64::INFINITY)
    }

    fn output_at(&self, price: f64) -> f64 {
        self.cost
            .inverse_marginal_unchecked(price)
            .clamp(self.p_min, self.upper())
    }
}

/// Outputs and the shadow price on a common set of breakpoint times.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSolution {
    load: LoadCurve,
    lambda: PiecewiseLinear,
    plants: Vec<Plant>,
    outputs: Vec<LoadCurve>,
    clamped: bool,
}

impl DispatchSolution {
    pub fn load(&self) -> &LoadCurve {
        &self.load
    }

    pub fn lambda(&self) -> &PiecewiseLinear {
        &self.lambda
    }

    pub fn plants(&self) -> &[Plant] {
        &self.plants
    }

    pub fn outputs(&self) -> &[LoadCurve] {
        &self.outputs
    }

    pub fn output(&self, j: usize) -> &LoadCurve {
        &self.outputs[j]
    }

    pub fn horizon(&self) -> f64 {
        self.load.horizon()
    }

    /// Breakpoint times shared by the price and every output.
    pub fn times(&self) -> &[f64] {
        self.lambda.times()
    }

    /// True when some plant sits at a bound (only possible via
    /// [`solve_clamped`]).
    pub fn is_clamped(&self) -> bool {
        self.clamped
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchCost {
    pub per_plant: Vec<f64>,
    pub total: f64,
}

/// Equal-marginal-cost dispatch ignoring bounds, then validated against them.
pub fn solve_equilibrium(
    plants: &[Plant],
    load: &LoadCurve,
) -> Result<DispatchSolution, DispatchError> {
    if plants.is_empty() {
        return Err(DispatchError::NoPlants);
    }
    let inv_sum: f64 = plants.iter().map(|p| 1.0 / (2.0 * p.cost.q2())).sum();
    let offset: f64 = plants
        .iter()
        .map(|p| p.cost.q1() / (2.0 * p.cost.q2()))
        .sum();
    let lambda = load
        .as_piecewise()
        .map_affine(1.0 / inv_sum, offset / inv_sum);
    let mut outputs = Vec::with_capacity(plants.len());
    for plant in plants {
        let raw = lambda.map_affine(
            1.0 / (2.0 * plant.cost.q2()),
            -plant.cost.q1() / (2.0 * plant.cost.q2()),
        );
        check_bounds(plant, &raw)?;
        // within tolerance of the bounds; snap round-off
        let snapped = raw.map_values(|v| v.clamp(plant.p_min, plant.upper()));
        outputs.push(LoadCurve::from_piecewise(snapped)?);
    }
    Ok(DispatchSolution {
        load: load.clone(),
        lambda,
        plants: plants.to_vec(),
        outputs,
        clamped: false,
    })
}

fn bound_tolerance(limit: f64) -> f64 {
    1e-9 * limit.abs().max(1.0)
}

fn check_bounds(plant: &Plant, raw: &PiecewiseLinear) -> Result<(), DispatchError> {
    let lo = plant.p_min;
    if let Some((start, end)) = violation_span(raw, |v| lo - bound_tolerance(lo) - v) {
        return Err(DispatchError::InfeasibleUnconstrained {
            plant: plant.id.clone(),
            bound: BoundKind::Min,
            limit: lo,
            start,
            end,
        });
    }
    if let Some(hi) = plant.p_max {
        if let Some((start, end)) = violation_span(raw, |v| v - hi - bound_tolerance(hi)) {
            return Err(DispatchError::InfeasibleUnconstrained {
                plant: plant.id.clone(),
                bound: BoundKind::Max,
                limit: hi,
                start,
                end,
            });
        }
    }
    Ok(())
}

/// First maximal interval on which `excess(value(t)) > 0`; `excess` must be
/// affine in the value.
fn violation_span<F: Fn(f64) -> f64>(curve: &PiecewiseLinear, excess: F) -> Option<(f64, f64)> {
    let mut span: Option<(f64, f64)> = None;
    for (t0, v0, t1, v1) in curve.segments() {
        let (e0, e1) = (excess(v0), excess(v1));
        let piece = match (e0 > 0.0, e1 > 0.0) {
            (true, true) => Some((t0, t1)),
            (false, false) => None,
            (true, false) => Some((t0, t0 + (t1 - t0) * e0 / (e0 - e1))),
            (false, true) => Some((t0 + (t1 - t0) * (-e0) / (e1 - e0), t1)),
        };
        match (span, piece) {
            (None, Some(p)) => span = Some(p),
            (Some((s, e)), Some((a, b))) if a <= e => span = Some((s, b)),
            (Some(_), _) => break,
            (None, None) => {}
        }
    }
    span
}

/// Affine map from load to price valid on one regime of the supply curve.
#[derive(Debug, Clone, Copy)]
struct Regime {
    load0: f64,
    price0: f64,
    inv_slope: f64,
}

impl Regime {
    fn price(&self, load: f64) -> f64 {
        self.price0 + (load - self.load0) * self.inv_slope
    }
}

struct Supply {
    kinks: Vec<f64>,
    loads: Vec<f64>,
    /// `Σ 1/(2 q2)` over plants without an upper bound.
    tail_slope: f64,
}

impl Supply {
    fn new(plants: &[Plant]) -> Self {
        let mut kinks: Vec<f64> = Vec::new();
        for p in plants {
            kinks.push(p.cost.marginal_unchecked(p.p_min));
            if let Some(hi) = p.p_max {
                kinks.push(p.cost.marginal_unchecked(hi));
            }
        }
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        let loads = kinks.iter().map(|&k| Self::total(plants, k)).collect();
        let tail_slope = plants
            .iter()
            .filter(|p| p.p_max.is_none())
            .map(|p| 1.0 / (2.0 * p.cost.q2()))
            .sum();
        Self {
            kinks,
            loads,
            tail_slope,
        }
    }

    fn total(plants: &[Plant], price: f64) -> f64 {
        plants.iter().map(|p| p.output_at(price)).sum()
    }

    fn min_load(&self) -> f64 {
        self.loads[0]
    }

    fn max_load(&self) -> f64 {
        if self.tail_slope > 0.0 {
            f64::INFINITY
        } else {
            self.loads[self.loads.len() - 1]
        }
    }

    /// Regime containing a representative load value. On a plateau of `S`
    /// the lowest clearing price is chosen.
    fn regime(&self, load: f64) -> Regime {
        let n = self.kinks.len();
        let last = n - 1;
        if load > self.loads[last] {
            return Regime {
                load0: self.loads[last],
                price0: self.kinks[last],
                inv_slope: if self.tail_slope > 0.0 {
                    1.0 / self.tail_slope
                } else {
                    0.0
                },
            };
        }
        // first kink whose supply reaches the load
        let i = self.loads.partition_point(|&s| s < load).min(last);
        if i == 0 || self.loads[i] == load {
            return Regime {
                load0: load,
                price0: self.kinks[i],
                inv_slope: 0.0,
            };
        }
        let (s0, s1) = (self.loads[i - 1], self.loads[i]);
        let (k0, k1) = (self.kinks[i - 1], self.kinks[i]);
        Regime {
            load0: s0,
            price0: k0,
            inv_slope: (k1 - k0) / (s1 - s0),
        }
    }
}

/// Active-set dispatch honouring `p_min` / `p_max`. Returns the unconstrained
/// solution when it is already feasible.
pub fn solve_clamped(
    plants: &[Plant],
    load: &LoadCurve,
) -> Result<DispatchSolution, DispatchError> {
    match solve_equilibrium(plants, load) {
        Err(DispatchError::InfeasibleUnconstrained { .. }) => {}
        other => return other,
    }
    let supply = Supply::new(plants);
    let (min, max) = (supply.min_load(), supply.max_load());
    for (time, value) in load.points() {
        if value < min - bound_tolerance(min) || value > max + bound_tolerance(max) {
            return Err(DispatchError::LoadOutsideCapacity {
                time,
                load: value,
                min,
                max,
            });
        }
    }

    // split every load segment where it crosses a kink load
    let mut extra: Vec<f64> = Vec::new();
    for (t0, v0, t1, v1) in load.segments() {
        if v0 == v1 {
            continue;
        }
        for &s in &supply.loads {
            if (s > v0.min(v1)) && (s < v0.max(v1)) {
                extra.push(t0 + (t1 - t0) * (s - v0) / (v1 - v0));
            }
        }
    }
    let refined = load.as_piecewise().refined(&extra);
    let times = refined.times();
    let values = refined.values();

    let mut price = Vec::with_capacity(times.len());
    for k in 0..times.len() - 1 {
        let (v0, v1) = (values[k], values[k + 1]);
        let regime = supply.regime(0.5 * (v0 + v1));
        let (p0, p1) = (regime.price(v0), regime.price(v1));
        match price.last() {
            None => price.push(p0),
            Some(&prev) => {
                let tol = 1e-9 * f64::max(1.0, f64::max(p0.abs(), f64::abs(prev)));
                if (prev - p0).abs() > tol {
                    return Err(DispatchError::PriceDiscontinuity { time: times[k] });
                }
            }
        }
        price.push(p1);
    }
    let points: Vec<(f64, f64)> = times.iter().copied().zip(price.iter().copied()).collect();
    let lambda = PiecewiseLinear::new(&points)?;

    let mut outputs = Vec::with_capacity(plants.len());
    let mut clamped = false;
    for plant in plants {
        let pts: Vec<(f64, f64)> = lambda
            .points()
            .map(|(t, lam)| {
                let free = plant.cost.inverse_marginal_unchecked(lam);
                let out = plant.output_at(lam);
                if out != free {
                    clamped = true;
                }
                (t, out)
            })
            .collect();
        outputs.push(LoadCurve::new(&pts)?);
    }
    Ok(DispatchSolution {
        load: LoadCurve::from_piecewise(refined)?,
        lambda,
        plants: plants.to_vec(),
        outputs,
        clamped,
    })
}

/// `∫_0^T C_j(P_j(t)) dt` per plant, panels aligned to the breakpoints.
pub fn dispatch_cost(
    sol: &DispatchSolution,
    cfg: &QuadratureConfig,
) -> Result<DispatchCost, QuadratureError> {
    let horizon = sol.horizon();
    let per_plant = sol
        .plants
        .iter()
        .zip(&sol.outputs)
        .map(|(plant, out)| {
            riemann_integrate_aligned(
                |t| plant.cost.cost_unchecked(out.value_at(t)),
                0.0,
                horizon,
                out.times(),
                cfg,
            )
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let total = per_plant.iter().sum();
    Ok(DispatchCost { per_plant, total })
}
