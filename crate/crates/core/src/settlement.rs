//! Cost, revenue and profit accounting under the two pricing mechanisms.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::QuadraticCost;
use crate::curves::LoadCurve;
use crate::dispatch::{dispatch_cost, DispatchSolution};
use crate::pricing::{band_value, unit_energy_price_spot, DurationPrice, PricingError, SpotPrice};
use crate::quadrature::{
    lebesgue_integrate, riemann_integrate_aligned, QuadratureConfig, QuadratureError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Spot,
    Duration,
}

impl Mechanism {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::Spot => "spot",
            Mechanism::Duration => "duration",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SettlementError {
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantSettlement {
    pub plant: String,
    pub energy: f64,
    pub generation_cost: f64,
    pub revenue: f64,
    pub profit: f64,
    /// `profit / generation_cost`; `None` when the cost is zero.
    pub profit_rate: Option<f64>,
}

impl PlantSettlement {
    fn new(plant: &str, energy: f64, generation_cost: f64, revenue: f64) -> Self {
        let profit = revenue - generation_cost;
        Self {
            plant: plant.into(),
            energy,
            generation_cost,
            revenue,
            profit,
            profit_rate: ratio(profit, generation_cost),
        }
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettlementReport {
    pub mechanism: Mechanism,
    pub plants: Vec<PlantSettlement>,
    pub total_energy: f64,
    pub total_cost: f64,
    /// What the market pays producers.
    pub total_revenue: f64,
    pub total_profit: f64,
    pub market_profit_rate: Option<f64>,
}

impl SettlementReport {
    fn from_plants(mechanism: Mechanism, plants: Vec<PlantSettlement>) -> Self {
        let total_energy = plants.iter().map(|p| p.energy).sum();
        let total_cost = plants.iter().map(|p| p.generation_cost).sum();
        let total_revenue = plants.iter().map(|p| p.revenue).sum();
        let total_profit = plants.iter().map(|p| p.profit).sum();
        Self {
            mechanism,
            plants,
            total_energy,
            total_cost,
            total_revenue,
            total_profit,
            market_profit_rate: ratio(total_profit, total_cost),
        }
    }

    /// `max - min` of the per-plant profit rates.
    pub fn profit_rate_spread(&self) -> Option<f64> {
        let rates: Vec<f64> = self.plants.iter().filter_map(|p| p.profit_rate).collect();
        if rates.is_empty() {
            return None;
        }
        let hi = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
        Some(hi - lo)
    }
}

/// Revenue `∫ λ(t) P_j(t) dt` per plant.
pub fn settle_spot(
    sol: &DispatchSolution,
    price: &SpotPrice,
    cfg: &QuadratureConfig,
) -> Result<SettlementReport, SettlementError> {
    let costs = dispatch_cost(sol, cfg)?;
    let horizon = sol.horizon();
    let mut rows = Vec::with_capacity(sol.plants().len());
    for (j, (plant, out)) in sol.plants().iter().zip(sol.outputs()).enumerate() {
        let mut breaks = out.times().to_vec();
        breaks.extend_from_slice(price.curve().times());
        let revenue = riemann_integrate_aligned(
            |t| price.at(t) * out.value_at(t),
            0.0,
            horizon,
            &breaks,
            cfg,
        )?;
        rows.push(PlantSettlement::new(
            plant.id(),
            out.energy(),
            costs.per_plant[j],
            revenue,
        ));
    }
    Ok(SettlementReport::from_plants(Mechanism::Spot, rows))
}

/// Revenue `π(T) P_min T + ∫_{P_min}^{P_max} π(m_j(y)) m_j(y) dy` per plant:
/// the base block below the plant's minimum output runs for the whole
/// horizon and is paid the anchor price.
pub fn settle_duration(
    sol: &DispatchSolution,
    price: &DurationPrice,
    cfg: &QuadratureConfig,
) -> Result<SettlementReport, SettlementError> {
    if sol.is_clamped() {
        return Err(PricingError::ClampedDispatch.into());
    }
    if !sol.load().is_non_decreasing() {
        return Err(PricingError::NonMonotoneLoad.into());
    }
    let costs = dispatch_cost(sol, cfg)?;
    let horizon = sol.horizon();
    let mut rows = Vec::with_capacity(sol.plants().len());
    for (j, (plant, out)) in sol.plants().iter().zip(sol.outputs()).enumerate() {
        let m = out.measure_function();
        let (lo, hi) = (m.min_level(), m.max_level());
        let base = price.anchor() * lo * horizon;
        let upper = lebesgue_integrate(&m, lo, hi, |d| price.revenue_density(d), cfg)?;
        rows.push(PlantSettlement::new(
            plant.id(),
            out.energy(),
            costs.per_plant[j],
            base + upper,
        ));
    }
    Ok(SettlementReport::from_plants(Mechanism::Duration, rows))
}

/// Generation cost read through the level sets,
/// `C(P_min) T + ∫_{P_min}^{P_max} m(y) C'(y) dy`; equals `∫ C(P(t)) dt`.
pub fn generation_cost_lebesgue(
    curve: &LoadCurve,
    cost: &QuadraticCost,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    let m = curve.measure_function();
    let (lo, hi) = (m.min_level(), m.max_level());
    let edges = crate::quadrature::partition(lo, hi, m.levels());
    let upper = crate::quadrature::integrate_partitioned(&edges, cfg, |k, y| {
        let d = if y == edges[k + 1] {
            m.left_limit(y)
        } else {
            m.at(y)
        };
        d * cost.marginal_unchecked(y)
    })?;
    Ok(cost.cost_unchecked(lo) * curve.horizon() + upper)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    TimeSlice { start: f64, end: f64 },
    PowerBand { low: f64, high: f64 },
}

/// One commodity block: its energy and settlement value per MWh.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueCell {
    pub plant: usize,
    pub segment: Segment,
    pub energy: f64,
    pub unit_value: f64,
}

impl ValueCell {
    /// Start time of a time slice, or low power of a band.
    pub fn segment_start(&self) -> f64 {
        match self.segment {
            Segment::TimeSlice { start, .. } => start,
            Segment::PowerBand { low, .. } => low,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PriceView<'a> {
    Spot(&'a SpotPrice),
    Duration(&'a DurationPrice),
}

/// Splits each plant's energy into blocks and values each one.
///
/// Spot blocks are `segments` equal time slices; all plants share a slice's
/// value. Duration blocks are the base band `[0, P_min]` plus `segments` equal
/// bands of `[P_min, P_max]`; a band's value does not depend on when it is
/// produced. Blocks with no energy are skipped.
pub fn value_decomposition(
    sol: &DispatchSolution,
    price: PriceView<'_>,
    segments: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<ValueCell>, SettlementError> {
    let segments = segments.max(1);
    let horizon = sol.horizon();
    let mut cells = Vec::new();
    for (j, out) in sol.outputs().iter().enumerate() {
        match price {
            PriceView::Spot(spot) => {
                for s in 0..segments {
                    let start = horizon * s as f64 / segments as f64;
                    let end = if s + 1 == segments {
                        horizon
                    } else {
                        horizon * (s + 1) as f64 / segments as f64
                    };
                    let breaks = out.times();
                    let energy =
                        riemann_integrate_aligned(|t| out.value_at(t), start, end, breaks, cfg)?;
                    if energy <= 0.0 {
                        continue;
                    }
                    cells.push(ValueCell {
                        plant: j,
                        segment: Segment::TimeSlice { start, end },
                        energy,
                        unit_value: unit_energy_price_spot(spot, out, start, end, cfg)?,
                    });
                }
            }
            PriceView::Duration(dur) => {
                let m = out.measure_function();
                let (lo, hi) = (m.min_level(), m.max_level());
                let mut bands = Vec::with_capacity(segments + 1);
                if lo > 0.0 {
                    bands.push((0.0, lo));
                }
                if hi > lo {
                    for s in 0..segments {
                        let low = lo + (hi - lo) * s as f64 / segments as f64;
                        let high = if s + 1 == segments {
                            hi
                        } else {
                            lo + (hi - lo) * (s + 1) as f64 / segments as f64
                        };
                        bands.push((low, high));
                    }
                }
                for (low, high) in bands {
                    let (energy, value) = band_value(dur, &m, low, high, cfg)?;
                    if energy <= 0.0 {
                        continue;
                    }
                    cells.push(ValueCell {
                        plant: j,
                        segment: Segment::PowerBand { low, high },
                        energy,
                        unit_value: value / energy,
                    });
                }
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::{solve_equilibrium, Plant};
    use crate::pricing::{duration_price, spot_price};
    use alloc::vec;

    fn case_study() -> DispatchSolution {
        let plants = vec![
            Plant::new("plant1", QuadraticCost::new(0.0005, 0.07, 0.2).unwrap()),
            Plant::new("plant2", QuadraticCost::new(0.001, 0.14, 0.4).unwrap()),
            Plant::new("plant3", QuadraticCost::new(0.002, 0.28, 0.8).unwrap()),
        ];
        solve_equilibrium(&plants, &LoadCurve::affine(350.0, 700.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn spot_settlement_case_study() {
        let sol = case_study();
        let cfg = QuadratureConfig::default();
        let r = settle_spot(&sol, &spot_price(&sol), &cfg).unwrap();
        let revenues = [
            247.333_333_333_333_3,
            105.466_666_666_666_7,
            34.533_333_333_333_3,
        ];
        for (row, want) in r.plants.iter().zip(revenues) {
            assert!((row.revenue - want).abs() < 1e-9);
            assert_eq!(row.profit, row.revenue - row.generation_cost);
        }
        assert!((r.total_revenue - 387.333_333_333_333_3).abs() < 1e-9);
        let rate = r.market_profit_rate.unwrap();
        assert!((rate - 0.67).abs() < 0.01);
        // Σ revenue = ∫ λ P_d
        let cross = riemann_integrate_aligned(
            |t| sol.lambda().value_at(t) * sol.load().value_at(t),
            0.0,
            1.0,
            &[],
            &cfg,
        )
        .unwrap();
        assert!((cross - r.total_revenue).abs() <= 1e-9 * cross);
    }

    #[test]
    fn duration_settlement_case_study() {
        let sol = case_study();
        let cfg = QuadratureConfig::default();
        let price = duration_price(&sol, &cfg).unwrap();
        let r = settle_duration(&sol, &price, &cfg).unwrap();
        for (row, want) in r.plants.iter().zip([224.0, 100.8, 39.2]) {
            assert!((row.revenue - want).abs() < 1e-9, "{}", row.revenue);
        }
        assert!((r.total_revenue - 364.0).abs() < 1e-9);
        assert!((r.market_profit_rate.unwrap() - 0.57).abs() < 0.01);
        let spot = settle_spot(&sol, &spot_price(&sol), &cfg).unwrap();
        for (a, b) in r.plants.iter().zip(&spot.plants) {
            assert_eq!(a.generation_cost, b.generation_cost);
        }
        assert!(r.profit_rate_spread().unwrap() < spot.profit_rate_spread().unwrap());
    }

    #[test]
    fn flat_load_mechanisms_agree() {
        let sol = solve_equilibrium(
            case_study().plants(),
            &LoadCurve::constant(800.0, 3.0).unwrap(),
        )
        .unwrap();
        let cfg = QuadratureConfig::default();
        let spot = settle_spot(&sol, &spot_price(&sol), &cfg).unwrap();
        let dur = settle_duration(&sol, &duration_price(&sol, &cfg).unwrap(), &cfg).unwrap();
        for (a, b) in spot.plants.iter().zip(&dur.plants) {
            assert!((a.revenue - b.revenue).abs() <= 1e-10 * a.revenue);
        }
    }

    #[test]
    fn idle_plant_loses_its_intercept() {
        let plants = vec![
            Plant::new("cheap", QuadraticCost::new(0.001, 0.1, 0.0).unwrap()),
            Plant::new("idle", QuadraticCost::new(0.001, 0.4, 2.5).unwrap()),
        ];
        // λ = 0.4 exactly places the second plant at zero output
        let sol = solve_equilibrium(&plants, &LoadCurve::constant(150.0, 2.0).unwrap()).unwrap();
        let r = settle_spot(&sol, &spot_price(&sol), &QuadratureConfig::default()).unwrap();
        assert!(r.plants[1].revenue.abs() < 1e-9);
        assert!((r.plants[1].profit + 5.0).abs() < 1e-9);
    }

    #[test]
    fn lebesgue_cost_identity() {
        let sol = case_study();
        let cfg = QuadratureConfig::default();
        let costs = dispatch_cost(&sol, &cfg).unwrap();
        for (j, plant) in sol.plants().iter().enumerate() {
            let via_levels = generation_cost_lebesgue(sol.output(j), plant.cost(), &cfg).unwrap();
            assert!((via_levels - costs.per_plant[j]).abs() <= 1e-10 * via_levels);
        }
        let bumpy = LoadCurve::new(&[(0.0, 3.0), (1.0, 9.0), (2.0, 9.0), (3.0, 1.0)]).unwrap();
        let c = QuadraticCost::new(0.3, 1.0, 2.0).unwrap();
        let time = riemann_integrate_aligned(
            |t| c.cost(bumpy.value_at(t)).unwrap(),
            0.0,
            3.0,
            bumpy.times(),
            &cfg,
        )
        .unwrap();
        let levels = generation_cost_lebesgue(&bumpy, &c, &cfg).unwrap();
        assert!((time - levels).abs() <= 1e-10 * time);
    }

    #[test]
    fn value_grid_contrast() {
        let sol = case_study();
        let cfg = QuadratureConfig::default();
        let spot = spot_price(&sol);
        // within a slice the plants' values differ only through the energy
        // weighting of λ, which vanishes quadratically with the slice width
        let spread = |slices: usize| {
            let cells = value_decomposition(&sol, PriceView::Spot(&spot), slices, &cfg).unwrap();
            assert_eq!(cells.len(), 3 * slices);
            let mut worst: f64 = 0.0;
            for s in 0..slices {
                let start = cells[s].segment_start();
                let values: Vec<f64> = cells
                    .iter()
                    .filter(|c| c.segment_start() == start)
                    .map(|c| c.unit_value)
                    .collect();
                assert_eq!(values.len(), 3);
                for v in &values {
                    worst = worst.max((v - values[0]).abs());
                }
            }
            worst
        };
        let (coarse, fine) = (spread(5), spread(50));
        // λ' Δt² / 12 · max P'/P
        assert!(coarse < 0.4 * 0.04 / 12.0 * 10.0);
        assert!(fine < coarse / 25.0);
        let dur = duration_price(&sol, &cfg).unwrap();
        let cells = value_decomposition(&sol, PriceView::Duration(&dur), 1, &cfg).unwrap();
        let plant1: Vec<&ValueCell> = cells.iter().filter(|c| c.plant == 0).collect();
        assert_eq!(plant1.len(), 2);
        assert_eq!(
            plant1[0].segment,
            Segment::PowerBand {
                low: 0.0,
                high: 250.0
            }
        );
        assert!((plant1[0].unit_value - 0.32).abs() < 1e-12);
        assert!((plant1[1].unit_value - 0.72).abs() < 1e-12);
        assert!(plant1[0].unit_value < plant1[1].unit_value);
        let energy: f64 = plant1.iter().map(|c| c.energy).sum();
        assert!((energy - 450.0).abs() < 1e-9);
    }
}
