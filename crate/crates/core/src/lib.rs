//! Continuous-time electricity market engine.
//!
//! Quadratic-cost plants are dispatched against a piecewise-linear load
//! trajectory; the resulting trajectories are priced either at the spot price
//! `λ(t)` or at a load-duration price `π(m)`, and each plant is settled under
//! the chosen mechanism.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the command-line
//! runner live in the `ldprice` crate.
//!
//! ```
//! use ldprice_core::{
//!     builtin_case_study, duration_price, settle_duration, settle_spot, solve_equilibrium,
//!     spot_price, QuadratureConfig,
//! };
//!
//! let scenario = builtin_case_study();
//! let sol = solve_equilibrium(&scenario.plants, &scenario.load).unwrap();
//! let cfg = QuadratureConfig::default();
//! let spot = settle_spot(&sol, &spot_price(&sol), &cfg).unwrap();
//! let duration = settle_duration(&sol, &duration_price(&sol, &cfg).unwrap(), &cfg).unwrap();
//! assert!(duration.total_revenue < spot.total_revenue);
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cost;
pub mod curves;
pub mod dispatch;
pub mod pricing;
pub mod quadrature;
pub mod scenario;
pub mod settlement;

pub use cost::{CostError, QuadraticCost};
pub use curves::{CurveError, LoadCurve, MeasureFunction, PiecewiseLinear};
pub use dispatch::{
    dispatch_cost, solve_clamped, solve_equilibrium, BoundKind, DispatchCost, DispatchError,
    DispatchSolution, Plant,
};
pub use pricing::{
    duration_price, duration_price_from_plant, spot_price, unit_energy_price_duration,
    unit_energy_price_spot, DurationPrice, PricingError, SpotPrice,
};
pub use quadrature::{
    lebesgue_energy, lebesgue_integrate, level_partition_sum, riemann_integrate,
    riemann_integrate_aligned, QuadratureConfig, QuadratureError, Rule,
};
pub use scenario::{
    builtin_case_study, validate, AffineLoad, Breakpoint, Diagnostic, LoadSpec, OptionsSpec,
    PlantSpec, Scenario, ScenarioFile, ScenarioOptions,
};
pub use settlement::{
    generation_cost_lebesgue, settle_duration, settle_spot, value_decomposition, Mechanism,
    PlantSettlement, PriceView, Segment, SettlementError, SettlementReport, ValueCell,
};
