//! Quadratic generation cost `C(P) = q2 P² + q1 P + q0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("q2 = {q2} must be > 0 (strict convexity)")]
    NotStrictlyConvex { q2: f64 },
    #[error("{name} = {value} must be >= 0")]
    NegativeCoefficient { name: &'static str, value: f64 },
    #[error("cost coefficient {name} is not finite")]
    NonFinite { name: &'static str },
    #[error("output {power} MW is negative")]
    NegativeOutput { power: f64 },
    #[error(
        "price {price} is below the zero-output marginal cost {threshold}; plant is priced out"
    )]
    PricedOut { price: f64, threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCost {
    q2: f64,
    q1: f64,
    q0: f64,
}

impl QuadraticCost {
    pub fn new(q2: f64, q1: f64, q0: f64) -> Result<Self, CostError> {
        for (name, value) in [("q2", q2), ("q1", q1), ("q0", q0)] {
            if !value.is_finite() {
                return Err(CostError::NonFinite { name });
            }
        }
        if q2 <= 0.0 {
            return Err(CostError::NotStrictlyConvex { q2 });
        }
        for (name, value) in [("q1", q1), ("q0", q0)] {
            if value < 0.0 {
                return Err(CostError::NegativeCoefficient { name, value });
            }
        }
        Ok(Self { q2, q1, q0 })
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    /// Cost rate in $/h at output `power`.
    pub fn cost(&self, power: f64) -> Result<f64, CostError> {
        check_output(power)?;
        Ok(self.cost_unchecked(power))
    }

    /// Marginal cost `2 q2 P + q1` in $/MWh.
    pub fn marginal(&self, power: f64) -> Result<f64, CostError> {
        check_output(power)?;
        Ok(self.marginal_unchecked(power))
    }

    /// Output at which the marginal cost equals `price`.
    pub fn inverse_marginal(&self, price: f64) -> Result<f64, CostError> {
        if price < self.q1 {
            return Err(CostError::PricedOut {
                price,
                threshold: self.q1,
            });
        }
        Ok(self.inverse_marginal_unchecked(price))
    }

    pub(crate) fn cost_unchecked(&self, power: f64) -> f64 {
        (self.q2 * power + self.q1) * power + self.q0
    }

    pub(crate) fn marginal_unchecked(&self, power: f64) -> f64 {
        2.0 * self.q2 * power + self.q1
    }

    /// May be negative when `price < q1`.
    pub(crate) fn inverse_marginal_unchecked(&self, price: f64) -> f64 {
        (price - self.q1) / (2.0 * self.q2)
    }
}

fn check_output(power: f64) -> Result<(), CostError> {
    if power < 0.0 || power.is_nan() {
        return Err(CostError::NegativeOutput { power });
    }
    Ok(())
}
