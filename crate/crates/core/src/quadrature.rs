//! Composite quadrature over time (Riemann sums) and over power levels
//! (measure integration).
//!
//! Panels are always snapped to breakpoints so that piecewise-polynomial
//! integrands of degree at most three are integrated exactly by Simpson's
//! rule. The two engines serve as each other's oracle: the energy of a curve is
//! `∫ P(t) dt` on one side and `P_min T + ∫ m(y) dy` on the other.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{LoadCurve, MeasureFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Midpoint,
    #[default]
    Simpson,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error(
        "n_panels = {n_panels} is invalid for the {rule:?} rule (need >= 2, even for simpson)"
    )]
    InvalidConfig { n_panels: usize, rule: Rule },
    #[error("integration bounds are reversed: [{a}, {b}]")]
    ReversedInterval { a: f64, b: f64 },
    #[error("integrand is not finite at x = {at}")]
    NonFinite { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    n_panels: usize,
    rule: Rule,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            n_panels: 10_000,
            rule: Rule::Simpson,
        }
    }
}

impl QuadratureConfig {
    pub fn new(n_panels: usize, rule: Rule) -> Result<Self, QuadratureError> {
        if n_panels < 2 || (rule == Rule::Simpson && !n_panels.is_multiple_of(2)) {
            return Err(QuadratureError::InvalidConfig { n_panels, rule });
        }
        Ok(Self { n_panels, rule })
    }

    pub fn simpson(n_panels: usize) -> Result<Self, QuadratureError> {
        Self::new(n_panels, Rule::Simpson)
    }

    pub fn midpoint(n_panels: usize) -> Result<Self, QuadratureError> {
        Self::new(n_panels, Rule::Midpoint)
    }

    pub fn n_panels(&self) -> usize {
        self.n_panels
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    fn min_panels(&self) -> usize {
        2
    }

    /// Panel count for a sub-interval holding `share` of the total length.
    fn panels_for(&self, share: f64) -> usize {
        let exact = self.n_panels as f64 * share;
        let mut raw = exact as usize;
        if (raw as f64) < exact {
            raw += 1;
        }
        let n = raw.max(self.min_panels());
        match self.rule {
            Rule::Simpson => n + n % 2,
            Rule::Midpoint => n,
        }
    }
}

fn checked(x: f64, v: f64) -> Result<f64, QuadratureError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFinite { at: x })
    }
}

fn composite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    rule: Rule,
) -> Result<f64, QuadratureError> {
    let h = (b - a) / n as f64;
    match rule {
        Rule::Midpoint => {
            let mut sum = 0.0;
            for i in 0..n {
                let x = a + (i as f64 + 0.5) * h;
                sum += checked(x, f(x))?;
            }
            Ok(sum * h)
        }
        Rule::Simpson => {
            let mut sum = checked(a, f(a))? + checked(b, f(b))?;
            for i in 1..n {
                let x = a + i as f64 * h;
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * checked(x, f(x))?;
            }
            Ok(sum * h / 3.0)
        }
    }
}

/// Composite-rule approximation of `∫_a^b f` with `cfg.n_panels()` uniform
/// panels.
pub fn riemann_integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    if b < a {
        return Err(QuadratureError::ReversedInterval { a, b });
    }
    if a == b {
        return Ok(0.0);
    }
    composite(f, a, b, cfg.n_panels, cfg.rule)
}

/// Integrates over `[edges[0], edges[last]]` with panel edges snapped to every
/// entry of `edges` (sorted ascending). The integrand receives the index of
/// the sub-interval a node belongs to, so one-sided values at breakpoints are
/// well defined.
pub fn integrate_partitioned<F: FnMut(usize, f64) -> f64>(
    edges: &[f64],
    cfg: &QuadratureConfig,
    mut f: F,
) -> Result<f64, QuadratureError> {
    if edges.len() < 2 {
        return Ok(0.0);
    }
    let (a, b) = (edges[0], edges[edges.len() - 1]);
    if b < a {
        return Err(QuadratureError::ReversedInterval { a, b });
    }
    let total = b - a;
    let mut sum = 0.0;
    for (k, w) in edges.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        if hi < lo {
            return Err(QuadratureError::ReversedInterval { a: lo, b: hi });
        }
        if hi == lo {
            continue;
        }
        let n = cfg.panels_for((hi - lo) / total);
        sum += composite(|x| f(k, x), lo, hi, n, cfg.rule)?;
    }
    Ok(sum)
}

/// [`riemann_integrate`] with panel edges aligned to `breaks` inside `[a, b]`.
pub fn riemann_integrate_aligned<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    if b < a {
        return Err(QuadratureError::ReversedInterval { a, b });
    }
    integrate_partitioned(&partition(a, b, breaks), cfg, |_, x| f(x))
}

/// Sorted edges `a, (breaks inside (a, b))..., b`.
pub fn partition(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(a);
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    if edges.len() == 1 {
        edges.push(b);
    }
    edges
}

/// `∫_{y_lo}^{y_hi} weight(m(y)) dy` with panels aligned to the curve's
/// breakpoint levels; at the upper edge of each panel group the left limit of
/// `m` is used, so jumps at plateau levels do not leak into neighbouring
/// panels.
pub fn lebesgue_integrate<W: Fn(f64) -> f64>(
    m: &MeasureFunction,
    y_lo: f64,
    y_hi: f64,
    weight: W,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    if y_hi < y_lo {
        return Err(QuadratureError::ReversedInterval { a: y_lo, b: y_hi });
    }
    let edges = partition(y_lo, y_hi, m.levels());
    integrate_partitioned(&edges, cfg, |k, y| {
        let duration = if y == edges[k + 1] {
            m.left_limit(y)
        } else {
            m.at(y)
        };
        weight(duration)
    })
}

/// Energy read through the level sets: `P_min T + ∫_{P_min}^{P_max} m(y) dy`.
pub fn lebesgue_energy(curve: &LoadCurve) -> f64 {
    let m = curve.measure_function();
    let (lo, hi) = (m.min_level(), m.max_level());
    let upper = lebesgue_integrate(&m, lo, hi, |d| d, &QuadratureConfig::default())
        .expect("measure values are finite and bounds ordered");
    lo * curve.horizon() + upper
}

/// Level-partition sum `Σ ξ_i |E_i|` with `E_i = {t : y_{i-1} <= P(t) < y_i}`
/// over `n_bands` equal bands of `[P_min, P_max]` (the last band is closed),
/// each tagged at its lower level. The sum approaches the energy from below as
/// the bands shrink.
pub fn level_partition_sum(curve: &LoadCurve, n_bands: usize) -> f64 {
    let (lo, hi) = (curve.min_value(), curve.max_value());
    let horizon = curve.horizon();
    if n_bands == 0 || hi == lo {
        return lo * horizon;
    }
    let h = (hi - lo) / n_bands as f64;
    (0..n_bands)
        .map(|i| {
            let y0 = lo + i as f64 * h;
            let y1 = if i + 1 == n_bands { hi } else { y0 + h };
            let below = curve.measure_at_or_above(y0);
            let above = if i + 1 == n_bands {
                0.0
            } else {
                curve.measure_at_or_above(y1)
            };
            y0 * (below - above)
        })
        .sum()
}
