//! Declarative scenario data and its validation.
//!
//! [`ScenarioFile`] mirrors the on-disk document field for field;
//! [`validate`] turns it into a [`Scenario`] or reports every problem at once.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::{CostError, QuadraticCost};
use crate::curves::{CurveError, LoadCurve};
use crate::dispatch::Plant;
use crate::settlement::Mechanism;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Breakpoint {
    pub time: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadSpec {
    Affine(AffineLoad),
    Breakpoints(Vec<Breakpoint>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineLoad {
    pub base: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    pub id: String,
    pub q2: f64,
    pub q1: f64,
    pub q0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allow_clamp: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanisms: Option<Vec<Mechanism>>,
}

/// The scenario document as written by users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub horizon: f64,
    pub load: LoadSpec,
    pub plants: Vec<PlantSpec>,
    #[serde(default)]
    pub options: OptionsSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOptions {
    pub grid_n: usize,
    /// Absolute, in hours.
    pub m_floor: f64,
    pub allow_clamp: bool,
    pub mechanisms: Vec<Mechanism>,
}

impl ScenarioOptions {
    pub fn defaults_for(horizon: f64) -> Self {
        Self {
            grid_n: 10_000,
            m_floor: 1e-6 * horizon,
            allow_clamp: false,
            mechanisms: vec![Mechanism::Spot, Mechanism::Duration],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub horizon: f64,
    pub load_spec: LoadSpec,
    pub load: LoadCurve,
    pub plants: Vec<Plant>,
    pub options: ScenarioOptions,
}

impl Scenario {
    /// Document form with every option spelled out.
    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            horizon: self.horizon,
            load: self.load_spec.clone(),
            plants: self
                .plants
                .iter()
                .map(|p| PlantSpec {
                    id: p.id().to_string(),
                    q2: p.cost().q2(),
                    q1: p.cost().q1(),
                    q0: p.cost().q0(),
                    p_min: (p.p_min() != 0.0).then_some(p.p_min()),
                    p_max: p.p_max(),
                })
                .collect(),
            options: OptionsSpec {
                grid_n: Some(self.options.grid_n),
                m_floor: Some(self.options.m_floor),
                allow_clamp: Some(self.options.allow_clamp),
                mechanisms: Some(self.options.mechanisms.clone()),
            },
        }
    }
}

/// One violated invariant, located by a field path such as `plants[1].q2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn plant_label(index: usize, id: &str) -> String {
    format!("plants[{index}] (id '{id}')")
}

/// Collects every diagnostic rather than stopping at the first.
pub fn validate(raw: &ScenarioFile) -> Result<Scenario, Vec<Diagnostic>> {
    let mut diags = Vec::new();

    if raw.name.trim().is_empty() {
        diags.push(Diagnostic::new("name", "must not be empty"));
    }
    let horizon_ok = raw.horizon.is_finite() && raw.horizon > 0.0;
    if !horizon_ok {
        diags.push(Diagnostic::new(
            "horizon",
            format!("must be finite and > 0, got {}", raw.horizon),
        ));
    }

    let load = match &raw.load {
        LoadSpec::Affine(a) => {
            if !a.base.is_finite() || !a.slope.is_finite() {
                diags.push(Diagnostic::new(
                    "load.affine",
                    "base and slope must be finite",
                ));
                None
            } else if a.base < 0.0 {
                diags.push(Diagnostic::new(
                    "load.affine.base",
                    format!("power must be >= 0, got {}", a.base),
                ));
                None
            } else if horizon_ok && a.base + a.slope * raw.horizon < 0.0 {
                diags.push(Diagnostic::new(
                    "load.affine.slope",
                    format!(
                        "load becomes negative before the horizon ({} MW at t = {})",
                        a.base + a.slope * raw.horizon,
                        raw.horizon
                    ),
                ));
                None
            } else if horizon_ok {
                LoadCurve::affine(a.base, a.slope, raw.horizon).ok()
            } else {
                None
            }
        }
        LoadSpec::Breakpoints(points) => {
            let pts: Vec<(f64, f64)> = points.iter().map(|b| (b.time, b.power)).collect();
            match LoadCurve::new(&pts) {
                Ok(curve) => {
                    if horizon_ok && curve.horizon() != raw.horizon {
                        diags.push(Diagnostic::new(
                            format!("load.breakpoints[{}].time", pts.len() - 1),
                            format!(
                                "last breakpoint must be at the horizon {}, found {}",
                                raw.horizon,
                                curve.horizon()
                            ),
                        ));
                        None
                    } else {
                        Some(curve)
                    }
                }
                Err(e) => {
                    diags.push(curve_diagnostic(&e));
                    None
                }
            }
        }
    };

    if raw.plants.is_empty() {
        diags.push(Diagnostic::new("plants", "at least one plant is required"));
    }
    let mut plants = Vec::with_capacity(raw.plants.len());
    for (i, spec) in raw.plants.iter().enumerate() {
        let label = plant_label(i, &spec.id);
        if spec.id.trim().is_empty() {
            diags.push(Diagnostic::new(
                format!("plants[{i}].id"),
                "must not be empty",
            ));
        }
        if raw.plants[..i].iter().any(|p| p.id == spec.id) {
            diags.push(Diagnostic::new(
                format!("plants[{i}].id"),
                format!("duplicate plant id '{}'", spec.id),
            ));
        }
        let cost = match QuadraticCost::new(spec.q2, spec.q1, spec.q0) {
            Ok(c) => Some(c),
            Err(e) => {
                let field = match &e {
                    CostError::NotStrictlyConvex { .. } => "q2",
                    CostError::NegativeCoefficient { name, .. } | CostError::NonFinite { name } => {
                        name
                    }
                    _ => "cost",
                };
                diags.push(Diagnostic::new(
                    format!("plants[{i}].{field}"),
                    format!("{label}: {e}"),
                ));
                // report the remaining coefficients too
                for (name, value) in [("q1", spec.q1), ("q0", spec.q0)] {
                    if name != field && value < 0.0 {
                        diags.push(Diagnostic::new(
                            format!("plants[{i}].{name}"),
                            format!("{label}: {name} = {value} must be >= 0"),
                        ));
                    }
                }
                None
            }
        };
        let p_min = spec.p_min.unwrap_or(0.0);
        let mut bounds_ok = true;
        if !(p_min.is_finite() && p_min >= 0.0) {
            diags.push(Diagnostic::new(
                format!("plants[{i}].p_min"),
                format!("{label}: must be finite and >= 0, got {p_min}"),
            ));
            bounds_ok = false;
        }
        if let Some(max) = spec.p_max {
            if max.is_nan() || max < p_min {
                diags.push(Diagnostic::new(
                    format!("plants[{i}].p_max"),
                    format!("{label}: p_max = {max} must be >= p_min = {p_min}"),
                ));
                bounds_ok = false;
            }
        }
        if let (Some(cost), true) = (cost, bounds_ok) {
            let plant = Plant::new(spec.id.clone(), cost)
                .with_bounds(p_min, spec.p_max)
                .expect("bounds checked above");
            plants.push(plant);
        }
    }

    let defaults = ScenarioOptions::defaults_for(if horizon_ok { raw.horizon } else { 1.0 });
    let opts = &raw.options;
    let grid_n = opts.grid_n.unwrap_or(defaults.grid_n);
    if grid_n < 2 || !grid_n.is_multiple_of(2) {
        diags.push(Diagnostic::new(
            "options.grid_n",
            format!("must be an even number >= 2, got {grid_n}"),
        ));
    }
    let m_floor = opts.m_floor.unwrap_or(defaults.m_floor);
    if !(m_floor.is_finite() && m_floor > 0.0 && (!horizon_ok || m_floor < raw.horizon)) {
        diags.push(Diagnostic::new(
            "options.m_floor",
            format!("must lie in (0, horizon), got {m_floor}"),
        ));
    }
    let mechanisms = match &opts.mechanisms {
        Some(list) => {
            let mut list = list.clone();
            list.sort();
            list.dedup();
            if list.is_empty() {
                diags.push(Diagnostic::new(
                    "options.mechanisms",
                    "must name at least one mechanism",
                ));
            }
            list
        }
        None => defaults.mechanisms.clone(),
    };

    match (diags.is_empty(), load) {
        (true, Some(load)) => Ok(Scenario {
            name: raw.name.clone(),
            horizon: raw.horizon,
            load_spec: raw.load.clone(),
            load,
            plants,
            options: ScenarioOptions {
                grid_n,
                m_floor,
                allow_clamp: opts.allow_clamp.unwrap_or(defaults.allow_clamp),
                mechanisms,
            },
        }),
        _ => Err(diags),
    }
}

fn curve_diagnostic(e: &CurveError) -> Diagnostic {
    let path = match e {
        CurveError::NonFinite { index } | CurveError::NegativePower { index, .. } => {
            format!("load.breakpoints[{index}]")
        }
        CurveError::TimesNotIncreasing { index } => {
            return Diagnostic::new(
                format!("load.breakpoints[{index}].time"),
                "duplicate or decreasing time; breakpoint times must be strictly increasing",
            )
        }
        CurveError::StartTime { .. } => "load.breakpoints[0].time".into(),
        _ => "load.breakpoints".into(),
    };
    Diagnostic::new(path, e.to_string())
}

/// The three-plant, linearly rising load case study.
pub fn builtin_case_study() -> Scenario {
    let (a, b, c) = (0.001, 0.07, 0.2);
    let raw = ScenarioFile {
        name: "three-plant case study".into(),
        horizon: 1.0,
        load: LoadSpec::Affine(AffineLoad {
            base: 350.0,
            slope: 700.0,
        }),
        plants: vec![
            PlantSpec {
                id: "plant1".into(),
                q2: a / 2.0,
                q1: b,
                q0: c,
                p_min: None,
                p_max: None,
            },
            PlantSpec {
                id: "plant2".into(),
                q2: a,
                q1: 2.0 * b,
                q0: 2.0 * c,
                p_min: None,
                p_max: None,
            },
            PlantSpec {
                id: "plant3".into(),
                q2: 2.0 * a,
                q1: 4.0 * b,
                q0: 4.0 * c,
                p_min: None,
                p_max: None,
            },
        ],
        options: OptionsSpec::default(),
    };
    validate(&raw).expect("built-in case study is valid")
}
