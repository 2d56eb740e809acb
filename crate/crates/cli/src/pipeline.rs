use core::fmt;

use ldprice_core::{
    duration_price, settle_duration, settle_spot, solve_clamped, solve_equilibrium, spot_price,
    Diagnostic, DispatchError, DispatchSolution, LoadCurve, Mechanism, QuadratureConfig, Scenario,
    SettlementReport,
};
use thiserror::Error;

use crate::series::Series;

/// Plant id reserved for the market row of the settlement table.
pub const TOTAL_ROW: &str = "total";

/// Command-line overrides applied on top of the scenario options.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRequest {
    pub mechanisms: Option<Vec<Mechanism>>,
    pub grid_n: Option<usize>,
    pub allow_clamp: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Notice {
    /// The load was not non-decreasing; duration prices use its duration curve.
    Rearranged,
    /// Some plant sat at a bound, so the spot dispatch was clamped.
    Clamped { plants: Vec<String> },
    /// Duration revenues use one market-wide price function.
    MarketDurationPrice,
}

impl fmt::Display for Notice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notice::Rearranged => f.write_str(
                "load is not monotone: duration prices refer to the duration-rearranged \
                 timeline (pi_time column), spot prices to the original one",
            ),
            Notice::Clamped { plants } => write!(
                f,
                "bound clamping applied to the spot dispatch (plants at a bound: {})",
                plants.join(", ")
            ),
            Notice::MarketDurationPrice => f.write_str(
                "duration revenues apply the single market price pi(m) to every plant; \
                 each plant's duration is read from its own output curve",
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("scenario has {} invalid field(s)", .0.len())]
    Validation(Vec<Diagnostic>),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Engine(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Unsupported(_) => 2,
            _ => 1,
        }
    }

    /// One line per problem, ready for stderr.
    pub fn lines(&self) -> Vec<String> {
        match self {
            RunError::Validation(diags) => diags.iter().map(|d| format!("error: {d}")).collect(),
            other => vec![format!("error: {other}")],
        }
    }
}

fn engine(e: impl fmt::Display) -> RunError {
    RunError::Engine(e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub scenario: String,
    pub horizon: f64,
    pub grid_n: usize,
    pub m_floor: f64,
    /// Spot first, then duration, as requested.
    pub reports: Vec<SettlementReport>,
    pub series: Series,
    pub notices: Vec<Notice>,
}

impl RunOutput {
    pub fn report(&self, mechanism: Mechanism) -> Option<&SettlementReport> {
        self.reports.iter().find(|r| r.mechanism == mechanism)
    }
}

pub fn run(scenario: &Scenario, req: &RunRequest) -> Result<RunOutput, RunError> {
    let opts = &scenario.options;
    let mut mechanisms = req
        .mechanisms
        .clone()
        .unwrap_or_else(|| opts.mechanisms.clone());
    mechanisms.sort();
    mechanisms.dedup();
    if mechanisms.is_empty() {
        return Err(RunError::Validation(vec![Diagnostic {
            path: "options.mechanisms".into(),
            message: "at least one mechanism is required".into(),
        }]));
    }

    let grid_n = req.grid_n.unwrap_or(opts.grid_n);
    let cfg = QuadratureConfig::simpson(grid_n).map_err(|e| {
        RunError::Validation(vec![Diagnostic {
            path: "grid_n".into(),
            message: e.to_string(),
        }])
    })?;
    let reserved: Vec<Diagnostic> = scenario
        .plants
        .iter()
        .enumerate()
        .filter(|(_, p)| p.id() == TOTAL_ROW)
        .map(|(i, _)| Diagnostic {
            path: format!("plants[{i}].id"),
            message: format!("'{TOTAL_ROW}' is reserved for the market row"),
        })
        .collect();
    if !reserved.is_empty() {
        return Err(RunError::Validation(reserved));
    }

    let allow_clamp = req.allow_clamp || opts.allow_clamp;
    let solve = |load: &LoadCurve| match solve_equilibrium(&scenario.plants, load) {
        Err(DispatchError::InfeasibleUnconstrained { .. }) if allow_clamp => {
            solve_clamped(&scenario.plants, load).map_err(engine)
        }
        other => other.map_err(engine),
    };

    let mut notices = Vec::new();
    let mut reports = Vec::new();
    let mut spot_sol = None;
    let mut duration = None;

    if mechanisms.contains(&Mechanism::Spot) {
        let sol = solve(&scenario.load)?;
        if sol.is_clamped() {
            notices.push(Notice::Clamped {
                plants: plants_at_bound(&sol),
            });
        }
        let price = spot_price(&sol);
        reports.push(settle_spot(&sol, &price, &cfg).map_err(engine)?);
        spot_sol = Some(sol);
    }

    if mechanisms.contains(&Mechanism::Duration) {
        let load = if scenario.load.is_non_decreasing() {
            scenario.load.clone()
        } else {
            notices.push(Notice::Rearranged);
            scenario.load.duration_curve()
        };
        let sol = solve(&load)?;
        if sol.is_clamped() {
            return Err(RunError::Unsupported(
                "duration pricing is undefined for bound-clamped dispatch; \
                 run with --mechanism spot"
                    .into(),
            ));
        }
        let price = duration_price(&sol, &cfg)
            .map_err(engine)?
            .with_m_floor(opts.m_floor);
        reports.push(settle_duration(&sol, &price, &cfg).map_err(engine)?);
        notices.push(Notice::MarketDurationPrice);
        duration = Some((sol, price));
    }

    let primary = spot_sol
        .as_ref()
        .or(duration.as_ref().map(|(sol, _)| sol))
        .expect("at least one mechanism ran");
    let series = Series::build(primary, duration.as_ref().map(|(s, p)| (s, p)));

    Ok(RunOutput {
        scenario: scenario.name.clone(),
        horizon: scenario.horizon,
        grid_n,
        m_floor: opts.m_floor,
        reports,
        series,
        notices,
    })
}

fn plants_at_bound(sol: &DispatchSolution) -> Vec<String> {
    sol.plants()
        .iter()
        .zip(sol.outputs())
        .filter(|(plant, out)| {
            out.values()
                .iter()
                .any(|&p| p <= plant.p_min() || plant.p_max().is_some_and(|hi| p >= hi))
        })
        .map(|(plant, _)| plant.id().to_string())
        .collect()
}
