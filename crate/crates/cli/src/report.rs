//! Human-readable report. Numbers are rounded to six significant digits;
//! the settlement CSV carries the same values at full precision.

use std::fmt::Write as _;

use ldprice_core::SettlementReport;

use crate::pipeline::{RunOutput, TOTAL_ROW};

const DIGITS: usize = 6;

/// `%g`-style formatting with `digits` significant digits and trailing
/// zeros trimmed.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    // exponent after rounding, so 999999.7 becomes 1e6 rather than 1000000
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn percent(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{}%", sig(100.0 * r, DIGITS)),
        None => "n/a".into(),
    }
}

fn table(s: &mut String, report: &SettlementReport) {
    let width = report
        .plants
        .iter()
        .map(|p| p.plant.len())
        .chain([TOTAL_ROW.len(), 5])
        .max()
        .unwrap_or(5);
    let _ = writeln!(s, "{} settlement", report.mechanism.as_str());
    let _ = writeln!(
        s,
        "  {:<width$}  {:>12}  {:>12}  {:>12}  {:>12}",
        "plant", "cost", "revenue", "profit", "profit rate"
    );
    let mut row = |name: &str, cost: f64, revenue: f64, profit: f64, rate: Option<f64>| {
        let _ = writeln!(
            s,
            "  {:<width$}  {:>12}  {:>12}  {:>12}  {:>12}",
            name,
            sig(cost, DIGITS),
            sig(revenue, DIGITS),
            sig(profit, DIGITS),
            percent(rate)
        );
    };
    for p in &report.plants {
        row(
            &p.plant,
            p.generation_cost,
            p.revenue,
            p.profit,
            p.profit_rate,
        );
    }
    row(
        TOTAL_ROW,
        report.total_cost,
        report.total_revenue,
        report.total_profit,
        report.market_profit_rate,
    );
}

pub fn render_report(out: &RunOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", out.scenario);
    let _ = writeln!(
        s,
        "horizon {} h, {} plants, Simpson quadrature on {} panels",
        sig(out.horizon, DIGITS),
        out.series.plant_ids.len(),
        out.grid_n
    );
    for report in &out.reports {
        s.push('\n');
        table(&mut s, report);
    }
    if !out.notices.is_empty() {
        s.push_str("\nnotes:\n");
        for n in &out.notices {
            let _ = writeln!(s, "  - {n}");
        }
    }
    s
}
