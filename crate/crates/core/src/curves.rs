//! Continuous-time power trajectories.
//!
//! A trajectory is stored as explicit breakpoints `(time, value)` and is linear
//! in between. [`PiecewiseLinear`] carries any finite values (prices, marginal
//! costs); [`LoadCurve`] adds the non-negativity required of power.
//!
//! The level-set measure `m(y) = |{t : P(t) > y}|` is computed segment by
//! segment in closed form, which makes the duration (monotone) rearrangement an
//! exact construction rather than a sampled one.

use alloc::vec::Vec;
use core::ops::Deref;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("a curve needs at least 2 breakpoints, got {count}")]
    TooFewBreakpoints { count: usize },
    #[error("breakpoint {index} is not finite")]
    NonFinite { index: usize },
    #[error("first breakpoint must be at t = 0, found t = {found}")]
    StartTime { found: f64 },
    #[error("breakpoint times must be strictly increasing (breakpoint {index})")]
    TimesNotIncreasing { index: usize },
    #[error("power must be non-negative, breakpoint {index} has {value}")]
    NegativePower { index: usize, value: f64 },
    #[error("{value} is outside [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    #[error("operation requires a strictly increasing curve")]
    NotStrictlyIncreasing,
}

/// A continuous piecewise-linear function on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, CurveError> {
        if points.len() < 2 {
            return Err(CurveError::TooFewBreakpoints {
                count: points.len(),
            });
        }
        for (index, &(t, v)) in points.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(CurveError::NonFinite { index });
            }
        }
        if points[0].0 != 0.0 {
            return Err(CurveError::StartTime { found: points[0].0 });
        }
        for index in 1..points.len() {
            if points[index].0 <= points[index - 1].0 {
                return Err(CurveError::TimesNotIncreasing { index });
            }
        }
        Ok(Self {
            times: points.iter().map(|p| p.0).collect(),
            values: points.iter().map(|p| p.1).collect(),
        })
    }

    /// `value(t) = base + slope * t` on `[0, horizon]`.
    pub fn affine(base: f64, slope: f64, horizon: f64) -> Result<Self, CurveError> {
        Self::new(&[(0.0, base), (horizon, base + slope * horizon)])
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Segments as `(t0, v0, t1, v1)`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.times.len() - 1).map(move |k| {
            (
                self.times[k],
                self.values[k],
                self.times[k + 1],
                self.values[k + 1],
            )
        })
    }

    pub fn segment_count(&self) -> usize {
        self.times.len() - 1
    }

    /// Slope of segment `k`.
    pub fn slope(&self, k: usize) -> f64 {
        (self.values[k + 1] - self.values[k]) / (self.times[k + 1] - self.times[k])
    }

    /// Index of the segment containing `t`; breakpoints belong to the segment
    /// on their right except the final one.
    pub fn segment_index(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(self.segment_count() - 1)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64, CurveError> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&t) {
            return Err(CurveError::OutOfDomain {
                value: t,
                lo: 0.0,
                hi: horizon,
            });
        }
        Ok(self.value_at(t))
    }

    /// Interpolated value; `t` is clamped into `[0, T]`.
    pub fn value_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.horizon());
        let k = self.segment_index(t);
        self.value_in_segment(k, t)
    }

    /// Value of segment `k`'s line at `t` (no clamping to the segment).
    pub fn value_in_segment(&self, k: usize, t: f64) -> f64 {
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        if t == t0 {
            return self.values[k];
        }
        if t == t1 {
            return self.values[k + 1];
        }
        let w = (t - t0) / (t1 - t0);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact integral over `[0, T]` (trapezoid per segment).
    pub fn integral(&self) -> f64 {
        self.segments()
            .map(|(t0, v0, t1, v1)| 0.5 * (v0 + v1) * (t1 - t0))
            .sum()
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] > w[0])
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[1] == w[0])
    }

    /// `|{t : value(t) > y}|`. A flat segment sitting exactly at `y`
    /// contributes nothing.
    pub fn measure_above(&self, y: f64) -> f64 {
        let total: f64 = self
            .segments()
            .map(|(t0, v0, t1, v1)| {
                let dt = t1 - t0;
                match (v0 > y, v1 > y) {
                    (true, true) => dt,
                    (false, false) => 0.0,
                    (true, false) => dt * (v0 - y) / (v0 - v1),
                    (false, true) => dt * (v1 - y) / (v1 - v0),
                }
            })
            .sum();
        total.clamp(0.0, self.horizon())
    }

    /// `|{t : value(t) >= y}|`, the left limit of [`Self::measure_above`].
    pub fn measure_at_or_above(&self, y: f64) -> f64 {
        let total: f64 = self
            .segments()
            .map(|(t0, v0, t1, v1)| {
                let dt = t1 - t0;
                match (v0 >= y, v1 >= y) {
                    (true, true) => dt,
                    (false, false) => 0.0,
                    (true, false) => dt * (v0 - y) / (v0 - v1),
                    (false, true) => dt * (v1 - y) / (v1 - v0),
                }
            })
            .sum();
        total.clamp(0.0, self.horizon())
    }

    /// Sorted distinct breakpoint values.
    pub fn levels(&self) -> Vec<f64> {
        let mut levels = self.values.clone();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels
    }

    /// The unique `t` with `value(t) = y` on a strictly increasing curve.
    pub fn inverse(&self, y: f64) -> Result<f64, CurveError> {
        if !self.is_strictly_increasing() {
            return Err(CurveError::NotStrictlyIncreasing);
        }
        let (lo, hi) = (self.values[0], self.values[self.values.len() - 1]);
        if !(lo..=hi).contains(&y) {
            return Err(CurveError::OutOfDomain { value: y, lo, hi });
        }
        let k = self
            .values
            .partition_point(|&v| v <= y)
            .saturating_sub(1)
            .min(self.segment_count() - 1);
        let (t0, v0, t1, v1) = (
            self.times[k],
            self.values[k],
            self.times[k + 1],
            self.values[k + 1],
        );
        if y == v0 {
            return Ok(t0);
        }
        if y == v1 {
            return Ok(t1);
        }
        Ok(t0 + (t1 - t0) * (y - v0) / (v1 - v0))
    }

    /// A copy with extra breakpoints inserted at `times` (values from the
    /// existing interpolation). Times outside `(0, T)` or already present are
    /// ignored.
    pub fn refined(&self, times: &[f64]) -> Self {
        let horizon = self.horizon();
        let mut all: Vec<f64> = self.times.clone();
        all.extend(times.iter().copied().filter(|&t| t > 0.0 && t < horizon));
        all.sort_by(f64::total_cmp);
        all.dedup();
        let values = all.iter().map(|&t| self.value_at(t)).collect();
        Self { times: all, values }
    }

    /// `scale * value(t) + offset` with the same breakpoints.
    pub fn map_affine(&self, scale: f64, offset: f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|&v| scale * v + offset).collect(),
        }
    }

    /// `f(value(t))` sampled on the same breakpoints.
    pub fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Drops interior breakpoints that lie on the line through their
    /// neighbours.
    pub fn merge_collinear(&self) -> Self {
        let mut times = Vec::with_capacity(self.times.len());
        let mut values = Vec::with_capacity(self.values.len());
        times.push(self.times[0]);
        values.push(self.values[0]);
        for k in 1..self.times.len() - 1 {
            let (ta, va) = (times[times.len() - 1], values[values.len() - 1]);
            let (tb, vb) = (self.times[k], self.values[k]);
            let (tc, vc) = (self.times[k + 1], self.values[k + 1]);
            let lhs = (vb - va) * (tc - tb);
            let rhs = (vc - vb) * (tb - ta);
            let scale = (vb - va).abs().max((vc - vb).abs()) * (tc - ta);
            if (lhs - rhs).abs() > 1e-12 * scale {
                times.push(tb);
                values.push(vb);
            }
        }
        times.push(self.horizon());
        values.push(self.values[self.values.len() - 1]);
        Self { times, values }
    }

    /// The non-decreasing rearrangement: the unique non-decreasing curve on
    /// `[0, T]` with the same level-set measure.
    ///
    /// Between consecutive breakpoint levels the measure is affine in `y`, so
    /// each level contributes the points `(T - m(L-), L)` and `(T - m(L), L)`;
    /// the second differs from the first only when the curve is flat at `L`.
    pub fn rearranged(&self) -> Self {
        if self.is_non_decreasing() {
            return self.merge_collinear();
        }
        let horizon = self.horizon();
        let min_gap = 1e-12 * horizon;
        let mut times: Vec<f64> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut push = |t: f64, v: f64| {
            if let Some(&last) = times.last() {
                if t <= last + min_gap {
                    if times.len() > 1 {
                        let n = times.len() - 1;
                        values[n] = v;
                    }
                    return;
                }
            }
            times.push(t);
            values.push(v);
        };
        let levels = self.levels();
        for (i, &level) in levels.iter().enumerate() {
            let start = if i == 0 {
                0.0
            } else {
                horizon - self.measure_at_or_above(level)
            };
            push(start, level);
            let end = if i + 1 == levels.len() {
                horizon
            } else {
                horizon - self.measure_above(level)
            };
            push(end, level);
        }
        let n = times.len() - 1;
        times[n] = horizon;
        Self { times, values }.merge_collinear()
    }
}

/// A non-negative power trajectory in MW over `[0, T]` hours.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadCurve(PiecewiseLinear);

impl LoadCurve {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, CurveError> {
        Self::from_piecewise(PiecewiseLinear::new(points)?)
    }

    /// `P(t) = base + slope * t` on `[0, horizon]`.
    pub fn affine(base: f64, slope: f64, horizon: f64) -> Result<Self, CurveError> {
        Self::from_piecewise(PiecewiseLinear::affine(base, slope, horizon)?)
    }

    pub fn constant(power: f64, horizon: f64) -> Result<Self, CurveError> {
        Self::affine(power, 0.0, horizon)
    }

    pub fn from_piecewise(curve: PiecewiseLinear) -> Result<Self, CurveError> {
        if let Some((index, &value)) = curve.values.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(CurveError::NegativePower { index, value });
        }
        Ok(Self(curve))
    }

    pub fn as_piecewise(&self) -> &PiecewiseLinear {
        &self.0
    }

    pub fn into_piecewise(self) -> PiecewiseLinear {
        self.0
    }

    /// Energy in MWh.
    pub fn energy(&self) -> f64 {
        self.0.integral()
    }

    pub fn measure_function(&self) -> MeasureFunction {
        MeasureFunction::new(self.clone())
    }

    /// Monotone non-decreasing rearrangement (the load-duration curve read
    /// left to right).
    pub fn duration_curve(&self) -> LoadCurve {
        LoadCurve(self.0.rearranged())
    }
}

impl Deref for LoadCurve {
    type Target = PiecewiseLinear;

    fn deref(&self) -> &PiecewiseLinear {
        &self.0
    }
}

/// `m(y) = |{t : P(t) > y}|` for a fixed power trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFunction {
    curve: LoadCurve,
    levels: Vec<f64>,
}

impl MeasureFunction {
    pub fn new(curve: LoadCurve) -> Self {
        let levels = curve.levels();
        Self { curve, levels }
    }

    pub fn curve(&self) -> &LoadCurve {
        &self.curve
    }

    pub fn horizon(&self) -> f64 {
        self.curve.horizon()
    }

    /// Sorted distinct power levels at which `m` can change slope or jump.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn min_level(&self) -> f64 {
        self.levels[0]
    }

    pub fn max_level(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }

    pub fn at(&self, y: f64) -> f64 {
        self.curve.measure_above(y)
    }

    /// `lim_{z -> y-} m(z) = |{t : P(t) >= y}|`.
    pub fn left_limit(&self, y: f64) -> f64 {
        self.curve.measure_at_or_above(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn pd() -> LoadCurve {
        LoadCurve::new(&[(0.0, 350.0), (1.0, 1050.0)]).unwrap()
    }

    fn vee() -> LoadCurve {
        LoadCurve::new(&[(0.0, 100.0), (0.5, 0.0), (1.0, 100.0)]).unwrap()
    }

    fn sampled_measure(c: &LoadCurve, y: f64, n: usize) -> f64 {
        let h = c.horizon() / n as f64;
        let count = (0..n)
            .filter(|&i| c.value_at((i as f64 + 0.5) * h) > y)
            .count();
        count as f64 * h
    }

    #[test]
    fn evaluate_case_study_load() {
        assert_eq!(pd().evaluate(0.5).unwrap(), 700.0);
        assert_eq!(pd().evaluate(0.0).unwrap(), 350.0);
        assert_eq!(pd().evaluate(0.25).unwrap(), 525.0);
        assert_eq!(pd().evaluate(1.0).unwrap(), 1050.0);
    }

    #[test]
    fn evaluate_rejects_outside_horizon() {
        assert!(matches!(
            pd().evaluate(1.5),
            Err(CurveError::OutOfDomain { .. })
        ));
        assert!(pd().evaluate(-1e-9).is_err());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            LoadCurve::new(&[(0.0, 1.0)]),
            Err(CurveError::TooFewBreakpoints { count: 1 })
        );
        assert_eq!(
            LoadCurve::new(&[(0.0, 1.0), (0.5, 1.0), (0.5, 2.0)]),
            Err(CurveError::TimesNotIncreasing { index: 2 })
        );
        assert_eq!(
            LoadCurve::new(&[(0.1, 1.0), (0.5, 1.0)]),
            Err(CurveError::StartTime { found: 0.1 })
        );
        assert!(matches!(
            LoadCurve::new(&[(0.0, -1.0), (0.5, 1.0)]),
            Err(CurveError::NegativePower { index: 0, .. })
        ));
        assert_eq!(
            LoadCurve::new(&[(0.0, f64::NAN), (0.5, 1.0)]),
            Err(CurveError::NonFinite { index: 0 })
        );
    }

    #[test]
    fn measure_examples() {
        let p1 = LoadCurve::affine(250.0, 400.0, 1.0).unwrap();
        assert!((p1.measure_above(450.0) - 0.5).abs() < 1e-15);
        assert_eq!(p1.measure_above(100.0), 1.0);
        assert_eq!(p1.measure_above(700.0), 0.0);
        assert!((vee().measure_above(50.0) - 0.5).abs() < 1e-15);
        let brute = sampled_measure(&vee(), 50.0, 1_000_000);
        assert!((brute - 0.5).abs() < 1e-5);
    }

    #[test]
    fn flat_segment_at_level_contributes_nothing() {
        let c = LoadCurve::new(&[(0.0, 0.0), (0.25, 10.0), (0.75, 10.0), (1.0, 0.0)]).unwrap();
        assert_eq!(c.measure_above(10.0), 0.0);
        assert!((c.measure_at_or_above(10.0) - 0.5).abs() < 1e-15);
        // left-continuous jump of size 0.5 at y = 10
        assert!((c.measure_above(10.0 - 1e-9) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn inverse_examples() {
        let p1 = LoadCurve::affine(250.0, 400.0, 1.0).unwrap();
        assert_eq!(p1.inverse(650.0).unwrap(), 1.0);
        assert_eq!(p1.inverse(250.0).unwrap(), 0.0);
        let p = LoadCurve::affine(350.0, 700.0, 1.0).unwrap();
        assert_eq!(p.inverse(700.0).unwrap(), 0.5);
        assert_eq!(vee().inverse(50.0), Err(CurveError::NotStrictlyIncreasing));
        assert!(matches!(
            p1.inverse(700.0),
            Err(CurveError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn duration_curve_is_identity_on_monotone_input() {
        assert_eq!(pd().duration_curve(), pd());
        let collinear = LoadCurve::new(&[(0.0, 0.0), (0.5, 5.0), (1.0, 10.0)]).unwrap();
        assert_eq!(
            collinear.duration_curve(),
            LoadCurve::new(&[(0.0, 0.0), (1.0, 10.0)]).unwrap()
        );
    }

    #[test]
    fn duration_curve_of_vee() {
        let r = vee().duration_curve();
        assert!(r.is_non_decreasing());
        for i in 0..=100 {
            let y = i as f64;
            let expected = 1.0 - y / 100.0;
            assert!((r.measure_above(y) - expected).abs() < 1e-12, "y = {y}");
        }
        // sorted-sample oracle
        let n = 1_000_000;
        let mut samples: Vec<f64> = (0..n)
            .map(|i| vee().value_at((i as f64 + 0.5) / n as f64))
            .collect();
        samples.sort_by(f64::total_cmp);
        for i in (0..n).step_by(9973) {
            let s = (i as f64 + 0.5) / n as f64;
            assert!((r.value_at(s) - samples[i]).abs() < 1e-3);
        }
    }

    #[test]
    fn duration_curve_with_plateaus() {
        let c = LoadCurve::new(&[
            (0.0, 5.0),
            (1.0, 20.0),
            (2.0, 20.0),
            (3.0, 0.0),
            (4.0, 5.0),
            (5.0, 5.0),
        ])
        .unwrap();
        let r = c.duration_curve();
        assert!(r.is_non_decreasing());
        assert_eq!(r.horizon(), 5.0);
        assert_eq!(r.min_value(), 0.0);
        assert_eq!(r.max_value(), 20.0);
        for y in [0.0, 2.5, 4.999, 5.0, 5.001, 12.0, 19.999, 20.0] {
            assert!(
                (r.measure_above(y) - c.measure_above(y)).abs() < 1e-12,
                "y = {y}"
            );
        }
        assert!((r.energy() - c.energy()).abs() < 1e-12);
    }

    #[test]
    fn refined_keeps_shape() {
        let r = pd().refined(&[0.5, 0.25, 0.0, 2.0]);
        assert_eq!(r.times(), &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(r.values(), &[350.0, 525.0, 700.0, 1050.0]);
    }

    fn arb_curve() -> impl Strategy<Value = LoadCurve> {
        (
            prop::collection::vec((0.01f64..1.0, 0.0f64..100.0), 1..8),
            0.0f64..100.0,
        )
            .prop_map(|(segs, p0)| {
                let mut pts = vec![(0.0, p0)];
                let mut t = 0.0;
                for (dt, p) in segs {
                    t += dt;
                    pts.push((t, p));
                }
                LoadCurve::new(&pts).unwrap()
            })
    }

    proptest! {
        #[test]
        fn measure_matches_sampling(c in arb_curve(), frac in 0.0f64..1.0) {
            let y = c.min_value() + frac * (c.max_value() - c.min_value());
            let brute = sampled_measure(&c, y, 200_000);
            prop_assert!((brute - c.measure_above(y)).abs() <= c.horizon() * 5e-5);
        }

        #[test]
        fn measure_is_non_increasing(c in arb_curve()) {
            let (lo, hi) = (c.min_value() - 1.0, c.max_value() + 1.0);
            let mut prev = f64::INFINITY;
            for i in 0..=200 {
                let m = c.measure_above(lo + (hi - lo) * i as f64 / 200.0);
                prop_assert!(m <= prev);
                prop_assert!((0.0..=c.horizon()).contains(&m));
                prev = m;
            }
            prop_assert_eq!(c.measure_above(lo), c.horizon());
            prop_assert_eq!(c.measure_above(hi), 0.0);
        }

        #[test]
        fn rearrangement_preserves_measure_and_energy(c in arb_curve()) {
            let r = c.duration_curve();
            prop_assert!(r.is_non_decreasing());
            prop_assert_eq!(r.horizon(), c.horizon());
            let (lo, hi) = (c.min_value(), c.max_value());
            for i in 0..=100 {
                let y = lo + (hi - lo) * i as f64 / 100.0;
                prop_assert!((r.measure_above(y) - c.measure_above(y)).abs() <= c.horizon() * 1e-6);
            }
            let e = c.energy();
            prop_assert!((r.energy() - e).abs() <= 1e-8 * e.abs().max(1e-300));
        }
    }
}
