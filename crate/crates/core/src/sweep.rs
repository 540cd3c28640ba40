//! Parameter-grid execution with parallel evaluation, and extremum
//! detection on single-axis scans.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{g2_zero_with, CorrelationKind};
use crate::error::{Error, Result};
use crate::hilbert::{Ladders, TruncatedSpace};
use crate::model::{liouvillian_from_ladders, EffectiveParams};
use crate::regression::{g2_tau, rk45, EXPM_AUTO_MAX_DIM};
use crate::steady::{converge_truncation, occupations_with, steady_state, DensityMatrix, RESIDUAL_TOL_PER_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2ef,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Custom,
}

impl Scenario {
    pub const BUILTIN: [Scenario; 8] = [
        Scenario::Fig2a,
        Scenario::Fig2b,
        Scenario::Fig2c,
        Scenario::Fig2ef,
        Scenario::Fig3,
        Scenario::Fig4,
        Scenario::Fig5,
        Scenario::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2a => "fig2a",
            Scenario::Fig2b => "fig2b",
            Scenario::Fig2c => "fig2c",
            Scenario::Fig2ef => "fig2ef",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Fig5 => "fig5",
            Scenario::Fig6 => "fig6",
            Scenario::Custom => "custom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::BUILTIN
            .iter()
            .chain(std::iter::once(&Scenario::Custom))
            .find(|sc| sc.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidSweep(format!("unknown scenario '{s}'")))
    }
}

/// Sweepable quantities. Rates are in units of `γ_c`; `tau` is in units of
/// `2π/γ_c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Delta,
    DeltaM,
    J,
    Epsilon,
    GammaM,
    NTh,
    Tau,
}

impl Parameter {
    /// CSV column header.
    pub fn column(self) -> &'static str {
        match self {
            Parameter::Delta => "delta_over_gc",
            Parameter::DeltaM => "delta_m_over_gc",
            Parameter::J => "J_over_gc",
            Parameter::Epsilon => "epsilon_over_gc",
            Parameter::GammaM => "gamma_m_over_gc",
            Parameter::NTh => "n_th",
            Parameter::Tau => "tau_over_2pi_gc",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One grid axis: either a `min..max` range of `count` points or an
/// explicit list of `values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: Parameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Axis {
    pub fn range(parameter: Parameter, min: f64, max: f64, count: usize, spacing: Spacing) -> Self {
        Self {
            parameter,
            min: Some(min),
            max: Some(max),
            count: Some(count),
            spacing,
            values: None,
        }
    }

    pub fn list(parameter: Parameter, values: Vec<f64>) -> Self {
        Self {
            parameter,
            min: None,
            max: None,
            count: None,
            spacing: Spacing::Linear,
            values: Some(values),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.parameter;
        match (&self.values, self.min, self.max, self.count) {
            (Some(v), None, None, None) => {
                if v.is_empty() {
                    return Err(Error::InvalidSweep(format!("axis {p:?} has an empty value list")));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidSweep(format!("axis {p:?} has non-finite values")));
                }
                if v.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidSweep(format!(
                        "axis {p:?} values must be strictly increasing"
                    )));
                }
                Ok(())
            }
            (None, Some(min), Some(max), Some(count)) => {
                if count < 2 {
                    return Err(Error::InvalidSweep(format!(
                        "axis {p:?} needs at least 2 points, got {count}"
                    )));
                }
                if !(min.is_finite() && max.is_finite() && min < max) {
                    return Err(Error::InvalidSweep(format!(
                        "axis {p:?} needs min < max, got [{min}, {max}]"
                    )));
                }
                if self.spacing == Spacing::Log && !(min > 0.0) {
                    return Err(Error::InvalidSweep(format!("log axis {p:?} needs min > 0, got {min}")));
                }
                Ok(())
            }
            _ => Err(Error::InvalidSweep(format!(
                "axis {p:?} must give either min, max and count or a values list"
            ))),
        }
    }

    /// Grid coordinates in order.
    pub fn points(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let (min, max, n) = (
            self.min.unwrap_or(0.0),
            self.max.unwrap_or(0.0),
            self.count.unwrap_or(0),
        );
        (0..n)
            .map(|k| {
                if k == 0 {
                    return min;
                }
                if k == n - 1 {
                    return max;
                }
                let f = k as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => min + f * (max - min),
                    Spacing::Log => (min.ln() + f * (max.ln() - min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Fixed values overriding the defaults `Δ = Δ_m = J = ε = n_th = 0`,
/// `γ_m = 0.1`. `γ_c = 1` throughout.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_th: Option<f64>,
}

/// Per-row output columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    NA,
    NB,
    #[serde(rename = "g2_aa_0")]
    G2Aa0,
    #[serde(rename = "g2_bb_0")]
    G2Bb0,
    #[serde(rename = "g2_ab_0")]
    G2Ab0,
    G2AaTau,
    G2BbTau,
    G2AbTauPos,
    G2AbTauNeg,
}

impl Observable {
    pub const RECORD: [Observable; 5] = [
        Observable::NA,
        Observable::NB,
        Observable::G2Aa0,
        Observable::G2Bb0,
        Observable::G2Ab0,
    ];
    pub const SERIES: [Observable; 4] = [
        Observable::G2AaTau,
        Observable::G2BbTau,
        Observable::G2AbTauPos,
        Observable::G2AbTauNeg,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Observable::NA => "n_a",
            Observable::NB => "n_b",
            Observable::G2Aa0 => "g2_aa_0",
            Observable::G2Bb0 => "g2_bb_0",
            Observable::G2Ab0 => "g2_ab_0",
            Observable::G2AaTau => "g2_aa_tau",
            Observable::G2BbTau => "g2_bb_tau",
            Observable::G2AbTauPos => "g2_ab_tau_pos",
            Observable::G2AbTauNeg => "g2_ab_tau_neg",
        }
    }

    pub fn is_series(self) -> bool {
        Observable::SERIES.contains(&self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: FixedParams,
    /// When set, `Δ = delta_ratio · Δ_m` at every grid point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_ratio: Option<f64>,
    pub outputs: Vec<Observable>,
    #[serde(default)]
    pub space: TruncatedSpace,
    /// Grow the truncation per point until observables agree to this
    /// relative tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge_tol: Option<f64>,
}

impl SweepSpec {
    /// The figure scans with their fixed parameters.
    pub fn builtin(scenario: Scenario) -> Result<Self> {
        use Parameter as P;
        let record = Observable::RECORD.to_vec();
        let base = |axes, fixed, delta_ratio, outputs| SweepSpec {
            scenario,
            axes,
            fixed,
            delta_ratio,
            outputs,
            space: TruncatedSpace::default(),
            converge_tol: None,
        };
        let blockade = |j: Option<f64>| FixedParams {
            delta: Some(0.0),
            delta_m: Some(0.0),
            j,
            epsilon: Some(0.05),
            gamma_m: Some(0.1),
            n_th: Some(1e-4),
        };
        let pairs = |epsilon: Option<f64>, delta_m: Option<f64>, n_th: Option<f64>| FixedParams {
            delta: None,
            delta_m,
            j: Some(5.0),
            epsilon,
            gamma_m: Some(0.1),
            n_th,
        };
        Ok(match scenario {
            Scenario::Fig2a => base(
                vec![Axis::range(P::J, 0.05, 1.5, 60, Spacing::Log)],
                blockade(None),
                None,
                record,
            ),
            Scenario::Fig2b => base(
                vec![Axis::range(P::Delta, -2.0, 2.0, 101, Spacing::Linear)],
                FixedParams {
                    delta: None,
                    ..blockade(Some(0.406))
                },
                None,
                record,
            ),
            Scenario::Fig2c => base(
                vec![Axis::range(P::DeltaM, -1.0, 1.0, 101, Spacing::Linear)],
                FixedParams {
                    delta: None,
                    delta_m: None,
                    ..blockade(Some(0.406))
                },
                Some(2.0),
                record,
            ),
            Scenario::Fig2ef => base(
                vec![Axis::range(P::Tau, 0.0, 2.0, 256, Spacing::Linear)],
                blockade(Some(0.406)),
                None,
                Observable::SERIES.to_vec(),
            ),
            Scenario::Fig3 => base(
                vec![
                    Axis::list(P::NTh, vec![1e-3, 1e-2, 1e-1]),
                    Axis::range(P::Epsilon, 1e-3, 0.1, 40, Spacing::Log),
                ],
                FixedParams {
                    epsilon: None,
                    n_th: None,
                    ..blockade(Some(0.406))
                },
                None,
                record,
            ),
            Scenario::Fig4 => base(
                vec![
                    Axis::range(P::GammaM, 0.02, 1.0, 20, Spacing::Linear),
                    Axis::range(P::J, 0.2, 1.2, 20, Spacing::Linear),
                ],
                FixedParams {
                    gamma_m: None,
                    ..blockade(None)
                },
                None,
                vec![Observable::G2Aa0],
            ),
            Scenario::Fig5 => base(
                vec![Axis::range(P::DeltaM, 3.0, 6.0, 150, Spacing::Linear)],
                pairs(Some(0.05), None, Some(1e-4)),
                Some(2.0),
                record,
            ),
            Scenario::Fig6 => base(
                vec![
                    Axis::list(P::NTh, vec![1e-4, 1e-3, 1e-2]),
                    Axis::range(P::Epsilon, 1e-2, 1.0, 40, Spacing::Log),
                ],
                pairs(None, Some(3.9), None),
                Some(2.0),
                record,
            ),
            Scenario::Custom => {
                return Err(Error::InvalidSweep(
                    "custom scenarios need an explicit sweep definition".into(),
                ))
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::InvalidSweep("at least one axis is required".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidSweep("at least one output is required".into()));
        }
        for (k, a) in self.axes.iter().enumerate() {
            a.validate()?;
            if self.axes[..k].iter().any(|b| b.parameter == a.parameter) {
                return Err(Error::InvalidSweep(format!("axis {:?} repeated", a.parameter)));
            }
        }
        let tau_pos = self.axes.iter().position(|a| a.parameter == Parameter::Tau);
        if let Some(k) = tau_pos {
            if k != self.axes.len() - 1 {
                return Err(Error::InvalidSweep("the tau axis must be the last axis".into()));
            }
            if self.axes[k].points().iter().any(|t| *t < 0.0) {
                return Err(Error::InvalidSweep("tau values must be non-negative".into()));
            }
        }
        let wants_series = self.outputs.iter().any(|o| o.is_series());
        if wants_series != tau_pos.is_some() {
            return Err(Error::InvalidSweep(
                "time-delay outputs and a tau axis go together".into(),
            ));
        }
        for (k, o) in self.outputs.iter().enumerate() {
            if self.outputs[..k].contains(o) {
                return Err(Error::InvalidSweep(format!("output {} repeated", o.column())));
            }
        }
        if let Some(r) = self.delta_ratio {
            if !r.is_finite() {
                return Err(Error::InvalidSweep(format!("delta_ratio must be finite, got {r}")));
            }
            if self.fixed.delta.is_some() || self.axes.iter().any(|a| a.parameter == Parameter::Delta) {
                return Err(Error::InvalidSweep(
                    "delta_ratio conflicts with an explicit delta".into(),
                ));
            }
        }
        if let Some(tol) = self.converge_tol {
            if !(tol > 0.0) {
                return Err(Error::InvalidSweep(format!("converge_tol must be positive, got {tol}")));
            }
        }
        self.space.validate()?;
        Ok(())
    }

    /// Number of rows the sweep will produce.
    pub fn grid_size(&self) -> usize {
        self.axes.iter().map(|a| a.points().len()).product()
    }

    /// CSV header: axis columns then outputs.
    pub fn columns(&self) -> Vec<&'static str> {
        self.axes
            .iter()
            .map(|a| a.parameter.column())
            .chain(self.outputs.iter().map(|o| o.column()))
            .collect()
    }

    /// Model parameters at a grid point (tau coordinates ignored).
    pub fn params_at(&self, point: &[f64]) -> Result<EffectiveParams> {
        let f = &self.fixed;
        let mut delta = f.delta.unwrap_or(0.0);
        let mut delta_m = f.delta_m.unwrap_or(0.0);
        let mut j = f.j.unwrap_or(0.0);
        let mut epsilon = f.epsilon.unwrap_or(0.0);
        let mut gamma_m = f.gamma_m.unwrap_or(0.1);
        let mut n_th = f.n_th.unwrap_or(0.0);
        for (axis, &x) in self.axes.iter().zip(point) {
            match axis.parameter {
                Parameter::Delta => delta = x,
                Parameter::DeltaM => delta_m = x,
                Parameter::J => j = x,
                Parameter::Epsilon => epsilon = x,
                Parameter::GammaM => gamma_m = x,
                Parameter::NTh => n_th = x,
                Parameter::Tau => {}
            }
        }
        if let Some(r) = self.delta_ratio {
            delta = r * delta_m;
        }
        EffectiveParams::new(delta, delta_m, j, epsilon, 1.0, gamma_m, n_th)
    }

    fn outer_points(&self) -> Vec<Vec<f64>> {
        let outer: Vec<&Axis> = self.axes.iter().filter(|a| a.parameter != Parameter::Tau).collect();
        let mut grid = vec![Vec::new()];
        for axis in outer {
            let pts = axis.points();
            grid = grid
                .into_iter()
                .flat_map(|prefix: Vec<f64>| {
                    pts.iter().map(move |x| {
                        let mut p = prefix.clone();
                        p.push(*x);
                        p
                    })
                })
                .collect();
        }
        grid
    }

    fn taus(&self) -> Option<Vec<f64>> {
        self.axes
            .iter()
            .find(|a| a.parameter == Parameter::Tau)
            .map(|a| a.points())
    }
}

/// One grid point's outputs; `values` holds NaN where the point failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: Vec<f64>,
    pub values: Vec<f64>,
    pub space: TruncatedSpace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub code_version: String,
    pub space: TruncatedSpace,
    pub converge_tol: Option<f64>,
    pub steady_residual_tol_per_dim: f64,
    pub rk_rtol: f64,
    pub rk_atol: f64,
    pub expm_max_superoperator_dim: usize,
    pub tau_unit: String,
}

impl Provenance {
    fn new(spec: &SweepSpec) -> Self {
        Self {
            code_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            space: spec.space,
            converge_tol: spec.converge_tol,
            steady_residual_tol_per_dim: RESIDUAL_TOL_PER_DIM,
            rk_rtol: rk45::DEFAULT_RTOL,
            rk_atol: rk45::DEFAULT_ATOL,
            expm_max_superoperator_dim: EXPM_AUTO_MAX_DIM,
            tau_unit: "2pi/gamma_c".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn column_index(&self, field: Observable) -> Option<usize> {
        self.spec.outputs.iter().position(|o| *o == field)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn solve_point(spec: &SweepSpec, ep: &EffectiveParams) -> Result<(DensityMatrix, Ladders, crate::hilbert::CsOperator)> {
    let space = match spec.converge_tol {
        Some(tol) => converge_truncation(ep, spec.space, tol)?.1.final_space,
        None => spec.space,
    };
    let lad = Ladders::new(space)?;
    let gen = liouvillian_from_ladders(ep, &lad)?;
    let rho = steady_state(&gen)?;
    Ok((rho, lad, gen))
}

fn equal_time(rho: &DensityMatrix, lad: &Ladders, o: Observable) -> Result<f64> {
    match o {
        Observable::NA => Ok(occupations_with(rho, lad).0),
        Observable::NB => Ok(occupations_with(rho, lad).1),
        Observable::G2Aa0 => g2_zero_with(rho, lad, CorrelationKind::Aa),
        Observable::G2Bb0 => g2_zero_with(rho, lad, CorrelationKind::Bb),
        Observable::G2Ab0 => g2_zero_with(rho, lad, CorrelationKind::Ab),
        _ => unreachable!("series outputs are evaluated separately"),
    }
}

/// Rows belonging to one outer grid point (one per tau, or one).
fn evaluate(spec: &SweepSpec, outer: &[f64], taus: Option<&[f64]>) -> Vec<SweepRow> {
    let n_rows = taus.map_or(1, |t| t.len());
    let point_at = |k: usize| {
        let mut p = outer.to_vec();
        if let Some(t) = taus {
            p.push(t[k]);
        }
        p
    };
    let fail = |space: TruncatedSpace, e: Error| {
        (0..n_rows)
            .map(|k| SweepRow {
                point: point_at(k),
                values: vec![f64::NAN; spec.outputs.len()],
                space,
                error: Some(e.to_string()),
            })
            .collect::<Vec<_>>()
    };
    let ep = match spec.params_at(outer) {
        Ok(ep) => ep,
        Err(e) => return fail(spec.space, e),
    };
    let (rho, lad, gen) = match solve_point(spec, &ep) {
        Ok(x) => x,
        Err(e) => return fail(spec.space, e),
    };
    let space = rho.space();
    let run = || -> Result<Vec<Vec<f64>>> {
        let mut columns = Vec::with_capacity(spec.outputs.len());
        for &o in &spec.outputs {
            if o.is_series() {
                let scaled: Vec<f64> = taus.unwrap_or(&[]).iter().map(|t| 2.0 * PI * t).collect();
                let (kind, sign) = match o {
                    Observable::G2AaTau => (CorrelationKind::Aa, 1.0),
                    Observable::G2BbTau => (CorrelationKind::Bb, 1.0),
                    Observable::G2AbTauPos => (CorrelationKind::Ab, 1.0),
                    _ => (CorrelationKind::Ab, -1.0),
                };
                let signed: Vec<f64> = scaled.iter().map(|t| sign * t).collect();
                columns.push(g2_tau(&gen, &rho, kind, &signed)?.values);
            } else {
                columns.push(vec![equal_time(&rho, &lad, o)?; n_rows]);
            }
        }
        Ok(columns)
    };
    match run() {
        Ok(columns) => (0..n_rows)
            .map(|k| SweepRow {
                point: point_at(k),
                values: columns.iter().map(|c| c[k]).collect(),
                space,
                error: None,
            })
            .collect(),
        Err(e) => fail(space, e),
    }
}

/// Evaluates every grid point on a pool of `parallelism` threads. Row order
/// and values do not depend on `parallelism`.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<SweepResult> {
    spec.validate()?;
    let outer = spec.outer_points();
    let taus = spec.taus();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Backend(e.to_string()))?;
    let chunks: Vec<Vec<SweepRow>> =
        pool.install(|| outer.par_iter().map(|p| evaluate(spec, p, taus.as_deref())).collect());
    let rows: Vec<SweepRow> = chunks.into_iter().flatten().collect();
    debug_assert_eq!(rows.len(), spec.grid_size());
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        provenance: Provenance::new(spec),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub location: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Interior strict local extrema of a sampled curve. Runs of equal values
/// count as one sample located at their first point; non-finite samples
/// break comparisons.
pub fn extrema_of(xs: &[f64], ys: &[f64]) -> Result<Vec<Extremum>> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!("{} locations for {} values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::Domain(format!("need at least 3 points, got {}", xs.len())));
    }
    // collapse plateaus: (first index, value)
    let mut runs: Vec<(usize, f64)> = Vec::new();
    for (k, &y) in ys.iter().enumerate() {
        match runs.last() {
            Some(&(_, last)) if last == y => {}
            _ => runs.push((k, y)),
        }
    }
    let mut out = Vec::new();
    for w in runs.windows(3) {
        let (prev, (k, y), next) = (w[0].1, w[1], w[2].1);
        if !(prev.is_finite() && y.is_finite() && next.is_finite()) {
            continue;
        }
        let kind = if y < prev && y < next {
            ExtremumKind::Min
        } else if y > prev && y > next {
            ExtremumKind::Max
        } else {
            continue;
        };
        out.push(Extremum {
            location: xs[k],
            value: y,
            kind,
        });
    }
    Ok(out)
}

/// Extrema of one output column of a single-axis sweep.
pub fn find_extrema(result: &SweepResult, field: Observable) -> Result<Vec<Extremum>> {
    if result.spec.axes.len() != 1 {
        return Err(Error::Domain(format!(
            "extrema need a single-axis sweep, got {} axes",
            result.spec.axes.len()
        )));
    }
    let col = result
        .column_index(field)
        .ok_or_else(|| Error::Domain(format!("sweep has no {} column", field.column())))?;
    let xs: Vec<f64> = result.rows.iter().map(|r| r.point[0]).collect();
    let ys: Vec<f64> = result.rows.iter().map(|r| r.values[col]).collect();
    extrema_of(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_points() {
        let a = Axis::range(Parameter::J, 0.1, 10.0, 3, Spacing::Log);
        let p = a.points();
        assert!((p[1] - 1.0).abs() < 1e-12);
        assert_eq!(p[2], 10.0);
        let l = Axis::range(Parameter::J, 0.0, 1.0, 5, Spacing::Linear).points();
        assert_eq!(l, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn config_names_match_columns() {
        for o in Observable::RECORD.into_iter().chain(Observable::SERIES) {
            assert_eq!(serde_json::to_value(o).unwrap(), o.column());
        }
    }

    #[test]
    fn zero_width_axis_rejected() {
        let mut spec = SweepSpec::builtin(Scenario::Fig2a).unwrap();
        spec.axes[0] = Axis::range(Parameter::J, 0.4, 0.4, 10, Spacing::Linear);
        assert!(matches!(spec.validate(), Err(Error::InvalidSweep(_))));
        spec.axes[0] = Axis::range(Parameter::J, 0.1, 0.4, 1, Spacing::Linear);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn builtins_validate() {
        for sc in Scenario::BUILTIN {
            SweepSpec::builtin(sc).unwrap().validate().unwrap();
        }
        assert!(SweepSpec::builtin(Scenario::Custom).is_err());
    }

    #[test]
    fn tau_axis_must_be_last() {
        let mut spec = SweepSpec::builtin(Scenario::Fig2ef).unwrap();
        spec.axes.push(Axis::list(Parameter::NTh, vec![1e-4]));
        assert!(spec.validate().is_err());
    }

    #[test]
    fn delta_follows_ratio() {
        let spec = SweepSpec::builtin(Scenario::Fig5).unwrap();
        let ep = spec.params_at(&[3.9]).unwrap();
        assert_eq!(ep.delta, 7.8);
        assert_eq!(ep.delta_m, 3.9);
    }

    #[test]
    fn monotone_has_no_extrema() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        assert!(extrema_of(&xs, &xs).unwrap().is_empty());
    }

    #[test]
    fn parabola_vertex() {
        let xs: Vec<f64> = (-5..=5).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x - 1.0) * (x - 1.0)).collect();
        let e = extrema_of(&xs, &ys).unwrap();
        assert_eq!(
            e,
            vec![Extremum {
                location: 1.0,
                value: 0.0,
                kind: ExtremumKind::Min
            }]
        );
    }

    #[test]
    fn plateau_reports_smaller_location() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 1.0, 1.0, 2.0, 0.0];
        let e = extrema_of(&xs, &ys).unwrap();
        assert_eq!(e[0].location, 1.0);
        assert_eq!(e[0].kind, ExtremumKind::Min);
        assert_eq!(e[1].kind, ExtremumKind::Max);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(extrema_of(&[0.0, 1.0], &[1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn small_sweep_is_parallelism_independent() {
        let mut spec = SweepSpec::builtin(Scenario::Fig2a).unwrap();
        spec.axes[0] = Axis::range(Parameter::J, 0.2, 0.8, 4, Spacing::Linear);
        spec.space = TruncatedSpace::new(2, 6).unwrap();
        let a = run_sweep(&spec, 1).unwrap();
        let b = run_sweep(&spec, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 4);
        assert_eq!(a.failures(), 0);
    }
}
