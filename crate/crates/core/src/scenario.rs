//! Scenario files, built-in case studies, and CSV / comparison output.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounded::{self, BVariant, BmrMode, MgSource, Mode, ProcessKind, ProcessSpec, ScheduleSource};
use crate::distributions::LifetimeModel;
use crate::error::Error;
use crate::montecarlo;
use crate::numerics::{self, Curve, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_max: f64,
    /// Omitted: `max(2000, 200 t_max / mean(NC))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Estimator {
    Exact,
    Approx,
    ApproxB0,
    ApproxB1,
    ApproxB2,
    ApproxBmr1,
    ApproxBmr2,
    /// B-MR interpolated approximation on the `M_g⁻¹` schedule.
    ApproxBmr2Mg,
    Standalone,
    Simulate { runs: usize, seed: u64 },
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Approx => "approx",
            Self::ApproxB0 => "approx-b0",
            Self::ApproxB1 => "approx-b1",
            Self::ApproxB2 => "approx-b2",
            Self::ApproxBmr1 => "approx-bmr1",
            Self::ApproxBmr2 => "approx-bmr2",
            Self::ApproxBmr2Mg => "approx-bmr2-mg",
            Self::Standalone => "standalone",
            Self::Simulate { .. } => "simulate",
        }
    }

    /// Looks up an analytic estimator by its CSV name.
    pub fn analytic_from_name(name: &str) -> Option<Self> {
        [
            Self::Exact,
            Self::Approx,
            Self::ApproxB0,
            Self::ApproxB1,
            Self::ApproxB2,
            Self::ApproxBmr1,
            Self::ApproxBmr2,
            Self::ApproxBmr2Mg,
            Self::Standalone,
        ]
        .into_iter()
        .find(|e| e.name() == name)
    }

    fn allowed_for(&self, kind: ProcessKind) -> bool {
        match self {
            Self::ApproxB0 | Self::ApproxB1 | Self::ApproxB2 => kind == ProcessKind::B,
            Self::ApproxBmr1 | Self::ApproxBmr2 | Self::ApproxBmr2Mg => kind == ProcessKind::BMr,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub process: ProcessKind,
    pub nc: LifetimeModel,
    pub cr: LifetimeModel,
    pub grid: GridSpec,
    pub estimators: Vec<Estimator>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reevaluate_cr: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Input(String),
    #[error("estimator {estimator} failed: {source}")]
    Numeric { estimator: String, source: Error },
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::Numeric { .. } => 3,
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Input(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn spec(&self) -> ProcessSpec {
        ProcessSpec {
            kind: self.process,
            nc: self.nc,
            cr: self.cr,
            reevaluate_cr: self.reevaluate_cr,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let input = |field: &str, e: Error| ScenarioError::Input(format!("{field}: {e}"));
        self.nc.validate().map_err(|e| input("nc", e))?;
        self.cr.validate().map_err(|e| input("cr", e))?;
        if self.nc.is_never_fails() {
            return Err(ScenarioError::Input("nc: the non-critical component must be able to fail".into()));
        }
        self.grid_resolved()?;
        if self.estimators.is_empty() {
            return Err(ScenarioError::Input("estimators: at least one estimator is required".into()));
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if !e.allowed_for(self.process) {
                return Err(ScenarioError::Input(format!(
                    "estimators[{i}]: {} is not available for process {}",
                    e.name(),
                    self.process.name()
                )));
            }
            if let Estimator::Simulate { runs: 0, .. } = e {
                return Err(ScenarioError::Input(format!("estimators[{i}]: simulate.runs must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn grid_resolved(&self) -> Result<Grid, ScenarioError> {
        let input = |e: Error| ScenarioError::Input(format!("grid: {e}"));
        match self.grid.n_steps {
            Some(n) => Grid::new(self.grid.t_max, n).map_err(input),
            None => {
                Grid::new(self.grid.t_max, 2).map_err(input)?;
                bounded::default_grid(&self.spec(), self.grid.t_max).map_err(input)
            }
        }
    }
}

pub const PRESET_NAMES: [&str; 4] = ["blade-motor-A", "blade-motor-AMR", "blade-hss-B", "blade-hss-BMR"];

const PRESET_RUNS: usize = montecarlo::DEFAULT_RUNS;
const PRESET_SEED: u64 = 2024;

fn blade(level: f64) -> LifetimeModel {
    LifetimeModel::GammaProcessPassage {
        kappa: 0.542,
        theta: 1.147,
        level,
    }
}

const MOTOR: LifetimeModel = LifetimeModel::Weibull { scale: 3.5, shape: 0.209 };
const HSS_BEARING: LifetimeModel = LifetimeModel::GammaProcessPassage {
    kappa: 0.724,
    theta: 1.52,
    level: 30.0,
};

/// Wind-turbine case studies: a blade (NC) paired with the motor or with the
/// gearbox high-speed-shaft bearing (CR).
pub fn preset(name: &str) -> Result<Scenario, ScenarioError> {
    let sim = Estimator::Simulate {
        runs: PRESET_RUNS,
        seed: PRESET_SEED,
    };
    let grid = |t_max| GridSpec {
        t_max,
        n_steps: Some(2000),
    };
    let (process, nc, cr, t_max, estimators) = match name {
        "blade-motor-A" => (
            ProcessKind::A,
            blade(20.0),
            MOTOR,
            100.0,
            vec![Estimator::Exact, Estimator::Approx, Estimator::Standalone, sim],
        ),
        "blade-motor-AMR" => (
            ProcessKind::AMr,
            blade(5.0),
            MOTOR,
            100.0,
            vec![Estimator::Exact, Estimator::Approx, Estimator::Standalone, sim],
        ),
        "blade-hss-B" => (
            ProcessKind::B,
            blade(20.0),
            HSS_BEARING,
            200.0,
            vec![
                Estimator::Exact,
                Estimator::ApproxB0,
                Estimator::ApproxB1,
                Estimator::ApproxB2,
                Estimator::Standalone,
                sim,
            ],
        ),
        "blade-hss-BMR" => (
            ProcessKind::BMr,
            blade(5.0),
            HSS_BEARING,
            60.0,
            vec![
                Estimator::Exact,
                Estimator::ApproxBmr1,
                Estimator::ApproxBmr2,
                Estimator::ApproxBmr2Mg,
                Estimator::Standalone,
                sim,
            ],
        ),
        other => {
            return Err(ScenarioError::Input(format!(
                "unknown preset {other:?}; valid presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(Scenario {
        name: name.to_string(),
        process,
        nc,
        cr,
        grid: grid(t_max),
        estimators,
        reevaluate_cr: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOutput {
    pub estimator: Estimator,
    pub curve: Curve,
    /// `(low, high)` per grid point for simulation estimates.
    pub ci: Option<(Vec<f64>, Vec<f64>)>,
}

/// Evaluates one estimator on `grid`.
pub fn evaluate(spec: &ProcessSpec, grid: &Grid, estimator: Estimator) -> crate::error::Result<EstimatorOutput> {
    if !estimator.allowed_for(spec.kind) {
        return Err(crate::Error::InvalidSpec(format!(
            "estimator {} does not apply to process {}",
            estimator.name(),
            spec.kind.name()
        )));
    }
    let analytic = |curve: Curve| EstimatorOutput {
        estimator,
        curve,
        ci: None,
    };
    let bmr = |mode, source| bounded::w_bmr(spec, grid, mode, source, MgSource::CumHaz);
    Ok(match estimator {
        Estimator::Exact => analytic(bounded::exact_curve(spec, grid)?),
        Estimator::Approx => analytic(match spec.kind {
            ProcessKind::A => bounded::w_a(spec, grid, Mode::Approx)?,
            ProcessKind::AMr => bounded::w_amr(spec, grid, Mode::Approx)?,
            ProcessKind::B => bounded::w_b_approx(spec, grid, BVariant::B2)?,
            ProcessKind::BMr => bmr(BmrMode::Approx2, ScheduleSource::TauRecursion)?,
        }),
        Estimator::ApproxB0 => analytic(bounded::w_b_approx(spec, grid, BVariant::B0)?),
        Estimator::ApproxB1 => analytic(bounded::w_b_approx(spec, grid, BVariant::B1)?),
        Estimator::ApproxB2 => analytic(bounded::w_b_approx(spec, grid, BVariant::B2)?),
        Estimator::ApproxBmr1 => analytic(bmr(BmrMode::Approx1, ScheduleSource::TauRecursion)?),
        Estimator::ApproxBmr2 => analytic(bmr(BmrMode::Approx2, ScheduleSource::TauRecursion)?),
        Estimator::ApproxBmr2Mg => analytic(bmr(BmrMode::Approx2, ScheduleSource::MgInverse)?),
        Estimator::Standalone => analytic(bounded::standalone_reference(spec, grid)?),
        Estimator::Simulate { runs, seed } => {
            let est = montecarlo::simulate(spec, grid, runs, seed)?;
            let n = grid.len();
            let low = (0..n).map(|k| est.ci_low(k)).collect();
            let high = (0..n).map(|k| est.ci_high(k)).collect();
            EstimatorOutput {
                estimator,
                curve: est.curve,
                ci: Some((low, high)),
            }
        }
    })
}

/// Evaluates every estimator, in declaration order.
pub fn run(scenario: &Scenario) -> Result<Vec<EstimatorOutput>, ScenarioError> {
    scenario.validate()?;
    let spec = scenario.spec();
    let grid = scenario.grid_resolved()?;
    scenario
        .estimators
        .par_iter()
        .map(|&e| {
            evaluate(&spec, &grid, e).map_err(|source| ScenarioError::Numeric {
                estimator: e.name().to_string(),
                source,
            })
        })
        .collect()
}

/// C-style `%.9g`.
pub fn format_g9(x: f64) -> String {
    const P: i32 = 9;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -4 || exp >= P {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `t,estimator,value,ci_low,ci_high` rows, estimator by estimator.
pub fn to_csv(outputs: &[EstimatorOutput]) -> String {
    let mut out = String::from("t,estimator,value,ci_low,ci_high\n");
    for o in outputs {
        let name = o.estimator.name();
        for (k, (t, v)) in o.curve.points().enumerate() {
            let (lo, hi) = match &o.ci {
                Some((lo, hi)) => (format_g9(lo[k]), format_g9(hi[k])),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(out, "{},{name},{},{lo},{hi}", format_g9(t), format_g9(v));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSummary {
    pub first: usize,
    pub second: usize,
    pub sup_norm: f64,
    pub mean_abs: f64,
    /// `min_t (first - second)`.
    pub min_signed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSummary {
    pub analytic: usize,
    pub simulation: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub names: Vec<String>,
    pub pairs: Vec<PairSummary>,
    pub coverage: Vec<CoverageSummary>,
}

pub fn compare(outputs: &[EstimatorOutput]) -> Result<Comparison, ScenarioError> {
    if outputs.len() < 2 {
        return Err(ScenarioError::Input("estimators: compare needs at least two estimators".into()));
    }
    let names = outputs.iter().map(|o| o.estimator.name().to_string()).collect();
    let mut pairs = Vec::new();
    let mut coverage = Vec::new();
    for i in 0..outputs.len() {
        for j in i + 1..outputs.len() {
            let (a, b) = (&outputs[i].curve.values, &outputs[j].curve.values);
            let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            pairs.push(PairSummary {
                first: i,
                second: j,
                sup_norm: numerics::sup_distance(a, b),
                mean_abs: diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64,
                min_signed: diffs.iter().copied().fold(f64::INFINITY, f64::min),
            });
        }
    }
    for (s, sim) in outputs.iter().enumerate() {
        let Some((lo, hi)) = &sim.ci else { continue };
        for (a, an) in outputs.iter().enumerate() {
            if an.ci.is_some() {
                continue;
            }
            let inside = an
                .curve
                .values
                .iter()
                .enumerate()
                .filter(|&(k, v)| *v >= lo[k] - 1e-12 && *v <= hi[k] + 1e-12)
                .count();
            coverage.push(CoverageSummary {
                analytic: a,
                simulation: s,
                fraction: inside as f64 / an.curve.values.len() as f64,
            });
        }
    }
    Ok(Comparison { names, pairs, coverage })
}

impl Comparison {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:<16} {:>14} {:>14} {:>14}", "first", "second", "sup_norm", "mean_abs", "min(first-second)");
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "{:<16} {:<16} {:>14} {:>14} {:>14}",
                self.names[p.first],
                self.names[p.second],
                format_g9(p.sup_norm),
                format_g9(p.mean_abs),
                format_g9(p.min_signed)
            );
        }
        if !self.coverage.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "{:<16} {:<16} {:>14}", "analytic", "simulation", "ci_coverage");
            for c in &self.coverage {
                let _ = writeln!(
                    out,
                    "{:<16} {:<16} {:>14}",
                    self.names[c.analytic],
                    self.names[c.simulation],
                    format!("{:.4}", c.fraction)
                );
            }
        }
        out
    }
}
