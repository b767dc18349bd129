//! Bounded renewal functions: expected NC renewals in `(0, t]` that happen
//! before the critical component (CR) fails.
//!
//! - `A`: NC perfectly repaired, CR left alone
//! - `A_MR`: NC minimally repaired, CR left alone
//! - `B`: NC perfectly repaired, CR replaced at every NC failure
//! - `B_MR`: NC minimally repaired, CR replaced at every NC failure

use serde::{Deserialize, Serialize};

use crate::distributions::LifetimeModel;
use crate::error::{Error, Result};
use crate::numerics::{self, Curve, Grid};
use crate::renewal::{self, GRenewalMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessKind {
    A,
    #[serde(rename = "A_MR")]
    AMr,
    B,
    #[serde(rename = "B_MR")]
    BMr,
}

impl ProcessKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::A => "A",
            Self::AMr => "A_MR",
            Self::B => "B",
            Self::BMr => "B_MR",
        }
    }

    pub fn minimal_repair(&self) -> bool {
        matches!(self, Self::AMr | Self::BMr)
    }

    /// CR is swapped for a new unit at every NC failure.
    pub fn replaces_cr(&self) -> bool {
        matches!(self, Self::B | Self::BMr)
    }
}

impl std::str::FromStr for ProcessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Self::A),
            "A_MR" => Ok(Self::AMr),
            "B" => Ok(Self::B),
            "B_MR" => Ok(Self::BMr),
            other => Err(Error::InvalidSpec(format!("unknown process kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub nc: LifetimeModel,
    pub cr: LifetimeModel,
    /// Simulation only: redraw the CR residual life at each NC failure.
    pub reevaluate_cr: bool,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, nc: LifetimeModel, cr: LifetimeModel) -> Self {
        Self {
            kind,
            nc,
            cr,
            reevaluate_cr: false,
        }
    }

    pub fn with_kind(mut self, kind: ProcessKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.nc.validate()?;
        self.cr.validate()?;
        if self.nc.is_never_fails() {
            return Err(Error::InvalidSpec("NC must be able to fail".into()));
        }
        Ok(())
    }

    fn expect(&self, kind: ProcessKind) -> Result<()> {
        self.validate()?;
        if self.kind != kind {
            return Err(Error::InvalidSpec(format!(
                "operation needs process {}, got {}",
                kind.name(),
                self.kind.name()
            )));
        }
        Ok(())
    }
}

/// `n_steps = max(2000, 200 t_max / mean(NC))`.
pub fn default_grid(spec: &ProcessSpec, t_max: f64) -> Result<Grid> {
    spec.validate()?;
    let mean = spec.nc.mean();
    let by_mean = (200.0 * t_max / mean).ceil();
    let n = if by_mean.is_finite() { (by_mean as usize).max(2000) } else { 2000 };
    Grid::new(t_max, n)
}

const P_TOL: f64 = 1e-11;

/// Probability that a fresh CR outlives one NC lifetime.
pub fn p_b(spec: &ProcessSpec) -> Result<f64> {
    spec.validate()?;
    p_bmr_raw(spec, 0.0)
}

/// Probability that a fresh CR outlives the residual life of an NC of age `y`.
pub fn p_bmr(spec: &ProcessSpec, y: f64) -> Result<f64> {
    spec.validate()?;
    p_bmr_raw(spec, y)
}

fn p_bmr_raw(spec: &ProcessSpec, y: f64) -> Result<f64> {
    if spec.cr.is_never_fails() {
        return Ok(1.0);
    }
    let nc = spec.nc.at_age(y)?;
    let h = spec.nc.hazard(y);
    let mean = spec.nc.mean();
    let scale = if h.is_finite() && h > 0.0 { (1.0 / h).min(mean) } else { mean };
    let p = numerics::integrate_to_infinity(|t| spec.cr.survival(t) * nc.pdf(t), 0.0, scale, P_TOL)?;
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Exact,
    Approx,
}

/// `W(t) = R(t) F̄_CR(t) + ∫_0^t R(x) dF_CR(x)` for a stand-alone count `R`.
fn bound_by_single_cr(count: &[f64], cr: &LifetimeModel, grid: &Grid) -> Vec<f64> {
    let f_cr = grid.tabulate(|t| cr.cdf(t));
    let integral = numerics::cumulative_stieltjes(count, &f_cr);
    count
        .iter()
        .zip(&f_cr)
        .zip(&integral)
        .map(|((m, f), i)| m * (1.0 - f) + i)
        .collect()
}

/// Process A: exact uses the renewal function, approx its closed-form
/// approximation.
pub fn w_a(spec: &ProcessSpec, grid: &Grid, mode: Mode) -> Result<Curve> {
    spec.expect(ProcessKind::A)?;
    let (m, label) = match mode {
        Mode::Exact => (renewal::classical_renewal(&spec.nc, grid)?, "W_A"),
        Mode::Approx => (renewal::bartholomew_approx(&spec.nc, grid)?, "W_A approx"),
    };
    Ok(Curve::new(*grid, bound_by_single_cr(&m.curve.values, &spec.cr, grid), label))
}

/// Process A-MR: exact uses the cumulative hazard as `M_g`, approx the
/// closed-form g-renewal approximation.
pub fn w_amr(spec: &ProcessSpec, grid: &Grid, mode: Mode) -> Result<Curve> {
    spec.expect(ProcessKind::AMr)?;
    let (m, label) = match mode {
        Mode::Exact => (renewal::g_renewal(&spec.nc, grid, GRenewalMethod::CumHaz)?, "W_AMR"),
        Mode::Approx => (renewal::g_renewal_approx(&spec.nc, grid)?, "W_AMR approx"),
    };
    Ok(Curve::new(*grid, bound_by_single_cr(&m.curve.values, &spec.cr, grid), label))
}

/// `F_B(t) = ∫_0^t F̄_CR(x) dF_NC(x)` on the grid.
fn tabulate_f_b(spec: &ProcessSpec, grid: &Grid) -> Vec<f64> {
    let s_cr = grid.tabulate(|t| spec.cr.survival(t));
    let f_nc = grid.tabulate(|t| spec.nc.cdf(t));
    numerics::cumulative_stieltjes(&s_cr, &f_nc)
}

/// Process B: defective renewal equation `W = F_B + W * dF_B`.
pub fn w_b_exact(spec: &ProcessSpec, grid: &Grid) -> Result<Curve> {
    spec.expect(ProcessKind::B)?;
    let f_b = tabulate_f_b(spec, grid);
    let values = numerics::solve_volterra_convolution_stieltjes(&f_b, &f_b)?;
    Ok(Curve::new(*grid, values, "W_B"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BVariant {
    B0,
    B1,
    B2,
}

/// Tail mass below which the count distribution table is considered complete.
pub const COUNT_TAIL_TOL: f64 = 1e-8;
const COUNT_ROW_LIMIT: usize = 5000;

/// Closed-form approximations of the Process B count.
pub fn w_b_approx(spec: &ProcessSpec, grid: &Grid, variant: BVariant) -> Result<Curve> {
    spec.expect(ProcessKind::B)?;
    let p = p_b(spec)?;
    let values = match variant {
        BVariant::B0 => {
            let f_b = tabulate_f_b(spec, grid);
            let g_b: Vec<f64> = f_b.iter().map(|f| (p - f).max(0.0)).collect();
            let int_f = numerics::cumulative_trapezoid(&f_b, grid.step());
            let int_g = numerics::cumulative_trapezoid(&g_b, grid.step());
            f_b.iter()
                .zip(int_f.iter().zip(&int_g))
                .map(|(f, (a, b))| {
                    let r = if *b > 0.0 { a / b } else { 0.0 };
                    (f + r * f) / (1.0 + (1.0 - p) * r)
                })
                .collect()
        }
        BVariant::B1 => {
            let table = renewal::n_of_t_distribution_to_tail(&spec.nc, grid, COUNT_TAIL_TOL, COUNT_ROW_LIMIT)?;
            // p / (1 - p) (1 - E[p^N]) = p Σ_n p^(n-1) P(N >= n)
            table.discounted_tail_sum(p).into_iter().map(|s| p * s).collect()
        }
        BVariant::B2 => {
            let m = renewal::classical_renewal(&spec.nc, grid)?;
            m.curve.values.iter().map(|&m| geometric_partial(p, m)).collect()
        }
    };
    let label = match variant {
        BVariant::B0 => "W_B0 approx",
        BVariant::B1 => "W_B1 approx",
        BVariant::B2 => "W_B2 approx",
    };
    Ok(Curve::new(*grid, values, label))
}

/// `p / (1 - p) (1 - p^m)`, continuous at `p = 1` where it equals `m`.
fn geometric_partial(p: f64, m: f64) -> f64 {
    if p >= 1.0 {
        return m;
    }
    // 1 - p^m = -expm1(m ln p)
    p / (1.0 - p) * -(m * p.ln()).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScheduleSource {
    /// Mean-residual-life recursion `τ(i) = τ(i-1) + E[T - τ(i-1) | T > τ(i-1)]`.
    #[default]
    TauRecursion,
    /// `τ(i) = M_g⁻¹(i)`.
    MgInverse,
}

/// Approximate ages at successive minimal repairs and the probabilities of
/// CR surviving that many consecutive cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct BmrSchedule {
    /// `τ(0..=n)`, `τ(0) = 0`.
    pub tau: Vec<f64>,
    /// `p_BMR(τ(i))` for `i = 0..n`.
    pub p: Vec<f64>,
    /// `ρ(0..=n)`, `ρ(0) = 1`, `ρ(i) = ρ(i-1) p_BMR(τ(i-1))`.
    pub rho: Vec<f64>,
    pub source: ScheduleSource,
    /// Set when the schedule stopped early because the NC survival vanished.
    pub truncated: bool,
}

impl BmrSchedule {
    pub fn len(&self) -> usize {
        self.rho.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds `τ` and `ρ` up to `n_max` cycles.
pub fn bmr_schedule(spec: &ProcessSpec, n_max: usize, source: ScheduleSource) -> Result<BmrSchedule> {
    spec.expect(ProcessKind::BMr)?;
    if n_max == 0 {
        return Err(Error::InvalidParameter("schedule needs n_max >= 1".into()));
    }
    let mut tau = vec![0.0];
    let mut p = Vec::with_capacity(n_max);
    let mut rho = vec![1.0];
    let mut truncated = false;
    for i in 1..=n_max {
        let age = tau[i - 1];
        let p_here = match p_bmr_raw(spec, age) {
            Ok(v) => v,
            Err(Error::ImpossibleCondition { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let next = match source {
            ScheduleSource::TauRecursion => {
                let residual = spec.nc.at_age(age)?;
                let scale = residual.mean(1.0).unwrap_or(1.0);
                age + residual.mean(1e-10 * scale.max(1e-300))?
            }
            ScheduleSource::MgInverse => spec.nc.inverse_cumulative_hazard(i as f64, age),
        };
        if !next.is_finite() || next <= age {
            truncated = true;
            p.push(p_here);
            rho.push(rho[i - 1] * p_here);
            break;
        }
        p.push(p_here);
        rho.push(rho[i - 1] * p_here);
        tau.push(next);
    }
    // keep τ and ρ the same length
    tau.truncate(rho.len());
    while tau.len() < rho.len() {
        tau.push(f64::INFINITY);
    }
    Ok(BmrSchedule {
        tau,
        p,
        rho,
        source,
        truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BmrMode {
    #[default]
    Exact,
    /// Step curve `Σ_{k=1}^{⌈M_g(t)⌉} ρ(k)`.
    Approx1,
    /// Continuous interpolation of the step curve in `M_g(t)`.
    Approx2,
}

/// Which g-renewal curve feeds the B-MR approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MgSource {
    #[default]
    CumHaz,
    Approx,
}

/// Process B-MR.
pub fn w_bmr(
    spec: &ProcessSpec,
    grid: &Grid,
    mode: BmrMode,
    schedule_source: ScheduleSource,
    mg_source: MgSource,
) -> Result<Curve> {
    spec.expect(ProcessKind::BMr)?;
    match mode {
        BmrMode::Exact => w_bmr_exact(spec, grid),
        BmrMode::Approx1 | BmrMode::Approx2 => {
            let mg = match mg_source {
                MgSource::CumHaz => renewal::g_renewal(&spec.nc, grid, GRenewalMethod::CumHaz)?,
                MgSource::Approx => renewal::g_renewal_approx(&spec.nc, grid)?,
            };
            let needed = mg.curve.last().ceil() as usize + 1;
            let schedule = bmr_schedule(spec, needed.max(1), schedule_source)?;
            if schedule.len() < needed - 1 {
                return Err(Error::SurvivalUnderflow {
                    largest_valid_t: schedule.tau.iter().copied().filter(|t| t.is_finite()).fold(0.0, f64::max),
                });
            }
            let (values, label) = if mode == BmrMode::Approx1 {
                (mg.curve.values.iter().map(|&m| bmr_step_sum(&schedule, m)).collect(), "W_BMR1 approx")
            } else {
                let label = match schedule_source {
                    ScheduleSource::TauRecursion => "W_BMR2 approx",
                    ScheduleSource::MgInverse => "W_BMR2' approx",
                };
                (mg.curve.values.iter().map(|&m| bmr_interpolated(&schedule, m)).collect(), label)
            };
            Ok(Curve::new(*grid, values, label))
        }
    }
}

fn ceil_index(m: f64, schedule: &BmrSchedule) -> usize {
    (m.ceil().max(0.0) as usize).min(schedule.len())
}

/// `Σ_{k=1}^{⌈m⌉} ρ(k)`.
pub fn bmr_step_sum(schedule: &BmrSchedule, m: f64) -> f64 {
    let c = ceil_index(m, schedule);
    schedule.rho[1..=c].iter().sum()
}

/// `m ρ(c) + Σ_{k=1}^{c-1} k (ρ(k) - ρ(k+1))` with `c = ⌈m⌉`.
pub fn bmr_interpolated(schedule: &BmrSchedule, m: f64) -> f64 {
    let c = ceil_index(m, schedule);
    let rho = &schedule.rho;
    let tail: f64 = (1..c).map(|k| k as f64 * (rho[k] - rho[k + 1])).sum();
    m * rho[c] + tail
}

/// Same value written with the per-cycle survival probabilities:
/// `m ρ(c) + Σ_{k=1}^{c-1} k (1 - p_BMR(τ(k))) ρ(k)`.
pub fn bmr_interpolated_p_form(schedule: &BmrSchedule, m: f64) -> f64 {
    let c = ceil_index(m, schedule);
    let rho = &schedule.rho;
    let tail: f64 = (1..c).map(|k| k as f64 * (1.0 - schedule.p[k]) * rho[k]).sum();
    m * rho[c] + tail
}

/// Exact B-MR count from `W(t) = F_BMR(t | 0) + ∫_0^t F_BMR(t - y | y) dW(y)`
/// with `F_BMR(x | y) = ∫_0^x F̄_CR(u) dF_NC(u | y)`.
///
/// The kernel rows are accumulated in `k`: over one cell the NC factor
/// `exp(-(H(s) - H(y)))` is integrated exactly against `dH`, the CR survival
/// by the trapezoid rule.
fn w_bmr_exact(spec: &ProcessSpec, grid: &Grid) -> Result<Curve> {
    let n = grid.len();
    let cumhaz = renewal::tabulate_cumhaz(&spec.nc, grid)?;
    let s_cr = grid.tabulate(|t| spec.cr.survival(t));

    let mut forcing = vec![0.0; n];
    for k in 1..n {
        let cell = 0.5 * (s_cr[k - 1] + s_cr[k]) * ((-cumhaz[k - 1]).exp() - (-cumhaz[k]).exp());
        forcing[k] = forcing[k - 1] + cell;
    }

    let mut kernel = vec![0.0; n];
    // e_prev[j] = exp(-(H_{k-1} - H_j))
    let mut e_prev = vec![1.0; n];
    let values = numerics::solve_volterra_stieltjes(&forcing, |k, row| {
        for j in 0..k {
            let e_now = (cumhaz[j] - cumhaz[k]).exp();
            let cr = 0.5 * (s_cr[k - 1 - j] + s_cr[k - j]);
            kernel[j] += cr * (e_prev[j] - e_now);
            e_prev[j] = e_now;
            row[j] = kernel[j];
        }
        e_prev[k] = 1.0;
    })?;
    Ok(Curve::new(*grid, values, "W_BMR"))
}

/// Unbounded reference count of the NC alone: the renewal approximation for
/// perfect repair, the g-renewal approximation for minimal repair.
pub fn standalone_reference(spec: &ProcessSpec, grid: &Grid) -> Result<Curve> {
    spec.validate()?;
    let r = if spec.kind.minimal_repair() {
        renewal::g_renewal_approx(&spec.nc, grid)?
    } else {
        renewal::bartholomew_approx(&spec.nc, grid)?
    };
    Ok(Curve::new(*grid, r.curve.values, "standalone"))
}

/// The exact curve of whatever process `spec` describes.
pub fn exact_curve(spec: &ProcessSpec, grid: &Grid) -> Result<Curve> {
    match spec.kind {
        ProcessKind::A => w_a(spec, grid, Mode::Exact),
        ProcessKind::AMr => w_amr(spec, grid, Mode::Exact),
        ProcessKind::B => w_b_exact(spec, grid),
        ProcessKind::BMr => w_bmr(spec, grid, BmrMode::Exact, ScheduleSource::default(), MgSource::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(rate: f64) -> LifetimeModel {
        LifetimeModel::Exponential { rate }
    }

    fn erlang2() -> LifetimeModel {
        LifetimeModel::Gamma { shape: 2.0, scale: 1.0 }
    }

    #[test]
    fn p_b_closed_forms() {
        let s = ProcessSpec::new(ProcessKind::B, exp(0.3), exp(0.2));
        assert!((p_b(&s).unwrap() - 0.6).abs() < 1e-9);
        let s = ProcessSpec::new(ProcessKind::B, erlang2(), LifetimeModel::NeverFails);
        assert_eq!(p_b(&s).unwrap(), 1.0);
        let s = ProcessSpec::new(ProcessKind::B, erlang2(), erlang2());
        assert!((p_b(&s).unwrap() - 0.5).abs() < 1e-9);
        // Erlang-2 NC against an exponential CR: (1 + β)^-2
        let s = ProcessSpec::new(ProcessKind::B, erlang2(), exp(0.25));
        assert!((p_b(&s).unwrap() - 1.25_f64.powi(-2)).abs() < 1e-9);
    }

    #[test]
    fn p_bmr_zero_age_and_memoryless() {
        let s = ProcessSpec::new(ProcessKind::BMr, erlang2(), LifetimeModel::Gamma { shape: 2.0, scale: 0.1 });
        assert!((p_bmr(&s, 0.0).unwrap() - p_b(&s).unwrap()).abs() < 1e-12);
        let s = ProcessSpec::new(ProcessKind::BMr, exp(0.5), erlang2());
        let p0 = p_bmr(&s, 0.0).unwrap();
        for &y in &[1.0, 5.0, 30.0] {
            assert!((p_bmr(&s, y).unwrap() - p0).abs() < 1e-9);
        }
    }

    #[test]
    fn p_bmr_matches_brute_force_double_integral() {
        let nc = erlang2();
        let cr = LifetimeModel::Gamma { shape: 2.0, scale: 0.1 };
        let s = ProcessSpec::new(ProcessKind::BMr, nc, cr);
        let y = 2.0;
        // midpoint rule on a fine grid of P(CR > X), X ~ NC residual at age y
        let h = 1e-4;
        let sy = nc.survival(y);
        let brute: f64 = (0..400_000)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                cr.survival(t) * nc.pdf(t + y) / sy * h
            })
            .sum();
        assert!((p_bmr(&s, y).unwrap() - brute).abs() < 1e-3);
    }

    #[test]
    fn conditioning_error_surfaces() {
        let s = ProcessSpec::new(ProcessKind::BMr, LifetimeModel::Rayleigh { lambda: 1.0 }, exp(1.0));
        assert!(matches!(p_bmr(&s, 1e200), Err(Error::ImpossibleCondition { .. })));
    }

    #[test]
    fn w_a_exponential_pair_closed_form() {
        let (a, b) = (0.7, 0.2);
        let s = ProcessSpec::new(ProcessKind::A, exp(a), exp(b));
        let grid = Grid::new(20.0, 2000).unwrap();
        let w = w_a(&s, &grid, Mode::Exact).unwrap();
        for (t, v) in w.points() {
            let expected = a / b * (1.0 - (-b * t).exp());
            assert!((v - expected).abs() < 1e-3, "t={t}");
        }
    }

    #[test]
    fn never_failing_cr_gives_standalone_counts() {
        let grid = Grid::new(10.0, 1000).unwrap();
        let s = ProcessSpec::new(ProcessKind::A, erlang2(), LifetimeModel::NeverFails);
        let m = renewal::classical_renewal(&erlang2(), &grid).unwrap();
        assert!(w_a(&s, &grid, Mode::Exact).unwrap().sup_distance(&m.curve) < 1e-12);
        let s = s.with_kind(ProcessKind::AMr);
        let mg = renewal::g_renewal(&erlang2(), &grid, GRenewalMethod::CumHaz).unwrap();
        assert!(w_amr(&s, &grid, Mode::Exact).unwrap().sup_distance(&mg.curve) < 1e-12);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let grid = Grid::new(1.0, 10).unwrap();
        let s = ProcessSpec::new(ProcessKind::B, erlang2(), exp(1.0));
        assert!(matches!(w_a(&s, &grid, Mode::Exact), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn w_b_respects_its_asymptote() {
        let s = ProcessSpec::new(ProcessKind::B, erlang2(), exp(0.2));
        let p = p_b(&s).unwrap();
        let limit = p / (1.0 - p);
        let grid = Grid::new(60.0, 3000).unwrap();
        let w = w_b_exact(&s, &grid).unwrap();
        assert!(w.values.iter().all(|v| *v <= limit + 1e-4));
        assert!(((w.last() - limit) / limit).abs() < 0.01);
        assert_eq!(w.max_decrease(), 0.0);
    }

    #[test]
    fn b_approximations_start_at_zero_and_stay_bounded() {
        let s = ProcessSpec::new(ProcessKind::B, erlang2(), LifetimeModel::Rayleigh { lambda: 0.1 });
        let p = p_b(&s).unwrap();
        let grid = Grid::new(30.0, 600).unwrap();
        for v in [BVariant::B0, BVariant::B1, BVariant::B2] {
            let c = w_b_approx(&s, &grid, v).unwrap();
            assert_eq!(c.values[0], 0.0, "{v:?}");
            assert!(c.values.iter().all(|x| *x <= p / (1.0 - p) + 1e-9), "{v:?}");
        }
    }

    #[test]
    fn geometric_partial_limits() {
        assert_eq!(geometric_partial(1.0, 3.5), 3.5);
        assert!((geometric_partial(1.0 - 1e-9, 3.5) - 3.5).abs() < 1e-6);
        assert!((geometric_partial(0.5, 1e6) - 1.0).abs() < 1e-12);
        assert!((geometric_partial(0.5, 2.0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn schedule_for_erlang() {
        let s = ProcessSpec::new(ProcessKind::BMr, erlang2(), exp(0.1));
        let sch = bmr_schedule(&s, 10, ScheduleSource::TauRecursion).unwrap();
        assert_eq!(sch.tau[0], 0.0);
        assert!((sch.tau[1] - 2.0).abs() < 1e-6);
        assert!((sch.tau[2] - 10.0 / 3.0).abs() < 1e-6);
        assert!(sch.tau.windows(2).all(|w| w[1] > w[0]));
        assert!(sch.rho.windows(2).all(|w| w[1] <= w[0]));
        let mg = bmr_schedule(&s, 3, ScheduleSource::MgInverse).unwrap();
        assert!((mg.tau[1] - 2.1462).abs() < 1e-3);
    }

    #[test]
    fn schedule_for_exponential_nc() {
        let s = ProcessSpec::new(ProcessKind::BMr, exp(0.5), erlang2());
        let p = p_b(&s.with_kind(ProcessKind::B)).unwrap();
        let sch = bmr_schedule(&s, 6, ScheduleSource::TauRecursion).unwrap();
        for n in 0..=6 {
            assert!((sch.tau[n] - 2.0 * n as f64).abs() < 1e-6);
            assert!((sch.rho[n] - p.powi(n as i32)).abs() < 1e-9);
        }
    }

    #[test]
    fn interpolated_forms_agree() {
        let s = ProcessSpec::new(ProcessKind::BMr, LifetimeModel::Rayleigh { lambda: 0.1 }, erlang2());
        let sch = bmr_schedule(&s, 40, ScheduleSource::TauRecursion).unwrap();
        for i in 0..400 {
            let m = i as f64 * 0.0973;
            let a = bmr_interpolated(&sch, m);
            let b = bmr_interpolated_p_form(&sch, m);
            assert!((a - b).abs() < 1e-12, "m={m}");
        }
        // at integer m both collapse to the step sum
        for n in 1..30 {
            let m = n as f64;
            assert!((bmr_interpolated(&sch, m) - bmr_step_sum(&sch, m)).abs() < 1e-12);
        }
    }

    #[test]
    fn bmr_exact_with_never_failing_cr_is_cumhaz() {
        let nc = LifetimeModel::Rayleigh { lambda: 0.1 };
        let s = ProcessSpec::new(ProcessKind::BMr, nc, LifetimeModel::NeverFails);
        let grid = Grid::new(40.0, 1000).unwrap();
        let w = w_bmr(&s, &grid, BmrMode::Exact, ScheduleSource::default(), MgSource::default()).unwrap();
        for (t, v) in w.points() {
            assert!((v - (0.1 * t) * (0.1 * t)).abs() < 1e-3, "t={t} v={v}");
        }
    }

    #[test]
    fn bmr_approximations_are_monotone_from_zero() {
        let s = ProcessSpec::new(ProcessKind::BMr, erlang2(), LifetimeModel::Gamma { shape: 2.0, scale: 5.0 });
        let grid = Grid::new(20.0, 500).unwrap();
        for mode in [BmrMode::Approx1, BmrMode::Approx2] {
            let c = w_bmr(&s, &grid, mode, ScheduleSource::TauRecursion, MgSource::CumHaz).unwrap();
            assert_eq!(c.values[0], 0.0);
            assert!(c.max_decrease() <= 1e-12, "{mode:?}");
        }
    }

    #[test]
    fn default_grid_density() {
        let s = ProcessSpec::new(ProcessKind::A, erlang2(), exp(1.0));
        assert_eq!(default_grid(&s, 10.0).unwrap().n_steps(), 2000);
        assert_eq!(default_grid(&s, 100.0).unwrap().n_steps(), 10_000);
    }

    #[test]
    fn kind_names_parse() {
        for k in [ProcessKind::A, ProcessKind::AMr, ProcessKind::B, ProcessKind::BMr] {
            assert_eq!(k.name().parse::<ProcessKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
    }
}
