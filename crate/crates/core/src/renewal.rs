//! Renewal and g-renewal functions of a stand-alone component.
//!
//! `M` counts perfect-repair renewals, `M_g` minimal-repair ("as bad as old")
//! renewals. Every curve starts at 0 and is nondecreasing on its grid.

use crate::distributions::LifetimeModel;
use crate::error::{Error, Result};
use crate::numerics::{self, Curve, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenewalMethod {
    ExactVolterra,
    Bartholomew,
    GExact,
    GApprox,
    CumHazOracle,
}

impl RenewalMethod {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ExactVolterra => "exact-volterra",
            Self::Bartholomew => "bartholomew",
            Self::GExact => "g-exact",
            Self::GApprox => "g-approx",
            Self::CumHazOracle => "cumhaz-oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenewalResult {
    pub curve: Curve,
    pub method: RenewalMethod,
}

impl RenewalResult {
    fn new(grid: &Grid, values: Vec<f64>, method: RenewalMethod) -> Self {
        Self {
            curve: Curve::new(*grid, values, method.label()),
            method,
        }
    }
}

/// How `M_g` is obtained by [`g_renewal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GRenewalMethod {
    /// Solve the age-dependent renewal equation numerically.
    Exact,
    /// Minimal repair makes the failures a nonhomogeneous Poisson process,
    /// so the mean count is the cumulative hazard.
    #[default]
    CumHaz,
}

pub(crate) fn require_failing(nc: &LifetimeModel) -> Result<()> {
    nc.validate()?;
    if nc.is_never_fails() {
        return Err(Error::InvalidSpec("the renewed component must be able to fail".into()));
    }
    Ok(())
}

/// Cumulative hazard on the grid, or the largest time where it is finite.
pub(crate) fn tabulate_cumhaz(nc: &LifetimeModel, grid: &Grid) -> Result<Vec<f64>> {
    let h = grid.tabulate(|t| nc.cumulative_hazard(t));
    if let Some(bad) = h.iter().position(|v| !v.is_finite()) {
        return Err(Error::SurvivalUnderflow {
            largest_valid_t: grid.t(bad.saturating_sub(1)),
        });
    }
    Ok(h)
}

/// Classical renewal function `M(t) = F(t) + ∫_0^t M(t - x) dF(x)`.
pub fn classical_renewal(nc: &LifetimeModel, grid: &Grid) -> Result<RenewalResult> {
    require_failing(nc)?;
    let f = grid.tabulate(|t| nc.cdf(t));
    let m = numerics::solve_volterra_convolution_stieltjes(&f, &f)?;
    Ok(RenewalResult::new(grid, m, RenewalMethod::ExactVolterra))
}

/// Closed-form approximation
/// `M̂(t) = F(t) + ∫_0^t F(x)² / ∫_0^x F̄(u) du dx`.
pub fn bartholomew_approx(nc: &LifetimeModel, grid: &Grid) -> Result<RenewalResult> {
    require_failing(nc)?;
    let tol = 1e-12;
    // A(t_k) = ∫_0^{t_k} F̄
    let mut area = Vec::with_capacity(grid.len());
    area.push(0.0);
    for k in 1..grid.len() {
        let piece = numerics::integrate(|u| nc.survival(u), grid.t(k - 1), grid.t(k), tol)?;
        area.push(area[k - 1] + piece);
    }
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut acc = 0.0;
    for k in 1..grid.len() {
        let (a, b) = (grid.t(k - 1), grid.t(k));
        let base = area[k - 1];
        // Gauss-Kronrod never touches the endpoints, so the 0/0 at x = 0
        // is never evaluated
        let integrand = |x: f64| {
            let denom = base + numerics::integrate(|u| nc.survival(u), a, x, tol).unwrap_or(0.0);
            if denom <= 0.0 {
                0.0
            } else {
                let f = nc.cdf(x);
                f * f / denom
            }
        };
        acc += numerics::integrate(integrand, a, b, 1e-10 * (1.0 + acc))?;
        values.push(nc.cdf(b) + acc);
    }
    Ok(RenewalResult::new(grid, values, RenewalMethod::Bartholomew))
}

/// g-renewal function `M_g`.
pub fn g_renewal(nc: &LifetimeModel, grid: &Grid, method: GRenewalMethod) -> Result<RenewalResult> {
    require_failing(nc)?;
    let cumhaz = tabulate_cumhaz(nc, grid)?;
    match method {
        GRenewalMethod::CumHaz => Ok(RenewalResult::new(grid, cumhaz, RenewalMethod::CumHazOracle)),
        GRenewalMethod::Exact => {
            // M_g(t) = F(t) + ∫_0^t F(t - y | y) dM_g(y),
            // F(t - y | y) = 1 - exp(-(H(t) - H(y)))
            let forcing = grid.tabulate(|t| nc.cdf(t));
            let values = numerics::solve_volterra_stieltjes(&forcing, |k, row| {
                for (j, g) in row.iter_mut().enumerate() {
                    *g = -(-(cumhaz[k] - cumhaz[j])).exp_m1();
                }
            })?;
            Ok(RenewalResult::new(grid, values, RenewalMethod::GExact))
        }
    }
}

/// Closed-form g-renewal approximation
/// `M̂_g(t) = F(t) + ∫_0^t F(u) ρ(u) du` with
/// `ρ(u) = ∫_0^u f(u - y | y) dy / ∫_0^u F̄(u - y | y) dy`.
///
/// Both inner integrals carry the common factor `∫_0^u dy / F̄(y)`, so
/// `ρ(u)` is the hazard `h(u)` and the outer integral is taken against the
/// cumulative hazard: `∫ F h du = ∫ F dH`.
pub fn g_renewal_approx(nc: &LifetimeModel, grid: &Grid) -> Result<RenewalResult> {
    require_failing(nc)?;
    let cumhaz = tabulate_cumhaz(nc, grid)?;
    let f = grid.tabulate(|t| nc.cdf(t));
    let integral = numerics::cumulative_stieltjes(&f, &cumhaz);
    let values = f.iter().zip(&integral).map(|(a, b)| a + b).collect();
    Ok(RenewalResult::new(grid, values, RenewalMethod::GApprox))
}

/// `P(N(t) >= n) = L⁽ⁿ⁾(t)` for `n = 1..=rows.len()`, where `L⁽ⁿ⁾` is the
/// `n`-fold convolution of the lifetime cdf.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    pub grid: Grid,
    pub rows: Vec<Vec<f64>>,
}

impl CountDistribution {
    pub fn n_max(&self) -> usize {
        self.rows.len()
    }

    /// `P(N(t_max) >= n_max)`, the mass the table may be missing.
    pub fn tail(&self) -> f64 {
        self.rows.last().map_or(1.0, |r| *r.last().unwrap())
    }

    pub fn is_truncated(&self, tol: f64) -> bool {
        self.tail() >= tol
    }

    /// `P(N(t_k) >= n)`, zero beyond the table.
    pub fn at_least(&self, n: usize, k: usize) -> f64 {
        match n {
            0 => 1.0,
            n if n <= self.rows.len() => self.rows[n - 1][k],
            _ => 0.0,
        }
    }

    /// `Σ_n P(N(t) >= n)`, the renewal function.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for row in &self.rows {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    /// `E[p^N(t)] = 1 - (1 - p) Σ_{n>=1} p^(n-1) P(N(t) >= n)`.
    pub fn pgf(&self, p: f64) -> Vec<f64> {
        let series = self.discounted_tail_sum(p);
        series.iter().map(|s| 1.0 - (1.0 - p) * s).collect()
    }

    /// `Σ_{n>=1} p^(n-1) P(N(t) >= n)`.
    pub fn discounted_tail_sum(&self, p: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        let mut w = 1.0;
        for row in &self.rows {
            for (o, v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
            w *= p;
        }
        out
    }
}

fn next_convolution_power(prev: &[f64], cdf: &[f64]) -> Vec<f64> {
    let n = prev.len();
    let df: Vec<f64> = (0..n).map(|j| if j == 0 { 0.0 } else { cdf[j] - cdf[j - 1] }).collect();
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += (prev[k - j] + prev[k - j + 1]) * df[j];
        }
        *o = 0.5 * acc;
    }
    out
}

/// Table of `P(N(t) >= n)` for `n = 1..=n_max`; check
/// [`CountDistribution::is_truncated`] before relying on sums over `n`.
pub fn n_of_t_distribution(nc: &LifetimeModel, grid: &Grid, n_max: usize) -> Result<CountDistribution> {
    require_failing(nc)?;
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let cdf = grid.tabulate(|t| nc.cdf(t));
    let mut rows = vec![cdf.clone()];
    while rows.len() < n_max {
        let next = next_convolution_power(rows.last().unwrap(), &cdf);
        rows.push(next);
    }
    Ok(CountDistribution { grid: *grid, rows })
}

/// Grows the table until `P(N(t_max) >= n) < tail_tol`, up to `n_limit` rows.
pub fn n_of_t_distribution_to_tail(
    nc: &LifetimeModel,
    grid: &Grid,
    tail_tol: f64,
    n_limit: usize,
) -> Result<CountDistribution> {
    require_failing(nc)?;
    let cdf = grid.tabulate(|t| nc.cdf(t));
    let mut rows = vec![cdf.clone()];
    while *rows.last().unwrap().last().unwrap() >= tail_tol {
        if rows.len() >= n_limit {
            return Err(Error::Accuracy {
                estimate: *rows.last().unwrap().last().unwrap(),
                error: f64::NAN,
                tolerance: tail_tol,
            });
        }
        let next = next_convolution_power(rows.last().unwrap(), &cdf);
        rows.push(next);
    }
    Ok(CountDistribution { grid: *grid, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn erlang2() -> LifetimeModel {
        LifetimeModel::Gamma { shape: 2.0, scale: 1.0 }
    }

    fn rayleigh() -> LifetimeModel {
        LifetimeModel::Rayleigh { lambda: 0.1 }
    }

    #[test]
    fn classical_poisson() {
        let nc = LifetimeModel::Exponential { rate: 0.5 };
        let grid = Grid::new(10.0, 2000).unwrap();
        let m = classical_renewal(&nc, &grid).unwrap();
        assert_eq!(m.curve.values[0], 0.0);
        for (t, v) in m.curve.points() {
            assert!((v - 0.5 * t).abs() < 1e-4, "t={t} v={v}");
        }
    }

    #[test]
    fn classical_erlang_closed_form() {
        let grid = Grid::new(5.0, 2000).unwrap();
        let m = classical_renewal(&erlang2(), &grid).unwrap();
        let expected = 2.5 - 0.25 + (-10.0_f64).exp() / 4.0;
        assert!((m.curve.last() - expected).abs() < 1e-4, "{}", m.curve.last());
        assert!((expected - 2.25002).abs() < 1e-5);
        assert_eq!(m.curve.max_decrease(), 0.0);
    }

    #[test]
    fn classical_handles_singular_density() {
        // Weibull with shape < 1 has an infinite density at 0
        let nc = LifetimeModel::Weibull { scale: 1.0, shape: 0.5 };
        let grid = Grid::new(4.0, 2000).unwrap();
        let m = classical_renewal(&nc, &grid).unwrap();
        assert!(m.curve.values.iter().all(|v| v.is_finite()));
        assert!(m.curve.max_decrease() <= 1e-12);
    }

    #[test]
    fn elementary_renewal_rate() {
        let nc = erlang2();
        let grid = Grid::new(100.0, 4000).unwrap();
        let m = classical_renewal(&nc, &grid).unwrap();
        let rate = m.curve.last() / 100.0;
        assert!((rate * nc.mean() - 1.0).abs() < 0.02);
    }

    #[test]
    fn bartholomew_exponential_is_linear() {
        let nc = LifetimeModel::Exponential { rate: 0.3 };
        let grid = Grid::new(10.0, 200).unwrap();
        let m = bartholomew_approx(&nc, &grid).unwrap();
        for (t, v) in m.curve.points() {
            assert!((v - 0.3 * t).abs() < 1e-9, "t={t} v={v}");
        }
    }

    #[test]
    fn bartholomew_close_to_exact_for_erlang() {
        let grid = Grid::new(5.0, 500).unwrap();
        let approx = bartholomew_approx(&erlang2(), &grid).unwrap();
        let exact = classical_renewal(&erlang2(), &grid).unwrap();
        assert_eq!(approx.curve.values[0], 0.0);
        assert!(((approx.curve.last() - exact.curve.last()) / exact.curve.last()).abs() < 0.05);
        assert!(approx.curve.max_decrease() <= 0.0);
    }

    #[test]
    fn g_renewal_cumhaz_and_exact_agree() {
        for nc in [erlang2(), rayleigh(), LifetimeModel::Weibull { scale: 2.0, shape: 0.7 }] {
            let grid = Grid::new(20.0, 2000).unwrap();
            let a = g_renewal(&nc, &grid, GRenewalMethod::CumHaz).unwrap();
            let b = g_renewal(&nc, &grid, GRenewalMethod::Exact).unwrap();
            assert!(a.curve.sup_distance(&b.curve) <= 5.0 * grid.step(), "{nc:?}");
        }
    }

    #[test]
    fn g_renewal_hits_unit_count_at_inverse() {
        let grid = Grid::new(2.1462, 400).unwrap();
        let m = g_renewal(&erlang2(), &grid, GRenewalMethod::CumHaz).unwrap();
        assert!((m.curve.last() - 1.0).abs() < 1e-3);
        let grid = Grid::new(100.0, 2000).unwrap();
        let m = g_renewal(&rayleigh(), &grid, GRenewalMethod::Exact).unwrap();
        assert!((m.curve.last() - 100.0).abs() < 5.0 * grid.step(), "{}", m.curve.last());
    }

    #[test]
    fn memoryless_collapse() {
        let nc = LifetimeModel::Exponential { rate: 0.8 };
        let grid = Grid::new(6.0, 1200).unwrap();
        let curves = [
            classical_renewal(&nc, &grid).unwrap().curve,
            bartholomew_approx(&nc, &grid).unwrap().curve,
            g_renewal(&nc, &grid, GRenewalMethod::Exact).unwrap().curve,
            g_renewal(&nc, &grid, GRenewalMethod::CumHaz).unwrap().curve,
            g_renewal_approx(&nc, &grid).unwrap().curve,
        ];
        for c in &curves {
            for (t, v) in c.points() {
                assert!((v - 0.8 * t).abs() < 1e-3, "{} t={t}", c.label);
            }
        }
    }

    #[test]
    fn g_approx_tracks_cumhaz_for_rayleigh() {
        let grid = Grid::new(50.0, 1000).unwrap();
        let approx = g_renewal_approx(&rayleigh(), &grid).unwrap();
        for (t, v) in approx.curve.points().skip(1) {
            let h = (0.1 * t) * (0.1 * t);
            assert!((v - h).abs() <= 0.1 * h, "t={t} v={v} h={h}");
        }
        assert_eq!(approx.curve.values[0], 0.0);
    }

    #[test]
    fn g_approx_inner_ratio_is_the_hazard() {
        // brute-force the two inner integrals of the approximation
        let nc = erlang2();
        for &u in &[0.5, 2.0, 6.0] {
            let num = numerics::integrate(|y| nc.at_age(y).unwrap().pdf(u - y), 0.0, u, 1e-12).unwrap();
            let den = numerics::integrate(|y| nc.at_age(y).unwrap().survival(u - y), 0.0, u, 1e-12).unwrap();
            assert!((num / den - nc.hazard(u)).abs() < 1e-9);
        }
    }

    #[test]
    fn count_distribution_rows() {
        let nc = LifetimeModel::Exponential { rate: 1.0 };
        let grid = Grid::new(3.0, 1500).unwrap();
        let table = n_of_t_distribution(&nc, &grid, 4).unwrap();
        assert_eq!(table.rows[0], grid.tabulate(|t| nc.cdf(t)));
        let expected = 1.0 - (-3.0_f64).exp() * 4.0;
        assert!((table.at_least(2, grid.n_steps()) - expected).abs() < 1e-4);
        assert!((expected - 0.80085).abs() < 1e-5);
        for k in 0..grid.len() {
            for n in 1..4 {
                assert!(table.at_least(n + 1, k) <= table.at_least(n, k) + 1e-15);
            }
        }
    }

    #[test]
    fn count_distribution_sums_to_renewal_function() {
        let nc = erlang2();
        let grid = Grid::new(8.0, 800).unwrap();
        let table = n_of_t_distribution_to_tail(&nc, &grid, 1e-6, 200).unwrap();
        assert!(!table.is_truncated(1e-6));
        let m = classical_renewal(&nc, &grid).unwrap();
        assert!(numerics::sup_distance(&table.mean(), &m.curve.values) < 1e-3);
    }

    #[test]
    fn truncated_table_is_flagged() {
        let grid = Grid::new(20.0, 200).unwrap();
        let table = n_of_t_distribution(&erlang2(), &grid, 2).unwrap();
        assert!(table.is_truncated(1e-8));
        assert!(n_of_t_distribution_to_tail(&erlang2(), &grid, 1e-8, 3).is_err());
    }

    #[test]
    fn never_fails_is_rejected() {
        let grid = Grid::new(1.0, 10).unwrap();
        assert!(classical_renewal(&LifetimeModel::NeverFails, &grid).is_err());
    }
}
