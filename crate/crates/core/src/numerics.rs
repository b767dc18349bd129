//! Quadrature, Volterra solvers and monotone inversion shared by every
//! renewal computation.
//!
//! All renewal-type curves live on a uniform [`Grid`] so estimators can be
//! compared point for point without interpolation.

use crate::error::{Error, Result};

/// Uniform time discretization `t_k = k h`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    t_max: f64,
    n_steps: usize,
}

impl Grid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("grid t_max must be positive, got {t_max}")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least 2 steps, got {n_steps}")));
        }
        Ok(Self { t_max, n_steps })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_max
        } else {
            k as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.t(k)).collect()
    }

    pub fn tabulate(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.len()).map(|k| f(self.t(k))).collect()
    }

    /// The same horizon with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            t_max: self.t_max,
            n_steps: self.n_steps * factor.max(1),
        }
    }
}

/// A renewal-type function sampled on a grid, tagged with the estimator that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub label: String,
}

impl Curve {
    pub fn new(grid: Grid, values: Vec<f64>, label: impl Into<String>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            label: label.into(),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| (self.grid.t(k), v))
    }

    /// Linear interpolation between grid points; clamps outside `[0, t_max]`.
    pub fn value_at(&self, t: f64) -> f64 {
        let h = self.grid.step();
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= self.grid.t_max() {
            return *self.values.last().unwrap();
        }
        let pos = t / h;
        let k = (pos.floor() as usize).min(self.grid.n_steps() - 1);
        let w = pos - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Sup-norm distance to a curve on the same grid.
    pub fn sup_distance(&self, other: &Curve) -> f64 {
        sup_distance(&self.values, &other.values)
    }

    /// Largest drop between consecutive points (0 for a nondecreasing curve).
    pub fn max_decrease(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[0] - w[1]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Values at the points shared with a grid coarser by `factor`.
    pub fn coarsened(&self, factor: usize) -> Vec<f64> {
        self.values.iter().step_by(factor).copied().collect()
    }
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Running trapezoid integral of tabulated values with step `h`.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Running Stieltjes trapezoid `∫_0^{t_k} g dF` from tabulated `g` and `F`.
pub fn cumulative_stieltjes(g: &[f64], cdf: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..g.len() {
        acc += 0.5 * (g[k - 1] + g[k]) * (cdf[k] - cdf[k - 1]);
        out.push(acc);
    }
    out
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SUBINTERVALS: usize = 4000;

/// One Gauss-Kronrod 7/15 panel: `(kronrod estimate, |kronrod - gauss|)`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = r * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]` to absolute
/// tolerance `tol`.
///
/// The endpoints are never evaluated, so integrable endpoint singularities
/// are tolerated.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::Domain(format!("integration bounds reversed: [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let (est, err) = gk15(&f, a, b);
    let mut panels = vec![(a, b, est, err)];
    let mut total = est;
    let mut total_err = err;
    while total_err > tol && total_err > 1e-15 * total.abs() {
        if panels.len() >= MAX_SUBINTERVALS {
            return Err(Error::Accuracy {
                estimate: total,
                error: total_err,
                tolerance: tol,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, e, r) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // panel at floating-point resolution; keep what we have
            panels.push((lo, hi, e, 0.0));
            total_err = panels.iter().map(|p| p.3).sum();
            continue;
        }
        let (e1, r1) = gk15(&f, lo, mid);
        let (e2, r2) = gk15(&f, mid, hi);
        total += e1 + e2 - e;
        total_err += r1 + r2 - r;
        panels.push((lo, mid, e1, r1));
        panels.push((mid, hi, e2, r2));
        if panels.len() % 64 == 0 {
            // resum to shed accumulated rounding
            total = panels.iter().map(|p| p.2).sum();
            total_err = panels.iter().map(|p| p.3).sum();
        }
    }
    Ok(panels.iter().map(|p| p.2).sum())
}

/// `∫_a^∞ f` for a nonnegative, eventually decaying integrand.
///
/// Integrates over consecutive doubling windows starting with width `scale`
/// and stops once two consecutive windows contribute less than `tol / 10`.
/// Windows beyond `a + 1e6 * scale` are an accuracy error.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, scale: f64, tol: f64) -> Result<f64> {
    let scale = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let cap = a + 1e6 * scale;
    let mut lo = a;
    let mut width = scale;
    let mut total = 0.0;
    let mut quiet = 0;
    let mut budget = tol / 2.0;
    while quiet < 2 {
        if lo > cap {
            return Err(Error::Accuracy {
                estimate: total,
                error: f64::NAN,
                tolerance: tol,
            });
        }
        let piece = integrate(&f, lo, lo + width, budget)?;
        total += piece;
        if piece.abs() < tol / 10.0 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        lo += width;
        width *= 2.0;
        budget = (budget / 2.0).max(tol * 1e-6);
    }
    Ok(total)
}

/// Trapezoid solve of `u(t) = g(t) + ∫_0^t u(t - x) k(x) dx` from tabulated
/// forcing and kernel.
pub fn solve_volterra_convolution_tabulated(forcing: &[f64], kernel: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = forcing.len();
    let pivot = 1.0 - 0.5 * h * kernel[0];
    if pivot <= 0.0 {
        return Err(Error::Instability { pivot });
    }
    let mut u = vec![0.0; n];
    u[0] = forcing[0];
    for k in 1..n {
        let inner: f64 = u[1..k]
            .iter()
            .zip(kernel[1..k].iter().rev())
            .map(|(a, b)| a * b)
            .sum();
        u[k] = (forcing[k] + h * (0.5 * u[0] * kernel[k] + inner)) / pivot;
    }
    Ok(u)
}

/// Renewal-type convolution equation `u(t) = F(t) + ∫_0^t u(t - x) f(x) dx`
/// solved by trapezoidal product integration on `grid`.
pub fn solve_volterra_convolution(
    forcing: impl Fn(f64) -> f64,
    kernel: impl Fn(f64) -> f64,
    grid: &Grid,
    label: &str,
) -> Result<Curve> {
    let g = grid.tabulate(forcing);
    let k = grid.tabulate(kernel);
    let values = solve_volterra_convolution_tabulated(&g, &k, grid.step())?;
    Ok(Curve::new(*grid, values, label))
}

/// Renewal-type equation `u(t) = g(t) + ∫_0^t u(t - x) dK(x)` from tabulated
/// forcing and measure `K` (`K(0) = 0`).
///
/// Works with the increments of `K` only, so kernels whose density is
/// unbounded at the origin are handled without special casing.
pub fn solve_volterra_convolution_stieltjes(forcing: &[f64], measure: &[f64]) -> Result<Vec<f64>> {
    let n = forcing.len();
    let dk: Vec<f64> = (0..n)
        .map(|j| if j == 0 { 0.0 } else { measure[j] - measure[j - 1] })
        .collect();
    let pivot = 1.0 - 0.5 * dk.get(1).copied().unwrap_or(0.0);
    if pivot <= 0.0 {
        return Err(Error::Instability { pivot });
    }
    let mut u = vec![0.0; n];
    // pair[m] = u[m] + u[m + 1]
    let mut pair = vec![0.0; n];
    u[0] = forcing[0];
    for k in 1..n {
        let mut acc = 0.5 * u[k - 1] * dk[1];
        let mut inner = 0.0;
        for m in 0..k.saturating_sub(1) {
            inner += pair[m] * dk[k - m];
        }
        acc += 0.5 * inner;
        u[k] = (forcing[k] + acc) / pivot;
        pair[k - 1] = u[k - 1] + u[k];
    }
    Ok(u)
}

/// Non-convolution equation `u(t) = g(t) + ∫_0^t u(y) K(t, y) dy` by the
/// trapezoid rule.
pub fn solve_volterra_general(
    forcing: impl Fn(f64) -> f64,
    kernel: impl Fn(f64, f64) -> f64,
    grid: &Grid,
    label: &str,
) -> Result<Curve> {
    let h = grid.step();
    let n = grid.len();
    let mut u = vec![0.0; n];
    u[0] = forcing(0.0);
    for k in 1..n {
        let t = grid.t(k);
        let pivot = 1.0 - 0.5 * h * kernel(t, t);
        if pivot <= 0.0 {
            return Err(Error::Instability { pivot });
        }
        let mut acc = 0.5 * u[0] * kernel(t, 0.0);
        for (j, uj) in u.iter().enumerate().take(k).skip(1) {
            acc += uj * kernel(t, grid.t(j));
        }
        u[k] = (forcing(t) + h * acc) / pivot;
    }
    Ok(Curve::new(*grid, u, label))
}

/// Stieltjes-form equation `u(t) = g(t) + ∫_0^t G(t, y) du(y)` with
/// `G(t, t) = 0`, solved by product trapezoid on the increments of `u`.
///
/// `row(k, out)` must fill `out[j] = G(t_k, t_j)` for `j = 0..k`; it is called
/// once per `k` in increasing order, so callers may carry running state.
pub fn solve_volterra_stieltjes(
    forcing: &[f64],
    mut row: impl FnMut(usize, &mut [f64]),
) -> Result<Vec<f64>> {
    let n = forcing.len();
    let mut u = vec![0.0; n];
    let mut g_row = vec![0.0; n];
    u[0] = forcing[0];
    for k in 1..n {
        row(k, &mut g_row[..k]);
        let mut acc = 0.0;
        for j in 1..k {
            acc += 0.5 * (g_row[j - 1] + g_row[j]) * (u[j] - u[j - 1]);
        }
        let half = 0.5 * g_row[k - 1];
        let pivot = 1.0 - half;
        if pivot <= 0.0 {
            return Err(Error::Instability { pivot });
        }
        u[k] = (forcing[k] + acc - half * u[k - 1]) / pivot;
    }
    Ok(u)
}

/// Bisection for `g(x) = target` on a nondecreasing `g`.
///
/// Returns `x` with `|g(x) - target| <= tol (1 + |target|)`, or the bracket
/// midpoint once the bracket collapses to floating-point resolution.
pub fn invert_monotone(g: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo <= target && target <= ghi) {
        return Err(Error::Bracketing { lo, hi, target });
    }
    let slack = tol * (1.0 + target.abs());
    if (glo - target).abs() <= slack {
        return Ok(lo);
    }
    if (ghi - target).abs() <= slack {
        return Ok(hi);
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if (gm - target).abs() <= slack || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if gm < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Expands `hi` by doubling until `g(hi) >= target`, then bisects.
pub fn invert_monotone_unbounded(g: impl Fn(f64) -> f64, target: f64, lo: f64, initial_hi: f64, tol: f64) -> Result<f64> {
    let mut hi = initial_hi.max(lo + f64::EPSILON);
    let mut tries = 0;
    while g(hi) < target {
        hi = lo + 2.0 * (hi - lo);
        tries += 1;
        if tries > 200 || !hi.is_finite() {
            return Err(Error::Bracketing { lo, hi, target });
        }
    }
    invert_monotone(g, target, lo, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stieltjes_convolution_reproduces_poisson() {
        // u = F + u * dF with F = 1 - e^{-t} gives u = t
        let grid = Grid::new(5.0, 500).unwrap();
        let f = grid.tabulate(|t| 1.0 - (-t).exp());
        let u = solve_volterra_convolution_stieltjes(&f, &f).unwrap();
        for (k, v) in u.iter().enumerate() {
            assert!((v - grid.t(k)).abs() < 1e-4, "k={k} v={v}");
        }
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(Grid::new(0.0, 10).is_err());
        assert!(Grid::new(1.0, 1).is_err());
        let g = Grid::new(2.0, 4).unwrap();
        assert_eq!(g.points(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn integrates_constants_and_exponential_tail() {
        assert!((integrate(|_| 1.0, 0.0, 1.0, 1e-12).unwrap() - 1.0).abs() < 1e-14);
        let v = integrate_to_infinity(|t| (-t).exp(), 0.0, 1.0, 1e-8).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn integrate_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} = 2
        let v = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-8).unwrap();
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn reversed_bounds_are_an_error() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-6).is_err());
    }

    #[test]
    fn zero_kernel_returns_forcing() {
        let grid = Grid::new(3.0, 30).unwrap();
        let c = solve_volterra_convolution(|t| t * t, |_| 0.0, &grid, "x").unwrap();
        let g = solve_volterra_general(|t| t * t, |_, _| 0.0, &grid, "x").unwrap();
        for (k, t) in grid.points().into_iter().enumerate() {
            assert_eq!(c.values[k], t * t);
            assert_eq!(g.values[k], t * t);
        }
    }

    #[test]
    fn coarse_step_with_large_kernel_is_unstable() {
        let grid = Grid::new(10.0, 2).unwrap();
        let err = solve_volterra_convolution(|_| 1.0, |_| 1.0, &grid, "x").unwrap_err();
        assert!(matches!(err, Error::Instability { .. }));
    }

    #[test]
    fn general_solver_reduces_to_convolution() {
        let grid = Grid::new(5.0, 400).unwrap();
        let k = |x: f64| x * (-x).exp();
        let conv = solve_volterra_convolution(|t| 1.0 - (1.0 + t) * (-t).exp(), k, &grid, "c").unwrap();
        let gen = solve_volterra_general(|t| 1.0 - (1.0 + t) * (-t).exp(), |t, y| k(t - y), &grid, "g").unwrap();
        assert!(conv.sup_distance(&gen) < 1e-10);
    }

    #[test]
    fn stieltjes_solver_with_convolution_kernel_matches_renewal() {
        // Poisson process: u = 1 - e^-t + ∫ (1 - e^-(t-y)) du(y) has u = t
        let grid = Grid::new(5.0, 2000).unwrap();
        let h = grid.step();
        let forcing = grid.tabulate(|t| 1.0 - (-t).exp());
        let u = solve_volterra_stieltjes(&forcing, |k, out| {
            for (j, o) in out.iter_mut().enumerate() {
                *o = -(-((k - j) as f64 * h)).exp_m1();
            }
        })
        .unwrap();
        for (k, v) in u.iter().enumerate() {
            assert!((v - grid.t(k)).abs() < 1e-5);
        }
    }

    #[test]
    fn inversion_and_bracketing() {
        let x = invert_monotone(|x| x, 3.0, 0.0, 10.0, 1e-12).unwrap();
        assert!((x - 3.0).abs() < 1e-10);
        let err = invert_monotone(|x| x, 30.0, 0.0, 10.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Bracketing { .. }));
        let y = invert_monotone_unbounded(|x| x * x, 1e4, 0.0, 1.0, 1e-14).unwrap();
        assert!((y - 100.0).abs() < 1e-9);
    }

    #[test]
    fn cumulative_helpers() {
        let c = cumulative_trapezoid(&[0.0, 1.0, 2.0], 0.5);
        assert_eq!(c, vec![0.0, 0.25, 1.0]);
        let s = cumulative_stieltjes(&[1.0, 1.0, 1.0], &[0.0, 0.3, 0.5]);
        assert!((s[2] - 0.5).abs() < 1e-15);
    }
}
