//! Event-level simulation of the four processes.
//!
//! Run `i` draws from its own ChaCha stream `(master_seed, i)`. Per-run
//! counts are folded into integer difference arrays, so the totals (and the
//! estimate) are identical whatever the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounded::{ProcessKind, ProcessSpec};
use crate::distributions::LifetimeModel;
use crate::error::{Error, Result};
use crate::numerics::{Curve, Grid};

/// Two-sided 99% normal quantile.
pub const DEFAULT_Z: f64 = 2.576;
pub const DEFAULT_RUNS: usize = 100_000;

const BLOCK: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub curve: Curve,
    pub ci_halfwidth: Vec<f64>,
    pub std_error: Vec<f64>,
    pub runs: usize,
    pub master_seed: u64,
    pub z: f64,
}

impl SimEstimate {
    pub fn ci_low(&self, k: usize) -> f64 {
        self.curve.values[k] - self.ci_halfwidth[k]
    }

    pub fn ci_high(&self, k: usize) -> f64 {
        self.curve.values[k] + self.ci_halfwidth[k]
    }

    /// Fraction of grid points where `other` lies inside the CI band.
    pub fn coverage(&self, other: &[f64]) -> f64 {
        let inside = other
            .iter()
            .enumerate()
            .filter(|&(k, v)| (v - self.curve.values[k]).abs() <= self.ci_halfwidth[k] + 1e-12)
            .count();
        inside as f64 / other.len() as f64
    }
}

fn stream(master_seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run);
    rng
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

/// Grid index of the first point `t_k >= s`.
fn first_index_at_or_after(grid: &Grid, s: f64) -> usize {
    let n = grid.n_steps();
    let mut k = ((s / grid.step()).ceil().max(0.0) as usize).min(n);
    while k < n && grid.t(k) < s {
        k += 1;
    }
    while k > 0 && grid.t(k - 1) >= s {
        k -= 1;
    }
    k
}

/// Residual CR life at age `age`; a vanished survival means immediate failure.
fn cr_residual<R: Rng + ?Sized>(cr: &LifetimeModel, age: f64, rng: &mut R) -> f64 {
    match cr.at_age(age) {
        Ok(c) => c.sample(rng),
        Err(_) => 0.0,
    }
}

/// Times of the counted NC renewals of one run, in increasing order.
fn simulate_path<R: Rng + ?Sized>(spec: &ProcessSpec, t_max: f64, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let (nc, cr) = (&spec.nc, &spec.cr);
    match spec.kind {
        ProcessKind::A | ProcessKind::AMr => {
            let mut cr_fails = cr.sample(rng);
            let mut s = 0.0;
            let mut cumhaz = 0.0;
            loop {
                s = if spec.kind == ProcessKind::A {
                    s + nc.sample(rng)
                } else {
                    cumhaz += exp1(rng);
                    nc.inverse_cumulative_hazard(cumhaz, s)
                };
                if s > t_max || s >= cr_fails {
                    break;
                }
                out.push(s);
                if spec.reevaluate_cr {
                    cr_fails = s + cr_residual(cr, s, rng);
                }
            }
        }
        ProcessKind::B | ProcessKind::BMr => {
            let mut s = 0.0;
            let mut cumhaz = 0.0;
            loop {
                let next = if spec.kind == ProcessKind::B {
                    s + nc.sample(rng)
                } else {
                    cumhaz += exp1(rng);
                    nc.inverse_cumulative_hazard(cumhaz, s)
                };
                let cr_life = cr.sample(rng);
                if next > t_max || cr_life <= next - s {
                    break;
                }
                s = next;
                out.push(s);
            }
        }
    }
}

struct Tally {
    count: Vec<u64>,
    square: Vec<u64>,
}

impl Tally {
    fn new(n: usize) -> Self {
        Self {
            count: vec![0; n],
            square: vec![0; n],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.count.iter_mut().zip(other.count) {
            *a += b;
        }
        for (a, b) in self.square.iter_mut().zip(other.square) {
            *a += b;
        }
        self
    }
}

/// Mean number of counted NC renewals on `grid` over `runs` independent runs.
pub fn simulate(spec: &ProcessSpec, grid: &Grid, runs: usize, master_seed: u64) -> Result<SimEstimate> {
    simulate_with_z(spec, grid, runs, master_seed, DEFAULT_Z)
}

pub fn simulate_with_z(spec: &ProcessSpec, grid: &Grid, runs: usize, master_seed: u64, z: f64) -> Result<SimEstimate> {
    spec.validate()?;
    if runs == 0 {
        return Err(Error::InvalidParameter("simulation needs at least one run".into()));
    }
    let n = grid.len();
    let t_max = grid.t_max();
    let blocks: Vec<usize> = (0..runs.div_ceil(BLOCK)).collect();
    let tally = blocks
        .par_iter()
        .map(|&b| {
            let mut tally = Tally::new(n);
            let mut path = Vec::new();
            for run in b * BLOCK..((b + 1) * BLOCK).min(runs) {
                let mut rng = stream(master_seed, run as u64);
                simulate_path(spec, t_max, &mut rng, &mut path);
                // the m-th renewal raises N by 1 and N² by 2m - 1 from its grid index on
                for (m, &s) in path.iter().enumerate() {
                    let k = first_index_at_or_after(grid, s);
                    tally.count[k] += 1;
                    tally.square[k] += 2 * m as u64 + 1;
                }
            }
            tally
        })
        .reduce(|| Tally::new(n), Tally::merge);

    let r = runs as f64;
    let mut mean = Vec::with_capacity(n);
    let mut se = Vec::with_capacity(n);
    let (mut c, mut q) = (0u64, 0u64);
    for k in 0..n {
        c += tally.count[k];
        q += tally.square[k];
        let m = c as f64 / r;
        let var = if runs > 1 {
            ((q as f64 - r * m * m) / (r - 1.0)).max(0.0)
        } else {
            0.0
        };
        mean.push(m);
        se.push((var / r).sqrt());
    }
    // no run has an event yet: the normal band collapses, so fall back to
    // the Wilson upper limit for a zero count
    let ci = se.iter().map(|s| if *s > 0.0 { z * s } else { z * z / r }).collect();
    Ok(SimEstimate {
        curve: Curve::new(*grid, mean, "simulate"),
        ci_halfwidth: ci,
        std_error: se,
        runs,
        master_seed,
        z,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReevaluationReport {
    /// Largest `|mean difference| / combined standard error`.
    pub max_ratio: f64,
    /// Fraction of grid points inside the combined 3σ band.
    pub fraction_within: f64,
    pub passed: bool,
}

/// Simulates an `A` or `A_MR` spec with and without CR reevaluation on
/// independent streams and checks that the means agree.
pub fn reevaluation_equivalence_test(
    spec: &ProcessSpec,
    grid: &Grid,
    runs: usize,
    seed: u64,
) -> Result<ReevaluationReport> {
    if spec.kind.replaces_cr() {
        return Err(Error::InvalidSpec("reevaluation applies to processes A and A_MR only".into()));
    }
    let plain = ProcessSpec {
        reevaluate_cr: false,
        ..*spec
    };
    let reeval = ProcessSpec {
        reevaluate_cr: true,
        ..*spec
    };
    let a = simulate(&plain, grid, runs, seed)?;
    let b = simulate(&reeval, grid, runs, seed ^ 0x5DEE_CE66_D1CE_5EED)?;
    let mut max_ratio: f64 = 0.0;
    let mut within = 0usize;
    for k in 0..grid.len() {
        let diff = (a.curve.values[k] - b.curve.values[k]).abs();
        let sigma = a.std_error[k].hypot(b.std_error[k]);
        if diff <= 3.0 * sigma {
            within += 1;
        }
        if sigma > 0.0 {
            max_ratio = max_ratio.max(diff / sigma);
        } else if diff > 0.0 {
            max_ratio = f64::INFINITY;
        }
    }
    let fraction_within = within as f64 / grid.len() as f64;
    Ok(ReevaluationReport {
        max_ratio,
        fraction_within,
        passed: fraction_within >= 0.99,
    })
}
