//! Brute-force grid search over the strategy hypercube.
//!
//! The oracle evaluates the gain at every point of a regular lattice and
//! returns the argmax. It is the trusted (if slow) baseline the solvers are
//! judged against: for a lattice of spacing `step`, the true optimum can
//! exceed the lattice optimum by at most `eps_grid = L * step * sqrt(M)`,
//! where `L` bounds the gradient norm of the gain over the cube.
//!
//! Ties are broken towards the lexicographically smallest strategy, which
//! makes results deterministic under the chunked-parallel evaluation used
//! here (chunks over the first axis, reduced in axis order).

use crate::model::{PushStrategy, ValidConfig};
use rayon::prelude::*;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid step must be in (0, 1], got {step}")]
    InvalidStep { step: f64 },
    #[error(
        "lattice of {points} points per axis over {groups} groups needs {total} \
         evaluations, over the budget of {budget}; use a coarser step or fewer groups"
    )]
    BudgetExceeded {
        points: u64,
        groups: usize,
        total: u128,
        budget: u64,
    },
    #[error("lattice dump failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Lattice description for the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Lattice spacing per axis, in `(0, 1]`. The axis holds
    /// `floor(1/step) + 1` points `0, step, 2 step, ...`, the last clamped
    /// to 1.
    pub step: f64,
    /// Cap on `points^M` total evaluations.
    pub max_evaluations: u64,
}

impl GridSpec {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            max_evaluations: 1_000_000_000,
        }
    }

    pub fn points_per_axis(&self) -> u64 {
        (1.0 / self.step + 1e-9).floor() as u64 + 1
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(0.01)
    }
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    /// Lattice argmax (lexicographically smallest among gain ties).
    pub strategy: PushStrategy,
    /// Gain at the argmax.
    pub gain: f64,
    /// Lipschitz slack: the true optimum is at most `gain + eps_grid`.
    pub eps_grid: f64,
    /// Number of gain evaluations performed.
    pub evaluations: u64,
}

fn check_spec(config: &ValidConfig, spec: &GridSpec) -> Result<(u64, f64), OracleError> {
    if !(spec.step > 0.0 && spec.step <= 1.0) || !spec.step.is_finite() {
        return Err(OracleError::InvalidStep { step: spec.step });
    }
    let points = spec.points_per_axis();
    let total = (points as u128)
        .checked_pow(config.group_count() as u32)
        .unwrap_or(u128::MAX);
    if total > spec.max_evaluations as u128 {
        return Err(OracleError::BudgetExceeded {
            points,
            groups: config.group_count(),
            total,
            budget: spec.max_evaluations,
        });
    }
    Ok((points, spec.step))
}

fn axis_value(i: u64, step: f64) -> f64 {
    (i as f64 * step).min(1.0)
}

/// Crude bound on the gradient norm of the gain over the cube, used for the
/// lattice slack. Each partial is bounded by `t_m + B * T * rho_max * T` with
/// `T = sum t`; looseness only makes the slack safer.
pub fn eps_grid(config: &ValidConfig, step: f64) -> f64 {
    let total_t = config.total_request_density();
    let rho_max = config
        .groups()
        .iter()
        .map(|g| g.share_intra.max(g.share_inter))
        .fold(0.0f64, f64::max);
    let per_partial = config.coop_area() * total_t * rho_max * total_t;
    let norm_sq: f64 = config
        .request_densities()
        .iter()
        .map(|t| {
            let b = t + per_partial;
            b * b
        })
        .sum();
    norm_sq.sqrt() * step * (config.group_count() as f64).sqrt()
}

/// Scans the remaining axes (row-major, last axis fastest) with the first
/// `fixed` coordinates already set, keeping the best strictly-greater gain.
fn scan_tail(
    config: &ValidConfig,
    points: u64,
    step: f64,
    scratch: &mut [f64],
    fixed: usize,
    best_gain: &mut f64,
    best: &mut Vec<f64>,
) {
    let m = scratch.len();
    if fixed == m {
        let gain = config.total_gain(scratch);
        if gain > *best_gain {
            *best_gain = gain;
            best.clear();
            best.extend_from_slice(scratch);
        }
        return;
    }
    for i in 0..points {
        scratch[fixed] = axis_value(i, step);
        scan_tail(config, points, step, scratch, fixed + 1, best_gain, best);
    }
}

/// Exhaustive search for the gain-maximizing strategy on the lattice.
pub fn grid_search(config: &ValidConfig, spec: &GridSpec) -> Result<GridSearchResult, OracleError> {
    let (points, step) = check_spec(config, spec)?;
    let m = config.group_count();

    // One chunk per first-axis value; each chunk scans its slab serially so
    // the per-chunk winner is the lexicographically smallest tie. Reducing in
    // chunk order keeps the global result deterministic regardless of how
    // rayon schedules the chunks.
    let chunk_results: Vec<(f64, Vec<f64>)> = (0..points)
        .into_par_iter()
        .map(|i0| {
            let mut scratch = vec![0.0; m];
            scratch[0] = axis_value(i0, step);
            let mut best_gain = f64::NEG_INFINITY;
            let mut best = Vec::new();
            scan_tail(config, points, step, &mut scratch, 1, &mut best_gain, &mut best);
            (best_gain, best)
        })
        .collect();

    let mut best_gain = f64::NEG_INFINITY;
    let mut best = Vec::new();
    for (gain, strategy) in chunk_results {
        if gain > best_gain {
            best_gain = gain;
            best = strategy;
        }
    }

    let evaluations = (points as u128).pow(m as u32) as u64;
    Ok(GridSearchResult {
        strategy: PushStrategy::new(best).expect("lattice points are valid probabilities"),
        gain: best_gain,
        eps_grid: eps_grid(config, step),
        evaluations,
    })
}

/// Writes the full lattice evaluation as CSV (`c_1,...,c_M,gain`), one row
/// per lattice point in row-major order. Intended for debugging small
/// instances; the budget in `spec` still applies.
pub fn dump_lattice_csv<W: Write>(
    config: &ValidConfig,
    spec: &GridSpec,
    out: &mut W,
) -> Result<(), OracleError> {
    let (points, step) = check_spec(config, spec)?;
    let m = config.group_count();

    for i in 1..=m {
        write!(out, "c_{i},")?;
    }
    writeln!(out, "gain")?;

    let mut idx = vec![0u64; m];
    let mut scratch = vec![0.0; m];
    loop {
        for (k, &i) in idx.iter().enumerate() {
            scratch[k] = axis_value(i, step);
        }
        let gain = config.total_gain(&scratch);
        for v in &scratch {
            write!(out, "{v},")?;
        }
        writeln!(out, "{gain}")?;

        // Odometer increment, last axis fastest.
        let mut axis = m;
        loop {
            if axis == 0 {
                return Ok(());
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < points {
                break;
            }
            idx[axis] = 0;
        }
    }
}
