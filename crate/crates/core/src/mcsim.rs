//! Monte-Carlo validation of the spatial model.
//!
//! Each trial drops every group as an independent Poisson point process on a
//! square window, runs the two dissemination stages (pushing, then D2D
//! fetching), and tallies the four user roles: pushed-and-interested (UE-A,
//! the holders), pushed-and-refusing (UE-R), interested-but-not-pushed
//! (UE-T, the requesters), and uninvolved (UE-N). A requester succeeds when
//! at least one holder within D2D range agrees to share.
//!
//! Two modeling choices mirror the closed-form success probability exactly:
//!
//! - Willingness is drawn independently per (holder, requester) pair, so
//!   every requester sees an independently thinned holder field — which is
//!   what the `1 - exp(-B (L_m + O_m))` formula integrates over.
//! - Requesters are scored only inside an inset window (margin at least the
//!   D2D radius), while holders populate the full window, so no requester's
//!   search disk is clipped by the window edge. The formulas assume an
//!   unbounded plane; this is the finite-window stand-in for it.
//!
//! Trials use per-trial substreams of a counter-based generator, so parallel
//! and serial runs produce identical estimates.

use crate::model::{PushStrategy, ValidConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("guard margin {guard} is below the D2D radius {radius}; edge requesters would see clipped disks")]
    GuardTooSmall { guard: f64, radius: f64 },
    #[error("region side {side} must exceed twice the guard margin {guard}")]
    WindowTooSmall { side: f64, guard: f64 },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("strategy has {got} entries but the instance has {expected} groups")]
    LengthMismatch { expected: usize, got: usize },
}

/// Simulation window and replication parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSpec {
    /// Side of the square window, meters.
    pub region_side: f64,
    pub trials: u64,
    pub seed: u64,
    /// Inset margin for scoring requesters; must be at least the D2D radius.
    pub guard_margin: f64,
}

impl SimSpec {
    /// 200 m window with the guard margin set to the given D2D radius.
    pub fn new(trials: u64, seed: u64, d2d_radius: f64) -> Self {
        Self {
            region_side: 200.0,
            trials,
            seed,
            guard_margin: d2d_radius,
        }
    }
}

/// Per-trial role counts for one group. Roles are tallied over the full
/// window; `ue_t_inset` and `successes` only count requesters inside the
/// guard inset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroupTally {
    pub ue_a: u64,
    pub ue_r: u64,
    pub ue_t: u64,
    pub ue_n: u64,
    pub ue_t_inset: u64,
    pub successes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialTally {
    pub groups: Vec<GroupTally>,
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Per-group empirical D2D success probability. `None` when no requester
    /// of that group was ever observed (the estimate is undefined, not 0).
    pub est_success: Vec<Option<Estimate>>,
    /// Offloaded copies per unit area, estimated over the inset window.
    pub est_gain_density: Estimate,
    /// Raw per-trial tallies, in trial order.
    pub counts: Vec<TrialTally>,
}

/// Samples a homogeneous Poisson point process on a square window: the point
/// count is Poisson(density * area), positions are uniform.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, region_side: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let mean = density * region_side * region_side;
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    (0..count)
        .map(|_| {
            [
                rng.random::<f64>() * region_side,
                rng.random::<f64>() * region_side,
            ]
        })
        .collect()
}

fn run_trial(
    config: &ValidConfig,
    strategy: &PushStrategy,
    spec: &SimSpec,
    trial: u64,
) -> TrialTally {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(trial);

    let side = spec.region_side;
    let guard = spec.guard_margin;
    let radius = config.d2d_radius();
    let radius_sq = radius * radius;
    let m_count = config.group_count();
    let probs = strategy.probs();

    let mut tallies = vec![GroupTally::default(); m_count];
    let mut holders: Vec<(usize, f64, f64)> = Vec::new();
    let mut requesters: Vec<(usize, f64, f64)> = Vec::new();

    for m in 0..m_count {
        let g = &config.groups()[m];
        for p in sample_ppp(g.density, side, &mut rng) {
            let interested = rng.random::<f64>() < g.request_prob;
            let pushed = rng.random::<f64>() < probs[m];
            match (pushed, interested) {
                (true, true) => {
                    tallies[m].ue_a += 1;
                    holders.push((m, p[0], p[1]));
                }
                (true, false) => tallies[m].ue_r += 1,
                (false, true) => {
                    tallies[m].ue_t += 1;
                    let inset = p[0] >= guard
                        && p[0] <= side - guard
                        && p[1] >= guard
                        && p[1] <= side - guard;
                    if inset {
                        tallies[m].ue_t_inset += 1;
                        requesters.push((m, p[0], p[1]));
                    }
                }
                (false, false) => tallies[m].ue_n += 1,
            }
        }
    }

    // Bucket holders into cells of side r; any holder within range of a
    // requester lies in the 3x3 cell neighborhood.
    let cells = (side / radius).ceil().max(1.0) as usize;
    let cell_of = |v: f64| ((v / radius) as usize).min(cells - 1);
    let mut grid: Vec<Vec<u32>> = vec![Vec::new(); cells * cells];
    for (i, &(_, x, y)) in holders.iter().enumerate() {
        grid[cell_of(y) * cells + cell_of(x)].push(i as u32);
    }

    for &(m, x, y) in &requesters {
        let cx = cell_of(x);
        let cy = cell_of(y);
        let mut served = false;
        'cells: for ny in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for nx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &hi in &grid[ny * cells + nx] {
                    let (k, hx, hy) = holders[hi as usize];
                    let (dx, dy) = (hx - x, hy - y);
                    if dx * dx + dy * dy > radius_sq {
                        continue;
                    }
                    // One willingness coin per (holder, requester) pair,
                    // keyed on the holder's group and its relation to the
                    // requester.
                    let share = if k == m {
                        config.groups()[k].share_intra
                    } else {
                        config.groups()[k].share_inter
                    };
                    if rng.random::<f64>() < share {
                        served = true;
                        break 'cells;
                    }
                }
            }
        }
        if served {
            tallies[m].successes += 1;
        }
    }

    TrialTally { groups: tallies }
}

/// Runs the full two-stage dissemination over all trials and aggregates the
/// role tallies into success and gain-density estimates.
///
/// The success standard error treats trials as the independent units (a
/// ratio estimator over per-trial counts): requesters within one trial share
/// a holder field, so a plain binomial error would be too optimistic.
pub fn run_dissemination(
    config: &ValidConfig,
    strategy: &PushStrategy,
    spec: &SimSpec,
) -> Result<SimResult, SimError> {
    if strategy.len() != config.group_count() {
        return Err(SimError::LengthMismatch {
            expected: config.group_count(),
            got: strategy.len(),
        });
    }
    if spec.guard_margin < config.d2d_radius() || spec.guard_margin.is_nan() {
        return Err(SimError::GuardTooSmall {
            guard: spec.guard_margin,
            radius: config.d2d_radius(),
        });
    }
    if spec.region_side.is_nan() || spec.region_side <= 2.0 * spec.guard_margin {
        return Err(SimError::WindowTooSmall {
            side: spec.region_side,
            guard: spec.guard_margin,
        });
    }
    if spec.trials == 0 {
        return Err(SimError::NoTrials);
    }

    // Trials are independent; collect in trial order and aggregate serially
    // so the parallel run is bit-identical to a serial one.
    let counts: Vec<TrialTally> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, strategy, spec, trial))
        .collect();

    let m_count = config.group_count();
    let trials = spec.trials as f64;
    let inset_side = spec.region_side - 2.0 * spec.guard_margin;
    let inset_area = inset_side * inset_side;

    let mut est_success = Vec::with_capacity(m_count);
    for m in 0..m_count {
        let total_requests: u64 = counts.iter().map(|t| t.groups[m].ue_t_inset).sum();
        if total_requests == 0 {
            est_success.push(None);
            continue;
        }
        let total_successes: u64 = counts.iter().map(|t| t.groups[m].successes).sum();
        let p_hat = total_successes as f64 / total_requests as f64;
        let std_error = if spec.trials >= 2 {
            let mean_requests = total_requests as f64 / trials;
            let ss: f64 = counts
                .iter()
                .map(|t| {
                    let resid =
                        t.groups[m].successes as f64 - p_hat * t.groups[m].ue_t_inset as f64;
                    resid * resid
                })
                .sum();
            (ss / (trials - 1.0) / trials).sqrt() / mean_requests
        } else {
            f64::INFINITY
        };
        est_success.push(Some(Estimate {
            mean: p_hat,
            std_error,
        }));
    }

    let per_trial_gain: Vec<f64> = counts
        .iter()
        .map(|t| {
            let successes: u64 = t.groups.iter().map(|g| g.successes).sum();
            successes as f64 / inset_area
        })
        .collect();
    let mean_gain = per_trial_gain.iter().sum::<f64>() / trials;
    let gain_se = if spec.trials >= 2 {
        let ss: f64 = per_trial_gain
            .iter()
            .map(|g| (g - mean_gain) * (g - mean_gain))
            .sum();
        (ss / (trials - 1.0) / trials).sqrt()
    } else {
        f64::INFINITY
    };

    Ok(SimResult {
        est_success,
        est_gain_density: Estimate {
            mean: mean_gain,
            std_error: gain_se,
        },
        counts,
    })
}
