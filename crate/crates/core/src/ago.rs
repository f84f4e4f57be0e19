//! Alternative group optimization: cyclic per-group exact maximization of
//! the offloading gain for the general problem (distinct in- and cross-group
//! sharing probabilities).
//!
//! The full problem is nonconvex, but fixing every pushing probability
//! except `c_m` leaves a strictly concave 1-D slice
//!
//! `G_-m(x) = t_m (1-x) (1 - exp(-B t_m rho_m_i x - phi_m))
//!          + sum_{k != m} Q_k (1 - exp(-B t_m rho_m_o x - Phi_k))`
//!
//! with `phi_m = sum_{k != m} B t_k rho_k_o c_k`, `Q_k = t_k (1 - c_k)`, and
//! `Phi_k = sum_{q != m,k} B t_q rho_q_o c_q + B t_k rho_k_i c_k`. Its
//! maximizer is the `[0, 1]`-clamped root of the strictly decreasing
//!
//! `g_m(x) = (1 + B t_m rho_m_i (1-x)) exp(-B t_m rho_m_i x - phi_m)
//!         + B I_m rho_m_o exp(-B t_m rho_m_o x) - 1`,
//!
//! where `I_m = sum_{k != m} Q_k exp(-Phi_k)`. Cycling the exact inner
//! update over groups makes the gain non-decreasing after every single
//! update, and the gain is bounded by `sum t_m`, so the sweep converges.

use crate::analytic::{self, AnalyticError};
use crate::model::{GroupParams, PushStrategy, SystemConfig, ValidConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgoError {
    #[error("explicit initial strategy has {got} entries, instance has {expected} groups")]
    ExplicitInitLength { expected: usize, got: usize },
    #[error("group-independent initializer failed: {0}")]
    Init(#[from] AnalyticError),
}

/// Starting point for the sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    /// All-zero strategy.
    Zeros,
    /// Closed-form optimum of the group-independent relaxation with
    /// `rho_m = rho_m_o`; usually the closest start.
    GroupIndependentInter,
    /// Same, with `rho_m = rho_m_i`.
    GroupIndependentIntra,
    /// Independent uniform draws per group.
    Random { seed: u64 },
    /// Caller-provided strategy.
    Explicit(PushStrategy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgoConfig {
    /// Outer sweeps over all groups. Two suffice in practice.
    pub max_iterations: usize,
    /// Bisection interval-width target for the inner root.
    pub bisection_tolerance: f64,
    /// Hard cap on bisection steps.
    pub bisection_max_steps: usize,
    pub init: InitMode,
}

impl Default for AgoConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2,
            bisection_tolerance: 1e-10,
            bisection_max_steps: 60,
            init: InitMode::GroupIndependentInter,
        }
    }
}

/// Gain trajectory of a sweep, one entry per group update.
#[derive(Debug, Clone, PartialEq)]
pub struct AgoTrace {
    /// `gains[i][m]` is the gain right after iteration `i` updated group `m`.
    pub gains: Vec<Vec<f64>>,
    pub final_strategy: PushStrategy,
    /// Outer iterations actually run (early exit may stop before the cap).
    pub iterations_run: usize,
}

/// The pieces of the 1-D slice `G_-m` that do not depend on `c_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGainTerms {
    /// `phi_m`: cross-group exposure the other groups give a group-m requester.
    pub phi: f64,
    /// `Q_k = t_k (1 - c_k)`; the `m` slot is zero.
    pub q: Vec<f64>,
    /// `Phi_k`; the `m` slot is zero.
    pub cap_phi: Vec<f64>,
    /// `I_m = sum_{k != m} Q_k exp(-Phi_k)`.
    pub i_m: f64,
}

/// Evaluates `phi_m`, `Q_k`, `Phi_k`, `I_m` with every probability except
/// `probs[m]` fixed (`probs[m]` itself is ignored).
pub fn reduced_gain_terms(config: &ValidConfig, probs: &[f64], m: usize) -> ReducedGainTerms {
    assert_eq!(probs.len(), config.group_count(), "strategy length mismatch");
    let b = config.coop_area();
    let t = config.request_densities();
    let groups = config.groups();
    let m_count = groups.len();

    let mut phi = 0.0;
    for k in 0..m_count {
        if k != m {
            phi += b * t[k] * groups[k].share_inter * probs[k];
        }
    }

    let mut q = vec![0.0; m_count];
    let mut cap_phi = vec![0.0; m_count];
    let mut i_m = 0.0;
    for k in 0..m_count {
        if k == m {
            continue;
        }
        q[k] = t[k] * (1.0 - probs[k]);
        let mut p = b * t[k] * groups[k].share_intra * probs[k];
        for qx in 0..m_count {
            if qx != m && qx != k {
                p += b * t[qx] * groups[qx].share_inter * probs[qx];
            }
        }
        cap_phi[k] = p;
        i_m += q[k] * (-p).exp();
    }

    ReducedGainTerms {
        phi,
        q,
        cap_phi,
        i_m,
    }
}

/// The 1-D gain slice `G_-m(x)` rebuilt from precomputed terms. Equal to the
/// full gain with `c_m = x`.
pub fn reduced_gain(config: &ValidConfig, terms: &ReducedGainTerms, m: usize, x: f64) -> f64 {
    let b = config.coop_area();
    let t_m = config.request_densities()[m];
    let g = &config.groups()[m];
    let own = t_m * (1.0 - x) * (1.0 - (-b * t_m * g.share_intra * x - terms.phi).exp());
    let mut others = 0.0;
    for k in 0..config.group_count() {
        if k != m && terms.q[k] != 0.0 {
            others +=
                terms.q[k] * (1.0 - (-b * t_m * g.share_inter * x - terms.cap_phi[k]).exp());
        }
    }
    own + others
}

/// `g_m(x)`, the (scaled) slope of `G_-m`; strictly decreasing with
/// `g_m(+inf) = -1`.
pub fn g_slope(config: &ValidConfig, terms: &ReducedGainTerms, m: usize, x: f64) -> f64 {
    let b = config.coop_area();
    let t_m = config.request_densities()[m];
    let g = &config.groups()[m];
    let a_intra = b * t_m * g.share_intra;
    let a_inter = b * t_m * g.share_inter;
    (1.0 + a_intra * (1.0 - x)) * (-a_intra * x - terms.phi).exp()
        + b * terms.i_m * g.share_inter * (-a_inter * x).exp()
        - 1.0
}

/// Exact maximizer of `G_-m` over `[0, 1]` given the other groups' strategy.
///
/// Clamp cases first: `g_m(0) <= 0` pins 0, `g_m(1) >= 0` pins 1. Otherwise
/// the sign change brackets the unique root and bisection closes in,
/// continuing past the width target until the residual slope is below
/// 1e-12.
pub fn inner_solve(config: &ValidConfig, probs: &[f64], m: usize, options: &AgoConfig) -> f64 {
    if config.request_densities()[m] == 0.0 {
        return 0.0;
    }
    let terms = reduced_gain_terms(config, probs, m);
    if g_slope(config, &terms, m, 0.0) <= 0.0 {
        return 0.0;
    }
    if g_slope(config, &terms, m, 1.0) >= 0.0 {
        return 1.0;
    }

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut mid = 0.5;
    for _ in 0..options.bisection_max_steps {
        mid = 0.5 * (lo + hi);
        let g = g_slope(config, &terms, m, mid);
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= options.bisection_tolerance && g.abs() <= 1e-12 {
            break;
        }
    }
    mid
}

fn initial_strategy(config: &ValidConfig, init: &InitMode) -> Result<Vec<f64>, AgoError> {
    let m_count = config.group_count();
    match init {
        InitMode::Zeros => Ok(vec![0.0; m_count]),
        InitMode::GroupIndependentInter => {
            Ok(group_independent_relaxation(config, |g| g.share_inter)?)
        }
        InitMode::GroupIndependentIntra => {
            Ok(group_independent_relaxation(config, |g| g.share_intra)?)
        }
        InitMode::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..m_count).map(|_| rng.random::<f64>()).collect())
        }
        InitMode::Explicit(strategy) => {
            if strategy.len() != m_count {
                return Err(AgoError::ExplicitInitLength {
                    expected: m_count,
                    got: strategy.len(),
                });
            }
            Ok(strategy.probs().to_vec())
        }
    }
}

fn group_independent_relaxation(
    config: &ValidConfig,
    rho_of: impl Fn(&GroupParams) -> f64,
) -> Result<Vec<f64>, AnalyticError> {
    let groups = config
        .groups()
        .iter()
        .map(|g| {
            let rho = rho_of(g);
            GroupParams::new(g.density, g.request_prob, rho, rho)
        })
        .collect();
    let relaxed = SystemConfig::new(config.d2d_radius(), groups)
        .validate()
        .expect("relaxation of a valid config stays valid");
    Ok(analytic::solve_group_independent(&relaxed)?
        .strategy
        .probs()
        .to_vec())
}

/// Runs the sweep: for each outer iteration, each group in input order is
/// set to its exact 1-D optimum given the current strategy, and the gain is
/// recorded after every update. Stops at `max_iterations`, or earlier once a
/// whole iteration improves the gain by less than 1e-12.
pub fn ago_solve(
    config: &ValidConfig,
    options: &AgoConfig,
) -> Result<(PushStrategy, AgoTrace), AgoError> {
    let m_count = config.group_count();
    let mut probs = initial_strategy(config, &options.init)?;
    let mut previous_gain = config.total_gain(&probs);

    let mut gains: Vec<Vec<f64>> = Vec::new();
    let mut iterations_run = 0;
    for _ in 0..options.max_iterations {
        let mut iteration_gains = Vec::with_capacity(m_count);
        for m in 0..m_count {
            probs[m] = inner_solve(config, &probs, m, options);
            iteration_gains.push(config.total_gain(&probs));
        }
        let end_gain = *iteration_gains.last().unwrap_or(&previous_gain);
        gains.push(iteration_gains);
        iterations_run += 1;
        if end_gain - previous_gain < 1e-12 {
            break;
        }
        previous_gain = end_gain;
    }

    let strategy = PushStrategy::new(probs).expect("inner solve stays inside [0, 1]");
    let trace = AgoTrace {
        gains,
        final_strategy: strategy.clone(),
        iterations_run,
    };
    Ok((strategy, trace))
}
