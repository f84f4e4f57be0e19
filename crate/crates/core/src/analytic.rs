//! Closed-form optimal pushing strategy for the group-independent sharing
//! case (`rho_m_i = rho_m_o` for every group).
//!
//! With a single sharing probability `rho_m` per group the gain factorises,
//!
//! `G = (sum_m t_m (1 - c_m)) * (1 - exp(-B sum_k t_k rho_k c_k))`,
//!
//! and the optimum has a rigid shape: sorted by ascending `rho` the strategy
//! is `[0, ..., 0, c_m, 1, ..., 1]` with at most one fractional entry — the
//! "watershed" group. Groups that share less than the watershed get nothing
//! pushed; groups that share more get everything.
//!
//! The watershed index is the unique sorted position `m` where both
//!
//! - `f1_m = 1 + B rho_m sum_{i<=m} t_i - exp(B sum_{j>m} t_j rho_j) > 0`
//! - `f0_m = exp(B sum_{j>=m} t_j rho_j) - B rho_m sum_{i<m} t_i - 1 > 0`
//!
//! hold, in which case its pushing probability has the closed form
//!
//! `c_m = (B rho_m S + 1 - W(exp(B R + B rho_m S + 1))) / (B rho_m t_m)`
//!
//! with `S = sum_{i<=m} t_i`, `R = sum_{j>m} t_j rho_j`, and `W` the
//! principal-branch Lambert-W function. If no position passes both tests the
//! optimum sits at a boundary `[0^z, 1^(M-z)]`.
//!
//! Groups with (nearly) equal `rho` make the optimum non-unique; they are
//! merged into a super-group (densities summed), solved, and all assigned
//! the super-group's probability, which attains the same maximal gain.

use crate::lambertw::lambert_w0_of_exp;
use crate::model::{rel_eq, PushStrategy, ValidConfig, SHARING_EQ_REL_TOL};
use thiserror::Error;

/// Strict-positivity tolerance for the watershed conditions. Knife-edge
/// instances fall deterministically to the boundary case; the two cases
/// coincide in gain there.
pub const CASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(
        "instance is not group-independent: group {group} has share_intra {intra} \
         but share_inter {inter}"
    )]
    NotGroupIndependent {
        group: usize,
        intra: f64,
        inter: f64,
    },
    #[error(
        "groups {a} and {b} have equal sharing probability {rho} (within tolerance); \
         this instance needs the merging solver"
    )]
    DuplicateSharing { a: usize, b: usize, rho: f64 },
    #[error("sorted index {index} out of range for {len} groups")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(
        "watershed preconditions violated at sorted index {index}: \
         f1 = {f1}, f0 = {f0}, t = {t}, rho = {rho}"
    )]
    WatershedPrecondition {
        index: usize,
        f1: f64,
        f0: f64,
        t: f64,
        rho: f64,
    },
    #[error("internal invariant violated: {details}")]
    Internal { details: String },
}

/// Which case of the closed form produced the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// `[0^z, 1^(M-z)]` for some split `z`; no fractional entry.
    Boundary,
    /// Exactly one sorted position is fractional.
    FractionalWatershed,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::Boundary => "boundary",
            CaseTag::FractionalWatershed => "fractional-watershed",
        }
    }
}

/// Solution of the group-independent problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSolution {
    /// Optimal pushing probabilities in the original group order (inert
    /// groups forced to zero).
    pub strategy: PushStrategy,
    /// Sorted position of the fractional group in the reduced instance, if
    /// the solution is fractional.
    pub watershed_index: Option<usize>,
    pub case_tag: CaseTag,
    /// `(f1, f0)` per sorted position of the reduced instance.
    pub diagnostics: Vec<(f64, f64)>,
    /// Active (non-inert) original group indices in ascending-`rho` order,
    /// before tie merging.
    pub sort_permutation: Vec<usize>,
    /// Original group indices covered by each sorted position of the reduced
    /// instance; an entry with two or more indices is a merged tie.
    pub merged_groups: Vec<Vec<usize>>,
}

fn check_index(len: usize, m: usize) -> Result<(), AnalyticError> {
    if m >= len {
        return Err(AnalyticError::IndexOutOfRange { index: m, len });
    }
    Ok(())
}

/// `f1_m` for groups sorted ascending by `rho` (`m` zero-based). Positive
/// means "pushing a little to group m beats pushing nothing to it".
pub fn f1(b: f64, t: &[f64], rho: &[f64], m: usize) -> Result<f64, AnalyticError> {
    check_index(t.len(), m)?;
    let prefix: f64 = t[..=m].iter().sum();
    let suffix: f64 = t[m + 1..]
        .iter()
        .zip(&rho[m + 1..])
        .map(|(t, r)| t * r)
        .sum();
    Ok(1.0 + b * rho[m] * prefix - (b * suffix).exp())
}

/// `f0_m` for groups sorted ascending by `rho` (`m` zero-based). Positive
/// means "holding some of group m back beats pushing all of it".
pub fn f0(b: f64, t: &[f64], rho: &[f64], m: usize) -> Result<f64, AnalyticError> {
    check_index(t.len(), m)?;
    let prefix: f64 = t[..m].iter().sum();
    let suffix: f64 = t[m..].iter().zip(&rho[m..]).map(|(t, r)| t * r).sum();
    Ok((b * suffix).exp() - b * rho[m] * prefix - 1.0)
}

/// Fractional pushing probability of the watershed group at sorted position
/// `m`. Requires `f1_m > 0`, `f0_m > 0`, `t_m > 0`, `rho_m > 0`; callers
/// classify cases first.
pub fn watershed_push_prob(b: f64, t: &[f64], rho: &[f64], m: usize) -> Result<f64, AnalyticError> {
    check_index(t.len(), m)?;
    let f1_m = f1(b, t, rho, m)?;
    let f0_m = f0(b, t, rho, m)?;
    if !(f1_m > 0.0 && f0_m > 0.0 && t[m] > 0.0 && rho[m] > 0.0) {
        return Err(AnalyticError::WatershedPrecondition {
            index: m,
            f1: f1_m,
            f0: f0_m,
            t: t[m],
            rho: rho[m],
        });
    }

    let s: f64 = t[..=m].iter().sum();
    let r: f64 = t[m + 1..]
        .iter()
        .zip(&rho[m + 1..])
        .map(|(t, r)| t * r)
        .sum();
    // The stationarity condition B rho_m (S - t_m c) + 1 = exp(B R + B t_m
    // rho_m c) solves to c via u e^u = exp(y); the exponent y grows linearly
    // in the instance size, so W is evaluated in log space.
    let y = b * r + b * rho[m] * s + 1.0;
    let u = lambert_w0_of_exp(y);
    let c = (b * rho[m] * s + 1.0 - u) / (b * rho[m] * t[m]);
    Ok(c.clamp(0.0, 1.0))
}

/// Absolute residual of the watershed stationarity equality at `c`:
/// `|B rho_m (S - t_m c) + 1 - exp(B R + B t_m rho_m c)|`.
pub fn watershed_kkt_residual(b: f64, t: &[f64], rho: &[f64], m: usize, c: f64) -> f64 {
    let s: f64 = t[..=m].iter().sum();
    let r: f64 = t[m + 1..]
        .iter()
        .zip(&rho[m + 1..])
        .map(|(t, r)| t * r)
        .sum();
    let lhs = b * rho[m] * (s - t[m] * c) + 1.0;
    let rhs = (b * r + b * t[m] * rho[m] * c).exp();
    (lhs - rhs).abs()
}

/// The factorised gain `(sum t (1-c)) (1 - exp(-B sum t rho c))`, valid when
/// every group shares in- and cross-group with the same probability.
pub fn group_independent_gain(b: f64, t: &[f64], rho: &[f64], probs: &[f64]) -> f64 {
    let requesters: f64 = t.iter().zip(probs).map(|(t, c)| t * (1.0 - c)).sum();
    let exponent: f64 = t
        .iter()
        .zip(rho)
        .zip(probs)
        .map(|((t, r), c)| t * r * c)
        .sum();
    requesters * (1.0 - (-b * exponent).exp())
}

/// Solution on a sorted, tie-free, inert-free instance.
struct SortedSolution {
    strategy: Vec<f64>,
    watershed: Option<usize>,
    case: CaseTag,
    diagnostics: Vec<(f64, f64)>,
}

fn solve_sorted(b: f64, t: &[f64], rho: &[f64]) -> Result<SortedSolution, AnalyticError> {
    let m_count = t.len();
    let mut diagnostics = Vec::with_capacity(m_count);
    let mut fractional = Vec::new();
    for m in 0..m_count {
        let f1_m = f1(b, t, rho, m)?;
        let f0_m = f0(b, t, rho, m)?;
        diagnostics.push((f1_m, f0_m));
        if f1_m > CASE_TOL && f0_m > CASE_TOL {
            fractional.push(m);
        }
    }

    if fractional.len() > 1 {
        return Err(AnalyticError::Internal {
            details: format!(
                "multiple watershed candidates {fractional:?} with diagnostics {diagnostics:?}"
            ),
        });
    }

    if let Some(&m) = fractional.first() {
        let c = watershed_push_prob(b, t, rho, m)?;
        let mut strategy = vec![0.0; m_count];
        strategy[m] = c;
        for v in &mut strategy[m + 1..] {
            *v = 1.0;
        }
        return Ok(SortedSolution {
            strategy,
            watershed: Some(m),
            case: CaseTag::FractionalWatershed,
            diagnostics,
        });
    }

    // Boundary case: [0^z, 1^(M-z)] where group z-1 fails f1 and group z
    // fails f0. Scanning z from M down and replacing only on a strictly
    // greater gain makes ties resolve to the lexicographically smallest
    // strategy, the same rule the grid-search oracle uses.
    let mut best: Option<(usize, f64)> = None;
    for z in (0..=m_count).rev() {
        let low_ok = z == 0 || diagnostics[z - 1].0 <= CASE_TOL;
        let high_ok = z == m_count || diagnostics[z].1 <= CASE_TOL;
        if !(low_ok && high_ok) {
            continue;
        }
        let mut probs = vec![0.0; m_count];
        for v in &mut probs[z..] {
            *v = 1.0;
        }
        let gain = group_independent_gain(b, t, rho, &probs);
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((z, gain));
        }
    }

    let Some((z, _)) = best else {
        return Err(AnalyticError::Internal {
            details: format!("no watershed and no boundary split; diagnostics {diagnostics:?}"),
        });
    };
    let mut strategy = vec![0.0; m_count];
    for v in &mut strategy[z..] {
        *v = 1.0;
    }
    Ok(SortedSolution {
        strategy,
        watershed: None,
        case: CaseTag::Boundary,
        diagnostics,
    })
}

fn check_group_independent(config: &ValidConfig) -> Result<(), AnalyticError> {
    for (m, g) in config.groups().iter().enumerate() {
        if !rel_eq(g.share_intra, g.share_inter, SHARING_EQ_REL_TOL) {
            return Err(AnalyticError::NotGroupIndependent {
                group: m,
                intra: g.share_intra,
                inter: g.share_inter,
            });
        }
    }
    Ok(())
}

/// Active (non-inert) original group indices in ascending-`rho` order.
/// Equal-`rho` groups keep their input order so results are deterministic.
fn active_sorted(config: &ValidConfig) -> Vec<usize> {
    let mut active: Vec<usize> = (0..config.group_count())
        .filter(|&m| !config.is_inert(m))
        .collect();
    active.sort_by(|&a, &b| {
        config.groups()[a]
            .share_intra
            .partial_cmp(&config.groups()[b].share_intra)
            .expect("validated sharing probabilities are not NaN")
            .then(a.cmp(&b))
    });
    active
}

fn expand(
    config: &ValidConfig,
    clusters: &[Vec<usize>],
    sorted: SortedSolution,
    sort_permutation: Vec<usize>,
) -> AnalyticSolution {
    let mut probs = vec![0.0; config.group_count()];
    for (pos, members) in clusters.iter().enumerate() {
        for &orig in members {
            probs[orig] = sorted.strategy[pos];
        }
    }
    AnalyticSolution {
        strategy: PushStrategy::new(probs).expect("solver probabilities lie in [0, 1]"),
        watershed_index: sorted.watershed,
        case_tag: sorted.case,
        diagnostics: sorted.diagnostics,
        sort_permutation,
        merged_groups: clusters.to_vec(),
    }
}

/// Closed-form solve for a group-independent instance whose active groups
/// have pairwise-distinct sharing probabilities. Inert groups are kept at
/// zero; ties (within tolerance) are an error — use
/// [`solve_group_independent`] for those.
pub fn solve_nonuniform(config: &ValidConfig) -> Result<AnalyticSolution, AnalyticError> {
    check_group_independent(config)?;
    let active = active_sorted(config);
    for pair in active.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (ra, rb) = (
            config.groups()[a].share_intra,
            config.groups()[b].share_intra,
        );
        if rel_eq(ra, rb, SHARING_EQ_REL_TOL) {
            return Err(AnalyticError::DuplicateSharing { a, b, rho: ra });
        }
    }

    let t: Vec<f64> = active.iter().map(|&m| config.request_densities()[m]).collect();
    let rho: Vec<f64> = active.iter().map(|&m| config.groups()[m].share_intra).collect();
    let sorted = solve_sorted(config.coop_area(), &t, &rho)?;
    let clusters: Vec<Vec<usize>> = active.iter().map(|&m| vec![m]).collect();
    Ok(expand(config, &clusters, sorted, active))
}

/// Closed-form solve for any group-independent instance. Equal-`rho` groups
/// are merged into a super-group with the summed request density; after
/// solving the reduced instance every member receives the super-group's
/// probability, which attains the same gain.
pub fn solve_group_independent(config: &ValidConfig) -> Result<AnalyticSolution, AnalyticError> {
    check_group_independent(config)?;
    let active = active_sorted(config);

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &orig in &active {
        let rho = config.groups()[orig].share_intra;
        match clusters.last_mut() {
            Some(cluster)
                if rel_eq(
                    config.groups()[cluster[0]].share_intra,
                    rho,
                    SHARING_EQ_REL_TOL,
                ) =>
            {
                cluster.push(orig);
            }
            _ => clusters.push(vec![orig]),
        }
    }

    let t: Vec<f64> = clusters
        .iter()
        .map(|c| c.iter().map(|&m| config.request_densities()[m]).sum())
        .collect();
    let rho: Vec<f64> = clusters
        .iter()
        .map(|c| config.groups()[c[0]].share_intra)
        .collect();
    let sorted = solve_sorted(config.coop_area(), &t, &rho)?;
    Ok(expand(config, &clusters, sorted, active))
}
