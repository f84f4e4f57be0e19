//! Parameter sweeps: solve the instance at evenly spaced values of one
//! parameter and emit one CSV row per point.

use crate::error::CliError;
use d2dpush_core::analytic::solve_group_independent;
use d2dpush_core::model::{PushStrategy, SystemConfig, ValidConfig};
use d2dpush_core::{ago_solve, AgoConfig};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupField {
    Density,
    RequestProb,
    ShareIntra,
    ShareInter,
    /// Sets `share_intra` and `share_inter` together, keeping the instance
    /// group-independent while its sharing probability moves.
    Share,
}

impl GroupField {
    fn name(self) -> &'static str {
        match self {
            GroupField::Density => "density",
            GroupField::RequestProb => "request_prob",
            GroupField::ShareIntra => "share_intra",
            GroupField::ShareInter => "share_inter",
            GroupField::Share => "share",
        }
    }
}

/// A dotted/indexed path naming the swept parameter: `d2d_radius` or
/// `groups[i].<field>` with field one of `density`, `request_prob`,
/// `share_intra`, `share_inter`, `share`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    D2dRadius,
    Group { index: usize, field: GroupField },
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s == "d2d_radius" {
            return Ok(SweepParam::D2dRadius);
        }
        let bad = || {
            CliError::Usage(format!(
                "unknown sweep parameter {s:?}; expected d2d_radius or groups[i].<field> \
                 with field in density|request_prob|share_intra|share_inter|share"
            ))
        };
        let rest = s.strip_prefix("groups[").ok_or_else(bad)?;
        let (index_text, rest) = rest.split_once(']').ok_or_else(bad)?;
        let index: usize = index_text.parse().map_err(|_| bad())?;
        let field_name = rest.strip_prefix('.').ok_or_else(bad)?;
        let field = match field_name {
            "density" => GroupField::Density,
            "request_prob" => GroupField::RequestProb,
            "share_intra" => GroupField::ShareIntra,
            "share_inter" => GroupField::ShareInter,
            "share" => GroupField::Share,
            _ => return Err(bad()),
        };
        Ok(SweepParam::Group { index, field })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParam::D2dRadius => write!(f, "d2d_radius"),
            SweepParam::Group { index, field } => write!(f, "groups[{index}].{}", field.name()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub enum SweepSolver {
    Analytic,
    Ago(AgoConfig),
}

impl SweepSolver {
    fn label(&self) -> &'static str {
        match self {
            SweepSolver::Analytic => "analytic",
            SweepSolver::Ago(_) => "ago",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOutcome {
    pub rows: usize,
    pub error_rows: usize,
}

fn apply(base: &SystemConfig, param: SweepParam, value: f64) -> Result<SystemConfig, CliError> {
    let mut config = base.clone();
    match param {
        SweepParam::D2dRadius => config.d2d_radius = value,
        SweepParam::Group { index, field } => {
            let group = config.groups.get_mut(index).ok_or_else(|| {
                CliError::Usage(format!(
                    "sweep parameter references groups[{index}] but the instance has {} groups",
                    base.groups.len()
                ))
            })?;
            match field {
                GroupField::Density => group.density = value,
                GroupField::RequestProb => group.request_prob = value,
                GroupField::ShareIntra => group.share_intra = value,
                GroupField::ShareInter => group.share_inter = value,
                GroupField::Share => {
                    group.share_intra = value;
                    group.share_inter = value;
                }
            }
        }
    }
    Ok(config)
}

fn solve_point(
    config: &ValidConfig,
    solver: &SweepSolver,
) -> Result<(PushStrategy, String), CliError> {
    match solver {
        SweepSolver::Analytic => {
            let sol = solve_group_independent(config)?;
            Ok((sol.strategy, sol.case_tag.as_str().to_string()))
        }
        SweepSolver::Ago(options) => {
            let (strategy, trace) = ago_solve(config, options)?;
            Ok((strategy, format!("iters={}", trace.iterations_run)))
        }
    }
}

/// Runs the sweep and writes `param,value,solver,c_*,p_*,gain,meta,error`
/// rows. Solver failures become rows with the `error` column set; the sweep
/// continues.
pub fn run_sweep(
    base: &SystemConfig,
    spec: &SweepSpec,
    solver: &SweepSolver,
    allow_unusual_sharing: bool,
    out: &mut dyn Write,
) -> Result<RunOutcome, CliError> {
    if spec.steps < 2 {
        return Err(CliError::Usage("sweep needs at least 2 steps".into()));
    }
    if spec.from > spec.to || !spec.from.is_finite() || !spec.to.is_finite() {
        return Err(CliError::Usage(format!(
            "sweep range must be finite with from <= to, got [{}, {}]",
            spec.from, spec.to
        )));
    }
    if let SweepParam::Group { index, .. } = spec.param {
        if index >= base.groups.len() {
            return Err(CliError::Usage(format!(
                "sweep parameter references groups[{index}] but the instance has {} groups",
                base.groups.len()
            )));
        }
    }

    let m_count = base.groups.len();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["param".to_string(), "value".to_string(), "solver".to_string()];
    header.extend((1..=m_count).map(|m| format!("c_{m}")));
    header.extend((1..=m_count).map(|m| format!("p_{m}")));
    header.extend(["gain".to_string(), "meta".to_string(), "error".to_string()]);
    w.write_record(&header)?;

    let mut error_rows = 0;
    for i in 0..spec.steps {
        let value = spec.from + (spec.to - spec.from) * i as f64 / (spec.steps - 1) as f64;
        let mut record = vec![spec.param.to_string(), format!("{value}"), solver.label().to_string()];

        let outcome = apply(base, spec.param, value).and_then(|raw| {
            let config = raw.validate_with(allow_unusual_sharing)?;
            let (strategy, meta) = solve_point(&config, solver)?;
            let breakdown = config.offloading_gain(&strategy)?;
            Ok((strategy, breakdown, meta))
        });
        match outcome {
            Ok((strategy, breakdown, meta)) => {
                record.extend(strategy.probs().iter().map(|c| format!("{c}")));
                record.extend(breakdown.per_group_success.iter().map(|p| format!("{p}")));
                record.push(format!("{}", breakdown.total_gain));
                record.push(meta);
                record.push(String::new());
            }
            Err(e) => {
                record.extend(std::iter::repeat_n(String::new(), 2 * m_count + 2));
                record.push(e.to_string());
                error_rows += 1;
            }
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(RunOutcome {
        rows: spec.steps,
        error_rows,
    })
}
