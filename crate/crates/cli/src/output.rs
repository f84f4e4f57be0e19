//! CSV emission for the single-instance commands.
//!
//! Every command writes a fixed header and one row per group, with
//! whole-instance values (total gain, solver metadata) repeated on each row
//! so the files stay trivially machine-readable. Numbers use Rust's default
//! float formatting: locale-independent, round-trip exact.

use crate::error::CliError;
use d2dpush_core::analytic::AnalyticSolution;
use d2dpush_core::mcsim::SimResult;
use d2dpush_core::model::{PushStrategy, ValidConfig};
use d2dpush_core::oracle::GridSearchResult;
use d2dpush_core::AgoTrace;
use std::io::Write;

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn write_gain_csv(
    config: &ValidConfig,
    strategy: &PushStrategy,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let breakdown = config.offloading_gain(strategy)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "group",
        "push_prob",
        "ue_a_density",
        "ue_t_density",
        "success_prob",
        "group_gain",
        "total_gain",
    ])?;
    for m in 0..config.group_count() {
        w.write_record([
            (m + 1).to_string(),
            fmt(strategy.probs()[m]),
            fmt(breakdown.ue_a_density[m]),
            fmt(breakdown.ue_t_density[m]),
            fmt(breakdown.per_group_success[m]),
            fmt(breakdown.per_group_gain[m]),
            fmt(breakdown.total_gain),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_analytic_csv(
    config: &ValidConfig,
    solution: &AnalyticSolution,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let breakdown = config.offloading_gain(&solution.strategy)?;
    // Sorted-position diagnostics of each original group's reduced slot.
    let mut diagnostics = vec![None; config.group_count()];
    for (pos, members) in solution.merged_groups.iter().enumerate() {
        for &orig in members {
            diagnostics[orig] = Some(solution.diagnostics[pos]);
        }
    }
    let watershed_group = solution
        .watershed_index
        .map(|m| (solution.merged_groups[m][0] + 1).to_string())
        .unwrap_or_default();

    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "group",
        "push_prob",
        "success_prob",
        "group_gain",
        "total_gain",
        "case",
        "watershed_group",
        "f1",
        "f0",
    ])?;
    for (m, diag) in diagnostics.iter().enumerate() {
        let (f1, f0) = match diag {
            Some(d) => (fmt(d.0), fmt(d.1)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            (m + 1).to_string(),
            fmt(solution.strategy.probs()[m]),
            fmt(breakdown.per_group_success[m]),
            fmt(breakdown.per_group_gain[m]),
            fmt(breakdown.total_gain),
            solution.case_tag.as_str().to_string(),
            watershed_group.clone(),
            f1,
            f0,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ago_csv(
    config: &ValidConfig,
    strategy: &PushStrategy,
    trace: &AgoTrace,
    init_label: &str,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let breakdown = config.offloading_gain(strategy)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "group",
        "push_prob",
        "success_prob",
        "group_gain",
        "total_gain",
        "iterations",
        "init",
    ])?;
    for m in 0..config.group_count() {
        w.write_record([
            (m + 1).to_string(),
            fmt(strategy.probs()[m]),
            fmt(breakdown.per_group_success[m]),
            fmt(breakdown.per_group_gain[m]),
            fmt(breakdown.total_gain),
            trace.iterations_run.to_string(),
            init_label.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Gain after every single group update, for plotting convergence.
pub fn write_trace_csv(trace: &AgoTrace, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "group", "gain"])?;
    for (i, iteration) in trace.gains.iter().enumerate() {
        for (m, gain) in iteration.iter().enumerate() {
            w.write_record([(i + 1).to_string(), (m + 1).to_string(), fmt(*gain)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_oracle_csv(
    config: &ValidConfig,
    result: &GridSearchResult,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let breakdown = config.offloading_gain(&result.strategy)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "group",
        "push_prob",
        "success_prob",
        "group_gain",
        "total_gain",
        "eps_grid",
        "evaluations",
    ])?;
    for m in 0..config.group_count() {
        w.write_record([
            (m + 1).to_string(),
            fmt(result.strategy.probs()[m]),
            fmt(breakdown.per_group_success[m]),
            fmt(breakdown.per_group_gain[m]),
            fmt(breakdown.total_gain),
            fmt(result.eps_grid),
            result.evaluations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_simulate_csv(
    config: &ValidConfig,
    strategy: &PushStrategy,
    result: &SimResult,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let breakdown = config.offloading_gain(strategy)?;
    let trials = result.counts.len() as f64;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "group",
        "success_est",
        "success_se",
        "success_model",
        "ue_a_mean",
        "ue_r_mean",
        "ue_t_mean",
        "ue_n_mean",
        "gain_est",
        "gain_se",
        "gain_model",
    ])?;
    for m in 0..config.group_count() {
        let (est, se) = match result.est_success[m] {
            Some(e) => (fmt(e.mean), fmt(e.std_error)),
            None => (String::new(), String::new()),
        };
        let mean_of = |f: &dyn Fn(&d2dpush_core::mcsim::GroupTally) -> u64| {
            result.counts.iter().map(|t| f(&t.groups[m]) as f64).sum::<f64>() / trials
        };
        w.write_record([
            (m + 1).to_string(),
            est,
            se,
            fmt(breakdown.per_group_success[m]),
            fmt(mean_of(&|g| g.ue_a)),
            fmt(mean_of(&|g| g.ue_r)),
            fmt(mean_of(&|g| g.ue_t)),
            fmt(mean_of(&|g| g.ue_n)),
            fmt(result.est_gain_density.mean),
            fmt(result.est_gain_density.std_error),
            fmt(breakdown.total_gain),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Raw per-trial role tallies, for debugging the simulator.
pub fn write_tallies_csv(result: &SimResult, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "trial",
        "group",
        "ue_a",
        "ue_r",
        "ue_t",
        "ue_n",
        "ue_t_inset",
        "successes",
    ])?;
    for (trial, tally) in result.counts.iter().enumerate() {
        for (m, g) in tally.groups.iter().enumerate() {
            w.write_record([
                (trial + 1).to_string(),
                (m + 1).to_string(),
                g.ue_a.to_string(),
                g.ue_r.to_string(),
                g.ue_t.to_string(),
                g.ue_n.to_string(),
                g.ue_t_inset.to_string(),
                g.successes.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
