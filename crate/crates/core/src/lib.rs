//! Optimal content pushing for D2D-assisted offloading.
//!
//! A base station wants one piece of content spread over the cell while
//! serving as few downloads as possible itself. It pushes the content to a
//! random fraction `c_m` of each user group; users that want the content but
//! were not pushed fetch it from nearby holders willing to share. This crate
//! computes the per-group pushing probabilities that maximize the offloaded
//! traffic per unit area, given each group's density, request probability,
//! and in-/cross-group sharing probabilities.
//!
//! - [`model`]: instance types and the exact gain formulas.
//! - [`analytic`]: closed-form optimum when in- and cross-group sharing
//!   coincide (watershed structure, Lambert-W).
//! - [`ago`]: block-coordinate solver for the general case.
//! - [`oracle`]: exhaustive lattice search, the ground-truth baseline.
//! - [`mcsim`]: Poisson point process simulator validating the model.
//! - [`lambertw`]: principal-branch Lambert-W, including an overflow-safe
//!   `W(exp(y))`.

pub mod ago;
pub mod analytic;
pub mod lambertw;
pub mod mcsim;
pub mod model;
pub mod oracle;

pub use ago::{ago_solve, AgoConfig, AgoError, AgoTrace, InitMode};
pub use analytic::{
    solve_group_independent, solve_nonuniform, AnalyticError, AnalyticSolution, CaseTag,
};
pub use lambertw::{lambert_w0, lambert_w0_of_exp, LambertError};
pub use mcsim::{run_dissemination, SimResult, SimSpec};
pub use model::{
    ConfigError, ConfigErrors, GainBreakdown, GroupParams, ModelError, PushStrategy, SystemConfig,
    ValidConfig,
};
pub use oracle::{grid_search, GridSearchResult, GridSpec, OracleError};
