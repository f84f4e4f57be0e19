//! Instance ingestion and generation.
//!
//! Instances travel as one JSON document:
//!
//! ```json
//! {
//!   "d2d_radius": 5.0,
//!   "groups": [
//!     { "density": 0.05, "request_prob": 0.2, "share_intra": 0.4, "share_inter": 0.3 }
//!   ]
//! }
//! ```

use crate::error::CliError;
use d2dpush_core::model::{GroupParams, PushStrategy, SystemConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// Parses the JSON instance document. Unknown fields are rejected and
/// missing fields are named in the error.
pub fn parse_instance(text: &str) -> Result<SystemConfig, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn load_instance(path: &Path) -> Result<SystemConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_instance(&text)?)
}

pub fn serialize_instance(config: &SystemConfig) -> String {
    serde_json::to_string_pretty(config).expect("instance serialization is infallible")
}

/// Parses a comma-separated pushing strategy, e.g. `0.3,1,0`.
pub fn parse_strategy(text: &str) -> Result<PushStrategy, CliError> {
    let probs = text
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad strategy entry {tok:?}: {e}")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(PushStrategy::new(probs)?)
}

/// Random instance with request probabilities uniform on [0,1], cross-group
/// sharing uniform on [0,0.3], and in-group sharing uniform on [0.7,1] — the
/// distribution used for the solver-vs-oracle comparisons.
pub fn random_instance(rng: &mut ChaCha8Rng, groups: usize, density: f64, radius: f64) -> SystemConfig {
    let groups = (0..groups)
        .map(|_| {
            GroupParams::new(
                density,
                rng.random::<f64>(),
                0.7 + 0.3 * rng.random::<f64>(),
                0.3 * rng.random::<f64>(),
            )
        })
        .collect();
    SystemConfig::new(radius, groups)
}

/// Random group-independent instance (`share_intra == share_inter`). Sharing
/// probabilities are kept pairwise at least `0.05` apart: near-ties make the
/// optimum non-unique, which is its own scenario rather than a perturbation
/// of this one.
pub fn random_group_independent_instance(
    rng: &mut ChaCha8Rng,
    groups: usize,
    density: f64,
    radius: f64,
) -> SystemConfig {
    let mut rhos: Vec<f64> = Vec::with_capacity(groups);
    while rhos.len() < groups {
        let rho = 0.05 + 0.95 * rng.random::<f64>();
        if rhos.iter().all(|r| (r - rho).abs() >= 0.05) {
            rhos.push(rho);
        }
    }
    let groups = rhos
        .into_iter()
        .map(|rho| GroupParams::new(density, 0.02 + 0.98 * rng.random::<f64>(), rho, rho))
        .collect();
    SystemConfig::new(radius, groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn parses_minimal_document() {
        let cfg = parse_instance(
            r#"{"d2d_radius": 5.0, "groups": [
                {"density": 0.05, "request_prob": 0.2, "share_intra": 0.4, "share_inter": 0.3}
            ]}"#,
        )
        .unwrap();
        assert_eq!(cfg.groups.len(), 1);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn missing_radius_is_named() {
        let err = parse_instance(r#"{"groups": []}"#).unwrap_err();
        assert!(err.to_string().contains("d2d_radius"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse_instance(r#"{"d2d_radius": 5.0, "groups": [], "extra": 1}"#).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn baseline_document_round_trips() {
        let text = r#"{
            "d2d_radius": 5.0,
            "groups": [
                {"density": 0.05, "request_prob": 0.2, "share_intra": 0.4, "share_inter": 0.3},
                {"density": 0.05, "request_prob": 0.6, "share_intra": 0.5, "share_inter": 0.1}
            ]
        }"#;
        let cfg = parse_instance(text).unwrap();
        let cfg2 = parse_instance(&serialize_instance(&cfg)).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn strategy_parsing() {
        let s = parse_strategy("0.3, 1, 0").unwrap();
        assert_eq!(s.probs(), &[0.3, 1.0, 0.0]);
        assert!(parse_strategy("0.3,oops").is_err());
        assert!(parse_strategy("1.5").is_err());
    }

    #[test]
    fn random_instances_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 1..=4 {
            assert!(random_instance(&mut rng, m, 0.05, 5.0).validate().is_ok());
            let gi = random_group_independent_instance(&mut rng, m, 0.05, 5.0);
            let valid = gi.validate().unwrap();
            for g in valid.groups() {
                assert_eq!(g.share_intra, g.share_inter);
            }
        }
    }
}
