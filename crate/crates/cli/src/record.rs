//! Result-file schemas.
//!
//! Every driver writes a self-contained JSON record: the full resolved
//! configuration, the deterministic metrics it produced, and an
//! environment stamp. Wall-clock data lives in a separate `metadata`
//! block so that records from identical configurations compare equal
//! after stripping it.

use std::path::Path;

use serde::{Deserialize, Serialize};

/// Schema version written into every record.
pub const SCHEMA_VERSION: u32 = 1;

/// Fully resolved solve configuration; feeding it back through the solve
/// driver reproduces the record's metrics bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub problem: String,
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub n: usize,
    pub m: usize,
    pub levels: usize,
    pub sigma: f64,
    pub nodes: String,
    pub seed: u64,
    pub resolution: usize,
}

/// Deterministic solve outputs.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub rmse: f64,
    #[serde(with = "extended_float")]
    pub condition_number: f64,
}

/// Build provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvStamp {
    pub seed: u64,
    pub version: String,
}

/// Volatile, run-specific data excluded from reproducibility comparisons.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Metadata {
    /// Seconds since the Unix epoch at record creation.
    pub timestamp: u64,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

/// One solve run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub config: SolveConfig,
    pub metrics: Metrics,
    pub environment: EnvStamp,
    pub metadata: Metadata,
}

/// Optimizer outputs for a pso-tune run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsoOutcome {
    pub eps_opt: f64,
    pub rho_opt: f64,
    pub best_mae: f64,
    pub iterations_used: usize,
    pub history: Vec<f64>,
}

/// Resolved pso-tune configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoTuneConfig {
    pub problem: String,
    pub kernel: String,
    pub n: usize,
    pub m: usize,
    pub levels: usize,
    pub sigma: f64,
    pub nodes: String,
    pub seed: u64,
    pub resolution: usize,
    pub swarm: usize,
    pub iters: usize,
    pub eps_bounds: (f64, f64),
    pub rho_bounds: (f64, f64),
}

/// One parameter-tuning run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsoRecord {
    pub schema_version: u32,
    pub config: PsoTuneConfig,
    pub result: PsoOutcome,
    pub environment: EnvStamp,
    pub metadata: PsoMetadata,
}

/// Volatile block of a pso-tune record.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PsoMetadata {
    pub timestamp: u64,
    pub tune_seconds: f64,
}

/// Environment stamp for the current build.
pub fn env_stamp(seed: u64) -> EnvStamp {
    EnvStamp { seed, version: env!("CARGO_PKG_VERSION").to_string() }
}

/// Seconds since the Unix epoch, zero if the clock is misbehaving.
pub fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes a record as pretty JSON.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    std::fs::write(path, body + "\n")?;
    Ok(())
}

/// Condition numbers of nearly flat kernels overflow to infinity, which
/// plain JSON has no literal for; non-finite values round-trip as strings.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(v),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record(kappa: f64) -> RunRecord {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            config: SolveConfig {
                problem: "ex1-log-interval".to_string(),
                kernel: "GA+CU".to_string(),
                epsilon: Some(0.43),
                rho: Some(3.96e-10),
                n: 10,
                m: 10,
                levels: 15,
                sigma: 0.01,
                nodes: "equispaced".to_string(),
                seed: 0,
                resolution: 200,
            },
            metrics: Metrics { mae: 2.9e-6, rmse: 8.9e-7, condition_number: kappa },
            environment: env_stamp(0),
            metadata: Metadata { timestamp: 1, assembly_seconds: 0.1, solve_seconds: 0.01 },
        }
    }

    #[test]
    fn records_round_trip_through_json() {
        for kappa in [1.34e14, f64::INFINITY] {
            let record = sample_record(kappa);
            let text = serde_json::to_string_pretty(&record).unwrap();
            let back: RunRecord = serde_json::from_str(&text).unwrap();
            assert_eq!(back.config, record.config);
            assert_eq!(back.metrics.mae.to_bits(), record.metrics.mae.to_bits());
            assert_eq!(
                back.metrics.condition_number.to_bits(),
                record.metrics.condition_number.to_bits()
            );
        }
    }

    #[test]
    fn infinite_condition_numbers_serialize_as_strings() {
        let text = serde_json::to_string(&sample_record(f64::INFINITY)).unwrap();
        assert!(text.contains("\"condition_number\":\"inf\""));
    }
}
