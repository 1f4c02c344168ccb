//! Split manifest: everything needed to audit or replay a partitioning run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corr::{CorrelationKind, PcorOptions};
use crate::dataset::PartyPartition;
use crate::error::{Error, Result};
use crate::split::BrkgaConfig;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Importance,
    Correlation,
}

impl std::fmt::Display for SplitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitMode::Importance => write!(f, "importance"),
            SplitMode::Correlation => write!(f, "correlation"),
        }
    }
}

/// Mode-specific parameters. Everything that influenced the assignment is
/// recorded so that source + seed + params replays to the identical split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SplitParams {
    Importance {
        alphas: Vec<f64>,
        guard_nonempty: bool,
    },
    Correlation {
        beta: f64,
        counts: Vec<usize>,
        brkga: BrkgaConfig,
        pcor: PcorOptions,
    },
}

impl SplitParams {
    pub fn num_parties(&self) -> usize {
        match self {
            SplitParams::Importance { alphas, .. } => alphas.len(),
            SplitParams::Correlation { counts, .. } => counts.len(),
        }
    }
}

/// Optimizer outcome for correlation-mode splits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AchievedMetrics {
    pub icor_achieved: f64,
    pub icor_min: f64,
    pub icor_max: f64,
    pub target: f64,
    pub optimizer_gap: f64,
}

/// Provenance of the input table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub path: String,
    pub rows: usize,
    pub cols: usize,
}

/// Manifest fields the caller must supply; `materialize_parties` derives the
/// rest from the dataset and partition.
#[derive(Debug, Clone)]
pub struct ManifestHead {
    pub seed: u64,
    pub mode: SplitMode,
    pub params: SplitParams,
    pub corr_kind: Option<CorrelationKind>,
    pub achieved: Option<AchievedMetrics>,
    pub source_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub version: u32,
    pub seed: u64,
    pub mode: SplitMode,
    pub params: SplitParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corr_kind: Option<CorrelationKind>,
    pub assignment: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved: Option<AchievedMetrics>,
    pub source: SourceInfo,
}

impl SplitManifest {
    pub fn num_parties(&self) -> usize {
        self.params.num_parties()
    }

    pub fn partition(&self) -> Result<PartyPartition> {
        PartyPartition::new(self.assignment.clone(), self.num_parties())
    }

    /// Serialized form; field order is fixed by the struct, so the bytes are
    /// deterministic for equal contents.
    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(self)
            .map_err(|e| Error::InvalidParam(format!("manifest serialization failed: {e}")))?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            row: e.line(),
            column: e.column().to_string(),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_manifest() -> SplitManifest {
        SplitManifest {
            version: MANIFEST_VERSION,
            seed: 42,
            mode: SplitMode::Correlation,
            params: SplitParams::Correlation {
                beta: 0.25,
                counts: vec![3, 3],
                brkga: BrkgaConfig {
                    seed: 42,
                    ..BrkgaConfig::default()
                },
                pcor: PcorOptions::default(),
            },
            corr_kind: Some(CorrelationKind::Spearman),
            assignment: vec![0, 1, 0, 1, 0, 1],
            achieved: Some(AchievedMetrics {
                icor_achieved: -0.5,
                icor_min: -1.0,
                icor_max: 0.0,
                target: -0.5,
                optimizer_gap: 0.0,
            }),
            source: SourceInfo {
                path: "data.csv".into(),
                rows: 10,
                cols: 6,
            },
        }
    }

    #[test]
    fn round_trips_through_json() {
        let m = sample_manifest();
        let bytes = m.to_json_bytes().unwrap();
        let back: SplitManifest = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn serialization_is_byte_deterministic() {
        let a = sample_manifest().to_json_bytes().unwrap();
        let b = sample_manifest().to_json_bytes().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn importance_params_round_trip() {
        let m = SplitManifest {
            version: MANIFEST_VERSION,
            seed: 7,
            mode: SplitMode::Importance,
            params: SplitParams::Importance {
                alphas: vec![1.0, 2.0, 7.0],
                guard_nonempty: true,
            },
            corr_kind: None,
            assignment: vec![2, 2, 1, 0, 2],
            achieved: None,
            source: SourceInfo {
                path: "x.svm".into(),
                rows: 4,
                cols: 5,
            },
        };
        let back: SplitManifest = serde_json::from_slice(&m.to_json_bytes().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.num_parties(), 3);
        assert_eq!(back.partition().unwrap().party_columns(2), vec![0, 1, 4]);
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let m = sample_manifest();
        m.save(&path).unwrap();
        assert_eq!(SplitManifest::load(&path).unwrap(), m);
    }
}
