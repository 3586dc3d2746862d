//! Self-contained certificate files and their replay.

use std::path::Path;

use cantor_waring::bounds::{check_conditions, profile, BoundsProfile, ConditionReport};
use cantor_waring::coverage::{enumerate_image, gap_report, CoverageSet, GapReport};
use cantor_waring::dust::DustCertificate;
use cantor_waring::padic::PadicCertificate;
use cantor_waring::powersum::{DecompositionCertificate, PowerSumProblem};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayStatus {
    Verified,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub set: CoverageSet,
    pub gaps: GapReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub profile: BoundsProfile,
    /// Total number of summands; the conditions are evaluated at k − k*.
    pub summands: u64,
    pub conditions: ConditionReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    Real(DecompositionCertificate),
    Dust(DustCertificate),
    Padic(PadicCertificate),
    Coverage(CoverageReport),
    Bounds(BoundsReport),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Real(_) => "real",
            Payload::Dust(_) => "dust",
            Payload::Padic(_) => "padic",
            Payload::Coverage(_) => "coverage",
            Payload::Bounds(_) => "bounds",
        }
    }

    /// Re-derive the claim from the payload alone.
    pub fn replay(&self, budget: u64) -> std::result::Result<(), String> {
        match self {
            Payload::Real(c) => c.replay().map(|_| ()).map_err(|e| e.to_string()),
            Payload::Dust(c) => c.replay().map(|_| ()).map_err(|e| e.to_string()),
            Payload::Padic(c) => {
                if c.verify() {
                    Ok(())
                } else {
                    Err(format!("sum is not congruent to the target mod p^{}", c.congruence_depth))
                }
            }
            Payload::Coverage(r) => {
                let s = &r.set;
                let prob = PowerSumProblem::new(s.params.clone(), s.k, s.m);
                let fresh = enumerate_image(&prob, s.n, budget).map_err(|e| e.to_string())?;
                if &fresh != s {
                    return Err("recomputed image differs from the recorded intervals".into());
                }
                if gap_report(&fresh) != r.gaps {
                    return Err("recomputed gaps differ from the recorded gaps".into());
                }
                Ok(())
            }
            Payload::Bounds(b) => {
                let p = profile(&b.profile.params, b.profile.m).map_err(|e| e.to_string())?;
                if p != b.profile {
                    return Err("recomputed profile differs".into());
                }
                let k = b.summands.checked_sub(p.k_star).ok_or("summand count below k*")?;
                if check_conditions(&p, k) != b.conditions {
                    return Err("recomputed conditions differ".into());
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema_version: String,
    #[serde(flatten)]
    pub payload: Payload,
    pub replay_status: ReplayStatus,
}

impl CertificateFile {
    /// Wrap a payload, recording whether it replays.
    pub fn new(payload: Payload, budget: u64) -> Self {
        let replay_status = match payload.replay(budget) {
            Ok(()) => ReplayStatus::Verified,
            Err(_) => ReplayStatus::Unverified,
        };
        Self { schema_version: SCHEMA_VERSION.to_string(), payload, replay_status }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Verification(format!("malformed JSON: {e}")))?;
        match v.get("schema_version").and_then(|s| s.as_str()) {
            Some(SCHEMA_VERSION) => {}
            Some(other) => return Err(CliError::Verification(format!("unknown schema_version {other:?}"))),
            None => return Err(CliError::Verification("missing schema_version".into())),
        }
        serde_json::from_value(v).map_err(|e| CliError::Verification(format!("malformed certificate: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Replay the payload; a file claiming `verified` that fails is an error,
    /// as is any payload that does not replay.
    pub fn verify(&self, budget: u64) -> Result<()> {
        self.payload.replay(budget).map_err(|e| {
            let claim = match self.replay_status {
                ReplayStatus::Verified => " (file claims verified)",
                ReplayStatus::Unverified => "",
            };
            CliError::Verification(format!("{} certificate: {e}{claim}", self.payload.kind()))
        })
    }
}
