//! JSON documents for charts, scheme configuration, shares, rosters and
//! reconstruction reports.
//!
//! Every big integer is written as a base-10 string so values survive any
//! JSON reader, whatever its native integer width.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combiner::{PacketVerdict, ReconstructionReport};
use crate::dealer::{SharePacket, SharePoint};
use crate::field::{parse_decimal, FieldError, Modulus};
use crate::orgchart::{ChartError, Edge, OrgChart, Participant};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("{0}")]
    Invalid(String),
}

fn emit<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents always serialize");
    text.push('\n');
    text
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub parent_login: u64,
    pub child_login: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDocument {
    pub height: u32,
    pub participants: Vec<Participant>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeDocument>,
}

impl ChartDocument {
    pub fn from_chart(chart: &OrgChart) -> Self {
        ChartDocument {
            height: chart.height(),
            participants: chart.participants().to_vec(),
            edges: chart
                .edges()
                .iter()
                .map(|e| EdgeDocument {
                    parent_login: e.parent,
                    child_login: e.child,
                })
                .collect(),
        }
    }

    pub fn to_chart(&self) -> Result<OrgChart, FormatError> {
        Ok(OrgChart::new(
            self.height,
            self.participants.iter().copied(),
            self.edges.iter().map(|e| Edge {
                parent: e.parent_login,
                child: e.child_login,
            }),
        )?)
    }
}

pub fn parse_chart(text: &str) -> Result<OrgChart, FormatError> {
    serde_json::from_str::<ChartDocument>(text)?.to_chart()
}

pub fn emit_chart(chart: &OrgChart) -> String {
    emit(&ChartDocument::from_chart(chart))
}

/// Where the dealer's randomness comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum RngMode {
    /// Operating-system CSPRNG.
    #[default]
    Secure,
    /// ChaCha20 from a fixed seed. Reproducible, so never for real secrets.
    Seeded { seed: u64 },
}

fn default_secret_bits() -> u64 {
    crate::dealer::DEFAULT_SECRET_BITS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub q: String,
    pub h: u32,
    #[serde(default = "default_secret_bits")]
    pub secret_bits: u64,
    #[serde(default)]
    pub rng: RngMode,
}

/// Validated scheme parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeConfig {
    pub modulus: Modulus,
    pub height: u32,
    pub secret_bits: u64,
    pub rng: RngMode,
}

impl SchemeConfig {
    pub fn new(
        modulus: Modulus,
        height: u32,
        secret_bits: u64,
        rng: RngMode,
    ) -> Result<Self, FormatError> {
        if height < 2 {
            return Err(ChartError::HeightTooSmall(height).into());
        }
        if BigUint::one() << secret_bits > *modulus.value() {
            return Err(FormatError::Invalid(format!(
                "2^{secret_bits} exceeds the modulus {modulus}"
            )));
        }
        Ok(SchemeConfig {
            modulus,
            height,
            secret_bits,
            rng,
        })
    }

    pub fn from_document(doc: &ConfigDocument) -> Result<Self, FormatError> {
        Self::new(
            Modulus::from_decimal(&doc.q)?,
            doc.h,
            doc.secret_bits,
            doc.rng,
        )
    }

    pub fn to_document(&self) -> ConfigDocument {
        ConfigDocument {
            q: self.modulus.to_string(),
            h: self.height,
            secret_bits: self.secret_bits,
            rng: self.rng,
        }
    }
}

pub fn parse_config(text: &str) -> Result<SchemeConfig, FormatError> {
    SchemeConfig::from_document(&serde_json::from_str(text)?)
}

pub fn emit_config(config: &SchemeConfig) -> String {
    emit(&config.to_document())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDocument {
    pub x: String,
    pub y: String,
}

/// One participant's share file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareDocument {
    pub scheme_id: String,
    pub q: String,
    pub h: u32,
    pub login: u64,
    pub level: u32,
    pub points: Vec<PointDocument>,
}

impl ShareDocument {
    pub fn from_packet(scheme_id: &str, height: u32, packet: &SharePacket) -> Self {
        ShareDocument {
            scheme_id: scheme_id.to_string(),
            q: packet.modulus().to_string(),
            h: height,
            login: packet.login(),
            level: packet.level(),
            points: packet
                .points()
                .iter()
                .map(|p| PointDocument {
                    x: p.x.to_string(),
                    y: p.y.to_string(),
                })
                .collect(),
        }
    }

    pub fn modulus(&self) -> Result<Modulus, FormatError> {
        Ok(Modulus::from_decimal(&self.q)?)
    }

    /// Decodes the packet under the document's own modulus.
    pub fn to_packet(&self) -> Result<SharePacket, FormatError> {
        self.to_packet_under(&self.modulus()?)
    }

    /// Decodes the packet reusing an already validated modulus with the same value.
    pub fn to_packet_under(&self, modulus: &Modulus) -> Result<SharePacket, FormatError> {
        if parse_decimal(&self.q)? != *modulus.value() {
            return Err(FieldError::ModulusMismatch.into());
        }
        let points = self
            .points
            .iter()
            .map(|p| {
                Ok(SharePoint {
                    x: modulus.parse_element(&p.x)?,
                    y: modulus.parse_element(&p.y)?,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        SharePacket::new(self.login, self.level, points)
            .map_err(|e| FormatError::Invalid(e.to_string()))
    }
}

pub fn parse_share(text: &str) -> Result<ShareDocument, FormatError> {
    let doc: ShareDocument = serde_json::from_str(text)?;
    doc.to_packet()?;
    Ok(doc)
}

pub fn emit_share(doc: &ShareDocument) -> String {
    emit(doc)
}

/// Public half of every share: who holds what level under which scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosterDocument {
    pub scheme_id: String,
    pub q: String,
    pub h: u32,
    pub participants: Vec<Participant>,
}

pub fn parse_roster(text: &str) -> Result<RosterDocument, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn emit_roster(doc: &RosterDocument) -> String {
    emit(doc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationDocument {
    pub condition: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticDocument {
    pub login: u64,
    pub level: u32,
    pub passed: bool,
    pub violations: Vec<ViolationDocument>,
}

impl DiagnosticDocument {
    pub fn from_verdict(v: &PacketVerdict) -> Self {
        DiagnosticDocument {
            login: v.login,
            level: v.level,
            passed: v.passed(),
            violations: v
                .violations
                .iter()
                .map(|violation| ViolationDocument {
                    condition: violation.condition().to_string(),
                    message: violation.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret_binary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<String>>,
    pub detail: String,
    pub diagnostics: Vec<DiagnosticDocument>,
}

impl ReportDocument {
    pub fn from_report(report: &ReconstructionReport) -> Self {
        ReportDocument {
            outcome: report.outcome.as_str().to_string(),
            secret: report.secret.as_ref().map(BigUint::to_string),
            secret_binary: report.secret.as_ref().map(|k| format!("{k:b}")),
            coefficients: report
                .coefficients
                .as_ref()
                .map(|cs| cs.iter().map(BigUint::to_string).collect()),
            detail: report.detail.clone(),
            diagnostics: report
                .diagnostics
                .iter()
                .map(DiagnosticDocument::from_verdict)
                .collect(),
        }
    }
}

pub fn parse_report(text: &str) -> Result<ReportDocument, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn emit_report(doc: &ReportDocument) -> String {
    emit(doc)
}

/// Lowercase hex of raw bytes, used for scheme identifiers.
pub fn hex_id(bytes: &[u8]) -> String {
    bytes
        .iter()
        .fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}
