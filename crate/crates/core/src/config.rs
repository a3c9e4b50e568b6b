//! JSON network configuration.
//!
//! ```json
//! {
//!   "n": 3,
//!   "arcs": [[1, 2], [2, 3]],
//!   "buffers": ["inf", 0, 0],
//!   "services": [{"type": "exponential", "mean": 1.0}, ...]
//! }
//! ```
//!
//! Nodes are 1-based. Instead of `services`, a network-level
//! `"correlation": {"type": "correlated-exponential", "a": 0.5}` block may be given.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Buffer, Network, NetworkSpec};
use crate::stochastic::{Distribution, ServiceModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub n: usize,
    pub arcs: Vec<[usize; 2]>,
    pub buffers: Vec<BufferEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub services: Option<Vec<Distribution>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Correlation>,
}

/// `"inf"` or a nonnegative integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BufferEntry {
    Count(i64),
    Word(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Correlation {
    CorrelatedExponential { a: f64 },
}

impl NetworkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn to_spec(&self) -> Result<NetworkSpec> {
        let arcs = self
            .arcs
            .iter()
            .map(|&[i, j]| {
                if i == 0 || j == 0 {
                    Err(Error::Config(format!("arc [{i}, {j}]: nodes are numbered from 1")))
                } else {
                    Ok((i - 1, j - 1))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let buffers = self
            .buffers
            .iter()
            .enumerate()
            .map(|(idx, b)| match b {
                BufferEntry::Word(w) if w == "inf" => Ok(Buffer::Saturated),
                BufferEntry::Word(w) => Err(Error::Config(format!(
                    "buffers[{idx}]: expected \"inf\" or an integer, got \"{w}\""
                ))),
                BufferEntry::Count(r) if *r < 0 => Err(Error::Config(format!(
                    "buffers[{idx}]: initial buffer content must be >= 0, got {r}"
                ))),
                BufferEntry::Count(r) => u32::try_from(*r)
                    .map(Buffer::Finite)
                    .map_err(|_| Error::Config(format!("buffers[{idx}]: {r} is too large"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let service = match (&self.services, self.correlation) {
            (Some(s), None) => ServiceModel::Independent(s.clone()),
            (None, Some(Correlation::CorrelatedExponential { a })) => {
                ServiceModel::CorrelatedExponential { nodes: self.n, a }
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either \"services\" or \"correlation\", not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config("missing \"services\" or \"correlation\"".into()))
            }
        };
        Ok(NetworkSpec {
            nodes: self.n,
            arcs,
            buffers,
            service,
        })
    }

    /// Canonical configuration for a spec.
    pub fn from_spec(spec: &NetworkSpec) -> Self {
        let (services, correlation) = match &spec.service {
            ServiceModel::Independent(d) => (Some(d.clone()), None),
            ServiceModel::CorrelatedExponential { a, .. } => {
                (None, Some(Correlation::CorrelatedExponential { a: *a }))
            }
        };
        NetworkConfig {
            n: spec.nodes,
            arcs: spec.arcs.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            buffers: spec
                .buffers
                .iter()
                .map(|b| match b {
                    Buffer::Saturated => BufferEntry::Word("inf".into()),
                    Buffer::Finite(r) => BufferEntry::Count(i64::from(*r)),
                })
                .collect(),
            services,
            correlation,
        }
    }
}

/// Parses and validates a JSON network description.
pub fn parse_network(text: &str) -> Result<Network> {
    NetworkConfig::from_json(text)?.to_spec()?.validate()
}

pub fn load_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_network(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
