//! The JSON chain-spec file:
//!
//! ```text
//! {"ambient": "Z", "prefix": [2, 3, 5], "cycle": [2, 3, 5], "name": "primorial"}
//! {"ambient": {"alpha": {"2": 2}, "torsion": {"3": [1, 2]}}, "prefix": [4]}
//! ```
//!
//! `ambient` defaults to `"Z"`, `prefix` to `[]`; no `cycle` means prefix-only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ambient::AmbientGroup;
use crate::chain::ValuationChain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AmbientSpec {
    Named(String),
    Product {
        #[serde(default)]
        alpha: BTreeMap<String, u32>,
        #[serde(default)]
        torsion: BTreeMap<String, Vec<u32>>,
    },
}

impl Default for AmbientSpec {
    fn default() -> Self {
        AmbientSpec::Named("Z".into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpecFile {
    #[serde(default)]
    pub ambient: AmbientSpec,
    #[serde(default)]
    pub prefix: Vec<i128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<i128>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl ChainSpecFile {
    /// Parse and validate; errors carry the line of the offending field.
    pub fn parse(text: &str) -> Result<ChainSpecFile> {
        let spec: ChainSpecFile = serde_json::from_str(text).map_err(|e| Error::ChainSpec {
            line: e.line(),
            field: guess_field(&e.to_string()),
            msg: e.to_string(),
        })?;
        spec.to_chain().map_err(|e| match e {
            Error::ChainSpec { field, msg, .. } => Error::ChainSpec {
                line: line_of(text, &field),
                field,
                msg,
            },
            other => other,
        })?;
        Ok(spec)
    }

    pub fn from_chain(chain: &ValuationChain) -> ChainSpecFile {
        let ambient = match chain.ambient() {
            AmbientGroup::Integers => AmbientSpec::default(),
            AmbientGroup::Product { alpha, torsion } => AmbientSpec::Product {
                alpha: alpha.iter().map(|(p, a)| (p.to_string(), *a)).collect(),
                torsion: torsion.iter().map(|(p, e)| (p.to_string(), e.clone())).collect(),
            },
        };
        ChainSpecFile {
            ambient,
            prefix: chain.prefix().to_vec(),
            cycle: chain.cycle().map(<[i128]>::to_vec),
            name: None,
        }
    }

    pub fn ambient_group(&self) -> Result<AmbientGroup> {
        match &self.ambient {
            AmbientSpec::Named(n) if n == "Z" => Ok(AmbientGroup::Integers),
            AmbientSpec::Named(n) => Err(field_error(
                "ambient",
                format!("unknown ambient `{n}`, expected \"Z\" or an object"),
            )),
            AmbientSpec::Product { alpha, torsion } => {
                let alpha = alpha
                    .iter()
                    .map(|(p, a)| Ok((prime_key(p)?, *a)))
                    .collect::<Result<_>>()?;
                let torsion = torsion
                    .iter()
                    .map(|(p, e)| Ok((prime_key(p)?, e.clone())))
                    .collect::<Result<_>>()?;
                AmbientGroup::product(alpha, torsion).map_err(|e| field_error("ambient", e.to_string()))
            }
        }
    }

    pub fn to_chain(&self) -> Result<ValuationChain> {
        let ambient = self.ambient_group()?;
        if let Some(m) = self.prefix.iter().find(|&&m| m < 2) {
            return Err(field_error("prefix", format!("multiplier {m} is below 2")));
        }
        if let Some(c) = &self.cycle {
            if c.is_empty() {
                return Err(field_error("cycle", "must be nonempty when present".into()));
            }
            if let Some(m) = c.iter().find(|&&m| m < 2) {
                return Err(field_error("cycle", format!("multiplier {m} is below 2")));
            }
        }
        ValuationChain::new(ambient, self.prefix.clone(), self.cycle.clone())
    }
}

fn prime_key(p: &str) -> Result<i128> {
    p.trim()
        .parse()
        .map_err(|_| field_error("ambient", format!("key `{p}` is not an integer")))
}

fn field_error(field: &str, msg: String) -> Error {
    Error::ChainSpec {
        line: 0,
        field: field.into(),
        msg,
    }
}

fn line_of(text: &str, field: &str) -> usize {
    let needle = format!("\"{field}\"");
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

fn guess_field(msg: &str) -> String {
    for f in ["ambient", "prefix", "cycle", "name"] {
        if msg.contains(&format!("`{f}`")) {
            return f.into();
        }
    }
    if msg.contains("untagged enum AmbientSpec") {
        return "ambient".into();
    }
    "-".into()
}
