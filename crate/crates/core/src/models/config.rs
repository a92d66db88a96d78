use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Mlp,
    Gcn,
    Sage,
    Gat,
    Cheb,
}

impl Architecture {
    pub const ALL: [Architecture; 5] = [
        Architecture::Mlp,
        Architecture::Gcn,
        Architecture::Sage,
        Architecture::Gat,
        Architecture::Cheb,
    ];

    pub const GNNS: [Architecture; 4] = [
        Architecture::Gcn,
        Architecture::Sage,
        Architecture::Gat,
        Architecture::Cheb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Mlp => "mlp",
            Architecture::Gcn => "gcn",
            Architecture::Sage => "sage",
            Architecture::Gat => "gat",
            Architecture::Cheb => "cheb",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config("model.architecture", format!("unknown architecture `{s}`")))
    }
}

/// Graph layer (`hidden` units) → dense (`fc` units) → scalar head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub hidden: usize,
    pub fc: usize,
    /// Number of Chebyshev polynomial terms.
    pub cheb_order: usize,
    pub heads: usize,
    pub leaky_slope: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            architecture: Architecture::Gcn,
            hidden: 512,
            fc: 128,
            cheb_order: 3,
            heads: 1,
            leaky_slope: 0.2,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn new(architecture: Architecture) -> Self {
        ModelConfig {
            architecture,
            ..ModelConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::config("model.hidden", "must be at least 1"));
        }
        if self.fc == 0 {
            return Err(Error::config("model.fc", "must be at least 1"));
        }
        if self.cheb_order == 0 {
            return Err(Error::config("model.cheb_order", "must be at least 1"));
        }
        if self.heads == 0 {
            return Err(Error::config("model.heads", "must be at least 1"));
        }
        if self.architecture == Architecture::Gat && !self.hidden.is_multiple_of(self.heads) {
            return Err(Error::config(
                "model.heads",
                format!("hidden width {} is not divisible by {} heads", self.hidden, self.heads),
            ));
        }
        if !self.leaky_slope.is_finite() {
            return Err(Error::config("model.leaky_slope", "must be finite"));
        }
        Ok(())
    }
}
