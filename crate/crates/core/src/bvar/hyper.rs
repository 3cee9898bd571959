use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior family over (B, Σ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorFamily {
    /// Conjugate matrix-normal / inverse-Wishart.
    #[default]
    MnIw,
    FlatGaussian,
    FlatFlat,
}

impl fmt::Display for PriorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorFamily::MnIw => "mn_iw",
            PriorFamily::FlatGaussian => "flat_gaussian",
            PriorFamily::FlatFlat => "flat_flat",
        })
    }
}

/// Sims–Zha hyperparameter tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SzHyper {
    /// Lag order.
    pub p: usize,
    /// Overall tightness.
    pub lambda0: f64,
    /// Own-versus-cross lag tightness.
    pub lambda1: f64,
    /// Lag-decay exponent.
    pub lambda3: f64,
    /// Intercept tightness.
    pub lambda4: f64,
    /// Exogenous-coefficient tightness.
    pub lambda5: f64,
    /// Sum-of-coefficients dummy weight.
    pub mu5: f64,
    /// Initial-conditions dummy weight.
    pub mu6: f64,
    #[serde(default)]
    pub prior_family: PriorFamily,
}

impl Default for SzHyper {
    fn default() -> Self {
        SzHyper {
            p: 1,
            lambda0: 0.2,
            lambda1: 0.05,
            lambda3: 1.0,
            lambda4: 0.1,
            lambda5: 0.0,
            mu5: 1.0,
            mu6: 0.0,
            prior_family: PriorFamily::MnIw,
        }
    }
}

impl SzHyper {
    #[allow(clippy::too_many_arguments)]
    pub fn new(p: usize, lambda0: f64, lambda1: f64, lambda3: f64, lambda4: f64, lambda5: f64, mu5: f64, mu6: f64) -> Self {
        SzHyper { p, lambda0, lambda1, lambda3, lambda4, lambda5, mu5, mu6, prior_family: PriorFamily::MnIw }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::InvalidArgument("lag order p must be at least 1".into()));
        }
        let scalars = [
            ("lambda0", self.lambda0),
            ("lambda1", self.lambda1),
            ("lambda3", self.lambda3),
            ("lambda4", self.lambda4),
            ("lambda5", self.lambda5),
            ("mu5", self.mu5),
            ("mu6", self.mu6),
        ];
        for (name, v) in scalars {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
            if v < 0.0 {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative")));
            }
        }
        if self.lambda0 <= 0.0 {
            return Err(Error::InvalidArgument("lambda0 must be positive".into()));
        }
        Ok(())
    }

    /// The tuple as an array, in `(p, λ0, λ1, λ3, λ4, λ5, μ5, μ6)` order.
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.p as f64,
            self.lambda0,
            self.lambda1,
            self.lambda3,
            self.lambda4,
            self.lambda5,
            self.mu5,
            self.mu6,
        ]
    }

    /// Lexicographic order on the tuple, then on the family; used for
    /// deterministic tie-breaking.
    pub fn lex_cmp(&self, other: &SzHyper) -> Ordering {
        for (a, b) in self.as_array().iter().zip(other.as_array().iter()) {
            match a.total_cmp(b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.prior_family.cmp(&other.prior_family)
    }
}

impl fmt::Display for SzHyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={} l0={} l1={} l3={} l4={} l5={} mu5={} mu6={} ({})",
            self.p,
            self.lambda0,
            self.lambda1,
            self.lambda3,
            self.lambda4,
            self.lambda5,
            self.mu5,
            self.mu6,
            self.prior_family
        )
    }
}
