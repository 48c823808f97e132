use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PllStrategy {
    /// Mask only the scored token.
    Original,
    /// Mask the scored token and every later token of the same word.
    WithinWordL2r,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Causal,
    Masked { pll_strategy: PllStrategy },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Full,
    AnswerOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScoringConfig {
    #[serde(flatten)]
    pub mode: Mode,
    pub reduction: Reduction,
    pub scope: Scope,
}

impl ScoringConfig {
    pub const fn causal() -> Self {
        ScoringConfig {
            mode: Mode::Causal,
            reduction: Reduction::Sum,
            scope: Scope::Full,
        }
    }

    pub const fn masked(pll_strategy: PllStrategy) -> Self {
        ScoringConfig {
            mode: Mode::Masked { pll_strategy },
            reduction: Reduction::Sum,
            scope: Scope::Full,
        }
    }

    pub const fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }

    pub const fn with_scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }

    pub fn pll_strategy(&self) -> Option<PllStrategy> {
        match self.mode {
            Mode::Causal => None,
            Mode::Masked { pll_strategy } => Some(pll_strategy),
        }
    }
}

impl fmt::Display for ScoringConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            Mode::Causal => write!(f, "causal")?,
            Mode::Masked { pll_strategy } => write!(f, "masked/{}", pll_strategy.as_str())?,
        }
        write!(f, "/{}/{}", self.reduction.as_str(), self.scope.as_str())
    }
}

macro_rules! cli_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$variant => $name),+ }
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self, Error> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($ty), " {:?}"), other
                    ))),
                }
            }
        }
    };
}

cli_enum!(PllStrategy { Original => "original", WithinWordL2r => "within-word-l2r" });
cli_enum!(Reduction { Sum => "sum", Mean => "mean" });
cli_enum!(Scope { Full => "full", AnswerOnly => "answer-only" });
