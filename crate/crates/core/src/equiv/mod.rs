//! Bisimulation games and distance estimates.
//!
//! Configuration-level checks play the bisimulation game on the product of
//! the two transition systems; process-level checks run it for every state
//! of a seeded test suite. Refutations are exact. Confirmations hold for the
//! register and suite that were tested.

mod distance;
mod expansion;
mod game;
mod suite;

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ast::AstError;
use crate::qnum::{DiamondOptions, QnumError, TOL_CHOI};
use crate::sos::{FreshPolicy, SosError};

pub use distance::{dsb_estimate, dsrb_estimate, DistanceEstimate, Probe};
pub use expansion::expansion_rhs;
pub use suite::{
    bisim_config, bisim_process, lambda_bisim_config, lambda_bisim_process, reduction_bisim, state_suite,
    SuiteState,
};

#[derive(Debug, Clone, Error)]
pub enum EquivError {
    #[error(transparent)]
    Sos(#[from] SosError),
    #[error(transparent)]
    Qnum(#[from] QnumError),
    #[error(transparent)]
    Ast(#[from] AstError),
    #[error("registers differ: {0}")]
    RegisterMismatch(String),
    #[error("the state suite is empty")]
    EmptySuite,
    #[error("{0}")]
    Setup(String),
}

#[derive(Clone, Debug)]
pub struct GameOptions {
    /// Rounds of the game explored before a branch counts as undecided.
    pub depth: usize,
    pub max_pairs: usize,
    /// Choi-matrix tolerance for channel equality.
    pub tol: f64,
    /// `Some(λ)` plays the approximate game.
    pub lambda: Option<f64>,
    /// Added to λ when comparing estimated diamond distances.
    pub slack: f64,
    pub diamond: DiamondOptions,
    /// Merge operation runs in every configuration before playing.
    pub nf_mode: bool,
    /// Reserved fresh variables per type in the register.
    pub fresh: usize,
    pub random_product: usize,
    pub random_entangled: usize,
    pub seed: u64,
    /// Input targets used when replaying witnesses.
    pub policy: FreshPolicy,
    /// Width at which distance bisection stops.
    pub distance_tol: f64,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions {
            depth: 64,
            max_pairs: 200_000,
            tol: TOL_CHOI,
            lambda: None,
            slack: 1e-6,
            diamond: DiamondOptions::default(),
            nf_mode: false,
            fresh: 1,
            random_product: 25,
            random_entangled: 10,
            seed: 0x5eed,
            policy: FreshPolicy::default(),
            distance_tol: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Bisimilar,
    NotBisimilar,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Bisimilar => "bisimilar",
            Outcome::NotBisimilar => "not_bisimilar",
            Outcome::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// One move of a distinguishing play.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessStep {
    pub side: Side,
    pub action: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub result: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessStep>>,
    /// The suite state a refutation was found for.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    pub suite_size: usize,
    pub bounds_hit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undecided: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn is_bisimilar(&self) -> bool {
        self.result == Outcome::Bisimilar
    }

    pub fn is_refuted(&self) -> bool {
        self.result == Outcome::NotBisimilar
    }
}

/// `[lo, hi]`; `hi` may be infinite, serialized as `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    #[serde(serialize_with = "finite_or_inf")]
    pub hi: f64,
}

fn finite_or_inf<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str("inf")
    }
}
