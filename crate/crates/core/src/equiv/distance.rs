use serde::Serialize;

use super::suite::{over_suite, setup};
use super::{EquivError, GameOptions, Interval, Outcome};
use crate::ast::{Env, Process};
use crate::parse::StateDecl;
use crate::reduce::normal_form_unfolding;
use crate::sos::OpRegistry;

/// One bisection probe.
#[derive(Clone, Debug, Serialize)]
pub struct Probe {
    pub lambda: f64,
    pub outcome: Outcome,
}

impl Probe {
    pub fn accepted(&self) -> bool {
        self.outcome == Outcome::Bisimilar
    }
}

/// Bracket on a bisimulation distance. `hi` is the least tested λ at which
/// the game was won on every suite state, `lo` the greatest at which it was
/// not; `hi` is infinite when even λ = 1 is rejected.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceEstimate {
    #[serde(flatten)]
    pub interval: Interval,
    /// Set when the bracket bounds a reduction distance from above only.
    pub upper_bound: bool,
    pub probes: Vec<Probe>,
    pub suite_size: usize,
    pub bounds_hit: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl DistanceEstimate {
    pub fn lo(&self) -> f64 {
        self.interval.lo
    }

    pub fn hi(&self) -> f64 {
        self.interval.hi
    }

    /// Every probe above an accepted λ was accepted too.
    pub fn is_monotone(&self) -> bool {
        self.probes
            .iter()
            .filter(|a| a.accepted())
            .all(|a| self.probes.iter().all(|b| b.lambda <= a.lambda || b.accepted()))
    }
}

fn estimate(p: &Process, q: &Process, env: &Env, states: &[&StateDecl], opts: &GameOptions) -> Result<DistanceEstimate, EquivError> {
    let suite = setup(p, q, env, states, opts)?;
    let reg = OpRegistry::new(opts.tol);
    let mut probes = Vec::new();
    let mut bounds_hit = false;
    let mut probe = |lambda: f64| -> Result<bool, EquivError> {
        let mut o = opts.clone();
        o.lambda = Some(lambda);
        let v = over_suite(p, q, env, &suite, &o, &reg)?;
        bounds_hit |= v.bounds_hit;
        probes.push(Probe {
            lambda,
            outcome: v.result,
        });
        Ok(v.is_bisimilar())
    };
    let (lo, hi) = if probe(0.0)? {
        (0.0, 0.0)
    } else if !probe(1.0)? {
        (1.0, f64::INFINITY)
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > opts.distance_tol {
            let mid = 0.5 * (lo + hi);
            if probe(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    };
    let mut notes = Vec::new();
    if probes.iter().any(|p| p.outcome == Outcome::Unknown) {
        notes.push("some probes were undecided within the search bounds and counted as rejections".into());
    }
    if opts.random_product + opts.random_entangled + states.len() > 0 {
        notes.push(format!("acceptance checked over {} states", suite.len()));
    }
    Ok(DistanceEstimate {
        interval: Interval { lo, hi },
        upper_bound: false,
        probes,
        suite_size: suite.len(),
        bounds_hit,
        notes,
    })
}

/// Bisection estimate of the strong bisimulation distance.
pub fn dsb_estimate(
    p: &Process,
    q: &Process,
    env: &Env,
    states: &[&StateDecl],
    opts: &GameOptions,
) -> Result<DistanceEstimate, EquivError> {
    let mut o = opts.clone();
    o.nf_mode = false;
    estimate(p, q, env, states, &o)
}

/// The strong bisimulation distance of the normal forms, which bounds the
/// reduction distance from above.
pub fn dsrb_estimate(
    p: &Process,
    q: &Process,
    env: &Env,
    states: &[&StateDecl],
    opts: &GameOptions,
) -> Result<DistanceEstimate, EquivError> {
    let mut o = opts.clone();
    o.nf_mode = true;
    let mut e = estimate(&normal_form_unfolding(p, env)?, &normal_form_unfolding(q, env)?, env, states, &o)?;
    e.upper_bound = true;
    Ok(e)
}
