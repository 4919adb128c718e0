use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::game::{Game, GameResult};
use super::{EquivError, GameOptions, Outcome, Verdict};
use crate::ast::{Env, Process};
use crate::parse::{build_register, StateDecl};
use crate::qnum::random::{random_product_state, random_pure_state};
use crate::qnum::{QState, Register};
use crate::reduce::normal_form_unfolding;
use crate::sos::{Configuration, OpRegistry};

/// A named initial state of a test suite.
#[derive(Clone, Debug)]
pub struct SuiteState {
    pub name: String,
    pub state: QState,
}

/// The declared states followed by seeded random product states and random
/// pure states over the whole register.
pub fn state_suite(register: &Register, declared: &[&StateDecl], opts: &GameOptions) -> Result<Vec<SuiteState>, EquivError> {
    let mut out = Vec::new();
    for d in declared {
        out.push(SuiteState {
            name: d.name.clone(),
            state: d.instantiate(register)?,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for k in 0..opts.random_product {
        out.push(SuiteState {
            name: format!("product{k}"),
            state: random_product_state(register, &mut rng),
        });
    }
    for k in 0..opts.random_entangled {
        out.push(SuiteState {
            name: format!("entangled{k}"),
            state: random_pure_state(register, &mut rng)?,
        });
    }
    Ok(out)
}

fn play(c1: Configuration, c2: Configuration, env: &Env, opts: &GameOptions, reg: &OpRegistry) -> Result<GameResult, EquivError> {
    if c1.state.register() != c2.state.register() {
        return Err(EquivError::RegisterMismatch(format!(
            "{} vs {}",
            c1.state.register(),
            c2.state.register()
        )));
    }
    Game::new(env, opts, reg).run(c1, c2)
}

fn verdict(r: GameResult, opts: &GameOptions, suite_size: usize) -> Verdict {
    Verdict {
        result: match r.decided {
            Some(true) => Outcome::Bisimilar,
            Some(false) => Outcome::NotBisimilar,
            None => Outcome::Unknown,
        },
        lambda: opts.lambda,
        interval: None,
        witness: r.witness,
        state: None,
        suite_size,
        bounds_hit: r.bounds_hit,
        undecided: r.undecided,
        notes: Vec::new(),
    }
}

/// Strong bisimilarity of two configurations over the same register.
pub fn bisim_config(c1: &Configuration, c2: &Configuration, env: &Env, opts: &GameOptions) -> Result<Verdict, EquivError> {
    let reg = OpRegistry::new(opts.tol);
    let mut o = opts.clone();
    o.lambda = None;
    Ok(verdict(play(c1.clone(), c2.clone(), env, &o, &reg)?, &o, 1))
}

/// The approximate game: operations may be answered within diamond
/// distance `lambda`, and configurations with the same process and states
/// within trace distance `lambda` are related outright.
pub fn lambda_bisim_config(
    c1: &Configuration,
    c2: &Configuration,
    lambda: f64,
    env: &Env,
    opts: &GameOptions,
) -> Result<Verdict, EquivError> {
    let reg = OpRegistry::new(opts.tol);
    let mut o = opts.clone();
    o.lambda = Some(lambda);
    Ok(verdict(play(c1.clone(), c2.clone(), env, &o, &reg)?, &o, 1))
}

/// Runs the game from `<p, s>` and `<q, s>` for every suite state `s`.
pub(crate) fn over_suite(
    p: &Process,
    q: &Process,
    env: &Env,
    suite: &[SuiteState],
    opts: &GameOptions,
    reg: &OpRegistry,
) -> Result<Verdict, EquivError> {
    if suite.is_empty() {
        return Err(EquivError::EmptySuite);
    }
    let results: Vec<Result<GameResult, EquivError>> = suite
        .par_iter()
        .map(|s| {
            play(
                Configuration::new(p.clone(), s.state.clone()),
                Configuration::new(q.clone(), s.state.clone()),
                env,
                opts,
                reg,
            )
        })
        .collect();
    let mut bounds_hit = false;
    let mut undecided = None;
    for (s, r) in suite.iter().zip(results) {
        let r = r?;
        bounds_hit |= r.bounds_hit;
        match r.decided {
            Some(false) => {
                let mut v = verdict(r, opts, suite.len());
                v.state = Some(s.name.clone());
                return Ok(v);
            }
            None if undecided.is_none() => undecided = Some((s.name.clone(), r.undecided)),
            _ => {}
        }
    }
    let mut v = Verdict {
        result: Outcome::Bisimilar,
        lambda: opts.lambda,
        interval: None,
        witness: None,
        state: None,
        suite_size: suite.len(),
        bounds_hit,
        undecided: None,
        notes: Vec::new(),
    };
    match undecided {
        Some((name, what)) => {
            v.result = Outcome::Unknown;
            v.state = Some(name);
            v.undecided = what;
        }
        None => v.notes.push(format!("holds over {} tested states", suite.len())),
    }
    Ok(v)
}

/// Register and suite for checking `p` against `q`.
pub(crate) fn setup(
    p: &Process,
    q: &Process,
    env: &Env,
    states: &[&StateDecl],
    opts: &GameOptions,
) -> Result<Vec<SuiteState>, EquivError> {
    let register = build_register(&[p, q], states, env, opts.fresh).map_err(EquivError::Setup)?;
    state_suite(&register, states, opts)
}

/// Process bisimilarity, semi-decided over the state suite.
pub fn bisim_process(
    p: &Process,
    q: &Process,
    env: &Env,
    states: &[&StateDecl],
    opts: &GameOptions,
) -> Result<Verdict, EquivError> {
    let suite = setup(p, q, env, states, opts)?;
    let mut o = opts.clone();
    o.lambda = None;
    over_suite(p, q, env, &suite, &o, &OpRegistry::new(opts.tol))
}

pub fn lambda_bisim_process(
    p: &Process,
    q: &Process,
    lambda: f64,
    env: &Env,
    states: &[&StateDecl],
    opts: &GameOptions,
) -> Result<Verdict, EquivError> {
    let suite = setup(p, q, env, states, opts)?;
    let mut o = opts.clone();
    o.lambda = Some(lambda);
    over_suite(p, q, env, &suite, &o, &OpRegistry::new(opts.tol))
}

/// Reduction bisimilarity via normal forms: positive answers are sound; a
/// negative answer only says the normal forms are not bisimilar.
pub fn reduction_bisim(
    p: &Process,
    q: &Process,
    env: &Env,
    states: &[&StateDecl],
    opts: &GameOptions,
) -> Result<Verdict, EquivError> {
    let (np, nq) = (normal_form_unfolding(p, env)?, normal_form_unfolding(q, env)?);
    let mut o = opts.clone();
    o.nf_mode = true;
    let mut v = bisim_process(&np, &nq, env, states, &o)?;
    if v.is_refuted() {
        v.notes
            .push("normal forms are not bisimilar; the transitive closure is not searched further".into());
    }
    Ok(v)
}
