#![allow(dead_code, unused_imports)]

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qccs_core::ast::{
    alpha_eq, apply_unchecked, bv_action, canonicalize, free_vars, fv_action, Action, Process, Subst,
};
use qccs_core::equiv::{bisim_process, GameOptions, Verdict};
use qccs_core::gen::Gen;
use qccs_core::names::{Chan, Var};
use qccs_core::parse::{build_register, StateDecl};
use qccs_core::qnum::random::random_state;
use qccs_core::qnum::{apply_superop, QState};
use qccs_core::reduce::{normal_form, reduction_steps};
use qccs_core::sos::{enabled, Configuration, FreshPolicy, Transition};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A suite small enough for loops over hundreds of instances.
pub fn quick() -> GameOptions {
    GameOptions {
        random_product: 4,
        random_entangled: 2,
        ..GameOptions::default()
    }
}

pub fn s0(g: &Gen) -> &StateDecl {
    g.file.state("s0").unwrap()
}

pub fn bisim(g: &Gen, p: &Process, q: &Process, opts: &GameOptions) -> Verdict {
    bisim_process(p, q, g.env(), &[s0(g)], opts).unwrap_or_else(|e| panic!("{p} vs {q}: {e}"))
}

pub use qccs_core::gen::LAWS;

pub fn law_instance(g: &Gen, rng: &mut ChaCha8Rng, k: usize) -> (Process, Process) {
    g.law_instance(rng, k)
}

/// The constructor closures of a related pair with a random context. The
/// output closure is left out when no variable is free of both sides, the
/// restriction closure when the drawn channel set is empty.
pub fn closures(g: &Gen, rng: &mut ChaCha8Rng, p: &Process, q: &Process) -> Vec<(&'static str, Process, Process)> {
    let used: BTreeSet<Var> = free_vars(p).union(&free_vars(q)).cloned().collect();
    let spare: Vec<Var> = g.free.iter().filter(|v| !used.contains(*v)).cloned().collect();
    let c = g.chans.choose(rng).unwrap().clone();
    let b = g.binders.choose(rng).unwrap().clone();
    let mut out = vec![
        ("tau", Process::tau(p.clone()), Process::tau(q.clone())),
        (
            "input",
            Process::input(c.clone(), b.clone(), p.clone()),
            Process::input(c.clone(), b, q.clone()),
        ),
    ];
    let x = g.free.choose(rng).unwrap().clone();
    let op = g.env().ops[*["H", "X", "Amp", "M0"].choose(rng).unwrap()].clone();
    out.push(("operation", Process::op(op.clone(), vec![x.clone()], p.clone()), Process::op(op, vec![x], q.clone())));
    if let Some(x) = spare.choose(rng) {
        out.push((
            "output",
            Process::output(c.clone(), x.clone(), p.clone()),
            Process::output(c.clone(), x.clone(), q.clone()),
        ));
    }
    let r = g.process_over(rng, 2, &g.free);
    out.push(("sum", Process::sum(p.clone(), r.clone()), Process::sum(q.clone(), r)));
    let r = g.process_over(rng, 2, &spare);
    out.push(("parallel", Process::par(p.clone(), r.clone()), Process::par(q.clone(), r)));
    let l = g.channel_set(rng);
    if !l.is_empty() {
        out.push(("restriction", Process::Restrict(Box::new(p.clone()), l.clone()), Process::Restrict(Box::new(q.clone()), l)));
    }
    out
}

/// `(P‖Q)\L` over disjoint variables, finite, for the expansion law.
pub fn expansion_instance(g: &Gen, rng: &mut ChaCha8Rng) -> (Process, Process, BTreeSet<Chan>) {
    let (a, b) = g.split(rng, &g.free);
    let p = g.process_over(rng, 3, &a);
    let q = g.process_over(rng, 3, &b);
    (p, q, g.channel_set(rng))
}

/// A configuration of `p` over its register at a random mixed state.
pub fn random_config(g: &Gen, p: &Process, rng: &mut ChaCha8Rng) -> Configuration {
    let reg = build_register(&[p], &[s0(g)], g.env(), 1).unwrap();
    let rank = rng.random_range(1..=3);
    Configuration::new(p.clone(), random_state(&reg, rank, rng))
}

fn transitions(g: &Gen, c: &Configuration) -> Result<Vec<Transition>, String> {
    enabled(c, g.env(), FreshPolicy::default()).map_err(|e| format!("{}: {e}", c.process))
}

fn find<'a>(ts: &'a [Transition], a: &Action, p: &Process) -> Option<&'a Transition> {
    ts.iter().find(|t| t.action.matches(a, 1e-9) && alpha_eq(&t.target.process, p))
}

/// Operation and non-operation edges transform the state as prescribed,
/// free variables behave as in the variable lemma, and every input can be
/// redirected to any admissible target.
/// Returns the number of edges checked.
pub fn edge_lemmas(g: &Gen, c: &Configuration) -> Result<usize, String> {
    let ts = transitions(g, c)?;
    let fv = free_vars(&c.process);
    for t in &ts {
        let ctx = || format!("{} --{}--> {}", c.process, t.action, t.target.process);
        match &t.action {
            Action::Op { op, vars } => {
                let want = apply_superop(op, vars, &c.state).map_err(|e| e.to_string())?;
                if want.matrix().max_abs_diff(t.target.state.matrix()) > 1e-12 {
                    return Err(format!("operation edge state differs: {}", ctx()));
                }
            }
            _ => {
                if t.target.state.matrix() != c.state.matrix() {
                    return Err(format!("state changed on a non-operation edge: {}", ctx()));
                }
            }
        }
        let fa = fv_action(&t.action);
        let fv2 = free_vars(&t.target.process);
        if !fa.is_subset(&fv) {
            return Err(format!("fv(action) not free before: {}", ctx()));
        }
        if matches!(t.action, Action::Out(..)) && !fa.is_disjoint(&fv2) {
            return Err(format!("sent variable still free after: {}", ctx()));
        }
        let mut allowed = fv.clone();
        allowed.extend(bv_action(&t.action).cloned());
        if !fv2.is_subset(&allowed) {
            return Err(format!("new free variable after: {}", ctx()));
        }
        if let Action::In(ch, x) = &t.action {
            let ty = c.state.register().type_of(x).unwrap().clone();
            for y in c.state.register().vars_of_type(&ty) {
                // Reserved names beyond the first are interchangeable with it.
                if fv.contains(y) || y == x || (y.is_fresh() && y.fresh_index() != Some(0)) {
                    continue;
                }
                let want = apply_unchecked(&t.target.process, &Subst::swap(x, y), g.env()).map_err(|e| e.to_string())?;
                if find(&ts, &Action::In(ch.clone(), y.clone()), &want).is_none() {
                    return Err(format!("no input on `{y}` matching {}", ctx()));
                }
            }
        }
    }
    Ok(ts.len())
}

/// The transitions at `sigma` are those at the original state, with the
/// operation edges applied to `sigma`.
pub fn state_independence(g: &Gen, c: &Configuration, sigma: &QState) -> Result<(), String> {
    let a = transitions(g, c)?;
    let b = transitions(g, &Configuration::new(c.process.clone(), sigma.clone()))?;
    if a.len() != b.len() {
        return Err(format!("{}: {} vs {} transitions", c.process, a.len(), b.len()));
    }
    for (s, t) in a.iter().zip(&b) {
        if !s.action.matches(&t.action, 1e-9) || !alpha_eq(&s.target.process, &t.target.process) {
            return Err(format!("{}: {} differs from {}", c.process, s.action, t.action));
        }
        let want = match &s.action {
            Action::Op { op, vars } => apply_superop(op, vars, sigma).map_err(|e| e.to_string())?,
            _ => sigma.clone(),
        };
        if want.matrix().max_abs_diff(t.target.state.matrix()) > 1e-12 {
            return Err(format!("{}: state after {} differs", c.process, s.action));
        }
    }
    Ok(())
}

/// α-variants have the same transitions.
pub fn alpha_invariance(g: &Gen, c: &Configuration) -> Result<(), String> {
    let q = canonicalize(&c.process, g.env()).map_err(|e| e.to_string())?;
    if !alpha_eq(&q, &c.process) {
        return Err(format!("canonical form of {} is not an α-variant", c.process));
    }
    let a = transitions(g, c)?;
    let b = transitions(g, &Configuration::new(q, c.state.clone()))?;
    for (side, xs, ys) in [("left", &a, &b), ("right", &b, &a)] {
        for t in xs.iter() {
            if find(ys, &t.action, &t.target.process).is_none() {
                return Err(format!("{side}: {} --{}--> {} unmatched", c.process, t.action, t.target.process));
            }
        }
    }
    Ok(())
}

fn map_action(a: &Action, f: &Subst) -> Action {
    match a {
        Action::Tau => Action::Tau,
        Action::Op { op, vars } => Action::Op {
            op: op.clone(),
            vars: vars.iter().map(|v| f.apply(v)).collect(),
        },
        Action::In(c, x) => Action::In(c.clone(), f.apply(x)),
        Action::Out(c, x) => Action::Out(c.clone(), f.apply(x)),
    }
}

/// Renaming by a permutation `f` of the named register variables maps the
/// transitions of `<P, ρ>` onto those of `<Pf, f(ρ)>`.
pub fn substitution_lemmas(g: &Gen, c: &Configuration, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let named: Vec<Var> = c.state.register().vars().filter(|v| !v.is_reserved()).cloned().collect();
    let mut img = named.clone();
    use rand::seq::SliceRandom;
    img.shuffle(rng);
    let pairs: Vec<(Var, Var)> = named.iter().cloned().zip(img).collect();
    let f = Subst::new(pairs.clone(), g.env()).map_err(|e| e.to_string())?;
    let pf = apply_unchecked(&c.process, &f, g.env()).map_err(|e| e.to_string())?;
    let rho_f = c.state.rename(&pairs).map_err(|e| e.to_string())?;
    let a = transitions(g, c)?;
    let b = transitions(g, &Configuration::new(pf.clone(), rho_f))?;
    if a.len() != b.len() {
        return Err(format!("{} and {pf}{f}: {} vs {} transitions", c.process, a.len(), b.len()));
    }
    for t in &a {
        let want = apply_unchecked(&t.target.process, &f, g.env()).map_err(|e| e.to_string())?;
        let Some(u) = find(&b, &map_action(&t.action, &f), &want) else {
            return Err(format!("{}: image of --{}--> {} missing under {f}", c.process, t.action, t.target.process));
        };
        let state_f = t.target.state.rename(&pairs).map_err(|e| e.to_string())?;
        if state_f.matrix().max_abs_diff(u.target.state.matrix()) > 1e-12 {
            return Err(format!("{}: renamed state after {} differs", c.process, t.action));
        }
    }
    Ok(())
}

/// Normal forms are idempotent, and every single reduction step keeps the
/// normal form.
pub fn reduction_checks(g: &Gen, p: &Process) -> Result<(), String> {
    let n = normal_form(p).map_err(|e| e.to_string())?;
    let nn = normal_form(&n).map_err(|e| e.to_string())?;
    if !alpha_eq(&n, &nn) {
        return Err(format!("normal form of {p} is not idempotent"));
    }
    let reg = qccs_core::sos::OpRegistry::default();
    let key = |q: &Process| qccs_core::sos::process_key(q, g.env(), &reg).map_err(|e| e.to_string());
    let k = key(&n)?;
    for q in reduction_steps(p).map_err(|e| e.to_string())? {
        let nq = normal_form(&q).map_err(|e| e.to_string())?;
        if key(&nq)? != k {
            return Err(format!("{p} reduces to {q} with a different normal form {nq} vs {n}"));
        }
    }
    Ok(())
}

/// Follows `c` while it has exactly one transition; returns the labels and
/// the last configuration.
pub fn follow(env: &qccs_core::ast::Env, c: Configuration, limit: usize) -> Result<(Vec<String>, Configuration), String> {
    let mut cur = c;
    let mut labels = Vec::new();
    for _ in 0..limit {
        let ts = enabled(&cur, env, FreshPolicy::default()).map_err(|e| e.to_string())?;
        match ts.len() {
            0 => return Ok((labels, cur)),
            1 => {
                let t = ts.into_iter().next().unwrap();
                labels.push(t.action.to_string());
                cur = t.target;
            }
            n => return Err(format!("{n} transitions from {}", cur.process)),
        }
    }
    Ok((labels, cur))
}

/// A configuration running the body of constant `name` from state `state`.
pub fn corpus_config(file: &qccs_core::parse::SourceFile, name: &str, state: &str) -> Configuration {
    let p = file.env.constant(name).unwrap().body.clone();
    let s = file.state(state).unwrap();
    let reg = build_register(&[&p], &[s], &file.env, 1).unwrap();
    Configuration::new(p, s.instantiate(&reg).unwrap())
}

/// Proptest configuration with a fixed seed, so runs are reproducible.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases: n,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x9cc5),
        failure_persistence: None,
        ..proptest::test_runner::Config::default()
    }
}

/// `p` with some single-variable operations replaced by other
/// trace-preserving ones.
pub fn perturb(g: &Gen, p: &Process, rng: &mut ChaCha8Rng) -> Process {
    let one = ["H", "X", "T", "S", "I", "Amp"];
    match p {
        Process::Op { op, vars, body } => {
            let op = if vars.len() == 1 && rng.random_bool(0.5) {
                g.env().ops[*one.choose(rng).unwrap()].clone()
            } else {
                op.clone()
            };
            Process::op(op, vars.clone(), perturb(g, body, rng))
        }
        Process::Tau(b) => Process::tau(perturb(g, b, rng)),
        Process::Input { chan, var, body } => Process::input(chan.clone(), var.clone(), perturb(g, body, rng)),
        Process::Output { chan, var, body } => Process::output(chan.clone(), var.clone(), perturb(g, body, rng)),
        Process::Sum(a, b) => Process::sum(perturb(g, a, rng), perturb(g, b, rng)),
        Process::Par(a, b) => Process::par(perturb(g, a, rng), perturb(g, b, rng)),
        Process::Restrict(b, l) => Process::Restrict(Box::new(perturb(g, b, rng)), l.clone()),
        Process::Nil | Process::Const { .. } => p.clone(),
    }
}

/// A process over `avail` and a perturbation of it that differs.
pub fn perturbed_pair(g: &Gen, rng: &mut ChaCha8Rng, depth: usize, avail: &[Var]) -> (Process, Process) {
    loop {
        let p = g.process_over(rng, depth, avail);
        let q = perturb(g, &p, rng);
        if q.to_string() != p.to_string() {
            return (p, q);
        }
    }
}
