//! Operation reduction: merging consecutive quantum operations into their
//! composition, on action strings and on processes.

use std::sync::Arc;

use crate::ast::{Action, Env, Process};
use crate::names::Var;
use crate::qnum::{superop_compose, QnumError, Slot, SuperOp};
use crate::sos::{unfold_const, SosError};

/// The single operation `E[X]` equivalent to performing `run` in order:
/// `X` is the union of the `Xᵢ` in order of first appearance and
/// `E = (Eₙ ⊗ I) ∘ … ∘ (E₁ ⊗ I)`.
pub fn compose_run(run: &[(Arc<SuperOp>, Vec<Var>)]) -> Result<(Arc<SuperOp>, Vec<Var>), QnumError> {
    match run {
        [] => Err(QnumError::BadSuperOp("empty operation run".into())),
        [(op, vars)] => Ok((op.clone(), vars.clone())),
        _ => {
            let mut xs: Vec<Var> = Vec::new();
            let mut slots: Vec<Slot> = Vec::new();
            for (op, vars) in run {
                if op.domain().len() != vars.len() {
                    return Err(QnumError::DimensionMismatch(format!(
                        "`{}` has {} slots, given {} variables",
                        op.label(),
                        op.domain().len(),
                        vars.len()
                    )));
                }
                for (v, s) in vars.iter().zip(op.domain()) {
                    match xs.iter().position(|x| x == v) {
                        Some(i) if slots[i].ty != s.ty => {
                            return Err(QnumError::TypeMismatch(format!("`{v}` used with types {} and {}", slots[i].ty, s.ty)))
                        }
                        Some(_) => {}
                        None => {
                            xs.push(v.clone());
                            slots.push(Slot::new(v.as_str(), s.ty.clone()));
                        }
                    }
                }
            }
            let mut acc: Option<SuperOp> = None;
            for (op, vars) in run {
                let rest: Vec<usize> = (0..xs.len()).filter(|&i| !vars.contains(&xs[i])).collect();
                let extra: Vec<Slot> = rest.iter().map(|&i| slots[i].clone()).collect();
                let ext = op.extend(&extra);
                // Current slot order: `vars` then `rest`; bring it to `xs`.
                let current: Vec<&Var> = vars.iter().chain(rest.iter().map(|&i| &xs[i])).collect();
                let order: Vec<usize> = xs.iter().map(|x| current.iter().position(|c| *c == x).unwrap()).collect();
                let aligned = ext.permute_slots(&order).with_domain(slots.clone())?;
                acc = Some(match acc {
                    None => aligned,
                    Some(prev) => superop_compose(&aligned, &prev)?,
                });
            }
            Ok((Arc::new(acc.unwrap()), xs))
        }
    }
}

/// Replaces every maximal run of consecutive operation actions by its
/// composition.
pub fn reduce_string(t: &[Action]) -> Result<Vec<Action>, QnumError> {
    let mut out = Vec::with_capacity(t.len());
    let mut run: Vec<(Arc<SuperOp>, Vec<Var>)> = Vec::new();
    let flush = |run: &mut Vec<(Arc<SuperOp>, Vec<Var>)>, out: &mut Vec<Action>| -> Result<(), QnumError> {
        if !run.is_empty() {
            let (op, vars) = compose_run(run)?;
            out.push(Action::Op { op, vars });
            run.clear();
        }
        Ok(())
    };
    for a in t {
        match a {
            Action::Op { op, vars } => run.push((op.clone(), vars.clone())),
            other => {
                flush(&mut run, &mut out)?;
                out.push(other.clone());
            }
        }
    }
    flush(&mut run, &mut out)?;
    Ok(out)
}

/// Splits `p` into its leading operation prefixes and the rest.
type Prefix = (Arc<SuperOp>, Vec<Var>);

fn op_chain(p: &Process) -> (Vec<Prefix>, &Process) {
    let mut run = Vec::new();
    let mut cur = p;
    while let Process::Op { op, vars, body } = cur {
        run.push((op.clone(), vars.clone()));
        cur = body;
    }
    (run, cur)
}

fn prefix_chain(run: &[(Arc<SuperOp>, Vec<Var>)], rest: Process) -> Process {
    run.iter()
        .rev()
        .fold(rest, |acc, (op, vars)| Process::op(op.clone(), vars.clone(), acc))
}

/// The normal form `⌈P⌉`: every maximal chain of operation prefixes is
/// merged into one prefix, everywhere in the term. Constants are not
/// unfolded.
pub fn normal_form(p: &Process) -> Result<Process, QnumError> {
    Ok(match p {
        Process::Op { .. } => {
            let (run, rest) = op_chain(p);
            let (op, vars) = compose_run(&run)?;
            Process::op(op, vars, normal_form(rest)?)
        }
        Process::Nil | Process::Const { .. } => p.clone(),
        Process::Tau(b) => Process::tau(normal_form(b)?),
        Process::Input { chan, var, body } => Process::input(chan.clone(), var.clone(), normal_form(body)?),
        Process::Output { chan, var, body } => Process::output(chan.clone(), var.clone(), normal_form(body)?),
        Process::Sum(a, b) => Process::sum(normal_form(a)?, normal_form(b)?),
        Process::Par(a, b) => Process::par(normal_form(a)?, normal_form(b)?),
        Process::Restrict(b, l) => Process::Restrict(Box::new(normal_form(b)?), l.clone()),
    })
}

/// The normal form of `p` up to constant unfolding. Constants in unguarded
/// positions, and constants that end an operation chain, are replaced by
/// their bodies before merging, so `A(x)` with `A(x) = E[x].F[x].P` reduces
/// like its body. Each constant is unfolded at most once along a path, which
/// keeps recursive definitions finite; guarded parts are left for later
/// steps to normalize.
pub fn normal_form_unfolding(p: &Process, env: &Env) -> Result<Process, SosError> {
    nf_unfolding(p, env, &mut Vec::new())
}

fn nf_unfolding(p: &Process, env: &Env, seen: &mut Vec<Arc<str>>) -> Result<Process, SosError> {
    Ok(match p {
        Process::Const { name, args } => {
            if seen.contains(name) {
                return Ok(p.clone());
            }
            seen.push(name.clone());
            let r = nf_unfolding(&unfold_const(name, args, env)?, env, seen);
            seen.pop();
            r?
        }
        Process::Op { .. } => {
            let mark = seen.len();
            let mut run = Vec::new();
            let mut cur = p.clone();
            loop {
                match cur {
                    Process::Op { op, vars, body } => {
                        run.push((op, vars));
                        cur = *body;
                    }
                    Process::Const { ref name, ref args } if !seen.contains(name) => {
                        seen.push(name.clone());
                        cur = unfold_const(name, args, env)?;
                    }
                    _ => break,
                }
            }
            seen.truncate(mark);
            let (op, vars) = compose_run(&run)?;
            Process::op(op, vars, normal_form(&cur)?)
        }
        Process::Nil | Process::Tau(_) | Process::Input { .. } | Process::Output { .. } => normal_form(p)?,
        Process::Sum(a, b) => Process::sum(nf_unfolding(a, env, seen)?, nf_unfolding(b, env, seen)?),
        Process::Par(a, b) => Process::par(nf_unfolding(a, env, seen)?, nf_unfolding(b, env, seen)?),
        Process::Restrict(b, l) => Process::Restrict(Box::new(nf_unfolding(b, env, seen)?), l.clone()),
    })
}

/// Whether `p` is already in normal form.
pub fn is_normal(p: &Process) -> bool {
    match p {
        Process::Op { body, .. } => !matches!(**body, Process::Op { .. }) && is_normal(body),
        Process::Nil | Process::Const { .. } => true,
        Process::Tau(b) | Process::Restrict(b, _) => is_normal(b),
        Process::Input { body, .. } | Process::Output { body, .. } => is_normal(body),
        Process::Sum(a, b) | Process::Par(a, b) => is_normal(a) && is_normal(b),
    }
}

/// Every process reachable from `p` by one application of the reduction
/// rules that merges at least two operations: any contiguous sub-run of
/// any operation chain, at any position in the term.
pub fn reduction_steps(p: &Process) -> Result<Vec<Process>, QnumError> {
    let mut out = Vec::new();
    match p {
        Process::Op { .. } => {
            let (run, rest) = op_chain(p);
            for i in 0..run.len() {
                for j in i + 2..=run.len() {
                    let (op, vars) = compose_run(&run[i..j])?;
                    let mut merged = run[..i].to_vec();
                    merged.push((op, vars));
                    merged.extend_from_slice(&run[j..]);
                    out.push(prefix_chain(&merged, rest.clone()));
                }
            }
            for r in reduction_steps(rest)? {
                out.push(prefix_chain(&run, r));
            }
        }
        Process::Nil | Process::Const { .. } => {}
        Process::Tau(b) => out.extend(reduction_steps(b)?.into_iter().map(Process::tau)),
        Process::Input { chan, var, body } => out.extend(
            reduction_steps(body)?
                .into_iter()
                .map(|b| Process::input(chan.clone(), var.clone(), b)),
        ),
        Process::Output { chan, var, body } => out.extend(
            reduction_steps(body)?
                .into_iter()
                .map(|b| Process::output(chan.clone(), var.clone(), b)),
        ),
        Process::Sum(a, b) | Process::Par(a, b) => {
            let sum = matches!(p, Process::Sum(..));
            let join = |l: Process, r: Process| if sum { Process::sum(l, r) } else { Process::par(l, r) };
            for l in reduction_steps(a)? {
                out.push(join(l, (**b).clone()));
            }
            for r in reduction_steps(b)? {
                out.push(join((**a).clone(), r));
            }
        }
        Process::Restrict(b, l) => out.extend(
            reduction_steps(b)?
                .into_iter()
                .map(|b| Process::Restrict(Box::new(b), l.clone())),
        ),
    }
    Ok(out)
}
