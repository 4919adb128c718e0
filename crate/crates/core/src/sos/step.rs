use std::collections::BTreeSet;
use std::sync::Arc;

use super::SosError;
use crate::ast::{apply_unchecked, free_vars, Env, Process, Subst};
use crate::names::{Chan, Var};
use crate::qnum::{SuperOp, VarType};

/// Nested constant unfoldings allowed without passing a prefix.
const UNFOLD_LIMIT: usize = 64;

/// A move that does not bind a variable.
#[derive(Clone, Debug)]
pub enum Move {
    Tau,
    Op { op: Arc<SuperOp>, vars: Vec<Var> },
    Out(Chan, Var),
}

/// An input move before its target is chosen: for every admissible `y`,
/// the process can do `chan?y` and continue as `cont{y/binder}`.
#[derive(Clone, Debug)]
pub struct Abstraction {
    pub chan: Chan,
    pub binder: Var,
    pub ty: VarType,
    pub cont: Process,
    /// Free variables of the process performing the input; a target must
    /// avoid them.
    pub forbidden: BTreeSet<Var>,
}

impl Abstraction {
    /// `cont{y/binder}`. Fails if `y` is already free in the continuation.
    pub fn instantiate(&self, y: &Var, env: &Env) -> Result<Process, SosError> {
        if *y == self.binder {
            return Ok(self.cont.clone());
        }
        if free_vars(&self.cont).contains(y) {
            return Err(SosError::Internal(format!(
                "cannot receive into `{y}`: already free in `{}`",
                self.cont
            )));
        }
        Ok(apply_unchecked(&self.cont, &Subst::swap(&self.binder, y), env)?)
    }

    /// Renames the binder away from `avoid`.
    pub(crate) fn rebind(self, avoid: &BTreeSet<Var>, env: &Env) -> Result<Abstraction, SosError> {
        if !avoid.contains(&self.binder) {
            return Ok(self);
        }
        let fv = free_vars(&self.cont);
        let fresh = (0..)
            .map(|k| Var::bound(&self.ty.name, k))
            .find(|v| !avoid.contains(v) && !fv.contains(v) && !self.forbidden.contains(v))
            .unwrap();
        let cont = apply_unchecked(&self.cont, &Subst::swap(&self.binder, &fresh), env)?;
        Ok(Abstraction {
            binder: fresh,
            cont,
            ..self
        })
    }

    fn map(self, f: impl FnOnce(Process) -> Process) -> Abstraction {
        Abstraction {
            cont: f(self.cont),
            ..self
        }
    }
}

/// The first-step behaviour of a process, independent of the state.
#[derive(Clone, Debug, Default)]
pub struct Steps {
    pub moves: Vec<(Move, Process)>,
    pub inputs: Vec<Abstraction>,
}

impl Steps {
    pub fn is_empty(&self) -> bool {
        self.moves.is_empty() && self.inputs.is_empty()
    }
}

/// Symbolic transitions of `p`, in rule order: left operand before right,
/// interleavings before communications.
pub fn steps(p: &Process, env: &Env) -> Result<Steps, SosError> {
    go(p, env, 0)
}

fn go(p: &Process, env: &Env, unfold: usize) -> Result<Steps, SosError> {
    let mut out = Steps::default();
    match p {
        Process::Nil => {}
        Process::Tau(b) => out.moves.push((Move::Tau, (**b).clone())),
        Process::Op { op, vars, body } => out.moves.push((
            Move::Op {
                op: op.clone(),
                vars: vars.clone(),
            },
            (**body).clone(),
        )),
        Process::Output { chan, var, body } => out.moves.push((Move::Out(chan.clone(), var.clone()), (**body).clone())),
        Process::Input { chan, var, body } => {
            let ty = env.type_of(var).ok_or_else(|| SosError::Ast(crate::ast::AstError::UnknownVar(var.to_string())))?;
            out.inputs.push(Abstraction {
                chan: chan.clone(),
                binder: var.clone(),
                ty,
                cont: (**body).clone(),
                forbidden: free_vars(p),
            });
        }
        Process::Sum(a, b) => {
            let (sa, sb) = (go(a, env, unfold)?, go(b, env, unfold)?);
            out.moves.extend(sa.moves);
            out.moves.extend(sb.moves);
            out.inputs.extend(sa.inputs);
            out.inputs.extend(sb.inputs);
        }
        Process::Par(a, b) => {
            let (sa, sb) = (go(a, env, unfold)?, go(b, env, unfold)?);
            let (fa, fb) = (free_vars(a), free_vars(b));
            for (m, c) in &sa.moves {
                out.moves.push((m.clone(), Process::par(c.clone(), (**b).clone())));
            }
            for abs in &sa.inputs {
                let mut abs = abs.clone().rebind(&fb, env)?;
                abs.forbidden.extend(fb.iter().cloned());
                out.inputs.push(abs.map(|c| Process::par(c, (**b).clone())));
            }
            for (m, c) in &sb.moves {
                out.moves.push((m.clone(), Process::par((**a).clone(), c.clone())));
            }
            for abs in &sb.inputs {
                let mut abs = abs.clone().rebind(&fa, env)?;
                abs.forbidden.extend(fa.iter().cloned());
                out.inputs.push(abs.map(|c| Process::par((**a).clone(), c)));
            }
            for abs in &sa.inputs {
                for (m, c) in &sb.moves {
                    if let Some(t) = communicate(abs, m, env)? {
                        disjoint(&t, c)?;
                        out.moves.push((Move::Tau, Process::par(t, c.clone())));
                    }
                }
            }
            for (m, c) in &sa.moves {
                for abs in &sb.inputs {
                    if let Some(t) = communicate(abs, m, env)? {
                        disjoint(c, &t)?;
                        out.moves.push((Move::Tau, Process::par(c.clone(), t)));
                    }
                }
            }
        }
        Process::Restrict(b, l) => {
            let sb = go(b, env, unfold)?;
            for (m, c) in sb.moves {
                if let Move::Out(ch, _) = &m {
                    if l.contains(ch) {
                        continue;
                    }
                }
                out.moves.push((m, Process::Restrict(Box::new(c), l.clone())));
            }
            for abs in sb.inputs {
                if !l.contains(&abs.chan) {
                    out.inputs.push(abs.map(|c| Process::Restrict(Box::new(c), l.clone())));
                }
            }
        }
        Process::Const { name, args } => {
            if unfold >= UNFOLD_LIMIT {
                return Err(SosError::UnguardedRecursion(name.to_string()));
            }
            let body = unfold_const(name, args, env)?;
            return go(&body, env, unfold + 1);
        }
    }
    Ok(out)
}

/// `P{ỹ/x̃}` for the defining equation `A(x̃) = P`.
pub fn unfold_const(name: &str, args: &[Var], env: &Env) -> Result<Process, SosError> {
    let def = env
        .constant(name)
        .ok_or_else(|| SosError::Ast(crate::ast::AstError::UnknownConstant(name.to_string())))?;
    if def.params.len() != args.len() {
        return Err(SosError::Internal(format!(
            "`{name}` expects {} arguments, given {}",
            def.params.len(),
            args.len()
        )));
    }
    let f = Subst::new(def.params.iter().cloned().zip(args.iter().cloned()), env)?;
    Ok(apply_unchecked(&def.body, &f, env)?)
}

/// The receiving side of a communication, if `m` is an output that `abs`
/// can accept.
fn communicate(abs: &Abstraction, m: &Move, env: &Env) -> Result<Option<Process>, SosError> {
    let Move::Out(c, x) = m else {
        return Ok(None);
    };
    if *c != abs.chan || env.type_of(x).as_ref() != Some(&abs.ty) {
        return Ok(None);
    }
    if abs.forbidden.contains(x) {
        return Err(SosError::Internal(format!(
            "`{x}` is free on both sides of a communication on `{c}`"
        )));
    }
    abs.instantiate(x, env).map(Some)
}

fn disjoint(p: &Process, q: &Process) -> Result<(), SosError> {
    let fq = free_vars(q);
    match free_vars(p).into_iter().find(|v| fq.contains(v)) {
        Some(v) => Err(SosError::Internal(format!("`{v}` is free in both residuals of a communication"))),
        None => Ok(()),
    }
}
