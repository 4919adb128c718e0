use std::sync::Arc;

use super::process::{Env, Process};
use super::AstError;
use crate::names::Var;
use crate::qnum::{superop_equal, SuperOp, TOL_CHOI};

/// α-convertibility. Super-operator payloads are compared as channels
/// (Choi matrices within [`TOL_CHOI`]) after sorting their variables.
pub fn alpha_eq(p: &Process, q: &Process) -> bool {
    eq(p, q, &mut Vec::new(), &mut Vec::new())
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Occ {
    Bound(usize),
    Free(Var),
}

fn occ(v: &Var, binders: &[Var]) -> Occ {
    match binders.iter().rposition(|b| b == v) {
        Some(i) => Occ::Bound(binders.len() - 1 - i),
        None => Occ::Free(v.clone()),
    }
}

fn eq(p: &Process, q: &Process, bp: &mut Vec<Var>, bq: &mut Vec<Var>) -> bool {
    match (p, q) {
        (Process::Nil, Process::Nil) => true,
        (Process::Const { name: a, args: xa }, Process::Const { name: b, args: xb }) => {
            a == b
                && xa.len() == xb.len()
                && xa.iter().zip(xb).all(|(x, y)| occ(x, bp) == occ(y, bq))
        }
        (Process::Tau(a), Process::Tau(b)) => eq(a, b, bp, bq),
        (
            Process::Op { op: e, vars: xa, body: a },
            Process::Op { op: f, vars: xb, body: b },
        ) => {
            let ka: Vec<Occ> = xa.iter().map(|v| occ(v, bp)).collect();
            let kb: Vec<Occ> = xb.iter().map(|v| occ(v, bq)).collect();
            ops_match(e, &ka, f, &kb) && eq(a, b, bp, bq)
        }
        (
            Process::Input { chan: c, var: x, body: a },
            Process::Input { chan: d, var: y, body: b },
        ) => {
            if c != d {
                return false;
            }
            bp.push(x.clone());
            bq.push(y.clone());
            let r = eq(a, b, bp, bq);
            bp.pop();
            bq.pop();
            r
        }
        (
            Process::Output { chan: c, var: x, body: a },
            Process::Output { chan: d, var: y, body: b },
        ) => c == d && occ(x, bp) == occ(y, bq) && eq(a, b, bp, bq),
        (Process::Sum(a1, a2), Process::Sum(b1, b2)) | (Process::Par(a1, a2), Process::Par(b1, b2)) => {
            eq(a1, b1, bp, bq) && eq(a2, b2, bp, bq)
        }
        (Process::Restrict(a, la), Process::Restrict(b, lb)) => la == lb && eq(a, b, bp, bq),
        _ => false,
    }
}

/// Sorts the variable keys of an operation prefix and permutes its slots to
/// match, so that `E[x,y]` and the slot-swapped `E'[y,x]` coincide.
fn sorted_op<K: Ord + Clone>(op: &SuperOp, keys: &[K]) -> (SuperOp, Vec<K>) {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&i, &j| keys[i].cmp(&keys[j]));
    let sorted = order.iter().map(|&i| keys[i].clone()).collect();
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        (op.clone(), sorted)
    } else {
        (op.permute_slots(&order), sorted)
    }
}

fn ops_match(e: &Arc<SuperOp>, ka: &[Occ], f: &Arc<SuperOp>, kb: &[Occ]) -> bool {
    if ka.len() != kb.len() {
        return false;
    }
    if Arc::ptr_eq(e, f) && ka == kb {
        return true;
    }
    let (se, sa) = sorted_op(e, ka);
    let (sf, sb) = sorted_op(f, kb);
    sa == sb && superop_equal(&se, &sf, TOL_CHOI).unwrap_or(false)
}

/// Renames every input binder to `#<type>~k`, where `k` counts the
/// enclosing binders of the same type.
pub fn canonicalize(p: &Process, env: &Env) -> Result<Process, AstError> {
    canon(p, env, &mut Vec::new())
}

fn canon(p: &Process, env: &Env, scope: &mut Vec<(Var, Var, String)>) -> Result<Process, AstError> {
    let rn = |v: &Var, scope: &[(Var, Var, String)]| {
        scope
            .iter()
            .rev()
            .find(|(old, _, _)| old == v)
            .map(|(_, new, _)| new.clone())
            .unwrap_or_else(|| v.clone())
    };
    Ok(match p {
        Process::Const { name, args } => Process::Const {
            name: name.clone(),
            args: args.iter().map(|a| rn(a, scope)).collect(),
        },
        Process::Nil => Process::Nil,
        Process::Tau(b) => Process::tau(canon(b, env, scope)?),
        Process::Op { op, vars, body } => Process::Op {
            op: op.clone(),
            vars: vars.iter().map(|v| rn(v, scope)).collect(),
            body: Box::new(canon(body, env, scope)?),
        },
        Process::Input { chan, var, body } => {
            let ty = env.type_of(var).ok_or_else(|| AstError::UnknownVar(var.to_string()))?;
            let k = scope.iter().filter(|(_, _, t)| *t == ty.name).count();
            let new = Var::bound(&ty.name, k);
            scope.push((var.clone(), new.clone(), ty.name));
            let b = canon(body, env, scope);
            scope.pop();
            Process::input(chan.clone(), new, b?)
        }
        Process::Output { chan, var, body } => {
            Process::output(chan.clone(), rn(var, scope), canon(body, env, scope)?)
        }
        Process::Sum(a, b) => Process::sum(canon(a, env, scope)?, canon(b, env, scope)?),
        Process::Par(a, b) => Process::par(canon(a, env, scope)?, canon(b, env, scope)?),
        Process::Restrict(b, l) => Process::Restrict(Box::new(canon(b, env, scope)?), l.clone()),
    })
}

/// The operation of a prefix with its variables in sorted order and the
/// slots permuted accordingly.
pub fn sorted_prefix(op: &SuperOp, vars: &[Var]) -> (SuperOp, Vec<Var>) {
    sorted_op(op, vars)
}
