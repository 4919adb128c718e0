use std::collections::BTreeSet;

use super::process::{Env, Process};
use super::AstError;
use crate::names::{Chan, Var};

/// Free quantum variables; constants contribute their arguments.
pub fn fv(p: &Process, env: &Env) -> Result<BTreeSet<Var>, AstError> {
    check_constants(p, env)?;
    Ok(free_vars(p))
}

/// [`fv`] without resolving constants.
pub fn free_vars(p: &Process) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect(p, &mut out);
    out
}

fn collect(p: &Process, out: &mut BTreeSet<Var>) {
    match p {
        Process::Const { args, .. } => out.extend(args.iter().cloned()),
        Process::Nil => {}
        Process::Tau(b) | Process::Restrict(b, _) => collect(b, out),
        Process::Op { vars, body, .. } => {
            out.extend(vars.iter().cloned());
            collect(body, out);
        }
        Process::Input { var, body, .. } => {
            let mut inner = BTreeSet::new();
            collect(body, &mut inner);
            inner.remove(var);
            out.extend(inner);
        }
        Process::Output { var, body, .. } => {
            out.insert(var.clone());
            collect(body, out);
        }
        Process::Sum(p, q) | Process::Par(p, q) => {
            collect(p, out);
            collect(q, out);
        }
    }
}

pub(crate) fn check_constants(p: &Process, env: &Env) -> Result<(), AstError> {
    match p {
        Process::Const { name, .. } => {
            if env.constant(name).is_none() {
                return Err(AstError::UnknownConstant(name.to_string()));
            }
            Ok(())
        }
        Process::Nil => Ok(()),
        Process::Tau(b) | Process::Restrict(b, _) => check_constants(b, env),
        Process::Op { body, .. } | Process::Input { body, .. } | Process::Output { body, .. } => {
            check_constants(body, env)
        }
        Process::Sum(p, q) | Process::Par(p, q) => {
            check_constants(p, env)?;
            check_constants(q, env)
        }
    }
}

/// Channels occurring free in `p`, looking through constant definitions.
pub fn free_channels(p: &Process, env: &Env) -> Result<BTreeSet<Chan>, AstError> {
    let mut seen = BTreeSet::new();
    channels(p, env, &mut seen)
}

fn channels(p: &Process, env: &Env, seen: &mut BTreeSet<String>) -> Result<BTreeSet<Chan>, AstError> {
    Ok(match p {
        Process::Const { name, .. } => {
            if !seen.insert(name.to_string()) {
                return Ok(BTreeSet::new());
            }
            let def = env
                .constant(name)
                .ok_or_else(|| AstError::UnknownConstant(name.to_string()))?;
            channels(&def.body, env, seen)?
        }
        Process::Nil => BTreeSet::new(),
        Process::Tau(b) | Process::Op { body: b, .. } => channels(b, env, seen)?,
        Process::Input { chan, body, .. } | Process::Output { chan, body, .. } => {
            let mut s = channels(body, env, seen)?;
            s.insert(chan.clone());
            s
        }
        Process::Sum(p, q) | Process::Par(p, q) => {
            let mut s = channels(p, env, seen)?;
            s.extend(channels(q, env, seen)?);
            s
        }
        Process::Restrict(b, l) => {
            let s = channels(b, env, seen)?;
            s.difference(l).cloned().collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::{named_gate, Slot, VarType};
    use std::sync::Arc;

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    #[test]
    fn nine_clauses() {
        let env = Env::new();
        let c = Chan::new("c");
        assert!(fv(&Process::nil(), &env).unwrap().is_empty());
        let echo = Process::input(c.clone(), v("x"), Process::output(c.clone(), v("x"), Process::nil()));
        assert!(fv(&echo, &env).unwrap().is_empty());
        let h = Arc::new(named_gate("H", vec![Slot::new("a", VarType::qubit())]).unwrap());
        let p = Process::op(
            h,
            vec![v("x")],
            Process::input(c.clone(), v("y"), Process::output(c, v("y"), Process::nil())),
        );
        assert_eq!(fv(&p, &env).unwrap(), [v("x")].into_iter().collect());
        assert!(matches!(
            fv(&Process::constant("A", vec![v("x")]), &env),
            Err(AstError::UnknownConstant(_))
        ));
    }

    #[test]
    fn restriction_hides_channels() {
        let env = Env::new();
        let (c, d) = (Chan::new("c"), Chan::new("d"));
        let p = Process::restrict(
            Process::par(
                Process::output(c.clone(), v("x"), Process::nil()),
                Process::output(d.clone(), v("y"), Process::nil()),
            ),
            [c],
        );
        assert_eq!(free_channels(&p, &env).unwrap(), [d].into_iter().collect());
    }
}
