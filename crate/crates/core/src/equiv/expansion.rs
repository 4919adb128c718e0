use std::collections::BTreeSet;

use super::EquivError;
use crate::ast::{apply_unchecked, free_vars, Env, Process, Subst};
use crate::names::Chan;
use crate::sos::{steps, Move};

/// The right-hand side of the expansion law for `(p ‖ q) \ l`: one summand
/// per first step of `p ‖ q` whose channel is not restricted, each
/// continuing under the same restriction. Communications are included as
/// τ-summands.
pub fn expansion_rhs(p: &Process, q: &Process, l: &BTreeSet<Chan>, env: &Env) -> Result<Process, EquivError> {
    if !p.is_finite() || !q.is_finite() {
        return Err(EquivError::Setup("the expansion law applies to processes without constants".into()));
    }
    let whole = Process::par(p.clone(), q.clone());
    let wrap = |c: Process| {
        if l.is_empty() {
            c
        } else {
            Process::Restrict(Box::new(c), l.clone())
        }
    };
    let st = steps(&whole, env)?;
    let mut summands = Vec::new();
    for (m, c) in st.moves {
        let c = wrap(c);
        summands.push(match m {
            Move::Tau => Process::tau(c),
            Move::Op { op, vars } => Process::op(op, vars, c),
            Move::Out(ch, _) if l.contains(&ch) => continue,
            Move::Out(ch, x) => Process::output(ch, x, c),
        });
    }
    let busy = free_vars(&whole);
    for abs in st.inputs {
        if l.contains(&abs.chan) {
            continue;
        }
        let (mut binder, mut cont) = (abs.binder, abs.cont);
        // Binders renamed apart by the semantics get a declared name back
        // when one is unused.
        if binder.is_reserved() {
            let fv = free_vars(&cont);
            if let Some(v) = env
                .vars
                .iter()
                .find(|(v, t)| **t == abs.ty && !fv.contains(*v) && !busy.contains(*v))
                .map(|(v, _)| v.clone())
            {
                cont = apply_unchecked(&cont, &Subst::swap(&binder, &v), env)?;
                binder = v;
            }
        }
        summands.push(Process::input(abs.chan, binder, wrap(cont)));
    }
    Ok(Process::sum_of(summands))
}
