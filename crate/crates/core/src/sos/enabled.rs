use std::collections::BTreeSet;

use super::step::{steps, Move};
use super::{Configuration, SosError};
use crate::ast::{Action, Env};
use crate::names::Var;
use crate::qnum::{apply_superop, Register, VarType};

/// Which register variables an input may receive into.
///
/// Every non-reserved variable of the binder's type that passes the side
/// condition is a target. Of the reserved fresh variables `#<type>_k` only
/// the first admissible one is used unless `all_fresh` is set; fresh names
/// are interchangeable up to renaming.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FreshPolicy {
    pub all_fresh: bool,
}

/// A concrete transition.
#[derive(Clone, Debug)]
pub struct Transition {
    pub action: Action,
    pub target: Configuration,
}

/// Admissible targets of an input with binder type `ty`, in register order.
pub fn input_targets(register: &Register, ty: &VarType, forbidden: &BTreeSet<Var>, policy: FreshPolicy) -> Vec<Var> {
    let mut out = Vec::new();
    let mut fresh_taken = false;
    for v in register.vars_of_type(ty) {
        if forbidden.contains(v) {
            continue;
        }
        if v.is_fresh() {
            if fresh_taken && !policy.all_fresh {
                continue;
            }
            fresh_taken = true;
        }
        out.push(v.clone());
    }
    out.sort_by_key(|v| v.is_fresh());
    out
}

/// All transitions of a configuration, in a fixed order.
pub fn enabled(c: &Configuration, env: &Env, policy: FreshPolicy) -> Result<Vec<Transition>, SosError> {
    let st = steps(&c.process, env)?;
    let mut out = Vec::with_capacity(st.moves.len() + st.inputs.len());
    for (m, cont) in st.moves {
        let (action, state) = match m {
            Move::Tau => (Action::Tau, c.state.clone()),
            Move::Out(ch, x) => (Action::Out(ch, x), c.state.clone()),
            Move::Op { op, vars } => {
                let s = apply_superop(&op, &vars, &c.state)?;
                (Action::Op { op, vars }, s)
            }
        };
        out.push(Transition {
            action,
            target: Configuration::new(cont, state),
        });
    }
    for abs in st.inputs {
        let targets = input_targets(c.state.register(), &abs.ty, &abs.forbidden, policy);
        if targets.is_empty() {
            return Err(SosError::NoTarget {
                chan: abs.chan.to_string(),
                ty: abs.ty.name.clone(),
            });
        }
        for y in targets {
            let p = abs.instantiate(&y, env)?;
            out.push(Transition {
                action: Action::In(abs.chan.clone(), y),
                target: Configuration::new(p, c.state.clone()),
            });
        }
    }
    Ok(out)
}
