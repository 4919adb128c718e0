use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::fv::{check_constants, free_vars};
use super::process::{Env, Process};
use super::AstError;
use crate::names::Var;

/// A substitution of quantum variables: an injective, type-preserving map
/// that is the identity outside a finite set.
///
/// Only the non-identity part is stored. Because the map is injective with
/// finite support it is a permutation of that support; in particular
/// `{y/x}` exchanges `x` and `y`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Subst {
    map: BTreeMap<Var, Var>,
}

impl Subst {
    pub fn identity() -> Self {
        Subst::default()
    }

    /// Builds `f` from pairs `(x, f(x))`. Values that are images but not
    /// listed as arguments receive the unused arguments of the same type as
    /// preimages, matched in sorted order.
    pub fn new(pairs: impl IntoIterator<Item = (Var, Var)>, env: &Env) -> Result<Self, AstError> {
        let mut given: BTreeMap<Var, Var> = BTreeMap::new();
        for (x, y) in pairs {
            let tx = env.type_of(&x).ok_or_else(|| AstError::UnknownVar(x.to_string()))?;
            let ty = env.type_of(&y).ok_or_else(|| AstError::UnknownVar(y.to_string()))?;
            if tx != ty {
                return Err(AstError::BadSubst(format!("`{x}` : {tx} cannot be replaced by `{y}` : {ty}")));
            }
            if let Some(prev) = given.insert(x.clone(), y.clone()) {
                if prev != y {
                    return Err(AstError::BadSubst(format!("`{x}` is mapped to both `{prev}` and `{y}`")));
                }
            }
        }
        let mut images = BTreeSet::new();
        for (x, y) in &given {
            if !images.insert(y.clone()) {
                return Err(AstError::BadSubst(format!("not injective: `{y}` is the image of `{x}` and another variable")));
            }
        }
        let domain: BTreeSet<Var> = given.keys().cloned().collect();
        let mut orphans: BTreeMap<String, Vec<Var>> = BTreeMap::new();
        for y in images.difference(&domain) {
            orphans.entry(env.type_of(y).unwrap().name).or_default().push(y.clone());
        }
        let mut spare: BTreeMap<String, Vec<Var>> = BTreeMap::new();
        for x in domain.difference(&images) {
            spare.entry(env.type_of(x).unwrap().name).or_default().push(x.clone());
        }
        for (ty, ys) in orphans {
            let xs = spare.remove(&ty).unwrap_or_default();
            for (y, x) in ys.into_iter().zip(xs) {
                given.insert(y, x);
            }
        }
        given.retain(|x, y| x != y);
        Ok(Subst { map: given })
    }

    /// The transposition of `x` and `y`. Callers guarantee equal types.
    pub fn swap(x: &Var, y: &Var) -> Self {
        let mut map = BTreeMap::new();
        if x != y {
            map.insert(x.clone(), y.clone());
            map.insert(y.clone(), x.clone());
        }
        Subst { map }
    }

    pub fn apply(&self, v: &Var) -> Var {
        self.map.get(v).cloned().unwrap_or_else(|| v.clone())
    }

    pub fn inverse(&self) -> Subst {
        Subst {
            map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Subst) -> Subst {
        let mut map = BTreeMap::new();
        for v in self.map.keys().chain(first.map.keys()) {
            let w = self.apply(&first.apply(v));
            if &w != v {
                map.insert(v.clone(), w);
            }
        }
        Subst { map }
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Var, &Var)> {
        self.map.iter()
    }

    /// Variables of `vars` moved onto another variable of `vars`.
    pub fn conflicts(&self, vars: &BTreeSet<Var>) -> Vec<Var> {
        vars.iter()
            .filter(|x| {
                let y = self.apply(x);
                &y != *x && vars.contains(&y)
            })
            .cloned()
            .collect()
    }
}

impl fmt::Debug for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, y)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{y}/{x}")?;
        }
        write!(f, "}}")
    }
}

/// `Pf`, refusing substitutions that are not well-defined on `p`: a free
/// variable may not be sent onto a different free variable.
pub fn subst_apply(p: &Process, f: &Subst, env: &Env) -> Result<Process, AstError> {
    check_constants(p, env)?;
    let conflicts = f.conflicts(&free_vars(p));
    if let Some(x) = conflicts.first() {
        return Err(AstError::IllDefinedSubst(format!(
            "`{x}` would be replaced by `{}`, which is already free",
            f.apply(x)
        )));
    }
    apply_unchecked(p, f, env)
}

/// `Pf` by the nine defining clauses, without the well-definedness check.
pub fn apply_unchecked(p: &Process, f: &Subst, env: &Env) -> Result<Process, AstError> {
    if f.is_identity() {
        return Ok(p.clone());
    }
    Ok(match p {
        Process::Const { name, args } => Process::Const {
            name: name.clone(),
            args: args.iter().map(|a| f.apply(a)).collect(),
        },
        Process::Nil => Process::Nil,
        Process::Tau(b) => Process::tau(apply_unchecked(b, f, env)?),
        Process::Op { op, vars, body } => Process::Op {
            op: op.clone(),
            vars: vars.iter().map(|v| f.apply(v)).collect(),
            body: Box::new(apply_unchecked(body, f, env)?),
        },
        Process::Input { chan, var: x, body } => {
            let fv_body = free_vars(body);
            let image: BTreeSet<Var> = fv_body.iter().map(|v| f.apply(v)).collect();
            let y = if !image.contains(x) {
                x.clone()
            } else {
                let ty = env.type_of(x).ok_or_else(|| AstError::UnknownVar(x.to_string()))?;
                (0..)
                    .map(|k| Var::bound(&ty.name, k))
                    .find(|y| !image.contains(y) && !(fv_body.contains(y) && y != x))
                    .unwrap()
            };
            // f_y = f ∘ (f⁻¹(y) y); the body is renamed by f_y ∘ {y/x}.
            let pre = f.inverse().apply(&y);
            let f_y = f.after(&Subst::swap(&pre, &y));
            let g = f_y.after(&Subst::swap(x, &y));
            Process::input(chan.clone(), y, apply_unchecked(body, &g, env)?)
        }
        Process::Output { chan, var, body } => {
            Process::output(chan.clone(), f.apply(var), apply_unchecked(body, f, env)?)
        }
        Process::Sum(a, b) => Process::sum(apply_unchecked(a, f, env)?, apply_unchecked(b, f, env)?),
        Process::Par(a, b) => Process::par(apply_unchecked(a, f, env)?, apply_unchecked(b, f, env)?),
        Process::Restrict(b, l) => Process::Restrict(Box::new(apply_unchecked(b, f, env)?), l.clone()),
    })
}
