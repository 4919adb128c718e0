use std::collections::HashMap;
use std::fmt::Write;
use std::sync::{Arc, Mutex};

use super::{Configuration, SosError};
use crate::ast::{AstError, Env, Process};
use crate::names::Var;
use crate::qnum::{diamond_distance, ComplexMatrix, DiamondOptions, QnumError, SuperOp, TOL_CHOI};

/// Interns super-operators up to channel equality, so that configurations
/// can be keyed by strings and `E[X]` labels compared by id.
///
/// Two operators get the same id when their Choi matrices agree within the
/// registry tolerance. The first operator seen is the representative.
pub struct OpRegistry {
    tol: f64,
    inner: Mutex<Inner>,
}

#[derive(Default)]
struct Inner {
    entries: Vec<(Arc<SuperOp>, ComplexMatrix)>,
    // Keyed by allocation address; `keep` holds the allocations alive so the
    // addresses are never reused.
    by_ptr: HashMap<(usize, Vec<usize>), usize>,
    keep: Vec<Arc<SuperOp>>,
    diamond: HashMap<(usize, usize), f64>,
}

impl Default for OpRegistry {
    fn default() -> Self {
        OpRegistry::new(TOL_CHOI)
    }
}

impl OpRegistry {
    pub fn new(tol: f64) -> Self {
        OpRegistry {
            tol,
            inner: Mutex::new(Inner::default()),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Id of the channel `op`.
    pub fn intern(&self, op: &SuperOp) -> usize {
        let choi = op.choi();
        let mut inner = self.inner.lock().unwrap();
        let dims = op.domain_dims();
        if let Some(i) = inner.entries.iter().position(|(e, j)| {
            e.domain_dims() == dims && j.max_abs_diff(&choi) <= self.tol
        }) {
            return i;
        }
        inner.entries.push((Arc::new(op.clone()), choi));
        inner.entries.len() - 1
    }

    /// The prefix `op[vars]` with its variables sorted: the id of the
    /// correspondingly permuted operator and the sorted variables.
    pub fn intern_prefix(&self, op: &Arc<SuperOp>, vars: &[Var]) -> (usize, Vec<Var>) {
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by(|&i, &j| vars[i].cmp(&vars[j]));
        let sorted: Vec<Var> = order.iter().map(|&i| vars[i].clone()).collect();
        let key = (Arc::as_ptr(op) as usize, order);
        if let Some(&id) = self.inner.lock().unwrap().by_ptr.get(&key) {
            return (id, sorted);
        }
        let permuted = op.permute_slots(&key.1);
        let id = self.intern(&permuted);
        let mut inner = self.inner.lock().unwrap();
        inner.keep.push(op.clone());
        inner.by_ptr.insert(key, id);
        (id, sorted)
    }

    pub fn get(&self, id: usize) -> Arc<SuperOp> {
        self.inner.lock().unwrap().entries[id].0.clone()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cached lower bound on the diamond distance between two interned
    /// operators.
    pub fn diamond(&self, a: usize, b: usize, opts: &DiamondOptions) -> Result<f64, QnumError> {
        if a == b {
            return Ok(0.0);
        }
        let k = (a.min(b), a.max(b));
        if let Some(&d) = self.inner.lock().unwrap().diamond.get(&k) {
            return Ok(d);
        }
        let (e, f) = (self.get(k.0), self.get(k.1));
        let d = if e.domain_dims() != f.domain_dims() {
            1.0
        } else {
            diamond_distance(&e, &f, opts)?
        };
        self.inner.lock().unwrap().diamond.insert(k, d);
        Ok(d)
    }
}

/// Key of a configuration: the α-canonical process text (operators by
/// registry id) and the state rounded to the dedup grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigKey {
    pub process: String,
    pub state: Vec<i64>,
}

impl ConfigKey {
    pub fn of(c: &Configuration, env: &Env, reg: &OpRegistry) -> Result<Self, SosError> {
        Ok(ConfigKey {
            process: process_key(&c.process, env, reg)?,
            state: c.state.grid_key(),
        })
    }
}

/// Fully parenthesised text of the α-canonical form of `p`; equal keys
/// mean α-equivalent processes with channel-equal operators.
pub fn process_key(p: &Process, env: &Env, reg: &OpRegistry) -> Result<String, SosError> {
    let mut out = String::new();
    write_key(p, env, reg, &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn write_key(
    p: &Process,
    env: &Env,
    reg: &OpRegistry,
    scope: &mut Vec<(Var, Var, String)>,
    out: &mut String,
) -> Result<(), SosError> {
    let rn = |v: &Var, scope: &[(Var, Var, String)]| {
        scope
            .iter()
            .rev()
            .find(|(old, _, _)| old == v)
            .map(|(_, new, _)| new.clone())
            .unwrap_or_else(|| v.clone())
    };
    match p {
        Process::Nil => out.push('0'),
        Process::Const { name, args } => {
            let _ = write!(out, "{name}(");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(rn(a, scope).as_str());
            }
            out.push(')');
        }
        Process::Tau(b) => {
            out.push_str("t.");
            write_key(b, env, reg, scope, out)?;
        }
        Process::Op { op, vars, body } => {
            let mapped: Vec<Var> = vars.iter().map(|v| rn(v, scope)).collect();
            let (id, sorted) = reg.intern_prefix(op, &mapped);
            let _ = write!(out, "@{id}[");
            for (i, v) in sorted.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(v.as_str());
            }
            out.push_str("].");
            write_key(body, env, reg, scope, out)?;
        }
        Process::Input { chan, var, body } => {
            let ty = env.type_of(var).ok_or_else(|| AstError::UnknownVar(var.to_string()))?;
            let k = scope.iter().filter(|(_, _, t)| *t == ty.name).count();
            let new = Var::bound(&ty.name, k);
            let _ = write!(out, "{chan}?{new}.");
            scope.push((var.clone(), new, ty.name));
            let r = write_key(body, env, reg, scope, out);
            scope.pop();
            r?;
        }
        Process::Output { chan, var, body } => {
            let _ = write!(out, "{chan}!{}.", rn(var, scope));
            write_key(body, env, reg, scope, out)?;
        }
        Process::Sum(a, b) | Process::Par(a, b) => {
            out.push('(');
            write_key(a, env, reg, scope, out)?;
            out.push(if matches!(p, Process::Sum(..)) { '+' } else { '|' });
            write_key(b, env, reg, scope, out)?;
            out.push(')');
        }
        Process::Restrict(b, l) => {
            out.push('(');
            write_key(b, env, reg, scope, out)?;
            out.push_str(")\\{");
            for (i, c) in l.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(c.as_str());
            }
            out.push('}');
        }
    }
    Ok(())
}
