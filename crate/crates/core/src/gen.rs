//! Random well-formed processes over a small fixed vocabulary, for property
//! tests and the self-test.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::ast::{free_channels, Env, Process, Subst};
use crate::names::{Chan, Var};
use crate::parse::{parse_file, SourceFile};
use crate::qnum::SuperOp;

/// Declarations every generated term is interpreted in.
pub const SOURCE: &str = "
chan c, d, e;
var x, y, z, u, v : qubit;
op H = gate H;
op X = gate X;
op T = gate T;
op S = gate S;
op I = gate I;
op CNOT = gate CNOT;
op Amp = amplitude_damping(0.3);
op M = measure computational on (a:qubit);
op M0 = branch 0 of M;
state s0 = x:|0>, y:|0>, z:|0>;
state s1 = x:|+>, y:|1>, z:|->;
state bell = (x, y):bell00, z:|0>;
";

/// The monoid and restriction laws, in the order [`Gen::law_instance`]
/// numbers them.
pub const LAWS: [&str; 9] = [
    "P+Q ~ Q+P",
    "P+(Q+R) ~ (P+Q)+R",
    "P+P ~ P",
    "P+nil ~ P",
    "P||Q ~ Q||P",
    "P||(Q||R) ~ (P||Q)||R",
    "P||nil ~ P",
    "P\\L ~ P when cn(P) and L are disjoint",
    "(P\\K)\\L ~ P\\(K u L)",
];

#[derive(Clone, Debug)]
pub struct Gen {
    pub file: SourceFile,
    /// Variables generated terms may have free.
    pub free: Vec<Var>,
    /// Names used for input binders.
    pub binders: Vec<Var>,
    pub chans: Vec<Chan>,
    pub max_depth: usize,
    /// Draw only from the trace-preserving operations.
    pub trace_preserving: bool,
    pub inputs: bool,
    pub restrictions: bool,
}

impl Default for Gen {
    fn default() -> Self {
        Gen::new()
    }
}

impl Gen {
    pub fn new() -> Self {
        let file = parse_file(SOURCE).expect("generator vocabulary parses");
        Gen {
            file,
            free: ["x", "y", "z"].map(Var::new).to_vec(),
            binders: ["u", "v", "x"].map(Var::new).to_vec(),
            chans: ["c", "d", "e"].map(Chan::new).to_vec(),
            max_depth: 4,
            trace_preserving: false,
            inputs: true,
            restrictions: true,
        }
    }

    pub fn env(&self) -> &Env {
        &self.file.env
    }

    fn ops(&self, arity: usize) -> Vec<Arc<SuperOp>> {
        let names: &[&str] = match (arity, self.trace_preserving) {
            (1, true) => &["H", "X", "T", "S", "I", "Amp"],
            (1, false) => &["H", "X", "T", "S", "I", "Amp", "M0"],
            _ => &["CNOT"],
        };
        names.iter().map(|n| self.file.env.ops[*n].clone()).collect()
    }

    /// A process of depth at most `max_depth` with free variables among
    /// `self.free`.
    pub fn process<R: Rng + ?Sized>(&self, rng: &mut R) -> Process {
        self.process_over(rng, self.max_depth, &self.free)
    }

    /// A process of depth at most `depth` whose free variables lie in
    /// `avail`.
    pub fn process_over<R: Rng + ?Sized>(&self, rng: &mut R, depth: usize, avail: &[Var]) -> Process {
        if depth == 0 {
            return Process::nil();
        }
        let d = depth - 1;
        loop {
            match rng.random_range(0..100) {
                0..8 => return Process::nil(),
                8..18 => return Process::tau(self.process_over(rng, d, avail)),
                18..36 => {
                    let arity = if avail.len() >= 2 && rng.random_bool(0.2) { 2 } else { 1 };
                    if avail.len() < arity {
                        continue;
                    }
                    let vars: Vec<Var> = avail.choose_multiple(rng, arity).cloned().collect();
                    let op = self.ops(arity).choose(rng).unwrap().clone();
                    return Process::op(op, vars, self.process_over(rng, d, avail));
                }
                36..50 => {
                    let Some(x) = avail.choose(rng).cloned() else { continue };
                    let rest: Vec<Var> = avail.iter().filter(|v| **v != x).cloned().collect();
                    let c = self.chans.choose(rng).unwrap().clone();
                    return Process::output(c, x, self.process_over(rng, d, &rest));
                }
                50..64 => {
                    if !self.inputs {
                        continue;
                    }
                    let b = self.binders.choose(rng).unwrap().clone();
                    let mut inner = avail.to_vec();
                    if !inner.contains(&b) {
                        inner.push(b.clone());
                    }
                    let c = self.chans.choose(rng).unwrap().clone();
                    return Process::input(c, b, self.process_over(rng, d, &inner));
                }
                64..78 => return Process::sum(self.process_over(rng, d, avail), self.process_over(rng, d, avail)),
                78..92 => {
                    let (l, r) = self.split(rng, avail);
                    return Process::par(self.process_over(rng, d, &l), self.process_over(rng, d, &r));
                }
                _ => {
                    if !self.restrictions {
                        continue;
                    }
                    let l = self.channel_set(rng);
                    if l.is_empty() {
                        continue;
                    }
                    return Process::Restrict(Box::new(self.process_over(rng, d, avail)), l);
                }
            }
        }
    }

    /// Both sides of law `k` (0-based) on random operands.
    pub fn law_instance<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> (Process, Process) {
        let d = self.max_depth;
        let any = |rng: &mut R| self.process_over(rng, d, &self.free);
        match k {
            0 => {
                let (p, q) = (any(rng), any(rng));
                (Process::sum(p.clone(), q.clone()), Process::sum(q, p))
            }
            1 => {
                let (p, q, r) = (any(rng), any(rng), any(rng));
                (
                    Process::sum(p.clone(), Process::sum(q.clone(), r.clone())),
                    Process::sum(Process::sum(p, q), r),
                )
            }
            2 => {
                let p = any(rng);
                (Process::sum(p.clone(), p.clone()), p)
            }
            3 => {
                let p = any(rng);
                (Process::sum(p.clone(), Process::nil()), p)
            }
            4 => {
                let (a, b) = self.split(rng, &self.free);
                let (p, q) = (self.process_over(rng, d, &a), self.process_over(rng, d, &b));
                (Process::par(p.clone(), q.clone()), Process::par(q, p))
            }
            5 => {
                let (a, rest) = self.split(rng, &self.free);
                let (b, c) = self.split(rng, &rest);
                let (p, q, r) = (
                    self.process_over(rng, d, &a),
                    self.process_over(rng, d, &b),
                    self.process_over(rng, d, &c),
                );
                (
                    Process::par(p.clone(), Process::par(q.clone(), r.clone())),
                    Process::par(Process::par(p, q), r),
                )
            }
            6 => {
                let p = any(rng);
                (Process::par(p.clone(), Process::nil()), p)
            }
            7 => loop {
                let p = any(rng);
                let cn = free_channels(&p, self.env()).expect("generated terms are closed");
                let l: BTreeSet<Chan> = self.chans.iter().filter(|c| !cn.contains(*c)).cloned().collect();
                if !l.is_empty() {
                    break (restricted(p.clone(), l), p);
                }
            },
            _ => loop {
                let (kk, l) = (self.channel_set(rng), self.channel_set(rng));
                if kk.is_empty() || l.is_empty() {
                    continue;
                }
                let p = any(rng);
                let both: BTreeSet<Chan> = kk.union(&l).cloned().collect();
                break (restricted(restricted(p.clone(), kk), l), restricted(p, both));
            },
        }
    }

    /// A random split of `avail` into two disjoint parts.
    pub fn split<R: Rng + ?Sized>(&self, rng: &mut R, avail: &[Var]) -> (Vec<Var>, Vec<Var>) {
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for v in avail {
            if rng.random_bool(0.5) {
                l.push(v.clone());
            } else {
                r.push(v.clone());
            }
        }
        (l, r)
    }

    /// A random, possibly empty, set of channels.
    pub fn channel_set<R: Rng + ?Sized>(&self, rng: &mut R) -> BTreeSet<Chan> {
        self.chans.iter().filter(|_| rng.random_bool(0.4)).cloned().collect()
    }

    /// A random permutation of the declared qubit variables.
    pub fn permutation<R: Rng + ?Sized>(&self, rng: &mut R) -> Subst {
        let vars: Vec<Var> = ["x", "y", "z", "u", "v"].map(Var::new).to_vec();
        let mut img = vars.clone();
        img.shuffle(rng);
        Subst::new(vars.into_iter().zip(img), &self.file.env).expect("a permutation is a substitution")
    }

    /// A random single replacement `{y/x}` (completed to a transposition).
    pub fn replacement<R: Rng + ?Sized>(&self, rng: &mut R) -> Subst {
        let vars: Vec<Var> = ["x", "y", "z", "u", "v"].map(Var::new).to_vec();
        let pick: Vec<&Var> = vars.choose_multiple(rng, 2).collect();
        Subst::swap(pick[0], pick[1])
    }
}

fn restricted(p: Process, l: BTreeSet<Chan>) -> Process {
    Process::Restrict(Box::new(p), l)
}
