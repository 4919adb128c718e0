use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use super::{EquivError, GameOptions, Side, WitnessStep};
use crate::ast::{free_vars, Action, Env};
use crate::names::Var;
use crate::qnum::{apply_superop, trace_distance, VarType};
use crate::reduce::normal_form_unfolding;
use crate::sos::{steps, Abstraction, ConfigKey, Configuration, Move, OpRegistry};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Label {
    Tau,
    Out(String, Var),
    Op(usize, Vec<Var>),
}

struct Cfg {
    config: Configuration,
    key: ConfigKey,
    fv: BTreeSet<Var>,
    moves: Option<Arc<CfgMoves>>,
}

struct CfgMoves {
    acts: Vec<(Action, Label, usize)>,
    inputs: Vec<InputMove>,
}

struct InputMove {
    abs: Abstraction,
    /// `fv(cont) − {binder}`.
    rest: BTreeSet<Var>,
}

enum Status {
    Pending,
    /// Related without further play: identical, or λ-close with the same
    /// process.
    Axiom,
    Truncated,
    Expanded(Vec<Clause>),
}

struct Pair {
    l: usize,
    r: usize,
    depth: usize,
    status: Status,
}

/// One challenge: some alternative must have all its pairs related.
struct Clause {
    side: Side,
    challenge: Action,
    alts: Vec<Alt>,
}

struct Alt {
    response: Action,
    pairs: Vec<usize>,
}

pub(crate) struct GameResult {
    /// `Some(true)` related, `Some(false)` refuted, `None` undecided.
    pub decided: Option<bool>,
    pub witness: Option<Vec<WitnessStep>>,
    pub bounds_hit: bool,
    pub undecided: Option<String>,
}

pub(crate) struct Game<'a> {
    env: &'a Env,
    opts: &'a GameOptions,
    reg: &'a OpRegistry,
    cfgs: Vec<Cfg>,
    cfg_index: HashMap<ConfigKey, usize>,
    inst: HashMap<(usize, usize, Var), usize>,
    pairs: Vec<Pair>,
    pair_index: HashMap<(usize, usize), usize>,
    bounds_hit: bool,
}

impl<'a> Game<'a> {
    pub fn new(env: &'a Env, opts: &'a GameOptions, reg: &'a OpRegistry) -> Self {
        Game {
            env,
            opts,
            reg,
            cfgs: Vec::new(),
            cfg_index: HashMap::new(),
            inst: HashMap::new(),
            pairs: Vec::new(),
            pair_index: HashMap::new(),
            bounds_hit: false,
        }
    }

    fn cfg(&mut self, mut config: Configuration) -> Result<usize, EquivError> {
        if self.opts.nf_mode {
            config.process = normal_form_unfolding(&config.process, self.env)?;
        }
        let key = ConfigKey::of(&config, self.env, self.reg)?;
        if let Some(&i) = self.cfg_index.get(&key) {
            return Ok(i);
        }
        let fv = free_vars(&config.process);
        self.cfgs.push(Cfg {
            config,
            key: key.clone(),
            fv,
            moves: None,
        });
        self.cfg_index.insert(key, self.cfgs.len() - 1);
        Ok(self.cfgs.len() - 1)
    }

    fn moves(&mut self, c: usize) -> Result<Arc<CfgMoves>, EquivError> {
        if let Some(m) = &self.cfgs[c].moves {
            return Ok(m.clone());
        }
        let st = steps(&self.cfgs[c].config.process, self.env)?;
        let state = self.cfgs[c].config.state.clone();
        let mut acts = Vec::with_capacity(st.moves.len());
        for (m, cont) in st.moves {
            let (action, label, s) = match m {
                Move::Tau => (Action::Tau, Label::Tau, state.clone()),
                Move::Out(ch, x) => (Action::Out(ch.clone(), x.clone()), Label::Out(ch.to_string(), x), state.clone()),
                Move::Op { op, vars } => {
                    let s = apply_superop(&op, &vars, &state)?;
                    let (id, sorted) = self.reg.intern_prefix(&op, &vars);
                    (Action::Op { op, vars }, Label::Op(id, sorted), s)
                }
            };
            let t = self.cfg(Configuration::new(cont, s))?;
            acts.push((action, label, t));
        }
        let inputs = st
            .inputs
            .into_iter()
            .map(|abs| {
                let mut rest = free_vars(&abs.cont);
                rest.remove(&abs.binder);
                InputMove { abs, rest }
            })
            .collect();
        let m = Arc::new(CfgMoves { acts, inputs });
        self.cfgs[c].moves = Some(m.clone());
        Ok(m)
    }

    fn instance(&mut self, c: usize, i: usize, y: &Var, moves: &CfgMoves) -> Result<usize, EquivError> {
        if let Some(&t) = self.inst.get(&(c, i, y.clone())) {
            return Ok(t);
        }
        let p = moves.inputs[i].abs.instantiate(y, self.env)?;
        let t = self.cfg(Configuration::new(p, self.cfgs[c].config.state.clone()))?;
        self.inst.insert((c, i, y.clone()), t);
        Ok(t)
    }

    fn labels_match(&self, a: &Label, b: &Label) -> Result<bool, EquivError> {
        Ok(match (a, b) {
            (Label::Op(ia, xa), Label::Op(ib, xb)) => {
                xa == xb
                    && (ia == ib
                        || match self.opts.lambda {
                            Some(l) => self.reg.diamond(*ia, *ib, &self.opts.diamond)? <= l + self.opts.slack,
                            None => false,
                        })
            }
            _ => a == b,
        })
    }

    fn pair(&mut self, l: usize, r: usize, depth: usize, queue: &mut VecDeque<usize>) -> Result<usize, EquivError> {
        if let Some(&p) = self.pair_index.get(&(l, r)) {
            return Ok(p);
        }
        let (cl, cr) = (&self.cfgs[l], &self.cfgs[r]);
        let axiom = cl.key == cr.key
            || match self.opts.lambda {
                Some(lambda) if cl.key.process == cr.key.process => {
                    trace_distance(&cl.config.state, &cr.config.state)? <= lambda
                }
                _ => false,
            };
        let status = if axiom {
            Status::Axiom
        } else if depth >= self.opts.depth || self.pairs.len() >= self.opts.max_pairs {
            self.bounds_hit = true;
            Status::Truncated
        } else {
            queue.push_back(self.pairs.len());
            Status::Pending
        };
        self.pairs.push(Pair { l, r, depth, status });
        self.pair_index.insert((l, r), self.pairs.len() - 1);
        Ok(self.pairs.len() - 1)
    }

    /// Variables an input instance is checked at: every non-reserved
    /// register variable of the type outside `excluded`, and the first
    /// fresh one.
    fn targets(&self, ty: &VarType, excluded: &BTreeSet<Var>) -> Vec<Var> {
        let reg = self.cfgs[0].config.state.register();
        let mut out = Vec::new();
        let mut fresh = false;
        for v in reg.vars_of_type(ty) {
            if excluded.contains(v) {
                continue;
            }
            if v.is_fresh() {
                if fresh {
                    continue;
                }
                fresh = true;
            }
            out.push(v.clone());
        }
        out
    }

    fn expand(&mut self, p: usize, queue: &mut VecDeque<usize>) -> Result<(), EquivError> {
        let (l, r, depth) = (self.pairs[p].l, self.pairs[p].r, self.pairs[p].depth);
        let (ml, mr) = (self.moves(l)?, self.moves(r)?);
        let mut clauses = Vec::new();
        for side in [Side::Left, Side::Right] {
            let (mine, theirs) = match side {
                Side::Left => (&ml, &mr),
                Side::Right => (&mr, &ml),
            };
            for (a, la, ca) in &mine.acts {
                let mut alts = Vec::new();
                for (b, lb, cb) in &theirs.acts {
                    if self.labels_match(la, lb)? {
                        let (x, y) = if side == Side::Left { (*ca, *cb) } else { (*cb, *ca) };
                        let q = self.pair(x, y, depth + 1, queue)?;
                        alts.push(Alt {
                            response: b.clone(),
                            pairs: vec![q],
                        });
                    }
                }
                clauses.push(Clause {
                    side,
                    challenge: a.clone(),
                    alts,
                });
            }
            // Input clause: a challenge on some `x` free on neither side.
            let busy: BTreeSet<Var> = self.cfgs[l].fv.union(&self.cfgs[r].fv).cloned().collect();
            let reg = self.cfgs[l].config.state.register().clone();
            for (i, ia) in mine.inputs.iter().enumerate() {
                let Some(x) = reg
                    .vars_of_type(&ia.abs.ty)
                    .filter(|v| !busy.contains(*v))
                    .min_by_key(|v| v.is_fresh())
                    .cloned()
                else {
                    continue;
                };
                let mut alts = Vec::new();
                for (j, ib) in theirs.inputs.iter().enumerate() {
                    if ib.abs.chan != ia.abs.chan || ib.abs.ty != ia.abs.ty {
                        continue;
                    }
                    let excluded: BTreeSet<Var> = ia.rest.union(&ib.rest).cloned().collect();
                    let mut pairs = Vec::new();
                    for y in self.targets(&ia.abs.ty, &excluded) {
                        let (mine_c, their_c) = if side == Side::Left { (l, r) } else { (r, l) };
                        let a_y = self.instance(mine_c, i, &y, mine)?;
                        let b_y = self.instance(their_c, j, &y, theirs)?;
                        let (x1, y1) = if side == Side::Left { (a_y, b_y) } else { (b_y, a_y) };
                        pairs.push(self.pair(x1, y1, depth + 1, queue)?);
                    }
                    alts.push(Alt {
                        response: Action::In(ib.abs.chan.clone(), x.clone()),
                        pairs,
                    });
                }
                clauses.push(Clause {
                    side,
                    challenge: Action::In(ia.abs.chan.clone(), x),
                    alts,
                });
            }
        }
        self.pairs[p].status = Status::Expanded(clauses);
        Ok(())
    }

    /// Plays the game from `<c1, c2>`.
    pub fn run(mut self, c1: Configuration, c2: Configuration) -> Result<GameResult, EquivError> {
        let (l, r) = (self.cfg(c1)?, self.cfg(c2)?);
        let mut queue = VecDeque::new();
        let root = self.pair(l, r, 0, &mut queue)?;
        while let Some(p) = queue.pop_front() {
            self.expand(p, &mut queue)?;
        }
        let (alive, killed) = self.solve(true);
        if !alive[root] {
            return Ok(GameResult {
                decided: Some(false),
                witness: Some(self.witness(root, &killed)),
                bounds_hit: self.bounds_hit,
                undecided: None,
            });
        }
        if !self.bounds_hit {
            return Ok(self.result(Some(true)));
        }
        let (alive, _) = self.solve(false);
        if alive[root] {
            return Ok(self.result(Some(true)));
        }
        let deepest = self
            .pairs
            .iter()
            .filter(|p| matches!(p.status, Status::Truncated))
            .max_by_key(|p| p.depth)
            .map(|p| {
                format!(
                    "{} vs {} at depth {}",
                    self.cfgs[p.l].config.process, self.cfgs[p.r].config.process, p.depth
                )
            });
        let mut res = self.result(None);
        res.undecided = deepest;
        Ok(res)
    }

    fn result(&self, decided: Option<bool>) -> GameResult {
        GameResult {
            decided,
            witness: None,
            bounds_hit: self.bounds_hit,
            undecided: None,
        }
    }

    /// Greatest fixpoint. Truncated pairs count as related when
    /// `optimistic`. Returns liveness and, for killed pairs, the clause that
    /// failed and the order of death.
    fn solve(&self, optimistic: bool) -> (Vec<bool>, Vec<Option<(usize, usize)>>) {
        let n = self.pairs.len();
        let mut alive: Vec<bool> = self
            .pairs
            .iter()
            .map(|p| optimistic || !matches!(p.status, Status::Truncated))
            .collect();
        let mut killed: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, p) in self.pairs.iter().enumerate() {
            if let Status::Expanded(cs) = &p.status {
                for c in cs {
                    for a in &c.alts {
                        for &q in &a.pairs {
                            deps[q].push(i);
                        }
                    }
                }
            }
        }
        let mut work: VecDeque<usize> = (0..n).collect();
        let mut queued = vec![true; n];
        let mut clock = 0;
        while let Some(i) = work.pop_front() {
            queued[i] = false;
            if !alive[i] {
                continue;
            }
            let Status::Expanded(cs) = &self.pairs[i].status else {
                continue;
            };
            let failed = cs
                .iter()
                .position(|c| !c.alts.iter().any(|a| a.pairs.iter().all(|&q| alive[q])));
            if let Some(ci) = failed {
                alive[i] = false;
                killed[i] = Some((ci, clock));
                clock += 1;
                for &d in &deps[i] {
                    if alive[d] && !queued[d] {
                        queued[d] = true;
                        work.push_back(d);
                    }
                }
            }
        }
        (alive, killed)
    }

    fn witness(&self, root: usize, killed: &[Option<(usize, usize)>]) -> Vec<WitnessStep> {
        let mut out = Vec::new();
        let mut cur = root;
        while let Some((ci, _)) = killed[cur] {
            let Status::Expanded(cs) = &self.pairs[cur].status else {
                break;
            };
            let c = &cs[ci];
            out.push(WitnessStep {
                side: c.side,
                action: c.challenge.to_string(),
            });
            // Follow the response whose refutation happened earliest.
            let next = c
                .alts
                .iter()
                .filter_map(|a| {
                    a.pairs
                        .iter()
                        .filter_map(|&q| killed[q].map(|(_, t)| (t, q)))
                        .min()
                        .map(|(t, q)| (t, q, a))
                })
                .min_by_key(|(t, _, _)| *t);
            let Some((_, q, a)) = next else {
                break;
            };
            out.push(WitnessStep {
                side: c.side.other(),
                action: a.response.to_string(),
            });
            cur = q;
        }
        out
    }
}
