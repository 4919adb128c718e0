use std::collections::HashMap;
use std::fmt::Write;

use rayon::prelude::*;
use serde_json::json;

use super::enabled::{enabled, FreshPolicy, Transition};
use super::key::{ConfigKey, OpRegistry};
use super::{Configuration, SosError};
use crate::ast::{Action, Env};
use crate::qnum::TOL_CHOI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LtsBounds {
    pub max_depth: usize,
    pub max_nodes: usize,
}

impl Default for LtsBounds {
    fn default() -> Self {
        LtsBounds {
            max_depth: 64,
            max_nodes: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LtsNode {
    pub config: Configuration,
    pub depth: usize,
    /// Set when some successor was not explored because a bound was hit.
    pub truncated: bool,
}

/// A finite fragment of the transition system reachable from `root`.
#[derive(Clone, Debug)]
pub struct Lts {
    pub nodes: Vec<LtsNode>,
    pub edges: Vec<(usize, Action, usize)>,
    pub root: usize,
}

impl Lts {
    pub fn is_truncated(&self) -> bool {
        self.nodes.iter().any(|n| n.truncated)
    }

    pub fn successors(&self, n: usize) -> impl Iterator<Item = &(usize, Action, usize)> {
        self.edges.iter().filter(move |e| e.0 == n)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph lts {\n  node [shape=box];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let mut label = format!("{}\\n{}", escape(&n.config.process.to_string()), n.config.state.fingerprint());
            if n.truncated {
                label.push_str("\\n(truncated)");
            }
            let _ = writeln!(s, "  n{i} [label=\"{label}\"{}];", if i == self.root { ", penwidth=2" } else { "" });
        }
        for (a, act, b) in &self.edges {
            let _ = writeln!(s, "  n{a} -> n{b} [label=\"{}\"];", escape(&act.to_string()));
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<_> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                json!({
                    "id": i,
                    "process": n.config.process.to_string(),
                    "state": n.config.state.fingerprint(),
                    "depth": n.depth,
                })
            })
            .collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|(a, act, b)| json!({"from": a, "to": b, "action": act.to_string()}))
            .collect();
        let truncated: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.nodes[i].truncated).collect();
        json!({"nodes": nodes, "edges": edges, "root": self.root, "truncated": truncated})
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Breadth-first closure of [`enabled`] from `c0`. Nodes are identified up
/// to α-conversion, channel equality and the state grid. Each frontier is
/// expanded in parallel and merged in order, so the result does not depend
/// on scheduling.
pub fn build_lts(c0: Configuration, env: &Env, bounds: LtsBounds, policy: FreshPolicy) -> Result<Lts, SosError> {
    let reg = OpRegistry::default();
    let mut index: HashMap<ConfigKey, usize> = HashMap::new();
    index.insert(ConfigKey::of(&c0, env, &reg)?, 0);
    let mut lts = Lts {
        nodes: vec![LtsNode {
            config: c0,
            depth: 0,
            truncated: false,
        }],
        edges: Vec::new(),
        root: 0,
    };
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let expanded: Vec<Result<Vec<(Transition, ConfigKey)>, SosError>> = frontier
            .par_iter()
            .map(|&n| {
                enabled(&lts.nodes[n].config, env, policy)?
                    .into_iter()
                    .map(|t| {
                        let k = ConfigKey::of(&t.target, env, &reg)?;
                        Ok((t, k))
                    })
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for (&n, ts) in frontier.iter().zip(expanded) {
            let ts = ts?;
            if ts.is_empty() {
                continue;
            }
            let depth = lts.nodes[n].depth;
            if depth >= bounds.max_depth {
                lts.nodes[n].truncated = true;
                continue;
            }
            let mut seen: Vec<(Action, usize)> = Vec::new();
            for (t, k) in ts {
                let target = match index.get(&k) {
                    Some(&m) => m,
                    None if lts.nodes.len() >= bounds.max_nodes => {
                        lts.nodes[n].truncated = true;
                        continue;
                    }
                    None => {
                        let m = lts.nodes.len();
                        index.insert(k, m);
                        lts.nodes.push(LtsNode {
                            config: t.target,
                            depth: depth + 1,
                            truncated: false,
                        });
                        next.push(m);
                        m
                    }
                };
                if seen.iter().any(|(a, m)| *m == target && a.matches(&t.action, TOL_CHOI)) {
                    continue;
                }
                seen.push((t.action.clone(), target));
                lts.edges.push((n, t.action, target));
            }
        }
        frontier = next;
    }
    Ok(lts)
}
