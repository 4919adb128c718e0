use super::*;
use crate::ast::{alpha_eq, Action};
use crate::names::Var;
use crate::parse::{build_register, parse_file, parse_process, SourceFile};
use crate::qnum::{kets, ComplexMatrix, QState};

const SRC: &str = "
chan c, d;
var x, y, z, u, v, x0 : qubit;
op H = gate H;
op CNOT = gate CNOT;
op U = gate CNOT;
P2(x) = c!x.nil;
Q(x) = (c?y.H[y].nil || P2(x)) \\ {c};
R(x, z) = (c?y.CNOT[y,z].nil || P2(x)) \\ {c};
Copier = c?y.d?z.U[y,z].c!y.c!z.Copier;
S(x, x0) = (Copier || c!x.c?u.c?v.nil || d!x0.nil) \\ {c, d};
state zero = x:|0>;
state sigma = x:|+>, z:|0>;
";

fn file() -> SourceFile {
    parse_file(SRC).unwrap()
}

fn config(f: &SourceFile, proc_src: &str, state: &str, fresh: usize) -> Configuration {
    let p = parse_process(proc_src, &f.env).unwrap();
    let s = f.state(state).unwrap();
    let reg = build_register(&[&p], &[s], &f.env, fresh).unwrap();
    Configuration::new(p, s.instantiate(&reg).unwrap())
}

fn x(s: &str) -> Var {
    Var::new(s)
}

#[test]
fn nil_has_no_transitions() {
    let f = file();
    let c = config(&f, "nil", "zero", 1);
    assert!(enabled(&c, &f.env, FreshPolicy::default()).unwrap().is_empty());
}

#[test]
fn restricted_communication_is_the_only_move() {
    let f = file();
    let c = config(&f, "(c?y.d!y.nil || c!x.nil) \\ {c}", "zero", 1);
    let ts = enabled(&c, &f.env, FreshPolicy::default()).unwrap();
    assert_eq!(ts.len(), 1);
    assert!(matches!(ts[0].action, Action::Tau));
    let expect = parse_process("(d!x.nil || nil) \\ {c}", &f.env).unwrap();
    assert!(alpha_eq(&ts[0].target.process, &expect));
    assert_eq!(ts[0].target.state.matrix(), c.state.matrix());
}

#[test]
fn hadamard_after_receiving() {
    let f = file();
    let c = config(&f, "Q(x)", "zero", 1);
    let ts = enabled(&c, &f.env, FreshPolicy::default()).unwrap();
    assert_eq!(ts.len(), 1);
    let ts = enabled(&ts[0].target, &f.env, FreshPolicy::default()).unwrap();
    assert_eq!(ts.len(), 1);
    assert_eq!(ts[0].action.to_string(), "H[x]");
    let plus = ComplexMatrix::outer(&kets::plus());
    let reduced = ts[0].target.state.partial_trace(&[x("x")]).unwrap();
    assert!(reduced.matrix().max_abs_diff(&plus) < 1e-12);
}

#[test]
fn bell_pair_from_cnot() {
    let f = file();
    let c = config(&f, "R(x,z)", "sigma", 1);
    let t1 = enabled(&c, &f.env, FreshPolicy::default()).unwrap();
    let t2 = enabled(&t1[0].target, &f.env, FreshPolicy::default()).unwrap();
    assert_eq!(t2[0].action.to_string(), "CNOT[x,z]");
    let xz = t2[0].target.state.partial_trace(&[x("x"), x("z")]).unwrap();
    assert!(xz.matrix().max_abs_diff(&ComplexMatrix::outer(&kets::bell(0))) < 1e-9);
}

#[test]
fn input_targets_follow_policy() {
    let f = file();
    let p = parse_process("c?u.c!u.nil", &f.env).unwrap();
    let reg = crate::qnum::Register::new(
        [x("x"), x("y"), Var::fresh("qubit", 0), Var::fresh("qubit", 1)]
            .into_iter()
            .map(|v| (v, crate::qnum::VarType::qubit())),
    )
    .unwrap();
    let st = steps(&p, &f.env).unwrap();
    let t = input_targets(&reg, &st.inputs[0].ty, &st.inputs[0].forbidden, FreshPolicy::default());
    assert_eq!(t, vec![x("x"), x("y"), Var::fresh("qubit", 0)]);
    let all = input_targets(&reg, &st.inputs[0].ty, &st.inputs[0].forbidden, FreshPolicy { all_fresh: true });
    assert_eq!(all.len(), 4);

    // A free variable of the prefix is never a target.
    let q = parse_process("c?u.c!u.nil + d!x.nil", &f.env).unwrap();
    let st = steps(&q, &f.env).unwrap();
    let t = input_targets(&reg, &st.inputs[0].ty, &st.inputs[0].forbidden, FreshPolicy::default());
    assert_eq!(t, vec![x("x"), x("y"), Var::fresh("qubit", 0)]);
    let q = parse_process("c?u.c!u.d!x.nil", &f.env).unwrap();
    let st = steps(&q, &f.env).unwrap();
    let t = input_targets(&reg, &st.inputs[0].ty, &st.inputs[0].forbidden, FreshPolicy::default());
    assert_eq!(t, vec![x("y"), Var::fresh("qubit", 0)]);

    let empty = crate::qnum::Register::empty();
    let c = Configuration::new(p, QState::pure(empty, &[crate::qnum::C64::new(1.0, 0.0)]).unwrap());
    assert!(matches!(enabled(&c, &f.env, FreshPolicy::default()), Err(SosError::NoTarget { .. })));
}

#[test]
fn interleaving_renames_a_captured_binder() {
    let f = file();
    // The left input binder `x` is free on the right.
    let p = parse_process("c?x.d!x.nil || d!x.nil", &f.env).unwrap();
    let st = steps(&p, &f.env).unwrap();
    let abs = &st.inputs[0];
    assert_ne!(abs.binder, x("x"));
    assert!(abs.forbidden.contains(&x("x")));
    let r = abs.instantiate(&x("y"), &f.env).unwrap();
    assert!(alpha_eq(&r, &parse_process("d!y.nil || d!x.nil", &f.env).unwrap()));
}

#[test]
fn copier_trace() {
    let f = file();
    let c = config(&f, "S(x,x0)", "zero", 1);
    let lts = build_lts(c, &f.env, LtsBounds::default(), FreshPolicy::default()).unwrap();
    assert!(!lts.is_truncated());
    // Follow the unique path from the root.
    let mut n = lts.root;
    let mut labels = Vec::new();
    loop {
        let out: Vec<_> = lts.successors(n).collect();
        if out.is_empty() {
            break;
        }
        assert_eq!(out.len(), 1, "branching at {}", lts.nodes[n].config.process);
        labels.push(out[0].1.to_string());
        n = out[0].2;
        if labels.len() > 5 {
            break;
        }
    }
    assert_eq!(labels[..5], ["tau", "tau", "U[x,x0]", "tau", "tau"]);
}

#[test]
fn lts_export_is_deterministic() {
    let f = file();
    let c = config(&f, "R(x,z)", "sigma", 1);
    let a = build_lts(c.clone(), &f.env, LtsBounds::default(), FreshPolicy::default()).unwrap();
    let b = build_lts(c, &f.env, LtsBounds::default(), FreshPolicy::default()).unwrap();
    assert_eq!(a.to_dot(), b.to_dot());
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.nodes.len(), 3);
    let j = a.to_json();
    assert_eq!(j["root"], 0);
    assert_eq!(j["edges"].as_array().unwrap().len(), 2);
}

#[test]
fn depth_bound_truncates() {
    let f = file();
    let c = config(&f, "tau.tau.tau.nil", "zero", 1);
    let lts = build_lts(
        c,
        &f.env,
        LtsBounds {
            max_depth: 2,
            max_nodes: 100,
        },
        FreshPolicy::default(),
    )
    .unwrap();
    assert_eq!(lts.nodes.len(), 3);
    assert!(lts.nodes[2].truncated);
}

#[test]
fn keys_identify_alpha_variants_and_equal_channels() {
    let f = file();
    let reg = OpRegistry::default();
    let k = |s: &str| process_key(&parse_process(s, &f.env).unwrap(), &f.env, &reg).unwrap();
    assert_eq!(k("c?y.c!y.nil"), k("c?u.c!u.nil"));
    assert_ne!(k("c?y.c!y.nil"), k("c?y.c!x.nil"));
    assert_eq!(k("CNOT[x,z].nil"), k("CNOT[x,z].nil"));
    assert_ne!(k("CNOT[x,z].nil"), k("CNOT[z,x].nil"));
    assert_eq!(k("H[x].nil"), k("H[x].nil"));
}
