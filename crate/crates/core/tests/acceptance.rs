//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::Rng;

use qccs_core::ast::Process;
use qccs_core::corpus;
use qccs_core::equiv::{dsb_estimate, expansion_rhs, reduction_bisim, GameOptions};
use qccs_core::gen::Gen;
use qccs_core::names::Var;
use qccs_core::parse::{build_register, parse_file, parse_process};
use qccs_core::qnum::random::{random_channel, random_state};
use qccs_core::qnum::{
    apply_superop, diamond_distance, named_gate, trace_distance, ComplexMatrix, DiamondOptions, QState, Register,
    Slot, VarType, C64,
};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn density(rows: &[&[C64]]) -> ComplexMatrix {
    ComplexMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn reduced(s: &QState, vars: &[&str]) -> ComplexMatrix {
    let vs: Vec<Var> = vars.iter().map(|v| Var::new(v)).collect();
    s.partial_trace(&vs).unwrap().matrix().clone()
}

fn expect_labels(got: &[String], want: &[&str]) -> Result<(), String> {
    if got.len() < want.len() || got[..want.len()] != *want {
        return Err(format!("trace {got:?}, expected {want:?}"));
    }
    Ok(())
}

fn bell_replay() -> Outcome {
    let f = parse_file(corpus::get("bell.qccs").unwrap()).map_err(|e| format!("{e:?}"))?;
    let (labels, end) = follow(&f.env, corpus_config(&f, "R", "sigma"), 8)?;
    expect_labels(&labels, &["tau", "CNOT[x,z]"])?;
    let h = 0.5;
    let beta = ComplexMatrix::from_real(4, &[h, 0.0, 0.0, h, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, h, 0.0, 0.0, h]);
    let err = reduced(&end.state, &["x", "z"]).max_abs_diff(&beta);
    if err > 1e-9 {
        return Err(format!("xz state off by {err:e}"));
    }
    Ok(format!("tau, CNOT[x,z]; |xz - beta00| = {err:.1e}"))
}

fn measurement_replay() -> Outcome {
    let f = parse_file(corpus::get("measurement.qccs").unwrap()).map_err(|e| format!("{e:?}"))?;
    let (labels, end) = follow(&f.env, corpus_config(&f, "S", "sigma"), 8)?;
    expect_labels(&labels, &["tau", "CNOT[x,z]", "M[z]"])?;
    let want = ComplexMatrix::diagonal(&[c64(0.5, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.5, 0.0)]);
    let err = reduced(&end.state, &["x", "z"]).max_abs_diff(&want);
    if err > 1e-9 {
        return Err(format!("xz state off by {err:e}"));
    }
    let bell = f.state("bell").unwrap();
    let reg = build_register(&[], &[bell], &f.env, 0).unwrap();
    let after = apply_superop(&f.env.ops["M0"], &[Var::new("z")], &bell.instantiate(&reg).unwrap()).unwrap();
    let p = after.trace();
    if (p - 0.5).abs() > 1e-12 {
        return Err(format!("branch probability {p}"));
    }
    Ok(format!("final error {err:.1e}; P(M0) = {p}"))
}

fn noisy_replay() -> Outcome {
    let f = parse_file(corpus::get("noisy.qccs").unwrap()).map_err(|e| format!("{e:?}"))?;
    let (labels, end) = follow(&f.env, corpus_config(&f, "S", "rho"), 10)?;
    expect_labels(&labels, &["tau", "E[x]", "tau"])?;
    // E(ρ) from the damping Kraus pair, written out here.
    let rho = density(&[&[c64(0.3, 0.0), c64(0.2, -0.1)], &[c64(0.2, 0.1), c64(0.7, 0.0)]]);
    let g: f64 = 0.3;
    let k0 = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64((1.0 - g).sqrt(), 0.0)]);
    let k1 = ComplexMatrix::from_real(2, &[0.0, g.sqrt(), 0.0, 0.0]);
    let e_rho = k0.mul(&rho).mul(&k0.adjoint()).add(&k1.mul(&rho).mul(&k1.adjoint()));
    let err = reduced(&end.state, &["x"]).max_abs_diff(&e_rho);
    if err > 1e-9 {
        return Err(format!("Kraus variant: x state off by {err:e}"));
    }

    let (labels, end2) = follow(&f.env, corpus_config(&f, "Senv", "rho"), 12)?;
    expect_labels(&labels, &["tau", "EU[x,e]", "EP[x,e]", "ETr[x,e]", "tau"])?;
    let err2 = reduced(&end2.state, &["x"]).max_abs_diff(&reduced(&end.state, &["x"]));
    let zero = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(0.0, 0.0)]);
    let err_e = reduced(&end2.state, &["e"]).max_abs_diff(&zero);
    // The ancilla is returned to |0> and left uncorrelated.
    let xe = reduced(&end2.state, &["e", "x"]).max_abs_diff(&zero.kron(&e_rho));
    let worst = err2.max(err_e).max(xe);
    if worst > 1e-9 {
        return Err(format!("ancilla variant differs by {worst:e}"));
    }
    Ok(format!("Kraus error {err:.1e}; ancilla variant error {worst:.1e}"))
}

fn monoid_laws() -> Outcome {
    let g = Gen::new();
    let opts = GameOptions::default();
    let mut rng = rng(4);
    let mut total = 0;
    for (k, name) in LAWS.iter().enumerate() {
        for i in 0..100 {
            let (p, q) = law_instance(&g, &mut rng, k);
            let v = bisim(&g, &p, &q, &opts);
            if !v.is_bisimilar() {
                return Err(format!("law `{name}` instance {i}: {p} vs {q} gave {} {:?}", v.result, v.witness));
            }
            total += 1;
        }
    }
    Ok(format!("{total} instances over {} states each", opts.random_product + opts.random_entangled + 1))
}

fn expansion_law() -> Outcome {
    let g = Gen::new();
    let opts = GameOptions::default();
    let mut rng = rng(5);
    for i in 0..50 {
        let (p, q, l) = expansion_instance(&g, &mut rng);
        let lhs = if l.is_empty() {
            Process::par(p.clone(), q.clone())
        } else {
            Process::Restrict(Box::new(Process::par(p.clone(), q.clone())), l.clone())
        };
        let rhs = expansion_rhs(&p, &q, &l, g.env()).map_err(|e| e.to_string())?;
        let v = bisim(&g, &lhs, &rhs, &opts);
        if !v.is_bisimilar() {
            return Err(format!("instance {i}: {lhs} vs {rhs} gave {} {:?}", v.result, v.witness));
        }
    }
    Ok("50 instances".into())
}

fn congruence() -> Outcome {
    let g = Gen::new();
    let opts = GameOptions::default();
    let mut rng = rng(6);
    let mut checked = 0;
    for i in 0..50 {
        let k = rng.random_range(0..LAWS.len());
        let (p, q) = law_instance(&g, &mut rng, k);
        for (ctx, a, b) in closures(&g, &mut rng, &p, &q) {
            let v = bisim(&g, &a, &b, &opts);
            if !v.is_bisimilar() {
                return Err(format!("pair {i} ({}), {ctx} closure: {a} vs {b} gave {}", LAWS[k], v.result));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} closures of 50 pairs"))
}

fn sos_lemmas() -> Outcome {
    let g = Gen::new();
    let mut rng = rng(7);
    let mut edges = 0;
    for _ in 0..500 {
        let p = g.process(&mut rng);
        let c = random_config(&g, &p, &mut rng);
        let sigma = random_state(c.state.register(), 2, &mut rng);
        edges += edge_lemmas(&g, &c)?;
        state_independence(&g, &c, &sigma)?;
        alpha_invariance(&g, &c)?;
        substitution_lemmas(&g, &c, &mut rng)?;
    }
    Ok(format!("500 processes, {edges} edges, no violations"))
}

fn reduction() -> Outcome {
    let g = Gen::new();
    let mut rng = rng(8);
    for _ in 0..500 {
        reduction_checks(&g, &g.process(&mut rng))?;
    }
    let pr = |s: &str| parse_process(s, g.env()).unwrap();
    let opts = GameOptions::default();
    let st = [s0(&g)];
    let hh = reduction_bisim(&pr("H[x].H[x].nil"), &pr("I[x].nil"), g.env(), &st, &opts).map_err(|e| e.to_string())?;
    let tt = reduction_bisim(&pr("T[x].T[x].nil"), &pr("S[x].nil"), g.env(), &st, &opts).map_err(|e| e.to_string())?;
    if !hh.is_bisimilar() || !tt.is_bisimilar() {
        return Err(format!("H.H vs I: {}, T.T vs S: {}", hh.result, tt.result));
    }
    Ok("500 processes; H.H and T.T reduce to I and S".into())
}

/// `D◇` of single-qubit unitaries by a grid over input states: for unitary
/// channels the distance is `sqrt(1 - m²)` with `m` the least modulus of
/// `⟨ψ|U†V|ψ⟩`, and no ancilla is needed.
fn brute_force_unitary_diamond(u: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    let w = u.adjoint().mul(v);
    let n = 400;
    let mut m = f64::INFINITY;
    for i in 0..=n {
        let theta = std::f64::consts::PI * i as f64 / n as f64;
        for j in 0..2 * n {
            let phi = std::f64::consts::PI * j as f64 / n as f64;
            let psi = [c64((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)];
            let wpsi = w.apply(&psi);
            let z: C64 = psi.iter().zip(&wpsi).map(|(a, b)| a.conj() * b).sum();
            m = m.min(z.norm());
        }
    }
    (1.0 - m * m).max(0.0).sqrt()
}

fn distances() -> Outcome {
    let q = Register::new([(Var::new("x"), VarType::qubit())]).unwrap();
    let zero = QState::pure(q.clone(), &[c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap();
    let plus = QState::pure(q, &[c64(FRAC_1_SQRT_2, 0.0), c64(FRAC_1_SQRT_2, 0.0)]).unwrap();
    let td = trace_distance(&zero, &plus).map_err(|e| e.to_string())?;
    if (td - FRAC_1_SQRT_2).abs() > 1e-9 {
        return Err(format!("D(|0>, |+>) = {td}"));
    }
    let slot = || vec![Slot::new("a", VarType::qubit())];
    let (z, i, s) = (
        named_gate("Z", slot()).unwrap(),
        named_gate("I", slot()).unwrap(),
        named_gate("S", slot()).unwrap(),
    );
    let dopts = DiamondOptions::default();
    let dz = diamond_distance(&z, &i, &dopts).map_err(|e| e.to_string())?;
    if !(1.0 - 1e-6..=1.0 + 1e-12).contains(&dz) {
        return Err(format!("D(Z, I) = {dz}"));
    }
    let ds = diamond_distance(&s, &i, &dopts).map_err(|e| e.to_string())?;
    let oracle = brute_force_unitary_diamond(&s.kraus()[0], &i.kraus()[0]);
    if (ds - oracle).abs() > 1e-3 || (ds - FRAC_1_SQRT_2).abs() > 1e-3 {
        return Err(format!("D(S, I) = {ds}, grid oracle {oracle}"));
    }

    // Non-expansiveness of +R, \L and ||R on perturbed pairs.
    let mut g = Gen::new();
    g.trace_preserving = true;
    g.max_depth = 3;
    let mut rng = rng(9);
    let opts = GameOptions {
        random_product: 6,
        random_entangled: 3,
        ..GameOptions::default()
    };
    let st = [s0(&g)];
    let mut monotone = true;
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut finite = 0;
    for n in 0..20 {
        let (a, b) = g.split(&mut rng, &g.free);
        let (p, q) = perturbed_pair(&g, &mut rng, 3, &a);
        let r = g.process_over(&mut rng, 2, &b);
        let base = dsb_estimate(&p, &q, g.env(), &st, &opts).map_err(|e| e.to_string())?;
        let l = g.channel_set(&mut rng);
        let ctxs = [
            (Process::sum(p.clone(), r.clone()), Process::sum(q.clone(), r.clone())),
            (Process::Restrict(Box::new(p.clone()), l.clone()), Process::Restrict(Box::new(q.clone()), l)),
            (Process::par(p.clone(), r.clone()), Process::par(q.clone(), r)),
        ];
        monotone &= base.is_monotone();
        finite += usize::from(base.hi().is_finite() && base.hi() > 0.0);
        for (x, y) in ctxs {
            let e = dsb_estimate(&x, &y, g.env(), &st, &opts).map_err(|e| e.to_string())?;
            monotone &= e.is_monotone();
            let excess = e.hi() - base.hi();
            if excess.is_nan() || excess > 2e-3 {
                return Err(format!("instance {n}: {x} vs {y} has hi {} above {} for {p} vs {q}", e.hi(), base.hi()));
            }
            if excess.is_finite() {
                worst = worst.max(excess);
            }
        }
    }
    if !monotone {
        return Err("a bisection trace was not monotone in lambda".into());
    }
    Ok(format!(
        "D(|0>,|+>) = {td:.9}; D(Z,I) = {dz:.9}; D(S,I) = {ds:.6} (grid {oracle:.6}); worst context excess {worst:.1e}; {finite}/20 pairs at a finite positive distance"
    ))
}

fn contractivity() -> Outcome {
    let mut rng = rng(10);
    let reg = Register::new([(Var::new("x"), VarType::qubit()), (Var::new("y"), VarType::qubit())]).unwrap();
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..200 {
        let two = rng.random_bool(0.5);
        let domain = if two {
            vec![Slot::new("a", VarType::qubit()), Slot::new("b", VarType::qubit())]
        } else {
            vec![Slot::new("a", VarType::qubit())]
        };
        let vars: Vec<Var> = if two {
            vec![Var::new("y"), Var::new("x")]
        } else {
            vec![Var::new(["x", "y"].choose(&mut rng).unwrap())]
        };
        let e = random_channel(domain, rng.random_range(1..=4), &mut rng);
        let (r1, r2) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let (rho, sigma) = (random_state(&reg, r1, &mut rng), random_state(&reg, r2, &mut rng));
        let before = trace_distance(&rho, &sigma).unwrap();
        let after = trace_distance(
            &apply_superop(&e, &vars, &rho).unwrap(),
            &apply_superop(&e, &vars, &sigma).unwrap(),
        )
        .unwrap();
        worst = worst.max(after - before);
        if after > before + 1e-9 {
            return Err(format!("distance grew from {before} to {after}"));
        }
    }
    Ok(format!("200 instances; max increase {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 Bell-pair replay", bell_replay, Duration::from_secs(1)),
        ("2 measurement replay", measurement_replay, Duration::from_secs(1)),
        ("3 noisy-channel replay", noisy_replay, Duration::from_secs(1)),
        ("4 monoid laws", monoid_laws, Duration::from_secs(120)),
        ("5 expansion law", expansion_law, Duration::from_secs(120)),
        ("6 congruence", congruence, Duration::from_secs(180)),
        ("7 SOS lemmas", sos_lemmas, Duration::from_secs(300)),
        ("8 reduction", reduction, Duration::from_secs(300)),
        ("9 distances", distances, Duration::from_secs(300)),
        ("10 contractivity", contractivity, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let t = Instant::now();
        let r = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let dt = t.elapsed();
        let r = match r {
            Ok(msg) if dt > budget => Err(format!("{msg}; took {dt:.2?}, budget {budget:?}")),
            other => other,
        };
        match r {
            Ok(msg) => println!("PASS  {name} ({dt:.2?}): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name} ({dt:.2?}): {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
