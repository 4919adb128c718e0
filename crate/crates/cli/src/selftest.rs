use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qccs_core::corpus;
use qccs_core::equiv::{bisim_process, reduction_bisim, GameOptions};
use qccs_core::gen::{Gen, LAWS};
use qccs_core::parse::{parse_file, CheckKind};

use crate::commands::CliError;
use crate::Global;

/// Every `check` directive of the bundled corpus, then each law on
/// `instances` random operand choices. Prints one line per item.
pub fn run(g: &Global, instances: usize) -> Result<u8, CliError> {
    let seed = g.seed.unwrap_or(GameOptions::default().seed);
    let opts = GameOptions {
        seed,
        fresh: g.fresh,
        random_product: 6,
        random_entangled: 3,
        ..GameOptions::default()
    };
    let mut failed = 0usize;
    let mut report = |ok: bool, what: String, t: Instant| {
        println!("{} {what} ({:.2?})", if ok { "PASS" } else { "FAIL" }, t.elapsed());
        failed += usize::from(!ok);
    };

    for (name, text) in corpus::FILES {
        let t = Instant::now();
        let file = match parse_file(text) {
            Ok(f) => f,
            Err(ds) => {
                report(false, format!("{name}: {}", ds[0]), t);
                continue;
            }
        };
        report(true, format!("{name}: parses"), t);
        for c in &file.checks {
            let t = Instant::now();
            let states: Vec<_> = c.states.iter().filter_map(|s| file.state(s)).collect();
            let want = matches!(c.kind, CheckKind::Bisim | CheckKind::RBisim);
            let v = match c.kind {
                CheckKind::Bisim | CheckKind::NotBisim => bisim_process(&c.p, &c.q, &file.env, &states, &opts),
                CheckKind::RBisim | CheckKind::NotRBisim => reduction_bisim(&c.p, &c.q, &file.env, &states, &opts),
            };
            let label = format!("{name}:{}: {:?} {} , {}", c.pos, c.kind, c.p, c.q);
            match v {
                Ok(v) => {
                    let ok = if want { v.is_bisimilar() } else { v.is_refuted() };
                    report(ok, format!("{label} -> {}", v.result), t);
                }
                Err(e) => report(false, format!("{label}: {e}"), t),
            }
        }
    }

    let gen = Gen::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (k, law) in LAWS.iter().enumerate() {
        let t = Instant::now();
        let mut bad = None;
        for _ in 0..instances {
            let (p, q) = gen.law_instance(&mut rng, k);
            let states = [gen.file.state("s0").expect("generator declares s0")];
            match bisim_process(&p, &q, gen.env(), &states, &opts) {
                Ok(v) if v.is_bisimilar() => {}
                Ok(v) => {
                    bad = Some(format!("{p} vs {q}: {}", v.result));
                    break;
                }
                Err(e) => {
                    bad = Some(format!("{p} vs {q}: {e}"));
                    break;
                }
            }
        }
        match bad {
            None => report(true, format!("law {law}: {instances} instances"), t),
            Some(m) => report(false, format!("law {law}: {m}"), t),
        }
    }

    if failed == 0 {
        println!("selftest passed");
        Ok(0)
    } else {
        println!("selftest: {failed} failed");
        Ok(1)
    }
}
