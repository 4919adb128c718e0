//! Trace distance between states and a lower-bound estimator for the
//! diamond distance between channels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::eigen::{eigh, eigvalsh};
use super::matrix::{ComplexMatrix, C64};
use super::random::random_pure;
use super::state::QState;
use super::superop::SuperOp;
use super::QnumError;

/// `½ tr|ρ − σ|`.
pub fn trace_distance(r: &QState, s: &QState) -> Result<f64, QnumError> {
    if r.register() != s.register() {
        return Err(QnumError::DimensionMismatch(format!(
            "registers differ: {} vs {}",
            r.register(),
            s.register()
        )));
    }
    Ok(trace_norm_half(&r.matrix().sub(s.matrix())))
}

/// `½ tr|A|` for Hermitian `A`.
pub fn trace_norm_half(a: &ComplexMatrix) -> f64 {
    0.5 * eigvalsh(a).iter().map(|x| x.abs()).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiamondOptions {
    /// Number of starting points. Start 0 is the maximally entangled state.
    pub starts: usize,
    pub seed: u64,
    /// Ancilla dimension; `None` uses the channel input dimension.
    pub ancilla_dim: Option<usize>,
    pub max_iters: usize,
}

impl Default for DiamondOptions {
    fn default() -> Self {
        DiamondOptions {
            starts: 8,
            seed: 0x5eed,
            ancilla_dim: None,
            max_iters: 200,
        }
    }
}

impl DiamondOptions {
    pub fn with_starts(starts: usize) -> Self {
        DiamondOptions {
            starts,
            ..Self::default()
        }
    }
}

/// Lower bound on `D◇(E, F) = max_ψ ½‖((E − F) ⊗ I)(ψψ†)‖₁`.
///
/// Every value returned is attained by an explicit input state, so the
/// result never exceeds the true distance. Each start runs an alternating
/// ascent: fix the optimal Helstrom observable `W` for the current input,
/// then move the input to the top eigenvector of the dual operator
/// `Σ(E_i ⊗ I)†W(E_i ⊗ I) − Σ(F_j ⊗ I)†W(F_j ⊗ I)`. Both steps can only
/// increase the objective. Starts are independent streams of one seed, so
/// raising `starts` never lowers the result.
pub fn diamond_distance(e: &SuperOp, f: &SuperOp, opts: &DiamondOptions) -> Result<f64, QnumError> {
    if e.dim() != f.dim() {
        return Err(QnumError::DimensionMismatch(format!(
            "`{}` acts on dimension {}, `{}` on {}",
            e.label(),
            e.dim(),
            f.label(),
            f.dim()
        )));
    }
    let d = e.dim();
    let da = opts.ancilla_dim.unwrap_or(d).max(1);
    let id = ComplexMatrix::identity(da);
    let ek: Vec<ComplexMatrix> = e.kraus().iter().map(|k| k.kron(&id)).collect();
    let fk: Vec<ComplexMatrix> = f.kraus().iter().map(|k| k.kron(&id)).collect();
    let n = d * da;

    let best = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|start| {
            let psi = if start == 0 {
                max_entangled(d, da)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(start as u64);
                random_pure(n, &mut rng)
            };
            ascend(&ek, &fk, psi, opts.max_iters)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best.min(1.0))
}

fn max_entangled(d: usize, da: usize) -> Vec<C64> {
    let m = d.min(da);
    let amp = 1.0 / (m as f64).sqrt();
    let mut v = vec![C64::new(0.0, 0.0); d * da];
    for i in 0..m {
        v[i * da + i] = C64::new(amp, 0.0);
    }
    v
}

fn output_difference(ek: &[ComplexMatrix], fk: &[ComplexMatrix], psi: &[C64]) -> ComplexMatrix {
    let n = psi.len();
    let mut delta = ComplexMatrix::zeros(n, n);
    for k in ek {
        delta.add_assign(&ComplexMatrix::outer(&k.apply(psi)));
    }
    for k in fk {
        delta = delta.sub(&ComplexMatrix::outer(&k.apply(psi)));
    }
    delta
}

fn ascend(ek: &[ComplexMatrix], fk: &[ComplexMatrix], mut psi: Vec<C64>, max_iters: usize) -> f64 {
    let n = psi.len();
    let mut best = -1.0f64;
    for _ in 0..max_iters.max(1) {
        let delta = output_difference(ek, fk, &psi);
        let eig = eigh(&delta);
        let value = 0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>();
        let stalled = value <= best + 1e-13;
        best = best.max(value);
        if stalled {
            break;
        }
        // W = P₊ − P₋ from the spectral decomposition of Δ.
        let mut w = ComplexMatrix::zeros(n, n);
        for (idx, &lam) in eig.values.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let v = eig.vector(idx);
            let p = ComplexMatrix::outer(&v);
            w = if lam > 0.0 { w.add(&p) } else { w.sub(&p) };
        }
        let mut dual = ComplexMatrix::zeros(n, n);
        for k in ek {
            dual.add_assign(&k.adjoint().mul(&w).mul(k));
        }
        for k in fk {
            dual = dual.sub(&k.adjoint().mul(&w).mul(k));
        }
        let top = eigh(&dual);
        psi = top.vector(n - 1);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::Var;
    use crate::qnum::gates::{named_gate, rz};
    use crate::qnum::kets;
    use crate::qnum::register::{Register, VarType};
    use crate::qnum::superop::Slot;

    fn qslot() -> Vec<Slot> {
        vec![Slot::new("a", VarType::qubit())]
    }

    fn one_qubit(v: &[C64]) -> QState {
        let r = Register::new([(Var::new("x"), VarType::qubit())]).unwrap();
        QState::pure(r, v).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let zero = one_qubit(&kets::basis(2, 0));
        let one = one_qubit(&kets::basis(2, 1));
        let plus = one_qubit(&kets::plus());
        assert_eq!(trace_distance(&zero, &zero).unwrap(), 0.0);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_distance(&zero, &plus).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn diamond_of_unitaries_matches_eigenphase_formula() {
        // For diag(1, e^{iθ}) against I the distance is sin(θ/2) when θ ≤ π.
        let id = SuperOp::identity(qslot());
        let opts = DiamondOptions::default();
        let z = named_gate("Z", qslot()).unwrap();
        assert!((diamond_distance(&z, &id, &opts).unwrap() - 1.0).abs() < 1e-9);
        let s = named_gate("S", qslot()).unwrap();
        let ds = diamond_distance(&s, &id, &opts).unwrap();
        assert!((ds - std::f64::consts::FRAC_PI_4.sin()).abs() < 1e-9, "{ds}");
        let r = SuperOp::unitary(qslot(), rz(0.1), "Rz").unwrap();
        let dr = diamond_distance(&r, &id, &opts).unwrap();
        assert!((dr - 0.05f64.sin()).abs() < 1e-9, "{dr}");
        assert_eq!(diamond_distance(&s, &s, &opts).unwrap(), 0.0);
    }

    #[test]
    fn more_starts_never_lower() {
        let id = SuperOp::identity(qslot());
        let ad = crate::qnum::superop::amplitude_damping(qslot().remove(0), 0.3).unwrap();
        let mut last = 0.0;
        for starts in [1, 2, 4, 8] {
            let v = diamond_distance(&ad, &id, &DiamondOptions::with_starts(starts)).unwrap();
            assert!(v >= last);
            last = v;
        }
    }
}
