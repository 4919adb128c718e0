//! Seeded random states, unitaries and channels.

use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, C64};
use super::register::Register;
use super::state::{QState, TraceKind};
use super::superop::{Slot, SuperOp};
use super::QnumError;
use crate::names::Var;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// Random density matrix `G G† / tr(G G†)` with `G` a `d x rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let rank = rank.max(1);
    let g = ComplexMatrix::from_vec(d, rank, (0..d * rank).map(|_| gaussian(rng)).collect())
        .expect("shape is consistent");
    let rho = g.mul_adjoint(&g);
    let t = rho.trace().re;
    rho.scale_real(1.0 / t).hermitian_part()
}

/// Haar-random unitary via Gram-Schmidt on Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
        let mut ok = true;
        for _ in 0..d {
            let mut v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
            // Two passes keep the columns orthogonal to machine precision.
            for _ in 0..2 {
                for u in &cols {
                    let ip: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, y) in v.iter_mut().zip(u) {
                        *x -= ip * y;
                    }
                }
            }
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n < 1e-8 {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
        if ok {
            let mut u = ComplexMatrix::zeros(d, d);
            for (j, col) in cols.iter().enumerate() {
                for (i, &z) in col.iter().enumerate() {
                    u[(i, j)] = z;
                }
            }
            return u;
        }
    }
}

/// Random trace-preserving channel with `n_kraus` Kraus operators, cut from
/// a random isometry `C^d -> C^d (x) C^n`.
pub fn random_channel<R: Rng + ?Sized>(domain: Vec<Slot>, n_kraus: usize, rng: &mut R) -> SuperOp {
    let d: usize = domain.iter().map(|s| s.ty.dim).product();
    let n = n_kraus.max(1);
    let u = random_unitary(d * n, rng);
    let kraus = (0..n)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    m[(a, b)] = u[(k * d + a, b)];
                }
            }
            m
        })
        .collect();
    SuperOp::from_kraus_unchecked(domain, kraus, "rand")
}

/// Product of independent random pure states, one per variable.
pub fn random_product_state<R: Rng + ?Sized>(register: &Register, rng: &mut R) -> QState {
    let parts: Vec<(Vec<Var>, ComplexMatrix)> = register
        .entries()
        .iter()
        .map(|(v, t)| (vec![v.clone()], ComplexMatrix::outer(&random_pure(t.dim, rng))))
        .collect();
    QState::product(register.clone(), &parts).expect("random product state is valid")
}

/// Random mixed state of full support dimension; generally entangled.
pub fn random_state<R: Rng + ?Sized>(register: &Register, rank: usize, rng: &mut R) -> QState {
    let d = register.total_dim();
    let m = random_density(d, rank, rng);
    QState::from_parts(register.clone(), m, TraceKind::Density).expect("shape matches register")
}

/// Random pure state on the whole register.
pub fn random_pure_state<R: Rng + ?Sized>(register: &Register, rng: &mut R) -> Result<QState, QnumError> {
    let d = register.total_dim();
    QState::pure(register.clone(), &random_pure(d, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::register::VarType;
    use crate::qnum::TOL_H;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_and_channel_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(4, &mut rng);
        assert!(u.adjoint().mul(&u).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        let ch = random_channel(vec![Slot::new("a", VarType::qubit())], 3, &mut rng);
        assert!(ch.is_trace_preserving());
        assert_eq!(ch.kraus().len(), 3);
    }

    #[test]
    fn states_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = VarType::qubit();
        let r = Register::new([(Var::new("x"), q.clone()), (Var::new("y"), q)]).unwrap();
        random_product_state(&r, &mut rng).validate(TOL_H).unwrap();
        random_state(&r, 2, &mut rng).validate(TOL_H).unwrap();
        random_pure_state(&r, &mut rng).unwrap().validate(TOL_H).unwrap();
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let a = random_pure(4, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_pure(4, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }
}
