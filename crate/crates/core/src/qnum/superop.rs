use std::fmt;

use serde::Serialize;

use super::eigen::{eigh, eigvalsh};
use super::matrix::{subsystem_permutation, ComplexMatrix, C64, ZERO};
use super::register::VarType;
use super::state::{QState, TraceKind};
use super::{QnumError, TOL_H};
use crate::names::Var;

/// A named, typed input position of a super-operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Slot {
    pub name: String,
    pub ty: VarType,
}

impl Slot {
    pub fn new(name: &str, ty: VarType) -> Self {
        Slot {
            name: name.to_string(),
            ty,
        }
    }
}

/// A completely positive, trace-non-increasing map given by Kraus operators
/// over the tensor product of its slots (first slot most significant).
#[derive(Clone)]
pub struct SuperOp {
    domain: Vec<Slot>,
    kraus: Vec<ComplexMatrix>,
    label: String,
    trace_preserving: bool,
}

impl SuperOp {
    /// Validates shapes and `sum E_i† E_i ⊑ I`. A list made only of zero
    /// operators is rejected.
    pub fn new(domain: Vec<Slot>, kraus: Vec<ComplexMatrix>, label: &str) -> Result<Self, QnumError> {
        if domain.is_empty() {
            return Err(QnumError::BadSuperOp("empty domain".into()));
        }
        if kraus.is_empty() {
            return Err(QnumError::BadSuperOp("no Kraus operators".into()));
        }
        let d: usize = domain.iter().map(|s| s.ty.dim).product();
        for k in &kraus {
            if k.rows() != d || k.cols() != d {
                return Err(QnumError::Shape(format!(
                    "Kraus operator is {}x{}, domain needs {d}x{d}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        if kraus.iter().all(|k| k.is_zero(TOL_H)) {
            return Err(QnumError::BadSuperOp("all Kraus operators are zero".into()));
        }
        let gram = kraus_gram(&kraus);
        let slack = ComplexMatrix::identity(d).sub(&gram);
        let min = eigvalsh(&slack)[0];
        if min < -TOL_H {
            return Err(QnumError::BadSuperOp(format!(
                "sum of E†E exceeds the identity (min eigenvalue of I - sum = {min:.3e})"
            )));
        }
        Ok(Self::from_kraus_unchecked(domain, kraus, label))
    }

    pub(crate) fn from_kraus_unchecked(domain: Vec<Slot>, kraus: Vec<ComplexMatrix>, label: &str) -> Self {
        let d: usize = domain.iter().map(|s| s.ty.dim).product();
        let tp = kraus_gram(&kraus).max_abs_diff(&ComplexMatrix::identity(d)) <= TOL_H;
        SuperOp {
            domain,
            kraus,
            label: label.to_string(),
            trace_preserving: tp,
        }
    }

    /// Single-Kraus unitary channel. `u` must be unitary within [`TOL_H`].
    pub fn unitary(domain: Vec<Slot>, u: ComplexMatrix, label: &str) -> Result<Self, QnumError> {
        if u.is_square() && u.adjoint().mul(&u).max_abs_diff(&ComplexMatrix::identity(u.rows())) > TOL_H {
            return Err(QnumError::BadSuperOp(format!("`{label}` is not unitary")));
        }
        Self::new(domain, vec![u], label)
    }

    pub fn identity(domain: Vec<Slot>) -> Self {
        let d: usize = domain.iter().map(|s| s.ty.dim).product();
        Self::from_kraus_unchecked(domain, vec![ComplexMatrix::identity(d)], "I")
    }

    pub fn domain(&self) -> &[Slot] {
        &self.domain
    }

    pub fn domain_dims(&self) -> Vec<usize> {
        self.domain.iter().map(|s| s.ty.dim).collect()
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn with_domain(mut self, domain: Vec<Slot>) -> Result<Self, QnumError> {
        if domain.iter().map(|s| s.ty.dim).collect::<Vec<_>>() != self.domain_dims() {
            return Err(QnumError::DimensionMismatch("slot dimensions differ".into()));
        }
        self.domain = domain;
        Ok(self)
    }

    /// Dimension of the space the operator acts on.
    pub fn dim(&self) -> usize {
        self.domain.iter().map(|s| s.ty.dim).product()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Applies the channel to an operator on its own space.
    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.kraus {
            out.add_assign(&k.mul(rho).mul_adjoint(k));
        }
        out
    }

    /// Heisenberg-picture action `sum E_i† W E_i`.
    pub fn adjoint_apply(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.kraus {
            out.add_assign(&k.adjoint().mul(w).mul(k));
        }
        out
    }

    /// Reorders the slots: new slot `i` is old slot `order[i]`.
    pub fn permute_slots(&self, order: &[usize]) -> SuperOp {
        let dims = self.domain_dims();
        let map = subsystem_permutation(&dims, order);
        SuperOp {
            domain: order.iter().map(|&o| self.domain[o].clone()).collect(),
            kraus: self.kraus.iter().map(|k| k.permute_indices(&map)).collect(),
            label: self.label.clone(),
            trace_preserving: self.trace_preserving,
        }
    }

    /// Cylindric extension: tensors the identity on `extra` slots after the
    /// existing ones.
    pub fn extend(&self, extra: &[Slot]) -> SuperOp {
        let de: usize = extra.iter().map(|s| s.ty.dim).product();
        let id = ComplexMatrix::identity(de);
        let mut domain = self.domain.clone();
        domain.extend(extra.iter().cloned());
        SuperOp {
            domain,
            kraus: self.kraus.iter().map(|k| k.kron(&id)).collect(),
            label: self.label.clone(),
            trace_preserving: self.trace_preserving,
        }
    }

    /// Equivalent operator with at most `d^2` Kraus operators, read off the
    /// spectral decomposition of the Choi matrix.
    pub fn compressed(&self) -> SuperOp {
        let d = self.dim();
        let j = self.choi();
        let e = eigh(&j);
        let top = e.values.iter().copied().fold(0.0, f64::max);
        let mut kraus = Vec::new();
        for (idx, &lam) in e.values.iter().enumerate().rev() {
            if lam <= 1e-13 * top.max(1.0) {
                continue;
            }
            let v = e.vector(idx);
            let s = lam.sqrt();
            let mut k = ComplexMatrix::zeros(d, d);
            for col in 0..d {
                for row in 0..d {
                    k[(row, col)] = v[col * d + row] * s;
                }
            }
            kraus.push(k);
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(d, d));
        }
        SuperOp {
            domain: self.domain.clone(),
            kraus,
            label: self.label.clone(),
            trace_preserving: self.trace_preserving,
        }
    }

    /// Choi matrix `J = sum_{k,l} |k><l| (x) E(|k><l|)`, indexed `(k, a)`.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut j = ComplexMatrix::zeros(d * d, d * d);
        for e in &self.kraus {
            for k in 0..d {
                for a in 0..d {
                    let x = e[(a, k)];
                    if x == ZERO {
                        continue;
                    }
                    for l in 0..d {
                        for b in 0..d {
                            j[(k * d + a, l * d + b)] += x * e[(b, l)].conj();
                        }
                    }
                }
            }
        }
        j
    }
}

impl fmt::Debug for SuperOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SuperOp")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("kraus", &self.kraus.len())
            .field("trace_preserving", &self.trace_preserving)
            .finish()
    }
}

fn kraus_gram(kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let d = kraus[0].cols();
    let mut g = ComplexMatrix::zeros(d, d);
    for k in kraus {
        g.add_assign(&k.adjoint().mul(k));
    }
    g
}

/// Cylindric extension `E_X(rho) = (E (x) I)(rho)`: slot `i` of `e` acts on
/// register variable `binding[i]`.
pub fn apply_superop(e: &SuperOp, binding: &[Var], s: &QState) -> Result<QState, QnumError> {
    let reg = s.register();
    if binding.len() != e.domain.len() {
        return Err(QnumError::DimensionMismatch(format!(
            "`{}` has {} slots, bound to {} variables",
            e.label,
            e.domain.len(),
            binding.len()
        )));
    }
    let mut bound = Vec::with_capacity(binding.len());
    for (slot, v) in e.domain.iter().zip(binding) {
        let pos = reg.position(v).ok_or_else(|| QnumError::UnknownVar(v.to_string()))?;
        if bound.contains(&pos) {
            return Err(QnumError::NotInjective(v.to_string()));
        }
        let dim = reg.entries()[pos].1.dim;
        if dim != slot.ty.dim {
            return Err(QnumError::DimensionMismatch(format!(
                "slot `{}` of `{}` has dimension {}, variable `{v}` has {dim}",
                slot.name, e.label, slot.ty.dim
            )));
        }
        bound.push(pos);
    }
    let dims = reg.dims();
    let order: Vec<usize> = bound
        .iter()
        .copied()
        .chain((0..dims.len()).filter(|p| !bound.contains(p)))
        .collect();
    let map = subsystem_permutation(&dims, &order);
    let rho = s.matrix().permute_indices(&map);
    let d = rho.rows();
    let de = e.dim();
    let r = d / de;

    let mut out = ComplexMatrix::zeros(d, d);
    for k in &e.kraus {
        // left = (K (x) I) rho
        let mut left = ComplexMatrix::zeros(d, d);
        for a in 0..de {
            for a2 in 0..de {
                let kv = k[(a, a2)];
                if kv == ZERO {
                    continue;
                }
                for t in 0..r {
                    let (ro, ri) = (a * r + t, a2 * r + t);
                    for j in 0..d {
                        left[(ro, j)] += kv * rho[(ri, j)];
                    }
                }
            }
        }
        // out += left (K (x) I)†
        for b in 0..de {
            for b2 in 0..de {
                let kv = k[(b, b2)].conj();
                if kv == ZERO {
                    continue;
                }
                for t in 0..r {
                    let (co, ci) = (b * r + t, b2 * r + t);
                    for i in 0..d {
                        out[(i, co)] += kv * left[(i, ci)];
                    }
                }
            }
        }
    }
    let mut inverse = vec![0; map.len()];
    for (new, &old) in map.iter().enumerate() {
        inverse[old] = new;
    }
    let kind = if s.kind() == TraceKind::Density && e.trace_preserving {
        TraceKind::Density
    } else {
        TraceKind::Partial
    };
    Ok(s.with_matrix(out.permute_indices(&inverse), kind))
}

/// `e2 ∘ e1` (apply `e1` first) over a common domain.
pub fn superop_compose(e2: &SuperOp, e1: &SuperOp) -> Result<SuperOp, QnumError> {
    if e2.domain_dims() != e1.domain_dims() {
        return Err(QnumError::DimensionMismatch(format!(
            "cannot compose `{}` with `{}`: domains differ",
            e2.label, e1.label
        )));
    }
    let d = e1.dim();
    let mut kraus = Vec::with_capacity(e1.kraus.len() * e2.kraus.len());
    for f in &e2.kraus {
        for e in &e1.kraus {
            let p = f.mul(e);
            if !p.is_zero(1e-15) {
                kraus.push(p);
            }
        }
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(d, d));
    }
    let label = format!("{}∘{}", e2.label, e1.label);
    let out = SuperOp::from_kraus_unchecked(e1.domain.clone(), kraus, &label);
    Ok(if out.kraus.len() > d * d {
        out.compressed()
    } else {
        out
    })
}

pub fn choi(e: &SuperOp) -> ComplexMatrix {
    e.choi()
}

/// Channel equality: Choi matrices agree entrywise within `tol`.
pub fn superop_equal(e: &SuperOp, f: &SuperOp, tol: f64) -> Result<bool, QnumError> {
    if e.dim() != f.dim() {
        return Err(QnumError::DimensionMismatch(format!(
            "`{}` acts on dimension {}, `{}` on {}",
            e.label,
            e.dim(),
            f.label,
            f.dim()
        )));
    }
    Ok(e.choi().max_abs_diff(&f.choi()) <= tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMode {
    /// Outcome discarded: all measurement operators as Kraus operators.
    Total,
    /// Outcome `m` selected: the single operator `M_m`.
    Branch(usize),
}

pub fn measurement_superop(
    domain: Vec<Slot>,
    ops: Vec<ComplexMatrix>,
    mode: MeasureMode,
    label: &str,
) -> Result<SuperOp, QnumError> {
    if ops.is_empty() {
        return Err(QnumError::BadSuperOp("measurement without operators".into()));
    }
    match mode {
        MeasureMode::Total => {
            let d = ops[0].cols();
            if ops.iter().any(|m| m.rows() != d || m.cols() != d) {
                return Err(QnumError::Shape("measurement operators differ in shape".into()));
            }
            let defect = kraus_gram(&ops).max_abs_diff(&ComplexMatrix::identity(d));
            if defect > TOL_H {
                return Err(QnumError::BadSuperOp(format!(
                    "measurement is not complete (defect {defect:.3e})"
                )));
            }
            SuperOp::new(domain, ops, label)
        }
        MeasureMode::Branch(m) => {
            let n = ops.len();
            let op = ops
                .into_iter()
                .nth(m)
                .ok_or(QnumError::IndexOutOfRange { index: m, len: n })?;
            SuperOp::new(domain, vec![op], label)
        }
    }
}

/// Projectors onto the joint computational basis of the domain.
pub fn computational_projectors(d: usize) -> Vec<ComplexMatrix> {
    (0..d)
        .map(|i| {
            let mut p = ComplexMatrix::zeros(d, d);
            p[(i, i)] = C64::new(1.0, 0.0);
            p
        })
        .collect()
}

/// Reduced channel of a system-environment model:
/// `E(rho) = tr_env[P U (rho (x) |0><0|) U† P]`, where `u` and `projector`
/// act on system (x) environment with the system first.
pub fn from_system_environment(
    domain: Vec<Slot>,
    env_dim: usize,
    u: &ComplexMatrix,
    projector: &ComplexMatrix,
    label: &str,
) -> Result<SuperOp, QnumError> {
    let d: usize = domain.iter().map(|s| s.ty.dim).product();
    let n = d * env_dim;
    if u.rows() != n || u.cols() != n || projector.rows() != n || projector.cols() != n {
        return Err(QnumError::Shape(format!("system-environment operators must be {n}x{n}")));
    }
    let pu = projector.mul(u);
    // Kraus operator k: <e_k| P U |e_0>, a d x d block.
    let kraus: Vec<ComplexMatrix> = (0..env_dim)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    m[(a, b)] = pu[(a * env_dim + k, b * env_dim)];
                }
            }
            m
        })
        .filter(|m| !m.is_zero(1e-15))
        .collect();
    SuperOp::new(domain, kraus, label)
}

/// Amplitude damping with decay probability `gamma` on a qubit slot.
pub fn amplitude_damping(slot: Slot, gamma: f64) -> Result<SuperOp, QnumError> {
    if !(0.0..=1.0).contains(&gamma) || slot.ty.dim != 2 {
        return Err(QnumError::BadSuperOp(format!(
            "amplitude damping needs a qubit and gamma in [0, 1], got {gamma}"
        )));
    }
    let k0 = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()]);
    let k1 = ComplexMatrix::from_real(2, &[0.0, gamma.sqrt(), 0.0, 0.0]);
    SuperOp::new(vec![slot], vec![k0, k1], &format!("AD({gamma})"))
}

/// Depolarizing channel `rho -> (1-p) rho + p I/d` on one slot.
pub fn depolarizing(slot: Slot, p: f64) -> Result<SuperOp, QnumError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QnumError::BadSuperOp(format!("depolarizing probability {p} outside [0, 1]")));
    }
    let d = slot.ty.dim;
    // Kraus: sqrt(1-p) I together with sqrt(p/d) |a><b| for all a, b.
    let mut kraus = vec![ComplexMatrix::identity(d).scale_real((1.0 - p).sqrt())];
    let w = (p / d as f64).sqrt();
    for a in 0..d {
        for b in 0..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(a, b)] = C64::new(w, 0.0);
            kraus.push(m);
        }
    }
    kraus.retain(|k| !k.is_zero(0.0));
    SuperOp::new(vec![slot], kraus, &format!("DEP({p})"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::gates::named_gate;
    use crate::qnum::kets;
    use crate::qnum::matrix::c;
    use crate::qnum::register::Register;

    fn q(name: &str) -> Slot {
        Slot::new(name, VarType::qubit())
    }

    fn reg(names: &[&str]) -> Register {
        Register::new(names.iter().map(|n| (Var::new(n), VarType::qubit()))).unwrap()
    }

    #[test]
    fn hadamard_on_x_leaves_rest_alone() {
        let r = reg(&["x", "y"]);
        let rest = ComplexMatrix::from_real(2, &[0.6, 0.1, 0.1, 0.4]);
        let s = QState::product(
            r.clone(),
            &[
                (vec![Var::new("x")], ComplexMatrix::outer(&kets::basis(2, 0))),
                (vec![Var::new("y")], rest.clone()),
            ],
        )
        .unwrap();
        let h = named_gate("H", vec![q("a")]).unwrap();
        let out = apply_superop(&h, &[Var::new("x")], &s).unwrap();
        let expected = ComplexMatrix::outer(&kets::plus()).kron(&rest);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
        // Bound to y instead: |0><0| (x) H rest H.
        let out_y = apply_superop(&h, &[Var::new("y")], &s).unwrap();
        let hm = h.kraus()[0].clone();
        let expected_y = ComplexMatrix::outer(&kets::basis(2, 0)).kron(&hm.mul(&rest).mul_adjoint(&hm));
        assert!(out_y.matrix().max_abs_diff(&expected_y) < 1e-15);
    }

    #[test]
    fn cnot_makes_bell_pair_with_reversed_binding() {
        // Control z, target x: variables sorted as (x, z).
        let r = reg(&["x", "z"]);
        let s = QState::product(
            r,
            &[
                (vec![Var::new("z")], ComplexMatrix::outer(&kets::plus())),
                (vec![Var::new("x")], ComplexMatrix::outer(&kets::basis(2, 0))),
            ],
        )
        .unwrap();
        let cnot = named_gate("CNOT", vec![q("a"), q("b")]).unwrap();
        let out = apply_superop(&cnot, &[Var::new("z"), Var::new("x")], &s).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::outer(&kets::bell(0))) < 1e-15);
    }

    #[test]
    fn apply_rejects_bad_bindings() {
        let r = reg(&["x", "y"]);
        let s = QState::pure(r, &kets::bell(0)).unwrap();
        let cnot = named_gate("CNOT", vec![q("a"), q("b")]).unwrap();
        assert!(matches!(
            apply_superop(&cnot, &[Var::new("x"), Var::new("x")], &s),
            Err(QnumError::NotInjective(_))
        ));
        assert!(apply_superop(&cnot, &[Var::new("x")], &s).is_err());
        assert!(apply_superop(&cnot, &[Var::new("x"), Var::new("w")], &s).is_err());
        let qutrit = VarType::new("qutrit", 3).unwrap();
        let id3 = SuperOp::identity(vec![Slot::new("a", qutrit)]);
        assert!(apply_superop(&id3, &[Var::new("x")], &s).is_err());
    }

    #[test]
    fn compose_hadamards_is_identity() {
        let h = named_gate("H", vec![q("a")]).unwrap();
        let hh = superop_compose(&h, &h).unwrap();
        assert!(superop_equal(&hh, &SuperOp::identity(vec![q("a")]), 1e-12).unwrap());
        assert!(superop_equal(&superop_compose(&h, &SuperOp::identity(vec![q("a")])).unwrap(), &h, 1e-12).unwrap());
    }

    #[test]
    fn projector_branch_is_idempotent() {
        let m0 = measurement_superop(vec![q("a")], computational_projectors(2), MeasureMode::Branch(0), "M0").unwrap();
        let mm = superop_compose(&m0, &m0).unwrap();
        assert!(superop_equal(&mm, &m0, 1e-12).unwrap());
        // Choi matrix of P0: a single 1 in the (0,0) block at entry (0,0).
        let j = m0.choi();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = c(1.0, 0.0);
        assert_eq!(j, expected);
    }

    #[test]
    fn orthogonal_projectors_compose_to_zero_channel() {
        let p = computational_projectors(2);
        let m0 = measurement_superop(vec![q("a")], p.clone(), MeasureMode::Branch(0), "M0").unwrap();
        let m1 = measurement_superop(vec![q("a")], p, MeasureMode::Branch(1), "M1").unwrap();
        let z = superop_compose(&m1, &m0).unwrap();
        assert!(z.choi().is_zero(0.0));
    }

    #[test]
    fn choi_of_identity_is_unnormalized_bell_projector() {
        let id = SuperOp::identity(vec![q("a")]);
        let expected = ComplexMatrix::outer(&kets::bell(0)).scale_real(2.0);
        assert!(id.choi().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn global_phase_and_gauge_are_invisible() {
        let h = named_gate("H", vec![q("a")]).unwrap();
        let minus_h = SuperOp::new(vec![q("a")], vec![h.kraus()[0].scale_real(-1.0)], "-H").unwrap();
        assert!(superop_equal(&h, &minus_h, 1e-12).unwrap());
        let z = named_gate("Z", vec![q("a")]).unwrap();
        assert!(!superop_equal(&SuperOp::identity(vec![q("a")]), &z, 1e-7).unwrap());
        assert!(superop_equal(&z, &z, 0.0).unwrap());
        // Kraus list mixed by a unitary gives the same channel.
        let ad = amplitude_damping(q("a"), 0.3).unwrap();
        let (k0, k1) = (&ad.kraus()[0], &ad.kraus()[1]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mixed = vec![k0.add(k1).scale_real(s), k0.sub(k1).scale_real(s)];
        let ad2 = SuperOp::new(vec![q("a")], mixed, "AD'").unwrap();
        assert!(superop_equal(&ad, &ad2, 1e-12).unwrap());
        assert!(superop_equal(&ad.compressed(), &ad, 1e-12).unwrap());
    }

    #[test]
    fn superop_validation() {
        let big = ComplexMatrix::identity(2).scale_real(1.1);
        assert!(SuperOp::new(vec![q("a")], vec![big], "big").is_err());
        assert!(SuperOp::new(vec![q("a")], vec![ComplexMatrix::zeros(2, 2)], "zero").is_err());
        assert!(SuperOp::new(vec![q("a")], vec![ComplexMatrix::identity(4)], "shape").is_err());
    }

    #[test]
    fn measurement_modes() {
        let plus = QState::pure(reg(&["x"]), &kets::plus()).unwrap();
        let p = computational_projectors(2);
        let total = measurement_superop(vec![q("a")], p.clone(), MeasureMode::Total, "M").unwrap();
        assert!(total.is_trace_preserving());
        let out = apply_superop(&total, &[Var::new("x")], &plus).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);

        let b0 = measurement_superop(vec![q("a")], p.clone(), MeasureMode::Branch(0), "M0").unwrap();
        let out0 = apply_superop(&b0, &[Var::new("x")], &plus).unwrap();
        assert!((out0.trace() - 0.5).abs() < 1e-15);
        assert_eq!(out0.kind(), TraceKind::Partial);

        let zero = QState::pure(reg(&["x"]), &kets::basis(2, 0)).unwrap();
        let same = apply_superop(&total, &[Var::new("x")], &zero).unwrap();
        assert!(same.matrix().max_abs_diff(zero.matrix()) < 1e-15);

        assert!(measurement_superop(vec![q("a")], vec![p[0].clone()], MeasureMode::Total, "bad").is_err());
        assert!(matches!(
            measurement_superop(vec![q("a")], p, MeasureMode::Branch(2), "bad"),
            Err(QnumError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn slot_permutation_matches_binding_swap() {
        let cnot = named_gate("CNOT", vec![q("a"), q("b")]).unwrap();
        let swapped = cnot.permute_slots(&[1, 0]);
        let r = reg(&["x", "y"]);
        let s = QState::product(
            r,
            &[
                (vec![Var::new("x")], ComplexMatrix::from_real(2, &[0.3, 0.2, 0.2, 0.7])),
                (vec![Var::new("y")], ComplexMatrix::outer(&kets::plus())),
            ],
        )
        .unwrap();
        let a = apply_superop(&cnot, &[Var::new("x"), Var::new("y")], &s).unwrap();
        let b = apply_superop(&swapped, &[Var::new("y"), Var::new("x")], &s).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn system_environment_model_of_amplitude_damping() {
        let gamma: f64 = 0.3;
        let (c1, s1) = ((1.0 - gamma).sqrt(), gamma.sqrt());
        // U|00> = |00>, U|10> = c|10> + s|01>, completed to a rotation.
        #[rustfmt::skip]
        let u = ComplexMatrix::from_real(4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, c1, s1, 0.0,
            0.0, -s1, c1, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ]);
        let u = u.transpose();
        let model = from_system_environment(vec![q("a")], 2, &u, &ComplexMatrix::identity(4), "AD*").unwrap();
        let ad = amplitude_damping(q("a"), gamma).unwrap();
        assert!(superop_equal(&model, &ad, 1e-12).unwrap());
    }
}
