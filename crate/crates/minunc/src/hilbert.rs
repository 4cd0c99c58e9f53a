//! Truncated Hilbert spaces: bosonic Fock modes, collective spins, and their
//! tensor products.
//!
//! Conventions fixed here and relied on everywhere else: hbar = m = omega = 1,
//! Fock levels ascend from n = 0, spin projections ascend from m = -S to +S,
//! product bases are row-major in their factors (left factor varies slowest),
//! x = (a + a†)/sqrt(2) and p = (a - a†)/(i sqrt(2)).

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

/// One bosonic mode kept up to a highest Fock level `cutoff`.
/// The matrix dimension is `cutoff + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeSpace {
    cutoff: usize,
}

impl ModeSpace {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidArgument(
                "mode cutoff must be at least 1".into(),
            ));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn basis(&self) -> Basis {
        Basis::Mode(*self)
    }
}

/// Collective spin space of fixed total spin S, stored as 2S so half-integer
/// spins stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinSpace {
    two_s: u32,
}

impl SpinSpace {
    pub fn new(two_s: u32) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::InvalidArgument("need 2S >= 1".into()));
        }
        Ok(Self { two_s })
    }

    pub fn two_s(&self) -> u32 {
        self.two_s
    }

    pub fn s(&self) -> f64 {
        f64::from(self.two_s) / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s as usize + 1
    }

    /// 2m at basis index `i`; runs from -2S at i = 0 up to +2S.
    pub fn two_m(&self, index: usize) -> i64 {
        2 * index as i64 - i64::from(self.two_s)
    }

    /// m as a float at basis index `i`.
    pub fn m(&self, index: usize) -> f64 {
        self.two_m(index) as f64 / 2.0
    }

    pub fn basis(&self) -> Basis {
        Basis::Spin(*self)
    }
}

/// Basis descriptor carried by every state and operator. Product bases are
/// kept flat: tensoring never nests.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    Mode(ModeSpace),
    Spin(SpinSpace),
    Product(Vec<Basis>),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Mode(m) => m.dim(),
            Basis::Spin(s) => s.dim(),
            Basis::Product(fs) => fs.iter().map(Basis::dim).product(),
        }
    }

    fn flatten_into(&self, out: &mut Vec<Basis>) {
        match self {
            Basis::Product(fs) => fs.iter().for_each(|f| f.flatten_into(out)),
            other => out.push(other.clone()),
        }
    }

    /// Flat list of elementary factors; a non-product basis is its own
    /// single factor.
    pub fn factors(&self) -> Vec<Basis> {
        let mut fs = Vec::new();
        self.flatten_into(&mut fs);
        fs
    }

    pub(crate) fn product_with(&self, other: &Basis) -> Basis {
        let mut fs = Vec::new();
        self.flatten_into(&mut fs);
        other.flatten_into(&mut fs);
        Basis::Product(fs)
    }

    /// Indices whose amplitude lives at the top retained Fock level of any
    /// mode factor. Spin factors have no truncation edge.
    pub(crate) fn truncation_edge(&self) -> Vec<usize> {
        let mut factors = Vec::new();
        self.flatten_into(&mut factors);
        let dims: Vec<usize> = factors.iter().map(Basis::dim).collect();
        let is_mode: Vec<bool> = factors
            .iter()
            .map(|f| matches!(f, Basis::Mode(_)))
            .collect();
        if !is_mode.iter().any(|&b| b) {
            return Vec::new();
        }
        let total: usize = dims.iter().product();
        let mut edge = Vec::new();
        for idx in 0..total {
            let mut rest = idx;
            let mut on_edge = false;
            for (k, &d) in dims.iter().enumerate().rev() {
                let digit = rest % d;
                rest /= d;
                if is_mode[k] && digit == d - 1 {
                    on_edge = true;
                    break;
                }
            }
            if on_edge {
                edge.push(idx);
            }
        }
        edge
    }
}

/// Normalized pure state over a basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Basis,
    amps: Array1<C64>,
}

impl StateVector {
    /// Normalizes the given amplitudes. Rejects a length mismatch and the
    /// zero vector.
    pub fn new(basis: Basis, amps: Array1<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for a dimension {} basis",
                amps.len(),
                basis.dim()
            )));
        }
        let norm = linalg::vec_norm(&amps);
        if norm < 1e-150 {
            return Err(Error::Unphysical("state has zero norm".into()));
        }
        Ok(Self {
            basis,
            amps: amps.mapv(|z| z / norm),
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_basis(&other.basis)?;
        Ok(linalg::inner(&self.amps, &other.amps))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Largest amplitude magnitude on the truncation edge of the basis.
    pub fn edge_amplitude(&self) -> f64 {
        self.basis
            .truncation_edge()
            .iter()
            .fold(0.0f64, |acc, &i| acc.max(self.amps[i].norm()))
    }

    pub(crate) fn check_basis(&self, other: &Basis) -> Result<()> {
        if &self.basis != other {
            return Err(Error::BasisMismatch(
                "states live on different bases".into(),
            ));
        }
        Ok(())
    }
}

/// Dense operator over a basis.
#[derive(Debug, Clone)]
pub struct Operator {
    basis: Basis,
    mat: Array2<C64>,
}

impl Operator {
    pub fn new(basis: Basis, mat: Array2<C64>) -> Result<Self> {
        let d = basis.dim();
        if mat.dim() != (d, d) {
            return Err(Error::BasisMismatch(format!(
                "matrix of shape {:?} over a dimension {} basis",
                mat.dim(),
                d
            )));
        }
        Ok(Self { basis, mat })
    }

    pub(crate) fn from_parts(basis: Basis, mat: Array2<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), basis.dim());
        Self { basis, mat }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dagger(&self) -> Operator {
        Operator::from_parts(self.basis.clone(), linalg::dagger(&self.mat))
    }

    /// Hermiticity within `tol` relative to the largest entry.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = linalg::max_abs(&self.mat).max(1.0);
        linalg::hermitian_deviation(&self.mat) <= tol * scale
    }

    pub fn apply(&self, state: &StateVector) -> Result<Array1<C64>> {
        state.check_basis(&self.basis)?;
        Ok(self.mat.dot(&state.amps))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_basis(other)?;
        Ok(Operator::from_parts(self.basis.clone(), &self.mat + &other.mat))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_basis(other)?;
        Ok(Operator::from_parts(self.basis.clone(), &self.mat - &other.mat))
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.check_basis(other)?;
        Ok(Operator::from_parts(
            self.basis.clone(),
            self.mat.dot(&other.mat),
        ))
    }

    pub fn scale(&self, z: C64) -> Operator {
        Operator::from_parts(self.basis.clone(), self.mat.mapv(|w| w * z))
    }

    fn check_basis(&self, other: &Operator) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(
                "operators live on different bases".into(),
            ));
        }
        Ok(())
    }
}

pub fn identity(basis: &Basis) -> Operator {
    let d = basis.dim();
    Operator::from_parts(basis.clone(), Array2::eye(d))
}

/// `⟨n-1|a|n⟩ = sqrt(n)`; the row above the cutoff is simply absent.
pub fn annihilation(space: &ModeSpace) -> Operator {
    let d = space.dim();
    let mut m = Array2::zeros((d, d));
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::from_parts(space.basis(), m)
}

pub fn creation(space: &ModeSpace) -> Operator {
    annihilation(space).dagger()
}

pub fn number(space: &ModeSpace) -> Operator {
    let d = space.dim();
    let mut m = Array2::zeros((d, d));
    for n in 0..d {
        m[(n, n)] = C64::new(n as f64, 0.0);
    }
    Operator::from_parts(space.basis(), m)
}

/// x = (a + a†)/sqrt(2)
pub fn position(space: &ModeSpace) -> Operator {
    let d = space.dim();
    let mut m = Array2::zeros((d, d));
    let r = 1.0 / 2.0f64.sqrt();
    for n in 1..d {
        let v = C64::new((n as f64).sqrt() * r, 0.0);
        m[(n - 1, n)] = v;
        m[(n, n - 1)] = v;
    }
    Operator::from_parts(space.basis(), m)
}

/// p = (a - a†)/(i sqrt(2))
pub fn momentum(space: &ModeSpace) -> Operator {
    let d = space.dim();
    let mut m = Array2::zeros((d, d));
    let r = 1.0 / 2.0f64.sqrt();
    for n in 1..d {
        let v = (n as f64).sqrt() * r;
        m[(n - 1, n)] = C64::new(0.0, -v);
        m[(n, n - 1)] = C64::new(0.0, v);
    }
    Operator::from_parts(space.basis(), m)
}

/// The collective spin components and ladder operators on one spin space.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    pub sp: Operator,
    pub sm: Operator,
}

/// `⟨S,m+1|S+|S,m⟩ = sqrt(S(S+1) - m(m+1))`, basis ascending in m.
pub fn spin_operators(space: &SpinSpace) -> SpinOperators {
    let d = space.dim();
    let s = space.s();
    let mut sp = Array2::<C64>::zeros((d, d));
    let mut sz = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        let m = space.m(i);
        sz[(i, i)] = C64::new(m, 0.0);
        if i + 1 < d {
            sp[(i + 1, i)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = linalg::dagger(&sp);
    let half = C64::new(0.5, 0.0);
    let half_i = C64::new(0.0, -0.5);
    let sx = (&sp + &sm).mapv(|z| z * half);
    let sy = (&sp - &sm).mapv(|z| z * half_i);
    let basis = space.basis();
    SpinOperators {
        sx: Operator::from_parts(basis.clone(), sx),
        sy: Operator::from_parts(basis.clone(), sy),
        sz: Operator::from_parts(basis.clone(), sz),
        sp: Operator::from_parts(basis.clone(), sp),
        sm: Operator::from_parts(basis, sm),
    }
}

pub fn fock_state(space: &ModeSpace, n: usize) -> Result<StateVector> {
    if n > space.cutoff() {
        return Err(Error::InvalidArgument(format!(
            "Fock level {n} above cutoff {}",
            space.cutoff()
        )));
    }
    let mut amps = Array1::zeros(space.dim());
    amps[n] = C64::new(1.0, 0.0);
    StateVector::new(space.basis(), amps)
}

/// Dicke state |S, m⟩ addressed by 2m, which must share parity with 2S.
pub fn dicke_state(space: &SpinSpace, two_m: i64) -> Result<StateVector> {
    let two_s = i64::from(space.two_s());
    if two_m.abs() > two_s || (two_m + two_s) % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "projection 2m = {two_m} invalid for 2S = {two_s}"
        )));
    }
    let idx = ((two_m + two_s) / 2) as usize;
    let mut amps = Array1::zeros(space.dim());
    amps[idx] = C64::new(1.0, 0.0);
    StateVector::new(space.basis(), amps)
}

pub fn basis_state(basis: &Basis, index: usize) -> Result<StateVector> {
    if index >= basis.dim() {
        return Err(Error::InvalidArgument(format!(
            "index {index} outside dimension {}",
            basis.dim()
        )));
    }
    let mut amps = Array1::zeros(basis.dim());
    amps[index] = C64::new(1.0, 0.0);
    StateVector::new(basis.clone(), amps)
}

/// Kronecker product; the result's basis is the flattened factor list, so
/// tensoring is associative on the nose.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator::from_parts(
        a.basis().product_with(b.basis()),
        linalg::kron(a.matrix(), b.matrix()),
    )
}

pub fn tensor_state(a: &StateVector, b: &StateVector) -> StateVector {
    let mut amps = Array1::zeros(a.dim() * b.dim());
    for (i, &x) in a.amplitudes().iter().enumerate() {
        for (j, &y) in b.amplitudes().iter().enumerate() {
            amps[i * b.dim() + j] = x * y;
        }
    }
    StateVector {
        basis: a.basis().product_with(b.basis()),
        amps,
    }
}

/// `⟨state|op|state⟩`.
pub fn expectation(state: &StateVector, op: &Operator) -> Result<C64> {
    let applied = op.apply(state)?;
    Ok(linalg::inner(state.amplitudes(), &applied))
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.matmul(b)?.sub(&b.matmul(a)?)
}

pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.matmul(b)?.add(&b.matmul(a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mode_space_dimensions() {
        assert_eq!(ModeSpace::new(1).unwrap().dim(), 2);
        assert_eq!(ModeSpace::new(100).unwrap().dim(), 101);
        assert!(ModeSpace::new(0).is_err());
    }

    #[test]
    fn annihilation_acts_on_low_fock_states() {
        let space = ModeSpace::new(5).unwrap();
        let a = annihilation(&space);
        let vac = fock_state(&space, 0).unwrap();
        assert!(linalg::vec_norm(&a.apply(&vac).unwrap()) < 1e-15);
        let one = fock_state(&space, 1).unwrap();
        let lowered = a.apply(&one).unwrap();
        assert!((lowered[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mode_commutator_is_identity_below_cutoff() {
        // [a, a†] on the truncated space: identity except the top diagonal
        // entry, which is -cutoff.
        let space = ModeSpace::new(10).unwrap();
        let a = annihilation(&space);
        let comm = commutator(&a, &a.dagger()).unwrap();
        let m = comm.matrix();
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                let expect = if i != j {
                    0.0
                } else if i < space.cutoff() {
                    1.0
                } else {
                    -(space.cutoff() as f64)
                };
                assert!((m[(i, j)] - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn spin_ladder_and_commutators() {
        let space = SpinSpace::new(3).unwrap(); // S = 3/2
        let ops = spin_operators(&space);
        let top = dicke_state(&space, 3).unwrap();
        let sz_top = expectation(&top, &ops.sz).unwrap();
        assert!((sz_top - c(1.5, 0.0)).norm() < 1e-15);

        // [Sx, Sy] = i Sz
        let comm = commutator(&ops.sx, &ops.sy).unwrap();
        let dev = max_abs(&(&comm.matrix().mapv(|z| z * c(0.0, -1.0)) - ops.sz.matrix()));
        assert!(dev < 1e-13, "dev = {dev:.3e}");
    }

    #[test]
    fn casimir_is_constant() {
        let space = SpinSpace::new(4).unwrap(); // S = 2
        let ops = spin_operators(&space);
        let s2 = ops
            .sx
            .matmul(&ops.sx)
            .unwrap()
            .add(&ops.sy.matmul(&ops.sy).unwrap())
            .unwrap()
            .add(&ops.sz.matmul(&ops.sz).unwrap())
            .unwrap();
        let expect = 2.0 * 3.0;
        let dev = max_abs(&(s2.matrix() - &(Array2::eye(space.dim()).mapv(|z: C64| z * expect))));
        assert!(dev < 1e-12);
    }

    #[test]
    fn dicke_state_rejects_wrong_parity() {
        let space = SpinSpace::new(3).unwrap();
        assert!(dicke_state(&space, 2).is_err());
        assert!(dicke_state(&space, 5).is_err());
        assert!(dicke_state(&space, -3).is_ok());
    }

    #[test]
    fn tensor_embedding_matches_direct_product() {
        let sa = ModeSpace::new(4).unwrap();
        let sb = ModeSpace::new(4).unwrap();
        let a = annihilation(&sa);
        let b = annihilation(&sb);
        let ia = identity(&sa.basis());
        let ib = identity(&sb.basis());
        let lhs = tensor(&a, &ib).matmul(&tensor(&ia, &b)).unwrap();
        let rhs = tensor(&a, &b);
        let dev = max_abs(&(lhs.matrix() - rhs.matrix()));
        assert!(dev < 1e-14);
    }

    #[test]
    fn tensor_flattening_keeps_association_irrelevant() {
        let s1 = ModeSpace::new(1).unwrap();
        let s2 = ModeSpace::new(2).unwrap();
        let s3 = SpinSpace::new(2).unwrap();
        let x = position(&s1);
        let n = number(&s2);
        let sz = spin_operators(&s3).sz;
        let left = tensor(&tensor(&x, &n), &sz);
        let right = tensor(&x, &tensor(&n, &sz));
        assert_eq!(left.basis(), right.basis());
        let dev = max_abs(&(left.matrix() - right.matrix()));
        assert!(dev < 1e-14);
    }

    #[test]
    fn tensor_state_of_ground_states_hits_first_index() {
        let sa = ModeSpace::new(3).unwrap();
        let v = fock_state(&sa, 0).unwrap();
        let prod = tensor_state(&v, &v);
        assert!((prod.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(linalg::vec_norm(prod.amplitudes()) - 1.0 < 1e-15);
    }

    #[test]
    fn expectation_respects_basis() {
        let sa = ModeSpace::new(3).unwrap();
        let sb = ModeSpace::new(4).unwrap();
        let vac = fock_state(&sa, 0).unwrap();
        assert!(expectation(&vac, &number(&sa)).unwrap().norm() < 1e-15);
        assert!(expectation(&vac, &number(&sb)).is_err());
    }

    #[test]
    fn state_constructor_normalizes_and_rejects_zero() {
        let space = ModeSpace::new(2).unwrap();
        let raw = array![c(3.0, 0.0), c(0.0, 4.0), c(0.0, 0.0)];
        let v = StateVector::new(space.basis(), raw).unwrap();
        assert!((linalg::vec_norm(v.amplitudes()) - 1.0).abs() < 1e-15);
        let zero = Array1::zeros(space.dim());
        assert!(StateVector::new(space.basis(), zero).is_err());
    }

    #[test]
    fn truncation_edge_of_mode_and_spin_products() {
        let mode = ModeSpace::new(2).unwrap(); // dim 3
        let spin = SpinSpace::new(1).unwrap(); // dim 2
        assert_eq!(mode.basis().truncation_edge(), vec![2]);
        assert!(spin.basis().truncation_edge().is_empty());
        let prod = mode.basis().product_with(&spin.basis());
        // indices 4, 5 have the mode digit at its top level
        assert_eq!(prod.truncation_edge(), vec![4, 5]);
    }
}
