//! Collective-spin minimum-uncertainty states: rotated transverse frames,
//! atomic coherent and atomic squeezed states, spectroscopic squeezing
//! measures, and the two-mode (Schwinger) readout with a 50/50 beam splitter.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{
    dicke_state, spin_operators, Basis, ModeSpace, Operator, SpinSpace, StateVector,
};
use crate::linalg;
use crate::uncertainty;
use crate::C64;

/// A pair of orthonormal axes transverse to a rotated mean-spin direction.
///
/// The axes are the rotation images of x̂ and ŷ under the unitary of
/// [`rotation_unitary`], so `U (S_x + iηS_y) U† = a·S + iη b·S` holds
/// exactly; `mean_axis` is the image of ẑ.
#[derive(Debug, Clone, Copy)]
pub struct SpinDirectionFrame {
    theta: f64,
    phi: f64,
}

impl SpinDirectionFrame {
    /// theta is the polar rotation angle in [0, π]; phi wraps mod 2π.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "polar angle {theta} outside [0, pi]"
            )));
        }
        Ok(Self {
            theta,
            phi: phi.rem_euclid(2.0 * std::f64::consts::PI),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn a_axis(&self) -> [f64; 3] {
        let (ct, st) = (self.theta.cos(), self.theta.sin());
        let (cp, sp) = (self.phi.cos(), self.phi.sin());
        [ct * cp * cp + sp * sp, (ct - 1.0) * sp * cp, st * cp]
    }

    pub fn b_axis(&self) -> [f64; 3] {
        let (ct, st) = (self.theta.cos(), self.theta.sin());
        let (cp, sp) = (self.phi.cos(), self.phi.sin());
        [(ct - 1.0) * sp * cp, ct * sp * sp + cp * cp, st * sp]
    }

    /// a × b; the mean-spin direction of the coherent state at this frame.
    pub fn mean_axis(&self) -> [f64; 3] {
        let (ct, st) = (self.theta.cos(), self.theta.sin());
        let (cp, sp) = (self.phi.cos(), self.phi.sin());
        [-st * cp, -st * sp, ct]
    }
}

/// n_x S_x + n_y S_y + n_z S_z.
pub fn axis_operator(space: &SpinSpace, axis: [f64; 3]) -> Operator {
    let ops = spin_operators(space);
    let mut m = ops.sx.matrix() * C64::new(axis[0], 0.0);
    m = m + ops.sy.matrix() * C64::new(axis[1], 0.0);
    m = m + ops.sz.matrix() * C64::new(axis[2], 0.0);
    Operator::from_parts(space.basis(), m)
}

/// exp(ξS₊ − ξ*S₋) with ξ = (θ/2)e^{−iφ}.
pub fn rotation_unitary(space: &SpinSpace, theta: f64, phi: f64) -> Result<Operator> {
    let ops = spin_operators(space);
    let xi = C64::from_polar(theta / 2.0, -phi);
    let gen = ops.sp.matrix() * xi - ops.sm.matrix() * xi.conj();
    let u = linalg::exp_antihermitian(&gen)?;
    Ok(Operator::from_parts(space.basis(), u))
}

/// (a·S) + iη(b·S); its eigenvectors minimize the (a·S, b·S) uncertainty
/// product. Hermitian only at η = 0.
pub fn frame_operator(space: &SpinSpace, frame: &SpinDirectionFrame, eta: f64) -> Operator {
    let a_op = axis_operator(space, frame.a_axis());
    let b_op = axis_operator(space, frame.b_axis());
    let m = a_op.matrix() + b_op.matrix() * C64::new(0.0, eta);
    Operator::from_parts(space.basis(), m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    Plus,
    Minus,
}

/// Rotated extremal Dicke state U(θ,φ)|S,±S⟩; the η = ±1 eigenvector of the
/// frame operator, with eigenvalue zero.
pub fn atomic_coherent(
    space: &SpinSpace,
    theta: f64,
    phi: f64,
    pole: Pole,
) -> Result<StateVector> {
    let two_s = i64::from(space.two_s());
    let seed = match pole {
        Pole::Plus => dicke_state(space, two_s)?,
        Pole::Minus => dicke_state(space, -two_s)?,
    };
    let u = rotation_unitary(space, theta, phi)?;
    StateVector::new(space.basis(), u.apply(&seed)?)
}

/// Seed label and squeezing strength for an atomic squeezed state.
///
/// The state solves the frame eigenrelation at eta, with eigenvalue
/// (two_m/2)·√(1 − η²); |eta| = 1 belongs to the coherent construction.
#[derive(Debug, Clone, Copy)]
pub struct AtomicSqueezedSpec {
    pub frame: SpinDirectionFrame,
    pub eta: f64,
    pub two_m: i64,
}

/// Builds N·U(θ,φ)·e^{μS_z}·e^{−i(π/2)S_y}|S,m⟩ with η = tanh μ, normalized
/// after the non-unitary boost. Global phase: largest amplitude real
/// positive.
pub fn atomic_squeezed(space: &SpinSpace, spec: &AtomicSqueezedSpec) -> Result<StateVector> {
    if spec.eta.abs() >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "eta = {} outside (-1, 1); the coherent construction covers eta = ±1",
            spec.eta
        )));
    }
    let mu = spec.eta.atanh();
    let seed = dicke_state(space, spec.two_m)?;
    let ops = spin_operators(space);
    let half_turn =
        linalg::exp_antihermitian(&(ops.sy.matrix() * C64::new(0.0, -std::f64::consts::FRAC_PI_2)))?;
    let mut amps = half_turn.dot(seed.amplitudes());
    for (i, amp) in amps.iter_mut().enumerate() {
        *amp *= C64::new((mu * space.m(i)).exp(), 0.0);
    }
    let u = rotation_unitary(space, spec.frame.theta(), spec.frame.phi())?;
    let state = StateVector::new(space.basis(), u.matrix().dot(&amps))?;

    let lead = state
        .amplitudes()
        .iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .copied()
        .unwrap_or_else(|| C64::new(1.0, 0.0));
    let phase = lead / lead.norm();
    StateVector::new(
        space.basis(),
        state.amplitudes().mapv(|z| z * phase.conj()),
    )
}

/// |⟨S, ℓ−S|ψ⟩|² indexed by the excitation level ℓ = 0…2S from the bottom.
pub fn population_distribution(state: &StateVector) -> Result<Vec<f64>> {
    match state.basis() {
        Basis::Spin(_) => Ok(state.amplitudes().iter().map(|z| z.norm_sqr()).collect()),
        _ => Err(Error::BasisMismatch(
            "population levels are defined on a single spin space".into(),
        )),
    }
}

fn require_spin(state: &StateVector) -> Result<SpinSpace> {
    match state.basis() {
        Basis::Spin(space) => Ok(*space),
        _ => Err(Error::BasisMismatch("expected a single spin space".into())),
    }
}

/// √(2S)·ΔS_x / |⟨S_z⟩|, the fixed-axes spectroscopic squeezing measure.
pub fn squeezing_xi_literal(state: &StateVector) -> Result<f64> {
    let space = require_spin(state)?;
    let ops = spin_operators(&space);
    let mean_z = crate::hilbert::expectation(state, &ops.sz)?.re;
    if mean_z.abs() < 1e-12 {
        return Err(Error::IllConditioned(
            "⟨S_z⟩ vanishes; the fixed-axes measure is undefined".into(),
        ));
    }
    let var_x = uncertainty::variance(state, &ops.sx)?;
    Ok((2.0 * space.s() * var_x).sqrt() / mean_z.abs())
}

/// Squeezing measured in the mean-spin frame: the transverse variance is
/// minimized over directions before dividing by |⟨S⟩|.
pub fn squeezing_xi_aligned(state: &StateVector) -> Result<f64> {
    let space = require_spin(state)?;
    let ops = spin_operators(&space);
    let mean = [
        crate::hilbert::expectation(state, &ops.sx)?.re,
        crate::hilbert::expectation(state, &ops.sy)?.re,
        crate::hilbert::expectation(state, &ops.sz)?.re,
    ];
    let length = (mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]).sqrt();
    if length < 1e-12 {
        return Err(Error::IllConditioned(
            "mean spin vanishes; no transverse plane to measure in".into(),
        ));
    }
    let n = [mean[0] / length, mean[1] / length, mean[2] / length];
    // Any unit vector not parallel to n seeds the transverse pair.
    let helper = if n[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let mut t1 = [
        n[1] * helper[2] - n[2] * helper[1],
        n[2] * helper[0] - n[0] * helper[2],
        n[0] * helper[1] - n[1] * helper[0],
    ];
    let t1_len = (t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]).sqrt();
    for v in &mut t1 {
        *v /= t1_len;
    }
    let t2 = [
        n[1] * t1[2] - n[2] * t1[1],
        n[2] * t1[0] - n[0] * t1[2],
        n[0] * t1[1] - n[1] * t1[0],
    ];

    let op1 = axis_operator(&space, t1);
    let op2 = axis_operator(&space, t2);
    let v11 = uncertainty::variance(state, &op1)?;
    let v22 = uncertainty::variance(state, &op2)?;
    let v12 = uncertainty::covariance(state, &op1, &op2)?;
    let mid = (v11 + v22) / 2.0;
    let spread = ((v11 - v22) / 2.0).hypot(v12);
    let min_var = mid - spread;
    Ok((2.0 * space.s() * min_var).sqrt() / length)
}

/// |S,m⟩ → |S+m⟩_a ⊗ |S−m⟩_b amplitude-wise; both modes get cutoff 2S, so
/// the total photon number is 2S on every basis ket.
pub fn schwinger_map(state: &StateVector) -> Result<StateVector> {
    let space = require_spin(state)?;
    let two_s = space.two_s() as usize;
    let mode = ModeSpace::new(two_s)?;
    let basis = Basis::Mode(mode).product_with(&Basis::Mode(mode));
    let dim_b = two_s + 1;
    let mut amps = Array1::<C64>::zeros(dim_b * dim_b);
    for (i, &amp) in state.amplitudes().iter().enumerate() {
        // i counts up from m = −S, so n_a = S+m = i.
        let (n_a, n_b) = (i, two_s - i);
        amps[n_a * dim_b + n_b] = amp;
    }
    StateVector::new(basis, amps)
}

/// ⟨S,S| exp{(π/4)(a†b − ab†)} |S+m, S−m⟩: the amplitude for a Dicke level
/// to land in the equal-photon output of a 50/50 beam splitter. Vanishes for
/// odd S+m. Addressed by 2S and 2m; S must be an integer.
pub fn beamsplitter_amplitude(two_s: u32, two_m: i64) -> Result<C64> {
    if !two_s.is_multiple_of(2) || two_s == 0 {
        return Err(Error::InvalidArgument(
            "equal-photon readout needs an integer S ≥ 1".into(),
        ));
    }
    if two_m % 2 != 0 || two_m.abs() > i64::from(two_s) {
        return Err(Error::InvalidArgument(format!(
            "projection 2m = {two_m} invalid for 2S = {two_s}"
        )));
    }
    let s = (two_s / 2) as usize;
    let m = two_m / 2;
    let mode = ModeSpace::new(two_s as usize)?;
    let a = crate::hilbert::annihilation(&mode);
    let ident = crate::hilbert::identity(&mode.basis());
    let hop = crate::hilbert::tensor(&a.dagger(), &ident)
        .matmul(&crate::hilbert::tensor(&ident, &a))?;
    let gen = (hop.matrix() - linalg::dagger(hop.matrix()))
        * C64::new(std::f64::consts::FRAC_PI_4, 0.0);
    let splitter = linalg::exp_antihermitian(&gen)?;
    let dim_b = two_s as usize + 1;
    let bra = s * dim_b + s;
    let ket = ((s as i64 + m) as usize) * dim_b + (s as i64 - m) as usize;
    Ok(splitter[(bra, ket)])
}
