//! Dispersive-cavity dynamics for a collection of two-level atoms: the
//! effective quadratic Hamiltonian, analytic coherent-state evolution,
//! decomposition of evolved states into coherent-state superpositions (cat
//! states), GHZ equivalence in the product space, and Ramsey-fringe readout.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{Basis, Operator, SpinSpace, StateVector};
use crate::linalg;
use crate::C64;

/// Component families whose Gram spectrum is flatter than this (relative to
/// the largest eigenvalue) are rejected as degenerate.
const GRAM_CONDITION_FLOOR: f64 = 1e-3;

/// Dispersive-cavity couplings. The adiabatic elimination behind the
/// effective Hamiltonian assumes the detuning dominates the coupling.
#[derive(Debug, Clone, Copy)]
pub struct CavityParams {
    pub g: f64,
    pub delta_c: f64,
    pub kappa: f64,
    pub nbar: f64,
}

impl CavityParams {
    pub fn new(g: f64, delta_c: f64, kappa: f64, nbar: f64) -> Result<Self> {
        if nbar < 0.0 {
            return Err(Error::InvalidArgument(
                "thermal occupancy must be nonnegative".into(),
            ));
        }
        if kappa * kappa + delta_c * delta_c == 0.0 {
            return Err(Error::InvalidArgument(
                "kappa and delta_c cannot both vanish".into(),
            ));
        }
        Ok(Self {
            g,
            delta_c,
            kappa,
            nbar,
        })
    }

    /// g²δ_c/(κ² + δ_c²), the strength of the induced S_z² interaction.
    pub fn eta(&self) -> f64 {
        self.g * self.g * self.delta_c / (self.kappa * self.kappa + self.delta_c * self.delta_c)
    }

    /// True when |δ_c| ≥ 10g, the regime the elimination is trusted in.
    pub fn adiabatic_elimination_valid(&self) -> bool {
        self.delta_c.abs() >= 10.0 * self.g.abs()
    }
}

/// η[(N/2)(N/2+1) − S_z² + (2n̄+1)S_z], diagonal in the Dicke basis; N = 2S.
pub fn effective_hamiltonian(space: &SpinSpace, params: &CavityParams) -> Operator {
    let eta = params.eta();
    let s = space.s();
    let mut mat = Array2::<C64>::zeros((space.dim(), space.dim()));
    for i in 0..space.dim() {
        let m = space.m(i);
        let value = eta * (s * (s + 1.0) - m * m + (2.0 * params.nbar + 1.0) * m);
        mat[(i, i)] = C64::new(value, 0.0);
    }
    Operator::from_parts(space.basis(), mat)
}

/// Amplitudes of the coherent state rotated from the all-ground pole: the
/// level with k excited atoms carries √C(N,k)·e^{i(N−k)φ}·sin^k(θ/2)·
/// cos^{N−k}(θ/2), times the quadratic phase e^{−ik(N−k+1)ηt} once t > 0.
pub fn evolve_analytic(theta: f64, phi: f64, n_atoms: u32, eta: f64, t: f64) -> Result<StateVector> {
    let space = SpinSpace::new(n_atoms)?;
    let n = n_atoms as usize;
    let (half_sin, half_cos) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let mut amps = Array1::<C64>::zeros(space.dim());
    let mut choose = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            choose = choose * (n - k + 1) as f64 / k as f64;
        }
        let magnitude = choose.sqrt() * half_sin.powi(k as i32) * half_cos.powi((n - k) as i32);
        let phase = (n - k) as f64 * phi - k as f64 * (n - k + 1) as f64 * eta * t;
        amps[k] = C64::from_polar(magnitude, phase);
    }
    StateVector::new(space.basis(), amps)
}

/// exp(−iHt) applied to the state; H must be hermitian.
pub fn evolve_numeric(state: &StateVector, hamiltonian: &Operator, t: f64) -> Result<StateVector> {
    if hamiltonian.basis() != state.basis() {
        return Err(Error::BasisMismatch(
            "propagator basis differs from the state".into(),
        ));
    }
    let deviation = linalg::hermitian_deviation(hamiltonian.matrix());
    if deviation > 1e-12 * linalg::max_abs(hamiltonian.matrix()).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let propagator = linalg::exp_hermitian_scaled(hamiltonian.matrix(), C64::new(0.0, -t))?;
    StateVector::new(state.basis().clone(), propagator.dot(state.amplitudes()))
}

/// Least-squares split of a state into m coherent components sharing θ.
#[derive(Debug, Clone)]
pub struct CatDecomposition {
    pub m: usize,
    pub coefficients: Vec<C64>,
    pub component_phis: Vec<f64>,
    pub theta: f64,
    /// 1 − ‖projection‖²; what the component family fails to capture.
    pub residual: f64,
}

fn project_onto_family(
    state: &StateVector,
    n_atoms: u32,
    theta: f64,
    phis: &[f64],
) -> Result<(Vec<C64>, f64)> {
    let m = phis.len();
    let components: Vec<StateVector> = phis
        .iter()
        .map(|&p| evolve_analytic(theta, p, n_atoms, 0.0, 0.0))
        .collect::<Result<_>>()?;
    let mut gram = Array2::<C64>::zeros((m, m));
    let mut rhs = Array1::<C64>::zeros(m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = components[i].inner(&components[j])?;
        }
        rhs[i] = components[i].inner(state)?;
    }
    let (eigs, _) = linalg::hermitian_eigen(&gram)?;
    let max_eig = eigs.last().copied().unwrap_or(0.0);
    if eigs[0] < GRAM_CONDITION_FLOOR * max_eig {
        return Err(Error::IllConditioned(
            "coherent component family is degenerate; θ too close to a pole".into(),
        ));
    }
    let coeff = linalg::solve_small(&gram, &rhs)?;
    let captured: f64 = coeff
        .iter()
        .zip(rhs.iter())
        .map(|(f, r)| (f.conj() * r).re)
        .sum();
    Ok((coeff.to_vec(), (1.0 - captured).max(0.0)))
}

/// Splits a state evolved to t = π/(mη) into m coherent states at the same
/// θ. Both phase-offset families (2q−N)π/m and (2q−N+1)π/m are tried; the
/// one reconstructing better wins and its φ values are reported.
pub fn cat_decompose(
    state: &StateVector,
    m: usize,
    theta: f64,
    phi: f64,
) -> Result<CatDecomposition> {
    if m < 2 {
        return Err(Error::InvalidArgument(
            "a superposition needs at least two components".into(),
        ));
    }
    let space = match state.basis() {
        Basis::Spin(space) => *space,
        _ => {
            return Err(Error::BasisMismatch(
                "cat decomposition works on a single spin space".into(),
            ))
        }
    };
    let n_atoms = space.two_s();
    let n = f64::from(n_atoms);
    let offsets = |shift: f64| -> Vec<f64> {
        (0..m)
            .map(|q| phi + std::f64::consts::PI * (2.0 * q as f64 - n + shift) / m as f64)
            .collect()
    };

    let mut best: Option<CatDecomposition> = None;
    for shift in [0.0, 1.0] {
        let phis = offsets(shift);
        let (coefficients, residual) = project_onto_family(state, n_atoms, theta, &phis)?;
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(CatDecomposition {
                m,
                coefficients,
                component_phis: phis,
                theta,
                residual,
            });
        }
    }
    Ok(best.expect("both families evaluated"))
}

/// Isometry from the S = N/2 Dicke space into N spin-1/2 factors: |S,m⟩
/// spreads evenly over the bitstrings with S+m excited atoms. Atom 0 is the
/// slowest index; per atom, index 0 is ground and 1 excited.
pub fn symmetric_embedding(state: &StateVector) -> Result<StateVector> {
    let space = match state.basis() {
        Basis::Spin(space) => *space,
        _ => {
            return Err(Error::BasisMismatch(
                "symmetric embedding starts from a Dicke space".into(),
            ))
        }
    };
    let n = space.two_s() as usize;
    if n > 24 {
        return Err(Error::InvalidArgument(format!(
            "product space for {n} atoms is too large"
        )));
    }
    let half = Basis::Spin(SpinSpace::new(1)?);
    let mut basis = half.clone();
    for _ in 1..n {
        basis = basis.product_with(&half);
    }
    let mut choose = vec![1.0f64; n + 1];
    for k in 1..=n {
        choose[k] = choose[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    let mut amps = Array1::<C64>::zeros(1usize << n);
    for idx in 0..(1usize << n) {
        let weight = idx.count_ones() as usize;
        amps[idx] = state.amplitudes()[weight] / C64::new(choose[weight].sqrt(), 0.0);
    }
    StateVector::new(basis, amps)
}

/// The N-atom GHZ state in the 2^N product space: an equal split between
/// two antipodal product states of the equatorial plane.
pub fn ghz_state(n_atoms: u32) -> Result<StateVector> {
    if n_atoms < 2 {
        return Err(Error::InvalidArgument("need at least two atoms".into()));
    }
    let n = n_atoms as usize;
    if n > 24 {
        return Err(Error::InvalidArgument(format!(
            "product space for {n} atoms is too large"
        )));
    }
    let half = Basis::Spin(SpinSpace::new(1)?);
    let mut basis = half.clone();
    for _ in 1..n {
        basis = basis.product_with(&half);
    }
    let quarter = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let scale = quarter / C64::new((2.0f64).powf(n as f64 / 2.0) * std::f64::consts::SQRT_2, 0.0);
    let mut amps = Array1::<C64>::zeros(1usize << n);
    for idx in 0..(1usize << n) {
        let weight = idx.count_ones();
        // (−i)^{N·w} for the shared branch phase; reduced mod 4 to keep the
        // angle small and exact.
        let up = C64::from_polar(
            1.0,
            -std::f64::consts::FRAC_PI_2 * f64::from(n_atoms * weight % 4),
        );
        let sign = if weight % 2 == 0 { 1.0 } else { -1.0 };
        amps[idx] = scale * up * (C64::new(1.0, 0.0) - C64::new(0.0, sign));
    }
    StateVector::new(basis, amps)
}

/// |⟨GHZ|state⟩|²; spin-space states are embedded symmetrically first.
pub fn ghz_fidelity(state: &StateVector) -> Result<f64> {
    let product = match state.basis() {
        Basis::Spin(_) => symmetric_embedding(state)?,
        Basis::Product(_) => state.clone(),
        _ => {
            return Err(Error::BasisMismatch(
                "GHZ comparison needs a spin or product state".into(),
            ))
        }
    };
    let n = match product.basis() {
        Basis::Product(factors) => {
            for f in factors {
                if !matches!(f, Basis::Spin(s) if s.two_s() == 1) {
                    return Err(Error::BasisMismatch(
                        "GHZ comparison needs spin-1/2 factors".into(),
                    ));
                }
            }
            factors.len() as u32
        }
        _ => unreachable!("embedding produces a product basis"),
    };
    ghz_state(n)?.fidelity(&product)
}

/// P(β) = |⟨α,β|ψ⟩|² over the β grid, with ⟨α,β| the atomic coherent bra of
/// the second Ramsey zone.
pub fn ramsey_fringe(state: &StateVector, alpha: f64, beta_grid: &[f64]) -> Result<Vec<f64>> {
    let space = match state.basis() {
        Basis::Spin(space) => *space,
        _ => {
            return Err(Error::BasisMismatch(
                "Ramsey projection works on a single spin space".into(),
            ))
        }
    };
    beta_grid
        .iter()
        .map(|&beta| {
            let bra = evolve_analytic(alpha, beta, space.two_s(), 0.0, 0.0)?;
            bra.fidelity(state)
        })
        .collect()
}

/// Fringe of an incoherent mixture: the weighted average of the component
/// fringes, normalized over the weights.
pub fn ramsey_fringe_mixture(
    states: &[StateVector],
    weights: &[f64],
    alpha: f64,
    beta_grid: &[f64],
) -> Result<Vec<f64>> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::InvalidArgument(
            "one weight per component state required".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("weights must sum to > 0".into()));
    }
    let mut mix = vec![0.0; beta_grid.len()];
    for (state, &w) in states.iter().zip(weights) {
        let p = ramsey_fringe(state, alpha, beta_grid)?;
        for (acc, v) in mix.iter_mut().zip(p) {
            *acc += w / total * v;
        }
    }
    Ok(mix)
}
