//! Bosonic state constructors and quadrature analysis: coherent and squeezed
//! coherent states, even/odd superpositions, SU(1,1) eigenstates, pair
//! coherent states, and position-representation wavefunctions.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, creation, expectation, fock_state, identity, number, tensor, Basis, ModeSpace,
    Operator, StateVector,
};
use crate::linalg;
use crate::uncertainty::{solve_min_uncertainty_at, MinUncertaintySolution};
use crate::C64;

/// Fock-space constructors must keep at least this much probability below
/// the cutoff.
pub const DEFAULT_MIN_CAPTURE: f64 = 1.0 - 1e-8;

/// Residual allowed when a constructor verifies its own eigenrelation.
const EIGENRELATION_TOL: f64 = 1e-8;

fn check_capture(captured: f64, required: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&required) {
        return Err(Error::InvalidArgument(format!(
            "capture tolerance {required} outside [0, 1]"
        )));
    }
    if captured < required {
        return Err(Error::TruncationCapture { captured, required });
    }
    Ok(())
}

/// Coherent state with amplitudes proportional to αⁿ/√(n!).
pub fn coherent(space: &ModeSpace, alpha: C64) -> Result<StateVector> {
    coherent_with_capture(space, alpha, DEFAULT_MIN_CAPTURE)
}

pub fn coherent_with_capture(
    space: &ModeSpace,
    alpha: C64,
    min_capture: f64,
) -> Result<StateVector> {
    let mean = alpha.norm_sqr();
    if mean > space.cutoff() as f64 / 4.0 {
        return Err(Error::InvalidArgument(format!(
            "|alpha|^2 = {mean:.3} too large for cutoff {}",
            space.cutoff()
        )));
    }
    let mut amps = Array1::zeros(space.dim());
    let mut poisson = (-mean).exp();
    let mut captured = poisson;
    amps[0] = C64::new(1.0, 0.0);
    for n in 1..space.dim() {
        amps[n] = amps[n - 1] * alpha / (n as f64).sqrt();
        poisson *= mean / n as f64;
        captured += poisson;
    }
    check_capture(captured, min_capture)?;
    StateVector::new(space.basis(), amps)
}

/// Bogoliubov coefficients of the transformed mode μa + νa† together with
/// its eigenvalue α.
///
/// μ and ν are pinned to the quadrature pair via
/// x + iλp = √(2λ)(μa + νa†), which fixes μ = (√λ + 1/√λ)/2 and
/// ν = (1/√λ − √λ)/2 on the principal square-root branch.
#[derive(Debug, Clone, Copy)]
pub struct SqueezeParams {
    pub lambda: C64,
    pub mu: C64,
    pub nu: C64,
    pub alpha: C64,
}

impl SqueezeParams {
    /// Builds the coefficients from λ. Normalizable eigenstates need
    /// |ν| < |μ|, which holds exactly for Re λ > 0.
    pub fn from_lambda(lambda: C64, alpha: C64) -> Result<Self> {
        if lambda.re <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda = {lambda} outside the right half plane; no normalizable eigenstate"
            )));
        }
        let s = lambda.sqrt();
        let inv = C64::new(1.0, 0.0) / s;
        Ok(Self {
            lambda,
            mu: (s + inv) / 2.0,
            nu: (inv - s) / 2.0,
            alpha,
        })
    }

    /// Eigenvalue of x + iλp carried by the same state: z = √(2λ)·α.
    pub fn quadrature_eigenvalue(&self) -> C64 {
        (self.lambda * 2.0).sqrt() * self.alpha
    }
}

/// Squeezed coherent state: the normalized solution of
/// (μa + νa†)|ψ⟩ = α|ψ⟩.
///
/// Built by composing a squeeze and a displacement exponential, then checked
/// against the eigenrelation itself, so construction errors cannot hide.
pub fn squeezed_coherent(space: &ModeSpace, params: &SqueezeParams) -> Result<StateVector> {
    let (mu, nu, alpha) = (params.mu, params.nu, params.alpha);
    if (mu * mu - nu * nu - 1.0).norm() > 1e-10 {
        return Err(Error::InvalidArgument(
            "mu^2 - nu^2 = 1 violated; not a Bogoliubov pair".into(),
        ));
    }
    let ratio = nu / mu;
    if ratio.norm() >= 1.0 {
        return Err(Error::InvalidArgument(
            "|nu/mu| >= 1; eigenstate not normalizable".into(),
        ));
    }
    let r = ratio.norm().atanh();
    let theta = ratio.arg();
    let zeta = C64::from_polar(r, theta);

    let a = annihilation(space);
    let adag = creation(space);
    let a2 = a.matmul(&a)?;
    let adag2 = adag.matmul(&adag)?;
    // S = exp[(ζ̄ a² − ζ a†²)/2]
    let squeeze_gen = a2
        .scale(zeta.conj() / 2.0)
        .sub(&adag2.scale(zeta / 2.0))?;
    let squeeze = linalg::exp_antihermitian(squeeze_gen.matrix())?;

    // Displacement amplitude from μβ + νβ̄ = α, solved as a real 2x2 system.
    let c1 = mu + nu;
    let c2 = C64::new(0.0, 1.0) * (mu - nu);
    let det = c1.re * c2.im - c2.re * c1.im;
    if det.abs() < 1e-14 {
        return Err(Error::IllConditioned(
            "displacement equation is singular".into(),
        ));
    }
    let beta = C64::new(
        (alpha.re * c2.im - c2.re * alpha.im) / det,
        (c1.re * alpha.im - alpha.re * c1.im) / det,
    );
    let displace_gen = adag.scale(beta).sub(&a.scale(beta.conj()))?;
    let displace = linalg::exp_antihermitian(displace_gen.matrix())?;

    let vac = fock_state(space, 0)?;
    let amps = displace.dot(&squeeze.dot(vac.amplitudes()));
    let state = StateVector::new(space.basis(), amps)?;

    // Independent verification path.
    let transformed = a.scale(mu).add(&adag.scale(nu))?;
    let shifted = &transformed.apply(&state)? - &state.amplitudes().mapv(|w| w * alpha);
    let residual = linalg::vec_norm(&shifted);
    if residual > EIGENRELATION_TOL {
        return Err(Error::Numerical(format!(
            "squeezed state eigenrelation residual {residual:.3e}; raise the cutoff"
        )));
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Normalized superposition |α⟩ + |−α⟩ (even) or |α⟩ − |−α⟩ (odd), with
/// photon support restricted to the matching parity.
pub fn even_odd_cat(space: &ModeSpace, alpha: C64, parity: Parity) -> Result<StateVector> {
    even_odd_cat_with_capture(space, alpha, parity, DEFAULT_MIN_CAPTURE)
}

pub fn even_odd_cat_with_capture(
    space: &ModeSpace,
    alpha: C64,
    parity: Parity,
    min_capture: f64,
) -> Result<StateVector> {
    let mean = alpha.norm_sqr();
    if parity == Parity::Odd && mean == 0.0 {
        return Err(Error::InvalidArgument(
            "odd superposition vanishes at alpha = 0".into(),
        ));
    }
    let keep = |n: usize| match parity {
        Parity::Even => n.is_multiple_of(2),
        Parity::Odd => !n.is_multiple_of(2),
    };
    let mut amps = Array1::zeros(space.dim());
    let mut coeff = C64::new(1.0, 0.0);
    let mut poisson = (-mean).exp();
    let mut kept_mass = 0.0;
    for n in 0..space.dim() {
        if n > 0 {
            coeff *= alpha / (n as f64).sqrt();
            poisson *= mean / n as f64;
        }
        if keep(n) {
            amps[n] = coeff;
            kept_mass += poisson;
        }
    }
    // Full-series mass of the kept parity: e^{-r}·cosh(r) or e^{-r}·sinh(r).
    let full_mass = match parity {
        Parity::Even => (1.0 + (-2.0 * mean).exp()) / 2.0,
        Parity::Odd => -(-2.0 * mean).exp_m1() / 2.0,
    };
    check_capture(kept_mass / full_mass, min_capture)?;
    StateVector::new(space.basis(), amps)
}

/// Solves (μK₋ + νK₊)|ψ⟩ = target|ψ⟩ for a declared ladder realization.
///
/// The truncated K₋ is strictly triangular, so its finite-dimensional
/// spectrum collapses to zero and enumeration is blind; the solve goes
/// through the near-kernel of the shifted operator instead. Degenerate
/// targets return a basis of the solution space.
pub fn su11_eigenstates(
    k_minus: &Operator,
    k_plus: &Operator,
    mu: C64,
    nu: C64,
    target: C64,
) -> Result<Vec<MinUncertaintySolution>> {
    if k_minus.basis() != k_plus.basis() {
        return Err(Error::BasisMismatch(
            "ladder pair lives on different bases".into(),
        ));
    }
    let sum = mu + nu;
    if sum.norm() < 1e-14 {
        return Err(Error::InvalidArgument(
            "mu + nu = 0 leaves a hermitian combination; no eigenvalue problem".into(),
        ));
    }
    // μK₋ + νK₊ = (μ+ν)(K₁ + iλK₂) with K₁ = (K₊+K₋)/2, K₂ = (K₊−K₋)/2i.
    let half = C64::new(0.5, 0.0);
    let k1 = k_plus.add(k_minus)?.scale(half);
    let k2 = k_plus.sub(k_minus)?.scale(C64::new(0.0, -0.5));
    let lambda = (nu - mu) / sum;
    solve_min_uncertainty_at(&k1, &k2, lambda, target / sum)
}

/// Two-mode eigenstate of ab and of the photon-number difference.
#[derive(Debug, Clone, Copy)]
pub struct PairCoherentParams {
    pub xi: C64,
    /// Eigenvalue of a†a − b†b; negative values are reached by swapping the
    /// modes before construction.
    pub q: usize,
}

/// Pair coherent state with amplitudes ∝ ξⁿ/√(n!(n+q)!) on |n+q, n⟩.
pub fn pair_coherent(
    space_a: &ModeSpace,
    space_b: &ModeSpace,
    params: &PairCoherentParams,
) -> Result<StateVector> {
    pair_coherent_with_capture(space_a, space_b, params, DEFAULT_MIN_CAPTURE)
}

pub fn pair_coherent_with_capture(
    space_a: &ModeSpace,
    space_b: &ModeSpace,
    params: &PairCoherentParams,
    min_capture: f64,
) -> Result<StateVector> {
    let q = params.q;
    if q > space_a.cutoff() {
        return Err(Error::InvalidArgument(format!(
            "number offset q = {q} above the first mode's cutoff"
        )));
    }
    let dim_b = space_b.dim();
    let n_max = (space_a.cutoff() - q).min(space_b.cutoff());
    let strength = params.xi.norm_sqr();

    // Series terms of the squared norm, |ξ|^{2n}/(n!(n+q)!), summed once to
    // the cutoff and once to convergence.
    let mut term = 1.0f64;
    for k in 1..=q {
        term /= k as f64;
    }
    let mut kept = 0.0;
    let mut total = 0.0;
    let mut n = 0usize;
    loop {
        if n <= n_max {
            kept += term;
        }
        total += term;
        n += 1;
        term *= strength / (n as f64 * (n + q) as f64);
        if n > n_max && (term < total * 1e-18 || term == 0.0) {
            break;
        }
    }
    check_capture(kept / total, min_capture)?;

    let basis = space_a.basis().product_with(&space_b.basis());
    let mut amps = Array1::zeros(basis.dim());
    let mut coeff = C64::new(1.0, 0.0);
    for k in 1..=q {
        coeff /= (k as f64).sqrt();
    }
    for n in 0..=n_max {
        if n > 0 {
            coeff *= params.xi / ((n * (n + q)) as f64).sqrt();
        }
        amps[(n + q) * dim_b + n] = coeff;
    }
    StateVector::new(basis, amps)
}

/// Harmonic-oscillator eigenfunctions ψ_0..ψ_max_n on a grid, one function
/// per column. Uses the normalized recurrence, stable for large n.
pub fn hermite_functions(grid: &[f64], max_n: usize) -> Array2<f64> {
    let mut out = Array2::zeros((grid.len(), max_n + 1));
    let norm0 = std::f64::consts::PI.powf(-0.25);
    for (i, &x) in grid.iter().enumerate() {
        out[(i, 0)] = norm0 * (-x * x / 2.0).exp();
        if max_n >= 1 {
            out[(i, 1)] = 2.0f64.sqrt() * x * out[(i, 0)];
        }
        for n in 2..=max_n {
            let nf = n as f64;
            out[(i, n)] = (2.0 / nf).sqrt() * x * out[(i, n - 1)]
                - ((nf - 1.0) / nf).sqrt() * out[(i, n - 2)];
        }
    }
    out
}

fn single_mode_dim(basis: &Basis) -> Result<usize> {
    match basis {
        Basis::Mode(m) => Ok(m.dim()),
        _ => Err(Error::BasisMismatch(
            "position wavefunction needs a single-mode state".into(),
        )),
    }
}

/// ψ(x) = Σ c_n ψ_n(x) for a single-mode state.
pub fn position_wavefunction(state: &StateVector, grid: &[f64]) -> Result<Array1<C64>> {
    let dim = single_mode_dim(state.basis())?;
    let funcs = hermite_functions(grid, dim - 1);
    let mut out = Array1::zeros(grid.len());
    for i in 0..grid.len() {
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..dim {
            acc += state.amplitudes()[n] * funcs[(i, n)];
        }
        out[i] = acc;
    }
    Ok(out)
}

/// Φ(x,y) = Σ c_{mn} ψ_m(x) ψ_n(y) for a two-mode state, row-major over
/// (x, y).
pub fn quadrature_wavefunction(
    state: &StateVector,
    x_grid: &[f64],
    y_grid: &[f64],
) -> Result<Array2<C64>> {
    let factors = state.basis().factors();
    let dims: Vec<usize> = match factors.as_slice() {
        [Basis::Mode(a), Basis::Mode(b)] => vec![a.dim(), b.dim()],
        _ => {
            return Err(Error::BasisMismatch(
                "quadrature grid needs a two-mode state".into(),
            ))
        }
    };
    let (da, db) = (dims[0], dims[1]);
    let coeffs = Array2::from_shape_fn((da, db), |(m, n)| state.amplitudes()[m * db + n]);
    let fx = hermite_functions(x_grid, da - 1).mapv(|v| C64::new(v, 0.0));
    let fy = hermite_functions(y_grid, db - 1).mapv(|v| C64::new(v, 0.0));
    Ok(fx.dot(&coeffs).dot(&fy.t()))
}

/// Mandel parameter (var(n) − ⟨n⟩)/⟨n⟩ of one mode; negative values mean
/// narrower-than-Poissonian photon statistics.
pub fn mandel_q(state: &StateVector, mode: usize) -> Result<f64> {
    let factors = state.basis().factors();
    if mode >= factors.len() {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for {} factors",
            factors.len()
        )));
    }
    let mut op: Option<Operator> = None;
    for (i, f) in factors.iter().enumerate() {
        let piece = match f {
            Basis::Mode(m) if i == mode => number(m),
            other => identity(other),
        };
        op = Some(match op {
            None => piece,
            Some(acc) => tensor(&acc, &piece),
        });
        if i == mode && !matches!(f, Basis::Mode(_)) {
            return Err(Error::InvalidArgument(format!(
                "factor {mode} is not a bosonic mode"
            )));
        }
    }
    let n_op = op.expect("at least one factor");
    let mean = expectation(state, &n_op)?.re;
    if mean < 1e-12 {
        return Err(Error::InvalidArgument(
            "mean photon number vanishes; Mandel parameter undefined".into(),
        ));
    }
    let var = crate::uncertainty::variance(state, &n_op)?;
    Ok((var - mean) / mean)
}

/// Variances of the single-mode and normalized sum/difference quadratures of
/// a two-mode state. The vacuum benchmark for every entry is 1/2.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureVariances {
    pub var_x_a: f64,
    pub var_p_a: f64,
    pub var_x_b: f64,
    pub var_p_b: f64,
    pub var_x_sum: f64,
    pub var_x_diff: f64,
    pub var_p_sum: f64,
    pub var_p_diff: f64,
}

impl QuadratureVariances {
    /// True if any recorded variance sits below the vacuum level.
    pub fn any_squeezed(&self) -> bool {
        [
            self.var_x_a,
            self.var_p_a,
            self.var_x_b,
            self.var_p_b,
            self.var_x_sum,
            self.var_x_diff,
            self.var_p_sum,
            self.var_p_diff,
        ]
        .iter()
        .any(|&v| v < 0.5 - 1e-12)
    }
}

pub fn quadrature_variances(state: &StateVector) -> Result<QuadratureVariances> {
    let factors = state.basis().factors();
    let (ma, mb) = match factors.as_slice() {
        [Basis::Mode(a), Basis::Mode(b)] => (*a, *b),
        _ => {
            return Err(Error::BasisMismatch(
                "quadrature variance report needs a two-mode state".into(),
            ))
        }
    };
    let id_a = identity(&ma.basis());
    let id_b = identity(&mb.basis());
    let x_a = tensor(&crate::hilbert::position(&ma), &id_b);
    let p_a = tensor(&crate::hilbert::momentum(&ma), &id_b);
    let x_b = tensor(&id_a, &crate::hilbert::position(&mb));
    let p_b = tensor(&id_a, &crate::hilbert::momentum(&mb));
    let sqrt_half = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let var = |op: &Operator| crate::uncertainty::variance(state, op);
    Ok(QuadratureVariances {
        var_x_a: var(&x_a)?,
        var_p_a: var(&p_a)?,
        var_x_b: var(&x_b)?,
        var_p_b: var(&p_b)?,
        var_x_sum: var(&x_a.add(&x_b)?.scale(sqrt_half))?,
        var_x_diff: var(&x_a.sub(&x_b)?.scale(sqrt_half))?,
        var_p_sum: var(&p_a.add(&p_b)?.scale(sqrt_half))?,
        var_p_diff: var(&p_a.sub(&p_b)?.scale(sqrt_half))?,
    })
}

/// Trapezoid-rule quadrature weights for a strictly increasing grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n < 2 {
        return vec![1.0; n];
    }
    let mut w = vec![0.0; n];
    w[0] = (grid[1] - grid[0]) / 2.0;
    w[n - 1] = (grid[n - 1] - grid[n - 2]) / 2.0;
    for i in 1..n - 1 {
        w[i] = (grid[i + 1] - grid[i - 1]) / 2.0;
    }
    w
}

/// Relative L2 distance between a sampled nonnegative density and the
/// moment-matched two-dimensional Gaussian. Near zero for Gaussian data;
/// order one for strongly structured distributions.
pub fn gaussian_fit_residual(
    x_grid: &[f64],
    y_grid: &[f64],
    values: &Array2<f64>,
) -> Result<f64> {
    if values.dim() != (x_grid.len(), y_grid.len()) {
        return Err(Error::InvalidArgument(
            "grid shape does not match value array".into(),
        ));
    }
    let wx = trapezoid_weights(x_grid);
    let wy = trapezoid_weights(y_grid);
    let weight = |i: usize, j: usize| wx[i] * wy[j];
    let mut mass = 0.0;
    for ((i, j), &v) in values.indexed_iter() {
        mass += weight(i, j) * v;
    }
    if mass <= 0.0 {
        return Err(Error::InvalidArgument("density has no mass".into()));
    }
    let mut mean_x = 0.0;
    let mut mean_y = 0.0;
    for ((i, j), &v) in values.indexed_iter() {
        mean_x += weight(i, j) * v * x_grid[i];
        mean_y += weight(i, j) * v * y_grid[j];
    }
    mean_x /= mass;
    mean_y /= mass;
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for ((i, j), &v) in values.indexed_iter() {
        let dx = x_grid[i] - mean_x;
        let dy = y_grid[j] - mean_y;
        let wv = weight(i, j) * v;
        cxx += wv * dx * dx;
        cyy += wv * dy * dy;
        cxy += wv * dx * dy;
    }
    cxx /= mass;
    cyy /= mass;
    cxy /= mass;
    let det = cxx * cyy - cxy * cxy;
    if det <= 0.0 {
        return Err(Error::IllConditioned(
            "degenerate covariance in Gaussian fit".into(),
        ));
    }
    let peak = mass / (2.0 * std::f64::consts::PI * det.sqrt());
    let mut num = 0.0;
    let mut den = 0.0;
    for ((i, j), &v) in values.indexed_iter() {
        let dx = x_grid[i] - mean_x;
        let dy = y_grid[j] - mean_y;
        let quad = (cyy * dx * dx - 2.0 * cxy * dx * dy + cxx * dy * dy) / det;
        let g = peak * (-quad / 2.0).exp();
        let w = weight(i, j);
        num += w * (v - g) * (v - g);
        den += w * v * v;
    }
    Ok((num / den).sqrt())
}
