//! Uncertainty relations for hermitian operator pairs and the eigenvalue
//! problem whose solutions saturate them.
//!
//! For hermitian A, B with [A, B] = iC, every pure state obeys
//! var(A) var(B) >= |⟨C⟩/2|² + |⟨{ΔA,ΔB}⟩/2|² >= |⟨C⟩|²/4. The states
//! reaching the first bound are exactly the solutions of
//! (A + iλB)|ψ⟩ = z|ψ⟩ with complex λ; z is then forced to
//! ⟨A⟩ + iλ⟨B⟩.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{commutator, expectation, Operator, StateVector};
use crate::linalg;
use crate::C64;

/// Relative hermiticity tolerance for operator inputs.
const HERMITICITY_TOL: f64 = 1e-12;
/// Relative tolerance for C = -i[A,B] to be hermitian on the truncated space.
const COMMUTATOR_TOL: f64 = 1e-10;
/// Eigenvectors carrying more than this amplitude on the truncation edge are
/// artifacts of the finite cutoff, not states.
const GHOST_EDGE_TOL: f64 = 1e-6;
/// Largest eigen residual admitted by the enumerating solver.
const ENUMERATION_RESIDUAL_CUT: f64 = 1e-6;
/// Singular values below this count as the near-kernel in targeted solves.
const KERNEL_SIGMA_TOL: f64 = 1e-7;

/// Second moments of a hermitian pair on one pure state.
///
/// `equality_residual` is `product - |⟨C⟩/2|² - |⟨{ΔA,ΔB}⟩/2|²`; it is
/// nonnegative for every pure state and vanishes exactly on the
/// minimum-uncertainty solutions.
#[derive(Debug, Clone, Copy)]
pub struct UncertaintyReport {
    pub var_a: f64,
    pub var_b: f64,
    pub product: f64,
    /// ⟨C⟩ with C = -i[A,B]; real up to truncation noise.
    pub commutator_mean: C64,
    /// ⟨{ΔA, ΔB}⟩, twice the symmetrized covariance.
    pub anticommutator_mean: f64,
    /// |⟨C⟩|²/4, the weak (Heisenberg) lower bound on `product`.
    pub bound: f64,
    pub equality_residual: f64,
}

/// One normalizable solution of (A + iλB)|ψ⟩ = z|ψ⟩ on the truncated space.
#[derive(Debug, Clone)]
pub struct MinUncertaintySolution {
    pub state: StateVector,
    pub lambda: C64,
    /// Self-consistent eigenvalue ⟨A⟩ + iλ⟨B⟩.
    pub eigenvalue: C64,
    /// ‖(A + iλB - z)|ψ⟩‖.
    pub residual: f64,
}

/// Both sides of the two identities every minimum-uncertainty solution obeys:
/// ⟨ΔA²⟩ = |λ|²⟨ΔB²⟩ and ⟨{ΔA,ΔB}⟩ = (Im λ / Re λ)⟨C⟩.
#[derive(Debug, Clone, Copy)]
pub struct SolutionIdentities {
    pub variance_lhs: f64,
    pub variance_rhs: f64,
    pub correlation_lhs: f64,
    pub correlation_rhs: f64,
    /// False when Re λ = 0 and the correlation identity is undefined.
    pub correlation_checked: bool,
}

fn require_hermitian(op: &Operator) -> Result<()> {
    if !op.is_hermitian(HERMITICITY_TOL) {
        return Err(Error::NotHermitian {
            deviation: linalg::hermitian_deviation(op.matrix()),
        });
    }
    Ok(())
}

fn require_pair(a: &Operator, b: &Operator) -> Result<()> {
    require_hermitian(a)?;
    require_hermitian(b)?;
    if a.basis() != b.basis() {
        return Err(Error::BasisMismatch(
            "operator pair lives on different bases".into(),
        ));
    }
    Ok(())
}

/// ⟨Op²⟩ - ⟨Op⟩², evaluated as ‖(Op - ⟨Op⟩)|ψ⟩‖² so the result is
/// nonnegative by construction.
pub fn variance(state: &StateVector, op: &Operator) -> Result<f64> {
    require_hermitian(op)?;
    let applied = op.apply(state)?;
    let mean = linalg::inner(state.amplitudes(), &applied).re;
    let centered = &applied - &state.amplitudes().mapv(|z| z * mean);
    Ok(linalg::vec_norm(&centered).powi(2))
}

/// ⟨ΔA ΔB⟩ on a pure state; its real part is the symmetrized covariance and
/// its imaginary part is ⟨C⟩/2.
pub fn deviation_product(state: &StateVector, a: &Operator, b: &Operator) -> Result<C64> {
    require_pair(a, b)?;
    let centered = |op: &Operator| -> Result<Array1<C64>> {
        let applied = op.apply(state)?;
        let mean = linalg::inner(state.amplitudes(), &applied).re;
        Ok(&applied - &state.amplitudes().mapv(|z| z * mean))
    };
    let da = centered(a)?;
    let db = centered(b)?;
    Ok(linalg::inner(&da, &db))
}

/// Symmetrized covariance ½⟨{ΔA, ΔB}⟩.
pub fn covariance(state: &StateVector, a: &Operator, b: &Operator) -> Result<f64> {
    Ok(deviation_product(state, a, b)?.re)
}

/// Full second-moment report for a hermitian pair on a pure state.
///
/// C = -i[A,B] must come out hermitian; on truncated mode spaces it does as
/// long as the pair is exactly hermitian, with the cutoff showing up only in
/// C's corner entry.
pub fn uncertainty_report(
    state: &StateVector,
    a: &Operator,
    b: &Operator,
) -> Result<UncertaintyReport> {
    require_pair(a, b)?;
    let c_op = commutator(a, b)?.scale(C64::new(0.0, -1.0));
    if !c_op.is_hermitian(COMMUTATOR_TOL) {
        return Err(Error::InvalidArgument(format!(
            "-i[A,B] is not hermitian (deviation {:.3e}); pair unusable on this space",
            linalg::hermitian_deviation(c_op.matrix()),
        )));
    }
    let var_a = variance(state, a)?;
    let var_b = variance(state, b)?;
    let product = var_a * var_b;
    let commutator_mean = expectation(state, &c_op)?;
    let anticommutator_mean = 2.0 * deviation_product(state, a, b)?.re;
    let bound = commutator_mean.norm_sqr() / 4.0;
    let equality_residual = product - bound - (anticommutator_mean / 2.0).powi(2);
    Ok(UncertaintyReport {
        var_a,
        var_b,
        product,
        commutator_mean,
        anticommutator_mean,
        bound,
        equality_residual,
    })
}

fn solution_from_amplitudes(
    a: &Operator,
    b: &Operator,
    lambda: C64,
    m: &Array2<C64>,
    amps: Array1<C64>,
) -> Result<Option<MinUncertaintySolution>> {
    // Defective matrices make the backend pad its eigenvector set with zero
    // columns; those are non-solutions, not errors.
    if linalg::vec_norm(&amps) < 1e-150 {
        return Ok(None);
    }
    let state = StateVector::new(a.basis().clone(), amps)?;
    if state.edge_amplitude() > GHOST_EDGE_TOL {
        return Ok(None);
    }
    let mean_a = expectation(&state, a)?.re;
    let mean_b = expectation(&state, b)?.re;
    let z = C64::new(mean_a, 0.0) + C64::new(0.0, 1.0) * lambda * mean_b;
    let shifted = &m.dot(state.amplitudes()) - &state.amplitudes().mapv(|w| w * z);
    let residual = linalg::vec_norm(&shifted);
    Ok(Some(MinUncertaintySolution {
        state,
        lambda,
        eigenvalue: z,
        residual,
    }))
}

fn dedupe_and_sort(mut sols: Vec<MinUncertaintySolution>) -> Vec<MinUncertaintySolution> {
    sols.sort_by(|x, y| x.residual.total_cmp(&y.residual));
    let mut kept: Vec<MinUncertaintySolution> = Vec::new();
    for sol in sols {
        let dup = kept
            .iter()
            .any(|k| k.state.fidelity(&sol.state).unwrap_or(0.0) > 1.0 - 1e-6);
        if !dup {
            kept.push(sol);
        }
    }
    kept
}

fn combined_matrix(a: &Operator, b: &Operator, lambda: C64) -> Array2<C64> {
    let il = C64::new(0.0, 1.0) * lambda;
    a.matrix() + &b.matrix().mapv(|w| w * il)
}

/// Enumerates normalizable eigenvectors of A + iλB on the truncated space.
///
/// Truncation-ghost eigenvectors (significant amplitude on the edge) are
/// dropped, the rest come back sorted by residual. An empty list means no
/// minimum-uncertainty state of this λ survives the cutoff.
pub fn solve_min_uncertainty(
    a: &Operator,
    b: &Operator,
    lambda: C64,
) -> Result<Vec<MinUncertaintySolution>> {
    require_pair(a, b)?;
    if lambda.norm() < 1e-14 {
        return Err(Error::InvalidArgument("lambda must be nonzero".into()));
    }
    let m = combined_matrix(a, b, lambda);
    let (_, vecs) = linalg::eigen(&m)?;
    let mut sols = Vec::new();
    for j in 0..vecs.ncols() {
        if let Some(sol) =
            solution_from_amplitudes(a, b, lambda, &m, vecs.column(j).to_owned())?
        {
            if sol.residual < ENUMERATION_RESIDUAL_CUT {
                sols.push(sol);
            }
        }
    }
    Ok(dedupe_and_sort(sols))
}

/// Targeted variant of [`solve_min_uncertainty`]: returns the near-kernel of
/// (A + iλB - z) as solutions.
///
/// Needed whenever the truncated matrix is defective and enumeration cannot
/// see the physical spectrum, e.g. for λ = 1 away from z = 0 or for ladder
/// realizations whose truncation is strictly triangular. May return more than
/// one state when the target eigenvalue is degenerate.
pub fn solve_min_uncertainty_at(
    a: &Operator,
    b: &Operator,
    lambda: C64,
    z: C64,
) -> Result<Vec<MinUncertaintySolution>> {
    require_pair(a, b)?;
    if lambda.norm() < 1e-14 {
        return Err(Error::InvalidArgument("lambda must be nonzero".into()));
    }
    let m = combined_matrix(a, b, lambda);
    let dim = m.nrows();
    let shifted = &m - &(Array2::<C64>::eye(dim).mapv(|w| w * z));
    let (sigmas, vecs) = linalg::singular_ascending(&shifted)?;
    let mut sols = Vec::new();
    for (j, &sigma) in sigmas.iter().enumerate() {
        if sigma > KERNEL_SIGMA_TOL {
            break;
        }
        if let Some(sol) =
            solution_from_amplitudes(a, b, lambda, &m, vecs.column(j).to_owned())?
        {
            sols.push(sol);
        }
    }
    Ok(dedupe_and_sort(sols))
}

/// Evaluates the variance-ratio and correlation identities for a solver
/// output, returning both sides of each.
pub fn solution_identities(
    solution: &MinUncertaintySolution,
    a: &Operator,
    b: &Operator,
) -> Result<SolutionIdentities> {
    require_pair(a, b)?;
    let state = &solution.state;
    let lambda = solution.lambda;
    let variance_lhs = variance(state, a)?;
    let variance_rhs = lambda.norm_sqr() * variance(state, b)?;
    let correlation_lhs = 2.0 * deviation_product(state, a, b)?.re;
    let correlation_checked = lambda.re.abs() > 1e-12 * lambda.norm();
    let correlation_rhs = if correlation_checked {
        let c_op = commutator(a, b)?.scale(C64::new(0.0, -1.0));
        (lambda.im / lambda.re) * expectation(state, &c_op)?.re
    } else {
        0.0
    };
    Ok(SolutionIdentities {
        variance_lhs,
        variance_rhs,
        correlation_lhs,
        correlation_rhs,
        correlation_checked,
    })
}
