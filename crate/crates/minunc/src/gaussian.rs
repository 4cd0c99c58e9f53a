//! One-mode Gaussian mixed states parameterized by second moments, with the
//! physicality bound, the closed-form entropy, and numeric density-matrix
//! synthesis for cross-validation.
//!
//! First moments are fixed to zero. The covariance triple is
//! alpha = ⟨p²⟩, beta = ⟨q²⟩, gamma = ⟨qp + pq⟩/2, and a triple describes a
//! state iff sigma = sqrt(alpha·beta − gamma²) − 1/2 is nonnegative; sigma is
//! then the occupancy of the underlying thermal state.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{momentum, position, Basis, ModeSpace, Operator};
use crate::linalg;
use crate::C64;

/// Tolerance for reconstructed second moments of the synthesized matrix.
const MOMENT_TOL: f64 = 1e-8;
/// Density-matrix eigenvalues below this are hard errors, not noise.
const NEGATIVITY_TOL: f64 = -1e-10;

#[derive(Debug, Clone, Copy)]
pub struct GaussianState {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl GaussianState {
    /// Accepts any covariance with positive discriminant; physicality is a
    /// separate query so marginally invalid triples can still be inspected.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidArgument(
                "second moments alpha, beta must be positive".into(),
            ));
        }
        if alpha * beta - gamma * gamma <= 0.0 {
            return Err(Error::InvalidArgument(
                "alpha*beta - gamma^2 <= 0 is not a covariance".into(),
            ));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// ⟨p²⟩
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// ⟨q²⟩
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// ⟨qp + pq⟩/2
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// sqrt(alpha·beta − gamma²) − 1/2; negative values flag an unphysical
    /// Gaussian, zero marks the pure squeezed states.
    pub fn sigma(&self) -> f64 {
        (self.alpha * self.beta - self.gamma * self.gamma).sqrt() - 0.5
    }

    pub fn is_physical(&self) -> bool {
        self.sigma() >= -1e-12
    }

    /// (σ+1)ln(σ+1) − σ ln σ, the entropy of the state in units of k_B.
    pub fn entropy(&self) -> Result<f64> {
        let sigma = self.sigma();
        if sigma < -1e-12 {
            return Err(Error::Unphysical(format!(
                "sigma = {sigma:.3e} below the uncertainty bound"
            )));
        }
        let s = sigma.max(0.0);
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok((s + 1.0) * (s + 1.0).ln() - s * s.ln())
    }

    /// Phase-space density on the (q, p) grid, row-major over q.
    pub fn wigner_eval(&self, q_grid: &[f64], p_grid: &[f64]) -> Result<Array2<f64>> {
        if !self.is_physical() {
            return Err(Error::Unphysical(
                "Wigner form requested for an unphysical covariance".into(),
            ));
        }
        let d = self.alpha * self.beta - self.gamma * self.gamma;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * d.sqrt());
        let mut out = Array2::zeros((q_grid.len(), p_grid.len()));
        for (i, &q) in q_grid.iter().enumerate() {
            for (j, &p) in p_grid.iter().enumerate() {
                let quad = self.alpha * q * q + self.beta * p * p - 2.0 * self.gamma * q * p;
                out[(i, j)] = norm * (-quad / (2.0 * d)).exp();
            }
        }
        Ok(out)
    }

    /// Synthesizes the state as a Fock-basis density matrix:
    /// rotate(φ) · squeeze(r) · thermal(σ) · squeeze† · rotate†, with r and φ
    /// read off the covariance eigensystem. Reconstructed moments are
    /// verified against the triple before returning.
    pub fn to_density_matrix(&self, space: &ModeSpace) -> Result<DensityMatrix> {
        if !self.is_physical() {
            return Err(Error::Unphysical(
                "cannot synthesize an unphysical covariance".into(),
            ));
        }
        let nbar = self.sigma().max(0.0);
        let dim = space.dim();

        // Thermal occupancy must fit under the cutoff.
        let ratio = nbar / (nbar + 1.0);
        let tail = ratio.powi(dim as i32);
        if tail > 1e-8 {
            return Err(Error::TruncationCapture {
                captured: 1.0 - tail,
                required: 1.0 - 1e-8,
            });
        }

        // Covariance [[beta, gamma], [gamma, alpha]] in (q, p) order; its
        // unit-determinant part carries e^{±2r} with the squeeze axes.
        let (a, b, cc) = (self.beta, self.alpha, self.gamma);
        let half_diff = (a - b) / 2.0;
        let spread = (half_diff * half_diff + cc * cc).sqrt();
        let lam_max = (a + b) / 2.0 + spread;
        let lam_min = (a + b) / 2.0 - spread;
        let r = 0.25 * (lam_max / lam_min).ln();
        let phi = if spread < 1e-14 {
            0.0
        } else {
            // Unit eigenvector of the max eigenvalue in (q, p) components.
            let (vq, vp) = if cc.abs() > 1e-14 {
                (cc, lam_max - a)
            } else if a >= b {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            };
            vq.atan2(vp)
        };

        let mut rho = Array2::<C64>::zeros((dim, dim));
        let mut weight = 1.0 / (nbar + 1.0);
        let mut trace = 0.0;
        for n in 0..dim {
            rho[(n, n)] = C64::new(weight, 0.0);
            trace += weight;
            weight *= ratio;
        }
        let renorm = C64::new(1.0 / trace, 0.0);
        rho.mapv_inplace(|z| z * renorm);

        let ann = crate::hilbert::annihilation(space);
        let a2 = ann.matmul(&ann)?;
        let squeeze_gen = a2.sub(&a2.dagger())?.scale(C64::new(r / 2.0, 0.0));
        let squeeze = linalg::exp_antihermitian(squeeze_gen.matrix())?;
        let rotate = Array2::from_diag(&Array1::from_shape_fn(dim, |n| {
            C64::from_polar(1.0, -phi * n as f64)
        }));

        let transform = rotate.dot(&squeeze);
        let rho = transform.dot(&rho).dot(&linalg::dagger(&transform));
        let out = DensityMatrix {
            basis: space.basis(),
            mat: rho,
        };

        let q_op = position(space);
        let p_op = momentum(space);
        let beta_got = out.expectation(&q_op.matmul(&q_op)?)?.re;
        let alpha_got = out.expectation(&p_op.matmul(&p_op)?)?.re;
        let cross = q_op.matmul(&p_op)?.add(&p_op.matmul(&q_op)?)?;
        let gamma_got = out.expectation(&cross)?.re / 2.0;
        let deviation = (beta_got - self.beta)
            .abs()
            .max((alpha_got - self.alpha).abs())
            .max((gamma_got - self.gamma).abs());
        if deviation > MOMENT_TOL {
            return Err(Error::Numerical(format!(
                "synthesized moments deviate by {deviation:.3e}; raise the cutoff"
            )));
        }
        Ok(out)
    }
}

/// Mixed state over a declared basis: hermitian, unit trace, positive within
/// the construction tolerance.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Basis,
    mat: Array2<C64>,
}

impl DensityMatrix {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    /// Tr(ρ·Op).
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.basis() != &self.basis {
            return Err(Error::BasisMismatch(
                "operator basis differs from the density matrix".into(),
            ));
        }
        let m = op.matrix();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.mat.nrows() {
            for j in 0..self.mat.ncols() {
                acc += self.mat[(i, j)] * m[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Diagonal in the Fock basis.
    pub fn photon_number_distribution(&self) -> Vec<f64> {
        (0..self.mat.nrows()).map(|n| self.mat[(n, n)].re).collect()
    }

    /// −Tr(ρ ln ρ) from the eigenvalues; eigenvalues below −1e-10 are
    /// reported as errors rather than clipped.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let (vals, _) = linalg::hermitian_eigen(&self.mat)?;
        let mut entropy = 0.0;
        for &v in &vals {
            if v < NEGATIVITY_TOL {
                return Err(Error::Unphysical(format!(
                    "density matrix eigenvalue {v:.3e} is negative"
                )));
            }
            if v > 0.0 {
                entropy -= v * v.ln();
            }
        }
        Ok(entropy)
    }
}
