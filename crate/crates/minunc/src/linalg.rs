//! Dense complex linear algebra shared by the physics modules.
//!
//! Storage is `ndarray`; decompositions go through `faer` at this boundary
//! and nowhere else.

use faer::{Mat, Side};
use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) fn to_faer(a: &Array2<C64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub(crate) fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub(crate) fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Largest entry of `a - a†`.
pub(crate) fn hermitian_deviation(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a|b⟩` with the left factor conjugated.
pub(crate) fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Eigenvalues and unit-norm eigenvector columns of a general complex matrix.
pub(crate) fn eigen(m: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument("eigendecomposition needs a square matrix".into()));
    }
    let n = m.nrows();
    let evd = to_faer(m)
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let u = evd.U();
    let s = evd.S();
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Array2::zeros((n, n));
    for j in 0..n {
        vals.push(s[j]);
        let mut norm2 = 0.0f64;
        for i in 0..n {
            norm2 += u[(i, j)].norm_sqr();
        }
        let scale = 1.0 / norm2.sqrt();
        for i in 0..n {
            vecs[(i, j)] = u[(i, j)] * scale;
        }
    }
    Ok((vals, vecs))
}

/// Ascending eigenvalues and eigenvector columns of a hermitian matrix.
/// The input is trusted; callers enforce hermiticity where their contract
/// requires it.
pub(crate) fn hermitian_eigen(m: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument("eigendecomposition needs a square matrix".into()));
    }
    let n = m.nrows();
    let evd = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigendecomposition failed: {e:?}")))?;
    let u = evd.U();
    let s = evd.S();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Array2::zeros((n, n));
    for (col, &j) in order.iter().enumerate() {
        vals.push(s[j].re);
        for i in 0..n {
            vecs[(i, col)] = u[(i, j)];
        }
    }
    Ok((vals, vecs))
}

/// Singular values ascending, paired with the matching right singular
/// vectors as columns.
pub(crate) fn singular_ascending(m: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let svd = to_faer(m)
        .svd()
        .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))?;
    let s = svd.S();
    let v = svd.V();
    let k = s.dim();
    let rows = m.ncols();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let mut sigmas = Vec::with_capacity(k);
    let mut vecs = Array2::zeros((rows, k));
    for (col, &j) in order.iter().enumerate() {
        sigmas.push(s[j].re);
        for i in 0..rows {
            vecs[(i, col)] = v[(i, j)];
        }
    }
    Ok((sigmas, vecs))
}

/// exp(g) for anti-hermitian g, via the hermitian eigendecomposition of -i g.
/// Exactly unitary up to rounding, which is what the state constructors need.
pub(crate) fn exp_antihermitian(g: &Array2<C64>) -> Result<Array2<C64>> {
    let scale = max_abs(g).max(1.0);
    let n = g.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((g[(i, j)] + g[(j, i)].conj()).norm());
        }
    }
    if dev > 1e-12 * scale {
        return Err(Error::InvalidArgument(format!(
            "generator not anti-hermitian (deviation {dev:.3e})"
        )));
    }
    let h = g.mapv(|z| z * C64::new(0.0, -1.0));
    let (w, v) = hermitian_eigen(&h)?;
    let mut scaled = v.clone();
    for (j, wj) in w.iter().enumerate() {
        let phase = C64::from_polar(1.0, *wj);
        scaled.column_mut(j).mapv_inplace(|z| z * phase);
    }
    Ok(scaled.dot(&dagger(&v)))
}

/// V exp(factor * w) V† for hermitian input with eigenpairs (w, V).
pub(crate) fn exp_hermitian_scaled(h: &Array2<C64>, factor: C64) -> Result<Array2<C64>> {
    let (w, v) = hermitian_eigen(h)?;
    let mut scaled = v.clone();
    for (j, wj) in w.iter().enumerate() {
        let f = (factor * *wj).exp();
        scaled.column_mut(j).mapv_inplace(|z| z * f);
    }
    Ok(scaled.dot(&dagger(&v)))
}

/// Gaussian elimination with partial pivoting for the small dense systems
/// the decomposition routines produce (never more than a handful of rows).
pub(crate) fn solve_small(a: &Array2<C64>, rhs: &Array1<C64>) -> Result<Array1<C64>> {
    let n = a.nrows();
    if a.ncols() != n || rhs.len() != n {
        return Err(Error::InvalidArgument("solve_small needs square system".into()));
    }
    let mut m = a.clone();
    let mut b = rhs.clone();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[(col, col)].norm();
        for r in col + 1..n {
            if m[(r, col)].norm() > best {
                best = m[(r, col)].norm();
                piv = r;
            }
        }
        if best < 1e-300 {
            return Err(Error::IllConditioned("singular system".into()));
        }
        if piv != col {
            for c in 0..n {
                let tmp = m[(col, c)];
                m[(col, c)] = m[(piv, c)];
                m[(piv, c)] = tmp;
            }
            b.swap(col, piv);
        }
        for r in col + 1..n {
            let f = m[(r, col)] / m[(col, col)];
            for c in col..n {
                let v = m[(col, c)];
                m[(r, c)] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = Array1::zeros(n);
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in col + 1..n {
            acc -= m[(col, c)] * x[c];
        }
        x[col] = acc / m[(col, col)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_recovers_diagonalizable_matrix() {
        // [[1, 1], [0, 2i]] has eigenvalues 1 and 2i
        let m = array![[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 2.0)]];
        let (vals, vecs) = eigen(&m).unwrap();
        for (j, z) in vals.iter().enumerate() {
            let v = vecs.column(j).to_owned();
            let r = m.dot(&v) - v.mapv(|x| x * *z);
            assert!(vec_norm(&r) < 1e-12, "residual for eigenvalue {z}");
        }
        let mut got: Vec<C64> = vals.clone();
        got.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((got[0] - c(0.0, 2.0)).norm() < 1e-12);
        assert!((got[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exp_antihermitian_matches_rotation() {
        // generator i*theta*sigma_x/2 rotates with period 4 pi
        let theta = 0.83;
        let g = array![
            [c(0.0, 0.0), c(0.0, theta / 2.0)],
            [c(0.0, theta / 2.0), c(0.0, 0.0)]
        ];
        let u = exp_antihermitian(&g).unwrap();
        let expect = array![
            [
                c((theta / 2.0).cos(), 0.0),
                c(0.0, (theta / 2.0).sin())
            ],
            [
                c(0.0, (theta / 2.0).sin()),
                c((theta / 2.0).cos(), 0.0)
            ]
        ];
        let dev = max_abs(&(&u - &expect));
        assert!(dev < 1e-14, "dev = {dev:.3e}");
        // unitarity
        let id = u.dot(&dagger(&u));
        assert!((max_abs(&id) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exp_antihermitian_rejects_hermitian_input() {
        let g = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]];
        assert!(exp_antihermitian(&g).is_err());
    }

    #[test]
    fn smallest_singular_vector_spans_null_space() {
        // rank deficient: second column = 2 * first
        let m = array![
            [c(1.0, 0.0), c(2.0, 0.0)],
            [c(0.0, 1.0), c(0.0, 2.0)]
        ];
        let (s, v) = singular_ascending(&m).unwrap();
        assert!(s[0] < 1e-14);
        assert!(s[1] > 1.0);
        let null = v.column(0).to_owned();
        let r = m.dot(&null);
        assert!(vec_norm(&r) < 1e-13);
    }

    #[test]
    fn kron_matches_hand_product() {
        let a = array![[c(1.0, 0.0), c(0.0, 1.0)], [c(2.0, 0.0), c(0.0, 0.0)]];
        let b = array![[c(3.0, 0.0)]];
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (2, 2));
        assert!((k[(0, 1)] - c(0.0, 3.0)).norm() < 1e-15);
        assert!((k[(1, 0)] - c(6.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_small_roundtrip() {
        let a = array![
            [c(2.0, 1.0), c(0.5, 0.0), c(0.0, 0.0)],
            [c(0.0, -1.0), c(3.0, 0.0), c(1.0, 1.0)],
            [c(1.0, 0.0), c(0.0, 0.5), c(-2.0, 0.0)]
        ];
        let x = array![c(1.0, -1.0), c(0.0, 2.0), c(3.0, 0.5)];
        let rhs = a.dot(&x);
        let got = solve_small(&a, &rhs).unwrap();
        let diff = &got - &x;
        assert!(vec_norm(&diff) < 1e-12);
    }
}
