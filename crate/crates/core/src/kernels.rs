//! Dense symmetric kernels: eigendecomposition, SPD solves and inverses,
//! plus undirected connectivity.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Maximum number of cyclic Jacobi sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Relative positive-definiteness threshold: `lambda_min` must exceed this
/// times `max(lambda_max, 1)`.
pub const PD_RELATIVE_TOL: f64 = 1e-12;

pub fn pd_threshold(lambda_max: f64) -> f64 {
    PD_RELATIVE_TOL * lambda_max.max(1.0)
}

/// Symmetric matrix, symmetrized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts `m` if it is square, finite and symmetric to within
    /// `1e-10 * max(1, max|m|)`, storing `(m + m^T) / 2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { what: "symmetric matrix columns", expected: m.nrows(), got: m.ncols() });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::InvalidArgument(format!("matrix is not symmetric (max asymmetry {asym:e})")));
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let sym = (&m + m.transpose()) * 0.5;
        Self(sym)
    }

    pub fn from_row_slice(order: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::DimensionMismatch { what: "matrix entries", expected: order * order, got: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(order, order, entries))
    }

    pub fn identity(order: usize) -> Self {
        Self(DMatrix::identity(order, order))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn principal_submatrix(&self, indices: &[usize]) -> SymMatrix {
        let k = indices.len();
        Self(DMatrix::from_fn(k, k, |a, b| self.0[(indices[a], indices[b])]))
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        v.dot(&(&self.0 * &v))
    }
}

/// Eigenvalues ascending, eigenvectors as matching orthonormal columns.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenPairs {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Unit eigenvector of the largest eigenvalue.
    pub fn dominant_vector(&self) -> Vec<f64> {
        self.eigenvectors.column(self.eigenvalues.len() - 1).iter().copied().collect()
    }
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// A rotation is skipped when `|a_pq| <= eps * sqrt(|a_pp a_qq|)`, which
/// keeps small eigenvalues of positive definite input relatively accurate.
/// Eigenvectors are sign-canonicalized so their largest-magnitude entry is
/// nonnegative (first such entry on ties).
pub fn sym_eig(m: &SymMatrix) -> Result<EigenPairs> {
    let n = m.order();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix has no spectrum".into()));
    }
    let mut a = m.0.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                if apq == 0.0 || apq.abs() <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { what: "Jacobi eigensolver", iterations: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut vec = v.column(src).clone_owned();
        let lead = vec.iter().copied().fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if lead < 0.0 {
            vec.neg_mut();
        }
        eigenvectors.set_column(col, &vec);
    }
    Ok(EigenPairs { eigenvalues, eigenvectors })
}

fn require_pd(eig: &EigenPairs) -> Result<()> {
    let (lmin, lmax) = (eig.lambda_min(), eig.lambda_max());
    if lmin > pd_threshold(lmax) {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite { lambda_min: lmin, lambda_max: lmax })
    }
}

/// Solves `M x = b` for positive definite `M` by Cholesky factorization.
pub fn solve_spd(m: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != m.order() {
        return Err(Error::DimensionMismatch { what: "right-hand side", expected: m.order(), got: b.len() });
    }
    let eig = sym_eig(m)?;
    require_pd(&eig)?;
    let chol = m.0.clone().cholesky().ok_or(Error::NotPositiveDefinite {
        lambda_min: eig.lambda_min(),
        lambda_max: eig.lambda_max(),
    })?;
    Ok(chol.solve(&DVector::from_column_slice(b)).iter().copied().collect())
}

/// Inverse of a positive definite matrix, assembled from its eigenpairs as
/// `V diag(1/lambda) V^T`.
pub fn explicit_inverse(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eig(m)?;
    require_pd(&eig)?;
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] / eig.eigenvalues[j]);
    Ok(SymMatrix::symmetrized(scaled * v.transpose()))
}

/// True when the undirected graph on `order` vertices is connected.
pub fn connected_undirected(order: usize, edges: &[(usize, usize)]) -> bool {
    if order <= 1 {
        return true;
    }
    let mut adj = vec![Vec::new(); order];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; order];
    seen[0] = true;
    let mut count = 1;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == order
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn w2() -> SymMatrix {
        SymMatrix::from_row_slice(2, &[1.25, 0.25, 0.25, 0.25]).unwrap()
    }

    #[test]
    fn eig_two_by_two_closed_form() {
        // trace 1.5, det 0.25
        let disc = (1.5f64 * 1.5 - 4.0 * 0.25).sqrt();
        let (lo, hi) = ((1.5 - disc) / 2.0, (1.5 + disc) / 2.0);
        let e = sym_eig(&w2()).unwrap();
        assert_relative_eq!(e.eigenvalues[0], lo, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvalues[1], hi, epsilon = 1e-14);
        assert!((e.eigenvalues[0] - 0.190983).abs() < 1e-6);
        assert!((e.eigenvalues[1] - 1.309017).abs() < 1e-6);
        let v = e.dominant_vector();
        assert!(v[0] > 0.0 && v[1] > 0.0);
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = sym_eig(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let d = SymMatrix::from_row_slice(2, &[5.0, 0.0, 0.0, 2.0]).unwrap();
        let e = sym_eig(&d).unwrap();
        assert_eq!(e.eigenvalues, vec![2.0, 5.0]);
        assert_eq!(e.eigenvectors.column(0).as_slice(), &[0.0, 1.0]);
        assert_eq!(e.eigenvectors.column(1).as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn rejects_asymmetric_input() {
        assert!(SymMatrix::from_row_slice(2, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn solve_examples() {
        let x = solve_spd(&w2(), &[1.0, 1.0]).unwrap();
        assert_relative_eq!(x[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 4.0, epsilon = 1e-12);
        let b = [0.3, -2.0, 7.5];
        assert_eq!(solve_spd(&SymMatrix::identity(3), &b).unwrap(), b.to_vec());
        let singular = SymMatrix::from_row_slice(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(solve_spd(&singular, &[1.0, 1.0]), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn inverse_examples() {
        // adjugate / det with det = 0.25
        let r = explicit_inverse(&w2()).unwrap();
        let expected = [1.0, -1.0, -1.0, 5.0];
        for (k, e) in expected.iter().enumerate() {
            assert_relative_eq!(r.get(k / 2, k % 2), *e, epsilon = 1e-12);
        }
        let i = explicit_inverse(&SymMatrix::identity(3)).unwrap();
        assert_relative_eq!(i.matrix(), &DMatrix::identity(3, 3), epsilon = 1e-15);
        let d = SymMatrix::from_row_slice(2, &[2.0, 0.0, 0.0, 4.0]).unwrap();
        let r = explicit_inverse(&d).unwrap();
        assert_relative_eq!(r.get(0, 0), 0.5);
        assert_relative_eq!(r.get(1, 1), 0.25);
        assert_eq!(r.get(0, 1), 0.0);
    }

    #[test]
    fn connectivity_examples() {
        assert!(connected_undirected(2, &[(0, 1)]));
        assert!(!connected_undirected(3, &[(0, 1)]));
        assert!(connected_undirected(1, &[]));
        assert!(!connected_undirected(2, &[]));
    }

    fn sym_strategy() -> impl Strategy<Value = SymMatrix> {
        (1usize..=20).prop_flat_map(|n| {
            prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |xs| {
                let m = DMatrix::from_row_slice(n, n, &xs);
                SymMatrix::symmetrized(&m + m.transpose())
            })
        })
    }

    fn spd_strategy() -> impl Strategy<Value = SymMatrix> {
        (1usize..=20).prop_flat_map(|n| {
            prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |xs| {
                let g = DMatrix::from_row_slice(n, n, &xs);
                SymMatrix::symmetrized(&g * g.transpose() + DMatrix::identity(n, n) * 0.5)
            })
        })
    }

    proptest! {
        #[test]
        fn eig_reconstructs_and_is_orthonormal(m in sym_strategy()) {
            let e = sym_eig(&m).unwrap();
            let n = m.order();
            let scale = e.eigenvalues.iter().fold(1.0f64, |a, l| a.max(l.abs()));
            let v = &e.eigenvectors;
            let recon = v * DMatrix::from_diagonal(&DVector::from_vec(e.eigenvalues.clone())) * v.transpose();
            prop_assert!((recon - m.matrix()).amax() <= 1e-8 * scale);
            prop_assert!((v.transpose() * v - DMatrix::identity(n, n)).amax() <= 1e-9);
            for i in 0..n {
                let col = v.column(i);
                let r = m.matrix() * col - col * e.eigenvalues[i];
                prop_assert!(r.norm() <= 1e-9 * scale);
                let lead = col.iter().fold(0.0f64, |b, x| if x.abs() > b.abs() { *x } else { b });
                prop_assert!(lead >= 0.0);
            }
            prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn solve_agrees_with_inverse(m in spd_strategy(), seed in 0u64..1000) {
            let n = m.order();
            let b: Vec<f64> = (0..n).map(|i| ((seed as f64 + 1.0) * (i as f64 + 0.7)).sin()).collect();
            let x = solve_spd(&m, &b).unwrap();
            let r = explicit_inverse(&m).unwrap();
            let xi = r.matrix() * DVector::from_column_slice(&b);
            let x = DVector::from_vec(x);
            prop_assert!((&x - &xi).norm() <= 1e-8 * x.norm().max(1e-300));
            let bv = DVector::from_column_slice(&b);
            prop_assert!((m.matrix() * &x - &bv).norm() <= 1e-9 * bv.norm());
            prop_assert!((m.matrix() * r.matrix() - DMatrix::identity(n, n)).amax() <= 1e-8);
        }
    }
}
