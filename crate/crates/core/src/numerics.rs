//! Dense linear-algebra kernels and matrix-equation solvers.
//!
//! Everything downstream (Hankel bases, transition models, controllers) is a
//! small dense matrix, so these routines favour exactness over speed: the
//! discrete Lyapunov equation is solved through its Kronecker form, the
//! Riccati equation through structure-preserving doubling.
//!
//! The SVD comes from `faer`, real Schur and symmetric eigen from
//! `nalgebra`; this module fixes their conventions (descending singular values, relative
//! rank tolerance) and turns non-convergence into [`Error::Numerical`].

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative tolerance for rank decisions.
pub const DEFAULT_TOL: f64 = 1e-8;

const ITER_EPS: f64 = 1e-15;
const MAX_ITER: usize = 10_000;

/// Economy-size SVD `A = U diag(σ) Vᵀ` with `σ` sorted non-increasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left_vectors: Matrix,
    pub singular_values: Vec<f64>,
    pub right_vectors: Matrix,
}

impl SvdResult {
    pub fn rank(&self, tol_rel: f64) -> usize {
        numerical_rank(&self.singular_values, tol_rel)
    }
}

/// Eigenvalues of a square matrix together with their largest modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex<f64>>,
    pub spectral_radius: f64,
}

impl Spectrum {
    fn from_values(mut eigenvalues: Vec<Complex<f64>>) -> Self {
        eigenvalues.sort_by(|a, b| {
            b.norm()
                .total_cmp(&a.norm())
                .then(b.re.total_cmp(&a.re))
                .then(b.im.total_cmp(&a.im))
        });
        let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Spectrum {
            eigenvalues,
            spectral_radius,
        }
    }

    pub fn is_schur_stable(&self) -> bool {
        self.spectral_radius < 1.0
    }
}

pub(crate) fn ensure_finite(a: &Matrix, what: &str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} contains non-finite entries")))
    }
}

fn ensure_square(a: &Matrix, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

pub fn svd(a: &Matrix) -> Result<SvdResult> {
    ensure_finite(a, "svd input")?;
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(SvdResult {
            left_vectors: Matrix::zeros(m, 0),
            singular_values: Vec::new(),
            right_vectors: Matrix::zeros(n, 0),
        });
    }
    let src = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let dec = src
        .thin_svd()
        .map_err(|_| Error::numerical("SVD iteration did not converge", f64::NAN))?;
    let (u, v) = (dec.U(), dec.V());
    let s = dec.S().column_vector();
    let left = Matrix::from_fn(m, k, |i, j| u[(i, j)]);
    let right = Matrix::from_fn(n, k, |i, j| v[(i, j)]);
    let sigma: Vec<f64> = (0..k).map(|i| s[i].max(0.0)).collect();

    let recon = &left * Matrix::from_diagonal(&Vector::from_vec(sigma.clone())) * right.transpose();
    let residual = (a - recon).norm();
    if residual > 1e-10 * a.norm().max(1.0) {
        return Err(Error::numerical("SVD reconstruction check failed", residual));
    }
    Ok(SvdResult {
        left_vectors: left,
        singular_values: sigma,
        right_vectors: right,
    })
}

/// Number of singular values strictly above `tol_rel · σ₁`.
pub fn numerical_rank(sigma: &[f64], tol_rel: f64) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > 0.0 => sigma.iter().filter(|&&s| s > tol_rel * s1).count(),
        _ => 0,
    }
}

pub fn pinv(a: &Matrix, tol_rel: f64) -> Result<Matrix> {
    let dec = svd(a)?;
    let r = dec.rank(tol_rel);
    let mut out = Matrix::zeros(a.ncols(), a.nrows());
    for i in 0..r {
        let v = dec.right_vectors.column(i);
        let u = dec.left_vectors.column(i);
        out += (v * u.transpose()) / dec.singular_values[i];
    }
    Ok(out)
}

/// Orthogonal projector `I − A†A` onto the kernel of `A`.
pub fn null_projector(a: &Matrix, tol_rel: f64) -> Result<Matrix> {
    let n = a.ncols();
    let p = Matrix::identity(n, n) - pinv(a, tol_rel)? * a;
    Ok(symmetrize(&p))
}

/// Orthonormal basis of the numerical column space of `A`.
pub fn range_basis(a: &Matrix, tol_rel: f64) -> Result<Matrix> {
    let dec = svd(a)?;
    let r = dec.rank(tol_rel);
    Ok(dec.left_vectors.columns(0, r).into_owned())
}

/// Completes orthonormal columns `u` (n×k) to an orthonormal basis; returns
/// the n×(n−k) complement.
pub fn orthonormal_complement(u: &Matrix) -> Result<Matrix> {
    let (n, k) = u.shape();
    if k >= n {
        return Ok(Matrix::zeros(n, 0));
    }
    let p = Matrix::identity(n, n) - u * u.transpose();
    let dec = svd(&symmetrize(&p))?;
    Ok(dec.left_vectors.columns(0, n - k).into_owned())
}

pub fn eigenvalues(a: &Matrix) -> Result<Spectrum> {
    ensure_square(a, "eigenvalue input")?;
    ensure_finite(a, "eigenvalue input")?;
    if a.nrows() == 0 {
        return Ok(Spectrum::from_values(Vec::new()));
    }
    let schur = Schur::try_new(a.clone(), ITER_EPS, MAX_ITER)
        .ok_or_else(|| Error::numerical("Schur iteration did not converge", f64::NAN))?;
    Ok(Spectrum::from_values(schur.complex_eigenvalues().iter().copied().collect()))
}

pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.spectral_radius)
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    Ok(svd(a)?.singular_values.first().copied().unwrap_or(0.0))
}

pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

pub fn is_symmetric(a: &Matrix, tol_rel: f64) -> bool {
    a.is_square() && (a - a.transpose()).norm() <= tol_rel * a.norm().max(1.0)
}

fn sym_eigen(a: &Matrix) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(symmetrize(a), ITER_EPS, MAX_ITER)
        .ok_or_else(|| Error::numerical("symmetric eigensolver did not converge", f64::NAN))
}

/// Smallest eigenvalue of the symmetric part of `a` (`+∞` for an empty matrix).
pub fn min_sym_eigenvalue(a: &Matrix) -> Result<f64> {
    ensure_square(a, "symmetric eigenvalue input")?;
    if a.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(sym_eigen(a)?.eigenvalues.min())
}

/// Principal square root of a symmetric positive semidefinite matrix.
///
/// Eigenvalues below `-1e-10·max(1, ‖A‖₂)` are reported as
/// [`Error::NoSolution`]; smaller negative values are clamped to zero.
pub fn sym_sqrt(a: &Matrix) -> Result<Matrix> {
    ensure_square(a, "matrix square root input")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let eig = sym_eigen(a)?;
    let scale = eig.eigenvalues.amax().max(1.0);
    let lo = eig.eigenvalues.min();
    if lo < -1e-10 * scale {
        return Err(Error::no_solution(format!(
            "matrix is not positive semidefinite (eigenvalue {lo:e})"
        )));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    Ok(symmetrize(&(q * Matrix::from_diagonal(&roots) * q.transpose())))
}

pub(crate) fn inverse(a: &Matrix, what: &str) -> Result<Matrix> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical(format!("{what} is singular"), f64::NAN))
}

/// Solves `AᵀMA − M + Q = 0` for symmetric `M > 0` by a direct solve of the
/// Kronecker form `(Aᵀ⊗Aᵀ − I) vec(M) = −vec(Q)`.
pub fn solve_discrete_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    ensure_square(a, "A")?;
    ensure_square(q, "Q")?;
    ensure_finite(a, "A")?;
    ensure_finite(q, "Q")?;
    let n = a.nrows();
    if q.nrows() != n {
        return Err(Error::invalid(format!(
            "Q must be {n}x{n}, got {}x{}",
            q.nrows(),
            q.ncols()
        )));
    }
    if !is_symmetric(q, 1e-12) {
        return Err(Error::invalid("Q must be symmetric"));
    }
    if min_sym_eigenvalue(q)? <= 0.0 {
        return Err(Error::invalid("Q must be positive definite"));
    }
    let rho = spectral_radius(a)?;
    if rho >= 1.0 {
        return Err(Error::no_solution(format!(
            "A is not Schur stable (spectral radius {rho})"
        )));
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }

    let at = a.transpose();
    let lhs = at.kronecker(&at) - Matrix::identity(n * n, n * n);
    let rhs = -Vector::from_column_slice(q.as_slice());
    let vec_m = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("Lyapunov Kronecker system is singular", f64::NAN))?;
    let m = symmetrize(&Matrix::from_column_slice(n, n, vec_m.as_slice()));

    let residual = (&at * &m * a - &m + q).norm();
    if residual > 1e-8 * m.norm().max(1.0) {
        return Err(Error::numerical("Lyapunov residual check failed", residual));
    }
    Ok(m)
}

/// Stabilizing solution of the discrete algebraic Riccati equation and the
/// corresponding state-feedback gain.
#[derive(Debug, Clone)]
pub struct DareSolution {
    /// `P = AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q`
    pub p: Matrix,
    /// `K = −(R + BᵀPB)⁻¹BᵀPA`; closed loop is `A + BK`.
    pub k: Matrix,
}

pub fn riccati_residual(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix, p: &Matrix) -> Result<f64> {
    let at = a.transpose();
    let gram = r + b.transpose() * p * b;
    let gram_inv = inverse(&gram, "R + BᵀPB")?;
    let res = &at * p * a - p - &at * p * b * gram_inv * b.transpose() * p * a + q;
    Ok(res.norm())
}

/// Solves the DARE by structure-preserving doubling and returns `(P, K)`.
///
/// Stabilizability of `(A, B)` is checked up front with the controllability
/// staircase; the uncontrollable block must be Schur stable.
pub fn solve_dare_gain(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix) -> Result<DareSolution> {
    ensure_square(a, "A")?;
    let n = a.nrows();
    let m = b.ncols();
    if b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(Error::invalid(format!(
            "DARE dimension mismatch: A {n}x{n}, B {}x{}, Q {}x{}, R {}x{}",
            b.nrows(),
            b.ncols(),
            q.nrows(),
            q.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    for (mat, name) in [(a, "A"), (b, "B"), (q, "Q"), (r, "R")] {
        ensure_finite(mat, name)?;
    }
    if !is_symmetric(q, 1e-12) || min_sym_eigenvalue(q)? < -1e-12 * q.norm().max(1.0) {
        return Err(Error::invalid("Q must be symmetric positive semidefinite"));
    }
    if !is_symmetric(r, 1e-12) || min_sym_eigenvalue(r)? <= 0.0 {
        return Err(Error::invalid("R must be symmetric positive definite"));
    }

    let stair = controllability_staircase(a, b, DEFAULT_TOL)?;
    let uncontrollable = stair.uncontrollable_block(a);
    let rho_unc = spectral_radius(&uncontrollable)?;
    if rho_unc >= 1.0 {
        return Err(Error::no_solution(format!(
            "(A, B) is not stabilizable: uncontrollable spectral radius {rho_unc}"
        )));
    }

    let ident = Matrix::identity(n, n);
    let mut ak = a.clone();
    let mut gk = b * inverse(r, "R")? * b.transpose();
    let mut hk = q.clone();
    let mut converged = false;
    let mut last_change = f64::INFINITY;
    for _ in 0..200 {
        let w = &ident + &gk * &hk;
        let lu = w.lu();
        let w_inv_a = lu
            .solve(&ak)
            .ok_or_else(|| Error::numerical("doubling step matrix is singular", f64::NAN))?;
        let w_inv_g = lu
            .solve(&gk)
            .ok_or_else(|| Error::numerical("doubling step matrix is singular", f64::NAN))?;
        let a_next = &ak * &w_inv_a;
        let g_next = symmetrize(&(&gk + &ak * w_inv_g * ak.transpose()));
        let h_next = symmetrize(&(&hk + ak.transpose() * &hk * &w_inv_a));
        last_change = (&h_next - &hk).norm();
        let scale = h_next.norm().max(1.0);
        ak = a_next;
        gk = g_next;
        hk = h_next;
        if !hk.iter().all(|x| x.is_finite()) {
            return Err(Error::numerical("doubling iteration diverged", last_change));
        }
        if last_change <= 1e-12 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical("doubling iteration stalled", last_change));
    }

    let p = hk;
    let gram = r + b.transpose() * &p * b;
    let k = -inverse(&gram, "R + BᵀPB")? * b.transpose() * &p * a;
    let residual = riccati_residual(a, b, q, r, &p)?;
    if residual > 1e-8 * p.norm().max(1.0) {
        return Err(Error::numerical("Riccati residual check failed", residual));
    }
    let rho = spectral_radius(&(a + b * &k))?;
    if rho >= 1.0 {
        return Err(Error::numerical(
            "Riccati solution is not stabilizing",
            rho,
        ));
    }
    Ok(DareSolution { p, k })
}

/// Orthogonal controllability staircase of a pair `(A, B)`.
///
/// `Sᵀ A S` is block upper triangular with the controllable part in the
/// leading `controllable_dim` coordinates, and `Sᵀ B` vanishes below them.
#[derive(Debug, Clone)]
pub struct StaircaseKernel {
    pub s: Matrix,
    pub controllable_dim: usize,
    /// Rank of each staircase step.
    pub block_sizes: Vec<usize>,
}

impl StaircaseKernel {
    /// `A₂₂` block of `Sᵀ A S`.
    pub fn uncontrollable_block(&self, a: &Matrix) -> Matrix {
        let n = a.nrows();
        let c = self.controllable_dim;
        let t = self.s.transpose() * a * &self.s;
        t.view((c, c), (n - c, n - c)).into_owned()
    }
}

/// Staircase reduction by repeated SVD range deflation. Rank decisions use
/// the absolute threshold `tol_rel · max(‖A‖₂, ‖B‖₂)`.
pub fn controllability_staircase(a: &Matrix, b: &Matrix, tol_rel: f64) -> Result<StaircaseKernel> {
    ensure_square(a, "A")?;
    let n = a.nrows();
    if b.nrows() != n {
        return Err(Error::invalid(format!(
            "B must have {n} rows, got {}",
            b.nrows()
        )));
    }
    let scale = spectral_norm(a)?.max(spectral_norm(b)?);
    let thresh = tol_rel * scale;

    let mut s = Matrix::identity(n, n);
    let mut at = a.clone();
    let mut bt = b.clone();
    let mut done = 0;
    let mut prev: Option<(usize, usize)> = None;
    let mut blocks = Vec::new();
    while done < n && scale > 0.0 {
        let sub = match prev {
            None => bt.rows(done, n - done).into_owned(),
            Some((c0, c1)) => at.view((done, c0), (n - done, c1 - c0)).into_owned(),
        };
        let dec = svd(&sub)?;
        let rho = dec.singular_values.iter().filter(|&&x| x > thresh).count();
        if rho == 0 {
            break;
        }
        let range = dec.left_vectors.columns(0, rho).into_owned();
        let comp = orthonormal_complement(&range)?;
        let mut t = Matrix::identity(n, n);
        t.view_mut((done, done), (n - done, rho)).copy_from(&range);
        t.view_mut((done, done + rho), (n - done, n - done - rho))
            .copy_from(&comp);
        at = t.transpose() * &at * &t;
        bt = t.transpose() * &bt;
        s = &s * &t;
        prev = Some((done, done + rho));
        blocks.push(rho);
        done += rho;
    }
    Ok(StaircaseKernel {
        s,
        controllable_dim: done,
        block_sizes: blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn svd_identity_and_zero() {
        let d = svd(&Matrix::identity(2, 2)).unwrap();
        assert_eq!(d.singular_values, vec![1.0, 1.0]);
        let z = svd(&Matrix::zeros(2, 2)).unwrap();
        assert_eq!(z.singular_values, vec![0.0, 0.0]);
        assert_eq!(numerical_rank(&z.singular_values, DEFAULT_TOL), 0);
    }

    #[test]
    fn svd_rank_one_outer_product() {
        // (1, 0.5)ᵀ (1, 0.5, 0.25): σ₁ = ‖A‖_F = sqrt(1.640625)
        let a = dmatrix![1.0, 0.5, 0.25; 0.5, 0.25, 0.125];
        let d = svd(&a).unwrap();
        assert_relative_eq!(d.singular_values[0], 1.640625f64.sqrt(), epsilon = 1e-12);
        assert!(d.singular_values[1] < 1e-14);
        let u1 = d.left_vectors.column(0);
        let sign = u1[0].signum();
        assert_relative_eq!(sign * u1[0], 2.0 / 5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(sign * u1[1], 1.0 / 5f64.sqrt(), epsilon = 1e-12);
        assert_eq!(d.rank(DEFAULT_TOL), 1);
    }

    #[test]
    fn rank_thresholds() {
        assert_eq!(numerical_rank(&[1.0, 1.0], 1e-8), 2);
        assert_eq!(numerical_rank(&[1.0, 1e-12], 1e-8), 1);
        assert_eq!(numerical_rank(&[], 1e-8), 0);
    }

    #[test]
    fn pinv_examples() {
        let i3 = Matrix::identity(3, 3);
        assert_relative_eq!(pinv(&i3, DEFAULT_TOL).unwrap(), i3, epsilon = 1e-14);
        let col = dmatrix![1.0; 0.5];
        assert_relative_eq!(
            pinv(&col, DEFAULT_TOL).unwrap(),
            dmatrix![0.8, 0.4],
            epsilon = 1e-14
        );
        let z = Matrix::zeros(2, 3);
        assert_eq!(pinv(&z, DEFAULT_TOL).unwrap(), Matrix::zeros(3, 2));
    }

    #[test]
    fn null_projector_examples() {
        let p = null_projector(&Matrix::identity(2, 2), DEFAULT_TOL).unwrap();
        assert_relative_eq!(p, Matrix::zeros(2, 2), epsilon = 1e-14);
        let p = null_projector(&dmatrix![1.0, 0.0], DEFAULT_TOL).unwrap();
        assert_relative_eq!(p, dmatrix![0.0, 0.0; 0.0, 1.0], epsilon = 1e-14);
        let h = 0.5f64.sqrt();
        let p = null_projector(&dmatrix![h, h], DEFAULT_TOL).unwrap();
        assert_relative_eq!(p, dmatrix![0.5, -0.5; -0.5, 0.5], epsilon = 1e-14);
    }

    #[test]
    fn range_basis_examples() {
        let b = range_basis(&dmatrix![0.0, 0.0; 0.0, 1.0], DEFAULT_TOL).unwrap();
        assert_eq!(b.ncols(), 1);
        assert_relative_eq!(b[(0, 0)].abs(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(b[(1, 0)].abs(), 1.0, epsilon = 1e-14);
        assert_eq!(range_basis(&Matrix::zeros(2, 2), DEFAULT_TOL).unwrap().ncols(), 0);
        let b = range_basis(&dmatrix![0.5, -0.5; -0.5, 0.5], DEFAULT_TOL).unwrap();
        assert_eq!(b.ncols(), 1);
        let s = b[(0, 0)].signum();
        assert_relative_eq!(s * b[(0, 0)], 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s * b[(1, 0)], -(0.5f64.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn eigenvalue_examples() {
        let sp = eigenvalues(&dmatrix![0.5, 0.0; 0.0, 2.0]).unwrap();
        assert_relative_eq!(sp.spectral_radius, 2.0, epsilon = 1e-12);
        assert_relative_eq!(sp.eigenvalues[1].re, 0.5, epsilon = 1e-12);

        let sp = eigenvalues(&dmatrix![0.0, -1.0; 1.0, 0.0]).unwrap();
        assert_relative_eq!(sp.spectral_radius, 1.0, epsilon = 1e-12);
        for z in &sp.eigenvalues {
            assert_relative_eq!(z.re, 0.0, epsilon = 1e-12);
            assert_relative_eq!(z.im.abs(), 1.0, epsilon = 1e-12);
        }

        // companion of z² − 1.341z + 0.449, roots by the quadratic formula
        let disc = (1.341f64 * 1.341 - 4.0 * 0.449).sqrt();
        let (r1, r2) = ((1.341 + disc) / 2.0, (1.341 - disc) / 2.0);
        let sp = eigenvalues(&dmatrix![1.341, -0.449; 1.0, 0.0]).unwrap();
        assert_relative_eq!(sp.eigenvalues[0].re, r1, epsilon = 1e-10);
        assert_relative_eq!(sp.eigenvalues[1].re, r2, epsilon = 1e-10);
        assert_relative_eq!(r1, 0.695, epsilon = 1e-3);
        assert_relative_eq!(r2, 0.646, epsilon = 1e-3);
    }

    #[test]
    fn lyapunov_scalar_closed_forms() {
        let one = dmatrix![1.0];
        for a in [0.0, 0.5, 0.382] {
            let m = solve_discrete_lyapunov(&dmatrix![a], &one).unwrap();
            assert_relative_eq!(m[(0, 0)], 1.0 / (1.0 - a * a), epsilon = 1e-12);
        }
        assert_relative_eq!(
            solve_discrete_lyapunov(&dmatrix![0.382], &one).unwrap()[(0, 0)],
            1.17087,
            epsilon = 5e-5
        );
    }

    #[test]
    fn lyapunov_errors() {
        let one = dmatrix![1.0];
        assert!(matches!(
            solve_discrete_lyapunov(&dmatrix![1.5], &one),
            Err(Error::NoSolution(_))
        ));
        let a = dmatrix![0.1, 0.0; 0.0, 0.2];
        let q = dmatrix![1.0, 0.5; 0.0, 1.0];
        assert!(matches!(
            solve_discrete_lyapunov(&a, &q),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn dare_scalar_unstable() {
        let one = dmatrix![1.0];
        let sol = solve_dare_gain(&dmatrix![2.0], &one, &one, &one).unwrap();
        let p = 2.0 + 5f64.sqrt();
        assert_relative_eq!(sol.p[(0, 0)], p, epsilon = 1e-10);
        assert_relative_eq!(sol.k[(0, 0)], -2.0 * p / (1.0 + p), epsilon = 1e-10);
        assert_relative_eq!(
            2.0 + sol.k[(0, 0)],
            2.0 / (3.0 + 5f64.sqrt()),
            epsilon = 1e-10
        );
    }

    #[test]
    fn dare_stable_plant_stays_stable() {
        let one = dmatrix![1.0];
        let sol = solve_dare_gain(&dmatrix![0.5], &one, &one, &one).unwrap();
        assert!((0.5 + sol.k[(0, 0)]).abs() < 1.0);
    }

    #[test]
    fn dare_without_input_is_lyapunov() {
        let a = dmatrix![0.3, 0.2; -0.1, 0.6];
        let q = Matrix::identity(2, 2);
        let sol = solve_dare_gain(&a, &Matrix::zeros(2, 0), &q, &Matrix::zeros(0, 0)).unwrap();
        let lyap = solve_discrete_lyapunov(&a, &q).unwrap();
        assert_relative_eq!(sol.p, lyap, epsilon = 1e-10);
        assert_eq!(sol.k.shape(), (0, 2));
    }

    #[test]
    fn dare_rejects_unstabilizable() {
        let a = dmatrix![0.5, 0.0; 0.0, 2.0];
        let b = dmatrix![1.0; 0.0];
        let err = solve_dare_gain(&a, &b, &Matrix::identity(2, 2), &dmatrix![1.0]).unwrap_err();
        assert!(matches!(err, Error::NoSolution(_)));
    }

    #[test]
    fn staircase_splits_planted_mode() {
        let a = dmatrix![2.0, 0.0; 0.0, 0.5];
        let b = dmatrix![1.0; 0.0];
        let st = controllability_staircase(&a, &b, DEFAULT_TOL).unwrap();
        assert_eq!(st.controllable_dim, 1);
        assert_relative_eq!(st.uncontrollable_block(&a)[(0, 0)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sym_sqrt_squares_back() {
        let a = dmatrix![4.0, 1.0; 1.0, 3.0];
        let s = sym_sqrt(&a).unwrap();
        assert_relative_eq!(&s * &s, a, epsilon = 1e-12);
        assert!(matches!(
            sym_sqrt(&dmatrix![-1.0]),
            Err(Error::NoSolution(_))
        ));
    }
}
