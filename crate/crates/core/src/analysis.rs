//! Transition model of the parameterizer and the stability / stabilizability
//! tests built on it.
//!
//! Shifting a window by one step keeps its last `L` samples. With
//! `F_p` the first `L·w` rows of `F` and `Π_p` the selector of the last `L`
//! samples, every successor state satisfies `F_p 𝔤ₖ = Π_p F 𝔤ₖ₋₁`, hence
//!
//! ```text
//! 𝔤ₖ = A 𝔤ₖ₋₁ + F_z zₖ,   A = F_p† Π_p F,   span F_z = ker F_p
//! ```
//!
//! where `zₖ` is the free (virtual input) part of the new window.

use nalgebra::Complex;
use serde::Serialize;

use crate::behavior::{BehaviorBasis, ExcitationReport};
use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, Spectrum};

#[derive(Debug, Clone)]
pub struct TransitionModel {
    pub a: Matrix,
    pub fz: Matrix,
    /// `[0_{Lw×w}  I_{Lw}]`
    pub pi_p: Matrix,
    /// Selects `u_k` (last sample) from a window.
    pub pi_u: Matrix,
    pub fp: Matrix,
    pub basis: BehaviorBasis,
}

pub fn build_transition(basis: &BehaviorBasis, tol_rel: f64) -> Result<TransitionModel> {
    let r = basis.rank();
    if r == 0 {
        return Err(Error::invalid("behavior basis has rank zero"));
    }
    let w = basis.w_dim();
    let lw = basis.lag * w;
    let total = lw + w;

    let mut pi_p = Matrix::zeros(lw, total);
    pi_p.view_mut((0, w), (lw, lw)).fill_with_identity();
    let mut pi_u = Matrix::zeros(basis.inputs, total);
    pi_u.view_mut((0, lw), (basis.inputs, basis.inputs))
        .fill_with_identity();

    let fp = basis.f.rows(0, lw).into_owned();
    let shifted = &pi_p * &basis.f;
    let a = numerics::pinv(&fp, tol_rel)? * shifted;
    let dec = numerics::svd(&fp)?;
    let row_space = dec.right_vectors.columns(0, dec.rank(tol_rel)).into_owned();
    let fz = numerics::orthonormal_complement(&row_space)?;
    Ok(TransitionModel {
        a,
        fz,
        pi_p,
        pi_u,
        fp,
        basis: basis.clone(),
    })
}

impl TransitionModel {
    pub fn rank(&self) -> usize {
        self.a.nrows()
    }

    /// Dimension of the virtual input `z`.
    pub fn free_dim(&self) -> usize {
        self.fz.ncols()
    }

    pub fn is_autonomous(&self) -> bool {
        self.free_dim() == 0
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        numerics::eigenvalues(&self.a)
    }

    /// Selector of the newest output sample `y_k` in a window.
    pub fn pi_y(&self) -> Matrix {
        let b = &self.basis;
        let lw = b.lag * b.w_dim();
        let mut sel = Matrix::zeros(b.outputs, lw + b.w_dim());
        sel.view_mut((0, lw + b.inputs), (b.outputs, b.outputs))
            .fill_with_identity();
        sel
    }
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub spectrum: Spectrum,
    pub stable: bool,
    /// `M` with `AᵀMA − M = −I`, present iff stable.
    pub certificate: Option<Matrix>,
    /// Smallest eigenvalue of `[[M, (MA)ᵀ], [MA, M]]` for the certificate.
    pub lmi_min_eigenvalue: Option<f64>,
}

/// Smallest eigenvalue of `[[M, (MA)ᵀ], [MA, M]]`.
pub fn stability_lmi_min_eigenvalue(a: &Matrix, m: &Matrix) -> Result<f64> {
    let n = a.nrows();
    let ma = m * a;
    let mut block = Matrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(m);
    block.view_mut((n, n), (n, n)).copy_from(m);
    block.view_mut((n, 0), (n, n)).copy_from(&ma);
    block.view_mut((0, n), (n, n)).copy_from(&ma.transpose());
    numerics::min_sym_eigenvalue(&block)
}

/// Asymptotic stability of an autonomous behavior with a quadratic
/// Lyapunov certificate `V = ‖𝔤‖²_M`.
pub fn autonomous_stability(tm: &TransitionModel) -> Result<StabilityReport> {
    if !tm.is_autonomous() {
        return Err(Error::invalid(format!(
            "system not autonomous: {} free directions per step",
            tm.free_dim()
        )));
    }
    stability_of(&tm.a)
}

/// Stability verdict and certificate for `𝔤ₖ = A𝔤ₖ₋₁`.
pub fn stability_of(a: &Matrix) -> Result<StabilityReport> {
    let spectrum = numerics::eigenvalues(a)?;
    let stable = spectrum.is_schur_stable();
    let (certificate, lmi_min_eigenvalue) = if stable {
        let m = numerics::solve_discrete_lyapunov(a, &Matrix::identity(a.nrows(), a.nrows()))?;
        let lmi = stability_lmi_min_eigenvalue(a, &m)?;
        (Some(m), Some(lmi))
    } else {
        (None, None)
    };
    Ok(StabilityReport {
        spectrum,
        stable,
        certificate,
        lmi_min_eigenvalue,
    })
}

/// `Sᵀ A S = [[A11, A12], [0, A22]]`, `Sᵀ B = [B_top; 0]` with `S` orthogonal.
#[derive(Debug, Clone)]
pub struct StaircaseDecomposition {
    pub s: Matrix,
    pub a11: Matrix,
    pub a12: Matrix,
    pub a21: Matrix,
    pub a22: Matrix,
    pub b_top: Matrix,
    pub b_bottom: Matrix,
    pub controllable_dim: usize,
}

pub fn staircase_decomposition(a: &Matrix, b: &Matrix, tol_rel: f64) -> Result<StaircaseDecomposition> {
    let kernel = numerics::controllability_staircase(a, b, tol_rel)?;
    let n = a.nrows();
    let c = kernel.controllable_dim;
    let at = kernel.s.transpose() * a * &kernel.s;
    let bt = kernel.s.transpose() * b;
    Ok(StaircaseDecomposition {
        a11: at.view((0, 0), (c, c)).into_owned(),
        a12: at.view((0, c), (c, n - c)).into_owned(),
        a21: at.view((c, 0), (n - c, c)).into_owned(),
        a22: at.view((c, c), (n - c, n - c)).into_owned(),
        b_top: bt.rows(0, c).into_owned(),
        b_bottom: bt.rows(c, n - c).into_owned(),
        s: kernel.s,
        controllable_dim: c,
    })
}

impl StaircaseDecomposition {
    /// Rank of the controllability matrix of `(A11, B_top)`.
    pub fn controllable_rank(&self, tol_rel: f64) -> Result<usize> {
        let c = self.controllable_dim;
        if c == 0 {
            return Ok(0);
        }
        let m = self.b_top.ncols();
        let mut ctrb = Matrix::zeros(c, c * m);
        let mut blk = self.b_top.clone();
        for i in 0..c {
            ctrb.view_mut((0, i * m), (c, m)).copy_from(&blk);
            blk = &self.a11 * blk;
        }
        Ok(numerics::svd(&ctrb)?.rank(tol_rel))
    }
}

#[derive(Debug, Clone)]
pub struct StabilizabilityReport {
    pub stabilizable: bool,
    pub uncontrollable_eigs: Vec<Complex<f64>>,
    pub controllable_dim: usize,
}

/// Stabilizable iff the uncontrollable block `A22` is empty or Schur stable.
pub fn stabilizability(a: &Matrix, b: &Matrix, tol_rel: f64) -> Result<StabilizabilityReport> {
    let st = staircase_decomposition(a, b, tol_rel)?;
    let sp = numerics::eigenvalues(&st.a22)?;
    Ok(StabilizabilityReport {
        stabilizable: sp.eigenvalues.is_empty() || sp.is_schur_stable(),
        uncontrollable_eigs: sp.eigenvalues,
        controllable_dim: st.controllable_dim,
    })
}

impl TransitionModel {
    pub fn staircase(&self, tol_rel: f64) -> Result<StaircaseDecomposition> {
        staircase_decomposition(&self.a, &self.fz, tol_rel)
    }

    pub fn stabilizable(&self, tol_rel: f64) -> Result<StabilizabilityReport> {
        stabilizability(&self.a, &self.fz, tol_rel)
    }
}

/// Complex number as `[re, im]` for JSON output.
pub fn complex_pairs(zs: &[Complex<f64>]) -> Vec<[f64; 2]> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

/// Serializable summary of an analysis run.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub rank: usize,
    pub inferred_n: i64,
    pub excitation_satisfied: bool,
    pub lag: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub eigenvalues: Vec<[f64; 2]>,
    pub spectral_radius: f64,
    pub autonomous: bool,
    pub stable: Option<bool>,
    pub certificate_m: Option<Vec<Vec<f64>>>,
    pub stabilizable: bool,
    pub uncontrollable_eigenvalues: Vec<[f64; 2]>,
}

pub fn analysis_report(excitation: &ExcitationReport, tm: &TransitionModel, tol_rel: f64) -> Result<AnalysisReport> {
    let spectrum = tm.spectrum()?;
    let (stable, certificate_m) = if tm.is_autonomous() {
        let rep = autonomous_stability(tm)?;
        (Some(rep.stable), rep.certificate.as_ref().map(crate::io::matrix_rows))
    } else {
        (None, None)
    };
    let stab = tm.stabilizable(tol_rel)?;
    Ok(AnalysisReport {
        rank: excitation.rank,
        inferred_n: excitation.inferred_n,
        excitation_satisfied: excitation.satisfied,
        lag: tm.basis.lag,
        inputs: tm.basis.inputs,
        outputs: tm.basis.outputs,
        eigenvalues: complex_pairs(&spectrum.eigenvalues),
        spectral_radius: spectrum.spectral_radius,
        autonomous: tm.is_autonomous(),
        stable,
        certificate_m,
        stabilizable: stab.stabilizable,
        uncontrollable_eigenvalues: complex_pairs(&stab.uncontrollable_eigs),
    })
}
