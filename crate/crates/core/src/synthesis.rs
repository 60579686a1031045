//! Stabilizing controllers from a memoryless quadratic Lyapunov function of
//! the parameterizer.
//!
//! The certificate is built constructively rather than by an LMI solver:
//! a Riccati gain `K` for `(A, F_z)` stabilizes `A_cl = A + F_z K`, the
//! Lyapunov equation `A_clᵀ M A_cl − M = −I` yields `M`, and `W = M⁻¹`,
//! `Y = K W` then satisfy
//!
//! ```text
//! [ W            (AW + F_z Y)ᵀ ]
//! [ AW + F_z Y   W             ]  > 0.
//! ```
//!
//! The decrease `‖𝔤‖²_M − ‖A𝔤 + F_z z‖²_M` expands to the quadratic form
//! `𝔤ᵀQ𝔤 + 2𝔤ᵀSz − zᵀRz` with
//!
//! ```text
//! Q = M − AᵀMA,   S = −AᵀM F_z,   R = F_zᵀ M F_z,
//! ```
//!
//! so every gain making it non-negative has the form
//! `K = R^{-1/2} U (Q + S R⁻¹ Sᵀ)^{1/2} + R⁻¹Sᵀ` with `‖U‖₂ ≤ 1`
//! ([`gain_family`]); `‖U‖₂ < 1` gives strict decrease.

use serde::{Deserialize, Serialize};

use crate::analysis::TransitionModel;
use crate::behavior::{Parameterizer, WindowSegment};
use crate::error::{Error, Result};
use crate::io::{matrix_from_rows, matrix_rows};
use crate::numerics::{self, Matrix, Vector, DEFAULT_TOL};

/// Anything that produces the next input from the previous window.
pub trait TrajectoryFeedback {
    fn lag(&self) -> usize;
    fn inputs(&self) -> usize;
    fn outputs(&self) -> usize;
    fn control(&self, window: &WindowSegment) -> Result<Vector>;
}

/// Riccati weights used to pick one certificate among all feasible ones.
#[derive(Debug, Clone)]
pub struct LqrWeights {
    pub q: Matrix,
    pub r: Matrix,
}

impl LqrWeights {
    /// `Q = I` on the parameterizer, `R = I` on the virtual input.
    pub fn identity(tm: &TransitionModel) -> Self {
        LqrWeights {
            q: Matrix::identity(tm.rank(), tm.rank()),
            r: Matrix::identity(tm.free_dim(), tm.free_dim()),
        }
    }

    /// Penalizes the newest output sample of each window,
    /// `Q = q_y · FᵀΠ_yᵀΠ_y F`, and the virtual input with `R = r_z · I`.
    pub fn output_weighted(tm: &TransitionModel, output_weight: f64, input_weight: f64) -> Self {
        let sel = tm.pi_y() * &tm.basis.f;
        LqrWeights {
            q: numerics::symmetrize(&(sel.transpose() * sel * output_weight)),
            r: Matrix::identity(tm.free_dim(), tm.free_dim()) * input_weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weighting {
    Identity,
    Output { output_weight: f64, input_weight: f64 },
}

impl Weighting {
    pub fn resolve(&self, tm: &TransitionModel) -> Result<LqrWeights> {
        match *self {
            Weighting::Identity => Ok(LqrWeights::identity(tm)),
            Weighting::Output { output_weight, input_weight } => {
                if !(output_weight > 0.0 && input_weight > 0.0) {
                    return Err(Error::invalid("output and input weights must be positive"));
                }
                Ok(LqrWeights::output_weighted(tm, output_weight, input_weight))
            }
        }
    }
}

/// How the certificate is chosen.
///
/// With `decay_bound = Some(α)` the Riccati equation is solved for
/// `(A/α, F_z/α)`, which places every closed-loop eigenvalue inside the
/// disk of radius `α`. `None` gives the plain energy-optimal gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    pub weighting: Weighting,
    pub decay_bound: Option<f64>,
    pub tol_rel: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            weighting: Weighting::Identity,
            decay_bound: Some(0.8),
            tol_rel: DEFAULT_TOL,
        }
    }
}

impl SynthesisOptions {
    /// Plain Riccati gain with the given weighting.
    pub fn energy_optimal(weighting: Weighting) -> Self {
        SynthesisOptions {
            weighting,
            decay_bound: None,
            tol_rel: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Controller {
    pub w: Matrix,
    pub y: Matrix,
    /// `M = W⁻¹`
    pub m: Matrix,
    /// `K = Y W⁻¹`
    pub k: Matrix,
    pub a_cl: Matrix,
    pub transition: TransitionModel,
    /// `Π_u F (A + F_z K)`, acting on `𝔤ₖ₋₁`.
    pub state_gain: Matrix,
    /// `Π_u F (F_p† Π_p + F_z K F†)`, acting on `w̃ₖ₋₁`.
    pub trajectory_gain: Matrix,
}

pub fn synthesize(tm: &TransitionModel) -> Result<Controller> {
    synthesize_with(tm, &SynthesisOptions::default())
}

pub fn synthesize_with(tm: &TransitionModel, opts: &SynthesisOptions) -> Result<Controller> {
    if tm.is_autonomous() {
        return Err(Error::invalid(
            "nothing to control: the behavior has no free variables",
        ));
    }
    if !(opts.tol_rel > 0.0 && opts.tol_rel < 1.0) {
        return Err(Error::invalid(format!("tol must lie in (0, 1), got {}", opts.tol_rel)));
    }
    let stab = tm.stabilizable(opts.tol_rel)?;
    if !stab.stabilizable {
        let eigs: Vec<String> = stab
            .uncontrollable_eigs
            .iter()
            .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
            .collect();
        return Err(Error::no_solution(format!(
            "behavior is not stabilizable; uncontrollable eigenvalues: [{}]",
            eigs.join(", ")
        )));
    }
    let weights = opts.weighting.resolve(tm)?;
    let scale = match opts.decay_bound {
        None => 1.0,
        Some(alpha) => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::invalid(format!("decay bound must lie in (0, 1], got {alpha}")));
            }
            // fixed modes cannot be moved; stay strictly outside them
            let fixed = stab.uncontrollable_eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if fixed >= alpha { 0.5 * (1.0 + fixed) } else { alpha }
        }
    };
    let dare = numerics::solve_dare_gain(&(&tm.a / scale), &(&tm.fz / scale), &weights.q, &weights.r)?;
    controller_from_gain(tm, dare.k)
}

/// Certificate and control laws for a given stabilizing gain `K`.
pub fn controller_from_gain(tm: &TransitionModel, k: Matrix) -> Result<Controller> {
    let r = tm.rank();
    if k.shape() != (tm.free_dim(), r) {
        return Err(Error::invalid(format!(
            "gain must be {}x{r}, got {}x{}",
            tm.free_dim(),
            k.nrows(),
            k.ncols()
        )));
    }
    let a_cl = &tm.a + &tm.fz * &k;
    let m = numerics::solve_discrete_lyapunov(&a_cl, &Matrix::identity(r, r))?;
    let w = numerics::symmetrize(&numerics::inverse(&m, "Lyapunov certificate M")?);
    let y = &k * &w;

    let lmi = synthesis_lmi_min_eigenvalue(&tm.a, &tm.fz, &w, &y)?;
    if lmi <= 0.0 {
        return Err(Error::numerical(
            "synthesis LMI is not positive definite",
            lmi,
        ));
    }

    let f = &tm.basis.f;
    let state_gain = &tm.pi_u * f * &a_cl;
    let past_map = numerics::pinv(&tm.fp, DEFAULT_TOL)? * &tm.pi_p;
    let trajectory_gain = &tm.pi_u * f * (past_map + &tm.fz * &k * f.transpose());
    Ok(Controller {
        w,
        y,
        m,
        k,
        a_cl,
        transition: tm.clone(),
        state_gain,
        trajectory_gain,
    })
}

/// Smallest eigenvalue of `[[W, (AW + F_z Y)ᵀ], [AW + F_z Y, W]]`.
pub fn synthesis_lmi_min_eigenvalue(a: &Matrix, fz: &Matrix, w: &Matrix, y: &Matrix) -> Result<f64> {
    let n = a.nrows();
    let off = a * w + fz * y;
    let mut block = Matrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(w);
    block.view_mut((n, n), (n, n)).copy_from(w);
    block.view_mut((n, 0), (n, n)).copy_from(&off);
    block.view_mut((0, n), (n, n)).copy_from(&off.transpose());
    numerics::min_sym_eigenvalue(&block)
}

impl Controller {
    pub fn rank(&self) -> usize {
        self.a_cl.nrows()
    }

    pub fn verify_lmi(&self) -> Result<f64> {
        synthesis_lmi_min_eigenvalue(&self.transition.a, &self.transition.fz, &self.w, &self.y)
    }

    pub fn closed_loop_radius(&self) -> Result<f64> {
        numerics::spectral_radius(&self.a_cl)
    }

    /// `V = ‖𝔤‖²_M`.
    pub fn lyapunov_value(&self, g: &Vector) -> f64 {
        g.dot(&(&self.m * g))
    }

    /// `uₖ = Π_u F (A + F_z Y W⁻¹) 𝔤ₖ₋₁`.
    pub fn control_from_parameterizer(&self, g_prev: &Parameterizer) -> Result<Vector> {
        if g_prev.g.len() != self.rank() {
            return Err(Error::invalid(format!(
                "parameterizer has length {}, controller rank is {}",
                g_prev.g.len(),
                self.rank()
            )));
        }
        Ok(&self.state_gain * &g_prev.g)
    }

    /// `uₖ = Π_u F (F_p† Π_p + F_z Y W⁻¹ F†) w̃ₖ₋₁`.
    pub fn control_from_trajectory(&self, seg_prev: &WindowSegment) -> Result<Vector> {
        if seg_prev.values.len() != self.trajectory_gain.ncols() {
            return Err(Error::invalid(format!(
                "window has length {}, controller expects {}",
                seg_prev.values.len(),
                self.trajectory_gain.ncols()
            )));
        }
        Ok(&self.trajectory_gain * &seg_prev.values)
    }

    /// Next parameterizer under the closed loop, `A_cl 𝔤ₖ₋₁`.
    pub fn step(&self, g_prev: &Vector) -> Vector {
        &self.a_cl * g_prev
    }

    pub fn to_json(&self) -> ControllerJson {
        let b = &self.transition.basis;
        ControllerJson {
            r: self.rank(),
            m: b.inputs,
            p: b.outputs,
            lag: b.lag,
            w: matrix_rows(&self.w),
            y: matrix_rows(&self.y),
            k: matrix_rows(&self.k),
            a_cl: matrix_rows(&self.a_cl),
            trajectory_gain: matrix_rows(&self.trajectory_gain),
        }
    }
}

impl TrajectoryFeedback for Controller {
    fn lag(&self) -> usize {
        self.transition.basis.lag
    }

    fn inputs(&self) -> usize {
        self.transition.basis.inputs
    }

    fn outputs(&self) -> usize {
        self.transition.basis.outputs
    }

    fn control(&self, window: &WindowSegment) -> Result<Vector> {
        self.control_from_trajectory(window)
    }
}

/// Serialized controller; `trajectory_gain` alone is enough to run it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerJson {
    pub r: usize,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "L")]
    pub lag: usize,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    #[serde(rename = "A_cl")]
    pub a_cl: Vec<Vec<f64>>,
    pub trajectory_gain: Vec<Vec<f64>>,
}

impl ControllerJson {
    pub fn deploy(&self) -> Result<TrajectoryFeedbackLaw> {
        let gain = matrix_from_rows(&self.trajectory_gain, self.m, (self.lag + 1) * (self.m + self.p))?;
        Ok(TrajectoryFeedbackLaw {
            lag: self.lag,
            inputs: self.m,
            outputs: self.p,
            gain,
        })
    }
}

/// Standalone past-trajectory feedback `uₖ = G w̃ₖ₋₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFeedbackLaw {
    pub lag: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub gain: Matrix,
}

impl TrajectoryFeedback for TrajectoryFeedbackLaw {
    fn lag(&self) -> usize {
        self.lag
    }

    fn inputs(&self) -> usize {
        self.inputs
    }

    fn outputs(&self) -> usize {
        self.outputs
    }

    fn control(&self, window: &WindowSegment) -> Result<Vector> {
        if window.values.len() != self.gain.ncols() {
            return Err(Error::invalid(format!(
                "window has length {}, controller expects {}",
                window.values.len(),
                self.gain.ncols()
            )));
        }
        Ok(&self.gain * &window.values)
    }
}

/// Data of the quadratic form `v₁ᵀQv₁ + 2v₁ᵀSv₂ − v₂ᵀRv₂`.
#[derive(Debug, Clone)]
pub struct GainFamilyParams {
    pub qf: Matrix,
    pub sf: Matrix,
    pub rf: Matrix,
}

impl GainFamilyParams {
    pub fn form(&self, v1: &Vector, v2: &Vector) -> f64 {
        v1.dot(&(&self.qf * v1)) + 2.0 * v1.dot(&(&self.sf * v2)) - v2.dot(&(&self.rf * v2))
    }

    fn validate(&self) -> Result<(usize, usize)> {
        let n1 = self.qf.nrows();
        let n2 = self.rf.nrows();
        if self.qf.shape() != (n1, n1) || self.rf.shape() != (n2, n2) || self.sf.shape() != (n1, n2) {
            return Err(Error::invalid(format!(
                "inconsistent shapes: Q {:?}, S {:?}, R {:?}",
                self.qf.shape(),
                self.sf.shape(),
                self.rf.shape()
            )));
        }
        if !numerics::is_symmetric(&self.qf, 1e-10) || !numerics::is_symmetric(&self.rf, 1e-10) {
            return Err(Error::invalid("Q and R must be symmetric"));
        }
        if numerics::min_sym_eigenvalue(&self.rf)? <= 0.0 {
            return Err(Error::invalid("R must be positive definite"));
        }
        Ok((n1, n2))
    }
}

/// Gain `K` with `v₂ = K v₁` keeping the form non-negative, parameterized
/// by a contraction `U` (`v₂`-rows by `v₁`-columns, `‖U‖₂ ≤ 1`).
pub fn gain_family(params: &GainFamilyParams, u: &Matrix) -> Result<Matrix> {
    let (n1, n2) = params.validate()?;
    if u.shape() != (n2, n1) {
        return Err(Error::invalid(format!(
            "contraction must be {n2}x{n1}, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let norm = numerics::spectral_norm(u)?;
    if norm > 1.0 + 1e-12 {
        return Err(Error::invalid(format!("‖U‖₂ = {norm} exceeds 1")));
    }
    let r_inv = numerics::inverse(&params.rf, "R")?;
    let c = numerics::symmetrize(&(&params.qf + &params.sf * &r_inv * params.sf.transpose()));
    let c_half = numerics::sym_sqrt(&c)
        .map_err(|_| Error::no_solution("Q + S R⁻¹ Sᵀ is not positive semidefinite"))?;
    let r_inv_half = numerics::inverse(&numerics::sym_sqrt(&params.rf)?, "R^{1/2}")?;
    Ok(r_inv_half * u * c_half + r_inv * params.sf.transpose())
}

impl Controller {
    /// Decrease-condition data `(Q, S, R)` for the certificate `M`.
    pub fn decrease_params(&self) -> GainFamilyParams {
        let a = &self.transition.a;
        let fz = &self.transition.fz;
        let ma = &self.m * a;
        GainFamilyParams {
            qf: numerics::symmetrize(&(&self.m - a.transpose() * &ma)),
            sf: -(ma.transpose() * fz),
            rf: numerics::symmetrize(&(fz.transpose() * &self.m * fz)),
        }
    }
}

/// Member of the gain family that strictly decreases `‖𝔤‖²_M`; requires
/// `‖U‖₂ < 1`.
pub fn stabilizing_gain_family(ctrl: &Controller, u: &Matrix) -> Result<Matrix> {
    let norm = numerics::spectral_norm(u)?;
    if norm >= 1.0 {
        return Err(Error::invalid(format!(
            "strict decrease needs ‖U‖₂ < 1, got {norm}"
        )));
    }
    gain_family(&ctrl.decrease_params(), u)
}

#[derive(Debug, Clone)]
pub struct ConstrainedStep {
    pub g_next: Parameterizer,
    pub z: Vector,
    /// Multiplier of the Lyapunov constraint (zero when inactive).
    pub multiplier: f64,
}

/// One step of `min ½‖𝔤ₖ‖²_H + fᵀ𝔤ₖ` over `𝔤ₖ = A𝔤ₖ₋₁ + F_z z` subject to
/// `‖𝔤ₖ‖²_M ≤ (1 − eps)‖𝔤ₖ₋₁‖²_M`. `H` may be indefinite.
///
/// With `ζ = M_z^{1/2} z`, `M_z = F_zᵀMF_z`, the constraint is a Euclidean
/// ball and the problem a trust-region subproblem; the multiplier `λ` solves
/// the secular equation `‖ξ(λ)‖ = radius` by bisection.
pub fn constrained_step(
    ctrl: &Controller,
    g_prev: &Parameterizer,
    cost_h: &Matrix,
    cost_f: &Vector,
    eps: f64,
) -> Result<ConstrainedStep> {
    let r = ctrl.rank();
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if g_prev.g.len() != r || cost_h.shape() != (r, r) || cost_f.len() != r {
        return Err(Error::invalid(format!(
            "dimension mismatch: 𝔤 {}, H {:?}, f {} for rank {r}",
            g_prev.g.len(),
            cost_h.shape(),
            cost_f.len()
        )));
    }
    numerics::ensure_finite(cost_h, "cost H")?;
    let v_prev = ctrl.lyapunov_value(&g_prev.g);
    if v_prev <= 0.0 {
        return Err(Error::invalid("‖𝔤ₖ₋₁‖_M must be positive"));
    }
    let budget = (1.0 - eps) * v_prev;
    let tm = &ctrl.transition;
    let fz = &tm.fz;
    let a_g = &tm.a * &g_prev.g;
    let next = |z: &Vector| &a_g + fz * z;
    let finish = |z: Vector, lambda: f64| ConstrainedStep {
        g_next: Parameterizer::new(next(&z), g_prev.time_index + 1),
        z,
        multiplier: lambda,
    };

    if fz.ncols() == 0 {
        if ctrl.lyapunov_value(&a_g) > budget {
            return Err(Error::no_solution("Lyapunov constraint infeasible without free inputs"));
        }
        return Ok(finish(Vector::zeros(0), 0.0));
    }

    let h = numerics::symmetrize(cost_h);
    let m_z = numerics::symmetrize(&(fz.transpose() * &ctrl.m * fz));
    let mz_half = numerics::sym_sqrt(&m_z)?;
    let mz_inv_half = numerics::inverse(&mz_half, "M_z^{1/2}")?;
    // ‖a + F_z z‖²_M = ‖ζ + c‖² + const
    let c = &mz_inv_half * (fz.transpose() * (&ctrl.m * &a_g));
    let radius_sq = budget - ctrl.lyapunov_value(&a_g) + c.norm_squared();
    if radius_sq < 0.0 {
        return Err(Error::no_solution(format!(
            "Lyapunov constraint is infeasible for this step (shortfall {:.3e})",
            -radius_sq
        )));
    }
    let radius = radius_sq.sqrt();

    // cost in ξ = ζ + c: ½ξᵀH̃ξ + bᵀξ + const
    let h_t = numerics::symmetrize(&(&mz_inv_half * fz.transpose() * &h * fz * &mz_inv_half));
    let lin = &mz_inv_half * (fz.transpose() * (&h * &a_g + cost_f));
    let b = &lin - &h_t * &c;
    let eig = nalgebra::SymmetricEigen::new(h_t.clone());
    let q = &eig.eigenvectors;
    let lam = &eig.eigenvalues;
    let beta = q.transpose() * &b;
    let lam_min = lam.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = lam.iter().map(|v| v.abs()).fold(0.0, f64::max).max(b.norm() / radius.max(1e-300)).max(1e-300);
    let xi_of = |mu: f64| -> Vector {
        let coeffs = Vector::from_fn(beta.len(), |i, _| -beta[i] / (lam[i] + mu));
        q * coeffs
    };
    let to_z = |xi: &Vector| &mz_inv_half * (xi - &c);
    // boundary points can overshoot the budget by rounding; the centre of
    // the ball lies strictly inside
    let pull_inside = |xi: &Vector| -> Vector {
        let mut z = to_z(xi);
        for j in 0..60 {
            if ctrl.lyapunov_value(&next(&z)) <= budget {
                break;
            }
            z = to_z(&(xi * (1.0 - 1e-15 * 2f64.powi(j)).max(0.0)));
        }
        z
    };

    let floor = (-lam_min).max(0.0);
    let tol = 1e-12 * scale;
    // interior solution: convex and unconstrained minimizer inside the ball
    if lam_min > tol {
        let xi = xi_of(0.0);
        if xi.norm() <= radius {
            return Ok(finish(to_z(&xi), 0.0));
        }
    }

    let mut lo = floor;
    let mut hi = floor + scale.max(1.0);
    while xi_of(hi).norm() > radius {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::numerical("multiplier search diverged", hi));
        }
    }
    // hard case: the secular curve stays inside the ball at the floor
    let near_floor = floor + tol;
    let at_floor = xi_of(near_floor);
    if lam_min <= tol && at_floor.norm() <= radius {
        let idx = (0..lam.len()).min_by(|&i, &j| lam[i].total_cmp(&lam[j])).unwrap_or(0);
        let dir = q.column(idx).into_owned();
        let mut base = at_floor;
        for i in 0..lam.len() {
            if (lam[i] - lam_min).abs() <= tol {
                base -= q.column(i) * q.column(i).dot(&base);
            }
        }
        let bd = base.dot(&dir);
        let tau = -bd + (bd * bd + radius_sq - base.norm_squared()).max(0.0).sqrt();
        return Ok(finish(pull_inside(&(base + dir * tau)), floor));
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if xi_of(mid).norm() > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // hi is the feasible end of the bracket
    let xi = xi_of(hi);
    let len = xi.norm();
    let xi = if len > radius { xi * (radius / len) } else { xi };
    Ok(finish(pull_inside(&xi), hi))
}

/// Smallest eigenvalue of `[[‖𝔤ₖ₋₁‖²_M, 𝔤ₖᵀ], [𝔤ₖ, M⁻¹]]`; positive iff
/// `‖𝔤ₖ‖²_M < ‖𝔤ₖ₋₁‖²_M`.
pub fn decrease_block_min_eigenvalue(ctrl: &Controller, g_prev: &Vector, g_next: &Vector) -> Result<f64> {
    let r = ctrl.rank();
    let mut block = Matrix::zeros(r + 1, r + 1);
    block[(0, 0)] = ctrl.lyapunov_value(g_prev);
    block.view_mut((1, 0), (r, 1)).copy_from(g_next);
    block.view_mut((0, 1), (1, r)).copy_from(&g_next.transpose());
    block.view_mut((1, 1), (r, r)).copy_from(&ctrl.w);
    numerics::min_sym_eigenvalue(&block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn gain_family_maximizer_and_scalar_cases() {
        let p = GainFamilyParams {
            qf: dmatrix![3.0],
            sf: dmatrix![1.0],
            rf: dmatrix![1.0],
        };
        let k0 = gain_family(&p, &dmatrix![0.0]).unwrap();
        assert_relative_eq!(k0[(0, 0)], 1.0, epsilon = 1e-14);

        let k = gain_family(&p, &dmatrix![-1.0]).unwrap();
        assert_relative_eq!(k[(0, 0)], -1.0, epsilon = 1e-12);
        // 3v² + 2v(−v) − v² = 0: boundary of the family
        let v = dvector![1.7];
        assert_relative_eq!(p.form(&v, &(&k * &v)), 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.form(&v, &(&k0 * &v)), 4.0 * 1.7 * 1.7, epsilon = 1e-12);

        let zero = GainFamilyParams {
            qf: dmatrix![0.0],
            sf: dmatrix![0.0],
            rf: dmatrix![1.0],
        };
        assert_relative_eq!(gain_family(&zero, &dmatrix![1.0]).unwrap()[(0, 0)], 0.0);
    }

    #[test]
    fn gain_family_errors() {
        let p = GainFamilyParams {
            qf: dmatrix![-5.0],
            sf: dmatrix![1.0],
            rf: dmatrix![1.0],
        };
        assert!(matches!(gain_family(&p, &dmatrix![0.5]), Err(Error::NoSolution(_))));
        let ok = GainFamilyParams {
            qf: dmatrix![1.0],
            sf: dmatrix![0.0],
            rf: dmatrix![1.0],
        };
        assert!(matches!(gain_family(&ok, &dmatrix![1.5]), Err(Error::InvalidInput(_))));
    }

    fn scalar_model() -> TransitionModel {
        use crate::behavior::{build_hankel, extract_basis};
        use crate::plant::{generate_excitation, simulate_open, PlantRealization, StateSpace};
        let ss = StateSpace::new(dmatrix![2.0], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]).unwrap();
        let pr = PlantRealization::from_state_space(ss);
        let run = simulate_open(&pr, &generate_excitation(1, 30, 1, 1.0), None).unwrap();
        let basis = extract_basis(&build_hankel(&run.trajectory, 1).unwrap(), DEFAULT_TOL).unwrap();
        crate::analysis::build_transition(&basis, DEFAULT_TOL).unwrap()
    }

    fn scalar_output_weighted() -> Controller {
        let opts = SynthesisOptions::energy_optimal(Weighting::Output {
            output_weight: 1.0,
            input_weight: 1.0,
        });
        synthesize_with(&scalar_model(), &opts).unwrap()
    }

    #[test]
    fn scalar_synthesis_matches_riccati_pole() {
        let ctrl = scalar_output_weighted();
        assert!(ctrl.verify_lmi().unwrap() > 0.0);
        let pole = 2.0 / (3.0 + 5f64.sqrt());
        let spec = numerics::eigenvalues(&ctrl.a_cl).unwrap();
        assert_relative_eq!(spec.spectral_radius, pole, epsilon = 1e-9);
    }

    #[test]
    fn scalar_control_value() {
        let ctrl = scalar_output_weighted();
        // (u, y) = (0, 1), (0, 2) ⇒ next output 4, Riccati gain −(1+√5)/2
        let seg = WindowSegment::new(dvector![0.0, 1.0, 0.0, 2.0], 1, 1, 1, 1).unwrap();
        let u = ctrl.control_from_trajectory(&seg).unwrap();
        let k = -(1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(u[0], 4.0 * k, epsilon = 1e-8);
        let g = ctrl.transition.basis.state_map(&seg).unwrap();
        assert_relative_eq!(ctrl.control_from_parameterizer(&g).unwrap()[0], u[0], epsilon = 1e-10);
    }

    #[test]
    fn identity_weights_stabilize_scalar() {
        let ctrl = synthesize_with(&scalar_model(), &SynthesisOptions::energy_optimal(Weighting::Identity)).unwrap();
        assert!(ctrl.closed_loop_radius().unwrap() < 1.0);
        let ctrl = synthesize(&scalar_model()).unwrap();
        assert!(ctrl.closed_loop_radius().unwrap() < 0.8);
    }

    #[test]
    fn deployed_law_matches_controller() {
        let ctrl = scalar_output_weighted();
        let json = serde_json::to_string(&ctrl.to_json()).unwrap();
        let back: ControllerJson = serde_json::from_str(&json).unwrap();
        let law = back.deploy().unwrap();
        let seg = WindowSegment::new(dvector![0.3, -1.0, 0.5, -1.5], 1, 1, 1, 1).unwrap();
        assert_relative_eq!(
            law.control(&seg).unwrap()[0],
            ctrl.control(&seg).unwrap()[0],
            epsilon = 1e-12
        );
        let short = WindowSegment::new(dvector![0.3, -1.0], 1, 1, 0, 0).unwrap();
        assert!(law.control(&short).is_err());
    }

    #[test]
    fn stabilizing_family_decreases_certificate() {
        let ctrl = scalar_output_weighted();
        let n = ctrl.rank();
        let u = Matrix::from_element(1, n, 0.5 / (n as f64).sqrt());
        let k = stabilizing_gain_family(&ctrl, &u).unwrap();
        let tm = &ctrl.transition;
        let a_cl = &tm.a + &tm.fz * &k;
        assert!(numerics::spectral_radius(&a_cl).unwrap() < 1.0);
        let g = Vector::from_element(tm.rank(), 1.0);
        assert!(ctrl.lyapunov_value(&(&a_cl * &g)) < ctrl.lyapunov_value(&g));
        assert!(stabilizing_gain_family(&ctrl, &(u * 2.0)).is_err());
    }

    #[test]
    fn constrained_step_respects_budget() {
        let ctrl = scalar_output_weighted();
        let r = ctrl.rank();
        let g0 = Parameterizer::new(Vector::from_fn(r, |i, _| 1.0 + i as f64), 0);
        // rewards growth: negative definite quadratic
        let h = -Matrix::identity(r, r);
        let f = Vector::zeros(r);
        let eps = 1e-3;
        let step = constrained_step(&ctrl, &g0, &h, &f, eps).unwrap();
        let v0 = ctrl.lyapunov_value(&g0.g);
        let v1 = ctrl.lyapunov_value(&step.g_next.g);
        assert!(v1 <= (1.0 - eps) * v0 * (1.0 + 1e-9));
        assert!(step.multiplier > 0.0);
        assert!(decrease_block_min_eigenvalue(&ctrl, &g0.g, &step.g_next.g).unwrap() > 0.0);
        assert!(constrained_step(&ctrl, &g0, &h, &f, 0.0).is_err());
    }

    #[test]
    fn autonomous_model_is_rejected() {
        use crate::behavior::BehaviorBasis;
        // y_{k+1} = 0.5 y_k, L = 1, w = 1
        let f = dmatrix![1.0; 0.5] / (1.25f64).sqrt();
        let basis = BehaviorBasis::from_orthonormal(f, 1, 0, 1).unwrap();
        let tm = crate::analysis::build_transition(&basis, DEFAULT_TOL).unwrap();
        assert!(matches!(synthesize(&tm), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn lmi_negative_for_unstable_identity_certificate() {
        // A = 2, no input, W = I: Schur complement 1 − 4 < 0
        let v = synthesis_lmi_min_eigenvalue(&dmatrix![2.0], &Matrix::zeros(1, 0), &dmatrix![1.0], &Matrix::zeros(0, 1))
            .unwrap();
        assert!(v < 0.0);
        let v = synthesis_lmi_min_eigenvalue(&dmatrix![0.0], &Matrix::zeros(1, 0), &dmatrix![1.0], &Matrix::zeros(0, 1))
            .unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-14);
    }
}
