//! Data-generating LTI plants.
//!
//! Transfer-matrix entries are realized one by one in controllable canonical
//! form and stacked block-diagonally; output `i` sums the blocks of row `i`.
//! The result is not minimal in general, which does not matter for the
//! data-driven pipeline: only the manifest samples leave this module.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::behavior::Trajectory;
use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, Vector, DEFAULT_TOL};
use crate::synthesis::TrajectoryFeedback;

/// Rational entry `num(z)/den(z)`, coefficients in descending powers of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalEntry {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl RationalEntry {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Self {
        RationalEntry { num, den }
    }

    fn validate(&self) -> Result<()> {
        if self.den.is_empty() || self.den[0] == 0.0 {
            return Err(Error::invalid("denominator leading coefficient must be nonzero"));
        }
        if self.num.iter().chain(&self.den).any(|x| !x.is_finite()) {
            return Err(Error::invalid("transfer coefficients must be finite"));
        }
        let num = trim_leading_zeros(&self.num);
        if num.len() > self.den.len() {
            return Err(Error::invalid(format!(
                "improper entry: numerator degree {} exceeds denominator degree {}",
                num.len() - 1,
                self.den.len() - 1
            )));
        }
        Ok(())
    }

    /// First `n` impulse-response samples by long division of `num/den`.
    pub fn impulse_response(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let order = self.den.len() - 1;
        let lead = self.den[0];
        let mut num = vec![0.0; self.den.len() - trim_leading_zeros(&self.num).len()];
        num.extend_from_slice(trim_leading_zeros(&self.num));
        // h_k = (b_k − Σ_{i=1..min(k,order)} a_i h_{k−i}) / a_0
        let mut h = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = if k <= order { num[k] } else { 0.0 };
            for i in 1..=order.min(k) {
                acc -= self.den[i] * h[k - i];
            }
            h.push(acc / lead);
        }
        Ok(h)
    }
}

fn trim_leading_zeros(c: &[f64]) -> &[f64] {
    let first = c.iter().position(|&x| x != 0.0).unwrap_or(c.len());
    &c[first..]
}

/// `p × m` grid of rational entries; `Y(z) = G(z)U(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub entries: Vec<Vec<RationalEntry>>,
}

impl TransferMatrix {
    pub fn new(entries: Vec<Vec<RationalEntry>>) -> Result<Self> {
        let tm = TransferMatrix { entries };
        tm.validate()?;
        Ok(tm)
    }

    pub fn outputs(&self) -> usize {
        self.entries.len()
    }

    pub fn inputs(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<()> {
        if self.entries.is_empty() || self.inputs() == 0 {
            return Err(Error::invalid("transfer matrix must have at least one row and column"));
        }
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != self.inputs() {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    self.inputs()
                )));
            }
            for (j, e) in row.iter().enumerate() {
                e.validate()
                    .map_err(|err| Error::invalid(format!("entry G[{i}][{j}]: {err}")))?;
            }
        }
        Ok(())
    }

    /// The 2×2 unstable, non-minimum-phase benchmark plant.
    ///
    /// The printed denominator of `G₁₂` lacks a `z` in its linear term; it
    /// is read here as `z² − 0.324z + 0.449`.
    pub fn benchmark_2x2() -> Self {
        TransferMatrix {
            entries: vec![
                vec![
                    RationalEntry::new(vec![-0.2, 0.367], vec![1.0, -1.083]),
                    RationalEntry::new(vec![0.6775, 1.198], vec![1.0, -0.324, 0.449]),
                ],
                vec![
                    RationalEntry::new(vec![-0.341, 0.449], vec![1.0, -1.341, 0.449]),
                    RationalEntry::new(vec![-0.428], vec![1.0, -1.14]),
                ],
            ],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let tm: TransferMatrix = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: format!("plant JSON line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        tm.validate()?;
        Ok(tm)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

/// Discrete-time state-space model `x⁺ = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

impl StateSpace {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || b.nrows() != n || c.ncols() != n || d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::invalid(format!(
                "inconsistent state-space shapes: A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        Ok(StateSpace { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Simulates from `x0` under the input sequence `u` (`m × N`).
    pub fn simulate(&self, u: &Matrix, x0: &Vector) -> Result<SimulationRun> {
        if u.nrows() != self.inputs() || x0.len() != self.order() {
            return Err(Error::invalid(format!(
                "input has {} rows (expected {}), x0 has length {} (expected {})",
                u.nrows(),
                self.inputs(),
                x0.len(),
                self.order()
            )));
        }
        numerics::ensure_finite(u, "input sequence")?;
        let n_steps = u.ncols();
        let mut y = Matrix::zeros(self.outputs(), n_steps);
        let mut log = Matrix::zeros(self.order(), n_steps);
        let mut x = x0.clone();
        for k in 0..n_steps {
            let uk = u.column(k);
            let yk = &self.c * &x + &self.d * uk;
            if !yk.iter().all(|v| v.is_finite()) {
                return Err(Error::numerical(format!("non-finite output at step {k}"), f64::INFINITY));
            }
            y.set_column(k, &yk);
            log.set_column(k, &x);
            x = &self.a * &x + &self.b * uk;
        }
        Ok(SimulationRun {
            trajectory: Trajectory::from_io(u, &y, 0)?,
            state_log: Some(log),
            final_state: x,
            seed: None,
            mode: RunMode::Open,
        })
    }

    /// Plant state before the first sample of `window`, recovered by least
    /// squares from the window's outputs. Fails when the window is not a
    /// trajectory of this plant.
    pub fn initial_state(&self, window: &Trajectory) -> Result<Vector> {
        let n = self.order();
        let (m, p) = (self.inputs(), self.outputs());
        if window.inputs() != m || window.outputs() != p {
            return Err(Error::invalid(format!(
                "window partition ({}, {}) does not match plant ({m}, {p})",
                window.inputs(),
                window.outputs()
            )));
        }
        let len = window.len();
        let u = window.input_part();
        let y = window.output_part();
        // y_j − (forced response) = C A^j x_0
        let mut obs = Matrix::zeros(p * len, n);
        let mut rhs = Vector::zeros(p * len);
        let mut a_pow = Matrix::identity(n, n);
        let mut forced = Vector::zeros(n);
        for j in 0..len {
            obs.view_mut((j * p, 0), (p, n)).copy_from(&(&self.c * &a_pow));
            let uj = u.column(j);
            rhs.rows_mut(j * p, p)
                .copy_from(&(y.column(j) - &self.c * &forced - &self.d * uj));
            forced = &self.a * &forced + &self.b * uj;
            a_pow = &self.a * a_pow;
        }
        let x0 = numerics::pinv(&obs, DEFAULT_TOL)? * &rhs;
        let residual = (&obs * &x0 - &rhs).norm();
        if residual > 1e-8 * rhs.norm().max(1.0) {
            return Err(Error::invalid(format!(
                "window is not a trajectory of the plant (residual {residual:e})"
            )));
        }
        Ok(x0)
    }

    /// States before each sample of `window` (columns) and the state after
    /// its last sample.
    pub fn states_along(&self, window: &Trajectory) -> Result<(Matrix, Vector)> {
        let mut x = self.initial_state(window)?;
        let u = window.input_part();
        let mut log = Matrix::zeros(self.order(), window.len());
        for j in 0..window.len() {
            log.set_column(j, &x);
            x = &self.a * &x + &self.b * u.column(j);
        }
        Ok((log, x))
    }
}

/// Where one transfer entry lives inside the stacked realization.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryBlock {
    pub row: usize,
    pub col: usize,
    pub offset: usize,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantRealization {
    pub system: StateSpace,
    pub blocks: Vec<EntryBlock>,
}

impl PlantRealization {
    /// Wraps a state-space model that did not come from a transfer matrix.
    pub fn from_state_space(system: StateSpace) -> Self {
        PlantRealization {
            system,
            blocks: Vec::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.system.order()
    }

    pub fn inputs(&self) -> usize {
        self.system.inputs()
    }

    pub fn outputs(&self) -> usize {
        self.system.outputs()
    }
}

/// Controllable canonical form of one entry: `(A, b, c, d)`.
fn companion(entry: &RationalEntry) -> (Matrix, Vector, Vector, f64) {
    let lead = entry.den[0];
    let den: Vec<f64> = entry.den.iter().map(|x| x / lead).collect();
    let order = den.len() - 1;
    let trimmed = trim_leading_zeros(&entry.num);
    let mut num = vec![0.0; den.len() - trimmed.len()];
    num.extend(trimmed.iter().map(|x| x / lead));

    let d = num[0];
    let mut a = Matrix::zeros(order, order);
    for j in 0..order {
        a[(0, j)] = -den[j + 1];
    }
    for i in 1..order {
        a[(i, i - 1)] = 1.0;
    }
    let mut b = Vector::zeros(order);
    if order > 0 {
        b[0] = 1.0;
    }
    let c = Vector::from_iterator(order, (1..=order).map(|i| num[i] - d * den[i]));
    (a, b, c, d)
}

pub fn realize(g: &TransferMatrix) -> Result<PlantRealization> {
    g.validate()?;
    let (p, m) = (g.outputs(), g.inputs());
    let parts: Vec<_> = g
        .entries
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, e)| (i, j, companion(e))))
        .collect();
    let n: usize = parts.iter().map(|(_, _, (a, ..))| a.nrows()).sum();

    let mut a = Matrix::zeros(n, n);
    let mut b = Matrix::zeros(n, m);
    let mut c = Matrix::zeros(p, n);
    let mut d = Matrix::zeros(p, m);
    let mut blocks = Vec::new();
    let mut offset = 0;
    for (i, j, (ae, be, ce, de)) in parts {
        let k = ae.nrows();
        a.view_mut((offset, offset), (k, k)).copy_from(&ae);
        b.view_mut((offset, j), (k, 1)).copy_from(&be);
        c.view_mut((i, offset), (1, k)).copy_from(&ce.transpose());
        d[(i, j)] = de;
        blocks.push(EntryBlock {
            row: i,
            col: j,
            offset,
            order: k,
        });
        offset += k;
    }
    Ok(PlantRealization {
        system: StateSpace::new(a, b, c, d)?,
        blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Open,
    Closed,
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub trajectory: Trajectory,
    /// Internal plant state before each sample, one column per step.
    pub state_log: Option<Matrix>,
    /// State after the last sample.
    pub final_state: Vector,
    pub seed: Option<u64>,
    pub mode: RunMode,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub seed: Option<u64>,
    pub mode: RunMode,
    pub samples: usize,
    pub inputs: usize,
    pub outputs: usize,
}

impl SimulationRun {
    pub fn metadata(&self) -> RunMetadata {
        RunMetadata {
            seed: self.seed,
            mode: self.mode,
            samples: self.trajectory.len(),
            inputs: self.trajectory.inputs(),
            outputs: self.trajectory.outputs(),
        }
    }
}

/// Open-loop run of the realization from `x0` (zero when `None`).
pub fn simulate_open(pr: &PlantRealization, u: &Matrix, x0: Option<&Vector>) -> Result<SimulationRun> {
    let zero = Vector::zeros(pr.order());
    pr.system.simulate(u, x0.unwrap_or(&zero))
}

/// Reproducible i.i.d. uniform input on `[−amplitude, amplitude]`, `m × len`.
pub fn generate_excitation(m: usize, len: usize, seed: u64, amplitude: f64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(m, len, |_, _| (2.0 * rng.random::<f64>() - 1.0) * amplitude)
}

/// Closed-loop run seeded by a window `init` of `L+1` plant samples.
///
/// Each step computes `uₖ` from the previous window, feeds it to the plant,
/// reads `yₖ` and slides the window. The returned trajectory includes `init`.
pub fn simulate_closed<C: TrajectoryFeedback + ?Sized>(
    pr: &PlantRealization,
    ctrl: &C,
    init: &Trajectory,
    horizon: usize,
) -> Result<SimulationRun> {
    let lag = ctrl.lag();
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if init.len() != lag + 1 {
        return Err(Error::invalid(format!(
            "initial window has {} samples, controller needs L+1 = {}",
            init.len(),
            lag + 1
        )));
    }
    if ctrl.inputs() != pr.inputs() || ctrl.outputs() != pr.outputs() {
        return Err(Error::invalid(format!(
            "controller is {}x{} (m x p) but plant is {}x{}",
            ctrl.inputs(),
            ctrl.outputs(),
            pr.inputs(),
            pr.outputs()
        )));
    }
    let sys = &pr.system;
    let (init_states, mut x) = sys.states_along(init)?;
    let mut log = Matrix::zeros(sys.order(), lag + 1 + horizon);
    log.columns_mut(0, lag + 1).copy_from(&init_states);

    let mut traj = init.clone();
    for step in 0..horizon {
        let window = traj.window(traj.len() - 1, lag)?;
        let u = ctrl.control(&window)?;
        let y = &sys.c * &x + &sys.d * &u;
        let mut w = Vector::zeros(sys.inputs() + sys.outputs());
        w.rows_mut(0, sys.inputs()).copy_from(&u);
        w.rows_mut(sys.inputs(), sys.outputs()).copy_from(&y);
        if !w.iter().all(|v| v.is_finite()) {
            return Err(Error::numerical(
                format!("non-finite sample at closed-loop step {}", step + 1),
                f64::INFINITY,
            ));
        }
        traj.push(&w)?;
        log.set_column(lag + 1 + step, &x);
        x = &sys.a * &x + &sys.b * &u;
    }
    Ok(SimulationRun {
        trajectory: traj,
        state_log: Some(log),
        final_state: x,
        seed: None,
        mode: RunMode::Closed,
    })
}
