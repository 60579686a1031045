//! Hankel-matrix parameterization of a measured behavior.
//!
//! A single sufficiently exciting trajectory is arranged into a depth-`L+1`
//! block Hankel matrix `H`. Its column span is the set of all `(L+1)`-step
//! windows of the behavior, and the leading left singular vectors `F` give an
//! orthonormal basis for that span. The coefficient vector `𝔤` in `w̃ = F𝔤`
//! is a state of the behavior, observable from the window itself
//! (`𝔤 = Fᵀw̃`).
//!
//! Window layout is time-major: `w̃ₖ = (w_{k−L}, …, w_k)` with every sample
//! stacked as `(u, y)`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, Vector};

/// Sampled manifest trajectory, one column per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    inputs: usize,
    outputs: usize,
    samples: Matrix,
    start_time: i64,
}

impl Trajectory {
    /// Builds a trajectory from a `(m+p) × N` sample matrix.
    pub fn new(inputs: usize, outputs: usize, samples: Matrix, start_time: i64) -> Result<Self> {
        if samples.nrows() != inputs + outputs {
            return Err(Error::invalid(format!(
                "sample length {} does not match partition {inputs}+{outputs}",
                samples.nrows()
            )));
        }
        numerics::ensure_finite(&samples, "trajectory")?;
        Ok(Trajectory {
            inputs,
            outputs,
            samples,
            start_time,
        })
    }

    pub fn from_samples(inputs: usize, outputs: usize, samples: &[Vector], start_time: i64) -> Result<Self> {
        let w = inputs + outputs;
        if let Some(bad) = samples.iter().position(|s| s.len() != w) {
            return Err(Error::invalid(format!(
                "sample {bad} has length {}, expected {w}",
                samples[bad].len()
            )));
        }
        let mat = if samples.is_empty() {
            Matrix::zeros(w, 0)
        } else {
            Matrix::from_columns(samples)
        };
        Self::new(inputs, outputs, mat, start_time)
    }

    /// Stacks separate input and output sequences sample by sample.
    pub fn from_io(u: &Matrix, y: &Matrix, start_time: i64) -> Result<Self> {
        if u.ncols() != y.ncols() {
            return Err(Error::invalid(format!(
                "input has {} samples but output has {}",
                u.ncols(),
                y.ncols()
            )));
        }
        let mut samples = Matrix::zeros(u.nrows() + y.nrows(), u.ncols());
        samples.rows_mut(0, u.nrows()).copy_from(u);
        samples.rows_mut(u.nrows(), y.nrows()).copy_from(y);
        Self::new(u.nrows(), y.nrows(), samples, start_time)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn w_dim(&self) -> usize {
        self.inputs + self.outputs
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    pub fn samples(&self) -> &Matrix {
        &self.samples
    }

    /// Sample at position `i` (not absolute time).
    pub fn sample(&self, i: usize) -> Vector {
        self.samples.column(i).into_owned()
    }

    pub fn input_part(&self) -> Matrix {
        self.samples.rows(0, self.inputs).into_owned()
    }

    pub fn output_part(&self) -> Matrix {
        self.samples.rows(self.inputs, self.outputs).into_owned()
    }

    /// Largest absolute entry over all samples.
    pub fn max_abs(&self) -> f64 {
        self.samples.amax()
    }

    /// Sub-trajectory of `len` samples starting at position `from`.
    pub fn slice(&self, from: usize, len: usize) -> Result<Trajectory> {
        if from + len > self.len() {
            return Err(Error::invalid(format!(
                "slice [{from}, {}) exceeds trajectory length {}",
                from + len,
                self.len()
            )));
        }
        Ok(Trajectory {
            inputs: self.inputs,
            outputs: self.outputs,
            samples: self.samples.columns(from, len).into_owned(),
            start_time: self.start_time + from as i64,
        })
    }

    /// Window of `lag + 1` samples ending at position `end`.
    pub fn window(&self, end: usize, lag: usize) -> Result<WindowSegment> {
        if end < lag || end >= self.len() {
            return Err(Error::invalid(format!(
                "window ending at {end} with lag {lag} is outside a trajectory of length {}",
                self.len()
            )));
        }
        let cols = self.samples.columns(end - lag, lag + 1);
        Ok(WindowSegment {
            values: Vector::from_column_slice(cols.into_owned().as_slice()),
            inputs: self.inputs,
            outputs: self.outputs,
            lag,
            end_time: self.start_time + end as i64,
        })
    }

    /// Every `(lag+1)`-sample window, in time order.
    pub fn windows(&self, lag: usize) -> impl Iterator<Item = WindowSegment> + '_ {
        (lag..self.len()).map(move |end| self.window(end, lag).expect("in range"))
    }

    /// Appends one sample.
    pub fn push(&mut self, sample: &Vector) -> Result<()> {
        if sample.len() != self.w_dim() {
            return Err(Error::invalid(format!(
                "sample length {} does not match w_dim {}",
                sample.len(),
                self.w_dim()
            )));
        }
        if !sample.iter().all(|x| x.is_finite()) {
            return Err(Error::numerical(
                format!("non-finite sample at time {}", self.start_time + self.len() as i64),
                f64::INFINITY,
            ));
        }
        let n = self.len();
        let w = self.w_dim();
        let old = std::mem::replace(&mut self.samples, Matrix::zeros(0, 0));
        let mut grown = old.resize_horizontally(n + 1, 0.0);
        grown.set_column(n, sample);
        debug_assert_eq!(grown.nrows(), w);
        self.samples = grown;
        Ok(())
    }

    /// Writes `t,u1..um,y1..yp` CSV, one row per sample.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let io_err = |e: csv::Error| Error::Parse {
            context: "trajectory CSV".into(),
            message: e.to_string(),
        };
        wtr.write_record(csv_header(self.inputs, self.outputs))
            .map_err(io_err)?;
        for (i, col) in self.samples.column_iter().enumerate() {
            let mut row = vec![(self.start_time + i as i64).to_string()];
            row.extend(col.iter().map(|x| x.to_string()));
            wtr.write_record(&row).map_err(io_err)?;
        }
        wtr.flush().map_err(|e| Error::Io {
            path: "trajectory CSV".into(),
            source: e,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Parses the CSV format written by [`Trajectory::write_csv`]; the
    /// input/output partition is read from the header.
    pub fn read_csv<R: Read>(input: R) -> Result<Trajectory> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = rdr
            .headers()
            .map_err(|e| parse_err("header", e.to_string()))?
            .clone();
        let (m, p) = parse_header(&header)?;
        let w = m + p;
        let mut samples = Vec::new();
        let mut start = None;
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| parse_err(&format!("row {row}"), e.to_string()))?;
            if rec.len() != w + 1 {
                return Err(parse_err(
                    &format!("row {row}"),
                    format!("expected {} fields, found {}", w + 1, rec.len()),
                ));
            }
            let t: i64 = rec[0]
                .trim()
                .parse()
                .map_err(|_| parse_err(&format!("row {row}, column t"), format!("bad time index {:?}", &rec[0])))?;
            match start {
                None => start = Some(t),
                Some(t0) if t != t0 + samples.len() as i64 => {
                    return Err(parse_err(
                        &format!("row {row}, column t"),
                        format!("time index {t} is not consecutive"),
                    ))
                }
                _ => {}
            }
            let mut v = Vector::zeros(w);
            for j in 0..w {
                let field = &rec[j + 1];
                let x: f64 = field.trim().parse().map_err(|_| {
                    parse_err(&format!("row {row}, column {}", &header[j + 1]), format!("bad number {field:?}"))
                })?;
                if !x.is_finite() {
                    return Err(parse_err(&format!("row {row}, column {}", &header[j + 1]), "non-finite value"));
                }
                v[j] = x;
            }
            samples.push(v);
        }
        Trajectory::from_samples(m, p, &samples, start.unwrap_or(0))
    }
}

fn parse_err(context: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        context: format!("trajectory CSV {context}"),
        message: message.into(),
    }
}

fn csv_header(m: usize, p: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain((1..=m).map(|i| format!("u{i}")))
        .chain((1..=p).map(|i| format!("y{i}")))
        .collect()
}

fn parse_header(header: &csv::StringRecord) -> Result<(usize, usize)> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names.first() != Some(&"t") {
        return Err(parse_err("header", "first column must be `t`"));
    }
    let m = names[1..].iter().take_while(|n| n.starts_with('u')).count();
    let p = names.len() - 1 - m;
    if p == 0 {
        return Err(parse_err("header", "at least one output column `y1` is required"));
    }
    let expected = csv_header(m, p);
    if names != expected {
        return Err(parse_err(
            "header",
            format!("expected `{}`, found `{}`", expected.join(","), names.join(",")),
        ));
    }
    Ok((m, p))
}

/// Stacked window `w̃ₖ = (w_{k−L}, …, w_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSegment {
    pub values: Vector,
    pub inputs: usize,
    pub outputs: usize,
    pub lag: usize,
    pub end_time: i64,
}

impl WindowSegment {
    pub fn new(values: Vector, inputs: usize, outputs: usize, lag: usize, end_time: i64) -> Result<Self> {
        let expected = (lag + 1) * (inputs + outputs);
        if values.len() != expected {
            return Err(Error::invalid(format!(
                "window length {} does not match (L+1)·w = {expected}",
                values.len()
            )));
        }
        Ok(WindowSegment {
            values,
            inputs,
            outputs,
            lag,
            end_time,
        })
    }

    pub fn w_dim(&self) -> usize {
        self.inputs + self.outputs
    }

    /// Sample `i` of the window, `0 ..= lag`.
    pub fn sample(&self, i: usize) -> Vector {
        let w = self.w_dim();
        self.values.rows(i * w, w).into_owned()
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }
}

/// Block Hankel matrix of depth `L+1` built from one trajectory.
#[derive(Debug, Clone)]
pub struct HankelMatrix {
    pub depth: usize,
    pub width: usize,
    pub matrix: Matrix,
    pub inputs: usize,
    pub outputs: usize,
}

impl HankelMatrix {
    pub fn lag(&self) -> usize {
        self.depth - 1
    }

    pub fn w_dim(&self) -> usize {
        self.inputs + self.outputs
    }

    /// Hankel matrix with every nonzero column scaled to unit length.
    ///
    /// The column span is unchanged, but samples from an exponentially
    /// growing (open-loop unstable) record no longer drown out the early,
    /// informative columns in the SVD.
    pub fn equilibrated(&self) -> Matrix {
        let mut out = self.matrix.clone();
        for mut col in out.column_iter_mut() {
            let n = col.norm();
            if n > 0.0 {
                col /= n;
            }
        }
        out
    }
}

/// Arranges `traj` into a depth-`lag+1` block Hankel matrix.
pub fn build_hankel(traj: &Trajectory, lag: usize) -> Result<HankelMatrix> {
    if lag < 1 {
        return Err(Error::invalid("Hankel depth requires L ≥ 1"));
    }
    let needed = lag + 2;
    if traj.len() < needed {
        return Err(Error::invalid(format!(
            "trajectory has {} samples; L = {lag} requires at least {needed}",
            traj.len()
        )));
    }
    let w = traj.w_dim();
    let depth = lag + 1;
    let width = traj.len() - lag;
    let mut matrix = Matrix::zeros(depth * w, width);
    for j in 0..width {
        for i in 0..depth {
            matrix
                .view_mut((i * w, j), (w, 1))
                .copy_from(&traj.samples.column(i + j));
        }
    }
    Ok(HankelMatrix {
        depth,
        width,
        matrix,
        inputs: traj.inputs,
        outputs: traj.outputs,
    })
}

/// Rank diagnostics for the persistency-of-excitation condition
/// `rank(H) = (L+1)·m + n`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExcitationReport {
    pub rank: usize,
    pub inferred_n: i64,
    pub satisfied: bool,
}

pub fn check_excitation(h: &HankelMatrix, n_hint: Option<usize>, tol_rel: f64) -> Result<ExcitationReport> {
    let sigma = numerics::svd(&h.equilibrated())?.singular_values;
    let rank = numerics::numerical_rank(&sigma, tol_rel);
    let free = h.depth * h.inputs;
    let inferred_n = rank as i64 - free as i64;
    let satisfied = match n_hint {
        Some(n) => rank == free + n,
        None => inferred_n >= 0 && rank < h.width && rank < h.matrix.nrows(),
    };
    Ok(ExcitationReport {
        rank,
        inferred_n,
        satisfied,
    })
}

/// Orthonormal basis `F` of the identified `(L+1)`-step behavior.
#[derive(Debug, Clone)]
pub struct BehaviorBasis {
    pub f: Matrix,
    pub sigma: Vec<f64>,
    pub lag: usize,
    pub inputs: usize,
    pub outputs: usize,
}

/// Intrinsic state `𝔤ₖ` attached to the window ending at `time_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameterizer {
    pub g: Vector,
    pub time_index: i64,
}

impl Parameterizer {
    pub fn new(g: Vector, time_index: i64) -> Self {
        Parameterizer { g, time_index }
    }
}

pub fn extract_basis(h: &HankelMatrix, tol_rel: f64) -> Result<BehaviorBasis> {
    if h.matrix.iter().all(|&x| x == 0.0) {
        return Err(Error::invalid("Hankel matrix is identically zero"));
    }
    let dec = numerics::svd(&h.equilibrated())?;
    let r = dec.rank(tol_rel);
    Ok(BehaviorBasis {
        f: dec.left_vectors.columns(0, r).into_owned(),
        sigma: dec.singular_values[..r].to_vec(),
        lag: h.lag(),
        inputs: h.inputs,
        outputs: h.outputs,
    })
}

impl BehaviorBasis {
    /// Wraps an explicit orthonormal basis (synthetic behaviors, tests).
    pub fn from_orthonormal(f: Matrix, lag: usize, inputs: usize, outputs: usize) -> Result<Self> {
        if f.nrows() != (lag + 1) * (inputs + outputs) {
            return Err(Error::invalid(format!(
                "basis has {} rows, expected (L+1)·w = {}",
                f.nrows(),
                (lag + 1) * (inputs + outputs)
            )));
        }
        let dev = (f.transpose() * &f - Matrix::identity(f.ncols(), f.ncols())).norm();
        if dev > 1e-10 {
            return Err(Error::invalid(format!(
                "basis columns are not orthonormal (‖FᵀF − I‖ = {dev:e})"
            )));
        }
        let sigma = vec![1.0; f.ncols()];
        Ok(BehaviorBasis {
            f,
            sigma,
            lag,
            inputs,
            outputs,
        })
    }

    pub fn rank(&self) -> usize {
        self.f.ncols()
    }

    pub fn w_dim(&self) -> usize {
        self.inputs + self.outputs
    }

    pub fn window_len(&self) -> usize {
        (self.lag + 1) * self.w_dim()
    }

    fn check_segment(&self, seg: &WindowSegment) -> Result<()> {
        if seg.values.len() != self.window_len() || seg.inputs != self.inputs || seg.lag != self.lag {
            return Err(Error::invalid(format!(
                "window (L={}, m={}, p={}, len {}) does not match basis (L={}, m={}, p={}, len {})",
                seg.lag,
                seg.inputs,
                seg.outputs,
                seg.values.len(),
                self.lag,
                self.inputs,
                self.outputs,
                self.window_len()
            )));
        }
        Ok(())
    }

    /// `𝔤ₖ = F†w̃ₖ`, which is `Fᵀw̃ₖ` for orthonormal `F`.
    pub fn state_map(&self, seg: &WindowSegment) -> Result<Parameterizer> {
        self.check_segment(seg)?;
        Ok(Parameterizer::new(self.f.tr_mul(&seg.values), seg.end_time))
    }

    /// `w̃ₖ = F𝔤ₖ`.
    pub fn reconstruct(&self, g: &Parameterizer) -> Result<WindowSegment> {
        if g.g.len() != self.rank() {
            return Err(Error::invalid(format!(
                "parameterizer has length {}, basis rank is {}",
                g.g.len(),
                self.rank()
            )));
        }
        WindowSegment::new(&self.f * &g.g, self.inputs, self.outputs, self.lag, g.time_index)
    }

    /// `‖(I − FFᵀ)w̃‖₂`: distance of a window from the identified behavior.
    pub fn membership_residual(&self, seg: &WindowSegment) -> Result<f64> {
        self.check_segment(seg)?;
        let proj = &self.f * self.f.tr_mul(&seg.values);
        Ok((&seg.values - proj).norm())
    }
}

/// Concatenates two trajectories that agree on `overlap` samples, counting
/// the shared samples once.
pub fn weave(past: &Trajectory, future: &Trajectory, overlap: usize) -> Result<Trajectory> {
    if past.inputs != future.inputs || past.outputs != future.outputs {
        return Err(Error::invalid(format!(
            "partition mismatch: ({}, {}) vs ({}, {})",
            past.inputs, past.outputs, future.inputs, future.outputs
        )));
    }
    if overlap > past.len() || overlap > future.len() {
        return Err(Error::invalid(format!(
            "overlap {overlap} exceeds trajectory lengths {} / {}",
            past.len(),
            future.len()
        )));
    }
    let tail = past.samples.columns(past.len() - overlap, overlap);
    let head = future.samples.columns(0, overlap);
    let deviation = (tail - head).amax();
    let scale = tail.amax().max(head.amax()).max(1.0);
    if deviation > 1e-10 * scale {
        return Err(Error::invalid(format!(
            "trajectories disagree on the overlap (max deviation {deviation:e})"
        )));
    }
    let n = past.len() + future.len() - overlap;
    let mut samples = Matrix::zeros(past.w_dim(), n);
    samples.columns_mut(0, past.len()).copy_from(&past.samples);
    samples
        .columns_mut(past.len(), future.len() - overlap)
        .copy_from(&future.samples.columns(overlap, future.len() - overlap));
    Trajectory::new(past.inputs, past.outputs, samples, past.start_time)
}
