#![allow(dead_code)]

use nalgebra::{dmatrix, DMatrix, DVector};
use paramstate::analysis::{build_transition, TransitionModel};
use paramstate::behavior::{build_hankel, extract_basis, BehaviorBasis, Trajectory};
use paramstate::plant::{generate_excitation, realize, simulate_open, PlantRealization, StateSpace, TransferMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| 2.0 * rng.random::<f64>() - 1.0)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| 2.0 * rng.random::<f64>() - 1.0)
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    uniform(rng, n, n).qr().q()
}

pub fn benchmark_plant() -> PlantRealization {
    realize(&TransferMatrix::benchmark_2x2()).unwrap()
}

/// Open-loop benchmark data, `samples + 1` points from rest.
pub fn benchmark_data(seed: u64, samples: usize) -> Trajectory {
    let pr = benchmark_plant();
    simulate_open(&pr, &generate_excitation(2, samples + 1, seed, 1.0), None)
        .unwrap()
        .trajectory
}

pub fn model_from(traj: &Trajectory, lag: usize) -> (BehaviorBasis, TransitionModel) {
    let basis = extract_basis(&build_hankel(traj, lag).unwrap(), TOL).unwrap();
    let tm = build_transition(&basis, TOL).unwrap();
    (basis, tm)
}

pub fn benchmark_model() -> (BehaviorBasis, TransitionModel) {
    model_from(&benchmark_data(42, 400), 8)
}

/// `y⁺ = 2y + u`.
pub fn scalar_plant() -> PlantRealization {
    PlantRealization::from_state_space(
        StateSpace::new(dmatrix![2.0], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]).unwrap(),
    )
}

pub fn scalar_model() -> (BehaviorBasis, TransitionModel) {
    let pr = scalar_plant();
    let run = simulate_open(&pr, &generate_excitation(1, 30, 1, 1.0), None).unwrap();
    model_from(&run.trajectory, 1)
}

/// Real matrix with eigenvalue moduli drawn from `[lo, hi]`, plus the
/// largest modulus actually planted.
pub fn matrix_with_radius(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> (DMatrix<f64>, f64) {
    let mut block = DMatrix::zeros(n, n);
    let mut i = 0;
    let mut rho: f64 = 0.0;
    while i < n {
        let r = lo + (hi - lo) * rng.random::<f64>();
        if i + 1 < n && rng.random::<bool>() {
            let theta = 0.2 + 2.5 * rng.random::<f64>();
            block[(i, i)] = r * theta.cos();
            block[(i, i + 1)] = -r * theta.sin();
            block[(i + 1, i)] = r * theta.sin();
            block[(i + 1, i + 1)] = r * theta.cos();
            i += 2;
        } else {
            block[(i, i)] = if rng.random::<bool>() { r } else { -r };
            i += 1;
        }
        rho = rho.max(r);
    }
    let q = random_orthogonal(rng, n);
    (&q * block * q.transpose(), rho)
}

/// Autonomous output data `y = Cx`, `x⁺ = Ax` from a random state.
pub fn autonomous_data(rng: &mut ChaCha8Rng, a: &DMatrix<f64>, len: usize) -> Trajectory {
    let n = a.nrows();
    let c = uniform(rng, 1, n) + DMatrix::from_element(1, n, 0.5);
    let mut x = uniform_vec(rng, n) + DVector::from_element(n, 0.5);
    let mut y = DMatrix::zeros(1, len);
    for k in 0..len {
        y.set_column(k, &(&c * &x));
        x = a * x;
    }
    Trajectory::from_io(&DMatrix::zeros(0, len), &y, 0).unwrap()
}
