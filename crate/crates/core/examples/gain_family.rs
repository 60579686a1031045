// Every gain keeping a quadratic form non-negative, and the members that
// keep a given certificate strictly decreasing.

use anyhow::ensure;
use nalgebra::{dmatrix, dvector};
use paramstate::analysis::build_transition;
use paramstate::behavior::{build_hankel, extract_basis};
use paramstate::numerics::{self, Matrix, Vector, DEFAULT_TOL};
use paramstate::plant::{generate_excitation, realize, simulate_open, TransferMatrix};
use paramstate::synthesis::{gain_family, stabilizing_gain_family, synthesize, GainFamilyParams};

pub fn run_example() -> anyhow::Result<()> {
    // 3v₁² + 2v₁v₂ − v₂² ≥ 0
    let params = GainFamilyParams {
        qf: dmatrix![3.0],
        sf: dmatrix![1.0],
        rf: dmatrix![1.0],
    };
    for u in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let k = gain_family(&params, &dmatrix![u])?;
        let v = dvector![1.0];
        println!("U = {u:+.1}: K = {:+.4}, form at v1 = 1: {:.4}", k[(0, 0)], params.form(&v, &(&k * &v)));
    }

    let plant = realize(&TransferMatrix::benchmark_2x2())?;
    let data = simulate_open(&plant, &generate_excitation(2, 401, 42, 1.0), None)?.trajectory;
    let model = build_transition(&extract_basis(&build_hankel(&data, 8)?, DEFAULT_TOL)?, DEFAULT_TOL)?;
    let ctrl = synthesize(&model)?;
    for scale in [0.0, 0.5, 0.9] {
        let u = Matrix::from_fn(model.free_dim(), model.rank(), |i, j| ((i + 2 * j) as f64).sin());
        let u = &u * (scale / numerics::spectral_norm(&u)?);
        let k = stabilizing_gain_family(&ctrl, &u)?;
        let a_cl = &model.a + &model.fz * &k;
        let g = Vector::from_element(model.rank(), 1.0);
        let drop = ctrl.lyapunov_value(&g) - ctrl.lyapunov_value(&(&a_cl * &g));
        let rho = numerics::spectral_radius(&a_cl)?;
        println!("‖U‖ = {scale:.1}: closed-loop spectral radius {rho:.4}, certificate drop {drop:.3e}");
        ensure!(rho < 1.0 && drop > 0.0);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
