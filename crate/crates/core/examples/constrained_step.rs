// Economic steps under a Lyapunov decrease constraint: the cost rewards
// growth, the constraint still forces the certificate down.

use anyhow::ensure;
use paramstate::analysis::build_transition;
use paramstate::behavior::{build_hankel, extract_basis};
use paramstate::numerics::{Matrix, Vector, DEFAULT_TOL};
use paramstate::plant::{generate_excitation, realize, simulate_open, TransferMatrix};
use paramstate::synthesis::{constrained_step, decrease_block_min_eigenvalue, synthesize};

pub fn run_example() -> anyhow::Result<()> {
    let plant = realize(&TransferMatrix::benchmark_2x2())?;
    let data = simulate_open(&plant, &generate_excitation(2, 401, 42, 1.0), None)?.trajectory;
    let basis = extract_basis(&build_hankel(&data, 8)?, DEFAULT_TOL)?;
    let model = build_transition(&basis, DEFAULT_TOL)?;
    let ctrl = synthesize(&model)?;

    let r = model.rank();
    let cost_h = -Matrix::identity(r, r);
    let cost_f = Vector::zeros(r);
    let eps = 1e-2;
    let mut g = basis.state_map(&data.window(20, 8)?)?;
    for k in 1..=10 {
        let step = constrained_step(&ctrl, &g, &cost_h, &cost_f, eps)?;
        let before = ctrl.lyapunov_value(&g.g);
        let after = ctrl.lyapunov_value(&step.g_next.g);
        let block = decrease_block_min_eigenvalue(&ctrl, &g.g, &step.g_next.g)?;
        println!(
            "step {k:2}: V {before:.4e} -> {after:.4e} (ratio {:.6}), multiplier {:.3e}, block min eigenvalue {block:.2e}",
            after / before,
            step.multiplier
        );
        ensure!(after <= (1.0 - eps) * before && block > 0.0);
        g = step.g_next;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
