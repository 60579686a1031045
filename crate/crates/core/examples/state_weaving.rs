// Two trajectories that share one window share the parameterizer there,
// and may be spliced at that point.

use anyhow::ensure;
use paramstate::behavior::{build_hankel, extract_basis, weave};
use paramstate::numerics::{Vector, DEFAULT_TOL};
use paramstate::plant::{generate_excitation, realize, simulate_open, TransferMatrix};

pub fn run_example() -> anyhow::Result<()> {
    let plant = realize(&TransferMatrix::benchmark_2x2())?;
    let sys = &plant.system;
    let lag = 8;
    let data = simulate_open(&plant, &generate_excitation(2, 401, 42, 1.0), None)?.trajectory;
    let basis = extract_basis(&build_hankel(&data, lag)?, DEFAULT_TOL)?;

    // trajectory A from a nonzero state
    let x0 = Vector::from_fn(plant.order(), |i, _| 0.3 - 0.1 * i as f64);
    let run_a = sys.simulate(&generate_excitation(2, 30, 11, 1.0), &x0)?;
    let a = &run_a.trajectory;
    let k = 20;

    // trajectory B replays A's window ending at k−1, then diverges
    let start = k - 1 - lag;
    let x_start = run_a.state_log.as_ref().expect("state log").column(start).into_owned();
    let mut u_b = generate_excitation(2, lag + 1 + 15, 12, 1.0);
    u_b.columns_mut(0, lag + 1).copy_from(&a.input_part().columns(start, lag + 1));
    let b = sys.simulate(&u_b, &x_start)?.trajectory;

    let g_a = basis.state_map(&a.window(k - 1, lag)?)?;
    let g_b = basis.state_map(&b.window(lag, lag)?)?;
    println!("parameterizer mismatch at k-1: {:.2e}", (&g_a.g - &g_b.g).norm());

    let woven = weave(&a.slice(0, k)?, &b, lag + 1)?;
    let mut worst: f64 = 0.0;
    for window in woven.windows(lag) {
        worst = worst.max(basis.membership_residual(&window)? / window.norm());
    }
    println!("woven trajectory: {} samples, worst relative residual {worst:.2e}", woven.len());
    ensure!(worst < 1e-8);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
