// Identify the benchmark plant's behavior from one data set and check
// that fresh trajectories lie in it.

use anyhow::ensure;
use paramstate::behavior::{build_hankel, check_excitation, extract_basis};
use paramstate::numerics::DEFAULT_TOL;
use paramstate::plant::{generate_excitation, realize, simulate_open, TransferMatrix};

pub fn run_example() -> anyhow::Result<()> {
    let plant = realize(&TransferMatrix::benchmark_2x2())?;
    let lag = 8;

    let data = simulate_open(&plant, &generate_excitation(2, 401, 42, 1.0), None)?.trajectory;
    let hankel = build_hankel(&data, lag)?;
    let report = check_excitation(&hankel, Some(plant.order()), DEFAULT_TOL)?;
    println!(
        "Hankel {}x{}: rank {}, inferred state dimension {}, excitation satisfied: {}",
        hankel.depth, hankel.width, report.rank, report.inferred_n, report.satisfied
    );
    ensure!(report.satisfied, "data are not persistently exciting");

    let basis = extract_basis(&hankel, DEFAULT_TOL)?;
    let fresh = simulate_open(&plant, &generate_excitation(2, 60, 7, 1.0), None)?.trajectory;
    let mut worst: f64 = 0.0;
    for window in fresh.windows(lag) {
        worst = worst.max(basis.membership_residual(&window)? / window.norm());
    }
    println!("worst relative residual over {} fresh windows: {worst:.2e}", fresh.len() - lag);
    ensure!(worst < 1e-8);

    let window = fresh.window(30, lag)?;
    let g = basis.state_map(&window)?;
    let back = basis.reconstruct(&g)?;
    println!(
        "parameterizer of the window ending at t = 30 has {} entries; reconstruction error {:.2e}",
        g.g.len(),
        (&back.values - &window.values).norm()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
