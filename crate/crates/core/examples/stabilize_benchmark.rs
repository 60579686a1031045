// End to end on the unstable 2×2 benchmark: collect, synthesize, close the
// loop and plot. The SVG lands in the system temp directory unless a path
// is given as the first argument.

use anyhow::ensure;
use paramstate::analysis::build_transition;
use paramstate::behavior::{build_hankel, extract_basis};
use paramstate::numerics::DEFAULT_TOL;
use paramstate::plant::{generate_excitation, realize, simulate_closed, simulate_open, TransferMatrix};
use paramstate::plot::trajectory_svg;
use paramstate::synthesis::synthesize;

pub fn run_example() -> anyhow::Result<()> {
    let plant = realize(&TransferMatrix::benchmark_2x2())?;
    let lag = 8;
    let data = simulate_open(&plant, &generate_excitation(2, 401, 42, 1.0), None)?.trajectory;
    let basis = extract_basis(&build_hankel(&data, lag)?, DEFAULT_TOL)?;
    let model = build_transition(&basis, DEFAULT_TOL)?;
    let ctrl = synthesize(&model)?;
    println!(
        "rank {}, open-loop spectral radius {:.3}, closed-loop {:.3}",
        model.rank(),
        model.spectrum()?.spectral_radius,
        ctrl.closed_loop_radius()?
    );

    let init = data.slice(0, lag + 1)?;
    let run = simulate_closed(&plant, &ctrl, &init, 60)?;
    let traj = &run.trajectory;
    let initial = init.max_abs();
    let late = traj.slice(lag + 50, 11)?.max_abs();
    println!("max |w| over steps 50-60 relative to the initial window: {:.2e}", late / initial);
    ensure!(late <= 1e-6 * initial);

    let path = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("paramstate_benchmark.svg"));
    std::fs::write(&path, trajectory_svg(traj, "benchmark closed loop"))?;
    println!("plot written to {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
