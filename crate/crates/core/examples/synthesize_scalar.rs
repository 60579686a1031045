// Data-driven stabilization of y⁺ = 2y + u, compared with the scalar
// Riccati solution.

use anyhow::ensure;
use nalgebra::{dmatrix, dvector};
use paramstate::analysis::build_transition;
use paramstate::behavior::{build_hankel, extract_basis, Trajectory, WindowSegment};
use paramstate::numerics::DEFAULT_TOL;
use paramstate::plant::{generate_excitation, simulate_closed, simulate_open, PlantRealization, StateSpace};
use paramstate::synthesis::{synthesize_with, SynthesisOptions, Weighting};

pub fn run_example() -> anyhow::Result<()> {
    let plant = PlantRealization::from_state_space(StateSpace::new(
        dmatrix![2.0],
        dmatrix![1.0],
        dmatrix![1.0],
        dmatrix![0.0],
    )?);
    let data = simulate_open(&plant, &generate_excitation(1, 30, 1, 1.0), None)?.trajectory;
    let basis = extract_basis(&build_hankel(&data, 1)?, DEFAULT_TOL)?;
    let model = build_transition(&basis, DEFAULT_TOL)?;

    // cost Σ y² + u²: the scalar Riccati pole is 2/(3+√5)
    let opts = SynthesisOptions::energy_optimal(Weighting::Output {
        output_weight: 1.0,
        input_weight: 1.0,
    });
    let ctrl = synthesize_with(&model, &opts)?;
    let pole = 2.0 / (3.0 + 5f64.sqrt());
    println!(
        "closed-loop spectral radius {:.9} (Riccati pole {pole:.9}), LMI min eigenvalue {:.3e}",
        ctrl.closed_loop_radius()?,
        ctrl.verify_lmi()?
    );

    let window = WindowSegment::new(dvector![0.0, 1.0, 0.0, 2.0], 1, 1, 1, 1)?;
    println!("input after (u, y) = (0, 1), (0, 2): {:.6}", ctrl.control_from_trajectory(&window)?[0]);

    let init = Trajectory::new(1, 1, dmatrix![0.0, 0.0; 1.0, 2.0], 0)?;
    let run = simulate_closed(&plant, &ctrl, &init, 20)?;
    let traj = &run.trajectory;
    let ratio = traj.sample(15).norm() / traj.sample(14).norm();
    println!("observed decay ratio {ratio:.9}");
    ensure!((ratio - pole).abs() < 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
