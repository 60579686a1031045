// Stability of autonomous behaviors decided from data, with a Lyapunov
// certificate when stable.

use anyhow::ensure;
use nalgebra::dmatrix;
use paramstate::analysis::{autonomous_stability, build_transition, stability_lmi_min_eigenvalue};
use paramstate::behavior::{build_hankel, extract_basis, Trajectory};
use paramstate::numerics::{Matrix, DEFAULT_TOL};

fn free_response(a: &Matrix, steps: usize) -> anyhow::Result<Trajectory> {
    let c = dmatrix![1.0, 0.5];
    let mut x = dmatrix![1.0; -0.7];
    let mut y = Matrix::zeros(1, steps);
    for k in 0..steps {
        y.set_column(k, &(&c * &x).column(0));
        x = a * x;
    }
    Ok(Trajectory::from_io(&Matrix::zeros(0, steps), &y, 0)?)
}

pub fn run_example() -> anyhow::Result<()> {
    let cases = [
        ("damped rotation", dmatrix![0.6, -0.5; 0.5, 0.6], true),
        ("growing mode", dmatrix![1.1, 0.3; 0.0, 0.4], false),
    ];
    for (name, a, expected) in cases {
        let data = free_response(&a, 20)?;
        let basis = extract_basis(&build_hankel(&data, 2)?, DEFAULT_TOL)?;
        let model = build_transition(&basis, DEFAULT_TOL)?;
        let report = autonomous_stability(&model)?;
        print!(
            "{name}: rank {}, spectral radius {:.4}, stable: {}",
            model.rank(),
            report.spectrum.spectral_radius,
            report.stable
        );
        if let Some(m) = &report.certificate {
            print!(", certificate LMI min eigenvalue {:.3e}", stability_lmi_min_eigenvalue(&model.a, m)?);
        }
        println!();
        ensure!(report.stable == expected);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
