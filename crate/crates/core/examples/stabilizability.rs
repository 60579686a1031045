// Controllable/uncontrollable split by the orthogonal staircase, on
// matrices and on data.

use anyhow::ensure;
use nalgebra::{dmatrix, dvector};
use paramstate::analysis::{build_transition, stabilizability};
use paramstate::behavior::{build_hankel, extract_basis};
use paramstate::numerics::{Matrix, DEFAULT_TOL};
use paramstate::plant::{generate_excitation, StateSpace};
use paramstate::synthesis::synthesize;
use paramstate::Error;

pub fn run_example() -> anyhow::Result<()> {
    let b = dmatrix![1.0; 0.0];
    for a in [dmatrix![2.0, 0.0; 0.0, 0.5], dmatrix![0.5, 0.0; 0.0, 2.0]] {
        let rep = stabilizability(&a, &b, DEFAULT_TOL)?;
        println!(
            "A = diag({}, {}): stabilizable {}, uncontrollable modes {:?}",
            a[(0, 0)],
            a[(1, 1)],
            rep.stabilizable,
            rep.uncontrollable_eigs.iter().map(|z| z.re).collect::<Vec<_>>()
        );
    }

    // the unstabilizable pair seen through data only
    let plant = StateSpace::new(dmatrix![0.5, 0.0; 0.0, 2.0], b, Matrix::identity(2, 2), Matrix::zeros(2, 1))?;
    let data = plant
        .simulate(&generate_excitation(1, 16, 5, 1.0), &dvector![0.0, 1.0])?
        .trajectory;
    let basis = extract_basis(&build_hankel(&data, 2)?, DEFAULT_TOL)?;
    let model = build_transition(&basis, DEFAULT_TOL)?;
    match synthesize(&model) {
        Err(Error::NoSolution(msg)) => println!("synthesis refused: {msg}"),
        other => anyhow::bail!("expected a refusal, got {other:?}"),
    }
    ensure!(!model.stabilizable(DEFAULT_TOL)?.stabilizable);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
