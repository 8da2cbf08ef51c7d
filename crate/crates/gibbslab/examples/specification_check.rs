//! Certify by exhaustive enumeration that the Boltzmann kernel family is a
//! specification: resampling an inner volume from the outer kernel leaves it
//! unchanged, for any boundary condition.
//!
//! ```bash
//! cargo run -p gibbslab --example specification_check
//! ```

use gibbslab::{
    check_specification, compose, kernel_config_boundary, pair_potential, CayleyTree,
    Configuration, PairInteraction, Result, DEFAULT_MAX_STATES,
};

fn main() -> Result<()> {
    let tree = CayleyTree::build(2, 3)?;

    for beta in [0.1, 0.5, 1.0] {
        let interaction = PairInteraction::ising(1.0, beta)?;
        let potential = pair_potential(&interaction);
        // a deliberately lopsided boundary on W_3
        let omega = Configuration::new(
            tree.sphere(3)?
                .into_iter()
                .map(|v| (v, if v % 4 == 0 { -1.0 } else { 1.0 })),
        )?;
        let cert = check_specification(&potential, &tree, 2, 1, &omega, 1e-12, DEFAULT_MAX_STATES)?;
        println!(
            "beta = {beta:<4} composition residual = {:.3e}   verdict: {}",
            cert.max_residual,
            if cert.verdict {
                "consistent"
            } else {
                "INCONSISTENT"
            }
        );
    }

    // the identity is not vacuous: corrupt one table entry by 10% and the
    // same comparison rejects it
    let interaction = PairInteraction::ising(1.0, 0.5)?;
    let potential = pair_potential(&interaction);
    let omega = Configuration::constant(tree.sphere(3)?, 1.0)?;
    let direct = kernel_config_boundary(&potential, &tree, 2, &omega, DEFAULT_MAX_STATES)?;
    let composed = compose(&direct, &potential, &tree, 1, DEFAULT_MAX_STATES)?;
    let mode = direct
        .probabilities()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let corrupted = direct.with_weight_scaled(mode, 1.1)?;
    println!(
        "corrupted table residual    = {:.3e}   (rejected as expected)",
        composed.max_abs_deviation(&corrupted)?
    );

    Ok(())
}
