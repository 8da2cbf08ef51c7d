//! Build exact finite-volume Boltzmann kernels of both flavors and inspect
//! their probability tables.
//!
//! ```bash
//! cargo run -p gibbslab --example exact_kernels
//! ```

use gibbslab::{
    kernel_config_boundary, kernel_field_boundary, pair_potential, BoundaryField, CayleyTree,
    Configuration, PairInteraction, Result, SpinSpace, StateSpace, DEFAULT_MAX_STATES,
};

fn main() -> Result<()> {
    let tree = CayleyTree::build(2, 2)?;
    let interaction = PairInteraction::ising(1.0, 0.6)?;

    // configuration boundary: all-plus spins on W_2
    let omega = Configuration::constant(tree.sphere(2)?, 1.0)?;
    let potential = pair_potential(&interaction);
    let kernel = kernel_config_boundary(&potential, &tree, 1, &omega, DEFAULT_MAX_STATES)?;
    println!(
        "configuration-boundary kernel at V_1, beta = 0.6, omega = +1 on W_2 (log Z = {:.6}):",
        kernel.log_z()
    );
    let states = StateSpace::new(&SpinSpace::ising(), &tree.ball(1)?, DEFAULT_MAX_STATES)?;
    for (index, config) in states.iter().enumerate() {
        let spins: Vec<String> = config
            .iter()
            .map(|(_, v)| if v > 0.0 { "+".into() } else { "-".into() })
            .collect();
        println!(
            "  sigma = {}   P = {:.9}",
            spins.join(""),
            kernel.probabilities()[index]
        );
    }
    println!(
        "  total mass = {:.15}",
        kernel.probabilities().iter().sum::<f64>()
    );

    // field boundary: a single real number per sphere vertex instead of spins
    let field = BoundaryField::Homogeneous(0.8);
    let field_kernel = kernel_field_boundary(&interaction, &tree, 1, &field, DEFAULT_MAX_STATES)?;
    println!("\nfield-boundary kernel at V_1 with h = 0.8 on W_1:");
    println!(
        "  most likely state P = {:.9}, log Z = {:.6}",
        field_kernel
            .probabilities()
            .iter()
            .cloned()
            .fold(0.0, f64::max),
        field_kernel.log_z()
    );

    // at infinite temperature every kernel is uniform
    let flat = PairInteraction::ising(1.0, 0.0)?;
    let flat_kernel = kernel_field_boundary(
        &flat,
        &tree,
        2,
        &BoundaryField::Homogeneous(0.0),
        DEFAULT_MAX_STATES,
    )?;
    println!(
        "\nbeta = 0 kernel at V_2: {} states, each P = {:.9}",
        flat_kernel.probabilities().len(),
        flat_kernel.probabilities()[0]
    );

    Ok(())
}
