//! Solve the homogeneous boundary-law equation h = k f(h, theta) on either
//! side of the bifurcation and classify the fixed points.
//!
//! ```bash
//! cargo run -p gibbslab --example boundary_law_solutions
//! ```

use gibbslab::{critical_theta, ising_f, solve_homogeneous, IsingParameters, Result};

fn main() -> Result<()> {
    let k = 2;
    println!(
        "critical theta for k = {k}: {} (beta_c = {:.7} at J = 1)",
        critical_theta(k)?,
        0.5f64.atanh()
    );
    println!();

    for theta in [0.3, 0.49, 0.51, 0.8] {
        let report = solve_homogeneous(k, theta, 1e-12)?;
        println!(
            "theta = {theta:<5} k*theta = {:<5.2} solutions: {:?}",
            k as f64 * theta,
            report.solutions
        );
        for (h, s) in report.solutions.iter().zip(report.stability.iter()) {
            println!("    h = {h:>12.8}  {s:?}");
        }
        if report.close_roots_warning {
            println!("    (warning: roots closer than ten grid cells)");
        }
    }

    // the fixed points really satisfy h = k f(h, theta)
    let theta = 0.8;
    let report = solve_homogeneous(k, theta, 1e-13)?;
    let h_star = report.solutions[2];
    println!(
        "\nresidual of the positive branch: |h* - 2 f(h*)| = {:.3e}",
        (h_star - 2.0 * ising_f(h_star, theta)?).abs()
    );

    // theta is tied to (J, beta) through a machine-validated identity
    let params = IsingParameters::new(1.0, theta.atanh())?;
    println!(
        "J = 1, beta = atanh(0.8) = {:.6} gives theta = {:.6}",
        theta.atanh(),
        params.theta()
    );

    Ok(())
}
