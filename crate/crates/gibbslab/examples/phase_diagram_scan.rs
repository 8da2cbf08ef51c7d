//! Scan theta across the phase transition and locate the bifurcation point
//! by bisecting the solution count.
//!
//! ```bash
//! cargo run -p gibbslab --example phase_diagram_scan
//! ```

use gibbslab::{critical_theta, solve_homogeneous, Result};

fn main() -> Result<()> {
    let k = 2;
    println!("theta      solutions   h_max");
    for i in 0..=12 {
        let theta = 0.38 + i as f64 * 0.02;
        let report = solve_homogeneous(k, theta, 1e-12)?;
        let h_max = report.solutions.last().copied().unwrap_or(0.0);
        println!("{theta:<10.2} {:<11} {h_max:.8}", report.solutions.len());
    }

    // bisect the count function to the transition point
    for k in 2..=5usize {
        let count = |theta: f64| solve_homogeneous(k, theta, 1e-10).unwrap().solutions.len();
        let target = critical_theta(k)?;
        let (mut lo, mut hi) = (target - 0.05, target + 0.05);
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if count(mid) >= 3 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let found = 0.5 * (lo + hi);
        println!(
            "k = {k}: transition located at theta = {found:.8} (1/k = {target:.8}, error {:.1e})",
            (found - target).abs()
        );
    }

    Ok(())
}
