//! Build Cayley tree truncations and inspect their structure: spheres,
//! balls, successor sets and distances.
//!
//! ```bash
//! cargo run -p gibbslab --example tree_info
//! ```

use gibbslab::{CayleyTree, Result};

fn main() -> Result<()> {
    for (k, depth) in [(2usize, 3usize), (3, 2), (1, 4)] {
        let tree = CayleyTree::build(k, depth)?;
        println!("order k = {k}, depth {depth}");
        for n in 0..=depth {
            println!(
                "  |W_{n}| = {:>4}   |V_{n}| = {:>4}",
                tree.sphere_size(n)?,
                tree.ball_size(n)?
            );
        }
        println!();
    }

    let tree = CayleyTree::build(2, 3)?;
    println!("rooted orientation of the k = 2 tree:");
    println!("  root successors:      {:?}", tree.successors(0)?);
    let w1 = tree.sphere(1)?;
    println!(
        "  successors of {}:      {:?}",
        w1[0],
        tree.successors(w1[0])?
    );
    println!("  parent of vertex 5:   {:?}", tree.parent(5)?);

    // distances are path lengths through the unique tree geodesic
    let w3 = tree.sphere(3)?;
    println!(
        "  d(root, {})          = {}",
        w3[0],
        tree.distance(0, w3[0])?
    );
    println!(
        "  d({}, {})            = {}",
        w1[0],
        w1[1],
        tree.distance(w1[0], w1[1])?
    );
    println!(
        "  d({}, {})           = {}",
        w3[0],
        *w3.last().unwrap(),
        tree.distance(w3[0], *w3.last().unwrap())?
    );

    Ok(())
}
