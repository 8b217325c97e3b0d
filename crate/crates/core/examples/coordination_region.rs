//! Draws the collision region C_12 of cross2 in the coordination space and
//! checks the one-step margin around its diagonal.

use rmtrack::bundled;
use rmtrack::coordspace::CollisionOracle;

fn main() -> rmtrack::Result<()> {
    let inst = bundled::cross2();
    let oracle = CollisionOracle::new(&inst);
    let region = oracle.pairwise_region(0, 1)?;

    println!(
        "rows: robot 1 position 0..={}, columns: robot 2",
        inst.horizon()
    );
    print!("{}", region.to_text_grid());
    println!(
        "cells: {}  components: {}",
        region.count(),
        region.components()
    );
    if let Some((a, b)) = region.centroid() {
        println!("centroid: ({a:.2}, {b:.2})");
    }
    println!(
        "diagonal margin holds: {}",
        oracle.verify_margin().is_empty()
    );

    let wide = inst.with_radius(3.0);
    let report = CollisionOracle::new(&wide).verify_margin();
    println!(
        "with r = 3.0: {} margin violations",
        report.violations().len()
    );
    Ok(())
}
