//! The alpha x beta intensity-budget table for g = 0.2.
//!
//! cargo run --example intensity_budget

use tsqc::analytics::{intensity_budget_table, table1_feasible};

fn main() -> tsqc::Result<()> {
    let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 100.0).collect();
    let rows = intensity_budget_table(0.2, &grid, &grid)?;
    print!("alpha\\beta");
    for b in &grid {
        print!("{b:>7}");
    }
    println!();
    for row in rows {
        print!("{:<10}", row.alpha);
        for cell in row.cells {
            match cell {
                Some(v) => print!("{v:>7.3}"),
                None => print!("{:>7}", ""),
            }
        }
        println!();
    }
    println!(
        "alpha 0.05: beta 0.03 feasible = {}, beta 0.04 feasible = {}",
        table1_feasible(0.05, 0.03, 0.2)?,
        table1_feasible(0.05, 0.04, 0.2)?
    );
    Ok(())
}
