//! Correlation -> distance -> single-linkage tree -> seriation on a small
//! hand-written correlation matrix with two obvious groups.
//!
//!     cargo run --example distance_and_linkage

use hrplab::estimation::{correlation_distance, distance_matrix, CorrelationMatrix};
use hrplab::hcluster::{quasi_diagonalize, single_linkage};
use nalgebra::DMatrix;

fn main() -> hrplab::Result<()> {
    for rho in [1.0, 0.5, 0.0, -0.5, -1.0] {
        println!("rho {rho:>5}: d = {:.4}", correlation_distance(rho));
    }

    let assets: Vec<String> = ["bank", "oil", "insurer", "driller", "broker"]
        .map(String::from)
        .to_vec();
    #[rustfmt::skip]
    let rho = DMatrix::from_row_slice(5, 5, &[
        1.0, 0.2, 0.8, 0.1, 0.7,
        0.2, 1.0, 0.3, 0.9, 0.2,
        0.8, 0.3, 1.0, 0.2, 0.6,
        0.1, 0.9, 0.2, 1.0, 0.1,
        0.7, 0.2, 0.6, 0.1, 1.0,
    ]);
    let dist = distance_matrix(&CorrelationMatrix {
        assets: assets.clone(),
        matrix: rho,
    });
    let tree = single_linkage(&dist)?;

    println!("\nmerges (node: left + right @ height):");
    let name = |i: usize| {
        if i < assets.len() {
            assets[i].clone()
        } else {
            format!("#{i}")
        }
    };
    for m in &tree.merges {
        println!(
            "  #{}: {} + {} @ {:.4}",
            m.node,
            name(m.left),
            name(m.right),
            m.distance
        );
    }

    let order = quasi_diagonalize(&tree)?;
    let names: Vec<&str> = order.order.iter().map(|&i| assets[i].as_str()).collect();
    println!("\nseriation: {}", names.join(", "));
    Ok(())
}
