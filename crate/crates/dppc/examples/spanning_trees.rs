//! The uniform spanning-tree distribution on a complete graph is a DPP
//! over edges — a classic example where the marginal kernel is exact and
//! the tree counts can be cross-checked by brute force.
//!
//! For K_n the kernel has a three-value closed form: 2/n on the diagonal,
//! ±1/n when two edges share exactly one endpoint (sign by orientation),
//! 0 when they are disjoint. Cayley's formula says K_n has n^(n-2)
//! spanning trees, so every marginal times n^(n-2) is an integer tree
//! count.
//!
//! Run with: `cargo run --example spanning_trees`

use dppc::linalg::Subset;
use dppc::{constructions, dpp};

fn main() -> dppc::Result<()> {
    let n = 4;
    let st = constructions::spanning_tree_dpp(n)?;
    println!("complete graph K_{n}: {} edges", st.edges().len());
    println!("{}", st.to_csv());

    // Single-edge marginals: every edge lies in the same fraction of trees.
    let total_trees = (n as f64).powi(n as i32 - 2); // Cayley: n^(n-2) = 16
    let m = st.edges().len();
    let k = st.marginal_dpp();
    println!("total spanning trees: {total_trees}");
    for (idx, &(i, j)) in st.edges().iter().enumerate() {
        let p = dpp::marginal_prob(k, &Subset::new(m, vec![idx])?)?;
        println!(
            "  Pr(edge {i}{j} in tree) = {p:.4}   -> {} trees contain it",
            (p * total_trees).round()
        );
    }

    // A pair marginal: edges 12 and 24 appear together in 3 of 16 trees.
    let e12 = st.edge_index(1, 2).expect("edge exists");
    let e24 = st.edge_index(2, 4).expect("edge exists");
    let pair = dpp::marginal_prob(k, &Subset::new(m, vec![e12, e24])?)?;
    println!("\nPr(edges 12 and 24 both in tree) = {pair} = {}/16", (pair * 16.0).round());

    // The kernel is a projection: trace = n-1 (every tree has n-1 edges).
    let trace: f64 = (0..m).map(|i| st.kernel().get(i, i)).sum();
    println!("trace(K) = {trace} = expected tree size");

    // Larger graphs scale the same way; K_6 has 6^4 = 1296 trees.
    let st6 = constructions::spanning_tree_dpp(6)?;
    let k6 = st6.marginal_dpp();
    let first = st6.edge_index(1, 2).expect("edge exists");
    let p = dpp::marginal_prob(k6, &Subset::new(st6.edges().len(), vec![first])?)?;
    println!("\nK_6: Pr(edge 12 in tree) = {p:.6} -> {} of 1296 trees", (p * 1296.0).round());
    Ok(())
}
