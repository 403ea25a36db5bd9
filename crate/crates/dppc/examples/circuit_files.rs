//! Probabilistic circuits end to end: build one with the arena builder,
//! save and reload it in the `pc v1` text format, analyze its structure,
//! and run evaluation, marginal, and MAP queries.
//!
//! A circuit is a DAG of weighted sums and products over literal leaves
//! (a variable or its negation). Structural properties decide which
//! queries are tractable: decomposability buys marginals, determinism on
//! top buys exact MAP.
//!
//! Run with: `cargo run --example circuit_files`

use dppc::circuit::DeterminismCheck;
use dppc::linalg::Subset;
use dppc::{Circuit, CircuitBuilder};

fn main() -> dppc::Result<()> {
    // Build f(x0, x1) = 0.3·(x0·x1) + 0.7·(x̄0·x̄1): a mixture of
    // "both on" and "both off" with weights 0.3/0.7.
    let mut b = CircuitBuilder::new(2);
    let x0 = b.leaf(0, true);
    let x1 = b.leaf(1, true);
    let nx0 = b.leaf(0, false);
    let nx1 = b.leaf(1, false);
    let on = b.product(vec![x0, x1]);
    let off = b.product(vec![nx0, nx1]);
    let root = b.sum(vec![(0.3, on), (0.7, off)]);
    let c = b.build(root);

    // The text format round-trips bit-exactly.
    let text = c.serialize();
    println!("serialized circuit:\n{text}");
    let c2 = Circuit::parse(&text)?;
    assert_eq!(c, c2);

    // Structure: smooth (every sum child mentions both vars), decomposable
    // (product children touch disjoint vars), deterministic (at most one
    // nonzero sum child per assignment).
    let report = c.analyze();
    println!("decomposable: {}", report.decomposable);
    println!("smooth:       {}", report.smooth);
    match report.deterministic {
        DeterminismCheck::Verified(v) => println!("deterministic: {v} (verified exhaustively)"),
        DeterminismCheck::Skipped => println!("deterministic: check skipped (too many variables)"),
    }
    println!(
        "{} nodes, {} edges, {} sum parameters",
        report.node_count, report.edge_count, report.parameter_count
    );

    // Queries.
    println!("\nf(11) = {}", c.evaluate(&Subset::full(2))?);
    println!("f(10) = {}", c.evaluate(&Subset::new(2, vec![0])?)?);
    let ones = Subset::new(2, vec![1])?;
    let none = Subset::empty(2);
    println!("Pr(x1 = 1) = {}", c.marginal(&ones, &none)?);
    let (argmax, score) = c.map_inference()?;
    println!("MAP assignment: {} with probability {score}", argmax.to_bitstring());

    // A non-smooth circuit: f = x0 + x1 leaves each sum child scoped to a
    // different variable. Marginals still work (the query smooths an
    // internal copy first), and `smooth_transform` makes the fix explicit.
    let mut b = CircuitBuilder::new(2);
    let x0 = b.leaf(0, true);
    let x1 = b.leaf(1, true);
    let root = b.sum(vec![(1.0, x0), (1.0, x1)]);
    let lopsided = b.build(root);
    println!("\nlopsided circuit smooth? {}", lopsided.is_smooth());
    let p = lopsided.marginal(&Subset::new(2, vec![0])?, &Subset::empty(2))?;
    println!("Pr(x0 = 1) under x0 + x1: {p}");
    let fixed = lopsided.smooth_transform();
    println!("after smooth_transform: smooth? {}", fixed.is_smooth());
    println!("same query on the smoothed circuit: {}", fixed.marginal(&Subset::new(2, vec![0])?, &Subset::empty(2))?);

    // Files: anything the library builds, the CLI and other processes can
    // read back.
    let dir = std::env::temp_dir();
    let path = dir.join("mixture_demo.pc");
    std::fs::write(&path, c.serialize())?;
    let reloaded = Circuit::parse(&std::fs::read_to_string(&path)?)?;
    assert_eq!(c, reloaded);
    println!("\nwrote and reloaded {}", path.display());
    std::fs::remove_file(&path)?;
    Ok(())
}
