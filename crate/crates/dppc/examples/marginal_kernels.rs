//! Marginal kernels: K = L(L+I)^-1, inclusion–exclusion evidence queries,
//! and the negative-dependence signature of determinantal distributions.
//!
//! Where an L-ensemble gives probabilities of *complete* assignments, the
//! marginal kernel K answers subset-inclusion queries directly:
//! Pr(A ⊆ X) = det(K_A). Mixed queries (these items in, those items out)
//! reduce to an alternating sum over the excluded set.
//!
//! Run with: `cargo run --example marginal_kernels`

use dppc::linalg::Subset;
use dppc::{dpp, LEnsemble, Matrix};

fn main() -> dppc::Result<()> {
    let l = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 5.0]])?;
    let e = LEnsemble::new(l)?;
    let k = dpp::marginal_kernel(&e)?;
    println!("L:\n{}", e.kernel().to_csv());
    println!("K = L(L+I)^-1:\n{}", k.kernel().to_csv());

    // Diagonal entries are single-item marginals.
    for i in 0..2 {
        let a = Subset::new(2, vec![i])?;
        println!("Pr(item {i} ∈ X) = det(K_{{{i}}}) = {}", dpp::marginal_prob(&k, &a)?);
    }

    // Positive and negative evidence together.
    let empty = Subset::empty(2);
    let both = Subset::full(2);
    let item0 = Subset::new(2, vec![0])?;
    let item1 = Subset::new(2, vec![1])?;
    println!("\nPr(X ∩ {{0,1}} = ∅)      = {}", dpp::general_marginal(&k, &empty, &both)?);
    println!("Pr(0 ∈ X and 1 ∉ X)    = {}", dpp::general_marginal(&k, &item0, &item1)?);

    // The four exclusive cells partition probability 1.
    let cells = [
        dpp::general_marginal(&k, &empty, &both)?,
        dpp::general_marginal(&k, &item0, &item1)?,
        dpp::general_marginal(&k, &item1, &item0)?,
        dpp::general_marginal(&k, &both, &empty)?,
    ];
    println!("cells sum to {}", cells.iter().sum::<f64>());

    // Negative dependence: Pr(i and j both in) ≤ Pr(i in)·Pr(j in), always.
    let r = dpp::random_lensemble(6, 1.0, 7)?;
    let rk = dpp::marginal_kernel(&r)?;
    println!("\nnegative dependence on a random 6-item kernel:");
    for (i, j) in [(0usize, 1usize), (2, 5), (3, 4)] {
        let pi = dpp::marginal_prob(&rk, &Subset::new(6, vec![i])?)?;
        let pj = dpp::marginal_prob(&rk, &Subset::new(6, vec![j])?)?;
        let pij = dpp::marginal_prob(&rk, &Subset::new(6, vec![i, j])?)?;
        println!(
            "  Pr({i},{j} ∈ X) = {pij:.6} ≤ Pr({i} ∈ X)·Pr({j} ∈ X) = {:.6}",
            pi * pj
        );
        assert!(pij <= pi * pj + 1e-12);
    }
    Ok(())
}
