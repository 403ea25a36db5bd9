//! L-ensemble basics: exact assignment probabilities, the normalizer, and
//! conditional queries.
//!
//! An L-ensemble assigns every subset x of a ground set the probability
//! det(L_x) / det(L + I), where L_x is the principal minor of a symmetric
//! PSD kernel L. Diagonal entries measure item quality; off-diagonal
//! entries measure similarity, which *repels*: similar items rarely appear
//! together.
//!
//! Run with: `cargo run --example lensemble_probabilities`

use dppc::linalg::Subset;
use dppc::{dpp, LEnsemble, Matrix};

fn main() -> dppc::Result<()> {
    let l = Matrix::from_rows(&[
        vec![2.0, 1.1, 1.4],
        vec![1.1, 2.5, 0.5],
        vec![1.4, 0.5, 3.0],
    ])?;
    let e = LEnsemble::new(l)?;
    println!("kernel L:\n{}", e.kernel().to_csv());
    println!("normalizer det(L + I) = {}", e.normalizer());

    // Every one of the 2^3 assignments, with the probabilities summing to 1.
    println!("\nassignment  probability");
    let mut total = 0.0;
    for mask in 0u64..1 << e.n() {
        let x = Subset::from_mask(e.n(), mask);
        let p = dpp::prob(&e, &x)?;
        total += p;
        println!("  {}        {p:.6}", x.to_bitstring());
    }
    println!("total: {total:.12}");

    // The assignment (1, 0, 1) — items 0 and 2 selected, item 1 not.
    let x = Subset::new(3, vec![0, 2])?;
    println!(
        "\nPr(X = 101) = det(L_{{0,2}}) / det(L+I) = {}",
        dpp::prob(&e, &x)?
    );

    // Conditioning: how does knowing item 0's state move item 2?
    let given_0 = Subset::new(3, vec![0])?;
    let none = Subset::empty(3);
    println!("\nPr(item 2 | item 0 in,   item 1 out) = {:.6}", dpp::conditional_prob(&e, 2, &given_0)?);
    println!("Pr(item 2 | items 0,1 out)            = {:.6}", dpp::conditional_prob(&e, 2, &none)?);

    // Across all conditioning sets, a generic kernel realizes the maximum
    // possible number of distinct conditional values: 2^(n-1).
    let distinct = dpp::count_distinct_conditionals(&e, 2, dpp::DEFAULT_DISTINCTNESS_TOL)?;
    println!(
        "\ndistinct conditional values for item 2 over all {} conditioning sets: {}",
        1 << (e.n() - 1),
        distinct
    );

    // A diagonal kernel by contrast is independent: a single value.
    let diag = LEnsemble::new(Matrix::from_rows(&[
        vec![0.5, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 3.0],
    ])?)?;
    let flat = dpp::count_distinct_conditionals(&diag, 2, dpp::DEFAULT_DISTINCTNESS_TOL)?;
    println!("same count for a diagonal (independent) kernel: {flat}");

    // Random kernels for experiments are one call away.
    let r = dpp::random_lensemble(5, 1.0, 42)?;
    println!("\nrandom 5-item kernel, Pr(empty) = {:.6}", dpp::prob(&r, &Subset::empty(5))?);
    Ok(())
}
