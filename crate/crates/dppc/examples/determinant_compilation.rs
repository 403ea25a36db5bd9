//! Compiling determinants into circuits — and why the result cannot be
//! both small and well-structured.
//!
//! Two constructions:
//!
//! 1. `det_circuit(n)`: a division-free circuit over n² matrix-entry
//!    variables whose value at any matrix equals its determinant (built
//!    from the clow-sequence dynamic program). Polynomially many nodes,
//!    but inherently non-decomposable with negative weights.
//! 2. `symbolic_kernel_compile`: fix a kernel L and compile the map
//!    x ↦ det(L_x) over n indicator variables. Evaluating an assignment
//!    gives the unnormalized L-ensemble probability.
//!
//! The witness kernel at the end shows the obstruction is real: a single
//! kernel can have 2^(n-1) distinct conditional values, which no
//! deterministic circuit of subexponential size can realize.
//!
//! Run with: `cargo run --example determinant_compilation`

use dppc::linalg::{self, Subset};
use dppc::{constructions, dpp, LEnsemble, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dppc::Result<()> {
    // --- 1. The general determinant circuit, audited on random matrices.
    let n = 4;
    let c = constructions::det_circuit(n)?;
    println!("det circuit for {n}x{n} matrices: {} nodes, {} edges", c.node_count(), c.edge_count());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let data: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let m = Matrix::new(n, n, data)?;
        let via_circuit = c.evaluate_config(&constructions::det_input_config(&m)?)?;
        let via_lu = linalg::det(&m)?;
        worst = worst.max((via_circuit - via_lu).abs());
        println!("  circuit {via_circuit:+.12}  vs  LU {via_lu:+.12}");
    }
    println!("worst absolute gap over 5 random matrices: {worst:.3e}");

    // --- 2. Symbolic compilation of one fixed kernel.
    let l = Matrix::from_rows(&[
        vec![2.0, 1.1, 1.4],
        vec![1.1, 2.5, 0.5],
        vec![1.4, 0.5, 3.0],
    ])?;
    let e = LEnsemble::new(l)?;
    let sk = constructions::symbolic_kernel_compile(&e);
    println!("\nsymbolic circuit for the 3-item kernel: {} nodes", sk.node_count());
    for mask in 0u64..8 {
        let x = Subset::from_mask(3, mask);
        let minor = sk.evaluate(&x)?;
        println!("  det(L_{{{}}}) = {minor:.4}", x.to_bitstring());
    }
    // Setting every literal to 1 sums all minors: det(L + I).
    let z = sk.evaluate_config(&dppc::LeafConfig::all_ones(3))?;
    println!("all-ones configuration = det(L+I) = {z} (normalizer {})", e.normalizer());

    // The price of generality, visible in the structural report:
    let report = sk.analyze();
    println!(
        "decomposable={} deterministic={:?} negative weights={}",
        report.decomposable, report.deterministic, report.has_negative_parameter
    );

    // --- 3. The expressiveness witness.
    let wn = 8;
    let q = 3;
    let l = constructions::witness_kernel(wn, q)?;
    let distinct = dpp::count_distinct_conditionals(
        &LEnsemble::new(l)?,
        q,
        dpp::DEFAULT_DISTINCTNESS_TOL,
    )?;
    println!(
        "\nwitness kernel on {wn} items: {} distinct conditionals for item {q} (max possible {})",
        distinct,
        1 << (wn - 1)
    );
    // Each augmented minor has a closed form — an integer code that
    // uniquely identifies its conditioning set.
    for mask in [0u64, 1, 5] {
        let b = Subset::from_mask(wn, mask << 4); // avoid q = 3
        let closed = constructions::witness_minor_closed_form(wn, q, &b)?;
        println!("  det(L_{{B ∪ q}}) for B = {} -> {closed}", b.to_bitstring());
    }
    Ok(())
}
