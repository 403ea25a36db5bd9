//! Acceptance checks, one per shipped capability. Each test prints a
//! single PASS line (visible with `--nocapture`) and enforces both the
//! numeric tolerance and the runtime budget it states.

use dppc::circuit::{CircuitBuilder, DeterminismCheck, NodeId};
use dppc::learn::{self, GradientMode, MixtureKind, MixtureModel, TrainConfig};
use dppc::linalg::{self, Matrix, Subset};
use dppc::{constructions, dpp, LEnsemble, R1PModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn three_item_kernel() -> LEnsemble {
    LEnsemble::new(
        Matrix::from_rows(&[
            vec![2.0, 1.1, 1.4],
            vec![1.1, 2.5, 0.5],
            vec![1.4, 0.5, 3.0],
        ])
        .unwrap(),
    )
    .unwrap()
}

#[test]
fn criterion_01_worked_three_item_probability() {
    let start = Instant::now();
    let e = three_item_kernel();
    let p = dpp::prob(&e, &Subset::new(3, vec![0, 2]).unwrap()).unwrap();
    let z = e.normalizer();
    let elapsed = start.elapsed();
    assert!((p - 4.04 / 31.09).abs() <= 5e-4, "Pr(101) = {p}");
    assert!((z - 31.09).abs() <= 0.005, "normalizer = {z}");
    assert!(elapsed.as_micros() < 1000, "took {elapsed:?}, budget 1 ms");
    println!("PASS criterion 1: worked 3-item probability ({p:.6}, normalizer {z:.4}, {elapsed:?})");
}

#[test]
fn criterion_02_marginal_kernel_and_circuit_marginal() {
    // K = L(L+I)^-1 for the 2x2 kernel, exact to 1e-12.
    let e = LEnsemble::new(Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 5.0]]).unwrap()).unwrap();
    let k = dpp::marginal_kernel(&e).unwrap();
    let want = [[0.25, 0.25], [0.25, 0.75]];
    for i in 0..2 {
        for j in 0..2 {
            let got = k.kernel().get(i, j);
            assert!(
                (got - want[i][j]).abs() <= 1e-12,
                "K[{i}][{j}] = {got}, want {}",
                want[i][j]
            );
        }
    }

    // The same kernel as a rank-one perturbation, compiled to a circuit:
    // Pr(second variable = 1) through the circuit marginal.
    let model = R1PModel::new(vec![0.0, 1.0], 1.0, vec![1.0, 2.0]).unwrap();
    let c = constructions::r1p_circuit(&model);
    let p = c.marginal(&Subset::new(2, vec![1]).unwrap(), &Subset::empty(2)).unwrap();
    assert!((p - 0.75).abs() <= 1e-12, "circuit marginal = {p}");
    println!("PASS criterion 2: marginal kernel exact, circuit marginal {p}");
}

/// Decode a Prüfer-style code into that labeled tree's edge set
/// (vertices 0-based, code length n-2).
fn tree_from_code(code: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &v in code {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut code = code.to_vec();
    for _ in 0..n - 1 {
        if code.is_empty() {
            let mut leaves = (0..n).filter(|&v| degree[v] == 1);
            let a = leaves.next().unwrap();
            let b = leaves.next().unwrap();
            edges.push((a.min(b), a.max(b)));
            break;
        }
        let leaf = (0..n).find(|&v| degree[v] == 1 && !code.contains(&v)).unwrap();
        let v = code.remove(0);
        edges.push((leaf.min(v), leaf.max(v)));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    edges
}

/// All labeled trees on n vertices via Prüfer codes (n^(n-2) of them).
fn all_labeled_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    let count = n.pow(n as u32 - 2);
    (0..count)
        .map(|mut code_id| {
            let code: Vec<usize> = (0..n - 2)
                .map(|_| {
                    let digit = code_id % n;
                    code_id /= n;
                    digit
                })
                .collect();
            tree_from_code(&code, n)
        })
        .collect()
}

#[test]
fn criterion_03_spanning_tree_kernel() {
    let start = Instant::now();
    let st = constructions::spanning_tree_dpp(4).unwrap();
    // The closed-form 6x6 kernel, entrywise exact.
    let expected = [
        [0.5, 0.25, 0.25, -0.25, -0.25, 0.0],
        [0.25, 0.5, 0.25, 0.25, 0.0, -0.25],
        [0.25, 0.25, 0.5, 0.0, 0.25, 0.25],
        [-0.25, 0.25, 0.0, 0.5, 0.25, -0.25],
        [-0.25, 0.0, 0.25, 0.25, 0.5, 0.25],
        [0.0, -0.25, 0.25, -0.25, 0.25, 0.5],
    ];
    for i in 0..6 {
        for j in 0..6 {
            assert_eq!(st.kernel().get(i, j), expected[i][j], "K[{i}][{j}]");
        }
    }

    // Pr(edges 12 and 24 both present) = 3/16.
    let e12 = st.edge_index(1, 2).unwrap();
    let e24 = st.edge_index(2, 4).unwrap();
    let pair = dpp::marginal_prob(st.marginal_dpp(), &Subset::new(6, vec![e12, e24]).unwrap()).unwrap();
    assert!((pair - 3.0 / 16.0).abs() <= 1e-12, "pair marginal = {pair}");

    // Total tree count recovered: 16 trees on 4 vertices.
    let trees4 = all_labeled_trees(4);
    assert_eq!(trees4.len(), 16);

    // Five vertices: every edge-subset marginal times 5^3 = 125 is the
    // integer count of trees containing that subset.
    let st5 = constructions::spanning_tree_dpp(5).unwrap();
    let trees5 = all_labeled_trees(5);
    assert_eq!(trees5.len(), 125);
    let edges5 = st5.edges();
    let m = edges5.len();
    for mask in 0u64..1 << m {
        let s = Subset::from_mask(m, mask);
        let marginal = dpp::marginal_prob(st5.marginal_dpp(), &s).unwrap();
        let want: usize = trees5
            .iter()
            .filter(|tree| {
                s.members().iter().all(|&idx| {
                    let (i, j) = edges5[idx];
                    tree.contains(&(i - 1, j - 1))
                })
            })
            .count();
        assert!(
            (marginal * 125.0 - want as f64).abs() <= 1e-6,
            "subset {:b}: marginal*125 = {}, tree count {want}",
            mask,
            marginal * 125.0
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!("PASS criterion 3: spanning-tree kernel exact, all 1024 subset marginals integral ({elapsed:?})");
}

#[test]
fn criterion_04_determinant_circuit_compilation() {
    let start = Instant::now();
    // General determinant circuits against LU on 100 random matrices per size.
    for n in 2usize..=6 {
        let c = constructions::det_circuit(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(40 + n as u64);
        for trial in 0..100 {
            let data: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
            let m = Matrix::new(n, n, data).unwrap();
            let got = c.evaluate_config(&constructions::det_input_config(&m).unwrap()).unwrap();
            let want = linalg::det(&m).unwrap();
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "n={n} trial {trial}: circuit {got} vs dense {want}"
            );
        }
    }

    // Symbolic compilation of the fixed 3-item kernel: all 8 assignments
    // evaluate to principal minors.
    let e = three_item_kernel();
    let sk = constructions::symbolic_kernel_compile(&e);
    for mask in 0u64..8 {
        let x = Subset::from_mask(3, mask);
        let got = sk.evaluate(&x).unwrap();
        let want = linalg::principal_minor_det(e.kernel(), &x).unwrap();
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "mask {mask:b}");
    }
    let report = sk.analyze();
    assert!(!report.decomposable, "symbolic kernel circuits share literals across factors");
    assert_eq!(report.deterministic, DeterminismCheck::Verified(false));
    assert!(report.has_negative_parameter);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    println!("PASS criterion 4: determinant circuits match LU, analyzer flags correct ({elapsed:?})");
}

#[test]
fn criterion_05_witness_closed_form() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for n in 3usize..=12 {
        for q in 0..n {
            let l = constructions::witness_kernel(n, q).unwrap();
            let others: Vec<usize> = (0..n).filter(|&i| i != q).collect();
            for _ in 0..200 {
                let members: Vec<usize> =
                    others.iter().copied().filter(|_| rng.gen::<bool>()).collect();
                let b = Subset::new(n, members).unwrap();
                let closed = constructions::witness_minor_closed_form(n, q, &b).unwrap();
                let dense = linalg::principal_minor_det(&l, &b.with(q)).unwrap();
                assert!(
                    (dense - closed).abs() <= 1e-6 * closed.abs().max(1.0),
                    "n={n} q={q}: dense {dense} vs closed {closed}"
                );
            }
            // Distinct conditioning sets give a nonzero cross-minor
            // polynomial.
            for _ in 0..20 {
                let a_members: Vec<usize> =
                    others.iter().copied().filter(|_| rng.gen::<bool>()).collect();
                let b_members: Vec<usize> =
                    others.iter().copied().filter(|_| rng.gen::<bool>()).collect();
                let a = Subset::new(n, a_members).unwrap();
                let b = Subset::new(n, b_members).unwrap();
                if a == b {
                    continue;
                }
                let f = constructions::f_polynomial_eval(&l, &a, &b, q).unwrap();
                assert!(f.abs() > 1e-6, "n={n} q={q}: f({a:?}, {b:?}) = {f}");
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    println!("PASS criterion 5: witness minors match closed form, cross-polynomial nonzero ({elapsed:?})");
}

#[test]
fn criterion_06_conditional_distinctness() {
    let start = Instant::now();
    let mut checked = 0;
    for trial in 0..20u64 {
        let n = 4 + (trial % 3) as usize; // 4, 5, 6
        let e = dpp::random_gram_lensemble(n, n, 1.0, 600 + trial).unwrap();
        for q in 0..n {
            let count =
                dpp::count_distinct_conditionals(&e, q, dpp::DEFAULT_DISTINCTNESS_TOL).unwrap();
            assert_eq!(count, 1 << (n - 1), "trial {trial}, n={n}, q={q}: {count}");
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    println!("PASS criterion 6: {checked} (kernel, item) pairs all realize the maximum conditional count ({elapsed:?})");
}

#[test]
fn criterion_07_r1p_circuits() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    for n in 2usize..=10 {
        let d: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let lambda = rng.gen::<f64>() * 1.5;
        let model = R1PModel::new(d, lambda, u).unwrap();
        let c = constructions::r1p_circuit(&model);
        let dense = model.kernel();
        for mask in 0u64..1 << n {
            let x = Subset::from_mask(n, mask);
            let got = c.evaluate(&x).unwrap();
            let want = linalg::principal_minor_det(&dense, &x).unwrap();
            assert!(
                (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                "n={n} mask {mask:b}: circuit {got} vs dense {want}"
            );
        }
        let report = c.analyze();
        assert!(report.decomposable && report.smooth, "n={n}");
    }
    // Size bound: node count under c*n^2 with one fixed constant
    // (the construction is in fact linear).
    for n in [2usize, 5, 10, 20, 40] {
        let model = R1PModel::new(vec![1.0; n], 0.5, vec![1.0; n]).unwrap();
        let c = constructions::r1p_circuit(&model);
        assert!(
            c.node_count() <= 8 * n * n,
            "n={n}: {} nodes exceeds 8n^2",
            c.node_count()
        );
    }
    let elapsed = start.elapsed();
    println!("PASS criterion 7: rank-one circuits exact, structured, compact ({elapsed:?})");
}

#[test]
fn criterion_08_mixture_comparison_table() {
    let start = Instant::now();
    let cfg = TrainConfig {
        learning_rate: 1.0,
        iterations: 1000,
        restarts: 20,
        seed: 3,
        gradient_mode: GradientMode::Analytic,
    };
    let rows = learn::run_table1(10, 10, &[1, 2, 8, 16], &cfg).unwrap();
    assert_eq!(rows.len(), 4);

    // (a) Both KL columns strictly decrease with component count.
    for pair in rows.windows(2) {
        assert!(
            pair[1].baseline_kl < pair[0].baseline_kl,
            "baseline KL must decrease: m={} {} -> m={} {}",
            pair[0].m,
            pair[0].baseline_kl,
            pair[1].m,
            pair[1].baseline_kl
        );
        assert!(
            pair[1].r1p_kl < pair[0].r1p_kl,
            "rank-one KL must decrease: m={} {} -> m={} {}",
            pair[0].m,
            pair[0].r1p_kl,
            pair[1].m,
            pair[1].r1p_kl
        );
    }
    // (b) Rank-one mixtures stay within 5% of the baseline everywhere.
    for r in &rows {
        assert!(
            r.r1p_kl <= r.baseline_kl * 1.05,
            "m={}: r1p {} vs baseline {}",
            r.m,
            r.r1p_kl,
            r.baseline_kl
        );
    }
    // (c) ... and win outright once capacity matters.
    for r in rows.iter().filter(|r| r.m >= 8) {
        assert!(r.r1p_kl < r.baseline_kl, "m={}: r1p {} vs baseline {}", r.m, r.r1p_kl, r.baseline_kl);
    }
    // (d) Magnitudes within [0.1x, 10x] of the published reference rows.
    let reference = [(1usize, 0.23406, 0.23240), (2, 0.14948, 0.14778), (8, 0.03963, 0.03690), (16, 0.01373, 0.01077)];
    for (r, &(m, base_ref, r1p_ref)) in rows.iter().zip(&reference) {
        assert_eq!(r.m, m);
        assert!(
            r.baseline_kl >= 0.1 * base_ref && r.baseline_kl <= 10.0 * base_ref,
            "m={m}: baseline {} outside [0.1, 10] x {base_ref}",
            r.baseline_kl
        );
        assert!(
            r.r1p_kl >= 0.1 * r1p_ref && r.r1p_kl <= 10.0 * r1p_ref,
            "m={m}: r1p {} outside [0.1, 10] x {r1p_ref}",
            r.r1p_kl
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() <= 900.0, "took {elapsed:?}, budget 15 min");
    println!(
        "PASS criterion 8: mixture table decreasing, rank-one ahead at m=8,16, magnitudes in range ({elapsed:?})"
    );
}

#[test]
fn criterion_09_gradient_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    let mut worst = 0.0f64;
    for pair in 0..50usize {
        let n = 2 + pair % 5; // 2..=6
        let m = 1 + pair % 3;
        let kind = if pair % 2 == 0 { MixtureKind::R1P } else { MixtureKind::Factorized };
        let mut probs: Vec<f64> = (0..1usize << n).map(|_| rng.gen::<f64>() + 0.02).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let target = learn::TargetTable::new(n, probs).unwrap();
        let model = MixtureModel::init(kind, n, m, &mut rng).unwrap();
        let analytic = learn::gradient(&model, &target).unwrap();
        let fd = learn::fd_gradient(&model, &target, learn::FD_STEP).unwrap();
        for (i, (&a, &f)) in analytic.iter().zip(&fd).enumerate() {
            let rel = (a - f).abs() / a.abs().max(f.abs()).max(1.0);
            worst = worst.max(rel);
            assert!(rel <= 1e-4, "pair {pair} coordinate {i}: analytic {a} vs fd {f}");
        }
    }
    println!("PASS criterion 9: analytic gradients match finite differences (worst rel err {worst:.2e})");
}

/// Random deterministic, smooth, decomposable circuit over the given
/// variables, built by recursive case-splitting on the first variable.
fn random_case_split(b: &mut CircuitBuilder, vars: &[usize], rng: &mut ChaCha8Rng) -> NodeId {
    let v = vars[0];
    let rest = &vars[1..];
    let hi = b.leaf(v, true);
    let lo = b.leaf(v, false);
    let (hi_child, lo_child) = if rest.is_empty() {
        (hi, lo)
    } else {
        let hp = random_case_split(b, rest, rng);
        let lp = random_case_split(b, rest, rng);
        (b.product(vec![hi, hp]), b.product(vec![lo, lp]))
    };
    let w_hi = 0.05 + rng.gen::<f64>();
    let w_lo = 0.05 + rng.gen::<f64>();
    b.sum(vec![(w_hi, hi_child), (w_lo, lo_child)])
}

#[test]
fn criterion_10_oracle_equivalence_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);

    // Circuit marginals vs enumeration, n up to 10 at 1e-10.
    for n in [2usize, 4, 7, 10] {
        let d: Vec<f64> = (0..n).map(|_| 0.2 + rng.gen::<f64>() * 2.0).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let model = R1PModel::new(d, rng.gen::<f64>(), u).unwrap();
        let c = constructions::r1p_circuit(&model);
        let z: f64 = (0u64..1 << n).map(|m| c.evaluate(&Subset::from_mask(n, m)).unwrap()).sum();
        for _ in 0..20 {
            let ones_mask: u64 = rng.gen::<u64>() & ((1 << n) - 1);
            let zeros_mask: u64 = rng.gen::<u64>() & ((1 << n) - 1) & !ones_mask;
            let ones = Subset::from_mask(n, ones_mask);
            let zeros = Subset::from_mask(n, zeros_mask);
            let got = c.marginal(&ones, &zeros).unwrap();
            let want: f64 = (0u64..1 << n)
                .filter(|m| m & ones_mask == ones_mask && m & zeros_mask == 0)
                .map(|m| c.evaluate(&Subset::from_mask(n, m)).unwrap())
                .sum::<f64>()
                / z;
            assert!(
                (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                "n={n}: marginal {got} vs enumeration {want}"
            );
        }
    }

    // MAP vs enumerated argmax, n up to 12.
    for n in [3usize, 6, 9, 12] {
        let mut b = CircuitBuilder::new(n);
        let vars: Vec<usize> = (0..n).collect();
        let root = random_case_split(&mut b, &vars, &mut rng);
        let c = b.build(root);
        let (x, score) = c.map_inference().unwrap();
        let best = (0u64..1 << n)
            .map(|m| c.evaluate(&Subset::from_mask(n, m)).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(score.to_bits(), best.to_bits(), "n={n}: MAP score {score} vs enumerated {best}");
        assert_eq!(c.evaluate(&x).unwrap().to_bits(), best.to_bits(), "n={n}");
    }

    // Mixed-evidence kernel marginals vs enumeration, n up to 8 at 1e-8.
    for n in [4usize, 6, 8] {
        let e = dpp::random_gram_lensemble(n, n, 1.0, 1000 + n as u64).unwrap();
        let k = dpp::marginal_kernel(&e).unwrap();
        for _ in 0..30 {
            let a_mask: u64 = rng.gen::<u64>() & ((1 << n) - 1);
            let b_mask: u64 = rng.gen::<u64>() & ((1 << n) - 1) & !a_mask;
            let a = Subset::from_mask(n, a_mask);
            let bb = Subset::from_mask(n, b_mask);
            let got = dpp::general_marginal(&k, &a, &bb).unwrap();
            let want: f64 = (0u64..1 << n)
                .filter(|m| m & a_mask == a_mask && m & b_mask == 0)
                .map(|m| dpp::prob(&e, &Subset::from_mask(n, m)).unwrap())
                .sum();
            assert!((got - want).abs() <= 1e-8, "n={n}: {got} vs {want}");
        }
    }

    // Negative dependence across 50 random L-ensembles.
    for trial in 0..50u64 {
        let n = 3 + (trial % 5) as usize;
        let e = dpp::random_gram_lensemble(n, n, 1.0, 2000 + trial).unwrap();
        let k = dpp::marginal_kernel(&e).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                let pi = dpp::marginal_prob(&k, &Subset::new(n, vec![i]).unwrap()).unwrap();
                let pj = dpp::marginal_prob(&k, &Subset::new(n, vec![j]).unwrap()).unwrap();
                let pij = dpp::marginal_prob(&k, &Subset::new(n, vec![i, j]).unwrap()).unwrap();
                assert!(
                    pij <= pi * pj + 1e-12,
                    "trial {trial} ({i},{j}): joint {pij} exceeds product {}",
                    pi * pj
                );
            }
        }
    }
    println!("PASS criterion 10: marginals, MAP, mixed evidence, and negative dependence all match oracles");
}
