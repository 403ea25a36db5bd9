//! Command-line front end: kernel and circuit I/O, probability queries,
//! compilation, structural analysis, distinctness audits, and the mixture
//! comparison experiment.
//!
//! Conventions: kernels travel as CSV (`#` comments allowed), circuits in
//! the `pc v1` text format. Assignments are bitstrings written left to
//! right from the first variable; item subsets are comma-separated 1-based
//! indices. Results go to stdout (one value, one `key=value` line, or
//! CSV); diagnostics go to stderr. Exit codes: 0 success, 1 domain error,
//! 2 usage error.

use crate::circuit::{Circuit, DeterminismCheck};
use crate::linalg::{self, Matrix, Subset};
use crate::{constructions, dpp, learn, Error, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Parse `argv`, dispatch, and return the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version land on stdout with code 0; usage errors on
            // stderr with code 2.
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dppc",
    about = "Determinantal point process queries, circuit compilation, and mixture experiments",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    /// Round printed values to this many decimal places (default:
    /// shortest round-trip decimals).
    #[arg(long, global = true, value_name = "N")]
    digits: Option<usize>,
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Probability queries against L-ensemble kernels.
    #[command(subcommand)]
    Dpp(DppCmd),
    /// Build circuits (and structured kernels) from models.
    #[command(subcommand)]
    Compile(CompileCmd),
    /// Evaluate, query, and transform circuit files.
    #[command(subcommand)]
    Circuit(CircuitCmd),
    /// Self-checking audits of the constructions.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Long-running comparisons that emit CSV reports.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Args)]
struct KernelArg {
    /// CSV file holding the symmetric PSD kernel L.
    #[arg(long, value_name = "FILE")]
    kernel: PathBuf,
}

#[derive(Args)]
struct OutArg {
    /// Output file (default: stdout).
    #[arg(short, long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DppCmd {
    /// Probability of one complete assignment: det(L_x)/det(L+I).
    Prob {
        #[command(flatten)]
        kernel: KernelArg,
        /// Assignment bitstring, one character per item (e.g. 101).
        #[arg(long, value_name = "BITS")]
        assign: String,
    },
    /// Marginal probability that all of --pos are selected and none of
    /// --neg are, via the marginal kernel of L.
    Marginal {
        #[command(flatten)]
        kernel: KernelArg,
        /// Items required present: comma-separated 1-based indices.
        #[arg(long, value_name = "LIST", default_value = "")]
        pos: String,
        /// Items required absent: comma-separated 1-based indices.
        #[arg(long, value_name = "LIST", default_value = "")]
        neg: String,
    },
    /// Convert an L-ensemble kernel to its marginal kernel K = L(L+I)^-1.
    MarginalKernel {
        #[command(flatten)]
        kernel: KernelArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Generate a random symmetric PSD kernel with an invertible Gram
    /// factor and write it as CSV.
    Random {
        /// Ground-set size.
        #[arg(long)]
        n: usize,
        /// Entries of the Gram factor are uniform in [-bound, bound].
        #[arg(long, default_value_t = 1.0)]
        bound: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Conditional probabilities Pr(item q selected | A selected, rest of
    /// the conditioning set rejected) for every A over the other items.
    Conditionals {
        #[command(flatten)]
        kernel: KernelArg,
        /// Conditioned item (1-based).
        #[arg(long)]
        q: usize,
        /// Print only the number of distinct values.
        #[arg(long)]
        count_distinct: bool,
        /// Distinctness tolerance for --count-distinct.
        #[arg(long, default_value_t = dpp::DEFAULT_DISTINCTNESS_TOL)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum CompileCmd {
    /// Circuit for a fully factorized distribution with the given
    /// selection probabilities.
    Factorized {
        /// Comma-separated probabilities in [0, 1], one per item.
        #[arg(long, value_name = "LIST")]
        p: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Symbolic determinant circuit of an L-ensemble kernel: evaluating
    /// an assignment yields det(L_x) (unnormalized).
    DppCircuit {
        #[command(flatten)]
        kernel: KernelArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Linear-size smooth decomposable circuit for a rank-one-perturbed
    /// diagonal kernel L = diag(d) + lambda*u*u^T.
    R1p {
        /// Comma-separated nonnegative diagonal entries.
        #[arg(long, value_name = "LIST")]
        d: String,
        /// Nonnegative perturbation scale.
        #[arg(long)]
        lambda: f64,
        /// Comma-separated perturbation vector entries.
        #[arg(long, value_name = "LIST")]
        u: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Marginal kernel of the uniform spanning-tree distribution on the
    /// complete graph, written as CSV with an edge-order comment.
    SpanningTree {
        /// Number of graph vertices (at least 2).
        #[arg(long)]
        vertices: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum CircuitCmd {
    /// Evaluate the circuit at one complete assignment.
    Eval {
        #[arg(long, value_name = "FILE")]
        circuit: PathBuf,
        /// Assignment bitstring, one character per variable.
        #[arg(long, value_name = "BITS")]
        assign: String,
    },
    /// Normalized marginal Pr(--pos all 1, --neg all 0) for a
    /// decomposable circuit (smoothed internally when needed).
    Marginal {
        #[arg(long, value_name = "FILE")]
        circuit: PathBuf,
        /// Variables fixed to 1: comma-separated 1-based indices.
        #[arg(long, value_name = "LIST", default_value = "")]
        pos: String,
        /// Variables fixed to 0: comma-separated 1-based indices.
        #[arg(long, value_name = "LIST", default_value = "")]
        neg: String,
    },
    /// Most probable complete assignment of a smooth, decomposable,
    /// deterministic circuit; prints `assignment,score`.
    Map {
        #[arg(long, value_name = "FILE")]
        circuit: PathBuf,
    },
    /// One-line structural report: decomposability, smoothness,
    /// determinism, negative parameters, and size counts.
    Analyze {
        #[arg(long, value_name = "FILE")]
        circuit: PathBuf,
    },
    /// Rewrite the circuit so every sum's children mention the same
    /// variables, preserving complete-assignment semantics.
    Smooth {
        #[arg(long, value_name = "FILE")]
        circuit: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Audit the distinct-minor witness kernel: every augmented principal
    /// minor must match its closed form, and all values must be distinct.
    Witness {
        /// Ground-set size (2..=16; the audit enumerates all subsets).
        #[arg(long)]
        n: usize,
        /// Distinguished item (1-based).
        #[arg(long)]
        q: usize,
    },
    /// Audit the determinant circuit against dense LU determinants on
    /// random matrices.
    DetCircuit {
        /// Matrix side length.
        #[arg(long)]
        n: usize,
        /// Number of random matrices to test.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Fit rank-one-perturbed mixtures against factorized mixtures of
    /// equal parameter count on a random kernel's exact distribution and
    /// report both KL divergences per component count.
    Table1 {
        /// Ground-set size (at most 14; the target is tabulated exactly).
        #[arg(long)]
        n: usize,
        /// Rows of the random Gram factor (default: n).
        #[arg(long)]
        krows: Option<usize>,
        /// Component counts to evaluate, comma-separated.
        #[arg(long, value_name = "LIST", default_value = "1,2,8,16")]
        m_list: String,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gradient-descent iterations per restart.
        #[arg(long)]
        iterations: Option<usize>,
        /// Initial step size (backtracking halves it as needed).
        #[arg(long)]
        lr: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    let digits = cli.digits;
    match cli.command {
        Commands::Dpp(cmd) => run_dpp(cmd, digits),
        Commands::Compile(cmd) => run_compile(cmd),
        Commands::Circuit(cmd) => run_circuit(cmd, digits),
        Commands::Verify(cmd) => run_verify(cmd),
        Commands::Experiment(cmd) => run_experiment(cmd),
    }
}

fn run_dpp(cmd: DppCmd, digits: Option<usize>) -> Result<()> {
    match cmd {
        DppCmd::Prob { kernel, assign } => {
            let e = load_lensemble(&kernel.kernel)?;
            let x = parse_assignment(&assign, e.n())?;
            println!("{}", fmt(dpp::prob(&e, &x)?, digits));
        }
        DppCmd::Marginal { kernel, pos, neg } => {
            let e = load_lensemble(&kernel.kernel)?;
            let k = dpp::marginal_kernel(&e)?;
            let a = parse_index_list(&pos, e.n(), "--pos")?;
            let b = parse_index_list(&neg, e.n(), "--neg")?;
            println!("{}", fmt(dpp::general_marginal(&k, &a, &b)?, digits));
        }
        DppCmd::MarginalKernel { kernel, out } => {
            let e = load_lensemble(&kernel.kernel)?;
            emit(&out.out, &dpp::marginal_kernel(&e)?.kernel().to_csv())?;
        }
        DppCmd::Random { n, bound, seed, out } => {
            let e = dpp::random_lensemble(n, bound, seed)?;
            emit(&out.out, &e.kernel().to_csv())?;
        }
        DppCmd::Conditionals { kernel, q, count_distinct, tol } => {
            let e = load_lensemble(&kernel.kernel)?;
            let q = to_zero_based(q, e.n(), "--q")?;
            if count_distinct {
                println!("{}", dpp::count_distinct_conditionals(&e, q, tol)?);
            } else {
                print!("{}", conditionals_csv(&e, q, digits)?);
            }
        }
    }
    Ok(())
}

/// One line per conditioning set: the set as an assignment-style
/// bitstring (item q's position always 0), then the conditional
/// probability of item q.
fn conditionals_csv(e: &dpp::LEnsemble, q: usize, digits: Option<usize>) -> Result<String> {
    let n = e.n();
    if n > 20 {
        return Err(Error::SizeGuard(format!(
            "enumerating conditioning sets is limited to n ≤ 20, got {n}"
        )));
    }
    let others: Vec<usize> = (0..n).filter(|&i| i != q).collect();
    let mut csv = String::from("given,prob\n");
    for mask in 0u64..1 << others.len() {
        let members: Vec<usize> =
            others.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i).collect();
        let a = Subset::new(n, members)?;
        let p = dpp::conditional_prob(e, q, &a)?;
        let _ = writeln!(csv, "{},{}", a.to_bitstring(), fmt(p, digits));
    }
    Ok(csv)
}

fn run_compile(cmd: CompileCmd) -> Result<()> {
    match cmd {
        CompileCmd::Factorized { p, out } => {
            let probs = parse_float_list(&p, "--p")?;
            emit(&out.out, &constructions::factorized_circuit(&probs)?.serialize())?;
        }
        CompileCmd::DppCircuit { kernel, out } => {
            let e = load_lensemble(&kernel.kernel)?;
            emit(&out.out, &constructions::symbolic_kernel_compile(&e).serialize())?;
        }
        CompileCmd::R1p { d, lambda, u, out } => {
            let d = parse_float_list(&d, "--d")?;
            let u = parse_float_list(&u, "--u")?;
            let model = constructions::R1PModel::new(d, lambda, u)?;
            emit(&out.out, &constructions::r1p_circuit(&model).serialize())?;
        }
        CompileCmd::SpanningTree { vertices, out } => {
            emit(&out.out, &constructions::spanning_tree_dpp(vertices)?.to_csv())?;
        }
    }
    Ok(())
}

fn run_circuit(cmd: CircuitCmd, digits: Option<usize>) -> Result<()> {
    match cmd {
        CircuitCmd::Eval { circuit, assign } => {
            let c = load_circuit(&circuit)?;
            let x = parse_assignment(&assign, c.n_vars())?;
            println!("{}", fmt(c.evaluate(&x)?, digits));
        }
        CircuitCmd::Marginal { circuit, pos, neg } => {
            let c = load_circuit(&circuit)?;
            let ones = parse_index_list(&pos, c.n_vars(), "--pos")?;
            let zeros = parse_index_list(&neg, c.n_vars(), "--neg")?;
            println!("{}", fmt(c.marginal(&ones, &zeros)?, digits));
        }
        CircuitCmd::Map { circuit } => {
            let c = load_circuit(&circuit)?;
            let (x, score) = c.map_inference()?;
            println!("{},{}", x.to_bitstring(), fmt(score, digits));
        }
        CircuitCmd::Analyze { circuit } => {
            let c = load_circuit(&circuit)?;
            let r = c.analyze();
            let det = match r.deterministic {
                DeterminismCheck::Verified(v) => v.to_string(),
                DeterminismCheck::Skipped => "skipped".to_string(),
            };
            println!(
                "decomposable={} smooth={} deterministic={} negative_params={} nodes={} edges={} params={}",
                r.decomposable,
                r.smooth,
                det,
                r.has_negative_parameter,
                r.node_count,
                r.edge_count,
                r.parameter_count
            );
        }
        CircuitCmd::Smooth { circuit, out } => {
            let c = load_circuit(&circuit)?;
            emit(&out.out, &c.smooth_transform().serialize())?;
        }
    }
    Ok(())
}

fn run_verify(cmd: VerifyCmd) -> Result<()> {
    match cmd {
        VerifyCmd::Witness { n, q } => {
            let q = to_zero_based(q, n, "--q")?;
            if n > 16 {
                return Err(Error::SizeGuard(format!(
                    "the witness audit enumerates all subsets and is limited to n ≤ 16, got {n}"
                )));
            }
            let l = constructions::witness_kernel(n, q)?;
            let others: Vec<usize> = (0..n).filter(|&i| i != q).collect();
            let mut max_err = 0.0f64;
            let mut values = Vec::with_capacity(1 << others.len());
            for mask in 0u64..1 << others.len() {
                let members: Vec<usize> = others
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask >> bit & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                let b = Subset::new(n, members)?;
                let closed = constructions::witness_minor_closed_form(n, q, &b)?;
                let dense = linalg::principal_minor_det(&l, &b.with(q))?;
                let err = (dense - closed).abs() / closed.abs().max(1.0);
                if err > 1e-6 {
                    return Err(Error::Argument(format!(
                        "witness audit failed: subset mask {mask:b} gives {dense}, closed form {closed}"
                    )));
                }
                max_err = max_err.max(err);
                values.push(closed);
            }
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite minors"));
            let distinct = values.windows(2).all(|w| w[1] - w[0] > 1.0);
            if !distinct {
                return Err(Error::Argument(
                    "witness audit failed: two conditioning sets share a minor value".into(),
                ));
            }
            println!("checked={} max_rel_err={:.3e} distinct=true", values.len(), max_err);
        }
        VerifyCmd::DetCircuit { n, trials, seed } => {
            let c = constructions::det_circuit(n)?;
            let mut max_err = 0.0f64;
            for trial in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial as u64);
                let data: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                let m = Matrix::new(n, n, data)?;
                let got = c.evaluate_config(&constructions::det_input_config(&m)?)?;
                let want = linalg::det(&m)?;
                let err = (got - want).abs() / want.abs().max(1.0);
                if err > 1e-9 {
                    return Err(Error::Argument(format!(
                        "determinant audit failed on trial {trial}: circuit {got}, dense {want}"
                    )));
                }
                max_err = max_err.max(err);
            }
            println!("trials={trials} max_rel_err={max_err:.3e}");
        }
    }
    Ok(())
}

fn run_experiment(cmd: ExperimentCmd) -> Result<()> {
    match cmd {
        ExperimentCmd::Table1 { n, krows, m_list, restarts, seed, iterations, lr, out } => {
            let m_values = parse_usize_list(&m_list, "--m-list")?;
            let mut cfg = learn::TrainConfig { restarts, seed, ..learn::TrainConfig::default() };
            if let Some(iters) = iterations {
                cfg.iterations = iters;
            }
            if let Some(lr) = lr {
                cfg.learning_rate = lr;
            }
            let k_rows = krows.unwrap_or(n);
            let rows = learn::run_table1(n, k_rows, &m_values, &cfg)?;
            emit(&out.out, &learn::table1_csv(&rows, n, k_rows, &cfg))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared parsing and output helpers.

fn fmt(v: f64, digits: Option<usize>) -> String {
    match digits {
        Some(d) => format!("{v:.d$}"),
        None => format!("{v}"),
    }
}

/// Write to the given path, or to stdout when no path was requested.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Argument(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))
}

fn load_lensemble(path: &Path) -> Result<dpp::LEnsemble> {
    let text = read_file(path)?;
    with_path(path, Matrix::from_csv(&text).and_then(dpp::LEnsemble::new))
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = read_file(path)?;
    with_path(path, Circuit::parse(&text))
}

/// Prefix any error with the file it came from (parse errors keep their
/// line numbers inside the message).
fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

/// Assignment bitstring: character j (from the left) is variable j's
/// value, exactly n characters of '0'/'1'.
fn parse_assignment(s: &str, n: usize) -> Result<Subset> {
    if s.len() != n {
        return Err(Error::Argument(format!(
            "assignment '{s}' has {} characters but there are {n} variables",
            s.len()
        )));
    }
    let mut members = Vec::new();
    for (i, ch) in s.chars().enumerate() {
        match ch {
            '1' => members.push(i),
            '0' => {}
            other => {
                return Err(Error::Argument(format!(
                    "assignment '{s}': unexpected character '{other}' (want 0 or 1)"
                )))
            }
        }
    }
    Subset::new(n, members)
}

/// Comma-separated 1-based indices (blank ⇒ empty set).
fn parse_index_list(s: &str, n: usize, what: &str) -> Result<Subset> {
    let mut members = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: usize = tok
            .parse()
            .map_err(|_| Error::Argument(format!("{what}: '{tok}' is not an index")))?;
        members.push(to_zero_based(v, n, what)?);
    }
    Subset::new(n, members)
}

fn to_zero_based(v: usize, n: usize, what: &str) -> Result<usize> {
    if v == 0 || v > n {
        return Err(Error::Argument(format!(
            "{what}: index {v} out of range (items are numbered 1..={n})"
        )));
    }
    Ok(v - 1)
}

fn parse_float_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::Argument(format!("{what}: '{tok}' is not a number")))
        })
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Argument(format!("{what}: '{tok}' is not a count")))
        })
        .collect()
}
