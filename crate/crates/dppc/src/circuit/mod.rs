//! Arena-based circuits over Boolean variables.
//!
//! A circuit is a DAG of literal leaves (`X_v` or its negation), product
//! nodes, and weighted sum nodes, stored in one `Vec` with every child id
//! strictly smaller than its parent's id. That ordering makes every pass —
//! evaluation, structural analysis, smoothing, max-product inference — a
//! single loop over the arena with no recursion.
//!
//! Three structural properties matter for tractability:
//!
//! * **decomposable** — children of every product have pairwise disjoint
//!   variable scopes;
//! * **smooth** — children of every sum cover exactly the sum's scope;
//! * **deterministic** — on every complete assignment at most one child of
//!   each sum evaluates to a nonzero value.
//!
//! Marginals are a pair of leaf-configuration evaluations on a decomposable
//! circuit (the transform to a smooth equivalent is applied internally when
//! needed); max-product inference additionally requires determinism and
//! nonnegative weights.

mod text;

use crate::linalg::Subset;
use crate::{Error, Result};

/// Index of a node in a circuit's arena.
pub type NodeId = usize;

/// Variable count above which [`Circuit::analyze`] skips the exhaustive
/// determinism check (it enumerates all `2^n` assignments).
pub const DETERMINISM_GUARD_DEFAULT: usize = 16;

/// One circuit node. Children always have smaller ids than their parent.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// Literal leaf: value `x_var` if `positive`, else `1 - x_var`.
    Leaf { var: usize, positive: bool },
    /// Product of the children's values.
    Product { children: Vec<NodeId> },
    /// Weighted sum `Σ w_k · child_k`. Weights may be negative or zero.
    Sum { terms: Vec<(f64, NodeId)> },
}

/// Fixed-width bitset over circuit variables.
#[derive(Clone, Debug, PartialEq, Eq)]
struct VarSet {
    words: Vec<u64>,
}

impl VarSet {
    fn empty(n_vars: usize) -> Self {
        VarSet { words: vec![0; n_vars.div_ceil(64).max(1)] }
    }

    fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    fn contains(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    fn union_with(&mut self, other: &VarSet) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    fn intersects(&self, other: &VarSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }
}

/// Per-variable leaf values for configuration evaluation. Entry `v` holds
/// `(negated, positive)`: the value assigned to the leaf `X̄_v` and to `X_v`.
///
/// On a smooth and decomposable circuit, evaluating a configuration equals
/// `Σ_x f(x) · Π_v value-of-the-leaf-x-selects(v)`, so `(1, 1)` everywhere
/// yields the normalizer and `(0, 1)` / `(1, 0)` pin variables to 1 / 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafConfig {
    values: Vec<(f64, f64)>,
}

impl LeafConfig {
    pub fn new(values: Vec<(f64, f64)>) -> Self {
        LeafConfig { values }
    }

    /// Both literals of every variable set to 1 — the normalizer query.
    pub fn all_ones(n_vars: usize) -> Self {
        LeafConfig { values: vec![(1.0, 1.0); n_vars] }
    }

    /// Variables in `ones` pinned to 1, variables in `zeros` pinned to 0,
    /// all others free (`(1, 1)`).
    pub fn evidence(n_vars: usize, ones: &Subset, zeros: &Subset) -> Self {
        assert_eq!(ones.n(), n_vars, "evidence subset over wrong ground set");
        assert_eq!(zeros.n(), n_vars, "evidence subset over wrong ground set");
        let mut cfg = LeafConfig::all_ones(n_vars);
        for &v in ones.members() {
            cfg.values[v] = (0.0, 1.0);
        }
        for &v in zeros.members() {
            cfg.values[v] = (1.0, 0.0);
        }
        cfg
    }

    /// The configuration that pins every variable to the assignment `x`.
    pub fn from_assignment(x: &Subset) -> Self {
        let mut cfg = LeafConfig { values: vec![(1.0, 0.0); x.n()] };
        for &v in x.members() {
            cfg.values[v] = (0.0, 1.0);
        }
        cfg
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn negated(&self, var: usize) -> f64 {
        self.values[var].0
    }

    pub fn positive(&self, var: usize) -> f64 {
        self.values[var].1
    }

    pub fn set(&mut self, var: usize, negated: f64, positive: f64) {
        self.values[var] = (negated, positive);
    }
}

/// Result of the exhaustive determinism check in [`StructureReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeterminismCheck {
    /// All `2^n` assignments were enumerated; the flag is the verdict.
    Verified(bool),
    /// The circuit has more variables than the guard allows; not checked.
    Skipped,
}

/// Structural summary produced by [`Circuit::analyze`].
#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub decomposable: bool,
    pub smooth: bool,
    pub deterministic: DeterminismCheck,
    pub has_negative_parameter: bool,
    pub node_count: usize,
    pub edge_count: usize,
    pub parameter_count: usize,
}

/// Incremental circuit constructor. Nodes are appended bottom-up; children
/// must already exist when a parent references them, which makes cycles
/// impossible. Structural misuse (unknown child, out-of-range variable,
/// empty node, non-finite weight) is a panic: these are programming errors,
/// not data errors.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    n_vars: usize,
    nodes: Vec<Node>,
}

impl CircuitBuilder {
    pub fn new(n_vars: usize) -> Self {
        CircuitBuilder { n_vars, nodes: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Number of nodes added so far (the id the next node will get).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf(&mut self, var: usize, positive: bool) -> NodeId {
        assert!(var < self.n_vars, "leaf variable {var} out of range for {} variables", self.n_vars);
        self.push(Node::Leaf { var, positive })
    }

    pub fn product(&mut self, children: Vec<NodeId>) -> NodeId {
        assert!(!children.is_empty(), "product nodes need at least one child");
        for &c in &children {
            assert!(c < self.nodes.len(), "product child {c} does not exist yet");
        }
        self.push(Node::Product { children })
    }

    pub fn sum(&mut self, terms: Vec<(f64, NodeId)>) -> NodeId {
        assert!(!terms.is_empty(), "sum nodes need at least one term");
        for &(w, c) in &terms {
            assert!(w.is_finite(), "sum weight {w} must be finite");
            assert!(c < self.nodes.len(), "sum child {c} does not exist yet");
        }
        self.push(Node::Sum { terms })
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Finish the circuit. Nodes unreachable from `root` are discarded and
    /// ids are re-compacted (order preserved); scopes are computed once.
    pub fn build(self, root: NodeId) -> Circuit {
        assert!(root < self.nodes.len(), "root {root} does not exist");
        let mut reachable = vec![false; self.nodes.len()];
        reachable[root] = true;
        for id in (0..=root).rev() {
            if !reachable[id] {
                continue;
            }
            match &self.nodes[id] {
                Node::Leaf { .. } => {}
                Node::Product { children } => {
                    for &c in children {
                        reachable[c] = true;
                    }
                }
                Node::Sum { terms } => {
                    for &(_, c) in terms {
                        reachable[c] = true;
                    }
                }
            }
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (id, node) in self.nodes.into_iter().enumerate() {
            if !reachable[id] {
                continue;
            }
            let node = match node {
                Node::Leaf { .. } => node,
                Node::Product { children } => {
                    Node::Product { children: children.into_iter().map(|c| remap[c]).collect() }
                }
                Node::Sum { terms } => {
                    Node::Sum { terms: terms.into_iter().map(|(w, c)| (w, remap[c])).collect() }
                }
            };
            remap[id] = nodes.len();
            nodes.push(node);
        }
        Circuit::from_nodes(self.n_vars, nodes, remap[root])
    }
}

/// An immutable circuit: arena of nodes, designated root, and precomputed
/// variable scopes. Construct it through [`CircuitBuilder`] or
/// [`Circuit::parse`]. Equality is structural (same arena, same root),
/// which is exactly what text round-trips preserve.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_vars: usize,
    nodes: Vec<Node>,
    root: NodeId,
    scopes: Vec<VarSet>,
}

impl Circuit {
    fn from_nodes(n_vars: usize, nodes: Vec<Node>, root: NodeId) -> Circuit {
        let mut scopes = Vec::with_capacity(nodes.len());
        for (id, node) in nodes.iter().enumerate() {
            let mut scope = VarSet::empty(n_vars);
            match node {
                Node::Leaf { var, .. } => scope.insert(*var),
                Node::Product { children } => {
                    for &c in children {
                        debug_assert!(c < id);
                        scope.union_with(&scopes[c]);
                    }
                }
                Node::Sum { terms } => {
                    for &(_, c) in terms {
                        debug_assert!(c < id);
                        scope.union_with(&scopes[c]);
                    }
                }
            }
            scopes.push(scope);
        }
        Circuit { n_vars, nodes, root, scopes }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    /// Total number of child edges (product children plus sum terms).
    pub fn edge_count(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Leaf { .. } => 0,
                Node::Product { children } => children.len(),
                Node::Sum { terms } => terms.len(),
            })
            .sum()
    }

    /// Number of tunable weights: one per sum edge (zero weights included).
    pub fn parameter_count(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Sum { terms } => terms.len(),
                _ => 0,
            })
            .sum()
    }

    pub fn has_negative_parameter(&self) -> bool {
        self.nodes.iter().any(|n| match n {
            Node::Sum { terms } => terms.iter().any(|&(w, _)| w < 0.0),
            _ => false,
        })
    }

    /// One bottom-up pass computing every node's value for the given leaf
    /// valuation.
    fn values(&self, leaf_value: impl Fn(usize, bool) -> f64) -> Vec<f64> {
        let mut vals = vec![0.0; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            vals[id] = match node {
                Node::Leaf { var, positive } => leaf_value(*var, *positive),
                Node::Product { children } => children.iter().map(|&c| vals[c]).product(),
                Node::Sum { terms } => terms.iter().map(|&(w, c)| w * vals[c]).sum(),
            };
        }
        vals
    }

    /// The circuit's value on a complete assignment (`x` = set of variables
    /// that are 1).
    pub fn evaluate(&self, x: &Subset) -> Result<f64> {
        if x.n() != self.n_vars {
            return Err(Error::Dimension(format!(
                "assignment over {} variables, circuit has {}",
                x.n(),
                self.n_vars
            )));
        }
        let vals =
            self.values(|var, positive| if x.contains(var) == positive { 1.0 } else { 0.0 });
        Ok(vals[self.root])
    }

    /// Evaluate with arbitrary per-literal leaf values.
    pub fn evaluate_config(&self, cfg: &LeafConfig) -> Result<f64> {
        if cfg.len() != self.n_vars {
            return Err(Error::Dimension(format!(
                "configuration over {} variables, circuit has {}",
                cfg.len(),
                self.n_vars
            )));
        }
        let vals = self.values(|var, positive| {
            if positive {
                cfg.positive(var)
            } else {
                cfg.negated(var)
            }
        });
        Ok(vals[self.root])
    }

    /// True when every sum child's scope equals the sum's scope.
    pub fn is_smooth(&self) -> bool {
        self.nodes.iter().enumerate().all(|(id, node)| match node {
            Node::Sum { terms } => terms.iter().all(|&(_, c)| self.scopes[c] == self.scopes[id]),
            _ => true,
        })
    }

    /// True when every product's children have pairwise disjoint scopes.
    pub fn is_decomposable(&self) -> bool {
        self.nodes.iter().all(|node| match node {
            Node::Product { children } => {
                for (i, &a) in children.iter().enumerate() {
                    for &b in &children[i + 1..] {
                        if self.scopes[a].intersects(&self.scopes[b]) {
                            return false;
                        }
                    }
                }
                true
            }
            _ => true,
        })
    }

    fn brute_force_deterministic(&self) -> bool {
        for mask in 0u64..1 << self.n_vars {
            let x = Subset::from_mask(self.n_vars, mask);
            let vals =
                self.values(|var, positive| if x.contains(var) == positive { 1.0 } else { 0.0 });
            for node in &self.nodes {
                if let Node::Sum { terms } = node {
                    let live = terms.iter().filter(|&&(_, c)| vals[c] != 0.0).count();
                    if live > 1 {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Structural summary with the default determinism guard of
    /// [`DETERMINISM_GUARD_DEFAULT`] variables.
    pub fn analyze(&self) -> StructureReport {
        self.analyze_with_guard(DETERMINISM_GUARD_DEFAULT)
    }

    /// Structural summary. Determinism is decided by enumerating all `2^n`
    /// assignments when `n_vars ≤ guard`, and reported as
    /// [`DeterminismCheck::Skipped`] otherwise.
    pub fn analyze_with_guard(&self, guard: usize) -> StructureReport {
        let deterministic = if self.n_vars <= guard {
            DeterminismCheck::Verified(self.brute_force_deterministic())
        } else {
            DeterminismCheck::Skipped
        };
        StructureReport {
            decomposable: self.is_decomposable(),
            smooth: self.is_smooth(),
            deterministic,
            has_negative_parameter: self.has_negative_parameter(),
            node_count: self.node_count(),
            edge_count: self.edge_count(),
            parameter_count: self.parameter_count(),
        }
    }

    /// Return an equivalent smooth circuit: every sum child whose scope
    /// misses variables is multiplied by `(X_v + X̄_v)` gadgets for each
    /// missing `v`. Values on complete assignments are unchanged; already
    /// smooth circuits come back with the identical arena.
    pub fn smooth_transform(&self) -> Circuit {
        let mut b = CircuitBuilder::new(self.n_vars);
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut gadget: Vec<Option<NodeId>> = vec![None; self.n_vars];
        for (id, node) in self.nodes.iter().enumerate() {
            remap[id] = match node {
                Node::Leaf { var, positive } => b.leaf(*var, *positive),
                Node::Product { children } => {
                    let children = children.iter().map(|&c| remap[c]).collect();
                    b.product(children)
                }
                Node::Sum { terms } => {
                    let mut new_terms = Vec::with_capacity(terms.len());
                    for &(w, c) in terms {
                        let missing: Vec<usize> = (0..self.n_vars)
                            .filter(|&v| self.scopes[id].contains(v) && !self.scopes[c].contains(v))
                            .collect();
                        if missing.is_empty() {
                            new_terms.push((w, remap[c]));
                        } else {
                            let mut children = vec![remap[c]];
                            for v in missing {
                                let g = *gadget[v].get_or_insert_with(|| {
                                    let pos = b.leaf(v, true);
                                    let neg = b.leaf(v, false);
                                    b.sum(vec![(1.0, pos), (1.0, neg)])
                                });
                                children.push(g);
                            }
                            new_terms.push((w, b.product(children)));
                        }
                    }
                    b.sum(new_terms)
                }
            };
        }
        b.build(remap[self.root])
    }

    /// Marginal query `Pr(ones = 1, zeros = 0)` under the distribution
    /// proportional to the circuit's value.
    ///
    /// Requires a decomposable circuit; a smooth equivalent is substituted
    /// internally when the circuit is not smooth. The result is the ratio of
    /// two configuration evaluations and equals the enumeration
    /// `Σ_{x ⊇ ones, x ∩ zeros = ∅} f(x) / Σ_x f(x)`.
    pub fn marginal(&self, ones: &Subset, zeros: &Subset) -> Result<f64> {
        if ones.n() != self.n_vars || zeros.n() != self.n_vars {
            return Err(Error::Dimension(format!(
                "evidence over {}/{} variables, circuit has {}",
                ones.n(),
                zeros.n(),
                self.n_vars
            )));
        }
        if !ones.is_disjoint(zeros) {
            return Err(Error::Argument("positive and negative evidence sets must be disjoint".into()));
        }
        if !self.is_decomposable() {
            return Err(Error::Structure(
                "marginal queries require a decomposable circuit".into(),
            ));
        }
        let smoothed;
        let c = if self.is_smooth() {
            self
        } else {
            smoothed = self.smooth_transform();
            &smoothed
        };
        let z = c.evaluate_config(&LeafConfig::all_ones(self.n_vars))?;
        if z == 0.0 {
            return Err(Error::Division("circuit normalizer is zero".into()));
        }
        let num = c.evaluate_config(&LeafConfig::evidence(self.n_vars, ones, zeros))?;
        Ok(num / z)
    }

    /// Most probable complete assignment and its (unnormalized) score.
    ///
    /// Requires a decomposable circuit with nonnegative weights that is
    /// deterministic. Determinism is verified exhaustively up to
    /// [`DETERMINISM_GUARD_DEFAULT`] variables; beyond that it is the
    /// caller's obligation, but the result is still cross-checked by
    /// re-evaluating the traced assignment, which catches any violation that
    /// actually affected the answer.
    pub fn map_inference(&self) -> Result<(Subset, f64)> {
        if !self.is_decomposable() {
            return Err(Error::Structure(
                "max-product inference requires a decomposable circuit".into(),
            ));
        }
        if self.has_negative_parameter() {
            return Err(Error::Structure(
                "max-product inference requires nonnegative sum weights".into(),
            ));
        }
        if self.n_vars <= DETERMINISM_GUARD_DEFAULT && !self.brute_force_deterministic() {
            return Err(Error::Structure(
                "max-product inference requires a deterministic circuit".into(),
            ));
        }
        // Upward pass: replace every sum with a max over its weighted terms.
        let mut up = vec![0.0; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            up[id] = match node {
                Node::Leaf { .. } => 1.0,
                Node::Product { children } => children.iter().map(|&c| up[c]).product(),
                Node::Sum { terms } => terms
                    .iter()
                    .map(|&(w, c)| w * up[c])
                    .fold(f64::NEG_INFINITY, f64::max),
            };
        }
        // Downward pass: follow one maximizing term per sum, all children of
        // every product, and collect positive literals.
        let mut traced = vec![false; self.nodes.len()];
        traced[self.root] = true;
        let mut members = Vec::new();
        for id in (0..=self.root).rev() {
            if !traced[id] {
                continue;
            }
            match &self.nodes[id] {
                Node::Leaf { var, positive } => {
                    if *positive {
                        members.push(*var);
                    }
                }
                Node::Product { children } => {
                    for &c in children {
                        traced[c] = true;
                    }
                }
                Node::Sum { terms } => {
                    let best = up[id];
                    let &(_, pick) = terms
                        .iter()
                        .find(|&&(w, c)| w * up[c] == best)
                        .expect("the max over sum terms is attained by one of them");
                    traced[pick] = true;
                }
            }
        }
        members.sort_unstable();
        members.dedup();
        let x = Subset::new(self.n_vars, members)?;
        let score = up[self.root];
        let check = self.evaluate(&x)?;
        if check != score {
            return Err(Error::Structure(format!(
                "circuit is not deterministic: max-product score {score} does not match the traced assignment's value {check}"
            )));
        }
        Ok((x, score))
    }

    /// Render in the `pc v1` text format. See the module docs of the parser
    /// for the exact grammar.
    pub fn serialize(&self) -> String {
        text::serialize(self)
    }

    /// Parse the `pc v1` text format (inverse of [`Circuit::serialize`]).
    pub fn parse(input: &str) -> Result<Circuit> {
        text::parse(input)
    }
}
