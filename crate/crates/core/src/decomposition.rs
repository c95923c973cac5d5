//! Tree decompositions and the block decomposition behind the exact
//! extended formulation.
//!
//! Given a tree decomposition in which every bag holds at most one plus-loop
//! node (C1), the bags containing a plus node are first contracted into a
//! single bag. Peeling leaves then yields blocks that either carry no plus
//! loop (RLT polytope) or exactly one (single-plus-loop hull); their union,
//! glued along shared monomials, is exact.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{complete_hull_one_plus_loop, minus_loop_constraints, rlt_polytope, BlockFormulation};
use crate::instance::LoopGraph;
use crate::monomial::{Monomial, NodeSet, MAX_BLOCK_NODES};
use crate::relaxation::ConstraintSystem;

/// Default budget on width and plus-node spread.
pub const DEFAULT_BOUND: usize = 16;

/// Bags `X_1..X_m` joined by tree edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<NodeSet>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct TdDoc {
    bags: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Checks that `edges` form a tree on the bag indices.
    pub fn new(bags: Vec<NodeSet>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let m = bags.len();
        if m == 0 {
            return Err(Error::TreeDecomposition("no bags".into()));
        }
        if edges.len() != m - 1 {
            return Err(Error::TreeDecomposition(format!(
                "{} edges for {} bags; a tree needs {}",
                edges.len(),
                m,
                m - 1
            )));
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &edges {
            if a >= m || b >= m {
                return Err(Error::TreeDecomposition(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::TreeDecomposition(format!("self edge at bag {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::TreeDecomposition(format!("repeated edge ({a}, {b})")));
            }
        }
        let td = Self { bags, edges };
        let reached = td.reachable(0, |_| true).len();
        if reached != m {
            return Err(Error::TreeDecomposition("bag tree is not connected".into()));
        }
        Ok(td)
    }

    pub fn from_lists(bags: Vec<Vec<usize>>, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(bags.into_iter().map(NodeSet::new).collect(), edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TdDoc = serde_json::from_str(text)?;
        Self::from_lists(doc.bags, doc.edges)
    }

    pub fn to_json(&self) -> String {
        let doc = TdDoc {
            bags: self.bags.iter().map(|b| b.as_slice().to_vec()).collect(),
            edges: self.edges.clone(),
        };
        serde_json::to_string(&doc).expect("decomposition serializes")
    }

    pub fn bags(&self) -> &[NodeSet] {
        &self.bags
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Bags reachable from `start` through bags accepted by `keep`.
    fn reachable(&self, start: usize, keep: impl Fn(usize) -> bool) -> BTreeSet<usize> {
        let adj = self.adjacency();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(b) = queue.pop_front() {
            for &c in &adj[b] {
                if keep(c) && seen.insert(c) {
                    queue.push_back(c);
                }
            }
        }
        seen
    }

    /// Indices of bags containing `v`.
    pub fn bags_containing(&self, v: usize) -> Vec<usize> {
        (0..self.bags.len()).filter(|&b| self.bags[b].contains(v)).collect()
    }

    /// Decomposition induced by a connected set of bag indices.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> Result<Self> {
        let index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &b)| (b, k)).collect();
        let bags = keep.iter().map(|&b| self.bags[b].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|&(a, b)| Some((*index.get(&a)?, *index.get(&b)?)))
            .collect();
        Self::new(bags, edges)
    }
}

/// First counterexample per tree-decomposition property.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TdReport {
    /// A bag mentions a node outside the graph.
    pub unknown_node: Option<usize>,
    /// Property 1: a node in no bag.
    pub uncovered_node: Option<usize>,
    /// Property 2: an edge in no bag.
    pub uncovered_edge: Option<(usize, usize)>,
    /// Property 3: a node whose bags are not connected.
    pub disconnected_node: Option<usize>,
}

impl TdReport {
    pub fn is_valid(&self) -> bool {
        self.unknown_node.is_none()
            && self.uncovered_node.is_none()
            && self.uncovered_edge.is_none()
            && self.disconnected_node.is_none()
    }
}

impl fmt::Display for TdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        let mut parts = Vec::new();
        if let Some(v) = self.unknown_node {
            parts.push(format!("bag mentions unknown node {v}"));
        }
        if let Some(v) = self.uncovered_node {
            parts.push(format!("node {v} lies in no bag"));
        }
        if let Some((a, b)) = self.uncovered_edge {
            parts.push(format!("edge {{{a},{b}}} lies in no bag"));
        }
        if let Some(v) = self.disconnected_node {
            parts.push(format!("bags containing node {v} are disconnected"));
        }
        write!(f, "{}", parts.join("; "))
    }
}

pub fn validate_td(g: &LoopGraph, td: &TreeDecomposition) -> TdReport {
    let n = g.node_count();
    let mut report = TdReport {
        unknown_node: td.bags.iter().flat_map(|b| b.iter()).find(|&v| v >= n),
        ..TdReport::default()
    };
    report.uncovered_node = (0..n).find(|&v| !td.bags.iter().any(|b| b.contains(v)));
    report.uncovered_edge = g
        .edges()
        .iter()
        .copied()
        .find(|&(a, b)| !td.bags.iter().any(|x| x.contains(a) && x.contains(b)));
    report.disconnected_node = (0..n).find(|&v| {
        let holding = td.bags_containing(v);
        match holding.first() {
            None => false,
            Some(&start) => td.reachable(start, |b| td.bags[b].contains(v)).len() != holding.len(),
        }
    });
    report
}

/// `(max |X_i| − 1, spread)` where `spread(v) = Σ_{X_i ∋ v} (|X_i| − 1)`.
pub fn width_and_spread(td: &TreeDecomposition) -> (usize, BTreeMap<usize, usize>) {
    let width = td.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1);
    let mut spread = BTreeMap::new();
    for bag in &td.bags {
        for v in bag.iter() {
            *spread.entry(v).or_insert(0) += bag.len().saturating_sub(1);
        }
    }
    (width, spread)
}

/// Outcome of checking (C1) single plus node per bag, (C2) width within
/// budget and (C3) plus-node spread within budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub c1: bool,
    pub c1_violation: Option<(usize, Vec<usize>)>,
    pub width: usize,
    pub c2: bool,
    pub plus_spread: BTreeMap<usize, usize>,
    pub max_plus_spread: usize,
    pub c3: bool,
    pub bound: usize,
    /// `Σ_bags 2^{|bag|}`, the size scale of the resulting formulation.
    pub estimated_size: f64,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.c1 && self.c2 && self.c3
    }

    /// Budget overruns; these are advisory, only C1 is required.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.c2 {
            out.push(format!(
                "width {} exceeds budget {} (formulation size ~{:.3e})",
                self.width, self.bound, self.estimated_size
            ));
        }
        if !self.c3 {
            out.push(format!(
                "plus-node spread {} exceeds budget {} (formulation size ~{:.3e})",
                self.max_plus_spread, self.bound, self.estimated_size
            ));
        }
        out
    }
}

pub fn check_conditions(g: &LoopGraph, td: &TreeDecomposition, bound: usize) -> ConditionReport {
    let c1_violation = td.bags.iter().enumerate().find_map(|(k, bag)| {
        let plus: Vec<usize> = bag.iter().filter(|&v| g.is_plus(v)).collect();
        (plus.len() > 1).then_some((k, plus))
    });
    let (width, spread) = width_and_spread(td);
    let plus_spread: BTreeMap<usize, usize> = g
        .plus_loops()
        .iter()
        .map(|&i| (i, spread.get(&i).copied().unwrap_or(0)))
        .collect();
    let max_plus_spread = plus_spread.values().copied().max().unwrap_or(0);
    ConditionReport {
        c1: c1_violation.is_none(),
        c1_violation,
        width,
        c2: width <= bound,
        plus_spread,
        max_plus_spread,
        c3: max_plus_spread <= bound,
        bound,
        estimated_size: td.bags.iter().map(|b| 2f64.powi(b.len() as i32)).sum(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// One bag per edge of a forest.
    Acyclic,
    /// Path of triples `{v_i, v_{i+1}, v_n}` on a chordless cycle.
    Cycle,
    /// Star of `{v} ∪ N(v)` bags around the cover; the cover is found
    /// greedily when not supplied.
    VertexCover(Option<Vec<usize>>),
    /// Min-degree elimination ordering.
    MinDegree,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "acyclic" => Ok(Strategy::Acyclic),
            "cycle" => Ok(Strategy::Cycle),
            "vertex-cover" => Ok(Strategy::VertexCover(None)),
            "min-degree" => Ok(Strategy::MinDegree),
            other => Err(Error::Strategy(format!("unknown strategy `{other}`"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Acyclic => "acyclic",
            Strategy::Cycle => "cycle",
            Strategy::VertexCover(_) => "vertex-cover",
            Strategy::MinDegree => "min-degree",
        })
    }
}

/// Builds a decomposition; a graph without nodes gets a single empty bag.
pub fn construct_td(g: &LoopGraph, strategy: &Strategy) -> Result<TreeDecomposition> {
    if g.node_count() == 0 {
        return TreeDecomposition::new(vec![NodeSet::default()], vec![]);
    }
    match strategy {
        Strategy::Acyclic => acyclic_td(g),
        Strategy::Cycle => cycle_td(g),
        Strategy::VertexCover(cover) => vertex_cover_td(g, cover.as_deref()),
        Strategy::MinDegree => min_degree_td(g),
    }
}

/// Connects the given component roots into a chain.
fn chain(edges: &mut Vec<(usize, usize)>, roots: &[usize]) {
    for pair in roots.windows(2) {
        edges.push((pair[0], pair[1]));
    }
}

fn acyclic_td(g: &LoopGraph) -> Result<TreeDecomposition> {
    let n = g.node_count();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut bags = Vec::new();
    let mut edges = Vec::new();
    let mut roots = Vec::new();
    let mut bag_of = vec![usize::MAX; n];

    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut first_child_bag = None;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in g.adjacent(v) {
                if Some(w) == parent[v] {
                    continue;
                }
                if visited[w] {
                    return Err(Error::Strategy(format!("graph has a cycle through edge {{{v},{w}}}")));
                }
                visited[w] = true;
                parent[w] = Some(v);
                let b = bags.len();
                bags.push(NodeSet::from([v, w]));
                bag_of[w] = b;
                if v == root {
                    match first_child_bag {
                        None => first_child_bag = Some(b),
                        Some(first) => edges.push((first, b)),
                    }
                } else {
                    edges.push((bag_of[v], b));
                }
                queue.push_back(w);
            }
        }
        match first_child_bag {
            Some(b) => roots.push(b),
            None => {
                roots.push(bags.len());
                bags.push(NodeSet::from([root]));
            }
        }
    }
    chain(&mut edges, &roots);
    TreeDecomposition::new(bags, edges)
}

fn cycle_td(g: &LoopGraph) -> Result<TreeDecomposition> {
    let n = g.node_count();
    if n < 3 || g.edges().len() != n || (0..n).any(|v| g.degree(v) != 2) {
        return Err(Error::Strategy("graph is not a single chordless cycle".into()));
    }
    let anchor = (0..n)
        .find(|&v| !g.is_plus(v))
        .ok_or_else(|| Error::Strategy("every cycle node carries a plus loop".into()))?;
    let mut order = Vec::with_capacity(n - 1);
    let mut prev = anchor;
    let mut cur = *g.adjacent(anchor).iter().next().expect("degree two");
    while cur != anchor {
        order.push(cur);
        let next = *g.adjacent(cur).iter().find(|&&w| w != prev).expect("degree two");
        prev = cur;
        cur = next;
    }
    if order.len() != n - 1 {
        return Err(Error::Strategy("graph is not a single chordless cycle".into()));
    }
    let bags: Vec<NodeSet> = order.windows(2).map(|w| NodeSet::from([w[0], w[1], anchor])).collect();
    let edges = (1..bags.len()).map(|k| (k - 1, k)).collect();
    TreeDecomposition::new(bags, edges)
}

fn vertex_cover_td(g: &LoopGraph, cover: Option<&[usize]>) -> Result<TreeDecomposition> {
    let n = g.node_count();
    let cover: BTreeSet<usize> = match cover {
        Some(c) => {
            let c: BTreeSet<usize> = c.iter().copied().collect();
            if let Some(&v) = c.iter().find(|&&v| v >= n) {
                return Err(Error::NodeOutOfRange { node: v, n });
            }
            if let Some(&v) = c.iter().find(|&&v| g.is_plus(v)) {
                return Err(Error::Strategy(format!("cover node {v} carries a plus loop")));
            }
            if let Some(&(a, b)) = g.edges().iter().find(|(a, b)| !c.contains(a) && !c.contains(b)) {
                return Err(Error::Strategy(format!("edge {{{a},{b}}} is not covered")));
            }
            c
        }
        None => {
            if let Some((a, b)) = adjacent_plus_pair(g) {
                return Err(Error::PlusSetNotStable(a, b));
            }
            let mut stable: BTreeSet<usize> = g.plus_loops().clone();
            let mut rest: Vec<usize> = (0..n).filter(|v| !g.is_plus(*v)).collect();
            rest.sort_by_key(|&v| (g.degree(v), v));
            for v in rest {
                if g.adjacent(v).iter().all(|w| !stable.contains(w)) {
                    stable.insert(v);
                }
            }
            (0..n).filter(|v| !stable.contains(v)).collect()
        }
    };
    let stable: Vec<usize> = (0..n).filter(|v| !cover.contains(v)).collect();
    let mut bags: Vec<NodeSet> = stable
        .iter()
        .map(|&v| NodeSet::new(g.adjacent(v).iter().copied()).with(v))
        .collect();
    let mut edges = Vec::new();
    if cover.is_empty() {
        let roots: Vec<usize> = (0..bags.len()).collect();
        chain(&mut edges, &roots);
    } else {
        let hub = bags.len();
        bags.push(NodeSet::new(cover.iter().copied()));
        edges.extend((0..hub).map(|k| (k, hub)));
    }
    TreeDecomposition::new(bags, edges)
}

fn min_degree_td(g: &LoopGraph) -> Result<TreeDecomposition> {
    let n = g.node_count();
    let mut fill: Vec<BTreeSet<usize>> = (0..n).map(|v| g.adjacent(v).clone()).collect();
    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut position = vec![0; n];
    let mut elim_bags: Vec<(usize, NodeSet)> = Vec::with_capacity(n);

    for step in 0..n {
        let v = *alive.iter().min_by_key(|&&v| (fill[v].len(), v)).expect("nodes remain");
        position[v] = step;
        let nbrs: Vec<usize> = fill[v].iter().copied().collect();
        for &a in &nbrs {
            fill[a].remove(&v);
            for &b in &nbrs {
                if a != b {
                    fill[a].insert(b);
                }
            }
        }
        elim_bags.push((v, NodeSet::new(nbrs.iter().copied()).with(v)));
        alive.remove(&v);
    }

    let mut edges = Vec::new();
    let mut roots = Vec::new();
    for (k, (v, bag)) in elim_bags.iter().enumerate() {
        let parent = bag.iter().filter(|&u| u != *v).min_by_key(|&u| position[u]);
        match parent {
            Some(u) => edges.push((k, position[u])),
            None => roots.push(k),
        }
    }
    chain(&mut edges, &roots);
    let bags = elim_bags.into_iter().map(|(_, b)| b).collect();
    prune_subsumed(TreeDecomposition::new(bags, edges)?)
}

/// Merges every bag contained in a neighbouring bag into that neighbour.
fn prune_subsumed(mut td: TreeDecomposition) -> Result<TreeDecomposition> {
    loop {
        let hit = td.edges.iter().find_map(|&(a, b)| {
            if td.bags[a].is_subset(&td.bags[b]) {
                Some((a, b))
            } else if td.bags[b].is_subset(&td.bags[a]) {
                Some((b, a))
            } else {
                None
            }
        });
        let Some((gone, keep)) = hit else {
            return Ok(td);
        };
        td = merge_bags(&td, &BTreeSet::from([gone, keep]), td.bags[keep].clone())?;
    }
}

/// Replaces the connected bag set `group` by a single bag `merged`.
fn merge_bags(td: &TreeDecomposition, group: &BTreeSet<usize>, merged: NodeSet) -> Result<TreeDecomposition> {
    let rep = *group.iter().next().expect("nonempty group");
    let mut index = vec![usize::MAX; td.bags.len()];
    let mut bags = Vec::new();
    for (b, bag) in td.bags.iter().enumerate() {
        if group.contains(&b) && b != rep {
            continue;
        }
        index[b] = bags.len();
        bags.push(if b == rep { merged.clone() } else { bag.clone() });
    }
    let remap = |b: usize| if group.contains(&b) { index[rep] } else { index[b] };
    let mut seen = BTreeSet::new();
    let edges = td
        .edges
        .iter()
        .map(|&(a, b)| (remap(a), remap(b)))
        .filter(|&(a, b)| a != b && seen.insert((a.min(b), a.max(b))))
        .collect();
    TreeDecomposition::new(bags, edges)
}

fn require_c1(g: &LoopGraph, td: &TreeDecomposition) -> Result<()> {
    match check_conditions(g, td, usize::MAX).c1_violation {
        Some((bag, nodes)) => Err(Error::C1Violated { bag, nodes }),
        None => Ok(()),
    }
}

fn require_valid(g: &LoopGraph, td: &TreeDecomposition) -> Result<()> {
    let report = validate_td(g, td);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::TreeDecomposition(report.to_string()))
    }
}

/// Collapses, for every plus-loop node, the subtree of bags containing it
/// into one bag holding their union.
pub fn contract_plus_subtrees(g: &LoopGraph, td: &TreeDecomposition) -> Result<TreeDecomposition> {
    require_valid(g, td)?;
    require_c1(g, td)?;
    let mut out = td.clone();
    for &i in g.plus_loops() {
        let group: BTreeSet<usize> = out.bags_containing(i).into_iter().collect();
        if group.len() < 2 {
            continue;
        }
        let merged = group.iter().fold(NodeSet::default(), |acc, &b| acc.union(&out.bags[b]));
        out = merge_bags(&out, &group, merged)?;
    }
    Ok(out)
}

/// A complete sub-hypergraph emitted by [`decompose`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub nodes: NodeSet,
    pub plus_node: Option<usize>,
}

/// Peels leaves (smallest bag index first) off a contracted decomposition.
pub fn decompose(g: &LoopGraph, td: &TreeDecomposition) -> Result<Vec<Block>> {
    require_valid(g, td)?;
    require_c1(g, td)?;
    for &i in g.plus_loops() {
        if td.bags_containing(i).len() > 1 {
            return Err(Error::NotContracted(i));
        }
    }
    if let Some(big) = td.bags.iter().find(|b| b.len() > MAX_BLOCK_NODES) {
        return Err(Error::BlockTooLarge(big.len()));
    }

    let adj = td.adjacency();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive: BTreeSet<usize> = (0..td.len()).collect();
    let mut blocks = Vec::with_capacity(td.len());
    while !alive.is_empty() {
        let leaf = *alive
            .iter()
            .find(|&&b| degree[b] <= 1)
            .expect("a finite tree always has a leaf");
        alive.remove(&leaf);
        for &c in &adj[leaf] {
            if alive.contains(&c) {
                degree[c] -= 1;
            }
        }
        let nodes = td.bags[leaf].clone();
        if nodes.is_empty() {
            continue;
        }
        let plus_node = nodes.iter().find(|&v| g.is_plus(v));
        blocks.push(Block { nodes, plus_node });
    }
    Ok(blocks)
}

/// First pair of adjacent plus-loop nodes, if any.
pub fn adjacent_plus_pair(g: &LoopGraph) -> Option<(usize, usize)> {
    g.edges().iter().copied().find(|&(a, b)| g.is_plus(a) && g.is_plus(b))
}

/// True iff no edge joins two plus-loop nodes.
pub fn stable_plus_set(g: &LoopGraph) -> bool {
    adjacent_plus_pair(g).is_none()
}

/// Size bookkeeping for an exact formulation.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FormulationSize {
    pub blocks: usize,
    /// RLT inequalities emitted by the blocks, before merging duplicates.
    pub block_inequalities: usize,
    /// `Σ_blocks 2^{|block|}`.
    pub predicted_inequalities: usize,
    pub perspective_terms: usize,
    /// `Σ_{plus blocks} 2^{|block|−1}`.
    pub predicted_perspective_terms: usize,
    /// Distinct product monomials in the assembled system.
    pub product_monomials: usize,
}

#[derive(Clone, Debug)]
pub struct ExactFormulation {
    pub blocks: Vec<BlockFormulation>,
    pub system: ConstraintSystem,
    pub size: FormulationSize,
}

/// Union of the per-block hull systems plus minus-loop constraints.
pub fn exact_system(g: &LoopGraph, blocks: &[Block]) -> Result<ExactFormulation> {
    let mut system = ConstraintSystem::for_graph(g);
    system.push_box();
    let mut size = FormulationSize {
        blocks: blocks.len(),
        ..FormulationSize::default()
    };
    let mut formulations = Vec::with_capacity(blocks.len());
    for block in blocks {
        let f = match block.plus_node {
            Some(j) => complete_hull_one_plus_loop(&block.nodes, j)?,
            None => rlt_polytope(&block.nodes)?,
        };
        size.block_inequalities += f.linear.len();
        size.predicted_inequalities += 1 << block.nodes.len();
        size.perspective_terms += f.perspective_terms();
        if block.plus_node.is_some() {
            size.predicted_perspective_terms += 1 << (block.nodes.len() - 1);
        }
        for form in &f.linear {
            system.push_linear(form.clone());
        }
        if let Some(p) = &f.perspective {
            system.push_perspective(p.clone());
        }
        formulations.push(f);
    }
    for form in minus_loop_constraints(g) {
        system.push_linear(form);
    }
    size.product_monomials = system
        .monomials()
        .iter()
        .filter(|m| matches!(m, Monomial::Product(_)))
        .count();
    Ok(ExactFormulation {
        blocks: formulations,
        system,
        size,
    })
}

/// Stable-set check, C1, contraction, leaf peeling and block hulls.
pub fn exact_pipeline(g: &LoopGraph, td: &TreeDecomposition) -> Result<(ExactFormulation, TreeDecomposition)> {
    if let Some((a, b)) = adjacent_plus_pair(g) {
        return Err(Error::PlusSetNotStable(a, b));
    }
    let contracted = contract_plus_subtrees(g, td)?;
    let blocks = decompose(g, &contracted)?;
    Ok((exact_system(g, &blocks)?, contracted))
}
