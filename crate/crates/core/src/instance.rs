//! Sparse QP instances over the unit box and their loop-graph view.
//!
//! An instance is `min z'Qz + c'z` over `z ∈ [0,1]^n`. Only the nonzero
//! pattern of `Q` matters for the graph: every off-diagonal nonzero is an
//! edge, every positive diagonal entry a plus loop and every negative one a
//! minus loop.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric sparse quadratic objective plus a linear term.
///
/// Off-diagonal pairs are stored once with `i < j`; the objective counts them
/// twice.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseQP {
    n: usize,
    diag: BTreeMap<usize, f64>,
    off: BTreeMap<(usize, usize), f64>,
    c: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    n: usize,
    q: Vec<(usize, usize, f64)>,
    c: Vec<f64>,
}

impl SparseQP {
    /// Builds an instance from `(i, j, value)` triplets.
    ///
    /// `(j, i)` mirrors of an `(i, j)` entry are accepted when the values
    /// agree. Zero values are dropped after the duplicate checks.
    pub fn new(n: usize, entries: &[(usize, usize, f64)], c: Vec<f64>) -> Result<Self> {
        if c.len() != n {
            return Err(Error::Instance(format!("c has {} entries, expected {}", c.len(), n)));
        }
        if let Some(v) = c.iter().find(|v| !v.is_finite()) {
            return Err(Error::Instance(format!("non-finite linear coefficient {v}")));
        }

        // (lo, hi) -> (value, seen as written (lo, hi), seen mirrored)
        let mut raw: BTreeMap<(usize, usize), (f64, bool, bool)> = BTreeMap::new();
        for &(i, j, v) in entries {
            for node in [i, j] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if !v.is_finite() {
                return Err(Error::Instance(format!("non-finite coefficient at ({i}, {j})")));
            }
            let key = (i.min(j), i.max(j));
            let mirrored = i > j;
            match raw.get_mut(&key) {
                None => {
                    raw.insert(key, (v, !mirrored, mirrored));
                }
                Some(slot) => {
                    let seen = if mirrored { &mut slot.2 } else { &mut slot.1 };
                    if *seen || i == j {
                        return Err(Error::DuplicateEntry(key.0, key.1));
                    }
                    if slot.0 != v {
                        return Err(Error::NonSymmetric {
                            i: key.0,
                            j: key.1,
                            a: slot.0,
                            b: v,
                        });
                    }
                    *seen = true;
                }
            }
        }

        let mut diag = BTreeMap::new();
        let mut off = BTreeMap::new();
        for ((i, j), (v, _, _)) in raw {
            if v == 0.0 {
                continue;
            }
            if i == j {
                diag.insert(i, v);
            } else {
                off.insert((i, j), v);
            }
        }
        Ok(Self { n, diag, off, c })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        Self::new(doc.n, &doc.q, doc.c)
    }

    pub fn to_json(&self) -> String {
        let q = self
            .diag
            .iter()
            .map(|(&i, &v)| (i, i, v))
            .chain(self.off.iter().map(|(&(i, j), &v)| (i, j, v)))
            .collect();
        let doc = InstanceDoc {
            n: self.n,
            q,
            c: self.c.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("instance serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &BTreeMap<usize, f64> {
        &self.diag
    }

    pub fn off_diag(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.off
    }

    pub fn linear(&self) -> &[f64] {
        &self.c
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag.get(&i).copied().unwrap_or(0.0)
        } else {
            self.off.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
        }
    }

    /// `z'Qz + c'z` at a point of the box.
    pub fn objective(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.n);
        let quad_diag: f64 = self.diag.iter().map(|(&i, &q)| q * z[i] * z[i]).sum();
        let quad_off: f64 = self.off.iter().map(|(&(i, j), &q)| 2.0 * q * z[i] * z[j]).sum();
        let lin: f64 = self.c.iter().zip(z).map(|(c, z)| c * z).sum();
        quad_diag + quad_off + lin
    }

    /// Node-relabelled copy: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let entries: Vec<_> = self
            .diag
            .iter()
            .map(|(&i, &v)| (perm[i], perm[i], v))
            .chain(self.off.iter().map(|(&(i, j), &v)| (perm[i], perm[j], v)))
            .collect();
        let mut c = vec![0.0; self.n];
        for (i, &v) in self.c.iter().enumerate() {
            c[perm[i]] = v;
        }
        Self::new(self.n, &entries, c)
    }
}

/// Nodes, edges and signed loops of an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    plus: BTreeSet<usize>,
    minus: BTreeSet<usize>,
    adj: Vec<BTreeSet<usize>>,
}

impl LoopGraph {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        plus: impl IntoIterator<Item = usize>,
        minus: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut adj = vec![BTreeSet::new(); n];
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            for node in [a, b] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if a == b {
                return Err(Error::Instance(format!("self-pair ({a}, {a}) is not an edge")));
            }
            edge_set.insert((a.min(b), a.max(b)));
            adj[a].insert(b);
            adj[b].insert(a);
        }
        let plus: BTreeSet<usize> = plus.into_iter().collect();
        let minus: BTreeSet<usize> = minus.into_iter().collect();
        for &node in plus.iter().chain(&minus) {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        if let Some(&both) = plus.intersection(&minus).next() {
            return Err(Error::Instance(format!("node {both} has both a plus and a minus loop")));
        }
        Ok(Self {
            n,
            edges: edge_set,
            plus,
            minus,
            adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn plus_loops(&self) -> &BTreeSet<usize> {
        &self.plus
    }

    pub fn minus_loops(&self) -> &BTreeSet<usize> {
        &self.minus
    }

    pub fn is_plus(&self, i: usize) -> bool {
        self.plus.contains(&i)
    }

    pub fn has_loop(&self, i: usize) -> bool {
        self.plus.contains(&i) || self.minus.contains(&i)
    }

    /// Adjacent nodes, excluding `i` itself.
    pub fn adjacent(&self, i: usize) -> &BTreeSet<usize> {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// `N(i)`: adjacent nodes, plus `i` itself when it carries a loop.
    pub fn neighborhood(&self, i: usize) -> Result<Vec<usize>> {
        if i >= self.n {
            return Err(Error::NodeOutOfRange { node: i, n: self.n });
        }
        let mut out: BTreeSet<usize> = self.adj[i].clone();
        if self.has_loop(i) {
            out.insert(i);
        }
        Ok(out.into_iter().collect())
    }

    /// Largest degree among plus-loop nodes (0 without plus loops).
    pub fn max_plus_degree(&self) -> usize {
        self.plus.iter().map(|&i| self.degree(i)).max().unwrap_or(0)
    }
}

impl From<&SparseQP> for LoopGraph {
    fn from(qp: &SparseQP) -> Self {
        build_graph(qp)
    }
}

pub fn build_graph(qp: &SparseQP) -> LoopGraph {
    let plus = qp.diag.iter().filter(|(_, &v)| v > 0.0).map(|(&i, _)| i);
    let minus = qp.diag.iter().filter(|(_, &v)| v < 0.0).map(|(&i, _)| i);
    LoopGraph::new(qp.n, qp.off.keys().copied(), plus, minus).expect("a validated instance always yields a valid graph")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_diagonal_and_offdiagonal() {
        let qp = SparseQP::from_json(r#"{"n":3,"q":[[0,0,1.0],[1,2,-2.0]],"c":[0,0,0]}"#).unwrap();
        assert_eq!(qp.diag().get(&0), Some(&1.0));
        assert_eq!(qp.diag().len(), 1);
        assert_eq!(qp.off_diag().get(&(1, 2)), Some(&-2.0));
        assert_eq!(qp.off_diag().len(), 1);
    }

    #[test]
    fn zero_entries_are_dropped() {
        let qp = SparseQP::from_json(r#"{"n":2,"q":[[0,1,0.0]],"c":[1,-1]}"#).unwrap();
        assert!(qp.off_diag().is_empty());
        assert_eq!(qp.linear(), &[1.0, -1.0]);
    }

    #[test]
    fn out_of_range_index() {
        let err = SparseQP::from_json(r#"{"n":2,"q":[[0,3,1.0]],"c":[0,0]}"#).unwrap_err();
        assert!(matches!(err, Error::NodeOutOfRange { node: 3, n: 2 }));
    }

    #[test]
    fn duplicates_and_asymmetry() {
        let dup = SparseQP::from_json(r#"{"n":2,"q":[[0,1,1.0],[0,1,1.0]],"c":[0,0]}"#);
        assert!(matches!(dup, Err(Error::DuplicateEntry(0, 1))));
        let asym = SparseQP::from_json(r#"{"n":2,"q":[[0,1,1.0],[1,0,2.0]],"c":[0,0]}"#);
        assert!(matches!(asym, Err(Error::NonSymmetric { i: 0, j: 1, .. })));
        let mirror = SparseQP::from_json(r#"{"n":2,"q":[[0,1,1.5],[1,0,1.5]],"c":[0,0]}"#).unwrap();
        assert_eq!(mirror.q(1, 0), 1.5);
        let diag_dup = SparseQP::from_json(r#"{"n":2,"q":[[1,1,1.0],[1,1,1.0]],"c":[0,0]}"#);
        assert!(matches!(diag_dup, Err(Error::DuplicateEntry(1, 1))));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(SparseQP::from_json("{"), Err(Error::Json(_))));
        assert!(matches!(
            SparseQP::from_json(r#"{"n":2,"q":[],"c":[0]}"#),
            Err(Error::Instance(_))
        ));
        assert!(SparseQP::from_json(r#"{"n":2,"q":[[0.5,1,1.0]],"c":[0,0]}"#).is_err());
    }

    #[test]
    fn graph_of_the_triangle_example() {
        // nodes 1,2,3 of the worked example map to 0,1,2
        let qp = SparseQP::new(3, &[(0, 0, 1.0), (0, 1, -1.0), (0, 2, 2.0), (1, 2, 1.0)], vec![0.0; 3]).unwrap();
        let g = build_graph(&qp);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(g.plus_loops().iter().copied().collect::<Vec<_>>(), vec![0]);
        assert!(g.minus_loops().is_empty());
        assert_eq!(g.neighborhood(0).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn empty_and_signed_graphs() {
        let g = build_graph(&SparseQP::new(2, &[], vec![0.0; 2]).unwrap());
        assert!(g.edges().is_empty() && g.plus_loops().is_empty() && g.minus_loops().is_empty());

        let qp = SparseQP::new(2, &[(0, 0, -1.0), (1, 1, 2.0), (0, 1, 1.0)], vec![0.0; 2]).unwrap();
        let g = build_graph(&qp);
        assert!(g.minus_loops().contains(&0));
        assert!(g.plus_loops().contains(&1));
        assert!(g.has_edge(1, 0));
    }

    #[test]
    fn neighborhoods() {
        let g = LoopGraph::new(6, [(3, 2), (3, 5)], [0], []).unwrap();
        assert_eq!(g.neighborhood(0).unwrap(), vec![0]);
        assert_eq!(g.neighborhood(3).unwrap(), vec![2, 5]);
        assert!(matches!(g.neighborhood(6), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn permuting_labels_permutes_the_graph() {
        let qp = SparseQP::new(4, &[(0, 0, 1.0), (0, 1, -1.0), (2, 3, 0.5), (3, 3, -2.0)], vec![0.0; 4]).unwrap();
        let perm = [2, 0, 3, 1];
        let g = build_graph(&qp);
        let gp = build_graph(&qp.permuted(&perm).unwrap());
        let mapped: BTreeSet<_> = g
            .edges()
            .iter()
            .map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
            .collect();
        assert_eq!(&mapped, gp.edges());
        let plus: BTreeSet<_> = g.plus_loops().iter().map(|&i| perm[i]).collect();
        assert_eq!(&plus, gp.plus_loops());
        assert_eq!(gp.edges().len(), qp.off_diag().len());
    }
}
