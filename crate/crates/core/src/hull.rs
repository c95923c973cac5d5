//! Exact convex-hull systems for complete blocks.
//!
//! A loop-free complete block on `V` is described by the `2^|V|` RLT forms
//! `ℓ_n(J, V∖J) ≥ 0`. Adding a single plus loop `j` only requires the
//! perspective inequality with window `V`. Minus loops contribute the linear
//! relaxation `z_ii ≤ z_i`.

use crate::error::{Error, Result};
use crate::instance::LoopGraph;
use crate::monomial::{ell_unchecked, LinearForm, Monomial, NodeSet, MAX_BLOCK_NODES};
use crate::relaxation::{perspective_inequality, support_system, PerspectiveInequality};

#[derive(Clone, Debug, PartialEq)]
pub struct BlockFormulation {
    pub nodes: NodeSet,
    pub plus_node: Option<usize>,
    pub linear: Vec<LinearForm>,
    pub perspective: Option<PerspectiveInequality>,
    /// The `2^|nodes| − 1` product monomials of the block.
    pub monomials: Vec<Monomial>,
}

impl BlockFormulation {
    pub fn perspective_terms(&self) -> usize {
        self.perspective.as_ref().map_or(0, |p| p.terms.len())
    }
}

fn check_size(nodes: &NodeSet) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::Instance("a block needs at least one node".into()));
    }
    if nodes.len() > MAX_BLOCK_NODES {
        return Err(Error::BlockTooLarge(nodes.len()));
    }
    Ok(())
}

/// RLT description of the multilinear polytope of the complete block.
pub fn rlt_polytope(nodes: &NodeSet) -> Result<BlockFormulation> {
    check_size(nodes)?;
    let linear = support_system(nodes)?.inequalities;
    let monomials = (1..1u64 << nodes.len())
        .map(|mask| Monomial::Product(nodes.select(mask)))
        .collect();
    Ok(BlockFormulation {
        nodes: nodes.clone(),
        plus_node: None,
        linear,
        perspective: None,
        monomials,
    })
}

/// Hull of a complete block whose only loop is a plus loop at `j`.
pub fn complete_hull_one_plus_loop(nodes: &NodeSet, j: usize) -> Result<BlockFormulation> {
    check_size(nodes)?;
    if !nodes.contains(j) {
        return Err(Error::WindowMissesNode {
            node: j,
            window: nodes.as_slice().to_vec(),
        });
    }
    let mut block = rlt_polytope(nodes)?;
    block.plus_node = Some(j);
    block.perspective = Some(perspective_inequality(j, nodes)?);
    Ok(block)
}

/// `z_i − z_ii ≥ 0`, `z_i ≥ 0` and `1 − z_i ≥ 0` for every minus loop.
pub fn minus_loop_constraints(g: &LoopGraph) -> Vec<LinearForm> {
    let mut out = Vec::with_capacity(3 * g.minus_loops().len());
    for &i in g.minus_loops() {
        let mut f = LinearForm::from_monomial(Monomial::node(i));
        f.add_term(Monomial::square(i), -1.0);
        out.push(f);
        out.push(ell_unchecked(&NodeSet::from([i]), &NodeSet::default()));
        out.push(ell_unchecked(&NodeSet::default(), &NodeSet::from([i])));
    }
    out
}
