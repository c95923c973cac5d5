//! Perspective inequalities for plus loops and the level-`r` hierarchy.
//!
//! For a plus loop `i` and a window `M ⊆ N(i)` containing `i` (with
//! `d = |M|`):
//!
//! ```text
//!     z_ii ≥ Σ_{J⊆M, J∋i} ℓ_d(J, M∖J)² / ℓ_{d−1}(J∖{i}, M∖J)
//!     ℓ_d(J, M∖J) ≥ 0                       for all J ⊆ M
//! ```
//!
//! Each ratio is a closed perspective, so the first inequality lifts to one
//! rotated cone per term.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::hull::minus_loop_constraints;
use crate::instance::LoopGraph;
use crate::monomial::{
    ell_unchecked, perspective_value, Assignment, FormKey, LinearForm, Monomial, NodeSet, MAX_BLOCK_NODES,
};

/// Denominators may dip this far below zero before the support system is
/// considered violated.
pub const SUPPORT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PerspectiveTerm {
    /// The pattern `J` (always contains the loop node).
    pub pattern: NodeSet,
    /// `ℓ_d(J, M∖J)`
    pub numerator: LinearForm,
    /// `ℓ_{d−1}(J∖{i}, M∖J)`
    pub denominator: LinearForm,
}

/// `z_ii ≥ Σ numerator² / denominator` over a window.
#[derive(Clone, Debug, PartialEq)]
pub struct PerspectiveInequality {
    pub node: usize,
    pub window: NodeSet,
    pub terms: Vec<PerspectiveTerm>,
}

impl PerspectiveInequality {
    pub fn target(&self) -> Monomial {
        Monomial::square(self.node)
    }

    pub fn monomials(&self) -> BTreeSet<Monomial> {
        let mut out = BTreeSet::from([self.target()]);
        for t in &self.terms {
            out.extend(t.numerator.monomials().cloned());
            out.extend(t.denominator.monomials().cloned());
        }
        out
    }
}

/// The `2^|M|` forms `ℓ_{|M|}(J, M∖J) ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSystem {
    pub window: NodeSet,
    pub inequalities: Vec<LinearForm>,
}

/// `aux · linear_side ≥ quad_side²` with `aux, linear_side ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotatedConeConstraint {
    pub aux: Monomial,
    pub linear_side: LinearForm,
    pub quad_side: LinearForm,
}

pub fn perspective_inequality(node: usize, window: &NodeSet) -> Result<PerspectiveInequality> {
    if !window.contains(node) {
        return Err(Error::WindowMissesNode {
            node,
            window: window.as_slice().to_vec(),
        });
    }
    if window.len() > MAX_BLOCK_NODES {
        return Err(Error::BlockTooLarge(window.len()));
    }
    let others = window.without(node);
    let full = (1u64 << others.len()) - 1;
    let terms = (0..=full)
        .map(|mask| {
            let kept = others.select(mask);
            let rest = others.select(full & !mask);
            let pattern = kept.with(node);
            PerspectiveTerm {
                numerator: ell_unchecked(&pattern, &rest),
                denominator: ell_unchecked(&kept, &rest),
                pattern,
            }
        })
        .collect();
    Ok(PerspectiveInequality {
        node,
        window: window.clone(),
        terms,
    })
}

pub fn support_system(window: &NodeSet) -> Result<SupportSystem> {
    if window.len() > MAX_BLOCK_NODES {
        return Err(Error::BlockTooLarge(window.len()));
    }
    let full = if window.is_empty() {
        0
    } else {
        (1u64 << window.len()) - 1
    };
    let inequalities = (0..=full)
        .map(|mask| ell_unchecked(&window.select(mask), &window.select(full & !mask)))
        .collect();
    Ok(SupportSystem {
        window: window.clone(),
        inequalities,
    })
}

/// Perspective inequality and support system for plus loop `i` over `window`.
pub fn build_block_system(g: &LoopGraph, i: usize, window: &NodeSet) -> Result<(PerspectiveInequality, SupportSystem)> {
    if i >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            node: i,
            n: g.node_count(),
        });
    }
    if !g.is_plus(i) {
        return Err(Error::NotPlusLoop(i));
    }
    if !window.contains(i) {
        return Err(Error::WindowMissesNode {
            node: i,
            window: window.as_slice().to_vec(),
        });
    }
    let hood = NodeSet::new(g.neighborhood(i)?);
    if !window.is_subset(&hood) {
        return Err(Error::WindowOutsideNeighborhood {
            node: i,
            window: window.as_slice().to_vec(),
        });
    }
    Ok((perspective_inequality(i, window)?, support_system(window)?))
}

/// Replaces each perspective term by a fresh auxiliary `t(J) ≥ 0` and a
/// rotated cone. Returns `z_ii − Σ t(J) ≥ 0` and the cones; auxiliary ids
/// are drawn from `next_aux`.
pub fn lift_to_soc(p: &PerspectiveInequality, next_aux: &mut usize) -> (LinearForm, Vec<RotatedConeConstraint>) {
    let mut linear = LinearForm::from_monomial(p.target());
    let cones = p
        .terms
        .iter()
        .map(|term| {
            let aux = Monomial::Aux(*next_aux);
            *next_aux += 1;
            linear.add_term(aux.clone(), -1.0);
            RotatedConeConstraint {
                aux,
                linear_side: term.denominator.clone(),
                quad_side: term.numerator.clone(),
            }
        })
        .collect();
    (linear, cones)
}

/// Sum of closed perspectives on the right-hand side at `point`.
///
/// Returns `+∞` when some denominator vanishes under a nonzero numerator.
pub fn rhs_value(p: &PerspectiveInequality, point: &Assignment) -> Result<f64> {
    let mut total = 0.0;
    for term in &p.terms {
        let u = term.numerator.evaluate(point)?;
        let v = term.denominator.evaluate(point)?;
        if v < -SUPPORT_TOL {
            return Err(Error::SupportViolated { value: v });
        }
        total += perspective_value(u, v.max(0.0))?;
    }
    Ok(total)
}

/// Linear inequalities (`form ≥ 0`, duplicates merged) and perspective
/// inequalities making up one relaxation or formulation.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSystem {
    n: usize,
    plus_loops: BTreeSet<usize>,
    minus_loops: BTreeSet<usize>,
    linear: Vec<LinearForm>,
    seen: HashSet<FormKey>,
    perspectives: Vec<PerspectiveInequality>,
}

impl ConstraintSystem {
    /// Empty system for the graph's nodes, carrying its loop signs.
    pub fn for_graph(g: &LoopGraph) -> Self {
        Self {
            n: g.node_count(),
            plus_loops: g.plus_loops().clone(),
            minus_loops: g.minus_loops().clone(),
            ..Self::default()
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn plus_loops(&self) -> &BTreeSet<usize> {
        &self.plus_loops
    }

    pub fn minus_loops(&self) -> &BTreeSet<usize> {
        &self.minus_loops
    }

    pub fn linear(&self) -> &[LinearForm] {
        &self.linear
    }

    pub fn perspectives(&self) -> &[PerspectiveInequality] {
        &self.perspectives
    }

    /// Adds `form ≥ 0` unless an identical form is already present.
    pub fn push_linear(&mut self, form: LinearForm) -> bool {
        if self.seen.insert(form.key()) {
            self.linear.push(form);
            true
        } else {
            false
        }
    }

    pub fn push_perspective(&mut self, p: PerspectiveInequality) {
        self.perspectives.push(p);
    }

    /// `z_i ≥ 0` and `1 − z_i ≥ 0` for every node.
    pub fn push_box(&mut self) {
        for i in 0..self.n {
            self.push_linear(ell_unchecked(&NodeSet::from([i]), &NodeSet::default()));
            self.push_linear(ell_unchecked(&NodeSet::default(), &NodeSet::from([i])));
        }
    }

    /// Every monomial referenced by a constraint.
    pub fn monomials(&self) -> BTreeSet<Monomial> {
        let mut out: BTreeSet<Monomial> = self.linear.iter().flat_map(|f| f.monomials().cloned()).collect();
        for p in &self.perspectives {
            out.extend(p.monomials());
        }
        out
    }
}

/// Lexicographic `k`-subsets of `items`.
pub(crate) fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for idx in start..items.len() {
            if items.len() - idx < k - cur.len() {
                break;
            }
            cur.push(items[idx]);
            go(items, k, idx + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Windows of size `min(r, |N(i)|)` around plus loop `i`, in lexicographic order.
pub fn hierarchy_windows(g: &LoopGraph, i: usize, r: usize) -> Result<Vec<NodeSet>> {
    if r < 1 {
        return Err(Error::InvalidLevel(r));
    }
    let hood = g.neighborhood(i)?;
    let others: Vec<usize> = hood.iter().copied().filter(|&v| v != i).collect();
    let size = r.min(hood.len());
    Ok(combinations(&others, size - 1)
        .into_iter()
        .map(|c| NodeSet::new(c).with(i))
        .collect())
}

/// Level-`r` relaxation: perspective systems for every plus loop and window,
/// plus box, McCormick and minus-loop constraints.
pub fn hierarchy(g: &LoopGraph, r: usize) -> Result<ConstraintSystem> {
    if r < 1 {
        return Err(Error::InvalidLevel(r));
    }
    let mut sys = ConstraintSystem::for_graph(g);
    sys.push_box();
    for &(a, b) in g.edges() {
        for form in support_system(&NodeSet::from([a, b]))?.inequalities {
            sys.push_linear(form);
        }
    }
    for form in minus_loop_constraints(g) {
        sys.push_linear(form);
    }
    for &i in g.plus_loops() {
        for window in hierarchy_windows(g, i, r)? {
            let (p, support) = build_block_system(g, i, &window)?;
            for form in support.inequalities {
                sys.push_linear(form);
            }
            sys.push_perspective(p);
        }
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial::{ell, product_point};
    use proptest::prelude::*;

    fn z(nodes: &[usize]) -> Monomial {
        Monomial::product(nodes.iter().copied()).unwrap()
    }

    fn triangle() -> LoopGraph {
        LoopGraph::new(3, [(0, 1), (0, 2), (1, 2)], [0], []).unwrap()
    }

    fn term_for<'a>(p: &'a PerspectiveInequality, pattern: &[usize]) -> &'a PerspectiveTerm {
        p.terms
            .iter()
            .find(|t| t.pattern.as_slice() == pattern)
            .expect("pattern present")
    }

    #[test]
    fn pair_window_matches_worked_example() {
        let (p, s) = build_block_system(&triangle(), 0, &NodeSet::from([0, 1])).unwrap();
        assert_eq!(p.target(), Monomial::square(0));
        assert_eq!(p.terms.len(), 2);
        let both = term_for(&p, &[0, 1]);
        assert_eq!(both.numerator, LinearForm::from_monomial(z(&[0, 1])));
        assert_eq!(both.denominator, LinearForm::from_monomial(z(&[1])));
        let alone = term_for(&p, &[0]);
        assert_eq!(alone.numerator, ell(&[0], &[1]).unwrap());
        assert_eq!(alone.denominator, ell(&[], &[1]).unwrap());
        assert_eq!(alone.denominator.to_string(), "1 - z[1]");

        let expected: Vec<LinearForm> = [(&[][..], &[0, 1][..]), (&[0], &[1]), (&[1], &[0]), (&[0, 1], &[])]
            .iter()
            .map(|(a, b)| ell(a, b).unwrap())
            .collect();
        assert_eq!(s.inequalities, expected);
    }

    #[test]
    fn full_window_matches_three_node_example() {
        let (p, s) = build_block_system(&triangle(), 0, &NodeSet::from([0, 1, 2])).unwrap();
        assert_eq!(p.terms.len(), 4);
        assert_eq!(s.inequalities.len(), 8);
        assert_eq!(term_for(&p, &[0, 1, 2]).denominator.to_string(), "z[1,2]");
        assert_eq!(term_for(&p, &[0, 1]).denominator.to_string(), "z[1] - z[1,2]");
        assert_eq!(term_for(&p, &[0, 2]).denominator.to_string(), "z[2] - z[1,2]");
        assert_eq!(term_for(&p, &[0]).denominator.to_string(), "1 - z[1] - z[2] + z[1,2]");
        assert_eq!(
            term_for(&p, &[0]).numerator.to_string(),
            "z[0] - z[0,1] - z[0,2] + z[0,1,2]"
        );
    }

    #[test]
    fn singleton_window_is_the_square_bound() {
        let (p, s) = build_block_system(&triangle(), 0, &NodeSet::from([0])).unwrap();
        assert_eq!(p.terms.len(), 1);
        assert_eq!(p.terms[0].numerator, LinearForm::from_monomial(z(&[0])));
        assert_eq!(p.terms[0].denominator, LinearForm::constant_form(1.0));
        assert_eq!(s.inequalities.len(), 2);
    }

    #[test]
    fn block_system_errors() {
        let g = LoopGraph::new(4, [(0, 1), (1, 2)], [0], [2]).unwrap();
        assert!(matches!(
            build_block_system(&g, 1, &NodeSet::from([1])),
            Err(Error::NotPlusLoop(1))
        ));
        assert!(matches!(
            build_block_system(&g, 0, &NodeSet::from([0, 2])),
            Err(Error::WindowOutsideNeighborhood { .. })
        ));
        assert!(matches!(
            build_block_system(&g, 0, &NodeSet::from([1])),
            Err(Error::WindowMissesNode { .. })
        ));
    }

    #[test]
    fn lifting_counts() {
        for (window, cones) in [(vec![0, 1], 2), (vec![0, 1, 2], 4), (vec![0], 1)] {
            let p = perspective_inequality(0, &NodeSet::new(window)).unwrap();
            let mut next = 0;
            let (lin, cs) = lift_to_soc(&p, &mut next);
            assert_eq!(cs.len(), cones);
            assert_eq!(next, cones);
            assert_eq!(lin.len(), cones + 1);
            assert_eq!(lin.coefficient(&Monomial::square(0)), 1.0);
        }
        let p = perspective_inequality(0, &NodeSet::from([0])).unwrap();
        let (_, cs) = lift_to_soc(&p, &mut 0);
        assert_eq!(cs[0].linear_side, LinearForm::constant_form(1.0));
        assert_eq!(cs[0].quad_side, LinearForm::from_monomial(z(&[0])));
    }

    #[test]
    fn hierarchy_windows_on_the_triangle() {
        let g = triangle();
        let r2 = hierarchy(&g, 2).unwrap();
        let windows: Vec<_> = r2.perspectives().iter().map(|p| p.window.clone()).collect();
        assert_eq!(windows, vec![NodeSet::from([0, 1]), NodeSet::from([0, 2])]);
        let r3 = hierarchy(&g, 3).unwrap();
        assert_eq!(r3.perspectives().len(), 1);
        assert_eq!(r3.perspectives()[0].window, NodeSet::from([0, 1, 2]));
        // windows larger than N(i) fall back to N(i)
        assert_eq!(hierarchy(&g, 7).unwrap().perspectives().len(), 1);
        assert!(matches!(hierarchy(&g, 0), Err(Error::InvalidLevel(0))));
    }

    #[test]
    fn hierarchy_without_plus_loops() {
        let g = LoopGraph::new(3, [(0, 1), (1, 2)], [], [1]).unwrap();
        let sys = hierarchy(&g, 2).unwrap();
        assert!(sys.perspectives().is_empty());
        // 6 box + 4 McCormick forms per edge + 1 minus-loop form
        assert_eq!(sys.linear().len(), 6 + 4 * 2 + 1);
    }

    #[test]
    fn rhs_at_the_origin_is_zero() {
        let p = perspective_inequality(0, &NodeSet::from([0, 1, 2])).unwrap();
        let point = product_point(&[0.0; 3], &p.monomials());
        assert_eq!(rhs_value(&p, &point).unwrap(), 0.0);
    }

    #[test]
    fn rhs_reports_violated_support() {
        let p = perspective_inequality(0, &NodeSet::from([0, 1])).unwrap();
        let point: Assignment = [(z(&[0]), 0.5), (z(&[1]), 1.5), (z(&[0, 1]), 0.2)]
            .into_iter()
            .collect();
        assert!(matches!(rhs_value(&p, &point), Err(Error::SupportViolated { .. })));
        // a vanishing denominator under a nonzero numerator is unbounded
        let point: Assignment = [(z(&[0]), 0.5), (z(&[1]), 1.0), (z(&[0, 1]), 0.2)]
            .into_iter()
            .collect();
        assert_eq!(rhs_value(&p, &point).unwrap(), f64::INFINITY);
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
    }

    fn random_graph(n: usize, seed: u64) -> LoopGraph {
        let mut bits = seed;
        let mut next = || {
            bits ^= bits << 13;
            bits ^= bits >> 7;
            bits ^= bits << 17;
            bits
        };
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if next() % 2 == 0 {
                    edges.push((a, b));
                }
            }
        }
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for i in 0..n {
            match next() % 3 {
                0 => plus.push(i),
                1 => minus.push(i),
                _ => {}
            }
        }
        LoopGraph::new(n, edges, plus, minus).unwrap()
    }

    proptest! {
        #[test]
        fn perspective_sum_equals_square_at_product_points(
            n in 1usize..6, seed in 1u64.., zv in prop::collection::vec(0.0f64..=1.0, 6),
        ) {
            let g = random_graph(n, seed);
            for &i in g.plus_loops() {
                let hood = g.neighborhood(i).unwrap();
                for r in 1..=hood.len() {
                    for w in hierarchy_windows(&g, i, r).unwrap() {
                        let (p, s) = build_block_system(&g, i, &w).unwrap();
                        let point = product_point(&zv, &p.monomials());
                        for f in &s.inequalities {
                            let sp = product_point(&zv, f.monomials());
                            prop_assert!(f.evaluate(&sp).unwrap() >= -1e-9);
                        }
                        let rhs = rhs_value(&p, &point).unwrap();
                        prop_assert!((rhs - zv[i] * zv[i]).abs() <= 1e-7);
                    }
                }
            }
        }

        #[test]
        fn larger_windows_dominate(
            extra in 0usize..4, seed in any::<u64>(), lambda in 0.0f64..=1.0,
            za in prop::collection::vec(0.0f64..=1.0, 5), zb in prop::collection::vec(0.0f64..=1.0, 5),
        ) {
            // a mixture of two product points satisfies every support form
            // without being a product point itself
            let m2 = NodeSet::new(0..(2 + extra).min(5));
            let drop = 1 + (seed as usize % (m2.len() - 1));
            let m1 = m2.without(m2.as_slice()[drop]);
            let p1 = perspective_inequality(0, &m1).unwrap();
            let p2 = perspective_inequality(0, &m2).unwrap();
            let pa = product_point(&za, &p2.monomials());
            let pb = product_point(&zb, &p2.monomials());
            let point: Assignment = pa
                .iter()
                .map(|(m, v)| (m.clone(), lambda * v + (1.0 - lambda) * pb.get(m).unwrap()))
                .collect();
            let r1 = rhs_value(&p1, &point).unwrap();
            let r2 = rhs_value(&p2, &point).unwrap();
            prop_assert!(r2 >= r1 - 1e-9);
        }

        #[test]
        fn lifted_cones_are_tight_at_perspective_values(zv in prop::collection::vec(0.0f64..=1.0, 4)) {
            let p = perspective_inequality(1, &NodeSet::from([0, 1, 2, 3])).unwrap();
            let mut point = product_point(&zv, &p.monomials());
            let (lin, cones) = lift_to_soc(&p, &mut 0);
            let mut sum = 0.0;
            for cone in &cones {
                let u = cone.quad_side.evaluate(&point).unwrap();
                let v = cone.linear_side.evaluate(&point).unwrap();
                let t = perspective_value(u, v.max(0.0)).unwrap();
                prop_assert!((t * v - u * u).abs() <= 1e-12);
                point.insert(cone.aux.clone(), t);
                sum += t;
            }
            point.insert(Monomial::square(1), sum);
            prop_assert!(lin.evaluate(&point).unwrap().abs() <= 1e-12);
            prop_assert!((sum - rhs_value(&p, &point).unwrap()).abs() <= 1e-12);
        }

        #[test]
        fn hierarchy_emits_the_predicted_number_of_systems(n in 1usize..8, seed in 1u64.., r in 1usize..9) {
            let g = random_graph(n, seed);
            let expected: usize = g
                .plus_loops()
                .iter()
                .map(|&i| {
                    let size = g.neighborhood(i).unwrap().len();
                    binomial(size - 1, r.min(size) - 1)
                })
                .sum();
            prop_assert_eq!(hierarchy(&g, r).unwrap().perspectives().len(), expected);
        }
    }
}
