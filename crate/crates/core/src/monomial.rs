//! Monomial variables, RLT linear forms and the closed perspective `u²/v`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Zero band used by [`perspective_value`].
pub const DEFAULT_TOL: f64 = 1e-12;

/// Most nodes a single window or block may hold (one machine word of bits).
pub const MAX_BLOCK_NODES: usize = 63;

/// Canonical nonempty-or-empty set of node indices, sorted and deduplicated.
///
/// Ordered by cardinality first, then lexicographically, so singletons sort
/// before pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new(nodes: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = nodes.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.0.binary_search(&node).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        NodeSet::new(self.iter().chain(other.iter()))
    }

    pub fn without(&self, node: usize) -> NodeSet {
        NodeSet(self.0.iter().copied().filter(|&v| v != node).collect())
    }

    pub fn with(&self, node: usize) -> NodeSet {
        NodeSet::new(self.iter().chain(std::iter::once(node)))
    }

    /// Members selected by the bits of `mask` (bit `k` picks the `k`-th member).
    pub fn select(&self, mask: u64) -> NodeSet {
        NodeSet(
            self.0
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &v)| v)
                .collect(),
        )
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl serde::Serialize for NodeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl PartialOrd for NodeSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NodeSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl From<&[usize]> for NodeSet {
    fn from(nodes: &[usize]) -> Self {
        NodeSet::new(nodes.iter().copied())
    }
}

impl<const N: usize> From<[usize; N]> for NodeSet {
    fn from(nodes: [usize; N]) -> Self {
        NodeSet::new(nodes)
    }
}

/// A model variable.
///
/// `Product(S)` is `z_S = ∏_{i∈S} z_i` (a node variable when `|S| = 1`),
/// `Loop(i)` is the square variable `z_ii` and `Aux(k)` an auxiliary
/// introduced when lifting perspective terms to rotated cones. `z_∅` is never
/// a variable; it is the constant 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Monomial {
    Product(NodeSet),
    Loop(usize),
    Aux(usize),
}

impl Monomial {
    pub fn node(i: usize) -> Self {
        Monomial::Product(NodeSet(vec![i]))
    }

    /// `None` for the empty product, which is the constant 1.
    pub fn product(nodes: impl IntoIterator<Item = usize>) -> Option<Self> {
        let set = NodeSet::new(nodes);
        (!set.is_empty()).then_some(Monomial::Product(set))
    }

    pub fn square(i: usize) -> Self {
        Monomial::Loop(i)
    }

    pub fn is_node(&self) -> bool {
        matches!(self, Monomial::Product(s) if s.len() == 1)
    }

    /// The single node of a node variable.
    pub fn as_node(&self) -> Option<usize> {
        match self {
            Monomial::Product(s) if s.len() == 1 => Some(s.0[0]),
            _ => None,
        }
    }

    /// Value at the product point extending `z`; `None` for auxiliaries.
    pub fn product_value(&self, z: &[f64]) -> Option<f64> {
        match self {
            Monomial::Product(s) => Some(s.iter().map(|i| z[i]).product()),
            Monomial::Loop(i) => Some(z[*i] * z[*i]),
            Monomial::Aux(_) => None,
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Monomial::Product(s) => {
                write!(f, "z[")?;
                for (k, v) in s.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            Monomial::Loop(i) => write!(f, "zz[{i}]"),
            Monomial::Aux(k) => write!(f, "t[{k}]"),
        }
    }
}

impl FromStr for Monomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Schema(format!("malformed variable id `{s}`"));
        let (head, rest) = s.split_once('[').ok_or_else(bad)?;
        let body = rest.strip_suffix(']').ok_or_else(bad)?;
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        match head {
            "z" => {
                let nodes = body.split(',').map(parse).collect::<Result<Vec<_>>>()?;
                let set = NodeSet::new(nodes.iter().copied());
                if set.len() != nodes.len() || set.is_empty() {
                    return Err(bad());
                }
                Ok(Monomial::Product(set))
            }
            "zz" => Ok(Monomial::Loop(parse(body)?)),
            "t" => Ok(Monomial::Aux(parse(body)?)),
            _ => Err(bad()),
        }
    }
}

/// Values for a set of monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignment(HashMap<Monomial, f64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, m: &Monomial) -> Option<f64> {
        self.0.get(m).copied()
    }

    pub fn insert(&mut self, m: Monomial, value: f64) {
        self.0.insert(m, value);
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.0.contains_key(m)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.0.iter().map(|(m, &v)| (m, v))
    }

    /// Node values `z_0..z_{n-1}`, missing nodes read as 0.
    pub fn node_vector(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.get(&Monomial::node(i)).unwrap_or(0.0)).collect()
    }
}

impl FromIterator<(Monomial, f64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Monomial, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// `constant + Σ coeff · monomial`, kept without zero coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearForm {
    constant: f64,
    terms: BTreeMap<Monomial, f64>,
}

impl LinearForm {
    pub fn constant_form(constant: f64) -> Self {
        Self {
            constant,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut f = Self::default();
        f.add_term(m, 1.0);
        f
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, f64> {
        &self.terms
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_term(&mut self, m: Monomial, coeff: f64) {
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                if coeff != 0.0 {
                    slot.insert(coeff);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if *slot.get() == 0.0 {
                    slot.remove();
                }
            }
        }
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &LinearForm, scale: f64) {
        self.constant += scale * other.constant;
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), scale * c);
        }
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn evaluate(&self, point: &Assignment) -> Result<f64> {
        let mut acc = self.constant;
        for (m, &c) in &self.terms {
            let v = point.get(m).ok_or_else(|| Error::Unassigned(m.to_string()))?;
            acc += c * v;
        }
        Ok(acc)
    }

    /// Exact-bits identity used to merge duplicate inequalities.
    pub fn key(&self) -> FormKey {
        FormKey(
            self.constant.to_bits(),
            self.terms.iter().map(|(m, c)| (m.clone(), c.to_bits())).collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormKey(u64, Vec<(Monomial, u64)>);

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.constant != 0.0 || self.terms.is_empty() {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for (m, &c) in &self.terms {
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag != 1.0 {
                write!(f, "{mag}*")?;
            }
            write!(f, "{m}")?;
            first = false;
        }
        Ok(())
    }
}

/// Linearized RLT factor `ℓ(J1, J2) = Σ_{t⊆J2} (-1)^{|t|} z_{J1∪t}`.
///
/// The empty product contributes the constant 1, so the form always has
/// `2^{|J2|}` contributions.
pub fn ell(j1: &[usize], j2: &[usize]) -> Result<LinearForm> {
    let first = NodeSet::from(j1);
    let second = NodeSet::from(j2);
    if let Some(v) = first.iter().find(|&v| second.contains(v)) {
        return Err(Error::Overlap(v));
    }
    let span = first.len() + second.len();
    if span > MAX_BLOCK_NODES {
        return Err(Error::BlockTooLarge(span));
    }
    Ok(ell_unchecked(&first, &second))
}

pub(crate) fn ell_unchecked(first: &NodeSet, second: &NodeSet) -> LinearForm {
    let mut form = LinearForm::default();
    for mask in 0..(1u64 << second.len()) {
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        match Monomial::product(first.iter().chain(second.select(mask).iter())) {
            Some(m) => form.add_term(m, sign),
            None => form.add_constant(sign),
        }
    }
    form
}

pub fn evaluate(form: &LinearForm, point: &Assignment) -> Result<f64> {
    form.evaluate(point)
}

/// Assigns `z_S = ∏ z_i` and `z_ii = z_i²`; auxiliaries are skipped.
pub fn product_point<'a>(z: &[f64], monomials: impl IntoIterator<Item = &'a Monomial>) -> Assignment {
    monomials
        .into_iter()
        .filter_map(|m| m.product_value(z).map(|v| (m.clone(), v)))
        .collect()
}

/// Closure of `u²/v` with the default zero band.
pub fn perspective_value(u: f64, v: f64) -> Result<f64> {
    perspective_value_with(u, v, DEFAULT_TOL)
}

/// Closure of `u²/v`: `u²/v` for `v > tol`, 0 when both vanish and
/// `+∞` when only `v` does.
pub fn perspective_value_with(u: f64, v: f64, tol: f64) -> Result<f64> {
    if v < -tol {
        return Err(Error::SupportViolated { value: v });
    }
    if v > tol {
        Ok(u * u / v)
    } else if u.abs() <= tol {
        Ok(0.0)
    } else {
        Ok(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(nodes: &[usize]) -> Monomial {
        Monomial::product(nodes.iter().copied()).unwrap()
    }

    #[test]
    fn ell_examples() {
        assert_eq!(ell(&[1], &[]).unwrap(), LinearForm::from_monomial(z(&[1])));

        let f = ell(&[1], &[2]).unwrap();
        assert_eq!(f.constant(), 0.0);
        assert_eq!(f.coefficient(&z(&[1])), 1.0);
        assert_eq!(f.coefficient(&z(&[1, 2])), -1.0);
        assert_eq!(f.len(), 2);

        let g = ell(&[], &[1, 2, 3]).unwrap();
        assert_eq!(g.constant(), 1.0);
        for (nodes, c) in [
            (&[1][..], -1.0),
            (&[2], -1.0),
            (&[3], -1.0),
            (&[1, 2], 1.0),
            (&[1, 3], 1.0),
            (&[2, 3], 1.0),
            (&[1, 2, 3], -1.0),
        ] {
            assert_eq!(g.coefficient(&z(nodes)), c, "{nodes:?}");
        }
        assert_eq!(g.len(), 7);
        assert_eq!(
            g.to_string(),
            "1 - z[1] - z[2] - z[3] + z[1,2] + z[1,3] + z[2,3] - z[1,2,3]"
        );
    }

    #[test]
    fn ell_errors() {
        assert!(matches!(ell(&[1, 2], &[2]), Err(Error::Overlap(2))));
        let big: Vec<usize> = (0..64).collect();
        assert!(matches!(ell(&big, &[]), Err(Error::BlockTooLarge(64))));
    }

    #[test]
    fn evaluate_examples() {
        let p: Assignment = [(z(&[1]), 1.0), (z(&[1, 2]), 0.5)].into_iter().collect();
        assert_eq!(evaluate(&ell(&[1], &[2]).unwrap(), &p).unwrap(), 0.5);
        assert_eq!(evaluate(&ell(&[], &[1]).unwrap(), &p).unwrap(), 0.0);
        let q: Assignment = [(z(&[1, 2]), 0.25)].into_iter().collect();
        assert_eq!(evaluate(&ell(&[1, 2], &[]).unwrap(), &q).unwrap(), 0.25);
        assert!(matches!(
            evaluate(&ell(&[1], &[3]).unwrap(), &q),
            Err(Error::Unassigned(_))
        ));
    }

    #[test]
    fn product_point_examples() {
        let ms = [z(&[0]), z(&[1]), z(&[0, 1]), Monomial::square(0), Monomial::Aux(4)];
        let p = product_point(&[0.5, 0.5], &ms);
        assert_eq!(p.get(&z(&[0])), Some(0.5));
        assert_eq!(p.get(&z(&[0, 1])), Some(0.25));
        assert_eq!(p.get(&Monomial::square(0)), Some(0.25));
        assert!(!p.contains(&Monomial::Aux(4)));

        let p = product_point(&[1.0, 1.0, 1.0], &[z(&[0, 1, 2])]);
        assert_eq!(p.get(&z(&[0, 1, 2])), Some(1.0));
    }

    #[test]
    fn binary_points_make_ell_an_indicator() {
        let window = NodeSet::from([0, 1, 2]);
        let monos: Vec<Monomial> = (1..8u64).map(|m| Monomial::Product(window.select(m))).collect();
        for bits in 0..8u64 {
            let zv: Vec<f64> = (0..3).map(|k| (bits >> k & 1) as f64).collect();
            let p = product_point(&zv, &monos);
            for j in 0..8u64 {
                let pattern = window.select(j);
                let rest = window.select(7 & !j);
                let v = ell(pattern.as_slice(), rest.as_slice()).unwrap().evaluate(&p).unwrap();
                assert_eq!(v, if j == bits { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn perspective_examples() {
        assert_eq!(perspective_value(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(perspective_value(1.0, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(perspective_value(0.25, 0.5).unwrap(), 0.125);
        assert!(matches!(
            perspective_value(0.1, -1e-6),
            Err(Error::SupportViolated { .. })
        ));
        assert_eq!(perspective_value_with(1e-7, 1e-8, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn monomial_ids_round_trip() {
        for m in [z(&[3]), z(&[0, 4, 9]), Monomial::square(2), Monomial::Aux(17)] {
            assert_eq!(m.to_string().parse::<Monomial>().unwrap(), m);
        }
        for bad in ["z[]", "z[1,1]", "y[1]", "z[a]", "zz[1", "t"] {
            assert!(bad.parse::<Monomial>().is_err(), "{bad}");
        }
    }

    #[test]
    fn nodes_sort_before_products_and_loops() {
        let mut v = vec![Monomial::Aux(0), Monomial::square(0), z(&[0, 1]), z(&[2]), z(&[0])];
        v.sort();
        assert_eq!(
            v,
            vec![z(&[0]), z(&[2]), z(&[0, 1]), Monomial::square(0), Monomial::Aux(0)]
        );
    }

    fn subsets(window: &NodeSet) -> impl Iterator<Item = (NodeSet, NodeSet)> + '_ {
        let full = (1u64 << window.len()) - 1;
        (0..=full).map(move |m| (window.select(m), window.select(full & !m)))
    }

    proptest! {
        #[test]
        fn partition_of_unity(zv in prop::collection::vec(0.0f64..=1.0, 1..7)) {
            let window = NodeSet::new(0..zv.len());
            let mut total = 0.0;
            for (j, rest) in subsets(&window) {
                let f = ell(j.as_slice(), rest.as_slice()).unwrap();
                let v = f.evaluate(&product_point(&zv, f.monomials())).unwrap();
                prop_assert!(v >= -1e-9);
                total += v;
            }
            prop_assert!((total - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn telescoping(n in 1usize..7, seed in any::<u64>()) {
            let window = NodeSet::new(0..n);
            let k = (seed % n as u64) as usize;
            let others = window.without(k);
            // random disjoint split of the remaining nodes into J1, J2 and unused
            let mut j1 = Vec::new();
            let mut j2 = Vec::new();
            for (idx, v) in others.iter().enumerate() {
                match (seed >> (2 * idx + 8)) % 3 {
                    0 => j1.push(v),
                    1 => j2.push(v),
                    _ => {}
                }
            }
            let lhs = ell(&j1, &j2).unwrap();
            let mut rhs = ell(&[j1.clone(), vec![k]].concat(), &j2).unwrap();
            rhs.add_scaled(&ell(&j1, &[j2.clone(), vec![k]].concat()).unwrap(), 1.0);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn perspective_is_subadditive(
            u1 in -2.0f64..2.0, v1 in 0.0f64..2.0, u2 in -2.0f64..2.0, v2 in 0.0f64..2.0,
        ) {
            let joint = perspective_value(u1 + u2, v1 + v2).unwrap();
            let split = perspective_value(u1, v1).unwrap() + perspective_value(u2, v2).unwrap();
            prop_assert!(joint <= split + 1e-9 * (1.0 + split.abs()));
        }
    }
}
