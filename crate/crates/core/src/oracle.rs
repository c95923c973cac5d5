//! Brute-force global minimization, product-point sampling and constraint
//! validation for small instances.
//!
//! The minimum of `z'Qz + c'z` over the box is attained with every node
//! lacking a plus loop at 0 or 1. Once those are fixed, a plus-loop node
//! whose neighbours are all fixed sees a convex parabola and is minimized in
//! closed form; plus-loop nodes that cannot be handled that way are searched
//! on a grid.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{build_graph, LoopGraph, SparseQP};
use crate::monomial::{perspective_value, product_point, Assignment, LinearForm, Monomial, NodeSet};
use crate::relaxation::{
    perspective_inequality, rhs_value, support_system, ConstraintSystem, PerspectiveInequality, SUPPORT_TOL,
};

/// Most non-plus-loop nodes enumerated by [`global_min`].
pub const MAX_BINARY_NODES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    /// Exact: every plus-loop node was minimized in closed form.
    ExactStable,
    /// Approximate: some plus-loop coordinates were searched on a grid.
    Grid,
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMode::ExactStable => "exact-stable",
            OracleMode::Grid => "grid",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Grid spacing for plus-loop coordinates that need a grid.
    pub grid_step: f64,
    /// Grid every plus-loop coordinate, even when closed form applies.
    pub force_grid: bool,
    pub max_binary: usize,
    /// Cap on the number of objective evaluations.
    pub max_evaluations: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            grid_step: 1e-3,
            force_grid: false,
            max_binary: MAX_BINARY_NODES,
            max_evaluations: 2e8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub mode: OracleMode,
    /// Effective spacing, present in grid mode.
    pub grid_step: Option<f64>,
    /// `Σ_{gridded i} L_i`; the exact minimum is at least
    /// `value − lipschitz · grid_step`.
    pub lipschitz: Option<f64>,
}

pub fn global_min(qp: &SparseQP) -> Result<OracleResult> {
    global_min_with(qp, &OracleOptions::default())
}

/// Per-coordinate bound `2|q_ii| + 2 Σ_j |q_ij| + |c_i|` on `|∂f/∂z_i|`
/// over the box.
pub fn lipschitz_bound(qp: &SparseQP, i: usize) -> f64 {
    let mut l = 2.0 * qp.q(i, i).abs() + qp.linear()[i].abs();
    for (&(a, b), &q) in qp.off_diag() {
        if a == i || b == i {
            l += 2.0 * q.abs();
        }
    }
    l
}

/// Minimizer of `α z² + β z` on `[0, 1]` for `α > 0`; ties go to the
/// smaller coordinate.
fn parabola_min(alpha: f64, beta: f64) -> (f64, f64) {
    let stationary = (-beta / (2.0 * alpha)).clamp(0.0, 1.0);
    let mut best = (0.0, 0.0);
    for z in [stationary, 1.0] {
        let v = alpha * z * z + beta * z;
        if v < best.1 {
            best = (z, v);
        }
    }
    best
}

pub fn global_min_with(qp: &SparseQP, opts: &OracleOptions) -> Result<OracleResult> {
    let g = build_graph(qp);
    let n = qp.n();
    let mut closed: BTreeSet<usize> = BTreeSet::new();
    if !opts.force_grid {
        for &i in g.plus_loops() {
            if g.adjacent(i).iter().all(|j| !closed.contains(j)) {
                closed.insert(i);
            }
        }
    }
    let gridded: Vec<usize> = g.plus_loops().difference(&closed).copied().collect();
    let binary: Vec<usize> = (0..n).filter(|&i| !g.is_plus(i)).collect();
    if binary.len() > opts.max_binary {
        return Err(Error::Budget(format!(
            "{} non-plus-loop nodes, at most {} can be enumerated",
            binary.len(),
            opts.max_binary
        )));
    }
    let steps = if gridded.is_empty() {
        1
    } else {
        if !(opts.grid_step > 0.0 && opts.grid_step <= 1.0) {
            return Err(Error::Budget(format!(
                "grid step {} must lie in (0, 1]",
                opts.grid_step
            )));
        }
        (1.0 / opts.grid_step).ceil() as usize
    };
    let evaluations = 2f64.powi(binary.len() as i32) * ((steps + 1) as f64).powi(gridded.len() as i32);
    if evaluations > opts.max_evaluations {
        return Err(Error::Budget(format!(
            "{evaluations:.3e} evaluations exceed the cap of {:.3e}",
            opts.max_evaluations
        )));
    }

    // Fixed coordinates: binary nodes first, then gridded ones.
    let fixed: Vec<usize> = binary.iter().chain(&gridded).copied().collect();
    let radix: Vec<usize> = binary
        .iter()
        .map(|_| 2)
        .chain(gridded.iter().map(|_| steps + 1))
        .collect();
    let scale: Vec<f64> = binary
        .iter()
        .map(|_| 1.0)
        .chain(gridded.iter().map(|_| steps as f64))
        .collect();
    let fixed_edges: Vec<(usize, usize, f64)> = qp
        .off_diag()
        .iter()
        .filter(|((a, b), _)| !closed.contains(a) && !closed.contains(b))
        .map(|(&(a, b), &q)| (a, b, 2.0 * q))
        .collect();
    // (node, diagonal, linear, coupling to neighbours)
    let closed_terms: Vec<(usize, f64, f64, Coupling)> = closed
        .iter()
        .map(|&i| {
            let coupling = g.adjacent(i).iter().map(|&j| (j, 2.0 * qp.q(i, j))).collect();
            (i, qp.q(i, i), qp.linear()[i], coupling)
        })
        .collect();

    let mut digits = vec![0usize; fixed.len()];
    let mut z = vec![0.0; n];
    let mut best_value = f64::INFINITY;
    let mut best_z = z.clone();
    loop {
        for (k, &node) in fixed.iter().enumerate() {
            z[node] = digits[k] as f64 / scale[k];
        }
        let mut value = 0.0;
        for &node in &fixed {
            value += (qp.q(node, node) * z[node] + qp.linear()[node]) * z[node];
        }
        for &(a, b, q2) in &fixed_edges {
            value += q2 * z[a] * z[b];
        }
        for (i, alpha, c, coupling) in &closed_terms {
            let beta = c + coupling.iter().map(|&(j, w)| w * z[j]).sum::<f64>();
            let (zi, vi) = parabola_min(*alpha, beta);
            z[*i] = zi;
            value += vi;
        }
        if value < best_value {
            best_value = value;
            best_z.copy_from_slice(&z);
        }

        let mut k = 0;
        while k < digits.len() {
            digits[k] += 1;
            if digits[k] < radix[k] {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
        if k == digits.len() {
            break;
        }
    }

    let (mode, grid_step, lipschitz) = if gridded.is_empty() {
        (OracleMode::ExactStable, None, None)
    } else {
        let l = gridded.iter().map(|&i| lipschitz_bound(qp, i)).sum();
        (OracleMode::Grid, Some(1.0 / steps as f64), Some(l))
    };
    Ok(OracleResult {
        value: best_value,
        argmin: best_z,
        mode,
        grid_step,
        lipschitz,
    })
}

/// Product points for validity testing.
///
/// The list starts with a fixed battery (all binary points when `|V| ≤ 4`,
/// otherwise the all-zeros and all-ones vertices) followed by `count`
/// uniform points, each extended to `monomials` by [`product_point`].
pub fn sample_product_points(
    g: &LoopGraph,
    monomials: &BTreeSet<Monomial>,
    count: usize,
    seed: u64,
) -> Vec<Assignment> {
    sample_node_points(g.node_count(), count, seed)
        .iter()
        .map(|z| product_point(z, monomials))
        .collect()
}

/// Raw node vectors behind [`sample_product_points`].
pub fn sample_node_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if n <= 4 {
        for bits in 0..1u32 << n {
            out.push((0..n).map(|k| f64::from(bits >> k & 1)).collect());
        }
    } else {
        out.push(vec![0.0; n]);
        out.push(vec![1.0; n]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        out.push((0..n).map(|_| rng.gen::<f64>()).collect());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Box,
    Linear,
    Support,
    Perspective,
    Unassigned,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub constraint: String,
    pub slack: f64,
}

/// `z_i ≥ 0` or `1 − z_i ≥ 0`, which the box check already covers.
fn is_box_form(f: &LinearForm) -> bool {
    let mut terms = f.terms().iter();
    match (terms.next(), terms.next()) {
        (Some((m, &c)), None) if m.is_node() => (f.constant() == 0.0 && c == 1.0) || (f.constant() == 1.0 && c == -1.0),
        _ => false,
    }
}

/// Every constraint of `system` violated by more than `tol` at `point`.
///
/// Perspective inequalities compare `z_ii` with the closed right-hand
/// side; a negative denominator is reported as a support violation.
pub fn validate_constraints(system: &ConstraintSystem, point: &Assignment, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..system.node_count() {
        let m = Monomial::node(i);
        if let Some(x) = point.get(&m) {
            if x < -tol || x > 1.0 + tol {
                out.push(Violation {
                    kind: ViolationKind::Box,
                    constraint: format!("0 <= {m} <= 1"),
                    slack: x.min(1.0 - x),
                });
            }
        }
    }
    for f in system.linear() {
        if is_box_form(f) {
            continue;
        }
        match f.evaluate(point) {
            Ok(s) if s < -tol => out.push(Violation {
                kind: ViolationKind::Linear,
                constraint: format!("{f} >= 0"),
                slack: s,
            }),
            Ok(_) => {}
            Err(e) => out.push(unassigned(e)),
        }
    }
    for p in system.perspectives() {
        let describe = || format!("perspective at node {} over {:?}", p.node, p.window.as_slice());
        let target = match point.get(&p.target()) {
            Some(v) => v,
            None => {
                out.push(unassigned(Error::Unassigned(p.target().to_string())));
                continue;
            }
        };
        match rhs_value(p, point) {
            Ok(rhs) => {
                let slack = target - rhs;
                if slack < -tol {
                    out.push(Violation {
                        kind: ViolationKind::Perspective,
                        constraint: describe(),
                        slack,
                    });
                }
            }
            Err(Error::SupportViolated { value }) => out.push(Violation {
                kind: ViolationKind::Support,
                constraint: describe(),
                slack: value,
            }),
            Err(e) => out.push(unassigned(e)),
        }
    }
    out
}

fn unassigned(e: Error) -> Violation {
    Violation {
        kind: ViolationKind::Unassigned,
        constraint: e.to_string(),
        slack: f64::NAN,
    }
}

/// A constraint system compiled for fast evaluation at product points.
///
/// Monomial values are built incrementally: `z_S = z_{S∖{max S}} · z_{max S}`,
/// with slot 0 holding the constant 1.
#[derive(Clone, Debug)]
pub struct SystemChecker {
    n: usize,
    /// `(parent slot, node)` per product slot, or `(usize::MAX, node)` for loops.
    slots: Vec<(usize, usize)>,
    linear: Vec<(f64, Vec<(usize, f64)>)>,
    perspectives: Vec<CompiledPerspective>,
}

/// `(neighbour, coefficient)` pairs.
type Coupling = Vec<(usize, f64)>;

/// Constant plus `(slot, coefficient)` terms.
type CompiledForm = (f64, Vec<(usize, f64)>);

#[derive(Clone, Debug)]
struct CompiledPerspective {
    target: usize,
    /// `(numerator, denominator)` pairs.
    terms: Vec<(CompiledForm, CompiledForm)>,
}

impl SystemChecker {
    pub fn new(system: &ConstraintSystem) -> Self {
        let mut index: HashMap<Monomial, usize> = HashMap::new();
        let mut slots = vec![(0, 0)];
        let mut products: BTreeSet<NodeSet> = BTreeSet::new();
        let mut loops: BTreeSet<usize> = BTreeSet::new();
        for m in system.monomials() {
            match m {
                Monomial::Product(s) => {
                    let mut s = s;
                    while !s.is_empty() && products.insert(s.clone()) {
                        let last = *s.as_slice().last().expect("nonempty");
                        s = s.without(last);
                    }
                }
                Monomial::Loop(i) => {
                    loops.insert(i);
                }
                Monomial::Aux(_) => {}
            }
        }
        for s in products {
            let last = *s.as_slice().last().expect("nonempty");
            let rest = s.without(last);
            let parent = if rest.is_empty() {
                0
            } else {
                index[&Monomial::Product(rest)]
            };
            index.insert(Monomial::Product(s), slots.len());
            slots.push((parent, last));
        }
        for i in loops {
            index.insert(Monomial::Loop(i), slots.len());
            slots.push((usize::MAX, i));
        }
        let compile = |f: &LinearForm| {
            (
                f.constant(),
                f.terms().iter().map(|(m, &c)| (index[m], c)).collect::<Vec<_>>(),
            )
        };
        let linear = system
            .linear()
            .iter()
            .filter(|f| !is_box_form(f))
            .map(compile)
            .collect();
        let perspectives = system
            .perspectives()
            .iter()
            .map(|p| CompiledPerspective {
                target: index[&p.target()],
                terms: p
                    .terms
                    .iter()
                    .map(|t| (compile(&t.numerator), compile(&t.denominator)))
                    .collect(),
            })
            .collect();
        Self {
            n: system.node_count(),
            slots,
            linear,
            perspectives,
        }
    }

    fn values(&self, z: &[f64], buf: &mut Vec<f64>) {
        buf.clear();
        buf.push(1.0);
        for &(parent, node) in &self.slots[1..] {
            let v = if parent == usize::MAX {
                z[node] * z[node]
            } else {
                buf[parent] * z[node]
            };
            buf.push(v);
        }
    }

    /// Number of constraints violated by more than `tol` at the product
    /// point of `z`, box included.
    pub fn count_violations(&self, z: &[f64], tol: f64, buf: &mut Vec<f64>) -> usize {
        debug_assert_eq!(z.len(), self.n);
        let dot = |vals: &[f64], (c, terms): &(f64, Vec<(usize, f64)>)| {
            terms.iter().fold(*c, |acc, &(k, w)| acc + w * vals[k])
        };
        self.values(z, buf);
        let vals = buf.as_slice();
        let mut bad = z.iter().filter(|&&x| x < -tol || x > 1.0 + tol).count();
        bad += self.linear.iter().filter(|f| dot(vals, f) < -tol).count();
        for p in &self.perspectives {
            let mut rhs = 0.0;
            let mut support_ok = true;
            for (num, den) in &p.terms {
                let v = dot(vals, den);
                if v < -SUPPORT_TOL {
                    support_ok = false;
                    break;
                }
                rhs += perspective_value(dot(vals, num), v.max(0.0)).unwrap_or(f64::INFINITY);
            }
            if !support_ok || vals[p.target] - rhs < -tol {
                bad += 1;
            }
        }
        bad
    }
}

/// Outcome of the witness check separating the perspective relaxation from
/// the Shor relaxation with McCormick and triangle cuts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    /// `z_11` at the witness.
    pub lhs: f64,
    /// Right-hand side of the full-window perspective inequality at node 1.
    pub rhs: f64,
    pub mccormick_ok: bool,
    pub triangle_ok: bool,
    /// Interval for `z_123` implied by the RLT forms of the triple.
    pub triple_interval: (f64, f64),
    /// `max |L D Lᵀ − A|`.
    pub ldl_residual: f64,
    pub d_nonnegative: bool,
    pub extended_triangle_first: [f64; 3],
    pub extended_triangle_second: [f64; 3],
}

impl WitnessReport {
    /// The perspective inequality cuts the witness off.
    pub fn separates(&self) -> bool {
        self.lhs < self.rhs
    }
}

fn product(nodes: &[usize]) -> Monomial {
    Monomial::product(nodes.iter().copied()).expect("nonempty")
}

/// The witness point on the triangle (nodes 0, 1, 2), without `z_012`.
pub fn witness_point() -> Assignment {
    [
        (product(&[0]), 0.25),
        (product(&[1]), 0.5),
        (product(&[2]), 0.5),
        (Monomial::square(0), 3.0 / 16.0),
        (Monomial::square(1), 0.5),
        (Monomial::square(2), 0.5),
        (product(&[0, 1]), 0.0),
        (product(&[0, 2]), 0.0),
        (product(&[1, 2]), 0.25),
    ]
    .into_iter()
    .collect()
}

pub fn witness_compare_sdp() -> WitnessReport {
    let mut p = witness_point();
    let get = |p: &Assignment, m: Monomial| p.get(&m).expect("witness assigns it");
    let x = |p: &Assignment, i: usize| get(p, Monomial::node(i));
    let y = |p: &Assignment, i: usize, j: usize| get(p, product(&[i, j]));
    let tol = 1e-12;

    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mccormick_ok = pairs.iter().all(|&(i, j)| {
        let (xi, xj, yij) = (x(&p, i), x(&p, j), y(&p, i, j));
        yij >= -tol && yij >= xi + xj - 1.0 - tol && yij <= xi + tol && yij <= xj + tol
    });
    let triangle_ok = [(0, 1, 2), (1, 0, 2), (2, 0, 1)].iter().all(|&(i, j, k)| {
        y(&p, i.min(j), i.max(j)) + y(&p, i.min(k), i.max(k)) <= x(&p, i) + y(&p, j.min(k), j.max(k)) + tol
    }) && x(&p, 0) + x(&p, 1) + x(&p, 2) - y(&p, 0, 1) - y(&p, 0, 2) - y(&p, 1, 2) <= 1.0 + tol;

    // Each RLT form of the triple carries z_012 with coefficient ±1.
    let triple = NodeSet::from([0, 1, 2]);
    let top = Monomial::Product(triple.clone());
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for f in support_system(&triple).expect("small window").inequalities {
        let coeff = f.coefficient(&top);
        let mut rest = f.clone();
        rest.add_term(top.clone(), -coeff);
        let r = rest.evaluate(&p).expect("pairs assigned");
        if coeff > 0.0 {
            lo = lo.max(-r / coeff);
        } else {
            hi = hi.min(-r / coeff);
        }
    }
    p.insert(top, lo.max(0.0));

    let full: PerspectiveInequality = perspective_inequality(0, &triple).expect("window contains node");
    let rhs = rhs_value(&full, &p).expect("support holds at the witness");
    let lhs = get(&p, Monomial::square(0));

    let a = [
        [1.0, x(&p, 0), x(&p, 1), x(&p, 2)],
        [x(&p, 0), lhs, y(&p, 0, 1), y(&p, 0, 2)],
        [x(&p, 1), y(&p, 0, 1), get(&p, Monomial::square(1)), y(&p, 1, 2)],
        [x(&p, 2), y(&p, 0, 2), y(&p, 1, 2), get(&p, Monomial::square(2))],
    ];
    let l = [
        [1.0, 0.0, 0.0, 0.0],
        [0.25, 1.0, 0.0, 0.0],
        [0.5, -1.0, 1.0, 0.0],
        [0.5, -1.0, -1.0, 1.0],
    ];
    let d = [1.0, 0.125, 0.125, 0.0];
    let mut ldl_residual: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let v: f64 = (0..4).map(|k| l[r][k] * d[k] * l[c][k]).sum();
            ldl_residual = ldl_residual.max((v - a[r][c]).abs());
        }
    }

    let (z1, z2, z3) = (x(&p, 0), x(&p, 1), x(&p, 2));
    let (z11, z22, z33) = (lhs, get(&p, Monomial::square(1)), get(&p, Monomial::square(2)));
    let (z12, z13, z23) = (y(&p, 0, 1), y(&p, 0, 2), y(&p, 1, 2));
    WitnessReport {
        lhs,
        rhs,
        mccormick_ok,
        triangle_ok,
        triple_interval: (lo, hi),
        ldl_residual,
        d_nonnegative: d.iter().all(|&v| v >= 0.0),
        extended_triangle_first: [
            2.0 * z1 + z11 - 2.0 * z12 - 2.0 * z13 + z23,
            2.0 * z2 - 2.0 * z12 + z13 + z22 - 2.0 * z23,
            2.0 * z3 + z12 - 2.0 * z13 - 2.0 * z23 + z33,
        ],
        extended_triangle_second: [
            4.0 * z1 + 4.0 * z11 - 4.0 * z12 - 4.0 * z13 + z23,
            4.0 * z2 + 4.0 * z22 - 4.0 * z12 - 4.0 * z23 + z13,
            4.0 * z3 + 4.0 * z33 - 4.0 * z13 - 4.0 * z23 + z12,
        ],
    }
}
