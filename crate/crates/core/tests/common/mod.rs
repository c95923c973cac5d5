#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use qpsoc::conic::{adapter_by_name, Adapter, ADAPTER_ENV};
use qpsoc::instance::SparseQP;
use qpsoc::monomial::{LinearForm, Monomial};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A solving adapter: `$QPSOC_ADAPTER` unless it names the null adapter.
pub fn solver() -> Box<dyn Adapter> {
    let name = std::env::var(ADAPTER_ENV)
        .ok()
        .filter(|s| !s.is_empty() && s != "null")
        .unwrap_or_else(|| "clarabel".to_string());
    adapter_by_name(&name).expect("solver adapter available")
}

/// Loop signs for an instance generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    None,
}

/// Instance with the given edges and loop signs and random magnitudes.
pub fn instance(rng: &mut ChaCha8Rng, n: usize, edges: &[(usize, usize)], signs: &[Sign]) -> SparseQP {
    let mut entries = Vec::new();
    for (i, s) in signs.iter().enumerate() {
        match s {
            Sign::Plus => entries.push((i, i, rng.gen_range(0.1..2.0))),
            Sign::Minus => entries.push((i, i, -rng.gen_range(0.1..2.0))),
            Sign::None => {}
        }
    }
    for &(a, b) in edges {
        let mut v: f64 = rng.gen_range(-1.0..1.0);
        if v.abs() < 0.05 {
            v = 0.5;
        }
        entries.push((a, b, v));
    }
    let c = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SparseQP::new(n, &entries, c).expect("valid instance")
}

pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn random_signs(rng: &mut ChaCha8Rng, n: usize) -> Vec<Sign> {
    (0..n)
        .map(|_| match rng.gen_range(0..10) {
            0..=3 => Sign::Plus,
            4..=6 => Sign::Minus,
            _ => Sign::None,
        })
        .collect()
}

/// Random stable set of `candidates` in the graph given by `edges`, with
/// the remaining nodes given a minus loop or none.
pub fn stable_signs(rng: &mut ChaCha8Rng, n: usize, edges: &[(usize, usize)], candidates: &[usize]) -> Vec<Sign> {
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut order = candidates.to_vec();
    order.shuffle(rng);
    let mut plus = BTreeSet::new();
    for v in order {
        if rng.gen_bool(0.7) && adj[v].iter().all(|w| !plus.contains(w)) {
            plus.insert(v);
        }
    }
    (0..n)
        .map(|v| {
            if plus.contains(&v) {
                Sign::Plus
            } else if rng.gen_bool(0.25) {
                Sign::Minus
            } else {
                Sign::None
            }
        })
        .collect()
}

pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|v| (rng.gen_range(0..v), v)).collect()
}

/// Chordless cycle on a random relabelling of `0..n`.
pub fn random_cycle(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    (0..n).map(|k| (order[k], order[(k + 1) % n])).collect()
}

/// Bipartite graph between `0..u` and `u..u+w`, every node of the large
/// side having at least one neighbour.
pub fn random_bipartite(rng: &mut ChaCha8Rng, u: usize, w: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..u {
        let forced = u + rng.gen_range(0..w);
        for b in u..u + w {
            if b == forced || rng.gen_bool(0.4) {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

/// Independent expansion of `∏_{J1} z_i ∏_{J2} (1 − z_i)` into monomials.
pub fn expand_polynomial(j1: &[usize], j2: &[usize]) -> LinearForm {
    let mut poly: BTreeMap<BTreeSet<usize>, f64> = BTreeMap::from([(j1.iter().copied().collect(), 1.0)]);
    for &i in j2 {
        let mut next = BTreeMap::new();
        for (mono, c) in poly {
            *next.entry(mono.clone()).or_insert(0.0) += c;
            let mut with = mono;
            with.insert(i);
            *next.entry(with).or_insert(0.0) -= c;
        }
        poly = next;
    }
    let mut form = LinearForm::default();
    for (mono, c) in poly {
        match Monomial::product(mono) {
            Some(m) => form.add_term(m, c),
            None => form.add_constant(c),
        }
    }
    form
}
