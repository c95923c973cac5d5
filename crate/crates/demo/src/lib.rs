//! Browser demo for `qpsoc`.
//!
//! The plain functions return serializable reports and are tested natively.
//! The `#[wasm_bindgen]` wrappers at the bottom exchange JSON strings with
//! the page in `www/`.

use qpsoc::conic::{adapter_by_name, assemble, solve, SolveStatus};
use qpsoc::decomposition::{check_conditions, construct_td, exact_pipeline, stable_plus_set, Strategy, DEFAULT_BOUND};
use qpsoc::instance::{build_graph, LoopGraph, SparseQP};
use qpsoc::oracle::{global_min_with, witness_compare_sdp, OracleOptions, WitnessReport};
use qpsoc::relaxation::{hierarchy, ConstraintSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest instance the page accepts; the oracle is exponential.
pub const MAX_NODES: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct GraphView {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
}

impl GraphView {
    fn of(g: &LoopGraph) -> Self {
        GraphView {
            nodes: g.node_count(),
            edges: g.edges().iter().copied().collect(),
            plus: g.plus_loops().iter().copied().collect(),
            minus: g.minus_loops().iter().copied().collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelBound {
    pub level: usize,
    pub bound: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub graph: GraphView,
    pub levels: Vec<LevelBound>,
    /// Bound of the exact formulation, when the plus loops are stable and a
    /// decomposition meeting C1 was found.
    pub exact: Option<LevelBound>,
    pub exact_note: Option<String>,
    pub oracle: f64,
    pub oracle_mode: String,
    pub argmin: Vec<f64>,
}

fn solve_system(qp: &SparseQP, system: &ConstraintSystem, level: usize) -> Result<LevelBound, String> {
    let model = assemble(qp, system).map_err(|e| e.to_string())?;
    let adapter = adapter_by_name("clarabel").map_err(|e| e.to_string())?;
    let result = solve(&model, adapter.as_ref());
    let bound = (result.status == SolveStatus::Optimal).then_some(result.objective_value);
    Ok(LevelBound {
        level,
        bound,
        status: result.status.to_string(),
    })
}

/// Hierarchy bounds at every level, the exact bound when available, and the
/// brute-force optimum.
pub fn analyze(qp: &SparseQP) -> Result<Analysis, String> {
    if qp.n() > MAX_NODES {
        return Err(format!("the demo handles at most {MAX_NODES} nodes"));
    }
    let g = build_graph(qp);
    let top = g
        .plus_loops()
        .iter()
        .map(|&i| g.neighborhood(i).map(|v| v.len()).unwrap_or(1))
        .max()
        .unwrap_or(1);
    let levels = (1..=top)
        .map(|r| {
            let system = hierarchy(&g, r).map_err(|e| e.to_string())?;
            solve_system(qp, &system, r)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let (exact, exact_note) = if !stable_plus_set(&g) {
        (
            None,
            Some("adjacent plus loops: only the hierarchy applies".to_string()),
        )
    } else {
        let td = construct_td(&g, &Strategy::MinDegree).map_err(|e| e.to_string())?;
        if check_conditions(&g, &td, DEFAULT_BOUND).c1 {
            let (formulation, _) = exact_pipeline(&g, &td).map_err(|e| e.to_string())?;
            let blocks = formulation.blocks.len();
            (
                Some(solve_system(qp, &formulation.system, 0)?),
                Some(format!("{blocks} blocks")),
            )
        } else {
            (None, Some("no decomposition with one plus node per bag".to_string()))
        }
    };

    let options = OracleOptions {
        grid_step: 0.01,
        ..OracleOptions::default()
    };
    let oracle = global_min_with(qp, &options).map_err(|e| e.to_string())?;
    Ok(Analysis {
        graph: GraphView::of(&g),
        levels,
        exact,
        exact_note,
        oracle: oracle.value,
        oracle_mode: oracle.mode.to_string(),
        argmin: oracle.argmin,
    })
}

/// Random instance on `n` nodes with edge probability `density`.
pub fn random_instance(n: usize, density: f64, seed: u64) -> Result<SparseQP, String> {
    if n == 0 || n > MAX_NODES {
        return Err(format!("node count must be between 1 and {MAX_NODES}"));
    }
    let density = density.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        match rng.gen_range(0..10) {
            0..=3 => entries.push((i, i, round(rng.gen_range(0.2..2.0)))),
            4..=5 => entries.push((i, i, -round(rng.gen_range(0.2..2.0)))),
            _ => {}
        }
        for j in i + 1..n {
            if rng.gen_bool(density) {
                entries.push((i, j, round(rng.gen_range(-1.0..1.0))));
            }
        }
    }
    let c = (0..n).map(|_| round(rng.gen_range(-1.0..1.0))).collect();
    SparseQP::new(n, &entries, c).map_err(|e| e.to_string())
}

fn round(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn witness() -> WitnessReport {
    witness_compare_sdp()
}

fn to_js<T: Serialize>(value: &T) -> Result<String, JsValue> {
    serde_json::to_string(value).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = analyze)]
pub fn analyze_js(instance_json: &str) -> Result<String, JsValue> {
    let qp = SparseQP::from_json(instance_json).map_err(|e| JsValue::from_str(&e.to_string()))?;
    to_js(&analyze(&qp).map_err(|e| JsValue::from_str(&e))?)
}

#[wasm_bindgen(js_name = randomInstance)]
pub fn random_instance_js(n: usize, density: f64, seed: u32) -> Result<String, JsValue> {
    random_instance(n, density, u64::from(seed))
        .map(|qp| qp.to_json())
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = witness)]
pub fn witness_js() -> Result<String, JsValue> {
    let report = witness();
    #[derive(Serialize)]
    struct View<'a> {
        report: &'a WitnessReport,
        separates: bool,
    }
    to_js(&View {
        report: &report,
        separates: report.separates(),
    })
}
