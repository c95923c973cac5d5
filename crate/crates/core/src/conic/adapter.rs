use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::ConicModel;
use crate::error::{Error, Result};
use crate::monomial::Assignment;

/// Environment variable naming the default adapter.
pub const ADAPTER_ENV: &str = "QPSOC_ADAPTER";

/// Absolute tolerance for re-checking an optimal primal against the model.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalLimit => "numerical-limit",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub primal: Assignment,
    pub stats: BTreeMap<String, String>,
}

impl SolveResult {
    fn failed(reason: impl Into<String>) -> Self {
        SolveResult {
            status: SolveStatus::NumericalLimit,
            objective_value: f64::NAN,
            primal: Assignment::new(),
            stats: BTreeMap::from([("diagnostics".to_string(), reason.into())]),
        }
    }
}

/// Load a model, solve it, report status, primal and objective.
pub trait Adapter {
    fn name(&self) -> &'static str;
    fn solve_model(&self, model: &ConicModel) -> Result<SolveResult>;
}

/// Solves `model` and re-checks an optimal primal within [`FEASIBILITY_TOL`].
///
/// Adapter errors and failed re-checks come back as `numerical-limit` with
/// a `diagnostics` entry.
pub fn solve(model: &ConicModel, adapter: &dyn Adapter) -> SolveResult {
    let mut result = match adapter.solve_model(model) {
        Ok(r) => r,
        Err(e) => return SolveResult::failed(e.to_string()),
    };
    result.stats.insert("adapter".into(), adapter.name().into());
    if result.status == SolveStatus::Optimal {
        match model.check(&result.primal, FEASIBILITY_TOL) {
            Ok(v) if v.is_empty() => {}
            Ok(v) => {
                result.status = SolveStatus::NumericalLimit;
                result.stats.insert(
                    "diagnostics".into(),
                    format!("primal violates {} ({} constraints)", v[0].constraint, v.len()),
                );
            }
            Err(e) => {
                result.status = SolveStatus::NumericalLimit;
                result.stats.insert("diagnostics".into(), e.to_string());
            }
        }
    }
    result
}

/// Validates the model and returns without solving.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullAdapter;

impl Adapter for NullAdapter {
    fn name(&self) -> &'static str {
        "null"
    }

    fn solve_model(&self, model: &ConicModel) -> Result<SolveResult> {
        let checked = ConicModel::new(
            model.variables().to_vec(),
            model.linear().to_vec(),
            model.cones().to_vec(),
            model.objective().clone(),
        )?;
        let mut r = SolveResult::failed("null adapter validates models only");
        r.stats
            .insert("variables".into(), checked.variables().len().to_string());
        Ok(r)
    }
}

pub fn available_adapters() -> &'static [&'static str] {
    #[cfg(feature = "clarabel")]
    {
        &["clarabel", "clarabel-pow", "null"]
    }
    #[cfg(not(feature = "clarabel"))]
    {
        &["null"]
    }
}

/// `$QPSOC_ADAPTER` if set, else the first compiled-in solver.
pub fn default_adapter_name() -> String {
    std::env::var(ADAPTER_ENV)
        .ok()
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| available_adapters()[0].to_string())
}

pub fn adapter_by_name(name: &str) -> Result<Box<dyn Adapter>> {
    match name {
        "null" => Ok(Box::new(NullAdapter)),
        #[cfg(feature = "clarabel")]
        "clarabel" => Ok(Box::new(ClarabelAdapter::new(ConeEncoding::SecondOrder))),
        #[cfg(feature = "clarabel")]
        "clarabel-pow" => Ok(Box::new(ClarabelAdapter::new(ConeEncoding::Power))),
        other => Err(Error::UnknownAdapter(other.to_string())),
    }
}

#[cfg(feature = "clarabel")]
pub use self::clarabel_impl::{ClarabelAdapter, ConeEncoding};

#[cfg(feature = "clarabel")]
mod clarabel_impl {
    use std::collections::BTreeMap;

    use clarabel::algebra::CscMatrix;
    use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

    use super::{Adapter, SolveResult, SolveStatus};
    use crate::conic::ConicModel;
    use crate::error::{Error, Result};
    use crate::monomial::{Assignment, LinearForm, Monomial};

    /// How a rotated cone `t · v ≥ u²` is handed to the solver.
    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub enum ConeEncoding {
        /// `(t + v, t − v, 2u)` in the standard second-order cone.
        SecondOrder,
        /// `(t, v, u)` in the 3-d power cone with exponent 1/2.
        Power,
    }

    #[derive(Clone, Debug)]
    pub struct ClarabelAdapter {
        encoding: ConeEncoding,
        settings: DefaultSettings<f64>,
    }

    impl ClarabelAdapter {
        pub fn new(encoding: ConeEncoding) -> Self {
            let settings = DefaultSettings {
                verbose: false,
                tol_gap_abs: 1e-9,
                tol_gap_rel: 1e-9,
                tol_feas: 1e-9,
                max_iter: 400,
                ..DefaultSettings::default()
            };
            Self { encoding, settings }
        }
    }

    /// Rows of `A x + s = b` built one slack at a time.
    struct Rows<'a> {
        index: BTreeMap<&'a Monomial, usize>,
        rows: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
        b: Vec<f64>,
    }

    impl<'a> Rows<'a> {
        /// Appends the slack `s = form`.
        fn push(&mut self, form: &LinearForm) {
            let r = self.b.len();
            for (m, &c) in form.terms() {
                self.rows.push(r);
                self.cols.push(self.index[m]);
                self.vals.push(-c);
            }
            self.b.push(form.constant());
        }
    }

    impl Adapter for ClarabelAdapter {
        fn name(&self) -> &'static str {
            match self.encoding {
                ConeEncoding::SecondOrder => "clarabel",
                ConeEncoding::Power => "clarabel-pow",
            }
        }

        fn solve_model(&self, model: &ConicModel) -> Result<SolveResult> {
            let n = model.variables().len();
            if n == 0 {
                return Ok(SolveResult {
                    status: SolveStatus::Optimal,
                    objective_value: model.objective().constant(),
                    primal: Assignment::new(),
                    stats: BTreeMap::new(),
                });
            }
            let mut rows = Rows {
                index: model.index(),
                rows: Vec::new(),
                cols: Vec::new(),
                vals: Vec::new(),
                b: Vec::new(),
            };
            for form in model.linear() {
                rows.push(form);
            }
            for v in model.variables() {
                if let Some(lb) = v.lb {
                    let mut f = LinearForm::from_monomial(v.id.clone());
                    f.add_constant(-lb);
                    rows.push(&f);
                }
                if let Some(ub) = v.ub {
                    let mut f = LinearForm::constant_form(ub);
                    f.add_term(v.id.clone(), -1.0);
                    rows.push(&f);
                }
            }
            let mut cones = vec![SupportedConeT::NonnegativeConeT(rows.b.len())];
            for c in model.cones() {
                let t = LinearForm::from_monomial(c.aux.clone());
                match self.encoding {
                    ConeEncoding::SecondOrder => {
                        let mut sum = t.clone();
                        sum.add_scaled(&c.linear_side, 1.0);
                        let mut diff = t;
                        diff.add_scaled(&c.linear_side, -1.0);
                        let mut twice = LinearForm::default();
                        twice.add_scaled(&c.quad_side, 2.0);
                        rows.push(&sum);
                        rows.push(&diff);
                        rows.push(&twice);
                        cones.push(SupportedConeT::SecondOrderConeT(3));
                    }
                    ConeEncoding::Power => {
                        rows.push(&t);
                        rows.push(&c.linear_side);
                        rows.push(&c.quad_side);
                        cones.push(SupportedConeT::PowerConeT(0.5));
                    }
                }
            }

            let m = rows.b.len();
            let a = CscMatrix::new_from_triplets(m, n, rows.rows, rows.cols, rows.vals);
            let p = CscMatrix::zeros((n, n));
            let index = model.index();
            let mut q = vec![0.0; n];
            for (mono, &c) in model.objective().terms() {
                q[index[mono]] += c;
            }
            let mut solver = DefaultSolver::new(&p, &q, &a, &rows.b, &cones, self.settings.clone())
                .map_err(|e| Error::Adapter(format!("{e:?}")))?;
            solver.solve();
            let sol = &solver.solution;

            let status = match sol.status {
                SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
                SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
                SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
                _ => SolveStatus::NumericalLimit,
            };
            let primal: Assignment = model
                .variables()
                .iter()
                .zip(&sol.x)
                .map(|(v, &x)| (v.id.clone(), x))
                .collect();
            let objective_value = match status {
                SolveStatus::Optimal => model.objective().evaluate(&primal)?,
                SolveStatus::Infeasible => f64::INFINITY,
                SolveStatus::Unbounded => f64::NEG_INFINITY,
                SolveStatus::NumericalLimit => f64::NAN,
            };
            let stats = BTreeMap::from([
                ("solver_status".to_string(), format!("{:?}", sol.status)),
                ("iterations".to_string(), sol.iterations.to_string()),
                ("solve_time".to_string(), format!("{:.6}", sol.solve_time)),
                ("r_prim".to_string(), format!("{:.3e}", sol.r_prim)),
                ("r_dual".to_string(), format!("{:.3e}", sol.r_dual)),
            ]);
            Ok(SolveResult {
                status,
                objective_value,
                primal,
                stats,
            })
        }
    }
}
