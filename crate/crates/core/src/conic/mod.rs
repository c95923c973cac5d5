//! Conic model assembly, JSON exchange and solving through adapters.
//!
//! A [`ConicModel`] minimizes a linear objective over monomial variables
//! subject to `form ≥ 0` rows, variable bounds and rotated cones
//! `t · v ≥ u²`. Perspective inequalities are lifted here, so a model is
//! always a plain conic program.

mod adapter;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::instance::SparseQP;
use crate::monomial::{Assignment, LinearForm, Monomial};
use crate::relaxation::{lift_to_soc, ConstraintSystem, RotatedConeConstraint};

pub use adapter::{
    adapter_by_name, available_adapters, default_adapter_name, solve, Adapter, NullAdapter, SolveResult, SolveStatus,
    ADAPTER_ENV, FEASIBILITY_TOL,
};
#[cfg(feature = "clarabel")]
pub use adapter::{ClarabelAdapter, ConeEncoding};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    #[serde(rename = "node")]
    Node,
    #[serde(rename = "subsetMonomial")]
    SubsetMonomial,
    #[serde(rename = "loop")]
    Loop,
    #[serde(rename = "auxiliary")]
    Auxiliary,
}

impl VarKind {
    pub fn of(m: &Monomial) -> Self {
        match m {
            Monomial::Product(s) if s.len() == 1 => VarKind::Node,
            Monomial::Product(_) => VarKind::SubsetMonomial,
            Monomial::Loop(_) => VarKind::Loop,
            Monomial::Aux(_) => VarKind::Auxiliary,
        }
    }

    /// Bounds attached by [`assemble`]: the unit box on nodes, `t ≥ 0` on
    /// auxiliaries. Loop variables stay free so minus loops keep their
    /// recession direction.
    fn default_bounds(self) -> (Option<f64>, Option<f64>) {
        match self {
            VarKind::Node => (Some(0.0), Some(1.0)),
            VarKind::Auxiliary => (Some(0.0), None),
            VarKind::SubsetMonomial | VarKind::Loop => (None, None),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub id: Monomial,
    pub kind: VarKind,
    pub lb: Option<f64>,
    pub ub: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicModel {
    variables: Vec<Variable>,
    linear: Vec<LinearForm>,
    cones: Vec<RotatedConeConstraint>,
    objective: LinearForm,
}

/// Counts reported by the CLI.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ModelSummary {
    pub variables: usize,
    pub inequalities: usize,
    pub cones: usize,
}

impl fmt::Display for ModelSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vars={} ineqs={} cones={}",
            self.variables, self.inequalities, self.cones
        )
    }
}

/// A constraint of the model not met at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelViolation {
    pub constraint: String,
    pub slack: f64,
}

impl ConicModel {
    /// Builds a model and checks that every referenced monomial is declared.
    pub fn new(
        mut variables: Vec<Variable>,
        linear: Vec<LinearForm>,
        cones: Vec<RotatedConeConstraint>,
        objective: LinearForm,
    ) -> Result<Self> {
        variables.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in variables.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::Schema(format!("variable {} declared twice", pair[0].id)));
            }
        }
        for v in &variables {
            if v.kind != VarKind::of(&v.id) {
                return Err(Error::Schema(format!("variable {} has kind {:?}", v.id, v.kind)));
            }
            if let (Some(lb), Some(ub)) = (v.lb, v.ub) {
                if lb > ub {
                    return Err(Error::Schema(format!("variable {} has lb {lb} > ub {ub}", v.id)));
                }
            }
        }
        let model = Self {
            variables,
            linear,
            cones,
            objective,
        };
        let declared: BTreeSet<&Monomial> = model.variables.iter().map(|v| &v.id).collect();
        if let Some(m) = model.referenced().into_iter().find(|m| !declared.contains(m)) {
            return Err(Error::Schema(format!("{m} is used but not declared")));
        }
        for cone in &model.cones {
            if VarKind::of(&cone.aux) != VarKind::Auxiliary {
                return Err(Error::Schema(format!("cone head {} is not an auxiliary", cone.aux)));
            }
        }
        Ok(model)
    }

    fn referenced(&self) -> BTreeSet<Monomial> {
        let mut out: BTreeSet<Monomial> = self.linear.iter().flat_map(|f| f.monomials().cloned()).collect();
        for c in &self.cones {
            out.insert(c.aux.clone());
            out.extend(c.linear_side.monomials().cloned());
            out.extend(c.quad_side.monomials().cloned());
        }
        out.extend(self.objective.monomials().cloned());
        out
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn linear(&self) -> &[LinearForm] {
        &self.linear
    }

    pub fn cones(&self) -> &[RotatedConeConstraint] {
        &self.cones
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            variables: self.variables.len(),
            inequalities: self.linear.len(),
            cones: self.cones.len(),
        }
    }

    /// Index of each variable in the canonical order.
    pub fn index(&self) -> BTreeMap<&Monomial, usize> {
        self.variables.iter().enumerate().map(|(k, v)| (&v.id, k)).collect()
    }

    /// Bounds, rows and cones violated by more than `tol` at `point`.
    ///
    /// A rotated cone is measured in its second-order form,
    /// `‖(t − v, 2u)‖ − (t + v)`.
    pub fn check(&self, point: &Assignment, tol: f64) -> Result<Vec<ModelViolation>> {
        let mut out = Vec::new();
        for v in &self.variables {
            let x = point.get(&v.id).ok_or_else(|| Error::Unassigned(v.id.to_string()))?;
            if let Some(lb) = v.lb {
                if x - lb < -tol {
                    out.push(ModelViolation {
                        constraint: format!("{} >= {lb}", v.id),
                        slack: x - lb,
                    });
                }
            }
            if let Some(ub) = v.ub {
                if ub - x < -tol {
                    out.push(ModelViolation {
                        constraint: format!("{} <= {ub}", v.id),
                        slack: ub - x,
                    });
                }
            }
        }
        for f in &self.linear {
            let s = f.evaluate(point)?;
            if s < -tol {
                out.push(ModelViolation {
                    constraint: format!("{f} >= 0"),
                    slack: s,
                });
            }
        }
        for c in &self.cones {
            let t = point.get(&c.aux).ok_or_else(|| Error::Unassigned(c.aux.to_string()))?;
            let v = c.linear_side.evaluate(point)?;
            let u = c.quad_side.evaluate(point)?;
            let slack = (t + v) - (t - v).hypot(2.0 * u);
            if slack < -tol {
                out.push(ModelViolation {
                    constraint: format!("{} * ({}) >= ({})^2", c.aux, c.linear_side, c.quad_side),
                    slack,
                });
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            vars: self
                .variables
                .iter()
                .map(|v| VarDoc {
                    id: v.id.to_string(),
                    kind: v.kind,
                    lb: v.lb,
                    ub: v.ub,
                })
                .collect(),
            lin: self.linear.iter().map(FormDoc::from).collect(),
            rcones: self
                .cones
                .iter()
                .map(|c| ConeDoc {
                    t: c.aux.to_string(),
                    v: FormDoc::from(&c.linear_side),
                    u: FormDoc::from(&c.quad_side),
                })
                .collect(),
            obj: FormDoc::from(&self.objective),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Value = serde_json::from_str(text)?;
        let doc: ModelDoc = serde_json::from_value(raw).map_err(|e| Error::Schema(e.to_string()))?;
        let variables = doc
            .vars
            .into_iter()
            .map(|v| {
                Ok(Variable {
                    id: parse_id(&v.id)?,
                    kind: v.kind,
                    lb: v.lb,
                    ub: v.ub,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let linear = doc.lin.iter().map(FormDoc::to_form).collect::<Result<Vec<_>>>()?;
        let cones = doc
            .rcones
            .iter()
            .map(|c| {
                Ok(RotatedConeConstraint {
                    aux: parse_id(&c.t)?,
                    linear_side: c.v.to_form()?,
                    quad_side: c.u.to_form()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(variables, linear, cones, doc.obj.to_form()?)
    }
}

fn parse_id(id: &str) -> Result<Monomial> {
    id.parse().map_err(|_| Error::Schema(format!("bad variable id `{id}`")))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    vars: Vec<VarDoc>,
    lin: Vec<FormDoc>,
    rcones: Vec<ConeDoc>,
    obj: FormDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VarDoc {
    id: String,
    kind: VarKind,
    lb: Option<f64>,
    ub: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormDoc {
    #[serde(rename = "const")]
    constant: f64,
    terms: Vec<(String, f64)>,
}

impl From<&LinearForm> for FormDoc {
    fn from(f: &LinearForm) -> Self {
        FormDoc {
            constant: f.constant(),
            terms: f.terms().iter().map(|(m, &c)| (m.to_string(), c)).collect(),
        }
    }
}

impl FormDoc {
    fn to_form(&self) -> Result<LinearForm> {
        let mut f = LinearForm::constant_form(self.constant);
        for (id, coeff) in &self.terms {
            f.add_term(parse_id(id)?, *coeff);
        }
        Ok(f)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeDoc {
    t: String,
    v: FormDoc,
    u: FormDoc,
}

/// `Σ_{i∈L} q_ii z_ii + 2 Σ_{ij∈E} q_ij z_ij + Σ_i c_i z_i`.
pub fn objective_form(qp: &SparseQP) -> LinearForm {
    let mut obj = LinearForm::default();
    for (&i, &q) in qp.diag() {
        obj.add_term(Monomial::square(i), q);
    }
    for (&(i, j), &q) in qp.off_diag() {
        obj.add_term(Monomial::Product([i, j].into()), 2.0 * q);
    }
    for (i, &c) in qp.linear().iter().enumerate() {
        obj.add_term(Monomial::node(i), c);
    }
    obj
}

/// Lifts the system's perspective inequalities into rotated cones and
/// attaches the objective of `qp`.
pub fn assemble(qp: &SparseQP, system: &ConstraintSystem) -> Result<ConicModel> {
    if system.node_count() != qp.n() {
        return Err(Error::Instance(format!(
            "system has {} nodes, instance has {}",
            system.node_count(),
            qp.n()
        )));
    }
    for (&i, &q) in qp.diag() {
        let matches = if q > 0.0 {
            system.plus_loops().contains(&i)
        } else {
            system.minus_loops().contains(&i)
        };
        if !matches {
            return Err(Error::LoopSign(i));
        }
    }

    let mut linear = system.linear().to_vec();
    let mut cones = Vec::new();
    let mut next_aux = 0;
    for p in system.perspectives() {
        let (row, lifted) = lift_to_soc(p, &mut next_aux);
        linear.push(row);
        cones.extend(lifted);
    }

    let mut declared: BTreeSet<Monomial> = (0..qp.n()).map(Monomial::node).collect();
    declared.extend(linear.iter().flat_map(|f| f.monomials().cloned()));
    for c in &cones {
        declared.insert(c.aux.clone());
        declared.extend(c.linear_side.monomials().cloned());
        declared.extend(c.quad_side.monomials().cloned());
    }
    let objective = objective_form(qp);
    if let Some(m) = objective.monomials().find(|m| !declared.contains(m)) {
        return Err(Error::MissingMonomial(m.to_string()));
    }

    let variables = declared
        .into_iter()
        .map(|id| {
            let kind = VarKind::of(&id);
            let (lb, ub) = kind.default_bounds();
            Variable { id, kind, lb, ub }
        })
        .collect();
    ConicModel::new(variables, linear, cones, objective)
}
