//! Built-in problems and versioned problem files.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::algebra::Operator;
use crate::cone::{
    construct_lu_pair, grid_function_cone, grid_nodes, nonnegative_cone, trapezoid_weights, Cone, ConeError,
    ConeVector, PhiSpec,
};
use crate::engine::StopPolicy;
use crate::finite::{FinitePoset, TableError, TableOperator};
use crate::order::{Coordinates, Euclidean, OrderedUniverse, RealLine};

/// Problem file format version.
pub const SPEC_VERSION: u64 = 1;

/// Longest run for which the fractional-part example is binary-exact.
pub const FRAC_EXACT_STEPS: usize = 52;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("malformed problem file: {0}")]
    Malformed(String),
    #[error("unsupported problem file version {0}")]
    Version(Value),
    #[error("unknown problem `{0}`")]
    Unknown(String),
    #[error("problem `{problem}` has no parameter `{name}`")]
    UnknownParam { problem: String, name: String },
    #[error("parameter `{name}` = {value} outside [{min}, {max}]")]
    ParamRange { name: String, value: f64, min: f64, max: f64 },
    #[error("parameter `{name}` must be an integer, got {value}")]
    ParamInteger { name: String, value: f64 },
    #[error("{0}")]
    Constraint(String),
    #[error("problem `{0}` is not a cone problem")]
    NotACone(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub integer: bool,
}

const fn real(name: &'static str, default: f64, min: f64, max: f64) -> ParamSpec {
    ParamSpec { name, default, min, max, integer: false }
}

const fn int(name: &'static str, default: f64, min: f64, max: f64) -> ParamSpec {
    ParamSpec { name, default, min, max, integer: true }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BuiltinInfo {
    pub id: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
    /// Accepted by `solve`.
    pub cone: bool,
}

const REGISTRY: &[BuiltinInfo] = &[
    BuiltinInfo {
        id: "frac-example",
        summary: "A(x,y) = x + (1 - frac(x))/2 on the real line from (0, 1); attractive but not fixed",
        params: &[],
        cone: false,
    },
    BuiltinInfo {
        id: "power-op",
        summary: "A(x,y) = x^alpha + y^(-beta) componentwise on R^dim_+, phi = lambda^max(alpha, beta)",
        params: &[real("alpha", 0.5, 0.01, 0.99), real("beta", 1.0 / 3.0, 0.01, 0.99), int("dim", 1.0, 1.0, 64.0)],
        cone: true,
    },
    BuiltinInfo {
        id: "hammerstein-grid",
        summary: "x_i = sum_j w_j k(t_i, s_j) [sqrt(x_j) + g * y_j^(-1/3)], k(t,s) = 1 + ts, trapezoid rule",
        params: &[int("samples", 17.0, 1.0, 513.0), real("g", 1.0, 0.0, 10.0)],
        cone: true,
    },
    BuiltinInfo {
        id: "affine-kernel",
        summary: "A(x,y) = b + p K x - q K y on R^dim with K the averaging kernel",
        params: &[
            int("dim", 2.0, 1.0, 64.0),
            real("p", 0.5, 0.0, 0.99),
            real("q", 0.25, 0.0, 0.99),
            real("b", 1.0, -100.0, 100.0),
        ],
        cone: false,
    },
];

pub fn builtin_problems() -> &'static [BuiltinInfo] {
    REGISTRY
}

pub fn lookup(id: &str) -> Result<&'static BuiltinInfo, ProblemError> {
    REGISTRY.iter().find(|b| b.id == id).ok_or_else(|| ProblemError::Unknown(id.to_string()))
}

/// Parameters after defaults and range checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    fn count(&self, name: &str) -> usize {
        self.get(name) as usize
    }
}

impl BuiltinInfo {
    pub fn resolve(&self, given: &BTreeMap<String, f64>) -> Result<Params, ProblemError> {
        if let Some(name) = given.keys().find(|k| !self.params.iter().any(|p| p.name == k.as_str())) {
            return Err(ProblemError::UnknownParam { problem: self.id.into(), name: name.clone() });
        }
        let mut out = BTreeMap::new();
        for p in self.params {
            let value = given.get(p.name).copied().unwrap_or(p.default);
            if !(value >= p.min && value <= p.max) {
                return Err(ProblemError::ParamRange { name: p.name.into(), value, min: p.min, max: p.max });
            }
            if p.integer && value.fract() != 0.0 {
                return Err(ProblemError::ParamInteger { name: p.name.into(), value });
            }
            out.insert(p.name.to_string(), value);
        }
        Ok(Params(out))
    }
}

/// Start pair and stop policy for the coupled iteration.
pub struct Run<U: OrderedUniverse> {
    pub op: Operator<U>,
    pub x0: U::Element,
    pub y0: U::Element,
    pub policy: StopPolicy,
}

/// Operator, gain function and part representative for the cone solver.
#[derive(Debug, Clone)]
pub struct ConeProblem {
    pub op: Operator<Cone>,
    pub phi: PhiSpec,
    pub u: ConeVector,
    pub tol: f64,
    /// Used when the problem is iterated rather than solved.
    pub policy: StopPolicy,
}

impl ConeProblem {
    /// The coupled iteration from the synthesized lu-pair.
    pub fn iteration(&self) -> Result<Run<Cone>, ConeError> {
        let pair = construct_lu_pair(&self.op, &self.phi, &self.u, &[])?;
        Ok(Run { op: self.op.clone(), x0: pair.x0, y0: pair.y0, policy: self.policy })
    }
}

pub enum Instance {
    Line(Run<RealLine>),
    Vector(Run<Euclidean<Vec<f64>>>),
    Finite(Run<FinitePoset>),
    Cone(ConeProblem),
}

/// A ready-to-run problem.
pub struct Problem {
    pub id: String,
    pub instance: Instance,
    /// Largest admissible `--steps`, when the problem has one.
    pub steps_cap: Option<usize>,
}

impl Problem {
    pub fn is_cone(&self) -> bool {
        matches!(self.instance, Instance::Cone(_))
    }

    pub fn set_max_steps(&mut self, steps: usize) -> Result<(), ProblemError> {
        if let Some(cap) = self.steps_cap.filter(|&c| steps > c) {
            return Err(ProblemError::Constraint(format!(
                "{} is binary-exact only up to {cap} steps, got {steps}",
                self.id
            )));
        }
        self.policy_mut(|p| p.max_steps = steps);
        Ok(())
    }

    pub fn set_gap_tolerance(&mut self, tol: f64) -> Result<(), ProblemError> {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(ProblemError::Constraint(format!("gap tolerance {tol} must be finite and nonnegative")));
        }
        self.policy_mut(|p| p.gap_tolerance = tol);
        Ok(())
    }

    fn policy_mut(&mut self, f: impl FnOnce(&mut StopPolicy)) {
        match &mut self.instance {
            Instance::Line(r) => f(&mut r.policy),
            Instance::Vector(r) => f(&mut r.policy),
            Instance::Finite(r) => f(&mut r.policy),
            Instance::Cone(c) => f(&mut c.policy),
        }
    }
}

pub fn frac_example() -> Operator<RealLine> {
    // exact comparisons: every iterate is a dyadic rational
    let line = Arc::new(RealLine::real_line().with_tolerance(0.0));
    Operator::new(line, "frac-example", |x: &f64, _: &f64| x + (1.0 - (x - x.floor())) / 2.0)
}

pub fn power_op(alpha: f64, beta: f64, dim: usize) -> Operator<Cone> {
    Operator::new(Arc::new(nonnegative_cone(dim)), "power-op", move |x: &ConeVector, y: &ConeVector| {
        ConeVector::from_coords(
            x.as_slice().iter().zip(y.as_slice()).map(|(a, b)| a.powf(alpha) + b.powf(-beta)).collect(),
        )
    })
}

pub fn hammerstein_grid(samples: usize, g: f64) -> Result<Operator<Cone>, ConeError> {
    let universe = Arc::new(grid_function_cone(samples)?);
    let t = grid_nodes(samples)?;
    let w = trapezoid_weights(samples)?;
    let kernel: Vec<Vec<f64>> = t.iter().map(|ti| t.iter().zip(&w).map(|(sj, wj)| wj * (1.0 + ti * sj)).collect()).collect();
    Ok(Operator::new(universe, "hammerstein-grid", move |x: &ConeVector, y: &ConeVector| {
        let inner: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(y.as_slice())
            .map(|(a, b)| a.sqrt() + if g == 0.0 { 0.0 } else { g * b.powf(-1.0 / 3.0) })
            .collect();
        ConeVector::from_coords(kernel.iter().map(|row| row.iter().zip(&inner).map(|(k, v)| k * v).sum()).collect())
    }))
}

pub fn affine_kernel(dim: usize, p: f64, q: f64, b: f64) -> Operator<Euclidean<Vec<f64>>> {
    let universe = Arc::new(Euclidean::new(dim));
    Operator::new(universe, "affine-kernel", move |x: &Vec<f64>, y: &Vec<f64>| {
        let mx = x.iter().sum::<f64>() / dim as f64;
        let my = y.iter().sum::<f64>() / dim as f64;
        vec![b + p * mx - q * my; dim]
    })
}

/// Instantiates a registered problem with its default start.
pub fn build(id: &str, given: &BTreeMap<String, f64>) -> Result<Problem, ProblemError> {
    let info = lookup(id)?;
    let params = info.resolve(given)?;
    let mut steps_cap = None;
    let instance = match info.id {
        "frac-example" => {
            steps_cap = Some(FRAC_EXACT_STEPS);
            Instance::Line(Run {
                op: frac_example(),
                x0: 0.0,
                y0: 1.0,
                policy: StopPolicy::default().with_max_steps(50).with_gap_tolerance(1e-6),
            })
        }
        "power-op" => {
            let (alpha, beta) = (params.get("alpha"), params.get("beta"));
            let dim = params.count("dim");
            Instance::Cone(ConeProblem {
                op: power_op(alpha, beta, dim),
                phi: PhiSpec::power(alpha.max(beta)).map_err(ConeError::from)?,
                u: ConeVector::ones(dim),
                tol: 1e-10,
                policy: StopPolicy::default(),
            })
        }
        "hammerstein-grid" => {
            let samples = params.count("samples");
            Instance::Cone(ConeProblem {
                op: hammerstein_grid(samples, params.get("g"))?,
                phi: PhiSpec::power(0.5).map_err(ConeError::from)?,
                u: ConeVector::ones(samples),
                tol: 1e-10,
                policy: StopPolicy::default(),
            })
        }
        "affine-kernel" => {
            let dim = params.count("dim");
            let (p, q, b) = (params.get("p"), params.get("q"), params.get("b"));
            if p + q >= 1.0 {
                return Err(ProblemError::Constraint(format!("affine-kernel needs p + q < 1, got {}", p + q)));
            }
            // (−r, r) is a coupled lu-pair once r(1 − p − q) ≥ |b|
            let r = (b.abs() + 1.0) / (1.0 - p - q);
            Instance::Vector(Run {
                op: affine_kernel(dim, p, q, b),
                x0: vec![-r; dim],
                y0: vec![r; dim],
                policy: StopPolicy::default(),
            })
        }
        _ => unreachable!("registry and builder disagree on {id}"),
    };
    Ok(Problem { id: id.to_string(), instance, steps_cap })
}

/// Body of a problem file, keyed by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemBody {
    Finite {
        poset: FinitePoset,
        operator: TableOperator,
        start: (usize, usize),
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    Cone {
        operator: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        u: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    Builtin {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gap_tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
}

/// A versioned problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub body: ProblemBody,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| ProblemError::Malformed(e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| ProblemError::Malformed("expected a JSON object".into()))?;
        match obj.remove("version") {
            Some(v) if v.as_u64() == Some(SPEC_VERSION) => {}
            Some(v) => return Err(ProblemError::Version(v)),
            None => return Err(ProblemError::Malformed("missing field `version`".into())),
        }
        let body = serde_json::from_value(value).map_err(|e| ProblemError::Malformed(e.to_string()))?;
        Ok(Self { body })
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(&self.body).expect("problem bodies serialize");
        value
            .as_object_mut()
            .expect("tagged enum serializes to an object")
            .insert("version".into(), SPEC_VERSION.into());
        serde_json::to_string_pretty(&value).expect("values serialize")
    }

    pub fn out(&self) -> Option<&PathBuf> {
        match &self.body {
            ProblemBody::Finite { out, .. } | ProblemBody::Cone { out, .. } | ProblemBody::Builtin { out, .. } => {
                out.as_ref()
            }
        }
    }

    pub fn instantiate(&self) -> Result<Problem, ProblemError> {
        match &self.body {
            ProblemBody::Finite { poset, operator, start, steps, .. } => {
                operator.validate(poset.size())?;
                if start.0 >= poset.size() || start.1 >= poset.size() {
                    return Err(ProblemError::Constraint(format!("start {start:?} outside the poset")));
                }
                let poset = Arc::new(poset.clone());
                let mut policy = StopPolicy::default();
                policy.max_steps = steps.unwrap_or(poset.size() * poset.size() + 1);
                let op = operator.to_operator(poset, "table");
                Ok(Problem {
                    id: "finite".into(),
                    instance: Instance::Finite(Run { op, x0: start.0, y0: start.1, policy }),
                    steps_cap: None,
                })
            }
            ProblemBody::Cone { operator, params, u, tol, steps, .. } => {
                if !lookup(operator)?.cone {
                    return Err(ProblemError::NotACone(operator.clone()));
                }
                let mut p = build(operator, params)?;
                if let Instance::Cone(c) = &mut p.instance {
                    if let Some(u) = u {
                        let u = ConeVector::new(u.clone())?;
                        if u.dim() != c.u.dim() {
                            return Err(ConeError::DimensionMismatch { left: u.dim(), right: c.u.dim() }.into());
                        }
                        c.u = u;
                    }
                    if let Some(t) = tol {
                        c.tol = *t;
                    }
                }
                if let Some(s) = steps {
                    p.set_max_steps(*s)?;
                }
                Ok(p)
            }
            ProblemBody::Builtin { name, params, steps, gap_tol, tol, .. } => {
                let mut p = build(name, params)?;
                if let Some(s) = steps {
                    p.set_max_steps(*s)?;
                }
                if let Some(g) = gap_tol {
                    p.set_gap_tolerance(*g)?;
                }
                if let (Some(t), Instance::Cone(c)) = (tol, &mut p.instance) {
                    c.tol = *t;
                }
                Ok(p)
            }
        }
    }
}
