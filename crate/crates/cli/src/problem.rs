//! Problem loading: flags and/or a JSON problem object resolve into a
//! sampled domain, tabulated function values, and options.

use crate::error::CliError;
use ridgegap::expr::{self, Expr};
use ridgegap::geometry::{sample_box, BoxDomainSpec, DirectionPair, SampledDomain};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// JSON shape of a box domain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpecJson {
    pub c1: f64,
    pub d1: f64,
    pub c2: f64,
    pub d2: f64,
}

/// JSON shape of the optional tuning knobs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct OptionsJson {
    pub tol: Option<f64>,
    pub max_len: Option<usize>,
    pub quad_order: Option<usize>,
    pub fit_term_cap: Option<usize>,
}

/// A problem statement as accepted on disk. Exactly one of `points` or
/// `box` must be present once flags are merged in.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ProblemSpec {
    pub dims: Option<usize>,
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(rename = "box")]
    pub box_spec: Option<BoxSpecJson>,
    pub grid: Option<usize>,
    pub f: Option<String>,
    pub activation: Option<String>,
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub options: OptionsJson,
}

impl ProblemSpec {
    /// Reads a problem file: either a full problem object or a bare array
    /// of points.
    pub fn from_file(path: &Path) -> Result<ProblemSpec, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        if let Ok(points) = serde_json::from_str::<Vec<Vec<f64>>>(&text) {
            return Ok(ProblemSpec {
                points: Some(points),
                ..ProblemSpec::default()
            });
        }
        serde_json::from_str(&text).map_err(|e| {
            CliError::input(format!("invalid problem JSON in {}: {e}", path.display()))
        })
    }

    /// Later values win; used to merge flag overrides onto a file.
    pub fn merge(mut self, over: ProblemSpec) -> ProblemSpec {
        if over.dims.is_some() {
            self.dims = over.dims;
        }
        if over.a.is_some() {
            self.a = over.a;
        }
        if over.b.is_some() {
            self.b = over.b;
        }
        if over.points.is_some() {
            self.points = over.points;
        }
        if over.box_spec.is_some() {
            self.box_spec = over.box_spec;
        }
        if over.grid.is_some() {
            self.grid = over.grid;
        }
        if over.f.is_some() {
            self.f = over.f;
        }
        if over.activation.is_some() {
            self.activation = over.activation;
        }
        if over.epsilon.is_some() {
            self.epsilon = over.epsilon;
        }
        if over.options.tol.is_some() {
            self.options.tol = over.options.tol;
        }
        if over.options.max_len.is_some() {
            self.options.max_len = over.options.max_len;
        }
        if over.options.quad_order.is_some() {
            self.options.quad_order = over.options.quad_order;
        }
        if over.options.fit_term_cap.is_some() {
            self.options.fit_term_cap = over.options.fit_term_cap;
        }
        self
    }
}

/// A fully resolved problem, ready to compute on.
pub struct ResolvedProblem {
    pub domain: SampledDomain,
    pub fexpr: Option<Expr>,
    pub fvals: Option<Vec<f64>>,
    pub box_spec: Option<BoxDomainSpec>,
    pub grid: usize,
    pub spec: ProblemSpec,
}

pub const DEFAULT_GRID: usize = 9;

/// Validates the merged spec, builds the domain, and tabulates `f`.
pub fn resolve(spec: ProblemSpec) -> Result<ResolvedProblem, CliError> {
    let a = spec
        .a
        .clone()
        .ok_or_else(|| CliError::input("direction a is required (--a or problem file)"))?;
    let b = spec
        .b
        .clone()
        .ok_or_else(|| CliError::input("direction b is required (--b or problem file)"))?;
    if let Some(d) = spec.dims {
        if d != a.len() {
            return Err(CliError::input(format!(
                "dims {d} does not match direction length {}",
                a.len()
            )));
        }
    }
    let dirs = DirectionPair::new(a, b).map_err(CliError::input_from)?;

    let (domain, box_spec, grid) = match (&spec.points, &spec.box_spec) {
        (Some(_), Some(_)) => return Err(CliError::input("give either points or a box, not both")),
        (None, None) => {
            return Err(CliError::input(
                "a domain is required: --points FILE or --box c1 d1 c2 d2",
            ))
        }
        (Some(points), None) => {
            let domain = match spec.options.tol {
                Some(tol) if tol >= 0.0 => SampledDomain::with_tol(points.clone(), dirs, tol),
                Some(_) => return Err(CliError::input("tol must be nonnegative")),
                None => SampledDomain::new(points.clone(), dirs),
            }
            .map_err(CliError::input_from)?;
            (domain, None, 0)
        }
        (None, Some(bx)) => {
            let grid = spec.grid.unwrap_or(DEFAULT_GRID);
            let box_spec = BoxDomainSpec::new(bx.c1, bx.d1, bx.c2, bx.d2, dirs)
                .map_err(CliError::input_from)?;
            let domain = sample_box(&box_spec, grid).map_err(CliError::input_from)?;
            (domain, Some(box_spec), grid)
        }
    };

    let fexpr = match &spec.f {
        Some(src) => Some(expr::parse(src, domain.dim()).map_err(CliError::input_from)?),
        None => None,
    };
    let fvals = match &fexpr {
        Some(e) => Some(
            domain
                .tabulate(|p| expr::eval(e, p))
                .map_err(CliError::computation_from)?,
        ),
        None => None,
    };

    Ok(ResolvedProblem {
        domain,
        fexpr,
        fvals,
        box_spec,
        grid,
        spec,
    })
}
