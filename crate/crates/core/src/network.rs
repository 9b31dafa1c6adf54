//! Constructs shallow networks with both weights drawn from the fixed
//! direction pair, achieving the best ridge-sum error plus a requested
//! epsilon: the optimal tables are fitted per direction by sums of shifted
//! activations, then the two fits are concatenated into one network.

use crate::geometry::{DirectionPair, SampledDomain};
use crate::paths::EdgeType;
use crate::ridge::{best_ridge_linf, BestApprox, RidgeError};
use crate::simplex::{self, SimplexError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("unknown activation `{0}`")]
    UnknownActivation(String),
    #[error("activation `{name}` is mean periodic ({why}); shifted spans of it are not dense, so the error formula does not apply")]
    MeanPeriodicActivation { name: String, why: String },
    #[error("fit samples fall outside the configured interval [{lo}, {hi}]")]
    SampleOutsideInterval { lo: f64, hi: f64 },
    #[error("epsilon {epsilon} unreachable for the {direction}-direction fit: best sup error {achieved} at {terms} terms (cap)")]
    EpsilonUnreachable {
        direction: char,
        epsilon: f64,
        achieved: f64,
        terms: usize,
    },
    #[error("fit solver failed: {0}")]
    Solver(SimplexError),
    #[error(transparent)]
    Ridge(#[from] RidgeError),
}

/// Why an activation's shift span is dense (it is not mean periodic), or
/// that this is unknown and the formula is unverified for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonMeanPeriodicReason {
    /// Continuous and p-integrable for some finite p.
    Integrable,
    /// Continuous, bounded, nonconstant, with a limit at an infinity.
    BoundedWithLimit,
    Unknown,
}

/// A registered univariate activation with its density justification.
///
/// Mean periodicity is a density statement about shift spans, not something
/// testable pointwise, so the registry carries it as metadata; callers are
/// expected to warn when the reason is `Unknown`.
#[derive(Clone)]
pub struct Activation {
    pub name: &'static str,
    pub reason: NonMeanPeriodicReason,
    eval: fn(f64) -> f64,
}

impl std::fmt::Debug for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Activation")
            .field("name", &self.name)
            .field("reason", &self.reason)
            .finish()
    }
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn gaussian(t: f64) -> f64 {
    (-t * t).exp()
}

fn relu(t: f64) -> f64 {
    t.max(0.0)
}

static REGISTRY: &[Activation] = &[
    Activation {
        name: "sigmoid",
        reason: NonMeanPeriodicReason::BoundedWithLimit,
        eval: sigmoid,
    },
    Activation {
        name: "tanh",
        reason: NonMeanPeriodicReason::BoundedWithLimit,
        eval: f64::tanh,
    },
    Activation {
        name: "gaussian",
        reason: NonMeanPeriodicReason::Integrable,
        eval: gaussian,
    },
    Activation {
        name: "relu",
        reason: NonMeanPeriodicReason::Unknown,
        eval: relu,
    },
];

/// Names rejected outright because their shift spans are known closed
/// proper subspaces (polynomials, pure trigonometric waves, constants).
static MEAN_PERIODIC: &[(&str, &str)] = &[
    (
        "polynomial",
        "polynomial shift spans stay polynomial of the same degree",
    ),
    (
        "linear",
        "shifts of a linear function span a two-dimensional space",
    ),
    (
        "identity",
        "shifts of the identity span a two-dimensional space",
    ),
    ("constant", "shifts of a constant are the same constant"),
    ("sin", "shifted sines span the two-dimensional wave space"),
    ("cos", "shifted cosines span the two-dimensional wave space"),
];

impl Activation {
    pub fn registry() -> &'static [Activation] {
        REGISTRY
    }

    pub fn lookup(name: &str) -> Result<&'static Activation, NetworkError> {
        if let Some(act) = REGISTRY.iter().find(|a| a.name == name) {
            return Ok(act);
        }
        if let Some((_, why)) = MEAN_PERIODIC.iter().find(|(n, _)| *n == name) {
            return Err(NetworkError::MeanPeriodicActivation {
                name: name.to_string(),
                why: (*why).to_string(),
            });
        }
        Err(NetworkError::UnknownActivation(name.to_string()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
}

/// One hidden unit: coefficient, direction tag, threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub c: f64,
    pub w: EdgeType,
    pub theta: f64,
}

/// A single-hidden-layer network whose weights all equal direction a or b.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShallowNetwork {
    pub sigma: String,
    pub terms: Vec<Term>,
}

impl ShallowNetwork {
    pub fn empty(sigma: &str) -> Self {
        Self {
            sigma: sigma.to_string(),
            terms: Vec::new(),
        }
    }

    /// `sum_i c_i sigma(w_i . x - theta_i)` in term order.
    pub fn evaluate(&self, dirs: &DirectionPair, x: &[f64]) -> Result<f64, NetworkError> {
        let act = Activation::lookup(&self.sigma)?;
        let pa = dirs.project_a(x);
        let pb = dirs.project_b(x);
        let mut total = 0.0;
        for term in &self.terms {
            let t = match term.w {
                EdgeType::A => pa,
                EdgeType::B => pb,
            };
            total += term.c * act.eval(t - term.theta);
        }
        Ok(total)
    }
}

/// How the univariate fit solves for coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitSolver {
    /// Chebyshev LP; the reported sup error is a true grid bound.
    Minimax,
    /// Normal equations; falls back to minimax when rank-deficient.
    LeastSquares,
}

/// Configuration of one univariate shift fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Number of shifted terms (threshold grid nodes).
    pub m: usize,
    /// Threshold grid range.
    pub theta_range: (f64, f64),
    /// Interval containing every sample abscissa.
    pub interval: (f64, f64),
    pub solver: FitSolver,
}

impl FitConfig {
    /// Default threshold layout for an interval: four times its width,
    /// centered, so transition regions can sit beyond both edges.
    pub fn for_interval(interval: (f64, f64), m: usize, solver: FitSolver) -> Self {
        let width = interval.1 - interval.0;
        let center = (interval.0 + interval.1) / 2.0;
        Self {
            m,
            theta_range: (center - 2.0 * width, center + 2.0 * width),
            interval,
            solver,
        }
    }
}

/// Result of fitting one univariate table by shifted activations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnivariateFit {
    pub coeffs: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Max deviation over the sample grid.
    pub sup_error: f64,
    /// Least-squares was requested but rank-deficient, so minimax ran.
    pub fell_back: bool,
}

/// Hull of all a- and b-projections, expanded by `margin` on both sides.
pub fn projection_interval(domain: &SampledDomain, margin: f64) -> (f64, f64) {
    assert!(margin >= 0.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..domain.len() {
        for v in [domain.a_projection(i), domain.b_projection(i)] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo - margin, hi + margin)
}

fn theta_grid(cfg: &FitConfig) -> Vec<f64> {
    let (lo, hi) = cfg.theta_range;
    if cfg.m == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..cfg.m)
        .map(|j| lo + (hi - lo) * j as f64 / (cfg.m - 1) as f64)
        .collect()
}

/// Fits `target` samples `(t_k, y_k)` by `sum_j c_j sigma(t_k - theta_j)`
/// over a uniform threshold grid.
pub fn fit_univariate_shifts(
    samples: &[(f64, f64)],
    sigma: &Activation,
    cfg: &FitConfig,
) -> Result<UnivariateFit, NetworkError> {
    assert!(cfg.m >= 1, "at least one term is required");
    assert!(!samples.is_empty(), "fit needs at least one sample");
    let (lo, hi) = cfg.interval;
    let slack = 1e-9 * (hi - lo).abs().max(1.0);
    if samples
        .iter()
        .any(|&(t, _)| t < lo - slack || t > hi + slack)
    {
        return Err(NetworkError::SampleOutsideInterval { lo, hi });
    }
    let thetas = theta_grid(cfg);
    let design: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(t, _)| thetas.iter().map(|&th| sigma.eval(t - th)).collect())
        .collect();
    let targets: Vec<f64> = samples.iter().map(|&(_, y)| y).collect();

    let (coeffs, fell_back) = match cfg.solver {
        FitSolver::Minimax => (minimax_coeffs(&design, &targets)?, false),
        FitSolver::LeastSquares => match least_squares(&design, &targets) {
            Some(c) => (c, false),
            None => (minimax_coeffs(&design, &targets)?, true),
        },
    };
    let mut sup_error = 0.0f64;
    for (row, &y) in design.iter().zip(&targets) {
        let fitted: f64 = row.iter().zip(&coeffs).map(|(d, c)| d * c).sum();
        sup_error = sup_error.max((y - fitted).abs());
    }
    Ok(UnivariateFit {
        coeffs,
        thetas,
        sup_error,
        fell_back,
    })
}

fn minimax_coeffs(design: &[Vec<f64>], targets: &[f64]) -> Result<Vec<f64>, NetworkError> {
    simplex::solve_minimax(design, targets, simplex::DEFAULT_MAX_ITERATIONS)
        .map(|s| s.coeffs)
        .map_err(NetworkError::Solver)
}

/// Normal equations with partial pivoting; `None` signals rank deficiency
/// (duplicate effective basis columns and the like).
fn least_squares(design: &[Vec<f64>], targets: &[f64]) -> Option<Vec<f64>> {
    let m = design[0].len();
    let mut ata = vec![vec![0.0; m + 1]; m];
    for (row, &y) in design.iter().zip(targets) {
        for i in 0..m {
            for j in 0..m {
                ata[i][j] += row[i] * row[j];
            }
            ata[i][m] += row[i] * y;
        }
    }
    let scale = ata
        .iter()
        .flat_map(|r| r[..m].iter())
        .fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&i, &j| ata[i][col].abs().total_cmp(&ata[j][col].abs()))
            .unwrap();
        if ata[pivot_row][col].abs() <= 1e-12 * scale.max(1.0) {
            return None;
        }
        ata.swap(col, pivot_row);
        let pivot = ata[col][col];
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = ata[row][col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..=m {
                let v = ata[col][j];
                ata[row][j] -= factor * v;
            }
        }
    }
    Some((0..m).map(|i| ata[i][m] / ata[i][i]).collect())
}

/// Concatenates the two directional fits: a-direction terms first, then
/// b-direction terms.
pub fn assemble_network(
    sigma: &Activation,
    g_fit: &UnivariateFit,
    h_fit: &UnivariateFit,
) -> ShallowNetwork {
    let mut terms = Vec::with_capacity(g_fit.coeffs.len() + h_fit.coeffs.len());
    for (c, th) in g_fit.coeffs.iter().zip(&g_fit.thetas) {
        terms.push(Term {
            c: *c,
            w: EdgeType::A,
            theta: *th,
        });
    }
    for (c, th) in h_fit.coeffs.iter().zip(&h_fit.thetas) {
        terms.push(Term {
            c: *c,
            w: EdgeType::B,
            theta: *th,
        });
    }
    ShallowNetwork {
        sigma: sigma.name.to_string(),
        terms,
    }
}

/// Sup over the domain of `|f - network|`.
pub fn network_error(
    net: &ShallowNetwork,
    domain: &SampledDomain,
    fvals: &[f64],
) -> Result<f64, NetworkError> {
    assert_eq!(fvals.len(), domain.len());
    let mut worst = 0.0f64;
    for i in 0..domain.len() {
        let v = net.evaluate(domain.dirs(), domain.point(i))?;
        worst = worst.max((fvals[i] - v).abs());
    }
    Ok(worst)
}

/// A fully assembled construction: the network, its grid error, and the
/// pieces the triangle inequality combines.
#[derive(Debug, Clone)]
pub struct NetworkBuild {
    pub network: ShallowNetwork,
    pub error: f64,
    pub best: BestApprox,
    pub g_fit: UnivariateFit,
    pub h_fit: UnivariateFit,
}

/// Term ladder used when searching for the number of shifts that meets the
/// per-direction budget. Consecutive threshold grids are nested, so the
/// minimax sup error is nonincreasing along the ladder.
fn term_ladder(cap: usize) -> Vec<usize> {
    let mut ladder = vec![9, 17, 33, 65, 129];
    ladder.retain(|&m| m <= cap);
    if ladder.last() != Some(&cap) && cap >= 1 {
        ladder.push(cap);
    }
    ladder
}

fn fit_direction(
    samples: &[(f64, f64)],
    sigma: &Activation,
    interval: (f64, f64),
    budget: f64,
    cap: usize,
    direction: char,
) -> Result<UnivariateFit, NetworkError> {
    let mut best: Option<UnivariateFit> = None;
    for m in term_ladder(cap) {
        let cfg = FitConfig::for_interval(interval, m, FitSolver::Minimax);
        let fit = fit_univariate_shifts(samples, sigma, &cfg)?;
        let better = best.as_ref().is_none_or(|b| fit.sup_error < b.sup_error);
        if better {
            best = Some(fit);
        }
        if best.as_ref().unwrap().sup_error <= budget {
            return Ok(best.unwrap());
        }
    }
    let achieved = best.as_ref().map_or(f64::INFINITY, |b| b.sup_error);
    Err(NetworkError::EpsilonUnreachable {
        direction,
        epsilon: 2.0 * budget,
        achieved,
        terms: cap,
    })
}

/// Builds a network within `epsilon` of the best ridge-sum error on the
/// domain: solve the Chebyshev LP, fit each optimal table by shifted
/// activations to `epsilon/2`, and concatenate. The number of terms per
/// direction is searched upward to `term_cap`.
pub fn build_network(
    domain: &SampledDomain,
    fvals: &[f64],
    sigma: &Activation,
    epsilon: f64,
    term_cap: usize,
) -> Result<NetworkBuild, NetworkError> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let best = best_ridge_linf(domain, fvals)?;
    let interval = projection_interval(domain, 0.0);

    // One sample per distinct projection value, each carrying its level's
    // table value; deviations are then bounded at every domain point.
    let g_samples = direction_samples(domain, true, best.v0.g_table());
    let h_samples = direction_samples(domain, false, best.v0.h_table());

    let budget = epsilon / 2.0;
    let g_fit = fit_direction(&g_samples, sigma, interval, budget, term_cap, 'a')?;
    let h_fit = fit_direction(&h_samples, sigma, interval, budget, term_cap, 'b')?;
    let network = assemble_network(sigma, &g_fit, &h_fit);
    let error = network_error(&network, domain, fvals)?;
    Ok(NetworkBuild {
        network,
        error,
        best,
        g_fit,
        h_fit,
    })
}

fn direction_samples(domain: &SampledDomain, a_side: bool, table: &[f64]) -> Vec<(f64, f64)> {
    let mut samples: Vec<(f64, f64)> = (0..domain.len())
        .map(|i| {
            if a_side {
                (domain.a_projection(i), table[domain.a_level(i)])
            } else {
                (domain.b_projection(i), table[domain.b_level(i)])
            }
        })
        .collect();
    samples.sort_by(|p, q| p.0.total_cmp(&q.0));
    samples.dedup_by(|p, q| p.0 == q.0);
    samples
}
