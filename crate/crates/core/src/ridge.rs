//! Best uniform approximation by sums `g(a.x) + h(b.x)` on a finite domain,
//! and extraction of extremal alternating paths from the residual.
//!
//! On a finite point set both `g` and `h` reduce to one value per projection
//! level, so the best approximation is the Chebyshev linear program
//!
//! ```text
//! minimize t  subject to  -t <= f_i - g[aLevel(i)] - h[bLevel(i)] <= t
//! ```
//!
//! over one free variable per level, with `g[0]` pinned to zero to fix the
//! constant-shift gauge.

use crate::geometry::SampledDomain;
use crate::paths::{validate_path, EdgeType, Path};
use crate::simplex::{self, SimplexError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance for selecting extremal residual points.
pub const EXTREMAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RidgeError {
    #[error("table has no value for {which}-level {level}")]
    MissingLevel { which: char, level: usize },
    #[error("the Chebyshev LP stalled: {0}")]
    SolverStall(SimplexError),
    #[error("fvals length {found} does not match domain size {expected}")]
    LengthMismatch { found: usize, expected: usize },
}

/// Tabulated element of the ridge-sum family: one `g` value per a-level and
/// one `h` value per b-level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgePair {
    #[serde(rename = "gTable")]
    g_table: Vec<f64>,
    #[serde(rename = "hTable")]
    h_table: Vec<f64>,
}

impl RidgePair {
    pub fn new(g_table: Vec<f64>, h_table: Vec<f64>) -> Self {
        Self { g_table, h_table }
    }

    pub fn g_table(&self) -> &[f64] {
        &self.g_table
    }

    pub fn h_table(&self) -> &[f64] {
        &self.h_table
    }
}

/// `g[aLevel(i)] + h[bLevel(i)]` for point `i`.
pub fn evaluate_ridge(
    v: &RidgePair,
    domain: &SampledDomain,
    point_index: usize,
) -> Result<f64, RidgeError> {
    let al = domain.a_level(point_index);
    let bl = domain.b_level(point_index);
    let g = v.g_table.get(al).ok_or(RidgeError::MissingLevel {
        which: 'a',
        level: al,
    })?;
    let h = v.h_table.get(bl).ok_or(RidgeError::MissingLevel {
        which: 'b',
        level: bl,
    })?;
    Ok(g + h)
}

/// Optimal ridge-sum approximation: tables, minimax error, and residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestApprox {
    pub v0: RidgePair,
    pub error: f64,
    pub residual: Vec<f64>,
}

/// Solves the Chebyshev LP over ridge sums. The reported error is the
/// maximum absolute residual of the returned tables, which matches the LP
/// optimum up to pivot tolerance; it is unique even though the tables are
/// only determined up to the pinned gauge.
pub fn best_ridge_linf(domain: &SampledDomain, fvals: &[f64]) -> Result<BestApprox, RidgeError> {
    if fvals.len() != domain.len() {
        return Err(RidgeError::LengthMismatch {
            found: fvals.len(),
            expected: domain.len(),
        });
    }
    let a_count = domain.a_level_count();
    let b_count = domain.b_level_count();
    // Columns: a-levels 1.. (level 0 pinned to zero), then all b-levels.
    let n_cols = (a_count - 1) + b_count;
    let mut design = vec![vec![0.0; n_cols]; domain.len()];
    for i in 0..domain.len() {
        let al = domain.a_level(i);
        if al > 0 {
            design[i][al - 1] = 1.0;
        }
        design[i][a_count - 1 + domain.b_level(i)] = 1.0;
    }
    let sol = simplex::solve_minimax(&design, fvals, simplex::DEFAULT_MAX_ITERATIONS)
        .map_err(RidgeError::SolverStall)?;

    let mut g_table = vec![0.0; a_count];
    g_table[1..].copy_from_slice(&sol.coeffs[..a_count - 1]);
    let h_table = sol.coeffs[a_count - 1..].to_vec();
    let v0 = RidgePair::new(g_table, h_table);
    let residual: Vec<f64> = (0..domain.len())
        .map(|i| fvals[i] - evaluate_ridge(&v0, domain, i).expect("tables are total"))
        .collect();
    let error = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(BestApprox {
        v0,
        error,
        residual,
    })
}

/// A maximal alternating path through near-extremal residual points, with a
/// flag for whether it closes up.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalPath {
    pub path: Path,
    pub closed: bool,
}

/// Greedily grows maximal paths through points where the residual attains
/// (within `tol`, relative) its sup norm with alternating signs. A closed
/// result certifies the approximation error exactly; open ones are finite
/// truncations of the infinite extremal case. Returns nothing when the
/// error is zero or no two extremal points can be linked.
pub fn extremal_paths_of_residual(
    domain: &SampledDomain,
    approx: &BestApprox,
    tol: f64,
) -> Vec<ExtremalPath> {
    if approx.error <= 0.0 {
        return Vec::new();
    }
    let threshold = (1.0 - tol) * approx.error;
    let candidates: Vec<usize> = (0..domain.len())
        .filter(|&i| approx.residual[i].abs() >= threshold)
        .collect();
    let mut used = vec![false; domain.len()];
    let mut results = Vec::new();

    for &seed in &candidates {
        if used[seed] {
            continue;
        }
        let mut best: Option<Vec<usize>> = None;
        let mut best_first = EdgeType::A;
        for first in [EdgeType::A, EdgeType::B] {
            let forward = grow(domain, approx, threshold, &used, seed, first);
            // Extend the other way by growing from the reversed sequence: the
            // reversal of a path with k edges starts with the type of its
            // last edge.
            let mut seq = forward;
            seq.reverse();
            let rev_first = if seq.len().is_multiple_of(2) {
                first
            } else {
                first.flip()
            };
            let rev_first = match seq.len() {
                1 => first,
                _ => rev_first,
            };
            let grown = grow_from(domain, approx, threshold, &used, seq, rev_first);
            if best.as_ref().is_none_or(|b| grown.len() > b.len()) {
                best_first = rev_first;
                best = Some(grown);
            }
        }
        let seq = best.unwrap();
        if seq.len() < 2 {
            continue;
        }
        let first_edge = best_first;
        debug_assert!(validate_path(&seq, first_edge, domain, false).is_ok());
        let closed =
            seq.len().is_multiple_of(2) && validate_path(&seq, first_edge, domain, true).is_ok();
        for &i in &seq {
            used[i] = true;
        }
        let path = Path::new(seq, first_edge, domain).expect("grown path validates");
        results.push(ExtremalPath { path, closed });
    }
    results
}

/// Grows forward from a single seed; returns the point sequence.
fn grow(
    domain: &SampledDomain,
    approx: &BestApprox,
    threshold: f64,
    used: &[bool],
    seed: usize,
    first: EdgeType,
) -> Vec<usize> {
    grow_from(domain, approx, threshold, used, vec![seed], first)
}

/// Extends `seq` at its tail with strictly alternating edge types starting
/// from `next_edge` for the edge out of the current tail, picking the
/// smallest-index unused extremal point of opposite residual sign each time.
fn grow_from(
    domain: &SampledDomain,
    approx: &BestApprox,
    threshold: f64,
    used: &[bool],
    mut seq: Vec<usize>,
    first: EdgeType,
) -> Vec<usize> {
    // Edge type for the next extension depends on how many edges exist.
    loop {
        let tail = *seq.last().unwrap();
        let edge = if (seq.len() - 1).is_multiple_of(2) {
            first
        } else {
            first.flip()
        };
        let next = (0..domain.len()).find(|&j| {
            j != tail
                && !used[j]
                && !seq.contains(&j)
                && approx.residual[j].abs() >= threshold
                && approx.residual[j] * approx.residual[tail] < 0.0
                && match edge {
                    EdgeType::A => domain.a_level(j) == domain.a_level(tail),
                    EdgeType::B => domain.b_level(j) == domain.b_level(tail),
                }
        });
        match next {
            Some(j) => seq.push(j),
            None => return seq,
        }
    }
}
