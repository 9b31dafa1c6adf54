//! Paths and closed paths with respect to a direction pair, and the
//! alternating functional carried by closed paths.
//!
//! A path hops between points that alternately share an a-level and a
//! b-level. Closed paths (even length, wrapping around) carry the functional
//!
//! ```text
//! G(f) = (1/2n) * (f(p1) - f(p2) + f(p3) - ... - f(p2n))
//! ```
//!
//! which annihilates every function of the form `g(a.x) + h(b.x)` and is the
//! certificate object for approximation lower bounds.

use crate::geometry::SampledDomain;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which projection equality an edge asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeType {
    A,
    B,
}

impl EdgeType {
    pub fn flip(self) -> EdgeType {
        match self {
            EdgeType::A => EdgeType::B,
            EdgeType::B => EdgeType::A,
        }
    }
}

/// Why a candidate index sequence fails to be a (closed) path.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathFailure {
    #[error("index {index} at position {position} exceeds point count {point_count}")]
    IndexOutOfRange {
        position: usize,
        index: usize,
        point_count: usize,
    },
    #[error("a path needs at least 2 points, got {0}")]
    TooShort(usize),
    #[error("a closed path needs even length, got {0}")]
    OddClosedLength(usize),
    #[error("consecutive points at positions {0} and {1} coincide")]
    ConsecutiveRepeat(usize, usize),
    #[error(
        "edge {edge} ({edge_type:?}) links points {from} and {to} in different {edge_type:?}-levels"
    )]
    LevelMismatch {
        edge: usize,
        edge_type: EdgeType,
        from: usize,
        to: usize,
    },
}

/// Checks that `pts` with the given first edge type is a valid path over the
/// domain; with `closed`, additionally that appending the first point again
/// still yields a path (even length, wraparound edge of the opposite type).
pub fn validate_path(
    pts: &[usize],
    first_edge: EdgeType,
    domain: &SampledDomain,
    closed: bool,
) -> Result<(), PathFailure> {
    if pts.len() < 2 {
        return Err(PathFailure::TooShort(pts.len()));
    }
    if closed && !pts.len().is_multiple_of(2) {
        return Err(PathFailure::OddClosedLength(pts.len()));
    }
    for (position, &index) in pts.iter().enumerate() {
        if index >= domain.len() {
            return Err(PathFailure::IndexOutOfRange {
                position,
                index,
                point_count: domain.len(),
            });
        }
    }
    let edge_count = if closed { pts.len() } else { pts.len() - 1 };
    for edge in 0..edge_count {
        let from = pts[edge];
        let to = pts[(edge + 1) % pts.len()];
        if from == to {
            return Err(PathFailure::ConsecutiveRepeat(edge, (edge + 1) % pts.len()));
        }
        let edge_type = if edge % 2 == 0 {
            first_edge
        } else {
            first_edge.flip()
        };
        let same_level = match edge_type {
            EdgeType::A => domain.a_level(from) == domain.a_level(to),
            EdgeType::B => domain.b_level(from) == domain.b_level(to),
        };
        if !same_level {
            return Err(PathFailure::LevelMismatch {
                edge,
                edge_type,
                from,
                to,
            });
        }
    }
    Ok(())
}

/// A validated open path: point indices with strictly alternating edge types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pts: Vec<usize>,
    #[serde(rename = "firstEdge")]
    first_edge: EdgeType,
}

impl Path {
    pub fn new(
        pts: Vec<usize>,
        first_edge: EdgeType,
        domain: &SampledDomain,
    ) -> Result<Self, PathFailure> {
        validate_path(&pts, first_edge, domain, false)?;
        Ok(Self { pts, first_edge })
    }

    pub fn pts(&self) -> &[usize] {
        &self.pts
    }

    pub fn first_edge(&self) -> EdgeType {
        self.first_edge
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }
}

/// A validated closed path of even length `2n >= 2`.
///
/// Points may repeat as long as consecutive entries (including the wraparound
/// pair) differ; closed walks of that kind are what the max-mean-cycle
/// reduction optimizes over. Length 2 is admitted when two points share both
/// levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClosedPath {
    pts: Vec<usize>,
    #[serde(rename = "firstEdge")]
    first_edge: EdgeType,
}

impl ClosedPath {
    pub fn new(
        pts: Vec<usize>,
        first_edge: EdgeType,
        domain: &SampledDomain,
    ) -> Result<Self, PathFailure> {
        validate_path(&pts, first_edge, domain, true)?;
        Ok(Self { pts, first_edge })
    }

    /// Internal constructor for sequences already known valid.
    pub(crate) fn from_parts_unchecked(pts: Vec<usize>, first_edge: EdgeType) -> Self {
        debug_assert!(pts.len() >= 2 && pts.len().is_multiple_of(2));
        Self { pts, first_edge }
    }

    pub fn pts(&self) -> &[usize] {
        &self.pts
    }

    pub fn first_edge(&self) -> EdgeType {
        self.first_edge
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Lexicographically smallest representative among all rotations of the
    /// path and of its reversal, breaking ties toward first edge `A`.
    pub fn canonical(&self) -> ClosedPath {
        let len = self.pts.len();
        let mut best: Option<(Vec<usize>, EdgeType)> = None;
        let mut consider = |pts: Vec<usize>, fe: EdgeType| match &best {
            Some((bp, bfe)) if (bp, *bfe as u8) <= (&pts, fe as u8) => {}
            _ => best = Some((pts, fe)),
        };
        for shift in 0..len {
            let rotated = rotate_closed_path(self, shift as isize);
            consider(rotated.pts, rotated.first_edge);
        }
        // Reversal: (p1, p2n, ..., p2); its first edge is the type of the
        // original edge between p_{2n-1} and p_{2n}, which equals first_edge.
        let mut rev_pts = self.pts.clone();
        rev_pts[1..].reverse();
        let reversed = ClosedPath {
            pts: rev_pts,
            first_edge: self.first_edge.flip(),
        };
        for shift in 0..len {
            let rotated = rotate_closed_path(&reversed, shift as isize);
            consider(rotated.pts, rotated.first_edge);
        }
        let (pts, first_edge) = best.unwrap();
        ClosedPath { pts, first_edge }
    }
}

/// The alternating mean `(1/2n) sum (-1)^(k+1) f(p_k)` of a closed path.
///
/// The two sign classes are summed separately in point-index order, so the
/// value is exactly negated by a one-step rotation and exactly preserved by
/// even rotations and reversal.
pub fn path_functional(cp: &ClosedPath, fvals: &[f64]) -> f64 {
    let mut plus: Vec<usize> = cp.pts.iter().copied().step_by(2).collect();
    let mut minus: Vec<usize> = cp.pts.iter().copied().skip(1).step_by(2).collect();
    plus.sort_unstable();
    minus.sort_unstable();
    let sum_plus: f64 = plus.iter().map(|&i| fvals[i]).sum();
    let sum_minus: f64 = minus.iter().map(|&i| fvals[i]).sum();
    (sum_plus - sum_minus) / cp.pts.len() as f64
}

/// Cyclic rotation by `shift` positions. Odd shifts flip the first edge type
/// and negate the functional; even shifts preserve both.
pub fn rotate_closed_path(cp: &ClosedPath, shift: isize) -> ClosedPath {
    let len = cp.pts.len() as isize;
    let s = shift.rem_euclid(len) as usize;
    let mut pts = Vec::with_capacity(cp.pts.len());
    pts.extend_from_slice(&cp.pts[s..]);
    pts.extend_from_slice(&cp.pts[..s]);
    let first_edge = if s.is_multiple_of(2) {
        cp.first_edge
    } else {
        cp.first_edge.flip()
    };
    ClosedPath { pts, first_edge }
}
