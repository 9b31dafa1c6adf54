//! Exact supremum of the closed-path functional on a finite domain.
//!
//! Every closed path corresponds to a directed cycle in a bipartite state
//! graph with two states per point (last edge A or B), and the cycle's mean
//! edge weight equals the path functional. The supremum over all closed paths
//! is therefore a maximum-mean-cycle problem, solved exactly by Karp's
//! dynamic program over walk lengths per strongly connected component. A
//! brute-force closed-walk enumerator doubles as a desk-scale oracle.

use crate::geometry::SampledDomain;
use crate::paths::{path_functional, ClosedPath, EdgeType};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Cap on distinct canonical paths the enumerator will produce by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// State graph of the alternation structure.
///
/// State `2*p` is "arrived at point p via an A-edge" and `2*p + 1` via a
/// B-edge. An A-edge runs from `(u, B)` to `(v, A)` whenever `u != v` share an
/// a-level and carries weight `(f(u) - f(v))/2`; a B-edge runs from `(u, A)`
/// to `(v, B)` on a shared b-level with weight `(f(v) - f(u))/2`. Signs follow
/// the state tags (B-tagged occurrences enter the functional positively), so
/// the mean weight of any directed cycle equals the path functional of the
/// corresponding closed path. A level class of size `s` contributes `s(s-1)`
/// directed edges of its type; the full quadratic edge set is materialized
/// (memory grows with the squared size of the largest level class).
#[derive(Debug, Clone)]
pub struct AlternationGraph {
    /// Adjacency: `succ[state]` lists `(target_state, weight)`, ascending.
    succ: Vec<Vec<(u32, f64)>>,
    a_edges: usize,
    b_edges: usize,
}

impl AlternationGraph {
    pub fn state_count(&self) -> usize {
        self.succ.len()
    }

    pub fn edge_count(&self) -> usize {
        self.a_edges + self.b_edges
    }

    pub fn edge_count_of(&self, edge_type: EdgeType) -> usize {
        match edge_type {
            EdgeType::A => self.a_edges,
            EdgeType::B => self.b_edges,
        }
    }

    fn point_of(state: u32) -> usize {
        (state / 2) as usize
    }

    /// Edge type of the transition into `target`.
    fn entry_type(target: u32) -> EdgeType {
        if target.is_multiple_of(2) {
            EdgeType::A
        } else {
            EdgeType::B
        }
    }
}

/// Builds the state graph for a tabulated function.
pub fn build_alternation_graph(domain: &SampledDomain, fvals: &[f64]) -> AlternationGraph {
    assert_eq!(fvals.len(), domain.len(), "fvals must cover every point");
    let n = domain.len();
    let mut succ = vec![Vec::new(); 2 * n];
    let mut a_edges = 0;
    let mut b_edges = 0;
    for group in domain.a_level_members() {
        for &u in &group {
            for &v in &group {
                if u == v {
                    continue;
                }
                // (u, B) -> (v, A)
                succ[2 * u + 1].push((2 * v as u32, (fvals[u] - fvals[v]) / 2.0));
                a_edges += 1;
            }
        }
    }
    for group in domain.b_level_members() {
        for &u in &group {
            for &v in &group {
                if u == v {
                    continue;
                }
                // (u, A) -> (v, B)
                succ[2 * u].push((2 * v as u32 + 1, (fvals[v] - fvals[u]) / 2.0));
                b_edges += 1;
            }
        }
    }
    for list in &mut succ {
        list.sort_by_key(|&(t, _)| t);
    }
    AlternationGraph {
        succ,
        a_edges,
        b_edges,
    }
}

/// Iterative Tarjan strongly connected components, in deterministic order.
fn strongly_connected_components(succ: &[Vec<(u32, f64)>]) -> Vec<Vec<u32>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0usize;
    let mut components = Vec::new();
    // Work stack of (node, next-successor position).
    let mut work: Vec<(u32, usize)> = Vec::new();

    for root in 0..n as u32 {
        if index[root as usize] != usize::MAX {
            continue;
        }
        work.push((root, 0));
        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            let vi = v as usize;
            if *pos == 0 {
                index[vi] = next_index;
                low[vi] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[vi] = true;
            }
            if let Some(&(w, _)) = succ[vi].get(*pos) {
                *pos += 1;
                let wi = w as usize;
                if index[wi] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[wi] {
                    low[vi] = low[vi].min(index[wi]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    let pi = parent as usize;
                    low[pi] = low[pi].min(low[vi]);
                }
                if low[vi] == index[vi] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w as usize] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
            }
        }
    }
    components
}

/// Maximum mean over all directed cycles, with a witnessing simple cycle of
/// that mean, or `None` when the graph is acyclic.
///
/// The value comes from Karp's walk-length dynamic program run per strongly
/// connected component. The witness comes from longest-walk potentials on the
/// winning component: with the mean subtracted from every weight, edges whose
/// potential slack vanishes form a subgraph whose cycles all attain the
/// optimum, so any cycle found there certifies the value.
pub fn max_mean_cycle(graph: &AlternationGraph) -> Option<(f64, Vec<u32>)> {
    let components = strongly_connected_components(&graph.succ);
    let mut best: Option<(f64, &[u32])> = None;
    let mut scratch = KarpScratch::default();
    for component in &components {
        if component.len() < 2 {
            continue; // no self-loops exist, so a singleton has no cycle
        }
        let Some(mean) = karp_max_mean(&graph.succ, component, &mut scratch) else {
            continue;
        };
        match best {
            Some((b, _)) if b >= mean => {}
            _ => best = Some((mean, component)),
        }
    }
    let (mean, component) = best?;
    let cycle = critical_cycle(&graph.succ, component, mean);
    Some((mean, cycle))
}

#[derive(Default)]
struct KarpScratch {
    local_of: Vec<usize>,
}

/// Karp's maximum cycle mean restricted to one strongly connected component.
fn karp_max_mean(
    succ: &[Vec<(u32, f64)>],
    component: &[u32],
    scratch: &mut KarpScratch,
) -> Option<f64> {
    let n = component.len();
    scratch.local_of.resize(succ.len(), usize::MAX);
    let local_of = &mut scratch.local_of;
    for (k, &s) in component.iter().enumerate() {
        local_of[s as usize] = k;
    }
    // Local edge list (from, to, weight).
    let mut edges = Vec::new();
    for (k, &s) in component.iter().enumerate() {
        for &(t, w) in &succ[s as usize] {
            let lt = local_of[t as usize];
            if lt != usize::MAX {
                edges.push((k, lt, w));
            }
        }
    }
    let result = if edges.is_empty() {
        None
    } else {
        // dist[k][v]: maximum weight of a walk of exactly k edges from node 0.
        let mut dist = vec![vec![f64::NEG_INFINITY; n]; n + 1];
        dist[0][0] = 0.0;
        for k in 1..=n {
            for &(u, v, w) in &edges {
                let du = dist[k - 1][u];
                if du > f64::NEG_INFINITY && du + w > dist[k][v] {
                    dist[k][v] = du + w;
                }
            }
        }
        let mut best: Option<f64> = None;
        for v in 0..n {
            if dist[n][v] == f64::NEG_INFINITY {
                continue;
            }
            let mut worst: Option<f64> = None;
            for k in 0..n {
                if dist[k][v] == f64::NEG_INFINITY {
                    continue;
                }
                let mean = (dist[n][v] - dist[k][v]) / (n - k) as f64;
                worst = Some(match worst {
                    None => mean,
                    Some(w) => w.min(mean),
                });
            }
            if let Some(w) = worst {
                best = Some(match best {
                    None => w,
                    Some(b) => b.max(w),
                });
            }
        }
        best
    };
    for &s in component {
        local_of[s as usize] = usize::MAX;
    }
    result
}

/// Extracts a simple cycle attaining (up to roundoff) the given mean inside
/// the component: longest-walk potentials under mean-shifted weights leave
/// every critical cycle with zero slack on all of its edges.
fn critical_cycle(succ: &[Vec<(u32, f64)>], component: &[u32], mean: f64) -> Vec<u32> {
    let n = component.len();
    let mut local_of = vec![usize::MAX; succ.len()];
    for (k, &s) in component.iter().enumerate() {
        local_of[s as usize] = k;
    }
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut scale = mean.abs().max(1.0);
    for (k, &s) in component.iter().enumerate() {
        for &(t, w) in &succ[s as usize] {
            let lt = local_of[t as usize];
            if lt != usize::MAX {
                edges.push((k, lt, w - mean));
                scale = scale.max(w.abs());
            }
        }
    }
    // Longest-walk potentials from local node 0 (strong connectivity makes
    // every node reachable; shifted weights admit no positive cycles).
    let mut pot = vec![f64::NEG_INFINITY; n];
    pot[0] = 0.0;
    for _ in 1..n {
        let mut changed = false;
        for &(u, v, w) in &edges {
            if pot[u] > f64::NEG_INFINITY && pot[u] + w > pot[v] {
                pot[v] = pot[u] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let eps = 1e-9 * scale;
    let mut tight = vec![Vec::new(); n];
    for &(u, v, w) in &edges {
        if pot[u] > f64::NEG_INFINITY && pot[v] > f64::NEG_INFINITY && pot[u] + w - pot[v] >= -eps {
            tight[u].push(v);
        }
    }
    for list in &mut tight {
        list.sort_unstable();
    }

    // Iterative DFS for any cycle in the tight subgraph.
    let mut color = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    let mut parent_pos: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if color[start] != 0 {
            continue;
        }
        parent_pos.push((start, 0));
        color[start] = 1;
        while let Some(&mut (v, ref mut pos)) = parent_pos.last_mut() {
            if let Some(&w) = tight[v].get(*pos) {
                *pos += 1;
                match color[w] {
                    0 => {
                        color[w] = 1;
                        parent_pos.push((w, 0));
                    }
                    1 => {
                        // Found a cycle: slice the DFS stack from w onward.
                        let at = parent_pos.iter().position(|&(x, _)| x == w).unwrap();
                        return parent_pos[at..]
                            .iter()
                            .map(|&(x, _)| component[x])
                            .collect();
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
                parent_pos.pop();
            }
        }
    }
    unreachable!("a component that produced a cycle mean must contain a tight cycle")
}

/// How a supremum was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "exact-mean-cycle")]
    ExactMeanCycle,
    #[serde(rename = "enumeration")]
    Enumeration,
}

/// Supremum of `|G_p(f)|` over all closed paths, with a witness when one
/// exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupResult {
    pub value: f64,
    pub witness: Option<ClosedPath>,
    pub method: Method,
}

fn cycle_to_closed_path(cycle: &[u32]) -> ClosedPath {
    let pts: Vec<usize> = cycle
        .iter()
        .map(|&s| AlternationGraph::point_of(s))
        .collect();
    // The edge out of the first state enters the second, whose tag names it.
    let first_edge = AlternationGraph::entry_type(cycle[1 % cycle.len()]);
    ClosedPath::from_parts_unchecked(pts, first_edge).canonical()
}

/// Exact supremum of the closed-path functional via the max-mean-cycle
/// reduction. Rotating a closed path by one position negates its functional,
/// so the one-sided maximum already equals the supremum of the absolute
/// value. Domains without closed paths report zero with no witness.
pub fn sup_closed_path(domain: &SampledDomain, fvals: &[f64]) -> SupResult {
    let graph = build_alternation_graph(domain, fvals);
    match max_mean_cycle(&graph) {
        None => SupResult {
            value: 0.0,
            witness: None,
            method: Method::ExactMeanCycle,
        },
        Some((mean, cycle)) => SupResult {
            value: mean.max(0.0),
            witness: Some(cycle_to_closed_path(&cycle)),
            method: Method::ExactMeanCycle,
        },
    }
}

/// All valid closed paths up to `max_len`, one canonical representative per
/// rotation/reversal class, sorted by (length, points, first edge).
#[derive(Debug, Clone)]
pub struct EnumeratedPaths {
    pub paths: Vec<ClosedPath>,
    /// Advisory: the cap cut enumeration short, so `paths` is incomplete.
    pub truncated: bool,
}

/// Enumerates every closed path of length at most `max_len` (which must be at
/// least 2), deduplicated up to rotation and reversal. Consecutive-distinct
/// repeats are allowed mid-path, so this walks the state graph exhaustively;
/// it is an oracle for desk-scale instances only, and trips the `truncated`
/// advisory once more than `cap` canonical paths have been collected.
pub fn enumerate_closed_paths(
    domain: &SampledDomain,
    max_len: usize,
    cap: usize,
) -> EnumeratedPaths {
    assert!(max_len >= 2, "closed paths have length at least 2");
    let max_len = max_len - max_len % 2;
    let zeros = vec![0.0; domain.len()];
    let graph = build_alternation_graph(domain, &zeros);
    let mut seen: HashSet<ClosedPath> = HashSet::new();
    let mut truncated = false;

    // DFS over walks in the state graph. A walk of even length whose next hop
    // re-enters the start state is a closed path; the hop's validity is
    // exactly the wraparound condition, since edges encode level sharing and
    // the alternation is built into the states.
    'outer: for start in 0..graph.succ.len() as u32 {
        if graph.succ[start as usize].is_empty() {
            continue;
        }
        let mut walk: Vec<u32> = vec![start];
        let mut pos: Vec<usize> = vec![0];
        while !walk.is_empty() {
            let depth = walk.len() - 1;
            let state = walk[depth];
            match graph.succ[state as usize].get(pos[depth]).map(|&(t, _)| t) {
                Some(target) => {
                    pos[depth] += 1;
                    if target == start
                        && walk.len().is_multiple_of(2)
                        && seen.insert(cycle_to_closed_path(&walk))
                        && seen.len() > cap
                    {
                        truncated = true;
                        break 'outer;
                    }
                    if walk.len() < max_len {
                        walk.push(target);
                        pos.push(0);
                    }
                }
                None => {
                    walk.pop();
                    pos.pop();
                }
            }
        }
    }

    let mut paths: Vec<ClosedPath> = seen.into_iter().collect();
    paths.sort_by(|p, q| {
        p.len()
            .cmp(&q.len())
            .then_with(|| p.pts().cmp(q.pts()))
            .then_with(|| p.first_edge().cmp(&q.first_edge()))
    });
    EnumeratedPaths { paths, truncated }
}

/// Supremum by brute-force enumeration; the oracle counterpart of
/// [`sup_closed_path`]. The result is a lower bound if enumeration truncated.
pub fn sup_via_enumeration(
    domain: &SampledDomain,
    fvals: &[f64],
    max_len: usize,
    cap: usize,
) -> SupResult {
    let enumerated = enumerate_closed_paths(domain, max_len, cap);
    let mut best: Option<(f64, ClosedPath)> = None;
    for path in enumerated.paths {
        let g = path_functional(&path, fvals).abs();
        match &best {
            Some((b, _)) if *b >= g => {}
            _ => best = Some((g, path)),
        }
    }
    match best {
        None => SupResult {
            value: 0.0,
            witness: None,
            method: Method::Enumeration,
        },
        Some((value, witness)) => SupResult {
            value,
            witness: Some(witness),
            method: Method::Enumeration,
        },
    }
}
