//! Non-overlapping path counts `G_k`, per-start profiles `g_k(x)`, the
//! counting recurrence that relates consecutive levels, the long-path lower
//! bound, and witness extraction.
//!
//! Paths are ordered tuples, so each undirected non-overlapping path is
//! counted once per orientation. This matches the tuple convention of chain
//! counts and keeps `G_k <= C_k` a literal pointwise inequality.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::Serialize;

use crate::chains::ChainType;
use crate::field::{FieldParams, Point, PointSet};
use crate::report::ge_with_slack;
use crate::spectral::sphere;
use crate::{Error, Result};

/// Budget on the upper estimate of DFS nodes visited.
const SEARCH_GUARD: f64 = 1e8;

/// Per-distance adjacency inside `E`, in member-position space with sorted
/// neighbor lists (ascending point index), so every search is deterministic.
struct Adjacency {
    by_distance: BTreeMap<u64, Vec<Vec<u32>>>,
    sphere_sizes: BTreeMap<u64, usize>,
}

fn build_adjacency(e: &PointSet, distances: &[u64]) -> Adjacency {
    let params = e.params();
    let mut pos_of: Vec<u32> = vec![u32::MAX; params.size()];
    for (pos, &idx) in e.members().iter().enumerate() {
        pos_of[idx] = pos as u32;
    }
    let mut by_distance = BTreeMap::new();
    let mut sphere_sizes = BTreeMap::new();
    for &t in distances {
        if by_distance.contains_key(&t) {
            continue;
        }
        let sph = sphere(params, t);
        sphere_sizes.insert(t, sph.len());
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); e.len()];
        for (pos, &x) in e.members().iter().enumerate() {
            for &s in sph.set().members() {
                let y = params.add_index(x, s);
                let ypos = pos_of[y];
                if ypos != u32::MAX {
                    lists[pos].push(ypos);
                }
            }
            lists[pos].sort_unstable();
        }
        by_distance.insert(t, lists);
    }
    Adjacency {
        by_distance,
        sphere_sizes,
    }
}

fn guard_estimate(e: &PointSet, adj: &Adjacency, ty: &ChainType) -> f64 {
    let mut est = e.len() as f64;
    for &t in ty.distances() {
        est *= (adj.sphere_sizes[&t].min(e.len())) as f64;
    }
    est
}

/// Per-start non-overlapping path counts: `g(x)` is the number of
/// non-overlapping paths of the full type beginning at `x`, and
/// `G_k = sum_x g(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathProfile {
    params: FieldParams,
    k: usize,
    starts: Vec<u128>,
    total: u128,
}

impl PathProfile {
    #[inline]
    pub fn params(&self) -> FieldParams {
        self.params
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// `G_k`.
    #[inline]
    pub fn total(&self) -> u128 {
        self.total
    }

    /// `g(x)` by point index (zero off `E`).
    #[inline]
    pub fn starts(&self) -> &[u128] {
        &self.starts
    }

    /// `sum_x g(x)^2`, used by the recurrence estimates.
    pub fn l2_sq(&self) -> u128 {
        self.starts.iter().map(|&v| v * v).sum()
    }
}

fn count_paths_from(
    adj_seq: &[&Vec<Vec<u32>>],
    visited: &mut [bool],
    pos: u32,
    depth: usize,
) -> u128 {
    if depth == adj_seq.len() {
        return 1;
    }
    let mut acc = 0u128;
    for &next in &adj_seq[depth][pos as usize] {
        if !visited[next as usize] {
            visited[next as usize] = true;
            acc += count_paths_from(adj_seq, visited, next, depth + 1);
            visited[next as usize] = false;
        }
    }
    acc
}

/// Exact count of non-overlapping paths of the given type by depth-first
/// extension with a visited set. Refuses above the search guard.
pub fn nonoverlap_count(e: &PointSet, ty: &ChainType) -> Result<PathProfile> {
    let adj = build_adjacency(e, ty.distances());
    let estimate = guard_estimate(e, &adj, ty);
    if estimate > SEARCH_GUARD {
        return Err(Error::ScaleGuard {
            what: "non-overlapping path search",
            estimate,
            limit: SEARCH_GUARD,
        });
    }
    let adj_seq: Vec<&Vec<Vec<u32>>> = ty
        .distances()
        .iter()
        .map(|t| &adj.by_distance[t])
        .collect();
    let mut starts = vec![0u128; e.params().size()];
    let mut visited = vec![false; e.len()];
    let mut total = 0u128;
    for (pos, &idx) in e.members().iter().enumerate() {
        visited[pos] = true;
        let c = count_paths_from(&adj_seq, &mut visited, pos as u32, 0);
        visited[pos] = false;
        starts[idx] = c;
        total = total.checked_add(c).ok_or(Error::CountOverflow)?;
    }
    Ok(PathProfile {
        params: e.params(),
        k: ty.k(),
        starts,
        total,
    })
}

/// A concrete non-overlapping path: `k+1` distinct vertices with the
/// prescribed consecutive distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathWitness {
    #[serde(serialize_with = "serialize_points")]
    pub vertices: Vec<Point>,
    pub distances: Vec<u64>,
}

fn serialize_points<S: serde::Serializer>(pts: &[Point], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(pts.iter().map(|p| p.coords().to_vec()))
}

impl PathWitness {
    /// Independent re-validation: membership, distinctness, and every
    /// consecutive norm, straight from the definitions.
    pub fn validate(&self, e: &PointSet) -> bool {
        if self.vertices.len() != self.distances.len() + 1 {
            return false;
        }
        let params = e.params();
        let indices: Vec<usize> = self.vertices.iter().map(Point::index).collect();
        if indices.iter().any(|&i| !e.contains(i)) {
            return false;
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() {
            return false;
        }
        self.vertices
            .windows(2)
            .zip(&self.distances)
            .all(|(w, &t)| params.norm_of_diff(w[0].coords(), w[1].coords()) == t)
    }

    pub fn describe(&self) -> String {
        self.vertices
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

fn find_path_from(
    adj_seq: &[&Vec<Vec<u32>>],
    visited: &mut [bool],
    trail: &mut Vec<u32>,
    pos: u32,
    depth: usize,
) -> bool {
    if depth == adj_seq.len() {
        return true;
    }
    for &next in &adj_seq[depth][pos as usize] {
        if !visited[next as usize] {
            visited[next as usize] = true;
            trail.push(next);
            if find_path_from(adj_seq, visited, trail, next, depth + 1) {
                return true;
            }
            trail.pop();
            visited[next as usize] = false;
        }
    }
    false
}

/// First non-overlapping path of the given type in deterministic order
/// (ascending point index at every level), or `None` after an exhaustive
/// search. Subject to the same guard as counting.
pub fn extract_path(e: &PointSet, ty: &ChainType) -> Result<Option<PathWitness>> {
    let adj = build_adjacency(e, ty.distances());
    let estimate = guard_estimate(e, &adj, ty);
    if estimate > SEARCH_GUARD {
        return Err(Error::ScaleGuard {
            what: "non-overlapping path search",
            estimate,
            limit: SEARCH_GUARD,
        });
    }
    let adj_seq: Vec<&Vec<Vec<u32>>> = ty
        .distances()
        .iter()
        .map(|t| &adj.by_distance[t])
        .collect();
    let mut visited = vec![false; e.len()];
    let mut trail: Vec<u32> = Vec::with_capacity(ty.k() + 1);
    for pos in 0..e.len() as u32 {
        visited[pos as usize] = true;
        trail.push(pos);
        if find_path_from(&adj_seq, &mut visited, &mut trail, pos, 0) {
            let vertices = trail
                .iter()
                .map(|&p| Point::from_index(e.members()[p as usize], e.params()).expect("member"))
                .collect();
            return Ok(Some(PathWitness {
                vertices,
                distances: ty.distances().to_vec(),
            }));
        }
        trail.pop();
        visited[pos as usize] = false;
    }
    Ok(None)
}

/// The counting recurrence
/// `G_{n+1} >= -n G_n + sum_{x,y} g_n(x) E(y) S_t(x-y)`,
/// checked with exact integers on both sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecurrenceReport {
    pub n: u64,
    pub t: u64,
    pub g_n: u128,
    pub g_n_plus_1: u128,
    /// `sum_x g_n(x) * #{y in E : ||x-y|| = t}`, exact.
    pub degree_weighted_sum: u128,
    /// `G_{n+1} + n G_n - degree_weighted_sum`; nonnegative iff the
    /// recurrence holds.
    pub slack: i128,
    pub holds: bool,
}

pub fn verify_path_recurrence(e: &PointSet, n: usize, t: u64) -> Result<PathRecurrenceReport> {
    let params = e.params();
    let ty_n = ChainType::uniform(t, n, params)?;
    let ty_n1 = ChainType::uniform(t, n + 1, params)?;
    let prof_n = nonoverlap_count(e, &ty_n)?;
    let prof_n1 = nonoverlap_count(e, &ty_n1)?;

    let adj = build_adjacency(e, &[t]);
    let lists = &adj.by_distance[&t];
    let mut mixed: u128 = 0;
    for (pos, &idx) in e.members().iter().enumerate() {
        let deg = lists[pos].len() as u128;
        mixed = mixed
            .checked_add(prof_n.starts()[idx].checked_mul(deg).ok_or(Error::CountOverflow)?)
            .ok_or(Error::CountOverflow)?;
    }

    let lhs = prof_n1
        .total()
        .checked_add((n as u128).checked_mul(prof_n.total()).ok_or(Error::CountOverflow)?)
        .ok_or(Error::CountOverflow)?;
    let slack = i128::try_from(lhs).map_err(|_| Error::CountOverflow)?
        - i128::try_from(mixed).map_err(|_| Error::CountOverflow)?;

    Ok(PathRecurrenceReport {
        n: n as u64,
        t,
        g_n: prof_n.total(),
        g_n_plus_1: prof_n1.total(),
        degree_weighted_sum: mixed,
        slack,
        holds: slack >= 0,
    })
}

/// The long-path lower bound
/// `G_k >= |E|^{k+1}/q^k - (4k/ln 2) q^{(d+1)/2} |E|^k/q^k` under the size
/// hypothesis `|E| >= (4k/ln 2) q^{(d+1)/2}`, which also forces `G_k > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub k: u64,
    pub t: u64,
    pub count: u128,
    pub lower_bound: f64,
    /// `(4k/ln 2) q^{(d+1)/2}`; the hypothesis is `|E| >=` this.
    pub threshold: f64,
    pub hypothesis_met: bool,
    pub bound_holds: bool,
    pub positive: bool,
    /// Full claim at this instance; informational when the hypothesis fails.
    pub holds: bool,
    pub vacuous: bool,
}

pub fn verify_corollary_bound(e: &PointSet, k: usize, t: u64) -> Result<CorollaryReport> {
    let params = e.params();
    let ty = ChainType::uniform(t, k, params)?;
    let prof = nonoverlap_count(e, &ty)?;
    let count = prof.total();
    let qf = params.q() as f64;
    let sz = e.len() as f64;
    let threshold = (4.0 * k as f64 / LN_2) * qf.powf((params.d() as f64 + 1.0) / 2.0);
    let lower_bound =
        sz.powi(k as i32 + 1) / qf.powi(k as i32) - threshold * sz.powi(k as i32) / qf.powi(k as i32);
    let hypothesis_met = sz >= threshold;
    let bound_holds = ge_with_slack(count as f64, lower_bound);
    let positive = count > 0;
    Ok(CorollaryReport {
        k: k as u64,
        t,
        count,
        lower_bound,
        threshold,
        hypothesis_met,
        bound_holds,
        positive,
        holds: bound_holds && (positive || !hypothesis_met),
        vacuous: !hypothesis_met,
    })
}

/// Longest type-`(t,...,t)` non-overlapping path found by deterministic
/// search, recorded as data. `guard_limited` marks that longer paths were
/// not searched because the guard refused, so the value is only a lower
/// bound in that case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongestPathReport {
    pub t: u64,
    pub max_length_found: u64,
    pub guard_limited: bool,
    pub witness: Option<PathWitness>,
}

pub fn longest_observed(e: &PointSet, t: u64, cap: usize) -> Result<LongestPathReport> {
    let params = e.params();
    let mut best: Option<PathWitness> = None;
    let mut max_len = 0u64;
    let mut guard_limited = false;
    for k in 1..=cap {
        let ty = ChainType::uniform(t, k, params)?;
        match extract_path(e, &ty) {
            Ok(Some(w)) => {
                max_len = k as u64;
                best = Some(w);
            }
            Ok(None) => break,
            Err(Error::ScaleGuard { .. }) => {
                guard_limited = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(LongestPathReport {
        t,
        max_length_found: max_len,
        guard_limited,
        witness: best,
    })
}
