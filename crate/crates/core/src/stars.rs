//! Star configurations: per-distance degree functions `h_j(x)`, degree tails
//! `H_n` with their lower bound, exact star counts `ν_k(t⃗)` over distinct
//! leaves, and the size thresholds that force stars of every type.

use serde::Serialize;

use crate::field::{FieldParams, PointSet};
use crate::report::ge_with_slack;
use crate::{Error, Result};

/// Enumeration budget for exact star counting.
const STAR_GUARD: f64 = 1e8;

/// Degrees `h_j(x) = #{y in E : ||x-y|| = j}` for every nonzero `j`,
/// computed by one norm evaluation per ordered pair of members.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeProfile {
    params: FieldParams,
    members: Vec<usize>,
    /// `degrees[j-1][pos]` for `j in 1..q`.
    degrees: Vec<Vec<u32>>,
}

pub fn degree_profile(e: &PointSet) -> DegreeProfile {
    let params = e.params();
    let coords = e.member_coords();
    let q = params.q() as usize;
    let mut degrees = vec![vec![0u32; e.len()]; q - 1];
    for (a, ca) in coords.iter().enumerate() {
        for cb in coords.iter() {
            let j = params.norm_of_diff(ca, cb);
            if j != 0 {
                degrees[j as usize - 1][a] += 1;
            }
        }
    }
    DegreeProfile {
        params,
        members: e.members().to_vec(),
        degrees,
    }
}

impl DegreeProfile {
    #[inline]
    pub fn params(&self) -> FieldParams {
        self.params
    }

    #[inline]
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// `h_j` at the member in position `pos`.
    #[inline]
    pub fn degree(&self, j: u64, pos: usize) -> u32 {
        self.degrees[j as usize - 1][pos]
    }

    /// `H_n^{(j)} = #{x in E : h_j(x) >= n}`.
    pub fn tail(&self, j: u64, n: u32) -> usize {
        self.degrees[j as usize - 1]
            .iter()
            .filter(|&&h| h >= n)
            .count()
    }

    /// `sum_{x in E} h_j(x)`, which must equal the pair count `C_1((j))`.
    pub fn degree_sum(&self, j: u64) -> u128 {
        self.degrees[j as usize - 1].iter().map(|&h| h as u128).sum()
    }

    pub fn max_degree(&self, j: u64) -> u32 {
        self.degrees[j as usize - 1].iter().copied().max().unwrap_or(0)
    }
}

/// The tail lower bound `H_n >= |E| - 10 q^{(d+1)/2} - 2qn`, unconditional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBoundReport {
    pub j: u64,
    pub n: u64,
    pub tail: u64,
    pub bound: f64,
    pub holds: bool,
}

pub fn verify_tail_bound(profile: &DegreeProfile, j: u64, n: u32) -> TailBoundReport {
    let params = profile.params();
    let qf = params.q() as f64;
    let tail = profile.tail(j, n) as u64;
    let bound = profile.members().len() as f64
        - 10.0 * qf.powf((params.d() as f64 + 1.0) / 2.0)
        - 2.0 * qf * n as f64;
    TailBoundReport {
        j,
        n: n as u64,
        tail,
        bound,
        holds: ge_with_slack(tail as f64, bound),
    }
}

/// A star type: `k` prescribed nonzero leaf distances, canonicalized into
/// (distance, multiplicity) groups. Stars are invariant under permutations
/// of the distance vector, so the grouping loses nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarSpec {
    distances: Vec<u64>,
    groups: Vec<(u64, usize)>,
}

impl StarSpec {
    pub fn new(distances: Vec<u64>, params: FieldParams) -> Result<Self> {
        let distances: Vec<u64> = distances.into_iter().map(|t| t % params.q()).collect();
        if distances.is_empty() || distances.contains(&0) {
            return Err(Error::ZeroDistance);
        }
        let mut counts = std::collections::BTreeMap::new();
        for &t in &distances {
            *counts.entry(t).or_insert(0usize) += 1;
        }
        Ok(Self {
            distances,
            groups: counts.into_iter().collect(),
        })
    }

    /// Total number of leaves `k`.
    #[inline]
    pub fn k(&self) -> usize {
        self.distances.len()
    }

    #[inline]
    pub fn distances(&self) -> &[u64] {
        &self.distances
    }

    /// Distinct distances with multiplicities, ascending by distance.
    #[inline]
    pub fn groups(&self) -> &[(u64, usize)] {
        &self.groups
    }

    pub fn label(&self) -> String {
        self.distances
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn falling_factorial(n: u32, m: usize) -> u128 {
    let mut acc = 1u128;
    for i in 0..m {
        if (i as u32) >= n {
            return 0;
        }
        acc *= (n - i as u32) as u128;
    }
    acc
}

/// Upper estimate of the enumeration tree: `sum_x prod_j P(h_j(x), m_j)`
/// where `P` is the falling factorial.
fn enumeration_estimate(profile: &DegreeProfile, spec: &StarSpec) -> f64 {
    let mut total = 0.0f64;
    for pos in 0..profile.members().len() {
        let mut prod = 1.0f64;
        for &(j, m) in spec.groups() {
            prod *= falling_factorial(profile.degree(j, pos), m) as f64;
        }
        total += prod;
    }
    total
}

/// Ordered distinct leaf choices, group by group. Leaves in different
/// groups sit at different distances from the center and can never collide,
/// but one shared `used` table keeps the distinctness literal.
fn count_ordered_tuples(lists: &[&[u32]], mults: &[usize]) -> u128 {
    fn rec(lists: &[&[u32]], mults: &[usize], group: usize, used: &mut [bool], picked_in_group: usize) -> u128 {
        if group == lists.len() {
            return 1;
        }
        if picked_in_group == mults[group] {
            return rec(lists, mults, group + 1, used, 0);
        }
        let mut acc = 0u128;
        for &cand in lists[group] {
            if !used[cand as usize] {
                used[cand as usize] = true;
                acc += rec(lists, mults, group, used, picked_in_group + 1);
                used[cand as usize] = false;
            }
        }
        acc
    }
    let max_pos = lists
        .iter()
        .flat_map(|l| l.iter())
        .copied()
        .max()
        .map_or(0, |m| m as usize + 1);
    let mut used = vec![false; max_pos];
    rec(lists, mults, 0, &mut used, 0)
}

/// Exact `ν_k`: ordered tuples of pairwise-distinct leaves enumerated from
/// per-center neighbor lists. Refuses above the guard.
pub fn star_count_exact(e: &PointSet, spec: &StarSpec) -> Result<u128> {
    let profile = degree_profile(e);
    star_count_exact_with_profile(e, spec, &profile)
}

/// Same as [`star_count_exact`] but reusing an existing degree profile for
/// the guard estimate.
pub fn star_count_exact_with_profile(
    e: &PointSet,
    spec: &StarSpec,
    profile: &DegreeProfile,
) -> Result<u128> {
    let estimate = enumeration_estimate(profile, spec);
    if estimate > STAR_GUARD {
        return Err(Error::ScaleGuard {
            what: "star tuple enumeration",
            estimate,
            limit: STAR_GUARD,
        });
    }
    let params = e.params();
    let coords = e.member_coords();
    let mut total = 0u128;
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); spec.groups().len()];
    for ca in coords.iter() {
        for l in &mut lists {
            l.clear();
        }
        for (bpos, cb) in coords.iter().enumerate() {
            let j = params.norm_of_diff(ca, cb);
            if let Some(gi) = spec.groups().iter().position(|&(g, _)| g == j) {
                lists[gi].push(bpos as u32);
            }
        }
        let list_refs: Vec<&[u32]> = lists.iter().map(|l| l.as_slice()).collect();
        let mults: Vec<usize> = spec.groups().iter().map(|&(_, m)| m).collect();
        total = total
            .checked_add(count_ordered_tuples(&list_refs, &mults))
            .ok_or(Error::CountOverflow)?;
    }
    Ok(total)
}

/// Star count without leaf distinctness: `sum_x prod_j h_j(x)^{m_j}`.
/// Dominates `ν_k`; equal when every multiplicity is 1.
pub fn star_count_multiset(e: &PointSet, spec: &StarSpec) -> Result<u128> {
    let profile = degree_profile(e);
    let mut total = 0u128;
    for pos in 0..profile.members().len() {
        let mut prod = 1u128;
        for &(j, m) in spec.groups() {
            for _ in 0..m {
                prod = prod
                    .checked_mul(profile.degree(j, pos) as u128)
                    .ok_or(Error::CountOverflow)?;
            }
        }
        total = total.checked_add(prod).ok_or(Error::CountOverflow)?;
    }
    Ok(total)
}

/// How the positivity (or vanishing) of `ν_k` was established.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StarEvidence {
    /// Full enumeration.
    Exact { count: u128 },
    /// Some center has enough neighbors at every prescribed distance; a
    /// star exists at that center even though the full count was not
    /// enumerated.
    CertifiedPositive { center: usize },
    /// No center has enough neighbors at every prescribed distance, so no
    /// star of this type exists.
    CertifiedZero,
}

/// Both threshold statements of the star theorem for one `(E, t⃗)`:
/// statement 1 forces `ν_k > 0` for `k < |E| / (12 q^{(d+1)/2})` when
/// `|E| > 12 q^{(d+1)/2}`; statement 2 forces it for `k < |E|/(12q)` when
/// `|E| > 12 q^{(d+3)/2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarReport {
    pub q: u64,
    pub d: u32,
    pub set_size: u64,
    pub t: String,
    pub k: u64,
    pub evidence: StarEvidence,
    pub positive: bool,
    pub threshold_1: f64,
    pub k_limit_1: f64,
    pub hypothesis_1_met: bool,
    pub applicable_1: bool,
    pub threshold_2: f64,
    pub k_limit_2: f64,
    pub hypothesis_2_met: bool,
    pub applicable_2: bool,
    /// True unless some applicable statement failed to force positivity.
    pub holds: bool,
    /// Neither statement applies at this instance.
    pub vacuous: bool,
}

pub fn verify_star_theorem(e: &PointSet, spec: &StarSpec) -> Result<StarReport> {
    let params = e.params();
    let profile = degree_profile(e);
    let qf = params.q() as f64;
    let sz = e.len() as f64;
    let k = spec.k();

    let threshold_1 = 12.0 * qf.powf((params.d() as f64 + 1.0) / 2.0);
    let hypothesis_1_met = sz > threshold_1;
    let k_limit_1 = sz / threshold_1;
    let applicable_1 = hypothesis_1_met && (k as f64) < k_limit_1;

    let threshold_2 = 12.0 * qf.powf((params.d() as f64 + 3.0) / 2.0);
    let hypothesis_2_met = sz > threshold_2;
    let k_limit_2 = sz / (12.0 * qf);
    let applicable_2 = hypothesis_2_met && (k as f64) < k_limit_2;

    let evidence = match star_count_exact_with_profile(e, spec, &profile) {
        Ok(count) => StarEvidence::Exact { count },
        Err(Error::ScaleGuard { .. }) => {
            // Positivity is decidable from degrees alone: a star centered at
            // x exists iff h_j(x) >= m_j for every group.
            let center = (0..profile.members().len()).find(|&pos| {
                spec.groups()
                    .iter()
                    .all(|&(j, m)| profile.degree(j, pos) as usize >= m)
            });
            match center {
                Some(pos) => StarEvidence::CertifiedPositive {
                    center: profile.members()[pos],
                },
                None => StarEvidence::CertifiedZero,
            }
        }
        Err(err) => return Err(err),
    };
    let positive = match evidence {
        StarEvidence::Exact { count } => count > 0,
        StarEvidence::CertifiedPositive { .. } => true,
        StarEvidence::CertifiedZero => false,
    };

    Ok(StarReport {
        q: params.q(),
        d: params.d(),
        set_size: e.len() as u64,
        t: spec.label(),
        k: k as u64,
        evidence,
        positive,
        threshold_1,
        k_limit_1,
        hypothesis_1_met,
        applicable_1,
        threshold_2,
        k_limit_2,
        hypothesis_2_met,
        applicable_2,
        holds: (!applicable_1 || positive) && (!applicable_2 || positive),
        vacuous: !applicable_1 && !applicable_2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{chain_count_dp, ChainType};

    fn params(q: u64, d: u32) -> FieldParams {
        FieldParams::new(q, d).unwrap()
    }

    /// Literal definition: ordered leaf tuples in the original distance
    /// order, all leaves pairwise distinct.
    fn brute_stars(e: &PointSet, distances: &[u64]) -> u128 {
        let params = e.params();
        let coords = e.member_coords();
        let mut total = 0u128;
        let mut leaves: Vec<usize> = Vec::new();
        fn rec(
            params: FieldParams,
            coords: &[Vec<u64>],
            center: usize,
            distances: &[u64],
            leaves: &mut Vec<usize>,
            total: &mut u128,
        ) {
            if leaves.len() == distances.len() {
                *total += 1;
                return;
            }
            let t = distances[leaves.len()];
            for (cand, cc) in coords.iter().enumerate() {
                if leaves.contains(&cand) {
                    continue;
                }
                if params.norm_of_diff(&coords[center], cc) == t {
                    leaves.push(cand);
                    rec(params, coords, center, distances, leaves, total);
                    leaves.pop();
                }
            }
        }
        for center in 0..coords.len() {
            rec(params, &coords, center, distances, &mut leaves, &mut total);
        }
        total
    }

    #[test]
    fn full_space_degrees_and_tails() {
        let e = PointSet::full(params(3, 2));
        let prof = degree_profile(&e);
        for pos in 0..9 {
            assert_eq!(prof.degree(1, pos), 4);
        }
        assert_eq!(prof.tail(1, 4), 9); // H_4 = 9
        assert_eq!(prof.tail(1, 5), 0); // H_5 = 0
        assert_eq!(prof.tail(1, 0), 9); // H_0 = |E|
        // tails are nonincreasing
        for j in 1..3u64 {
            for n in 0..8u32 {
                assert!(prof.tail(j, n) >= prof.tail(j, n + 1));
            }
        }
    }

    #[test]
    fn singleton_has_zero_degrees() {
        let p = params(3, 2);
        let e = PointSet::from_indices(p, [0usize]).unwrap();
        let prof = degree_profile(&e);
        for j in 1..3u64 {
            assert_eq!(prof.degree(j, 0), 0);
            assert_eq!(prof.tail(j, 1), 0);
        }
        let spec = StarSpec::new(vec![1, 2], p).unwrap();
        assert_eq!(star_count_exact(&e, &spec).unwrap(), 0);
    }

    #[test]
    fn degree_sums_match_pair_counts() {
        let p = params(5, 2);
        let e = PointSet::from_indices(p, [0usize, 3, 7, 8, 11, 12, 14, 19, 21, 24]).unwrap();
        let prof = degree_profile(&e);
        for j in 1..5u64 {
            let ty = ChainType::uniform(j, 1, p).unwrap();
            assert_eq!(prof.degree_sum(j), chain_count_dp(&e, &ty).unwrap().count());
        }
    }

    #[test]
    fn full_space_star_counts() {
        let e = PointSet::full(params(3, 2));
        let s1 = StarSpec::new(vec![1], e.params()).unwrap();
        assert_eq!(star_count_exact(&e, &s1).unwrap(), 36); // = C_1
        let s11 = StarSpec::new(vec![1, 1], e.params()).unwrap();
        assert_eq!(star_count_exact(&e, &s11).unwrap(), 108); // 9 * 4 * 3
        assert_eq!(brute_stars(&e, &[1, 1]), 108);
        assert_eq!(star_count_multiset(&e, &s11).unwrap(), 9 * 16);
    }

    #[test]
    fn star_count_invariant_under_permutation() {
        let p = params(5, 2);
        let e = PointSet::from_indices(p, [0usize, 1, 2, 6, 7, 12, 13, 18, 24, 11, 21, 3]).unwrap();
        for perm in [vec![1u64, 2, 4], vec![2, 4, 1], vec![4, 1, 2], vec![4, 2, 1]] {
            let spec = StarSpec::new(perm.clone(), p).unwrap();
            let exact = star_count_exact(&e, &spec).unwrap();
            assert_eq!(exact, brute_stars(&e, &perm), "perm {perm:?}");
            assert_eq!(exact, brute_stars(&e, &[1, 2, 4]));
            assert!(exact <= star_count_multiset(&e, &spec).unwrap());
        }
    }

    #[test]
    fn rejects_zero_distance() {
        let p = params(3, 2);
        assert_eq!(StarSpec::new(vec![0, 1], p), Err(Error::ZeroDistance));
        assert_eq!(StarSpec::new(vec![], p), Err(Error::ZeroDistance));
    }

    #[test]
    fn tail_bound_examples() {
        let e = PointSet::full(params(3, 2));
        let prof = degree_profile(&e);
        let r = verify_tail_bound(&prof, 1, 4);
        assert_eq!(r.tail, 9);
        assert!((r.bound - (9.0 - 10.0 * 3f64.powf(1.5) - 24.0)).abs() < 1e-9);
        assert!(r.holds);
        let r0 = verify_tail_bound(&prof, 1, 0);
        assert!(r0.holds); // H_0 = |E| >= |E| - 10 q^{(d+1)/2}
    }

    #[test]
    fn star_theorem_vacuous_at_small_scale() {
        let e = PointSet::full(params(3, 4));
        let spec = StarSpec::new(vec![1], e.params()).unwrap();
        let r = verify_star_theorem(&e, &spec).unwrap();
        // 12 * 3^2.5 ~ 187 > 81: both statements vacuous, count still exact
        assert!(!r.hypothesis_1_met && !r.hypothesis_2_met && r.vacuous);
        assert!(matches!(r.evidence, StarEvidence::Exact { .. }));
        assert!(r.holds);
    }

    #[test]
    fn certificate_positivity_matches_enumeration() {
        let p = params(3, 2);
        let e = crate::spectral::sphere(p, 1).set().clone();
        let prof = degree_profile(&e);
        for spec in [
            StarSpec::new(vec![1], p).unwrap(),
            StarSpec::new(vec![1, 1], p).unwrap(),
            StarSpec::new(vec![2, 2], p).unwrap(),
            StarSpec::new(vec![1, 2], p).unwrap(),
        ] {
            let exact = star_count_exact(&e, &spec).unwrap();
            let cert = (0..prof.members().len()).any(|pos| {
                spec.groups()
                    .iter()
                    .all(|&(j, m)| prof.degree(j, pos) as usize >= m)
            });
            assert_eq!(exact > 0, cert, "spec {:?}", spec.distances());
        }
    }
}
