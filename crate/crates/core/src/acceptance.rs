//! The acceptance suite: every top-level verification criterion executed
//! over the fixed corpus, producing a sorted stream of check records plus
//! per-criterion summaries.
//!
//! 1. sphere spectrum decay, exhaustive over small (q, d, t)
//! 2. Fourier identities (Plancherel, inversion, fast vs direct transform)
//! 3. the bilinear distance form bound and its exhaustive total
//! 4. chain DP vs tuple-enumeration oracle, exact
//! 5. frozen fixed values on the full plane over F_3
//! 6. unconditional inequalities over the whole corpus
//! 7. conditional theorems wherever their size hypotheses hold
//! 8. determinism of regenerated records and corpus sets
//!
//! Instance-level work fans out over a rayon pool; set `DISTGRAPH_THREADS`
//! to cap the worker count. Records never depend on scheduling: each one is
//! computed from its instance alone and the merged stream is sorted by key.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{chain_count_dp, chain_count_oracle, verify_lower_bound, verify_main_theorem, verify_recurrences, verify_upper_bound, ChainType};
use crate::ensembles::{corpus, derived_seed, CorpusInstance};
use crate::field::{FieldParams, PointSet};
use crate::paths::{extract_path, nonoverlap_count, verify_corollary_bound, verify_path_recurrence};
use crate::report::{CheckRecord, Timing};
use crate::spectral::{bilinear_distance_form, bilinear_total_spectral, dft, dft_direct, inverse_dft, sphere, sphere_decay_report, DensityFunction};
use crate::stars::{degree_profile, star_count_exact, star_count_multiset, verify_star_theorem, verify_tail_bound, StarSpec};
use crate::{Error, Result};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const QS: [u64; 5] = [3, 5, 7, 11, 13];
const DS: [u32; 2] = [2, 3];

/// Node budget kept a little under the library scale guards so the standard
/// corpus never triggers a refusal mid-criterion.
const PATH_PLAN_BUDGET: f64 = 9e7;

/// Deliberate defects for exercising the failure path of the suite itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultInjection {
    /// Toggle the origin's membership in every sphere used directly by the
    /// fixed-value and decay checks.
    SphereMembership,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub number: u8,
    pub name: &'static str,
    pub checks: usize,
    pub violations: usize,
    pub vacuous: usize,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct AcceptanceOutcome {
    /// All records, sorted by key.
    pub records: Vec<CheckRecord>,
    /// Wall-clock timings per work unit, sorted by key; kept out of the
    /// data section so identical runs produce identical data.
    pub timings: Vec<Timing>,
    pub criteria: Vec<CriterionSummary>,
}

impl AcceptanceOutcome {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn first_violation(&self) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.is_violation())
    }
}

pub const CRITERION_NAMES: [(u8, &str); 8] = [
    (1, "sphere decay"),
    (2, "fourier identities"),
    (3, "bilinear estimate"),
    (4, "oracle equivalence"),
    (5, "fixed values"),
    (6, "unconditional inequalities"),
    (7, "conditional theorems"),
    (8, "determinism"),
];

#[derive(Debug, Default, Clone)]
struct Batch {
    records: Vec<CheckRecord>,
    timings: Vec<Timing>,
}

impl Batch {
    fn merge(&mut self, other: Batch) {
        self.records.extend(other.records);
        self.timings.extend(other.timings);
    }

    fn time_unit<F: FnOnce(&mut Self) -> Result<()>>(&mut self, key: &str, f: F) -> Result<()> {
        let start = Instant::now();
        f(self)?;
        self.timings.push(Timing {
            key: key.to_string(),
            micros: start.elapsed().as_micros(),
        });
        Ok(())
    }
}

fn qd_pairs() -> Vec<(u64, u32)> {
    QS.iter().flat_map(|&q| DS.iter().map(move |&d| (q, d))).collect()
}

fn pair_label(q: u64, d: u32) -> String {
    format!("q{q:02}-d{d}")
}

/// Runs the given criteria (all eight when `only` is `None`).
pub fn run_all(only: Option<&[u8]>, fault: Option<FaultInjection>) -> Result<AcceptanceOutcome> {
    with_thread_cap(|| run_all_inner(only, fault))
}

fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("DISTGRAPH_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1);
    match cap {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

fn run_all_inner(only: Option<&[u8]>, fault: Option<FaultInjection>) -> Result<AcceptanceOutcome> {
    let selected = |n: u8| only.is_none_or(|list| list.contains(&n));
    let mut batch = Batch::default();
    let mut criteria = Vec::new();

    for (number, name) in CRITERION_NAMES {
        if !selected(number) {
            continue;
        }
        let before = batch.records.len();
        let start = Instant::now();
        let b = match number {
            1 => criterion_sphere_decay(fault)?,
            2 => criterion_fourier_identities()?,
            3 => criterion_bilinear()?,
            4 => criterion_oracle_equivalence()?,
            5 => criterion_fixed_values(fault)?,
            6 => criterion_unconditional()?,
            7 => criterion_conditional()?,
            8 => criterion_determinism(fault)?,
            _ => unreachable!(),
        };
        batch.merge(b);
        batch.timings.push(Timing {
            key: format!("c{number}"),
            micros: start.elapsed().as_micros(),
        });
        let slice = &batch.records[before..];
        let violations = slice.iter().filter(|r| r.is_violation()).count();
        let vacuous = slice.iter().filter(|r| r.vacuous).count();
        criteria.push(CriterionSummary {
            number,
            name,
            checks: slice.len(),
            violations,
            vacuous,
            passed: violations == 0,
        });
    }

    batch.records.sort_by(|a, b| a.key.cmp(&b.key));
    batch.timings.sort_by(|a, b| a.key.cmp(&b.key));
    debug_assert!(
        batch.records.windows(2).all(|w| w[0].key != w[1].key),
        "record keys must be unique"
    );
    Ok(AcceptanceOutcome {
        records: batch.records,
        timings: batch.timings,
        criteria,
    })
}

/// Sphere indicator with the optional membership fault applied.
fn sphere_indicator_maybe_faulty(
    params: FieldParams,
    t: u64,
    fault: Option<FaultInjection>,
) -> (DensityFunction, u64) {
    let sph = sphere(params, t);
    let mut mask: Vec<bool> = sph.set().mask().to_vec();
    if fault == Some(FaultInjection::SphereMembership) {
        mask[0] = !mask[0];
    }
    let size = mask.iter().filter(|&&m| m).count() as u64;
    let set = PointSet::from_mask(params, mask);
    (DensityFunction::indicator(&set), size)
}

// criterion 1 ---------------------------------------------------------------

fn criterion_sphere_decay(fault: Option<FaultInjection>) -> Result<Batch> {
    let batches: Vec<Batch> = qd_pairs()
        .par_iter()
        .map(|&(q, d)| -> Result<Batch> {
            let params = FieldParams::new(q, d)?;
            let mut b = Batch::default();
            b.time_unit(&format!("c1/{}", pair_label(q, d)), |b| {
                for t in 1..q {
                    let (max_nontrivial, bound, holds, size) = if fault.is_none() {
                        let r = sphere_decay_report(params, t)?;
                        (r.max_nontrivial, r.bound, r.holds, r.sphere_size)
                    } else {
                        let (ind, size) = sphere_indicator_maybe_faulty(params, t, fault);
                        let spec = dft(&ind);
                        let maxv = spec.values()[1..]
                            .iter()
                            .map(|v| v.norm())
                            .fold(0.0, f64::max);
                        let bound = 2.0 * (q as f64).powf(-((d as f64 + 1.0) / 2.0));
                        (maxv, bound, crate::report::leq_with_slack(maxv, bound), size)
                    };
                    let mut rec = CheckRecord::new(
                        format!("c1/sphere_decay/{}/t{t}", pair_label(q, d)),
                        "sphere_decay",
                        q,
                        d,
                    );
                    rec.t = Some(t.to_string());
                    rec.value = Some(max_nontrivial);
                    rec.bound = Some(bound);
                    rec.holds = holds;
                    rec.detail = Some(format!("|S_t|={size} ratio={:.6}", max_nontrivial / bound));
                    b.records.push(rec);

                    // desk-scale size window from the same lemma
                    let lo = (q as f64).powi(d as i32 - 1) / 2.0;
                    let hi = 2.0 * (q as f64).powi(d as i32 - 1);
                    let sizef = size as f64;
                    let mut window_holds = sizef >= lo && sizef <= hi;
                    if d == 2 {
                        window_holds &= size == q - 1 || size == q + 1;
                    }
                    let mut rec = CheckRecord::new(
                        format!("c1/sphere_size/{}/t{t}", pair_label(q, d)),
                        "sphere_size_window",
                        q,
                        d,
                    );
                    rec.t = Some(t.to_string());
                    rec.count = Some(size as u128);
                    rec.holds = window_holds;
                    rec.detail = Some(format!("window=[{lo},{hi}]"));
                    b.records.push(rec);
                }
                Ok(())
            })?;
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(batches.into_iter().fold(Batch::default(), |mut acc, b| {
        acc.merge(b);
        acc
    }))
}

// criterion 2 ---------------------------------------------------------------

const FUNCTIONS_PER_PAIR: usize = 100;

fn seeded_function(params: FieldParams, seed: u64) -> DensityFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..params.size())
        .map(|_| rng.gen_range(0..4u32) as f64)
        .collect();
    DensityFunction::new(params, values).expect("length matches")
}

fn criterion_fourier_identities() -> Result<Batch> {
    let batches: Vec<Batch> = qd_pairs()
        .par_iter()
        .map(|&(q, d)| -> Result<Batch> {
            let params = FieldParams::new(q, d)?;
            let mut b = Batch::default();
            let label = pair_label(q, d);

            let mut max_plancherel = 0.0f64;
            let mut max_roundtrip = 0.0f64;
            let mut max_conj = 0.0f64;
            let mut max_route = 0.0f64;
            let mut fast_micros = 0u128;
            let mut direct_micros = 0u128;

            for i in 0..FUNCTIONS_PER_PAIR {
                let f = seeded_function(params, derived_seed(10, q, d, i as u64));

                let start = Instant::now();
                let spectrum = dft(&f);
                fast_micros += start.elapsed().as_micros();

                let defect =
                    (spectrum.l2_norm_sq() - f.l2_norm_sq() / params.size() as f64).abs();
                max_plancherel = max_plancherel.max(defect);

                let back = inverse_dft(&spectrum);
                let rt = f
                    .values()
                    .iter()
                    .zip(back.values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                max_roundtrip = max_roundtrip.max(rt);

                max_conj = max_conj.max(spectrum.conjugate_symmetry_defect());

                let start = Instant::now();
                let direct = dft_direct(&f);
                direct_micros += start.elapsed().as_micros();
                let dev = spectrum
                    .values()
                    .iter()
                    .zip(direct.values())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                max_route = max_route.max(dev);
            }

            for (name, value, bound) in [
                ("plancherel", max_plancherel, 1e-10),
                ("roundtrip", max_roundtrip, 1e-10),
                ("conj_symmetry", max_conj, 1e-10),
                ("dft_route", max_route, 1e-9),
            ] {
                let mut rec =
                    CheckRecord::new(format!("c2/{name}/{label}"), format!("fourier_{name}"), q, d);
                rec.value = Some(value);
                rec.bound = Some(bound);
                rec.n = Some(FUNCTIONS_PER_PAIR as u64);
                rec.holds = value < bound;
                b.records.push(rec);
            }
            b.timings.push(Timing {
                key: format!("c2/{label}/fast_dft"),
                micros: fast_micros,
            });
            b.timings.push(Timing {
                key: format!("c2/{label}/direct_dft"),
                micros: direct_micros,
            });
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(batches.into_iter().fold(Batch::default(), |mut acc, b| {
        acc.merge(b);
        acc
    }))
}

// criterion 3 ---------------------------------------------------------------

const BILINEAR_PER_PAIR: usize = 20;

fn criterion_bilinear() -> Result<Batch> {
    let batches: Vec<Batch> = qd_pairs()
        .par_iter()
        .map(|&(q, d)| -> Result<Batch> {
            let params = FieldParams::new(q, d)?;
            let mut b = Batch::default();
            let label = pair_label(q, d);
            b.time_unit(&format!("c3/{label}"), |b| {
                let dd = params.d() as usize;
                let mut coords = vec![0u64; params.size() * dd];
                for idx in 0..params.size() {
                    params.coords_into(idx, &mut coords[idx * dd..(idx + 1) * dd]);
                }

                let mut max_ratio = 0.0f64;
                let mut all_hold = true;
                let mut max_total_dev = 0.0f64;
                let mut totals_match = true;
                let mut max_spectral_dev = 0.0f64;

                for i in 0..BILINEAR_PER_PAIR {
                    let f = seeded_function(params, derived_seed(11, q, d, 2 * i as u64));
                    let g = seeded_function(params, derived_seed(11, q, d, 2 * i as u64 + 1));
                    let mut trng = ChaCha8Rng::seed_from_u64(derived_seed(15, q, d, i as u64));
                    let t = trng.gen_range(1..q);

                    let r = bilinear_distance_form(&f, &g, t)?;
                    all_hold &= r.holds;
                    if r.stated_bound > 0.0 {
                        max_ratio = max_ratio.max(r.remainder.abs() / r.stated_bound);
                    }

                    // exhaustive double sum straight from the definition
                    let mut brute = 0.0f64;
                    for (x, &fv) in f.values().iter().enumerate() {
                        if fv == 0.0 {
                            continue;
                        }
                        let xc = &coords[x * dd..(x + 1) * dd];
                        for (y, &gv) in g.values().iter().enumerate() {
                            if gv == 0.0 {
                                continue;
                            }
                            let yc = &coords[y * dd..(y + 1) * dd];
                            if params.norm_of_diff(xc, yc) == t {
                                brute += fv * gv;
                            }
                        }
                    }
                    let dev = (r.total - brute).abs();
                    max_total_dev = max_total_dev.max(dev);
                    totals_match &= dev < 1e-6 && r.total.round() == brute.round();

                    let spectral = bilinear_total_spectral(&f, &g, t)?;
                    max_spectral_dev = max_spectral_dev.max((spectral - brute).abs());
                }

                let mut rec = CheckRecord::new(
                    format!("c3/bilinear_bound/{label}"),
                    "bilinear_bound",
                    q,
                    d,
                );
                rec.value = Some(max_ratio);
                rec.bound = Some(1.0);
                rec.n = Some(BILINEAR_PER_PAIR as u64);
                rec.holds = all_hold;
                b.records.push(rec);

                let mut rec = CheckRecord::new(
                    format!("c3/bilinear_total/{label}"),
                    "bilinear_total_match",
                    q,
                    d,
                );
                rec.value = Some(max_total_dev);
                rec.bound = Some(1e-6);
                rec.n = Some(BILINEAR_PER_PAIR as u64);
                rec.holds = totals_match;
                b.records.push(rec);

                let mut rec = CheckRecord::new(
                    format!("c3/bilinear_spectral/{label}"),
                    "bilinear_spectral_route",
                    q,
                    d,
                );
                rec.value = Some(max_spectral_dev);
                rec.bound = Some(1e-5);
                rec.holds = max_spectral_dev < 1e-5;
                b.records.push(rec);
                Ok(())
            })?;
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(batches.into_iter().fold(Batch::default(), |mut acc, b| {
        acc.merge(b);
        acc
    }))
}

// criterion 4 ---------------------------------------------------------------

const ORACLE_SETS_PER_PAIR: usize = 70;
const ORACLE_PAIRS: [(u64, u32); 3] = [(3, 2), (5, 2), (3, 3)];

fn criterion_oracle_equivalence() -> Result<Batch> {
    let batches: Vec<Batch> = ORACLE_PAIRS
        .par_iter()
        .map(|&(q, d)| -> Result<Batch> {
            let params = FieldParams::new(q, d)?;
            let mut b = Batch::default();
            let label = pair_label(q, d);
            b.time_unit(&format!("c4/{label}"), |b| {
                let cap = params.size().min(27);
                let mut instances = 0u64;
                let mut reversal_checks = 0u64;
                let mut l2_checks = 0u64;
                let mut equal = true;
                let mut reversal_equal = true;
                let mut l2_equal = true;

                for i in 0..ORACLE_SETS_PER_PAIR {
                    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(12, q, d, i as u64));
                    let size = 1 + rng.gen_range(0..cap);
                    let e = crate::ensembles::generate(
                        &crate::ensembles::EnsembleSpec::RandomSize {
                            size,
                            seed: derived_seed(13, q, d, i as u64),
                        },
                        params,
                    )?;

                    for _ in 0..3 {
                        let k = 1 + rng.gen_range(0..3usize);
                        let distances: Vec<u64> =
                            (0..k).map(|_| rng.gen_range(1..q)).collect();
                        let ty = ChainType::new(distances, params)?;
                        let dp = chain_count_dp(&e, &ty)?.count();
                        let oracle = chain_count_oracle(&e, &ty)?;
                        equal &= dp == oracle;
                        instances += 1;

                        let rev = chain_count_dp(&e, &ty.reversed())?.count();
                        reversal_equal &= rev == dp;
                        reversal_checks += 1;
                    }

                    // ||f_k||_2^2 = C_2k for the constant unit type
                    let ty = ChainType::uniform(1, 6, params)?;
                    let dp = chain_count_dp(&e, &ty)?;
                    for k in 0..=3usize {
                        l2_equal &= dp.l2_sq()[k] == dp.counts()[2 * k];
                        l2_checks += 1;
                    }
                }

                for (name, family, n, holds) in [
                    ("dp_vs_oracle", "chain_dp_vs_oracle", instances, equal),
                    ("reversal", "chain_reversal", reversal_checks, reversal_equal),
                    ("l2_identity", "chain_l2_identity", l2_checks, l2_equal),
                ] {
                    let mut rec =
                        CheckRecord::new(format!("c4/{name}/{label}"), family, q, d);
                    rec.n = Some(n);
                    rec.holds = holds;
                    b.records.push(rec);
                }
                Ok(())
            })?;
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(batches.into_iter().fold(Batch::default(), |mut acc, b| {
        acc.merge(b);
        acc
    }))
}

// criterion 5 ---------------------------------------------------------------

/// Literal non-overlapping tuple enumeration, usable only at toy sizes.
fn brute_nonoverlapping(e: &PointSet, distances: &[u64]) -> u128 {
    let params = e.params();
    let coords = e.member_coords();
    fn rec(
        params: FieldParams,
        coords: &[Vec<u64>],
        distances: &[u64],
        tuple: &mut Vec<usize>,
        count: &mut u128,
    ) {
        if tuple.len() == distances.len() + 1 {
            *count += 1;
            return;
        }
        let depth = tuple.len() - 1;
        for next in 0..coords.len() {
            if tuple.contains(&next) {
                continue;
            }
            if params.norm_of_diff(&coords[*tuple.last().unwrap()], &coords[next])
                == distances[depth]
            {
                tuple.push(next);
                rec(params, coords, distances, tuple, count);
                tuple.pop();
            }
        }
    }
    let mut count = 0u128;
    let mut tuple = Vec::new();
    for first in 0..coords.len() {
        tuple.push(first);
        rec(params, &coords, distances, &mut tuple, &mut count);
        tuple.pop();
    }
    count
}

/// Literal star tuple enumeration in the written order of `distances`.
fn brute_stars(e: &PointSet, distances: &[u64]) -> u128 {
    let params = e.params();
    let coords = e.member_coords();
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
        for cand in 0..coords.len() {
            if leaves.contains(&cand) {
                continue;
            }
            if params.norm_of_diff(&coords[center], &coords[cand]) == t {
                leaves.push(cand);
                rec(params, coords, center, distances, leaves, total);
                leaves.pop();
            }
        }
    }
    let mut total = 0u128;
    let mut leaves = Vec::new();
    for center in 0..coords.len() {
        rec(params, &coords, center, distances, &mut leaves, &mut total);
    }
    total
}

fn criterion_fixed_values(fault: Option<FaultInjection>) -> Result<Batch> {
    let params = FieldParams::new(3, 2)?;
    let e = PointSet::full(params);
    let mut b = Batch::default();
    b.time_unit("c5", |b| {
        let mut push = |name: &str, computed: u128, expected: u128, route: &str| {
            let mut rec = CheckRecord::new(format!("c5/fixed/{name}"), "fixed_value", 3, 2);
            rec.ensemble = "q03-d2-full".into();
            rec.count = Some(computed);
            rec.holds = computed == expected;
            rec.detail = Some(format!("expected={expected} route={route}"));
            b.records.push(rec);
        };

        // |S_1| = 4, via the sphere constructor (fault-sensitive) and via a
        // literal norm sweep
        let (_, sphere_size) = sphere_indicator_maybe_faulty(params, 1, fault);
        push("s1_size_sphere", sphere_size as u128, 4, "sphere constructor");
        let mut coords = vec![0u64; 2];
        let norm_sweep = (0..params.size())
            .filter(|&i| {
                params.coords_into(i, &mut coords);
                params.norm_of_coords(&coords) == 1
            })
            .count() as u128;
        push("s1_size_norm", norm_sweep, 4, "norm sweep");

        let ty1 = ChainType::uniform(1, 1, params)?;
        push("c1_dp", chain_count_dp(&e, &ty1)?.count(), 36, "dp");
        push("c1_oracle", chain_count_oracle(&e, &ty1)?, 36, "oracle");

        let ty3 = ChainType::uniform(1, 3, params)?;
        push("c3_dp", chain_count_dp(&e, &ty3)?.count(), 576, "dp");
        push("c3_oracle", chain_count_oracle(&e, &ty3)?, 576, "oracle");

        let ty2 = ChainType::uniform(1, 2, params)?;
        push("g2_dfs", nonoverlap_count(&e, &ty2)?.total(), 108, "dfs");
        push("g2_brute", brute_nonoverlapping(&e, &[1, 1]), 108, "tuple brute force");

        let spec = StarSpec::new(vec![1, 1], params)?;
        push("nu2_exact", star_count_exact(&e, &spec)?, 108, "per-center enumeration");
        push("nu2_brute", brute_stars(&e, &[1, 1]), 108, "tuple brute force");

        // degree tails via the norm-based profile and via sphere adjacency
        let prof = degree_profile(&e);
        push("h4_norm", prof.tail(1, 4) as u128, 9, "degree profile");
        push("h5_norm", prof.tail(1, 5) as u128, 0, "degree profile");

        let (ind, _) = sphere_indicator_maybe_faulty(params, 1, fault);
        let sphere_members: Vec<usize> = ind
            .values()
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| (v > 0.0).then_some(i))
            .collect();
        let degree_of = |x: usize| -> u32 {
            sphere_members
                .iter()
                .filter(|&&s| e.contains(params.add_index(x, s)))
                .count() as u32
        };
        let tail = |n: u32| -> u128 {
            e.members().iter().filter(|&&x| degree_of(x) >= n).count() as u128
        };
        push("h4_sphere", tail(4), 9, "sphere adjacency");
        push("h5_sphere", tail(5), 0, "sphere adjacency");
        Ok(())
    })?;
    Ok(b)
}

// criterion 6 ---------------------------------------------------------------

/// Largest recurrence level checked per instance; the count ladder then
/// reaches `C_7`, still exact in 128 bits at every corpus scale.
const RECURRENCE_MAX_K: usize = 3;
const UPPER_BOUND_MAX_N: usize = 7;
const TAIL_MAX_N: u32 = 10;

fn path_plan_depth(e: &PointSet, base: usize) -> usize {
    // largest n <= 3 such that the estimated G_{n+1} search fits the budget
    let b = sphere(e.params(), 1).len().min(e.len()).max(1) as f64;
    let mut depth = 0;
    let mut est = e.len() as f64 * b;
    for n in 1..=base {
        est *= b;
        if est > PATH_PLAN_BUDGET {
            break;
        }
        depth = n;
    }
    depth
}

fn instance_record(inst: &CorpusInstance, key: String, family: &str, e: &PointSet) -> CheckRecord {
    let mut rec = CheckRecord::new(key, family, inst.q, inst.d);
    rec.ensemble = inst.label.clone();
    rec.set_size = Some(e.len() as u64);
    rec
}

fn criterion_unconditional() -> Result<Batch> {
    let instances = corpus();
    let batches: Vec<Batch> = instances
        .par_iter()
        .map(|inst| -> Result<Batch> {
            let e = inst.generate()?;
            let mut b = Batch::default();
            b.time_unit(&format!("c6/{}", inst.label), |b| {
                // structure recurrences, unit distance
                let sweep = verify_recurrences(&e, RECURRENCE_MAX_K, 1)?;
                for r in &sweep.reports {
                    for (side, rem, bound, holds) in [
                        ("odd", r.odd_remainder, r.odd_bound, r.odd_holds),
                        ("even", r.even_remainder, r.even_bound, r.even_holds),
                    ] {
                        let mut rec = instance_record(
                            inst,
                            format!("c6/recurrence/{}/k{}/{side}", inst.label, r.k),
                            "chain_recurrence",
                            &e,
                        );
                        rec.t = Some("1".into());
                        rec.k = Some(r.k);
                        rec.remainder = Some(rem);
                        rec.bound = Some(bound);
                        rec.holds = holds;
                        b.records.push(rec);
                    }
                }

                // growth bound
                for r in verify_upper_bound(&e, UPPER_BOUND_MAX_N, 1)? {
                    let mut rec = instance_record(
                        inst,
                        format!("c6/upper_bound/{}/n{}", inst.label, r.n),
                        "chain_upper_bound",
                        &e,
                    );
                    rec.t = Some("1".into());
                    rec.n = Some(r.n);
                    rec.count = Some(r.count);
                    rec.bound = Some(r.bound);
                    rec.holds = r.holds;
                    b.records.push(rec);
                }

                // path recurrence and G <= C, as deep as the guard allows
                let depth = path_plan_depth(&e, 3);
                for n in 1..=depth {
                    let r = verify_path_recurrence(&e, n, 1)?;
                    let mut rec = instance_record(
                        inst,
                        format!("c6/path_recurrence/{}/n{n}", inst.label),
                        "path_recurrence",
                        &e,
                    );
                    rec.t = Some("1".into());
                    rec.n = Some(r.n);
                    rec.count = Some(r.g_n_plus_1);
                    rec.value = Some(r.slack as f64);
                    rec.holds = r.holds;
                    rec.detail = Some(format!(
                        "G_n={} mixed_sum={}",
                        r.g_n, r.degree_weighted_sum
                    ));
                    b.records.push(rec);

                    let c_n = sweep.counts[n];
                    let mut rec = instance_record(
                        inst,
                        format!("c6/path_le_chain/{}/n{n}", inst.label),
                        "path_le_chain",
                        &e,
                    );
                    rec.n = Some(n as u64);
                    rec.count = Some(r.g_n);
                    rec.holds = r.g_n <= c_n;
                    rec.detail = Some(format!("C_n={c_n}"));
                    b.records.push(rec);
                }

                // edge-count decomposition per distance:
                // C_1(t) = |E|^2/q + R(t) with |R(t)| <= 2 q^{(d-1)/2} |E|,
                // cross-checked against the bilinear form at f = g = E
                let ind = DensityFunction::indicator(&e);
                for t in 1..inst.q {
                    let r = bilinear_distance_form(&ind, &ind, t)?;
                    let ty = ChainType::uniform(t, 1, e.params())?;
                    let pairs = chain_count_dp(&e, &ty)?.count();
                    let total_matches = (r.total - pairs as f64).abs() < 1e-6;
                    let main = e.len() as f64 * e.len() as f64 / inst.q as f64;
                    let remainder = pairs as f64 - main;
                    let mut rec = instance_record(
                        inst,
                        format!("c6/edge_count/{}/t{t}", inst.label),
                        "edge_count_remainder",
                        &e,
                    );
                    rec.t = Some(t.to_string());
                    rec.count = Some(pairs);
                    rec.main_term = Some(main);
                    rec.remainder = Some(remainder);
                    rec.bound = Some(r.stated_bound); // 2 q^{(d-1)/2} |E|, since ||E||_2^2 = |E|
                    rec.holds = total_matches
                        && r.holds
                        && crate::report::leq_with_slack(remainder.abs(), r.stated_bound);
                    rec.detail = Some(format!("|S_t|={}", r.sphere_size));
                    b.records.push(rec);
                }

                // degree tail bound, swept over every distance and depth
                let prof = degree_profile(&e);
                for j in 1..inst.q {
                    let mut all = true;
                    let mut worst_margin = f64::INFINITY;
                    let mut worst_n = 0;
                    for n in 0..=TAIL_MAX_N {
                        let r = verify_tail_bound(&prof, j, n);
                        all &= r.holds;
                        let margin = r.tail as f64 - r.bound;
                        if margin < worst_margin {
                            worst_margin = margin;
                            worst_n = n;
                        }
                    }
                    let mut rec = instance_record(
                        inst,
                        format!("c6/tail_bound/{}/j{j}", inst.label),
                        "degree_tail_bound",
                        &e,
                    );
                    rec.t = Some(j.to_string());
                    rec.n = Some(TAIL_MAX_N as u64);
                    rec.value = Some(worst_margin);
                    rec.holds = all;
                    rec.detail = Some(format!("worst_n={worst_n}"));
                    b.records.push(rec);
                }
                Ok(())
            })?;
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(batches.into_iter().fold(Batch::default(), |mut acc, b| {
        acc.merge(b);
        acc
    }))
}

// criterion 7 ---------------------------------------------------------------

fn chain_record_from(inst: &CorpusInstance, e: &PointSet, key: String, family: &str, r: &crate::chains::ChainCountReport) -> CheckRecord {
    let mut rec = instance_record(inst, key, family, e);
    rec.t = Some(r.t.clone());
    rec.k = Some(r.k);
    rec.count = Some(r.count);
    rec.main_term = Some(r.main_term);
    rec.remainder = Some(r.discrepancy);
    rec.bound = Some(r.stated_bound);
    rec.hypothesis_met = Some(r.hypothesis_met);
    rec.vacuous = !r.hypothesis_met;
    rec.holds = r.holds;
    rec
}

fn criterion_conditional() -> Result<Batch> {
    let instances = corpus();
    let batches: Vec<Batch> = instances
        .par_iter()
        .map(|inst| -> Result<Batch> {
            let e = inst.generate()?;
            let params = e.params();
            let mut b = Batch::default();
            b.time_unit(&format!("c7/{}", inst.label), |b| {
                // chain theorem, constant unit type
                for k in 1..=3usize {
                    let ty = ChainType::uniform(1, k, params)?;
                    let r = verify_main_theorem(&e, &ty)?;
                    b.records.push(chain_record_from(
                        inst,
                        &e,
                        format!("c7/chain_theorem/{}/k{k}", inst.label),
                        "chain_theorem",
                        &r,
                    ));
                }

                // the theorem covers every type: alternating samples
                for (tag, pattern) in [("alt12", [1u64, 2, 1]), ("alt21", [2, 1, 2])] {
                    for k in 1..=3usize {
                        let ty = ChainType::new(pattern[..k].to_vec(), params)?;
                        let r = verify_main_theorem(&e, &ty)?;
                        b.records.push(chain_record_from(
                            inst,
                            &e,
                            format!("c7/chain_theorem_general/{}/{tag}/k{k}", inst.label),
                            "chain_theorem_general",
                            &r,
                        ));
                    }
                }

                // at least |E|^2/2q unit-distance pairs once |E| > 4 q^{(d+1)/2}
                {
                    let ty = ChainType::uniform(1, 1, params)?;
                    let pairs = chain_count_dp(&e, &ty)?.count();
                    let qf = inst.q as f64;
                    let threshold = 4.0 * qf.powf((inst.d as f64 + 1.0) / 2.0);
                    let hypothesis_met = (e.len() as f64) > threshold;
                    let bound = e.len() as f64 * e.len() as f64 / (2.0 * qf);
                    let mut rec = instance_record(
                        inst,
                        format!("c7/edge_count_lower/{}", inst.label),
                        "edge_count_lower",
                        &e,
                    );
                    rec.t = Some("1".into());
                    rec.count = Some(pairs);
                    rec.bound = Some(bound);
                    rec.hypothesis_met = Some(hypothesis_met);
                    rec.vacuous = !hypothesis_met;
                    rec.holds = crate::report::ge_with_slack(pairs as f64, bound);
                    b.records.push(rec);
                }

                // inductive lower bound
                for n in 1..=3usize {
                    let r = verify_lower_bound(&e, n, 1)?;
                    let mut rec = instance_record(
                        inst,
                        format!("c7/chain_lower/{}/n{n}", inst.label),
                        "chain_lower_bound",
                        &e,
                    );
                    rec.t = Some("1".into());
                    rec.n = Some(r.n);
                    rec.count = Some(r.count);
                    rec.bound = Some(r.lower_bound);
                    rec.hypothesis_met = Some(r.hypothesis_met);
                    rec.vacuous = r.vacuous;
                    rec.holds = r.holds;
                    b.records.push(rec);
                }

                // long-path corollary
                let depth = path_plan_depth(&e, 3).max(1);
                for k in 1..=depth.min(2) {
                    match verify_corollary_bound(&e, k, 1) {
                        Ok(r) => {
                            let mut rec = instance_record(
                                inst,
                                format!("c7/path_corollary/{}/k{k}", inst.label),
                                "path_corollary",
                                &e,
                            );
                            rec.t = Some("1".into());
                            rec.k = Some(r.k);
                            rec.count = Some(r.count);
                            rec.bound = Some(r.lower_bound);
                            rec.hypothesis_met = Some(r.hypothesis_met);
                            rec.vacuous = r.vacuous;
                            rec.holds = r.holds;
                            b.records.push(rec);

                            // "of every type": exhaustive over types at q = 3
                            // scale when the hypothesis is met
                            if r.hypothesis_met && (inst.q - 1).pow(k as u32) <= 8 {
                                let mut type_stack = vec![vec![]];
                                for _ in 0..k {
                                    let mut next = Vec::new();
                                    for prefix in &type_stack {
                                        for t in 1..inst.q {
                                            let mut v: Vec<u64> = prefix.clone();
                                            v.push(t);
                                            next.push(v);
                                        }
                                    }
                                    type_stack = next;
                                }
                                for distances in type_stack {
                                    let ty = ChainType::new(distances.clone(), params)?;
                                    let witness = extract_path(&e, &ty)?;
                                    let ok = witness.as_ref().is_some_and(|w| w.validate(&e));
                                    let labelt = ty.label().replace(',', "+");
                                    let mut rec = instance_record(
                                        inst,
                                        format!(
                                            "c7/path_existence/{}/k{k}/t{labelt}",
                                            inst.label
                                        ),
                                        "path_existence",
                                        &e,
                                    );
                                    rec.t = Some(ty.label());
                                    rec.k = Some(k as u64);
                                    rec.hypothesis_met = Some(true);
                                    rec.holds = ok;
                                    rec.detail = witness.map(|w| w.describe());
                                    b.records.push(rec);
                                }
                            }
                        }
                        Err(Error::ScaleGuard { estimate, limit, .. }) => {
                            let mut rec = instance_record(
                                inst,
                                format!("c7/path_corollary/{}/k{k}/skip", inst.label),
                                "scale_guard_skip",
                                &e,
                            );
                            rec.vacuous = true;
                            rec.detail =
                                Some(format!("search estimate {estimate:.2e} over {limit:.0e}"));
                            b.records.push(rec);
                        }
                        Err(err) => return Err(err),
                    }
                }

                // star theorem over a family of types (all distances < q)
                let specs: Vec<Vec<u64>> = vec![vec![1], vec![2], vec![1, 1], vec![1, 2]];
                for distances in specs {
                    let spec = StarSpec::new(distances.clone(), params)?;
                    let r = verify_star_theorem(&e, &spec)?;
                    let labelt = spec.label().replace(',', "+");
                    let mut rec = instance_record(
                        inst,
                        format!("c7/star_theorem/{}/t{labelt}", inst.label),
                        "star_theorem",
                        &e,
                    );
                    rec.t = Some(spec.label());
                    rec.k = Some(r.k);
                    rec.hypothesis_met = Some(r.hypothesis_1_met || r.hypothesis_2_met);
                    rec.vacuous = r.vacuous;
                    rec.holds = r.holds;
                    match r.evidence {
                        crate::stars::StarEvidence::Exact { count } => {
                            rec.count = Some(count);
                            rec.detail = Some("evidence=exact".into());
                        }
                        crate::stars::StarEvidence::CertifiedPositive { center } => {
                            rec.detail = Some(format!("evidence=certified_positive center={center}"));
                        }
                        crate::stars::StarEvidence::CertifiedZero => {
                            rec.detail = Some("evidence=certified_zero".into());
                        }
                    }
                    b.records.push(rec);

                    // distinct-leaf count never exceeds the multiset count
                    if let Ok(nu) = star_count_exact(&e, &spec) {
                        let multiset = star_count_multiset(&e, &spec)?;
                        let mut rec = instance_record(
                            inst,
                            format!("c7/star_multiset_dominates/{}/t{labelt}", inst.label),
                            "star_multiset_dominates",
                            &e,
                        );
                        rec.t = Some(spec.label());
                        rec.count = Some(nu);
                        rec.holds = nu <= multiset;
                        rec.detail = Some(format!("multiset={multiset}"));
                        b.records.push(rec);
                    }
                }
                Ok(())
            })?;
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(batches.into_iter().fold(Batch::default(), |mut acc, b| {
        acc.merge(b);
        acc
    }))
}

// criterion 8 ---------------------------------------------------------------

fn criterion_determinism(fault: Option<FaultInjection>) -> Result<Batch> {
    let mut b = Batch::default();
    b.time_unit("c8", |b| {
        let mut push = |name: &str, holds: bool, detail: String| {
            let mut rec = CheckRecord::new(format!("c8/determinism/{name}"), "determinism", 0, 0);
            rec.holds = holds;
            rec.detail = Some(detail);
            b.records.push(rec);
        };

        let a1 = criterion_sphere_decay(fault)?;
        let b1 = criterion_sphere_decay(fault)?;
        push(
            "records_c1",
            a1.records == b1.records,
            format!("{} records compared", a1.records.len()),
        );

        let a4 = criterion_oracle_equivalence()?;
        let b4 = criterion_oracle_equivalence()?;
        push(
            "records_c4",
            a4.records == b4.records,
            format!("{} records compared", a4.records.len()),
        );

        let a5 = criterion_fixed_values(fault)?;
        let b5 = criterion_fixed_values(fault)?;
        push(
            "records_c5",
            a5.records == b5.records,
            format!("{} records compared", a5.records.len()),
        );

        let sets_a: Vec<_> = corpus()
            .iter()
            .map(|i| i.generate())
            .collect::<Result<Vec<_>>>()?;
        let sets_b: Vec<_> = corpus()
            .iter()
            .map(|i| i.generate())
            .collect::<Result<Vec<_>>>()?;
        push(
            "corpus_sets",
            sets_a == sets_b,
            format!("{} sets regenerated", sets_a.len()),
        );
        Ok(())
    })?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_values_pass_without_fault() {
        let b = criterion_fixed_values(None).unwrap();
        assert!(b.records.iter().all(|r| r.holds), "{:#?}", b.records);
    }

    #[test]
    fn fault_injection_breaks_fixed_values() {
        let b = criterion_fixed_values(Some(FaultInjection::SphereMembership)).unwrap();
        let broken: Vec<&str> = b
            .records
            .iter()
            .filter(|r| !r.holds)
            .map(|r| r.key.as_str())
            .collect();
        assert!(broken.contains(&"c5/fixed/s1_size_sphere"), "{broken:?}");
        assert!(broken.contains(&"c5/fixed/h5_sphere"), "{broken:?}");
    }

    #[test]
    fn filtered_run_reports_selected_criteria() {
        let outcome = run_all(Some(&[1, 5]), None).unwrap();
        let numbers: Vec<u8> = outcome.criteria.iter().map(|c| c.number).collect();
        assert_eq!(numbers, vec![1, 5]);
        assert!(outcome.passed(), "{:?}", outcome.first_violation());
        assert!(outcome.records.windows(2).all(|w| w[0].key < w[1].key));
    }
}
