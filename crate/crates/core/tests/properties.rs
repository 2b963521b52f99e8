//! Cross-module property tests: the invariants that must hold for every
//! set, type, and function, exercised over proptest-generated instances.

use proptest::prelude::*;

use distgraph::chains::{
    chain_count_dp, chain_count_oracle, verify_recurrences, verify_upper_bound, ChainType,
};
use distgraph::ensembles::{corpus, generate, EnsembleSpec};
use distgraph::field::{FieldParams, PointSet};
use distgraph::paths::{extract_path, nonoverlap_count, verify_path_recurrence};
use distgraph::spectral::{
    bilinear_distance_form, dft, inverse_dft, plancherel_defect, DensityFunction,
};
use distgraph::stars::{degree_profile, star_count_exact, star_count_multiset, verify_tail_bound, StarSpec};

const PAIRS: [(u64, u32); 4] = [(3, 2), (5, 2), (7, 2), (3, 3)];

fn arb_params() -> impl Strategy<Value = FieldParams> {
    (0..PAIRS.len()).prop_map(|i| {
        let (q, d) = PAIRS[i];
        FieldParams::new(q, d).unwrap()
    })
}

fn arb_set() -> impl Strategy<Value = PointSet> {
    arb_params().prop_flat_map(|p| {
        proptest::collection::vec(any::<bool>(), p.size())
            .prop_map(move |mask| PointSet::from_mask(p, mask))
    })
}

fn arb_set_and_type(max_k: usize) -> impl Strategy<Value = (PointSet, ChainType)> {
    arb_set().prop_flat_map(move |e| {
        let p = e.params();
        proptest::collection::vec(1..p.q(), 1..=max_k)
            .prop_map(move |distances| (e.clone(), ChainType::new(distances, p).unwrap()))
    })
}

fn arb_function() -> impl Strategy<Value = DensityFunction> {
    arb_params().prop_flat_map(|p| {
        proptest::collection::vec(0u32..4, p.size())
            .prop_map(move |v| {
                DensityFunction::new(p, v.into_iter().map(f64::from).collect()).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fourier_identities(f in arb_function()) {
        prop_assert!(plancherel_defect(&f) < 1e-10);
        let spectrum = dft(&f);
        prop_assert!(spectrum.conjugate_symmetry_defect() < 1e-10);
        let back = inverse_dft(&spectrum);
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dp_matches_oracle_and_reversal((e, ty) in arb_set_and_type(3)) {
        let dp = chain_count_dp(&e, &ty).unwrap().count();
        let oracle = chain_count_oracle(&e, &ty).unwrap();
        prop_assert_eq!(dp, oracle);
        let rev = chain_count_dp(&e, &ty.reversed()).unwrap().count();
        prop_assert_eq!(dp, rev);
    }

    #[test]
    fn paths_dominated_by_chains_and_witness_agrees((e, ty) in arb_set_and_type(2)) {
        let profile = nonoverlap_count(&e, &ty).unwrap();
        let chains = chain_count_dp(&e, &ty).unwrap();
        prop_assert!(profile.total() <= chains.count());
        // pointwise: non-overlapping paths from x never exceed chains from x.
        // chains are counted by endpoint, so compare against the reversed
        // type's endpoint profile (a chain read backwards starts where the
        // original ends).
        let rev = chain_count_dp(&e, &ty.reversed()).unwrap();
        for (g, c) in profile.starts().iter().zip(rev.endpoint_profile()) {
            prop_assert!(g <= c);
        }

        let witness = extract_path(&e, &ty).unwrap();
        prop_assert_eq!(witness.is_some(), profile.total() > 0);
        if let Some(w) = witness {
            prop_assert!(w.validate(&e));
        }

        // sum_x g_k(x)^2 <= C_2k for the constant type, the step that feeds
        // the long-path estimate
        if let Some(&t0) = ty.distances().first() {
            let uniform = ChainType::uniform(t0, ty.k(), e.params()).unwrap();
            let prof = nonoverlap_count(&e, &uniform).unwrap();
            let doubled = ChainType::uniform(t0, 2 * ty.k(), e.params()).unwrap();
            let c2k = chain_count_dp(&e, &doubled).unwrap().count();
            prop_assert!(prof.l2_sq() <= c2k);
        }
    }

    #[test]
    fn degree_sums_are_pair_counts(e in arb_set()) {
        let prof = degree_profile(&e);
        let p = e.params();
        for j in 1..p.q() {
            let ty = ChainType::uniform(j, 1, p).unwrap();
            prop_assert_eq!(prof.degree_sum(j), chain_count_dp(&e, &ty).unwrap().count());
        }
        // tails are nonincreasing and start at |E|
        for j in 1..p.q() {
            prop_assert_eq!(prof.tail(j, 0), e.len());
            for n in 0..6u32 {
                prop_assert!(prof.tail(j, n) >= prof.tail(j, n + 1));
                prop_assert!(verify_tail_bound(&prof, j, n).holds);
            }
        }
    }

    #[test]
    fn single_leaf_stars_are_pair_counts((e, ty) in arb_set_and_type(1)) {
        let t = ty.distances()[0];
        let spec = StarSpec::new(vec![t], e.params()).unwrap();
        let nu = star_count_exact(&e, &spec).unwrap();
        prop_assert_eq!(nu, chain_count_dp(&e, &ty).unwrap().count());
        prop_assert_eq!(nu, star_count_multiset(&e, &spec).unwrap());
    }

    #[test]
    fn stars_dominated_by_multiset_count((e, ty) in arb_set_and_type(3)) {
        let spec = StarSpec::new(ty.distances().to_vec(), e.params()).unwrap();
        let nu = star_count_exact(&e, &spec).unwrap();
        prop_assert!(nu <= star_count_multiset(&e, &spec).unwrap());
    }

    #[test]
    fn bilinear_bound_and_total_on_indicators(
        (e, ty) in arb_set_and_type(1),
        mask in proptest::collection::vec(any::<bool>(), 0..64usize),
    ) {
        let p = e.params();
        let mut full_mask = vec![false; p.size()];
        for (i, &m) in mask.iter().take(p.size()).enumerate() {
            full_mask[i] = m;
        }
        let e2 = PointSet::from_mask(p, full_mask);
        let t = ty.distances()[0];
        let f = DensityFunction::indicator(&e);
        let g = DensityFunction::indicator(&e2);
        let r = bilinear_distance_form(&f, &g, t).unwrap();
        prop_assert!(r.holds, "remainder {} bound {}", r.remainder, r.stated_bound);

        // literal double sum over the two supports
        let mut brute = 0u64;
        for a in e.points() {
            for b in e2.points() {
                if p.norm_of_diff(a.coords(), b.coords()) == t {
                    brute += 1;
                }
            }
        }
        prop_assert!((r.total - brute as f64).abs() < 1e-6);
    }

    #[test]
    fn counts_monotone_in_the_set((e, ty) in arb_set_and_type(2), extra in any::<proptest::sample::Index>()) {
        let base = chain_count_dp(&e, &ty).unwrap().count();
        let idx = extra.index(e.params().size());
        let grown = e.with_index(idx).unwrap();
        prop_assert!(chain_count_dp(&grown, &ty).unwrap().count() >= base);
    }

    #[test]
    fn unconditional_inequalities_hold(e in arb_set(), t_pick in any::<proptest::sample::Index>()) {
        let p = e.params();
        let t = 1 + t_pick.index((p.q() - 1) as usize) as u64;
        let sweep = verify_recurrences(&e, 2, t).unwrap();
        for r in &sweep.reports {
            prop_assert!(r.odd_holds && r.even_holds, "k={} {:?}", r.k, r);
        }
        for r in verify_upper_bound(&e, 4, t).unwrap() {
            prop_assert!(r.holds);
        }
        let rec = verify_path_recurrence(&e, 1, t).unwrap();
        prop_assert!(rec.holds);
    }
}

// targeted assertions on the fixed corpus: the conditional theorems must be
// non-vacuous exactly where the instance sizes were chosen to make them so
#[test]
fn corpus_hypothesis_instances() {
    let by_label = |label: &str| {
        corpus()
            .into_iter()
            .find(|i| i.label == label)
            .unwrap_or_else(|| panic!("corpus must contain {label}"))
    };

    // chain theorem at k=1: threshold (2/ln 2) 3^2.5 ~ 44.98 < 60
    let inst = by_label("q03-d4-rand60");
    let e = inst.generate().unwrap();
    assert_eq!(e.len(), 60);
    let ty = ChainType::uniform(1, 1, e.params()).unwrap();
    let r = distgraph::chains::verify_main_theorem(&e, &ty).unwrap();
    assert!((r.threshold - 44.98).abs() < 0.01);
    assert!(r.hypothesis_met);
    assert!(r.holds && r.positive);

    // long-path corollary at k=1: threshold (4/ln 2) 27 ~ 155.8 <= 180
    let inst = by_label("q03-d5-rand180");
    let e = inst.generate().unwrap();
    let r = distgraph::paths::verify_corollary_bound(&e, 1, 1).unwrap();
    assert!(r.hypothesis_met);
    assert!(r.holds && r.positive);

    // star theorem statement 1 at k=1: 729 > 12 * 3^3.5 ~ 561.2
    let inst = by_label("q03-d6-full");
    let e = inst.generate().unwrap();
    for t in [1u64, 2] {
        let spec = StarSpec::new(vec![t], e.params()).unwrap();
        let r = distgraph::stars::verify_star_theorem(&e, &spec).unwrap();
        assert!(r.hypothesis_1_met);
        assert!(r.applicable_1, "k_limit_1 = {}", r.k_limit_1);
        assert!(r.positive && r.holds);
        // statement 2 needs |E| > 12 * 3^4.5 ~ 1684: vacuous at this scale
        assert!(!r.hypothesis_2_met);
    }
}

#[test]
fn ensemble_specs_round_trip_through_json() {
    for inst in corpus() {
        let text = serde_json::to_string(&inst.spec).unwrap();
        let back: EnsembleSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst.spec);
        let p = inst.params().unwrap();
        assert_eq!(generate(&back, p).unwrap(), generate(&inst.spec, p).unwrap());
    }
}
