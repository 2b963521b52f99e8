//! Record builders for each subcommand. Every builder is deterministic in
//! the resolved config, so identical configs reproduce identical data
//! sections.

use std::time::Instant;

use distgraph::chains::{
    chain_count_dp, chain_count_oracle, chain_count_spectral, verify_lower_bound,
    verify_main_theorem, verify_recurrences, verify_upper_bound, ChainCountReport, ChainType,
};
use distgraph::ensembles::corpus;
use distgraph::field::PointSet;
use distgraph::paths::{
    extract_path, longest_observed, nonoverlap_count, verify_corollary_bound,
    verify_path_recurrence,
};
use distgraph::report::{CheckRecord, Timing};
use distgraph::spectral::{
    dft, dft_direct, inverse_dft, sphere_decay_report, DensityFunction,
};
use distgraph::stars::{
    degree_profile, star_count_exact, star_count_multiset, verify_star_theorem, verify_tail_bound,
    StarSpec,
};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Default)]
pub struct RunOutput {
    pub records: Vec<CheckRecord>,
    pub timings: Vec<Timing>,
}

impl RunOutput {
    fn timed<F>(&mut self, key: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Self) -> Result<(), CliError>,
    {
        let start = Instant::now();
        f(self)?;
        self.timings.push(Timing {
            key: key.to_string(),
            micros: start.elapsed().as_micros(),
        });
        Ok(())
    }

    fn finish(mut self) -> Self {
        self.records.sort_by(|a, b| a.key.cmp(&b.key));
        self.timings.sort_by(|a, b| a.key.cmp(&b.key));
        self
    }
}

pub fn run_sphere(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let params = cfg.params().map_err(CliError::Config)?;
    let ts: Vec<u64> = if cfg.all_t == Some(true) {
        (1..params.q()).collect()
    } else {
        let mut list: Vec<u64> = crate::config::parse_u64_list(
            cfg.t.as_deref()
                .ok_or_else(|| CliError::Config("give --t or --all-t".into()))?,
        )
        .map_err(CliError::Config)?
        .into_iter()
        .map(|t| t % params.q())
        .collect();
        if list.contains(&0) {
            return Err(CliError::Config(
                "t = 0 is degenerate: the decay lemma requires t != 0".into(),
            ));
        }
        list.sort_unstable();
        list.dedup();
        list
    };

    let mut out = RunOutput::default();
    let label = format!("q{:02}-d{}", params.q(), params.d());
    out.timed(&format!("sphere/{label}"), |out| {
        for t in ts {
            let r = sphere_decay_report(params, t)?;
            let mut rec = CheckRecord::new(
                format!("sphere/{label}/t{t}"),
                "sphere_decay",
                params.q(),
                params.d(),
            );
            rec.t = Some(t.to_string());
            rec.count = Some(r.sphere_size as u128);
            rec.value = Some(r.max_nontrivial);
            rec.bound = Some(r.bound);
            rec.holds = r.holds;
            rec.detail = Some(format!("ratio={:.9}", r.ratio));
            out.records.push(rec);
        }
        Ok(())
    })?;
    Ok(out.finish())
}

pub fn run_dft(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let params = cfg.params().map_err(CliError::Config)?;
    let (set, label) = cfg.point_set(params).map_err(CliError::Config)?;
    let f = DensityFunction::indicator(&set);

    let mut out = RunOutput::default();
    let start = Instant::now();
    let spectrum = dft(&f);
    let fast_micros = start.elapsed().as_micros();

    let defect = (spectrum.l2_norm_sq() - f.l2_norm_sq() / params.size() as f64).abs();
    let back = inverse_dft(&spectrum);
    let roundtrip = f
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let conj = spectrum.conjugate_symmetry_defect();

    let start = Instant::now();
    let direct = dft_direct(&f);
    let direct_micros = start.elapsed().as_micros();
    let route = spectrum
        .values()
        .iter()
        .zip(direct.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    for (name, family, value, bound) in [
        ("plancherel", "fourier_plancherel", defect, 1e-10),
        ("roundtrip", "fourier_roundtrip", roundtrip, 1e-10),
        ("conj_symmetry", "fourier_conj_symmetry", conj, 1e-10),
        ("dft_route", "fourier_dft_route", route, 1e-9),
    ] {
        let mut rec = CheckRecord::new(
            format!("dft/{label}/{name}"),
            family,
            params.q(),
            params.d(),
        );
        rec.ensemble = label.clone();
        rec.set_size = Some(set.len() as u64);
        rec.value = Some(value);
        rec.bound = Some(bound);
        rec.holds = value < bound;
        out.records.push(rec);
    }
    out.timings.push(Timing {
        key: format!("dft/{label}/fast"),
        micros: fast_micros,
    });
    out.timings.push(Timing {
        key: format!("dft/{label}/direct"),
        micros: direct_micros,
    });
    Ok(out.finish())
}

fn theorem_record(
    key: String,
    family: &str,
    label: &str,
    set_len: usize,
    r: &ChainCountReport,
) -> CheckRecord {
    let mut rec = CheckRecord::new(key, family, r.q, r.d);
    rec.ensemble = label.to_string();
    rec.set_size = Some(set_len as u64);
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

fn is_constant(ty: &ChainType) -> Option<u64> {
    let first = ty.distances()[0];
    ty.distances().iter().all(|&t| t == first).then_some(first)
}

pub fn run_chains(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let params = cfg.params().map_err(CliError::Config)?;
    let (set, label) = cfg.point_set(params).map_err(CliError::Config)?;
    let distances = cfg.distances(params).map_err(CliError::Config)?;
    let ty = ChainType::new(distances, params)?;
    let k = ty.k();

    let mut out = RunOutput::default();
    out.timed(&format!("chains/{label}"), |out| {
        let dp = chain_count_dp(&set, &ty)?;
        let mut rec = CheckRecord::new(
            format!("chains/{label}/count"),
            "chain_count",
            params.q(),
            params.d(),
        );
        rec.ensemble = label.clone();
        rec.set_size = Some(set.len() as u64);
        rec.t = Some(ty.label());
        rec.k = Some(k as u64);
        rec.count = Some(dp.count());
        rec.detail = Some(format!(
            "prefix_counts={:?}",
            dp.counts()
        ));
        out.records.push(rec);

        // exhaustive oracle agreement whenever the guard allows
        match chain_count_oracle(&set, &ty) {
            Ok(oracle) => {
                let mut rec = CheckRecord::new(
                    format!("chains/{label}/oracle"),
                    "chain_dp_vs_oracle",
                    params.q(),
                    params.d(),
                );
                rec.ensemble = label.clone();
                rec.t = Some(ty.label());
                rec.k = Some(k as u64);
                rec.count = Some(oracle);
                rec.holds = oracle == dp.count();
                out.records.push(rec);
            }
            Err(distgraph::Error::ScaleGuard { estimate, limit, .. }) => {
                let mut rec = CheckRecord::new(
                    format!("chains/{label}/oracle"),
                    "scale_guard_skip",
                    params.q(),
                    params.d(),
                );
                rec.ensemble = label.clone();
                rec.vacuous = true;
                rec.detail = Some(format!("estimate {estimate:.2e} over {limit:.0e}"));
                out.records.push(rec);
            }
            Err(e) => return Err(e.into()),
        }

        if cfg.spectral_check == Some(true) {
            let spectral = chain_count_spectral(&set, &ty)?;
            let mut rec = CheckRecord::new(
                format!("chains/{label}/spectral"),
                "chain_dp_vs_spectral",
                params.q(),
                params.d(),
            );
            rec.ensemble = label.clone();
            rec.count = Some(spectral);
            rec.holds = spectral == dp.count();
            out.records.push(rec);
        }

        out.records.push(theorem_record(
            format!("chains/{label}/theorem/k{k}"),
            "chain_theorem",
            &label,
            set.len(),
            &verify_main_theorem(&set, &ty)?,
        ));

        if let Some(t) = is_constant(&ty) {
            let sweep = verify_recurrences(&set, k.min(3), t)?;
            for r in &sweep.reports {
                for (side, rem, bound, holds) in [
                    ("odd", r.odd_remainder, r.odd_bound, r.odd_holds),
                    ("even", r.even_remainder, r.even_bound, r.even_holds),
                ] {
                    let mut rec = CheckRecord::new(
                        format!("chains/{label}/recurrence/k{}/{side}", r.k),
                        "chain_recurrence",
                        params.q(),
                        params.d(),
                    );
                    rec.ensemble = label.clone();
                    rec.t = Some(t.to_string());
                    rec.k = Some(r.k);
                    rec.remainder = Some(rem);
                    rec.bound = Some(bound);
                    rec.holds = holds;
                    out.records.push(rec);
                }
            }
            for r in verify_upper_bound(&set, (2 * k + 1).min(7), t)? {
                let mut rec = CheckRecord::new(
                    format!("chains/{label}/upper_bound/n{}", r.n),
                    "chain_upper_bound",
                    params.q(),
                    params.d(),
                );
                rec.ensemble = label.clone();
                rec.t = Some(t.to_string());
                rec.n = Some(r.n);
                rec.count = Some(r.count);
                rec.bound = Some(r.bound);
                rec.holds = r.holds;
                out.records.push(rec);
            }
            let r = verify_lower_bound(&set, k, t)?;
            let mut rec = CheckRecord::new(
                format!("chains/{label}/lower_bound/n{}", r.n),
                "chain_lower_bound",
                params.q(),
                params.d(),
            );
            rec.ensemble = label.clone();
            rec.t = Some(t.to_string());
            rec.n = Some(r.n);
            rec.count = Some(r.count);
            rec.bound = Some(r.lower_bound);
            rec.hypothesis_met = Some(r.hypothesis_met);
            rec.vacuous = r.vacuous;
            rec.holds = r.holds;
            out.records.push(rec);
        }
        Ok(())
    })?;
    Ok(out.finish())
}

pub fn run_paths(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let params = cfg.params().map_err(CliError::Config)?;
    let (set, label) = cfg.point_set(params).map_err(CliError::Config)?;
    let distances = cfg.distances(params).map_err(CliError::Config)?;
    let ty = ChainType::new(distances, params)?;
    let k = ty.k();

    let mut out = RunOutput::default();
    out.timed(&format!("paths/{label}"), |out| {
        let profile = nonoverlap_count(&set, &ty)?;
        let chains = chain_count_dp(&set, &ty)?;
        let mut rec = CheckRecord::new(
            format!("paths/{label}/count"),
            "path_count",
            params.q(),
            params.d(),
        );
        rec.ensemble = label.clone();
        rec.set_size = Some(set.len() as u64);
        rec.t = Some(ty.label());
        rec.k = Some(k as u64);
        rec.count = Some(profile.total());
        rec.holds = profile.total() <= chains.count();
        rec.detail = Some(format!("C_k={}", chains.count()));
        out.records.push(rec);

        let witness = extract_path(&set, &ty)?;
        let consistent = witness.is_some() == (profile.total() > 0)
            && witness.as_ref().is_none_or(|w| w.validate(&set));
        let mut rec = CheckRecord::new(
            format!("paths/{label}/witness"),
            "path_witness",
            params.q(),
            params.d(),
        );
        rec.ensemble = label.clone();
        rec.t = Some(ty.label());
        rec.count = Some(witness.is_some() as u128);
        rec.holds = consistent;
        rec.detail = witness.map(|w| w.describe()).or(Some("none".into()));
        out.records.push(rec);

        if let Some(t) = is_constant(&ty) {
            match verify_path_recurrence(&set, k, t) {
                Ok(r) => {
                    let mut rec = CheckRecord::new(
                        format!("paths/{label}/recurrence/n{k}"),
                        "path_recurrence",
                        params.q(),
                        params.d(),
                    );
                    rec.ensemble = label.clone();
                    rec.t = Some(t.to_string());
                    rec.n = Some(r.n);
                    rec.count = Some(r.g_n_plus_1);
                    rec.value = Some(r.slack as f64);
                    rec.holds = r.holds;
                    out.records.push(rec);
                }
                Err(distgraph::Error::ScaleGuard { estimate, limit, .. }) => {
                    let mut rec = CheckRecord::new(
                        format!("paths/{label}/recurrence/n{k}"),
                        "scale_guard_skip",
                        params.q(),
                        params.d(),
                    );
                    rec.ensemble = label.clone();
                    rec.vacuous = true;
                    rec.detail = Some(format!("estimate {estimate:.2e} over {limit:.0e}"));
                    out.records.push(rec);
                }
                Err(e) => return Err(e.into()),
            }

            let r = verify_corollary_bound(&set, k, t)?;
            let mut rec = CheckRecord::new(
                format!("paths/{label}/corollary/k{k}"),
                "path_corollary",
                params.q(),
                params.d(),
            );
            rec.ensemble = label.clone();
            rec.t = Some(t.to_string());
            rec.k = Some(r.k);
            rec.count = Some(r.count);
            rec.bound = Some(r.lower_bound);
            rec.hypothesis_met = Some(r.hypothesis_met);
            rec.vacuous = r.vacuous;
            rec.holds = r.holds;
            out.records.push(rec);

            // observed longest path, recorded as data
            let lp = longest_observed(&set, t, 16)?;
            let mut rec = CheckRecord::new(
                format!("paths/{label}/longest/t{t}"),
                "path_longest_observed",
                params.q(),
                params.d(),
            );
            rec.ensemble = label.clone();
            rec.t = Some(t.to_string());
            rec.count = Some(lp.max_length_found as u128);
            rec.detail = Some(if lp.guard_limited {
                "lower bound only: guard stopped the search".into()
            } else {
                "search exhausted".into()
            });
            out.records.push(rec);
        }
        Ok(())
    })?;
    Ok(out.finish())
}

pub fn run_stars(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let params = cfg.params().map_err(CliError::Config)?;
    let (set, label) = cfg.point_set(params).map_err(CliError::Config)?;
    let distances = cfg.distances(params).map_err(CliError::Config)?;
    let spec = StarSpec::new(distances, params)?;
    let tail_n = cfg.tail_n.unwrap_or(10);

    let mut out = RunOutput::default();
    out.timed(&format!("stars/{label}"), |out| {
        let r = verify_star_theorem(&set, &spec)?;
        let labelt = spec.label().replace(',', "+");
        let mut rec = CheckRecord::new(
            format!("stars/{label}/theorem/t{labelt}"),
            "star_theorem",
            params.q(),
            params.d(),
        );
        rec.ensemble = label.clone();
        rec.set_size = Some(set.len() as u64);
        rec.t = Some(spec.label());
        rec.k = Some(r.k);
        rec.hypothesis_met = Some(r.hypothesis_1_met || r.hypothesis_2_met);
        rec.vacuous = r.vacuous;
        rec.holds = r.holds;
        match &r.evidence {
            distgraph::stars::StarEvidence::Exact { count } => {
                rec.count = Some(*count);
                rec.detail = Some("evidence=exact".into());
            }
            distgraph::stars::StarEvidence::CertifiedPositive { center } => {
                rec.detail = Some(format!("evidence=certified_positive center={center}"));
            }
            distgraph::stars::StarEvidence::CertifiedZero => {
                rec.detail = Some("evidence=certified_zero".into());
            }
        }
        out.records.push(rec);

        if let Ok(nu) = star_count_exact(&set, &spec) {
            let multiset = star_count_multiset(&set, &spec)?;
            let mut rec = CheckRecord::new(
                format!("stars/{label}/multiset/t{labelt}"),
                "star_multiset_dominates",
                params.q(),
                params.d(),
            );
            rec.ensemble = label.clone();
            rec.t = Some(spec.label());
            rec.count = Some(nu);
            rec.holds = nu <= multiset;
            rec.detail = Some(format!("multiset={multiset}"));
            out.records.push(rec);
        }

        let prof = degree_profile(&set);
        for j in 1..params.q() {
            let mut all = true;
            let mut worst = f64::INFINITY;
            for n in 0..=tail_n {
                let t = verify_tail_bound(&prof, j, n);
                all &= t.holds;
                worst = worst.min(t.tail as f64 - t.bound);
            }
            let mut rec = CheckRecord::new(
                format!("stars/{label}/tail/j{j}"),
                "degree_tail_bound",
                params.q(),
                params.d(),
            );
            rec.ensemble = label.clone();
            rec.t = Some(j.to_string());
            rec.n = Some(tail_n as u64);
            rec.value = Some(worst);
            rec.holds = all;
            out.records.push(rec);

            let ty = ChainType::uniform(j, 1, params)?;
            let pair_count = chain_count_dp(&set, &ty)?.count();
            let mut rec = CheckRecord::new(
                format!("stars/{label}/degree_sum/j{j}"),
                "star_degree_sum",
                params.q(),
                params.d(),
            );
            rec.ensemble = label.clone();
            rec.t = Some(j.to_string());
            rec.count = Some(prof.degree_sum(j));
            rec.holds = prof.degree_sum(j) == pair_count;
            rec.detail = Some(format!("pair_count={pair_count}"));
            out.records.push(rec);
        }
        Ok(())
    })?;
    Ok(out.finish())
}

pub fn run_corpus() -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    for inst in corpus() {
        let e: PointSet = inst.generate()?;
        let mut rec = CheckRecord::new(
            format!("corpus/{}", inst.label),
            "corpus_instance",
            inst.q,
            inst.d,
        );
        rec.ensemble = inst.label.clone();
        rec.set_size = Some(e.len() as u64);
        rec.detail = Some(serde_json::to_string(&inst.spec).map_err(|e| CliError::Config(e.to_string()))?);
        out.records.push(rec);
    }
    Ok(out.finish())
}
