//! Run configuration: a TOML file plus command-line flags, flags winning
//! field by field. A run is reproducible from the resolved config alone.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use distgraph::ensembles::EnsembleSpec;
use distgraph::field::{FieldParams, PointSet};

/// Every knob of every subcommand, all optional so a single config file can
/// drive any of them. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub q: Option<u64>,
    pub d: Option<u32>,
    /// Comma-separated distance type, e.g. "1,1,2".
    pub t: Option<String>,
    /// Uniform unit-distance type length, alternative to `t`.
    pub k: Option<usize>,
    pub all_t: Option<bool>,
    pub ensemble: Option<String>,
    pub size: Option<usize>,
    pub seed: Option<u64>,
    pub density: Option<f64>,
    /// Comma-separated radii for the sphere_union ensemble.
    pub radii: Option<String>,
    pub codim: Option<u32>,
    /// Semicolon-separated points, comma-separated coordinates, for the
    /// explicit ensemble: "0,0;1,2".
    pub points: Option<String>,
    /// Comma-separated axis sizes for the product ensemble.
    pub axes: Option<String>,
    /// Maximum tail depth n for degree-tail reports.
    pub tail_n: Option<u32>,
    /// Cross-check chain counts through the spectral route.
    pub spectral_check: Option<bool>,
    /// Acceptance: comma-separated criterion numbers to run.
    pub only: Option<String>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

macro_rules! take_if_set {
    ($dst:expr, $src:expr; $($field:ident),+ $(,)?) => {
        $(if $src.$field.is_some() { $dst.$field = $src.$field.clone(); })+
    };
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Overlays `flags` on `self`: any flag that was given wins.
    pub fn merged_with(mut self, flags: &RunConfig) -> Self {
        take_if_set!(self, flags;
            q, d, t, k, all_t, ensemble, size, seed, density, radii, codim,
            points, axes, tail_n, spectral_check, only, format, out,
        );
        self
    }

    pub fn params(&self) -> Result<FieldParams, String> {
        let q = self.q.ok_or("missing --q")?;
        let d = self.d.ok_or("missing --d")?;
        FieldParams::new(q, d).map_err(|e| e.to_string())
    }

    pub fn distances(&self, params: FieldParams) -> Result<Vec<u64>, String> {
        match (&self.t, self.k) {
            (Some(text), _) => parse_u64_list(text),
            (None, Some(k)) if k >= 1 => Ok(vec![1; k]),
            _ => Err("give a distance type with --t or a length with --k".into()),
        }
        .and_then(|v| {
            if v.iter().any(|&t| t % params.q() == 0) {
                Err("zero distance rejected: every t_i must be nonzero mod q".into())
            } else {
                Ok(v)
            }
        })
    }

    /// The vertex-set recipe; defaults to the full space.
    pub fn ensemble_spec(&self) -> Result<EnsembleSpec, String> {
        let kind = self.ensemble.as_deref().unwrap_or("full");
        let seed = self.seed.unwrap_or(0);
        match kind {
            "full" => Ok(EnsembleSpec::Full),
            "random_size" => Ok(EnsembleSpec::RandomSize {
                size: self.size.ok_or("random_size needs --size")?,
                seed,
            }),
            "random_density" => Ok(EnsembleSpec::RandomDensity {
                density: self.density.ok_or("random_density needs --density")?,
                seed,
            }),
            "subspace" => Ok(EnsembleSpec::Subspace {
                codim: self.codim.unwrap_or(1),
            }),
            "sphere_union" => Ok(EnsembleSpec::SphereUnion {
                radii: parse_u64_list(self.radii.as_deref().ok_or("sphere_union needs --radii")?)?,
            }),
            "product" => Ok(EnsembleSpec::Product {
                axis_sizes: parse_u64_list(self.axes.as_deref().ok_or("product needs --axes")?)?,
            }),
            "explicit" => {
                let text = self.points.as_deref().ok_or("explicit needs --points")?;
                let points = text
                    .split(';')
                    .map(parse_u64_list)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(EnsembleSpec::Explicit { points })
            }
            other => Err(format!("unknown ensemble kind '{other}'")),
        }
    }

    pub fn point_set(&self, params: FieldParams) -> Result<(PointSet, String), String> {
        let spec = self.ensemble_spec()?;
        let set = distgraph::ensembles::generate(&spec, params).map_err(|e| e.to_string())?;
        let label = format!("q{:02}-d{}-{}", params.q(), params.d(), spec.label());
        Ok((set, label))
    }

    pub fn only_criteria(&self) -> Result<Option<Vec<u8>>, String> {
        match &self.only {
            None => Ok(None),
            Some(text) => {
                let list = text
                    .split(',')
                    .map(|s| s.trim().parse::<u8>().map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()?;
                if list.iter().any(|&n| !(1..=8).contains(&n)) {
                    return Err("criteria numbers must be in 1..=8".into());
                }
                Ok(Some(list))
            }
        }
    }
}

pub fn parse_u64_list(text: impl AsRef<str>) -> Result<Vec<u64>, String> {
    text.as_ref()
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad number '{}': {e}", s.trim()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = RunConfig {
            q: Some(3),
            d: Some(2),
            seed: Some(1),
            ..Default::default()
        };
        let flags = RunConfig {
            seed: Some(9),
            k: Some(2),
            ..Default::default()
        };
        let merged = file.merged_with(&flags);
        assert_eq!(merged.q, Some(3));
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.k, Some(2));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig {
            q: Some(5),
            d: Some(2),
            ensemble: Some("random_size".into()),
            size: Some(12),
            seed: Some(42),
            ..Default::default()
        };
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(toml::from_str::<RunConfig>("nonsense_key = 1").is_err());
    }

    #[test]
    fn distance_parsing() {
        let params = FieldParams::new(3, 2).unwrap();
        let cfg = RunConfig {
            t: Some("1,2,1".into()),
            ..Default::default()
        };
        assert_eq!(cfg.distances(params).unwrap(), vec![1, 2, 1]);
        let zero = RunConfig {
            t: Some("0,1".into()),
            ..Default::default()
        };
        assert!(zero.distances(params).is_err());
        let uniform = RunConfig {
            k: Some(3),
            ..Default::default()
        };
        assert_eq!(uniform.distances(params).unwrap(), vec![1, 1, 1]);
    }
}
