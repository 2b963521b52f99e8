//! Deterministic, seeded generators for vertex-set instances, and the fixed
//! corpus the acceptance suite runs over.
//!
//! All randomness flows through ChaCha8 seeded from a single 64-bit value,
//! so identical specs reproduce identical sets bit-for-bit on every
//! platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::field::{FieldParams, Point, PointSet};
use crate::spectral::sphere;
use crate::{Error, Result};

/// A recipe for one vertex set. `seed`-carrying kinds are fully determined
/// by their fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    /// All of `F_q^d`.
    Full,
    /// An explicit list of coordinate vectors.
    Explicit { points: Vec<Vec<u64>> },
    /// Each point kept independently with the given probability.
    RandomDensity { density: f64, seed: u64 },
    /// A uniform subset of exactly `size` points, drawn by seeded
    /// Fisher-Yates shuffle of the index range.
    RandomSize { size: usize, seed: u64 },
    /// The coordinate subspace `{x : last codim coordinates are 0}`.
    Subspace { codim: u32 },
    /// A union of spheres `S_t` over the given radii.
    SphereUnion { radii: Vec<u64> },
    /// The box `[0,n_1) x ... x [0,n_d)`.
    Product { axis_sizes: Vec<u64> },
}

impl EnsembleSpec {
    /// Short stable label used in report keys.
    pub fn label(&self) -> String {
        match self {
            EnsembleSpec::Full => "full".into(),
            EnsembleSpec::Explicit { points } => format!("explicit{}", points.len()),
            EnsembleSpec::RandomDensity { density, seed } => {
                format!("dens{:03}-s{seed}", (density * 100.0).round() as u32)
            }
            EnsembleSpec::RandomSize { size, seed } => format!("rand{size}-s{seed}"),
            EnsembleSpec::Subspace { codim } => format!("subspace{codim}"),
            EnsembleSpec::SphereUnion { radii } => format!(
                "spheres{}",
                radii
                    .iter()
                    .map(|t| t.to_string())
                    .collect::<Vec<_>>()
                    .join("+")
            ),
            EnsembleSpec::Product { axis_sizes } => format!(
                "prod{}",
                axis_sizes
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join("x")
            ),
        }
    }
}

pub fn generate(spec: &EnsembleSpec, params: FieldParams) -> Result<PointSet> {
    match spec {
        EnsembleSpec::Full => Ok(PointSet::full(params)),
        EnsembleSpec::Explicit { points } => {
            let mut indices = Vec::with_capacity(points.len());
            for coords in points {
                indices.push(Point::new(coords.clone(), params)?.index());
            }
            PointSet::from_indices(params, indices)
        }
        EnsembleSpec::RandomDensity { density, seed } => {
            if !(0.0..=1.0).contains(density) {
                return Err(Error::InvalidEnsemble(format!(
                    "density {density} outside [0, 1]"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mask = (0..params.size()).map(|_| rng.gen::<f64>() < *density).collect();
            Ok(PointSet::from_mask(params, mask))
        }
        EnsembleSpec::RandomSize { size, seed } => {
            if *size > params.size() {
                return Err(Error::InvalidEnsemble(format!(
                    "size {size} exceeds the space ({})",
                    params.size()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut indices: Vec<usize> = (0..params.size()).collect();
            // partial Fisher-Yates: the first `size` slots become a uniform
            // sample without replacement
            for i in 0..*size {
                let j = rng.gen_range(i..indices.len());
                indices.swap(i, j);
            }
            PointSet::from_indices(params, indices[..*size].iter().copied())
        }
        EnsembleSpec::Subspace { codim } => {
            if *codim > params.d() {
                return Err(Error::InvalidEnsemble(format!(
                    "codim {codim} exceeds dimension {}",
                    params.d()
                )));
            }
            let keep = (params.d() - codim) as usize;
            let mut coords = vec![0u64; params.d() as usize];
            let mut indices = Vec::new();
            for idx in 0..params.size() {
                params.coords_into(idx, &mut coords);
                if coords[keep..].iter().all(|&c| c == 0) {
                    indices.push(idx);
                }
            }
            PointSet::from_indices(params, indices)
        }
        EnsembleSpec::SphereUnion { radii } => {
            if radii.is_empty() {
                return Err(Error::InvalidEnsemble("no radii given".into()));
            }
            let mut mask = vec![false; params.size()];
            for &t in radii {
                for &idx in sphere(params, t).set().members() {
                    mask[idx] = true;
                }
            }
            Ok(PointSet::from_mask(params, mask))
        }
        EnsembleSpec::Product { axis_sizes } => {
            if axis_sizes.len() != params.d() as usize
                || axis_sizes.iter().any(|&n| n == 0 || n > params.q())
            {
                return Err(Error::InvalidEnsemble(format!(
                    "axis sizes {axis_sizes:?} invalid for q={} d={}",
                    params.q(),
                    params.d()
                )));
            }
            let mut coords = vec![0u64; params.d() as usize];
            let mut indices = Vec::new();
            for idx in 0..params.size() {
                params.coords_into(idx, &mut coords);
                if coords.iter().zip(axis_sizes).all(|(&c, &n)| c < n) {
                    indices.push(idx);
                }
            }
            PointSet::from_indices(params, indices)
        }
    }
}

/// One corpus entry: field parameters plus a set recipe, with a stable label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInstance {
    pub label: String,
    pub q: u64,
    pub d: u32,
    pub spec: EnsembleSpec,
}

impl CorpusInstance {
    pub fn params(&self) -> Result<FieldParams> {
        FieldParams::new(self.q, self.d)
    }

    pub fn generate(&self) -> Result<PointSet> {
        generate(&self.spec, self.params()?)
    }
}

/// Mixing constants for deriving per-instance seeds from structure; the
/// corpus is a fixed manifest, so these never change between runs.
fn corpus_seed(tag: u64, q: u64, d: u32, i: u64) -> u64 {
    let mut z = tag
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (q << 32)
        ^ ((d as u64) << 16)
        ^ i;
    // SplitMix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed derivation shared with the acceptance suite's per-check streams.
pub fn derived_seed(tag: u64, q: u64, d: u32, i: u64) -> u64 {
    corpus_seed(tag, q, d, i)
}

fn instance(q: u64, d: u32, short: &str, spec: EnsembleSpec) -> CorpusInstance {
    CorpusInstance {
        label: format!("q{q:02}-d{d}-{short}"),
        q,
        d,
        spec,
    }
}

/// The fixed acceptance corpus: exhaustive-bound sets over
/// `q in {3,5,7,11,13} x d in {2,3}`, plus `d in {4,5,6}` sets at `q = 3`
/// that satisfy the size hypotheses of the conditional theorems.
pub fn corpus() -> Vec<CorpusInstance> {
    let mut out = Vec::new();
    for q in [3u64, 5, 7, 11, 13] {
        for d in [2u32, 3] {
            let space = (q as usize).pow(d);
            out.push(instance(q, d, "full", EnsembleSpec::Full));
            out.push(instance(
                q,
                d,
                "spheres1",
                EnsembleSpec::SphereUnion { radii: vec![1] },
            ));
            out.push(instance(q, d, "subspace1", EnsembleSpec::Subspace { codim: 1 }));
            let size = space * 3 / 5;
            out.push(instance(
                q,
                d,
                &format!("rand{size}"),
                EnsembleSpec::RandomSize {
                    size,
                    seed: corpus_seed(1, q, d, 0),
                },
            ));
            out.push(instance(
                q,
                d,
                "dens045",
                EnsembleSpec::RandomDensity {
                    density: 0.45,
                    seed: corpus_seed(2, q, d, 0),
                },
            ));
        }
    }
    // hypothesis-satisfying sets for the conditional theorems
    out.push(instance(
        3,
        4,
        "rand60",
        EnsembleSpec::RandomSize {
            size: 60,
            seed: corpus_seed(1, 3, 4, 0),
        },
    ));
    out.push(instance(3, 4, "full", EnsembleSpec::Full));
    out.push(instance(
        3,
        5,
        "rand180",
        EnsembleSpec::RandomSize {
            size: 180,
            seed: corpus_seed(1, 3, 5, 0),
        },
    ));
    out.push(instance(3, 5, "full", EnsembleSpec::Full));
    out.push(instance(3, 6, "full", EnsembleSpec::Full));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: u64, d: u32) -> FieldParams {
        FieldParams::new(q, d).unwrap()
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(5, 2);
        for spec in [
            EnsembleSpec::RandomSize { size: 12, seed: 42 },
            EnsembleSpec::RandomDensity {
                density: 0.5,
                seed: 7,
            },
        ] {
            let a = generate(&spec, p).unwrap();
            let b = generate(&spec, p).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn random_size_contract() {
        let p = params(5, 2);
        for size in [0usize, 1, 12, 25] {
            let e = generate(&EnsembleSpec::RandomSize { size, seed: 42 }, p).unwrap();
            assert_eq!(e.len(), size);
        }
        assert!(generate(&EnsembleSpec::RandomSize { size: 26, seed: 1 }, p).is_err());
    }

    #[test]
    fn structured_kinds() {
        let p = params(3, 2);
        assert_eq!(generate(&EnsembleSpec::Full, p).unwrap().len(), 9);

        let su = generate(&EnsembleSpec::SphereUnion { radii: vec![1] }, p).unwrap();
        assert_eq!(su, sphere(p, 1).set().clone());
        assert_eq!(su.len(), 4);

        let sub = generate(&EnsembleSpec::Subspace { codim: 1 }, p).unwrap();
        assert_eq!(sub.len(), 3); // a line through the origin

        let prod = generate(&EnsembleSpec::Product { axis_sizes: vec![2, 3] }, p).unwrap();
        assert_eq!(prod.len(), 6);

        let ex = generate(
            &EnsembleSpec::Explicit {
                points: vec![vec![0, 0], vec![1, 2], vec![1, 2]],
            },
            p,
        )
        .unwrap();
        assert_eq!(ex.len(), 2);

        assert!(generate(&EnsembleSpec::RandomDensity { density: 1.5, seed: 0 }, p).is_err());
        assert!(generate(&EnsembleSpec::Subspace { codim: 3 }, p).is_err());
        assert!(generate(&EnsembleSpec::Product { axis_sizes: vec![4, 1] }, p).is_err());
    }

    #[test]
    fn corpus_contains_promised_instances() {
        let c = corpus();
        assert!(c.iter().any(|i| i.q == 3
            && i.d == 4
            && matches!(i.spec, EnsembleSpec::RandomSize { size: 60, .. })));
        assert!(c
            .iter()
            .any(|i| i.q == 3 && i.d == 6 && i.spec == EnsembleSpec::Full));
        assert!(c
            .iter()
            .any(|i| matches!(i.spec, EnsembleSpec::Subspace { codim: 1 })));
        // labels are unique (they key the reports)
        let mut labels: Vec<&str> = c.iter().map(|i| i.label.as_str()).collect();
        labels.sort_unstable();
        let before = labels.len();
        labels.dedup();
        assert_eq!(labels.len(), before);
        // every instance generates
        for inst in &c {
            let e = inst.generate().unwrap();
            assert!(e.len() <= inst.params().unwrap().size());
        }
    }
}
