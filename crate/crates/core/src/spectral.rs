//! The discrete Fourier transform on `F_q^d`, spheres and their spectra,
//! convolution, and the bilinear distance form.
//!
//! Normalization: `f^(m) = q^{-d} sum_x chi(-m.x) f(x)` and
//! `f(x) = sum_m f^(m) chi(m.x)`. Under this convention the transform of the
//! unnormalized convolution `(f*g)(x) = sum_y f(y) g(x-y)` is
//! `q^d * f^ * g^`, which makes the L1 mass of iterated sphere convolutions
//! come out as plain chain counts.

use num_complex::Complex64;
use serde::Serialize;

use crate::field::{Character, FieldParams, PointSet};
use crate::report::leq_with_slack;
use crate::{Error, Result};

/// A real-valued function on `F_q^d`, stored densely by point index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFunction {
    params: FieldParams,
    values: Vec<f64>,
}

impl DensityFunction {
    pub fn new(params: FieldParams, values: Vec<f64>) -> Result<Self> {
        if values.len() != params.size() {
            return Err(Error::ParamsMismatch);
        }
        Ok(Self { params, values })
    }

    pub fn zeros(params: FieldParams) -> Self {
        Self {
            params,
            values: vec![0.0; params.size()],
        }
    }

    /// The point mass at one index.
    pub fn delta(params: FieldParams, index: usize) -> Result<Self> {
        if index >= params.size() {
            return Err(Error::IndexOutOfRange {
                index,
                size: params.size(),
            });
        }
        let mut values = vec![0.0; params.size()];
        values[index] = 1.0;
        Ok(Self { params, values })
    }

    /// The 0/1 indicator of a point set.
    pub fn indicator(set: &PointSet) -> Self {
        let values = set.mask().iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        Self {
            params: set.params(),
            values,
        }
    }

    #[inline]
    pub fn params(&self) -> FieldParams {
        self.params
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `sum_x |f(x)|`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// `sum_x f(x)^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// A complex-valued function on the frequency side, densely indexed by `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    params: FieldParams,
    values: Vec<Complex64>,
}

impl Spectrum {
    #[inline]
    pub fn params(&self) -> FieldParams {
        self.params
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `sum_m |f^(m)|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Largest `|f^(-m) - conj(f^(m))|`; zero (to rounding) for spectra of
    /// real functions.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let p = self.params;
        (0..p.size())
            .map(|m| (self.values[p.neg_index(m)] - self.values[m].conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// One length-q pass along every axis; `forward` selects the kernel
/// `chi(-m.x)` rather than the inversion kernel `chi(m.x)`.
fn axis_passes(params: FieldParams, values: &mut [Complex64], forward: bool) {
    let q = params.q() as usize;
    let chi = Character::new(params.q());
    // twiddle[t] = chi(-t) forward, chi(t) inverse, indexed by t = m*a mod q
    let twiddle: Vec<Complex64> = (0..q as u64)
        .map(|t| if forward { chi.eval_neg(t) } else { chi.eval(t) })
        .collect();

    let mut line = vec![Complex64::default(); q];
    let mut stride = 1usize;
    for _ in 0..params.d() {
        let block = stride * q;
        let mut base = 0usize;
        while base < values.len() {
            for lo in 0..stride {
                let start = base + lo;
                for (a, slot) in line.iter_mut().enumerate() {
                    *slot = values[start + a * stride];
                }
                for m in 0..q {
                    let mut acc = Complex64::default();
                    for (a, &v) in line.iter().enumerate() {
                        acc += v * twiddle[(m * a) % q];
                    }
                    values[start + m * stride] = acc;
                }
            }
            base += block;
        }
        stride = block;
    }
}

/// Fast transform: d passes of length-q transforms, `O(d q^{d+1})` scalar
/// multiplies, then the `q^{-d}` normalization.
pub fn dft(f: &DensityFunction) -> Spectrum {
    let params = f.params();
    let mut values: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    axis_passes(params, &mut values, true);
    let scale = 1.0 / params.size() as f64;
    for v in &mut values {
        *v *= scale;
    }
    Spectrum { params, values }
}

/// Direct `O(q^{2d})` evaluation of the defining sum; the oracle the fast
/// path is tested against.
pub fn dft_direct(f: &DensityFunction) -> Spectrum {
    let params = f.params();
    let q = params.q();
    let d = params.d() as usize;
    let size = params.size();
    let chi = Character::new(q);
    let mut coords = vec![0u64; size * d];
    for idx in 0..size {
        params.coords_into(idx, &mut coords[idx * d..(idx + 1) * d]);
    }
    let scale = 1.0 / size as f64;
    let mut values = vec![Complex64::default(); size];
    for (m, out) in values.iter_mut().enumerate() {
        let mc = &coords[m * d..(m + 1) * d];
        let mut acc = Complex64::default();
        for x in 0..size {
            let fv = f.values()[x];
            if fv == 0.0 {
                continue;
            }
            let xc = &coords[x * d..(x + 1) * d];
            let mut dot = 0u64;
            for i in 0..d {
                dot = (dot + mc[i] * xc[i]) % q;
            }
            acc += chi.eval_neg(dot) * fv;
        }
        *out = acc * scale;
    }
    Spectrum { params, values }
}

/// Full inversion `f(x) = sum_m f^(m) chi(m.x)`, keeping imaginary parts.
pub fn inverse_dft_complex(spectrum: &Spectrum) -> Vec<Complex64> {
    let mut values = spectrum.values().to_vec();
    axis_passes(spectrum.params(), &mut values, false);
    values
}

/// Inversion for spectra of real functions; imaginary parts (at rounding
/// scale) are dropped.
pub fn inverse_dft(spectrum: &Spectrum) -> DensityFunction {
    let values = inverse_dft_complex(spectrum).iter().map(|v| v.re).collect();
    DensityFunction {
        params: spectrum.params(),
        values,
    }
}

/// `| sum_m |f^(m)|^2 - q^{-d} sum_x f(x)^2 |`; below 1e-10 for every
/// desk-scale input.
pub fn plancherel_defect(f: &DensityFunction) -> f64 {
    let spectral = dft(f).l2_norm_sq();
    let physical = f.l2_norm_sq() / f.params().size() as f64;
    (spectral - physical).abs()
}

/// The sphere `S_t = { x : ||x|| = t }` with its indicator and cardinality.
#[derive(Debug, Clone)]
pub struct SphereSet {
    set: PointSet,
    t: u64,
}

impl SphereSet {
    #[inline]
    pub fn t(&self) -> u64 {
        self.t
    }

    #[inline]
    pub fn set(&self) -> &PointSet {
        &self.set
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.set.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// `t = 0`: constructible, but every theorem hypothesis excludes it.
    #[inline]
    pub fn is_degenerate(&self) -> bool {
        self.t == 0
    }

    pub fn indicator(&self) -> DensityFunction {
        DensityFunction::indicator(&self.set)
    }
}

/// Exhaustive sphere construction by norm evaluation at every point.
pub fn sphere(params: FieldParams, t: u64) -> SphereSet {
    let t = t % params.q();
    let d = params.d() as usize;
    let mut coords = vec![0u64; d];
    let mut mask = vec![false; params.size()];
    for (idx, slot) in mask.iter_mut().enumerate() {
        params.coords_into(idx, &mut coords);
        *slot = params.norm_of_coords(&coords) == t;
    }
    SphereSet {
        set: PointSet::from_mask(params, mask),
        t,
    }
}

/// Outcome of checking the sphere spectrum decay `|S^_t(m)| <= 2 q^{-(d+1)/2}`
/// over every nonzero frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereDecayReport {
    pub q: u64,
    pub d: u32,
    pub t: u64,
    pub sphere_size: u64,
    /// `max_{m != 0} |S^_t(m)|`.
    pub max_nontrivial: f64,
    pub bound: f64,
    /// Observed maximum divided by the bound; recorded, not interpreted.
    pub ratio: f64,
    pub holds: bool,
}

/// Exhaustive decay check for one sphere; rejects `t = 0`.
pub fn sphere_decay_report(params: FieldParams, t: u64) -> Result<SphereDecayReport> {
    let t = t % params.q();
    if t == 0 {
        return Err(Error::ZeroDistance);
    }
    let sph = sphere(params, t);
    let spectrum = dft(&sph.indicator());
    let max_nontrivial = spectrum.values()[1..]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let bound = 2.0 * (params.q() as f64).powf(-((params.d() as f64 + 1.0) / 2.0));
    Ok(SphereDecayReport {
        q: params.q(),
        d: params.d(),
        t,
        sphere_size: sph.len() as u64,
        max_nontrivial,
        bound,
        ratio: max_nontrivial / bound,
        holds: leq_with_slack(max_nontrivial, bound),
    })
}

/// Definitional convolution `(f*g)(x) = sum_y f(y) g(x-y)`; exact for
/// integer-valued inputs, `O(q^{2d})`.
pub fn convolve_direct(f: &DensityFunction, g: &DensityFunction) -> Result<DensityFunction> {
    if f.params() != g.params() {
        return Err(Error::ParamsMismatch);
    }
    let params = f.params();
    let size = params.size();
    let mut out = vec![0.0; size];
    for (y, &fv) in f.values().iter().enumerate() {
        if fv == 0.0 {
            continue;
        }
        for (z, &gv) in g.values().iter().enumerate() {
            // x = y + z  <=>  z = x - y
            let x = params.sub_index(z, params.neg_index(y));
            out[x] += fv * gv;
        }
    }
    DensityFunction::new(params, out)
}

/// Spectral fast path: transform of `f*g` equals `q^d f^ g^` under our
/// normalization.
pub fn convolve(f: &DensityFunction, g: &DensityFunction) -> Result<DensityFunction> {
    if f.params() != g.params() {
        return Err(Error::ParamsMismatch);
    }
    let params = f.params();
    let fa = dft(f);
    let gb = dft(g);
    let scale = params.size() as f64;
    let values: Vec<Complex64> = fa
        .values()
        .iter()
        .zip(gb.values())
        .map(|(&a, &b)| a * b * scale)
        .collect();
    let spec = Spectrum { params, values };
    Ok(inverse_dft(&spec))
}

/// Sparse convolution with a sphere: `(f*S_t)(x) = sum_{s in S_t} f(x-s)`,
/// `O(q^d |S_t|)`. Exact for integer-valued `f`.
pub fn convolve_with_sphere(f: &DensityFunction, sph: &SphereSet) -> Result<DensityFunction> {
    if f.params() != sph.set().params() {
        return Err(Error::ParamsMismatch);
    }
    let params = f.params();
    let mut out = vec![0.0; params.size()];
    for (x, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &s in sph.set().members() {
            acc += f.values()[params.sub_index(x, s)];
        }
        *slot = acc;
    }
    DensityFunction::new(params, out)
}

/// The bilinear distance form
/// `sum_{x,y} f(x) g(y) S_t(x-y) = |S_t|/q^d ||f||_1 ||g||_1 + D(f,g)`
/// together with the remainder bound `|D| <= 2 q^{(d-1)/2} ||f||_2 ||g||_2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilinearReport {
    pub q: u64,
    pub d: u32,
    pub t: u64,
    pub sphere_size: u64,
    pub total: f64,
    pub main_term: f64,
    /// `D(f,g) = total - main_term`, exact by definition.
    pub remainder: f64,
    pub stated_bound: f64,
    pub holds: bool,
}

/// Evaluates the form as `sum_x f(x) (g*S_t)(x)`; rejects `t = 0`.
/// Callers pass nonnegative densities, as in the statement being checked.
pub fn bilinear_distance_form(
    f: &DensityFunction,
    g: &DensityFunction,
    t: u64,
) -> Result<BilinearReport> {
    if f.params() != g.params() {
        return Err(Error::ParamsMismatch);
    }
    debug_assert!(f.values().iter().chain(g.values()).all(|&v| v >= 0.0));
    let params = f.params();
    let t = t % params.q();
    if t == 0 {
        return Err(Error::ZeroDistance);
    }
    let sph = sphere(params, t);
    let conv = convolve_with_sphere(g, &sph)?;
    let total: f64 = f
        .values()
        .iter()
        .zip(conv.values())
        .map(|(&a, &b)| a * b)
        .sum();
    let main_term = sph.len() as f64 / params.size() as f64 * f.l1_norm() * g.l1_norm();
    let remainder = total - main_term;
    let q = params.q() as f64;
    let stated_bound =
        2.0 * q.powf((params.d() as f64 - 1.0) / 2.0) * f.l2_norm_sq().sqrt() * g.l2_norm_sq().sqrt();
    Ok(BilinearReport {
        q: params.q(),
        d: params.d(),
        t,
        sphere_size: sph.len() as u64,
        total,
        main_term,
        remainder,
        stated_bound,
        holds: leq_with_slack(remainder.abs(), stated_bound),
    })
}

/// Spectral route for the bilinear total:
/// `q^{2d} sum_m f^(m) conj(g^(m)) S^_t(m)` (the sphere spectrum is real).
/// Retained as an independent cross-check of [`bilinear_distance_form`].
pub fn bilinear_total_spectral(f: &DensityFunction, g: &DensityFunction, t: u64) -> Result<f64> {
    if f.params() != g.params() {
        return Err(Error::ParamsMismatch);
    }
    let params = f.params();
    if t.is_multiple_of(params.q()) {
        return Err(Error::ZeroDistance);
    }
    let sf = dft(f);
    let sg = dft(g);
    let ss = dft(&sphere(params, t).indicator());
    let scale = (params.size() as f64) * (params.size() as f64);
    let total: Complex64 = sf
        .values()
        .iter()
        .zip(sg.values())
        .zip(ss.values())
        .map(|((&a, &b), &s)| a * b.conj() * s)
        .sum();
    Ok((total * scale).re)
}

/// Deviation `max |fast - direct|` between the two transform routes.
pub fn dft_route_deviation(f: &DensityFunction) -> f64 {
    let fast = dft(f);
    let direct = dft_direct(f);
    fast.values()
        .iter()
        .zip(direct.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Point;

    fn params(q: u64, d: u32) -> FieldParams {
        FieldParams::new(q, d).unwrap()
    }

    #[test]
    fn delta_transforms_to_constant() {
        let p = params(3, 2);
        let f = DensityFunction::delta(p, 0).unwrap();
        let s = dft(&f);
        for v in s.values() {
            assert!((v - Complex64::new(1.0 / 9.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_transforms_to_delta() {
        let p = params(3, 2);
        let f = DensityFunction::new(p, vec![1.0; 9]).unwrap();
        let s = dft(&f);
        assert!((s.values()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        for &v in &s.values()[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn unit_sphere_spectrum_value() {
        // S_1 in F_3^2 = {(0,1),(0,2),(1,0),(2,0)}; at m = (1,0) the two
        // points with first coordinate 0 contribute 1 each and the others
        // contribute chi(-1) + chi(-2) = -1, so f^ = 1/9.
        let p = params(3, 2);
        let s1 = sphere(p, 1);
        let expected: Vec<usize> = [(0u64, 1u64), (0, 2), (1, 0), (2, 0)]
            .iter()
            .map(|&(a, b)| Point::new(vec![a, b], p).unwrap().index())
            .collect();
        let mut got: Vec<usize> = s1.set().members().to_vec();
        let mut want = expected.clone();
        got.sort_unstable();
        want.sort_unstable();
        assert_eq!(got, want);
        assert_eq!(s1.len(), 4);

        let m = Point::new(vec![1, 0], p).unwrap().index();
        let spec = dft(&s1.indicator());
        assert!((spec.values()[m] - Complex64::new(1.0 / 9.0, 0.0)).norm() < 1e-12);
        // zero frequency carries the density |S_1|/q^d = 4/9
        assert!((spec.values()[0] - Complex64::new(4.0 / 9.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fast_and_direct_transforms_agree() {
        let p = params(5, 2);
        let mut vals = vec![0.0; p.size()];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = ((i * 7 + 3) % 5) as f64;
        }
        let f = DensityFunction::new(p, vals).unwrap();
        assert!(dft_route_deviation(&f) < 1e-12);
    }

    #[test]
    fn round_trip_and_plancherel() {
        let p = params(3, 2);
        let f = DensityFunction::delta(p, 0).unwrap();
        let back = inverse_dft(&dft(&f));
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(plancherel_defect(&f) < 1e-14);

        let full = DensityFunction::new(p, vec![1.0; 9]).unwrap();
        assert!(plancherel_defect(&full) < 1e-12);

        let zero = Spectrum {
            params: p,
            values: vec![Complex64::default(); 9],
        };
        let z = inverse_dft(&zero);
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sphere_examples() {
        let p = params(3, 2);
        let s0 = sphere(p, 0);
        assert!(s0.is_degenerate());
        assert!(s0.set().contains(0)); // origin

        let p52 = params(5, 2);
        assert_eq!(sphere(p52, 1).len(), 4); // q - 1: -1 is a square mod 5
        for t in 1..5 {
            let n = sphere(p52, t).len();
            assert!(n == 4 || n == 6);
        }
    }

    #[test]
    fn sphere_size_window_small_dims() {
        for q in [3u64, 5, 7, 11, 13] {
            for d in [2u32, 3] {
                let p = params(q, d);
                let lo = (q as f64).powi(d as i32 - 1) / 2.0;
                let hi = 2.0 * (q as f64).powi(d as i32 - 1);
                for t in 1..q {
                    let n = sphere(p, t).len() as f64;
                    assert!(n >= lo && n <= hi, "q={q} d={d} t={t} |S|={n}");
                }
                if d == 2 {
                    for t in 1..q {
                        let n = sphere(p, t).len() as u64;
                        assert!(n == q - 1 || n == q + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_decay_report_example() {
        let p = params(3, 2);
        let r = sphere_decay_report(p, 1).unwrap();
        assert_eq!(r.sphere_size, 4);
        // the maximum sits at m = (1,1): all four points contribute
        // chi(-1) or chi(-2), summing to -2, so |S^| = 2/9 there
        assert!((r.max_nontrivial - 2.0 / 9.0).abs() < 1e-12);
        assert!((r.bound - 2.0 * 3f64.powf(-1.5)).abs() < 1e-12);
        assert!(r.holds);
        assert_eq!(sphere_decay_report(p, 0), Err(Error::ZeroDistance));
    }

    #[test]
    fn convolution_identities() {
        let p = params(3, 2);
        let delta = DensityFunction::delta(p, 0).unwrap();
        let s1 = sphere(p, 1).indicator();
        let conv = convolve_direct(&delta, &s1).unwrap();
        for (a, b) in conv.values().iter().zip(s1.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        // (S_1 * S_1)(0) = |S_1| because S_1 = -S_1
        let ss = convolve_direct(&s1, &s1).unwrap();
        assert!((ss.values()[0] - 4.0).abs() < 1e-12);

        let fast = convolve(&s1, &s1).unwrap();
        for (a, b) in fast.values().iter().zip(ss.values()) {
            assert!((a - b).abs() < 1e-9);
        }
        let sparse = convolve_with_sphere(&s1, &sphere(p, 1)).unwrap();
        for (a, b) in sparse.values().iter().zip(ss.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn convolve_routes_agree_on_seeded_inputs() {
        use rand::{Rng, SeedableRng};
        let p = params(5, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0_517E);
        for _ in 0..5 {
            let f = DensityFunction::new(
                p,
                (0..p.size()).map(|_| rng.gen_range(0..2) as f64).collect(),
            )
            .unwrap();
            let g = DensityFunction::new(
                p,
                (0..p.size()).map(|_| rng.gen_range(0..2) as f64).collect(),
            )
            .unwrap();
            let direct = convolve_direct(&f, &g).unwrap();
            let fast = convolve(&f, &g).unwrap();
            for (a, b) in fast.values().iter().zip(direct.values()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bilinear_form_examples() {
        let p = params(3, 2);
        let full = DensityFunction::new(p, vec![1.0; 9]).unwrap();
        let r = bilinear_distance_form(&full, &full, 1).unwrap();
        assert!((r.total - 36.0).abs() < 1e-9);
        assert!((r.main_term - 36.0).abs() < 1e-9);
        assert!(r.remainder.abs() < 1e-9);
        assert!(r.holds);

        let delta = DensityFunction::delta(p, 0).unwrap();
        let r2 = bilinear_distance_form(&delta, &delta, 1).unwrap();
        assert!(r2.total.abs() < 1e-12);
        assert!((r2.main_term - 4.0 / 9.0).abs() < 1e-12);
        assert!((r2.remainder.abs() - 4.0 / 9.0).abs() < 1e-12);
        assert!(r2.holds);
        assert!(bilinear_distance_form(&delta, &delta, 0).is_err());

        let spectral = bilinear_total_spectral(&full, &full, 1).unwrap();
        assert!((spectral - 36.0).abs() < 1e-8);
    }
}
