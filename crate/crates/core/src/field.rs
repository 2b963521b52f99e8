//! Arithmetic in `F_q^d` for an odd prime `q`: points, the sum-of-squares
//! norm, additive character values, and the dense index <-> coordinate
//! mapping used by every enumeration kernel.

use num_complex::Complex64;

use crate::{Error, Result};

/// Hard cap on `q^d` so dense arrays over the space stay allocatable.
const MAX_SPACE: usize = 1 << 28;

/// The ambient space: an odd prime modulus `q` and a dimension `d >= 1`.
///
/// Construction validates primality and that `q^d` fits the index range, so
/// every downstream kernel may allocate dense arrays of length `q^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldParams {
    q: u64,
    d: u32,
    size: usize,
}

fn is_odd_prime(q: u64) -> bool {
    if q < 3 || q.is_multiple_of(2) {
        return false;
    }
    let mut f = 3u64;
    while f * f <= q {
        if q.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

impl FieldParams {
    pub fn new(q: u64, d: u32) -> Result<Self> {
        if !is_odd_prime(q) {
            return Err(Error::NotOddPrime { q });
        }
        if d < 1 {
            return Err(Error::InvalidDimension { d });
        }
        let mut size: usize = 1;
        for _ in 0..d {
            size = size
                .checked_mul(q as usize)
                .filter(|&s| s <= MAX_SPACE)
                .ok_or(Error::SpaceTooLarge { q, d })?;
        }
        Ok(Self { q, d, size })
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn d(&self) -> u32 {
        self.d
    }

    /// `q^d`, the number of points of the space.
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    /// Little-endian mixed-radix index of reduced coordinates:
    /// `index = sum coords[i] * q^i`.
    #[inline]
    pub fn index_of(&self, coords: &[u64]) -> usize {
        debug_assert_eq!(coords.len(), self.d as usize);
        let mut idx = 0usize;
        for &c in coords.iter().rev() {
            debug_assert!(c < self.q);
            idx = idx * self.q as usize + c as usize;
        }
        idx
    }

    /// Inverse of [`FieldParams::index_of`], writing into `out`.
    #[inline]
    pub fn coords_into(&self, index: usize, out: &mut [u64]) {
        debug_assert!(index < self.size);
        debug_assert_eq!(out.len(), self.d as usize);
        let q = self.q as usize;
        let mut rest = index;
        for c in out.iter_mut() {
            *c = (rest % q) as u64;
            rest /= q;
        }
    }

    pub fn coords_of(&self, index: usize) -> Vec<u64> {
        let mut out = vec![0u64; self.d as usize];
        self.coords_into(index, &mut out);
        out
    }

    /// `(a - b) mod q` for reduced residues.
    #[inline]
    pub fn sub_mod(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    /// `sum coords[i]^2 mod q` over already-reduced coordinates.
    #[inline]
    pub fn norm_of_coords(&self, coords: &[u64]) -> u64 {
        let mut acc = 0u64;
        for &c in coords {
            acc = (acc + c * c) % self.q;
        }
        acc
    }

    /// Norm of the difference of two reduced coordinate vectors.
    #[inline]
    pub fn norm_of_diff(&self, a: &[u64], b: &[u64]) -> u64 {
        let mut acc = 0u64;
        for (&x, &y) in a.iter().zip(b) {
            let c = self.sub_mod(x, y);
            acc = (acc + c * c) % self.q;
        }
        acc
    }

    /// Index of the componentwise difference `a - b` of two point indices.
    #[inline]
    pub fn sub_index(&self, a: usize, b: usize) -> usize {
        let q = self.q as usize;
        let (mut ra, mut rb) = (a, b);
        let mut idx = 0usize;
        let mut scale = 1usize;
        for _ in 0..self.d {
            let (ca, cb) = (ra % q, rb % q);
            let c = if ca >= cb { ca - cb } else { ca + q - cb };
            idx += c * scale;
            scale *= q;
            ra /= q;
            rb /= q;
        }
        idx
    }

    /// Index of the componentwise negation of a point index.
    #[inline]
    pub fn neg_index(&self, a: usize) -> usize {
        self.sub_index(0, a)
    }

    /// Index of the componentwise sum `a + b` of two point indices.
    #[inline]
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        let q = self.q as usize;
        let (mut ra, mut rb) = (a, b);
        let mut idx = 0usize;
        let mut scale = 1usize;
        for _ in 0..self.d {
            let c = (ra % q + rb % q) % q;
            idx += c * scale;
            scale *= q;
            ra /= q;
            rb /= q;
        }
        idx
    }
}

/// A point of `F_q^d` with reduced coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    coords: Vec<u64>,
    params: FieldParams,
}

impl Point {
    /// Reduces the given coordinates mod `q`; rejects a wrong coordinate count.
    pub fn new(coords: Vec<u64>, params: FieldParams) -> Result<Self> {
        if coords.len() != params.d() as usize {
            return Err(Error::CoordCount {
                expected: params.d(),
                got: coords.len(),
            });
        }
        let coords = coords.into_iter().map(|c| c % params.q()).collect();
        Ok(Self { coords, params })
    }

    pub fn from_index(index: usize, params: FieldParams) -> Result<Self> {
        if index >= params.size() {
            return Err(Error::IndexOutOfRange {
                index,
                size: params.size(),
            });
        }
        Ok(Self {
            coords: params.coords_of(index),
            params,
        })
    }

    #[inline]
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    #[inline]
    pub fn params(&self) -> FieldParams {
        self.params
    }

    /// The quadratic-form norm `||x|| = x_1^2 + ... + x_d^2 mod q`.
    #[inline]
    pub fn norm(&self) -> u64 {
        self.params.norm_of_coords(&self.coords)
    }

    /// Little-endian mixed-radix index (see [`FieldParams::index_of`]).
    #[inline]
    pub fn index(&self) -> usize {
        self.params.index_of(&self.coords)
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The single additive character value `e^{2 pi i a / q}`.
pub fn character_value(q: u64, a: u64) -> Complex64 {
    let angle = 2.0 * std::f64::consts::PI * ((a % q) as f64) / (q as f64);
    Complex64::from_polar(1.0, angle)
}

/// Precomputed table of the additive character `a -> e^{2 pi i a / q}`.
#[derive(Debug, Clone)]
pub struct Character {
    q: u64,
    values: Vec<Complex64>,
}

impl Character {
    pub fn new(q: u64) -> Self {
        let values = (0..q).map(|a| character_value(q, a)).collect();
        Self { q, values }
    }

    /// `chi(a)` for any residue (reduced mod q internally).
    #[inline]
    pub fn eval(&self, a: u64) -> Complex64 {
        self.values[(a % self.q) as usize]
    }

    /// `chi(-a)`.
    #[inline]
    pub fn eval_neg(&self, a: u64) -> Complex64 {
        let a = a % self.q;
        self.values[if a == 0 { 0 } else { (self.q - a) as usize }]
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }
}

/// A subset of `F_q^d` stored as a dense indicator plus a sorted member list.
///
/// Immutable after construction; the sorted member order fixes the
/// deterministic iteration order used by every search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    params: FieldParams,
    mask: Vec<bool>,
    members: Vec<usize>,
}

impl PointSet {
    pub fn empty(params: FieldParams) -> Self {
        Self {
            params,
            mask: vec![false; params.size()],
            members: Vec::new(),
        }
    }

    pub fn full(params: FieldParams) -> Self {
        Self {
            params,
            mask: vec![true; params.size()],
            members: (0..params.size()).collect(),
        }
    }

    /// Deduplicates and sorts; rejects out-of-range indices.
    pub fn from_indices(params: FieldParams, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; params.size()];
        for i in indices {
            if i >= params.size() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    size: params.size(),
                });
            }
            mask[i] = true;
        }
        Ok(Self::from_mask(params, mask))
    }

    pub fn from_mask(params: FieldParams, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), params.size());
        let members = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        Self {
            params,
            mask,
            members,
        }
    }

    #[inline]
    pub fn params(&self) -> FieldParams {
        self.params
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        self.mask[index]
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Member indices in ascending order.
    #[inline]
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.members
            .iter()
            .map(move |&i| Point::from_index(i, self.params).expect("member in range"))
    }

    /// A copy of the set with one extra point.
    pub fn with_index(&self, index: usize) -> Result<Self> {
        if index >= self.params.size() {
            return Err(Error::IndexOutOfRange {
                index,
                size: self.params.size(),
            });
        }
        let mut mask = self.mask.clone();
        mask[index] = true;
        Ok(Self::from_mask(self.params, mask))
    }

    /// Reduced coordinate rows for all members, in member order.
    pub fn member_coords(&self) -> Vec<Vec<u64>> {
        self.members
            .iter()
            .map(|&i| self.params.coords_of(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: u64, d: u32) -> FieldParams {
        FieldParams::new(q, d).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(FieldParams::new(2, 2), Err(Error::NotOddPrime { .. })));
        assert!(matches!(FieldParams::new(9, 2), Err(Error::NotOddPrime { .. })));
        assert!(matches!(FieldParams::new(1, 2), Err(Error::NotOddPrime { .. })));
        assert!(matches!(FieldParams::new(15, 1), Err(Error::NotOddPrime { .. })));
        assert!(matches!(FieldParams::new(5, 0), Err(Error::InvalidDimension { .. })));
        assert!(matches!(
            FieldParams::new(1000003, 5),
            Err(Error::SpaceTooLarge { .. })
        ));
        assert_eq!(params(13, 3).size(), 2197);
    }

    #[test]
    fn norm_examples() {
        let p32 = params(3, 2);
        assert_eq!(Point::new(vec![0, 0], p32).unwrap().norm(), 0);
        assert_eq!(Point::new(vec![2, 0], p32).unwrap().norm(), 1);
        // 1 + 4 + 9 = 14 = 4 mod 5
        let p53 = params(5, 3);
        assert_eq!(Point::new(vec![1, 2, 3], p53).unwrap().norm(), 4);
    }

    #[test]
    fn norm_invariant_under_permutation_and_negation() {
        let p = params(7, 3);
        for idx in 0..p.size() {
            let c = p.coords_of(idx);
            let n = p.norm_of_coords(&c);
            let perm = vec![c[2], c[0], c[1]];
            assert_eq!(p.norm_of_coords(&perm), n);
            let neg: Vec<u64> = c.iter().map(|&a| (p.q() - a) % p.q()).collect();
            assert_eq!(p.norm_of_coords(&neg), n);
        }
    }

    #[test]
    fn character_examples() {
        let chi = Character::new(3);
        let one = chi.eval(0);
        assert!((one.re - 1.0).abs() < 1e-12 && one.im.abs() < 1e-12);
        let s = chi.eval(1) + chi.eval(2);
        assert!((s.re + 1.0).abs() < 1e-12 && s.im.abs() < 1e-12);

        let chi5 = Character::new(5);
        let total: Complex64 = (0..5).map(|a| chi5.eval(a)).sum();
        assert!(total.norm() < 1e-12);
    }

    #[test]
    fn character_algebra() {
        for q in [3u64, 5, 7, 11, 13] {
            let chi = Character::new(q);
            for a in 0..q {
                assert!((chi.eval(a).norm() - 1.0).abs() < 1e-12);
                // chi(a) * chi(q - a) = chi(0) = 1
                let prod = chi.eval(a) * chi.eval_neg(a);
                assert!((prod - Complex64::new(1.0, 0.0)).norm() < 1e-12);
                for b in 0..q {
                    let lhs = chi.eval(a) * chi.eval(b);
                    let rhs = chi.eval(a + b);
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn index_round_trip_exhaustive() {
        for q in [3u64, 5, 7, 11, 13] {
            for d in 1..=3u32 {
                let p = params(q, d);
                for idx in 0..p.size() {
                    let pt = Point::from_index(idx, p).unwrap();
                    assert_eq!(pt.index(), idx);
                }
            }
        }
    }

    #[test]
    fn index_is_little_endian_mixed_radix() {
        let p = params(3, 2);
        assert_eq!(Point::new(vec![0, 0], p).unwrap().index(), 0);
        assert_eq!(Point::new(vec![1, 0], p).unwrap().index(), 1);
        assert_eq!(Point::new(vec![0, 1], p).unwrap().index(), 3);
        assert!(Point::from_index(9, p).is_err());
    }

    #[test]
    fn index_difference_matches_coordinate_difference() {
        let p = params(5, 3);
        for a in [0usize, 1, 17, 63, 124] {
            for b in [0usize, 2, 30, 124] {
                let ca = p.coords_of(a);
                let cb = p.coords_of(b);
                let diff: Vec<u64> = ca.iter().zip(&cb).map(|(&x, &y)| p.sub_mod(x, y)).collect();
                assert_eq!(p.sub_index(a, b), p.index_of(&diff));
            }
            assert_eq!(p.sub_index(a, a), 0);
            assert_eq!(p.sub_index(p.neg_index(a), 0), p.neg_index(a));
        }
    }

    #[test]
    fn point_set_basics() {
        let p = params(3, 2);
        let full = PointSet::full(p);
        assert_eq!(full.len(), 9);
        let e = PointSet::from_indices(p, [4usize, 1, 4]).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.members(), &[1, 4]);
        assert!(e.contains(4) && !e.contains(0));
        assert!(PointSet::from_indices(p, [9usize]).is_err());
        let bigger = e.with_index(0).unwrap();
        assert_eq!(bigger.len(), 3);
    }
}
