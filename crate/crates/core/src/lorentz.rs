//! Sparse coordinate vectors over the countable basis, the operator `J` and the
//! Lorentz bilinear form `(x, y) = x_0 y_0 - sum_{i>=1} x_i y_i = <x, Jy>`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::RwLock;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Coordinates with magnitude below this are dropped when a vector is built.
pub const DROP_THRESHOLD: f64 = 1e-15;

/// Absolute/relative tolerance pair used for invariant checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance {
        abs: 1e-9,
        rel: 1e-9,
    };

    /// `|a - b| <= abs + rel * max(|a|, |b|)`.
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs + self.rel * a.abs().max(b.abs())
    }

    /// Threshold for a quantity of the given magnitude.
    pub fn at_scale(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

static GLOBAL_TOLERANCE: RwLock<Tolerance> = RwLock::new(Tolerance::DEFAULT);

/// Library-wide tolerance used by constructors and invariant checks.
pub fn tolerance() -> Tolerance {
    *GLOBAL_TOLERANCE.read().unwrap_or_else(|e| e.into_inner())
}

/// Replace the library-wide tolerance. Intended to be called once at startup.
pub fn set_tolerance(tol: Tolerance) {
    *GLOBAL_TOLERANCE.write().unwrap_or_else(|e| e.into_inner()) = tol;
}

/// A finitely supported real vector over the basis `e_0, e_1, ...`.
///
/// Entries are kept in increasing index order and no stored coordinate has
/// magnitude below [`DROP_THRESHOLD`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    entries: BTreeMap<usize, f64>,
}

impl SparseVec {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The basis vector `e_i`.
    pub fn basis(i: usize) -> Self {
        Self::from_pairs([(i, 1.0)])
    }

    /// Builds a vector from `(index, coordinate)` pairs; repeated indices add up.
    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Self {
        let mut entries = BTreeMap::new();
        for (i, c) in pairs {
            *entries.entry(i).or_insert(0.0) += c;
        }
        let mut v = Self { entries };
        v.normalize();
        v
    }

    /// Coordinates `values[k]` at index `k`.
    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_pairs(values.iter().copied().enumerate())
    }

    /// Coordinates `values[k]` at index `indices[k]`.
    pub fn from_dense_on(indices: &[usize], values: &DVector<f64>) -> Self {
        Self::from_pairs(indices.iter().copied().zip(values.iter().copied()))
    }

    fn normalize(&mut self) {
        self.entries.retain(|_, c| c.abs() >= DROP_THRESHOLD);
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries.get(&i).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `(index, coordinate)` pairs in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&i, &c)| (i, c))
    }

    /// Indices carrying a nonzero coordinate, increasing.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    /// Dense coordinates on the given index list.
    pub fn to_dense_on(&self, indices: &[usize]) -> DVector<f64> {
        DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.get(i)))
    }

    /// Euclidean inner product.
    pub fn dot(&self, other: &SparseVec) -> f64 {
        let (small, large) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().map(|(i, c)| c * large.get(i)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.values().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> SparseVec {
        Self::from_pairs(self.iter().map(|(i, c)| (i, c * s)))
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &SparseVec) -> SparseVec {
        Self::from_pairs(self.iter().chain(other.iter().map(|(i, c)| (i, s * c))))
    }

    /// Coordinate 0 removed: the projection onto `H_- = {x_0 = 0}`.
    pub fn spatial(&self) -> SparseVec {
        Self {
            entries: self.entries.range(1..).map(|(&i, &c)| (i, c)).collect(),
        }
    }

    /// `x_0 e_0 + self` for a vector supported on indices `>= 1`.
    pub fn with_time(&self, x0: f64) -> SparseVec {
        self.axpy(x0, &SparseVec::basis(0))
    }

    pub fn distance(&self, other: &SparseVec) -> f64 {
        (self - other).norm()
    }
}

impl Add for &SparseVec {
    type Output = SparseVec;
    fn add(self, rhs: &SparseVec) -> SparseVec {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SparseVec {
    type Output = SparseVec;
    fn sub(self, rhs: &SparseVec) -> SparseVec {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SparseVec {
    type Output = SparseVec;
    fn neg(self) -> SparseVec {
        self.scale(-1.0)
    }
}

impl Mul<&SparseVec> for f64 {
    type Output = SparseVec;
    fn mul(self, rhs: &SparseVec) -> SparseVec {
        rhs.scale(self)
    }
}

impl FromIterator<(usize, f64)> for SparseVec {
    fn from_iter<I: IntoIterator<Item = (usize, f64)>>(iter: I) -> Self {
        Self::from_pairs(iter)
    }
}

/// `J e_0 = e_0`, `J e_i = -e_i` for `i >= 1`.
pub fn apply_j(x: &SparseVec) -> SparseVec {
    SparseVec {
        entries: x
            .entries
            .iter()
            .map(|(&i, &c)| (i, if i == 0 { c } else { -c }))
            .collect(),
    }
}

/// The Lorentz form `x_0 y_0 - sum_{i>=1} x_i y_i`.
pub fn lorentz_form(x: &SparseVec, y: &SparseVec) -> f64 {
    let (small, large) = if x.nnz() <= y.nnz() { (x, y) } else { (y, x) };
    small
        .iter()
        .map(|(i, c)| {
            let p = c * large.get(i);
            if i == 0 {
                p
            } else {
                -p
            }
        })
        .sum()
}

/// The quadratic form `Q(x) = (x, x)`.
pub fn quadratic(x: &SparseVec) -> f64 {
    let x0 = x.get(0);
    x0 * x0 - x.spatial().norm_sq()
}

/// A Lorentz-orthonormal frame: one vector with `Q = 1` and pairwise orthogonal
/// vectors with `Q = -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzFrame {
    positive: SparseVec,
    negatives: Vec<SparseVec>,
}

impl LorentzFrame {
    pub fn positive(&self) -> &SparseVec {
        &self.positive
    }

    pub fn negatives(&self) -> &[SparseVec] {
        &self.negatives
    }

    /// Number of vectors in the frame.
    pub fn len(&self) -> usize {
        1 + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Every vector of the frame, positive first.
    pub fn vectors(&self) -> impl Iterator<Item = &SparseVec> {
        std::iter::once(&self.positive).chain(self.negatives.iter())
    }

    /// Union of the supports of the frame vectors.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.vectors().flat_map(|v| v.support()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Largest deviation of the Gram matrix from `diag(1, -1, ..., -1)`.
    pub fn orthonormality_defect(&self) -> f64 {
        let vs: Vec<&SparseVec> = self.vectors().collect();
        let mut worst: f64 = 0.0;
        for (a, u) in vs.iter().enumerate() {
            for (b, v) in vs.iter().enumerate().skip(a) {
                let target = match (a, b) {
                    (0, 0) => 1.0,
                    _ if a == b => -1.0,
                    _ => 0.0,
                };
                worst = worst.max((lorentz_form(u, v) - target).abs());
            }
        }
        worst
    }

    /// Lorentz-orthogonal projection of `x` onto the span of the frame.
    pub fn project(&self, x: &SparseVec) -> SparseVec {
        let mut out = self.positive.scale(lorentz_form(x, &self.positive));
        for n in &self.negatives {
            out = out.axpy(-lorentz_form(x, n), n);
        }
        out
    }
}

/// Gram–Schmidt in the Lorentz form, starting from a `Q`-positive pivot.
///
/// The positive vector of the frame is the pivot rescaled to `Q = 1`; each
/// further vector is made Lorentz-orthogonal to the previous ones and rescaled
/// to `Q = -1`. An input vector that is itself isotropic, or whose residual is
/// `Q`-degenerate, yields [`Error::DegenerateSpan`].
pub fn q_orthonormalize(vectors: &[SparseVec], pivot: &SparseVec) -> Result<LorentzFrame> {
    let tol = tolerance();
    let qp = quadratic(pivot);
    if qp <= tol.at_scale(pivot.norm_sq()) {
        return Err(Error::DegenerateSpan(qp));
    }
    let positive = pivot.scale(qp.sqrt().recip());
    let mut frame = LorentzFrame {
        positive,
        negatives: Vec::with_capacity(vectors.len()),
    };
    for v in vectors {
        let scale = v.norm_sq().max(f64::MIN_POSITIVE);
        let qv = quadratic(v);
        if qv.abs() <= tol.at_scale(scale) {
            return Err(Error::DegenerateSpan(qv));
        }
        // two passes of modified Gram–Schmidt
        let mut w = v.clone();
        for _ in 0..2 {
            w = w.axpy(-lorentz_form(&w, &frame.positive), &frame.positive);
            for n in &frame.negatives {
                w = w.axpy(lorentz_form(&w, n), n);
            }
        }
        let qw = quadratic(&w);
        if qw.abs() <= tol.at_scale(scale) || qw > 0.0 {
            return Err(Error::DegenerateSpan(qw));
        }
        frame.negatives.push(w.scale((-qw).sqrt().recip()));
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sparse_strategy(max_index: usize, max_len: usize) -> impl Strategy<Value = SparseVec> {
        prop::collection::vec((0..max_index, -3.0f64..3.0), 0..max_len)
            .prop_map(SparseVec::from_pairs)
    }

    #[test]
    fn j_examples() {
        assert_eq!(apply_j(&SparseVec::basis(0)), SparseVec::basis(0));
        assert_eq!(
            apply_j(&SparseVec::basis(3)),
            SparseVec::basis(3).scale(-1.0)
        );
        let x = SparseVec::from_pairs([(0, 1.0), (1, 2.0), (3, 5.0)]);
        let expected = SparseVec::from_pairs([(0, 1.0), (1, -2.0), (3, -5.0)]);
        assert_eq!(apply_j(&x), expected);
    }

    #[test]
    fn form_examples() {
        let e0 = SparseVec::basis(0);
        let e1 = SparseVec::basis(1);
        assert_eq!(lorentz_form(&e0, &e0), 1.0);
        assert_eq!(lorentz_form(&e1, &e1), -1.0);
        let x = SparseVec::from_pairs([(0, 1f64.cosh()), (1, 1f64.sinh())]);
        assert!((lorentz_form(&x, &e0) - 1.5430806348).abs() < 1e-10);
    }

    #[test]
    fn small_entries_are_dropped() {
        let v = SparseVec::from_pairs([(2, 1e-16), (4, 1.0), (4, -1.0), (5, 2.0)]);
        assert_eq!(v.support().collect::<Vec<_>>(), vec![5]);
    }

    #[test]
    fn orthonormalize_examples() {
        let e0 = SparseVec::basis(0);
        let e1 = SparseVec::basis(1);
        let f = q_orthonormalize(std::slice::from_ref(&e1), &e0).unwrap();
        assert_eq!(f.positive(), &e0);
        assert_eq!(f.negatives(), std::slice::from_ref(&e1));

        let tilted = SparseVec::from_pairs([(0, 2.0), (1, 1.0)]);
        let f = q_orthonormalize(&[tilted], &e0).unwrap();
        assert!(f.orthonormality_defect() < 1e-12);
        assert!((f.negatives()[0].get(1).abs() - 1.0).abs() < 1e-12);
        assert!(f.negatives()[0].get(0).abs() < 1e-12);

        let isotropic = SparseVec::from_pairs([(0, 1.0), (1, 1.0)]);
        assert!(matches!(
            q_orthonormalize(&[isotropic], &e0),
            Err(Error::DegenerateSpan(_))
        ));
        assert!(matches!(
            q_orthonormalize(&[e1.clone(), e1.scale(2.0)], &e0),
            Err(Error::DegenerateSpan(_))
        ));
        assert!(matches!(
            q_orthonormalize(&[], &e1),
            Err(Error::DegenerateSpan(_))
        ));
    }

    proptest! {
        #[test]
        fn form_is_symmetric(x in sparse_strategy(12, 8), y in sparse_strategy(12, 8)) {
            prop_assert!((lorentz_form(&x, &y) - lorentz_form(&y, &x)).abs() <= 1e-12);
        }

        #[test]
        fn j_is_an_involution(x in sparse_strategy(20, 10)) {
            prop_assert_eq!(apply_j(&apply_j(&x)), x.clone());
            prop_assert!((lorentz_form(&x, &x) - x.dot(&apply_j(&x))).abs() < 1e-12);
        }

        #[test]
        fn frames_are_orthonormal(
            vs in prop::collection::vec(sparse_strategy(16, 6), 1..6),
            spatial in sparse_strategy(16, 6),
        ) {
            let pivot = spatial.spatial().with_time(spatial.norm() + 1.0);
            if let Ok(frame) = q_orthonormalize(&vs, &pivot) {
                prop_assert!(frame.orthonormality_defect() < 1e-9);
                // every input lies in the span
                for v in &vs {
                    prop_assert!((&frame.project(v) - v).norm() < 1e-7 * (1.0 + v.norm()));
                }
            }
        }
    }
}
