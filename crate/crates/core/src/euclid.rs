//! `Isom(Hilbert) = O ⋉ Hilbert`: finite-rank orthogonal blocks with a sparse
//! translation, Hilbert horofunctions and their frustum action, and the
//! dense-conjugacy construction.
//!
//! Hilbert vectors live on indices `>= 1`, so that the ball map
//! [`sigma_hilbert`](crate::models::sigma_hilbert) lands in the Klein ball.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::horoboundary::FrustumPoint;
use crate::linalg::{
    block_components, block_product, expand_block, gram_schmidt, null_space,
    orthogonal_normal_form_components, union_indices, witt_extension, NormalBlock,
};
use crate::lorentz::{tolerance, SparseVec};
use crate::models::BallPoint;

/// An isometry `x -> A x + b` of the Hilbert space; `A` is an orthogonal block
/// on `active` and the identity elsewhere.
#[derive(Debug, Clone)]
pub struct EucIsometry {
    active: Vec<usize>,
    a: DMatrix<f64>,
    b: SparseVec,
}

impl EucIsometry {
    pub fn identity() -> Self {
        Self {
            active: Vec::new(),
            a: DMatrix::zeros(0, 0),
            b: SparseVec::zero(),
        }
    }

    pub fn translation(v: SparseVec) -> Result<Self> {
        if v.get(0) != 0.0 {
            return Err(Error::NonSpatial);
        }
        Ok(Self {
            b: v,
            ..Self::identity()
        })
    }

    /// Validates the index set and the orthogonality of `a`.
    pub fn new(active: Vec<usize>, a: DMatrix<f64>, b: SparseVec) -> Result<Self> {
        if active.first() == Some(&0) || b.get(0) != 0.0 {
            return Err(Error::NonSpatial);
        }
        if active.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidActiveSet(
                "indices must be strictly increasing".into(),
            ));
        }
        if a.nrows() != active.len() || a.ncols() != active.len() {
            return Err(Error::InvalidActiveSet(format!(
                "{} indices for a {}x{} block",
                active.len(),
                a.nrows(),
                a.ncols()
            )));
        }
        let g = Self { active, a, b };
        let defect = g.orthogonality_defect();
        if defect > tolerance().at_scale(1.0) {
            return Err(Error::NotOrthogonal(defect));
        }
        Ok(g)
    }

    pub(crate) fn from_parts(active: Vec<usize>, a: DMatrix<f64>, b: SparseVec) -> Self {
        Self { active, a, b }
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn rotation_block(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn translation_part(&self) -> &SparseVec {
        &self.b
    }

    /// The linear part `(A, 0)`.
    pub fn rotation_part(&self) -> EucIsometry {
        Self {
            b: SparseVec::zero(),
            ..self.clone()
        }
    }

    /// `max |A^T A - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.active.len();
        if n == 0 {
            return 0.0;
        }
        (self.a.transpose() * &self.a - DMatrix::identity(n, n)).amax()
    }

    /// `A x`.
    pub fn linear_apply(&self, x: &SparseVec) -> SparseVec {
        if self.active.is_empty() {
            return x.clone();
        }
        let ys = &self.a * x.to_dense_on(&self.active);
        let outside = x
            .iter()
            .filter(|(i, _)| self.active.binary_search(i).is_err());
        SparseVec::from_pairs(outside.chain(self.active.iter().copied().zip(ys.iter().copied())))
    }

    /// `A x + b`.
    pub fn apply(&self, x: &SparseVec) -> SparseVec {
        &self.linear_apply(x) + &self.b
    }

    fn block_on(&self, indices: &[usize]) -> DMatrix<f64> {
        expand_block(&self.a, &self.active, indices)
    }

    /// `self ∘ other = (A_1 A_2, A_1 b_2 + b_1)`.
    pub fn compose(&self, other: &EucIsometry) -> EucIsometry {
        let (active, a) = block_product(&self.a, &self.active, &other.a, &other.active);
        let b = &self.linear_apply(&other.b) + &self.b;
        Self { active, a, b }
    }

    /// `(A^T, -A^T b)`.
    pub fn inverse(&self) -> EucIsometry {
        let rot = Self {
            active: self.active.clone(),
            a: self.a.transpose(),
            b: SparseVec::zero(),
        };
        let b = -&rot.linear_apply(&self.b);
        Self { b, ..rot }
    }

    /// Largest entry of the difference of the two linear blocks, or of the
    /// translations, whichever is larger.
    pub fn max_entry_diff(&self, other: &EucIsometry) -> f64 {
        let active = union_indices([self.active.as_slice(), other.active.as_slice()]);
        let da = if active.is_empty() {
            0.0
        } else {
            (self.block_on(&active) - other.block_on(&active)).amax()
        };
        let db = (&self.b - &other.b)
            .iter()
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max);
        da.max(db)
    }

    /// `l(g) = |b_1|`, the norm of the translation component fixed by `A`.
    pub fn translation_length(&self) -> f64 {
        split_parallel(self).1.norm()
    }
}

/// Dense data of `A` and `b` on `active ∪ support(b)`, grouped by decoupled blocks.
fn components_with_translation(g: &EucIsometry) -> (Vec<usize>, DMatrix<f64>, Vec<Vec<usize>>) {
    let support: Vec<usize> = g.b.support().collect();
    let all = union_indices([g.active.as_slice(), support.as_slice()]);
    let a = g.block_on(&all);
    let comps = block_components(&a);
    (all, a, comps)
}

/// `b = b_0 + b_1` with `b_0` in `im(I - A)` and `b_1` in `ker(I - A)`.
pub fn split_parallel(g: &EucIsometry) -> (SparseVec, SparseVec) {
    let (all, a, comps) = components_with_translation(g);
    let b = g.b.to_dense_on(&all);
    let mut b1 = DVector::zeros(all.len());
    for idx in comps {
        let sub = a.select_rows(&idx).select_columns(&idx);
        let m = DMatrix::identity(idx.len(), idx.len()) - sub;
        let kernel = null_space(&m, 1e-9);
        let bs = DVector::from_iterator(idx.len(), idx.iter().map(|&i| b[i]));
        let proj = &kernel * (kernel.transpose() * bs);
        for (k, &i) in idx.iter().enumerate() {
            b1[i] = proj[k];
        }
    }
    let b0 = &b - &b1;
    (
        SparseVec::from_dense_on(&all, &b0),
        SparseVec::from_dense_on(&all, &b1),
    )
}

/// The minimum-norm fixed point of `x -> A x + b_0`.
fn elliptic_center(g: &EucIsometry, b0: &SparseVec) -> Result<SparseVec> {
    let (all, a, comps) = components_with_translation(g);
    let b = b0.to_dense_on(&all);
    let mut c = DVector::zeros(all.len());
    for idx in comps {
        let sub = a.select_rows(&idx).select_columns(&idx);
        let m = DMatrix::identity(idx.len(), idx.len()) - sub;
        let bs = DVector::from_iterator(idx.len(), idx.iter().map(|&i| b[i]));
        let sol = m
            .svd(true, true)
            .solve(&bs, 1e-9)
            .map_err(|e| Error::Numerical(e.to_string()))?;
        for (k, &i) in idx.iter().enumerate() {
            c[i] = sol[k];
        }
    }
    Ok(SparseVec::from_dense_on(&all, &c))
}

/// The Hilbert horofunction with frustum coordinates `(y, r)` at `z`:
/// `sqrt(r^2/(1-r^2) - 2<z, y>/sqrt(1-r^2) + |z|^2) - r/sqrt(1-r^2)` for
/// `r < 1` and `-<y, z>` on the sheet `r = 1`.
pub fn hilbert_horofunction(y: &BallPoint, r: f64, z: &SparseVec) -> Result<f64> {
    let norm = y.norm();
    if norm > r + tolerance().abs || !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidFrustumPair { norm, r });
    }
    if r == 1.0 {
        return Ok(-y.coords().dot(z));
    }
    if z.is_zero() {
        return Ok(0.0);
    }
    let k = (1.0 - r * r).sqrt().recip();
    let rho = r * k;
    let inner = (rho * rho - 2.0 * k * z.dot(y.coords()) + z.norm_sq()).max(0.0);
    Ok(inner.sqrt() - rho)
}

/// [`hilbert_horofunction`] at a frustum point.
pub fn hilbert_horofunction_at(f: &FrustumPoint, z: &SparseVec) -> Result<f64> {
    hilbert_horofunction(f.x(), f.r(), z)
}

/// The action of `g = tau_b ∘ A` on Hilbert horofunctions: `A` rotates the ball
/// component and keeps `r`; the translation `tau_v` sends `(x, r)` to
/// `((x/sqrt(1-r^2) + v)/sqrt(1+l^2), l/sqrt(1+l^2))` with
/// `l^2 = r^2/(1-r^2) + |v|^2 + 2<v, x/sqrt(1-r^2)>`, and fixes the sheet `r = 1`.
pub fn hilbert_frustum_action(g: &EucIsometry, f: &FrustumPoint) -> FrustumPoint {
    let x = g.linear_apply(f.x().coords());
    let r = f.r();
    if r >= 1.0 || g.b.is_zero() {
        return FrustumPoint::new_unchecked(x, r);
    }
    let k = (1.0 - r * r).sqrt().recip();
    let w = x.scale(k);
    let v = &g.b;
    let l2 = (r * k).powi(2) + v.norm_sq() + 2.0 * v.dot(&w);
    let l = l2.max(0.0).sqrt();
    let s = (1.0 + l2).sqrt().recip();
    FrustumPoint::new_unchecked((&w + v).scale(s), l * s)
}

/// An orthogonal `A'` agreeing with the linear part of `a` on `points`, equal
/// to the identity off the span of the points and their images.
pub fn finite_rank_match(a: &EucIsometry, points: &[SparseVec]) -> Result<EucIsometry> {
    if points.is_empty() {
        return Ok(EucIsometry::identity());
    }
    let images: Vec<SparseVec> = points.iter().map(|p| a.linear_apply(p)).collect();
    let supports: Vec<Vec<usize>> = points
        .iter()
        .chain(images.iter())
        .map(|v| v.support().collect())
        .collect();
    let active = union_indices(supports.iter().map(|s| s.as_slice()));
    if active.is_empty() {
        return Ok(EucIsometry::identity());
    }
    if active[0] == 0 {
        return Err(Error::NonSpatial);
    }
    let sig = DVector::from_element(active.len(), 1.0);
    let dense: Vec<DVector<f64>> = points.iter().map(|p| p.to_dense_on(&active)).collect();
    let sources = gram_schmidt(&dense, &sig);
    let targets: Vec<DVector<f64>> = sources
        .iter()
        .map(|s| {
            a.linear_apply(&SparseVec::from_dense_on(&active, s))
                .to_dense_on(&active)
        })
        .collect();
    let block = witt_extension(&sources, &targets, &sig)?;
    Ok(EucIsometry::from_parts(active, block, SparseVec::zero()))
}

/// Block-diagonal rotation on indices `1, 2, ...`: the `n`-th block has
/// dimension `block_dims[n]` and rotates each of its coordinate planes by
/// `angles[n]`.
pub fn build_dense_u(angles: &[f64], block_dims: &[usize]) -> Result<EucIsometry> {
    if angles.len() != block_dims.len() {
        return Err(Error::LengthMismatch(angles.len(), block_dims.len()));
    }
    if let Some(&d) = block_dims.iter().find(|&&d| d == 0 || d % 2 == 1) {
        return Err(Error::OddBlockDimension(d));
    }
    let n: usize = block_dims.iter().sum();
    let mut a = DMatrix::identity(n, n);
    let mut offset = 0;
    for (&theta, &d) in angles.iter().zip(block_dims) {
        let (c, s) = (theta.cos(), theta.sin());
        for p in (offset..offset + d).step_by(2) {
            a[(p, p)] = c;
            a[(p + 1, p + 1)] = c;
            a[(p + 1, p)] = s;
            a[(p, p + 1)] = -s;
        }
        offset += d;
    }
    Ok(EucIsometry::from_parts(
        (1..=n).collect(),
        a,
        SparseVec::zero(),
    ))
}

/// `u -> cos(angle) u + sin(angle) w`, `w -> -sin(angle) u + cos(angle) w`.
#[derive(Debug, Clone)]
struct Plane {
    u: SparseVec,
    w: SparseVec,
    angle: f64,
}

impl Plane {
    fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.u.support().chain(self.w.support())
    }
}

/// Rotation planes and lone `-1` directions of an orthogonal block.
fn planes_of(g: &EucIsometry) -> Result<(Vec<Plane>, Vec<SparseVec>)> {
    let mut planes = Vec::new();
    let mut flips = Vec::new();
    for (idx, blocks) in orthogonal_normal_form_components(&g.a)? {
        let indices: Vec<usize> = idx.iter().map(|&k| g.active[k]).collect();
        let to_sparse = |v: &DVector<f64>| SparseVec::from_dense_on(&indices, v);
        for b in blocks {
            match b {
                NormalBlock::Fixed(_) => {}
                NormalBlock::Flip(v) => flips.push(to_sparse(&v)),
                NormalBlock::Rotation { u, w, angle } => planes.push(Plane {
                    u: to_sparse(&u),
                    w: to_sparse(&w),
                    angle,
                }),
            }
        }
    }
    // two -1 directions form a rotation by pi
    let mut singles = Vec::new();
    let mut it = flips.into_iter();
    while let Some(v) = it.next() {
        match it.next() {
            Some(w) => planes.push(Plane {
                u: v,
                w,
                angle: std::f64::consts::PI,
            }),
            None => singles.push(v),
        }
    }
    Ok((planes, singles))
}

/// Outcome of [`approximate_by_conjugate`].
#[derive(Debug, Clone)]
pub struct ConjugacyReport {
    /// `max_i |g(x_i) - h(x_i)|`.
    pub error: f64,
    /// `sqrt(5) * epsilon`.
    pub bound: f64,
    /// `T` with `h = T U T^{-1}`.
    pub conjugator: EucIsometry,
    /// `|alpha_j - lambda_{i(j)}|` for every matched rotation plane of `g`.
    pub angle_errors: Vec<f64>,
    /// Rotation angle and radius replacing the translation part, if any.
    pub translation_angle: Option<f64>,
    pub translation_radius: Option<f64>,
}

struct FreshIndices(usize);

impl FreshIndices {
    fn next(&mut self) -> SparseVec {
        self.0 += 1;
        SparseVec::basis(self.0)
    }
}

/// Displacement error of the rotation of angle `alpha` and radius
/// `|b_1| / sin(alpha)` against the translation by `b_1`, at a point whose
/// coordinate along `b_1` (from the center line) is `lambda`.
fn rotation_vs_translation(b1_norm: f64, alpha: f64, lambda: f64) -> f64 {
    let radius = b1_norm / alpha.sin();
    let one_minus_cos = 2.0 * (alpha / 2.0).sin().powi(2);
    let along_u = radius * one_minus_cos + lambda * alpha.sin();
    let along_b = lambda * one_minus_cos;
    along_u.hypot(along_b)
}

/// An element `h = T U T^{-1}` of the conjugacy class of `u` with
/// `|g(x_i) - h(x_i)| < sqrt(5) epsilon` on the given points.
///
/// The elliptic part of `g` is matched plane by plane with rotation planes of
/// `u` whose angles are within `epsilon / k` (`k` the number of points); the
/// translation part `b_1` is replaced by a rotation of small angle taken from
/// the angles of `u`, centered far away along a fresh direction.
pub fn approximate_by_conjugate(
    u: &EucIsometry,
    g: &EucIsometry,
    points: &[SparseVec],
    epsilon: f64,
) -> Result<(EucIsometry, ConjugacyReport)> {
    let bound = 5f64.sqrt() * epsilon;
    let trivial = |h: EucIsometry| {
        let error = max_error(g, &h, points);
        (
            h,
            ConjugacyReport {
                error,
                bound,
                conjugator: EucIsometry::identity(),
                angle_errors: Vec::new(),
                translation_angle: None,
                translation_radius: None,
            },
        )
    };
    if points.is_empty() || g.max_entry_diff(u) == 0.0 {
        return Ok(trivial(u.clone()));
    }
    if points.iter().chain([&g.b]).any(|p| p.get(0) != 0.0) {
        return Err(Error::NonSpatial);
    }
    let k = points.len() as f64;
    let snap_tol = epsilon / k;

    let (u_planes, u_singles) = planes_of(u)?;
    let (b0, b1) = split_parallel(g);
    let c0 = elliptic_center(g, &b0)?;
    let (g_planes, g_singles) = planes_of(&g.rotation_part())?;

    let max_index = points
        .iter()
        .chain([&g.b, &c0])
        .filter_map(|v| v.max_index())
        .chain(g.active.iter().copied())
        .chain(u.active.iter().copied())
        .max()
        .unwrap_or(0);
    let mut fresh = FreshIndices(max_index);

    let mut used = vec![false; u_planes.len()];
    let nearest_free = |theta: f64, used: &mut Vec<bool>| -> Result<(usize, f64)> {
        let best = u_planes
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, p)| (i, (p.angle - theta).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, err)) if err < snap_tol => {
                used[i] = true;
                Ok((i, err))
            }
            _ => Err(Error::InsufficientAngleDensity(format!(
                "no free angle within {snap_tol:e} of {theta}"
            ))),
        }
    };

    // (source in u, target in h) pairs
    let mut sources: Vec<SparseVec> = Vec::new();
    let mut targets: Vec<SparseVec> = Vec::new();
    let mut angle_errors = Vec::new();

    // planes where the points sit far from the center get the closest angles
    let radius = |p: &Plane| {
        points
            .iter()
            .map(|x| {
                let d = x - &c0;
                d.dot(&p.u).hypot(d.dot(&p.w))
            })
            .fold(0.0, f64::max)
    };
    let mut sorted_planes: Vec<(f64, &Plane)> = g_planes.iter().map(|p| (radius(p), p)).collect();
    sorted_planes.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sorted_planes: Vec<&Plane> = sorted_planes.into_iter().map(|(_, p)| p).collect();
    for p in &sorted_planes {
        let (i, err) = nearest_free(p.angle, &mut used)?;
        angle_errors.push(err);
        push_plane(
            &u_planes[i],
            p.u.clone(),
            p.w.clone(),
            &mut sources,
            &mut targets,
        );
    }
    let mut u_singles_left: Vec<SparseVec> = u_singles.clone();
    for v in &g_singles {
        if let Some(s) = u_singles_left.pop() {
            sources.push(s);
            targets.push(v.clone());
        } else {
            let (i, err) = nearest_free(std::f64::consts::PI, &mut used)?;
            angle_errors.push(err);
            push_plane(
                &u_planes[i],
                v.clone(),
                fresh.next(),
                &mut sources,
                &mut targets,
            );
        }
    }

    let mut center = c0.clone();
    let mut translation_angle = None;
    let mut translation_radius = None;
    let b1_norm = b1.norm();
    if b1_norm > tolerance().abs {
        let bhat = b1.scale(b1_norm.recip());
        let lambdas: Vec<f64> = points.iter().map(|x| (x - &c0).dot(&bhat)).collect();
        let predicted = |alpha: f64| {
            lambdas
                .iter()
                .map(|&l| rotation_vs_translation(b1_norm, alpha, l))
                .fold(0.0, f64::max)
        };
        let choice = u_planes
            .iter()
            .enumerate()
            .filter(|(i, p)| !used[*i] && p.angle > 0.0 && p.angle <= std::f64::consts::FRAC_PI_2)
            .map(|(i, p)| (i, predicted(p.angle)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let Some((i, _)) = choice else {
            return Err(Error::InsufficientAngleDensity(
                "no free angle in (0, pi/2] for the translation part".into(),
            ));
        };
        used[i] = true;
        let alpha = u_planes[i].angle;
        let radius = b1_norm / alpha.sin();
        let axis = fresh.next();
        // source u -> bhat, source w -> axis: bhat turns toward axis, axis toward -bhat
        push_plane(
            &u_planes[i],
            bhat.clone(),
            axis.clone(),
            &mut sources,
            &mut targets,
        );
        center = center.axpy(radius, &axis);
        translation_angle = Some(alpha);
        translation_radius = Some(radius);
    }

    // unused planes of u meeting the support of the targets move to fresh indices
    let target_support: BTreeSet<usize> = targets.iter().flat_map(|t| t.support()).collect();
    for (i, p) in u_planes.iter().enumerate() {
        if !used[i] && p.support().any(|j| target_support.contains(&j)) {
            push_plane(p, fresh.next(), fresh.next(), &mut sources, &mut targets);
        }
    }
    for s in u_singles_left {
        if s.support().any(|j| target_support.contains(&j)) {
            sources.push(s);
            targets.push(fresh.next());
        }
    }

    let supports: Vec<Vec<usize>> = sources
        .iter()
        .chain(targets.iter())
        .map(|v| v.support().collect())
        .collect();
    let active = union_indices(supports.iter().map(|s| s.as_slice()));
    let sig = DVector::from_element(active.len(), 1.0);
    let dense = |vs: &[SparseVec]| -> Vec<DVector<f64>> {
        vs.iter().map(|v| v.to_dense_on(&active)).collect()
    };
    let l = witt_extension(&dense(&sources), &dense(&targets), &sig)?;
    let conjugator = EucIsometry::from_parts(active, l, center);
    let h = conjugator.compose(u).compose(&conjugator.inverse());
    let error = max_error(g, &h, points);
    if error.is_nan() || error >= bound {
        return Err(Error::InsufficientAngleDensity(format!(
            "achieved error {error:e} is not below {bound:e}"
        )));
    }
    Ok((
        h,
        ConjugacyReport {
            error,
            bound,
            conjugator,
            angle_errors,
            translation_angle,
            translation_radius,
        },
    ))
}

fn push_plane(
    src: &Plane,
    u_t: SparseVec,
    w_t: SparseVec,
    sources: &mut Vec<SparseVec>,
    targets: &mut Vec<SparseVec>,
) {
    sources.push(src.u.clone());
    sources.push(src.w.clone());
    targets.push(u_t);
    targets.push(w_t);
}

fn max_error(g: &EucIsometry, h: &EucIsometry, points: &[SparseVec]) -> f64 {
    points
        .iter()
        .map(|x| g.apply(x).distance(&h.apply(x)))
        .fold(0.0, f64::max)
}

/// A rotation replacing the translation by `b1` on `points` up to
/// `sqrt(5) epsilon`.
///
/// The center is `R u` for a unit `u` on a fresh index, the plane is spanned
/// by `u` and `b1`, the angle is `arcsin(|b1| / R)`, and `R` is the smallest
/// power of two with `R >= |b1|` meeting the radius condition
/// `R (1 - 1/sqrt(1 + r^2/R^2)) < epsilon` as well as the per-point bounds
/// `R(1 - cos a) < epsilon`, `|lambda| sin a < epsilon`, `|lambda|(1 - cos a) < epsilon`
/// for the coordinates `lambda` of the points along `b1`.
pub fn translation_by_rotation(
    b1: &SparseVec,
    points: &[SparseVec],
    epsilon: f64,
) -> Result<EucIsometry> {
    let n = b1.norm();
    if n == 0.0 {
        return Err(Error::ZeroTranslation);
    }
    if b1.get(0) != 0.0 || points.iter().any(|p| p.get(0) != 0.0) {
        return Err(Error::NonSpatial);
    }
    let bhat = b1.scale(n.recip());
    let lambdas: Vec<f64> = points.iter().map(|x| x.dot(&bhat)).collect();
    let lam_max = lambdas.iter().fold(n, |m, l| m.max(l.abs()));
    let r = lam_max * n / epsilon;
    let admissible = |radius: f64| {
        let alpha = (n / radius).min(1.0).asin();
        let one_minus_cos = 2.0 * (alpha / 2.0).sin().powi(2);
        let radial = radius * (1.0 - (1.0 + (r / radius).powi(2)).sqrt().recip());
        radial < epsilon
            && radius * one_minus_cos < epsilon
            && lambdas
                .iter()
                .all(|l| l.abs() * alpha.sin() < epsilon && l.abs() * one_minus_cos < epsilon)
    };
    let mut radius = 2f64.powi(n.log2().ceil() as i32);
    if radius < n {
        radius *= 2.0;
    }
    let mut guard = 0;
    while !admissible(radius) {
        radius *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Numerical("no admissible radius".into()));
        }
    }
    let alpha = (n / radius).min(1.0).asin();
    let max_index = points
        .iter()
        .chain([b1])
        .filter_map(|v| v.max_index())
        .max()
        .unwrap_or(0);
    let axis = SparseVec::basis(max_index + 1);
    Ok(rotation_about(&axis.scale(radius), &bhat, &axis, alpha))
}

/// Rotation about `center` in the plane of orthonormal `p`, `q`:
/// `p -> cos(alpha) p + sin(alpha) q`.
fn rotation_about(center: &SparseVec, p: &SparseVec, q: &SparseVec, alpha: f64) -> EucIsometry {
    let supports: Vec<Vec<usize>> = [p, q, center]
        .iter()
        .map(|v| v.support().collect())
        .collect();
    let active = union_indices(supports.iter().map(|s| s.as_slice()));
    let (pd, qd) = (p.to_dense_on(&active), q.to_dense_on(&active));
    let (c, s) = (alpha.cos(), alpha.sin());
    let n = active.len();
    let a = DMatrix::identity(n, n)
        + (&pd * pd.transpose() + &qd * qd.transpose()) * (c - 1.0)
        + (&qd * pd.transpose() - &pd * qd.transpose()) * s;
    let rot = EucIsometry::from_parts(active, a, SparseVec::zero());
    // x -> A(x - c) + c
    let b = center - &rot.linear_apply(center);
    EucIsometry { b, ..rot }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn v(pairs: &[(usize, f64)]) -> SparseVec {
        SparseVec::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn group_examples() {
        let t = EucIsometry::translation(v(&[(2, 1.5)])).unwrap();
        assert_eq!(t.apply(&SparseVec::zero()), v(&[(2, 1.5)]));
        let g = build_dense_u(&[0.7], &[2]).unwrap().compose(&t);
        assert!(
            g.compose(&g.inverse())
                .max_entry_diff(&EucIsometry::identity())
                < 1e-15
        );
        assert!(EucIsometry::translation(SparseVec::basis(0)).is_err());
        assert!(EucIsometry::new(
            vec![1, 2],
            DMatrix::from_element(2, 2, 1.0),
            SparseVec::zero()
        )
        .is_err());
    }

    #[test]
    fn split_examples() {
        let t = EucIsometry::translation(v(&[(1, 1.0), (4, 2.0)])).unwrap();
        let (b0, b1) = split_parallel(&t);
        assert!(b0.is_zero());
        assert_eq!(b1, v(&[(1, 1.0), (4, 2.0)]));
        let half = build_dense_u(&[PI], &[2]).unwrap();
        let g = EucIsometry::translation(v(&[(1, 0.3), (2, -0.5)]))
            .unwrap()
            .compose(&half);
        let (b0, b1) = split_parallel(&g);
        assert!(b1.norm() < 1e-15);
        assert!((b0.get(1) - 0.3).abs() < 1e-15);
        assert_eq!(g.translation_length(), 0.0);
    }

    #[test]
    fn horofunction_examples() {
        let y = BallPoint::closed(v(&[(1, 0.3), (2, 0.4)])).unwrap();
        let z = v(&[(1, -1.0), (3, 2.0)]);
        assert_eq!(
            hilbert_horofunction(&y, 0.8, &SparseVec::zero()).unwrap(),
            0.0
        );
        assert!((hilbert_horofunction(&y, 1.0, &z).unwrap() - 0.3).abs() < 1e-15);
        let p = crate::models::sigma_hilbert_inv(&y).unwrap();
        let expect = p.distance(&z) - p.norm();
        assert!((hilbert_horofunction(&y, 0.5, &z).unwrap() - expect).abs() < 1e-12);
        assert!(matches!(
            hilbert_horofunction(&y, 0.4, &z),
            Err(Error::InvalidFrustumPair { .. })
        ));
    }

    #[test]
    fn translation_action_examples() {
        let vv = v(&[(1, 2.0), (2, 1.0)]);
        let t = EucIsometry::translation(vv.clone()).unwrap();
        let origin = FrustumPoint::new(BallPoint::origin(), 0.0).unwrap();
        let moved = hilbert_frustum_action(&t, &origin);
        let s = crate::models::sigma_hilbert(&vv).unwrap();
        assert!(moved.x().coords().distance(s.coords()) < 1e-15);
        assert!((moved.r() - s.norm()).abs() < 1e-15);
        let top = FrustumPoint::new(BallPoint::origin(), 1.0).unwrap();
        assert_eq!(hilbert_frustum_action(&t, &top), top);
    }

    #[test]
    fn dense_u_examples() {
        assert!(
            build_dense_u(&[0.0, 0.0], &[2, 4])
                .unwrap()
                .max_entry_diff(&EucIsometry::identity())
                == 0.0
        );
        assert!(matches!(
            build_dense_u(&[0.1], &[2, 2]),
            Err(Error::LengthMismatch(1, 2))
        ));
        assert!(matches!(
            build_dense_u(&[0.1], &[3]),
            Err(Error::OddBlockDimension(3))
        ));
        let half = build_dense_u(&[PI], &[2]).unwrap();
        assert!((half.apply(&SparseVec::basis(1)).get(1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn finite_rank_examples() {
        let a = build_dense_u(&[0.4, 1.1, 2.0], &[2, 2, 2]).unwrap();
        assert!(finite_rank_match(&a, &[]).unwrap().active().is_empty());
        let x = v(&[(1, 0.6), (3, 0.8)]);
        let m = finite_rank_match(&a, std::slice::from_ref(&x)).unwrap();
        assert!(m.apply(&x).distance(&a.apply(&x)) < 1e-12);
        assert!(m.active().iter().all(|i| [1, 2, 3, 4].contains(i)));
        assert_eq!(m.apply(&SparseVec::basis(9)), SparseVec::basis(9));
    }

    #[test]
    fn translation_by_rotation_examples() {
        let b1 = v(&[(2, 1.0)]);
        let eps = 0.05;
        let rho = translation_by_rotation(&b1, &[SparseVec::zero()], eps).unwrap();
        let image = rho.apply(&SparseVec::zero());
        assert!((image.get(2) - 1.0).abs() < 1e-12);
        assert!(image.get(3) > 0.0 && image.get(3) < eps);
        assert!(matches!(
            translation_by_rotation(&SparseVec::zero(), &[], eps),
            Err(Error::ZeroTranslation)
        ));
        let big = translation_by_rotation(&b1, &[SparseVec::zero()], 10.0).unwrap();
        assert!((big.apply(&SparseVec::zero()).get(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugate_of_u_is_u() {
        let u = build_dense_u(&[0.5, 1.5], &[2, 2]).unwrap();
        let pts = vec![v(&[(1, 1.0)]), v(&[(3, 0.5)])];
        let (h, report) = approximate_by_conjugate(&u, &u, &pts, 0.05).unwrap();
        assert_eq!(report.error, 0.0);
        assert_eq!(h.max_entry_diff(&u), 0.0);
    }
}
