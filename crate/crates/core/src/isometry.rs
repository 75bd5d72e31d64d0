//! `Isom(H)` as finite-rank perturbations of the identity: a Lorentz block on a
//! finite active index set containing `0`, identity elsewhere.

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::linalg::{
    block_product, expand_block, gram_schmidt, lorentz_signature, null_space,
    orthogonal_normal_form_split, union_indices, witt_extension, NormalBlock,
};
use crate::lorentz::{lorentz_form, quadratic, tolerance, LorentzFrame, SparseVec};
use crate::models::{
    dist, geodesic_through, initial_vector, midpoint, Geodesic, HPoint, IdealPoint,
};

/// Compositions between two automatic re-projections of the block.
const RENORMALIZE_EVERY: u32 = 64;

/// Threshold on singular values of `B - I` when extracting fixed vectors.
const FIXED_VECTOR_TOL: f64 = 1e-8;

/// Conjugacy type of an isometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IsometryClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// An isometry of `H`: `block` acts on the coordinates in `active`, the
/// identity on every other coordinate.
#[derive(Debug, Clone)]
pub struct HypIsometry {
    active: Vec<usize>,
    block: DMatrix<f64>,
    compositions: u32,
}

impl HypIsometry {
    pub fn identity() -> Self {
        Self {
            active: vec![0],
            block: DMatrix::identity(1, 1),
            compositions: 0,
        }
    }

    /// Validates the active set, the Lorentz orthogonality of the block and
    /// preservation of the upper sheet.
    pub fn from_block(active: Vec<usize>, block: DMatrix<f64>) -> Result<Self> {
        if active.first() != Some(&0) {
            return Err(Error::InvalidActiveSet("index 0 must be active".into()));
        }
        if active.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidActiveSet(
                "indices must be strictly increasing".into(),
            ));
        }
        if block.nrows() != active.len() || block.ncols() != active.len() {
            return Err(Error::InvalidActiveSet(format!(
                "{} indices for a {}x{} block",
                active.len(),
                block.nrows(),
                block.ncols()
            )));
        }
        let g = Self::from_parts(active, block);
        let defect = g.orthogonality_defect();
        if defect > tolerance().at_scale(g.block.norm_squared()) {
            return Err(Error::NotOrthogonal(defect));
        }
        if g.block[(0, 0)] <= 0.0 {
            return Err(Error::NotSheetPreserving);
        }
        Ok(g)
    }

    pub(crate) fn from_parts(active: Vec<usize>, block: DMatrix<f64>) -> Self {
        Self {
            active,
            block,
            compositions: 0,
        }
    }

    /// `x -> x + sum coef * a * (x, b)` over the given terms.
    pub(crate) fn from_terms(terms: &[(f64, &SparseVec, &SparseVec)]) -> Self {
        let supports: Vec<Vec<usize>> = terms
            .iter()
            .flat_map(|(_, a, b)| [a.support().collect(), b.support().collect()])
            .collect();
        let active = union_indices(
            std::iter::once(&[0usize][..]).chain(supports.iter().map(|s| s.as_slice())),
        );
        let sig = lorentz_signature(&active);
        let mut block = DMatrix::identity(active.len(), active.len());
        for (coef, a, b) in terms {
            let a = a.to_dense_on(&active);
            let row = b.to_dense_on(&active).component_mul(&sig);
            block += (a * row.transpose()) * *coef;
        }
        Self::from_parts(active, block)
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn block(&self) -> &DMatrix<f64> {
        &self.block
    }

    /// `max |B^T J B - J|` over the block.
    pub fn orthogonality_defect(&self) -> f64 {
        let j = DMatrix::from_diagonal(&lorentz_signature(&self.active));
        (self.block.transpose() * &j * &self.block - j).amax()
    }

    /// The block re-expressed on a superset of the active set.
    pub fn block_on(&self, indices: &[usize]) -> DMatrix<f64> {
        expand_block(&self.block, &self.active, indices)
    }

    pub fn apply_vec(&self, x: &SparseVec) -> SparseVec {
        let xs = x.to_dense_on(&self.active);
        let ys = &self.block * xs;
        let outside = x
            .iter()
            .filter(|(i, _)| self.active.binary_search(i).is_err());
        SparseVec::from_pairs(outside.chain(self.active.iter().copied().zip(ys.iter().copied())))
    }

    pub fn apply(&self, x: &HPoint) -> HPoint {
        HPoint::new_unchecked(self.apply_vec(x.coords()))
    }

    /// Projective action on the boundary, renormalized to `x_0 = 1`.
    pub fn apply_ideal(&self, xi: &IdealPoint) -> IdealPoint {
        let v = self.apply_vec(xi.coords());
        let x0 = v.get(0);
        IdealPoint::from_direction_unchecked(v.spatial().scale(x0.recip()))
    }

    /// `self ∘ other`, acting on the union of the active sets.
    pub fn compose(&self, other: &HypIsometry) -> HypIsometry {
        let (active, block) = block_product(&self.block, &self.active, &other.block, &other.active);
        let compositions = self.compositions + other.compositions + 1;
        let g = Self {
            active,
            block,
            compositions,
        };
        if compositions >= RENORMALIZE_EVERY {
            g.renormalize()
        } else {
            g
        }
    }

    /// `J B^T J` on the same active set.
    pub fn inverse(&self) -> HypIsometry {
        let sig = lorentz_signature(&self.active);
        let mut inv = self.block.transpose();
        for r in 0..inv.nrows() {
            for c in 0..inv.ncols() {
                inv[(r, c)] *= sig[r] * sig[c];
            }
        }
        Self {
            active: self.active.clone(),
            block: inv,
            compositions: self.compositions,
        }
    }

    /// Re-projects the block onto the Lorentz group by Gram–Schmidt on its
    /// columns, image of `e_0` first.
    pub fn renormalize(&self) -> HypIsometry {
        let sig = lorentz_signature(&self.active);
        let cols: Vec<DVector<f64>> = self.block.column_iter().map(|c| c.into_owned()).collect();
        let ortho = gram_schmidt(&cols, &sig);
        if ortho.len() != cols.len() {
            return Self {
                compositions: 0,
                ..self.clone()
            };
        }
        let mut block = DMatrix::from_columns(&ortho);
        if block[(0, 0)] < 0.0 {
            block.column_mut(0).neg_mut();
        }
        Self {
            active: self.active.clone(),
            block,
            compositions: 0,
        }
    }

    /// Largest entry of the difference of the two blocks on the union of active sets.
    pub fn max_entry_diff(&self, other: &HypIsometry) -> f64 {
        let active = union_indices([self.active.as_slice(), other.active.as_slice()]);
        (self.block_on(&active) - other.block_on(&active)).amax()
    }

    /// Deviation from the identity.
    pub fn identity_defect(&self) -> f64 {
        (&self.block - DMatrix::identity(self.active.len(), self.active.len())).amax()
    }

    /// Conjugacy type from the fixed vectors of the block: a `Q`-positive fixed
    /// vector means elliptic, an isotropic one parabolic, none hyperbolic.
    pub fn classify(&self) -> IsometryClass {
        let n = self.active.len();
        let scale = self.block.amax().max(1.0);
        let m = &self.block - DMatrix::identity(n, n);
        let kernel = null_space(&m, FIXED_VECTOR_TOL * scale);
        if kernel.ncols() == 0 {
            return IsometryClass::Hyperbolic;
        }
        let j = DMatrix::from_diagonal(&lorentz_signature(&self.active));
        let gram = kernel.transpose() * j * &kernel;
        let eig = gram.symmetric_eigen();
        let top = eig.eigenvalues.max();
        if top > FIXED_VECTOR_TOL * scale {
            IsometryClass::Elliptic
        } else if top >= -FIXED_VECTOR_TOL * scale {
            IsometryClass::Parabolic
        } else {
            IsometryClass::Hyperbolic
        }
    }

    /// Largest modulus of an eigenvalue of the block.
    pub fn spectral_radius(&self) -> Result<f64> {
        let schur = Schur::try_new(self.block.clone(), 1e-15, 100_000)
            .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
        Ok(schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// `l(g) = inf d(gx, x)`: `log` of the spectral radius for hyperbolic
    /// elements, `0` for neutral ones.
    pub fn translation_length(&self) -> f64 {
        match self.classify() {
            IsometryClass::Hyperbolic => self
                .spectral_radius()
                .map(|r| r.ln().max(0.0))
                .unwrap_or(f64::NAN),
            _ => 0.0,
        }
    }

    /// Whether `g^2` is the identity.
    pub fn is_involution(&self, tol: f64) -> bool {
        (&self.block * &self.block - DMatrix::identity(self.active.len(), self.active.len())).amax()
            <= tol
    }
}

/// The hyperbolic translation by `t` along `gamma`.
pub fn transvection(gamma: &Geodesic, t: f64) -> HypIsometry {
    if t == 0.0 {
        return HypIsometry::identity();
    }
    let b = gamma.base().coords();
    let d = gamma.direction();
    let (c, s) = (t.cosh() - 1.0, t.sinh());
    HypIsometry::from_terms(&[(c, b, b), (-c, d, d), (s, d, b), (-s, b, d)])
}

/// The transvection along the geodesic through `x` and `y` taking `x` to `y`.
pub fn transvection_between(x: &HPoint, y: &HPoint) -> HypIsometry {
    match geodesic_through(x, y) {
        Ok(gamma) => transvection(&gamma, dist(x, y)),
        Err(_) => HypIsometry::identity(),
    }
}

/// Rotation by `theta` in the plane of two Lorentz-orthonormal spacelike
/// vectors `u`, `w` (`Q = -1`), fixing their Lorentz-orthogonal complement:
/// `u -> cos(theta) u + sin(theta) w`.
pub fn plane_rotation(u: &SparseVec, w: &SparseVec, theta: f64) -> HypIsometry {
    // with c_u = -(x, u) and c_w = -(x, w):
    // x + (cos - 1)(c_u u + c_w w) + sin (c_u w - c_w u)
    let (c, s) = (theta.cos() - 1.0, theta.sin());
    HypIsometry::from_terms(&[(-c, u, u), (-c, w, w), (-s, w, u), (s, u, w)])
}

/// A spacelike unit vector on an index beyond every given support.
fn fresh_direction<'a, I: IntoIterator<Item = &'a SparseVec>>(vs: I) -> SparseVec {
    let m = vs
        .into_iter()
        .filter_map(|v| v.max_index())
        .max()
        .unwrap_or(0);
    SparseVec::basis(m + 1)
}

/// Unit vector in the plane of `u` and `v` orthogonal to `u` (all spacelike,
/// `Q = -1`), with a fresh direction when they are parallel.
fn complete_plane(u: &SparseVec, v: &SparseVec, extra: &[&SparseVec]) -> SparseVec {
    let c = -lorentz_form(u, v);
    let w = v.axpy(-c, u);
    let q = -quadratic(&w);
    if q > 1e-24 {
        return w.scale(q.sqrt().recip());
    }
    let mut all: Vec<&SparseVec> = vec![u, v];
    all.extend_from_slice(extra);
    fresh_direction(all)
}

/// A rotation fixing `p` with `a -> b`, acting in the plane through `p`, `a`, `b`.
pub fn rotation_mapping(p: &HPoint, a: &HPoint, b: &HPoint) -> Result<HypIsometry> {
    let (ra, rb) = (dist(p, a), dist(p, b));
    if !tolerance().close(ra, rb) {
        return Err(Error::UnequalRadii(ra, rb));
    }
    if dist(a, b) <= tolerance().abs || ra <= tolerance().abs {
        return Ok(HypIsometry::identity());
    }
    let u = initial_vector(p, a)?;
    let v = initial_vector(p, b)?;
    let cos = (-lorentz_form(&u, &v)).clamp(-1.0, 1.0);
    let w = complete_plane(&u, &v, &[p.coords()]);
    // the angle from u to v measured toward w
    let sin = -lorentz_form(&v, &w);
    let theta = sin.atan2(cos);
    Ok(plane_rotation(&u, &w, theta))
}

/// The involution fixing the span `E` of `frame` and negating its
/// Lorentz-orthogonal complement inside the active set `{0} ∪ support(frame)`.
pub fn symmetry(frame: &LorentzFrame) -> HypIsometry {
    symmetry_on(frame, &[])
}

/// As [`symmetry`], with the complement negated on `extra` indices as well.
pub fn symmetry_on(frame: &LorentzFrame, extra: &[usize]) -> HypIsometry {
    let support = frame.support();
    let active = union_indices([&[0usize][..], support.as_slice(), extra]);
    let sig = lorentz_signature(&active);
    let n = active.len();
    let mut block = -DMatrix::identity(n, n);
    let p = frame.positive().to_dense_on(&active);
    block += (&p * p.component_mul(&sig).transpose()) * 2.0;
    for v in frame.negatives() {
        let v = v.to_dense_on(&active);
        block -= (&v * v.component_mul(&sig).transpose()) * 2.0;
    }
    HypIsometry::from_parts(active, block)
}

/// The point symmetry at `m` on the given indices.
pub fn point_symmetry(m: &HPoint, extra: &[usize]) -> HypIsometry {
    let frame = crate::lorentz::q_orthonormalize(&[], m.coords())
        .expect("points of the sheet are timelike");
    symmetry_on(&frame, extra)
}

/// A block isometry `h` agreeing with `g` on `points`, supported on the span of
/// `e_0`, the points and their images.
pub fn match_pointwise(g: &HypIsometry, points: &[HPoint]) -> Result<HypIsometry> {
    if points.is_empty() {
        return Ok(HypIsometry::identity());
    }
    let images: Vec<SparseVec> = points.iter().map(|p| g.apply_vec(p.coords())).collect();
    let supports: Vec<Vec<usize>> = points
        .iter()
        .map(|p| p.coords().support().collect())
        .chain(images.iter().map(|v| v.support().collect()))
        .collect();
    let active =
        union_indices(std::iter::once(&[0usize][..]).chain(supports.iter().map(|s| s.as_slice())));
    let sig = lorentz_signature(&active);
    let dense: Vec<DVector<f64>> = points
        .iter()
        .map(|p| p.coords().to_dense_on(&active))
        .collect();
    let sources = gram_schmidt(&dense, &sig);
    // images of the source frame under g, through the sparse action
    let targets: Vec<DVector<f64>> = sources
        .iter()
        .map(|s| {
            g.apply_vec(&SparseVec::from_dense_on(&active, s))
                .to_dense_on(&active)
        })
        .collect();
    let block = witt_extension(&sources, &targets, &sig)?;
    Ok(HypIsometry::from_parts(active, block))
}

/// `max_i d(g x_i, h x_i)`.
pub fn pointwise_dist(g: &HypIsometry, h: &HypIsometry, probes: &[HPoint]) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    Ok(probes
        .iter()
        .map(|x| dist(&g.apply(x), &h.apply(x)))
        .fold(0.0, f64::max))
}

/// `g = p k` with `k` fixing `e_0` and `p` the transvection from `e_0` to `g e_0`.
pub fn cartan_decompose(g: &HypIsometry) -> (HypIsometry, HypIsometry) {
    let o = HPoint::origin();
    let p = transvection_between(&o, &g.apply(&o));
    let k = p.inverse().compose(g);
    (p, k)
}

/// Writes `g` as an ordered product of symmetries (at most three factors).
///
/// A point symmetry at the midpoint of `[e_0, g e_0]` reduces to an isometry
/// fixing `e_0`; its orthogonal spatial block is the product of two
/// involutions built from the real normal form (each planar rotation is a
/// product of two reflections of the plane).
pub fn symmetry_decompose(g: &HypIsometry) -> Result<Vec<HypIsometry>> {
    let tol = 1e-10 * g.block.amax().max(1.0);
    if g.identity_defect() <= tol {
        return Err(Error::IdentityInput);
    }
    if g.is_involution(1e-9 * g.block.amax().powi(2).max(1.0)) {
        return Ok(vec![g.clone()]);
    }
    let o = HPoint::origin();
    let y = g.apply(&o);
    let mut factors = Vec::new();
    let k = if dist(&o, &y) > 1e-12 {
        let sigma = point_symmetry(&midpoint(&o, &y), g.active());
        let k = sigma.compose(g);
        factors.push(sigma);
        k
    } else {
        g.clone()
    };
    // k fixes e_0: work on its spatial block
    let active = k.active().to_vec();
    let n = active.len();
    let a = k.block().view((1, 1), (n - 1, n - 1)).into_owned();
    let blocks = orthogonal_normal_form_split(&a)?;
    let mut f1 = DMatrix::<f64>::identity(n - 1, n - 1);
    let mut f2 = DMatrix::<f64>::identity(n - 1, n - 1);
    let outer = |v: &DVector<f64>, w: &DVector<f64>| v * w.transpose();
    for b in &blocks {
        match b {
            NormalBlock::Fixed(_) => {}
            NormalBlock::Flip(v) => f1 -= outer(v, v) * 2.0,
            NormalBlock::Rotation { u, w, angle } => {
                // S(phi) = [[cos, sin], [sin, -cos]] in the basis (u, w)
                let (c, s) = (angle.cos(), angle.sin());
                f1 += outer(u, u) * (c - 1.0)
                    + outer(w, w) * (-c - 1.0)
                    + (outer(u, w) + outer(w, u)) * s;
                f2 -= outer(w, w) * 2.0;
            }
        }
    }
    for f in [f1, f2] {
        if (&f - DMatrix::identity(n - 1, n - 1)).amax() <= 1e-12 {
            continue;
        }
        let mut block = DMatrix::identity(n, n);
        block.view_mut((1, 1), (n - 1, n - 1)).copy_from(&f);
        factors.push(HypIsometry::from_parts(active.clone(), block));
    }
    if factors.is_empty() {
        return Err(Error::IdentityInput);
    }
    Ok(factors)
}

/// A rotation centered at `z`, in the plane through `z`, `w`, `y`, moving `w`
/// to distance `delta` from `y`; the angle is found by bisection.
pub fn adjust_distance_rotation(
    z: &HPoint,
    w: &HPoint,
    y: &HPoint,
    delta: f64,
) -> Result<HypIsometry> {
    let r = dist(z, w);
    let a = dist(z, y);
    let (lo, hi) = ((r - a).abs(), r + a);
    let tol = tolerance();
    if delta < lo - tol.at_scale(lo) || delta > hi + tol.at_scale(hi) {
        return Err(Error::Unattainable {
            target: delta,
            lo,
            hi,
        });
    }
    if r <= tol.abs || a <= tol.abs {
        return Ok(HypIsometry::identity());
    }
    let e = initial_vector(z, y)?;
    let uw = initial_vector(z, w)?;
    let f = complete_plane(&e, &uw, &[z.coords()]);
    let phi = (-lorentz_form(&uw, &f)).atan2(-lorentz_form(&uw, &e));
    // distance to y from the point at angle psi from e, radius r: increasing in psi
    let at = |psi: f64| {
        let dir = e.scale(psi.cos()).axpy(psi.sin(), &f);
        let p = HPoint::new_unchecked(z.coords().scale(r.cosh()).axpy(r.sinh(), &dir));
        dist(&p, y)
    };
    let (mut l, mut h) = (0.0f64, std::f64::consts::PI);
    for _ in 0..200 {
        let m = 0.5 * (l + h);
        if m <= l || m >= h {
            break;
        }
        if at(m) < delta {
            l = m;
        } else {
            h = m;
        }
    }
    let psi = if (at(l) - delta).abs() <= (at(h) - delta).abs() {
        l
    } else {
        h
    };
    Ok(plane_rotation(&e, &f, psi - phi))
}

/// Whether `z` lies on the geodesic through `x` and `y`.
fn on_geodesic(z: &HPoint, x: &HPoint, y: &HPoint) -> bool {
    let Ok(gamma) = geodesic_through(x, y) else {
        return true;
    };
    let b = gamma.base().coords();
    let d = gamma.direction();
    let zc = z.coords();
    let residual = zc
        .axpy(-lorentz_form(zc, b), b)
        .axpy(lorentz_form(zc, d), d);
    // sinh of the distance from z to the geodesic
    (-quadratic(&residual)).max(0.0).sqrt() < 1e-9
}

/// Two rotations with `rho2 rho1 g` fixing `x`: `rho1` centered at `z` brings
/// `g x` to distance `d(x, y)` from `y`, `rho2` centered at `y` takes it to `x`.
pub fn steinhaus_factor(
    g: &HypIsometry,
    x: &HPoint,
    y: &HPoint,
    z: &HPoint,
) -> Result<(HypIsometry, HypIsometry)> {
    if on_geodesic(z, x, y) {
        return Err(Error::CollinearCenter);
    }
    let gx = g.apply(x);
    let rho1 = adjust_distance_rotation(z, &gx, y, dist(x, y))?;
    let moved = rho1.apply(&gx);
    let rho2 = rotation_mapping(y, &moved, x)?;
    Ok((rho1, rho2))
}
