//! Points of the hyperboloid, the Klein ball and the boundary, with distance,
//! geodesics, angles and Busemann functions.

use crate::error::{Error, Result};
use crate::lorentz::{lorentz_form, quadratic, tolerance, SparseVec};

/// A point of the upper sheet `Q(x) = 1`, `x_0 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint {
    coords: SparseVec,
}

impl HPoint {
    /// Checks the sheet invariants.
    pub fn new(coords: SparseVec) -> Result<Self> {
        let q = quadratic(&coords);
        let x0 = coords.get(0);
        if x0 <= 0.0 || (q - 1.0).abs() > tolerance().at_scale(coords.norm_sq()) {
            return Err(Error::NotOnHyperboloid { q, x0 });
        }
        Ok(Self { coords })
    }

    /// The base point `e_0`.
    pub fn origin() -> Self {
        Self {
            coords: SparseVec::basis(0),
        }
    }

    /// The point `(sqrt(1 + |v|^2), v)` above a spatial vector `v`.
    pub fn from_spatial(v: &SparseVec) -> Self {
        let v = v.spatial();
        let x0 = (1.0 + v.norm_sq()).sqrt();
        Self {
            coords: v.with_time(x0),
        }
    }

    /// Rescales a vector with `Q > 0` and `x_0 > 0` onto the sheet.
    pub fn from_timelike(v: SparseVec) -> Result<Self> {
        let q = quadratic(&v);
        let x0 = v.get(0);
        if q <= 0.0 || x0 <= 0.0 {
            return Err(Error::NotOnHyperboloid { q, x0 });
        }
        Ok(Self {
            coords: v.scale(q.sqrt().recip()),
        })
    }

    pub fn coords(&self) -> &SparseVec {
        &self.coords
    }

    pub fn into_coords(self) -> SparseVec {
        self.coords
    }

    pub(crate) fn new_unchecked(coords: SparseVec) -> Self {
        Self { coords }
    }
}

/// An isotropic ray, represented by its point with `x_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealPoint {
    coords: SparseVec,
}

impl IdealPoint {
    /// Normalizes an isotropic vector with `x_0 > 0` to `x_0 = 1`.
    pub fn new(coords: SparseVec) -> Result<Self> {
        let x0 = coords.get(0);
        let q = quadratic(&coords);
        if x0 <= 0.0 {
            return Err(Error::NotIsotropic(q));
        }
        let v = coords.spatial();
        if (q / (x0 * x0)).abs() > tolerance().at_scale(1.0) {
            return Err(Error::NotIsotropic(q));
        }
        Ok(Self::from_direction_unchecked(v.scale(x0.recip())))
    }

    /// `e_0 + u` for a spatial direction `u` (rescaled to unit length).
    pub fn from_direction(u: &SparseVec) -> Result<Self> {
        let u = u.spatial();
        let n = u.norm();
        if n == 0.0 {
            return Err(Error::NotIsotropic(1.0));
        }
        Ok(Self::from_direction_unchecked(u.scale(n.recip())))
    }

    pub(crate) fn from_direction_unchecked(u: SparseVec) -> Self {
        // renormalize the direction so the vector is isotropic to rounding
        let n = u.norm();
        let u = if n > 0.0 { u.scale(n.recip()) } else { u };
        Self {
            coords: u.with_time(1.0),
        }
    }

    pub fn coords(&self) -> &SparseVec {
        &self.coords
    }

    /// The unit spatial vector `x - e_0`.
    pub fn direction(&self) -> SparseVec {
        self.coords.spatial()
    }
}

/// A point of the Klein ball, supported on indices `>= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: SparseVec,
    closed: bool,
}

impl BallPoint {
    /// A point of the open ball.
    pub fn open(coords: SparseVec) -> Result<Self> {
        Self::new(coords, false)
    }

    /// A point of the closed ball.
    pub fn closed(coords: SparseVec) -> Result<Self> {
        Self::new(coords, true)
    }

    pub fn new(coords: SparseVec, closed: bool) -> Result<Self> {
        if coords.get(0) != 0.0 {
            return Err(Error::NonSpatial);
        }
        let n = coords.norm();
        let ok = if closed {
            n <= 1.0 + tolerance().abs
        } else {
            n < 1.0
        };
        if !ok {
            return Err(Error::OnBoundary(n));
        }
        Ok(Self { coords, closed })
    }

    pub fn origin() -> Self {
        Self {
            coords: SparseVec::zero(),
            closed: false,
        }
    }

    pub fn coords(&self) -> &SparseVec {
        &self.coords
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub(crate) fn new_unchecked(coords: SparseVec, closed: bool) -> Self {
        Self { coords, closed }
    }
}

/// The unit-speed geodesic `t -> cosh(t) base + sinh(t) direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    base: HPoint,
    direction: SparseVec,
}

impl Geodesic {
    pub fn new(base: HPoint, direction: SparseVec) -> Result<Self> {
        let q = quadratic(&direction);
        let orth = lorentz_form(base.coords(), &direction);
        let tol = tolerance();
        let scale = direction.norm_sq().max(1.0) * base.coords().norm_sq();
        if (q + 1.0).abs() > tol.at_scale(direction.norm_sq())
            || orth.abs() > tol.at_scale(scale.sqrt())
        {
            return Err(Error::InvalidGeodesic { q, orth });
        }
        Ok(Self { base, direction })
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn direction(&self) -> &SparseVec {
        &self.direction
    }

    pub fn eval(&self, t: f64) -> HPoint {
        HPoint {
            coords: self
                .base
                .coords()
                .scale(t.cosh())
                .axpy(t.sinh(), &self.direction),
        }
    }

    /// Endpoint at `+infinity` when `forward`, at `-infinity` otherwise.
    pub fn ideal_endpoint(&self, forward: bool) -> IdealPoint {
        let s = if forward { 1.0 } else { -1.0 };
        let v = self.base.coords().axpy(s, &self.direction);
        let x0 = v.get(0);
        IdealPoint::from_direction_unchecked(v.spatial().scale(x0.recip()))
    }

    /// The same geodesic traversed backwards.
    pub fn reversed(&self) -> Geodesic {
        Geodesic {
            base: self.base.clone(),
            direction: -&self.direction,
        }
    }
}

/// Hyperbolic distance, `cosh d = (x, y)`, evaluated as
/// `d = 2 asinh(sqrt(-Q(x - y)) / 2)` to stay accurate for nearby points.
pub fn dist(x: &HPoint, y: &HPoint) -> f64 {
    let diff = x.coords() - y.coords();
    let q = (-quadratic(&diff)).max(0.0);
    2.0 * (q.sqrt() / 2.0).asinh()
}

/// `(e_0 + x) / sqrt(1 - |x|^2)`.
pub fn from_klein(x: &BallPoint) -> Result<HPoint> {
    let n2 = x.coords().norm_sq();
    if n2.sqrt() >= 1.0 - tolerance().abs {
        return Err(Error::OnBoundary(n2.sqrt()));
    }
    let s = (1.0 - n2).sqrt().recip();
    Ok(HPoint {
        coords: x.coords().scale(s).with_time(s),
    })
}

/// Central projection to the Klein ball.
pub fn to_klein(x: &HPoint) -> BallPoint {
    let x0 = x.coords().get(0);
    BallPoint {
        coords: x.coords().spatial().scale(x0.recip()),
        closed: false,
    }
}

/// The boundary sphere point of an ideal point.
pub fn to_klein_ideal(xi: &IdealPoint) -> BallPoint {
    BallPoint {
        coords: xi.direction(),
        closed: true,
    }
}

/// The ideal point of a unit vector of the closed ball.
pub fn ideal_from_klein(x: &BallPoint) -> Result<IdealPoint> {
    let n = x.norm();
    if (n - 1.0).abs() > tolerance().at_scale(1.0) {
        return Err(Error::NotIsotropic(1.0 - n * n));
    }
    IdealPoint::from_direction(x.coords())
}

/// Unit-speed geodesic with `eval(0) = x` and `eval(dist(x, y)) = y`.
pub fn geodesic_through(x: &HPoint, y: &HPoint) -> Result<Geodesic> {
    let f = lorentz_form(x.coords(), y.coords());
    let u = y.coords().axpy(-f, x.coords());
    let q = -quadratic(&u);
    if q <= 0.0 || dist(x, y) <= tolerance().abs {
        return Err(Error::CoincidentPoints);
    }
    let mut dir = u.scale(q.sqrt().recip());
    // one correction pass against rounding
    dir = dir.axpy(-lorentz_form(&dir, x.coords()), x.coords());
    let q = -quadratic(&dir);
    Ok(Geodesic {
        base: x.clone(),
        direction: dir.scale(q.sqrt().recip()),
    })
}

/// The midpoint `(x + y) / sqrt(2 (1 + (x, y)))`.
pub fn midpoint(x: &HPoint, y: &HPoint) -> HPoint {
    let f = lorentz_form(x.coords(), y.coords());
    HPoint {
        coords: (x.coords() + y.coords()).scale((2.0 * (1.0 + f)).sqrt().recip()),
    }
}

/// Anything with a positive-`x_0` representative vector in `H`.
pub trait Representative {
    fn representative(&self) -> &SparseVec;
}

impl Representative for HPoint {
    fn representative(&self) -> &SparseVec {
        &self.coords
    }
}

impl Representative for IdealPoint {
    fn representative(&self) -> &SparseVec {
        &self.coords
    }
}

/// Unit initial vector at `p` of the geodesic toward `z`.
pub(crate) fn initial_vector<Z: Representative + ?Sized>(p: &HPoint, z: &Z) -> Result<SparseVec> {
    let z = z.representative();
    let u = z.axpy(-lorentz_form(p.coords(), z), p.coords());
    let q = -quadratic(&u);
    if q <= tolerance().at_scale(z.norm_sq()) * 1e-6 {
        return Err(Error::CoincidentPoints);
    }
    Ok(u.scale(q.sqrt().recip()))
}

/// The angle at `p` between the geodesics toward `a` and toward `b`.
pub fn angle<A, B>(p: &HPoint, a: &A, b: &B) -> Result<f64>
where
    A: Representative + ?Sized,
    B: Representative + ?Sized,
{
    let u = initial_vector(p, a)?;
    let v = initial_vector(p, b)?;
    Ok((-lorentz_form(&u, &v)).clamp(-1.0, 1.0).acos())
}

/// `beta_xi(x, x0)`: the Busemann function of `xi` vanishing at `x0`.
///
/// With the lift `e_0 + x_hat` of the boundary point, the closed-form
/// horofunction at `r = 1` is `log (e_0 + x_hat, p)` for `p` on the sheet.
pub fn busemann(xi: &IdealPoint, x: &HPoint, x0: &HPoint) -> f64 {
    (ideal_pairing(xi, x) / ideal_pairing(xi, x0)).ln()
}

pub(crate) fn ideal_pairing(xi: &IdealPoint, x: &HPoint) -> f64 {
    lifted_pairing(&xi.direction(), x)
}

/// `(e_0 + y, p) = p_0 - <y, p_s>` for `|y| <= 1`. Far out in the direction
/// of `y` this cancels, so with `p_0^2 = 1 + |p_s|^2` it is evaluated as
/// `(1 + |p_perp|^2 + (1 - |y|^2) t^2) / (p_0 + <y, p_s>)`, where `t` and
/// `p_perp` are the components of `p_s` along and across `y`.
pub(crate) fn lifted_pairing(y: &SparseVec, p: &HPoint) -> f64 {
    let ps = p.coords().spatial();
    let s = y.dot(&ps);
    let p0 = p.coords().get(0);
    let n2 = y.norm_sq();
    if s <= 0.0 || n2 == 0.0 {
        return p0 - s;
    }
    let perp = ps.axpy(-s / n2, y);
    let t2 = s * s / n2;
    (1.0 + perp.norm_sq() + (1.0 - n2).max(0.0) * t2) / (p0 + s)
}

/// `x -> x / sqrt(1 + |x|^2)`, from the Hilbert space (indices `>= 1`) to the open ball.
pub fn sigma_hilbert(x: &SparseVec) -> Result<BallPoint> {
    if x.get(0) != 0.0 {
        return Err(Error::NonSpatial);
    }
    Ok(BallPoint {
        coords: x.scale((1.0 + x.norm_sq()).sqrt().recip()),
        closed: false,
    })
}

/// Inverse of [`sigma_hilbert`]: `y -> y / sqrt(1 - |y|^2)`.
pub fn sigma_hilbert_inv(y: &BallPoint) -> Result<SparseVec> {
    let n2 = y.coords().norm_sq();
    if n2.sqrt() >= 1.0 - tolerance().abs {
        return Err(Error::OnBoundary(n2.sqrt()));
    }
    Ok(y.coords().scale((1.0 - n2).sqrt().recip()))
}
