//! The horofunction compactification as the frustum
//! `F = {(x, r) : |x| <= r <= 1}`, its equivariant action, the Busemann
//! homomorphism and the boundary cocycle.

use crate::error::{Error, Result};
use crate::isometry::HypIsometry;
use crate::lorentz::{tolerance, SparseVec};
use crate::models::{
    busemann, dist, from_klein, lifted_pairing, to_klein, to_klein_ideal, BallPoint, HPoint,
    IdealPoint,
};

/// A point `(x, r)` of the frustum: `x` in the closed ball, `|x| <= r <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrustumPoint {
    x: BallPoint,
    r: f64,
}

impl FrustumPoint {
    pub fn new(x: BallPoint, r: f64) -> Result<Self> {
        let norm = x.norm();
        if !(0.0..=1.0).contains(&r) || norm > r + tolerance().abs {
            return Err(Error::InvalidFrustumPair { norm, r });
        }
        Ok(Self {
            x: BallPoint::new_unchecked(x.coords().clone(), true),
            r,
        })
    }

    pub(crate) fn new_unchecked(x: SparseVec, r: f64) -> Self {
        Self {
            x: BallPoint::new_unchecked(x, true),
            r,
        }
    }

    /// The Busemann point `(xi, 1)` of an ideal point.
    pub fn ideal(xi: &IdealPoint) -> Self {
        Self {
            x: to_klein_ideal(xi),
            r: 1.0,
        }
    }

    pub fn x(&self) -> &BallPoint {
        &self.x
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// The horofunction with frustum coordinates `(x, r)`, evaluated at a point of
/// the open Klein ball.
///
/// Written on the hyperboloid lift `p` of `y` and `x~ = e_0 + x`, the closed
/// form reads `log(((x~, p) + sqrt((x~, p)^2 - (1 - r^2))) / (1 + r))`.
pub fn horofunction_eval(f: &FrustumPoint, y: &BallPoint) -> Result<f64> {
    if y.coords().is_zero() {
        return Ok(0.0);
    }
    let p = from_klein(y)?;
    Ok(horofunction_at(f, &p))
}

/// [`horofunction_eval`] at a hyperboloid point.
pub fn horofunction_at(f: &FrustumPoint, p: &HPoint) -> f64 {
    let a = lifted_pairing(f.x.coords(), p);
    let disc = (a * a - (1.0 - f.r * f.r)).max(0.0);
    ((a + disc.sqrt()) / (1.0 + f.r)).ln()
}

/// `(to_klein(p), |to_klein(p)|)`.
pub fn embed_point(p: &HPoint) -> FrustumPoint {
    let x = to_klein(p);
    let r = x.norm();
    FrustumPoint {
        x: BallPoint::new_unchecked(x.coords().clone(), true),
        r,
    }
}

/// `d(x, y) - d(x, z)`.
pub fn horo_compare(x: &HPoint, y: &HPoint, z: &HPoint) -> Result<f64> {
    if dist(y, z) <= tolerance().abs {
        return Err(Error::CoincidentPoints);
    }
    Ok(dist(x, y) - dist(x, z))
}

/// `g . (x, r) = (alpha(g) x, sqrt(1 - (1 - r^2) / mu^2))` with
/// `mu = (g(e_0 + x))_0` and `alpha(g) x` the Klein image of `g(e_0 + x)`.
pub fn frustum_action(g: &HypIsometry, f: &FrustumPoint) -> FrustumPoint {
    let v = g.apply_vec(&f.x.coords().with_time(1.0));
    let mu = v.get(0);
    let rho = (1.0 - (1.0 - f.r * f.r) / (mu * mu)).max(0.0).sqrt();
    let rho = if f.r == 1.0 { 1.0 } else { rho.min(1.0) };
    FrustumPoint::new_unchecked(v.spatial().scale(mu.recip()), rho)
}

/// `beta_xi(g x0, x0)` for `g` fixing `xi`.
pub fn busemann_hom(g: &HypIsometry, xi: &IdealPoint, x0: &HPoint) -> Result<f64> {
    let moved = g.apply_ideal(xi);
    let defect = (moved.coords() - xi.coords()).norm();
    if defect > 1e3 * tolerance().abs {
        return Err(Error::NotInStabilizer(defect));
    }
    Ok(busemann(xi, &g.apply(x0), x0))
}

/// `c(g, eta) = beta_eta(x0, g^{-1} x0)`.
pub fn cocycle(g: &HypIsometry, eta: &IdealPoint, x0: &HPoint) -> f64 {
    busemann(eta, x0, &g.inverse().apply(x0))
}

/// The extension of [`cocycle`] to the whole frustum: with `h` the horofunction
/// `(x, 1)` of the ball component, `h(x0) - h(g^{-1} x0)`.
pub fn cocycle_ext(g: &HypIsometry, f: &FrustumPoint, x0: &HPoint) -> f64 {
    let h = FrustumPoint::new_unchecked(f.x.coords().clone(), 1.0);
    horofunction_at(&h, x0) - horofunction_at(&h, &g.inverse().apply(x0))
}

/// Outcome of a weak-convergence probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakProbe {
    /// `max |<x_n - x, phi>|` over the tail and the functionals.
    pub functional_defect: f64,
    /// `max |r_n - r|` over the tail.
    pub radius_defect: f64,
    pub pass: bool,
}

/// Tests `(x_n, r_n) -> (x, r)` against finitely many linear functionals on the
/// last `tail` elements of the sequence.
pub fn weak_convergence_probe(
    sequence: &[FrustumPoint],
    candidate: &FrustumPoint,
    functionals: &[BallPoint],
    tail: usize,
    tol: f64,
) -> Result<WeakProbe> {
    if functionals.is_empty() {
        return Err(Error::EmptyFunctionals);
    }
    let start = sequence.len().saturating_sub(tail);
    let mut functional_defect: f64 = 0.0;
    let mut radius_defect: f64 = 0.0;
    for f in &sequence[start..] {
        let diff = f.x.coords() - candidate.x.coords();
        for phi in functionals {
            functional_defect = functional_defect.max(diff.dot(phi.coords()).abs());
        }
        radius_defect = radius_defect.max((f.r - candidate.r).abs());
    }
    Ok(WeakProbe {
        functional_defect,
        radius_defect,
        pass: functional_defect < tol && radius_defect < tol,
    })
}
