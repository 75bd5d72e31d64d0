//! Seeded random points and isometries.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::euclid::EucIsometry;
use crate::isometry::{transvection_between, HypIsometry};
use crate::lorentz::SparseVec;
use crate::models::{HPoint, IdealPoint};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian coordinates of standard deviation `scale` on the given indices.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, indices: &[usize], scale: f64) -> SparseVec {
    SparseVec::from_pairs(indices.iter().map(|&i| (i, scale * normal(rng))))
}

/// A uniformly distributed unit vector on the given indices.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, indices: &[usize]) -> SparseVec {
    loop {
        let v = random_vector(rng, indices, 1.0);
        let n = v.norm();
        if n > 1e-6 {
            return v.scale(n.recip());
        }
    }
}

/// The indices `1..=n`.
pub fn spatial_indices(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// A point of the sheet above a Gaussian spatial vector on `indices`.
pub fn random_hpoint<R: Rng + ?Sized>(rng: &mut R, indices: &[usize], scale: f64) -> HPoint {
    let spatial: Vec<usize> = indices.iter().copied().filter(|&i| i != 0).collect();
    HPoint::from_spatial(&random_vector(rng, &spatial, scale))
}

/// A uniformly distributed ideal point with direction on `indices`.
pub fn random_ideal<R: Rng + ?Sized>(rng: &mut R, indices: &[usize]) -> IdealPoint {
    let spatial: Vec<usize> = indices.iter().copied().filter(|&i| i != 0).collect();
    IdealPoint::from_direction(&random_unit(rng, &spatial)).expect("unit direction")
}

/// A Haar-distributed orthogonal `n x n` matrix (QR of a Gaussian matrix).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let m = DMatrix::from_fn(n, n, |_, _| normal(rng));
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// A random isometry fixing `e_0`, acting on the given spatial indices.
pub fn random_stabilizer<R: Rng + ?Sized>(rng: &mut R, spatial: &[usize]) -> HypIsometry {
    let n = spatial.len();
    let q = random_orthogonal(rng, n);
    let mut block = DMatrix::identity(n + 1, n + 1);
    block.view_mut((1, 1), (n, n)).copy_from(&q);
    let mut active = vec![0];
    active.extend_from_slice(spatial);
    HypIsometry::from_block(active, block).expect("orthogonal spatial block")
}

/// `p k` with `k` a random stabilizer element and `p` the transvection from
/// `e_0` to a random point, all on the indices `0..=n`.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> HypIsometry {
    let spatial = spatial_indices(n);
    let k = random_stabilizer(rng, &spatial);
    let target = random_hpoint(rng, &spatial, scale);
    transvection_between(&HPoint::origin(), &target).compose(&k)
}

/// A random orthogonal block on `indices` with a Gaussian translation of
/// standard deviation `scale` on the same indices.
pub fn random_euc_isometry<R: Rng + ?Sized>(
    rng: &mut R,
    indices: &[usize],
    scale: f64,
) -> EucIsometry {
    let a = random_orthogonal(rng, indices.len());
    let b = random_vector(rng, indices, scale);
    EucIsometry::new(indices.to_vec(), a, b).expect("orthogonal block")
}

/// `x -> A (x - c) + c + b_1`: a random rotation `A` about a center `c` drawn
/// uniformly from the ball of radius `center_radius`, followed by a Gaussian
/// translation `b_1` of standard deviation `scale` along the last `fixed`
/// indices, which `A` leaves pointwise fixed.
pub fn random_screw_motion<R: Rng + ?Sized>(
    rng: &mut R,
    indices: &[usize],
    fixed: usize,
    center_radius: f64,
    scale: f64,
) -> EucIsometry {
    let n = indices.len();
    let m = n.saturating_sub(fixed);
    let mut a = DMatrix::identity(n, n);
    a.view_mut((0, 0), (m, m))
        .copy_from(&random_orthogonal(rng, m));
    let radius = center_radius * rng.random::<f64>().powf(1.0 / n.max(1) as f64);
    let c = random_unit(rng, &indices[..m.max(1).min(n)]).scale(radius);
    let b1 = random_vector(rng, &indices[m..], scale);
    let rot = EucIsometry::new(indices.to_vec(), a, SparseVec::zero()).expect("orthogonal block");
    let b = &(&c - &rot.linear_apply(&c)) + &b1;
    EucIsometry::new(indices.to_vec(), rot.rotation_block().clone(), b).expect("orthogonal block")
}
