use hyperlab_core::isometry::{cartan_decompose, plane_rotation, symmetry_decompose, transvection};
use hyperlab_core::sampling::{random_isometry, spatial_indices};
use hyperlab_core::{Geodesic, HPoint, HypIsometry, IsometryClass, SparseVec};
use nalgebra::DMatrix;
use rand::Rng;

use super::run_trials;
use crate::config::ExperimentConfig;
use crate::oracles::min_displacement;
use crate::report::{InputDigest, TrialRecord};

pub const CARTAN_BOUND: f64 = 1e-9;
pub const INVOLUTION_BOUND: f64 = 1e-9;
pub const PRODUCT_BOUND: f64 = 1e-8;
pub const LENGTH_BOUND: f64 = 1e-6;
pub const MAX_FACTORS: usize = 5;
/// Largest block size on which the minimization oracle is run.
pub const ORACLE_MAX_BLOCK: usize = 8;

/// The parabolic element of the upper half plane `z -> z + s`, written as a
/// Lorentz block on `e_0, e_1, e_2`.
pub fn parabolic(s: f64) -> HypIsometry {
    let h = s * s / 2.0;
    let block = DMatrix::from_row_slice(3, 3, &[1.0 + h, -h, s, h, 1.0 - h, s, s, -s, 1.0]);
    HypIsometry::from_block(vec![0, 1, 2], block).expect("Lorentz block")
}

/// Transvection of length `t` along the `e_1` axis composed with a rotation
/// by `theta` in the `e_2 e_3` plane.
pub fn loxodromic(t: f64, theta: f64) -> HypIsometry {
    let axis = Geodesic::new(HPoint::origin(), SparseVec::basis(1)).expect("unit tangent");
    transvection(&axis, t).compose(&plane_rotation(
        &SparseVec::basis(2),
        &SparseVec::basis(3),
        theta,
    ))
}

pub fn elliptic(theta: f64) -> HypIsometry {
    plane_rotation(&SparseVec::basis(1), &SparseVec::basis(2), theta)
}

fn conj(t: &HypIsometry, g: &HypIsometry) -> HypIsometry {
    t.compose(g).compose(&t.inverse())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartanCheck {
    pub product: f64,
    pub k_moves_origin: f64,
    /// `|p - p^T|` relative to `|p|`.
    pub asymmetry: f64,
    pub min_eigenvalue: f64,
    /// `|J p^T J - p|` relative to `|p|`.
    pub j_self_adjoint: f64,
}

pub fn check_cartan(g: &HypIsometry) -> CartanCheck {
    let (p, k) = cartan_decompose(g);
    let scale = g.block().amax();
    let o = HPoint::origin();
    let b = p.block_on(g.active());
    let n = b.nrows();
    let mut j = DMatrix::<f64>::identity(n, n);
    for i in 1..n {
        j[(i, i)] = -1.0;
    }
    let amax = b.amax();
    CartanCheck {
        product: p.compose(&k).max_entry_diff(g) / scale,
        k_moves_origin: (k.apply(&o).coords() - o.coords()).norm(),
        asymmetry: (&b - b.transpose()).amax() / amax,
        min_eigenvalue: b.clone().symmetric_eigen().eigenvalues.min(),
        j_self_adjoint: (&j * b.transpose() * &j - &b).amax() / amax,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    pub factors: usize,
    pub involution: f64,
    pub product: f64,
}

pub fn check_symmetries(g: &HypIsometry) -> hyperlab_core::Result<SymmetryCheck> {
    let factors = symmetry_decompose(g)?;
    let mut prod = HypIsometry::identity();
    let mut involution: f64 = 0.0;
    for f in &factors {
        involution = involution.max(f.compose(f).identity_defect() / f.block().amax().powi(2));
        prod = prod.compose(f);
    }
    Ok(SymmetryCheck {
        factors: factors.len(),
        involution,
        product: prod.max_entry_diff(g) / g.block().amax(),
    })
}

/// Hand-built witnesses of each class, conjugated by `t`; returns the number
/// classified correctly out of the number tried.
pub fn classification_witnesses<R: Rng + ?Sized>(rng: &mut R, t: &HypIsometry) -> (usize, usize) {
    let s: f64 = rng.random_range(0.2..2.0);
    let cases = [
        (elliptic(s), IsometryClass::Elliptic),
        (parabolic(1.0), IsometryClass::Parabolic),
        (parabolic(s), IsometryClass::Parabolic),
        (
            loxodromic(s, rng.random_range(0.0..3.0)),
            IsometryClass::Hyperbolic,
        ),
    ];
    let hits = cases
        .iter()
        .filter(|(g, class)| conj(t, g).classify() == *class)
        .count();
    (hits, cases.len())
}

pub fn run(cfg: &ExperimentConfig) -> Vec<TrialRecord> {
    let n = cfg.dims as usize - 1;
    run_trials(cfg, |trial, rng| {
        let g = random_isometry(rng, n, 1.0);
        let t = random_isometry(rng, n.max(3), 0.5);
        let digest = InputDigest::new().isometry(&g).isometry(&t).finish();
        let cartan = check_cartan(&g);
        let sym = match check_symmetries(&g) {
            Ok(s) => s,
            Err(e) => return TrialRecord::failed(trial, digest, 1.0, e.to_string()),
        };
        let (hits, tried) = classification_witnesses(rng, &t);
        let length_gap = if n < ORACLE_MAX_BLOCK && g.classify() == IsometryClass::Hyperbolic {
            Some((g.translation_length() - min_displacement(&g, &spatial_indices(n))).abs())
        } else {
            None
        };
        let cartan_ok = cartan.min_eigenvalue > 0.0;
        let normalized = [
            cartan.product / CARTAN_BOUND,
            cartan.k_moves_origin / CARTAN_BOUND,
            cartan.asymmetry / CARTAN_BOUND,
            sym.involution / INVOLUTION_BOUND,
            sym.product / PRODUCT_BOUND,
            length_gap.unwrap_or(0.0) / LENGTH_BOUND,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let mut record = TrialRecord::measured(trial, digest, normalized, 1.0)
            .detail("cartan_product", cartan.product)
            .detail("cartan_k_moves_origin", cartan.k_moves_origin)
            .detail("cartan_p_asymmetry", cartan.asymmetry)
            .detail("cartan_p_min_eigenvalue", cartan.min_eigenvalue)
            .detail("j_self_adjoint_defect", cartan.j_self_adjoint)
            .detail("symmetry_factors", sym.factors as f64)
            .detail("symmetry_involution", sym.involution)
            .detail("symmetry_product", sym.product)
            .detail("classification_hits", hits as f64)
            .detail("classification_cases", tried as f64);
        if let Some(gap) = length_gap {
            record = record.detail("translation_length_gap", gap);
        }
        if !cartan_ok || sym.factors > MAX_FACTORS || hits < tried {
            record.pass = false;
        }
        record
    })
}
