//! Weak convergence in the frustum, tested against finitely many functionals
//! on the tail of explicit sequences.

use hyperlab_core::horoboundary::{embed_point, frustum_action, weak_convergence_probe, WeakProbe};
use hyperlab_core::sampling::{random_isometry, random_unit, spatial_indices};
use hyperlab_core::{BallPoint, FrustumPoint, HPoint, IdealPoint, SparseVec};
use rand::Rng;

use super::run_trials;
use crate::config::ExperimentConfig;
use crate::report::{InputDigest, TrialRecord};

pub const TAIL: usize = 10;
pub const TOL: f64 = 1e-9;
/// Sequence terms beyond the working support.
pub const EXTRA_TERMS: usize = 40;

fn frustum(x: SparseVec, r: f64) -> FrustumPoint {
    FrustumPoint::new(BallPoint::closed(x).expect("inside the ball"), r).expect("|x| <= r")
}

fn worst(p: &WeakProbe) -> f64 {
    p.functional_defect.max(p.radius_defect)
}

pub fn run(cfg: &ExperimentConfig) -> Vec<TrialRecord> {
    let dims = cfg.dims as usize;
    let idx = spatial_indices(dims);
    let len = dims + EXTRA_TERMS;
    run_trials(cfg, |trial, rng| {
        let phis: Vec<BallPoint> = (0..cfg.probes)
            .map(|_| {
                let v = random_unit(rng, &idx).scale(rng.random_range(0.0..1.0));
                BallPoint::closed(v).expect("inside the ball")
            })
            .collect();

        // ideal points at an orthonormal sequence tend to the center (0, 1)
        let orthonormal: Vec<FrustumPoint> = (1..=len)
            .map(|n| {
                FrustumPoint::ideal(
                    &IdealPoint::from_direction(&SparseVec::basis(n)).expect("unit"),
                )
            })
            .collect();
        let center = frustum(SparseVec::zero(), 1.0);

        // points running out along a ray tend to its Busemann point (xi, 1)
        let dir = random_unit(rng, &idx);
        let ray: Vec<FrustumPoint> = (1..=len)
            .map(|k| embed_point(&HPoint::from_spatial(&dir.scale((k as f64).sinh()))))
            .collect();
        let xi = FrustumPoint::ideal(&IdealPoint::from_direction(&dir).expect("unit"));

        // (x + s e_n, r) tends weakly to (x, r); so must its image under g
        let g = random_isometry(rng, dims - 1, 0.8);
        let r: f64 = rng.random_range(0.3..0.95);
        let x = random_unit(rng, &idx).scale(r * rng.random_range(0.0..0.7));
        let s = 0.9 * (r - x.norm());
        let moved: Vec<FrustumPoint> = (1..=len)
            .map(|n| frustum_action(&g, &frustum(x.axpy(s, &SparseVec::basis(n)), r)))
            .collect();
        let limit = frustum_action(&g, &frustum(x.clone(), r));

        let digest = phis
            .iter()
            .fold(
                InputDigest::new()
                    .vector(&dir)
                    .isometry(&g)
                    .vector(&x)
                    .scalar(r),
                |d, p| d.vector(p.coords()),
            )
            .finish();
        let probes = [
            (
                "orthonormal",
                weak_convergence_probe(&orthonormal, &center, &phis, TAIL, TOL),
            ),
            ("ray", weak_convergence_probe(&ray, &xi, &phis, TAIL, TOL)),
            (
                "action",
                weak_convergence_probe(&moved, &limit, &phis, TAIL, TOL),
            ),
        ];
        let mut record = TrialRecord::measured(trial, digest, 0.0, TOL);
        let mut defect: f64 = 0.0;
        for (name, probe) in probes {
            match probe {
                Ok(p) => {
                    defect = defect.max(worst(&p));
                    record.pass &= p.pass;
                    record = record.detail(name, worst(&p));
                }
                Err(e) => {
                    return TrialRecord::failed(trial, record.inputs_digest, TOL, e.to_string())
                }
            }
        }
        record.defect = Some(defect);
        record.pass &= defect < TOL;
        record
    })
}
