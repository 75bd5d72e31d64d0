use hyperlab_core::isometry::{steinhaus_factor, transvection, transvection_between};
use hyperlab_core::lorentz::{lorentz_form, quadratic};
use hyperlab_core::models::{dist, midpoint};
use hyperlab_core::sampling::{random_hpoint, random_stabilizer, random_unit, spatial_indices};
use hyperlab_core::{Error, Geodesic, HPoint, HypIsometry, SparseVec};
use rand::Rng;

use super::run_trials;
use crate::config::ExperimentConfig;
use crate::report::{InputDigest, TrialRecord};

pub const FIX_BOUND: f64 = 1e-8;

/// Every trial with this remainder puts `z` on the line through `x` and `y`.
pub const COLLINEAR_PERIOD: u32 = 100;

/// A random unit tangent vector at `p`.
pub fn unit_tangent<R: Rng + ?Sized>(rng: &mut R, p: &HPoint, idx: &[usize]) -> SparseVec {
    loop {
        let v = random_unit(rng, idx);
        let w = v.axpy(-lorentz_form(&v, p.coords()), p.coords());
        let q = -quadratic(&w);
        if q > 1e-6 {
            return w.scale(q.sqrt().recip());
        }
    }
}

/// A unit tangent at `p` orthogonal to the unit tangent `d`.
pub fn perpendicular<R: Rng + ?Sized>(
    rng: &mut R,
    p: &HPoint,
    d: &SparseVec,
    idx: &[usize],
) -> SparseVec {
    loop {
        let v = unit_tangent(rng, p, idx);
        let w = v.axpy(lorentz_form(&v, d), d);
        let q = -quadratic(&w);
        if q > 1e-6 {
            return w.scale(q.sqrt().recip());
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Vec<TrialRecord> {
    let idx = spatial_indices(cfg.dims as usize - 1);
    run_trials(cfg, |trial, rng| {
        let x = random_hpoint(rng, &idx, 1.0);
        let line = Geodesic::new(x.clone(), unit_tangent(rng, &x, &idx)).expect("unit tangent");
        let y = line.eval(1.0);
        let m = midpoint(&x, &y);
        let collinear = trial % COLLINEAR_PERIOD == COLLINEAR_PERIOD - 1;
        let z = if collinear {
            line.eval(-0.5)
        } else {
            let along = hyperlab_core::models::geodesic_through(&m, &y).expect("distinct points");
            let off = perpendicular(rng, &m, along.direction(), &idx);
            Geodesic::new(m, off).expect("unit tangent").eval(0.7)
        };
        let g = if trial == 0 {
            HypIsometry::identity()
        } else {
            let to_x = transvection_between(&HPoint::origin(), &x);
            let spin = to_x
                .compose(&random_stabilizer(rng, &idx))
                .compose(&to_x.inverse());
            let mover =
                Geodesic::new(x.clone(), unit_tangent(rng, &x, &idx)).expect("unit tangent");
            transvection(&mover, 0.1).compose(&spin)
        };
        let probes: Vec<HPoint> = (0..cfg.probes)
            .map(|_| random_hpoint(rng, &idx, 1.0))
            .collect();
        let digest = [&x, &y, &z]
            .iter()
            .fold(InputDigest::new().isometry(&g), |d, p| d.vector(p.coords()))
            .finish();
        match steinhaus_factor(&g, &x, &y, &z) {
            Ok(_) if collinear => TrialRecord::failed(
                trial,
                digest,
                FIX_BOUND,
                "center on the line was accepted".to_string(),
            ),
            Ok((rho1, rho2)) => {
                let fixed = rho2.compose(&rho1).compose(&g).apply(&x);
                let shift = |r: &HypIsometry| {
                    probes
                        .iter()
                        .map(|p| dist(&r.apply(p), p))
                        .fold(0.0, f64::max)
                };
                TrialRecord::measured(trial, digest, dist(&fixed, &x), FIX_BOUND)
                    .detail("displacement_of_x", dist(&g.apply(&x), &x))
                    .detail("rho1_probe_displacement", shift(&rho1))
                    .detail("rho2_probe_displacement", shift(&rho2))
            }
            Err(Error::CollinearCenter) if collinear => {
                TrialRecord::excluded(trial, digest, FIX_BOUND, Error::CollinearCenter.to_string())
            }
            Err(e) => TrialRecord::failed(trial, digest, FIX_BOUND, e.to_string()),
        }
    })
}
