use std::f64::consts::PI;

use hyperlab_core::euclid::{approximate_by_conjugate, build_dense_u};
use hyperlab_core::sampling::{
    random_orthogonal, random_screw_motion, random_unit, random_vector, spatial_indices,
};
use hyperlab_core::{EucIsometry, SparseVec};

use super::run_trials;
use crate::config::ExperimentConfig;
use crate::report::{InputDigest, TrialRecord};

/// Rotation angles `j pi / m`, `j = 1..=m`, with `m` the least power of two
/// making the spacing `pi / m` finer than `2 epsilon / k`.
pub fn angle_grid(epsilon: f64, k: usize) -> Vec<f64> {
    let mut m = 1usize;
    while PI / (2.0 * m as f64) >= epsilon / k as f64 {
        m *= 2;
    }
    (1..=m).map(|j| j as f64 * PI / m as f64).collect()
}

/// The fixed element `U` whose conjugates approximate every target: each
/// grid angle repeated on enough planes to host a target on `dims` indices.
pub fn dense_u(cfg: &ExperimentConfig) -> EucIsometry {
    let angles = angle_grid(cfg.epsilon, cfg.probes as usize);
    let mult = cfg.dims as usize / 2 + 1;
    build_dense_u(&angles, &vec![2 * mult; angles.len()]).expect("even block dimensions")
}

const KINDS: [&str; 4] = ["elliptic", "translation", "off-center", "screw"];

pub fn run(cfg: &ExperimentConfig) -> Vec<TrialRecord> {
    let u = dense_u(cfg);
    let idx = spatial_indices(cfg.dims as usize);
    let k = cfg.probes as usize;
    let bound = 5f64.sqrt() * cfg.epsilon;
    run_trials(cfg, |trial, rng| {
        let kind = trial as usize % KINDS.len();
        let g = match kind {
            0 => EucIsometry::new(
                idx.clone(),
                random_orthogonal(rng, idx.len()),
                SparseVec::zero(),
            )
            .expect("orthogonal block"),
            1 => EucIsometry::translation(random_vector(rng, &idx, 1.0)).expect("finite vector"),
            2 => random_screw_motion(rng, &idx, 0, 1.0, 0.0),
            _ => random_screw_motion(rng, &idx, 2, 1.0, 1.0),
        };
        let points: Vec<SparseVec> = (0..k).map(|_| random_unit(rng, &idx)).collect();
        let digest = points
            .iter()
            .fold(
                InputDigest::new()
                    .block(g.active(), g.rotation_block().as_slice())
                    .vector(g.translation_part()),
                |d, p| d.vector(p),
            )
            .finish();
        let record = match approximate_by_conjugate(&u, &g, &points, cfg.epsilon) {
            Ok((h, report)) => {
                // measured independently of the report
                let error = points
                    .iter()
                    .map(|p| (&g.apply(p) - &h.apply(p)).norm())
                    .fold(0.0, f64::max);
                let max_angle = report.angle_errors.iter().copied().fold(0.0, f64::max);
                let mut r = TrialRecord::measured(trial, digest, error, bound)
                    .detail("reported_error", report.error)
                    .detail("max_angle_error", max_angle)
                    .detail("translation_length", g.translation_length());
                if let Some(a) = report.translation_angle {
                    r = r.detail("translation_angle", a);
                }
                if let Some(rad) = report.translation_radius {
                    r = r.detail("translation_radius", rad);
                }
                r
            }
            Err(e) => TrialRecord::failed(trial, digest, bound, e.to_string()),
        };
        TrialRecord {
            note: record.note.clone().or(Some(KINDS[kind].to_string())),
            ..record
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_is_fine_enough() {
        let grid = angle_grid(0.05, 3);
        assert_eq!(grid.len(), 128);
        assert!((grid[127] - PI).abs() < 1e-15);
    }
}
