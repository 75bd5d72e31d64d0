#![allow(dead_code)]

use hyperlab_core::euclid::hilbert_horofunction_at;
use hyperlab_core::horoboundary::{horofunction_at, FrustumPoint};
use hyperlab_core::models::{from_klein, to_klein};
use hyperlab_core::{BallPoint, EucIsometry, HPoint, HypIsometry, SparseVec};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain Nelder-Mead with the standard coefficients.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    step: f64,
    iters: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    for _ in 0..iters {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() < 1e-16 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|j| centroid[j] + t * (simplex[n][j] - centroid[j]))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = if fr < values[n] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(&contracted);
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = (0..n)
                        .map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    (simplex[best].clone(), values[best])
}

/// Random points of the open Klein ball on `indices`, radius at most `max_r`.
pub fn klein_grid<R: Rng>(
    rng: &mut R,
    indices: &[usize],
    count: usize,
    max_r: f64,
) -> Vec<BallPoint> {
    (0..count)
        .map(|_| {
            let v =
                SparseVec::from_pairs(indices.iter().map(|&i| (i, rng.random_range(-1.0..1.0))));
            let n = v.norm().max(1e-12);
            let s = max_r * rng.random_range(0.05..1.0f64) / n;
            BallPoint::open(v.scale(s.min(max_r / n))).unwrap()
        })
        .collect()
}

fn least_squares(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> DVector<f64> {
    let m = rows.len();
    let n = rows[0].len();
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    a.svd(true, true).solve(&b, 1e-13).unwrap()
}

/// Recovers the frustum coordinates of the hyperbolic horofunction taking the
/// given values at the given points, from the linear relation
/// `<x, p_s> + r sinh(v) = p_0 - cosh(v)` on hyperboloid lifts `p`.
pub fn refit_hyperbolic(indices: &[usize], samples: &[(HPoint, f64)]) -> (SparseVec, f64) {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (p, v) in samples {
        let mut row: Vec<f64> = indices.iter().map(|&i| p.coords().get(i)).collect();
        row.push(v.sinh());
        rows.push(row);
        rhs.push(p.coords().get(0) - v.cosh());
    }
    let sol = least_squares(rows, rhs);
    let n = indices.len();
    let x = SparseVec::from_dense_on(indices, &sol.rows(0, n).into_owned());
    (x, sol[n])
}

/// `g . F` by re-fitting `y -> xi_F(g^{-1} y) - xi_F(g^{-1} 0)` over a grid.
pub fn hyperbolic_action_oracle(
    g: &HypIsometry,
    f: &FrustumPoint,
    indices: &[usize],
    grid: &[BallPoint],
) -> (SparseVec, f64) {
    let ginv = g.inverse();
    let base = horofunction_at(f, &ginv.apply(&HPoint::origin()));
    let samples: Vec<(HPoint, f64)> = grid
        .iter()
        .map(|y| {
            let p = from_klein(y).unwrap();
            let v = horofunction_at(f, &ginv.apply(&p)) - base;
            (p, v)
        })
        .collect();
    refit_hyperbolic(indices, &samples)
}

/// Recovers `(y, r)` of a Hilbert horofunction from
/// `2 v rho + 2 <z, w> = |z|^2 - v^2` with `rho = r/sqrt(1-r^2)` and
/// `w = y/sqrt(1-r^2)`.
pub fn refit_hilbert(indices: &[usize], samples: &[(SparseVec, f64)]) -> (SparseVec, f64) {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (z, v) in samples {
        let mut row: Vec<f64> = indices.iter().map(|&i| 2.0 * z.get(i)).collect();
        row.push(2.0 * v);
        rows.push(row);
        rhs.push(z.norm_sq() - v * v);
    }
    let sol = least_squares(rows, rhs);
    let n = indices.len();
    let w = SparseVec::from_dense_on(indices, &sol.rows(0, n).into_owned());
    let rho = sol[n];
    let s = (1.0 + rho * rho).sqrt();
    (w.scale(s.recip()), rho / s)
}

pub fn hilbert_action_oracle(
    g: &EucIsometry,
    f: &FrustumPoint,
    indices: &[usize],
    grid: &[SparseVec],
) -> (SparseVec, f64) {
    let ginv = g.inverse();
    let base = hilbert_horofunction_at(f, &ginv.apply(&SparseVec::zero())).unwrap();
    let samples: Vec<(SparseVec, f64)> = grid
        .iter()
        .map(|z| {
            (
                z.clone(),
                hilbert_horofunction_at(f, &ginv.apply(z)).unwrap() - base,
            )
        })
        .collect();
    refit_hilbert(indices, &samples)
}

/// Klein coordinates of the point at distance `s` along the ray to `xi`.
pub fn ray_point(dir: &SparseVec, s: f64) -> HPoint {
    HPoint::from_spatial(&dir.scale(s.sinh()))
}

pub fn klein_of(p: &HPoint) -> SparseVec {
    to_klein(p).coords().clone()
}
