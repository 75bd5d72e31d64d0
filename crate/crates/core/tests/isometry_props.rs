mod common;

use hyperlab_core::isometry::{
    adjust_distance_rotation, cartan_decompose, match_pointwise, plane_rotation, pointwise_dist,
    steinhaus_factor, symmetry_decompose, transvection,
};
use hyperlab_core::lorentz::lorentz_form;
use hyperlab_core::models::{dist, midpoint};
use hyperlab_core::sampling::{
    random_hpoint, random_isometry, random_stabilizer, random_unit, spatial_indices,
};
use hyperlab_core::{Error, Geodesic, HPoint, HypIsometry, IsometryClass, SparseVec};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn axis() -> Geodesic {
    Geodesic::new(HPoint::origin(), SparseVec::basis(1)).unwrap()
}

fn conj(t: &HypIsometry, g: &HypIsometry) -> HypIsometry {
    t.compose(g).compose(&t.inverse())
}

fn parabolic(s: f64) -> HypIsometry {
    let h = s * s / 2.0;
    let block = DMatrix::from_row_slice(3, 3, &[1.0 + h, -h, s, h, 1.0 - h, s, s, -s, 1.0]);
    HypIsometry::from_block(vec![0, 1, 2], block).unwrap()
}

fn loxodromic(t: f64, theta: f64) -> HypIsometry {
    transvection(&axis(), t).compose(&plane_rotation(
        &SparseVec::basis(2),
        &SparseVec::basis(3),
        theta,
    ))
}

/// `inf_x d(gx, x)` by Nelder-Mead over the spatial coordinates of `x`.
fn min_displacement(g: &HypIsometry, n: usize) -> f64 {
    let idx = spatial_indices(n);
    let f = |v: &[f64]| {
        let x = HPoint::from_spatial(&SparseVec::from_pairs(
            idx.iter().copied().zip(v.iter().copied()),
        ));
        lorentz_form(g.apply(&x).coords(), x.coords())
    };
    let mut start = vec![0.0; n];
    let mut best = f64::INFINITY;
    for _ in 0..4 {
        let (x, v) = common::nelder_mead(f, &start, 0.5, 20_000);
        start = x;
        best = best.min(v);
    }
    best.max(1.0).acosh()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = common::rng(seed);
        let [a, b, c] = [(); 3].map(|_| random_isometry(&mut rng, n, 0.7));
        let left = a.compose(&b).compose(&c);
        let right = a.compose(&b.compose(&c));
        let scale = left.block().amax();
        prop_assert!(left.max_entry_diff(&right) <= 1e-9 * scale);
        prop_assert!(a.inverse().compose(&a).identity_defect() <= 1e-10 * a.block().amax().powi(2));
    }

    #[test]
    fn apply_preserves_distance(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = common::rng(seed);
        let g = random_isometry(&mut rng, n, 1.0);
        let idx = spatial_indices(n + 2);
        let x = random_hpoint(&mut rng, &idx, 1.0);
        let y = random_hpoint(&mut rng, &idx, 1.0);
        prop_assert!((dist(&g.apply(&x), &g.apply(&y)) - dist(&x, &y)).abs() < 1e-9);
    }

    #[test]
    fn pointwise_match_agrees_on_points(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = common::rng(seed);
        let g = random_isometry(&mut rng, 10, 1.0);
        let idx = spatial_indices(4);
        let pts: Vec<HPoint> = (0..k).map(|_| random_hpoint(&mut rng, &idx, 1.0)).collect();
        let h = match_pointwise(&g, &pts).unwrap();
        prop_assert!(h.orthogonality_defect() < 1e-9);
        for p in &pts {
            let d = (g.apply(p).coords() - h.apply(p).coords()).norm();
            prop_assert!(d <= 1e-10 * g.block().amax().max(1.0) * p.coords().get(0));
        }
    }

    #[test]
    fn classification_is_conjugation_invariant(seed in any::<u64>(), n in 3usize..7) {
        let mut rng = common::rng(seed);
        let t = random_isometry(&mut rng, n, 0.5);
        let s: f64 = rng.random_range(0.2..2.0);
        let witnesses = [
            (plane_rotation(&SparseVec::basis(1), &SparseVec::basis(2), s), IsometryClass::Elliptic),
            (parabolic(s), IsometryClass::Parabolic),
            (loxodromic(s, rng.random_range(0.0..3.0)), IsometryClass::Hyperbolic),
        ];
        for (g, class) in witnesses {
            let h = conj(&t, &g);
            prop_assert_eq!(g.classify(), class);
            prop_assert_eq!(h.classify(), class);
            prop_assert!((h.translation_length() - g.translation_length()).abs() < 1e-8);
        }
    }

    #[test]
    fn upper_semicontinuity_probe(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let t = random_isometry(&mut rng, 4, 0.5);
        let probes: Vec<HPoint> = (0..4).map(|_| random_hpoint(&mut rng, &spatial_indices(4), 1.0)).collect();
        let ell: f64 = rng.random_range(0.0..1.5);
        let g = conj(&t, &loxodromic(ell, 0.4));
        let mut last = f64::INFINITY;
        for k in 1..=8 {
            let eps = 10f64.powi(-k);
            let gn = conj(&t, &loxodromic(ell + eps, 0.4 + eps));
            let pd = pointwise_dist(&g, &gn, &probes).unwrap();
            prop_assert!(pd <= last + 1e-12);
            last = pd;
            prop_assert!(gn.translation_length() <= g.translation_length() + eps + 1e-6);
        }
    }

    #[test]
    fn cartan_factors(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = common::rng(seed);
        let g = random_isometry(&mut rng, n, 1.0);
        let (p, k) = cartan_decompose(&g);
        let o = HPoint::origin();
        prop_assert!(p.compose(&k).max_entry_diff(&g) <= 1e-9 * g.block().amax());
        prop_assert!((k.apply(&o).coords() - o.coords()).norm() < 1e-9);
        let b = p.block_on(g.active());
        prop_assert!((&b - b.transpose()).amax() <= 1e-9 * b.amax());
        prop_assert!(b.symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn symmetry_factors(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = common::rng(seed);
        let g = random_isometry(&mut rng, n, 1.0);
        let factors = symmetry_decompose(&g).unwrap();
        prop_assert!(factors.len() <= 3);
        let mut prod = HypIsometry::identity();
        for f in &factors {
            prop_assert!(f.is_involution(1e-9 * f.block().amax().powi(2)));
            prop_assert!(f.identity_defect() > 0.0);
            prod = prod.compose(f);
        }
        prop_assert!(prod.max_entry_diff(&g) < 1e-8 * g.block().amax());
    }

    #[test]
    fn adjust_distance_hits_target(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = common::rng(seed);
        let idx = spatial_indices(n);
        let [z, w, y] = [(); 3].map(|_| random_hpoint(&mut rng, &idx, 1.0));
        let (r, a) = (dist(&z, &w), dist(&z, &y));
        let lam: f64 = rng.random_range(0.0..1.0);
        let delta = (r - a).abs() + lam * (r + a - (r - a).abs());
        let rho = adjust_distance_rotation(&z, &w, &y, delta).unwrap();
        prop_assert!((dist(&rho.apply(&w), &y) - delta).abs() < 1e-8);
        prop_assert!(dist(&rho.apply(&z), &z) < 1e-10);
    }

    #[test]
    fn steinhaus_fixes_x(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = common::rng(seed);
        let idx = spatial_indices(n);
        let x = random_hpoint(&mut rng, &idx, 1.0);
        let y = Geodesic::new(x.clone(), unit_tangent(&mut rng, &x, &idx)).unwrap().eval(1.0);
        let m = midpoint(&x, &y);
        let line = hyperlab_core::models::geodesic_through(&m, &y).unwrap();
        let off = perpendicular(&mut rng, &m, line.direction(), &idx);
        let z = Geodesic::new(m.clone(), off).unwrap().eval(0.7);
        let mover = Geodesic::new(x.clone(), unit_tangent(&mut rng, &x, &idx)).unwrap();
        let g = transvection(&mover, 0.1);
        match steinhaus_factor(&g, &x, &y, &z) {
            Ok((r1, r2)) => {
                let fixed = r2.compose(&r1).compose(&g).apply(&x);
                prop_assert!(dist(&fixed, &x) < 1e-8);
            }
            Err(Error::CollinearCenter) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

/// A random unit tangent vector at `p`, Lorentz-orthogonal to `p`.
fn unit_tangent<R: Rng>(rng: &mut R, p: &HPoint, idx: &[usize]) -> SparseVec {
    loop {
        let v = random_unit(rng, idx);
        let w = v.axpy(-lorentz_form(&v, p.coords()), p.coords());
        let q = -hyperlab_core::lorentz::quadratic(&w);
        if q > 1e-6 {
            return w.scale(q.sqrt().recip());
        }
    }
}

/// A unit tangent at `p` orthogonal to the tangent `d`.
fn perpendicular<R: Rng>(rng: &mut R, p: &HPoint, d: &SparseVec, idx: &[usize]) -> SparseVec {
    loop {
        let v = unit_tangent(rng, p, idx);
        let w = v.axpy(lorentz_form(&v, d), d);
        let q = -hyperlab_core::lorentz::quadratic(&w);
        if q > 1e-6 {
            return w.scale(q.sqrt().recip());
        }
    }
}

#[test]
fn renormalization_bounds_drift() {
    let mut rng = common::rng(11);
    let idx = spatial_indices(6);
    let steps: Vec<HypIsometry> = (0..16).map(|_| random_stabilizer(&mut rng, &idx)).collect();
    let push = transvection(&axis(), 0.3);
    let mut g = HypIsometry::identity();
    for i in 0..10_000 {
        g = g.compose(&steps[i % steps.len()]);
        g = if i % 2 == 0 {
            g.compose(&push)
        } else {
            g.compose(&push.inverse())
        };
    }
    assert!(
        g.orthogonality_defect() < 1e-9,
        "{}",
        g.orthogonality_defect()
    );
}

#[test]
fn collinear_center_is_rejected() {
    let x = HPoint::origin();
    let y = axis().eval(1.0);
    let z = axis().eval(-0.5);
    let g = transvection(&axis(), 0.1);
    assert!(matches!(
        steinhaus_factor(&g, &x, &y, &z),
        Err(Error::CollinearCenter)
    ));
}

#[test]
fn translation_length_matches_minimizer() {
    let mut rng = common::rng(5);
    for case in 0..40 {
        let n = 2 + case % 6;
        let g = if case % 2 == 0 {
            let t = random_isometry(&mut rng, n, 0.5);
            let ell = rng.random_range(0.3..2.0);
            let theta = rng.random_range(0.0..3.0);
            conj(&t, &loxodromic(ell, if n >= 3 { theta } else { 0.0 }))
        } else {
            random_isometry(&mut rng, n, 1.0)
        };
        if g.classify() != IsometryClass::Hyperbolic {
            continue;
        }
        let oracle = min_displacement(&g, n.max(3));
        let ell = g.translation_length();
        assert!(
            (ell - oracle).abs() < 1e-6,
            "case {case}: {ell} vs {oracle}"
        );
    }
}
