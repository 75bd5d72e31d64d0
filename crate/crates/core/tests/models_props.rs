mod common;

use hyperlab_core::lorentz::lorentz_form;
use hyperlab_core::models::{
    angle, busemann, dist, from_klein, midpoint, sigma_hilbert, sigma_hilbert_inv, to_klein,
};
use hyperlab_core::sampling::{
    random_hpoint, random_ideal, random_isometry, random_vector, spatial_indices,
};
use hyperlab_core::HPoint;
use proptest::prelude::*;

// d(x, gamma(s)) from the form directly, gamma the ray from e_0 towards u
fn dist_to_ray(x: &HPoint, u: &hyperlab_core::SparseVec, s: f64) -> f64 {
    let c = x.coords().get(0) * s.cosh() - x.coords().dot(u) * s.sinh();
    c.acosh()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cosh_dist_matches_form(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = common::rng(seed);
        let idx = spatial_indices(n);
        let x = random_hpoint(&mut rng, &idx, 1.0);
        let y = random_hpoint(&mut rng, &idx, 1.0);
        let form = lorentz_form(x.coords(), y.coords());
        prop_assert!((dist(&x, &y).cosh() - form).abs() <= 1e-9 * form);
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = common::rng(seed);
        let idx = spatial_indices(n);
        let [a, b, c] = [(); 3].map(|_| random_hpoint(&mut rng, &idx, 1.5));
        prop_assert!(dist(&a, &c) <= dist(&a, &b) + dist(&b, &c) + 1e-10);
        prop_assert_eq!(dist(&a, &a), 0.0);
    }

    #[test]
    fn klein_round_trip(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = common::rng(seed);
        let p = random_hpoint(&mut rng, &spatial_indices(n), 1.0);
        let back = from_klein(&to_klein(&p)).unwrap();
        prop_assert!((back.coords() - p.coords()).norm() <= 1e-10 * p.coords().get(0));
    }

    #[test]
    fn busemann_is_ray_limit(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = common::rng(seed);
        let idx = spatial_indices(n);
        let xi = random_ideal(&mut rng, &idx);
        let x = random_hpoint(&mut rng, &idx, 1.0);
        let x0 = random_hpoint(&mut rng, &idx, 1.0);
        let u = xi.direction();
        let s = 40.0;
        let oracle = dist_to_ray(&x, &u, s) - dist_to_ray(&x0, &u, s);
        prop_assert!((busemann(&xi, &x, &x0) - oracle).abs() <= 1e-6);
    }

    #[test]
    fn busemann_is_one_lipschitz(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = common::rng(seed);
        let idx = spatial_indices(n);
        let xi = random_ideal(&mut rng, &idx);
        let x = random_hpoint(&mut rng, &idx, 2.0);
        let y = random_hpoint(&mut rng, &idx, 2.0);
        let o = HPoint::origin();
        let diff = busemann(&xi, &x, &o) - busemann(&xi, &y, &o);
        prop_assert!(diff.abs() <= dist(&x, &y) + 1e-9);
    }

    #[test]
    fn angle_obeys_law_of_cosines(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = common::rng(seed);
        let idx = spatial_indices(n);
        let [p, a, b] = [(); 3].map(|_| random_hpoint(&mut rng, &idx, 1.0));
        let gamma = angle(&p, &a, &b).unwrap();
        let (da, db, c) = (dist(&p, &a), dist(&p, &b), dist(&a, &b));
        let predicted = da.cosh() * db.cosh() - da.sinh() * db.sinh() * gamma.cos();
        prop_assert!((c.cosh() - predicted).abs() <= 1e-8 * c.cosh());
    }

    #[test]
    fn angle_is_isometry_invariant(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = common::rng(seed);
        let idx = spatial_indices(n);
        let [p, a, b] = [(); 3].map(|_| random_hpoint(&mut rng, &idx, 1.0));
        let g = random_isometry(&mut rng, n + 2, 1.0);
        let before = angle(&p, &a, &b).unwrap();
        let after = angle(&g.apply(&p), &g.apply(&a), &g.apply(&b)).unwrap();
        prop_assert!((before - after).abs() <= 1e-8);
    }

    #[test]
    fn midpoint_is_equidistant(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = common::rng(seed);
        let idx = spatial_indices(n);
        let x = random_hpoint(&mut rng, &idx, 2.0);
        let y = random_hpoint(&mut rng, &idx, 2.0);
        let m = midpoint(&x, &y);
        let d = dist(&x, &y);
        prop_assert!((dist(&x, &m) - d / 2.0).abs() <= 1e-9 * d.max(1.0));
        prop_assert!((dist(&y, &m) - d / 2.0).abs() <= 1e-9 * d.max(1.0));
    }

    #[test]
    fn sigma_round_trip(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = common::rng(seed);
        let x = random_vector(&mut rng, &spatial_indices(n), 3.0);
        let y = sigma_hilbert(&x).unwrap();
        prop_assert!(y.norm() < 1.0);
        let back = sigma_hilbert_inv(&y).unwrap();
        prop_assert!((&back - &x).norm() <= 1e-10 * x.norm().max(1.0));
    }
}
