use std::sync::OnceLock;

use ballmax::integrand::{check_condition, default_samples, estimate_lambda, CheckTolerance};
use ballmax::perturb::{generate, PerturbationFamily, PerturbationSpec};
use ballmax::problem::Problem;
use ballmax::radial::{build_auxiliary, lp_distance, GridFunction};
use ballmax::stability::{directional_masses, evaluate_chain, stability_report};
use ballmax::transport::{
    exhaustive, hungarian, pairing_cost, ray_transport, standard_test_functions, verify_pushforward,
};
use ballmax::{Family, Integrand64, Problem64};
use proptest::prelude::*;

fn builtin(kind: u8, param: f64, q: f64, p: f64, n: usize) -> Integrand64 {
    let family = match kind % 3 {
        0 => Family::PowerDecay { m: param, q },
        1 => Family::LinearCutoff { c: 1.0 + param, q },
        _ => Family::Exponential { gamma: param, q },
    };
    Integrand64::new(family, 1.0, p, n).unwrap()
}

/// Linear cutoff `c = 3, q = p = 2` on coarse grids, one per dimension.
fn problem(n: usize) -> &'static Problem64 {
    static CACHE: [OnceLock<Problem64>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[n - 1].get_or_init(|| {
        let f = Integrand64::new(Family::LinearCutoff { c: 3.0, q: 2.0 }, 1.0, 2.0, n).unwrap();
        let dirs = [2, 48, 96][n - 1];
        Problem::with_resolution(f, 4.0, 256, dirs).unwrap()
    })
}

fn family() -> impl Strategy<Value = PerturbationFamily> {
    prop::sample::select(PerturbationFamily::ALL.to_vec())
}

/// A perturbation spec with `τ` inside its admissible range.
fn competitor(n: usize) -> impl Strategy<Value = PerturbationSpec<f64>> {
    (family(), 0.0..1.0f64, any::<u64>()).prop_map(move |(fam, frac, seed)| {
        let pb = problem(n);
        let hi = PerturbationSpec::max_tau(fam, n, pb.ball.radius, pb.grid.r_max()).min(2.0);
        PerturbationSpec::new(fam, frac * hi).with_seed(seed)
    })
}

fn competitor_any_dim() -> impl Strategy<Value = (usize, PerturbationSpec<f64>)> {
    (1usize..=3).prop_flat_map(|n| competitor(n).prop_map(move |s| (n, s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn condition_holds_exactly_when_q_at_least_p(
        kind in 0u8..3, param in 0.0..4.0f64, p in 1.0..4.0f64, extra in 0.0..3.0f64, n in 1usize..=3,
    ) {
        let f = builtin(kind, param, p + extra, p, n);
        let r: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
        let (_, lambdas) = default_samples(1.0);
        let exact = CheckTolerance { tol: 0.0, strict: 0.0 };
        prop_assert!(check_condition(&f, &r, &lambdas, exact).unwrap().pass);
    }

    #[test]
    fn builtins_vanish_at_zero(kind in 0u8..3, param in 0.0..4.0f64, q in 0.1..5.0f64, r in 0.0..10.0f64) {
        let f = builtin(kind, param, q, 1.0, 1);
        prop_assert_eq!(f.eval(r, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn lambda_shrinks_as_truncation_grows(gamma in 0.1..3.0f64, cells in 8usize..64, cut in 2usize..8) {
        let f = builtin(2, gamma, 2.0, 2.0, 1);
        let h = 4.0 / cells as f64;
        let nodes: Vec<f64> = (0..=cells).map(|k| k as f64 * h).collect();
        let inner = &nodes[..=(cells * cut / 8).max(1)];
        prop_assert!(estimate_lambda(&f, &nodes).unwrap() <= estimate_lambda(&f, inner).unwrap());
    }

    #[test]
    fn linear_cutoff_rate_is_one(c in 2.0..10.0f64, cells in 2usize..500) {
        let f = builtin(1, c - 1.0, 2.0, 2.0, 1);
        let nodes: Vec<f64> = (0..=cells).map(|k| k as f64 * 2.0 / cells as f64).collect();
        let lam = estimate_lambda(&f, &nodes).unwrap();
        prop_assert!((lam - 1.0).abs() < 1e-12, "{}", lam);
    }

    #[test]
    fn generation_is_deterministic_and_admissible((n, spec) in competitor_any_dim()) {
        let pb = problem(n);
        let u = generate(&spec, &pb.ball, &pb.grid).unwrap();
        let again = generate(&spec, &pb.ball, &pb.grid).unwrap();
        prop_assert_eq!(u.rays(), again.rays());
        prop_assert!(u.in_constraint_set(pb.tol.mass));
        for ray in u.rays() {
            prop_assert!(ray.max_value() <= 1.0);
            prop_assert!(ray.segments().iter().all(|s| s.level.min_value() >= 0.0));
        }
    }

    #[test]
    fn rearrangement_keeps_ray_masses((n, spec) in competitor_any_dim()) {
        let pb = problem(n);
        let u = generate(&spec, &pb.ball, &pb.grid).unwrap();
        let v = build_auxiliary(&u).to_grid_function();
        for i in 0..pb.grid.n_dir() {
            let (mu, mv) = (u.ray_mass(i).value, v.ray_mass(i).value);
            prop_assert!((mu - mv).abs() <= 1e-8, "ray {}: {} vs {}", i, mu, mv);
        }
    }

    #[test]
    fn chain_holds_for_every_competitor((n, spec) in competitor_any_dim()) {
        let pb = problem(n);
        let u = generate(&spec, &pb.ball, &pb.grid).unwrap();
        let c = evaluate_chain(pb, &u);
        prop_assert!(c.uv_holds() && c.vw_holds(), "{:?}", c);
    }

    #[test]
    fn radial_competitors_have_constant_kappa(
        fam in prop::sample::select(vec![
            PerturbationFamily::DilateBall,
            PerturbationFamily::ScaleHeight,
            PerturbationFamily::Annulus,
            PerturbationFamily::SmoothBump,
        ]),
        frac in 0.0..0.99f64,
        n in 1usize..=3,
    ) {
        let pb = problem(n);
        let hi = PerturbationSpec::max_tau(fam, n, pb.ball.radius, pb.grid.r_max()).min(2.0);
        let u = generate(&PerturbationSpec::new(fam, frac * hi), &pb.ball, &pb.grid).unwrap();
        let g = build_auxiliary(&u);
        prop_assert!(g.max_kappa() - g.min_kappa() <= 1e-12);
    }

    #[test]
    fn ray_maps_are_monotone_and_dominated((n, spec) in competitor_any_dim(), pick in any::<prop::sample::Index>()) {
        let pb = problem(n);
        let u = generate(&spec, &pb.ball, &pb.grid).unwrap();
        let v = build_auxiliary(&u).to_grid_function();
        let i = pick.index(pb.grid.n_dir());
        let map = ray_transport(&pb.grid, u.ray(i), v.ray(i), 2.0, pb.tol.transport_mass).unwrap();
        prop_assert!(map.is_monotone());
        prop_assert!(map.in_range());
        prop_assert_eq!(map.domination_excess(), 0.0);
    }

    #[test]
    fn pushforward_identity_on_random_rays(seed in any::<u64>(), frac in 0.05..1.0f64) {
        let pb = problem(2);
        let spec = PerturbationSpec::new(PerturbationFamily::RandomRays, frac).with_seed(seed);
        let u = generate(&spec, &pb.ball, &pb.grid).unwrap();
        let g = build_auxiliary(&u);
        let v = g.to_grid_function();
        for i in [0, 17, 31] {
            let map = ray_transport(&pb.grid, u.ray(i), v.ray(i), 2.0, pb.tol.transport_mass).unwrap();
            for check in verify_pushforward(&map, &standard_test_functions(g.kappa()[i])) {
                prop_assert!(check.rel_error <= 1e-6, "{:?}", check);
            }
        }
    }

    #[test]
    fn directional_identity_holds((n, spec) in competitor_any_dim()) {
        let pb = problem(n);
        let u = generate(&spec, &pb.ball, &pb.grid).unwrap();
        let m = directional_masses(&u, &build_auxiliary(&u));
        prop_assert!(m.identity_residual <= 1e-8, "{}", m.identity_residual);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hungarian_matches_enumeration(k in 1usize..=7, entries in prop::collection::vec(0i64..1000, 49)) {
        let cost: Vec<Vec<i64>> = (0..k).map(|i| entries[i * 7..i * 7 + k].to_vec()).collect();
        let pairing = hungarian(&cost);
        let (_, best) = exhaustive(&cost);
        prop_assert_eq!(pairing_cost(&cost, &pairing), best);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn displacement_bounds_hold((n, spec) in (1usize..=2).prop_flat_map(|n| competitor(n).prop_map(move |s| (n, s)))) {
        let pb = problem(n);
        let u = generate(&spec, &pb.ball, &pb.grid).unwrap();
        let s = stability_report(pb, &u).unwrap();
        prop_assert!(s.quant1_holds() && s.quant2_holds(), "{:?}", s);
        prop_assert!(s.lhs_bounded());
    }

    #[test]
    fn ball_families_approach_the_maximizer(
        fam in prop::sample::select(vec![
            PerturbationFamily::TranslateBall,
            PerturbationFamily::DilateBall,
            PerturbationFamily::ScaleHeight,
            PerturbationFamily::Annulus,
        ]),
        a in 0.0..1.0f64,
        b in 0.0..1.0f64,
        n in 1usize..=3,
    ) {
        let pb = problem(n);
        let hi = PerturbationSpec::max_tau(fam, n, pb.ball.radius, pb.grid.r_max()).min(0.9);
        let (lo, up) = if a < b { (a * hi, b * hi) } else { (b * hi, a * hi) };
        let dist = |tau: f64| -> f64 {
            let u: GridFunction<f64> = generate(&PerturbationSpec::new(fam, tau), &pb.ball, &pb.grid).unwrap();
            lp_distance(&u, &pb.maximizer, 2.0).value
        };
        prop_assert!(dist(lo) <= dist(up) + 1e-9);
        prop_assert!(dist(0.0) == 0.0);
    }
}
