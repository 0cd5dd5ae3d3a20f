use crlab::geom::{boundary_residual, norm, weighted_dilate, GraphSurface};
use crlab::graphapprox::{graph_approximate, ApproxBox, ApproxConfig, ApproxError};
use crlab::hulls::{
    disc_anote, disc_tar_step1, AnoteBranch, DiscGenerator, TarA0, TarStep1, TorusStage1,
    TorusVariant,
};
use crlab::moments::{moment_integrals, moment_verdict};
use crlab::C64;
use proptest::prelude::*;
use rand::SeedableRng;

#[test]
fn moment_test_and_fiber_stage_agree_on_the_elliptic_counterexample() {
    let s = GraphSurface::special_elliptic();
    let m = moment_integrals(&|z: C64| z.conj(), &s, &[0.1, 0.3], 3, 128).unwrap();
    assert!(!moment_verdict(&m, 1e-8).pass);
    let cfg = ApproxConfig::new(ApproxBox::symmetric(0.5), 0.05);
    let r = graph_approximate(&|z: C64| z.conj(), &s, &cfg);
    assert!(matches!(r, Err(ApproxError::FiberNotApproximable { .. })));

    let hol = |z: C64| z * z * 2.0 - 1.0;
    assert!(
        moment_verdict(
            &moment_integrals(&hol, &s, &[0.1, 0.3], 3, 128).unwrap(),
            1e-10
        )
        .pass
    );
    assert!(graph_approximate(&hol, &s, &cfg).unwrap().pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dilated_step_one_discs_stay_attached(seed in any::<u64>(), t in 0.0f64..=1.0) {
        let g = TarStep1::new(4.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = g.sample(&mut rng);
        let a = disc_tar_step1(&p, 4.0).unwrap();
        let tar_a0 = TarA0 { c: 4.0 };
        let d = a.disc.dilate(t, &[1, 1, 2]);
        prop_assert!(boundary_residual(&d, &tar_a0, 64) <= 1e-8);
        let through = d.eval(a.zeta);
        let expect = weighted_dilate(&p, t, &[1, 1, 2]);
        let diff: Vec<C64> = through.iter().zip(&expect).map(|(x, y)| x - y).collect();
        prop_assert!(norm(&diff) <= 1e-12 * (1.0 + norm(&p)));
    }

    #[test]
    fn quadric_discs_pass_through_their_point(
        z1 in (-0.7f64..0.7, -0.7f64..0.7),
        z2 in (-0.7f64..0.7, -0.7f64..0.7),
        s in -0.4f64..0.4,
    ) {
        let p = [C64::new(z1.0, z1.1), C64::new(z2.0, z2.1), C64::new(s, 0.0)];
        let mut built = 0;
        for branch in [AnoteBranch::A1, AnoteBranch::A2] {
            if let Ok(a) = disc_anote(&p, branch) {
                built += 1;
                prop_assert!(a.through_error(&p) < 1e-12);
                for q in a.disc.boundary_values(64) {
                    let level = q[0].norm_sqr() - q[1].norm_sqr() - q[2].re;
                    prop_assert!(level.abs() < 1e-12 && q[2].im == 0.0);
                }
            }
        }
        prop_assert!(built >= 1);
    }

    #[test]
    fn torus_stage_one_discs_land_on_the_torus(seed in any::<u64>()) {
        let g = TorusStage1::new(TorusVariant::X);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = g.sample(&mut rng);
        let a = g.disc_through(&p).unwrap();
        prop_assert!(a.through_error(&p) < 1e-12);
        prop_assert!(boundary_residual(&a.disc, g.target(), 128) < 1e-12);
    }
}
