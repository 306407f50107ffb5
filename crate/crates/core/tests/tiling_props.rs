use cuberamsey::coloring::{verify_red_cube, Descriptor};
use cuberamsey::pipeline::{run_pipeline, EngineeringConstants, Outcome, PipelineConfig};
use cuberamsey::regime::Mode;
use cuberamsey::tiling::TilingRun;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn runs_never_breach_and_successes_verify(
        seed in any::<u64>(),
        p in 0.0f64..0.1,
        n_vertices in 1500u64..5000,
        n in 4u8..=6,
    ) {
        let mut c = PipelineConfig::new(3, n, Mode::Engineering, Descriptor::blue_random(n_vertices, p, seed));
        c.engineering = Some(EngineeringConstants { multipliers: vec![4], codim_max: vec![n] });
        c.spot_check.samples = 1;
        let r = run_pipeline(&c);
        prop_assert!(
            matches!(r.report.outcome, Outcome::VerifiedSuccess | Outcome::HonestFailure),
            "{:?}: {:?}", r.report.outcome, r.report.message
        );
        if let Some(t) = &r.report.tiling {
            if let Some(items) = &t.audit {
                prop_assert!(items.iter().all(|i| i.pass));
            }
        }
        if let Some(cp) = &r.checkpoint {
            let back = TilingRun::from_checkpoint(cp).unwrap();
            prop_assert_eq!(&back.checkpoint(), cp);
        }
        if r.report.outcome == Outcome::VerifiedSuccess {
            let o = c.oracle().unwrap();
            prop_assert!(verify_red_cube(&o, r.embedding.as_ref().unwrap()).is_valid());
            let pruned = r.pruned.as_ref().unwrap();
            prop_assert!(pruned.certification.pass);
            prop_assert!(pruned.cubes.iter().all(|x| 2 * x.kept.len() >= x.original));
            prop_assert_eq!(r.report.pruning.as_ref().unwrap().reprune_removed, 0);
        } else {
            prop_assert!(r.embedding.is_none());
        }
    }
}
