use cuberamsey::coloring::{blue_degree, verify_red_cube, ColoringOracle, Descriptor};
use cuberamsey::embed::{baseline_embed, max_blue_degree, EmbedError};
use cuberamsey::pipeline::{run_pipeline, EngineeringConstants, Outcome, PipelineConfig};
use cuberamsey::regime::Mode;

fn config(s: u8, n: u8, mode: Mode, d: Descriptor) -> PipelineConfig {
    PipelineConfig::new(s, n, mode, d)
}

#[test]
fn baseline_embeds_for_twenty_seeds() {
    for seed in 0..20 {
        let o = ColoringOracle::from_descriptor(&Descriptor::blue_random(4000, 0.003, seed)).unwrap();
        let (d_max, v) = max_blue_degree(&o);
        let all: Vec<u32> = (0..4000).collect();
        assert_eq!(blue_degree(&o, v, &all), d_max);
        assert!((0..4000).all(|u| blue_degree(&o, u, &all) <= d_max));
        assert!(4000 >= d_max * 10 + 1024);
        let e = baseline_embed(&o, 10).unwrap();
        assert!(verify_red_cube(&o, &e).is_valid(), "seed {seed}");
    }
}

#[test]
fn baseline_refuses_dense_colorings() {
    let o = ColoringOracle::from_descriptor(&Descriptor::blue_random(1500, 0.5, 1)).unwrap();
    assert!(matches!(baseline_embed(&o, 10), Err(EmbedError::Refused { .. })));
}

#[test]
fn paper_exact_refuses_small_n() {
    let r = run_pipeline(&config(3, 6, Mode::PaperExact, Descriptor::all_red(100)));
    assert_eq!(r.report.outcome, Outcome::Refused);
    assert_eq!(r.report.outcome.exit_code(), 4);
    assert!(r.report.message.as_deref().unwrap().contains("N ≥ 7000·2^n"));
    assert!(r.report.verification.is_none());
}

#[test]
fn all_red_paper_exact_succeeds() {
    let r = run_pipeline(&config(3, 6, Mode::PaperExact, Descriptor::all_red(448_000)));
    assert_eq!(r.report.outcome, Outcome::VerifiedSuccess);
    assert_eq!(r.report.outcome.exit_code(), 0);
    assert!(r.report.stamp.is_none());
    assert!(r.report.invariants.iter().all(|i| i.pass));
    let e = r.embedding.unwrap();
    assert!(verify_red_cube(&ColoringOracle::all_red(448_000), &e).is_valid());
}

#[test]
fn engineering_runs_are_stamped() {
    for s in [4u8, 5] {
        let r = run_pipeline(&config(s, 6, Mode::Engineering, Descriptor::all_red(5000)));
        assert_eq!(r.report.outcome, Outcome::VerifiedSuccess, "s = {s}: {:?}", r.report.message);
        assert_eq!(r.report.stamp.as_deref(), Some("guarantees-void: engineering constants"));
        assert!(r.report_json().contains("guarantees-void: engineering constants"));
    }
}

#[test]
fn every_success_is_verified() {
    for seed in 0..6 {
        let mut c = config(3, 6, Mode::Engineering, Descriptor::blue_multipartite(8000, 2, 0.3, seed));
        c.engineering = Some(EngineeringConstants {
            multipliers: vec![4],
            codim_max: vec![6],
        });
        let r = run_pipeline(&c);
        let o = c.oracle().unwrap();
        match r.report.outcome {
            Outcome::VerifiedSuccess => {
                assert!(r.report.verification.as_ref().unwrap().is_valid());
                assert!(verify_red_cube(&o, r.embedding.as_ref().unwrap()).is_valid());
                let pr = r.report.pruning.as_ref().unwrap();
                assert!(pr.certification.pass);
                assert!(r.pruned.as_ref().unwrap().cubes.iter().all(|p| 2 * p.kept.len() >= p.original));
            }
            Outcome::HonestFailure => assert!(r.embedding.is_none()),
            other => panic!("seed {seed}: {other:?} {:?}", r.report.message),
        }
    }
}

#[test]
fn reports_are_deterministic_across_threads() {
    let mut c = config(3, 6, Mode::Engineering, Descriptor::blue_multipartite(20_000, 2, 0.1, 42));
    c.threads = Some(1);
    let a = run_pipeline(&c).report_json();
    c.threads = Some(8);
    let b = run_pipeline(&c).report_json();
    let again = run_pipeline(&c).report_json();
    assert_eq!(a, b);
    assert_eq!(b, again);
}

#[test]
fn config_schema() {
    let text = r#"
s = 3
n = 6
mode = "paper-exact"
threads = 2
strategy = "greedy"

[coloring]
kind = "blue-multipartite"
N = 448000
parts = 2
p = 0.1
seed = 42

[finder]
exact_cap = 30

[spot_check]
samples = 2
"#;
    let c = PipelineConfig::from_toml(text).unwrap();
    assert_eq!(c.threads, Some(2));
    assert_eq!(c.finder.exact_cap, 30);
    assert_eq!(c.finder.descent_probes, 2);
    assert_eq!(c.spot_check.samples, 2);
    assert_eq!(c.spot_check.size, 200);
    let back = PipelineConfig::from_toml(&c.to_toml()).unwrap();
    assert_eq!(back.coloring, c.coloring);
    assert_eq!(back.strategy, c.strategy);
    assert!(PipelineConfig::from_toml(&format!("{text}\nbogus = 1\n")).is_err());
    assert!(PipelineConfig::from_toml("s = 3\nn = 6\nmode = \"fast\"\n[coloring]\nkind = \"all-red\"\nN = 9\n").is_err());
    let mut eng = c.clone();
    eng.engineering = Some(EngineeringConstants {
        multipliers: vec![4],
        codim_max: vec![6],
    });
    assert_eq!(run_pipeline(&eng).report.outcome, Outcome::ConfigError);
}

#[test]
fn exit_codes() {
    assert_eq!(Outcome::VerifiedSuccess.exit_code(), 0);
    assert_eq!(Outcome::HonestFailure.exit_code(), 2);
    assert_eq!(Outcome::InvariantBreach.exit_code(), 3);
    assert_eq!(Outcome::Refused.exit_code(), 4);
    assert_eq!(Outcome::ConfigError.exit_code(), 4);
}

fn random_run(p: f64) -> cuberamsey::pipeline::PipelineResult {
    let mut c = config(3, 6, Mode::Engineering, Descriptor::blue_random(8000, p, 1));
    c.engineering = Some(EngineeringConstants {
        multipliers: vec![4],
        codim_max: vec![6],
    });
    run_pipeline(&c)
}

#[test]
fn sparse_random_coloring_needs_a_real_tiling() {
    let r = random_run(0.04);
    assert_eq!(r.report.outcome, Outcome::VerifiedSuccess, "{:?}", r.report.message);
    let t = r.report.tiling.as_ref().unwrap();
    assert!(t.codim_histogram.keys().any(|&d| d > 0));
    assert!(t.cubes_per_level[1] > 1);
    assert!(r.report.invariants.iter().all(|i| i.pass));
}

#[test]
fn dense_random_coloring_fails_honestly() {
    let r = random_run(0.12);
    assert_eq!(r.report.outcome, Outcome::HonestFailure);
    assert_eq!(r.report.outcome.exit_code(), 2);
    let f = r.report.tiling.as_ref().unwrap().failure.as_ref().unwrap();
    assert!(f.per_i.iter().any(|t| t.unassigned > 0));
    assert!(r.embedding.is_none() && r.report.verification.is_none());
}
