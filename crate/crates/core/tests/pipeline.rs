use dpfib::family::{classify, FamilyParams, VerdictTag};
use dpfib::pipeline::{run_pipeline, Overall, PipelineOptions, PipelineReport};
use dpfib::selftest::{negative_control_members, pipeline_families};
use dpfib::Field;

#[test]
fn every_route_reaches_a_verdict() {
    let opts = PipelineOptions::default();
    for (params, field) in pipeline_families() {
        let r = run_pipeline(&params, &field, 3, &opts).unwrap();
        assert_eq!(r.overall, Overall::ObstructionWitnessed, "{params}: {:?}", r.failures);
        assert!(r.h0_nonzero);
        assert_eq!(r.sheaf_m.cited, r.sheaf_m.recomputed);
        assert!(!r.census.is_empty() || r.smoothness_outside.is_some());
    }
}

#[test]
fn report_round_trips_through_json() {
    let field = Field::parse("GF(3^2)").unwrap();
    let params = FamilyParams::Dp2 { n: 3, lambda: 3, mu: 4, nu: 6 };
    let r = run_pipeline(&params, &field, 11, &PipelineOptions::default()).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: PipelineReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}

#[test]
fn negative_controls_never_pass() {
    for (params, field, sabotage, seeds) in negative_control_members() {
        let opts = PipelineOptions {
            sabotage: Some(sabotage),
            max_attempts: 2,
            ..Default::default()
        };
        let r = run_pipeline(&params, &field, seeds[0], &opts).unwrap();
        assert_eq!(r.overall, Overall::Failed, "{params} {sabotage:?}");
        assert_eq!(r.attempts.len(), 2);
    }
}

#[test]
fn inconclusive_family_fails_on_missing_sections() {
    // 2ν - λ - μ - (n-1) < 0, so M has no sections
    let params = FamilyParams::Dp2 { n: 4, lambda: 0, mu: 0, nu: 1 };
    assert_eq!(classify(&params).tag, VerdictTag::Inconclusive);
    let r = run_pipeline(&params, &Field::parse("GF(4)").unwrap(), 1, &PipelineOptions::default()).unwrap();
    assert_eq!(r.overall, Overall::Failed);
    assert!(!r.h0_nonzero);
}
