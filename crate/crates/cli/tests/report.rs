use contact_grasp::report::*;

fn dto(success: bool, reps: usize) -> TrialReportDto {
    TrialReportDto {
        scene: "s".into(),
        seed: 0,
        success,
        repetitions_used: reps,
        repetitions: vec![],
    }
}

#[test]
fn aggregate_counts() {
    let reports = [dto(true, 1), dto(true, 3), dto(false, 10)];
    let timings = [TrialTimings {
        seed: 0,
        repetitions: vec![RepetitionTimings {
            index: 1,
            search: 0.1,
            refine: 0.2,
            synthesis: 0.3,
            total: 0.6,
        }],
    }];
    let a = Aggregate::new(&reports, &timings);
    assert_eq!(a.successes, 2);
    assert!((a.reps_mean - 14.0 / 3.0).abs() < 1e-12);
    assert!((a.total_mean - 0.6).abs() < 1e-12);
    let t = a.table("s");
    assert!(t.contains("2/3") && t.contains("Reps") && t.contains("Refine"));
}
