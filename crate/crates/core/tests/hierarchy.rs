use mgtheta::hierarchy::{label_consistency_check, mtheta_bound, BoundOptions, LevelFamily};
use mgtheta::{instances, BellExpression, ExclusivityMultigraph, NormalizationMode};

fn bound(name: &str, level: LevelFamily, mode: NormalizationMode) -> f64 {
    let mg = instances::multigraph(name).unwrap();
    let opts = BoundOptions {
        mode,
        ..BoundOptions::level(level)
    };
    mtheta_bound(&mg, &opts, name).unwrap().bound
}

#[test]
fn deterministic_levels() {
    let sub = NormalizationMode::Subnormalized;
    assert!((bound("chsh", LevelFamily::OnePlusAB, sub) - 3.4142).abs() < 1e-3);
    assert!((bound("pent1", LevelFamily::OnePlusAB, sub) - 2.178).abs() < 1e-3);
    assert!((bound("pent2", LevelFamily::OnePlusAB, sub) - 2.2071).abs() < 1e-3);
    assert!((bound("pent3", LevelFamily::OnePlusAB, sub) - 2.2071).abs() < 1e-3);
}

#[test]
fn normalization_modes_agree_on_small_instances() {
    for name in ["chsh", "pent1", "pent2", "pent3"] {
        let a = bound(name, LevelFamily::OnePlusAB, NormalizationMode::Subnormalized);
        let b = bound(name, LevelFamily::OnePlusAB, NormalizationMode::Strict);
        assert!((a - b).abs() <= 1e-5, "{name}: sub {a} strict {b}");
    }
}

#[test]
fn deterministic_levels_ignore_trial_count() {
    let mg = instances::multigraph("pent1").unwrap();
    let opts = BoundOptions {
        trials: 5,
        ..BoundOptions::level(LevelFamily::One)
    };
    let r = mtheta_bound(&mg, &opts, "pent1").unwrap();
    assert_eq!(r.per_trial.len(), 1);
    assert_eq!(r.trials, 1);
    assert!(r.per_trial[0].subsets.is_none());
    assert!(r.bound >= r.alpha - 1e-6);
}

#[test]
fn options_are_validated() {
    let mg = instances::multigraph("pent1").unwrap();
    assert!(mtheta_bound(&mg, &BoundOptions::one_x(6, 1, 0), "pent1").is_err());
    assert!(mtheta_bound(&mg, &BoundOptions::one_x(2, 0, 0), "pent1").is_err());
    let one = ExclusivityMultigraph::new(vec![1.0; 2], vec!["A".into()], vec![vec![(0, 1)]]).unwrap();
    assert!(mtheta_bound(&one, &BoundOptions::default(), "one").is_err());
}

#[test]
fn chsh_labels_are_consistent() {
    let mg = instances::multigraph("chsh").unwrap();
    let r = mtheta_bound(&mg, &BoundOptions::default(), "chsh").unwrap();
    let diags = label_consistency_check(&r, &mg);
    // Vertices 1 (00|00) and 6 (00|01) share Alice's part.
    let pair = diags.iter().find(|d| d.party == 0 && d.vertices == (0, 5)).expect("pair listed");
    assert!(pair.marginal_difference <= 1e-4, "{pair:?}");
    assert!(diags.iter().all(|d| !d.flagged), "{diags:?}");
}

#[test]
fn unlabelled_instances_give_no_diagnostics() {
    let mg = instances::multigraph("pent1").unwrap();
    let r = mtheta_bound(&mg, &BoundOptions::default(), "pent1").unwrap();
    let bare = ExclusivityMultigraph::new(mg.weights().to_vec(), mg.parties().to_vec(), mg.factors().iter().map(|f| f.edges().to_vec()).collect()).unwrap();
    assert!(label_consistency_check(&r, &bare).is_empty());
}

#[test]
fn identically_labelled_isolated_vertices_are_paired() {
    // Vertices 1 and 2 have no A-part, so both are isolated in factor A.
    let expr = BellExpression::from_events(&["A", "B"], &[(1.0, "_0|_0"), (1.0, "_1|_0"), (1.0, "00|11")]).unwrap();
    let (mg, _) = mgtheta::build_multigraph(&expr);
    let r = mtheta_bound(&mg, &BoundOptions::default(), "hand").unwrap();
    let diags = label_consistency_check(&r, &mg);
    assert!(diags.iter().any(|d| d.party == 0 && d.vertices == (0, 1)), "{diags:?}");
}
