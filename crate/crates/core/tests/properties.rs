use proptest::prelude::*;

use mgtheta::hierarchy::{mtheta_bound, solve_level, trial_subsets, BoundOptions, LevelFamily};
use mgtheta::theta::{gls_theta, moment_theta};
use mgtheta::words::recanonicalize;
use mgtheta::{
    adjoint, alpha, alpha_exhaustive, canonicalize, multiply, ExclusivityMultigraph, LevelSpec, NormalizationMode,
    ProjectorSymbol, ProjectorWord, Tolerances, VertexWeightedGraph,
};

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Random simple graph with weights in (0, 2].
fn graph(max_n: usize, density: f64) -> impl Strategy<Value = VertexWeightedGraph> {
    (1..=max_n).prop_flat_map(move |n| {
        let m = n * (n - 1) / 2;
        (
            proptest::collection::vec(0.01f64..=2.0, n),
            proptest::collection::vec(proptest::bool::weighted(density), m),
        )
            .prop_map(move |(w, mask)| {
                let edges: Vec<_> = pairs(n).into_iter().zip(mask).filter(|(_, k)| *k).map(|(e, _)| e).collect();
                VertexWeightedGraph::new(w, &edges).unwrap()
            })
    })
}

/// Random two-party multigraph.
fn multigraph(max_n: usize) -> impl Strategy<Value = ExclusivityMultigraph> {
    (2..=max_n).prop_flat_map(|n| {
        let m = n * (n - 1) / 2;
        (
            proptest::collection::vec(proptest::bool::weighted(0.4), m),
            proptest::collection::vec(proptest::bool::weighted(0.4), m),
        )
            .prop_map(move |(a, b)| {
                let pick = |mask: Vec<bool>| -> Vec<(usize, usize)> {
                    pairs(n).into_iter().zip(mask).filter(|(_, k)| *k).map(|(e, _)| e).collect()
                };
                ExclusivityMultigraph::new(vec![1.0; n], vec!["A".into(), "B".into()], vec![pick(a), pick(b)]).unwrap()
            })
    })
}

fn symbols(n: usize, len: usize) -> impl Strategy<Value = Vec<ProjectorSymbol>> {
    proptest::collection::vec((0..2usize, 0..n).prop_map(|(p, v)| ProjectorSymbol::new(p, v)), 0..=len)
}

fn mg_and_words() -> impl Strategy<Value = (ExclusivityMultigraph, Vec<ProjectorSymbol>, Vec<ProjectorSymbol>)> {
    multigraph(6).prop_flat_map(|mg| {
        let n = mg.vertex_count();
        (Just(mg), symbols(n, 8), symbols(n, 8))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonicalization_is_idempotent((mg, s, _) in mg_and_words()) {
        let w = canonicalize(&s, &mg);
        prop_assert_eq!(recanonicalize(&w, &mg), w);
    }

    #[test]
    fn adjoint_is_an_involution((mg, s, t) in mg_and_words()) {
        let w = canonicalize(&s, &mg);
        prop_assert_eq!(adjoint(&adjoint(&w)), w.clone());
        // (uv)† = v† u†
        let u = canonicalize(&t, &mg);
        prop_assert_eq!(adjoint(&multiply(&w, &u, &mg)), multiply(&adjoint(&u), &adjoint(&w), &mg));
    }

    #[test]
    fn parties_commute((mg, s, _) in mg_and_words(), k in 0usize..8) {
        // Swapping neighbouring symbols of different parties never changes the word.
        let mut t = s.clone();
        if k + 1 < t.len() && t[k].party != t[k + 1].party {
            t.swap(k, k + 1);
        }
        prop_assert_eq!(canonicalize(&s, &mg), canonicalize(&t, &mg));
    }

    #[test]
    fn null_absorbs((mg, s, _) in mg_and_words()) {
        let w = canonicalize(&s, &mg);
        prop_assert!(multiply(&ProjectorWord::Null, &w, &mg).is_null());
        prop_assert!(multiply(&w, &ProjectorWord::Null, &mg).is_null());
        let id = ProjectorWord::identity(2);
        prop_assert_eq!(multiply(&id, &w, &mg), w.clone());
        prop_assert_eq!(multiply(&w, &id, &mg), w);
    }

    #[test]
    fn multiplication_matches_concatenation((mg, s, t) in mg_and_words()) {
        let joined: Vec<_> = s.iter().chain(&t).copied().collect();
        prop_assert_eq!(multiply(&canonicalize(&s, &mg), &canonicalize(&t, &mg), &mg), canonicalize(&joined, &mg));
    }

    #[test]
    fn complement_is_an_involution(g in graph(10, 0.5)) {
        prop_assert_eq!(g.complement().complement(), g);
    }

    #[test]
    fn maximal_cliques_are_maximal_and_cover_edges(g in graph(10, 0.5)) {
        let cliques = g.maximal_cliques();
        let n = g.vertex_count();
        for c in &cliques {
            prop_assert!(g.is_clique(c));
            for v in (0..n).filter(|v| !c.contains(v)) {
                prop_assert!(!c.iter().all(|&u| g.adjacent(u, v)), "{:?} extends by {}", c, v);
            }
        }
        for &(a, b) in g.edges() {
            prop_assert!(cliques.iter().any(|c| c.contains(&a) && c.contains(&b)));
        }
        for v in 0..n {
            prop_assert!(cliques.iter().any(|c| c.contains(&v)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alpha_matches_exhaustive_search(g in graph(18, 0.3)) {
        let fast = alpha(&g);
        let slow = alpha_exhaustive(&g).unwrap();
        prop_assert!((fast.value - slow.value).abs() <= 1e-9, "{} vs {}", fast.value, slow.value);
        prop_assert!(g.is_independent(&fast.witness));
        let w: f64 = fast.witness.iter().map(|&v| g.weights()[v]).sum();
        prop_assert!((w - fast.value).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn theta_formulations_agree(g in graph(12, 0.4)) {
        let m = moment_theta(&g).unwrap().value;
        let d = gls_theta(&g).unwrap().value;
        prop_assert!((m - d).abs() <= 1e-6, "moment {} gls {}", m, d);
        prop_assert!(alpha(&g).value <= m + 1e-6);
    }

    #[test]
    fn theta_grows_when_an_edge_is_removed(g in graph(10, 0.5), k in any::<prop::sample::Index>()) {
        prop_assume!(!g.edges().is_empty());
        let drop = k.index(g.edges().len());
        let rest: Vec<_> = g.edges().iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, &e)| e).collect();
        let h = VertexWeightedGraph::new(g.weights().to_vec(), &rest).unwrap();
        prop_assert!(moment_theta(&h).unwrap().value >= moment_theta(&g).unwrap().value - 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn levels_are_monotone(mg in multigraph(5), seed in any::<u64>()) {
        let n = mg.vertex_count();
        let tol = Tolerances::default();
        let mode = NormalizationMode::Subnormalized;
        let value = |level: &LevelSpec| solve_level(&mg, level, mode, &tol).unwrap().solution.objective;
        let big = trial_subsets(n, n - 1, 2, seed, 0, false);
        let small: Vec<Vec<usize>> = big.iter().map(|s| s[..n - 2].to_vec()).collect();
        let l1 = value(&LevelSpec::L1);
        let lsmall = value(&LevelSpec::L1x { x: n - 2, subsets: small });
        let lbig = value(&LevelSpec::L1x { x: n - 1, subsets: big });
        let lab = value(&LevelSpec::L1plusAB);
        prop_assert!(lsmall <= l1 + 1e-6, "L1 {} L1.x {}", l1, lsmall);
        prop_assert!(lbig <= lsmall + 1e-6, "nested subsets {} then {}", lsmall, lbig);
        prop_assert!(lab <= lbig + 1e-6, "L1.x {} L1+AB {}", lbig, lab);
        let a = alpha(&mg.flatten()).value;
        prop_assert!(lab >= a - 1e-6, "alpha {} above bound {}", a, lab);
    }

    #[test]
    fn reports_replay(mg in multigraph(4), seed in any::<u64>()) {
        let opts = BoundOptions { x: 2, trials: 3, seed, ..BoundOptions::level(LevelFamily::OneX) };
        let a = mtheta_bound(&mg, &opts, "random").unwrap();
        let b = mtheta_bound(&mg, &opts, "random").unwrap();
        prop_assert_eq!(a.without_timings(), b.without_timings());
        let min = a.per_trial.iter().filter_map(|t| t.value).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(a.bound, min);
    }
}

#[test]
fn subsets_depend_only_on_seed_and_trial() {
    let a = trial_subsets(24, 11, 2, 42, 5, false);
    assert_eq!(a, trial_subsets(24, 11, 2, 42, 5, false));
    assert_ne!(a, trial_subsets(24, 11, 2, 42, 6, false));
    assert_ne!(a[0], a[1], "parties draw independently");
    for s in &a {
        assert_eq!(s.len(), 11);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }
    let eq = trial_subsets(24, 11, 2, 42, 5, true);
    assert_eq!(eq[0], eq[1]);
}
