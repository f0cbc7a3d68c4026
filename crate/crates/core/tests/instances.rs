use mgtheta::graph::VertexWeightedGraph;
use mgtheta::{alpha, gls_theta, instances, moment_theta};

fn flat(name: &str) -> VertexWeightedGraph {
    instances::multigraph(name).unwrap().flatten()
}

#[test]
fn classical_values() {
    for (name, want) in [("chsh", 3.0), ("pent1", 2.0), ("pent2", 2.0), ("pent3", 2.0), ("i3csw", 6.0), ("i3322csw", 6.0)] {
        assert_eq!(alpha(&flat(name)).value, want, "{name}");
    }
}

#[test]
fn lovasz_values() {
    for (name, want, tol) in [
        ("pent1", 5f64.sqrt(), 1e-5),
        ("chsh", 2.0 + 2f64.sqrt(), 1e-4),
        ("i3csw", 4.0 * 3f64.sqrt(), 1e-3),
        ("i3322csw", 6.588412879, 1e-4),
    ] {
        let g = flat(name);
        let t = std::time::Instant::now();
        let m = moment_theta(&g).unwrap();
        let t1 = t.elapsed();
        let l = gls_theta(&g).unwrap();
        eprintln!("{name}: moment {:.9} ({} it, {:?}) gls {:.9} ({} it)", m.value, m.iterations, t1, l.value, l.iterations);
        assert!((m.value - want).abs() < tol, "{name} {}", m.value);
        assert!((m.value - l.value).abs() < 1e-6, "{name} {} {}", m.value, l.value);
    }
}
