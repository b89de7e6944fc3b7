use lpoa_core::driver::{hausdorff_series, run, RunConfig, RunTrace, Termination};
use lpoa_core::lp_geometry::{lp_norm, NormExponent};
use lpoa_core::problems::{by_key, PROBLEM_KEYS};

fn eps(key: &str) -> f64 {
    match key {
        "example1-q3" => 0.02,
        "example1-q2" => 1e-3,
        "ellipse" => 1e-3,
        _ => 0.1,
    }
}

fn traces() -> Vec<(RunTrace, f64)> {
    let mut out = Vec::new();
    for key in PROBLEM_KEYS {
        for p in [1.5, 2.0, 4.0] {
            out.push((run(&RunConfig::new(key, p, eps(key))).unwrap(), p));
        }
    }
    out
}

#[test]
fn runs_converge_and_respect_invariants() {
    for (t, p) in traces() {
        let key = t.config.problem_key.clone();
        let prob = by_key(&key).unwrap();
        let ne = NormExponent::new(p).unwrap();
        let dual = ne.dual();
        assert_eq!(t.termination, Termination::Converged, "{key} p={p}");
        let series = hausdorff_series(&t);
        let (last, rest) = series.split_last().unwrap();
        assert!(*last <= t.config.epsilon);
        assert!(rest.iter().all(|&r| r > t.config.epsilon), "{key} p={p}: stopped late");
        assert_eq!(t.cut_count() + 1, t.iterations.len());

        for r in &t.iterations {
            // Support points lie in the upper image and the decision is feasible.
            assert!(prob.feasible_set.contains(&r.decision, 1e-6), "{key} p={p} k={}", r.k);
            let g = prob.gamma_eval(&r.decision);
            assert!(r.support_point.iter().zip(&g).all(|(y, gi)| *y >= gi - 1e-6));
            let gap: Vec<f64> = r.farthest_vertex.iter().zip(&r.support_point).map(|(a, b)| a - b).collect();
            let dist = if gap.iter().all(|d| d.abs() < 1e-14) { 0.0 } else { lp_norm(&gap, &ne).unwrap() };
            assert!((dist - r.residual_norm).abs() <= 1e-6 * (1.0 + r.residual_norm));
            if let Some(w) = &r.cut_normal {
                // Holder equality: the normal attains the distance.
                assert!((lp_norm(w, &dual).unwrap() - 1.0).abs() < 1e-9);
                let along: f64 = w.iter().zip(&gap).map(|(a, b)| a * b).sum();
                assert!((along + r.residual_norm).abs() <= 1e-6 * (1.0 + r.residual_norm), "{key} p={p} k={}", r.k);
            }
        }
        // The terminal record describes the final polytope.
        assert!(t.final_polytope.vertices().len() == t.iterations.last().unwrap().vertex_count);
    }
}

#[test]
fn traces_round_trip_through_json() {
    let t = run(&RunConfig::new("ellipse", 3.0, 1e-2)).unwrap();
    let text = serde_json::to_string(&t).unwrap();
    let back: RunTrace = serde_json::from_str(&text).unwrap();
    assert_eq!(back.iterations, t.iterations);
    assert_eq!(back.final_polytope.vertices(), t.final_polytope.vertices());
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}

#[test]
fn larger_tolerance_needs_no_more_iterations() {
    for key in ["example1-q3", "example2"] {
        let coarse = run(&RunConfig::new(key, 2.0, 2.0 * eps(key))).unwrap().iterations.len();
        let fine = run(&RunConfig::new(key, 2.0, eps(key))).unwrap().iterations.len();
        assert!(coarse <= fine, "{key}: {coarse} > {fine}");
    }
}
