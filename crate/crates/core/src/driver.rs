//! The outer-approximation loop: start from a polytope containing the slice,
//! repeatedly find the vertex farthest from `A` in the l_p norm and cut it off
//! with the supporting halfspace through its nearest point.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_geometry::NormExponent;
use crate::polytope::{Halfspace, Polytope, PolytopeTolerances};
use crate::problems::{by_key, ProblemInstance};
use crate::scalarization::{solve_batch, ScalarizationResult, SolverTolerances, SubproblemCache};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem_key: String,
    pub p: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub tolerances: SolverTolerances,
    pub polytope_tolerances: PolytopeTolerances,
    pub seed: u64,
    /// Also keep the support point and normal of every solved vertex, not
    /// only of the cut ones.
    pub record_pairs: bool,
}

impl RunConfig {
    pub fn new(problem_key: &str, p: f64, epsilon: f64) -> Self {
        Self {
            problem_key: problem_key.to_string(),
            p,
            epsilon,
            max_iterations: 1000,
            tolerances: SolverTolerances::default(),
            polytope_tolerances: PolytopeTolerances::default(),
            seed: 42,
            record_pairs: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        NormExponent::new(self.p)?;
        if !(self.epsilon.is_finite() && self.epsilon > self.tolerances.zero) {
            return Err(Error::Config(format!(
                "epsilon must exceed the zero-residual threshold {}",
                self.tolerances.zero
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// One pass of the loop. The final record of a converged run carries no cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub farthest_vertex: Vec<f64>,
    /// Hausdorff distance between the current polytope and `A`.
    pub residual_norm: f64,
    pub support_point: Vec<f64>,
    pub decision: Vec<f64>,
    pub cut_normal: Option<Vec<f64>>,
    pub vertex_count: usize,
    pub new_vertex_count: usize,
    pub cache_hits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    SolverFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPair {
    pub support_point: Vec<f64>,
    pub normal: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: RunConfig,
    pub initial_halfspace_count: usize,
    pub iterations: Vec<IterationRecord>,
    pub final_polytope: Polytope,
    pub termination: Termination,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertex_pairs: Vec<SupportPair>,
    /// Wall-clock milliseconds per iteration; kept out of the serialized
    /// trace so identical runs serialize identically.
    #[serde(skip)]
    pub wall_ms: Vec<f64>,
}

impl RunTrace {
    /// Records that carry a cut.
    pub fn cuts(&self) -> impl Iterator<Item = &IterationRecord> {
        self.iterations.iter().filter(|r| r.cut_normal.is_some())
    }

    pub fn cut_count(&self) -> usize {
        self.cuts().count()
    }
}

/// The initial polytope: `y_i >= min_x Gamma_i(x)` for each `i` and the
/// slice `w_bar^T y <= gamma`. Returns it with its halfspace count.
pub fn initialize(prob: &ProblemInstance) -> Result<(Polytope, usize)> {
    initialize_with(prob, PolytopeTolerances::default())
}

pub fn initialize_with(prob: &ProblemInstance, tolerances: PolytopeTolerances) -> Result<(Polytope, usize)> {
    let mut hs = Vec::with_capacity(prob.q + 1);
    for (i, off) in prob.coordinate_offsets.iter().enumerate() {
        let mut normal = vec![0.0; prob.q];
        normal[i] = -1.0;
        hs.push(Halfspace::new(normal, -off)?);
    }
    hs.push(prob.slice_halfspace());
    let count = hs.len();
    match Polytope::from_halfspaces_with(hs, tolerances) {
        Ok(p) => Ok((p, count)),
        Err(Error::Unbounded { direction }) => {
            Err(Error::Config(format!("initial polytope is unbounded along {direction:?}")))
        }
        Err(e) => Err(e),
    }
}

/// Runs the loop for a problem selected by key.
pub fn run(config: &RunConfig) -> Result<RunTrace> {
    config.validate()?;
    let prob = by_key(&config.problem_key)?;
    run_problem(&prob, config)
}

/// Runs the loop on a given instance; `config.problem_key` is only recorded.
pub fn run_problem(prob: &ProblemInstance, config: &RunConfig) -> Result<RunTrace> {
    config.validate()?;
    let ne = NormExponent::new(config.p)?;
    let (mut poly, j1) = initialize_with(prob, config.polytope_tolerances)?;
    let cache = SubproblemCache::new();
    let mut trace = RunTrace {
        config: config.clone(),
        initial_halfspace_count: j1,
        iterations: Vec::new(),
        final_polytope: poly.clone(),
        termination: Termination::MaxIterations,
        failure: None,
        vertex_pairs: Vec::new(),
        wall_ms: Vec::new(),
    };
    let mut new_vertices = poly.vertices().len();

    for k in 0..config.max_iterations {
        let clock = Instant::now();
        let vertices = poly.vertices().to_vec();
        let hit: Vec<bool> = vertices.iter().map(|v| cache.get(v).is_some()).collect();
        let cache_hits = hit.iter().filter(|h| **h).count();
        let results = match solve_batch(prob, &vertices, &ne, &config.tolerances, &cache) {
            Ok(r) => r,
            Err(e) => {
                trace.termination = Termination::SolverFailure;
                trace.failure = Some(e.to_string());
                break;
            }
        };
        if config.record_pairs {
            for (r, h) in results.iter().zip(&hit) {
                if let (false, Some(w)) = (h, &r.cut_normal) {
                    trace.vertex_pairs.push(SupportPair { support_point: r.y_support.clone(), normal: w.clone() });
                }
            }
        }
        // Vertices are sorted lexicographically, so the first maximum wins ties.
        let mut best = 0;
        for (i, r) in results.iter().enumerate() {
            if r.residual_norm > results[best].residual_norm {
                best = i;
            }
        }
        let ScalarizationResult { x_opt, y_support, residual_norm, cut_normal, .. } = results[best].clone();
        let converged = residual_norm <= config.epsilon;
        let mut record = IterationRecord {
            k,
            farthest_vertex: vertices[best].clone(),
            residual_norm,
            support_point: y_support.clone(),
            decision: x_opt,
            cut_normal: if converged { None } else { cut_normal.clone() },
            vertex_count: vertices.len(),
            new_vertex_count: new_vertices,
            cache_hits,
        };
        if converged {
            trace.iterations.push(record);
            trace.wall_ms.push(clock.elapsed().as_secs_f64() * 1e3);
            trace.termination = Termination::Converged;
            break;
        }
        let w = cut_normal.expect("a residual above epsilon has a cut normal");
        let offset: f64 = -w.iter().zip(&y_support).map(|(a, b)| a * b).sum::<f64>();
        let cut = Halfspace::new(w.iter().map(|a| -a).collect(), offset).and_then(|h| poly.cut(&h));
        match cut {
            Ok(outcome) if !outcome.null_cut => {
                poly = outcome.polytope;
                new_vertices = outcome.created;
            }
            Ok(_) => {
                record.cut_normal = None;
                trace.iterations.push(record);
                trace.wall_ms.push(clock.elapsed().as_secs_f64() * 1e3);
                trace.termination = Termination::SolverFailure;
                trace.failure =
                    Some(format!("cut at iteration {k} removed no vertex; solver and polytope tolerances disagree"));
                break;
            }
            Err(e) => {
                record.cut_normal = None;
                trace.iterations.push(record);
                trace.wall_ms.push(clock.elapsed().as_secs_f64() * 1e3);
                trace.termination = Termination::SolverFailure;
                trace.failure = Some(e.to_string());
                break;
            }
        }
        trace.iterations.push(record);
        trace.wall_ms.push(clock.elapsed().as_secs_f64() * 1e3);
    }
    trace.final_polytope = poly;
    Ok(trace)
}

/// The Hausdorff error per iteration.
pub fn hausdorff_series(trace: &RunTrace) -> Vec<f64> {
    trace.iterations.iter().map(|r| r.residual_norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_geometry::{norm_unchecked, NormExponent};
    use crate::problems::{example1, example2, PROBLEM_KEYS};

    #[test]
    fn initial_polytopes() {
        let (p, j) = initialize(&example1(2).unwrap()).unwrap();
        assert_eq!(j, 3);
        assert_eq!(p.vertices().len(), 3);
        assert_eq!(p.vertices(), &[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
        let (p, j) = initialize(&example1(3).unwrap()).unwrap();
        assert_eq!((j, p.vertices().len()), (4, 4));
        let prob = example2().unwrap();
        let (p, j) = initialize(&prob).unwrap();
        assert_eq!((j, p.vertices().len()), (4, 4));
        assert!(p.vertices().iter().any(|v| v.iter().all(|a| a.abs() < 1e-12)));
        for key in PROBLEM_KEYS {
            let prob = by_key(key).unwrap();
            let (p, _) = initialize(&prob).unwrap();
            for y in prob.sample_slice_points(500, 9) {
                assert!(p.contains(&y, 1e-9), "{key}");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::new("example1-q2", 1.0, 0.1).validate().is_err());
        assert!(RunConfig::new("example1-q2", 2.0, 0.0).validate().is_err());
        assert!(RunConfig::new("example1-q2", 2.0, 1e-11).validate().is_err());
        let mut c = RunConfig::new("example1-q2", 2.0, 0.1);
        c.max_iterations = 0;
        assert!(c.validate().is_err());
        assert!(run(&RunConfig::new("unknown", 2.0, 0.1)).is_err());
    }

    #[test]
    fn loose_tolerance_stops_at_once() {
        let t = run(&RunConfig::new("example1-q2", 2.0, 10.0)).unwrap();
        assert_eq!(t.iterations.len(), 1);
        assert_eq!(t.termination, Termination::Converged);
        assert!(t.iterations[0].cut_normal.is_none());
    }

    #[test]
    fn coarse_run_example1() {
        let t = run(&RunConfig::new("example1-q2", 2.0, 0.5)).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert!(t.iterations.len() <= 5);
        let s = hausdorff_series(&t);
        assert!(*s.last().unwrap() <= 0.5);
    }

    #[test]
    fn max_iterations_status() {
        let mut c = RunConfig::new("example1-q2", 2.0, 1e-6);
        c.max_iterations = 3;
        let t = run(&c).unwrap();
        assert_eq!(t.termination, Termination::MaxIterations);
        assert_eq!(t.iterations.len(), 3);
        assert_eq!(t.cut_count(), 3);
    }

    #[test]
    fn run_invariants() {
        for (key, p, eps) in [("example1-q2", 1.5, 1e-3), ("ellipse", 4.0, 1e-2), ("example2", 2.0, 0.2)] {
            let prob = by_key(key).unwrap();
            let mut c = RunConfig::new(key, p, eps);
            c.record_pairs = true;
            let t = run(&c).unwrap();
            assert_eq!(t.termination, Termination::Converged, "{key}");
            let ne = NormExponent::new(p).unwrap();
            let series = hausdorff_series(&t);
            assert!(*series.last().unwrap() <= eps);
            let rises = series.windows(2).filter(|w| w[1] > w[0] + 1e-6).count();
            assert!(rises as f64 <= 0.05 * series.len() as f64, "{key}: {rises}");
            assert!(!t.vertex_pairs.is_empty());

            // A stays inside every polytope; replay the cuts.
            let samples = prob.sample_slice_points(500, 21);
            let (mut poly, _) = initialize(&prob).unwrap();
            for r in t.cuts() {
                let w = r.cut_normal.as_ref().unwrap();
                assert!((norm_unchecked(w, ne.p_star()) - 1.0).abs() < 1e-6);
                let off: f64 = -w.iter().zip(&r.support_point).map(|(a, b)| a * b).sum::<f64>();
                let h = Halfspace::new(w.iter().map(|a| -a).collect(), off).unwrap();
                assert!(poly.vertices().contains(&r.farthest_vertex));
                assert!(h.slack(&r.farthest_vertex) < -0.5 * r.residual_norm);
                poly = poly.cut(&h).unwrap().polytope;
                assert!(!poly.vertices().contains(&r.farthest_vertex));
                for y in &samples {
                    assert!(poly.contains(y, 1e-7), "{key}");
                }
            }
            assert_eq!(poly.vertices(), t.final_polytope.vertices());

            // Cut normals are pairwise distinct.
            let normals: Vec<&Vec<f64>> = t.cuts().map(|r| r.cut_normal.as_ref().unwrap()).collect();
            for i in 0..normals.len() {
                for j in 0..i {
                    let d = normals[i].iter().zip(normals[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!(d > 1e-8, "{key}: cuts {i} and {j}");
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let c = RunConfig::new("example1-q3", 3.0, 0.05);
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn hausdorff_series_passthrough() {
        let mut t = run(&RunConfig::new("example1-q2", 2.0, 10.0)).unwrap();
        t.iterations.clear();
        assert!(hausdorff_series(&t).is_empty());
        for (k, r) in [0.9, 0.4, 0.2].into_iter().enumerate() {
            t.iterations.push(IterationRecord {
                k,
                farthest_vertex: vec![0.0, 0.0],
                residual_norm: r,
                support_point: vec![0.0, 0.0],
                decision: vec![0.0, 0.0],
                cut_normal: None,
                vertex_count: 3,
                new_vertex_count: 0,
                cache_hits: 0,
            });
        }
        assert_eq!(hausdorff_series(&t), vec![0.9, 0.4, 0.2]);
    }
}
