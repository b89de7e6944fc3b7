//! The norm-minimization subproblem `P(v)`: the l_p distance from a point `v`
//! to the slice `A`, its support point and the supporting cut normal.
//!
//! The subproblem is solved over `u = (x, y)` as
//! `min ||y - v||_p  s.t.  Gamma(x) <= y, x in X, w_bar^T y <= gamma`
//! with a primal log-barrier method and damped Newton centering. Every iterate
//! is strictly feasible, so the support point always lies in `A`, and the
//! barrier duality gap bounds the variational-inequality defect of the cut.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_geometry::{lp_gradient, lp_hessian, norm_unchecked, NormExponent};
use crate::problems::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverTolerances {
    /// Absolute accuracy of the optimal residual norm.
    pub objective: f64,
    /// Allowed defect in `<w, u - y_support> >= 0` over `u in A`.
    pub vi: f64,
    /// Residual norms at or below this are treated as `v in A`.
    pub zero: f64,
    /// Newton step budget per solve, over all barrier stages.
    pub max_newton_steps: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self { objective: 1e-7, vi: 1e-6, zero: 1e-10, max_newton_steps: 3000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Newton steps taken; zero for cache hits.
    pub iterations: usize,
    /// Final barrier duality gap, an upper bound on the objective error and
    /// on the variational-inequality defect.
    pub kkt_residual: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarizationResult {
    pub x_opt: Vec<f64>,
    pub z_opt: Vec<f64>,
    pub y_support: Vec<f64>,
    pub residual_norm: f64,
    pub cut_normal: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

/// A twice differentiable function value with gradient and row-major Hessian.
struct Smooth {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

/// When to stop the outer barrier loop early, given the current objective
/// value and duality gap.
enum Early {
    Continue,
    Stop,
}

struct BarrierOutcome {
    u: Vec<f64>,
    value: f64,
    gap: f64,
    steps: usize,
}

/// Log-barrier minimization of a convex objective under smooth convex
/// constraints from a strictly feasible `u0`.
fn barrier_minimize(
    objective: &dyn Fn(&[f64]) -> Smooth,
    constraints: &dyn Fn(&[f64]) -> Vec<Smooth>,
    u0: Vec<f64>,
    gap_target: &dyn Fn(f64) -> f64,
    early: &dyn Fn(f64, f64) -> Early,
    max_steps: usize,
) -> Result<BarrierOutcome> {
    let dim = u0.len();
    let mut u = u0;
    let m = constraints(&u).len() as f64;
    let f0 = objective(&u).value;
    let mut t = m / f0.abs().max(1e-6);
    let mut steps = 0usize;

    let phi = |u: &[f64], t: f64| -> Option<f64> {
        let mut s = t * objective(u).value;
        for c in constraints(u) {
            if !(c.value < 0.0) {
                return None;
            }
            s -= (-c.value).ln();
        }
        Some(s)
    };

    loop {
        // Centering.
        let mut lambda2 = f64::INFINITY;
        for _ in 0..100 {
            if steps >= max_steps {
                return Err(Error::SolverFailure {
                    reason: "Newton step budget exhausted".into(),
                    iterations: steps,
                    residual: lambda2,
                    best_iterate: u,
                });
            }
            let f = objective(&u);
            let mut g = DVector::from_iterator(dim, f.grad.iter().map(|v| t * v));
            let mut h = DMatrix::from_iterator(dim, dim, f.hess.iter().map(|v| t * v));
            for c in constraints(&u) {
                let s = -c.value;
                let gc = DVector::from_column_slice(&c.grad);
                g += &gc / s;
                h += &gc * gc.transpose() / (s * s);
                h += DMatrix::from_row_slice(dim, dim, &c.hess) / s;
            }
            let d = newton_direction(&h, &g);
            lambda2 = -g.dot(&d);
            if !lambda2.is_finite() {
                return Err(Error::SolverFailure {
                    reason: "non-finite Newton decrement".into(),
                    iterations: steps,
                    residual: lambda2,
                    best_iterate: u,
                });
            }
            if lambda2 <= 1e-12 {
                break;
            }
            steps += 1;
            let base = phi(&u, t).expect("iterate is strictly feasible");
            let mut alpha = 1.0;
            loop {
                let cand: Vec<f64> = u.iter().zip(d.iter()).map(|(a, b)| a + alpha * b).collect();
                if let Some(val) = phi(&cand, t) {
                    // Near the centre the decrease drops below the rounding
                    // level of phi, so full feasible steps are taken there.
                    if lambda2 < 1e-6 || val <= base - 0.25 * alpha * lambda2 {
                        u = cand;
                        break;
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-20 {
                    return Err(Error::SolverFailure {
                        reason: "line search failed".into(),
                        iterations: steps,
                        residual: lambda2,
                        best_iterate: u,
                    });
                }
            }
            if lambda2 < 1e-6 && alpha == 1.0 && lambda2 <= 1e-10 {
                break;
            }
        }
        let value = objective(&u).value;
        let gap = m / t;
        if gap <= gap_target(value) {
            return Ok(BarrierOutcome { u, value, gap, steps });
        }
        if let Early::Stop = early(value, gap) {
            return Ok(BarrierOutcome { u, value, gap, steps });
        }
        t *= 10.0;
    }
}

/// Solves `H d = -g` by Cholesky, with growing diagonal regularization when
/// `H` is numerically indefinite.
fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let scale = h.diagonal().amax().max(1e-300);
    let mut reg = 0.0;
    loop {
        let mut hr = h.clone();
        for i in 0..h.nrows() {
            hr[(i, i)] += reg;
        }
        if let Some(ch) = hr.cholesky() {
            return -ch.solve(g);
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 10.0 };
    }
}

/// Constraints of the main problem in `u = (x, y)`.
fn main_constraints(prob: &ProblemInstance, u: &[f64]) -> Vec<Smooth> {
    let (n, q) = (prob.n, prob.q);
    let dim = n + q;
    let (x, y) = u.split_at(n);
    let gam = prob.gamma_eval(x);
    let jac = prob.gamma_jacobian(x);
    let mut out = Vec::with_capacity(q + 6);
    for i in 0..q {
        let mut grad = vec![0.0; dim];
        grad[..n].copy_from_slice(&jac[i]);
        grad[n + i] = -1.0;
        out.push(Smooth { value: gam[i] - y[i], grad, hess: embed(&prob.objective.hessian(i, n), n, dim) });
    }
    for c in prob.feasible_set.constraints(x) {
        let mut grad = vec![0.0; dim];
        grad[..n].copy_from_slice(&c.grad);
        out.push(Smooth { value: c.value, grad, hess: embed(&c.hess, n, dim) });
    }
    let mut grad = vec![0.0; dim];
    grad[n..].copy_from_slice(&prob.w_bar);
    let slice = prob.w_bar.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - prob.gamma_slice;
    out.push(Smooth { value: slice, grad, hess: vec![0.0; dim * dim] });
    out
}

/// Places an `n x n` block in the top-left corner of a `dim x dim` matrix.
fn embed(block: &[f64], n: usize, dim: usize) -> Vec<f64> {
    let mut h = vec![0.0; dim * dim];
    for i in 0..n {
        for j in 0..n {
            h[i * dim + j] = block[i * n + j];
        }
    }
    h
}

/// Decides `v in A` by minimizing `s` subject to `Gamma(x) - v <= s`,
/// `x in X`. Returns a witness `x` when `v` is inside.
fn membership(
    prob: &ProblemInstance,
    v: &[f64],
    tol: &SolverTolerances,
    steps: &mut usize,
) -> Result<Option<Vec<f64>>> {
    let slack = prob.w_bar.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - prob.gamma_slice;
    if slack > 1e-12 * prob.gamma_slice.abs().max(1.0) {
        return Ok(None);
    }
    let n = prob.n;
    let x0 = prob.strict_start.0.clone();
    let s0 = prob.gamma_eval(&x0).iter().zip(v).map(|(g, vi)| g - vi).fold(f64::NEG_INFINITY, f64::max);
    let mut u0 = x0;
    u0.push(s0 + 1.0);
    let dim = n + 1;
    let objective = |u: &[f64]| {
        let mut grad = vec![0.0; dim];
        grad[n] = 1.0;
        Smooth { value: u[n], grad, hess: vec![0.0; dim * dim] }
    };
    let constraints = |u: &[f64]| {
        let (x, s) = (&u[..n], u[n]);
        let gam = prob.gamma_eval(x);
        let jac = prob.gamma_jacobian(x);
        let mut out = Vec::with_capacity(prob.q + 6);
        for i in 0..prob.q {
            let mut grad = vec![0.0; dim];
            grad[..n].copy_from_slice(&jac[i]);
            grad[n] = -1.0;
            out.push(Smooth { value: gam[i] - v[i] - s, grad, hess: embed(&prob.objective.hessian(i, n), n, dim) });
        }
        for c in prob.feasible_set.constraints(x) {
            let mut grad = vec![0.0; dim];
            grad[..n].copy_from_slice(&c.grad);
            out.push(Smooth { value: c.value, grad, hess: embed(&c.hess, n, dim) });
        }
        out
    };
    let zero = tol.zero;
    let out = barrier_minimize(
        &objective,
        &constraints,
        u0,
        &|_| 0.1 * zero,
        // s is an upper bound on s*, s - gap a lower bound.
        &|s, gap| if s <= 0.0 || s - gap > zero { Early::Stop } else { Early::Continue },
        tol.max_newton_steps,
    )?;
    *steps += out.steps;
    if out.value <= zero {
        Ok(Some(out.u[..n].to_vec()))
    } else {
        Ok(None)
    }
}

/// Solves `P(v)` from the instance's strictly feasible start.
pub fn solve_subproblem(
    prob: &ProblemInstance,
    v: &[f64],
    ne: &NormExponent,
    tol: &SolverTolerances,
) -> Result<ScalarizationResult> {
    solve_subproblem_from(prob, v, ne, tol, None)
}

/// Solves `P(v)` from a given strictly feasible `(x, y)`, or from the
/// instance's default start when `start` is `None`.
pub fn solve_subproblem_from(
    prob: &ProblemInstance,
    v: &[f64],
    ne: &NormExponent,
    tol: &SolverTolerances,
    start: Option<(&[f64], &[f64])>,
) -> Result<ScalarizationResult> {
    let clock = Instant::now();
    let (n, q) = (prob.n, prob.q);
    if v.len() != q || v.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidInput(format!("vertex must be a finite vector of length {q}")));
    }
    let mut steps = 0;
    if let Some(x) = membership(prob, v, tol, &mut steps)? {
        return Ok(ScalarizationResult {
            x_opt: x,
            z_opt: vec![0.0; q],
            y_support: v.to_vec(),
            residual_norm: 0.0,
            cut_normal: None,
            diagnostics: Diagnostics { iterations: steps, kkt_residual: 0.0, wall_time: clock.elapsed().as_secs_f64() },
        });
    }

    let mut u0: Vec<f64> = match start {
        Some((x, y)) => x.iter().chain(y).cloned().collect(),
        None => prob.strict_start.0.iter().chain(&prob.strict_start.1).cloned().collect(),
    };
    if u0.len() != n + q || main_constraints(prob, &u0).iter().any(|c| !(c.value < 0.0)) {
        if start.is_some() {
            return Err(Error::InvalidInput("start point is not strictly feasible".into()));
        }
        return Err(Error::Infeasible { certificate: prob.w_bar.clone() });
    }
    // Keep the start off the kink y = v of the norm.
    if u0[n..].iter().zip(v).all(|(a, b)| a == b) {
        u0[n] += 1e-3;
        if main_constraints(prob, &u0).iter().any(|c| !(c.value < 0.0)) {
            u0[n] -= 2e-3;
        }
    }

    let p = ne.p();
    let dim = n + q;
    let objective = |u: &[f64]| {
        let z: Vec<f64> = u[n..].iter().zip(v).map(|(a, b)| a - b).collect();
        let value = norm_unchecked(&z, p);
        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        if value > 0.0 {
            let g = lp_gradient(&z, ne).unwrap_or_else(|_| vec![0.0; q]);
            grad[n..].copy_from_slice(&g);
            let h = lp_hessian(&z, p);
            for i in 0..q {
                for j in 0..q {
                    hess[(n + i) * dim + n + j] = h[i * q + j];
                }
            }
        }
        Smooth { value, grad, hess }
    };
    let constraints = |u: &[f64]| main_constraints(prob, u);
    let objective_tol = tol.objective;
    let vi_tol = tol.vi;
    let out = barrier_minimize(
        &objective,
        &constraints,
        u0,
        &|f| (1e-3 * objective_tol.min(vi_tol)).min(1e-8 * f).max(1e-14),
        &|_, _| Early::Continue,
        tol.max_newton_steps.saturating_sub(steps),
    )?;
    steps += out.steps;

    let x_opt = out.u[..n].to_vec();
    let y_support = out.u[n..].to_vec();
    let z_opt: Vec<f64> = y_support.iter().zip(v).map(|(a, b)| a - b).collect();
    let residual_norm = out.value;
    let cut_normal = if residual_norm > tol.zero { Some(lp_gradient(&z_opt, ne)?) } else { None };
    Ok(ScalarizationResult {
        x_opt,
        z_opt,
        y_support,
        residual_norm,
        cut_normal,
        diagnostics: Diagnostics { iterations: steps, kkt_residual: out.gap, wall_time: clock.elapsed().as_secs_f64() },
    })
}

/// Memo of subproblem results keyed by vertex coordinates rounded to `1e-9`.
/// A cache must only be shared by solves of one problem with one exponent.
#[derive(Debug, Default)]
pub struct SubproblemCache {
    entries: Mutex<HashMap<Vec<i64>, ScalarizationResult>>,
}

impl SubproblemCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn key(v: &[f64]) -> Vec<i64> {
        v.iter().map(|a| (a * 1e9).round() as i64).collect()
    }

    pub fn get(&self, v: &[f64]) -> Option<ScalarizationResult> {
        self.entries.lock().expect("cache lock").get(&Self::key(v)).cloned()
    }

    fn insert(&self, v: &[f64], r: ScalarizationResult) {
        self.entries.lock().expect("cache lock").entry(Self::key(v)).or_insert(r);
    }
}

/// Solves `P(v)` for every vertex, in parallel, consulting the cache first.
/// Cache hits report zero solver iterations.
pub fn solve_batch(
    prob: &ProblemInstance,
    vertices: &[Vec<f64>],
    ne: &NormExponent,
    tol: &SolverTolerances,
    cache: &SubproblemCache,
) -> Result<Vec<ScalarizationResult>> {
    vertices
        .par_iter()
        .map(|v| {
            if let Some(mut hit) = cache.get(v) {
                hit.diagnostics.iterations = 0;
                hit.diagnostics.wall_time = 0.0;
                return Ok(hit);
            }
            let r = solve_subproblem(prob, v, ne, tol)
                .map_err(|e| Error::Vertex { vertex: v.clone(), source: Box::new(e) })?;
            cache.insert(v, r.clone());
            Ok(r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{by_key, example1, oracle_distance, rotated_ellipse, PROBLEM_KEYS};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    const PS: [f64; 6] = [1.25, 1.5, 2.0, 3.0, 4.0, 8.0];

    fn ne(p: f64) -> NormExponent {
        NormExponent::new(p).unwrap()
    }

    #[test]
    fn origin_distance_example1() {
        let prob = example1(2).unwrap();
        let r = solve_subproblem(&prob, &[0.0, 0.0], &ne(2.0), &SolverTolerances::default()).unwrap();
        assert!((r.residual_norm - (2f64.sqrt() - 1.0)).abs() < 1e-7, "{}", r.residual_norm);
        for y in &r.y_support {
            assert!((y - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-6);
        }
        for p in PS {
            let r = solve_subproblem(&prob, &[0.0, 0.0], &ne(p), &SolverTolerances::default()).unwrap();
            let expected = (1.0 - FRAC_1_SQRT_2) * 2f64.powf(1.0 / p);
            assert!((r.residual_norm - expected).abs() < 1e-7, "p={p}: {} vs {expected}", r.residual_norm);
        }
    }

    #[test]
    fn inside_points_have_no_cut() {
        for key in PROBLEM_KEYS {
            let prob = by_key(key).unwrap();
            let (x, _) = &prob.strict_start;
            let v = prob.gamma_eval(x);
            let r = solve_subproblem(&prob, &v, &ne(2.0), &SolverTolerances::default()).unwrap();
            assert_eq!(r.residual_norm, 0.0, "{key}");
            assert!(r.cut_normal.is_none());
            assert_eq!(r.y_support, v);
        }
    }

    #[test]
    fn rejects_bad_vertex() {
        let prob = example1(2).unwrap();
        let t = SolverTolerances::default();
        assert!(solve_subproblem(&prob, &[0.0], &ne(2.0), &t).is_err());
        assert!(solve_subproblem(&prob, &[f64::NAN, 0.0], &ne(2.0), &t).is_err());
    }

    fn exterior_vertex(prob: &ProblemInstance, rng: &mut ChaCha8Rng) -> Vec<f64> {
        // Below a random support point, inside the slice's halfspace.
        let pts = prob.sample_slice_points(1, rng.random());
        let y = &pts[0];
        let drop: Vec<f64> = (0..prob.q).map(|_| rng.random_range(0.0..0.6)).collect();
        y.iter().zip(&drop).map(|(a, d)| a - d).collect()
    }

    #[test]
    fn oracle_agreement_and_cut_properties() {
        let tol = SolverTolerances::default();
        for (prob, count) in [(example1(2).unwrap(), 10), (rotated_ellipse().unwrap(), 10)] {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let samples = prob.sample_slice_points(200, 5);
            for p in PS {
                let e = ne(p);
                for _ in 0..count {
                    let v = exterior_vertex(&prob, &mut rng);
                    let r = solve_subproblem(&prob, &v, &e, &tol).unwrap();
                    let oracle = oracle_distance(&prob, &v, &e, 4000);
                    assert!(
                        (r.residual_norm - oracle).abs() < 1e-3,
                        "{} p={p} v={v:?}: {} vs {oracle}",
                        prob.key,
                        r.residual_norm
                    );
                    assert!(r.residual_norm <= oracle + 1e-7);
                    let Some(w) = &r.cut_normal else { continue };
                    assert!((norm_unchecked(w, e.p_star()) - 1.0).abs() < 1e-6);
                    assert_eq!(w, &lp_gradient(&r.z_opt, &e).unwrap());
                    for u in &samples {
                        let vi: f64 = w.iter().zip(u).zip(&r.y_support).map(|((a, b), c)| a * (b - c)).sum();
                        assert!(vi >= -1e-6, "{} p={p}: {vi}", prob.key);
                    }
                    // Support point feasibility.
                    let g = prob.gamma_eval(&r.x_opt);
                    assert!(g.iter().zip(&r.y_support).all(|(a, b)| *a <= b + 1e-7));
                    assert!(prob.in_slice(&r.y_support, 1e-7));
                    assert!(prob.feasible_set.contains(&r.x_opt, 1e-7));
                }
            }
        }
    }

    #[test]
    fn supporting_halfspaces_on_all_problems() {
        let tol = SolverTolerances::default();
        for key in PROBLEM_KEYS {
            let prob = by_key(key).unwrap();
            let samples = prob.sample_slice_points(200, 8);
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            for p in [1.25, 2.0, 8.0] {
                let e = ne(p);
                for _ in 0..5 {
                    let v = exterior_vertex(&prob, &mut rng);
                    let r = solve_subproblem(&prob, &v, &e, &tol).unwrap();
                    let Some(w) = &r.cut_normal else { continue };
                    for u in &samples {
                        let vi: f64 = w.iter().zip(u).zip(&r.y_support).map(|((a, b), c)| a * (b - c)).sum();
                        assert!(vi >= -1e-6, "{key} p={p}: {vi}");
                    }
                    assert!(r.diagnostics.kkt_residual <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn slice_active_vertex() {
        // (2, 0, 0) is a vertex of the initial polytope of example1-q3; its
        // nearest point in A lies on the slice.
        let prob = example1(3).unwrap();
        let samples = prob.sample_slice_points(300, 2);
        for p in PS {
            let e = ne(p);
            let r = solve_subproblem(&prob, &[2.0, 0.0, 0.0], &e, &SolverTolerances::default()).unwrap();
            let w = r.cut_normal.as_ref().unwrap();
            for u in &samples {
                let vi: f64 = w.iter().zip(u).zip(&r.y_support).map(|((a, b), c)| a * (b - c)).sum();
                assert!(vi >= -1e-6, "p={p}: {vi}");
            }
            let oracle = oracle_distance(&prob, &[2.0, 0.0, 0.0], &e, 120);
            assert!((r.residual_norm - oracle).abs() < 1e-3, "p={p}: {} vs {oracle}", r.residual_norm);
        }
    }

    #[test]
    fn different_starts_agree() {
        let prob = rotated_ellipse().unwrap();
        let tol = SolverTolerances::default();
        let (xs, ys) = prob.strict_start.clone();
        let g = prob.gamma_eval(&xs);
        let x = xs.clone();
        let y: Vec<f64> = ys.iter().zip(&g).map(|(a, b)| b + 0.1 * (a - b)).collect();
        for p in PS {
            let e = ne(p);
            let a = solve_subproblem(&prob, &[0.0, 0.0], &e, &tol).unwrap();
            let b = solve_subproblem_from(&prob, &[0.0, 0.0], &e, &tol, Some((&x, &y))).unwrap();
            for (s, t) in a.y_support.iter().zip(&b.y_support) {
                assert!((s - t).abs() < 1e-6, "p={p}");
            }
        }
        assert!(solve_subproblem_from(&prob, &[0.0, 0.0], &ne(2.0), &tol, Some((&[2.0, 2.0], &[0.0, 0.0]))).is_err());
    }

    #[test]
    fn batch_matches_single_solves_and_caches() {
        let prob = example1(2).unwrap();
        let tol = SolverTolerances::default();
        let e = ne(3.0);
        let cache = SubproblemCache::new();
        assert!(solve_batch(&prob, &[], &e, &tol, &cache).unwrap().is_empty());
        let vs = vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.3]];
        let batch = solve_batch(&prob, &vs, &e, &tol, &cache).unwrap();
        assert_eq!(cache.len(), 3);
        for (v, r) in vs.iter().zip(&batch) {
            let single = solve_subproblem(&prob, v, &e, &tol).unwrap();
            assert_eq!(single.y_support, r.y_support);
            assert_eq!(single.residual_norm.to_bits(), r.residual_norm.to_bits());
            assert!(r.diagnostics.iterations > 0);
        }
        let again = solve_batch(&prob, &vs[..1], &e, &tol, &cache).unwrap();
        assert_eq!(again[0].diagnostics.iterations, 0);
        assert_eq!(again[0].y_support, batch[0].y_support);
    }
}
