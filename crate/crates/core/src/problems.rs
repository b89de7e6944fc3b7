//! Convex vector optimization instances: objective map, feasible set,
//! ordering cone (the nonnegative orthant) and the slice `w_bar^T y <= gamma`
//! that makes the upper image compact.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_geometry::{norm_unchecked, NormExponent};
use crate::polytope::{Halfspace, Polytope};

/// Problem keys understood by [`by_key`].
pub const PROBLEM_KEYS: [&str; 4] = ["example1-q2", "example1-q3", "ellipse", "example2"];

/// The objective map `Gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ObjectiveMap {
    Identity,
    /// `Gamma_i(x) = ||x - a_i||_2^2`.
    SquaredDistances {
        anchors: Vec<Vec<f64>>,
    },
}

impl ObjectiveMap {
    pub fn output_dim(&self, n: usize) -> usize {
        match self {
            ObjectiveMap::Identity => n,
            ObjectiveMap::SquaredDistances { anchors } => anchors.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ObjectiveMap::Identity => x.to_vec(),
            ObjectiveMap::SquaredDistances { anchors } => {
                anchors.iter().map(|a| a.iter().zip(x).map(|(ai, xi)| (xi - ai).powi(2)).sum()).collect()
            }
        }
    }

    /// Rows are the gradients of the components.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match self {
            ObjectiveMap::Identity => (0..x.len())
                .map(|i| {
                    let mut r = vec![0.0; x.len()];
                    r[i] = 1.0;
                    r
                })
                .collect(),
            ObjectiveMap::SquaredDistances { anchors } => {
                anchors.iter().map(|a| a.iter().zip(x).map(|(ai, xi)| 2.0 * (xi - ai)).collect()).collect()
            }
        }
    }

    /// Hessian of component `i`, row-major `n x n`. Both maps have constant
    /// Hessians.
    pub fn hessian(&self, _i: usize, n: usize) -> Vec<f64> {
        let mut h = vec![0.0; n * n];
        if let ObjectiveMap::SquaredDistances { .. } = self {
            for k in 0..n {
                h[k * n + k] = 2.0;
            }
        }
        h
    }
}

/// A smooth convex constraint `c(x) <= 0` evaluated at a point.
#[derive(Debug, Clone)]
pub struct ConstraintEval {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `n x n`.
    pub hess: Vec<f64>,
}

/// The decision set `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeasibleSet {
    /// `(x - c)^T Q (x - c) <= 1` with `Q` symmetric positive definite
    /// (row-major).
    Ellipsoid { center: Vec<f64>, shape: Vec<f64> },
    /// `rows[k]^T x <= rhs[k]`.
    Polyhedron { rows: Vec<Vec<f64>>, rhs: Vec<f64> },
}

impl FeasibleSet {
    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Ellipsoid { center, .. } => center.len(),
            FeasibleSet::Polyhedron { rows, .. } => rows[0].len(),
        }
    }

    /// Largest constraint value; `<= 0` on the set.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.constraints(x).iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.violation(x) <= tol
    }

    pub fn constraints(&self, x: &[f64]) -> Vec<ConstraintEval> {
        match self {
            FeasibleSet::Ellipsoid { center, shape } => {
                let n = center.len();
                let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let qd: Vec<f64> = (0..n).map(|i| (0..n).map(|j| shape[i * n + j] * d[j]).sum()).collect();
                let value = d.iter().zip(&qd).map(|(a, b)| a * b).sum::<f64>() - 1.0;
                ConstraintEval {
                    value,
                    grad: qd.iter().map(|v| 2.0 * v).collect(),
                    hess: shape.iter().map(|v| 2.0 * v).collect(),
                }
                .into_vec()
            }
            FeasibleSet::Polyhedron { rows, rhs } => {
                let n = rows[0].len();
                rows.iter()
                    .zip(rhs)
                    .map(|(r, b)| ConstraintEval {
                        value: r.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b,
                        grad: r.clone(),
                        hess: vec![0.0; n * n],
                    })
                    .collect()
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FeasibleSet::Ellipsoid { center, shape } => project_ellipsoid(center, shape, x),
            FeasibleSet::Polyhedron { rows, rhs } => project_polyhedron(rows, rhs, x),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            FeasibleSet::Ellipsoid { center, shape } => {
                let n = center.len();
                let inv =
                    DMatrix::from_row_slice(n, n, shape).try_inverse().expect("shape matrix is positive definite");
                let r: Vec<f64> = (0..n).map(|i| inv[(i, i)].sqrt()).collect();
                (
                    center.iter().zip(&r).map(|(c, r)| c - r).collect(),
                    center.iter().zip(&r).map(|(c, r)| c + r).collect(),
                )
            }
            FeasibleSet::Polyhedron { rows, rhs } => {
                let hs = rows
                    .iter()
                    .zip(rhs)
                    .map(|(r, b)| Halfspace::new(r.clone(), *b))
                    .collect::<Result<Vec<_>>>()
                    .expect("valid polyhedron rows");
                let p = Polytope::from_halfspaces(hs).expect("bounded polyhedron");
                let n = rows[0].len();
                let lo = (0..n).map(|j| p.vertices().iter().map(|v| v[j]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..n).map(|j| p.vertices().iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
                (lo, hi)
            }
        }
    }
}

impl ConstraintEval {
    fn into_vec(self) -> Vec<ConstraintEval> {
        vec![self]
    }
}

/// Projection onto `{(x-c)^T Q (x-c) <= 1}` in the eigenframe of `Q`, with
/// a monotone Newton solve for the multiplier.
fn project_ellipsoid(center: &[f64], shape: &[f64], x: &[f64]) -> Vec<f64> {
    let n = center.len();
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, shape));
    let d = DVector::from_iterator(n, x.iter().zip(center).map(|(a, b)| a - b));
    let b = eig.eigenvectors.transpose() * &d;
    let lam = &eig.eigenvalues;
    let level =
        |mu: f64| -> f64 { (0..n).map(|i| lam[i] * b[i] * b[i] / (1.0 + mu * lam[i]).powi(2)).sum::<f64>() - 1.0 };
    if level(0.0) <= 0.0 {
        return x.to_vec();
    }
    // level is convex and decreasing in mu, so Newton from the left is monotone.
    let mut mu = 0.0;
    for _ in 0..200 {
        let f = level(mu);
        let df: f64 = (0..n).map(|i| -2.0 * lam[i] * lam[i] * b[i] * b[i] / (1.0 + mu * lam[i]).powi(3)).sum();
        let step = f / df;
        mu -= step;
        if step.abs() <= 1e-16 * mu.abs().max(1e-300) || f.abs() < 1e-15 {
            break;
        }
    }
    let yb = DVector::from_iterator(n, (0..n).map(|i| b[i] / (1.0 + mu * lam[i])));
    let y = &eig.eigenvectors * yb;
    // Snap onto the boundary to remove the residual of the multiplier solve.
    let val: f64 = (0..n).map(|i| lam[i] * (b[i] / (1.0 + mu * lam[i])).powi(2)).sum();
    let s = if val > 1.0 { 1.0 / val.sqrt() } else { 1.0 };
    (0..n).map(|i| center[i] + s * y[i]).collect()
}

/// Exact projection onto a small polyhedron: the projection onto the affine
/// hull of every face of codimension <= n is computed, and the closest
/// feasible candidate is returned.
fn project_polyhedron(rows: &[Vec<f64>], rhs: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = rows.len();
    let feasible = |y: &[f64]| {
        rows.iter().zip(rhs).all(|(r, b)| {
            let scale = 1.0 + b.abs() + r.iter().zip(y).map(|(a, v)| (a * v).abs()).sum::<f64>();
            r.iter().zip(y).map(|(a, v)| a * v).sum::<f64>() - b <= 1e-12 * scale
        })
    };
    if feasible(x) {
        return x.to_vec();
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1usize..(1 << m) {
        let active: Vec<usize> = (0..m).filter(|&k| mask >> k & 1 == 1).collect();
        if active.len() > n {
            continue;
        }
        let a = DMatrix::from_fn(active.len(), n, |i, j| rows[active[i]][j]);
        let gram = &a * a.transpose();
        let Some(gi) = gram.clone().try_inverse() else { continue };
        if gram.determinant().abs() < 1e-14 {
            continue;
        }
        let xv = DVector::from_column_slice(x);
        let resid = DVector::from_iterator(active.len(), active.iter().map(|&k| rhs[k])) - &a * &xv;
        let y = &xv + a.transpose() * (gi * resid);
        let y: Vec<f64> = y.iter().cloned().collect();
        if feasible(&y) {
            let d: f64 = y.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, y));
            }
        }
    }
    best.map(|(_, y)| y).unwrap_or_else(|| x.to_vec())
}

/// Polyhedral ordering cone; only the nonnegative orthant is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderingCone {
    NonnegativeOrthant,
}

/// A compact convex vector optimization instance with its slice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub key: String,
    pub q: usize,
    pub n: usize,
    pub objective: ObjectiveMap,
    pub feasible_set: FeasibleSet,
    pub cone: OrderingCone,
    /// Slice normal, strictly positive and summing to one.
    pub w_bar: Vec<f64>,
    pub gamma_slice: f64,
    /// `R` with `A` inside the l_p ball of radius `R` around the origin, any p.
    pub diameter_hint: f64,
    /// A point in the interior of `X`.
    pub interior_point: Vec<f64>,
    /// `(x, y)` with `x` interior to `X`, `y > Gamma(x)` and `w_bar^T y < gamma`.
    pub strict_start: (Vec<f64>, Vec<f64>),
    /// Weighted-sum offsets `min_x Gamma_i(x)` for the coordinate directions.
    pub coordinate_offsets: Vec<f64>,
    /// Objective values of the coordinate weighted-sum minimizers.
    pub coordinate_supports: Vec<Vec<f64>>,
}

impl ProblemInstance {
    /// Builds an instance with `w_bar = (1/q, ..., 1/q)` and
    /// `gamma = max_i w_bar^T Gamma(x*_i) + 0.25 * spread`, where `x*_i`
    /// minimizes the i-th objective and `spread` is the range of those values.
    pub fn new(
        key: &str,
        objective: ObjectiveMap,
        feasible_set: FeasibleSet,
        interior_point: Vec<f64>,
    ) -> Result<Self> {
        let n = feasible_set.dim();
        let q = objective.output_dim(n);
        if q < 2 {
            return Err(Error::InvalidInput("at least two objectives are required".into()));
        }
        if interior_point.len() != n || feasible_set.violation(&interior_point) >= 0.0 {
            return Err(Error::InvalidInput("interior point is not interior".into()));
        }
        let w_bar = vec![1.0 / q as f64; q];
        let mut inst = Self {
            key: key.to_string(),
            q,
            n,
            objective,
            feasible_set,
            cone: OrderingCone::NonnegativeOrthant,
            w_bar,
            gamma_slice: f64::INFINITY,
            diameter_hint: f64::INFINITY,
            interior_point,
            strict_start: (Vec::new(), Vec::new()),
            coordinate_offsets: Vec::new(),
            coordinate_supports: Vec::new(),
        };

        let mut slice_values = Vec::with_capacity(q);
        for i in 0..q {
            let mut omega = vec![0.0; q];
            omega[i] = 1.0;
            let ws = weighted_sum(&inst, &omega)?;
            let g = inst.gamma_eval(&ws.x_star);
            slice_values.push(dot(&inst.w_bar, &g));
            inst.coordinate_offsets.push(ws.support_offset);
            inst.coordinate_supports.push(g);
        }
        let hi = slice_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = slice_values.iter().cloned().fold(f64::INFINITY, f64::min);
        inst.gamma_slice = hi + 0.25 * (hi - lo);

        // Strictly feasible start: pull the w_bar weighted-sum minimizer 10%
        // towards the interior point and lift it into the slice.
        let ws = weighted_sum(&inst, &inst.w_bar.clone())?;
        let x0: Vec<f64> = inst.interior_point.iter().zip(&ws.x_star).map(|(c, x)| c + 0.9 * (x - c)).collect();
        let g0 = inst.gamma_eval(&x0);
        let room = inst.gamma_slice - dot(&inst.w_bar, &g0);
        if room <= 0.0 {
            return Err(Error::Config("slice leaves no interior; A is empty or flat".into()));
        }
        let y0: Vec<f64> = g0.iter().map(|g| g + 0.5 * room).collect();
        inst.strict_start = (x0, y0);

        let spare = inst.gamma_slice - dot(&inst.w_bar, &inst.coordinate_offsets);
        inst.diameter_hint =
            inst.coordinate_offsets.iter().zip(&inst.w_bar).map(|(lo, w)| lo.abs().max((lo + spare / w).abs())).sum();
        Ok(inst)
    }

    pub fn gamma_eval(&self, x: &[f64]) -> Vec<f64> {
        self.objective.eval(x)
    }

    pub fn gamma_jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.objective.jacobian(x)
    }

    pub fn feasible_project(&self, x: &[f64]) -> Vec<f64> {
        self.feasible_set.project(x)
    }

    pub fn in_slice(&self, y: &[f64], tol: f64) -> bool {
        dot(&self.w_bar, y) <= self.gamma_slice + tol
    }

    /// Slice halfspace `w_bar^T y <= gamma`.
    pub fn slice_halfspace(&self) -> Halfspace {
        Halfspace { normal: self.w_bar.clone(), offset: self.gamma_slice }
    }

    /// Uniform-ish random points of `X` (rejection from the bounding box).
    pub fn sample_decisions(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = self.feasible_set.bounding_box();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let x: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rng.random_range(*l..=*h)).collect();
            if self.feasible_set.contains(&x, 0.0) {
                out.push(x);
            }
        }
        out
    }

    /// Random points of the slice `A`: `Gamma(x)` plus a random cone element,
    /// kept when inside the slice. A fraction lies exactly on `Gamma(bd X)`.
    pub fn sample_slice_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37));
        let mut out = Vec::with_capacity(count);
        let mut round = 0u64;
        while out.len() < count {
            let xs = self.sample_decisions(count * 4 + 16, seed.wrapping_add(round));
            round += 1;
            for (k, x) in xs.iter().enumerate() {
                if out.len() == count {
                    break;
                }
                let x = if k % 2 == 0 {
                    // Push to the boundary of X along a random direction.
                    let dir: Vec<f64> = (0..self.n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let far: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + 100.0 * d).collect();
                    self.feasible_project(&far)
                } else {
                    x.clone()
                };
                let g = self.gamma_eval(&x);
                if !self.in_slice(&g, 0.0) {
                    continue;
                }
                let room = self.gamma_slice - dot(&self.w_bar, &g);
                let lift: f64 = if k % 3 == 0 { 0.0 } else { rng.random_range(0.0..1.0) };
                // Lift inside the slice: sum_i w_i t_i <= room.
                let y: Vec<f64> = g.iter().map(|v| v + lift * room * rng.random_range(0.0..1.0)).collect();
                out.push(if self.in_slice(&y, 0.0) { y } else { g });
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `min Gamma(x)` over the unit Euclidean ball around `(1, ..., 1)`.
pub fn example1(q: usize) -> Result<ProblemInstance> {
    if !(2..=3).contains(&q) {
        return Err(Error::InvalidInput(format!("example1 supports q in {{2, 3}}, got {q}")));
    }
    let mut shape = vec![0.0; q * q];
    for i in 0..q {
        shape[i * q + i] = 1.0;
    }
    ProblemInstance::new(
        &format!("example1-q{q}"),
        ObjectiveMap::Identity,
        FeasibleSet::Ellipsoid { center: vec![1.0; q], shape },
        vec![1.0; q],
    )
}

/// Ellipse centred at (2, 2) with semi-axes sqrt(10), sqrt(6) rotated by 45
/// degrees: `(x2 - x1)^2 / 10 + (x1 + x2 - 4)^2 / 6 <= 1`.
pub fn rotated_ellipse() -> Result<ProblemInstance> {
    let a = 1.0 / 10.0 + 1.0 / 6.0;
    let b = -1.0 / 10.0 + 1.0 / 6.0;
    ProblemInstance::new(
        "ellipse",
        ObjectiveMap::Identity,
        FeasibleSet::Ellipsoid { center: vec![2.0, 2.0], shape: vec![a, b, b, a] },
        vec![2.0, 2.0],
    )
}

/// Squared distances to (1,1), (2,3), (4,2) over
/// `x1 + 2 x2 <= 10, 0 <= x1 <= 10, 0 <= x2 <= 4`.
pub fn example2() -> Result<ProblemInstance> {
    ProblemInstance::new(
        "example2",
        ObjectiveMap::SquaredDistances { anchors: vec![vec![1.0, 1.0], vec![2.0, 3.0], vec![4.0, 2.0]] },
        FeasibleSet::Polyhedron {
            rows: vec![vec![1.0, 2.0], vec![-1.0, 0.0], vec![1.0, 0.0], vec![0.0, -1.0], vec![0.0, 1.0]],
            rhs: vec![10.0, 0.0, 10.0, 0.0, 4.0],
        },
        vec![2.0, 2.0],
    )
}

pub fn by_key(key: &str) -> Result<ProblemInstance> {
    match key {
        "example1-q2" => example1(2),
        "example1-q3" => example1(3),
        "ellipse" => rotated_ellipse(),
        "example2" => example2(),
        other => Err(Error::InvalidInput(format!("unknown problem key {other:?}; expected one of {PROBLEM_KEYS:?}"))),
    }
}

/// Solution of a weighted-sum scalarization `min_x omega^T Gamma(x)`.
#[derive(Debug, Clone)]
pub struct WeightedSum {
    pub x_star: Vec<f64>,
    /// `omega^T Gamma(x_star)`; `{y : omega^T y >= offset}` supports the
    /// upper image.
    pub support_offset: f64,
    pub iterations: usize,
}

const WS_MAX_ITERATIONS: usize = 10_000;
const WS_TOLERANCE: f64 = 1e-9;

pub fn weighted_sum(prob: &ProblemInstance, omega: &[f64]) -> Result<WeightedSum> {
    if omega.len() != prob.q || omega.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite, nonnegative, length q".into()));
    }
    if omega.iter().all(|w| *w == 0.0) {
        return Err(Error::InvalidInput("weights must not all vanish".into()));
    }
    let n = prob.n;

    if let (ObjectiveMap::Identity, FeasibleSet::Ellipsoid { center, shape }) = (&prob.objective, &prob.feasible_set) {
        // Linear objective over an ellipsoid: x* = c - Q^{-1} w / sqrt(w^T Q^{-1} w).
        let inv = DMatrix::from_row_slice(n, n, shape)
            .try_inverse()
            .ok_or_else(|| Error::Config("singular ellipsoid shape".into()))?;
        let w = DVector::from_column_slice(omega);
        let qw = &inv * &w;
        let s = w.dot(&qw).sqrt();
        let x: Vec<f64> = (0..n).map(|i| center[i] - qw[i] / s).collect();
        let offset = dot(omega, &prob.gamma_eval(&x));
        return Ok(WeightedSum { x_star: x, support_offset: offset, iterations: 0 });
    }

    // Projected gradient with backtracking on a local Lipschitz estimate.
    let f = |x: &[f64]| dot(omega, &prob.gamma_eval(x));
    let grad = |x: &[f64]| -> Vec<f64> {
        let jac = prob.gamma_jacobian(x);
        (0..n).map(|j| (0..prob.q).map(|i| omega[i] * jac[i][j]).sum()).collect()
    };
    let mut x = prob.feasible_project(&prob.interior_point);
    let mut step: f64 = 1.0;
    let mut residual = f64::INFINITY;
    for it in 0..WS_MAX_ITERATIONS {
        let g = grad(&x);
        let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - b).collect();
        let pg = prob.feasible_project(&trial);
        residual = pg.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if residual <= WS_TOLERANCE {
            let offset = f(&x);
            return Ok(WeightedSum { x_star: x, support_offset: offset, iterations: it });
        }
        step = (2.0 * step).max(1e-3);
        loop {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let xn = prob.feasible_project(&cand);
            let d: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            // Local Lipschitz test on gradient differences; unlike a decrease
            // test on f it stays meaningful below the rounding level of f.
            let gn = grad(&xn);
            let curv: f64 = gn.iter().zip(&g).zip(&d).map(|((a, b), c)| (a - b) * c).sum();
            if curv <= dot(&d, &d) / step || step < 1e-12 {
                x = xn;
                break;
            }
            step *= 0.5;
        }
    }
    Err(Error::SolverFailure {
        reason: "weighted-sum projected gradient did not converge".into(),
        iterations: WS_MAX_ITERATIONS,
        residual,
        best_iterate: x,
    })
}

/// Brute-force distance from `v` to the slice `A` in the l_p norm.
///
/// `A` is the union over `x` of the truncated orthants
/// `{y >= Gamma(x), w_bar^T y <= gamma}`. The distance to each truncated
/// orthant is computed exactly (up to a golden-section search on the slice
/// face), and `x` ranges over a parameter grid of `samples` points per
/// dimension of the boundary of `X` (or of `X` itself for polyhedra). The best
/// grid cells are then refined by a local search down to a mesh of about
/// `1e-9` of the parameter range. Every candidate lies in `A`, so the result
/// never underestimates the true distance by more than rounding.
pub fn oracle_distance(prob: &ProblemInstance, v: &[f64], ne: &NormExponent, samples: usize) -> f64 {
    let p = ne.p();
    let samples = samples.max(8);
    let dist_at = |x: &[f64]| truncated_orthant_distance(prob, &prob.gamma_eval(x), v, p);
    match &prob.feasible_set {
        FeasibleSet::Ellipsoid { center, shape } => {
            let n = center.len();
            let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, shape));
            let point = |u: &[f64]| -> Vec<f64> {
                // x = c + V diag(lambda^-1/2) u with u on the unit sphere.
                (0..n)
                    .map(|i| {
                        center[i]
                            + (0..n).map(|k| eig.eigenvectors[(i, k)] * u[k] / eig.eigenvalues[k].sqrt()).sum::<f64>()
                    })
                    .collect()
            };
            match n {
                2 => {
                    let f = |t: f64| dist_at(&point(&[t.cos(), t.sin()]));
                    let h = std::f64::consts::TAU / samples as f64;
                    refine_1d(&f, (0..samples).map(|k| k as f64 * h), h)
                }
                3 => {
                    let f = |a: f64, b: f64| dist_at(&point(&[a.sin() * b.cos(), a.sin() * b.sin(), a.cos()]));
                    let ha = std::f64::consts::PI / samples as f64;
                    let hb = std::f64::consts::TAU / samples as f64;
                    refine_2d(&f, samples, (0.0, ha), (0.0, hb))
                }
                _ => f64::NAN,
            }
        }
        FeasibleSet::Polyhedron { .. } => {
            let (lo, hi) = prob.feasible_set.bounding_box();
            if lo.len() != 2 {
                return f64::NAN;
            }
            let f = |a: f64, b: f64| {
                let x = [a, b];
                if prob.feasible_set.contains(&x, 0.0) {
                    dist_at(&x)
                } else {
                    dist_at(&prob.feasible_project(&x))
                }
            };
            let ha = (hi[0] - lo[0]) / samples as f64;
            let hb = (hi[1] - lo[1]) / samples as f64;
            refine_2d(&f, samples + 1, (lo[0], ha), (lo[1], hb))
        }
    }
}

fn refine_1d(f: &dyn Fn(f64) -> f64, grid: impl Iterator<Item = f64>, h: f64) -> f64 {
    let mut vals: Vec<(f64, f64)> = grid.map(|t| (f(t), t)).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = vals[0].0;
    for &(_, t) in vals.iter().take(3) {
        let (mut a, mut b) = (t - h, t + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > 1e-9 * h {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        best = best.min(fc).min(fd);
    }
    best
}

fn refine_2d(f: &dyn Fn(f64, f64) -> f64, samples: usize, a: (f64, f64), b: (f64, f64)) -> f64 {
    let mut vals = Vec::with_capacity(samples * samples);
    for i in 0..samples {
        for j in 0..samples {
            let (x, y) = (a.0 + i as f64 * a.1, b.0 + j as f64 * b.1);
            vals.push((f(x, y), x, y));
        }
    }
    vals.sort_by(|u, w| u.0.total_cmp(&w.0));
    let mut best = vals[0].0;
    for &(v0, x0, y0) in vals.iter().take(4) {
        let (mut x, mut y, mut val) = (x0, y0, v0);
        let (mut sx, mut sy) = (a.1, b.1);
        while sx > 1e-9 * a.1 {
            let mut moved = false;
            for (dx, dy) in [(sx, 0.0), (-sx, 0.0), (0.0, sy), (0.0, -sy), (sx, sy), (-sx, -sy), (sx, -sy), (-sx, sy)] {
                let c = f(x + dx, y + dy);
                if c < val {
                    val = c;
                    x += dx;
                    y += dy;
                    moved = true;
                    break;
                }
            }
            if !moved {
                sx *= 0.5;
                sy *= 0.5;
            }
        }
        best = best.min(val);
    }
    best
}

/// l_p distance from `v` to `{y >= g, w_bar^T y <= gamma}`; infinite when the
/// set is empty.
fn truncated_orthant_distance(prob: &ProblemInstance, g: &[f64], v: &[f64], p: f64) -> f64 {
    let q = g.len();
    let top: Vec<f64> = g.iter().zip(v).map(|(a, b)| a.max(*b)).collect();
    if prob.in_slice(&top, 0.0) {
        let z: Vec<f64> = top.iter().zip(v).map(|(a, b)| a - b).collect();
        return norm_unchecked(&z, p);
    }
    let beta = prob.gamma_slice - dot(&prob.w_bar, g);
    if beta < 0.0 {
        return f64::INFINITY;
    }
    // Minimize over the simplex face g + beta * sum_i t_i e_i / w_i, sum t = 1.
    let at = |t: &[f64]| -> f64 {
        let z: Vec<f64> = (0..q).map(|i| g[i] + beta * t[i] / prob.w_bar[i] - v[i]).collect();
        norm_unchecked(&z, p)
    };
    let golden = |h: &dyn Fn(f64) -> f64, lo: f64, hi: f64| -> f64 {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..52 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if h(c) < h(d) {
                b = d;
            } else {
                a = c;
            }
        }
        h(0.5 * (a + b)).min(h(lo)).min(h(hi))
    };
    match q {
        2 => golden(&|s| at(&[1.0 - s, s]), 0.0, 1.0),
        3 => golden(&|s| golden(&|t| at(&[s, t * (1.0 - s), (1.0 - t) * (1.0 - s)]), 0.0, 1.0), 0.0, 1.0),
        _ => f64::NAN,
    }
}
