//! l_p norm arithmetic, gradients, conjugate exponents and the closed-form
//! constants used by the geometric verifiers.
//!
//! Every function here is a pure function of its inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norms below this value are treated as zero by [`lp_gradient`].
pub const GRADIENT_ZERO_THRESHOLD: f64 = 1e-14;

/// A norm exponent `p` in the open interval (1, inf) together with its
/// conjugate and power types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormExponent {
    p: f64,
    p_star: f64,
    s_p: f64,
    r_p: f64,
}

impl NormExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidInput(format!("norm exponent must be finite and > 1, got {p}")));
        }
        Ok(Self { p, p_star: p / (p - 1.0), s_p: p.min(2.0), r_p: p.max(2.0) })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent `p / (p - 1)`.
    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    /// Smoothness power type `min(p, 2)`.
    pub fn s_p(&self) -> f64 {
        self.s_p
    }

    /// Convexity power type `max(p, 2)`.
    pub fn r_p(&self) -> f64 {
        self.r_p
    }

    /// The exponent of the dual norm.
    pub fn dual(&self) -> NormExponent {
        NormExponent::new(self.p_star).expect("conjugate of a valid exponent is valid")
    }
}

/// `|t|^e` for `e > 0`, with the `t == 0` branch handled explicitly.
#[inline]
pub(crate) fn abs_pow(t: f64, e: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        (e * t.abs().ln()).exp()
    }
}

/// Norm evaluation without input validation; callers guarantee finite entries.
pub(crate) fn norm_unchecked(z: &[f64], p: f64) -> f64 {
    // Scale by the max entry so that large p neither overflows nor underflows.
    let m = z.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = z.iter().map(|v| abs_pow(v / m, p)).sum();
    m * s.powf(1.0 / p)
}

/// `(sum |z_i|^p)^(1/p)`.
pub fn lp_norm(z: &[f64], ne: &NormExponent) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite vector entry".into()));
    }
    Ok(norm_unchecked(z, ne.p()))
}

/// Gradient of the l_p norm at a nonzero point; this is also the cut normal
/// produced from an optimal residual. The result lies on the dual unit sphere.
pub fn lp_gradient(z: &[f64], ne: &NormExponent) -> Result<Vec<f64>> {
    let n = lp_norm(z, ne)?;
    if n < GRADIENT_ZERO_THRESHOLD {
        return Err(Error::GradientUndefined(n));
    }
    let e = ne.p() - 1.0;
    Ok(z.iter().map(|&v| abs_pow(v / n, e).copysign(v)).collect())
}

/// Hessian of the l_p norm at a nonzero point, row-major `q x q`.
///
/// Ratios `|z_i| / ||z||_p` below `1e-12` are clamped when `p < 2` so the
/// diagonal stays finite at the kink.
pub(crate) fn lp_hessian(z: &[f64], p: f64) -> Vec<f64> {
    let q = z.len();
    let n = norm_unchecked(z, p);
    let mut h = vec![0.0; q * q];
    if n == 0.0 {
        return h;
    }
    let g: Vec<f64> = z.iter().map(|&v| abs_pow(v / n, p - 1.0).copysign(v)).collect();
    let c = (p - 1.0) / n;
    for i in 0..q {
        let mut a = (z[i] / n).abs();
        if p < 2.0 {
            a = a.max(1e-12);
        }
        for j in 0..q {
            h[i * q + j] = -c * g[i] * g[j];
        }
        let d = if p == 2.0 { 1.0 } else { abs_pow(a, p - 2.0) };
        h[i * q + i] += c * d;
    }
    h
}

/// `min_{||w||_{p*} = 1} ||w||_2`, equal to `min(1, q^(1/2 - 1/p*))`.
pub fn dual_ball_min_euclidean(ne: &NormExponent, q: usize) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidInput(format!("dimension must be >= 2, got {q}")));
    }
    Ok((q as f64).powf(0.5 - 1.0 / ne.p_star()).min(1.0))
}

/// Constants `(S_p, K_p)` with `rho_p(t) <= S_p t^s(p)` and
/// `delta_p(e) >= K_p e^r(p)`.
pub fn moduli_constants(ne: &NormExponent) -> (f64, f64) {
    let p = ne.p();
    if p <= 2.0 {
        (1.0 / p, (p - 1.0) / 8.0)
    } else {
        ((p - 1.0) / 2.0, 1.0 / (p * 2f64.powf(p)))
    }
}

/// `N_{2,p}` with `||x||_2 <= N_{2,p} ||x||_p` on `R^q`.
pub fn norm_equivalence(ne: &NormExponent, q: usize) -> f64 {
    if ne.p() >= 2.0 {
        (q as f64).powf(0.5 - 1.0 / ne.p())
    } else {
        1.0
    }
}

/// Closed-form constants of the hyperplane-distance and separation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstants {
    pub p: f64,
    pub q: usize,
    pub n2p: f64,
    /// Hyperplane-distance constant `N_{2,p}^2 / 2`.
    pub c_pq_distance: f64,
    /// Minimum Euclidean norm on the dual unit sphere.
    pub c_pq: f64,
    pub c2: f64,
    pub c3: f64,
    pub eta: f64,
}

impl LemmaConstants {
    pub fn new(ne: &NormExponent, q: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
        }
        let n2p = norm_equivalence(ne, q);
        let c_pq = dual_ball_min_euclidean(ne, q)?;
        let sqrt2 = std::f64::consts::SQRT_2;
        Ok(Self {
            p: ne.p(),
            q,
            n2p,
            c_pq_distance: n2p * n2p / 2.0,
            c_pq,
            c2: sqrt2 * c_pq / n2p,
            c3: sqrt2 / n2p,
            eta,
        })
    }
}

/// Result of one sampled property check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub p: f64,
    pub q: usize,
    pub samples: usize,
    pub violations: usize,
    /// Largest amount by which the inequality was exceeded (<= 0 when it holds).
    pub worst_excess: f64,
}

impl PropertyCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Tally {
    name: &'static str,
    p: f64,
    q: usize,
    samples: usize,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, p: f64, q: usize) -> Self {
        Self { name, p, q, samples: 0, violations: 0, worst: f64::NEG_INFINITY }
    }

    /// Records `excess`, a violation when positive.
    fn record(&mut self, excess: f64) {
        self.samples += 1;
        if excess > 0.0 || excess.is_nan() {
            self.violations += 1;
        }
        if excess > self.worst || excess.is_nan() {
            self.worst = excess;
        }
    }

    fn finish(self) -> PropertyCheck {
        PropertyCheck {
            name: self.name.to_string(),
            p: self.p,
            q: self.q,
            samples: self.samples,
            violations: self.violations,
            worst_excess: self.worst,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, q: usize) -> Vec<f64> {
    (0..q).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit(rng: &mut ChaCha8Rng, q: usize, p: f64) -> Vec<f64> {
    loop {
        let v = gaussian(rng, q);
        let n = norm_unchecked(&v, p);
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn combine(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Runs the sampled gradient, norm-equivalence, moduli, Hanner and strict
/// convexity checks for one `(p, q)` pair with `samples` draws each.
pub fn sampled_property_checks(ne: &NormExponent, q: usize, samples: usize, seed: u64) -> Vec<PropertyCheck> {
    let p = ne.p();
    let ps = ne.p_star();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p.to_bits().rotate_left(17)) ^ q as u64);
    let (s_const, k_const) = moduli_constants(ne);
    let n2p = norm_equivalence(ne, q);

    let mut dual = Tally::new("dual_gradient_identity", p, q);
    let mut fd = Tally::new("gradient_finite_difference", p, q);
    let mut equiv = Tally::new("norm_equivalence", p, q);
    let mut smooth = Tally::new("modulus_of_smoothness", p, q);
    let mut convex = Tally::new("modulus_of_convexity", p, q);
    let mut hanner = Tally::new("hanner_inequality", p, q);
    let mut strict = Tally::new("strict_convexity", p, q);

    for _ in 0..samples {
        let z = gaussian(&mut rng, q);
        let g = lp_gradient(&z, ne).expect("gaussian sample is nonzero");
        dual.record((norm_unchecked(&g, ps) - 1.0).abs() - 1e-9);

        // Central differences away from the coordinate hyperplanes.
        let zf: Vec<f64> = z.iter().map(|&v| if v.abs() < 0.01 { 0.01_f64.copysign(v) + v } else { v }).collect();
        let gf = lp_gradient(&zf, ne).expect("nonzero");
        let h = 1e-6;
        let mut worst_rel: f64 = 0.0;
        for i in 0..q {
            let mut zp = zf.clone();
            let mut zm = zf.clone();
            zp[i] += h;
            zm[i] -= h;
            let d = (norm_unchecked(&zp, p) - norm_unchecked(&zm, p)) / (2.0 * h);
            worst_rel = worst_rel.max((d - gf[i]).abs() / gf[i].abs().max(1.0));
        }
        fd.record(worst_rel - 1e-6);

        let x = gaussian(&mut rng, q);
        let l2 = norm_unchecked(&x, 2.0);
        equiv.record(l2 - n2p * norm_unchecked(&x, p) - 1e-12);

        let ux = unit(&mut rng, q, p);
        let uy = unit(&mut rng, q, p);
        let tau: f64 = rng.random_range(1e-3..=1.0);
        let rho =
            (norm_unchecked(&combine(&ux, tau, &uy), p) + norm_unchecked(&combine(&ux, -tau, &uy), p)) / 2.0 - 1.0;
        smooth.record(rho - s_const * tau.powf(ne.s_p()) - 1e-12);

        let eps = norm_unchecked(&combine(&ux, -1.0, &uy), p);
        let mid: Vec<f64> = ux.iter().zip(&uy).map(|(a, b)| (a + b) / 2.0).collect();
        let gap = 1.0 - norm_unchecked(&mid, p);
        convex.record(k_const * eps.powf(ne.r_p()) - gap - 1e-12);
        if eps > 1e-9 {
            strict.record(if gap > 0.0 { -gap } else { 1.0 });
        }

        let hx = gaussian(&mut rng, q);
        let hy = gaussian(&mut rng, q);
        let nx = norm_unchecked(&hx, p);
        let ny = norm_unchecked(&hy, p);
        let lhs =
            norm_unchecked(&combine(&hx, 1.0, &hy), p).powf(p) + norm_unchecked(&combine(&hx, -1.0, &hy), p).powf(p);
        let rhs = (nx + ny).powf(p) + (nx - ny).abs().powf(p);
        let tol = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
        // p >= 2: lhs <= rhs; 1 < p <= 2: lhs >= rhs. At e1, e2 with p = 4: 4 <= 16.
        let excess = if p >= 2.0 { lhs - rhs } else { rhs - lhs };
        hanner.record(excess - tol);
    }

    vec![dual.finish(), fd.finish(), equiv.finish(), smooth.finish(), convex.finish(), hanner.finish(), strict.finish()]
}
