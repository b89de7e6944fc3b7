//! Rate fitting on Hausdorff error series and run-time checks of the
//! hyperplane-distance, separation and packing estimates on recorded cuts.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::driver::RunTrace;
use crate::lp_geometry::{norm_unchecked, LemmaConstants};

/// Violations within this absolute amount are ignored by the verifiers.
pub const VERIFY_TOLERANCE: f64 = 1e-6;

/// Maximum number of pairs examined per trace.
pub const PAIR_CAP: usize = 200_000;

/// Running minimum of a series.
pub fn monotone_envelope(series: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut m = f64::INFINITY;
    for &v in series {
        m = m.min(v);
        out.push(m);
    }
    out
}

/// Least-squares fit of `delta_k = lambda * k^(c / (1 - q))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub c_hat: f64,
    pub lambda_hat: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// First and last iteration number `k` (one-based) in the window.
    pub window: (usize, usize),
    /// False when fewer than five points were available.
    pub reliable: bool,
}

/// Fits the rate model on `series` (expected to be a monotone envelope).
///
/// The window drops the first `max(3, ceil(0.08 K))` points and every point
/// at or below `2 epsilon`; when fewer than five points remain the plateau
/// cutoff is relaxed to `1.2 epsilon`. Iteration numbers start at one.
pub fn fit_rate(series: &[f64], q: usize, epsilon: f64) -> RateFit {
    let k_total = series.len();
    let skip = 3usize.max((0.08 * k_total as f64).ceil() as usize);
    let window = |cutoff: f64| -> Vec<(f64, f64)> {
        series
            .iter()
            .enumerate()
            .skip(skip)
            .filter(|(_, d)| **d > cutoff && **d > 0.0)
            .map(|(i, d)| ((i + 1) as f64, *d))
            .collect()
    };
    let mut pts = window(2.0 * epsilon);
    if pts.len() < 5 {
        pts = window(1.2 * epsilon);
    }
    let n = pts.len();
    if n < 2 {
        return RateFit {
            c_hat: f64::NAN,
            lambda_hat: f64::NAN,
            r_squared: f64::NAN,
            points_used: n,
            window: pts.first().map(|p| (p.0 as usize, p.0 as usize)).unwrap_or((0, 0)),
            reliable: false,
        };
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    RateFit {
        c_hat: -slope * (q as f64 - 1.0),
        lambda_hat: intercept.exp(),
        r_squared,
        points_used: n,
        window: (pts[0].0 as usize, pts[n - 1].0 as usize),
        reliable: n >= 5,
    }
}

/// Two support points with their cut normals and deviation vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationPair {
    pub i: usize,
    pub j: usize,
    pub y_i: Vec<f64>,
    pub y_j: Vec<f64>,
    pub w_i: Vec<f64>,
    pub w_j: Vec<f64>,
    pub alpha_i: Vec<f64>,
    pub alpha_j: Vec<f64>,
    /// `<w_j, y_i - y_j>`.
    pub d_ij: f64,
    /// `<w_i, y_j - y_i>`.
    pub d_ji: f64,
    /// Hausdorff error at the later of the two cuts, when known.
    pub level: Option<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl DeviationPair {
    pub fn new(i: usize, y_i: &[f64], w_i: &[f64], j: usize, y_j: &[f64], w_j: &[f64], eta: f64) -> Self {
        let dev = |y: &[f64], w: &[f64]| -> Vec<f64> { y.iter().zip(w).map(|(a, b)| a - eta * b).collect() };
        Self {
            i,
            j,
            alpha_i: dev(y_i, w_i),
            alpha_j: dev(y_j, w_j),
            d_ij: dot(w_j, &diff(y_i, y_j)),
            d_ji: dot(w_i, &diff(y_j, y_i)),
            y_i: y_i.to_vec(),
            y_j: y_j.to_vec(),
            w_i: w_i.to_vec(),
            w_j: w_j.to_vec(),
            level: None,
        }
    }

    pub fn alpha_distance(&self, p: f64) -> f64 {
        norm_unchecked(&diff(&self.alpha_i, &self.alpha_j), p)
    }
}

/// All unordered pairs of distinct cuts in a trace, subsampled with `seed`
/// down to [`PAIR_CAP`] when there are more.
pub fn deviation_pairs(trace: &RunTrace, eta: f64, seed: u64) -> Vec<DeviationPair> {
    let cuts: Vec<(&[f64], &[f64], f64)> = trace
        .cuts()
        .map(|r| (r.support_point.as_slice(), r.cut_normal.as_deref().unwrap_or(&[]), r.residual_norm))
        .collect();
    let m = cuts.len();
    let total = m * m.saturating_sub(1) / 2;
    let index_of = |mut t: usize| -> (usize, usize) {
        // t-th pair (i, j), i < j, in row-major order.
        let mut i = 0;
        while t >= m - 1 - i {
            t -= m - 1 - i;
            i += 1;
        }
        (i, i + 1 + t)
    };
    let chosen: Vec<usize> = if total > PAIR_CAP {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = sample(&mut rng, total, PAIR_CAP).into_vec();
        v.sort_unstable();
        v
    } else {
        (0..total).collect()
    };
    chosen
        .into_iter()
        .map(|t| {
            let (i, j) = index_of(t);
            let mut pair = DeviationPair::new(i, cuts[i].0, cuts[i].1, j, cuts[j].0, cuts[j].1, eta);
            pair.level = Some(cuts[j].2);
            pair
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub i: usize,
    pub j: usize,
    /// Amount by which the inequality fails.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub name: String,
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
    /// Largest ratio of left to right side over checked inequalities; below
    /// one when every inequality holds with room to spare.
    pub max_slack_ratio: f64,
}

impl LemmaReport {
    fn new(name: &str) -> Self {
        Self { name: name.into(), pairs_checked: 0, violations: Vec::new(), max_slack_ratio: 0.0 }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `0 <= d <= C(p,q) ||alpha_i - alpha_j||_p^2 / eta` in both
/// orientations of every pair.
pub fn verify_hyperplane_lemma(pairs: &[DeviationPair], lc: &LemmaConstants) -> LemmaReport {
    let mut rep = LemmaReport::new("hyperplane_distance");
    for pr in pairs {
        rep.pairs_checked += 1;
        let bound = lc.c_pq_distance * pr.alpha_distance(lc.p).powi(2) / lc.eta;
        for (d, i, j) in [(pr.d_ij, pr.i, pr.j), (pr.d_ji, pr.j, pr.i)] {
            if d < -VERIFY_TOLERANCE {
                rep.violations.push(Violation { check: "support_condition".into(), i, j, excess: -d });
            }
            if d > bound + VERIFY_TOLERANCE {
                rep.violations.push(Violation { check: "distance_bound".into(), i, j, excess: d - bound });
            }
            if bound > 0.0 {
                rep.max_slack_ratio = rep.max_slack_ratio.max(d / bound);
            }
        }
    }
    rep
}

/// Checks the separation estimates with a common level `h`: part (i) for
/// orientations with `d >= h`, part (ii) for pairs with `<w_i, w_j> <= 0`.
pub fn verify_separation(pairs: &[DeviationPair], lc: &LemmaConstants, h: f64) -> LemmaReport {
    separation(pairs, lc, |_| h)
}

/// As [`verify_separation`], with each pair's own recorded level.
pub fn verify_separation_levels(pairs: &[DeviationPair], lc: &LemmaConstants) -> LemmaReport {
    separation(pairs, lc, |pr| pr.level.unwrap_or(f64::INFINITY))
}

fn separation(pairs: &[DeviationPair], lc: &LemmaConstants, level: impl Fn(&DeviationPair) -> f64) -> LemmaReport {
    let mut rep = LemmaReport::new("deviation_separation");
    for pr in pairs {
        if pr.i == pr.j {
            continue;
        }
        rep.pairs_checked += 1;
        let sep = pr.alpha_distance(lc.p);
        let h = level(pr);
        if pr.d_ij.max(pr.d_ji) >= h && h > 0.0 {
            let bound = lc.c3 * (lc.eta * h).sqrt();
            if sep < bound - VERIFY_TOLERANCE {
                rep.violations.push(Violation {
                    check: "separation_distance".into(),
                    i: pr.i,
                    j: pr.j,
                    excess: bound - sep,
                });
            }
            if sep > 0.0 {
                rep.max_slack_ratio = rep.max_slack_ratio.max(bound / sep);
            }
        }
        if dot(&pr.w_i, &pr.w_j) <= 0.0 {
            let bound = lc.c2 * lc.eta;
            if sep < bound - VERIFY_TOLERANCE {
                rep.violations.push(Violation {
                    check: "separation_normals".into(),
                    i: pr.i,
                    j: pr.j,
                    excess: bound - sep,
                });
            }
            if sep > 0.0 {
                rep.max_slack_ratio = rep.max_slack_ratio.max(bound / sep);
            }
        }
    }
    rep
}

/// Size of a greedy `eps_sep`-separated subset (in the l_p norm) of the
/// deviation vectors `y - eta w` of the given support points and normals.
pub fn packing_census(records: &[(Vec<f64>, Vec<f64>)], lc: &LemmaConstants, eps_sep: f64) -> usize {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for (y, w) in records {
        let a: Vec<f64> = y.iter().zip(w).map(|(s, t)| s - lc.eta * t).collect();
        if kept.iter().all(|b| norm_unchecked(&diff(&a, b), lc.p) >= eps_sep) {
            kept.push(a);
        }
    }
    kept.len()
}

/// Support point and normal of every cut in a trace.
pub fn cut_records(trace: &RunTrace) -> Vec<(Vec<f64>, Vec<f64>)> {
    trace.cuts().map(|r| (r.support_point.clone(), r.cut_normal.clone().unwrap_or_default())).collect()
}

/// Checks that every pair of cut normals differs by more than `tol` in the
/// max norm, i.e. that the trace produced `J + 1 + k` distinct supporting
/// directions. Returns the offending index pairs.
pub fn duplicate_cut_normals(trace: &RunTrace, tol: f64) -> Vec<(usize, usize)> {
    let normals: Vec<&Vec<f64>> = trace.cuts().filter_map(|r| r.cut_normal.as_ref()).collect();
    let mut out = Vec::new();
    for i in 0..normals.len() {
        for j in 0..i {
            let d = normals[i].iter().zip(normals[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if d <= tol {
                out.push((j, i));
            }
        }
    }
    out
}
