//! Bounded polytopes kept in both halfspace and vertex form.
//!
//! New halfspaces are applied by clipping: vertices strictly violating the
//! halfspace are dropped and a new vertex is created on every edge that
//! crosses its boundary. Two vertices span an edge when the halfspaces active
//! at both have rank `q - 1` and no third vertex is active on all of them.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `{y : <normal, y> <= offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.is_empty() || normal.iter().any(|v| !v.is_finite()) || !offset.is_finite() {
            return Err(Error::InvalidInput("halfspace has non-finite data".into()));
        }
        if normal.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidInput("halfspace normal is zero".into()));
        }
        Ok(Self { normal, offset })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `offset - <normal, y>`; nonnegative inside.
    pub fn slack(&self, y: &[f64]) -> f64 {
        self.offset - dot(&self.normal, y)
    }

    /// Magnitude against which the slack at `y` is compared.
    fn scale(&self, y: &[f64]) -> f64 {
        let n = dot(&self.normal, &self.normal).sqrt();
        let m = y.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        n * m
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        self.slack(y) >= -tol * self.scale(y)
    }
}

/// Numerical tolerances of the vertex/halfspace bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolytopeTolerances {
    /// Relative slack below which a vertex counts as lying on a halfspace.
    pub feasibility: f64,
    /// l_inf distance below which two vertices are merged.
    pub merge: f64,
    /// Relative singular value threshold for rank decisions.
    pub rank: f64,
}

impl Default for PolytopeTolerances {
    fn default() -> Self {
        Self { feasibility: 1e-9, merge: 1e-8, rank: 1e-10 }
    }
}

/// A bounded, full-dimensional polytope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    vertices: Vec<Vec<f64>>,
    /// Indices of the halfspaces active at each vertex.
    incidence: Vec<BTreeSet<usize>>,
    #[serde(default)]
    tolerances: PolytopeTolerances,
}

/// Outcome of [`Polytope::cut`].
#[derive(Debug, Clone)]
pub struct CutOutcome {
    pub polytope: Polytope,
    /// The halfspace removed no vertex; the polytope is returned unchanged.
    pub null_cut: bool,
    pub removed: usize,
    pub created: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Numerical rank of a set of row vectors.
fn rank(rows: &[&[f64]], rel_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let q = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), q, |i, j| {
        let n = dot(rows[i], rows[i]).sqrt();
        rows[i][j] / n
    });
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Affine rank of a point set and, when deficient, a unit normal of a
/// hyperplane containing it.
fn affine_rank(points: &[Vec<f64>], q: usize, rel_tol: f64) -> (usize, Vec<f64>) {
    if points.len() < 2 {
        let mut d = vec![0.0; q];
        d[0] = 1.0;
        return (0, d);
    }
    let c: Vec<f64> = (0..q).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / points.len() as f64).collect();
    let m = DMatrix::from_fn(points.len(), q, |i, j| points[i][j] - c[j]);
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let scale = points.iter().flatten().fold(1.0_f64, |a, v| a.max(v.abs()));
    let thresh = (rel_tol * max).max(1e-12 * scale);
    let r = sv.iter().filter(|&&s| s > thresh).count();
    let mut normal = vec![0.0; q];
    if r < q {
        // Right singular vector of the smallest singular value.
        let (idx, _) =
            sv.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        if idx < vt.nrows() {
            for j in 0..q {
                normal[j] = vt[(idx, j)];
            }
        } else {
            normal[0] = 1.0;
        }
    }
    (r, normal)
}

impl Polytope {
    pub fn from_halfspaces(hs: Vec<Halfspace>) -> Result<Self> {
        Self::from_halfspaces_with(hs, PolytopeTolerances::default())
    }

    /// Intersection of the given halfspaces. Fails with
    /// [`Error::Unbounded`] or [`Error::Infeasible`] (empty or flat).
    pub fn from_halfspaces_with(hs: Vec<Halfspace>, tolerances: PolytopeTolerances) -> Result<Self> {
        let q = hs
            .first()
            .map(Halfspace::dim)
            .ok_or_else(|| Error::InvalidInput("at least one halfspace is required".into()))?;
        if hs.iter().any(|h| h.dim() != q) {
            return Err(Error::InvalidInput("halfspaces of mixed dimension".into()));
        }
        let reach = hs.iter().map(|h| h.offset.abs() / dot(&h.normal, &h.normal).sqrt()).fold(1.0_f64, f64::max);
        let mut half_width = 1e3 * reach;
        loop {
            let mut p = Self::bounding_box(q, half_width, tolerances);
            for h in &hs {
                p.add_halfspace(h.clone(), true)?;
            }
            let nbox = 2 * q;
            let touching =
                p.incidence.iter().enumerate().filter(|(_, inc)| inc.iter().any(|&i| i < nbox)).map(|(k, _)| k).max_by(
                    |&a, &b| {
                        let na = p.vertices[a].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                        let nb = p.vertices[b].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                        na.total_cmp(&nb)
                    },
                );
            if let Some(k) = touching {
                if half_width > 1e12 * reach {
                    let v = &p.vertices[k];
                    let n = dot(v, v).sqrt();
                    return Err(Error::Unbounded { direction: v.iter().map(|x| x / n).collect() });
                }
                half_width *= 1e3;
                continue;
            }
            p.halfspaces.drain(0..nbox);
            for inc in p.incidence.iter_mut() {
                *inc = inc.iter().map(|&i| i - nbox).collect();
            }
            let (r, normal) = affine_rank(&p.vertices, q, tolerances.rank);
            if r < q {
                return Err(Error::Infeasible { certificate: normal });
            }
            return Ok(p);
        }
    }

    fn bounding_box(q: usize, m: f64, tolerances: PolytopeTolerances) -> Self {
        let mut halfspaces = Vec::with_capacity(2 * q);
        for i in 0..q {
            let mut n = vec![0.0; q];
            n[i] = 1.0;
            halfspaces.push(Halfspace { normal: n.clone(), offset: m });
            n[i] = -1.0;
            halfspaces.push(Halfspace { normal: n, offset: m });
        }
        let mut vertices = Vec::with_capacity(1 << q);
        let mut incidence = Vec::with_capacity(1 << q);
        for mask in 0..(1usize << q) {
            let mut v = vec![0.0; q];
            let mut inc = BTreeSet::new();
            for i in 0..q {
                if mask >> i & 1 == 1 {
                    v[i] = m;
                    inc.insert(2 * i);
                } else {
                    v[i] = -m;
                    inc.insert(2 * i + 1);
                }
            }
            vertices.push(v);
            incidence.push(inc);
        }
        let mut p = Self { dim: q, halfspaces, vertices, incidence, tolerances };
        p.sort_vertices();
        p
    }

    fn sort_vertices(&mut self) {
        let mut idx: Vec<usize> = (0..self.vertices.len()).collect();
        idx.sort_by(|&a, &b| lex_cmp(&self.vertices[a], &self.vertices[b]));
        self.vertices = idx.iter().map(|&i| self.vertices[i].clone()).collect();
        self.incidence = idx.iter().map(|&i| self.incidence[i].clone()).collect();
    }

    /// Returns `P ∩ h`. A halfspace that removes no vertex is a null cut and
    /// leaves the polytope unchanged.
    pub fn cut(&self, h: &Halfspace) -> Result<CutOutcome> {
        if h.dim() != self.dim {
            return Err(Error::InvalidInput("cut dimension mismatch".into()));
        }
        let mut next = self.clone();
        let (removed, created) = next.add_halfspace(h.clone(), false)?;
        if removed == 0 {
            return Ok(CutOutcome { polytope: self.clone(), null_cut: true, removed: 0, created: 0 });
        }
        Ok(CutOutcome { polytope: next, null_cut: false, removed, created })
    }

    /// Clips against `h`; returns `(removed, created)` vertex counts. When
    /// nothing is removed the halfspace is only recorded if `keep_redundant`.
    fn add_halfspace(&mut self, h: Halfspace, keep_redundant: bool) -> Result<(usize, usize)> {
        let tol = self.tolerances.feasibility;
        let q = self.dim;
        let new_index = self.halfspaces.len();

        let slack: Vec<f64> = self.vertices.iter().map(|v| h.slack(v)).collect();
        let on: Vec<bool> = self.vertices.iter().zip(&slack).map(|(v, s)| s.abs() <= tol * h.scale(v)).collect();
        let out: Vec<usize> = (0..self.vertices.len()).filter(|&i| !on[i] && slack[i] < 0.0).collect();
        let inside: Vec<usize> = (0..self.vertices.len()).filter(|&i| !on[i] && slack[i] > 0.0).collect();

        if out.is_empty() {
            if keep_redundant {
                for (i, &is_on) in on.iter().enumerate() {
                    if is_on {
                        self.incidence[i].insert(new_index);
                    }
                }
                self.halfspaces.push(h);
            }
            return Ok((0, 0));
        }
        if inside.is_empty() {
            return Err(Error::Infeasible { certificate: h.normal.clone() });
        }

        let mut created: Vec<(Vec<f64>, BTreeSet<usize>)> = Vec::new();
        for &a in &inside {
            for &b in &out {
                let common: BTreeSet<usize> = self.incidence[a].intersection(&self.incidence[b]).cloned().collect();
                if common.len() + 1 < q {
                    continue;
                }
                let rows: Vec<&[f64]> = common.iter().map(|&i| self.halfspaces[i].normal.as_slice()).collect();
                if rank(&rows, self.tolerances.rank) + 1 != q {
                    continue;
                }
                let shared_elsewhere =
                    self.incidence.iter().enumerate().any(|(c, inc)| c != a && c != b && common.is_subset(inc));
                if shared_elsewhere {
                    continue;
                }
                let t = slack[a] / (slack[a] - slack[b]);
                let va = &self.vertices[a];
                let vb = &self.vertices[b];
                let point: Vec<f64> = va.iter().zip(vb).map(|(x, y)| x + t * (y - x)).collect();
                let mut inc = common;
                inc.insert(new_index);
                created.push((point, inc));
            }
        }

        let mut vertices = Vec::with_capacity(self.vertices.len());
        let mut incidence = Vec::with_capacity(self.vertices.len());
        for i in 0..self.vertices.len() {
            if slack[i] >= 0.0 || on[i] {
                let mut inc = self.incidence[i].clone();
                if on[i] {
                    inc.insert(new_index);
                }
                vertices.push(self.vertices[i].clone());
                incidence.push(inc);
            }
        }
        let kept = vertices.len();
        self.halfspaces.push(h);
        let mut n_created = 0;
        for (point, mut inc) in created {
            if let Some(k) = vertices.iter().position(|v| linf(v, &point) <= self.tolerances.merge) {
                incidence[k].extend(inc);
                continue;
            }
            for (j, hs) in self.halfspaces.iter().enumerate() {
                if hs.slack(&point).abs() <= tol * hs.scale(&point) {
                    inc.insert(j);
                }
            }
            vertices.push(point);
            incidence.push(inc);
            n_created += 1;
        }
        let removed = self.vertices.len() - kept;
        self.vertices = vertices;
        self.incidence = incidence;
        self.sort_vertices();
        Ok((removed, n_created))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn incidence(&self) -> &[BTreeSet<usize>] {
        &self.incidence
    }

    pub fn tolerances(&self) -> PolytopeTolerances {
        self.tolerances
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.contains(y, tol))
    }

    /// Volume for `q = 2, 3`; `None` otherwise.
    pub fn volume(&self) -> Option<f64> {
        let q = self.dim;
        let n = self.vertices.len() as f64;
        let centre: Vec<f64> = (0..q).map(|j| self.vertices.iter().map(|v| v[j]).sum::<f64>() / n).collect();
        match q {
            2 => {
                let mut pts: Vec<(f64, &Vec<f64>)> =
                    self.vertices.iter().map(|v| ((v[1] - centre[1]).atan2(v[0] - centre[0]), v)).collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut area = 0.0;
                for i in 0..pts.len() {
                    let a = pts[i].1;
                    let b = pts[(i + 1) % pts.len()].1;
                    area += a[0] * b[1] - b[0] * a[1];
                }
                Some(area.abs() / 2.0)
            }
            3 => {
                let mut vol = 0.0;
                for (j, h) in self.halfspaces.iter().enumerate() {
                    let face: Vec<&Vec<f64>> = self
                        .incidence
                        .iter()
                        .zip(&self.vertices)
                        .filter(|(inc, _)| inc.contains(&j))
                        .map(|(_, v)| v)
                        .collect();
                    if face.len() < 3 {
                        continue;
                    }
                    let m = face.len() as f64;
                    let fc: Vec<f64> = (0..3).map(|k| face.iter().map(|v| v[k]).sum::<f64>() / m).collect();
                    let nn = dot(&h.normal, &h.normal).sqrt();
                    let nrm: Vec<f64> = h.normal.iter().map(|x| x / nn).collect();
                    // In-plane basis.
                    let seed = if nrm[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                    let u = normalize(&cross(&nrm, &seed));
                    let w = cross(&nrm, &u);
                    let mut ordered: Vec<(f64, &Vec<f64>)> = face
                        .iter()
                        .map(|v| {
                            let d: Vec<f64> = (0..3).map(|k| v[k] - fc[k]).collect();
                            (dot(&d, &w).atan2(dot(&d, &u)), *v)
                        })
                        .collect();
                    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
                    for i in 0..ordered.len() {
                        let a = ordered[i].1;
                        let b = ordered[(i + 1) % ordered.len()].1;
                        vol += tet_volume(&centre, &fc, a, b);
                    }
                }
                Some(vol)
            }
            _ => None,
        }
    }
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: &[f64]) -> Vec<f64> {
    let n = dot(a, a).sqrt();
    a.iter().map(|x| x / n).collect()
}

fn tet_volume(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    let u: Vec<f64> = (0..3).map(|k| b[k] - a[k]).collect();
    let v: Vec<f64> = (0..3).map(|k| c[k] - a[k]).collect();
    let w: Vec<f64> = (0..3).map(|k| d[k] - a[k]).collect();
    dot(&u, &cross(&v, &w)).abs() / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(n: &[f64], b: f64) -> Halfspace {
        Halfspace::new(n.to_vec(), b).unwrap()
    }

    fn unit_square() -> Vec<Halfspace> {
        vec![hs(&[-1.0, 0.0], 0.0), hs(&[0.0, -1.0], 0.0), hs(&[1.0, 0.0], 1.0), hs(&[0.0, 1.0], 1.0)]
    }

    fn assert_vertices(p: &Polytope, expected: &[[f64; 2]]) {
        assert_eq!(p.vertices().len(), expected.len(), "{:?}", p.vertices());
        for (v, e) in p.vertices().iter().zip(expected) {
            assert!(linf(v, e) < 1e-12, "{v:?} vs {e:?}");
        }
    }

    #[test]
    fn square_vertices_lexicographic() {
        let p = Polytope::from_halfspaces(unit_square()).unwrap();
        assert_vertices(&p, &[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
        for inc in p.incidence() {
            assert_eq!(inc.len(), 2);
        }
        assert!((p.volume().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_in_three_dimensions() {
        let p = Polytope::from_halfspaces(vec![
            hs(&[-1.0, 0.0, 0.0], 0.0),
            hs(&[0.0, -1.0, 0.0], 0.0),
            hs(&[0.0, 0.0, -1.0], 0.0),
            hs(&[1.0, 1.0, 1.0], 1.0),
        ])
        .unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!((p.volume().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_cut_gives_pentagon() {
        let p = Polytope::from_halfspaces(unit_square()).unwrap();
        let out = p.cut(&hs(&[1.0, 1.0], 1.5)).unwrap();
        assert!(!out.null_cut);
        assert_eq!(out.removed, 1);
        assert_eq!(out.created, 2);
        assert_vertices(&out.polytope, &[[0.0, 0.0], [0.0, 1.0], [0.5, 1.0], [1.0, 0.0], [1.0, 0.5]]);
        assert!((out.polytope.volume().unwrap() - 0.875).abs() < 1e-12);
    }

    #[test]
    fn redundant_cut_is_null() {
        let p = Polytope::from_halfspaces(unit_square()).unwrap();
        let out = p.cut(&hs(&[1.0, 1.0], 10.0)).unwrap();
        assert!(out.null_cut);
        assert_eq!(out.polytope.halfspaces().len(), 4);
        assert_eq!(out.polytope.vertices(), p.vertices());
    }

    #[test]
    fn axis_cut_gives_rectangle() {
        let p = Polytope::from_halfspaces(unit_square()).unwrap();
        let out = p.cut(&hs(&[1.0, 0.0], 0.5)).unwrap();
        assert_vertices(&out.polytope, &[[0.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 1.0]]);
    }

    #[test]
    fn cut_through_vertex_keeps_it_active() {
        let p = Polytope::from_halfspaces(unit_square()).unwrap();
        // x + y <= 1 passes through (0,1) and (1,0).
        let out = p.cut(&hs(&[1.0, 1.0], 1.0)).unwrap();
        assert_vertices(&out.polytope, &[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(out.created, 0);
        let new_index = 4;
        assert!(out.polytope.incidence()[1].contains(&new_index));
        assert!(out.polytope.incidence()[2].contains(&new_index));
    }

    #[test]
    fn cube_corner_cut() {
        let mut h = Vec::new();
        for i in 0..3 {
            let mut n = vec![0.0; 3];
            n[i] = 1.0;
            h.push(hs(&n, 1.0));
            n[i] = -1.0;
            h.push(hs(&n, 0.0));
        }
        let p = Polytope::from_halfspaces(h).unwrap();
        assert_eq!(p.vertices().len(), 8);
        let out = p.cut(&hs(&[1.0, 1.0, 1.0], 2.5)).unwrap();
        assert_eq!(out.polytope.vertices().len(), 10);
        let expected = 1.0 - 0.5f64.powi(3) / 6.0;
        assert!((out.polytope.volume().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let err = Polytope::from_halfspaces(vec![hs(&[-1.0, 0.0], 0.0), hs(&[0.0, -1.0], 0.0)]).unwrap_err();
        match err {
            Error::Unbounded { direction } => {
                assert!(direction.iter().all(|&d| d >= -1e-9));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn infeasible_is_reported() {
        let mut h = unit_square();
        h.push(hs(&[1.0, 0.0], -1.0));
        assert!(matches!(Polytope::from_halfspaces(h), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn flat_intersection_is_infeasible() {
        let mut h = unit_square();
        h.push(hs(&[1.0, 0.0], 0.0));
        match Polytope::from_halfspaces(h) {
            Err(Error::Infeasible { certificate }) => assert!(certificate[0].abs() > 0.99),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cut_emptying_polytope_fails() {
        let p = Polytope::from_halfspaces(unit_square()).unwrap();
        assert!(matches!(p.cut(&hs(&[1.0, 1.0], -1.0)), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn rejects_zero_normal() {
        assert!(Halfspace::new(vec![0.0, 0.0], 1.0).is_err());
        assert!(Halfspace::new(vec![1.0, f64::NAN], 1.0).is_err());
    }

    #[test]
    fn json_round_trip_keeps_geometry() {
        let p = Polytope::from_halfspaces(unit_square()).unwrap();
        let p2: Polytope = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p.vertices(), p2.vertices());
        assert_eq!(p.incidence(), p2.incidence());
    }
}
