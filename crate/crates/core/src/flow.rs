//! Lagrangian layer flow for y-invariant layers.
//!
//! A layer cross-section is a polyline in the `(x, z)` plane. Each point moves
//! along the layer normal at speed `a / (1 - 2 lambda H)`, where `H` is half the
//! planar curvature (the extruded direction is flat, so `K = 0`).
//!
//! The flow direction is the side the normal points to, fixed by the curve's
//! [`NormalSide`] together with the sign of `dn`.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::analytic::{bps_edge_u, EdgeSolutionParams};
use crate::contour::{hausdorff, level_segments, point_segment_distance, polyline_segments, Point2};
use crate::error::{invalid, Error, Result};
use crate::grid::{MaterialParams, ScalarField3};

/// Flow speed singularity threshold on `|1 - 2 lambda H|`.
pub const SINGULARITY_MARGIN: f64 = 0.05;

/// Which side of the direction of travel the layer normal points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalSide {
    /// Tangent rotated by +90 degrees in the `(x, z)` plane.
    Left,
    Right,
}

impl NormalSide {
    fn sign(self) -> f64 {
        match self {
            NormalSide::Left => 1.0,
            NormalSide::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCurve {
    /// `(x, z)` points; closed curves do not repeat the first point.
    pub points: Vec<Point2>,
    pub layer_index: f64,
    pub closed: bool,
    pub normal_side: NormalSide,
}

impl LayerCurve {
    pub fn new(points: Vec<Point2>, layer_index: f64, closed: bool, normal_side: NormalSide) -> Result<Self> {
        let c = Self {
            points,
            layer_index,
            closed,
            normal_side,
        };
        c.validate()?;
        Ok(c)
    }

    /// Straight segment from `x0` to `x1` at height `z`, normal pointing up.
    pub fn flat(x0: f64, x1: f64, z: f64, n_points: usize, layer_index: f64) -> Result<Self> {
        if n_points < 4 {
            return Err(Error::DegenerateCurve("need at least 4 points".into()));
        }
        let pts = (0..n_points)
            .map(|i| [x0 + (x1 - x0) * i as f64 / (n_points - 1) as f64, z])
            .collect();
        let side = if x1 > x0 { NormalSide::Left } else { NormalSide::Right };
        Self::new(pts, layer_index, false, side)
    }

    /// Counterclockwise circle in the `(x, z)` plane with the outward normal.
    pub fn circle(centre: Point2, radius: f64, n_points: usize, layer_index: f64) -> Result<Self> {
        if !(radius > 0.0) || n_points < 4 {
            return Err(Error::DegenerateCurve("circle needs radius > 0 and at least 4 points".into()));
        }
        let pts = (0..n_points)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n_points as f64;
                [centre[0] + radius * t.cos(), centre[1] + radius * t.sin()]
            })
            .collect();
        Self::new(pts, layer_index, true, NormalSide::Right)
    }

    /// The level set `Phi = level_n a` of the nonlinear edge field on the
    /// `z > 0` side, sampled at `n_points` uniformly spaced `x` in `[x0, x1]`.
    ///
    /// The normal points along `-grad Phi`, which is the orientation whose
    /// flow equation the field satisfies; the stack therefore grows upward
    /// with `dn < 0` and layer indices count levels of `-Phi`.
    pub fn bps_level(p: &EdgeSolutionParams, a: f64, level_n: f64, x0: f64, x1: f64, n_points: usize) -> Result<Self> {
        if !(x1 > x0) || n_points < 4 {
            return Err(invalid("x1", "need x1 > x0 and at least 4 points"));
        }
        let level = level_n * a;
        let mut pts = Vec::with_capacity(n_points);
        for i in 0..n_points {
            let x = x0 + (x1 - x0) * i as f64 / (n_points - 1) as f64;
            // z - u(x, z) is increasing in z; bracket and bisect.
            let f = |z: f64| -> Result<f64> { Ok(z - bps_edge_u(x, z, p)? - level) };
            let (mut lo, mut hi) = (1e-9 * p.lambda, p.lambda.max(1.0));
            if f(lo)? > 0.0 {
                return Err(Error::NoConvergence(format!("level {level} reaches z = 0 at x = {x}")));
            }
            let mut grow = 0;
            while f(hi)? < 0.0 {
                hi *= 2.0;
                grow += 1;
                if grow > 200 {
                    return Err(Error::NoConvergence("level bracket".into()));
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if f(mid)? > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            pts.push([x, 0.5 * (lo + hi)]);
        }
        Self::new(pts, -level_n, false, NormalSide::Right)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if n < 4 {
            return Err(Error::DegenerateCurve(format!("{n} points, need at least 4")));
        }
        if self.points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::DegenerateCurve("non-finite point".into()));
        }
        for i in 0..self.segment_count() {
            if seg_len(self.points[i], self.points[(i + 1) % n]) == 0.0 {
                return Err(Error::DegenerateCurve(format!("points {i} and {} coincide", (i + 1) % n)));
            }
        }
        if let Some(s) = self.self_intersection() {
            return Err(Error::SelfIntersection { arclength: s });
        }
        Ok(())
    }

    fn segment_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    pub fn segments(&self) -> Vec<(Point2, Point2)> {
        polyline_segments(&self.points, self.closed)
    }

    /// Cumulative arclength at each point.
    pub fn arclengths(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        s.push(0.0);
        for w in self.points.windows(2) {
            acc += seg_len(w[0], w[1]);
            s.push(acc);
        }
        s
    }

    pub fn length(&self) -> f64 {
        let open = *self.arclengths().last().unwrap_or(&0.0);
        if self.closed {
            open + seg_len(self.points[self.points.len() - 1], self.points[0])
        } else {
            open
        }
    }

    /// Ratio of the longest to the shortest segment.
    pub fn uniformity(&self) -> f64 {
        let n = self.points.len();
        let lens: Vec<f64> = (0..self.segment_count())
            .map(|i| seg_len(self.points[i], self.points[(i + 1) % n]))
            .collect();
        let max = lens.iter().cloned().fold(0.0, f64::max);
        let min = lens.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    /// Arclength of the first crossing between non-adjacent segments, found by
    /// a sweep over segments sorted by their smallest `x`.
    pub fn self_intersection(&self) -> Option<f64> {
        let n = self.points.len();
        let m = self.segment_count();
        let seg = |i: usize| (self.points[i], self.points[(i + 1) % n]);
        let mut order: Vec<usize> = (0..m).collect();
        let xmin = |i: usize| seg(i).0[0].min(seg(i).1[0]);
        let xmax = |i: usize| seg(i).0[0].max(seg(i).1[0]);
        order.sort_by(|&a, &b| xmin(a).total_cmp(&xmin(b)));
        let arc = self.arclengths();
        for (pos, &i) in order.iter().enumerate() {
            let hi = xmax(i);
            for &j in &order[pos + 1..] {
                if xmin(j) > hi {
                    break;
                }
                let adjacent = i.abs_diff(j) == 1 || (self.closed && i.abs_diff(j) == m - 1);
                if i == j || adjacent {
                    continue;
                }
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if segments_cross(a, b, c, d) {
                    return Some(arc[i.min(j)]);
                }
            }
        }
        None
    }
}

fn seg_len(a: Point2, b: Point2) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Per-point normals and mean curvature of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveGeometry {
    pub normals: Vec<Point2>,
    /// `H = kappa / 2`, positive when the curve bends away from its normal.
    pub h: Vec<f64>,
}

/// Signed Menger curvature of three points, positive for a left turn.
fn menger(p: Point2, q: Point2, r: Point2) -> f64 {
    let a = [q[0] - p[0], q[1] - p[1]];
    let b = [r[0] - q[0], r[1] - q[1]];
    let cross = a[0] * b[1] - a[1] * b[0];
    2.0 * cross / (seg_len(p, q) * seg_len(q, r) * seg_len(p, r))
}

fn geometry_of(points: &[Point2], closed: bool, side: NormalSide) -> Result<CurveGeometry> {
    let n = points.len();
    if n < 4 {
        return Err(Error::DegenerateCurve(format!("{n} points, need at least 4")));
    }
    let sign = side.sign();
    let rows: Vec<Result<(Point2, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (prev, next, trio) = if closed {
                let (p, q) = ((i + n - 1) % n, (i + 1) % n);
                (p, q, [p, i, q])
            } else if i == 0 {
                (0, 1, [0, 1, 2])
            } else if i == n - 1 {
                (n - 2, n - 1, [n - 3, n - 2, n - 1])
            } else {
                (i - 1, i + 1, [i - 1, i, i + 1])
            };
            let t = [points[next][0] - points[prev][0], points[next][1] - points[prev][1]];
            let len = t[0].hypot(t[1]);
            let [p, q, r] = trio.map(|k| points[k]);
            if len == 0.0 || seg_len(p, q) == 0.0 || seg_len(q, r) == 0.0 || seg_len(p, r) == 0.0 {
                return Err(Error::DegenerateCurve(format!("zero-length segment at point {i}")));
            }
            let normal = [-sign * t[1] / len, sign * t[0] / len];
            // Tangent turns towards the left normal by the signed curvature.
            let h = -0.5 * sign * menger(p, q, r);
            Ok((normal, h))
        })
        .collect();
    let mut normals = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for row in rows {
        let (nrm, hh) = row?;
        normals.push(nrm);
        h.push(hh);
    }
    Ok(CurveGeometry { normals, h })
}

pub fn curve_geometry(c: &LayerCurve) -> Result<CurveGeometry> {
    geometry_of(&c.points, c.closed, c.normal_side)
}

fn velocities(points: &[Point2], c: &LayerCurve, a: f64, lambda: f64, arc: &[f64]) -> Result<Vec<Point2>> {
    let g = geometry_of(points, c.closed, c.normal_side)?;
    let mut v = Vec::with_capacity(points.len());
    for (i, (nrm, h)) in g.normals.iter().zip(&g.h).enumerate() {
        let margin = 1.0 - 2.0 * lambda * h;
        if !(margin.abs() > SINGULARITY_MARGIN) {
            return Err(Error::FlowSingularity {
                arclength: arc[i],
                margin: margin.abs(),
                layer: c.layer_index,
            });
        }
        let speed = a / margin;
        v.push([speed * nrm[0], speed * nrm[1]]);
    }
    Ok(v)
}

fn axpy(x: &[Point2], h: f64, k: &[Point2]) -> Vec<Point2> {
    x.iter().zip(k).map(|(p, d)| [p[0] + h * d[0], p[1] + h * d[1]]).collect()
}

/// One RK4 step of size `dn` without resampling.
fn rk4_points(c: &LayerCurve, a: f64, lambda: f64, dn: f64) -> Result<Vec<Point2>> {
    let arc = c.arclengths();
    let x = &c.points;
    let k1 = velocities(x, c, a, lambda, &arc)?;
    let k2 = velocities(&axpy(x, 0.5 * dn, &k1), c, a, lambda, &arc)?;
    let k3 = velocities(&axpy(x, 0.5 * dn, &k2), c, a, lambda, &arc)?;
    let k4 = velocities(&axpy(x, dn, &k3), c, a, lambda, &arc)?;
    Ok(x
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut q = *p;
            for d in 0..2 {
                q[d] += dn / 6.0 * (k1[i][d] + 2.0 * k2[i][d] + 2.0 * k3[i][d] + k4[i][d]);
            }
            q
        })
        .collect())
}

/// Largest substep allowed by the displacement and parabolic limits.
fn substep_limit(c: &LayerCurve, a: f64, lambda: f64) -> Result<f64> {
    let g = curve_geometry(c)?;
    let n = c.points.len();
    let min_seg = (0..c.segment_count())
        .map(|i| seg_len(c.points[i], c.points[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min);
    let min_margin = g
        .h
        .iter()
        .map(|h| (1.0 - 2.0 * lambda * h).abs())
        .fold(f64::INFINITY, f64::min)
        .max(SINGULARITY_MARGIN);
    let max_speed = a / min_margin;
    let cap = if lambda > 0.0 { min_seg.min(lambda) } else { min_seg };
    let mut limit = 0.2 * cap / max_speed;
    if lambda > 0.0 {
        // Curvature feedback acts like diffusion with coefficient a lambda / (1 - 2 lambda H)^2.
        limit = limit.min(0.5 * min_seg * min_seg * min_margin * min_margin / (a * lambda));
    }
    Ok(limit)
}

/// Advance a curve by `dn` with an explicit penetration length, which may be
/// zero (pure normal offset).
pub fn advance(c: &LayerCurve, a: f64, lambda: f64, dn: f64) -> Result<LayerCurve> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", "must be positive"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", "must be non-negative"));
    }
    if !dn.is_finite() {
        return Err(invalid("dn", "must be finite"));
    }
    if dn == 0.0 {
        return Ok(c.clone());
    }
    let mut cur = c.clone();
    let target = c.layer_index + dn;
    let mut remaining = dn;
    while remaining != 0.0 {
        let limit = substep_limit(&cur, a, lambda)?;
        let steps_left = (remaining.abs() / limit).ceil().max(1.0);
        let h = remaining / steps_left;
        let pts = rk4_points(&cur, a, lambda, h)?;
        let mut pts = resample(&pts, cur.closed)?;
        if cur.closed {
            krasny_filter(&mut pts);
        }
        remaining = if steps_left <= 1.0 { 0.0 } else { remaining - h };
        cur = LayerCurve {
            points: pts,
            layer_index: if remaining == 0.0 { target } else { cur.layer_index + h },
            closed: cur.closed,
            normal_side: cur.normal_side,
        };
    }
    cur.validate()?;
    Ok(cur)
}

/// Advance a curve by `dn` layers.
pub fn flow_step(c: &LayerCurve, params: &MaterialParams, dn: f64) -> Result<LayerCurve> {
    params.validate()?;
    advance(c, params.a, params.lambda(), dn)
}

/// The seed followed by `n_layers` curves one layer apart, each reached with
/// steps of size `dn` (its sign sets the direction).
pub fn generate_stack_with(seed: &LayerCurve, a: f64, lambda: f64, n_layers: usize, dn: f64) -> Result<Vec<LayerCurve>> {
    if !(dn != 0.0 && dn.abs() <= 1.0) {
        return Err(invalid("dn", "need 0 < |dn| <= 1"));
    }
    let per_layer = (1.0 / dn.abs()).round().max(1.0) as usize;
    let h = dn.signum() / per_layer as f64;
    let mut out = Vec::with_capacity(n_layers + 1);
    out.push(seed.clone());
    let mut cur = seed.clone();
    for k in 1..=n_layers {
        for _ in 0..per_layer {
            cur = advance(&cur, a, lambda, h)?;
        }
        cur.layer_index = seed.layer_index + dn.signum() * k as f64;
        out.push(cur.clone());
    }
    Ok(out)
}

pub fn generate_stack(seed: &LayerCurve, params: &MaterialParams, n_layers: usize, dn: f64) -> Result<Vec<LayerCurve>> {
    params.validate()?;
    generate_stack_with(seed, params.a, params.lambda(), n_layers, dn)
}

/// Hausdorff distance between each curve and the contour `phi = n a` on the
/// slice `j = 0`. Only the overlap is compared: curve segments outside the
/// sampled `(x, z)` box and, for open curves, contour segments outside the
/// curve's `x` range are ignored.
pub fn eulerian_compare(stack: &[LayerCurve], phi: &ScalarField3, a: f64) -> Result<Vec<f64>> {
    let g = &phi.grid;
    let lo = [g.origin[0], g.origin[2]];
    let hi = [
        g.origin[0] + (g.extents[0] - 1) as f64 * g.spacing[0],
        g.origin[2] + (g.extents[2] - 1) as f64 * g.spacing[2],
    ];
    stack
        .par_iter()
        .map(|c| {
            let contour = level_segments(phi, 0, c.layer_index * a)?;
            let inside = |p: &Point2| p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1];
            let curve: Vec<_> = c.segments().into_iter().filter(|s| inside(&s.0) && inside(&s.1)).collect();
            if curve.is_empty() {
                return Err(Error::ContourAbsent { level: c.layer_index * a });
            }
            let contour: Vec<_> = if c.closed {
                contour
            } else {
                let xmin = c.points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let xmax = c.points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                contour.into_iter().filter_map(|s| clip_x(s, xmin, xmax)).collect()
            };
            if contour.is_empty() {
                return Err(Error::ContourAbsent { level: c.layer_index * a });
            }
            Ok(hausdorff(&curve, &contour))
        })
        .collect()
}

/// The part of a segment with `xmin <= x <= xmax`.
fn clip_x(s: (Point2, Point2), xmin: f64, xmax: f64) -> Option<(Point2, Point2)> {
    let (mut p, mut q) = s;
    if p[0] > q[0] {
        std::mem::swap(&mut p, &mut q);
    }
    if q[0] < xmin || p[0] > xmax {
        return None;
    }
    let at = |x: f64| -> Point2 {
        if q[0] == p[0] {
            return p;
        }
        let t = (x - p[0]) / (q[0] - p[0]);
        [x, p[1] + t * (q[1] - p[1])]
    };
    let a = if p[0] < xmin { at(xmin) } else { p };
    let b = if q[0] > xmax { at(xmax) } else { q };
    Some((a, b))
}

/// Second derivatives of an interpolating cubic spline.
fn spline_moments(t: &[f64], y: &[f64], periodic: bool) -> Vec<f64> {
    let n = y.len();
    if periodic {
        // Knots t[0..=n] with y[n] = y[0].
        let h: Vec<f64> = (0..n).map(|i| t[i + 1] - t[i]).collect();
        let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let hp = h[(i + n - 1) % n];
            let hn = h[i];
            lo[i] = hp;
            di[i] = 2.0 * (hp + hn);
            up[i] = hn;
            rhs[i] = 6.0 * ((y[(i + 1) % n] - y[i]) / hn - (y[i] - y[(i + n - 1) % n]) / hp);
        }
        cyclic_solve(&lo, &di, &up, &rhs)
    } else {
        let h: Vec<f64> = (0..n - 1).map(|i| t[i + 1] - t[i]).collect();
        let mut m = vec![0.0; n];
        if n < 3 {
            return m;
        }
        let k = n - 2;
        let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
        for r in 0..k {
            let i = r + 1;
            lo[r] = h[i - 1];
            di[r] = 2.0 * (h[i - 1] + h[i]);
            up[r] = h[i];
            rhs[r] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        let inner = thomas(&lo, &di, &up, &rhs);
        m[1..n - 1].copy_from_slice(&inner);
        m
    }
}

fn thomas(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = di.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = up[0] / di[0];
    d[0] = rhs[0] / di[0];
    for i in 1..n {
        let m = di[i] - lo[i] * c[i - 1];
        c[i] = up[i] / m;
        d[i] = (rhs[i] - lo[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal solve by the Sherman-Morrison correction.
fn cyclic_solve(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = di.len();
    let alpha = up[n - 1];
    let beta = lo[0];
    let gamma = -di[0];
    let mut bb = di.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    let mut x = thomas(lo, &bb, up, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(lo, &bb, up, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    for i in 0..n {
        x[i] -= fact * z[i];
    }
    x
}

fn spline_eval(t: &[f64], y: &[f64], m: &[f64], s: f64, i: usize) -> f64 {
    let h = t[i + 1] - t[i];
    let (a, b) = ((t[i + 1] - s) / h, (s - t[i]) / h);
    // Written so constant data is reproduced exactly.
    y[i] + b * (y[i + 1] - y[i]) + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0
}

struct Spline {
    t: Vec<f64>,
    coords: [Vec<f64>; 2],
    moments: [Vec<f64>; 2],
}

impl Spline {
    /// Chord-length parameterized cubic spline through the points.
    fn through(points: &[Point2], closed: bool) -> Result<Self> {
        let n = points.len();
        if n < 4 {
            return Err(Error::DegenerateCurve(format!("{n} points, need at least 4")));
        }
        let mut t = vec![0.0; n + usize::from(closed)];
        for i in 1..t.len() {
            let d = seg_len(points[i - 1], points[i % n]);
            if d == 0.0 {
                return Err(Error::DegenerateCurve(format!("points {} and {} coincide", i - 1, i % n)));
            }
            t[i] = t[i - 1] + d;
        }
        let mut coords = [Vec::new(), Vec::new()];
        let mut moments = [Vec::new(), Vec::new()];
        for d in 0..2 {
            let mut y: Vec<f64> = points.iter().map(|p| p[d]).collect();
            moments[d] = spline_moments(&t, &y, closed);
            if closed {
                y.push(y[0]);
                moments[d].push(moments[d][0]);
            }
            coords[d] = y;
        }
        Ok(Self { t, coords, moments })
    }

    fn total(&self) -> f64 {
        *self.t.last().unwrap()
    }

    /// Points at increasing parameters `s`.
    fn sample(&self, s: impl Iterator<Item = f64>) -> Vec<Point2> {
        let mut seg = 0;
        s.map(|s| {
            while seg + 2 < self.t.len() && self.t[seg + 1] < s {
                seg += 1;
            }
            [
                spline_eval(&self.t, &self.coords[0], &self.moments[0], s, seg),
                spline_eval(&self.t, &self.coords[1], &self.moments[1], s, seg),
            ]
        })
        .collect()
    }
}

/// Reinterpolate onto points equally spaced in chord length using cubic
/// splines in each coordinate. Open curves keep their endpoints; closed curves
/// keep their first point.
pub fn resample(points: &[Point2], closed: bool) -> Result<Vec<Point2>> {
    let n = points.len();
    let sp = Spline::through(points, closed)?;
    let total = sp.total();
    let count = if closed { n } else { n - 1 };
    let mut out = sp.sample((0..count).map(|k| total * k as f64 / count as f64));
    if !closed {
        out.push(points[n - 1]);
    }
    Ok(out)
}

/// Zero Fourier modes of a closed curve that sit at roundoff level, which
/// keeps anti-diffusive (outward convex) flows from amplifying noise.
fn krasny_filter(points: &mut [Point2]) {
    let n = points.len();
    let mut buf: Vec<Complex64> = points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let max = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for c in buf.iter_mut() {
        if c.norm() < 1e-12 * max {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    for (p, c) in points.iter_mut().zip(&buf) {
        *p = [c.re / n as f64, c.im / n as f64];
    }
}

/// How far resampling moves the curve: the largest distance from the
/// original points to the spline through the resampled points, relative to
/// the mean segment length.
pub fn resample_shift(c: &LayerCurve) -> Result<f64> {
    let r = resample(&c.points, c.closed)?;
    let sp = Spline::through(&r, c.closed)?;
    let dense_n = 32 * c.segment_count();
    let total = sp.total();
    let end = if c.closed { dense_n } else { dense_n + 1 };
    let dense = sp.sample((0..end).map(|k| total * k as f64 / dense_n as f64));
    let segs = polyline_segments(&dense, c.closed);
    let worst = c
        .points
        .par_iter()
        .map(|p| segs.iter().map(|s| point_segment_distance(*p, s)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max);
    Ok(worst / (c.length() / c.segment_count() as f64))
}
