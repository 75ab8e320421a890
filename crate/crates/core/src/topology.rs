//! Defect lines, Burgers circuits and smeared defect densities.
//!
//! Circulations follow the circuit's traversal order, and
//! [`Circuit::orientation`] states its handedness about the declared axis.
//! With `curl grad u = m` and `m = n a t`, a right-handed circuit about the
//! line tangent returns `n a = -b`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{cross3, dot3, norm3, GridSpec, VectorField3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectKind {
    Edge,
    Screw,
}

impl DefectKind {
    /// Grid axis the line runs along: `y` for edges, `z` for screws.
    pub fn axis(self) -> usize {
        match self {
            DefectKind::Edge => 1,
            DefectKind::Screw => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectLine {
    pub kind: DefectKind,
    /// Winding index; the Burgers vector is `b = -n a`.
    pub n: i64,
    pub anchor: [f64; 3],
    pub direction: [f64; 3],
}

impl DefectLine {
    /// Line through `anchor` along `+y` (edge) or `+z` (screw).
    pub fn new(kind: DefectKind, n: i64, anchor: [f64; 3]) -> Result<Self> {
        let mut direction = [0.0; 3];
        direction[kind.axis()] = 1.0;
        let d = Self {
            kind,
            n,
            anchor,
            direction,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "a defect line needs a nonzero winding"));
        }
        if (norm3(self.direction) - 1.0).abs() > 1e-12 {
            return Err(invalid("direction", "must be a unit vector"));
        }
        if self.anchor.iter().any(|v| !v.is_finite()) {
            return Err(invalid("anchor", "must be finite"));
        }
        if self.axis_sign().is_none() {
            return Err(Error::UnsupportedGeometry(format!(
                "{:?} line must run along the {} axis, got direction {:?}",
                self.kind,
                ["x", "y", "z"][self.kind.axis()],
                self.direction
            )));
        }
        Ok(())
    }

    /// `+1` or `-1` when the direction is parallel to the kind's axis.
    pub fn axis_sign(&self) -> Option<f64> {
        let ax = self.kind.axis();
        let c = self.direction[ax];
        let off: f64 = (0..3).filter(|&i| i != ax).map(|i| self.direction[i].abs()).sum();
        (off < 1e-12 && (c.abs() - 1.0).abs() < 1e-12).then(|| c.signum())
    }

    pub fn burgers(&self, a: f64) -> f64 {
        -(self.n as f64) * a
    }
}

/// Closed planar polygon with a declared reference axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    /// First vertex repeated at the end.
    pub vertices: Vec<[f64; 3]>,
    pub axis: [f64; 3],
}

impl Circuit {
    pub fn new(vertices: Vec<[f64; 3]>, axis: [f64; 3]) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::InvalidCircuit("need at least three distinct vertices".into()));
        }
        let first = vertices[0];
        let last = vertices[vertices.len() - 1];
        let scale = vertices.iter().map(|v| norm3(*v)).fold(1.0, f64::max);
        if norm3(sub(first, last)) > 1e-12 * scale {
            return Err(Error::InvalidCircuit("first and last vertices differ".into()));
        }
        if norm3(axis) == 0.0 {
            return Err(Error::InvalidCircuit("reference axis is zero".into()));
        }
        let c = Self { vertices, axis };
        let normal = c.area_vector();
        let area = norm3(normal);
        if area == 0.0 {
            return Err(Error::InvalidCircuit("polygon encloses no area".into()));
        }
        let unit = normal.map(|v| v / area);
        let base = dot3(unit, first);
        for v in &c.vertices {
            let off = (dot3(unit, *v) - base).abs();
            if off > 1e-9 {
                return Err(Error::InvalidCircuit(format!("vertex {v:?} is {off:e} off the circuit plane")));
            }
        }
        Ok(c)
    }

    /// Regular polygon approximating a circle, right-handed about `axis`.
    pub fn circle(centre: [f64; 3], radius: f64, axis: [f64; 3], n_vertices: usize) -> Result<Self> {
        if !(radius > 0.0) || n_vertices < 3 {
            return Err(Error::InvalidCircuit("circle needs a positive radius and three vertices".into()));
        }
        let (e1, e2) = frame(axis)?;
        let mut vertices: Vec<[f64; 3]> = (0..n_vertices)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n_vertices as f64;
                let (s, c) = t.sin_cos();
                [0, 1, 2].map(|k| centre[k] + radius * (c * e1[k] + s * e2[k]))
            })
            .collect();
        vertices.push(vertices[0]);
        Self::new(vertices, axis)
    }

    /// Closed polygon through `corners` in the given order.
    pub fn polygon(corners: &[[f64; 3]], axis: [f64; 3]) -> Result<Self> {
        let mut vertices = corners.to_vec();
        if let Some(&f) = corners.first() {
            vertices.push(f);
        }
        Self::new(vertices, axis)
    }

    /// Reversed traversal.
    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self {
            vertices: v,
            axis: self.axis,
        }
    }

    /// Newell area vector; its direction is the right-hand normal of the traversal.
    pub fn area_vector(&self) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for w in self.vertices.windows(2) {
            let c = cross3(w[0], w[1]);
            for k in 0..3 {
                acc[k] += 0.5 * c[k];
            }
        }
        acc
    }

    /// `+1` when the traversal is right-handed about the declared axis.
    pub fn orientation(&self) -> f64 {
        dot3(self.area_vector(), self.axis).signum()
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Orthonormal `(e1, e2)` with `e1 x e2` along `axis`.
fn frame(axis: [f64; 3]) -> Result<([f64; 3], [f64; 3])> {
    let n = norm3(axis);
    if n == 0.0 {
        return Err(Error::InvalidCircuit("reference axis is zero".into()));
    }
    let t = axis.map(|v| v / n);
    let seed = if t[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let mut e1 = cross3(seed, t);
    let l = norm3(e1);
    e1 = e1.map(|v| v / l);
    let e2 = cross3(t, e1);
    Ok((e1, e2))
}

/// Something that yields `grad u` at a point.
pub trait GradientSource {
    fn gradient_at(&self, p: [f64; 3]) -> Result<[f64; 3]>;
}

/// Closed-form gradient evaluated exactly at the quadrature nodes.
pub struct Analytic<F>(pub F);

impl<F> GradientSource for Analytic<F>
where
    F: Fn([f64; 3]) -> Result<[f64; 3]>,
{
    fn gradient_at(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        (self.0)(p)
    }
}

/// Trilinear interpolation; every node within two spacings of `p` must be
/// inside the grid and unmasked.
impl GradientSource for VectorField3 {
    fn gradient_at(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        let g = &self.grid;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for ax in 0..3 {
            let t = (p[ax] - g.origin[ax]) / g.spacing[ax];
            let n = g.extents[ax];
            if !(t >= 0.0 && t <= (n - 1) as f64) {
                return Err(Error::CircuitIntersectsMask { point: p });
            }
            let i = (t.floor() as usize).min(n - 2);
            base[ax] = i;
            frac[ax] = t - i as f64;
        }
        let lo = |ax: usize| {
            let t = (p[ax] - g.origin[ax]) / g.spacing[ax];
            (t - 2.0).ceil().max(0.0) as usize
        };
        let hi = |ax: usize| {
            let t = (p[ax] - g.origin[ax]) / g.spacing[ax];
            ((t + 2.0).floor() as usize).min(g.extents[ax] - 1)
        };
        for k in lo(2)..=hi(2) {
            for j in lo(1)..=hi(1) {
                for i in lo(0)..=hi(0) {
                    if self.mask[g.index(i, j, k)] {
                        return Err(Error::CircuitIntersectsMask { point: p });
                    }
                }
            }
        }
        let mut out = [0.0; 3];
        for dk in 0..2 {
            for dj in 0..2 {
                for di in 0..2 {
                    let w = (if di == 1 { frac[0] } else { 1.0 - frac[0] })
                        * (if dj == 1 { frac[1] } else { 1.0 - frac[1] })
                        * (if dk == 1 { frac[2] } else { 1.0 - frac[2] });
                    if w == 0.0 {
                        continue;
                    }
                    let v = self.values[g.index(base[0] + di, base[1] + dj, base[2] + dk)];
                    for c in 0..3 {
                        out[c] += w * v[c];
                    }
                }
            }
        }
        Ok(out)
    }
}

pub const DEFAULT_NODES_PER_SEGMENT: usize = 1024;

/// `oint grad u . dl` along the circuit's traversal order by the composite
/// trapezoid rule. Segments are integrated in a canonical direction and
/// summed in a canonical order, so reversing a circuit negates the result
/// exactly.
pub fn burgers_circuit<S: GradientSource + ?Sized>(src: &S, c: &Circuit) -> Result<f64> {
    burgers_circuit_with(src, c, DEFAULT_NODES_PER_SEGMENT)
}

pub fn burgers_circuit_with<S: GradientSource + ?Sized>(src: &S, c: &Circuit, nodes_per_segment: usize) -> Result<f64> {
    if nodes_per_segment < 2 {
        return Err(invalid("nodes_per_segment", "at least two nodes per segment"));
    }
    let m = nodes_per_segment - 1;
    let mut parts: Vec<([f64; 6], f64)> = Vec::with_capacity(c.vertices.len());
    for w in c.vertices.windows(2) {
        let forward = lex_less(w[0], w[1]);
        let (p0, p1) = if forward { (w[0], w[1]) } else { (w[1], w[0]) };
        let d = sub(p1, p0);
        if norm3(d) == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for i in 0..=m {
            let t = i as f64 / m as f64;
            let p = [0, 1, 2].map(|k| p0[k] + t * d[k]);
            let g = src.gradient_at(p)?;
            let weight = if i == 0 || i == m { 0.5 } else { 1.0 };
            acc += weight * dot3(g, d);
        }
        let key = [p0[0], p0[1], p0[2], p1[0], p1[1], p1[2]];
        parts.push((key, if forward { acc } else { -acc } / m as f64));
    }
    parts.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals: Vec<f64> = parts.into_iter().map(|(_, v)| v).collect();
    Ok(crate::grid::pairwise_sum(&vals))
}

fn lex_less(a: [f64; 3], b: [f64; 3]) -> bool {
    for k in 0..3 {
        if a[k] != b[k] {
            return a[k] < b[k];
        }
    }
    true
}

/// Gaussian-smeared line density `m = n a t`, with minimum-image distances
/// in the periodic box of `grid`.
pub fn density_field(defects: &[DefectLine], grid: &GridSpec, smearing: f64, a: f64) -> Result<VectorField3> {
    grid.validate()?;
    if !(smearing >= grid.min_spacing()) {
        return Err(invalid("smearing", "must be at least the grid spacing"));
    }
    if !(a > 0.0) {
        return Err(invalid("a", "layer spacing must be positive"));
    }
    let mut lines = Vec::with_capacity(defects.len());
    for d in defects {
        d.validate()?;
        let sign = d.axis_sign().ok_or_else(|| Error::UnsupportedGeometry("line not along a grid axis".into()))?;
        lines.push((d.kind.axis(), sign * d.n as f64 * a, d.anchor));
    }
    let box_len = grid.box_lengths();
    let norm = 1.0 / (2.0 * PI * smearing * smearing);
    VectorField3::from_fn(*grid, |p| {
        let mut m = [0.0; 3];
        for &(ax, strength, anchor) in &lines {
            let mut r2 = 0.0;
            for k in (0..3).filter(|&k| k != ax) {
                let mut d = p[k] - anchor[k];
                d -= box_len[k] * (d / box_len[k]).round();
                r2 += d * d;
            }
            m[ax] += strength * norm * (-0.5 * r2 / (smearing * smearing)).exp();
        }
        m
    })
}

/// Flux of component `axis` through the grid plane with index `plane`.
pub fn plane_flux(field: &VectorField3, axis: usize, plane: usize) -> Result<f64> {
    let g = &field.grid;
    if plane >= g.extents[axis] {
        return Err(invalid("plane", "index outside the grid"));
    }
    let area: f64 = (0..3).filter(|&k| k != axis).map(|k| g.spacing[k]).product();
    let mut vals = Vec::new();
    for idx in 0..g.len() {
        if g.ijk(idx)[axis] == plane && !field.mask[idx] {
            vals.push(field.values[idx][axis]);
        }
    }
    Ok(crate::grid::pairwise_sum(&vals) * area)
}
