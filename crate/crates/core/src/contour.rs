//! Marching squares on a constant-`y` slice and Hausdorff distances between
//! polylines in the `(x, z)` plane.

use crate::error::{invalid, Error, Result};
use crate::grid::ScalarField3;

pub type Point2 = [f64; 2];
pub type Segment = (Point2, Point2);

/// Segments of the level set `phi = level` on the slice `j` (x horizontal,
/// z vertical). Cells with a masked corner are skipped; saddle cells are
/// resolved with the cell-centre average.
pub fn level_segments(phi: &ScalarField3, j: usize, level: f64) -> Result<Vec<Segment>> {
    let g = &phi.grid;
    if j >= g.extents[1] {
        return Err(invalid("j", "slice index outside the grid"));
    }
    let (nx, nz) = (g.extents[0], g.extents[2]);
    let mut out = Vec::new();
    for k in 0..nz - 1 {
        for i in 0..nx - 1 {
            let idx = [g.index(i, j, k), g.index(i + 1, j, k), g.index(i + 1, j, k + 1), g.index(i, j, k + 1)];
            if idx.iter().any(|&c| phi.mask[c]) {
                continue;
            }
            let v = idx.map(|c| phi.values[c] - level);
            let p0 = g.point([i, j, k]);
            let (hx, hz) = (g.spacing[0], g.spacing[2]);
            let corners: [Point2; 4] = [
                [p0[0], p0[2]],
                [p0[0] + hx, p0[2]],
                [p0[0] + hx, p0[2] + hz],
                [p0[0], p0[2] + hz],
            ];
            let mut case = 0;
            for (b, val) in v.iter().enumerate() {
                if *val > 0.0 {
                    case |= 1 << b;
                }
            }
            if case == 0 || case == 15 {
                continue;
            }
            let edge = |e: usize| -> Point2 {
                let (a, b) = (e, (e + 1) % 4);
                let t = v[a] / (v[a] - v[b]);
                [
                    corners[a][0] + t * (corners[b][0] - corners[a][0]),
                    corners[a][1] + t * (corners[b][1] - corners[a][1]),
                ]
            };
            // Edges: 0 bottom, 1 right, 2 top, 3 left.
            let crossing: Vec<usize> = (0..4).filter(|&e| (v[e] > 0.0) != (v[(e + 1) % 4] > 0.0)).collect();
            if crossing.len() == 2 {
                out.push((edge(crossing[0]), edge(crossing[1])));
            } else {
                let centre = 0.25 * v.iter().sum::<f64>();
                // Four crossings; pair them so the centre's side is connected.
                let pairs = if (centre > 0.0) == (v[0] > 0.0) { [(0, 1), (2, 3)] } else { [(3, 0), (1, 2)] };
                for (a, b) in pairs {
                    out.push((edge(a), edge(b)));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::ContourAbsent { level });
    }
    Ok(out)
}

pub fn point_segment_distance(p: Point2, s: &Segment) -> f64 {
    let (a, b) = *s;
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Segments joining consecutive points (and closing the loop when asked).
pub fn polyline_segments(points: &[Point2], closed: bool) -> Vec<Segment> {
    let mut segs: Vec<Segment> = points.windows(2).map(|w| (w[0], w[1])).collect();
    if closed && points.len() > 2 {
        segs.push((points[points.len() - 1], points[0]));
    }
    segs
}

fn directed(a: &[Segment], b: &[Segment]) -> f64 {
    let mut worst: f64 = 0.0;
    for s in a {
        for p in [s.0, s.1] {
            let d = b.iter().map(|t| point_segment_distance(p, t)).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    worst
}

/// Symmetric Hausdorff distance between two segment sets, measured at the
/// segment endpoints.
pub fn hausdorff(a: &[Segment], b: &[Segment]) -> f64 {
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn flat_level_is_exact() {
        let g = GridSpec::new([-1.0, 0.0, -1.0], [21, 4, 21], [0.1, 0.1, 0.1]).unwrap();
        let phi = ScalarField3::from_fn(g, |p| p[2]).unwrap();
        let segs = level_segments(&phi, 0, 0.25).unwrap();
        assert!(segs.iter().all(|s| (s.0[1] - 0.25).abs() < 1e-12 && (s.1[1] - 0.25).abs() < 1e-12));
        assert!(matches!(level_segments(&phi, 0, 5.0), Err(Error::ContourAbsent { .. })));
    }

    #[test]
    fn circle_contour_close_to_radius() {
        let g = GridSpec::new([-2.0, 0.0, -2.0], [81, 4, 81], [0.05, 0.05, 0.05]).unwrap();
        let phi = ScalarField3::from_fn(g, |p| p[0].hypot(p[2])).unwrap();
        let segs = level_segments(&phi, 1, 1.3).unwrap();
        for s in &segs {
            assert!((s.0[0].hypot(s.0[1]) - 1.3).abs() < 1e-3);
        }
    }

    #[test]
    fn hausdorff_of_shifted_lines() {
        let a: Vec<Point2> = (0..11).map(|i| [i as f64 * 0.1, 0.0]).collect();
        let b: Vec<Point2> = (0..11).map(|i| [i as f64 * 0.1, 0.5]).collect();
        let d = hausdorff(&polyline_segments(&a, false), &polyline_segments(&b, false));
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(hausdorff(&polyline_segments(&a, false), &polyline_segments(&a, false)), 0.0);
    }
}
