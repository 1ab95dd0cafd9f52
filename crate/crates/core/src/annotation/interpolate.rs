//! Keyframe interpolation.
//!
//! Boxes, points and segments interpolate component-wise. Polygons and
//! polylines with equal vertex counts interpolate vertex by vertex in the
//! order the annotator drew them. When the counts differ, the shape with
//! fewer vertices is resampled along its outline to the larger count:
//!
//! * its original vertices are kept, so the resampled outline is the same
//!   curve;
//! * for polygons the resampled contour starts at the boundary point
//!   nearest to the other shape's first vertex (cyclic alignment);
//! * the missing points are spread over the edges in proportion to edge
//!   length (largest-remainder rounding), evenly spaced within an edge.
//!
//! The anchor rule is what makes cutting an annotation lossless: a point on
//! the segment between `p` and its nearest boundary point `q` still has `q`
//! as its nearest boundary point, so re-running the correspondence between
//! an interpolated shape and the original keyframe reproduces the same
//! vertex pairing.

use super::geometry::{lerp, Point2, ShapeGeometry};

/// Snap distance (in parameter units along an edge) for treating an anchor
/// as lying on a vertex.
const VERTEX_SNAP: f64 = 1e-12;

/// Interpolate between two keyframe shapes of the same kind at `t` in `[0, 1]`.
///
/// Returns `None` when the kinds differ.
pub fn lerp_shapes(from: &ShapeGeometry, to: &ShapeGeometry, t: f64) -> Option<ShapeGeometry> {
    use ShapeGeometry::*;
    let shape = match (from, to) {
        (
            BoundingBox { x_min: a0, y_min: a1, x_max: a2, y_max: a3 },
            BoundingBox { x_min: b0, y_min: b1, x_max: b2, y_max: b3 },
        ) => ShapeGeometry::bbox(lerp(*a0, *b0, t), lerp(*a1, *b1, t), lerp(*a2, *b2, t), lerp(*a3, *b3, t)),
        (Point(a), Point(b)) => Point(a.lerp(*b, t)),
        (Segment(a0, a1), Segment(b0, b1)) => Segment(a0.lerp(*b0, t), a1.lerp(*b1, t)),
        (Polygon(a), Polygon(b)) => Polygon(lerp_contours(a, b, t, true)),
        (Polyline(a), Polyline(b)) => Polyline(lerp_contours(a, b, t, false)),
        _ => return None,
    };
    Some(shape)
}

fn lerp_contours(a: &[Point2], b: &[Point2], t: f64, closed: bool) -> Vec<Point2> {
    let (a, b) = corresponding_vertices(a, b, closed);
    a.iter().zip(b.iter()).map(|(p, q)| p.lerp(*q, t)).collect()
}

/// Bring two outlines to a common vertex count with a one-to-one vertex pairing.
pub fn corresponding_vertices(a: &[Point2], b: &[Point2], closed: bool) -> (Vec<Point2>, Vec<Point2>) {
    use std::cmp::Ordering;
    match a.len().cmp(&b.len()) {
        Ordering::Equal => (a.to_vec(), b.to_vec()),
        Ordering::Greater => (a.to_vec(), resample(b, a.len(), closed.then(|| a[0]))),
        Ordering::Less => (resample(a, b.len(), closed.then(|| b[0])), b.to_vec()),
    }
}

/// Resample `outline` to exactly `target` points, keeping its vertices.
///
/// For a closed outline, `anchor_towards` selects the starting point: the
/// boundary point nearest to it. Open outlines always start at their first
/// vertex.
pub fn resample(outline: &[Point2], target: usize, anchor_towards: Option<Point2>) -> Vec<Point2> {
    let base: Vec<Point2> = match anchor_towards {
        Some(p) => anchored_cycle(outline, p),
        None => outline.to_vec(),
    };
    let closed = anchor_towards.is_some();
    if base.len() >= target || base.is_empty() {
        return base;
    }
    let edge_count = if closed { base.len() } else { base.len() - 1 };
    if edge_count == 0 {
        return vec![base[0]; target];
    }
    let lengths: Vec<f64> = (0..edge_count)
        .map(|i| base[i].distance(base[(i + 1) % base.len()]))
        .collect();
    let extras = allocate(target - base.len(), &lengths);

    let mut out = Vec::with_capacity(target);
    for (i, &start) in base.iter().enumerate() {
        out.push(start);
        if i < edge_count {
            let end = base[(i + 1) % base.len()];
            let k = extras[i];
            for j in 1..=k {
                out.push(start.lerp(end, j as f64 / (k + 1) as f64));
            }
        }
    }
    out
}

/// Rotate a closed outline so it starts at the boundary point nearest `p`,
/// inserting that point when it falls inside an edge.
fn anchored_cycle(outline: &[Point2], p: Point2) -> Vec<Point2> {
    let n = outline.len();
    let mut best = (f64::INFINITY, 0usize, 0.0f64);
    for i in 0..n {
        let (u, q) = project_on_segment(p, outline[i], outline[(i + 1) % n]);
        let d = p.distance(q);
        if d < best.0 {
            best = (d, i, u);
        }
    }
    let (_, edge, u) = best;
    let rotated = |start: usize| -> Vec<Point2> { (0..n).map(|k| outline[(start + k) % n]).collect() };
    if u <= VERTEX_SNAP {
        rotated(edge)
    } else if u >= 1.0 - VERTEX_SNAP {
        rotated((edge + 1) % n)
    } else {
        let anchor = outline[edge].lerp(outline[(edge + 1) % n], u);
        let mut cycle = Vec::with_capacity(n + 1);
        cycle.push(anchor);
        cycle.extend(rotated((edge + 1) % n));
        cycle
    }
}

/// Parameter `u` in `[0,1]` and point of the projection of `p` on segment `ab`.
fn project_on_segment(p: Point2, a: Point2, b: Point2) -> (f64, Point2) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return (0.0, a);
    }
    let u = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    (u, a.lerp(b, u))
}

/// Split `extra` points over edges proportionally to `lengths`, largest
/// remainder first, ties to the lower edge index.
fn allocate(extra: usize, lengths: &[f64]) -> Vec<usize> {
    let total: f64 = lengths.iter().sum();
    if total <= 0.0 {
        let mut counts = vec![0; lengths.len()];
        counts[0] = extra;
        return counts;
    }
    let quotas: Vec<f64> = lengths.iter().map(|l| extra as f64 * l / total).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = quotas[i] - quotas[i].floor();
        let rj = quotas[j] - quotas[j].floor();
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for &i in order.iter().cycle().take(extra.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}
