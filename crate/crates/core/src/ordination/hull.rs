//! Planar convex hulls and an overlap test for convex polygons.

use crate::scalar::Scalar;

fn cross<T: Scalar>(o: (T, T), a: (T, T), b: (T, T)) -> T {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Indices of the hull vertices in counter-clockwise order, starting from the
/// lowest-x (then lowest-y) point. Collinear boundary points are omitted.
pub fn convex_hull<T: Scalar>(points: &[(T, T)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (points[a], points[b]);
        pa.0.partial_cmp(&pb.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(pa.1.partial_cmp(&pb.1).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.cmp(&b))
    });
    order.dedup_by(|a, b| points[*a] == points[*b]);
    if order.len() < 3 {
        return order;
    }

    let mut lower: Vec<usize> = Vec::new();
    for &i in &order {
        while lower.len() >= 2 && cross(points[lower[lower.len() - 2]], points[lower[lower.len() - 1]], points[i]) <= T::zero() {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in order.iter().rev() {
        while upper.len() >= 2 && cross(points[upper[upper.len() - 2]], points[upper[upper.len() - 1]], points[i]) <= T::zero() {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn axes<T: Scalar>(poly: &[(T, T)], out: &mut Vec<(T, T)>) {
    let n = poly.len();
    if n < 2 {
        return;
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let edge = (b.0 - a.0, b.1 - a.1);
        out.push((-edge.1, edge.0));
        if n == 2 {
            out.push(edge);
            break;
        }
    }
}

fn project<T: Scalar>(poly: &[(T, T)], axis: (T, T)) -> (T, T) {
    poly.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| {
        let d = p.0 * axis.0 + p.1 * axis.1;
        (lo.min(d), hi.max(d))
    })
}

/// Whether two convex polygons (vertex lists, possibly degenerate points or
/// segments) intersect. Touching counts as overlapping.
pub fn convex_polygons_overlap<T: Scalar>(a: &[(T, T)], b: &[(T, T)]) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    let mut candidate_axes = Vec::new();
    axes(a, &mut candidate_axes);
    axes(b, &mut candidate_axes);
    if candidate_axes.is_empty() {
        return a[0] == b[0];
    }
    for axis in candidate_axes {
        if axis.0 == T::zero() && axis.1 == T::zero() {
            continue;
        }
        let (alo, ahi) = project(a, axis);
        let (blo, bhi) = project(b, axis);
        if ahi < blo || bhi < alo {
            return false;
        }
    }
    true
}
