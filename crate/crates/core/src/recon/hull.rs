//! Convex hull vertices of small point sets.
//!
//! Incremental 3D hull with fallbacks for coplanar and collinear input.
//! Only the vertex set is needed, for the centroid of the enclosing sphere.

use crate::grid::{dist, dist2, dot, norm, sub, Point};

fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn farthest_from(points: &[Point], score: impl Fn(&Point) -> f64) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, score(p)))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// Indices of the convex hull vertices of `points`, sorted ascending.
/// Collinear input yields the two extreme points; coplanar input the
/// polygon hull in its plane.
pub(crate) fn hull_vertices(points: &[Point]) -> Vec<usize> {
    if points.len() <= 2 {
        return (0..points.len()).collect();
    }
    let scale = points.iter().map(norm).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-10 * scale;

    let (i0, _) = farthest_from(points, |p| -p[0]);
    let (i1, d01) = farthest_from(points, |p| dist(p, &points[i0]));
    if d01 <= eps {
        return vec![i0];
    }
    let axis = sub(&points[i1], &points[i0]);
    let line_dist = |p: &Point| norm(&cross(&axis, &sub(p, &points[i0]))) / d01;
    let (i2, d2) = farthest_from(points, line_dist);
    if d2 <= eps {
        let t = |p: &Point| dot(&axis, &sub(p, &points[i0]));
        let (lo, _) = farthest_from(points, |p| -t(p));
        let (hi, _) = farthest_from(points, t);
        let mut v = vec![lo, hi];
        v.sort_unstable();
        return v;
    }
    let normal = cross(&axis, &sub(&points[i2], &points[i0]));
    let nlen = norm(&normal);
    let plane_dist = |p: &Point| dot(&normal, &sub(p, &points[i0])) / nlen;
    let (i3, d3) = farthest_from(points, |p| plane_dist(p).abs());
    if d3.abs() <= eps {
        return planar_hull(points, &points[i0], &axis, &normal);
    }
    spatial_hull(points, [i0, i1, i2, i3], eps)
}

/// Monotone chain on the projection into the plane spanned by `axis` and
/// `normal x axis`.
fn planar_hull(points: &[Point], origin: &Point, axis: &Point, normal: &Point) -> Vec<usize> {
    let e1 = axis;
    let e2 = cross(normal, axis);
    let mut uv: Vec<(f64, f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = sub(p, origin);
            (dot(&d, e1), dot(&d, &e2), i)
        })
        .collect();
    uv.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let turn = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64, usize)> = Vec::with_capacity(2 * uv.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64, usize)>> = if pass == 0 {
            Box::new(uv.iter())
        } else {
            Box::new(uv.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    let mut v: Vec<usize> = hull.into_iter().map(|p| p.2).collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: Point,
    offset: f64,
}

impl Face {
    fn new(points: &[Point], v: [usize; 3]) -> Face {
        let n = cross(&sub(&points[v[1]], &points[v[0]]), &sub(&points[v[2]], &points[v[0]]));
        let len = norm(&n);
        let normal = [n[0] / len, n[1] / len, n[2] / len];
        Face {
            v,
            normal,
            offset: dot(&normal, &points[v[0]]),
        }
    }

    fn height(&self, p: &Point) -> f64 {
        dot(&self.normal, p) - self.offset
    }
}

fn spatial_hull(points: &[Point], seed: [usize; 4], eps: f64) -> Vec<usize> {
    let [a, b, c, d] = seed;
    let inside = [
        (points[a][0] + points[b][0] + points[c][0] + points[d][0]) / 4.0,
        (points[a][1] + points[b][1] + points[c][1] + points[d][1]) / 4.0,
        (points[a][2] + points[b][2] + points[c][2] + points[d][2]) / 4.0,
    ];
    let oriented = |v: [usize; 3]| {
        let f = Face::new(points, v);
        if f.height(&inside) > 0.0 {
            Face::new(points, [v[0], v[2], v[1]])
        } else {
            f
        }
    };
    let mut faces = vec![
        oriented([a, b, c]),
        oriented([a, b, d]),
        oriented([a, c, d]),
        oriented([b, c, d]),
    ];
    for (i, p) in points.iter().enumerate() {
        if seed.contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| f.height(p) > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        // Horizon: directed edges of visible faces whose reverse is not on a
        // visible face.
        let mut visible_edges = std::collections::HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                visible_edges.insert((f.v[k], f.v[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = visible_edges
            .iter()
            .filter(|&&(u, w)| !visible_edges.contains(&(w, u)))
            .copied()
            .collect();
        let mut next: Vec<Face> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| *f)
            .collect();
        for (u, w) in horizon {
            next.push(Face::new(points, [u, w, i]));
        }
        faces = next;
    }
    let mut v: Vec<usize> = faces.iter().flat_map(|f| f.v).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Largest pairwise distance among `points[idx]`.
pub(crate) fn diameter(points: &[Point], idx: &[usize]) -> f64 {
    let mut best = 0.0f64;
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            best = best.max(dist2(&points[i], &points[j]));
        }
    }
    best.sqrt()
}
