//! Flatness of finite point sets: how far a set sticks out of the best
//! affine plane of a given dimension.
//!
//! For a finite set P ⊂ ℝ^d and a plane dimension p < d, the flatness is
//!
//!   inf over affine p-planes Π of max over x ∈ P of dist(x, Π).
//!
//! Points live in plain ℝ^d here (frequency-lattice points never wrap), so
//! no torus domain is involved.
//!
//! Exactness by case:
//! * p = 0: radius of the minimal enclosing ball (Welzl), exact.
//! * p = 1, d = 2: half the minimal width of the convex hull, via rotating
//!   calipers, exact.
//! * p = 1, d = 3: minimum over sampled line directions of the minimal
//!   enclosing disk of the projection onto the orthogonal plane.
//! * p = 2, d = 3: minimum over sampled normals of the half-spread of the
//!   normal projections.
//!
//! The sampled cases scan a Fibonacci sphere lattice
//! (`DIRECTION_SAMPLES` directions) and then refine the best direction by
//! shrinking-step tangent descent. The result is always an upper bound on
//! the true flatness; on the benchmark bodies used in the tests the gap
//! stays below `tol::FLATNESS_SLACK` times the point-set diameter.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directions scanned on the Fibonacci sphere lattice before refinement.
pub const DIRECTION_SAMPLES: usize = 12_000;
/// Shrinking-step sweeps used to polish the best sampled direction.
pub const REFINE_SWEEPS: usize = 32;

pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatnessMethod {
    /// Closed-form or combinatorial solution.
    Exact,
    /// Direction sampling plus local refinement; upper bound.
    Sampled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatnessResult {
    pub value: f64,
    pub method: FlatnessMethod,
    /// Witness direction when one exists: the width normal (p = d-1 cases)
    /// or the best line direction (p = 1, d = 3). None for ball radii.
    pub direction: Option<Point>,
}

/// Flatness of `points` (first `d` coordinates used) relative to affine
/// planes of dimension `plane_dim`.
pub fn flatness(points: &[Point], d: usize, plane_dim: usize) -> Result<FlatnessResult> {
    if !(1..=3).contains(&d) {
        return Err(Error::Geometry(format!("dimension d = {d} must be 1, 2 or 3")));
    }
    if plane_dim >= d {
        return Err(Error::Geometry(format!(
            "plane dimension {plane_dim} must be smaller than d = {d}"
        )));
    }
    if points.is_empty() {
        return Err(Error::Geometry("flatness of an empty point set".into()));
    }
    for p in points {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("flatness input has a non-finite coordinate".into()));
        }
    }
    match (d, plane_dim) {
        (_, 0) => {
            let (_, r) = min_enclosing_ball(points, d)?;
            Ok(FlatnessResult {
                value: r,
                method: FlatnessMethod::Exact,
                direction: None,
            })
        }
        (2, 1) => {
            let (width, normal) = min_width_2d(points);
            Ok(FlatnessResult {
                value: width / 2.0,
                method: FlatnessMethod::Exact,
                direction: Some([normal[0], normal[1], 0.0]),
            })
        }
        (3, 1) => {
            let eval = |u: Point| projected_disk_radius(points, u);
            let (value, dir) = minimize_over_directions(eval);
            Ok(FlatnessResult {
                value,
                method: FlatnessMethod::Sampled,
                direction: Some(dir),
            })
        }
        (3, 2) => {
            let eval = |u: Point| half_spread(points, u);
            let (value, dir) = minimize_over_directions(eval);
            Ok(FlatnessResult {
                value,
                method: FlatnessMethod::Sampled,
                direction: Some(dir),
            })
        }
        _ => unreachable!("plane_dim < d ≤ 3"),
    }
}

/// Diameter of a point set (max pairwise distance); 0 for a single point.
pub fn diameter(points: &[Point], d: usize) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(dist(a, b, d));
        }
    }
    best
}

fn dist(a: &Point, b: &Point, d: usize) -> f64 {
    dist_sq(a, b, d).sqrt()
}

fn dist_sq(a: &Point, b: &Point, d: usize) -> f64 {
    (0..d).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

#[derive(Debug, Clone, Copy)]
struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    const EMPTY: Ball = Ball {
        center: [0.0; 3],
        radius: -1.0,
    };

    fn contains(&self, p: &Point, d: usize) -> bool {
        if self.radius < 0.0 {
            return false;
        }
        let r2 = self.radius * self.radius;
        dist_sq(&self.center, p, d) <= r2 * (1.0 + 1e-10) + 1e-28
    }
}

fn ball_of_one(a: &Point) -> Ball {
    Ball {
        center: *a,
        radius: 0.0,
    }
}

fn ball_of_two(a: &Point, b: &Point, d: usize) -> Ball {
    let mut c = [0.0; 3];
    for i in 0..d {
        c[i] = 0.5 * (a[i] + b[i]);
    }
    Ball {
        center: c,
        radius: dist(a, b, d) / 2.0,
    }
}

/// Ball through the farthest pair of `support`, used when a circumcenter
/// system is numerically singular (nearly affinely dependent support).
fn ball_of_farthest_pair(support: &[Point], d: usize) -> Ball {
    let mut best = ball_of_one(&support[0]);
    for (i, a) in support.iter().enumerate() {
        for b in &support[i + 1..] {
            let cand = ball_of_two(a, b, d);
            if cand.radius > best.radius {
                best = cand;
            }
        }
    }
    best
}

/// Circumball of three points (flat circumcircle in 2D or 3D).
fn ball_of_three(a: &Point, b: &Point, c: &Point, d: usize) -> Ball {
    let mut v1 = [0.0; 3];
    let mut v2 = [0.0; 3];
    for i in 0..d {
        v1[i] = b[i] - a[i];
        v2[i] = c[i] - a[i];
    }
    let dot = |x: &Point, y: &Point| (0..d).map(|i| x[i] * y[i]).sum::<f64>();
    // Solve the 2x2 Gram system for center = a + s v1 + t v2 with
    // (center - a)·v1 = |v1|²/2 and (center - a)·v2 = |v2|²/2.
    let g11 = dot(&v1, &v1);
    let g12 = dot(&v1, &v2);
    let g22 = dot(&v2, &v2);
    let det = g11 * g22 - g12 * g12;
    let scale = g11.max(g22);
    if det <= 1e-12 * scale * scale {
        return ball_of_farthest_pair(&[*a, *b, *c], d);
    }
    let r1 = g11 / 2.0;
    let r2 = g22 / 2.0;
    let s = (r1 * g22 - r2 * g12) / det;
    let t = (g11 * r2 - g12 * r1) / det;
    let mut center = *a;
    for i in 0..d {
        center[i] += s * v1[i] + t * v2[i];
    }
    let radius = [a, b, c]
        .iter()
        .map(|p| dist(&center, p, d))
        .fold(0.0, f64::max);
    Ball { center, radius }
}

/// Circumball of four points in 3D.
fn ball_of_four(a: &Point, b: &Point, c: &Point, e: &Point) -> Ball {
    let rows = [
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]],
        [c[0] - a[0], c[1] - a[1], c[2] - a[2]],
        [e[0] - a[0], e[1] - a[1], e[2] - a[2]],
    ];
    let rhs = [
        0.5 * (rows[0][0] * rows[0][0] + rows[0][1] * rows[0][1] + rows[0][2] * rows[0][2]),
        0.5 * (rows[1][0] * rows[1][0] + rows[1][1] * rows[1][1] + rows[1][2] * rows[1][2]),
        0.5 * (rows[2][0] * rows[2][0] + rows[2][1] * rows[2][1] + rows[2][2] * rows[2][2]),
    ];
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(&rows);
    let scale = rows
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    if det.abs() <= 1e-12 * scale.powi(3).max(1e-300) {
        return ball_of_farthest_pair(&[*a, *b, *c, *e], 3);
    }
    let mut x = [0.0; 3];
    for (k, xi) in x.iter_mut().enumerate() {
        let mut m = rows;
        for i in 0..3 {
            m[i][k] = rhs[i];
        }
        *xi = det3(&m) / det;
    }
    let center = [a[0] + x[0], a[1] + x[1], a[2] + x[2]];
    let radius = [a, b, c, e]
        .iter()
        .map(|p| dist(&center, p, 3))
        .fold(0.0, f64::max);
    Ball { center, radius }
}

fn trivial_ball(support: &[Point], d: usize) -> Ball {
    match support.len() {
        0 => Ball::EMPTY,
        1 => ball_of_one(&support[0]),
        2 => ball_of_two(&support[0], &support[1], d),
        3 => ball_of_three(&support[0], &support[1], &support[2], d),
        4 => ball_of_four(&support[0], &support[1], &support[2], &support[3]),
        _ => unreachable!("support size ≤ d + 1 ≤ 4"),
    }
}

/// Minimal enclosing ball by Welzl's algorithm with a seeded shuffle
/// (deterministic across runs). Exact up to floating-point roundoff.
pub fn min_enclosing_ball(points: &[Point], d: usize) -> Result<(Point, f64)> {
    if points.is_empty() {
        return Err(Error::Geometry("minimal enclosing ball of an empty set".into()));
    }
    if !(1..=3).contains(&d) {
        return Err(Error::Geometry(format!("dimension d = {d} must be 1, 2 or 3")));
    }
    let mut pts: Vec<Point> = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x077e1c3);
    pts.shuffle(&mut rng);
    let b = mb_support(&pts, &mut Vec::new(), d);
    Ok((b.center, b.radius))
}

/// Welzl recursion over the support set; depth is bounded by d + 1.
fn mb_support(pts: &[Point], support: &mut Vec<Point>, d: usize) -> Ball {
    let mut b = trivial_ball(support, d);
    if support.len() == d + 1 {
        return b;
    }
    for i in 0..pts.len() {
        if !b.contains(&pts[i], d) {
            support.push(pts[i]);
            b = mb_support(&pts[..i], support, d);
            support.pop();
        }
    }
    b
}

/// Convex hull in the plane (monotone chain), strictly convex corners only.
/// Returns the hull in counterclockwise order; collinear inputs collapse to
/// their two extreme points.
pub fn convex_hull_2d(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| (a[0], a[1]).partial_cmp(&(b[0], b[1])).unwrap());
    pts.dedup_by(|a, b| a[0] == b[0] && a[1] == b[1]);
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let cross = |o: &Point, a: &Point, b: &Point| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Minimal width of a planar point set and the achieving unit normal,
/// by rotating calipers over the convex hull. Exact.
pub fn min_width_2d(points: &[Point]) -> (f64, [f64; 2]) {
    let hull = convex_hull_2d(points);
    let m = hull.len();
    if m <= 2 {
        // 0, 1 or 2 hull points: everything lies on one line.
        if m == 2 {
            let e = [hull[1][0] - hull[0][0], hull[1][1] - hull[0][1]];
            let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
            if len > 0.0 {
                return (0.0, [-e[1] / len, e[0] / len]);
            }
        }
        return (0.0, [0.0, 1.0]);
    }
    let area2 = |a: &Point, b: &Point, c: &Point| {
        ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs()
    };
    let mut best = f64::INFINITY;
    let mut best_normal = [0.0, 1.0];
    let mut j = 1;
    for i in 0..m {
        let a = &hull[i];
        let b = &hull[(i + 1) % m];
        // Walk the antipodal point: the distance to edge (a, b) is unimodal
        // along the hull.
        while area2(a, b, &hull[(j + 1) % m]) > area2(a, b, &hull[j]) {
            j = (j + 1) % m;
        }
        let e = [b[0] - a[0], b[1] - a[1]];
        let elen = (e[0] * e[0] + e[1] * e[1]).sqrt();
        if elen == 0.0 {
            continue;
        }
        let w = area2(a, b, &hull[j]) / elen;
        if w < best {
            best = w;
            best_normal = [-e[1] / elen, e[0] / elen];
        }
    }
    (best, best_normal)
}

/// Unit directions from a Fibonacci sphere lattice.
pub fn fibonacci_directions(m: usize) -> Vec<Point> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..m)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Half of max⟨x,u⟩ - min⟨x,u⟩ over the point set.
fn half_spread(points: &[Point], u: Point) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        let v = p[0] * u[0] + p[1] * u[1] + p[2] * u[2];
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (hi - lo) / 2.0
}

/// Radius of the minimal enclosing disk of the projections onto the plane
/// orthogonal to the line direction `u`.
fn projected_disk_radius(points: &[Point], u: Point) -> f64 {
    let (t1, t2) = tangent_basis(u);
    let projected: Vec<Point> = points
        .iter()
        .map(|p| {
            let a = p[0] * t1[0] + p[1] * t1[1] + p[2] * t1[2];
            let b = p[0] * t2[0] + p[1] * t2[1] + p[2] * t2[2];
            [a, b, 0.0]
        })
        .collect();
    min_enclosing_ball(&projected, 2)
        .map(|(_, r)| r)
        .unwrap_or(f64::INFINITY)
}

fn tangent_basis(u: Point) -> (Point, Point) {
    let pick = if u[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut t1 = cross(u, pick);
    let n1 = norm(t1);
    for v in t1.iter_mut() {
        *v /= n1;
    }
    let t2 = cross(u, t1);
    (t1, t2)
}

fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn normalize(a: Point) -> Point {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Scan the Fibonacci lattice, then polish the best direction with
/// shrinking tangent steps.
fn minimize_over_directions<F: FnMut(Point) -> f64>(mut eval: F) -> (f64, Point) {
    let mut best_u = [0.0, 0.0, 1.0];
    let mut best = f64::INFINITY;
    for u in fibonacci_directions(DIRECTION_SAMPLES) {
        let v = eval(u);
        if v < best {
            best = v;
            best_u = u;
        }
    }
    let mut step = 0.04;
    for _ in 0..REFINE_SWEEPS {
        let (t1, t2) = tangent_basis(best_u);
        let mut improved = false;
        for dir in [t1, t2] {
            for sign in [1.0, -1.0] {
                let cand = normalize([
                    best_u[0] + sign * step * dir[0],
                    best_u[1] + sign * step * dir[1],
                    best_u[2] + sign * step * dir[2],
                ]);
                let v = eval(cand);
                if v < best {
                    best = v;
                    best_u = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.6;
        }
    }
    (best, best_u)
}
