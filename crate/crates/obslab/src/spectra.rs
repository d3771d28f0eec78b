//! Regions on the frequency lattice and their coefficient masks.
//!
//! Frequencies are indexed by integer vectors m ∈ {-N/2, …, N/2-1}^d; all
//! region geometry below works in these lattice units (the physical
//! frequency is ξ = (2π/L)·m). A `SpectralRegion` selects lattice points
//! by distance to a model set:
//!
//! * `Ball`: |m| ≤ r.
//! * `Annulus`: R - β ≤ |m| ≤ R + β.
//! * `Strip`: |⟨m, θ⟩ - c| ≤ β for a unit direction θ.
//! * `Shell`: dist(m, M) ≤ β for a curved model manifold M (circle,
//!   ellipse, sphere, or a closed spline through control points).
//!
//! Masks are closed sets (boundary lattice points count as inside).
//! Regions with a bounded reach must fit inside the symmetric usable band
//! |m_a| ≤ N/2 - 1; a region poking past it raises `NyquistExceeded`
//! naming the violated bound. Strips extend across the whole lattice and
//! are clipped by it, so only emptiness can fail for them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::flatness::{flatness, FlatnessResult, Point};
use crate::lattice::{Mask, TorusGrid};
use crate::tol;

/// Curved model manifolds for shell regions, in lattice units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldSpec {
    /// Circle of the given radius around the origin (d = 2).
    Circle { radius: f64 },
    /// Axis-aligned ellipse x²/a² + y²/b² = 1 (d = 2).
    Ellipse { a: f64, b: f64 },
    /// Sphere of the given radius around the origin (d = 3).
    Sphere { radius: f64 },
    /// Closed spline (uniform Catmull-Rom) through control points (d = 2).
    ClosedSpline { points: Vec<Vec<f64>> },
}

impl ManifoldSpec {
    fn dim(&self) -> usize {
        match self {
            ManifoldSpec::Sphere { .. } => 3,
            _ => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = |v: f64, what: &str| -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Geometry(format!("{what} {v} must be positive")));
            }
            Ok(())
        };
        match self {
            ManifoldSpec::Circle { radius } | ManifoldSpec::Sphere { radius } => {
                pos(*radius, "manifold radius")
            }
            ManifoldSpec::Ellipse { a, b } => {
                pos(*a, "ellipse semi-axis a")?;
                pos(*b, "ellipse semi-axis b")
            }
            ManifoldSpec::ClosedSpline { points } => {
                if points.len() < 3 {
                    return Err(Error::Geometry(
                        "closed spline needs at least 3 control points".into(),
                    ));
                }
                for p in points {
                    if p.len() != 2 || p.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Geometry(
                            "spline control points must be finite 2D coordinates".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Largest |m| the manifold itself reaches.
    fn outer_radius(&self) -> f64 {
        match self {
            ManifoldSpec::Circle { radius } | ManifoldSpec::Sphere { radius } => *radius,
            ManifoldSpec::Ellipse { a, b } => a.max(*b),
            ManifoldSpec::ClosedSpline { points } => points
                .iter()
                .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
                .fold(0.0, f64::max),
        }
    }
}

/// A region of the frequency lattice, in lattice units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralRegion {
    /// |m| ≤ radius.
    Ball { radius: f64 },
    /// R - beta ≤ |m| ≤ R + beta.
    Annulus { radius: f64, beta: f64 },
    /// |⟨m, direction⟩ - offset| ≤ beta; `direction` need not be unit, it
    /// is normalized on use.
    Strip {
        direction: Vec<f64>,
        offset: f64,
        beta: f64,
    },
    /// dist(m, manifold) ≤ beta.
    Shell { manifold: ManifoldSpec, beta: f64 },
}

impl SpectralRegion {
    pub fn validate(&self, d: usize) -> Result<()> {
        let beta_ok = |b: f64| -> Result<()> {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::Geometry(format!("region half-width {b} must be positive")));
            }
            Ok(())
        };
        match self {
            SpectralRegion::Ball { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Geometry(format!("ball radius {radius} must be positive")));
                }
                Ok(())
            }
            SpectralRegion::Annulus { radius, beta } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Geometry(format!(
                        "annulus radius {radius} must be positive"
                    )));
                }
                beta_ok(*beta)
            }
            SpectralRegion::Strip {
                direction,
                offset,
                beta,
            } => {
                if direction.len() != d {
                    return Err(Error::Geometry(format!(
                        "strip direction has {} components, lattice dimension is {d}",
                        direction.len()
                    )));
                }
                let n: f64 = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(n.is_finite() && n > 1e-12) {
                    return Err(Error::Geometry("strip direction must be nonzero".into()));
                }
                if !offset.is_finite() {
                    return Err(Error::Geometry("strip offset must be finite".into()));
                }
                beta_ok(*beta)
            }
            SpectralRegion::Shell { manifold, beta } => {
                if manifold.dim() != d {
                    return Err(Error::Geometry(format!(
                        "manifold lives in dimension {}, lattice dimension is {d}",
                        manifold.dim()
                    )));
                }
                manifold.validate()?;
                beta_ok(*beta)
            }
        }
    }

    /// Largest |m| the region can reach, or None when the lattice clips it
    /// (strips run across the whole lattice).
    pub fn outer_reach(&self) -> Option<f64> {
        match self {
            SpectralRegion::Ball { radius } => Some(*radius),
            SpectralRegion::Annulus { radius, beta } => Some(radius + beta),
            SpectralRegion::Strip { .. } => None,
            SpectralRegion::Shell { manifold, beta } => Some(manifold.outer_radius() + beta),
        }
    }

    /// Membership of the integer lattice point m (first d entries used).
    pub fn contains(&self, m: &[i64; 3], d: usize) -> bool {
        let mf = [m[0] as f64, m[1] as f64, m[2] as f64];
        let norm = (0..d).map(|a| mf[a] * mf[a]).sum::<f64>().sqrt();
        match self {
            SpectralRegion::Ball { radius } => norm <= *radius,
            SpectralRegion::Annulus { radius, beta } => (norm - radius).abs() <= *beta,
            SpectralRegion::Strip {
                direction,
                offset,
                beta,
            } => {
                let n: f64 = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
                let t: f64 = (0..d).map(|a| direction[a] * mf[a]).sum::<f64>() / n;
                (t - offset).abs() <= *beta
            }
            SpectralRegion::Shell { manifold, beta } => match manifold {
                ManifoldSpec::Circle { radius } | ManifoldSpec::Sphere { radius } => {
                    (norm - radius).abs() <= *beta
                }
                ManifoldSpec::Ellipse { a, b } => ellipse_distance(*a, *b, mf[0], mf[1]) <= *beta,
                ManifoldSpec::ClosedSpline { points } => {
                    // Sampling resolution tied to beta keeps the distance
                    // error below tol::SHELL_DISTANCE_REL·beta.
                    let samples = spline_samples(points, tol::SHELL_DISTANCE_REL * beta);
                    polyline_distance(&samples, mf[0], mf[1]) <= *beta
                }
            },
        }
    }
}

/// Coefficient mask of all representable lattice frequencies inside the
/// region. Fails with `NyquistExceeded` when the region's reach pokes past
/// the symmetric band |m_a| ≤ N/2 - 1, and with `EmptyMask` when no lattice
/// point falls inside.
pub fn region_mask(grid: &TorusGrid, region: &SpectralRegion) -> Result<Mask> {
    region.validate(grid.dim())?;
    // Symmetric usable band in lattice units: |m_a| ≤ N/2 - 1.
    let limit = (grid.n() / 2 - 1) as f64;
    if let Some(reach) = region.outer_reach() {
        if reach > limit {
            return Err(Error::NyquistExceeded {
                requested: reach,
                limit,
            });
        }
    }
    // Precompute spline samples once per mask, not once per lattice point.
    let cached_samples = match region {
        SpectralRegion::Shell {
            manifold: ManifoldSpec::ClosedSpline { points },
            beta,
        } => Some(spline_samples(points, tol::SHELL_DISTANCE_REL * beta)),
        _ => None,
    };
    let d = grid.dim();
    let mask = Mask::from_predicate(grid, |flat| {
        let coords = grid.coords(flat);
        let mut m = [0i64; 3];
        for a in 0..d {
            m[a] = grid.signed_freq(coords[a]);
        }
        match (&cached_samples, region) {
            (Some(samples), SpectralRegion::Shell { beta, .. }) => {
                polyline_distance(samples, m[0] as f64, m[1] as f64) <= *beta
            }
            _ => region.contains(&m, d),
        }
    });
    if mask.is_empty() {
        return Err(Error::EmptyMask(format!(
            "no lattice point falls inside the region {region:?}; widen beta or refine the grid"
        )));
    }
    Ok(mask)
}

/// Integer frequency vectors of the mask's points, as geometric points.
pub fn mask_freq_points(grid: &TorusGrid, mask: &Mask) -> Vec<Point> {
    let d = grid.dim();
    mask.indices()
        .iter()
        .map(|&flat| {
            let coords = grid.coords(flat);
            let mut p = [0.0; 3];
            for a in 0..d {
                p[a] = grid.signed_freq(coords[a]) as f64;
            }
            p
        })
        .collect()
}

/// Flatness of the mask's frequency points relative to affine planes of
/// dimension `plane_dim`, optionally restricted to |m| ≤ restrict_radius
/// first (shells of large sets are often probed only near a working band).
pub fn mask_flatness(
    grid: &TorusGrid,
    mask: &Mask,
    plane_dim: usize,
    restrict_radius: Option<f64>,
) -> Result<FlatnessResult> {
    let mut pts = mask_freq_points(grid, mask);
    if let Some(r0) = restrict_radius {
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::Geometry(format!(
                "restriction radius {r0} must be positive"
            )));
        }
        let d = grid.dim();
        pts.retain(|p| (0..d).map(|a| p[a] * p[a]).sum::<f64>().sqrt() <= r0);
        if pts.is_empty() {
            return Err(Error::EmptyMask(format!(
                "restriction to |m| <= {r0} leaves no mask points"
            )));
        }
    }
    flatness(&pts, grid.dim(), plane_dim)
}

/// Exact distance from a point to the axis-aligned ellipse
/// x²/a² + y²/b² = 1, by bisection on the stationarity condition in the
/// first quadrant.
pub fn ellipse_distance(a: f64, b: f64, x: f64, y: f64) -> f64 {
    let (px, py) = (x.abs(), y.abs());
    // Points on a symmetry axis have closed forms (the nearest point can
    // leave the axis inside the evolute).
    if py == 0.0 {
        let t = a * a - b * b;
        if t <= 0.0 || px >= t / a {
            return (px - a).abs();
        }
        let ex = a * a * px / t;
        let ey = b * (1.0 - (ex / a) * (ex / a)).max(0.0).sqrt();
        return ((ex - px).powi(2) + ey * ey).sqrt();
    }
    if px == 0.0 {
        let t = b * b - a * a;
        if t <= 0.0 || py >= t / b {
            return (py - b).abs();
        }
        let ey = b * b * py / t;
        let ex = a * (1.0 - (ey / b) * (ey / b)).max(0.0).sqrt();
        return ((ey - py).powi(2) + ex * ex).sqrt();
    }
    // Stationarity of |(a cos t, b sin t) - p|² in t ∈ (0, π/2):
    // g(t) = (b² - a²) sin t cos t + a·px·sin t - b·py·cos t,
    // g(0) = -b·py < 0 < a·px = g(π/2), and the root is unique.
    let g = |t: f64| {
        let (s, c) = t.sin_cos();
        (b * b - a * a) * s * c + a * px * s - b * py * c
    };
    let mut lo = 0.0;
    let mut hi = std::f64::consts::FRAC_PI_2;
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let (s, c) = t.sin_cos();
    ((a * c - px).powi(2) + (b * s - py).powi(2)).sqrt()
}

/// Uniform closed Catmull-Rom curve through the control points, sampled
/// with chord step at most `step`.
pub fn spline_samples(points: &[Vec<f64>], step: f64) -> Vec<[f64; 2]> {
    let n = points.len();
    let step = step.max(1e-6);
    let mut out = Vec::new();
    for i in 0..n {
        let p0 = &points[(i + n - 1) % n];
        let p1 = &points[i];
        let p2 = &points[(i + 1) % n];
        let p3 = &points[(i + 2) % n];
        let chord = ((p2[0] - p1[0]).powi(2) + (p2[1] - p1[1]).powi(2)).sqrt();
        let count = ((chord / step).ceil() as usize).max(2);
        for j in 0..count {
            let t = j as f64 / count as f64;
            out.push(catmull_rom(p0, p1, p2, p3, t));
        }
    }
    out
}

fn catmull_rom(p0: &[f64], p1: &[f64], p2: &[f64], p3: &[f64], t: f64) -> [f64; 2] {
    let t2 = t * t;
    let t3 = t2 * t;
    let mut out = [0.0; 2];
    for a in 0..2 {
        out[a] = 0.5
            * (2.0 * p1[a]
                + (p2[a] - p0[a]) * t
                + (2.0 * p0[a] - 5.0 * p1[a] + 4.0 * p2[a] - p3[a]) * t2
                + (3.0 * p1[a] - 3.0 * p2[a] - p0[a] + p3[a]) * t3);
    }
    out
}

/// Distance from (x, y) to the closed polyline through `samples`.
pub fn polyline_distance(samples: &[[f64; 2]], x: f64, y: f64) -> f64 {
    let n = samples.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = samples[i];
        let b = samples[(i + 1) % n];
        let ex = b[0] - a[0];
        let ey = b[1] - a[1];
        let len2 = ex * ex + ey * ey;
        let t = if len2 > 0.0 {
            (((x - a[0]) * ex + (y - a[1]) * ey) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let dx = x - (a[0] + t * ex);
        let dy = y - (a[1] + t * ey);
        best = best.min((dx * dx + dy * dy).sqrt());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_mask_matches_integer_count() {
        // Independent oracle: count lattice points with
        // (R-β)² ≤ m·m ≤ (R+β)² in exact integer arithmetic.
        let grid = TorusGrid::new(2, 64, 2.0 * std::f64::consts::PI).unwrap();
        for (r, beta) in [(8.0_f64, 2.0_f64), (16.0, 2.0), (12.0, 1.0)] {
            let mask = region_mask(
                &grid,
                &SpectralRegion::Annulus { radius: r, beta },
            )
            .unwrap();
            let lo = ((r - beta) * (r - beta)).ceil() as i64;
            let hi = ((r + beta) * (r + beta)).floor() as i64;
            let mut count = 0usize;
            for m1 in -32i64..32 {
                for m2 in -32i64..32 {
                    let q = m1 * m1 + m2 * m2;
                    if q >= lo && q <= hi {
                        count += 1;
                    }
                }
            }
            assert_eq!(mask.count(), count, "R = {r}, beta = {beta}");
        }
    }

    #[test]
    fn annulus_mask_grows_linearly_with_radius() {
        let grid = TorusGrid::new(2, 256, 2.0 * std::f64::consts::PI).unwrap();
        let size = |r: f64| {
            region_mask(
                &grid,
                &SpectralRegion::Annulus {
                    radius: r,
                    beta: 2.0,
                },
            )
            .unwrap()
            .count() as f64
        };
        let (s8, s16, s32, s64) = (size(8.0), size(16.0), size(32.0), size(64.0));
        for (small, big) in [(s8, s16), (s16, s32), (s32, s64)] {
            let ratio = big / small;
            assert!(
                (1.85..=2.15).contains(&ratio),
                "annulus growth ratio {ratio}"
            );
        }
        // Area heuristic: |A| ≈ π((R+β)² - (R-β)²) = 8πR for β = 2.
        assert!((s64 - 8.0 * std::f64::consts::PI * 64.0).abs() / s64 < 0.05);
    }

    #[test]
    fn ball_mask_grows_quadratically_with_radius() {
        let grid = TorusGrid::new(2, 256, 2.0 * std::f64::consts::PI).unwrap();
        let size = |r: f64| {
            region_mask(&grid, &SpectralRegion::Ball { radius: r })
                .unwrap()
                .count() as f64
        };
        let ratio = size(32.0) / size(16.0);
        assert!((3.8..=4.2).contains(&ratio), "ball growth ratio {ratio}");
    }

    #[test]
    fn strip_mask_frozen_count() {
        // |m·e₁| ≤ 2 on a 64² lattice: 5 columns of 64 points.
        let grid = TorusGrid::new(2, 64, 2.0 * std::f64::consts::PI).unwrap();
        let mask = region_mask(
            &grid,
            &SpectralRegion::Strip {
                direction: vec![1.0, 0.0],
                offset: 0.0,
                beta: 2.0,
            },
        )
        .unwrap();
        assert_eq!(mask.count(), 320);
    }

    #[test]
    fn nyquist_violation_names_the_bound() {
        let grid = TorusGrid::new(2, 64, 2.0 * std::f64::consts::PI).unwrap();
        let err = region_mask(
            &grid,
            &SpectralRegion::Annulus {
                radius: 40.0,
                beta: 2.0,
            },
        )
        .unwrap_err();
        match err {
            Error::NyquistExceeded { requested, limit } => {
                assert_eq!(requested, 42.0);
                assert_eq!(limit, 31.0);
            }
            other => panic!("expected NyquistExceeded, got {other:?}"),
        }
    }

    #[test]
    fn empty_annulus_reports_empty_mask() {
        // In d = 1 the annulus needs an integer inside [5.3, 5.7].
        let grid = TorusGrid::new(1, 32, 1.0).unwrap();
        let err = region_mask(
            &grid,
            &SpectralRegion::Annulus {
                radius: 5.5,
                beta: 0.2,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyMask(_)), "got {err:?}");
    }

    #[test]
    fn circle_shell_equals_annulus() {
        let grid = TorusGrid::new(2, 128, 2.0 * std::f64::consts::PI).unwrap();
        let annulus = region_mask(
            &grid,
            &SpectralRegion::Annulus {
                radius: 14.0,
                beta: 1.5,
            },
        )
        .unwrap();
        let shell = region_mask(
            &grid,
            &SpectralRegion::Shell {
                manifold: ManifoldSpec::Circle { radius: 14.0 },
                beta: 1.5,
            },
        )
        .unwrap();
        assert_eq!(annulus.indices(), shell.indices());
    }

    #[test]
    fn sphere_shell_matches_integer_count() {
        let grid = TorusGrid::new(3, 32, 2.0 * std::f64::consts::PI).unwrap();
        let (r, beta) = (8.0, 1.0);
        let mask = region_mask(
            &grid,
            &SpectralRegion::Shell {
                manifold: ManifoldSpec::Sphere { radius: r },
                beta,
            },
        )
        .unwrap();
        let lo = ((r - beta) * (r - beta)).ceil() as i64;
        let hi = ((r + beta) * (r + beta)).floor() as i64;
        let mut count = 0usize;
        for m1 in -16i64..16 {
            for m2 in -16i64..16 {
                for m3 in -16i64..16 {
                    let q = m1 * m1 + m2 * m2 + m3 * m3;
                    if q >= lo && q <= hi {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(mask.count(), count);
    }

    #[test]
    fn ellipse_distance_spot_checks() {
        // On-axis outside: plain gap to the vertex.
        assert!((ellipse_distance(3.0, 2.0, 5.0, 0.0) - 2.0).abs() < 1e-12);
        assert!((ellipse_distance(3.0, 2.0, 0.0, 5.0) - 3.0).abs() < 1e-12);
        // Center: nearest vertex is the minor one.
        assert!((ellipse_distance(3.0, 2.0, 0.0, 0.0) - 2.0).abs() < 1e-12);
        // On the curve.
        let t = 0.7_f64;
        let d = ellipse_distance(3.0, 2.0, 3.0 * t.cos(), 2.0 * t.sin());
        assert!(d < 1e-10, "on-curve distance {d}");
        // Inside the evolute on the x axis: nearest point leaves the axis.
        // Stationarity gives x = a²p/(a²-b²) = 1.8, y = b√(1-x²/a²) = 1.6.
        let expect = (0.8_f64 * 0.8 + 1.6 * 1.6).sqrt();
        assert!((ellipse_distance(3.0, 2.0, 1.0, 0.0) - expect).abs() < 1e-10);
        // Generic point: verify against a dense parametric scan.
        let (px, py) = (2.2, 1.7);
        let mut scan = f64::INFINITY;
        for k in 0..200_000 {
            let t = std::f64::consts::TAU * k as f64 / 200_000.0;
            let dx = 3.0 * t.cos() - px;
            let dy = 2.0 * t.sin() - py;
            scan = scan.min((dx * dx + dy * dy).sqrt());
        }
        assert!((ellipse_distance(3.0, 2.0, px, py) - scan).abs() < 1e-6);
    }

    #[test]
    fn ellipse_with_equal_axes_matches_circle() {
        let grid = TorusGrid::new(2, 64, 2.0 * std::f64::consts::PI).unwrap();
        let circle = region_mask(
            &grid,
            &SpectralRegion::Shell {
                manifold: ManifoldSpec::Circle { radius: 9.0 },
                beta: 1.2,
            },
        )
        .unwrap();
        let ellipse = region_mask(
            &grid,
            &SpectralRegion::Shell {
                manifold: ManifoldSpec::Ellipse { a: 9.0, b: 9.0 },
                beta: 1.2,
            },
        )
        .unwrap();
        assert_eq!(circle.indices(), ellipse.indices());
    }

    #[test]
    fn spline_through_circle_samples_tracks_circle_distance() {
        let r = 10.0;
        let control: Vec<Vec<f64>> = (0..24)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 24.0;
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        let samples = spline_samples(&control, 0.01);
        for (px, py) in [(5.0, 0.0), (0.0, 15.0), (10.6, 0.3), (-7.0, 7.0)] {
            let spline = polyline_distance(&samples, px, py);
            let circle = ((px * px + py * py).sqrt() - r).abs();
            assert!(
                (spline - circle).abs() < 0.05,
                "spline {spline} vs circle {circle} at ({px}, {py})"
            );
        }
    }

    #[test]
    fn strip_masks_are_flat_and_annuli_are_not() {
        let grid = TorusGrid::new(2, 64, 2.0 * std::f64::consts::PI).unwrap();
        let strip = region_mask(
            &grid,
            &SpectralRegion::Strip {
                direction: vec![1.0, 0.0],
                offset: 0.0,
                beta: 2.0,
            },
        )
        .unwrap();
        let flat = mask_flatness(&grid, &strip, 1, None).unwrap();
        assert!(flat.value <= 2.0 + 1e-9, "strip flatness {}", flat.value);

        let annulus = region_mask(
            &grid,
            &SpectralRegion::Annulus {
                radius: 12.0,
                beta: 2.0,
            },
        )
        .unwrap();
        let round = mask_flatness(&grid, &annulus, 1, None).unwrap();
        assert!(round.value >= 9.0, "annulus flatness {}", round.value);
    }

    #[test]
    fn flatness_restriction_shrinks_the_ball() {
        let grid = TorusGrid::new(2, 64, 2.0 * std::f64::consts::PI).unwrap();
        let ball = region_mask(&grid, &SpectralRegion::Ball { radius: 20.0 }).unwrap();
        let full = mask_flatness(&grid, &ball, 0, None).unwrap();
        let cut = mask_flatness(&grid, &ball, 0, Some(6.0)).unwrap();
        assert!((full.value - 20.0).abs() < 0.5, "full {}", full.value);
        assert!((cut.value - 6.0).abs() < 0.5, "cut {}", cut.value);
        // Restricting an annulus below its inner edge leaves nothing.
        let ring = region_mask(
            &grid,
            &SpectralRegion::Annulus {
                radius: 12.0,
                beta: 2.0,
            },
        )
        .unwrap();
        assert!(mask_flatness(&grid, &ring, 0, Some(6.0)).is_err());
    }

    #[test]
    fn region_toml_round_trip() {
        let regions = vec![
            SpectralRegion::Annulus {
                radius: 16.0,
                beta: 2.0,
            },
            SpectralRegion::Strip {
                direction: vec![0.0, 1.0],
                offset: 3.0,
                beta: 1.5,
            },
            SpectralRegion::Shell {
                manifold: ManifoldSpec::Ellipse { a: 10.0, b: 6.0 },
                beta: 1.0,
            },
        ];
        for r in regions {
            let text = toml::to_string(&r).unwrap();
            let back: SpectralRegion = toml::from_str(&text).unwrap();
            assert_eq!(r, back);
        }
    }
}
