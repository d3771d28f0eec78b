//! Sets on the torus: expression trees, indicators, distances, dilation.
//!
//! A `SetSpec` describes a subset of the torus [0, L)^d as an expression
//! tree over primitives (balls, boxes, periodic strip families, half
//! spaces) closed under union, intersection, complement, rigid motion and
//! dilation. Evaluation yields pointwise membership, an exact Euclidean
//! distance function where the expression supports one, and rasterized
//! indicators on a `TorusGrid`.
//!
//! Distances are exact for primitives, unions of distance-supporting sets,
//! rigid images and dilations thereof. Intersections and complements carry
//! no exact distance; dilating those falls back to morphological dilation
//! of the rasterized indicator with a Euclidean ball.

pub mod flatness;
pub mod gcc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::TorusGrid;

/// The continuous torus [0, L)^d, without any grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub d: usize,
    pub side: f64,
}

impl Domain {
    pub fn new(d: usize, side: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Geometry(format!("dimension d = {d} must be 1, 2 or 3")));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::Geometry(format!("side length {side} must be positive")));
        }
        Ok(Domain { d, side })
    }

    pub fn of_grid(grid: &TorusGrid) -> Self {
        Domain {
            d: grid.dim(),
            side: grid.side(),
        }
    }

    /// Signed coordinate difference wrapped into [-L/2, L/2).
    pub fn wrap(&self, delta: f64) -> f64 {
        let l = self.side;
        let mut t = delta % l;
        if t < -l / 2.0 {
            t += l;
        } else if t >= l / 2.0 {
            t -= l;
        }
        t
    }

    /// Torus distance between two points.
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.d {
            let t = self.wrap(a[i] - b[i]);
            acc += t * t;
        }
        acc.sqrt()
    }

    /// Reduce a point into the fundamental domain [0, L)^d.
    pub fn reduce(&self, x: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..self.d {
            out[i] = x[i].rem_euclid(self.side);
        }
        out
    }
}

/// Expression tree describing a subset of the torus.
///
/// Serialized with an internal `kind` tag; the config layer rejects unknown
/// keys inside these tables when parsing experiment files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    /// The whole torus.
    Full,
    /// The empty set.
    Empty,
    /// Euclidean ball around `center` (torus metric).
    Ball { center: Vec<f64>, radius: f64 },
    /// Axis-aligned box: per axis, the circular interval [lo_a, hi_a).
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Periodic strip family: points x with (n·x - phase) mod period in
    /// [0, width), for a unit normal n. The family must close up on the
    /// torus: n_a·L must be an integer multiple of the period for each axis.
    Strips {
        normal: Vec<f64>,
        period: f64,
        width: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Half space {x : n·x ≤ offset}, evaluated on the fundamental domain
    /// representative of x (this primitive ignores periodic wrap).
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Union { terms: Vec<SetSpec> },
    Intersection { terms: Vec<SetSpec> },
    Complement { term: Box<SetSpec> },
    /// All points within Euclidean distance `radius` of the inner set.
    Dilate { term: Box<SetSpec>, radius: f64 },
    /// Rigid image: membership of rot⁻¹·(x - shift) in the inner set.
    /// `rot` is a row-major d×d orthogonal matrix; omit it for a pure shift.
    Rigid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rot: Option<Vec<Vec<f64>>>,
        shift: Vec<f64>,
        term: Box<SetSpec>,
    },
}

impl SetSpec {
    /// Union of vertical and horizontal strip families with common period,
    /// width and phase: the standard crossing-grid observation set.
    pub fn grid_pattern(d: usize, period: f64, width: f64) -> SetSpec {
        let mut terms = Vec::new();
        for axis in 0..d.min(2) {
            let mut normal = vec![0.0; d];
            normal[axis] = 1.0;
            terms.push(SetSpec::Strips {
                normal,
                period,
                width,
                phase: 0.0,
            });
        }
        SetSpec::Union { terms }
    }

    /// Check dimensions, parameter ranges and torus commensurability.
    pub fn validate(&self, dom: &Domain) -> Result<()> {
        let dim_ok = |v: &Vec<f64>, what: &str| -> Result<()> {
            if v.len() != dom.d {
                return Err(Error::Geometry(format!(
                    "{what} has {} coordinates, domain dimension is {}",
                    v.len(),
                    dom.d
                )));
            }
            Ok(())
        };
        match self {
            SetSpec::Full | SetSpec::Empty => Ok(()),
            SetSpec::Ball { center, radius } => {
                dim_ok(center, "ball center")?;
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::Geometry(format!("ball radius {radius} must be ≥ 0")));
                }
                Ok(())
            }
            SetSpec::Box { lo, hi } => {
                dim_ok(lo, "box lo")?;
                dim_ok(hi, "box hi")?;
                for a in 0..dom.d {
                    let len = hi[a] - lo[a];
                    if !(len.is_finite() && len > 0.0 && len <= dom.side) {
                        return Err(Error::Geometry(format!(
                            "box extent {len} on axis {a} must lie in (0, L]"
                        )));
                    }
                }
                Ok(())
            }
            SetSpec::Strips {
                normal,
                period,
                width,
                phase,
            } => {
                dim_ok(normal, "strip normal")?;
                let nn: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (nn - 1.0).abs() > 1e-9 {
                    return Err(Error::Geometry(format!(
                        "strip normal must be a unit vector, |n| = {nn}"
                    )));
                }
                if !(period.is_finite() && *period > 0.0) {
                    return Err(Error::Geometry(format!("strip period {period} must be positive")));
                }
                if !(width.is_finite() && *width > 0.0 && *width <= *period) {
                    return Err(Error::Geometry(format!(
                        "strip width {width} must lie in (0, period = {period}]"
                    )));
                }
                if !phase.is_finite() {
                    return Err(Error::Geometry("strip phase must be finite".into()));
                }
                for a in 0..dom.d {
                    let cycles = normal[a] * dom.side / period;
                    if (cycles - cycles.round()).abs() > 1e-9 {
                        return Err(Error::Geometry(format!(
                            "strip family does not close up on the torus: n_{a}·L/period = {cycles} \
                             is not an integer"
                        )));
                    }
                }
                Ok(())
            }
            SetSpec::HalfSpace { normal, offset } => {
                dim_ok(normal, "half-space normal")?;
                if !offset.is_finite() {
                    return Err(Error::Geometry("half-space offset must be finite".into()));
                }
                Ok(())
            }
            SetSpec::Union { terms } | SetSpec::Intersection { terms } => {
                if terms.is_empty() {
                    return Err(Error::Geometry(
                        "union/intersection needs at least one term".into(),
                    ));
                }
                terms.iter().try_for_each(|t| t.validate(dom))
            }
            SetSpec::Complement { term } => term.validate(dom),
            SetSpec::Dilate { term, radius } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::Geometry(format!(
                        "dilation radius {radius} must be ≥ 0"
                    )));
                }
                term.validate(dom)
            }
            SetSpec::Rigid { rot, shift, term } => {
                dim_ok(shift, "rigid shift")?;
                if let Some(m) = rot {
                    if m.len() != dom.d || m.iter().any(|row| row.len() != dom.d) {
                        return Err(Error::Geometry(format!(
                            "rotation matrix must be {0}×{0}",
                            dom.d
                        )));
                    }
                    // Orthogonality: MᵀM = I.
                    for i in 0..dom.d {
                        for j in 0..dom.d {
                            let mut acc = 0.0;
                            for r in m.iter() {
                                acc += r[i] * r[j];
                            }
                            let want = if i == j { 1.0 } else { 0.0 };
                            if (acc - want).abs() > 1e-9 {
                                return Err(Error::Geometry(
                                    "rotation matrix is not orthogonal".into(),
                                ));
                            }
                        }
                    }
                }
                term.validate(dom)
            }
        }
    }

    /// Does this expression carry an exact Euclidean distance function?
    pub fn has_distance(&self) -> bool {
        match self {
            SetSpec::Full
            | SetSpec::Empty
            | SetSpec::Ball { .. }
            | SetSpec::Box { .. }
            | SetSpec::Strips { .. }
            | SetSpec::HalfSpace { .. } => true,
            SetSpec::Union { terms } => terms.iter().all(|t| t.has_distance()),
            SetSpec::Intersection { .. } | SetSpec::Complement { .. } => false,
            SetSpec::Dilate { term, .. } => term.has_distance(),
            SetSpec::Rigid { term, .. } => term.has_distance(),
        }
    }

    /// Euclidean distance from x to the set (0 inside), when the expression
    /// supports an exact distance.
    pub fn distance(&self, dom: &Domain, x: &[f64]) -> Option<f64> {
        match self {
            SetSpec::Full => Some(0.0),
            SetSpec::Empty => Some(f64::INFINITY),
            SetSpec::Ball { center, radius } => {
                Some((dom.dist(x, center) - radius).max(0.0))
            }
            SetSpec::Box { lo, hi } => {
                let mut acc = 0.0;
                for a in 0..dom.d {
                    let da = circular_interval_dist(dom, x[a], lo[a], hi[a]);
                    acc += da * da;
                }
                Some(acc.sqrt())
            }
            SetSpec::Strips {
                normal,
                period,
                width,
                phase,
            } => {
                let t: f64 = (0..dom.d).map(|a| normal[a] * x[a]).sum::<f64>() - phase;
                let t = t.rem_euclid(*period);
                if t < *width {
                    Some(0.0)
                } else {
                    Some((t - width).min(period - t))
                }
            }
            SetSpec::HalfSpace { normal, offset } => {
                let x = dom.reduce(x);
                let nn: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
                let v: f64 = (0..dom.d).map(|a| normal[a] * x[a]).sum();
                Some(((v - offset) / nn.max(1e-300)).max(0.0))
            }
            SetSpec::Union { terms } => {
                let mut best = f64::INFINITY;
                for t in terms {
                    best = best.min(t.distance(dom, x)?);
                }
                Some(best)
            }
            SetSpec::Intersection { .. } | SetSpec::Complement { .. } => None,
            SetSpec::Dilate { term, radius } => {
                Some((term.distance(dom, x)? - radius).max(0.0))
            }
            SetSpec::Rigid { rot, shift, term } => {
                let y = rigid_preimage(dom, rot.as_deref(), shift, x);
                term.distance(dom, &y)
            }
        }
    }

    /// Pointwise membership. Fails only for dilations of sets without an
    /// exact distance; rasterize those through `indicator` instead.
    pub fn contains(&self, dom: &Domain, x: &[f64]) -> Result<bool> {
        match self {
            SetSpec::Full => Ok(true),
            SetSpec::Empty => Ok(false),
            SetSpec::Ball { center, radius } => Ok(dom.dist(x, center) <= *radius),
            SetSpec::Box { lo, hi } => {
                for a in 0..dom.d {
                    if circular_interval_dist(dom, x[a], lo[a], hi[a]) > 0.0 {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            SetSpec::Strips {
                normal,
                period,
                width,
                phase,
            } => {
                let t: f64 = (0..dom.d).map(|a| normal[a] * x[a]).sum::<f64>() - phase;
                Ok(t.rem_euclid(*period) < *width)
            }
            SetSpec::HalfSpace { normal, offset } => {
                let x = dom.reduce(x);
                let v: f64 = (0..dom.d).map(|a| normal[a] * x[a]).sum();
                Ok(v <= *offset)
            }
            SetSpec::Union { terms } => {
                for t in terms {
                    if t.contains(dom, x)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            SetSpec::Intersection { terms } => {
                for t in terms {
                    if !t.contains(dom, x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            SetSpec::Complement { term } => Ok(!term.contains(dom, x)?),
            SetSpec::Dilate { term, radius } => match term.distance(dom, x) {
                Some(dist) => Ok(dist <= *radius),
                None => Err(Error::Geometry(
                    "pointwise membership in a dilation needs an exact distance for the \
                     inner set; rasterize with `indicator` instead"
                        .into(),
                )),
            },
            SetSpec::Rigid { rot, shift, term } => {
                let y = rigid_preimage(dom, rot.as_deref(), shift, x);
                term.contains(dom, &y)
            }
        }
    }

    /// Rasterize onto the grid nodes. Dilations of distance-supporting sets
    /// are exact; other dilations use morphological dilation of the inner
    /// indicator with the Euclidean ball of grid offsets.
    pub fn indicator(&self, grid: &TorusGrid) -> Result<Vec<bool>> {
        let dom = Domain::of_grid(grid);
        self.validate(&dom)?;
        self.indicator_inner(grid, &dom)
    }

    fn indicator_inner(&self, grid: &TorusGrid, dom: &Domain) -> Result<Vec<bool>> {
        match self {
            SetSpec::Dilate { term, radius } if !term.has_distance() => {
                let inner = term.indicator_inner(grid, dom)?;
                Ok(morphological_dilate(grid, &inner, *radius))
            }
            SetSpec::Union { terms } if !self.has_distance() => {
                let mut acc = vec![false; grid.len()];
                for t in terms {
                    for (a, b) in acc.iter_mut().zip(t.indicator_inner(grid, dom)?) {
                        *a = *a || b;
                    }
                }
                Ok(acc)
            }
            SetSpec::Intersection { terms } => {
                let mut acc = vec![true; grid.len()];
                for t in terms {
                    for (a, b) in acc.iter_mut().zip(t.indicator_inner(grid, dom)?) {
                        *a = *a && b;
                    }
                }
                Ok(acc)
            }
            SetSpec::Complement { term } => {
                let mut inner = term.indicator_inner(grid, dom)?;
                for v in inner.iter_mut() {
                    *v = !*v;
                }
                Ok(inner)
            }
            _ => {
                let mut out = vec![false; grid.len()];
                for (flat, v) in out.iter_mut().enumerate() {
                    let x = grid.point(flat);
                    *v = self.contains(dom, &x[..grid.dim()])?;
                }
                Ok(out)
            }
        }
    }

    /// Fraction of grid nodes inside the set.
    pub fn volume_fraction(&self, grid: &TorusGrid) -> Result<f64> {
        let ind = self.indicator(grid)?;
        Ok(ind.iter().filter(|&&b| b).count() as f64 / grid.len() as f64)
    }
}

/// Distance from coordinate x to the circular interval [lo, hi) on a circle
/// of circumference L (all mod L).
fn circular_interval_dist(dom: &Domain, x: f64, lo: f64, hi: f64) -> f64 {
    let len = hi - lo;
    debug_assert!(len > 0.0 && len <= dom.side);
    if len >= dom.side {
        return 0.0;
    }
    let t = (x - lo).rem_euclid(dom.side);
    if t < len {
        0.0
    } else {
        (t - len).min(dom.side - t)
    }
}

fn rigid_preimage(dom: &Domain, rot: Option<&[Vec<f64>]>, shift: &[f64], x: &[f64]) -> [f64; 3] {
    let mut v = [0.0; 3];
    for a in 0..dom.d {
        v[a] = x[a] - shift[a];
    }
    match rot {
        None => v,
        Some(m) => {
            // Orthogonal: inverse is the transpose.
            let mut out = [0.0; 3];
            for i in 0..dom.d {
                for (j, o) in out.iter_mut().enumerate().take(dom.d) {
                    *o += m[i][j] * v[i];
                }
            }
            out
        }
    }
}

/// Morphological dilation of a grid indicator by the Euclidean ball of
/// radius `radius`: a node joins the set when any set node lies within that
/// distance (torus metric).
fn morphological_dilate(grid: &TorusGrid, indicator: &[bool], radius: f64) -> Vec<bool> {
    if radius <= 0.0 {
        return indicator.to_vec();
    }
    let h = grid.h();
    let reach = (radius / h).floor() as i64;
    let d = grid.dim();
    let n = grid.n() as i64;
    // Precompute ball offsets once.
    let mut offsets: Vec<[i64; 3]> = Vec::new();
    let range = |active: bool| if active { -reach..=reach } else { 0..=0 };
    for dz in range(d >= 3) {
        for dy in range(d >= 2) {
            for dx in range(true) {
                let r2 = (dx * dx + dy * dy + dz * dz) as f64;
                if r2.sqrt() * h <= radius {
                    offsets.push([dx, dy, dz]);
                }
            }
        }
    }
    let mut out = vec![false; indicator.len()];
    for (flat, src) in indicator.iter().enumerate() {
        if !src {
            continue;
        }
        let c = grid.coords(flat);
        for off in &offsets {
            let mut coords = [0usize; 3];
            for a in 0..d {
                coords[a] = ((c[a] as i64 + off[a]).rem_euclid(n)) as usize;
            }
            out[grid.flat(&coords[..d])] = true;
        }
    }
    out
}

/// Scalar damping profile γ(x) ≥ 0 on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DampingProfile {
    /// γ ≡ level.
    Constant { level: f64 },
    /// amplitude·χ_set(x).
    Indicator { set: SetSpec, amplitude: f64 },
    /// amplitude·max(0, 1 - dist(x, set)/ramp): continuous, supported on
    /// the ramp-neighborhood of the set. Needs an exact distance.
    Ramp {
        set: SetSpec,
        amplitude: f64,
        ramp: f64,
    },
    /// Periodized Gaussian bump amplitude·exp(-dist(x, center)²/(2 width²)).
    Bump {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
    },
}

impl DampingProfile {
    pub fn validate(&self, dom: &Domain) -> Result<()> {
        let amp_ok = |a: f64| -> Result<()> {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::NegativeDamping {
                    value: a,
                    location: vec![],
                });
            }
            Ok(())
        };
        match self {
            DampingProfile::Constant { level } => amp_ok(*level),
            DampingProfile::Indicator { set, amplitude } => {
                amp_ok(*amplitude)?;
                set.validate(dom)
            }
            DampingProfile::Ramp {
                set,
                amplitude,
                ramp,
            } => {
                amp_ok(*amplitude)?;
                if !(ramp.is_finite() && *ramp > 0.0) {
                    return Err(Error::Geometry(format!("ramp length {ramp} must be positive")));
                }
                if !set.has_distance() {
                    return Err(Error::Geometry(
                        "ramp profile needs a set with an exact distance".into(),
                    ));
                }
                set.validate(dom)
            }
            DampingProfile::Bump {
                center,
                width,
                amplitude,
            } => {
                amp_ok(*amplitude)?;
                if center.len() != dom.d {
                    return Err(Error::Geometry("bump center dimension mismatch".into()));
                }
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::Geometry(format!("bump width {width} must be positive")));
                }
                Ok(())
            }
        }
    }

    pub fn evaluate(&self, dom: &Domain, x: &[f64]) -> Result<f64> {
        match self {
            DampingProfile::Constant { level } => Ok(*level),
            DampingProfile::Indicator { set, amplitude } => {
                Ok(if set.contains(dom, x)? { *amplitude } else { 0.0 })
            }
            DampingProfile::Ramp {
                set,
                amplitude,
                ramp,
            } => {
                let dist = set.distance(dom, x).ok_or_else(|| {
                    Error::Geometry("ramp profile needs a set with an exact distance".into())
                })?;
                Ok(amplitude * (1.0 - dist / ramp).max(0.0))
            }
            DampingProfile::Bump {
                center,
                width,
                amplitude,
            } => {
                let r = dom.dist(x, center);
                Ok(amplitude * (-r * r / (2.0 * width * width)).exp())
            }
        }
    }

    /// Rasterize γ on the grid nodes, verifying nonnegativity.
    pub fn rasterize(&self, grid: &TorusGrid) -> Result<Vec<f64>> {
        let dom = Domain::of_grid(grid);
        self.validate(&dom)?;
        let mut out = vec![0.0; grid.len()];
        for (flat, g) in out.iter_mut().enumerate() {
            let x = grid.point(flat);
            *g = self.evaluate(&dom, &x[..grid.dim()])?;
            if *g < 0.0 {
                return Err(Error::NegativeDamping {
                    value: *g,
                    location: x[..grid.dim()].to_vec(),
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom2(side: f64) -> Domain {
        Domain::new(2, side).unwrap()
    }

    #[test]
    fn ball_membership_wraps_around() {
        let dom = dom2(8.0);
        let ball = SetSpec::Ball {
            center: vec![0.5, 0.5],
            radius: 1.0,
        };
        ball.validate(&dom).unwrap();
        assert!(ball.contains(&dom, &[0.5, 0.5]).unwrap());
        // 7.8 is within distance 0.7 of 0.5 across the seam.
        assert!(ball.contains(&dom, &[7.8, 0.5]).unwrap());
        assert!(!ball.contains(&dom, &[4.0, 4.0]).unwrap());
        assert!((ball.distance(&dom, &[4.0, 0.5]).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn strips_membership_and_distance() {
        let dom = dom2(8.0);
        let strips = SetSpec::Strips {
            normal: vec![1.0, 0.0],
            period: 1.0,
            width: 0.2,
            phase: 0.0,
        };
        strips.validate(&dom).unwrap();
        assert!(strips.contains(&dom, &[0.1, 3.0]).unwrap());
        assert!(strips.contains(&dom, &[5.19, 0.0]).unwrap());
        assert!(!strips.contains(&dom, &[0.3, 0.0]).unwrap());
        // Distance from the middle of a gap: min(0.4 - 0.2, 1.0 - 0.4)... the
        // gap spans [0.2, 1.0); x = 0.6 is 0.4 from the next strip start and
        // 0.4 past the previous strip end.
        assert!((strips.distance(&dom, &[0.6, 0.0]).unwrap() - 0.4).abs() < 1e-12);
        assert!((strips.distance(&dom, &[0.25, 0.0]).unwrap() - 0.05).abs() < 1e-12);

        // Incommensurate period must be rejected.
        let bad = SetSpec::Strips {
            normal: vec![1.0, 0.0],
            period: 3.0,
            width: 0.2,
            phase: 0.0,
        };
        assert!(bad.validate(&dom).is_err());
    }

    #[test]
    fn diagonal_strips_close_up_when_commensurate() {
        let dom = dom2(8.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // n·L/p = 8s/p must be integral: p = s works (8 cycles per axis).
        let diag = SetSpec::Strips {
            normal: vec![s, s],
            period: s,
            width: 0.3 * s,
            phase: 0.0,
        };
        diag.validate(&dom).unwrap();
        assert!(diag.contains(&dom, &[0.0, 0.0]).unwrap());
        // Strip value depends on x+y only.
        for t in [0.05, 0.31, 0.77] {
            let a = diag.contains(&dom, &[t, 0.0]).unwrap();
            let b = diag.contains(&dom, &[0.0, t]).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn union_complement_membership() {
        let dom = dom2(8.0);
        let pattern = SetSpec::grid_pattern(2, 1.0, 0.2);
        pattern.validate(&dom).unwrap();
        assert!(pattern.contains(&dom, &[0.1, 0.5]).unwrap());
        assert!(pattern.contains(&dom, &[0.5, 0.1]).unwrap());
        assert!(!pattern.contains(&dom, &[0.5, 0.5]).unwrap());
        let gaps = SetSpec::Complement {
            term: Box::new(pattern),
        };
        assert!(gaps.contains(&dom, &[0.5, 0.5]).unwrap());
        assert!(!gaps.contains(&dom, &[0.1, 0.5]).unwrap());
    }

    #[test]
    fn dilate_strips_matches_widened_strips() {
        // Dilating a strip family by δ widens each strip by δ on both sides.
        // δ is kept off the mesh so the closed dilation and the half-open
        // widened strips agree on every grid node.
        let grid = TorusGrid::new(2, 64, 8.0).unwrap();
        let delta = 0.1;
        let dilated = SetSpec::Dilate {
            term: Box::new(SetSpec::Strips {
                normal: vec![1.0, 0.0],
                period: 1.0,
                width: 0.25,
                phase: 0.0,
            }),
            radius: delta,
        };
        let widened = SetSpec::Strips {
            normal: vec![1.0, 0.0],
            period: 1.0,
            width: 0.25 + 2.0 * delta,
            phase: -delta,
        };
        assert_eq!(
            dilated.volume_fraction(&grid).unwrap(),
            widened.volume_fraction(&grid).unwrap()
        );
        assert_eq!(
            dilated.indicator(&grid).unwrap(),
            widened.indicator(&grid).unwrap()
        );
    }

    #[test]
    fn morphological_dilation_agrees_with_exact_distance_on_balls() {
        let grid = TorusGrid::new(2, 64, 8.0).unwrap();
        let ball = SetSpec::Ball {
            center: vec![4.0, 4.0],
            radius: 1.0,
        };
        // Exact path: dilation through the distance function.
        let exact = SetSpec::Dilate {
            term: Box::new(ball.clone()),
            radius: 0.5,
        }
        .indicator(&grid)
        .unwrap();
        // Morphological path: hide the distance behind a double complement.
        let hidden = SetSpec::Dilate {
            term: Box::new(SetSpec::Complement {
                term: Box::new(SetSpec::Complement {
                    term: Box::new(ball),
                }),
            }),
            radius: 0.5,
        }
        .indicator(&grid)
        .unwrap();
        // The morphological ball uses node offsets; mismatches may only sit
        // within one mesh width of the dilated boundary.
        let dom = Domain::of_grid(&grid);
        let h = grid.h();
        for flat in 0..grid.len() {
            if exact[flat] != hidden[flat] {
                let x = grid.point(flat);
                let dist = dom.dist(&x[..2], &[4.0, 4.0]);
                assert!(
                    (dist - 1.5).abs() <= h * 1.5,
                    "mismatch far from the boundary at {:?}",
                    &x[..2]
                );
            }
        }
    }

    #[test]
    fn rigid_motion_translates_and_rotates() {
        let dom = dom2(8.0);
        let base = SetSpec::Box {
            lo: vec![0.0, 0.0],
            hi: vec![2.0, 1.0],
        };
        let shifted = SetSpec::Rigid {
            rot: None,
            shift: vec![3.0, 3.0],
            term: Box::new(base.clone()),
        };
        assert!(shifted.contains(&dom, &[4.9, 3.5]).unwrap());
        assert!(!shifted.contains(&dom, &[2.9, 3.5]).unwrap());

        // Quarter turn: the box's long side now runs along y.
        let rotated = SetSpec::Rigid {
            rot: Some(vec![vec![0.0, -1.0], vec![1.0, 0.0]]),
            shift: vec![0.0, 0.0],
            term: Box::new(base),
        };
        rotated.validate(&dom).unwrap();
        assert!(rotated.contains(&dom, &[7.5, 1.5]).unwrap());

        let skew = SetSpec::Rigid {
            rot: Some(vec![vec![1.0, 0.5], vec![0.0, 1.0]]),
            shift: vec![0.0, 0.0],
            term: Box::new(SetSpec::Full),
        };
        assert!(skew.validate(&dom).is_err());
    }

    #[test]
    fn indicator_fraction_matches_strip_coverage() {
        let grid = TorusGrid::new(2, 128, 8.0).unwrap();
        let strips = SetSpec::Strips {
            normal: vec![1.0, 0.0],
            period: 1.0,
            width: 0.25,
            phase: 0.0,
        };
        // Each period of 16 nodes contains exactly 4 strip nodes.
        let frac = strips.volume_fraction(&grid).unwrap();
        assert!((frac - 0.25).abs() < 1e-12, "fraction {frac}");
    }

    #[test]
    fn damping_profiles_evaluate_and_reject_negatives() {
        let dom = dom2(8.0);
        let grid = TorusGrid::new(2, 32, 8.0).unwrap();
        let constant = DampingProfile::Constant { level: 0.3 };
        assert_eq!(constant.evaluate(&dom, &[1.0, 1.0]).unwrap(), 0.3);

        let neg = DampingProfile::Constant { level: -0.1 };
        assert!(neg.validate(&dom).is_err());

        let ind = DampingProfile::Indicator {
            set: SetSpec::grid_pattern(2, 1.0, 0.2),
            amplitude: 0.5,
        };
        let gamma = ind.rasterize(&grid).unwrap();
        assert!(gamma.iter().all(|&g| g == 0.0 || g == 0.5));
        assert!(gamma.iter().any(|&g| g > 0.0));

        let ramp = DampingProfile::Ramp {
            set: SetSpec::Ball {
                center: vec![4.0, 4.0],
                radius: 1.0,
            },
            amplitude: 1.0,
            ramp: 0.5,
        };
        assert_eq!(ramp.evaluate(&dom, &[4.0, 4.0]).unwrap(), 1.0);
        assert_eq!(ramp.evaluate(&dom, &[4.0, 6.5]).unwrap(), 0.0);
        let mid = ramp.evaluate(&dom, &[4.0, 5.25]).unwrap();
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn setspec_toml_round_trip() {
        let spec = SetSpec::Union {
            terms: vec![
                SetSpec::Ball {
                    center: vec![1.0, 2.0],
                    radius: 0.5,
                },
                SetSpec::Dilate {
                    term: Box::new(SetSpec::grid_pattern(2, 1.0, 0.15)),
                    radius: 0.125,
                },
            ],
        };
        let text = toml::to_string(&spec).unwrap();
        let back: SetSpec = toml::from_str(&text).unwrap();
        assert_eq!(spec, back);
        let again = toml::to_string(&back).unwrap();
        assert_eq!(text, again);
    }
}
