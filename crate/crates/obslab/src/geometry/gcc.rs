//! Geometric control estimation: the smallest fraction of any k-cube that
//! meets an observation set.
//!
//! For a set E on the torus and cubes of dimension k with side ℓ, the
//! control quantity is
//!
//!   γ(E; k, ℓ) = inf over placements Q of |Q ∩ E| / |Q|,
//!
//! the infimum running over all centers and orientations of the k-cube Q.
//! `estimate_gcc` samples that infimum from above: it scans a deterministic
//! family of placements (low-discrepancy and seeded random centers crossed
//! with axis-aligned, lattice-rational and random orientations, each cube
//! measured by midpoint tensor quadrature) and then refines the worst
//! placement by shrinking-step coordinate descent. The returned value is an
//! upper bound on the true infimum; it can only overestimate.
//!
//! `scan_segments_2d` is an independent dense reference for the k = 1,
//! d = 2 case, used to cross-check the estimator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Domain, SetSpec};
use crate::error::{Error, Result};

/// Point evaluations allowed in the scan phase before the center ×
/// orientation pairing falls back from the full product to round-robin.
const SCAN_EVAL_BUDGET: usize = 60_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GccConfig {
    /// Cube dimension k, 1 ≤ k ≤ d.
    pub k: usize,
    /// Cube side length ℓ.
    pub ell: f64,
    /// Low-discrepancy centers scanned; the same number of seeded random
    /// centers is added.
    pub centers: usize,
    /// Random orientations added to the axis-aligned and lattice-rational
    /// families.
    pub random_orientations: usize,
    /// Midpoint quadrature points per cube dimension (at least 64).
    pub quad_per_dim: usize,
    /// Shrinking-step refinement sweeps on the worst cube (at least 20).
    pub refine_sweeps: usize,
    pub seed: u64,
}

impl Default for GccConfig {
    fn default() -> Self {
        GccConfig {
            k: 1,
            ell: 1.0,
            centers: 1200,
            random_orientations: 48,
            quad_per_dim: 64,
            refine_sweeps: 32,
            seed: 0x6cc,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GccEstimate {
    /// Upper bound on the control infimum.
    pub gamma_hat: f64,
    /// Center of the worst cube found.
    pub witness_center: Vec<f64>,
    /// Orthonormal frame of the worst cube (k rows of d components).
    pub witness_frame: Vec<Vec<f64>>,
    /// Cubes measured in the scan phase.
    pub cubes_scanned: usize,
    /// Total point evaluations, scan and refinement together.
    pub evaluations: usize,
}

/// Orthonormal k-frame in d dimensions; rows are the cube edge directions.
type Frame = Vec<[f64; 3]>;

pub fn estimate_gcc(set: &SetSpec, dom: &Domain, cfg: &GccConfig) -> Result<GccEstimate> {
    set.validate(dom)?;
    if !(1..=dom.d).contains(&cfg.k) {
        return Err(Error::Geometry(format!(
            "cube dimension k = {} must lie in 1..={}",
            cfg.k, dom.d
        )));
    }
    if !(cfg.ell.is_finite() && cfg.ell > 0.0) {
        return Err(Error::Geometry(format!("cube side {} must be positive", cfg.ell)));
    }
    if cfg.quad_per_dim < 64 {
        return Err(Error::Geometry(format!(
            "quadrature needs at least 64 points per dimension, got {}",
            cfg.quad_per_dim
        )));
    }
    if cfg.refine_sweeps < 20 {
        return Err(Error::Geometry(format!(
            "refinement needs at least 20 sweeps, got {}",
            cfg.refine_sweeps
        )));
    }
    if cfg.centers == 0 {
        return Err(Error::Geometry("at least one center is required".into()));
    }
    // Fail early on sets that cannot be evaluated pointwise.
    set.contains(dom, &vec![0.0; dom.d])?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let centers = make_centers(dom, cfg.centers, &mut rng);
    let frames = make_frames(dom.d, cfg.k, cfg.random_orientations, &mut rng);

    let quad = midpoint_offsets(cfg.k, cfg.quad_per_dim, cfg.ell);
    let mut evaluations = 0usize;
    let mut best = f64::INFINITY;
    let mut best_center = centers[0];
    let mut best_frame = frames[0].clone();
    let mut cubes_scanned = 0usize;

    let product_cost = centers
        .len()
        .saturating_mul(frames.len())
        .saturating_mul(quad.len());
    if product_cost <= SCAN_EVAL_BUDGET {
        for c in &centers {
            for f in &frames {
                let v = cube_fraction(set, dom, c, f, &quad)?;
                evaluations += quad.len();
                cubes_scanned += 1;
                if v < best {
                    best = v;
                    best_center = *c;
                    best_frame = f.clone();
                }
            }
        }
    } else {
        // Round-robin pairing keeps the budget bounded while every
        // orientation still sees many centers.
        for (i, c) in centers.iter().enumerate() {
            let f = &frames[i % frames.len()];
            let v = cube_fraction(set, dom, c, f, &quad)?;
            evaluations += quad.len();
            cubes_scanned += 1;
            if v < best {
                best = v;
                best_center = *c;
                best_frame = f.clone();
            }
        }
    }

    // Shrinking-step descent over center coordinates and frame tilts.
    let mut center_step = cfg.ell / 8.0;
    let mut tilt_step = 0.15;
    for _ in 0..cfg.refine_sweeps {
        let mut improved = false;
        for axis in 0..dom.d {
            for sign in [1.0, -1.0] {
                let mut cand = best_center;
                cand[axis] += sign * center_step;
                let v = cube_fraction(set, dom, &cand, &best_frame, &quad)?;
                evaluations += quad.len();
                if v < best {
                    best = v;
                    best_center = cand;
                    improved = true;
                }
            }
        }
        if dom.d > 1 {
            for vec_idx in 0..best_frame.len() {
                for axis in 0..dom.d {
                    for sign in [1.0, -1.0] {
                        let mut cand = best_frame.clone();
                        cand[vec_idx][axis] += sign * tilt_step;
                        if let Some(f) = orthonormalize(&cand, dom.d) {
                            let v = cube_fraction(set, dom, &best_center, &f, &quad)?;
                            evaluations += quad.len();
                            if v < best {
                                best = v;
                                best_frame = f;
                                improved = true;
                            }
                        }
                    }
                }
            }
        }
        if !improved {
            center_step *= 0.6;
            tilt_step *= 0.6;
        }
    }

    Ok(GccEstimate {
        gamma_hat: best,
        witness_center: best_center[..dom.d].to_vec(),
        witness_frame: best_frame
            .iter()
            .map(|u| u[..dom.d].to_vec())
            .collect(),
        cubes_scanned,
        evaluations,
    })
}

/// Fraction of the cube covered by the set, by midpoint tensor quadrature.
/// `quad` holds per-node offsets in the cube's own coordinates.
fn cube_fraction(
    set: &SetSpec,
    dom: &Domain,
    center: &[f64; 3],
    frame: &Frame,
    quad: &[[f64; 3]],
) -> Result<f64> {
    let mut hits = 0usize;
    let mut x = [0.0; 3];
    for offs in quad {
        for a in 0..dom.d {
            let mut v = center[a];
            for (i, u) in frame.iter().enumerate() {
                v += offs[i] * u[a];
            }
            x[a] = v;
        }
        if set.contains(dom, &x[..dom.d])? {
            hits += 1;
        }
    }
    Ok(hits as f64 / quad.len() as f64)
}

/// Offsets (t_i - 1/2)·ℓ for the midpoint rule, flattened over the k axes.
fn midpoint_offsets(k: usize, q: usize, ell: f64) -> Vec<[f64; 3]> {
    let line: Vec<f64> = (0..q)
        .map(|j| ((j as f64 + 0.5) / q as f64 - 0.5) * ell)
        .collect();
    let mut out = Vec::with_capacity(q.pow(k as u32));
    match k {
        1 => {
            for &a in &line {
                out.push([a, 0.0, 0.0]);
            }
        }
        2 => {
            for &a in &line {
                for &b in &line {
                    out.push([a, b, 0.0]);
                }
            }
        }
        3 => {
            for &a in &line {
                for &b in &line {
                    for &c in &line {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        _ => unreachable!("k ≤ 3"),
    }
    out
}

/// Low-discrepancy (Halton) centers plus an equal count of seeded uniform
/// random centers.
fn make_centers(dom: &Domain, count: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    const BASES: [u64; 3] = [2, 3, 5];
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let mut c = [0.0; 3];
        for a in 0..dom.d {
            c[a] = radical_inverse(i as u64 + 1, BASES[a]) * dom.side;
        }
        out.push(c);
    }
    for _ in 0..count {
        let mut c = [0.0; 3];
        for v in c.iter_mut().take(dom.d) {
            *v = rng.gen_range(0.0..dom.side);
        }
        out.push(c);
    }
    out
}

/// Van der Corput radical inverse in the given base.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Orientation families: axis-aligned k-subsets, lattice-rational frames
/// (small coprime integer directions) and seeded random frames.
fn make_frames(d: usize, k: usize, random: usize, rng: &mut ChaCha8Rng) -> Vec<Frame> {
    let mut frames: Vec<Frame> = Vec::new();

    // Axis-aligned: every k-subset of the coordinate axes.
    let axes: Vec<[f64; 3]> = (0..d)
        .map(|a| {
            let mut e = [0.0; 3];
            e[a] = 1.0;
            e
        })
        .collect();
    for subset in k_subsets(d, k) {
        frames.push(subset.iter().map(|&a| axes[a]).collect());
    }

    // Lattice-rational directions: primitive integer vectors with small
    // entries, deduplicated up to sign.
    let rational = rational_directions(d);
    match k {
        1 => {
            for u in &rational {
                if !is_axis(u, d) {
                    frames.push(vec![*u]);
                }
            }
        }
        _ => {
            // Pairs of rational directions spanning well-conditioned planes;
            // for k = 3 the third direction completes the frame.
            'outer: for i in 0..rational.len() {
                for j in i + 1..rational.len() {
                    let cand = vec![rational[i], rational[j]];
                    if let Some(mut f) = orthonormalize(&cand, d) {
                        if k == 3 {
                            let (u, v) = (f[0], f[1]);
                            f.push([
                                u[1] * v[2] - u[2] * v[1],
                                u[2] * v[0] - u[0] * v[2],
                                u[0] * v[1] - u[1] * v[0],
                            ]);
                        }
                        if !frames.iter().any(|g| frames_close(g, &f, d)) {
                            frames.push(f);
                        }
                    }
                    if frames.len() >= 64 {
                        break 'outer;
                    }
                }
            }
        }
    }

    // Seeded random frames.
    let mut added = 0;
    while added < random {
        let cand: Vec<[f64; 3]> = (0..k).map(|_| random_direction(d, rng)).collect();
        if let Some(f) = orthonormalize(&cand, d) {
            frames.push(f);
            added += 1;
        }
    }
    frames
}

fn is_axis(u: &[f64; 3], d: usize) -> bool {
    (0..d).filter(|&a| u[a].abs() > 1e-12).count() == 1
}

fn k_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // Advance the combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] + 1 <= d - (k - i) {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Primitive integer directions with entries in -3..=3 (2D) or -2..=2 (3D),
/// first nonzero entry positive, normalized to unit length. Components
/// beyond the dimension stay zero.
fn rational_directions(d: usize) -> Vec<[f64; 3]> {
    let maxe: i64 = if d == 2 { 3 } else { 2 };
    let gcd = |mut a: i64, mut b: i64| {
        a = a.abs();
        b = b.abs();
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    };
    let mut out = Vec::new();
    let range = -maxe..=maxe;
    let qs: Vec<i64> = if d >= 2 { range.clone().collect() } else { vec![0] };
    let zs: Vec<i64> = if d == 3 {
        range.clone().collect()
    } else {
        vec![0]
    };
    for p in range.clone() {
        for &q in &qs {
            for &r in &zs {
                let v = [p, q, r];
                if v.iter().all(|&e| e == 0) {
                    continue;
                }
                let g = v.iter().fold(0, |acc, &e| gcd(acc, e));
                if g != 1 {
                    continue;
                }
                // First nonzero entry positive: one vector per line.
                let first = v.iter().find(|&&e| e != 0).unwrap();
                if *first < 0 {
                    continue;
                }
                let n = ((p * p + q * q + r * r) as f64).sqrt();
                out.push([p as f64 / n, q as f64 / n, r as f64 / n]);
            }
        }
    }
    out
}

fn random_direction(d: usize, rng: &mut ChaCha8Rng) -> [f64; 3] {
    match d {
        1 => [1.0, 0.0, 0.0],
        2 => {
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            [t.cos(), t.sin(), 0.0]
        }
        _ => {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).sqrt();
            [r * t.cos(), r * t.sin(), z]
        }
    }
}

/// Gram-Schmidt on the first d components; None when nearly dependent.
fn orthonormalize(vectors: &[[f64; 3]], d: usize) -> Option<Frame> {
    let mut out: Frame = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = *v;
        for u in &out {
            let dot: f64 = (0..d).map(|a| w[a] * u[a]).sum();
            for a in 0..d {
                w[a] -= dot * u[a];
            }
        }
        for a in d..3 {
            w[a] = 0.0;
        }
        let n: f64 = (0..d).map(|a| w[a] * w[a]).sum::<f64>().sqrt();
        if n < 1e-8 {
            return None;
        }
        for a in 0..d {
            w[a] /= n;
        }
        out.push(w);
    }
    Some(out)
}

fn frames_close(a: &Frame, b: &Frame, d: usize) -> bool {
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(b).all(|(u, v)| {
        let dot: f64 = (0..d).map(|i| u[i] * v[i]).sum();
        dot.abs() > 1.0 - 1e-9
    })
}

/// Dense two-stage reference scan for segments (k = 1) in d = 2.
///
/// Stage one sweeps a full grid of centers over `window` crossed with
/// `angles` directions in [0, π); stage two rescans a shrunken
/// neighborhood of the stage-one minimizer at 16 times finer resolution.
/// Pure grid scanning throughout: this shares no search machinery with
/// `estimate_gcc` and serves as its cross-check.
pub fn scan_segments_2d(
    set: &SetSpec,
    dom: &Domain,
    ell: f64,
    window: [f64; 2],
    centers_per_axis: usize,
    angles: usize,
    quad: usize,
) -> Result<f64> {
    if dom.d != 2 {
        return Err(Error::Geometry("segment scan requires d = 2".into()));
    }
    set.validate(dom)?;
    set.contains(dom, &[0.0, 0.0])?;
    let quad_offsets = midpoint_offsets(1, quad, ell);

    let eval = |cx: f64, cy: f64, theta: f64| -> Result<f64> {
        let frame: Frame = vec![[theta.cos(), theta.sin(), 0.0]];
        cube_fraction(set, dom, &[cx, cy, 0.0], &frame, &quad_offsets)
    };

    let mut best = f64::INFINITY;
    let mut arg = (0.0, 0.0, 0.0);
    let step = [
        window[0] / centers_per_axis as f64,
        window[1] / centers_per_axis as f64,
    ];
    let dtheta = std::f64::consts::PI / angles as f64;
    for i in 0..centers_per_axis {
        let cx = (i as f64 + 0.5) * step[0];
        for j in 0..centers_per_axis {
            let cy = (j as f64 + 0.5) * step[1];
            for a in 0..angles {
                let theta = a as f64 * dtheta;
                let v = eval(cx, cy, theta)?;
                if v < best {
                    best = v;
                    arg = (cx, cy, theta);
                }
            }
        }
    }

    // Fine local rescan around the coarse minimizer.
    let fine = 16usize;
    for i in 0..=(2 * fine) {
        let cx = arg.0 + (i as f64 / fine as f64 - 1.0) * step[0];
        for j in 0..=(2 * fine) {
            let cy = arg.1 + (j as f64 / fine as f64 - 1.0) * step[1];
            for a in 0..=(2 * fine) {
                let theta = arg.2 + (a as f64 / fine as f64 - 1.0) * dtheta;
                best = best.min(eval(cx, cy, theta)?);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom2(side: f64) -> Domain {
        Domain::new(2, side).unwrap()
    }

    #[test]
    fn full_space_gives_exactly_one() {
        let dom = dom2(8.0);
        let cfg = GccConfig {
            centers: 40,
            random_orientations: 8,
            ell: 2.0,
            ..GccConfig::default()
        };
        let est = estimate_gcc(&SetSpec::Full, &dom, &cfg).unwrap();
        assert_eq!(est.gamma_hat, 1.0);
    }

    #[test]
    fn empty_set_gives_zero() {
        let dom = dom2(8.0);
        let cfg = GccConfig {
            centers: 20,
            random_orientations: 4,
            ell: 2.0,
            ..GccConfig::default()
        };
        let est = estimate_gcc(&SetSpec::Empty, &dom, &cfg).unwrap();
        assert_eq!(est.gamma_hat, 0.0);
    }

    #[test]
    fn vertical_strips_admit_uncontrolled_segments() {
        // A vertical segment in a gap never meets vertical strips.
        let dom = dom2(8.0);
        let strips = SetSpec::Strips {
            normal: vec![1.0, 0.0],
            period: 1.0,
            width: 0.2,
            phase: 0.0,
        };
        let cfg = GccConfig {
            k: 1,
            ell: 2.0,
            centers: 400,
            random_orientations: 16,
            ..GccConfig::default()
        };
        let est = estimate_gcc(&strips, &dom, &cfg).unwrap();
        assert!(est.gamma_hat <= 0.02, "got {}", est.gamma_hat);
    }

    #[test]
    fn grid_pattern_estimate_is_positive_and_sane() {
        let dom = dom2(8.0);
        let pattern = SetSpec::grid_pattern(2, 1.0, 0.2);
        let cfg = GccConfig {
            k: 1,
            ell: 2.0,
            centers: 600,
            random_orientations: 24,
            ..GccConfig::default()
        };
        let est = estimate_gcc(&pattern, &dom, &cfg).unwrap();
        assert!(
            est.gamma_hat >= 0.05 && est.gamma_hat <= 0.25,
            "gamma_hat = {} out of the sanity band",
            est.gamma_hat
        );
    }

    #[test]
    fn estimator_close_to_dense_scan_on_grid_pattern() {
        let dom = dom2(8.0);
        let pattern = SetSpec::grid_pattern(2, 1.0, 0.2);
        // Finer quadrature keeps the 1/quad fraction quantization well
        // below the comparison tolerance.
        let cfg = GccConfig {
            k: 1,
            ell: 2.0,
            centers: 600,
            random_orientations: 24,
            quad_per_dim: 128,
            ..GccConfig::default()
        };
        let est = estimate_gcc(&pattern, &dom, &cfg).unwrap();
        // The pattern repeats with period 1, so centers scan one cell.
        let scan = scan_segments_2d(&pattern, &dom, 2.0, [1.0, 1.0], 24, 128, 128).unwrap();
        let rel = (est.gamma_hat - scan).abs() / scan.max(1e-12);
        assert!(
            rel <= 0.2,
            "estimate {} vs dense scan {} (rel {rel})",
            est.gamma_hat,
            scan
        );
    }

    #[test]
    fn two_dimensional_cubes_on_grid_pattern() {
        // A 2-cube of side 2 always covers several full periods, so its
        // covered fraction stays near the volume fraction of the pattern:
        // 2·0.2 - 0.04 = 0.36.
        let dom = dom2(8.0);
        let pattern = SetSpec::grid_pattern(2, 1.0, 0.2);
        let cfg = GccConfig {
            k: 2,
            ell: 2.0,
            centers: 60,
            random_orientations: 6,
            quad_per_dim: 64,
            ..GccConfig::default()
        };
        let est = estimate_gcc(&pattern, &dom, &cfg).unwrap();
        assert!(
            est.gamma_hat > 0.2 && est.gamma_hat < 0.4,
            "gamma_hat = {}",
            est.gamma_hat
        );
    }

    #[test]
    fn rejects_bad_configs() {
        let dom = dom2(8.0);
        let base = GccConfig::default();
        let bad_k = GccConfig { k: 3, ..base.clone() };
        assert!(estimate_gcc(&SetSpec::Full, &dom, &bad_k).is_err());
        let bad_quad = GccConfig {
            quad_per_dim: 32,
            ..base.clone()
        };
        assert!(estimate_gcc(&SetSpec::Full, &dom, &bad_quad).is_err());
        let bad_refine = GccConfig {
            refine_sweeps: 5,
            ..base
        };
        assert!(estimate_gcc(&SetSpec::Full, &dom, &bad_refine).is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let dom = dom2(8.0);
        let pattern = SetSpec::grid_pattern(2, 1.0, 0.25);
        let cfg = GccConfig {
            centers: 100,
            random_orientations: 8,
            ell: 1.5,
            ..GccConfig::default()
        };
        let a = estimate_gcc(&pattern, &dom, &cfg).unwrap();
        let b = estimate_gcc(&pattern, &dom, &cfg).unwrap();
        assert_eq!(a.gamma_hat.to_bits(), b.gamma_hat.to_bits());
        assert_eq!(a.witness_center, b.witness_center);
    }
}
