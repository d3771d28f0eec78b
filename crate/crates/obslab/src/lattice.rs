//! Discrete torus grids and the unitary DFT.
//!
//! A `TorusGrid` discretizes the torus [0, L)^d with N points per side,
//! N a power of two. Spatial nodes sit at x_j = h·j with h = L/N; the dual
//! lattice carries frequencies ξ_m = (2π/L)·m with integer coordinates
//! m ∈ {-N/2, …, N/2-1} per axis.
//!
//! Transforms use the unitary normalization (a factor N^{-d/2} in each
//! direction), so the sum of squared magnitudes is preserved exactly and
//! norms can be read off on either side:
//!
//! ```
//! use obslab::lattice::{Dft, TorusGrid};
//! use num_complex::Complex64;
//!
//! let grid = TorusGrid::new(1, 8, std::f64::consts::TAU).unwrap();
//! let mut dft = Dft::new(&grid);
//! let mut field = vec![Complex64::new(1.0, 0.0); grid.len()];
//! dft.forward(&mut field);
//! // A constant field concentrates at m = 0 with magnitude √N.
//! assert!((field[0].norm() - 8f64.sqrt()).abs() < 1e-12);
//! ```

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::tol;

/// Uniform grid on the torus [0, L)^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    d: usize,
    n: usize,
    side: f64,
}

impl TorusGrid {
    /// d ∈ {1, 2, 3}; N a power of two, at least 8; L > 0.
    pub fn new(d: usize, n: usize, side: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Grid(format!("dimension d = {d} must be 1, 2 or 3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "N = {n} must be a power of two and at least 8"
            )));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::Grid(format!("side length L = {side} must be positive")));
        }
        Ok(TorusGrid { d, n, side })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Points per side.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Side length L.
    pub fn side(&self) -> f64 {
        self.side
    }

    /// Mesh width h = L/N.
    pub fn h(&self) -> f64 {
        self.side / self.n as f64
    }

    /// Total number of grid points N^d.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency spacing 2π/L between neighboring lattice frequencies.
    pub fn freq_unit(&self) -> f64 {
        std::f64::consts::TAU / self.side
    }

    /// Largest admissible |ξ| coordinate, (2π/L)·(N/2).
    pub fn nyquist(&self) -> f64 {
        self.freq_unit() * (self.n / 2) as f64
    }

    /// Storage index of axis frequency k mapped to the signed integer
    /// m ∈ [-N/2, N/2): k for k < N/2, k - N otherwise.
    pub fn signed_freq(&self, k: usize) -> i64 {
        debug_assert!(k < self.n);
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Decompose a flat row-major index into per-axis indices.
    /// Only the first `dim()` entries are meaningful.
    pub fn coords(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rest = flat;
        for a in (0..self.d).rev() {
            out[a] = rest % self.n;
            rest /= self.n;
        }
        debug_assert_eq!(rest, 0);
        out
    }

    /// Flat row-major index from per-axis indices.
    pub fn flat(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.d);
        let mut idx = 0usize;
        for a in 0..self.d {
            debug_assert!(coords[a] < self.n);
            idx = idx * self.n + coords[a];
        }
        idx
    }

    /// Spatial node x_j = h·j for a flat index.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let c = self.coords(flat);
        let h = self.h();
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = h * c[a] as f64;
        }
        x
    }

    /// Signed integer frequency vector m for a flat index.
    pub fn freq_int(&self, flat: usize) -> [i64; 3] {
        let c = self.coords(flat);
        let mut m = [0i64; 3];
        for a in 0..self.d {
            m[a] = self.signed_freq(c[a]);
        }
        m
    }

    /// Physical frequency ξ_m = (2π/L)·m for a flat index.
    pub fn freq(&self, flat: usize) -> [f64; 3] {
        let m = self.freq_int(flat);
        let u = self.freq_unit();
        let mut xi = [0.0; 3];
        for a in 0..self.d {
            xi[a] = u * m[a] as f64;
        }
        xi
    }

    /// |ξ_m|² for a flat index.
    pub fn freq_norm_sq(&self, flat: usize) -> f64 {
        let xi = self.freq(flat);
        xi[..self.d].iter().map(|v| v * v).sum()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Unitary DFT engine for one grid. Holds the FFT plans and a line buffer;
/// construction is cheap enough to do once per problem.
pub struct Dft {
    grid: TorusGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Dft {
    pub fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft(grid.n(), FftDirection::Forward);
        let inv = planner.plan_fft(grid.n(), FftDirection::Inverse);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Dft {
            grid: *grid,
            fwd,
            inv,
            line: vec![Complex64::default(); grid.n()],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// In-place forward transform: spatial values to frequency coefficients,
    /// scaled by N^{-d/2} so the map is unitary.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, FftDirection::Forward);
    }

    /// In-place inverse transform, likewise unitary.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, FftDirection::Inverse);
    }

    fn transform(&mut self, data: &mut [Complex64], dir: FftDirection) {
        self.grid.check_len(data.len()).expect("field length");
        let n = self.grid.n();
        let d = self.grid.dim();
        let fft = match dir {
            FftDirection::Forward => Arc::clone(&self.fwd),
            FftDirection::Inverse => Arc::clone(&self.inv),
        };
        for axis in 0..d {
            let stride = n.pow((d - 1 - axis) as u32);
            let lines = self.grid.len() / n;
            for l in 0..lines {
                // Base index of the l-th line along `axis`: distribute l over
                // the other axes, skipping the transformed one.
                let base = line_base(n, d, axis, l);
                if stride == 1 {
                    let seg = &mut data[base..base + n];
                    fft.process_with_scratch(seg, &mut self.scratch);
                } else {
                    for t in 0..n {
                        self.line[t] = data[base + t * stride];
                    }
                    fft.process_with_scratch(&mut self.line, &mut self.scratch);
                    for t in 0..n {
                        data[base + t * stride] = self.line[t];
                    }
                }
            }
        }
        let scale = (self.grid.len() as f64).sqrt().recip();
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Base flat index of line `l` along `axis` in a row-major [n; d] array.
fn line_base(n: usize, d: usize, axis: usize, l: usize) -> usize {
    let mut rest = l;
    let mut base = 0usize;
    for a in (0..d).rev() {
        if a == axis {
            continue;
        }
        let coord = rest % n;
        rest /= n;
        base += coord * n.pow((d - 1 - a) as u32);
    }
    debug_assert_eq!(rest, 0);
    base
}

/// Subset of the frequency lattice, stored as a dense flag array plus the
/// packed list of selected flat indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    n: usize,
    d: usize,
    on: Vec<bool>,
    indices: Vec<usize>,
}

impl Mask {
    /// Build a mask by evaluating `pred` on every lattice frequency.
    pub fn from_predicate(grid: &TorusGrid, mut pred: impl FnMut(usize) -> bool) -> Self {
        let mut on = vec![false; grid.len()];
        let mut indices = Vec::new();
        for flat in 0..grid.len() {
            if pred(flat) {
                on[flat] = true;
                indices.push(flat);
            }
        }
        Mask {
            n: grid.n(),
            d: grid.dim(),
            on,
            indices,
        }
    }

    pub fn matches(&self, grid: &TorusGrid) -> bool {
        self.n == grid.n() && self.d == grid.dim()
    }

    pub fn contains(&self, flat: usize) -> bool {
        self.on[flat]
    }

    /// Number of selected lattice points.
    pub fn count(&self) -> usize {
        self.indices.len()
    }

    /// Selected flat indices in increasing order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Zero every coefficient outside the mask.
    pub fn project_coeffs(&self, coeffs: &mut [Complex64]) {
        debug_assert_eq!(coeffs.len(), self.on.len());
        for (c, keep) in coeffs.iter_mut().zip(&self.on) {
            if !keep {
                *c = Complex64::default();
            }
        }
    }

    /// Pack the on-mask coefficients into a dense vector of length `count()`.
    pub fn gather(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        self.indices.iter().map(|&i| coeffs[i]).collect()
    }

    /// Scatter packed coefficients back onto the full lattice (zeros elsewhere).
    pub fn scatter(&self, packed: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(packed.len(), self.indices.len());
        out.fill(Complex64::default());
        for (v, &i) in packed.iter().zip(&self.indices) {
            out[i] = *v;
        }
    }
}

/// A spatial field together with the frequency mask it is supported on.
#[derive(Debug, Clone)]
pub struct BandField {
    values: Vec<Complex64>,
    mask: Mask,
}

impl BandField {
    /// Project `field` onto the mask. The result satisfies the projector
    /// identity by construction.
    pub fn project(dft: &mut Dft, field: &[Complex64], mask: &Mask) -> Result<Self> {
        dft.grid().check_len(field.len())?;
        if !mask.matches(dft.grid()) {
            return Err(Error::Grid(
                "mask was built for a different grid".to_string(),
            ));
        }
        let mut work = field.to_vec();
        dft.forward(&mut work);
        mask.project_coeffs(&mut work);
        dft.inverse(&mut work);
        Ok(BandField {
            values: work,
            mask: mask.clone(),
        })
    }

    /// Wrap an existing field, verifying that projecting onto the mask
    /// changes it by at most `tol::UNITARY_DEFECT` in relative ℓ².
    pub fn try_new(dft: &mut Dft, field: Vec<Complex64>, mask: &Mask) -> Result<Self> {
        let projected = BandField::project(dft, &field, mask)?;
        let norm = l2_norm(&field);
        let defect = l2_dist(&field, &projected.values);
        if norm > 0.0 && defect > tol::UNITARY_DEFECT * norm {
            return Err(Error::Grid(format!(
                "field is not band limited to the mask: projection defect {:.3e} \
                 exceeds {:.3e} of the field norm",
                defect,
                tol::UNITARY_DEFECT
            )));
        }
        Ok(BandField {
            values: field,
            mask: mask.clone(),
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }
}

/// Band projection of a spatial field: transform, zero off-mask, transform
/// back. Returns the projected spatial field.
pub fn band_project(dft: &mut Dft, field: &[Complex64], mask: &Mask) -> Result<Vec<Complex64>> {
    Ok(BandField::project(dft, field, mask)?.values)
}

/// Fourier multiplier σ_m = (|ξ_m|² + 1)^{s/2} of the operator (-Δ+1)^{s/2}.
/// Radially nondecreasing with σ ≥ 1 for every m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalSymbol {
    s: f64,
}

impl FractionalSymbol {
    /// Order s > 0.
    pub fn new(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Grid(format!("symbol order s = {s} must be positive")));
        }
        Ok(FractionalSymbol { s })
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    /// σ as a function of |ξ|².
    pub fn value_at_sq(&self, freq_norm_sq: f64) -> f64 {
        (freq_norm_sq + 1.0).powf(self.s / 2.0)
    }

    /// σ_m at a lattice point.
    pub fn value(&self, grid: &TorusGrid, flat: usize) -> f64 {
        self.value_at_sq(grid.freq_norm_sq(flat))
    }

    /// Largest σ_m on the grid, attained at the corner of the frequency box.
    pub fn max_on(&self, grid: &TorusGrid) -> f64 {
        let half = (grid.n() / 2) as f64 * grid.freq_unit();
        self.value_at_sq(half * half * grid.dim() as f64)
    }
}

/// Multiply frequency coefficients by σ_m^{power} in place.
pub fn apply_symbol_coeffs(
    grid: &TorusGrid,
    symbol: &FractionalSymbol,
    power: f64,
    coeffs: &mut [Complex64],
) {
    debug_assert_eq!(coeffs.len(), grid.len());
    for flat in 0..grid.len() {
        let mult = symbol.value(grid, flat).powf(power);
        coeffs[flat] *= mult;
    }
}

/// Apply (-Δ+1)^{s·power/2} to a spatial field via the frequency side.
pub fn apply_symbol(
    dft: &mut Dft,
    symbol: &FractionalSymbol,
    power: f64,
    field: &mut [Complex64],
) -> Result<()> {
    dft.grid().check_len(field.len())?;
    dft.forward(field);
    let grid = *dft.grid();
    apply_symbol_coeffs(&grid, symbol, power, field);
    dft.inverse(field);
    Ok(())
}

/// Sobolev norm of order r: (Σ_m (|ξ_m|²+1)^r |û_m|²)^{1/2}. With the
/// unitary transform, r = 0 reproduces the plain ℓ² norm of the field.
pub fn sobolev_norm(dft: &mut Dft, field: &[Complex64], r: f64) -> Result<f64> {
    dft.grid().check_len(field.len())?;
    let mut work = field.to_vec();
    dft.forward(&mut work);
    let grid = dft.grid();
    let mut acc = 0.0;
    for flat in 0..grid.len() {
        let w = (grid.freq_norm_sq(flat) + 1.0).powf(r);
        acc += w * work[flat].norm_sqr();
    }
    Ok(acc.sqrt())
}

/// Plain ℓ² norm of grid values.
pub fn l2_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// ℓ² distance between two fields of equal length.
pub fn l2_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Hermitian inner product ⟨a, b⟩ = Σ conj(a_i)·b_i.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &TorusGrid, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..grid.len())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(TorusGrid::new(0, 8, 1.0).is_err());
        assert!(TorusGrid::new(4, 8, 1.0).is_err());
        assert!(TorusGrid::new(1, 12, 1.0).is_err());
        assert!(TorusGrid::new(1, 4, 1.0).is_err());
        assert!(TorusGrid::new(1, 8, 0.0).is_err());
        assert!(TorusGrid::new(1, 8, -1.0).is_err());
        assert!(TorusGrid::new(3, 16, 2.5).is_ok());
    }

    #[test]
    fn signed_frequencies_follow_fft_order() {
        let grid = TorusGrid::new(1, 8, 1.0).unwrap();
        let ms: Vec<i64> = (0..8).map(|k| grid.signed_freq(k)).collect();
        assert_eq!(ms, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn constant_field_transforms_to_dc_spike() {
        let grid = TorusGrid::new(1, 8, std::f64::consts::TAU).unwrap();
        let mut dft = Dft::new(&grid);
        let mut field = vec![Complex64::new(1.0, 0.0); grid.len()];
        dft.forward(&mut field);
        assert!((field[0].re - 8f64.sqrt()).abs() < 1e-12, "got {}", field[0]);
        assert!(field[0].im.abs() < 1e-12);
        for k in 1..8 {
            assert!(field[k].norm() < 1e-12, "leak at {k}: {}", field[k]);
        }
    }

    #[test]
    fn point_spike_spreads_uniformly() {
        let grid = TorusGrid::new(2, 16, 1.0).unwrap();
        let mut dft = Dft::new(&grid);
        let mut field = vec![Complex64::default(); grid.len()];
        field[37] = Complex64::new(1.0, 0.0);
        dft.forward(&mut field);
        let expect = 1.0 / (grid.len() as f64).sqrt();
        for v in &field {
            assert!((v.norm() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_is_identity_all_dims() {
        for (d, n) in [(1usize, 64usize), (2, 16), (3, 8)] {
            let grid = TorusGrid::new(d, n, 2.7).unwrap();
            let mut dft = Dft::new(&grid);
            let field = random_field(&grid, 11 + d as u64);
            let mut work = field.clone();
            dft.forward(&mut work);
            dft.inverse(&mut work);
            let rel = l2_dist(&field, &work) / l2_norm(&field);
            assert!(rel < tol::UNITARY_DEFECT, "d={d}: round trip defect {rel:.3e}");
        }
    }

    #[test]
    fn parseval_exact() {
        let grid = TorusGrid::new(2, 32, std::f64::consts::TAU).unwrap();
        let mut dft = Dft::new(&grid);
        let field = random_field(&grid, 5);
        let spatial: f64 = field.iter().map(|v| v.norm_sqr()).sum();
        let mut work = field.clone();
        dft.forward(&mut work);
        let spectral: f64 = work.iter().map(|v| v.norm_sqr()).sum();
        assert!(
            (spatial - spectral).abs() <= tol::UNITARY_DEFECT * spatial,
            "Parseval defect: {spatial} vs {spectral}"
        );
    }

    #[test]
    fn forward_matches_plain_dft_small() {
        // Direct O(N²) evaluation of the unitary DFT as an oracle.
        let grid = TorusGrid::new(1, 8, 1.0).unwrap();
        let mut dft = Dft::new(&grid);
        let field = random_field(&grid, 7);
        let mut fast = field.clone();
        dft.forward(&mut fast);
        let n = grid.n();
        for m in 0..n {
            let mut acc = Complex64::default();
            for j in 0..n {
                let phase = -std::f64::consts::TAU * (m * j) as f64 / n as f64;
                acc += field[j] * Complex64::from_polar(1.0, phase);
            }
            acc /= (n as f64).sqrt();
            assert!((acc - fast[m]).norm() < 1e-12);
        }
    }

    #[test]
    fn band_projection_is_projection() {
        let grid = TorusGrid::new(2, 16, 1.0).unwrap();
        let mut dft = Dft::new(&grid);
        let mask = Mask::from_predicate(&grid, |flat| grid.freq_norm_sq(flat) <= (4.0 * grid.freq_unit()).powi(2));
        assert!(!mask.is_empty());
        let f = random_field(&grid, 2);
        let g = random_field(&grid, 3);
        let pf = band_project(&mut dft, &f, &mask).unwrap();
        let pg = band_project(&mut dft, &g, &mask).unwrap();
        let ppf = band_project(&mut dft, &pf, &mask).unwrap();

        // Idempotent.
        let rel = l2_dist(&pf, &ppf) / l2_norm(&pf);
        assert!(rel < tol::UNITARY_DEFECT, "idempotence defect {rel:.3e}");
        // Contractive.
        assert!(l2_norm(&pf) <= l2_norm(&f) * (1.0 + tol::UNITARY_DEFECT));
        // Self-adjoint: ⟨Pf, g⟩ = ⟨f, Pg⟩.
        let lhs = inner(&pf, &g);
        let rhs = inner(&f, &pg);
        assert!((lhs - rhs).norm() < 1e-12 * l2_norm(&f) * l2_norm(&g));
    }

    #[test]
    fn band_field_validation() {
        let grid = TorusGrid::new(1, 16, 1.0).unwrap();
        let mut dft = Dft::new(&grid);
        let mask = Mask::from_predicate(&grid, |flat| grid.freq_int(flat)[0].abs() <= 2);
        let f = random_field(&grid, 9);
        let bf = BandField::project(&mut dft, &f, &mask).unwrap();
        // The projected field passes validation; the raw field does not.
        assert!(BandField::try_new(&mut dft, bf.values().to_vec(), &mask).is_ok());
        assert!(BandField::try_new(&mut dft, f, &mask).is_err());
    }

    #[test]
    fn symbol_values_and_bounds() {
        // |ξ|² = 3 with s = 2: σ = 4, and σ^{1/2} = 2.
        let sym = FractionalSymbol::new(2.0).unwrap();
        assert!((sym.value_at_sq(3.0) - 4.0).abs() < 1e-15);
        assert!((sym.value_at_sq(3.0).powf(0.5) - 2.0).abs() < 1e-15);
        assert!(FractionalSymbol::new(0.0).is_err());
        assert!(FractionalSymbol::new(-1.0).is_err());

        let grid = TorusGrid::new(2, 16, 1.0).unwrap();
        for s in [0.5, 1.0, 1.7, 2.0, 3.0] {
            let sym = FractionalSymbol::new(s).unwrap();
            let mut prev_on_axis = 0.0;
            for flat in 0..grid.len() {
                let v = sym.value(&grid, flat);
                assert!(v >= 1.0, "σ must be ≥ 1, got {v} at {flat}");
                assert!(v <= sym.max_on(&grid) + 1e-12);
                let m = grid.freq_int(flat);
                // Radial monotonicity along the first axis row m = (0,k).
                if m[0] == 0 && m[1] >= 0 {
                    assert!(v >= prev_on_axis - 1e-12);
                    prev_on_axis = v;
                }
            }
        }
    }

    #[test]
    fn symbol_commutes_with_projection() {
        let grid = TorusGrid::new(2, 16, 1.0).unwrap();
        let mut dft = Dft::new(&grid);
        let sym = FractionalSymbol::new(1.3).unwrap();
        let mask = Mask::from_predicate(&grid, |flat| grid.freq_norm_sq(flat) > 9.0);
        let f = random_field(&grid, 21);

        let mut a = band_project(&mut dft, &f, &mask).unwrap();
        apply_symbol(&mut dft, &sym, 1.0, &mut a).unwrap();

        let mut b = f.clone();
        apply_symbol(&mut dft, &sym, 1.0, &mut b).unwrap();
        let b = band_project(&mut dft, &b, &mask).unwrap();

        let rel = l2_dist(&a, &b) / l2_norm(&a);
        assert!(rel < 1e-11, "commutation defect {rel:.3e}");
    }

    #[test]
    fn sobolev_norm_matches_frozen_values() {
        // Unit coefficient at ξ = 0: norm 1 for every r.
        let grid = TorusGrid::new(2, 16, std::f64::consts::TAU).unwrap();
        let mut dft = Dft::new(&grid);
        let mut field = vec![Complex64::default(); grid.len()];
        field[0] = Complex64::new(1.0, 0.0);
        dft.inverse(&mut field);
        for r in [0.0, 0.5, 1.0, 2.0] {
            let v = sobolev_norm(&mut dft, &field, r).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "r={r}: {v}");
        }

        // Unit coefficient at |ξ|² = 3 (the (1,1,1) mode in d = 3, L = 2π),
        // r = 1: norm (3+1)^{1/2}·... = 2.
        let grid3 = TorusGrid::new(3, 8, std::f64::consts::TAU).unwrap();
        let mut dft3 = Dft::new(&grid3);
        let flat = grid3.flat(&[1, 1, 1]);
        assert!((grid3.freq_norm_sq(flat) - 3.0).abs() < 1e-12);
        let mut field3 = vec![Complex64::default(); grid3.len()];
        field3[flat] = Complex64::new(1.0, 0.0);
        dft3.inverse(&mut field3);
        let v = sobolev_norm(&mut dft3, &field3, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "got {v}");

        // r = 0 equals the plain ℓ² norm.
        let f = random_field(&grid, 31);
        let v0 = sobolev_norm(&mut dft, &f, 0.0).unwrap();
        assert!((v0 - l2_norm(&f)).abs() < 1e-12 * l2_norm(&f));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let grid = TorusGrid::new(2, 16, 1.0).unwrap();
        let mut dft = Dft::new(&grid);
        let short = vec![Complex64::default(); 17];
        assert!(matches!(
            sobolev_norm(&mut dft, &short, 0.0),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
