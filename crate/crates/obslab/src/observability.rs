//! Spectral concentration on observation sets and the resulting
//! observability constants.
//!
//! Fix a frequency mask M and an observation set Ω on the grid. The
//! concentration operator on band coefficients c ∈ ℂ^|M| is
//!
//!   A = P_M F χ_Ω F⁻¹ P_M*,
//!
//! with F the unitary DFT and P_M the band projection: synthesize the band
//! field, keep only the part over Ω, transform back and restrict to the
//! band again. A is Hermitian with spectrum in [0, 1], and for every band
//! field w
//!
//!   ‖w‖² ≤ λ_min(A)⁻¹ ‖w‖²_{L²(Ω)},
//!
//! so C = λ_min(A)^{-1/2} is the smallest constant in the concentration
//! inequality. λ_min below `tol::EIG_FLOOR` reports C = +∞.
//!
//! Two eigenvalue paths exist and are cross-checked in the tests:
//!
//! * dense: A is a convolution-style Gram matrix, A_{m,m'} =
//!   N^{-d/2}·χ̂_Ω[(m - m') mod N], built from one DFT of the indicator
//!   and handed to a dense Hermitian solver;
//! * iterative: Lanczos on the complement operator B = P_M χ_{Ωᶜ} P_M
//!   (each application costs two FFTs), with λ_min(A) = 1 - λ_max(B).

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eig::{dense_hermitian_min, lanczos_max, LanczosOptions};
use crate::error::{Error, Result};
use crate::geometry::SetSpec;
use crate::lattice::{Dft, Mask, TorusGrid};
use crate::spectra::{region_mask, SpectralRegion};
use crate::tol;

/// Eigenvalue path selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Dense below `tol::DENSE_AUTO_LIMIT` band points, Lanczos above.
    Auto,
    Dense,
    Iterative,
}

/// Which path actually ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodUsed {
    Dense,
    Iterative,
}

impl std::fmt::Display for MethodUsed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MethodUsed::Dense => write!(f, "dense"),
            MethodUsed::Iterative => write!(f, "iterative"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationEig {
    pub lambda_min: f64,
    pub method: MethodUsed,
    /// ‖A v - λ v‖ for the returned eigenpair.
    pub residual: f64,
    /// Lanczos iterations; 0 for the dense path.
    pub iterations: usize,
}

/// Concentration of a frequency band on a spatial observation set.
pub struct ConcentrationProblem {
    grid: TorusGrid,
    mask: Mask,
    omega: Vec<bool>,
    omega_count: usize,
    dft: Dft,
    /// Full-lattice scratch buffer reused by the matvecs.
    buf: Vec<Complex64>,
}

impl ConcentrationProblem {
    /// Rasterize the observation set and build the problem.
    pub fn new(grid: &TorusGrid, mask: Mask, observed: &SetSpec) -> Result<Self> {
        let omega = observed.indicator(grid)?;
        Self::from_indicator(grid, mask, omega)
    }

    /// Build from a precomputed indicator (one entry per grid node).
    pub fn from_indicator(grid: &TorusGrid, mask: Mask, omega: Vec<bool>) -> Result<Self> {
        if !mask.matches(grid) {
            return Err(Error::Geometry(
                "frequency mask was built for a different grid".into(),
            ));
        }
        if omega.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: omega.len(),
            });
        }
        let omega_count = omega.iter().filter(|&&b| b).count();
        Ok(ConcentrationProblem {
            grid: grid.clone(),
            dft: Dft::new(grid),
            buf: vec![Complex64::default(); grid.len()],
            mask,
            omega,
            omega_count,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn band_size(&self) -> usize {
        self.mask.count()
    }

    /// |Ω| / N^d.
    pub fn omega_fraction(&self) -> f64 {
        self.omega_count as f64 / self.grid.len() as f64
    }

    /// y = A x on packed band coefficients (2 FFTs).
    pub fn matvec(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        self.restricted_matvec(x, y, true);
    }

    /// y = B x with B = P_M χ_{Ωᶜ} P_M, so A = I - B on the band.
    pub fn complement_matvec(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        self.restricted_matvec(x, y, false);
    }

    fn restricted_matvec(&mut self, x: &[Complex64], y: &mut [Complex64], keep_inside: bool) {
        debug_assert_eq!(x.len(), self.mask.count());
        debug_assert_eq!(y.len(), self.mask.count());
        self.mask.scatter(x, &mut self.buf);
        self.dft.inverse(&mut self.buf);
        for (v, &inside) in self.buf.iter_mut().zip(&self.omega) {
            if inside != keep_inside {
                *v = Complex64::default();
            }
        }
        self.dft.forward(&mut self.buf);
        for (out, &i) in y.iter_mut().zip(self.mask.indices()) {
            *out = self.buf[i];
        }
    }

    /// Dense Gram matrix of A from a single DFT of the indicator.
    pub fn dense_gram(&mut self) -> Result<DMatrix<Complex64>> {
        let n_band = self.mask.count();
        if n_band > tol::DENSE_GRAM_CAP {
            return Err(Error::Geometry(format!(
                "dense path supports bands up to {} points, this one has {n_band}; \
                 use the iterative method",
                tol::DENSE_GRAM_CAP
            )));
        }
        for (v, &inside) in self.buf.iter_mut().zip(&self.omega) {
            *v = if inside {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            };
        }
        self.dft.forward(&mut self.buf);
        let scale = 1.0 / (self.grid.len() as f64).sqrt();
        let n = self.grid.n();
        let d = self.grid.dim();
        let coords: Vec<[usize; 3]> = self
            .mask
            .indices()
            .iter()
            .map(|&flat| self.grid.coords(flat))
            .collect();
        let gram = DMatrix::from_fn(n_band, n_band, |r, c| {
            let mut diff = [0usize; 3];
            for a in 0..d {
                diff[a] = (coords[r][a] + n - coords[c][a]) % n;
            }
            self.buf[self.grid.flat(&diff[..d])] * scale
        });
        Ok(gram)
    }

    /// Smallest eigenvalue of the concentration operator.
    pub fn smallest_eigenvalue(
        &mut self,
        method: SolveMethod,
        opts: &LanczosOptions,
    ) -> Result<ConcentrationEig> {
        let use_dense = match method {
            SolveMethod::Dense => true,
            SolveMethod::Iterative => false,
            SolveMethod::Auto => self.band_size() <= tol::DENSE_AUTO_LIMIT,
        };
        if use_dense {
            let gram = self.dense_gram()?;
            let eig = dense_hermitian_min(&gram);
            Ok(ConcentrationEig {
                lambda_min: eig.value,
                method: MethodUsed::Dense,
                residual: eig.residual,
                iterations: 0,
            })
        } else {
            let dim = self.band_size();
            let eig = lanczos_max(dim, 1.0, opts, |x, y| self.complement_matvec(x, y))?;
            // A = I - B on the band: the eigenpair transfers with the same
            // residual, and roundoff may leave λ a hair outside [0, 1].
            let lambda = (1.0 - eig.value).clamp(0.0, 1.0);
            Ok(ConcentrationEig {
                lambda_min: lambda,
                method: MethodUsed::Iterative,
                residual: eig.residual,
                iterations: eig.iterations,
            })
        }
    }
}

/// Concentration constant C = λ_min^{-1/2}, +∞ once λ_min falls below
/// `tol::EIG_FLOOR` (the inequality is then empty at working precision).
pub fn pls_constant(lambda_min: f64) -> f64 {
    if lambda_min < tol::EIG_FLOOR {
        f64::INFINITY
    } else {
        1.0 / lambda_min.sqrt()
    }
}

/// One row of a radius sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub radius: f64,
    pub beta: f64,
    pub delta: f64,
    pub lambda_min: f64,
    /// +∞ when λ_min is at the floor.
    pub pls_constant: f64,
    pub mask_size: usize,
    pub method: MethodUsed,
    pub residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub radii: Vec<f64>,
    pub beta: f64,
    /// Dilation radius applied to the observation set (0 = none; kept for
    /// exploratory runs only).
    pub delta: f64,
    pub method: SolveMethod,
    pub lanczos: LanczosOptions,
}

/// Concentration constants for a family of annuli over one observation set.
pub fn radius_sweep(
    grid: &TorusGrid,
    observed: &SetSpec,
    cfg: &SweepConfig,
) -> Result<Vec<SweepPoint>> {
    if !(cfg.delta.is_finite() && cfg.delta >= 0.0) {
        return Err(Error::Geometry(format!(
            "dilation radius {} must be ≥ 0",
            cfg.delta
        )));
    }
    if cfg.radii.is_empty() {
        return Err(Error::Geometry("radius sweep needs at least one radius".into()));
    }
    let dilated = if cfg.delta > 0.0 {
        SetSpec::Dilate {
            term: Box::new(observed.clone()),
            radius: cfg.delta,
        }
    } else {
        observed.clone()
    };
    let omega = dilated.indicator(grid)?;
    let mut out = Vec::with_capacity(cfg.radii.len());
    for &radius in &cfg.radii {
        let start = Instant::now();
        let mask = region_mask(
            grid,
            &SpectralRegion::Annulus {
                radius,
                beta: cfg.beta,
            },
        )?;
        let mask_size = mask.count();
        let mut problem = ConcentrationProblem::from_indicator(grid, mask, omega.clone())?;
        let eig = problem.smallest_eigenvalue(cfg.method, &cfg.lanczos)?;
        out.push(SweepPoint {
            radius,
            beta: cfg.beta,
            delta: cfg.delta,
            lambda_min: eig.lambda_min,
            pls_constant: pls_constant(eig.lambda_min),
            mask_size,
            method: eig.method,
            residual: eig.residual,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

/// The three bound shapes relating concentration constants to control and
/// shell parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    /// (C₀/γ)^{C₀·β·ℓ}.
    Control,
    /// C₁·(ℓ/δ)^{d+1}·(C₀/γ)^{C₀·β·ℓ}.
    ControlDilation,
    /// (C₂/γ)^{C₂·β·ℓ}.
    Shell,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundParams {
    /// Control fraction γ ∈ (0, 1).
    pub gamma: f64,
    pub beta: f64,
    pub ell: f64,
    /// Needed by the dilation-aware form.
    pub delta: Option<f64>,
    pub dim: usize,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BoundParams {
    pub fn new(gamma: f64, beta: f64, ell: f64) -> Self {
        BoundParams {
            gamma,
            beta,
            ell,
            delta: None,
            dim: 2,
            c0: 10.0,
            c1: 10.0,
            c2: 10.0,
        }
    }
}

/// Evaluate the chosen bound form. γ outside (0, 1) is an error: the
/// estimate is vacuous without control, and γ = 1 means full observation
/// where no bound is needed.
pub fn theoretical_bound(form: BoundForm, p: &BoundParams) -> Result<f64> {
    if !(p.gamma > 0.0 && p.gamma < 1.0) {
        return Err(Error::GammaOutOfRange { gamma: p.gamma });
    }
    for (v, what) in [(p.beta, "beta"), (p.ell, "ell")] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Geometry(format!("{what} = {v} must be positive")));
        }
    }
    match form {
        BoundForm::Control => Ok((p.c0 / p.gamma).powf(p.c0 * p.beta * p.ell)),
        BoundForm::Shell => Ok((p.c2 / p.gamma).powf(p.c2 * p.beta * p.ell)),
        BoundForm::ControlDilation => {
            let delta = p.delta.ok_or_else(|| {
                Error::Geometry("the dilation-aware bound needs delta".into())
            })?;
            if !(delta.is_finite() && delta > 0.0) {
                return Err(Error::Geometry(format!("delta = {delta} must be positive")));
            }
            let base = (p.c0 / p.gamma).powf(p.c0 * p.beta * p.ell);
            Ok(p.c1 * (p.ell / delta).powi(p.dim as i32 + 1) * base)
        }
    }
}
