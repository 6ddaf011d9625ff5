//! Depolarization of Gaussian pulses by polarization mode dispersion.
//!
//! A fiber realization splits the pulse energy between the two principal
//! states (fractions `(1 ± η)/2`) and delays one replica by the differential
//! group delay `δτ`. The replicas only partly overlap in time, so the output
//! polarization is partially mixed with degree
//!
//! ```text
//! DOP = sqrt(η² + (1 − η²) k),    k = exp(−δτ² / 4σ²)
//! ```
//!
//! Over fiber realizations `δτ` is Maxwell distributed with rms `Δτ` (the PMD)
//! and `η` is uniform on `[−1, 1]`. Integrating out both gives the prior
//! density of the DOP, evaluated here by adaptive quadrature.
//!
//! All times are in picoseconds.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

use libm::{cos, erf, exp, expm1, log, log1p, sin, sqrt};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{check_unit, domain, Error, Result};
use crate::quad::{self, integrate, Tolerance};

/// Maxwell tail mass beyond this many rms DGDs is below 1e-20.
const DGD_CUTOFF_RMS: f64 = 6.0;

/// Tolerance for the normalization of tabulated densities.
pub const NORMALIZATION_TOL: f64 = 1e-4;

/// Default number of points in a prior table.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Smallest accepted table size.
pub const MIN_GRID_POINTS: usize = 101;

fn positive_finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(domain(name, v, "must be positive and finite"))
    }
}

/// Gaussian input pulse, intensity `I(t) ∝ exp(−t²/2σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    sigma: f64,
}

impl GaussianPulse {
    pub fn new(sigma_ps: f64) -> Result<Self> {
        positive_finite("sigma", sigma_ps).map(|sigma| Self { sigma })
    }

    /// Temporal spread σ in picoseconds.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Squared temporal overlap `k = exp(−δτ²/4σ²)` of the two principal-state
    /// replicas separated by `dgd`.
    pub fn coherence_factor(&self, dgd: f64) -> f64 {
        exp(-self.delay_exponent(dgd))
    }

    /// `1 − k`, accurate for small delays.
    fn incoherence(&self, dgd: f64) -> f64 {
        -expm1(-self.delay_exponent(dgd))
    }

    fn delay_exponent(&self, dgd: f64) -> f64 {
        let r = dgd / (2.0 * self.sigma);
        r * r
    }

    /// Delay at which the coherence factor drops to `k`, for `0 < k <= 1`.
    fn delay_for_coherence(&self, k: f64) -> f64 {
        2.0 * self.sigma * sqrt(-log(k))
    }
}

/// PMD of a fiber: the rms differential group delay Δτ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberPmd {
    rms: f64,
}

impl FiberPmd {
    pub fn new(pmd_rms_ps: f64) -> Result<Self> {
        positive_finite("pmd_rms", pmd_rms_ps).map(|rms| Self { rms })
    }

    /// Δτ in picoseconds.
    pub fn rms(&self) -> f64 {
        self.rms
    }

    /// Per-axis standard deviation `Δτ/√3` of the Maxwell law.
    fn scale(&self) -> f64 {
        self.rms / sqrt(3.0)
    }

    /// Maxwell density of the DGD, `3·√(6/π)·δτ²/Δτ³·exp(−3δτ²/2Δτ²)`.
    /// Zero for negative or infinite `dgd`.
    pub fn dgd_pdf(&self, dgd: f64) -> f64 {
        if !(dgd >= 0.0 && dgd.is_finite()) {
            return 0.0;
        }
        let r = dgd / self.rms;
        3.0 * sqrt(6.0 / PI) * r * r / self.rms * exp(-1.5 * r * r)
    }

    /// Maxwell cumulative distribution of the DGD.
    pub fn dgd_cdf(&self, dgd: f64) -> f64 {
        if dgd <= 0.0 {
            return 0.0;
        }
        if dgd.is_infinite() {
            return 1.0;
        }
        let z = dgd / self.scale();
        // erf(z/√2) − √(2/π)·z·exp(−z²/2)
        erf(z / SQRT_2) - FRAC_2_SQRT_PI / SQRT_2 * z * exp(-0.5 * z * z)
    }

    /// Draws one DGD as the norm of three independent `N(0, Δτ²/3)` components.
    pub fn sample_dgd<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let normal = Normal::new(0.0, self.scale()).expect("scale is positive and finite");
        let (x, y, z) = (normal.sample(rng), normal.sample(rng), normal.sample(rng));
        sqrt(x * x + y * y + z * z)
    }

    fn cutoff(&self) -> f64 {
        DGD_CUTOFF_RMS * self.rms
    }
}

/// Maxwell density of the DGD for rms `pmd_rms`.
pub fn maxwell_pdf(dgd: f64, pmd_rms: f64) -> Result<f64> {
    if !(dgd >= 0.0) {
        return Err(domain("dgd", dgd, "must be non-negative"));
    }
    Ok(FiberPmd::new(pmd_rms)?.dgd_pdf(dgd))
}

/// Draws a DGD from the Maxwell law with rms `pmd_rms`.
pub fn sample_dgd<R: Rng + ?Sized>(pmd_rms: f64, rng: &mut R) -> Result<f64> {
    Ok(FiberPmd::new(pmd_rms)?.sample_dgd(rng))
}

/// `k = exp(−δτ²/4σ²)`.
pub fn coherence_factor(dgd: f64, pulse: &GaussianPulse) -> f64 {
    pulse.coherence_factor(dgd)
}

/// One state of the fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmdRealization {
    dgd: f64,
    eta: f64,
    ps_axis: [f64; 3],
    phase: f64,
}

impl PmdRealization {
    /// `ps_axis` must be a unit vector within 1e-12; `phase` is reduced to `[0, 2π)`.
    pub fn new(dgd: f64, eta: f64, ps_axis: [f64; 3], phase: f64) -> Result<Self> {
        if !(dgd >= 0.0 && dgd.is_finite()) {
            return Err(domain("dgd", dgd, "must be non-negative and finite"));
        }
        if !(-1.0..=1.0).contains(&eta) {
            return Err(domain("eta", eta, "must lie in [-1, 1]"));
        }
        let norm = norm3(ps_axis);
        if !(libm::fabs(norm - 1.0) <= 1e-12) {
            return Err(domain("|ps_axis|", norm, "must be 1 within 1e-12"));
        }
        if !phase.is_finite() {
            return Err(domain("phase", phase, "must be finite"));
        }
        let phase = libm::fmod(phase, 2.0 * PI);
        let phase = if phase < 0.0 { phase + 2.0 * PI } else { phase };
        Ok(Self {
            dgd,
            eta,
            ps_axis,
            phase,
        })
    }

    pub fn dgd(&self) -> f64 {
        self.dgd
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn ps_axis(&self) -> [f64; 3] {
        self.ps_axis
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Bloch (normalized Stokes) vector of a single-photon polarization state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    m: [f64; 3],
}

impl BlochState {
    pub fn new(m: [f64; 3]) -> Result<Self> {
        let n = norm3(m);
        if !(n <= 1.0 + 1e-12) {
            return Err(domain("|m|", n, "must not exceed 1"));
        }
        Ok(Self { m })
    }

    pub fn vector(&self) -> [f64; 3] {
        self.m
    }

    /// Degree of polarization `|m|`.
    pub fn dop(&self) -> f64 {
        norm3(self.m)
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

/// Orthonormal pair `(e1, e2)` spanning the plane orthogonal to unit `axis`,
/// with `(e1, e2, axis)` right-handed.
///
/// `e1` is the Gram–Schmidt projection of the coordinate axis least aligned
/// with `axis` (lowest index on ties); `e2 = axis × e1`.
pub fn transverse_frame(axis: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let abs = axis.map(libm::fabs);
    let mut pick = 0;
    for i in 1..3 {
        if abs[i] < abs[pick] {
            pick = i;
        }
    }
    let mut e = [0.0; 3];
    e[pick] = 1.0;
    let dot = axis[pick];
    let mut e1 = [
        e[0] - dot * axis[0],
        e[1] - dot * axis[1],
        e[2] - dot * axis[2],
    ];
    let n = norm3(e1);
    e1 = e1.map(|c| c / n);
    let e2 = [
        axis[1] * e1[2] - axis[2] * e1[1],
        axis[2] * e1[0] - axis[0] * e1[2],
        axis[0] * e1[1] - axis[1] * e1[0],
    ];
    (e1, e2)
}

/// `√(η² + (1 − η²)k)`; independent of the principal-state axis and phase.
pub fn dop_of_realization(r: &PmdRealization, pulse: &GaussianPulse) -> f64 {
    let eta2 = r.eta * r.eta;
    let k = pulse.coherence_factor(r.dgd);
    f64::min(sqrt(eta2 + (1.0 - eta2) * k), 1.0)
}

/// Bloch vector `η·a + √((1 − η²)k)·(cos φ·e1 + sin φ·e2)` with `a` the
/// principal-state axis and `(e1, e2)` from [`transverse_frame`].
pub fn bloch_of_realization(r: &PmdRealization, pulse: &GaussianPulse) -> BlochState {
    let a = r.ps_axis;
    let (e1, e2) = transverse_frame(a);
    let k = pulse.coherence_factor(r.dgd);
    let t = sqrt((1.0 - r.eta * r.eta) * k);
    let (c, s) = (cos(r.phase), sin(r.phase));
    let m = core::array::from_fn(|i| r.eta * a[i] + t * (c * e1[i] + s * e2[i]));
    BlochState { m }
}

/// Splits the DGD range above the threshold `dgd_min(m)` into a
/// singular part, integrated in `u = √(m² − k)`, and a regular part.
struct DopIntegral<'a> {
    fiber: &'a FiberPmd,
    pulse: &'a GaussianPulse,
    m: f64,
    /// `u` at the end of the substituted region.
    u_split: f64,
    /// DGD at the end of the substituted region.
    dgd_split: f64,
    dgd_hi: f64,
}

impl<'a> DopIntegral<'a> {
    /// `None` when the whole range lies beyond the DGD cutoff.
    fn new(m: f64, fiber: &'a FiberPmd, pulse: &'a GaussianPulse) -> Option<Self> {
        let dgd_hi = fiber.cutoff();
        let m2 = m * m;
        let k_hi = pulse.coherence_factor(dgd_hi);
        if k_hi >= m2 {
            return None;
        }
        let k_split = f64::max(0.5 * m2, k_hi);
        let dgd_split = if k_split == k_hi {
            dgd_hi
        } else {
            pulse.delay_for_coherence(k_split)
        };
        Some(Self {
            fiber,
            pulse,
            m,
            u_split: sqrt(m2 - k_split),
            dgd_split,
            dgd_hi,
        })
    }

    /// Maps `u` to `(dgd, k, 1 − k, dδτ/du)`.
    fn at_u(&self, u: f64) -> (f64, f64, f64, f64) {
        let s = self.pulse.sigma;
        let one_minus_k = (1.0 - self.m) * (1.0 + self.m) + u * u;
        let k = (self.m - u) * (self.m + u);
        // −ln k, taken from whichever of k and 1 − k is known to full precision.
        let neg_log_k = if k < 0.5 {
            -log(k)
        } else {
            -log1p(-one_minus_k)
        };
        let dgd = 2.0 * s * sqrt(neg_log_k);
        let jac = 4.0 * s * s * u / (dgd * k);
        (dgd, k, one_minus_k, jac)
    }

    /// `∫ ρ(δτ)·g(δτ, k, 1−k, η_min) dδτ` over `[dgd_min(m), cutoff]`.
    fn integrate<G: Fn(f64, f64, f64, f64) -> f64>(&self, g: G) -> f64 {
        let tol = Tolerance::default();
        let m2 = self.m * self.m;
        let near = integrate(
            |u| {
                let (dgd, k, omk, jac) = self.at_u(u);
                if !(jac.is_finite()) || dgd == 0.0 {
                    return 0.0;
                }
                self.fiber.dgd_pdf(dgd) * jac * g(dgd, k, omk, u / sqrt(omk))
            },
            0.0,
            self.u_split,
            tol,
        );
        let far = integrate(
            |dgd| {
                let k = self.pulse.coherence_factor(dgd);
                let omk = self.pulse.incoherence(dgd);
                self.fiber.dgd_pdf(dgd) * g(dgd, k, omk, sqrt((m2 - k) / omk))
            },
            self.dgd_split,
            self.dgd_hi,
            tol,
        );
        near.value + far.value
    }
}

/// Probability that the DOP is at least `m`:
/// `∫ ρ(δτ)·(1 − η_min(m, δτ)) dδτ` with `η_min = √(max(0, (m² − k)/(1 − k)))`.
pub fn survival(m: f64, fiber: &FiberPmd, pulse: &GaussianPulse) -> Result<f64> {
    let m = check_unit("m", m)?;
    if m == 0.0 {
        return Ok(1.0);
    }
    if m == 1.0 {
        return Ok(0.0);
    }
    // Below dgd_min the coherence alone keeps the DOP above m for every η.
    let dgd_min = pulse.delay_for_coherence(m * m);
    let below = fiber.dgd_cdf(dgd_min);
    let above = DopIntegral::new(m, fiber, pulse)
        .map(|i| i.integrate(|_, _, _, eta_min| 1.0 - eta_min))
        .unwrap_or(0.0);
    Ok((below + above).clamp(0.0, 1.0))
}

/// Prior density of the DOP, `−d/dm survival(m)`:
/// `∫_{δτ_min(m)} ρ(δτ)·m/√((1 − k)(m² − k)) dδτ`.
///
/// The integrand has an inverse-square-root singularity at `δτ_min(m)`; the
/// region where `k ≥ m²/2` is integrated in `u = √(m² − k)`, where it is
/// bounded. The DGD range is cut at 6Δτ.
pub fn prior_density(m: f64, fiber: &FiberPmd, pulse: &GaussianPulse) -> Result<f64> {
    if !(m > 0.0 && m <= 1.0) {
        return Err(domain("m", m, "must lie in (0, 1]"));
    }
    Ok(DopIntegral::new(m, fiber, pulse)
        .map(|i| i.integrate(|_, _, omk, eta_min| m / (omk * eta_min)))
        .unwrap_or(0.0))
}

/// Tabulated DOP density on a grid over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DopPrior {
    grid: Vec<f64>,
    density: Vec<f64>,
    pmd_rms: f64,
    sigma: f64,
}

impl DopPrior {
    /// Validates a tabulated density. `pmd_rms` and `sigma` are labels only;
    /// the uniform limit uses `pmd_rms = ∞`.
    pub fn new(grid: Vec<f64>, density: Vec<f64>, pmd_rms: f64, sigma: f64) -> Result<Self> {
        validate_density(&grid, &density)?;
        Ok(Self {
            grid,
            density,
            pmd_rms,
            sigma,
        })
    }

    /// Uniform density on `n` points, the limit `Δτ/σ → ∞`.
    pub fn uniform(n_points: usize) -> Result<Self> {
        check_points(n_points)?;
        Self::new(
            quad::unit_grid(n_points),
            alloc::vec![1.0; n_points],
            f64::INFINITY,
            f64::NAN,
        )
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn pmd_rms(&self) -> f64 {
        self.pmd_rms
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Trapezoidal mass of the table.
    pub fn mass(&self) -> f64 {
        quad::trapezoid(&self.grid, &self.density)
    }

    /// Trapezoidal mean DOP.
    pub fn mean(&self) -> f64 {
        let weighted: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(m, d)| m * d)
            .collect();
        quad::trapezoid(&self.grid, &weighted) / self.mass()
    }

    /// Copy rescaled to unit trapezoidal mass.
    pub fn normalized(&self) -> Self {
        let z = self.mass();
        Self {
            density: self.density.iter().map(|d| d / z).collect(),
            ..self.clone()
        }
    }
}

/// Checks the grid/density invariants shared by priors and posteriors.
pub(crate) fn validate_density(grid: &[f64], density: &[f64]) -> Result<()> {
    if grid.len() != density.len() {
        return Err(Error::InvalidGrid("grid and density differ in length"));
    }
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("fewer than two points"));
    }
    if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
        return Err(Error::InvalidGrid("endpoints must be 0 and 1"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("grid must be strictly increasing"));
    }
    if let Some(&bad) = density.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(domain("density", bad, "must be finite and non-negative"));
    }
    let integral = quad::trapezoid(grid, density);
    if !(libm::fabs(integral - 1.0) <= NORMALIZATION_TOL) {
        return Err(Error::NotNormalized {
            integral,
            tolerance: NORMALIZATION_TOL,
        });
    }
    Ok(())
}

fn check_points(n_points: usize) -> Result<()> {
    if n_points < MIN_GRID_POINTS {
        return Err(domain("n_points", n_points as f64, "must be at least 101"));
    }
    Ok(())
}

/// Tabulates [`prior_density`] on a uniform grid of `n_points` over `[0, 1]`.
///
/// The density is not defined at `m = 0`. Its limit there is zero but is
/// reached only logarithmically (the threshold delay grows like `√ln(1/m)`),
/// so the density rises to its interior level within a vanishing distance of
/// the origin. The first entry is therefore set so that the trapezoid over the
/// first cell `[0, h]` carries the exact mass `1 − survival(h)`.
pub fn prior_table(fiber: &FiberPmd, pulse: &GaussianPulse, n_points: usize) -> Result<DopPrior> {
    check_points(n_points)?;
    let grid = quad::unit_grid(n_points);
    let mut density = grid[1..]
        .iter()
        .map(|&m| prior_density(m, fiber, pulse))
        .collect::<Result<Vec<_>>>()?;
    let h = grid[1];
    let first_cell = 1.0 - survival(h, fiber, pulse)?;
    density.insert(0, f64::max(2.0 * first_cell / h - density[0], 0.0));
    DopPrior::new(grid, density, fiber.rms, pulse.sigma)
}

/// Tabulates the prior at [`DEFAULT_GRID_POINTS`].
pub fn default_prior_table(fiber: &FiberPmd, pulse: &GaussianPulse) -> Result<DopPrior> {
    prior_table(fiber, pulse, DEFAULT_GRID_POINTS)
}
