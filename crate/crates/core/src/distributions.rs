//! Arrival-time densities on time grids.
//!
//! Every variant is a quadrature over the momentum grid.  The single-integral
//! variants share one core: `Pi(t) = p * |sum_j c_j e^{-i omega_j t}|^2` with
//! per-node coefficients `c_j` fixed up front, so a full time grid costs
//! `O(n_k * n_t)`.  The finite-absorber variants contract a precomputed
//! kernel matrix (`O(n_k^2)` setup, `O(n_k^2)` per time point) and are meant
//! for validation runs with modest grids.

use num_complex::Complex64;

use crate::kernels::finite_eps_kernel_matrix;
use crate::potential::PotentialProfile;
use crate::scattering::{log_abs_transmission, phase_and_derivative, BoundaryCondition};
use crate::wavepacket::{phase_slope_at_peak, GaussianSpec, MomentumAmplitude};
use crate::{Error, Result, Units};

/// Which density a [`TimeDistribution`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionVariant {
    /// Kijowski density for a positive-momentum packet.
    Kijowski,
    /// Operator-normalized free arrival density (identical to Kijowski).
    OnFree,
    /// Operator-normalized density for a general free state: independent
    /// positive- and negative-momentum contributions.
    OnGeneral,
    /// Operator-normalized density behind a barrier (transmission phase only).
    OnBarrier,
    /// Kijowski density of the renormalized transmitted packet.
    KijowskiTransmittedNormalized,
    /// Joint arrival-and-transmission density (integrates to the
    /// transmission probability).
    TildeOnBarrier,
    /// Finite-width absorber density (raw absorption rate or its
    /// operator-normalized form).
    FiniteEps,
}

/// Sampled density on a uniform time grid.
#[derive(Debug, Clone)]
pub struct TimeDistribution {
    pub t_grid: Vec<f64>,
    pub density: Vec<f64>,
    pub variant: DistributionVariant,
    /// Trapezoid integral over the grid.
    pub total: f64,
}

impl TimeDistribution {
    pub fn new(t_grid: Vec<f64>, density: Vec<f64>, variant: DistributionVariant) -> Result<Self> {
        if t_grid.len() != density.len() || t_grid.len() < 2 {
            return Err(Error::Config("time grid/density length mismatch".into()));
        }
        if let Some(bad) = density.iter().find(|d| **d < -1e-12 || !d.is_finite()) {
            return Err(Error::Consistency(format!(
                "density must be >= -1e-12 and finite, got {bad}"
            )));
        }
        let total = trapezoid(&t_grid, &density);
        Ok(TimeDistribution {
            t_grid,
            density,
            variant,
            total,
        })
    }

    /// First moment `int t Pi dt / int Pi dt` by trapezoid.
    pub fn mean(&self) -> f64 {
        let weighted: Vec<f64> = self
            .t_grid
            .iter()
            .zip(&self.density)
            .map(|(t, d)| t * d)
            .collect();
        trapezoid(&self.t_grid, &weighted) / self.total
    }

    pub fn peak(&self) -> (f64, f64) {
        let mut best = (self.t_grid[0], self.density[0]);
        for (t, d) in self.t_grid.iter().zip(&self.density) {
            if *d > best.1 {
                best = (*t, *d);
            }
        }
        best
    }

    /// Largest pointwise difference against a distribution on the same grid.
    pub fn sup_diff(&self, other: &TimeDistribution) -> Result<f64> {
        if self.t_grid.len() != other.t_grid.len() {
            return Err(Error::Config("grids differ".into()));
        }
        Ok(self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Uniform time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl TimeWindow {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_min < t_max) || n < 2 {
            return Err(Error::Config(format!(
                "bad time window [{t_min}, {t_max}] with {n} points"
            )));
        }
        Ok(TimeWindow { t_min, t_max, n })
    }

    /// Default window for a Gaussian packet: `|x0|/v0 +/- 12 sigma_t` with
    /// 1200 points, `sigma_t` from the position spread at arrival (initial
    /// width plus dispersion broadening) over the mean velocity.
    pub fn auto(spec: &GaussianSpec, units: Units) -> Result<Self> {
        if !(spec.v0 > 0.0) {
            return Err(Error::Config(
                "auto window needs a right-moving packet (v0 > 0)".into(),
            ));
        }
        let t_peak = spec.x0.abs() / spec.v0;
        let spread_at_arrival = (spec.dx * spec.dx
            + (units.hbar * spec.dk() * t_peak / units.mass).powi(2))
        .sqrt();
        let sigma_t = spread_at_arrival / spec.v0;
        TimeWindow::new(t_peak - 12.0 * sigma_t, t_peak + 12.0 * sigma_t, 1200)
    }

    /// Auto window estimated from an amplitude's own moments (mean speed,
    /// spread, and the mean-position phase slope).
    pub fn auto_for_amp(amp: &MomentumAmplitude, units: Units) -> Result<Self> {
        let abs_k_mean = amp.weighted_sum(|k, v| k.abs() * v.norm_sqr());
        let k2_mean = amp.weighted_sum(|k, v| k * k * v.norm_sqr());
        if !(abs_k_mean > 0.0) {
            return Err(Error::Config("amplitude has zero mean speed".into()));
        }
        let dk = (k2_mean - abs_k_mean * abs_k_mean).max(1e-30).sqrt();
        let x0 = phase_slope_at_peak(amp)?.abs();
        let v = units.hbar * abs_k_mean / units.mass;
        let t_peak = x0 / v;
        let dx = 1.0 / (2.0 * dk);
        let spread = (dx * dx + (units.hbar * dk * t_peak / units.mass).powi(2)).sqrt();
        let sigma_t = (spread / v).max(1e-6 * t_peak.max(1.0));
        TimeWindow::new(t_peak - 12.0 * sigma_t, t_peak + 12.0 * sigma_t, 1200)
    }

    pub fn grid(&self) -> Vec<f64> {
        let dt = (self.t_max - self.t_min) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.t_min + dt * i as f64).collect()
    }
}

/// One `p |sum c_j e^{-i omega_j t}|^2` channel.
struct Channel {
    omega: Vec<f64>,
    coeff: Vec<Complex64>,
    prefactor: f64,
}

impl Channel {
    fn density(&self, t: f64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, c) in self.omega.iter().zip(&self.coeff) {
            acc += c * Complex64::from_polar(1.0, -w * t);
        }
        self.prefactor * acc.norm_sqr()
    }
}

fn omega_grid(ks: &[f64], units: Units) -> Vec<f64> {
    ks.iter()
        .map(|k| units.hbar * k * k / (2.0 * units.mass))
        .collect()
}

fn kijowski_prefactor(units: Units) -> f64 {
    units.hbar / (2.0 * std::f64::consts::PI * units.mass)
}

/// Kijowski channel with an optional extra per-node factor.
fn kijowski_channel<F: Fn(f64) -> Result<Complex64>>(
    amp: &MomentumAmplitude,
    extra: F,
    units: Units,
) -> Result<Channel> {
    let mut coeff = Vec::with_capacity(amp.len());
    for ((k, v), w) in amp.grid().iter().zip(amp.values()).zip(amp.weights()) {
        if *k <= 0.0 {
            return Err(Error::Domain(
                "Kijowski channel needs positive momenta".into(),
            ));
        }
        coeff.push(w * v * k.sqrt() * extra(*k)?);
    }
    Ok(Channel {
        omega: omega_grid(amp.grid(), units),
        coeff,
        prefactor: kijowski_prefactor(units),
    })
}

fn one(_: f64) -> Result<Complex64> {
    Ok(Complex64::new(1.0, 0.0))
}

/// Kijowski density at a single time.
pub fn kijowski(amp: &MomentumAmplitude, t: f64, units: Units) -> Result<f64> {
    Ok(kijowski_channel(amp, one, units)?.density(t))
}

/// Operator-normalized free arrival density; equals [`kijowski`] pointwise
/// and is kept as a distinct entry point for provenance.
pub fn pi_on_free(amp: &MomentumAmplitude, t: f64, units: Units) -> Result<f64> {
    kijowski(amp, t, units)
}

fn general_channels(amp: &MomentumAmplitude, units: Units) -> Result<Vec<Channel>> {
    let (pos, neg) = amp.half_line_split()?;
    Ok(vec![
        kijowski_channel(&pos, one, units)?,
        kijowski_channel(&neg, one, units)?,
    ])
}

/// Operator-normalized arrival density for a general free state on a
/// mirror-symmetric full-line grid: the sum of two independent half-line
/// Kijowski terms.
pub fn pi_on_general(amp: &MomentumAmplitude, t: f64, units: Units) -> Result<f64> {
    Ok(general_channels(amp, units)?
        .iter()
        .map(|c| c.density(t))
        .sum())
}

fn barrier_phase_extra(u: f64, l: f64, units: Units) -> impl Fn(f64) -> Result<Complex64> {
    move |k| {
        let (phi, _) = phase_and_derivative(k, u, l, units)?;
        Ok(Complex64::from_polar(1.0, phi))
    }
}

/// Operator-normalized arrival density behind a rectangular barrier: the
/// packet picks up only the transmission phase.
pub fn pi_on_barrier(amp: &MomentumAmplitude, u: f64, l: f64, t: f64, units: Units) -> Result<f64> {
    Ok(kijowski_channel(amp, barrier_phase_extra(u, l, units), units)?.density(t))
}

/// Transmission-weighted channel.  Coefficients carry `T(k)` rescaled by
/// `e^{-L}` with `L = max log |T|`, so opaque barriers stay in range; the
/// prefactor restores `e^{2L}` (for the normalized variant it cancels
/// against the norm).
fn transmitted_channel(
    amp: &MomentumAmplitude,
    u: f64,
    l: f64,
    normalized: bool,
    units: Units,
) -> Result<Channel> {
    let mut log_t = Vec::with_capacity(amp.len());
    let mut max_log = f64::NEG_INFINITY;
    for k in amp.grid() {
        let lt = log_abs_transmission(*k, u, l, units)?;
        max_log = max_log.max(lt);
        log_t.push(lt);
    }
    let mut channel = kijowski_channel(
        amp,
        |k| {
            let (phi, _) = phase_and_derivative(k, u, l, units)?;
            Ok(Complex64::from_polar(1.0, phi))
        },
        units,
    )?;
    for (c, lt) in channel.coeff.iter_mut().zip(&log_t) {
        *c *= (lt - max_log).exp();
    }
    if normalized {
        // norm of the scaled transmitted packet: sum w |psi|^2 e^{2(log|T| - L)}
        let mut norm = 0.0;
        for (((v, w), lt), _) in amp
            .values()
            .iter()
            .zip(amp.weights())
            .zip(&log_t)
            .zip(amp.grid())
        {
            norm += w * v.norm_sqr() * (2.0 * (lt - max_log)).exp();
        }
        if !(norm > 0.0) || (norm.ln() + 2.0 * max_log) < -690.0 {
            return Err(Error::Underflow(
                "transmitted-packet norm below 1e-300; nothing to normalize".into(),
            ));
        }
        channel.prefactor /= norm;
    } else {
        channel.prefactor *= (2.0 * max_log).exp();
    }
    Ok(channel)
}

/// Kijowski density of the transmitted packet renormalized to unit mass.
pub fn pi_kn(amp: &MomentumAmplitude, u: f64, l: f64, t: f64, units: Units) -> Result<f64> {
    Ok(transmitted_channel(amp, u, l, true, units)?.density(t))
}

/// Joint arrival-and-transmission density; integrates to the transmission
/// probability `int dk |psi T|^2`.
pub fn pi_tilde(amp: &MomentumAmplitude, u: f64, l: f64, t: f64, units: Units) -> Result<f64> {
    Ok(transmitted_channel(amp, u, l, false, units)?.density(t))
}

/// Finite-absorber density evaluator: a kernel-matrix contraction per time.
pub struct FiniteEpsSampler {
    omega: Vec<f64>,
    coeff: Vec<Complex64>,
    kernel: Vec<Vec<Complex64>>,
    prefactor: f64,
    magnitude_scale: f64,
}

impl FiniteEpsSampler {
    /// Build from an amplitude and a profile carrying one absorbing region.
    ///
    /// `normalized = true` gives the operator-normalized density
    /// (kernel `sqrt(k k') F(k,k')`, prefactor `hbar/2 pi m`); `false` gives
    /// the raw absorption rate (kernel `f(k,k')`).
    pub fn new(
        amp: &MomentumAmplitude,
        profile: &PotentialProfile,
        bc: BoundaryCondition,
        normalized: bool,
        units: Units,
    ) -> Result<Self> {
        let ks = amp.grid();
        if ks.iter().any(|k| *k <= 0.0) {
            return Err(Error::Domain(
                "finite-absorber density needs positive momenta".into(),
            ));
        }
        let mat = finite_eps_kernel_matrix(profile, bc, ks, units)?;
        let n = ks.len();
        let mut kernel = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                kernel[i][j] = if normalized {
                    (ks[i] * ks[j]).sqrt() * mat.f_matrix[i][j]
                } else {
                    mat.f_matrix[i][j] * (mat.f_diag[i] * mat.f_diag[j]).sqrt()
                };
            }
        }
        let coeff: Vec<Complex64> = amp
            .values()
            .iter()
            .zip(amp.weights())
            .map(|(v, w)| w * v)
            .collect();
        let mut magnitude_scale = 0.0;
        for i in 0..n {
            for j in 0..n {
                magnitude_scale += coeff[i].norm() * kernel[i][j].norm() * coeff[j].norm();
            }
        }
        Ok(FiniteEpsSampler {
            omega: omega_grid(ks, units),
            coeff,
            kernel,
            prefactor: if normalized {
                kijowski_prefactor(units)
            } else {
                1.0
            },
            magnitude_scale,
        })
    }

    /// Density at one time; errors if the double sum develops an imaginary
    /// residue beyond `1e-10` of the magnitude scale (a Hermiticity bug
    /// detector, not a rounding guard).
    pub fn density(&self, t: f64) -> Result<f64> {
        let phases: Vec<Complex64> = self
            .omega
            .iter()
            .zip(&self.coeff)
            .map(|(w, c)| c * Complex64::from_polar(1.0, -w * t))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, row) in self.kernel.iter().enumerate() {
            let mut inner = Complex64::new(0.0, 0.0);
            for (j, m) in row.iter().enumerate() {
                inner += m * phases[j];
            }
            acc += phases[i].conj() * inner;
        }
        if acc.im.abs() > 1e-10 * self.magnitude_scale.max(1e-300) {
            return Err(Error::Consistency(format!(
                "imaginary residue {:.3e} exceeds tolerance (scale {:.3e})",
                acc.im, self.magnitude_scale
            )));
        }
        Ok(self.prefactor * acc.re)
    }
}

/// Finite-absorber density at a single time (left-incidence channel).
pub fn pi_finite_eps(
    amp: &MomentumAmplitude,
    profile: &PotentialProfile,
    t: f64,
    normalized: bool,
    units: Units,
) -> Result<f64> {
    FiniteEpsSampler::new(amp, profile, BoundaryCondition::LeftIncidence, normalized, units)?
        .density(t)
}

fn sample_channels(
    channels: &[Channel],
    window: &TimeWindow,
    variant: DistributionVariant,
    auto_extend: bool,
) -> Result<TimeDistribution> {
    let mut window = *window;
    for _round in 0..8 {
        let grid = window.grid();
        let density: Vec<f64> = grid
            .iter()
            .map(|t| channels.iter().map(|c| c.density(*t)).sum())
            .collect();
        let dist = TimeDistribution::new(grid, density, variant)?;
        if !auto_extend {
            return Ok(dist);
        }
        let peak = dist.peak().1;
        let edge_tol = 1e-10 * peak;
        let lo_hot = dist.density[0] > edge_tol;
        let hi_hot = *dist.density.last().unwrap() > edge_tol;
        if (!lo_hot && !hi_hot) || window.n >= 20_000 {
            return Ok(dist);
        }
        let span = window.t_max - window.t_min;
        let dt = span / (window.n - 1) as f64;
        if lo_hot {
            window.t_min -= 0.5 * span;
        }
        if hi_hot {
            window.t_max += 0.5 * span;
        }
        let n = (((window.t_max - window.t_min) / dt).ceil() as usize + 1).min(20_000);
        window.n = n;
    }
    Err(Error::Consistency(
        "time window failed to capture the distribution tails".into(),
    ))
}

/// Sample the Kijowski density.  With `window = None` the grid is derived
/// from the amplitude and widened until both tails are below `1e-10` of the
/// peak.
pub fn sample_kijowski(
    amp: &MomentumAmplitude,
    window: Option<&TimeWindow>,
    units: Units,
) -> Result<TimeDistribution> {
    let auto = window.is_none();
    let w = match window {
        Some(w) => *w,
        None => TimeWindow::auto_for_amp(amp, units)?,
    };
    sample_channels(
        &[kijowski_channel(amp, one, units)?],
        &w,
        DistributionVariant::Kijowski,
        auto,
    )
}

/// Sample the operator-normalized free density (Kijowski with its own tag).
pub fn sample_pi_on_free(
    amp: &MomentumAmplitude,
    window: Option<&TimeWindow>,
    units: Units,
) -> Result<TimeDistribution> {
    let auto = window.is_none();
    let w = match window {
        Some(w) => *w,
        None => TimeWindow::auto_for_amp(amp, units)?,
    };
    sample_channels(
        &[kijowski_channel(amp, one, units)?],
        &w,
        DistributionVariant::OnFree,
        auto,
    )
}

/// Sample the general-state density (two independent momentum signs).
pub fn sample_pi_on_general(
    amp: &MomentumAmplitude,
    window: Option<&TimeWindow>,
    units: Units,
) -> Result<TimeDistribution> {
    let auto = window.is_none();
    let w = match window {
        Some(w) => *w,
        None => TimeWindow::auto_for_amp(amp, units)?,
    };
    sample_channels(
        &general_channels(amp, units)?,
        &w,
        DistributionVariant::OnGeneral,
        auto,
    )
}

/// Sample the operator-normalized barrier density.
pub fn sample_pi_on_barrier(
    amp: &MomentumAmplitude,
    u: f64,
    l: f64,
    window: Option<&TimeWindow>,
    units: Units,
) -> Result<TimeDistribution> {
    let auto = window.is_none();
    let w = match window {
        Some(w) => *w,
        None => TimeWindow::auto_for_amp(amp, units)?,
    };
    sample_channels(
        &[kijowski_channel(amp, barrier_phase_extra(u, l, units), units)?],
        &w,
        DistributionVariant::OnBarrier,
        auto,
    )
}

/// Sample the renormalized transmitted-packet density.
pub fn sample_pi_kn(
    amp: &MomentumAmplitude,
    u: f64,
    l: f64,
    window: Option<&TimeWindow>,
    units: Units,
) -> Result<TimeDistribution> {
    let auto = window.is_none();
    let w = match window {
        Some(w) => *w,
        None => TimeWindow::auto_for_amp(amp, units)?,
    };
    sample_channels(
        &[transmitted_channel(amp, u, l, true, units)?],
        &w,
        DistributionVariant::KijowskiTransmittedNormalized,
        auto,
    )
}

/// Sample the joint arrival-and-transmission density.
pub fn sample_pi_tilde(
    amp: &MomentumAmplitude,
    u: f64,
    l: f64,
    window: Option<&TimeWindow>,
    units: Units,
) -> Result<TimeDistribution> {
    let auto = window.is_none();
    let w = match window {
        Some(w) => *w,
        None => TimeWindow::auto_for_amp(amp, units)?,
    };
    sample_channels(
        &[transmitted_channel(amp, u, l, false, units)?],
        &w,
        DistributionVariant::TildeOnBarrier,
        auto,
    )
}

/// Sample the finite-absorber density on the given window.
pub fn sample_pi_finite_eps(
    amp: &MomentumAmplitude,
    profile: &PotentialProfile,
    bc: BoundaryCondition,
    normalized: bool,
    window: &TimeWindow,
    units: Units,
) -> Result<TimeDistribution> {
    let sampler = FiniteEpsSampler::new(amp, profile, bc, normalized, units)?;
    let grid = window.grid();
    let density: Vec<f64> = grid
        .iter()
        .map(|t| sampler.density(*t))
        .collect::<Result<_>>()?;
    TimeDistribution::new(grid, density, DistributionVariant::FiniteEps)
}
