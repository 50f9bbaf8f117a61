//! Absorption kernel, operator normalization, and the model kernel limits.
//!
//! The raw detection rate of a stationary pair `(phi_k, phi_k')` is governed
//! by `f(k,k') = (2 V_eps / hbar) * integral over the absorber of
//! conj(phi_k) phi_k'`; operator normalization divides out the diagonal and
//! multiplies Kijowski's `sqrt(k k')` kernel by
//! `F(k,k') = f(k,k') / sqrt(f(k,k) f(k',k'))`.  In the narrow-absorber
//! limits `F` collapses to closed forms: 1 for free motion, the transmission
//! phase ratio behind a barrier, a plain displacement phase for an
//! impenetrable barrier, and `conj(T) T'` for the transmission-weighted
//! (unnormalized-by-choice) variant.

use num_complex::Complex64;

use crate::numeric::interval_exp_integral;
use crate::potential::{region_wavenumber, PotentialProfile};
use crate::scattering::{
    phase_and_derivative, solve, transmission_amplitude, BoundaryCondition, ScatteringSolution,
};
use crate::{Error, Result, Units};

/// Overlap of two scattering waves over the absorbing region, without the
/// `2 V_eps / hbar` prefactor (which cancels in every normalized quantity).
fn absorber_overlap(
    profile: &PotentialProfile,
    sol_k: &ScatteringSolution,
    sol_k2: &ScatteringSolution,
    units: Units,
) -> Result<Complex64> {
    let (idx, _) = profile.absorber()?;
    let region = &profile.regions()[idx];
    let q = region_wavenumber(sol_k.k, region, units)?;
    let q2 = region_wavenumber(sol_k2.k, region, units)?;
    let (a_p, a_m) = sol_k.amplitudes[idx];
    let (b_p, b_m) = sol_k2.amplitudes[idx];
    let qc = q.conj();
    let (xl, xr) = (region.x_left, region.x_right);
    let e = |mu: Complex64| interval_exp_integral(mu, xl, xr);
    let sum = a_p.conj() * b_p * e(q2 - qc)
        + a_p.conj() * b_m * e(-q2 - qc)
        + a_m.conj() * b_p * e(q2 + qc)
        + a_m.conj() * b_m * e(qc - q2);
    Ok(sum / (2.0 * std::f64::consts::PI))
}

/// Absorption kernel `f(k,k') = (2 V_eps / hbar) * integral_absorber
/// conj(phi_k) phi_k' dx`, evaluated from the analytic antiderivative of the
/// four plane-wave cross terms.
pub fn f_kernel(
    profile: &PotentialProfile,
    sol_k: &ScatteringSolution,
    sol_k2: &ScatteringSolution,
    units: Units,
) -> Result<Complex64> {
    let (_, v_eps) = profile.absorber()?;
    Ok(absorber_overlap(profile, sol_k, sol_k2, units)? * (2.0 * v_eps / units.hbar))
}

/// Operator-normalization factor `b(k,k)^{-1/2} = sqrt(hbar k / (2 pi m f_diag))`.
pub fn b_inverse_sqrt(k: f64, f_diag: f64, units: Units) -> Result<f64> {
    if !(f_diag > 0.0) {
        return Err(Error::DegenerateNormalization(format!(
            "diagonal kernel must be positive, got {f_diag}"
        )));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("k must be > 0, got {k}")));
    }
    Ok((units.hbar * k / (2.0 * std::f64::consts::PI * units.mass * f_diag)).sqrt())
}

/// Evaluation regime of the model kernel `F(k,k')`.
#[derive(Debug, Clone)]
pub enum KernelRegime {
    /// Numeric finite-width absorber on the given profile.
    FiniteEps {
        profile: PotentialProfile,
        bc: BoundaryCondition,
    },
    /// Free weak-absorber limit: `F = 1`.
    FreeLimit,
    /// Weak limit behind a barrier: `F = e^{i (Phi_T(k') - Phi_T(k))}`.
    BarrierPhaseLimit { u: f64, l: f64 },
    /// Impenetrable barrier of width `l`: `F = e^{i (k - k') l}`.
    InfiniteBarrier { l: f64 },
    /// Transmission-weighted (joint arrival-and-transmission) kernel:
    /// `F = conj(T(k)) T(k')`.
    TransmissionWeighted { u: f64, l: f64 },
}

/// Model kernel evaluator.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    pub regime: KernelRegime,
    pub units: Units,
}

impl KernelEvaluator {
    pub fn free_limit(units: Units) -> Self {
        KernelEvaluator {
            regime: KernelRegime::FreeLimit,
            units,
        }
    }

    pub fn barrier_phase_limit(u: f64, l: f64, units: Units) -> Self {
        KernelEvaluator {
            regime: KernelRegime::BarrierPhaseLimit { u, l },
            units,
        }
    }

    pub fn infinite_barrier(l: f64, units: Units) -> Self {
        KernelEvaluator {
            regime: KernelRegime::InfiniteBarrier { l },
            units,
        }
    }

    pub fn transmission_weighted(u: f64, l: f64, units: Units) -> Self {
        KernelEvaluator {
            regime: KernelRegime::TransmissionWeighted { u, l },
            units,
        }
    }

    pub fn finite_eps(profile: PotentialProfile, bc: BoundaryCondition, units: Units) -> Result<Self> {
        profile.absorber()?;
        Ok(KernelEvaluator {
            regime: KernelRegime::FiniteEps { profile, bc },
            units,
        })
    }

    /// `F(k, k')`.
    pub fn evaluate(&self, k: f64, k2: f64) -> Result<Complex64> {
        if !(k > 0.0 && k2 > 0.0) {
            return Err(Error::Domain(format!(
                "kernel needs k, k' > 0, got {k}, {k2}"
            )));
        }
        match &self.regime {
            KernelRegime::FreeLimit => Ok(Complex64::new(1.0, 0.0)),
            KernelRegime::BarrierPhaseLimit { u, l } => {
                let (phi, _) = phase_and_derivative(k, *u, *l, self.units)?;
                let (phi2, _) = phase_and_derivative(k2, *u, *l, self.units)?;
                Ok(Complex64::from_polar(1.0, phi2 - phi))
            }
            KernelRegime::InfiniteBarrier { l } => {
                Ok(Complex64::from_polar(1.0, (k - k2) * l))
            }
            KernelRegime::TransmissionWeighted { u, l } => {
                let t = transmission_amplitude(k, *u, *l, self.units)?;
                let t2 = transmission_amplitude(k2, *u, *l, self.units)?;
                Ok(t.t_amp.conj() * t2.t_amp)
            }
            KernelRegime::FiniteEps { profile, bc } => {
                finite_eps_normalized_kernel(profile, *bc, k, k2, self.units)
            }
        }
    }

    /// `F(k, k)` (1 in every regime except the transmission-weighted one,
    /// where it is `|T(k)|^2`).
    pub fn diagonal(&self, k: f64) -> Result<f64> {
        Ok(self.evaluate(k, k)?.re)
    }
}

/// Finite-width `F(k,k') = f(k,k') / sqrt(f(k,k) f(k',k'))` from fresh
/// scattering solves.  The `V_eps` prefactors cancel exactly in the ratio.
pub fn finite_eps_normalized_kernel(
    profile: &PotentialProfile,
    bc: BoundaryCondition,
    k: f64,
    k2: f64,
    units: Units,
) -> Result<Complex64> {
    let sol_k = solve(profile, k, bc, units)?;
    let sol_k2 = solve(profile, k2, bc, units)?;
    normalized_kernel_from_solutions(profile, &sol_k, &sol_k2, units)
}

/// As [`finite_eps_normalized_kernel`] but reusing existing solutions.
pub fn normalized_kernel_from_solutions(
    profile: &PotentialProfile,
    sol_k: &ScatteringSolution,
    sol_k2: &ScatteringSolution,
    units: Units,
) -> Result<Complex64> {
    let off = absorber_overlap(profile, sol_k, sol_k2, units)?;
    let d1 = absorber_overlap(profile, sol_k, sol_k, units)?;
    let d2 = absorber_overlap(profile, sol_k2, sol_k2, units)?;
    for d in [d1, d2] {
        if !(d.re > 0.0) || d.im.abs() > 1e-10 * d.re.abs() {
            return Err(Error::DegenerateNormalization(format!(
                "diagonal absorber overlap must be real positive, got {d}"
            )));
        }
    }
    Ok(off / (d1.re * d2.re).sqrt())
}

/// Precomputed finite-width kernel matrix `F[i][j] = F(k_i, k_j)` and the
/// diagonal overlaps, using one solve per grid point.
pub struct FiniteEpsKernelMatrix {
    pub ks: Vec<f64>,
    pub f_matrix: Vec<Vec<Complex64>>,
    /// `f(k_i, k_i)` including the `2 V_eps / hbar` prefactor.
    pub f_diag: Vec<f64>,
}

pub fn finite_eps_kernel_matrix(
    profile: &PotentialProfile,
    bc: BoundaryCondition,
    ks: &[f64],
    units: Units,
) -> Result<FiniteEpsKernelMatrix> {
    let (_, v_eps) = profile.absorber()?;
    let sols: Vec<ScatteringSolution> = ks
        .iter()
        .map(|&k| solve(profile, k, bc, units))
        .collect::<Result<_>>()?;
    let n = ks.len();
    let mut overlaps = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in i..n {
            let o = absorber_overlap(profile, &sols[i], &sols[j], units)?;
            overlaps[i][j] = o;
            overlaps[j][i] = o.conj();
        }
    }
    let mut f_diag = Vec::with_capacity(n);
    for (i, row) in overlaps.iter().enumerate() {
        let d = row[i];
        if !(d.re > 0.0) {
            return Err(Error::DegenerateNormalization(format!(
                "diagonal overlap must be positive at k={}",
                ks[i]
            )));
        }
        f_diag.push(d.re * 2.0 * v_eps / units.hbar);
    }
    let mut f_matrix = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            f_matrix[i][j] = overlaps[i][j] / (overlaps[i][i].re * overlaps[j][j].re).sqrt();
        }
    }
    Ok(FiniteEpsKernelMatrix {
        ks: ks.to_vec(),
        f_matrix,
        f_diag,
    })
}
