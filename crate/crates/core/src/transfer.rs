//! Matching and transfer matrices over a potential profile.
//!
//! In region `i` the stationary wave is `A_i^+ e^{i k_i x} + A_i^- e^{-i k_i x}`.
//! The matching matrix `M_i(x)` stacks the wave value and its derivative;
//! continuity at a boundary `x` gives the one-step transfer matrix
//! `T(i, i+1) = M_i(x)^{-1} M_{i+1}(x)` relating `(A_i^+, A_i^-)` to
//! `(A_{i+1}^+, A_{i+1}^-)`, and products of steps connect distant regions.
//!
//! For strongly evanescent regions the entries grow like `e^{|Im k| |x|}`, so
//! chained products are accumulated in a scaled form: an order-one matrix
//! times a separately tracked exponential.

use num_complex::Complex64;

use crate::numeric::{cos_and_sinc, exp_scaled};
use crate::potential::{region_wavenumber, AbsorberScaling, PotentialProfile};
use crate::{Error, Result, Units};

/// Dense 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2c {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl Matrix2c {
    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Matrix2c { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        Matrix2c::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn mul(&self, other: &Matrix2c) -> Matrix2c {
        Matrix2c::new(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn apply(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.m11 * v.0 + self.m12 * v.1,
            self.m21 * v.0 + self.m22 * v.1,
        )
    }

    pub fn scale(&self, c: Complex64) -> Matrix2c {
        Matrix2c::new(self.m11 * c, self.m12 * c, self.m21 * c, self.m22 * c)
    }

    pub fn max_abs(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }

    /// Largest entrywise absolute difference.
    pub fn max_entry_diff(&self, other: &Matrix2c) -> f64 {
        (self.m11 - other.m11)
            .norm()
            .max((self.m12 - other.m12).norm())
            .max((self.m21 - other.m21).norm())
            .max((self.m22 - other.m22).norm())
    }
}

/// `exp(log_scale) * mat` with `mat` kept near unit magnitude.
#[derive(Debug, Clone, Copy)]
pub struct ScaledMatrix2c {
    pub mat: Matrix2c,
    pub log_scale: f64,
}

impl ScaledMatrix2c {
    pub fn identity() -> Self {
        ScaledMatrix2c {
            mat: Matrix2c::identity(),
            log_scale: 0.0,
        }
    }

    fn normalized(mat: Matrix2c, log_scale: f64) -> Self {
        let s = mat.max_abs();
        if s > 0.0 && s.is_finite() {
            ScaledMatrix2c {
                mat: mat.scale(Complex64::new(1.0 / s, 0.0)),
                log_scale: log_scale + s.ln(),
            }
        } else {
            ScaledMatrix2c { mat, log_scale }
        }
    }

    pub fn mul(&self, other: &ScaledMatrix2c) -> ScaledMatrix2c {
        Self::normalized(self.mat.mul(&other.mat), self.log_scale + other.log_scale)
    }

    /// Recombine into a plain matrix (may overflow for extreme scales).
    pub fn to_matrix(&self) -> Matrix2c {
        let s = Complex64::new(1.0, 0.0) * exp_scaled(Complex64::new(1.0, 0.0), self.log_scale);
        self.mat.scale(s)
    }
}

/// Matching matrix: rows `(e^{i k x}, e^{-i k x})` and
/// `(k e^{i k x}, -k e^{-i k x})`; determinant `-2k`.
pub fn matching_matrix(k_i: Complex64, x: f64) -> Result<Matrix2c> {
    if k_i.norm() == 0.0 {
        return Err(Error::SingularMatrix(
            "matching matrix requires k_i != 0".into(),
        ));
    }
    let phase = (Complex64::i() * k_i * x).exp();
    let inv_phase = (-Complex64::i() * k_i * x).exp();
    Ok(Matrix2c::new(
        phase,
        inv_phase,
        k_i * phase,
        -k_i * inv_phase,
    ))
}

/// One-step transfer matrix between wavenumbers `k_i`, `k_j` matched at `x`,
/// in scaled form.  Entries are
/// `T11 = (1 + k_j/k_i)/2 * e^{i(k_j - k_i)x}`, etc., which is exactly
/// `M_i(x)^{-1} M_j(x)`.
fn step_between(k_i: Complex64, k_j: Complex64, x: f64) -> Result<ScaledMatrix2c> {
    if k_i.norm() == 0.0 {
        return Err(Error::SingularMatrix(
            "step transfer requires k_i != 0".into(),
        ));
    }
    let ratio = k_j / k_i;
    let plus = (Complex64::new(1.0, 0.0) + ratio) * 0.5;
    let minus = (Complex64::new(1.0, 0.0) - ratio) * 0.5;
    let i = Complex64::i();
    // exponents of the four entries
    let e11 = i * (k_j - k_i) * x;
    let e12 = -i * (k_j + k_i) * x;
    let e21 = i * (k_j + k_i) * x;
    let e22 = -i * (k_j - k_i) * x;
    let shift = e11.re.max(e12.re).max(e21.re).max(e22.re);
    let mat = Matrix2c::new(
        plus * (e11 - shift).exp(),
        minus * (e12 - shift).exp(),
        minus * (e21 - shift).exp(),
        plus * (e22 - shift).exp(),
    );
    Ok(ScaledMatrix2c {
        mat,
        log_scale: shift,
    })
}

fn check_region_index(profile: &PotentialProfile, i: usize, j: usize) -> Result<()> {
    if i >= j || j >= profile.region_count() {
        return Err(Error::Config(format!(
            "need region indices i < j < {}, got i={i}, j={j}",
            profile.region_count()
        )));
    }
    Ok(())
}

/// Transfer matrix `T(i, i+1)` across the boundary between regions `i` and
/// `i+1` of the profile.
pub fn step_transfer(
    profile: &PotentialProfile,
    k: f64,
    i: usize,
    units: Units,
) -> Result<Matrix2c> {
    check_region_index(profile, i, i + 1)?;
    let k_i = region_wavenumber(k, &profile.regions()[i], units)?;
    let k_j = region_wavenumber(k, &profile.regions()[i + 1], units)?;
    let x = profile.regions()[i].x_right;
    Ok(step_between(k_i, k_j, x)?.to_matrix())
}

/// Ordered product `T(i, i+1) ... T(j-1, j)` in scaled form.
pub fn full_transfer_scaled(
    profile: &PotentialProfile,
    k: f64,
    i: usize,
    j: usize,
    units: Units,
) -> Result<ScaledMatrix2c> {
    check_region_index(profile, i, j)?;
    let mut acc = ScaledMatrix2c::identity();
    for idx in i..j {
        let k_a = region_wavenumber(k, &profile.regions()[idx], units)?;
        let k_b = region_wavenumber(k, &profile.regions()[idx + 1], units)?;
        let x = profile.regions()[idx].x_right;
        acc = acc.mul(&step_between(k_a, k_b, x)?);
    }
    Ok(acc)
}

/// Ordered product `T(i, i+1) ... T(j-1, j)`; `det = k_j / k_i`.
pub fn full_transfer(
    profile: &PotentialProfile,
    k: f64,
    i: usize,
    j: usize,
    units: Units,
) -> Result<Matrix2c> {
    Ok(full_transfer_scaled(profile, k, i, j, units)?.to_matrix())
}

/// Closed form of `T(0, 2)` for the free-absorber profile (free | absorber of
/// half-width `eps` | free).
pub fn closed_form_t02_absorber(
    k: f64,
    scaling: &AbsorberScaling,
    units: Units,
) -> Result<Matrix2c> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("k must be > 0, got {k}")));
    }
    let eps = scaling.epsilon;
    let q = crate::potential::absorber_q(k, scaling, units)?;
    let two_qe = 2.0 * q * eps;
    let cos = two_qe.cos();
    let sin = two_qe.sin();
    let i = Complex64::i();
    let sum = k / q + q / k;
    let diff = k / q - q / k;
    let phase = (i * 2.0 * k * eps).exp();
    Ok(Matrix2c::new(
        (cos - i * 0.5 * sum * sin) * phase,
        i * 0.5 * diff * sin,
        -i * 0.5 * diff * sin,
        (cos + i * 0.5 * sum * sin) / phase,
    ))
}

/// Closed form of `T(1, 2)` for the free-absorber profile: relates the
/// absorber-region amplitudes to those of the right free region.
pub fn closed_form_t12_absorber(
    k: f64,
    scaling: &AbsorberScaling,
    units: Units,
) -> Result<Matrix2c> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("k must be > 0, got {k}")));
    }
    let eps = scaling.epsilon;
    let q = crate::potential::absorber_q(k, scaling, units)?;
    let i = Complex64::i();
    let plus = (Complex64::new(1.0, 0.0) + k / q) * 0.5;
    let minus = (Complex64::new(1.0, 0.0) - k / q) * 0.5;
    Ok(Matrix2c::new(
        plus * (i * (k - q) * eps).exp(),
        minus * (-i * (k + q) * eps).exp(),
        minus * (i * (k + q) * eps).exp(),
        plus * (-i * (k - q) * eps).exp(),
    ))
}

/// Closed form of the rectangular-barrier transfer matrix `T(0, 2)` for a
/// real barrier of height `u` on `[a, b]`.  Below the barrier the
/// trigonometric entries continue analytically to hyperbolic form; the
/// removable singularity at `k^2 = 2 m u / hbar^2` is handled by series.
pub fn barrier_transfer_closed_form(
    k: f64,
    u: f64,
    a: f64,
    b: f64,
    units: Units,
) -> Result<Matrix2c> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("k must be > 0, got {k}")));
    }
    if !(a < b) {
        return Err(Error::Domain(format!("need a < b, got a={a}, b={b}")));
    }
    let l = b - a;
    let s = a + b;
    let c = units.two_m_over_hbar2() * u;
    let usq = k * k - c; // kappa^2
    let (cos_kl, sinc_kl) = cos_and_sinc(usq, l);
    let g = 2.0 * k - c / k; // (kappa/k + k/kappa) * sin = g * sinc
    let i = Complex64::i();
    let ekl = (i * k * l).exp();
    let eks = (i * k * s).exp();
    // (kappa/k - k/kappa) * sin(kappa l) = -c * sinc / k
    let off = i * 0.5 * (c * sinc_kl / k);
    Ok(Matrix2c::new(
        ekl * Complex64::new(cos_kl, -0.5 * g * sinc_kl),
        off / eks,
        -off * eks,
        Complex64::new(cos_kl, 0.5 * g * sinc_kl) / ekl,
    ))
}

/// Delta-absorber limit of `T(0, 2)` under case (a) scaling:
/// `[[1 + g, g], [-g, 1 - g]]` with `g = m V0 L0 / (hbar^2 k)`.
pub fn t02_limit_case_a(k: f64, v0_l0: f64, units: Units) -> Matrix2c {
    let g = units.mass * v0_l0 / (units.hbar * units.hbar * k);
    Matrix2c::new(
        Complex64::new(1.0 + g, 0.0),
        Complex64::new(g, 0.0),
        Complex64::new(-g, 0.0),
        Complex64::new(1.0 - g, 0.0),
    )
}

/// Weak-measurement limit of `T(0, 2)` under case (b) scaling: the identity.
pub fn t02_limit_case_b() -> Matrix2c {
    Matrix2c::identity()
}

/// Limit of `T(1, 2)` under either scaling: `[[1, 1], [1, 1]] / 2`.
pub fn t12_limit() -> Matrix2c {
    let half = Complex64::new(0.5, 0.0);
    Matrix2c::new(half, half, half, half)
}
