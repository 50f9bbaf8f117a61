//! Small numeric helpers shared by the scattering layers.

use num_complex::Complex64;

/// Series switch for `x = sqrt(|u|) * l`: below this the trig/hyperbolic
/// forms lose relative accuracy to cancellation and the Taylor series wins.
const SERIES_X: f64 = 1e-3;

/// `cos(kappa * l)` and `sin(kappa * l) / kappa` as real functions of
/// `u = kappa^2`, valid for either sign of `u` (trigonometric above the
/// barrier, hyperbolic below) and continuous through `u = 0`.
pub fn cos_and_sinc(u: f64, l: f64) -> (f64, f64) {
    let x2 = u * l * l;
    if x2.abs() < SERIES_X * SERIES_X {
        let c = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        let h = l * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        (c, h)
    } else if u > 0.0 {
        let kappa = u.sqrt();
        ((kappa * l).cos(), (kappa * l).sin() / kappa)
    } else {
        let kt = (-u).sqrt();
        ((kt * l).cosh(), (kt * l).sinh() / kt)
    }
}

/// `(l * cos(kappa l) - sin(kappa l)/kappa) / u`, the cancellation-prone
/// factor in `d/du [sin(kappa l)/kappa]`, continuous through `u = 0`.
pub fn sinc_derivative_factor(u: f64, l: f64) -> f64 {
    let x2 = u * l * l;
    if x2.abs() < SERIES_X * SERIES_X {
        l * l * l * (-1.0 / 3.0 + x2 / 30.0 - x2 * x2 / 840.0)
    } else {
        let (c, h) = cos_and_sinc(u, l);
        (l * c - h) / u
    }
}

/// `integral of exp(i mu x) dx` over `[x_l, x_r]` for complex `mu`,
/// with a series form for small `|mu| * (x_r - x_l)`.
pub fn interval_exp_integral(mu: Complex64, x_l: f64, x_r: f64) -> Complex64 {
    let width = x_r - x_l;
    let z = mu * width;
    if z.norm() < 1e-6 {
        // exp(i mu x_l) * (w + i mu w^2/2 - mu^2 w^3/6 - i mu^3 w^4/24)
        let i = Complex64::i();
        let series = Complex64::new(width, 0.0)
            + i * mu * width * width / 2.0
            - mu * mu * width * width * width / 6.0
            - i * mu * mu * mu * width.powi(4) / 24.0;
        (Complex64::i() * mu * x_l).exp() * series
    } else {
        let i = Complex64::i();
        ((i * mu * x_r).exp() - (i * mu * x_l).exp()) / (i * mu)
    }
}

/// `c * exp(s)` without overflowing the intermediate `exp(s)` for large `|s|`.
pub fn exp_scaled(c: Complex64, s: f64) -> Complex64 {
    if s.abs() < 600.0 {
        c * s.exp()
    } else {
        let half = (0.5 * s).exp();
        c * half * half
    }
}
