//! Momentum-space wave-packet amplitudes on quadrature grids.
//!
//! The workhorse is a minimal-uncertainty Gaussian `psi(k)` with mean
//! position `x0` encoded as the linear phase `e^{-i k x0}`, sampled on a
//! Gauss-Legendre grid.  General states with both momentum signs live on a
//! mirror-symmetric grid built from two reflected panels, so parity
//! decomposition is exact.  Tabulated amplitudes can be imported from plain
//! text.

use num_complex::Complex64;

use crate::quadrature::gauss_legendre_on;
use crate::{Error, Result, Units};

/// Minimal-uncertainty Gaussian packet: mean position, position spread, and
/// mean velocity.  The momentum spread is `dk = 1/(2 dx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub x0: f64,
    pub dx: f64,
    pub v0: f64,
}

impl GaussianSpec {
    pub fn new(x0: f64, dx: f64, v0: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::Config(format!("dx must be > 0, got {dx}")));
        }
        if !x0.is_finite() || !v0.is_finite() {
            return Err(Error::Config("x0 and v0 must be finite".into()));
        }
        Ok(GaussianSpec { x0, dx, v0 })
    }

    pub fn k0(&self, units: Units) -> f64 {
        units.mass * self.v0 / units.hbar
    }

    pub fn dk(&self) -> f64 {
        1.0 / (2.0 * self.dx)
    }

    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        vec![
            ("packet.x0".into(), format!("{}", self.x0)),
            ("packet.dx".into(), format!("{}", self.dx)),
            ("packet.v0".into(), format!("{}", self.v0)),
        ]
    }
}

/// `psi(k) = (2 pi dk^2)^{-1/4} exp(-(k - k0)^2 / (4 dk^2)) exp(-i k x0)`.
pub fn gaussian_amplitude(spec: &GaussianSpec, k: f64, units: Units) -> Complex64 {
    let dk = spec.dk();
    let k0 = spec.k0(units);
    let norm = (2.0 * std::f64::consts::PI * dk * dk).powf(-0.25);
    let envelope = (-(k - k0) * (k - k0) / (4.0 * dk * dk)).exp();
    norm * envelope * (-Complex64::i() * k * spec.x0).exp()
}

/// Upper bound on the `k <= k_floor` probability mass of a Gaussian packet,
/// from `erfc(z) <= exp(-z^2) / (z sqrt(pi))`.
fn gaussian_tail_mass_bound(spec: &GaussianSpec, k_floor: f64, units: Units) -> f64 {
    let z = (spec.k0(units) - k_floor) / (std::f64::consts::SQRT_2 * spec.dk());
    if z <= 0.0 {
        return 1.0;
    }
    0.5 * (-z * z).exp() / (z * std::f64::consts::PI.sqrt())
}

/// Complex amplitude sampled on a strictly increasing wavenumber grid with
/// quadrature weights; normalized so `sum w |psi|^2 = 1`.
#[derive(Debug, Clone)]
pub struct MomentumAmplitude {
    grid: Vec<f64>,
    values: Vec<Complex64>,
    weights: Vec<f64>,
}

pub const DEFAULT_NODES: usize = 400;
pub const DEFAULT_SPAN_DK: f64 = 8.0;
const K_FLOOR: f64 = 1e-6;

impl MomentumAmplitude {
    fn validate(grid: &[f64], values: &[Complex64], weights: &[f64]) -> Result<()> {
        if grid.len() < 2 || grid.len() != values.len() || grid.len() != weights.len() {
            return Err(Error::Config("grid/value/weight lengths mismatch".into()));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("grid must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Wrap precomputed samples; enforces unit quadrature norm to 1e-8.
    pub fn from_samples(grid: Vec<f64>, values: Vec<Complex64>, weights: Vec<f64>) -> Result<Self> {
        Self::validate(&grid, &values, &weights)?;
        let amp = MomentumAmplitude {
            grid,
            values,
            weights,
        };
        let norm = amp.norm_sq();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Config(format!(
                "amplitude must be normalized: sum w |psi|^2 = {norm}"
            )));
        }
        Ok(amp)
    }

    /// Positive-momentum Gaussian on a Gauss-Legendre grid spanning
    /// `[max(k0 - span dk, 1e-6), k0 + span dk]`.
    ///
    /// Requires `k0/dk >= 5`; the clipped negative-momentum mass must be
    /// below 1e-12, which holds from `k0/dk >= 8` (asserted via an analytic
    /// tail bound).
    pub fn gaussian_positive_with(
        spec: &GaussianSpec,
        n: usize,
        span_dk: f64,
        units: Units,
    ) -> Result<Self> {
        let k0 = spec.k0(units);
        let dk = spec.dk();
        if span_dk < DEFAULT_SPAN_DK {
            return Err(Error::Config(format!(
                "grid must cover at least +/- {DEFAULT_SPAN_DK} dk, got {span_dk}"
            )));
        }
        if k0 / dk < 5.0 {
            return Err(Error::Config(format!(
                "positive-momentum packet needs k0/dk >= 5, got {}",
                k0 / dk
            )));
        }
        let tail = gaussian_tail_mass_bound(spec, K_FLOOR, units);
        if k0 / dk >= 8.0 && tail >= 1e-12 {
            return Err(Error::Consistency(format!(
                "truncated negative-momentum mass bound {tail:.3e} >= 1e-12"
            )));
        }
        let lo = (k0 - span_dk * dk).max(K_FLOOR);
        let hi = k0 + span_dk * dk;
        let rule = gauss_legendre_on(n, lo, hi)?;
        let values = rule
            .nodes
            .iter()
            .map(|&k| gaussian_amplitude(spec, k, units))
            .collect();
        Self::from_samples(rule.nodes, values, rule.weights)
    }

    /// Positive-momentum Gaussian with the default grid (400 nodes, +/- 8 dk).
    pub fn gaussian_positive(spec: &GaussianSpec, units: Units) -> Result<Self> {
        Self::gaussian_positive_with(spec, DEFAULT_NODES, DEFAULT_SPAN_DK, units)
    }

    /// Superposition of a packet and its spatial mirror image,
    /// `(psi(k) + mix * psi(-k)) / sqrt(1 + mix^2)`, on a mirror-symmetric
    /// full-line grid.  `mix = -1` is the antisymmetric state, `mix = +1` the
    /// symmetric one, `mix = 0` a single right-mover embedded in a full grid.
    pub fn two_packet_superposition(
        spec: &GaussianSpec,
        mix: f64,
        n_half: usize,
        units: Units,
    ) -> Result<Self> {
        let k0 = spec.k0(units);
        let dk = spec.dk();
        if k0 / dk < 5.0 {
            return Err(Error::Config(format!(
                "two-packet state needs k0/dk >= 5, got {}",
                k0 / dk
            )));
        }
        let lo = (k0 - DEFAULT_SPAN_DK * dk).max(K_FLOOR);
        let hi = k0 + DEFAULT_SPAN_DK * dk;
        let rule = gauss_legendre_on(n_half, lo, hi)?;
        let norm = (1.0 + mix * mix).sqrt();
        let value = |k: f64| {
            (gaussian_amplitude(spec, k, units) + mix * gaussian_amplitude(spec, -k, units)) / norm
        };
        let mut grid = Vec::with_capacity(2 * n_half);
        let mut values = Vec::with_capacity(2 * n_half);
        let mut weights = Vec::with_capacity(2 * n_half);
        for i in (0..n_half).rev() {
            grid.push(-rule.nodes[i]);
            weights.push(rule.weights[i]);
            values.push(value(-rule.nodes[i]));
        }
        for i in 0..n_half {
            grid.push(rule.nodes[i]);
            weights.push(rule.weights[i]);
            values.push(value(rule.nodes[i]));
        }
        Self::from_samples(grid, values, weights)
    }

    /// Parse a two- or three-column table `k  Re[psi]  [Im[psi]]` (whitespace
    /// or comma separated, `#` comments).  Weights are trapezoidal and the
    /// amplitude is rescaled to unit norm.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 && cols.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected 2 or 3 columns, got {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            grid.push(parse(cols[0])?);
            let re = parse(cols[1])?;
            let im = if cols.len() == 3 { parse(cols[2])? } else { 0.0 };
            values.push(Complex64::new(re, im));
        }
        if grid.len() < 2 {
            return Err(Error::Parse("table needs at least two rows".into()));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parse("table k column must be strictly increasing".into()));
        }
        let n = grid.len();
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let left = if i == 0 { grid[0] } else { grid[i - 1] };
            let right = if i == n - 1 { grid[n - 1] } else { grid[i + 1] };
            weights[i] = 0.5 * (right - left);
        }
        let norm: f64 = values
            .iter()
            .zip(&weights)
            .map(|(v, w)| w * v.norm_sqr())
            .sum();
        if !(norm > 0.0) {
            return Err(Error::Parse("table amplitude has zero norm".into()));
        }
        let scale = 1.0 / norm.sqrt();
        let values = values.into_iter().map(|v| v * scale).collect();
        Self::from_samples(grid, values, weights)
    }

    pub fn from_table_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_table(&text)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v.norm_sqr())
            .sum()
    }

    /// Quadrature-weighted mean of `f(k, psi(k))`.
    pub fn weighted_sum<F: Fn(f64, Complex64) -> f64>(&self, f: F) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .zip(&self.weights)
            .map(|((k, v), w)| w * f(*k, *v))
            .sum()
    }

    /// True when the grid is mirror-symmetric about `k = 0`.
    pub fn has_symmetric_grid(&self) -> bool {
        let n = self.grid.len();
        if !n.is_multiple_of(2) {
            return false;
        }
        (0..n / 2).all(|i| {
            let d = self.grid[i] + self.grid[n - 1 - i];
            d.abs() <= 1e-12 * self.grid[n - 1 - i].abs().max(1.0)
        })
    }

    /// Split a full-line amplitude into `(psi(k), psi(-k))`, both tabulated on
    /// the positive half-grid.
    pub fn half_line_split(&self) -> Result<(MomentumAmplitude, MomentumAmplitude)> {
        if !self.has_symmetric_grid() {
            return Err(Error::Config(
                "half-line split needs a mirror-symmetric grid".into(),
            ));
        }
        let n = self.grid.len();
        let half = n / 2;
        let grid: Vec<f64> = self.grid[half..].to_vec();
        let weights: Vec<f64> = self.weights[half..].to_vec();
        let positive: Vec<Complex64> = self.values[half..].to_vec();
        let mirrored: Vec<Complex64> = (0..half).map(|i| self.values[half - 1 - i]).collect();
        Ok((
            MomentumAmplitude {
                grid: grid.clone(),
                values: positive,
                weights: weights.clone(),
            },
            MomentumAmplitude {
                grid,
                values: mirrored,
                weights,
            },
        ))
    }
}

/// Split an amplitude on a mirror-symmetric grid into its even and odd parts,
/// `psi_s(k) = (psi(k) + psi(-k))/2` and `psi_a(k) = (psi(k) - psi(-k))/2`.
/// The reconstruction `psi_s + psi_a` is exact.
pub fn parity_decompose(
    amp: &MomentumAmplitude,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if !amp.has_symmetric_grid() {
        return Err(Error::Config(
            "parity decomposition needs a mirror-symmetric grid".into(),
        ));
    }
    let n = amp.len();
    let mut sym = vec![Complex64::new(0.0, 0.0); n];
    let mut asym = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let v = amp.values()[i];
        let v_mirror = amp.values()[n - 1 - i];
        sym[i] = 0.5 * (v + v_mirror);
        asym[i] = 0.5 * (v - v_mirror);
    }
    Ok((sym, asym))
}

/// Phase slope `d(arg psi)/dk` at the modulus peak, estimated from the two
/// neighboring grid points with 2-pi wrap handling.  For a packet with mean
/// position `x0` encoded as `e^{-i k x0}` this returns `-x0`.
pub fn phase_slope_at_peak(amp: &MomentumAmplitude) -> Result<f64> {
    let n = amp.len();
    let peak = (0..n)
        .max_by(|&a, &b| {
            amp.values()[a]
                .norm()
                .partial_cmp(&amp.values()[b].norm())
                .unwrap()
        })
        .unwrap();
    let j = peak.clamp(1, n - 2);
    let scale = amp.values()[peak].norm();
    if scale <= 0.0 {
        return Err(Error::Domain("amplitude is identically zero".into()));
    }
    for idx in [j - 1, j, j + 1] {
        if amp.values()[idx].norm() < 1e-12 * scale {
            return Err(Error::Domain(
                "amplitude vanishes next to its peak; phase slope undefined".into(),
            ));
        }
    }
    let wrap = |d: f64| {
        let mut d = d;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        d
    };
    let a0 = amp.values()[j - 1].arg();
    let a1 = amp.values()[j].arg();
    let a2 = amp.values()[j + 1].arg();
    let dphi = wrap(a1 - a0) + wrap(a2 - a1);
    Ok(dphi / (amp.grid()[j + 1] - amp.grid()[j - 1]))
}

/// `<1/v> = integral dk |psi(k)|^2 m / (hbar k)` for a positive-momentum
/// amplitude.
pub fn inv_velocity_mean(amp: &MomentumAmplitude, units: Units) -> Result<f64> {
    let bad_mass: f64 = amp
        .grid()
        .iter()
        .zip(amp.values())
        .zip(amp.weights())
        .filter(|((k, _), _)| **k <= 0.0)
        .map(|((_, v), w)| w * v.norm_sqr())
        .sum();
    if bad_mass > 1e-12 {
        return Err(Error::Domain(format!(
            "inverse-velocity mean needs k > 0 support; mass {bad_mass:.3e} at k <= 0"
        )));
    }
    Ok(amp.weighted_sum(|k, v| {
        if k > 0.0 {
            v.norm_sqr() * units.mass / (units.hbar * k)
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const AU: Units = Units::atomic();

    fn paper_packet() -> GaussianSpec {
        GaussianSpec::new(-50.0, 10.0, 1.0).unwrap()
    }

    #[test]
    fn gaussian_peak_value() {
        // |psi(k0)| = (2 pi dk^2)^{-1/4}; for dx = 10 this is
        // (2 pi * 0.0025)^{-1/4} = 2.82468 (pinned by unit norm:
        // |psi(k0)|^2 sqrt(2 pi) dk = 1)
        let spec = paper_packet();
        let peak = gaussian_amplitude(&spec, 1.0, AU).norm();
        let oracle = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * spec.dk()).sqrt();
        assert_relative_eq!(peak, oracle, epsilon = 1e-14);
        assert_relative_eq!(peak, 2.8247, max_relative = 1e-4);
    }

    #[test]
    fn gaussian_grid_is_normalized() {
        let amp = MomentumAmplitude::gaussian_positive(&paper_packet(), AU).unwrap();
        assert!((amp.norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn normalization_stable_under_refinement() {
        let spec = paper_packet();
        let coarse = MomentumAmplitude::gaussian_positive_with(&spec, 400, 8.0, AU).unwrap();
        let fine = MomentumAmplitude::gaussian_positive_with(&spec, 800, 8.0, AU).unwrap();
        assert!((coarse.norm_sq() - fine.norm_sq()).abs() < 1e-10);
    }

    #[test]
    fn position_expectation_matches_x0() {
        // Fourier oracle: psi(x) = int dk psi(k) e^{ikx} / sqrt(2 pi) on a
        // coarse x grid; <x> must come out at x0
        let spec = GaussianSpec::new(-12.0, 3.0, 1.0).unwrap();
        let amp = MomentumAmplitude::gaussian_positive(&spec, AU).unwrap();
        let xs: Vec<f64> = (0..1600).map(|i| -40.0 + 0.035 * i as f64).collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for &x in &xs {
            let mut psi = Complex64::new(0.0, 0.0);
            for ((k, v), w) in amp.grid().iter().zip(amp.values()).zip(amp.weights()) {
                psi += w * v * (Complex64::i() * k * x).exp();
            }
            let p = psi.norm_sqr();
            num += x * p;
            den += p;
        }
        assert_relative_eq!(num / den, -12.0, epsilon = 1e-6);
    }

    #[test]
    fn rejects_slow_packets() {
        // k0/dk = 4 < 5
        let spec = GaussianSpec::new(-50.0, 2.0, 1.0).unwrap();
        assert!(MomentumAmplitude::gaussian_positive(&spec, AU).is_err());
    }

    #[test]
    fn parity_even_input_has_no_odd_part() {
        let spec = paper_packet();
        let amp = MomentumAmplitude::two_packet_superposition(&spec, 1.0, 200, AU).unwrap();
        let (sym, asym) = parity_decompose(&amp).unwrap();
        let max_odd = asym.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max_odd < 1e-14);
        for (s, v) in sym.iter().zip(amp.values()) {
            assert!((s - v).norm() < 1e-14);
        }
    }

    #[test]
    fn parity_minus_combination_is_purely_antisymmetric() {
        let spec = paper_packet();
        let amp = MomentumAmplitude::two_packet_superposition(&spec, -1.0, 200, AU).unwrap();
        let (sym, asym) = parity_decompose(&amp).unwrap();
        let max_even = sym.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max_even < 1e-14);
        let n = amp.len();
        for i in 0..n {
            assert!((asym[i] + asym[n - 1 - i]).norm() < 1e-14);
        }
    }

    #[test]
    fn parity_reconstruction_is_exact() {
        let spec = paper_packet();
        let amp = MomentumAmplitude::two_packet_superposition(&spec, 0.37, 150, AU).unwrap();
        let (sym, asym) = parity_decompose(&amp).unwrap();
        for i in 0..amp.len() {
            assert!((sym[i] + asym[i] - amp.values()[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn parity_is_a_projection() {
        let spec = paper_packet();
        let amp = MomentumAmplitude::two_packet_superposition(&spec, 0.37, 150, AU).unwrap();
        let (sym, _) = parity_decompose(&amp).unwrap();
        // normalize the symmetric part into a fresh amplitude and re-decompose
        let norm: f64 = sym
            .iter()
            .zip(amp.weights())
            .map(|(v, w)| w * v.norm_sqr())
            .sum();
        let values: Vec<Complex64> = sym.iter().map(|v| v / norm.sqrt()).collect();
        let amp_s = MomentumAmplitude::from_samples(
            amp.grid().to_vec(),
            values.clone(),
            amp.weights().to_vec(),
        )
        .unwrap();
        let (sym2, asym2) = parity_decompose(&amp_s).unwrap();
        for i in 0..amp_s.len() {
            assert!((sym2[i] - values[i]).norm() < 1e-14);
            assert!(asym2[i].norm() < 1e-14);
        }
    }

    #[test]
    fn inverse_velocity_of_paper_packet() {
        // series oracle: <1/k> = (1/k0)(1 + r^2 + 3 r^4 + 15 r^6), r = dk/k0
        let amp = MomentumAmplitude::gaussian_positive(&paper_packet(), AU).unwrap();
        let got = inv_velocity_mean(&amp, AU).unwrap();
        let r2 = 0.05_f64 * 0.05;
        let series = 1.0 + r2 + 3.0 * r2 * r2 + 15.0 * r2 * r2 * r2;
        assert_relative_eq!(got, series, epsilon = 1e-7);
        assert_relative_eq!(got, 1.00252, max_relative = 1e-5);
    }

    #[test]
    fn inverse_velocity_narrow_packet_limit() {
        // delta-like packet: <1/v> -> m/(hbar k0); correction is (dk/k0)^2
        let spec = GaussianSpec::new(-50.0, 4000.0, 1.0).unwrap();
        let amp = MomentumAmplitude::gaussian_positive(&spec, AU).unwrap();
        assert_relative_eq!(inv_velocity_mean(&amp, AU).unwrap(), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn inverse_velocity_decreases_with_k0() {
        let slow = MomentumAmplitude::gaussian_positive(
            &GaussianSpec::new(-50.0, 10.0, 1.0).unwrap(),
            AU,
        )
        .unwrap();
        let fast = MomentumAmplitude::gaussian_positive(
            &GaussianSpec::new(-50.0, 10.0, 1.5).unwrap(),
            AU,
        )
        .unwrap();
        assert!(
            inv_velocity_mean(&fast, AU).unwrap() < inv_velocity_mean(&slow, AU).unwrap()
        );
    }

    #[test]
    fn inverse_velocity_rejects_negative_support() {
        let spec = paper_packet();
        let amp = MomentumAmplitude::two_packet_superposition(&spec, -1.0, 100, AU).unwrap();
        assert!(inv_velocity_mean(&amp, AU).is_err());
    }

    #[test]
    fn table_import_round_trip() {
        let spec = paper_packet();
        let amp = MomentumAmplitude::gaussian_positive_with(&spec, 64, 8.0, AU).unwrap();
        let mut text = String::from("# k re im\n");
        for ((k, v), _) in amp.grid().iter().zip(amp.values()).zip(amp.weights()) {
            text.push_str(&format!("{k:.17e} {:.17e} {:.17e}\n", v.re, v.im));
        }
        let imported = MomentumAmplitude::from_table(&text).unwrap();
        assert!((imported.norm_sq() - 1.0).abs() < 1e-10);
        // trapezoid weights differ from Gauss-Legendre ones, but the mean
        // inverse velocity is grid-insensitive at this density
        assert_relative_eq!(
            inv_velocity_mean(&imported, AU).unwrap(),
            inv_velocity_mean(&amp, AU).unwrap(),
            epsilon = 1e-4
        );
    }

    #[test]
    fn table_import_rejects_bad_input() {
        assert!(MomentumAmplitude::from_table("1.0\n2.0\n").is_err());
        assert!(MomentumAmplitude::from_table("1.0 0.5\n0.9 0.5\n").is_err());
        assert!(MomentumAmplitude::from_table("1.0 abc\n2.0 0.5\n").is_err());
        assert!(MomentumAmplitude::from_table("").is_err());
    }
}
