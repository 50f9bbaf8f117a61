//! Piecewise-constant (possibly complex) potential profiles.
//!
//! A profile is an ordered list of contiguous regions of constant potential.
//! The outermost regions are semi-infinite and free (`v = 0`), so every
//! profile scatters asymptotically plane waves.  Absorbing regions carry a
//! negative imaginary part: the Hamiltonian term is `-i V` with `V > 0`.

use num_complex::Complex64;

use crate::{Error, Result, Units};

/// One region of constant potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_left: f64,
    pub x_right: f64,
    pub v: Complex64,
}

impl Region {
    pub fn new(x_left: f64, x_right: f64, v: Complex64) -> Result<Self> {
        if !(x_left < x_right) {
            return Err(Error::Config(format!(
                "region must have x_left < x_right, got [{x_left}, {x_right}]"
            )));
        }
        if v.im > 0.0 {
            return Err(Error::Config(format!(
                "Im(v) must be <= 0 (absorbing), got {}",
                v.im
            )));
        }
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Config("potential value must be finite".into()));
        }
        Ok(Region { x_left, x_right, v })
    }

    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn contains(&self, x: f64) -> bool {
        self.x_left <= x && x <= self.x_right
    }
}

/// Ordered contiguous regions with free semi-infinite ends.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    regions: Vec<Region>,
}

impl PotentialProfile {
    pub fn new(regions: Vec<Region>) -> Result<Self> {
        if regions.len() < 2 {
            return Err(Error::Config(
                "profile needs at least two regions (left and right free ends)".into(),
            ));
        }
        for pair in regions.windows(2) {
            if pair[0].x_right != pair[1].x_left {
                return Err(Error::Config(format!(
                    "regions must be contiguous: {} != {}",
                    pair[0].x_right, pair[1].x_left
                )));
            }
        }
        let first = regions.first().unwrap();
        let last = regions.last().unwrap();
        if first.x_left != f64::NEG_INFINITY || last.x_right != f64::INFINITY {
            return Err(Error::Config(
                "outer regions must be semi-infinite".into(),
            ));
        }
        if first.v != Complex64::new(0.0, 0.0) || last.v != Complex64::new(0.0, 0.0) {
            return Err(Error::Config(
                "outer regions must be free (v = 0)".into(),
            ));
        }
        Ok(PotentialProfile { regions })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    /// Interior boundary points `x_1 .. x_{N-1}` (boundary `i+1` separates
    /// regions `i` and `i+1`).
    pub fn boundaries(&self) -> Vec<f64> {
        self.regions[..self.regions.len() - 1]
            .iter()
            .map(|r| r.x_right)
            .collect()
    }

    /// Index and strength `V = -Im(v)` of the unique absorbing region.
    pub fn absorber(&self) -> Result<(usize, f64)> {
        let mut found = None;
        for (i, r) in self.regions.iter().enumerate() {
            if r.v.im < 0.0 {
                if found.is_some() {
                    return Err(Error::Config(
                        "profile has more than one absorbing region".into(),
                    ));
                }
                found = Some((i, -r.v.im));
            }
        }
        found.ok_or_else(|| Error::Config("profile has no absorbing region".into()))
    }

    pub fn potential_at(&self, x: f64) -> Complex64 {
        for r in &self.regions {
            if x < r.x_right {
                return r.v;
            }
        }
        self.regions.last().unwrap().v
    }

    /// Potential averaged over the grid cell `[x - dx/2, x + dx/2]`.
    ///
    /// Sampling a discontinuous profile this way keeps grid discretizations
    /// second-order accurate at region edges.
    pub fn cell_average_potential(&self, x: f64, dx: f64) -> Complex64 {
        let lo = x - 0.5 * dx;
        let hi = x + 0.5 * dx;
        let mut acc = Complex64::new(0.0, 0.0);
        for r in &self.regions {
            let a = r.x_left.max(lo);
            let b = r.x_right.min(hi);
            if b > a {
                acc += r.v * (b - a);
            }
        }
        acc / dx
    }

    /// Key/value pairs describing the profile for run manifests.
    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        let mut out = vec![(
            "profile.regions".to_string(),
            self.regions.len().to_string(),
        )];
        for (i, r) in self.regions.iter().enumerate() {
            out.push((
                format!("profile.region{i}"),
                format!(
                    "x=[{},{}] v={}{:+}i",
                    r.x_left, r.x_right, r.v.re, r.v.im
                ),
            ));
        }
        out
    }
}

/// How the absorber strength scales as its half-width shrinks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingCase {
    /// `c(eps) = eps`: the absorber tends to a delta well of strength `V0 L0`.
    A,
    /// `c(eps) = eps^alpha`, `0 < alpha < 1`: weaker, non-perturbing limit.
    B { alpha: f64 },
}

/// Absorber parameters: strength scale `V0 L0`, half-width `eps`, and the
/// scaling law connecting them (`V_eps = V0 L0 / (2 c(eps))`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorberScaling {
    pub case: ScalingCase,
    pub v0_l0: f64,
    pub epsilon: f64,
}

impl AbsorberScaling {
    pub fn new(case: ScalingCase, v0_l0: f64, epsilon: f64) -> Result<Self> {
        if let ScalingCase::B { alpha } = case {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Config(format!(
                    "scaling case B needs 0 < alpha < 1, got {alpha}"
                )));
            }
        }
        if !(v0_l0 > 0.0) {
            return Err(Error::Config(format!("V0 L0 must be > 0, got {v0_l0}")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be > 0, got {epsilon}")));
        }
        Ok(AbsorberScaling {
            case,
            v0_l0,
            epsilon,
        })
    }

    pub fn case_a(v0_l0: f64, epsilon: f64) -> Result<Self> {
        Self::new(ScalingCase::A, v0_l0, epsilon)
    }

    pub fn case_b(alpha: f64, v0_l0: f64, epsilon: f64) -> Result<Self> {
        Self::new(ScalingCase::B { alpha }, v0_l0, epsilon)
    }

    pub fn c_of_eps(&self) -> f64 {
        match self.case {
            ScalingCase::A => self.epsilon,
            ScalingCase::B { alpha } => self.epsilon.powf(alpha),
        }
    }

    /// Well depth `V_eps = V0 L0 / (2 c(eps))`.
    pub fn v_eps(&self) -> f64 {
        self.v0_l0 / (2.0 * self.c_of_eps())
    }

    /// The complex potential value `-i V_eps` of the absorbing region.
    pub fn absorber_potential(&self) -> Complex64 {
        Complex64::new(0.0, -self.v_eps())
    }

    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        let case = match self.case {
            ScalingCase::A => "a".to_string(),
            ScalingCase::B { alpha } => format!("b(alpha={alpha})"),
        };
        vec![
            ("scaling.case".into(), case),
            ("scaling.v0_l0".into(), format!("{}", self.v0_l0)),
            ("scaling.epsilon".into(), format!("{}", self.epsilon)),
        ]
    }
}

/// Region wavenumber `k_i = sqrt(k^2 - 2m v / hbar^2)` with `Im(k_i) >= 0`.
///
/// The principal square root already lands in the closed upper half plane for
/// every admissible potential (`Im(v) <= 0`); the sign flip guards the signed
/// -zero edge of the branch cut.
pub fn region_wavenumber(k: f64, region: &Region, units: Units) -> Result<Complex64> {
    wavenumber_for_potential(k, region.v, units)
}

/// Same as [`region_wavenumber`] for a bare potential value.
pub fn wavenumber_for_potential(k: f64, v: Complex64, units: Units) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber k must be > 0, got {k}")));
    }
    let arg = Complex64::new(k * k, 0.0) - units.two_m_over_hbar2() * v;
    let mut root = arg.sqrt();
    if root.im < 0.0 {
        root = -root;
    }
    if root.im == 0.0 && root.re < 0.0 {
        root = -root;
    }
    Ok(root)
}

/// Absorber-region wavenumber `q_eps = sqrt(k^2 + i m V0 L0 / (hbar^2 c(eps)))`
/// with `Im(q_eps) > 0`.
pub fn absorber_q(k: f64, scaling: &AbsorberScaling, units: Units) -> Result<Complex64> {
    if !(scaling.epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "epsilon must be > 0, got {}",
            scaling.epsilon
        )));
    }
    wavenumber_for_potential(k, scaling.absorber_potential(), units)
}

/// The two measurement geometries used throughout: a free line with a narrow
/// absorber around the arrival point, or the same with a rectangular barrier
/// strictly to the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    FreeAbsorber,
    BarrierAbsorber { u: f64, a: f64, b: f64 },
}

/// Build one of the standard measurement profiles.
///
/// `FreeAbsorber` yields regions `(-inf, -eps], [-eps, eps], [eps, inf)`;
/// `BarrierAbsorber` yields the five-region layout indexed `0..=4` with the
/// barrier `[a, b]` strictly left of the absorber (`a < b < -eps`).
pub fn standard_profiles(kind: ProfileKind, scaling: &AbsorberScaling) -> Result<PotentialProfile> {
    let eps = scaling.epsilon;
    let v_abs = scaling.absorber_potential();
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        ProfileKind::FreeAbsorber => PotentialProfile::new(vec![
            Region::new(f64::NEG_INFINITY, -eps, zero)?,
            Region::new(-eps, eps, v_abs)?,
            Region::new(eps, f64::INFINITY, zero)?,
        ]),
        ProfileKind::BarrierAbsorber { u, a, b } => {
            if !(a < b) {
                return Err(Error::Config(format!(
                    "barrier needs a < b, got a={a}, b={b}"
                )));
            }
            if !(b < -eps) {
                return Err(Error::Config(format!(
                    "barrier must lie strictly left of the absorber: need b < -eps, got b={b}, eps={eps}"
                )));
            }
            PotentialProfile::new(vec![
                Region::new(f64::NEG_INFINITY, a, zero)?,
                Region::new(a, b, Complex64::new(u, 0.0))?,
                Region::new(b, -eps, zero)?,
                Region::new(-eps, eps, v_abs)?,
                Region::new(eps, f64::INFINITY, zero)?,
            ])
        }
    }
}
