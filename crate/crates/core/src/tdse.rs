//! Independent validation oracle: Crank-Nicolson propagation on a position
//! grid.
//!
//! One step solves `(I + i dt H / 2 hbar) psi' = (I - i dt H / 2 hbar) psi`
//! with the tridiagonal Hamiltonian factored once up front.  For a complex
//! diagonal `V = V_R - i Gamma` the scheme obeys the exact discrete balance
//! `||psi'||^2 - ||psi||^2 = -(dt / 2 hbar) sum Gamma |psi + psi'|^2 dx`,
//! which is what the absorbed-norm bookkeeping accumulates, so
//! `||psi||^2 + absorbed` is conserved to rounding.

use num_complex::Complex64;

use crate::potential::PotentialProfile;
use crate::wavepacket::GaussianSpec;
use crate::{Error, Result, Units};

/// State of the propagated wave on a uniform grid.
#[derive(Debug, Clone)]
pub struct GridState {
    pub x_grid: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub dt: f64,
    pub time: f64,
    /// Cumulative absorbed norm up to `time`.
    pub absorbed: f64,
}

impl GridState {
    pub fn norm_sq(&self) -> f64 {
        let dx = self.x_grid[1] - self.x_grid[0];
        self.psi.iter().map(|p| p.norm_sqr()).sum::<f64>() * dx
    }
}

/// Instantaneous absorption rate `(2/hbar) sum Gamma_j |psi_j|^2 dx` with the
/// cell-averaged absorber strength `Gamma_j = -Im V_j`.
pub fn absorption_rate(state: &GridState, profile: &PotentialProfile, units: Units) -> f64 {
    let dx = state.x_grid[1] - state.x_grid[0];
    let mut acc = 0.0;
    for (x, p) in state.x_grid.iter().zip(&state.psi) {
        let gamma = -profile.cell_average_potential(*x, dx).im;
        if gamma > 0.0 {
            acc += gamma * p.norm_sqr();
        }
    }
    acc * 2.0 * dx / units.hbar
}

/// Propagation setup.
#[derive(Debug, Clone)]
pub struct PropagationConfig {
    pub t_final: f64,
    /// Grid spacing; must satisfy `dx <= eps/8` when an absorber of
    /// half-width `eps` is present.
    pub dx: f64,
    /// Time step; must satisfy `dt <= m dx^2 / hbar`.
    pub dt: f64,
    /// Optional explicit box; defaults to `[x0 - 10 dx_packet, x_right + 10 dx_packet]`.
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    /// Store `|psi|^2` snapshots every this many steps.
    pub snapshot_stride: Option<usize>,
}

impl PropagationConfig {
    pub fn new(t_final: f64, dx: f64, dt: f64) -> Self {
        PropagationConfig {
            t_final,
            dx,
            dt,
            x_min: None,
            x_max: None,
            snapshot_stride: None,
        }
    }
}

/// Propagation output: the absorption-rate time series (sampled at step
/// midpoints, where the discrete balance is exact), norm bookkeeping, and
/// the final state.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    /// Midpoint times `t_n + dt/2`.
    pub rate_times: Vec<f64>,
    /// Absorption rate at the midpoint of each step.
    pub rate: Vec<f64>,
    /// `(time, ||psi||^2, absorbed)` checkpoints.
    pub norm_checks: Vec<(f64, f64, f64)>,
    /// Worst `| ||psi||^2 + absorbed - 1 |` seen at checkpoints.
    pub max_norm_defect: f64,
    pub final_state: GridState,
    /// `(time, |psi|^2 on the grid)` snapshots if requested.
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

/// Propagate a Gaussian packet under the profile's Hamiltonian.
pub fn propagate(
    spec: &GaussianSpec,
    profile: &PotentialProfile,
    cfg: &PropagationConfig,
    units: Units,
) -> Result<PropagationResult> {
    if !(cfg.t_final > 0.0) || !(cfg.dx > 0.0) || !(cfg.dt > 0.0) {
        return Err(Error::Config("t_final, dx, dt must all be positive".into()));
    }
    // absorber resolution: dx <= eps/8
    if let Ok((idx, _)) = profile.absorber() {
        let eps = 0.5 * profile.regions()[idx].width();
        if cfg.dx > eps / 8.0 + 1e-12 {
            return Err(Error::StepSize(format!(
                "dx = {} must be <= eps/8 = {} to resolve the absorber",
                cfg.dx,
                eps / 8.0
            )));
        }
    }
    let dt_bound = units.mass * cfg.dx * cfg.dx / units.hbar;
    if cfg.dt > dt_bound * (1.0 + 1e-9) {
        return Err(Error::StepSize(format!(
            "dt = {} exceeds the accuracy bound m dx^2 / hbar = {dt_bound}",
            cfg.dt
        )));
    }

    // box: snap to multiples of dx so region edges align with grid nodes
    let x_right_interior = profile.boundaries().last().copied().unwrap_or(0.0);
    let x_min = cfg.x_min.unwrap_or(spec.x0 - 10.0 * spec.dx);
    let x_max = cfg.x_max.unwrap_or(x_right_interior + 10.0 * spec.dx);
    if !(x_min < spec.x0 && spec.x0 < x_max) {
        return Err(Error::Config("box must contain the packet center".into()));
    }
    let j_min = (x_min / cfg.dx).floor() as i64;
    let j_max = (x_max / cfg.dx).ceil() as i64;
    let n = (j_max - j_min + 1) as usize;
    let x_grid: Vec<f64> = (0..n).map(|j| (j_min + j as i64) as f64 * cfg.dx).collect();

    // initial Gaussian (position-space pair of the momentum-space packet)
    let k0 = spec.k0(units);
    let norm = (2.0 * std::f64::consts::PI * spec.dx * spec.dx).powf(-0.25);
    let mut psi: Vec<Complex64> = x_grid
        .iter()
        .map(|x| {
            let arg = -(x - spec.x0) * (x - spec.x0) / (4.0 * spec.dx * spec.dx);
            norm * arg.exp() * Complex64::from_polar(1.0, k0 * (x - spec.x0))
        })
        .collect();
    // hard walls
    psi[0] = Complex64::new(0.0, 0.0);
    psi[n - 1] = Complex64::new(0.0, 0.0);

    // cell-averaged potential and absorber strength on the grid
    let v_grid: Vec<Complex64> = x_grid
        .iter()
        .map(|x| profile.cell_average_potential(*x, cfg.dx))
        .collect();
    let gamma: Vec<f64> = v_grid.iter().map(|v| -v.im).collect();

    // tridiagonal H on the interior nodes 1..n-1 (hard walls pin the ends to
    // zero): offdiag t_c, diag -2 t_c + V_j
    let t_c = -units.hbar * units.hbar / (2.0 * units.mass * cfg.dx * cfg.dx);
    let alpha = Complex64::i() * cfg.dt / (2.0 * units.hbar);
    let a_off = alpha * t_c; // LHS off-diagonal
    let b_off = -alpha * t_c; // RHS off-diagonal
    let m = n - 2; // interior size
    let a_diag: Vec<Complex64> = v_grid[1..n - 1]
        .iter()
        .map(|v| 1.0 + alpha * (-2.0 * t_c + v))
        .collect();
    let b_diag: Vec<Complex64> = v_grid[1..n - 1]
        .iter()
        .map(|v| 1.0 - alpha * (-2.0 * t_c + v))
        .collect();

    // Thomas factorization of the constant interior LHS
    let mut c_prime = vec![Complex64::new(0.0, 0.0); m];
    let mut inv_denom = vec![Complex64::new(0.0, 0.0); m];
    inv_denom[0] = a_diag[0].finv();
    c_prime[0] = a_off * inv_denom[0];
    for j in 1..m {
        let denom = a_diag[j] - a_off * c_prime[j - 1];
        inv_denom[j] = denom.finv();
        c_prime[j] = a_off * inv_denom[j];
    }

    let steps = (cfg.t_final / cfg.dt).ceil() as usize;
    let mut rate_times = Vec::with_capacity(steps);
    let mut rate = Vec::with_capacity(steps);
    let mut snapshots = Vec::new();
    let mut norm_checks = Vec::new();
    let mut max_norm_defect: f64 = 0.0;
    let mut absorbed = 0.0;
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut prev_norm = {
        let dx = cfg.dx;
        psi.iter().map(|p| p.norm_sqr()).sum::<f64>() * dx
    };
    let norm0 = prev_norm;
    let check_stride = 100;

    for step in 0..steps {
        let t = step as f64 * cfg.dt;
        // RHS = B psi on the interior; walls stay zero
        rhs[0] = Complex64::new(0.0, 0.0);
        rhs[n - 1] = Complex64::new(0.0, 0.0);
        for j in 1..n - 1 {
            rhs[j] = b_diag[j - 1] * psi[j] + b_off * (psi[j - 1] + psi[j + 1]);
        }
        // Thomas solve on interior nodes (reuse rhs as workspace)
        rhs[1] *= inv_denom[0];
        for j in 2..n - 1 {
            rhs[j] = (rhs[j] - a_off * rhs[j - 1]) * inv_denom[j - 1];
        }
        for j in (1..n - 2).rev() {
            let sub = c_prime[j - 1] * rhs[j + 1];
            rhs[j] -= sub;
        }
        // absorbed increment: the discrete balance gives exactly
        // ||psi'||^2 - ||psi||^2 = -(dt/2 hbar) sum Gamma |psi + psi'|^2 dx
        let mut inc = 0.0;
        for j in 0..n {
            if gamma[j] > 0.0 {
                inc += gamma[j] * (psi[j] + rhs[j]).norm_sqr();
            }
        }
        let inc = inc * cfg.dt * cfg.dx / (2.0 * units.hbar);
        absorbed += inc;
        rate_times.push(t + 0.5 * cfg.dt);
        rate.push(inc / cfg.dt);
        std::mem::swap(&mut psi, &mut rhs);

        if let Some(stride) = cfg.snapshot_stride {
            if step % stride == 0 {
                snapshots.push((t + cfg.dt, psi.iter().map(|p| p.norm_sqr()).collect()));
            }
        }
        if step % check_stride == 0 || step == steps - 1 {
            let norm = psi.iter().map(|p| p.norm_sqr()).sum::<f64>() * cfg.dx;
            if norm > prev_norm + 1e-6 {
                return Err(Error::StepSize(format!(
                    "instability detected: norm grew from {prev_norm} to {norm}"
                )));
            }
            prev_norm = norm;
            let defect = (norm + absorbed - norm0).abs();
            max_norm_defect = max_norm_defect.max(defect);
            norm_checks.push((t + cfg.dt, norm, absorbed));
        }
    }

    let final_state = GridState {
        x_grid,
        psi,
        dt: cfg.dt,
        time: steps as f64 * cfg.dt,
        absorbed,
    };
    Ok(PropagationResult {
        rate_times,
        rate,
        norm_checks,
        max_norm_defect,
        final_state,
        snapshots,
    })
}

/// Linear interpolation of the rate series onto arbitrary times.
pub fn interpolate_rate(result: &PropagationResult, t: f64) -> f64 {
    let ts = &result.rate_times;
    if ts.is_empty() || t <= ts[0] || t >= *ts.last().unwrap() {
        return 0.0;
    }
    let idx = ts.partition_point(|x| *x < t);
    let (t0, t1) = (ts[idx - 1], ts[idx]);
    let (r0, r1) = (result.rate[idx - 1], result.rate[idx]);
    r0 + (r1 - r0) * (t - t0) / (t1 - t0)
}
