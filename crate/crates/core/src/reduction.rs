//! Reconstruction of high-mode components from a bounded history of low
//! modes, and the induced delayed low-mode dynamics.
//!
//! The map is realized by its own approximation scheme: integrate the
//! high-mode equation from t = -M with zero initial data, driven by the
//! recorded low-mode history, and certify the truncation error by the
//! Cauchy residual between the M and M/2 runs. alpha = 0 throughout.

use crate::error::{Error, Result};
use crate::spectral::{phi1, project_high, project_low, ProblemSpec, SpectralField, Trajectory};

/// Uniformly sampled P_N-projected history over [-M, 0]; the last sample
/// sits at t = 0.
#[derive(Debug, Clone)]
pub struct LowModeHistory {
    samples: Vec<SpectralField>,
    pub n_low: usize,
    pub dt: f64,
}

impl LowModeHistory {
    pub fn new(samples: Vec<SpectralField>, n_low: usize, dt: f64) -> Result<Self> {
        if samples.len() < 2 || dt <= 0.0 {
            return Err(Error::InvalidArgument("history needs >= 2 samples and dt > 0".into()));
        }
        let samples: Vec<SpectralField> = samples
            .into_iter()
            .map(|s| project_low(&s, n_low))
            .collect::<Result<_>>()?;
        Ok(Self { samples, n_low, dt })
    }

    /// Take the trailing window of a trajectory and project it.
    pub fn from_trajectory(traj: &Trajectory, n_low: usize, window: f64) -> Result<Self> {
        let n_keep = (window / traj.dt).round() as usize + 1;
        if n_keep > traj.len() {
            return Err(Error::InvalidArgument(format!(
                "trajectory of {} samples cannot supply a window of {}",
                traj.len(),
                n_keep
            )));
        }
        let tail = traj.samples[traj.len() - n_keep..].to_vec();
        Self::new(tail, n_low, traj.dt)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Covered span M = (len - 1) dt.
    pub fn span(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn last(&self) -> &SpectralField {
        self.samples.last().expect("nonempty history")
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len() && self.dt == other.dt && self.n_low == other.n_low
    }

    /// Piecewise-linear interpolation at t in [-span, 0].
    pub fn interp(&self, t: f64) -> SpectralField {
        let s = (t + self.span()) / self.dt;
        let i = s.floor().clamp(0.0, (self.len() - 2) as f64) as usize;
        let w = (s - i as f64).clamp(0.0, 1.0);
        let mut out = self.samples[i].scaled(1.0 - w);
        out.add_scaled(w, &self.samples[i + 1]);
        out
    }
}

/// Output of the high-mode reconstruction.
#[derive(Debug, Clone)]
pub struct PhiResult {
    /// Q_N part at t = 0 (P_N part structurally zero).
    pub reconstructed: SpectralField,
    pub m_used: f64,
    /// ||result(M) - result(M/2)|| at t = 0; the truncation certificate.
    pub cauchy_residual: f64,
    /// Set when the spectral-gap condition lambda_{N+1} > L fails.
    pub unreliable: bool,
}

/// Integrate the high-mode equation over [-m, 0] with zero data at -m,
/// returning the path on the history grid.
pub fn solve_phi_path(spec: &ProblemSpec, history: &LowModeHistory, m: f64) -> Result<Vec<SpectralField>> {
    if m <= 0.0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    if m > history.span() + 1e-9 * history.dt {
        return Err(Error::InvalidArgument(format!(
            "history covers only [{:.6}, 0], cannot integrate from -{}",
            -history.span(),
            m
        )));
    }
    let n = history.n_low;
    let dt = history.dt;
    let n_steps = (m / dt).round() as usize;
    let mut u_minus = spec.zero_field();
    let mut path = Vec::with_capacity(n_steps + 1);
    path.push(u_minus.clone());
    for i in 0..n_steps {
        let t = -m + i as f64 * dt;
        let u_plus = history.interp(t);
        let mut total = u_minus.clone();
        total.add_scaled(1.0, &u_plus);
        let f_total = spec.eval_nonlinearity(&total)?;
        // Q_N (f + g), then exact diagonal exponential on the high block
        for k in n..u_minus.len() {
            let z = spec.eigenvalues[k] * dt;
            let forcing = f_total.coeffs[k] + spec.forcing.coeffs[k];
            u_minus.coeffs[k] = (-z).exp() * u_minus.coeffs[k] + dt * phi1(z) * forcing;
        }
        if !u_minus.is_finite() {
            return Err(Error::Blowup { time: t + dt });
        }
        path.push(u_minus.clone());
    }
    Ok(path)
}

/// Reconstruct the Q_N part at t = 0 from the low-mode history, with the
/// Cauchy residual computed by re-running from -M/2.
pub fn solve_phi(spec: &ProblemSpec, history: &LowModeHistory, m: f64) -> Result<PhiResult> {
    let full = solve_phi_path(spec, history, m)?;
    let half = solve_phi_path(spec, history, (m / 2.0).max(history.dt))?;
    let reconstructed = project_high(full.last().unwrap(), history.n_low)?;
    let cauchy_residual = reconstructed.sub(half.last().unwrap()).norm_h();
    let unreliable = if history.n_low < spec.m_grid() {
        spec.lipschitz_l >= spec.eigenvalues[history.n_low]
    } else {
        false
    };
    Ok(PhiResult { reconstructed, m_used: m, cauchy_residual, unreliable })
}

/// Empirical Lipschitz ratio of the reconstruction map in the weighted
/// sup norm sup_{t<=0} exp(beta t) ||.||.
pub fn verify_phi_lipschitz(
    spec: &ProblemSpec,
    history1: &LowModeHistory,
    history2: &LowModeHistory,
    m: f64,
    beta_probe: f64,
) -> Result<f64> {
    if !history1.same_grid(history2) {
        return Err(Error::InvalidArgument("histories are on different grids".into()));
    }
    let p1 = solve_phi_path(spec, history1, m)?;
    let p2 = solve_phi_path(spec, history2, m)?;
    let dt = history1.dt;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (i, (a, b)) in p1.iter().zip(&p2).enumerate() {
        let t = -m + i as f64 * dt;
        let w = (beta_probe * t).exp();
        num = num.max(w * a.sub(b).norm_h());
        let u1 = history1.interp(t);
        let u2 = history2.interp(t);
        den = den.max(w * u1.sub(&u2).norm_h());
    }
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

/// One step of the delayed low-mode system: advance the P_N part with the
/// high modes supplied by the reconstruction over the available window.
pub fn reduced_dde_step(
    spec: &ProblemSpec,
    history: &LowModeHistory,
    dt: f64,
) -> Result<SpectralField> {
    if dt <= 0.0 {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let m = history.span();
    if m <= 0.0 {
        return Err(Error::InvalidArgument("history window too short".into()));
    }
    let phi0 = solve_phi(spec, history, m)?;
    let u_plus = history.last();
    let mut total = u_plus.clone();
    total.add_scaled(1.0, &phi0.reconstructed);
    let f_total = spec.eval_nonlinearity(&total)?;
    let mut next = u_plus.clone();
    for i in 0..history.n_low {
        let z = spec.eigenvalues[i] * dt;
        let forcing = f_total.coeffs[i] + spec.forcing.coeffs[i];
        next.coeffs[i] = (-z).exp() * u_plus.coeffs[i] + dt * phi1(z) * forcing;
    }
    if !next.is_finite() {
        return Err(Error::Blowup { time: dt });
    }
    project_low(&next, history.n_low)
}
