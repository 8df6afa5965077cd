//! Truncated-eigenbasis representation of the abstract parabolic model
//! du/dt + A u - f(u) = g and its time integration.
//!
//! The state is a coefficient vector in the eigenbasis of the positive
//! self-adjoint operator A. The linear part is diagonal, which makes the
//! exponential-Euler scheme exact on the linear flow; pointwise
//! nonlinearities are evaluated pseudo-spectrally on a dealiased
//! collocation grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenbasis tag. Determines how coefficients map to physical space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// sin(n pi x / L) on (0, L), n = 1..M.
    DirichletSine,
    /// 1, cos(2 pi k x / L), sin(2 pi k x / L) stored as
    /// [c0, a1, b1, a2, b2, ...].
    PeriodicFourier,
}

/// Coefficient vector of u in the truncated eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub coeffs: Vec<f64>,
    pub basis: Basis,
    pub domain_length: f64,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>, basis: Basis, domain_length: f64) -> Self {
        assert!(!coeffs.is_empty(), "field must have at least one mode");
        assert!(domain_length > 0.0, "domain length must be positive");
        Self { coeffs, basis, domain_length }
    }

    pub fn zeros(m_grid: usize, basis: Basis, domain_length: f64) -> Self {
        Self::new(vec![0.0; m_grid], basis, domain_length)
    }

    /// Field equal to the n-th basis vector (1-based).
    pub fn unit_mode(n: usize, m_grid: usize, basis: Basis, domain_length: f64) -> Self {
        assert!(n >= 1 && n <= m_grid);
        let mut f = Self::zeros(m_grid, basis, domain_length);
        f.coeffs[n - 1] = 1.0;
        f
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Plain l2 norm of the coefficient vector (the H norm).
    pub fn norm_h(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.basis == other.basis
            && self.len() == other.len()
            && self.domain_length == other.domain_length
    }

    pub fn add_scaled(&mut self, scale: f64, other: &Self) {
        debug_assert!(self.same_layout(other));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert!(self.same_layout(other));
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Self { coeffs, basis: self.basis, domain_length: self.domain_length }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        Self { coeffs, basis: self.basis, domain_length: self.domain_length }
    }

    /// Value of the n-th basis function at x (1-based mode index).
    pub fn basis_value(&self, n: usize, x: f64) -> f64 {
        basis_value(self.basis, self.domain_length, n, x)
    }

    /// Evaluate the finite eigenfunction sum at a single point.
    pub fn eval_at(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.basis_value(i + 1, x))
            .sum()
    }
}

fn basis_value(basis: Basis, domain_length: f64, n: usize, x: f64) -> f64 {
    match basis {
        Basis::DirichletSine => (n as f64 * std::f64::consts::PI * x / domain_length).sin(),
        Basis::PeriodicFourier => {
            if n == 1 {
                1.0
            } else {
                let k = (n / 2) as f64;
                let arg = 2.0 * std::f64::consts::PI * k * x / domain_length;
                if n % 2 == 0 {
                    arg.cos()
                } else {
                    arg.sin()
                }
            }
        }
    }
}

/// Pointwise scalar nonlinearities applied on the collocation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointwiseKind {
    /// f(u) = sin(u), globally 1-Lipschitz.
    Sin,
    /// f(u) = u - u^3 (Chafee-Infante type); requires the radial cutoff
    /// to be globally Lipschitz.
    CutoffCubic,
}

impl PointwiseKind {
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            PointwiseKind::Sin => v.sin(),
            PointwiseKind::CutoffCubic => v - v * v * v,
        }
    }
}

/// Specification of the nonlinear map f.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearitySpec {
    Zero,
    /// Scalar function applied pointwise on a dealiased grid, multiplied
    /// by a smooth radial bump vanishing outside norm 2R.
    Pointwise { kind: PointwiseKind },
    /// f(u) = sum_{n<=N} lambda_n phi(u_n) e_n with phi(x) = x on [-1,1],
    /// |phi'| <= 1 and compact support.
    ModalCutoff { n_modes: usize },
}

/// Scalar cutoff: identity on [-1,1], |phi'| <= 1, supported on [-11,11].
pub fn modal_phi(x: f64) -> f64 {
    x * radial_profile(x.abs(), 1.0, 11.0)
}

/// Smootherstep-based profile: 1 for r <= lo, 0 for r >= hi.
fn radial_profile(r: f64, lo: f64, hi: f64) -> f64 {
    if r <= lo {
        1.0
    } else if r >= hi {
        0.0
    } else {
        let t = (r - lo) / (hi - lo);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Radial bump for the global Lipschitz cutoff: 1 inside the ball of
/// radius R, 0 outside radius 2R.
pub fn cutoff_bump(norm: f64, radius: f64) -> f64 {
    radial_profile(norm / radius, 1.0, 2.0)
}

/// Operator eigenvalue presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorPreset {
    /// lambda_n = nu (n pi / L)^2, Dirichlet sine basis.
    DirichletHeat { nu: f64, domain_length: f64 },
    /// lambda = shift for the constant mode, nu (2 pi k / L)^2 for each
    /// cos/sin pair. The shift keeps A strictly positive.
    PeriodicHeat { nu: f64, domain_length: f64, constant_mode_shift: f64 },
    /// Explicit eigenvalue list (basis tag dirichlet_sine).
    Explicit { eigenvalues: Vec<f64> },
}

pub const DEFAULT_CONSTANT_MODE_SHIFT: f64 = 1e-2;

/// Abstract problem: operator spectrum, nonlinearity, forcing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    /// Positive nondecreasing eigenvalues of A, one per stored mode.
    pub eigenvalues: Vec<f64>,
    pub nu: f64,
    /// Exponent of the Lipschitz condition, in [0,1).
    pub alpha: f64,
    /// Global Lipschitz constant of f as a map H^alpha -> H^{-alpha}.
    pub lipschitz_l: f64,
    pub nonlinearity: NonlinearitySpec,
    pub forcing: SpectralField,
    /// Radius of the absorbing-ball cutoff applied to pointwise f.
    pub cutoff_radius: f64,
    pub basis: Basis,
    pub domain_length: f64,
}

/// Build a ProblemSpec skeleton (zero nonlinearity and forcing) from an
/// operator preset.
pub fn make_operator(preset: OperatorPreset, m_grid: usize) -> Result<ProblemSpec> {
    if m_grid == 0 {
        return Err(Error::InvalidArgument("m_grid must be >= 1".into()));
    }
    let (eigenvalues, basis, domain_length, nu) = match preset {
        OperatorPreset::DirichletHeat { nu, domain_length } => {
            if nu <= 0.0 || domain_length <= 0.0 {
                return Err(Error::InvalidArgument("nu and L must be positive".into()));
            }
            let lam: Vec<f64> = (1..=m_grid)
                .map(|n| {
                    let k = n as f64 * std::f64::consts::PI / domain_length;
                    nu * k * k
                })
                .collect();
            (lam, Basis::DirichletSine, domain_length, nu)
        }
        OperatorPreset::PeriodicHeat { nu, domain_length, constant_mode_shift } => {
            if nu <= 0.0 || domain_length <= 0.0 || constant_mode_shift <= 0.0 {
                return Err(Error::InvalidArgument(
                    "nu, L and constant-mode shift must be positive".into(),
                ));
            }
            let mut lam = Vec::with_capacity(m_grid);
            for n in 1..=m_grid {
                if n == 1 {
                    lam.push(constant_mode_shift);
                } else {
                    let k = (n / 2) as f64 * 2.0 * std::f64::consts::PI / domain_length;
                    lam.push(nu * k * k);
                }
            }
            (lam, Basis::PeriodicFourier, domain_length, nu)
        }
        OperatorPreset::Explicit { eigenvalues } => {
            if eigenvalues.len() != m_grid {
                return Err(Error::InvalidArgument(format!(
                    "explicit eigenvalue list has length {}, expected {}",
                    eigenvalues.len(),
                    m_grid
                )));
            }
            (eigenvalues, Basis::DirichletSine, std::f64::consts::PI, 1.0)
        }
    };
    for w in eigenvalues.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidArgument("eigenvalues must be nondecreasing".into()));
        }
    }
    if eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidArgument("eigenvalues must be strictly positive".into()));
    }
    Ok(ProblemSpec {
        eigenvalues,
        nu,
        alpha: 0.0,
        lipschitz_l: 1.0,
        nonlinearity: NonlinearitySpec::Zero,
        forcing: SpectralField::zeros(m_grid, basis, domain_length),
        cutoff_radius: 50.0,
        basis,
        domain_length,
    })
}

impl ProblemSpec {
    pub fn m_grid(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn with_nonlinearity(mut self, f: NonlinearitySpec, lipschitz_l: f64) -> Self {
        self.nonlinearity = f;
        self.lipschitz_l = lipschitz_l;
        self
    }

    pub fn with_forcing(mut self, g: SpectralField) -> Self {
        assert!(g.same_layout(&self.forcing), "forcing layout mismatch");
        self.forcing = g;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        assert!((0.0..1.0).contains(&alpha), "alpha must be in [0,1)");
        self.alpha = alpha;
        self
    }

    pub fn with_cutoff_radius(mut self, r: f64) -> Self {
        assert!(r > 0.0);
        self.cutoff_radius = r;
        self
    }

    pub fn zero_field(&self) -> SpectralField {
        SpectralField::zeros(self.m_grid(), self.basis, self.domain_length)
    }

    fn check_compatible(&self, u: &SpectralField) -> Result<()> {
        if u.basis != self.basis || u.len() != self.m_grid() {
            return Err(Error::BasisMismatch(format!(
                "field has {:?}/{} modes, spec expects {:?}/{}",
                u.basis,
                u.len(),
                self.basis,
                self.m_grid()
            )));
        }
        Ok(())
    }

    /// Weighted Sobolev norm ||u||_{H^s} = (sum lambda_n^s u_n^2)^{1/2}.
    pub fn norm_h_s(&self, u: &SpectralField, s: f64) -> f64 {
        u.coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, l)| l.powf(s) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluate the nonlinearity f(u) in modal coefficients.
    pub fn eval_nonlinearity(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check_compatible(u)?;
        match &self.nonlinearity {
            NonlinearitySpec::Zero => Ok(self.zero_field()),
            NonlinearitySpec::ModalCutoff { n_modes } => {
                let n = (*n_modes).min(self.m_grid());
                let mut out = self.zero_field();
                for i in 0..n {
                    out.coeffs[i] = self.eigenvalues[i] * modal_phi(u.coeffs[i]);
                }
                Ok(out)
            }
            NonlinearitySpec::Pointwise { kind } => {
                let bump = cutoff_bump(u.norm_h(), self.cutoff_radius);
                if bump == 0.0 {
                    return Ok(self.zero_field());
                }
                let n_points = dealias_points(self.m_grid(), self.basis);
                let grid = to_grid(u, n_points)?;
                let fg: Vec<f64> = grid.iter().map(|&v| kind.apply(v)).collect();
                let mut out = from_grid(&fg, self.m_grid(), self.basis, self.domain_length)?;
                if bump != 1.0 {
                    out = out.scaled(bump);
                }
                Ok(out)
            }
        }
    }

    /// Right-hand side of du/dt = -A u + f(u) + g.
    pub fn eval_rhs(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check_compatible(u)?;
        let mut r = self.eval_nonlinearity(u)?;
        for i in 0..r.len() {
            r.coeffs[i] += -self.eigenvalues[i] * u.coeffs[i] + self.forcing.coeffs[i];
        }
        Ok(r)
    }
}

/// Collocation grid size with 3/2-style dealiasing margin.
pub fn dealias_points(m_grid: usize, basis: Basis) -> usize {
    match basis {
        Basis::DirichletSine => 2 * m_grid,
        // need strictly more than twice the largest wavenumber
        Basis::PeriodicFourier => 2 * m_grid + 1,
    }
}

/// Evaluate the eigenfunction sum at n_points collocation nodes.
///
/// Dirichlet: interior nodes x_j = j L/(P+1), j = 1..P.
/// Periodic: x_j = j L/P, j = 0..P-1.
pub fn to_grid(field: &SpectralField, n_points: usize) -> Result<Vec<f64>> {
    let m = field.len();
    if n_points < m {
        return Err(Error::Aliasing(format!(
            "n_points = {} < m_grid = {}",
            n_points, m
        )));
    }
    let l = field.domain_length;
    let nodes = collocation_nodes(field.basis, l, n_points);
    Ok(nodes.iter().map(|&x| field.eval_at(x)).collect())
}

pub fn collocation_nodes(basis: Basis, domain_length: f64, n_points: usize) -> Vec<f64> {
    match basis {
        Basis::DirichletSine => (1..=n_points)
            .map(|j| j as f64 * domain_length / (n_points as f64 + 1.0))
            .collect(),
        Basis::PeriodicFourier => (0..n_points)
            .map(|j| j as f64 * domain_length / n_points as f64)
            .collect(),
    }
}

/// Inverse of `to_grid`: discrete orthogonal projection back onto the
/// first m_grid modes. Exact up to rounding when n_points avoids
/// aliasing of the represented wavenumbers.
pub fn from_grid(values: &[f64], m_grid: usize, basis: Basis, domain_length: f64) -> Result<SpectralField> {
    let p = values.len();
    if p < m_grid {
        return Err(Error::Aliasing(format!(
            "grid has {} points, need at least {}",
            p, m_grid
        )));
    }
    let mut coeffs = vec![0.0; m_grid];
    match basis {
        Basis::DirichletSine => {
            // discrete sine orthogonality on interior nodes
            for n in 1..=m_grid {
                let mut acc = 0.0;
                for (j, &v) in values.iter().enumerate() {
                    let x = (j as f64 + 1.0) / (p as f64 + 1.0);
                    acc += v * (n as f64 * std::f64::consts::PI * x).sin();
                }
                coeffs[n - 1] = 2.0 * acc / (p as f64 + 1.0);
            }
        }
        Basis::PeriodicFourier => {
            let max_k = m_grid / 2;
            if p < 2 * max_k + 1 {
                return Err(Error::Aliasing(format!(
                    "periodic grid has {} points, need at least {}",
                    p,
                    2 * max_k + 1
                )));
            }
            for (n, c) in coeffs.iter_mut().enumerate() {
                let n1 = n + 1;
                let mut acc = 0.0;
                for (j, &v) in values.iter().enumerate() {
                    let phase = 2.0 * std::f64::consts::PI * j as f64 / p as f64;
                    let w = if n1 == 1 {
                        1.0
                    } else {
                        let k = (n1 / 2) as f64;
                        if n1 % 2 == 0 {
                            (k * phase).cos()
                        } else {
                            (k * phase).sin()
                        }
                    };
                    acc += v * w;
                }
                *c = if n1 == 1 {
                    acc / p as f64
                } else {
                    2.0 * acc / p as f64
                };
            }
        }
    }
    Ok(SpectralField::new(coeffs, basis, domain_length))
}

/// Zero all modes with index > N (1-based). P_N projector.
pub fn project_low(u: &SpectralField, n: usize) -> Result<SpectralField> {
    if n > u.len() {
        return Err(Error::InvalidArgument(format!(
            "projector index {} out of range 0..={}",
            n,
            u.len()
        )));
    }
    let mut out = u.clone();
    for c in out.coeffs.iter_mut().skip(n) {
        *c = 0.0;
    }
    Ok(out)
}

/// Zero all modes with index <= N. Q_N = 1 - P_N.
pub fn project_high(u: &SpectralField, n: usize) -> Result<SpectralField> {
    if n > u.len() {
        return Err(Error::InvalidArgument(format!(
            "projector index {} out of range 0..={}",
            n,
            u.len()
        )));
    }
    let mut out = u.clone();
    for c in out.coeffs.iter_mut().take(n) {
        *c = 0.0;
    }
    Ok(out)
}

/// Time-stepping schemes.
///
/// Exponential Euler treats the diagonal linear part exactly and the
/// nonlinearity explicitly; with f = 0 every mode decays by the exact
/// factor exp(-lambda dt). The Crank-Nicolson IMEX variant is first-order
/// in the nonlinearity and serves as a cross-check; its explicit part
/// requires dt * L modest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExponentialEuler,
    ImexCn,
}

/// phi1(z) = (1 - exp(-z))/z, stable near z = 0.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 - z / 2.0 + z * z / 6.0
    } else {
        (-z).exp_m1() / -z
    }
}

/// One step of the default (exponential-Euler) scheme.
pub fn step(spec: &ProblemSpec, u: &SpectralField, dt: f64) -> Result<SpectralField> {
    step_scheme(spec, u, dt, Scheme::ExponentialEuler)
}

pub fn step_scheme(
    spec: &ProblemSpec,
    u: &SpectralField,
    dt: f64,
    scheme: Scheme,
) -> Result<SpectralField> {
    if dt <= 0.0 {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let fu = spec.eval_nonlinearity(u)?;
    let mut out = u.clone();
    match scheme {
        Scheme::ExponentialEuler => {
            for i in 0..out.len() {
                let z = spec.eigenvalues[i] * dt;
                let nl = fu.coeffs[i] + spec.forcing.coeffs[i];
                out.coeffs[i] = (-z).exp() * u.coeffs[i] + dt * phi1(z) * nl;
            }
        }
        Scheme::ImexCn => {
            for i in 0..out.len() {
                let z = spec.eigenvalues[i] * dt;
                let nl = fu.coeffs[i] + spec.forcing.coeffs[i];
                out.coeffs[i] = ((1.0 - z / 2.0) * u.coeffs[i] + dt * nl) / (1.0 + z / 2.0);
            }
        }
    }
    if !out.is_finite() {
        return Err(Error::Blowup { time: dt });
    }
    Ok(out)
}

/// Uniformly sampled trajectory; sample i sits at time t0 + i dt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<SpectralField>,
    pub dt: f64,
    pub t0: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn last(&self) -> &SpectralField {
        self.samples.last().expect("trajectory is nonempty")
    }
}

/// Integrate forward and record floor(t_end/dt)+1 samples (including u0).
pub fn integrate(
    spec: &ProblemSpec,
    u0: &SpectralField,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_scheme(spec, u0, t_end, dt, Scheme::ExponentialEuler)
}

pub fn integrate_scheme(
    spec: &ProblemSpec,
    u0: &SpectralField,
    t_end: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<Trajectory> {
    if t_end <= 0.0 || dt <= 0.0 {
        return Err(Error::InvalidArgument("t_end and dt must be positive".into()));
    }
    let n_steps = (t_end / dt).floor() as usize;
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push(u0.clone());
    let mut u = u0.clone();
    for i in 0..n_steps {
        u = step_scheme(spec, &u, dt, scheme).map_err(|e| match e {
            Error::Blowup { .. } => Error::Blowup { time: (i + 1) as f64 * dt },
            other => other,
        })?;
        samples.push(u.clone());
    }
    Ok(Trajectory { samples, dt, t0: 0.0 })
}
