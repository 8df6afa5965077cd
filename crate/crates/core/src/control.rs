//! Rank-one feedback stabilization of the 1D linear heat equation
//! du/dt = nu u_xx - a(x) u: eigensolve the Sturm-Liouville operator,
//! move the unstable block's spectrum by companion-form pole placement
//! with a single feedback vector, and verify on the full discretization.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{fit_decay_active, DecayFit};

/// Potential a(x) of the operator nu d2/dx2 - a(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Constant(f64),
    /// Values on the interior finite-difference nodes.
    Grid(Vec<f64>),
}

impl Potential {
    fn at(&self, x: f64, domain_length: f64, m_grid: usize) -> f64 {
        match self {
            Potential::Constant(a) => *a,
            Potential::Grid(values) => {
                // piecewise-linear between interior nodes
                let h = domain_length / (m_grid as f64 + 1.0);
                let s = (x / h - 1.0).clamp(0.0, (values.len() - 1) as f64);
                let i = (s.floor() as usize).min(values.len() - 2);
                let w = s - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }
}

/// Discrete Sturm-Liouville problem on (0, L) with Dirichlet ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SturmSpec {
    pub nu: f64,
    pub potential: Potential,
    pub domain_length: f64,
    pub m_grid: usize,
}

impl SturmSpec {
    pub fn new(nu: f64, potential: Potential, domain_length: f64, m_grid: usize) -> Result<Self> {
        if nu <= 0.0 || domain_length <= 0.0 {
            return Err(Error::InvalidArgument("nu and L must be positive".into()));
        }
        if m_grid < 8 {
            return Err(Error::InvalidArgument("grid size must be >= 8".into()));
        }
        if let Potential::Grid(v) = &potential {
            if v.len() != m_grid || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(
                    "grid potential must have m_grid finite values".into(),
                ));
            }
        }
        Ok(Self { nu, potential, domain_length, m_grid })
    }

    pub fn grid_spacing(&self) -> f64 {
        self.domain_length / (self.m_grid as f64 + 1.0)
    }
}

/// Eigen-decomposition of the discrete operator, eigenvalues sorted
/// nonincreasing (unstable modes first).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column k is the eigenvector of eigenvalues[k], orthonormal.
    pub eigenvectors: DMatrix<f64>,
}

/// Second-order central finite differences with Dirichlet rows eliminated.
pub fn eigensolve(spec: &SturmSpec) -> Result<EigenDecomposition> {
    let m = spec.m_grid;
    let h = spec.grid_spacing();
    let mut mat = DMatrix::zeros(m, m);
    for i in 0..m {
        let x = (i as f64 + 1.0) * h;
        mat[(i, i)] = -2.0 * spec.nu / (h * h) - spec.potential.at(x, spec.domain_length, m);
        if i > 0 {
            mat[(i, i - 1)] = spec.nu / (h * h);
        }
        if i + 1 < m {
            mat[(i, i + 1)] = spec.nu / (h * h);
        }
    }
    symmetric_sorted_eigen(mat)
}

/// Spectral assembly in the Dirichlet sine basis, used as an independent
/// cross-check of the finite-difference path.
pub fn eigensolve_spectral(spec: &SturmSpec, n_modes: usize) -> Result<EigenDecomposition> {
    let l = spec.domain_length;
    let nq = 8 * n_modes.max(spec.m_grid);
    let hq = l / nq as f64;
    let mut mat = DMatrix::zeros(n_modes, n_modes);
    for mi in 0..n_modes {
        let km = (mi as f64 + 1.0) * std::f64::consts::PI / l;
        mat[(mi, mi)] = -spec.nu * km * km;
        for ni in mi..n_modes {
            let kn = (ni as f64 + 1.0) * std::f64::consts::PI / l;
            // midpoint quadrature of (2/L) a(x) sin(km x) sin(kn x)
            let mut acc = 0.0;
            for q in 0..nq {
                let x = (q as f64 + 0.5) * hq;
                acc += spec.potential.at(x, l, spec.m_grid) * (km * x).sin() * (kn * x).sin();
            }
            let val = 2.0 / l * acc * hq;
            mat[(mi, ni)] -= val;
            if ni != mi {
                mat[(ni, mi)] -= val;
            }
        }
    }
    symmetric_sorted_eigen(mat)
}

fn symmetric_sorted_eigen(mat: DMatrix<f64>) -> Result<EigenDecomposition> {
    let m = mat.nrows();
    let eig = nalgebra::SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    let mut eigenvectors = DMatrix::zeros(m, m);
    for (c, &i) in order.iter().enumerate() {
        eigenvectors.set_column(c, &eig.eigenvectors.column(i));
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Number of nonnegative eigenvalues (mu = 0 counts as unstable),
/// assuming nonincreasing order.
pub fn count_unstable(eigenvalues: &[f64]) -> usize {
    eigenvalues.iter().take_while(|&&mu| mu >= 0.0).count()
}

/// Rank-one feedback design on the unstable block, in eigen-coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedbackDesign {
    /// Feedback functional coefficients (length N).
    pub l: Vec<f64>,
    /// Companion-coordinate gains: the gap between target and open
    /// characteristic coefficients.
    pub l_companion: Vec<f64>,
    /// Actuation direction: the last cyclic basis vector (length N).
    pub w: Vec<f64>,
    pub open_spectrum: Vec<f64>,
    pub target_spectrum: Vec<f64>,
    /// Eigenvalues of the assembled closed-loop block.
    pub closed_spectrum_check: Vec<f64>,
    /// Condition number of the eigen-to-companion change of basis.
    pub companion_condition: f64,
}

impl FeedbackDesign {
    pub fn is_empty(&self) -> bool {
        self.l.is_empty()
    }

    pub fn n(&self) -> usize {
        self.l.len()
    }
}

/// Monic polynomial coefficients [c0, ..., c_{N-1}] of prod (s - r_i).
fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= r * ci;
        }
        c = next;
    }
    c.truncate(roots.len());
    c
}

/// Companion-form basis in eigen-coordinates for the actuation vector w:
/// column N is w, and columns satisfy A s_j = s_{j-1} + alpha_j w with
/// alpha_j = -c_{j-1}, so the operator becomes the canonical companion
/// matrix (superdiagonal ones, characteristic row at the bottom).
fn companion_basis(open_spectrum: &[f64], w: &[f64], monic: &[f64]) -> DMatrix<f64> {
    let n = open_spectrum.len();
    let mut s = DMatrix::zeros(n, n);
    let mut col = DVector::from_column_slice(w);
    s.set_column(n - 1, &col);
    for j in (1..n).rev() {
        // column j-1 holds s_j = A s_{j+1} - alpha_{j+1} w, with
        // alpha_{j+1} = -monic[j] and s_{j+1} in the column just set
        let mut prev = DVector::zeros(n);
        for i in 0..n {
            prev[i] = open_spectrum[i] * col[i] + monic[j] * w[i];
        }
        s.set_column(j - 1, &prev);
        col = prev;
    }
    s
}

/// Place the unstable block's poles at the target spectrum via rank-one
/// feedback with w = e_N, the last cyclic basis vector of e = (1, ..., 1)
/// in eigen-coordinates.
pub fn place_poles(open_spectrum: &[f64], target_spectrum: &[f64]) -> Result<FeedbackDesign> {
    let n = open_spectrum.len();
    if target_spectrum.len() != n {
        return Err(Error::InvalidArgument("spectrum lists must have equal length".into()));
    }
    if n == 0 {
        return Ok(FeedbackDesign {
            l: vec![],
            l_companion: vec![],
            w: vec![],
            open_spectrum: vec![],
            target_spectrum: vec![],
            closed_spectrum_check: vec![],
            companion_condition: 1.0,
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (open_spectrum[i] - open_spectrum[j]).abs() < 1e-10 {
                return Err(Error::PolePlacement(format!(
                    "repeated open eigenvalue {} prevents a cyclic vector",
                    open_spectrum[i]
                )));
            }
        }
        if n > 1 && open_spectrum[i].abs() < 1e-10 {
            return Err(Error::PolePlacement(
                "zero open eigenvalue makes w = e_N uncontrollable".into(),
            ));
        }
    }
    // w = e_N = A^{N-1} e with e = (1,...,1): components mu_i^{N-1}
    let w: Vec<f64> = open_spectrum.iter().map(|mu| mu.powi(n as i32 - 1)).collect();
    // explicit modal gains from det(sI - A - w l^T) = q(s) at s = mu_k:
    // l_k = -q(mu_k) / (w_k prod_{j != k} (mu_k - mu_j))
    let q = |s: f64| target_spectrum.iter().map(|t| s - t).product::<f64>();
    let l: Vec<f64> = (0..n)
        .map(|k| {
            let denom: f64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| open_spectrum[k] - open_spectrum[j])
                .product();
            -q(open_spectrum[k]) / (w[k] * denom)
        })
        .collect();
    // companion-coordinate gains: gap of characteristic coefficients in
    // the convention p(s) = s^N - alpha_N s^{N-1} - ... - alpha_1
    let open_c = poly_from_roots(open_spectrum);
    let target_c = poly_from_roots(target_spectrum);
    let l_companion: Vec<f64> = (0..n).map(|j| open_c[j] - target_c[j]).collect();
    let s_basis = companion_basis(open_spectrum, &w, &open_c);
    let svd = s_basis.svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let companion_condition = smax / smin.max(f64::MIN_POSITIVE);

    // verification: eigenvalues of diag(mu) + w l^T must equal targets
    let mut closed = DMatrix::zeros(n, n);
    for i in 0..n {
        closed[(i, i)] = open_spectrum[i];
        for j in 0..n {
            closed[(i, j)] += w[i] * l[j];
        }
    }
    let eigs = closed.complex_eigenvalues();
    let mut closed_spectrum_check: Vec<f64> = eigs.iter().map(|c| c.re).collect();
    closed_spectrum_check.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut sorted_targets = target_spectrum.to_vec();
    sorted_targets.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let scale = sorted_targets.iter().map(|t| t.abs()).fold(1.0f64, f64::max);
    for (got, want) in closed_spectrum_check.iter().zip(&sorted_targets) {
        if (got - want).abs() > 1e-8 * scale {
            return Err(Error::PolePlacement(format!(
                "closed-loop spectrum {:?} does not match targets {:?}",
                closed_spectrum_check, sorted_targets
            )));
        }
    }
    let max_imag = eigs.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max);
    if max_imag > 1e-8 * scale {
        return Err(Error::PolePlacement(format!(
            "closed-loop spectrum has imaginary parts up to {max_imag}"
        )));
    }
    Ok(FeedbackDesign {
        l,
        l_companion,
        w,
        open_spectrum: open_spectrum.to_vec(),
        target_spectrum: target_spectrum.to_vec(),
        closed_spectrum_check,
        companion_condition,
    })
}

/// Decay diagnostics from the full closed-loop simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosedLoopReport {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit: DecayFit,
    /// Slowest expected closed-loop rate min(|targets|, |mu_{N+1}|).
    pub expected_rate: f64,
}

/// Integrate the full closed-loop system in eigen-coordinates of the
/// discrete operator: du/dt = diag(mu) u + (l, u) w, with l and w
/// supported on the unstable block, and fit the decay rate of ||u||.
pub fn verify_closed_loop(
    spec: &SturmSpec,
    design: &FeedbackDesign,
    u0_modal: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<ClosedLoopReport> {
    let decomp = eigensolve(spec)?;
    let m = decomp.eigenvalues.len();
    if u0_modal.len() != m {
        return Err(Error::InvalidArgument(format!(
            "initial data has {} modes, discretization has {}",
            u0_modal.len(),
            m
        )));
    }
    let nb = design.n();
    if nb > m {
        return Err(Error::InvalidArgument("design block larger than discretization".into()));
    }
    let n_steps = (t_end / dt).floor() as usize;
    let mut u = u0_modal.to_vec();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut norms = Vec::with_capacity(n_steps + 1);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    times.push(0.0);
    norms.push(norm(&u));
    for i in 0..n_steps {
        let feedback: f64 = design.l.iter().zip(&u).map(|(li, ui)| li * ui).sum();
        let mut next = u.clone();
        for (k, x) in next.iter_mut().enumerate() {
            let lam = -decomp.eigenvalues[k]; // du/dt = -lam u + forcing
            let forcing = if k < nb { feedback * design.w[k] } else { 0.0 };
            let z = lam * dt;
            *x = (-z).exp() * u[k] + dt * crate::spectral::phi1(z) * forcing;
        }
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Blowup { time: (i + 1) as f64 * dt });
        }
        u = next;
        times.push((i + 1) as f64 * dt);
        norms.push(norm(&u));
    }
    let fit = fit_decay_active(&times, &norms);
    let slowest_target = design
        .target_spectrum
        .iter()
        .map(|t| t.abs())
        .fold(f64::INFINITY, f64::min);
    let tail_rate = if nb < m { decomp.eigenvalues[nb].abs() } else { f64::INFINITY };
    let expected_rate = if design.is_empty() {
        decomp.eigenvalues[0].abs()
    } else {
        slowest_target.min(tail_rate)
    };
    Ok(ClosedLoopReport { times, norms, fit, expected_rate })
}
