//! Delay-coordinate machinery: the delay map built from one scalar
//! observable, empirical injectivity diagnostics, nonparametric fits of
//! the reconstruction maps, and prediction through the scalar delayed
//! recursion.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{evaluate, FunctionalSpec};
use crate::spectral::Trajectory;

/// Window length sufficient for injectivity given the attractor's
/// box-counting dimension d: k = ceil((2+d) d) + 1.
pub fn required_k(dim_b: f64) -> usize {
    assert!(dim_b >= 0.0);
    ((2.0 + dim_b) * dim_b).ceil() as usize + 1
}

/// Arithmetic sandwich on the determining dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionBounds {
    /// Embedding dimension of the equilibria set (lower bound).
    pub lower: f64,
    /// Upper bound under generic forcing: dim_emb(R) + 1.
    pub upper_generic: f64,
    /// General upper bound 2 dim_B(A) + 1.
    pub upper_general: f64,
}

pub fn dimension_bounds(dim_emb_r: f64, dim_b_a: f64) -> DimensionBounds {
    assert!(dim_emb_r >= 0.0 && dim_b_a >= 0.0);
    DimensionBounds {
        lower: dim_emb_r,
        upper_generic: dim_emb_r + 1.0,
        upper_general: 2.0 * dim_b_a + 1.0,
    }
}

/// Configuration of the delay map: observable, delay, window length,
/// and the user-supplied minimal-period lower bound T0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayConfig {
    pub functional: FunctionalSpec,
    pub tau: f64,
    pub k: usize,
    pub t0_min_period: f64,
}

impl DelayConfig {
    pub fn new(functional: FunctionalSpec, tau: f64, k: usize, t0_min_period: f64) -> Result<Self> {
        if k < 1 || tau <= 0.0 {
            return Err(Error::InvalidArgument("need k >= 1 and tau > 0".into()));
        }
        if (k as f64) * tau < t0_min_period {
            return Err(Error::InvalidArgument(format!(
                "window k*tau = {} shorter than minimal period T0 = {}",
                k as f64 * tau,
                t0_min_period
            )));
        }
        Ok(Self { functional, tau, k, t0_min_period })
    }

    /// Default tau snapped to the sampling grid: max(T0/k, 10 dt).
    pub fn default_tau(t0_min_period: f64, k: usize, dt: f64) -> f64 {
        let raw = (t0_min_period / k as f64).max(10.0 * dt);
        (raw / dt).round().max(1.0) * dt
    }

    /// Delay expressed in sample steps; errors when tau is not a grid
    /// multiple (no silent interpolation).
    pub fn tau_steps(&self, dt: f64) -> Result<usize> {
        let ratio = self.tau / dt;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "tau = {} is not a positive integer multiple of dt = {}",
                self.tau, dt
            )));
        }
        Ok(m as usize)
    }
}

/// One delay-coordinate sample: coords[j] = F(u(base_time + j tau)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayVector {
    pub coords: Vec<f64>,
    pub base_time: f64,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// One delay vector per admissible base index of the trajectory.
pub fn build_delay_vectors(traj: &Trajectory, cfg: &DelayConfig) -> Result<Vec<DelayVector>> {
    let m = cfg.tau_steps(traj.dt)?;
    let span = (cfg.k - 1) * m;
    if traj.len() <= span {
        return Err(Error::InvalidArgument(format!(
            "trajectory of {} samples too short for window span {}",
            traj.len(),
            span + 1
        )));
    }
    let mut out = Vec::with_capacity(traj.len() - span);
    for i in 0..traj.len() - span {
        let mut coords = Vec::with_capacity(cfg.k);
        for j in 0..cfg.k {
            coords.push(evaluate(&cfg.functional, &traj.samples[i + j * m])?);
        }
        out.push(DelayVector { coords, base_time: traj.time(i) });
    }
    Ok(out)
}

/// Training pairs (delay window, state one full window later): the window
/// covering [t - k tau, t - tau] is paired with the state at time t,
/// optionally truncated to its first `target_modes` coefficients.
pub fn delay_training_pairs(
    traj: &Trajectory,
    cfg: &DelayConfig,
    target_modes: Option<usize>,
) -> Result<Vec<(DelayVector, Vec<f64>)>> {
    let m = cfg.tau_steps(traj.dt)?;
    let vectors = build_delay_vectors(traj, cfg)?;
    let mut out = Vec::new();
    for v in vectors {
        let i = ((v.base_time - traj.t0) / traj.dt).round() as usize;
        let target_idx = i + cfg.k * m;
        if target_idx >= traj.len() {
            break;
        }
        let coeffs = &traj.samples[target_idx].coeffs;
        let target = match target_modes {
            Some(n) => coeffs[..n.min(coeffs.len())].to_vec(),
            None => coeffs.clone(),
        };
        out.push((v, target));
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("trajectory too short for any training pair".into()));
    }
    Ok(out)
}

/// Empirical injectivity surrogate over aligned (delay vector, state) pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectivityReport {
    /// Worst state-distance / delay-distance ratio.
    pub worst_ratio: f64,
    pub worst_pair: (usize, usize),
    /// Pairs with near-zero delay distance but substantial state distance.
    pub violations: Vec<(usize, usize)>,
}

pub const INJECTIVITY_EPS_GUARD: f64 = 1e-12;
pub const VIOLATION_DELAY_TOL: f64 = 1e-9;
pub const VIOLATION_STATE_TOL: f64 = 1e-6;

pub fn injectivity_diagnostic(
    vectors: &[DelayVector],
    states: &[crate::spectral::SpectralField],
) -> Result<InjectivityReport> {
    if vectors.len() != states.len() {
        return Err(Error::InvalidArgument("vectors and states misaligned".into()));
    }
    if vectors.len() < 2 {
        return Err(Error::InvalidArgument("need at least two entries".into()));
    }
    let mut worst_ratio = 0.0;
    let mut worst_pair = (0, 0);
    let mut violations = Vec::new();
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let dv = euclid(&vectors[i].coords, &vectors[j].coords);
            let ds = states[i].sub(&states[j]).norm_h();
            let ratio = ds / (dv + INJECTIVITY_EPS_GUARD);
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_pair = (i, j);
            }
            if dv <= VIOLATION_DELAY_TOL && ds >= VIOLATION_STATE_TOL {
                violations.push((i, j));
            }
        }
    }
    Ok(InjectivityReport { worst_ratio, worst_pair, violations })
}

/// Nonparametric regression kinds for the reconstruction map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaKind {
    NearestNeighbor,
    LocalLinear { n_neighbors: usize },
}

/// Fitted reconstruction map from delay windows to state vectors (full
/// state for Theta, first N coefficients for Theta_N, or a single scalar
/// for the Z-recursion).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaModel {
    pub kind: ThetaKind,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    /// Max leave-one-out prediction error over the training set.
    pub train_error: f64,
}

impl ThetaModel {
    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn target_dim(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        predict_excluding(&self.inputs, &self.targets, self.kind, x, usize::MAX)
    }
}

fn predict_excluding(
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    kind: ThetaKind,
    x: &[f64],
    exclude: usize,
) -> Vec<f64> {
    let mut order: Vec<usize> = (0..inputs.len()).filter(|&i| i != exclude).collect();
    order.sort_by(|&a, &b| {
        euclid(&inputs[a], x)
            .partial_cmp(&euclid(&inputs[b], x))
            .unwrap()
            .then(a.cmp(&b))
    });
    match kind {
        ThetaKind::NearestNeighbor => targets[order[0]].clone(),
        ThetaKind::LocalLinear { n_neighbors } => {
            let dim = x.len();
            let nn = n_neighbors.max(dim + 1).min(order.len());
            let idx = &order[..nn];
            if nn < dim + 1 {
                // underdetermined: fall back to neighbor average
                let tdim = targets[idx[0]].len();
                let mut avg = vec![0.0; tdim];
                for &i in idx {
                    for (a, t) in avg.iter_mut().zip(&targets[i]) {
                        *a += t / nn as f64;
                    }
                }
                return avg;
            }
            // affine least squares on the neighbor set
            let mut design = DMatrix::zeros(nn, dim + 1);
            for (r, &i) in idx.iter().enumerate() {
                design[(r, 0)] = 1.0;
                for c in 0..dim {
                    design[(r, c + 1)] = inputs[i][c];
                }
            }
            let svd = design.clone().svd(true, true);
            let tdim = targets[idx[0]].len();
            let mut out = vec![0.0; tdim];
            for t in 0..tdim {
                let rhs = DVector::from_iterator(nn, idx.iter().map(|&i| targets[i][t]));
                let sol = svd.solve(&rhs, 1e-10).expect("svd solve");
                let mut v = sol[0];
                for c in 0..dim {
                    v += sol[c + 1] * x[c];
                }
                out[t] = v;
            }
            out
        }
    }
}

/// Fit a reconstruction model and record its leave-one-out train error.
pub fn fit_theta(pairs: &[(DelayVector, Vec<f64>)], kind: ThetaKind) -> Result<ThetaModel> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let tdim = pairs[0].1.len();
    if pairs.iter().any(|(_, t)| t.len() != tdim) {
        return Err(Error::InvalidArgument("inconsistent target dimensions".into()));
    }
    let inputs: Vec<Vec<f64>> = pairs.iter().map(|(v, _)| v.coords.clone()).collect();
    let targets: Vec<Vec<f64>> = pairs.iter().map(|(_, t)| t.clone()).collect();
    let mut train_error = 0.0f64;
    if inputs.len() > 1 {
        for i in 0..inputs.len() {
            let pred = predict_excluding(&inputs, &targets, kind, &inputs[i], i);
            train_error = train_error.max(euclid(&pred, &targets[i]));
        }
    }
    Ok(ThetaModel { kind, inputs, targets, train_error })
}

/// Iterate the scalar delayed recursion: given the last k observations on
/// the tau grid, predict `steps` further values.
pub fn predict_dde(model: &ThetaModel, history: &[f64], steps: usize) -> Result<Vec<f64>> {
    if history.len() != model.input_dim() {
        return Err(Error::InvalidArgument(format!(
            "history length {} does not match window length {}",
            history.len(),
            model.input_dim()
        )));
    }
    if model.target_dim() != 1 {
        return Err(Error::InvalidArgument("predict_dde needs a scalar-target model".into()));
    }
    let mut window = history.to_vec();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let z = model.predict(&window)[0];
        out.push(z);
        window.rotate_left(1);
        *window.last_mut().unwrap() = z;
    }
    Ok(out)
}

/// Versioned serialization with training pairs flattened.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThetaModelFile {
    schema_version: u32,
    kind: ThetaKind,
    k: usize,
    tau: f64,
    functional: Option<FunctionalSpec>,
    n_pairs: usize,
    input_dim: usize,
    target_dim: usize,
    inputs_flat: Vec<f64>,
    targets_flat: Vec<f64>,
    train_error: f64,
}

pub const THETA_SCHEMA_VERSION: u32 = 1;

pub fn theta_to_json(model: &ThetaModel, cfg: Option<&DelayConfig>) -> Result<String> {
    let file = ThetaModelFile {
        schema_version: THETA_SCHEMA_VERSION,
        kind: model.kind,
        k: cfg.map_or(model.input_dim(), |c| c.k),
        tau: cfg.map_or(0.0, |c| c.tau),
        functional: cfg.map(|c| c.functional.clone()),
        n_pairs: model.inputs.len(),
        input_dim: model.input_dim(),
        target_dim: model.target_dim(),
        inputs_flat: model.inputs.iter().flatten().copied().collect(),
        targets_flat: model.targets.iter().flatten().copied().collect(),
        train_error: model.train_error,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn theta_from_json(json: &str) -> Result<ThetaModel> {
    let file: ThetaModelFile =
        serde_json::from_str(json).map_err(|e| Error::Serialization(e.to_string()))?;
    if file.schema_version != THETA_SCHEMA_VERSION {
        return Err(Error::Serialization(format!(
            "unsupported schema version {}",
            file.schema_version
        )));
    }
    if file.inputs_flat.len() != file.n_pairs * file.input_dim
        || file.targets_flat.len() != file.n_pairs * file.target_dim
    {
        return Err(Error::Serialization("flat array length mismatch".into()));
    }
    let inputs = file.inputs_flat.chunks(file.input_dim.max(1)).map(<[f64]>::to_vec).collect();
    let targets = file.targets_flat.chunks(file.target_dim.max(1)).map(<[f64]>::to_vec).collect();
    Ok(ThetaModel { kind: file.kind, inputs, targets, train_error: file.train_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Basis, SpectralField};
    use approx::assert_relative_eq;

    fn synthetic_traj(n: usize, dt: f64) -> Trajectory {
        // F(u(t)) = t when F reads the first coefficient
        let samples = (0..n)
            .map(|i| {
                SpectralField::new(
                    vec![i as f64 * dt, 0.0],
                    Basis::DirichletSine,
                    std::f64::consts::PI,
                )
            })
            .collect();
        Trajectory { samples, dt, t0: 0.0 }
    }

    #[test]
    fn required_k_values() {
        assert_eq!(required_k(1.0), 4);
        assert_eq!(required_k(0.0), 1);
        assert_eq!(required_k(2.0), 9);
        // monotone on a grid
        let mut prev = 0;
        for i in 0..20 {
            let k = required_k(i as f64 * 0.5);
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn dimension_bounds_arithmetic() {
        let b = dimension_bounds(1.0, 3.0);
        assert_eq!(b.lower, 1.0);
        assert_eq!(b.upper_generic, 2.0);
        assert_eq!(b.upper_general, 7.0);
        let b2 = dimension_bounds(2.0, 0.0);
        assert_eq!(b2.lower, 2.0);
    }

    #[test]
    fn delay_vectors_index_arithmetic() {
        let traj = synthetic_traj(10, 1.0);
        let cfg = DelayConfig::new(FunctionalSpec::FourierMode { n: 1 }, 2.0, 3, 0.0).unwrap();
        let vecs = build_delay_vectors(&traj, &cfg).unwrap();
        assert_eq!(vecs.len(), 10 - 4);
        assert_eq!(vecs[0].coords, vec![0.0, 2.0, 4.0]);
        assert_eq!(vecs[1].coords, vec![1.0, 3.0, 5.0]);
    }

    #[test]
    fn delay_vectors_constant_and_degenerate() {
        let mut traj = synthetic_traj(8, 0.5);
        for s in &mut traj.samples {
            s.coeffs[0] = 3.0;
        }
        let cfg = DelayConfig::new(FunctionalSpec::FourierMode { n: 1 }, 0.5, 2, 0.0).unwrap();
        let vecs = build_delay_vectors(&traj, &cfg).unwrap();
        assert!(vecs.iter().all(|v| v.coords == vec![3.0, 3.0]));
        // k = 1 degenerates to the scalar series
        let cfg1 = DelayConfig::new(FunctionalSpec::FourierMode { n: 1 }, 0.5, 1, 0.0).unwrap();
        let vecs1 = build_delay_vectors(&traj, &cfg1).unwrap();
        assert_eq!(vecs1.len(), traj.len());
    }

    #[test]
    fn tau_must_be_grid_multiple() {
        let traj = synthetic_traj(10, 1.0);
        let cfg = DelayConfig::new(FunctionalSpec::FourierMode { n: 1 }, 1.5, 2, 0.0).unwrap();
        assert!(build_delay_vectors(&traj, &cfg).is_err());
    }

    #[test]
    fn shift_equivariance() {
        let traj = synthetic_traj(12, 1.0);
        let mut shifted = traj.clone();
        shifted.samples.remove(0);
        shifted.t0 = 1.0;
        let cfg = DelayConfig::new(FunctionalSpec::FourierMode { n: 1 }, 2.0, 3, 0.0).unwrap();
        let a = build_delay_vectors(&traj, &cfg).unwrap();
        let b = build_delay_vectors(&shifted, &cfg).unwrap();
        for (x, y) in a[1..].iter().zip(&b) {
            assert_eq!(x.coords, y.coords);
        }
    }

    #[test]
    fn injectivity_flags_degenerate_functional() {
        let states = vec![
            SpectralField::new(vec![0.0, 0.0], Basis::DirichletSine, 1.0),
            SpectralField::new(vec![1.0, 0.0], Basis::DirichletSine, 1.0),
        ];
        // F = 0: both delay vectors identical
        let vecs = vec![
            DelayVector { coords: vec![0.0, 0.0], base_time: 0.0 },
            DelayVector { coords: vec![0.0, 0.0], base_time: 1.0 },
        ];
        let rep = injectivity_diagnostic(&vecs, &states).unwrap();
        assert_eq!(rep.violations, vec![(0, 1)]);
        // identical states: ratio zero, no violation
        let same = vec![states[0].clone(), states[0].clone()];
        let rep2 = injectivity_diagnostic(&vecs, &same).unwrap();
        assert_eq!(rep2.worst_ratio, 0.0);
        assert!(rep2.violations.is_empty());
    }

    #[test]
    fn nearest_neighbor_exact_on_training_set() {
        let pairs = vec![
            (DelayVector { coords: vec![0.0], base_time: 0.0 }, vec![1.0, 2.0]),
            (DelayVector { coords: vec![1.0], base_time: 1.0 }, vec![3.0, 4.0]),
        ];
        let m = fit_theta(&pairs, ThetaKind::NearestNeighbor).unwrap();
        assert_eq!(m.predict(&[0.0]), vec![1.0, 2.0]);
        assert_eq!(m.predict(&[1.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn single_pair_is_constant_predictor() {
        let pairs =
            vec![(DelayVector { coords: vec![0.0, 0.0], base_time: 0.0 }, vec![7.0])];
        let m = fit_theta(&pairs, ThetaKind::NearestNeighbor).unwrap();
        assert_eq!(m.predict(&[100.0, -3.0]), vec![7.0]);
        assert_eq!(m.train_error, 0.0);
    }

    #[test]
    fn local_linear_recovers_linear_map() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut pairs = Vec::new();
        for i in 0..40 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = vec![2.0 * x[0] - x[1] + 0.5 * x[2] + 1.0, x[0] + x[2]];
            pairs.push((DelayVector { coords: x, base_time: i as f64 }, y));
        }
        let m = fit_theta(&pairs, ThetaKind::LocalLinear { n_neighbors: 10 }).unwrap();
        let pred = m.predict(&[0.2, -0.3, 0.1]);
        assert_relative_eq!(pred[0], 2.0 * 0.2 + 0.3 + 0.05 + 1.0, epsilon = 1e-9);
        assert_relative_eq!(pred[1], 0.2 + 0.1, epsilon = 1e-9);
        assert!(m.train_error < 1e-9);
    }

    #[test]
    fn conflicting_duplicates_show_in_train_error() {
        let pairs = vec![
            (DelayVector { coords: vec![0.0], base_time: 0.0 }, vec![0.0]),
            (DelayVector { coords: vec![0.0], base_time: 1.0 }, vec![2.0]),
        ];
        let m = fit_theta(&pairs, ThetaKind::NearestNeighbor).unwrap();
        assert!(m.train_error >= 1.0);
    }

    #[test]
    fn dde_constant_fixed_point() {
        let pairs =
            vec![(DelayVector { coords: vec![5.0, 5.0, 5.0], base_time: 0.0 }, vec![5.0])];
        let m = fit_theta(&pairs, ThetaKind::NearestNeighbor).unwrap();
        let z = predict_dde(&m, &[5.0, 5.0, 5.0], 10).unwrap();
        assert!(z.iter().all(|&v| v == 5.0));
        assert!(predict_dde(&m, &[5.0], 3).is_err());
    }

    #[test]
    fn theta_json_round_trip() {
        let pairs = vec![
            (DelayVector { coords: vec![0.0, 1.0], base_time: 0.0 }, vec![1.0, 2.0, 3.0]),
            (DelayVector { coords: vec![1.0, 2.0], base_time: 1.0 }, vec![4.0, 5.0, 6.0]),
        ];
        let m = fit_theta(&pairs, ThetaKind::NearestNeighbor).unwrap();
        let cfg = DelayConfig::new(FunctionalSpec::FourierMode { n: 1 }, 0.5, 2, 0.0).unwrap();
        let json = theta_to_json(&m, Some(&cfg)).unwrap();
        let back = theta_from_json(&json).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn theta_n_compatibility() {
        // P_N of the full-state prediction equals the Theta_N prediction
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut full = Vec::new();
        let mut low = Vec::new();
        for i in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v = DelayVector { coords: x, base_time: i as f64 };
            full.push((v.clone(), y.clone()));
            low.push((v, y[..2].to_vec()));
        }
        let mf = fit_theta(&full, ThetaKind::NearestNeighbor).unwrap();
        let ml = fit_theta(&low, ThetaKind::NearestNeighbor).unwrap();
        let x = vec![0.1, 0.2, 0.3];
        let pf = mf.predict(&x);
        let pl = ml.predict(&x);
        assert_eq!(&pf[..2], &pl[..]);
    }
}
