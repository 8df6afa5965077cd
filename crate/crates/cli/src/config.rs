//! Strict TOML schema for scenario configs. Unknown keys are rejected at
//! parse time; scenario-specific requirements are checked in `validate`
//! before any compute.

use std::path::PathBuf;

use detlab::{
    make_operator, Basis, FunctionalSpec, NonlinearitySpec, OperatorPreset, PointwiseKind,
    Potential, ProblemSpec, SpectralField, SturmSpec,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    #[serde(rename = "modes_2p")]
    Modes2p,
    NodeDirichlet,
    NodePeriodic,
    DegenerateCube,
    OscillatorsLinbad,
    WaveSeparation,
    Nudge,
    TakensPipeline,
    PhiReduction,
    Feedback,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Modes2p => "modes_2p",
            Scenario::NodeDirichlet => "node_dirichlet",
            Scenario::NodePeriodic => "node_periodic",
            Scenario::DegenerateCube => "degenerate_cube",
            Scenario::OscillatorsLinbad => "oscillators_linbad",
            Scenario::WaveSeparation => "wave_separation",
            Scenario::Nudge => "nudge",
            Scenario::TakensPipeline => "takens_pipeline",
            Scenario::PhiReduction => "phi_reduction",
            Scenario::Feedback => "feedback",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// dirichlet_heat | periodic_heat | explicit
    pub preset: String,
    pub m_grid: usize,
    pub nu: Option<f64>,
    pub domain_length: Option<f64>,
    pub constant_mode_shift: Option<f64>,
    pub eigenvalues: Option<Vec<f64>>,
    /// zero | sin | cutoff_cubic | modal_cutoff
    pub nonlinearity: Option<String>,
    pub lipschitz_l: Option<f64>,
    pub modal_cutoff_modes: Option<usize>,
    /// Leading forcing coefficients; the rest are zero.
    pub forcing: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub cutoff_radius: Option<f64>,
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemSpec, CliError> {
        let preset = match self.preset.as_str() {
            "dirichlet_heat" => OperatorPreset::DirichletHeat {
                nu: self.nu.unwrap_or(1.0),
                domain_length: self.domain_length.unwrap_or(std::f64::consts::PI),
            },
            "periodic_heat" => OperatorPreset::PeriodicHeat {
                nu: self.nu.unwrap_or(1.0),
                domain_length: self.domain_length.unwrap_or(2.0 * std::f64::consts::PI),
                constant_mode_shift: self
                    .constant_mode_shift
                    .unwrap_or(detlab::DEFAULT_CONSTANT_MODE_SHIFT),
            },
            "explicit" => OperatorPreset::Explicit {
                eigenvalues: self
                    .eigenvalues
                    .clone()
                    .ok_or_else(|| CliError::validation("explicit preset needs eigenvalues"))?,
            },
            other => {
                return Err(CliError::validation(format!("unknown operator preset `{other}`")))
            }
        };
        let mut spec = make_operator(preset, self.m_grid)
            .map_err(|e| CliError::validation(e.to_string()))?;
        let lipschitz = self.lipschitz_l.unwrap_or(1.0);
        match self.nonlinearity.as_deref().unwrap_or("zero") {
            "zero" => {}
            "sin" => {
                spec = spec.with_nonlinearity(
                    NonlinearitySpec::Pointwise { kind: PointwiseKind::Sin },
                    lipschitz,
                )
            }
            "cutoff_cubic" => {
                spec = spec.with_nonlinearity(
                    NonlinearitySpec::Pointwise { kind: PointwiseKind::CutoffCubic },
                    lipschitz,
                )
            }
            "modal_cutoff" => {
                let n = self.modal_cutoff_modes.ok_or_else(|| {
                    CliError::validation("modal_cutoff nonlinearity needs modal_cutoff_modes")
                })?;
                spec = spec.with_nonlinearity(NonlinearitySpec::ModalCutoff { n_modes: n }, lipschitz)
            }
            other => {
                return Err(CliError::validation(format!("unknown nonlinearity `{other}`")))
            }
        }
        if let Some(alpha) = self.alpha {
            if !(0.0..1.0).contains(&alpha) {
                return Err(CliError::validation("alpha must be in [0,1)"));
            }
            spec = spec.with_alpha(alpha);
        }
        if let Some(r) = self.cutoff_radius {
            if r <= 0.0 {
                return Err(CliError::validation("cutoff_radius must be positive"));
            }
            spec = spec.with_cutoff_radius(r);
        }
        if let Some(g) = &self.forcing {
            if g.len() > spec.m_grid() {
                return Err(CliError::validation("forcing has more modes than the grid"));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(CliError::validation("forcing must be finite"));
            }
            for (i, x) in g.iter().enumerate() {
                spec.forcing.coeffs[i] = *x;
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SturmConfig {
    pub nu: f64,
    pub domain_length: f64,
    pub m_grid: usize,
    pub potential_constant: Option<f64>,
    pub potential_grid: Option<Vec<f64>>,
}

impl SturmConfig {
    pub fn build(&self) -> Result<SturmSpec, CliError> {
        let potential = match (&self.potential_constant, &self.potential_grid) {
            (Some(a), None) => Potential::Constant(*a),
            (None, Some(g)) => Potential::Grid(g.clone()),
            _ => {
                return Err(CliError::validation(
                    "exactly one of potential_constant / potential_grid is required",
                ))
            }
        };
        SturmSpec::new(self.nu, potential, self.domain_length, self.m_grid)
            .map_err(|e| CliError::validation(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dt: f64,
    pub t_end: f64,
    pub burn_in: Option<f64>,
    pub seeds: Option<Vec<u64>>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return Err(CliError::validation("run.dt and run.t_end must be positive"));
        }
        if let Some(b) = self.burn_in {
            if b < 0.0 {
                return Err(CliError::validation("run.burn_in must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn seed(&self, i: usize) -> u64 {
        match &self.seeds {
            Some(s) if !s.is_empty() => s[i % s.len()].wrapping_add((i / s.len()) as u64),
            _ => 1 + i as u64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    /// fourier_mode | node | polynomial
    pub kind: String,
    pub n: Option<usize>,
    pub x0: Option<f64>,
    pub degree: Option<usize>,
    pub mode_support: Option<usize>,
    pub seed: Option<u64>,
}

impl FunctionalConfig {
    pub fn build(&self) -> Result<FunctionalSpec, CliError> {
        match self.kind.as_str() {
            "fourier_mode" => Ok(FunctionalSpec::FourierMode {
                n: self.n.ok_or_else(|| CliError::validation("fourier_mode needs n"))?,
            }),
            "node" => Ok(FunctionalSpec::Node {
                x0: self.x0.ok_or_else(|| CliError::validation("node needs x0"))?,
            }),
            "polynomial" => Ok(detlab::sample_polynomial(
                self.degree.ok_or_else(|| CliError::validation("polynomial needs degree"))?,
                self.mode_support
                    .ok_or_else(|| CliError::validation("polynomial needs mode_support"))?,
                self.seed.unwrap_or(0),
            )),
            other => Err(CliError::validation(format!("unknown functional kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsConfig {
    pub n_pairs: Option<usize>,
    pub amplitude: Option<f64>,
    /// Observed-mode count; defaults to the spectral-gap threshold.
    pub n_modes: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub x0: f64,
    /// Lipschitz bound used in the node admissibility check; defaults to
    /// problem.lipschitz_l.
    pub lipschitz_f: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NudgeSection {
    pub gain: f64,
    pub n_modes: usize,
    /// modes | theta_reconstruction
    pub source: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TakensSection {
    pub tau: f64,
    pub k: usize,
    pub functional_degree: Option<usize>,
    pub mode_support: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionSection {
    pub n_low: usize,
    pub m_list: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackSection {
    pub targets: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    pub n_modes: usize,
    pub n_sets: Option<usize>,
    pub seed: Option<u64>,
    /// Exhibit a separation failure by zeroing this functional mode.
    pub zero_mode: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSection {
    /// Coefficients (alpha, beta, gamma, delta) of the linear functional.
    pub linear: [f64; 4],
    pub n_pairs: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: Scenario,
    pub output_dir: PathBuf,
    pub problem: Option<ProblemConfig>,
    pub sturm: Option<SturmConfig>,
    pub run: Option<RunConfig>,
    pub functionals: Option<Vec<FunctionalConfig>>,
    pub pairs: Option<PairsConfig>,
    pub node: Option<NodeConfig>,
    pub nudge: Option<NudgeSection>,
    pub takens: Option<TakensSection>,
    pub reduction: Option<ReductionSection>,
    pub feedback: Option<FeedbackSection>,
    pub wave: Option<WaveSection>,
    pub oscillators: Option<OscillatorSection>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::validation(e.to_string()))
    }

    fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        field
            .as_ref()
            .ok_or_else(|| CliError::validation(format!("scenario requires a [{name}] section")))
    }

    /// Scenario-specific structural validation, before any compute.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.output_dir.as_os_str().is_empty() {
            return Err(CliError::validation("output_dir must not be empty"));
        }
        if let Some(run) = &self.run {
            run.validate()?;
        }
        use Scenario::*;
        match self.scenario {
            Modes2p => {
                let p = Self::require(&self.problem, "problem")?;
                p.build()?;
                Self::require(&self.run, "run")?;
            }
            NodeDirichlet | NodePeriodic => {
                let p = Self::require(&self.problem, "problem")?;
                let spec = p.build()?;
                let want = if self.scenario == NodeDirichlet {
                    Basis::DirichletSine
                } else {
                    Basis::PeriodicFourier
                };
                if spec.basis != want {
                    return Err(CliError::validation(format!(
                        "scenario {} needs a {:?} problem",
                        self.scenario.name(),
                        want
                    )));
                }
                Self::require(&self.run, "run")?;
                let node = Self::require(&self.node, "node")?;
                if node.x0 <= 0.0 || node.x0 >= spec.domain_length {
                    return Err(CliError::validation("node.x0 must lie inside the domain"));
                }
            }
            DegenerateCube => {
                let p = Self::require(&self.problem, "problem")?;
                let spec = p.build()?;
                match spec.nonlinearity {
                    NonlinearitySpec::ModalCutoff { n_modes } if n_modes <= 4 => {}
                    NonlinearitySpec::ModalCutoff { .. } => {
                        return Err(CliError::validation(
                            "degenerate_cube needs modal_cutoff_modes <= 4",
                        ))
                    }
                    _ => {
                        return Err(CliError::validation(
                            "degenerate_cube needs the modal_cutoff nonlinearity",
                        ))
                    }
                }
                Self::require(&self.run, "run")?;
            }
            OscillatorsLinbad => {
                let osc = Self::require(&self.oscillators, "oscillators")?;
                if osc.linear.iter().all(|&x| x == 0.0) {
                    return Err(CliError::validation("oscillators.linear must be nonzero"));
                }
            }
            WaveSeparation => {
                let w = Self::require(&self.wave, "wave")?;
                if w.n_modes == 0 {
                    return Err(CliError::validation("wave.n_modes must be >= 1"));
                }
                if let Some(z) = w.zero_mode {
                    if z == 0 || z > w.n_modes {
                        return Err(CliError::validation("wave.zero_mode out of range"));
                    }
                }
            }
            Nudge => {
                let p = Self::require(&self.problem, "problem")?;
                let spec = p.build()?;
                Self::require(&self.run, "run")?;
                let nd = Self::require(&self.nudge, "nudge")?;
                if nd.n_modes < 1 || nd.n_modes > spec.m_grid() {
                    return Err(CliError::validation("nudge.n_modes out of range"));
                }
                match nd.source.as_deref().unwrap_or("modes") {
                    "modes" => {}
                    "theta_reconstruction" => {
                        Self::require(&self.takens, "takens")?;
                    }
                    other => {
                        return Err(CliError::validation(format!(
                            "unknown nudge source `{other}`"
                        )))
                    }
                }
            }
            TakensPipeline => {
                let p = Self::require(&self.problem, "problem")?;
                p.build()?;
                Self::require(&self.run, "run")?;
                let t = Self::require(&self.takens, "takens")?;
                if t.k < 1 || t.tau <= 0.0 {
                    return Err(CliError::validation("takens needs k >= 1 and tau > 0"));
                }
            }
            PhiReduction => {
                let p = Self::require(&self.problem, "problem")?;
                let spec = p.build()?;
                Self::require(&self.run, "run")?;
                let r = Self::require(&self.reduction, "reduction")?;
                if r.n_low < 1 || r.n_low >= spec.m_grid() {
                    return Err(CliError::validation("reduction.n_low out of range"));
                }
                if r.m_list.is_empty() || r.m_list.iter().any(|&m| m <= 0.0) {
                    return Err(CliError::validation("reduction.m_list must be positive"));
                }
            }
            Feedback => {
                let s = Self::require(&self.sturm, "sturm")?;
                s.build()?;
                Self::require(&self.feedback, "feedback")?;
            }
        }
        if let Some(fs) = &self.functionals {
            for f in fs {
                f.build()?;
            }
        }
        Ok(())
    }
}

/// Deterministic random field: coefficient n scaled by 1/(n+1).
pub fn seeded_field(spec: &ProblemSpec, seed: u64, amplitude: f64) -> SpectralField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut u = spec.zero_field();
    for (n, c) in u.coeffs.iter_mut().enumerate() {
        *c = amplitude * rng.gen_range(-1.0..1.0) / (n as f64 + 1.0);
    }
    u
}
