//! Shared fixtures for the criterion benchmarks.

use detlab::{
    make_operator, NonlinearitySpec, OperatorPreset, PointwiseKind, ProblemSpec, SpectralField,
};

/// Forced sine-nonlinearity heat problem on (0, pi) with m modes.
pub fn forced_sin_spec(m: usize) -> ProblemSpec {
    let mut spec = make_operator(
        OperatorPreset::DirichletHeat { nu: 1.0, domain_length: std::f64::consts::PI },
        m,
    )
    .unwrap()
    .with_nonlinearity(NonlinearitySpec::Pointwise { kind: PointwiseKind::Sin }, 1.0);
    spec.forcing.coeffs[0] = 1.0;
    spec
}

/// Deterministic initial field with 1/(n+1) coefficient decay.
pub fn decaying_field(spec: &ProblemSpec, amplitude: f64) -> SpectralField {
    let mut u = spec.zero_field();
    for (n, c) in u.coeffs.iter_mut().enumerate() {
        *c = amplitude * if n % 2 == 0 { 1.0 } else { -1.0 } / (n as f64 + 1.0);
    }
    u
}
