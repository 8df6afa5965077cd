//! Observables F: H -> R and the sufficiency thresholds for determining
//! systems: Fourier modes, nodal values, linear forms, and seeded random
//! polynomials standing in for the generic polynomial functionals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// A single observable on the truncated state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalSpec {
    /// F(u) = u_n (1-based mode index).
    FourierMode { n: usize },
    /// F(u) = u(x0), the eigenfunction sum evaluated at a point.
    Node { x0: f64 },
    /// F(u) = (l, u) in coefficient space.
    Linear { l: SpectralField },
    /// Polynomial in u_1..u_m of total degree <= d; coefficients are
    /// listed in graded lexicographic monomial order.
    Polynomial {
        degree: usize,
        mode_support: usize,
        coefficients: Vec<f64>,
        seed: u64,
    },
}

impl FunctionalSpec {
    /// Whether the functional is linear in u.
    pub fn is_linear(&self) -> bool {
        matches!(
            self,
            FunctionalSpec::FourierMode { .. }
                | FunctionalSpec::Node { .. }
                | FunctionalSpec::Linear { .. }
        )
    }

    pub fn label(&self) -> String {
        match self {
            FunctionalSpec::FourierMode { n } => format!("mode_{n}"),
            FunctionalSpec::Node { x0 } => format!("node_{x0:.4}"),
            FunctionalSpec::Linear { .. } => "linear".into(),
            FunctionalSpec::Polynomial { degree, mode_support, seed, .. } => {
                format!("poly_d{degree}_m{mode_support}_s{seed}")
            }
        }
    }
}

/// Evaluate F(u).
pub fn evaluate(f: &FunctionalSpec, u: &SpectralField) -> Result<f64> {
    match f {
        FunctionalSpec::FourierMode { n } => {
            if *n < 1 || *n > u.len() {
                return Err(Error::InvalidArgument(format!(
                    "mode index {} out of range 1..={}",
                    n,
                    u.len()
                )));
            }
            Ok(u.coeffs[n - 1])
        }
        FunctionalSpec::Node { x0 } => {
            if *x0 <= 0.0 || *x0 >= u.domain_length {
                return Err(Error::InvalidArgument(format!(
                    "node abscissa {} outside (0, {})",
                    x0, u.domain_length
                )));
            }
            Ok(u.eval_at(*x0))
        }
        FunctionalSpec::Linear { l } => {
            if !l.same_layout(u) {
                return Err(Error::BasisMismatch("linear functional layout mismatch".into()));
            }
            Ok(l.coeffs.iter().zip(&u.coeffs).map(|(a, b)| a * b).sum())
        }
        FunctionalSpec::Polynomial { degree, mode_support, coefficients, .. } => {
            if *mode_support > u.len() {
                return Err(Error::InvalidArgument(format!(
                    "polynomial support {} exceeds field size {}",
                    mode_support,
                    u.len()
                )));
            }
            let monos = monomial_exponents(*degree, *mode_support);
            if monos.len() != coefficients.len() {
                return Err(Error::InvalidArgument(format!(
                    "polynomial has {} coefficients, expected {}",
                    coefficients.len(),
                    monos.len()
                )));
            }
            let mut acc = 0.0;
            for (c, expo) in coefficients.iter().zip(&monos) {
                let mut term = *c;
                for (i, &e) in expo.iter().enumerate() {
                    for _ in 0..e {
                        term *= u.coeffs[i];
                    }
                }
                acc += term;
            }
            Ok(acc)
        }
    }
}

/// Evaluate a list of functionals and return the max absolute pairwise gap
/// against a second state.
pub fn max_gap(fs: &[FunctionalSpec], u: &SpectralField, v: &SpectralField) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in fs {
        let gap = (evaluate(f, u)? - evaluate(f, v)?).abs();
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Exponent vectors of all monomials of total degree <= d in m variables,
/// in graded lexicographic order (1, u1, u2, ..., u1^2, u1 u2, ...).
pub fn monomial_exponents(degree: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut expo = vec![0usize; m];
        gen_degree(total, 0, &mut expo, &mut out);
    }
    out
}

fn gen_degree(remaining: usize, var: usize, expo: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if var == expo.len() - 1 {
        expo[var] = remaining;
        out.push(expo.clone());
        expo[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        expo[var] = e;
        gen_degree(remaining - e, var + 1, expo, out);
        expo[var] = 0;
    }
}

/// Number of monomials of total degree <= d in m variables: C(d+m, m).
pub fn monomial_count(degree: usize, m: usize) -> usize {
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 1..=m {
        num *= degree + i;
        den *= i;
    }
    num / den
}

/// Minimal N >= 0 with L < lambda_{N+1}^{1-alpha}, or None if the provided
/// spectrum is exhausted first.
pub fn mode_threshold(l: f64, alpha: f64, eigenvalues: &[f64]) -> Result<Option<usize>> {
    if eigenvalues.is_empty() {
        return Err(Error::InvalidArgument("empty eigenvalue list".into()));
    }
    if l <= 0.0 || !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument("need L > 0 and alpha in [0,1)".into()));
    }
    for (i, lam) in eigenvalues.iter().enumerate() {
        if l < lam.powf(1.0 - alpha) {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Largest admissible node abscissa for the Dirichlet determining-node
/// condition nu (pi/x0)^2 > L: x0_max = pi sqrt(nu/L).
pub fn node_bound(nu: f64, l: f64) -> f64 {
    assert!(nu > 0.0 && l > 0.0);
    std::f64::consts::PI * (nu / l).sqrt()
}

/// Seeded random polynomial of the given degree and mode support, with
/// coefficients uniform on [-1, 1]. Deterministic for a fixed seed.
pub fn sample_polynomial(degree: usize, mode_support: usize, seed: u64) -> FunctionalSpec {
    assert!(degree >= 1 && mode_support >= 1);
    let count = monomial_count(degree, mode_support);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients = (0..count).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    FunctionalSpec::Polynomial { degree, mode_support, coefficients, seed }
}

/// Fixed quadratic functional on R^4 used by the coupled-oscillator
/// scenario: F(x,y,z,u) = x^2 + y^2 + 2(z^2 + u^2) + xz + yu.
pub fn quadratic_oscillator_functional() -> FunctionalSpec {
    // monomial order for d=2, m=4:
    // 1, x, y, z, u,
    // x^2, xy, xz, xu, y^2, yz, yu, z^2, zu, u^2
    let mut coefficients = vec![0.0; monomial_count(2, 4)];
    coefficients[5] = 1.0; // x^2
    coefficients[9] = 1.0; // y^2
    coefficients[12] = 2.0; // z^2
    coefficients[14] = 2.0; // u^2
    coefficients[7] = 1.0; // xz
    coefficients[11] = 1.0; // yu
    FunctionalSpec::Polynomial { degree: 2, mode_support: 4, coefficients, seed: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Basis;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn field(coeffs: Vec<f64>) -> SpectralField {
        SpectralField::new(coeffs, Basis::DirichletSine, std::f64::consts::PI)
    }

    #[test]
    fn fourier_mode_readout() {
        let u = field(vec![5.0, 7.0, 1.0]);
        assert_eq!(evaluate(&FunctionalSpec::FourierMode { n: 2 }, &u).unwrap(), 7.0);
        assert!(evaluate(&FunctionalSpec::FourierMode { n: 4 }, &u).is_err());
    }

    #[test]
    fn node_on_first_mode() {
        let u = field(vec![1.0, 0.0, 0.0]);
        let v = evaluate(&FunctionalSpec::Node { x0: std::f64::consts::FRAC_PI_2 }, &u).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        assert!(evaluate(&FunctionalSpec::Node { x0: 4.0 }, &u).is_err());
    }

    #[test]
    fn polynomial_arithmetic() {
        // F(u) = u1^2 + u2 on (3,4)
        let mut coefficients = vec![0.0; monomial_count(2, 2)];
        coefficients[3] = 1.0; // u1^2 (order: 1, u1, u2, u1^2, u1u2, u2^2)
        coefficients[2] = 1.0; // u2
        let f = FunctionalSpec::Polynomial { degree: 2, mode_support: 2, coefficients, seed: 0 };
        let u = field(vec![3.0, 4.0]);
        assert_eq!(evaluate(&f, &u).unwrap(), 13.0);
    }

    #[test]
    fn threshold_enumeration() {
        let lam: Vec<f64> = (1..=20).map(|n| (n * n) as f64).collect();
        assert_eq!(mode_threshold(10.0, 0.0, &lam).unwrap(), Some(3));
        assert_eq!(mode_threshold(0.5, 0.0, &lam).unwrap(), Some(0));
        assert_eq!(mode_threshold(10.0, 0.5, &lam).unwrap(), Some(10));
        // insufficient spectrum
        assert_eq!(mode_threshold(1e9, 0.0, &lam).unwrap(), None);
        assert!(mode_threshold(1.0, 0.0, &[]).is_err());
    }

    #[test]
    fn threshold_is_argmin() {
        let lam: Vec<f64> = (1..=30).map(|n| (n * n) as f64).collect();
        for &(l, a) in &[(10.0, 0.0), (3.0, 0.25), (10.0, 0.5), (1.5, 0.9)] {
            let n = mode_threshold(l, a, &lam).unwrap().unwrap();
            assert!(l < lam[n].powf(1.0 - a));
            if n > 0 {
                assert!(l >= lam[n - 1].powf(1.0 - a));
            }
        }
    }

    #[test]
    fn node_bound_values() {
        assert_relative_eq!(node_bound(1.0, 4.0), std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(node_bound(4.0, 4.0), std::f64::consts::PI);
        let mut prev = f64::INFINITY;
        for l in [1.0, 10.0, 100.0] {
            let b = node_bound(1.0, l);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn monomial_counts_match_closed_form() {
        for d in 1..=6 {
            for m in 1..=6 {
                assert_eq!(monomial_exponents(d, m).len(), monomial_count(d, m));
            }
        }
        assert_eq!(monomial_count(2, 2), 6);
    }

    #[test]
    fn sample_polynomial_deterministic() {
        let a = sample_polynomial(3, 2, 42);
        let b = sample_polynomial(3, 2, 42);
        assert_eq!(a, b);
        let FunctionalSpec::Polynomial { coefficients, .. } = &a else { unreachable!() };
        assert_eq!(coefficients.len(), monomial_count(3, 2));
        assert!(coefficients.iter().all(|c| c.abs() <= 1.0));
        // degree 1, support 1 is a linear readout c0 + c1 u1
        let lin = sample_polynomial(1, 1, 5);
        let FunctionalSpec::Polynomial { coefficients, .. } = &lin else { unreachable!() };
        assert_eq!(coefficients.len(), 2);
    }

    #[test]
    fn oscillator_functional_values() {
        let f = quadratic_oscillator_functional();
        assert_eq!(evaluate(&f, &field(vec![0.0, 0.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(evaluate(&f, &field(vec![1.0, 0.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(evaluate(&f, &field(vec![1.0, 0.0, 1.0, 0.0])).unwrap(), 4.0);
    }

    #[test]
    fn node_agrees_with_dense_grid() {
        use crate::spectral::{collocation_nodes, to_grid};
        let u = field(vec![0.3, -0.7, 0.2, 0.1]);
        let n_pts = 4001;
        let vals = to_grid(&u, n_pts).unwrap();
        let nodes = collocation_nodes(Basis::DirichletSine, u.domain_length, n_pts);
        // linear interpolation of the dense grid vs direct evaluation
        let x0 = 1.234;
        let h = nodes[1] - nodes[0];
        let j = ((x0 - nodes[0]) / h).floor() as usize;
        let w = (x0 - nodes[j]) / h;
        let interp = vals[j] * (1.0 - w) + vals[j + 1] * w;
        let direct = evaluate(&FunctionalSpec::Node { x0 }, &u).unwrap();
        assert!((interp - direct).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn linear_kinds_are_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            u in proptest::collection::vec(-2.0f64..2.0, 4),
            v in proptest::collection::vec(-2.0f64..2.0, 4),
        ) {
            let l = field(vec![0.5, -1.0, 0.25, 2.0]);
            let fs = [
                FunctionalSpec::FourierMode { n: 2 },
                FunctionalSpec::Node { x0: 1.1 },
                FunctionalSpec::Linear { l },
            ];
            let fu = field(u.clone());
            let fv = field(v.clone());
            let mut comb = fu.scaled(a);
            comb.add_scaled(b, &fv);
            for f in &fs {
                let lhs = evaluate(f, &comb).unwrap();
                let rhs = a * evaluate(f, &fu).unwrap() + b * evaluate(f, &fv).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs() + rhs.abs()));
            }
        }
    }
}
