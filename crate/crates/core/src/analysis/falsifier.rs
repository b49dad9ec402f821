use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CommutingTriple;
use crate::error::{Error, Result};
use crate::geometry::{gaussian, sample_distinguished_boundary, sample_tetrablock, TetraPoint};
use crate::operator_core::{op_norm, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FalsifierConfig {
    /// Maximal total degree of the test polynomials.
    pub degree: usize,
    pub n_polys: usize,
    /// Interior samples; the same number of distinguished-boundary samples is added.
    pub n_samples: usize,
    /// Relative excess over the sampled sup required for a certificate.
    pub margin: f64,
    pub seed: u64,
}

impl Default for FalsifierConfig {
    fn default() -> Self {
        Self {
            degree: 3,
            n_polys: 200,
            n_samples: 20_000,
            margin: 0.05,
            seed: 0,
        }
    }
}

/// A polynomial whose value at the triple exceeds its sampled sup over the tetrablock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub poly_index: usize,
    /// Terms `(a, b, c, coefficient)` of `Σ coefficient · x1^a x2^b x3^c`.
    pub terms: Vec<(usize, usize, usize, Complex64)>,
    pub operator_norm: f64,
    pub sup_estimate: f64,
    /// `operator_norm / sup_estimate`.
    pub ratio: f64,
}

/// Looks for a polynomial `p` with `‖p(T1, T2, T)‖ > (1 + margin) · sup |p|`.
///
/// The sup is a Monte Carlo lower bound of the true sup, so a certificate is
/// a genuine violation of the spectral-set inequality, while `None` proves
/// nothing. Polynomials `x1`, `x2`, `x3` are probed first, then seeded random
/// combinations of monomials; the certificate with the lowest index wins, so
/// the answer does not depend on thread scheduling.
pub fn spectral_set_falsifier(t: &CommutingTriple, config: &FalsifierConfig) -> Result<Option<Certificate>> {
    if !(config.margin >= 0.0 && config.margin.is_finite()) {
        return Err(Error::InvalidConfig("falsifier margin must be finite and nonnegative".into()));
    }
    let exponents = monomials(config.degree);
    let powers = matrix_monomials(t, &exponents);
    let mut points = sample_tetrablock(config.n_samples, config.seed);
    points.extend(sample_distinguished_boundary(config.n_samples, config.seed ^ 0xb0_0d));
    let values: Vec<Complex64> = points
        .iter()
        .flat_map(|p| scalar_monomials(p, &exponents))
        .collect();
    let m = exponents.len();

    let probes = 3.min(m.saturating_sub(1)) + config.n_polys;
    let found = (0..probes).into_par_iter().find_map_first(|index| {
        let coefficients = polynomial(index, m, config.seed);
        let mut op = ComplexMatrix::zeros(t.dim(), t.dim());
        for (c, power) in coefficients.iter().zip(&powers) {
            if *c != Complex64::new(0.0, 0.0) {
                op += power * *c;
            }
        }
        let operator_norm = op_norm(&op);
        let sup_estimate = values
            .chunks(m)
            .map(|row| row.iter().zip(&coefficients).map(|(v, c)| v * c).sum::<Complex64>().norm())
            .fold(0.0, f64::max);
        (operator_norm > sup_estimate * (1.0 + config.margin)).then(|| Certificate {
            poly_index: index,
            terms: exponents
                .iter()
                .zip(&coefficients)
                .filter(|(_, c)| c.norm() > 0.0)
                .map(|(&(a, b, c), &z)| (a, b, c, z))
                .collect(),
            operator_norm,
            sup_estimate,
            ratio: operator_norm / sup_estimate,
        })
    });
    Ok(found)
}

/// Exponents `(a, b, c)` with `a + b + c ≤ degree`, graded by total degree.
fn monomials(degree: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for total in 0..=degree {
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push((a, b, total - a - b));
            }
        }
    }
    out
}

/// Coefficient vector of probe `index`: the three coordinates first, then
/// Gaussian polynomials from a per-index seed.
fn polynomial(index: usize, m: usize, seed: u64) -> Vec<Complex64> {
    let mut coefficients = vec![Complex64::new(0.0, 0.0); m];
    let coordinate_probes = 3.min(m.saturating_sub(1));
    if index < coordinate_probes {
        coefficients[1 + index] = Complex64::new(1.0, 0.0);
        return coefficients;
    }
    let stream = (index - coordinate_probes) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ stream);
    coefficients.iter_mut().for_each(|c| *c = gaussian(&mut rng));
    coefficients
}

fn matrix_monomials(t: &CommutingTriple, exponents: &[(usize, usize, usize)]) -> Vec<ComplexMatrix> {
    let degree = exponents.iter().map(|&(a, b, c)| a + b + c).max().unwrap_or(0);
    let powers = |m: &ComplexMatrix| {
        let mut out = vec![ComplexMatrix::identity(m.nrows(), m.ncols())];
        for k in 0..degree {
            let next = &out[k] * m;
            out.push(next);
        }
        out
    };
    let (p1, p2, p3) = (powers(&t.t1), powers(&t.t2), powers(&t.t));
    exponents
        .iter()
        .map(|&(a, b, c)| &p1[a] * &p2[b] * &p3[c])
        .collect()
}

fn scalar_monomials(p: &TetraPoint, exponents: &[(usize, usize, usize)]) -> Vec<Complex64> {
    exponents
        .iter()
        .map(|&(a, b, c)| p.x1.powu(a as u32) * p.x2.powu(b as u32) * p.x3.powu(c as u32))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::make_triple;
    use crate::operator_core::{c64, ToleranceConfig};

    fn scalar_triple(x1: Complex64, x2: Complex64, x3: Complex64) -> CommutingTriple {
        let s = |z| ComplexMatrix::from_element(1, 1, z);
        make_triple(s(x1), s(x2), s(x3), &ToleranceConfig::default()).unwrap()
    }

    fn light() -> FalsifierConfig {
        FalsifierConfig {
            degree: 2,
            n_polys: 20,
            n_samples: 2000,
            ..FalsifierConfig::default()
        }
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(0), vec![(0, 0, 0)]);
        assert_eq!(monomials(1), vec![(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]);
        assert_eq!(monomials(3).len(), 20);
    }

    #[test]
    fn first_coordinate_certificate() {
        let t = scalar_triple(c64(2.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0));
        let cert = spectral_set_falsifier(&t, &light()).unwrap().unwrap();
        assert_eq!(cert.poly_index, 0);
        assert_eq!(cert.terms, vec![(1, 0, 0, c64(1.0, 0.0))]);
        assert!((cert.operator_norm - 2.0).abs() < 1e-15);
    }

    #[test]
    fn third_coordinate_certificate() {
        let u = Complex64::from_polar(1.0, 1.1);
        let t = scalar_triple(c64(0.0, 0.0), c64(0.0, 0.0), u * 1.5);
        let cert = spectral_set_falsifier(&t, &light()).unwrap().unwrap();
        assert_eq!(cert.terms, vec![(0, 0, 1, c64(1.0, 0.0))]);
    }

    #[test]
    fn interior_point_is_never_certified() {
        let t = scalar_triple(c64(0.2, 0.1), c64(-0.3, 0.0), c64(0.05, 0.05));
        assert!(spectral_set_falsifier(&t, &light()).unwrap().is_none());
    }

    #[test]
    fn rejects_bad_margin() {
        let t = scalar_triple(c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0));
        let config = FalsifierConfig {
            margin: f64::NAN,
            ..light()
        };
        assert!(matches!(spectral_set_falsifier(&t, &config), Err(Error::InvalidConfig(_))));
    }
}
