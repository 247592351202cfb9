use super::linalg::{logdet_upper, solve_upper};
use super::types::{MvnParams, StudentTParams};
use crate::error::{Error, Result};

/// `ln 2π`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log-density of `N(μ, U Uᵀ)` at `x`, via a triangular solve.
pub fn mvn_logpdf(x: &[f64], params: &MvnParams) -> Result<f64> {
    let d = params.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.len() });
    }
    let diff: Vec<f64> = x.iter().zip(params.mu().iter()).map(|(a, b)| a - b).collect();
    let z = solve_upper(params.u(), &diff);
    let quad: f64 = z.iter().map(|v| v * v).sum();
    Ok(-0.5 * d as f64 * LN_2PI - logdet_upper(params.u()) - 0.5 * quad)
}

/// Log-density of the multivariate Student-t at `x`.
pub fn mvt_logpdf(x: &[f64], params: &StudentTParams) -> Result<f64> {
    let m = params.dim();
    if x.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: x.len() });
    }
    let nu = params.nu();
    let mf = m as f64;
    let diff: Vec<f64> = x.iter().zip(params.loc().iter()).map(|(a, b)| a - b).collect();
    let z = solve_upper(params.factor(), &diff);
    let quad: f64 = z.iter().map(|v| v * v).sum();
    Ok(libm::lgamma(0.5 * (nu + mf)) - libm::lgamma(0.5 * nu)
        - 0.5 * mf * (nu * std::f64::consts::PI).ln()
        - 0.5 * params.log_det_scale()
        - 0.5 * (nu + mf) * (quad / nu).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre_interval;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn mvn_mode_values() {
        let p = MvnParams::standard(2);
        assert!((mvn_logpdf(&[0.0, 0.0], &p).unwrap() + LN_2PI).abs() < 1e-15);
        let mu = DVector::from_vec(vec![1.5, -0.7]);
        let p = MvnParams::new(mu, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0])).unwrap();
        let v = mvn_logpdf(&[1.5, -0.7], &p).unwrap();
        assert!((v + LN_2PI + 6f64.ln()).abs() < 1e-14);
        assert!(matches!(mvn_logpdf(&[0.0], &p), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mvn_matches_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = DMatrix::from_fn(3, 3, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => rng.random_range(-1.0..1.0),
            std::cmp::Ordering::Equal => rng.random_range(0.5..2.0),
            std::cmp::Ordering::Greater => 0.0,
        });
        let mu = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let p = MvnParams::new(mu.clone(), u).unwrap();
        let sigma = p.covariance();
        let inv = sigma.clone().try_inverse().unwrap();
        let diff = DVector::from_vec(x.clone()) - mu;
        let quad = (diff.transpose() * inv * &diff)[(0, 0)];
        let expected = -1.5 * (2.0 * PI).ln() - 0.5 * sigma.determinant().ln() - 0.5 * quad;
        assert!((mvn_logpdf(&x, &p).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn mvn_integrates_to_one() {
        // d = 1
        let p1 = MvnParams::new(DVector::from_vec(vec![0.4]), DMatrix::from_element(1, 1, 1.7)).unwrap();
        let (x, w) = gauss_legendre_interval(200, 0.4 - 17.0, 0.4 + 17.0);
        let total: f64 = x.iter().zip(&w).map(|(x, w)| w * mvn_logpdf(&[*x], &p1).unwrap().exp()).sum();
        assert!((total - 1.0).abs() < 1e-3);
        // d = 2, correlated
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 2.0]);
        let p2 = MvnParams::from_covariance(DVector::zeros(2), &sigma).unwrap();
        let (xa, wa) = gauss_legendre_interval(120, -10.0, 10.0);
        let (xb, wb) = gauss_legendre_interval(120, -10.0 * 2f64.sqrt(), 10.0 * 2f64.sqrt());
        let mut total = 0.0;
        for (a, wa) in xa.iter().zip(&wa) {
            for (b, wb) in xb.iter().zip(&wb) {
                total += wa * wb * mvn_logpdf(&[*a, *b], &p2).unwrap().exp();
            }
        }
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn standard_cauchy_at_zero() {
        let p = StudentTParams::new(1.0, DVector::zeros(1), DMatrix::identity(1, 1)).unwrap();
        assert!((mvt_logpdf(&[0.0], &p).unwrap() - (1.0 / PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn large_nu_approaches_gaussian() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.3, 0.4, 0.4, 0.8]);
        let loc = DVector::from_vec(vec![0.2, -1.0]);
        let t = StudentTParams::new(1e6, loc.clone(), sigma.clone()).unwrap();
        let n = MvnParams::from_covariance(loc.clone(), &sigma).unwrap();
        let x = [loc[0] + 0.5, loc[1] + 0.5];
        assert!((mvt_logpdf(&x, &t).unwrap() - mvn_logpdf(&x, &n).unwrap()).abs() < 1e-4);

        // cloud drawn from the Gaussian itself
        let cloud = crate::numcore::sample_mvn(&n, 100, &mut crate::numcore::RandomStream::new(17)).unwrap();
        for i in 0..100 {
            let x = cloud.row(i);
            let diff = mvt_logpdf(&x, &t).unwrap() - mvn_logpdf(&x, &n).unwrap();
            assert!(diff.abs() < 1e-4, "{diff}");
        }
    }

    #[test]
    fn mvt_2d_integrates_to_one() {
        let sigma = DMatrix::from_row_slice(2, 2, &[0.9, -0.3, -0.3, 0.5]);
        let t = StudentTParams::new(6.0, DVector::from_vec(vec![1.0, 2.0]), sigma.clone()).unwrap();
        let (s0, s1) = (sigma[(0, 0)].sqrt(), sigma[(1, 1)].sqrt());
        let (xa, wa) = gauss_legendre_interval(160, 1.0 - 12.0 * s0, 1.0 + 12.0 * s0);
        let (xb, wb) = gauss_legendre_interval(160, 2.0 - 12.0 * s1, 2.0 + 12.0 * s1);
        let mut total = 0.0;
        for (a, wa) in xa.iter().zip(&wa) {
            for (b, wb) in xb.iter().zip(&wb) {
                total += wa * wb * mvt_logpdf(&[*a, *b], &t).unwrap().exp();
            }
        }
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }
}
