use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative symmetry tolerance accepted by [`cholesky_upper`].
const SYMMETRY_TOL: f64 = 1e-10;

/// Upper-triangular Cholesky factor `U` with `U Uᵀ = sigma` and positive diagonal.
pub fn cholesky_upper(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    cholesky_upper_with_jitter(sigma, 0.0)
}

/// As [`cholesky_upper`], factoring `sigma + jitter·I`.
///
/// No regularization is ever applied implicitly; callers that want it pass a
/// positive `jitter`.
pub fn cholesky_upper_with_jitter(sigma: &DMatrix<f64>, jitter: f64) -> Result<DMatrix<f64>> {
    let d = sigma.nrows();
    if sigma.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: sigma.ncols() });
    }
    check_symmetric(sigma)?;

    // Column-by-column from the bottom right: Σ[i][j] = Σ_{k ≥ max(i,j)} U[i][k] U[j][k].
    let mut u = DMatrix::<f64>::zeros(d, d);
    for j in (0..d).rev() {
        let mut pivot = sigma[(j, j)] + jitter;
        for k in (j + 1)..d {
            pivot -= u[(j, k)] * u[(j, k)];
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let ujj = pivot.sqrt();
        u[(j, j)] = ujj;
        for i in 0..j {
            let mut s = sigma[(i, j)];
            for k in (j + 1)..d {
                s -= u[(i, k)] * u[(j, k)];
            }
            u[(i, j)] = s / ujj;
        }
    }
    Ok(u)
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidInput(format!(
                    "matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Solves `U x = b` for upper-triangular `U` by back substitution.
pub fn solve_upper(u: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let d = u.nrows();
    debug_assert_eq!(b.len(), d);
    let mut x = b.to_vec();
    for i in (0..d).rev() {
        let mut s = x[i];
        for k in (i + 1)..d {
            s -= u[(i, k)] * x[k];
        }
        x[i] = s / u[(i, i)];
    }
    x
}

/// Inverse of an upper-triangular matrix with nonzero diagonal; the result is
/// upper triangular.
pub fn invert_upper(u: &DMatrix<f64>) -> DMatrix<f64> {
    let d = u.nrows();
    let mut inv = DMatrix::<f64>::zeros(d, d);
    let mut e = vec![0.0; d];
    for j in 0..d {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = solve_upper(u, &e);
        for i in 0..=j {
            inv[(i, j)] = col[i];
        }
    }
    inv
}

/// `log |det U|` for a triangular matrix.
pub fn logdet_upper(u: &DMatrix<f64>) -> f64 {
    (0..u.nrows()).map(|i| u[(i, i)].abs().ln()).sum()
}

/// Log-determinant of the Gram matrix `G[i][j] = ⟨vᵢ, vⱼ⟩`.
///
/// The Gram matrix is scaled to unit diagonal before factoring; the scale
/// factors are added back in log space. A scaled pivot below a few ulps means
/// the vectors are linearly dependent to working precision.
pub fn gram_logdet(vectors: &[&[f64]]) -> Result<f64> {
    let k = vectors.len();
    if k == 0 {
        return Err(Error::InvalidInput("gram_logdet needs at least one vector".into()));
    }
    let len = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != len) {
        return Err(Error::DimensionMismatch { expected: len, found: bad.len() });
    }
    let singular_pivot = 16.0 * k as f64 * f64::EPSILON;

    let mut g = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let dot: f64 = vectors[i].iter().zip(vectors[j]).map(|(a, b)| a * b).sum();
            g[i * k + j] = dot;
            g[j * k + i] = dot;
        }
    }
    let diag: Vec<f64> = (0..k).map(|i| g[i * k + i]).collect();
    if let Some(&z) = diag.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::SingularGram { pivot: z });
    }
    let scale: Vec<f64> = diag.iter().map(|v| v.sqrt()).collect();
    for i in 0..k {
        for j in 0..k {
            g[i * k + j] /= scale[i] * scale[j];
        }
    }

    // In-place lower Cholesky of the unit-diagonal matrix.
    let mut logdet: f64 = diag.iter().map(|v| v.ln()).sum();
    for j in 0..k {
        let mut pivot = g[j * k + j];
        for p in 0..j {
            pivot -= g[j * k + p] * g[j * k + p];
        }
        if !(pivot > singular_pivot) {
            return Err(Error::SingularGram { pivot });
        }
        logdet += pivot.ln();
        let ljj = pivot.sqrt();
        g[j * k + j] = ljj;
        for i in (j + 1)..k {
            let mut s = g[i * k + j];
            for p in 0..j {
                s -= g[i * k + p] * g[j * k + p];
            }
            g[i * k + j] = s / ljj;
        }
    }
    Ok(logdet)
}
