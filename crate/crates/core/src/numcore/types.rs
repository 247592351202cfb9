use nalgebra::{DMatrix, DVector};

use super::linalg::{cholesky_upper, logdet_upper};
use crate::error::{Error, Result};

/// `n` samples of a `d`-dimensional quantity, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    data: DMatrix<f64>,
}

impl ObservationSet {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidInput("observation set must be non-empty".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("observations must be finite".into()));
        }
        Ok(Self { data })
    }

    /// Builds a set from rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
        }
        Self::new(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn d(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.column(j).iter().copied().collect()
    }

    /// The same samples with coordinates `i` and `j` exchanged.
    pub fn swap_columns(&self, i: usize, j: usize) -> Self {
        let mut data = self.data.clone();
        data.swap_columns(i, j);
        Self { data }
    }
}

/// Mean and upper Cholesky factor of a multivariate normal: `Σ = U Uᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MvnParams {
    mu: DVector<f64>,
    u: DMatrix<f64>,
}

impl MvnParams {
    pub fn new(mu: DVector<f64>, u: DMatrix<f64>) -> Result<Self> {
        let d = mu.len();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: u.nrows() });
        }
        for i in 0..d {
            if !(u[(i, i)] > 0.0) {
                return Err(Error::InvalidInput(format!("U[{i}][{i}] must be positive")));
            }
            for j in 0..i {
                if u[(i, j)] != 0.0 {
                    return Err(Error::InvalidInput("U must be upper triangular".into()));
                }
            }
        }
        Ok(Self { mu, u })
    }

    /// Standard normal in `d` dimensions: `μ = 0`, `U = I`.
    pub fn standard(d: usize) -> Self {
        Self { mu: DVector::zeros(d), u: DMatrix::identity(d, d) }
    }

    pub fn from_covariance(mu: DVector<f64>, sigma: &DMatrix<f64>) -> Result<Self> {
        let u = cholesky_upper(sigma)?;
        Self::new(mu, u)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        &self.u * self.u.transpose()
    }
}

/// Multivariate Student-t with `nu` degrees of freedom, location and scale matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentTParams {
    nu: f64,
    loc: DVector<f64>,
    scale: DMatrix<f64>,
    // upper factor of `scale`, cached for density evaluation
    factor: DMatrix<f64>,
}

impl StudentTParams {
    pub fn new(nu: f64, loc: DVector<f64>, scale: DMatrix<f64>) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidInput(format!("degrees of freedom must be positive, got {nu}")));
        }
        let m = loc.len();
        if scale.nrows() != m || scale.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, found: scale.nrows() });
        }
        let norm = scale.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..m {
            for j in (i + 1)..m {
                if (scale[(i, j)] - scale[(j, i)]).abs() > 1e-12 * norm {
                    return Err(Error::InvalidInput("scale matrix is not symmetric".into()));
                }
            }
        }
        let factor = cholesky_upper(&scale)?;
        Ok(Self { nu, loc, scale, factor })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn loc(&self) -> &DVector<f64> {
        &self.loc
    }

    pub fn scale(&self) -> &DMatrix<f64> {
        &self.scale
    }

    pub fn dim(&self) -> usize {
        self.loc.len()
    }

    pub(crate) fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub(crate) fn log_det_scale(&self) -> f64 {
        2.0 * logdet_upper(&self.factor)
    }
}
