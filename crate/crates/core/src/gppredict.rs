//! Gaussian-process regression with a linear mean `xᵀβ`, amplitude `σ_y` and
//! an RBF kernel of fixed lengthscale.
//!
//! For the stacked training and prediction features `X` and the joint kernel
//! matrix `K`, the matrix
//!
//! ```text
//! A = K⁻¹ − K⁻¹ X (Xᵀ K⁻¹ X)⁻¹ Xᵀ K⁻¹
//! ```
//!
//! is positive semi-definite with kernel `col(X)`. Integrating `β` and `σ_y`
//! against `dβ dσ_y / σ_y` leaves a multivariate t predictive for the targets,
//! `t_{n−p}(−A_pp⁻¹ A_po y, yᵀ(A_oo − A_op A_pp⁻¹ A_po) y / (n−p) · A_pp⁻¹)`.
//! The prior `σ_y^(−(p+1))` gives the same location with `n` degrees of
//! freedom and divisor `n`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{mvn_logpdf, MvnParams, StudentTParams, LN_2PI};

/// Relative threshold below which the residual form marks `y ∈ col(X)`.
const DEGENERATE_TOL: f64 = 1e-20;

/// Training and prediction feature rows plus the kernel lengthscale.
#[derive(Debug, Clone, PartialEq)]
pub struct GpDesign {
    train_x: DMatrix<f64>,
    pred_x: DMatrix<f64>,
    lengthscale: f64,
}

impl GpDesign {
    /// Validates shapes, the lengthscale and pairwise distinctness of all
    /// `n + m` feature rows. Rank conditions are checked by the procedures
    /// that need them.
    pub fn new(train_x: DMatrix<f64>, pred_x: DMatrix<f64>, lengthscale: f64) -> Result<Self> {
        if !(lengthscale > 0.0) || !lengthscale.is_finite() {
            return Err(Error::InvalidInput(format!("lengthscale must be positive, got {lengthscale}")));
        }
        if train_x.ncols() != pred_x.ncols() {
            return Err(Error::DimensionMismatch { expected: train_x.ncols(), found: pred_x.ncols() });
        }
        if train_x.iter().chain(pred_x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("features must be finite".into()));
        }
        let design = Self { train_x, pred_x, lengthscale };
        let all = design.stacked_features();
        for i in 0..all.nrows() {
            for j in 0..i {
                if (all.row(i) - all.row(j)).norm_squared() == 0.0 {
                    return Err(Error::SingularKernel);
                }
            }
        }
        Ok(design)
    }

    pub fn train_x(&self) -> &DMatrix<f64> {
        &self.train_x
    }

    pub fn pred_x(&self) -> &DMatrix<f64> {
        &self.pred_x
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn n(&self) -> usize {
        self.train_x.nrows()
    }

    pub fn m(&self) -> usize {
        self.pred_x.nrows()
    }

    pub fn p(&self) -> usize {
        self.train_x.ncols()
    }

    /// Same prediction points, first `n_obs` training points.
    pub fn with_first_observations(&self, n_obs: usize) -> Result<Self> {
        if n_obs > self.n() {
            return Err(Error::InvalidInput(format!(
                "requested {n_obs} observations but the design has {}",
                self.n()
            )));
        }
        Ok(Self {
            train_x: self.train_x.rows(0, n_obs).into_owned(),
            pred_x: self.pred_x.clone(),
            lengthscale: self.lengthscale,
        })
    }

    /// Training rows followed by prediction rows.
    pub fn stacked_features(&self) -> DMatrix<f64> {
        let (n, m, p) = (self.n(), self.m(), self.p());
        DMatrix::from_fn(n + m, p, |i, j| if i < n { self.train_x[(i, j)] } else { self.pred_x[(i - n, j)] })
    }

    fn require_identifiable(&self) -> Result<()> {
        let (n, p) = (self.n(), self.p());
        if n <= p {
            return Err(Error::InvalidInput(format!("need more observations than features (n = {n}, p = {p})")));
        }
        let sv = self.train_x.clone().singular_values();
        let max = sv.max();
        if !(sv.min() > 1e-10 * max) {
            return Err(Error::RankDeficientFeatures);
        }
        Ok(())
    }
}

/// `(β, σ_y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpParams {
    beta: DVector<f64>,
    sigma_y: f64,
}

impl GpParams {
    pub fn new(beta: DVector<f64>, sigma_y: f64) -> Result<Self> {
        if !(sigma_y > 0.0) || !sigma_y.is_finite() {
            return Err(Error::InvalidInput(format!("sigma_y must be positive, got {sigma_y}")));
        }
        Ok(Self { beta, sigma_y })
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }
}

/// The matrix `A` over training-then-prediction indices, split at `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpAMatrix {
    a: DMatrix<f64>,
    n: usize,
}

impl GpAMatrix {
    pub fn full(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn aoo(&self) -> DMatrix<f64> {
        self.a.view((0, 0), (self.n, self.n)).into_owned()
    }

    pub fn aop(&self) -> DMatrix<f64> {
        let m = self.a.nrows() - self.n;
        self.a.view((0, self.n), (self.n, m)).into_owned()
    }

    pub fn apo(&self) -> DMatrix<f64> {
        let m = self.a.nrows() - self.n;
        self.a.view((self.n, 0), (m, self.n)).into_owned()
    }

    pub fn app(&self) -> DMatrix<f64> {
        let m = self.a.nrows() - self.n;
        self.a.view((self.n, self.n), (m, m)).into_owned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GpPrior {
    /// `1/σ_y`; coincides with the independence-Jeffreys prior here.
    RightInvariant,
    /// `σ_y^(−(p+1))`.
    Jeffreys,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GlsFlavor {
    /// Residual form divided by `n`.
    MLE,
    /// Residual form divided by `n − p`.
    Unbiased,
}

/// The four procedures compared on the GP model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GpPredictorKind {
    RightInvariant,
    Jeffreys,
    PluginUnbiased,
    PluginMLE,
}

impl GpPredictorKind {
    pub const ALL: [GpPredictorKind; 4] = [
        GpPredictorKind::RightInvariant,
        GpPredictorKind::Jeffreys,
        GpPredictorKind::PluginUnbiased,
        GpPredictorKind::PluginMLE,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            GpPredictorKind::RightInvariant => "R",
            GpPredictorKind::Jeffreys => "J",
            GpPredictorKind::PluginUnbiased => "unb",
            GpPredictorKind::PluginMLE => "MLE",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        if tag.eq_ignore_ascii_case("IJ") {
            return Some(GpPredictorKind::RightInvariant);
        }
        Self::ALL.into_iter().find(|k| k.tag().eq_ignore_ascii_case(tag))
    }
}

impl std::fmt::Display for GpPredictorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// `K(v, w)_ij = exp(−‖vᵢ − wⱼ‖² / (2σ_x²))`.
pub fn rbf_kernel(x1: &DMatrix<f64>, x2: &DMatrix<f64>, lengthscale: f64) -> DMatrix<f64> {
    let inv = 1.0 / (2.0 * lengthscale * lengthscale);
    DMatrix::from_fn(x1.nrows(), x2.nrows(), |i, j| {
        let d2: f64 = (0..x1.ncols()).map(|k| (x1[(i, k)] - x2[(j, k)]).powi(2)).sum();
        (-d2 * inv).exp()
    })
}

fn cholesky(k: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(k).ok_or(Error::SingularKernel)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Builds `A` from Cholesky solves against the joint kernel matrix.
pub fn gp_build_a(design: &GpDesign) -> Result<GpAMatrix> {
    if design.m() == 0 {
        return Err(Error::InvalidInput("design has no prediction points".into()));
    }
    design.require_identifiable()?;
    let x = design.stacked_features();
    let k = rbf_kernel(&x, &x, design.lengthscale);
    let chol = cholesky(k)?;
    let k_inv = chol.inverse();
    let k_inv_x = chol.solve(&x);
    let m_chol = Cholesky::new(x.transpose() * &k_inv_x).ok_or(Error::RankDeficientFeatures)?;
    let correction = &k_inv_x * m_chol.solve(&k_inv_x.transpose());
    let mut a = k_inv - correction;
    symmetrize(&mut a);
    Ok(GpAMatrix { a, n: design.n() })
}

/// Training-side factorizations shared by every procedure on one design.
///
/// With `L` the lower Cholesky factor of `K(x, x)` and `L⁻¹X = Q R` a thin QR
/// decomposition, the GLS coefficient is `R⁻¹ Qᵀ L⁻¹ y` and the residual form
/// `(y − Xβ̂)ᵀ K⁻¹ (y − Xβ̂)` is `‖(I − QQᵀ) L⁻¹ y‖²`. The latter equals
/// `yᵀ(A_oo − A_op A_pp⁻¹ A_po) y` but stays accurate when `K` is badly
/// conditioned, which matters for detecting `y ∈ col(X)`.
#[derive(Debug, Clone)]
pub struct PreparedGp {
    design: GpDesign,
    /// `(I − QQᵀ) L⁻¹`, n×n
    residual_map: DMatrix<f64>,
    /// `R⁻¹ Qᵀ L⁻¹`, p×n
    gls_map: DMatrix<f64>,
    /// `K(x*, x) K(x, x)⁻¹`, m×n
    kriging_weights: DMatrix<f64>,
    /// `K(x*, x*) − K(x*, x) K(x, x)⁻¹ K(x, x*)`, m×m
    schur: DMatrix<f64>,
    /// `−A_pp⁻¹ A_po`, m×n
    t_location: DMatrix<f64>,
    /// `A_pp⁻¹`, m×m
    app_inv: DMatrix<f64>,
}

impl PreparedGp {
    pub fn new(design: &GpDesign) -> Result<Self> {
        design.require_identifiable()?;
        let a = gp_build_a(design)?;
        let (n, p) = (design.n(), design.p());
        let x = &design.train_x;
        let k = rbf_kernel(x, x, design.lengthscale);
        let chol = cholesky(k)?;
        let l = chol.l();
        let l_inv = l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or(Error::SingularKernel)?;
        let w = &l_inv * x;
        let qr = w.qr();
        let q = qr.q();
        let r = qr.r();
        if (0..p).any(|i| r[(i, i)].abs() <= 1e-12 * r.amax()) {
            return Err(Error::RankDeficientFeatures);
        }
        let residual_map = &l_inv - &q * (q.transpose() * &l_inv);
        let gls_map = r
            .solve_upper_triangular(&(q.transpose() * &l_inv))
            .ok_or(Error::RankDeficientFeatures)?;

        let k_po = rbf_kernel(&design.pred_x, x, design.lengthscale);
        let k_pp = rbf_kernel(&design.pred_x, &design.pred_x, design.lengthscale);
        let kriging_weights = chol.solve(&k_po.transpose()).transpose();
        let v = l.solve_lower_triangular(&k_po.transpose()).ok_or(Error::SingularKernel)?;
        let mut schur = k_pp - v.transpose() * v;
        symmetrize(&mut schur);

        let app = a.app();
        let app_chol = Cholesky::new(app).ok_or(Error::SingularKernel)?;
        let t_location = -app_chol.solve(&a.apo());
        let mut app_inv = app_chol.inverse();
        symmetrize(&mut app_inv);

        Ok(Self { design: design.clone(), residual_map, gls_map, kriging_weights, schur, t_location, app_inv })
    }

    pub fn design(&self) -> &GpDesign {
        &self.design
    }

    fn check_y(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.design.n() {
            return Err(Error::DimensionMismatch { expected: self.design.n(), found: y.len() });
        }
        Ok(())
    }

    /// `(y − Xβ̂)ᵀ K⁻¹ (y − Xβ̂)`, rejecting `y ∈ col(X)`.
    pub fn residual_form(&self, y: &DVector<f64>) -> Result<f64> {
        self.check_y(y)?;
        let form = (&self.residual_map * y).norm_squared();
        if !(form > DEGENERATE_TOL * y.norm_squared()) {
            return Err(Error::DegenerateObservation { form });
        }
        Ok(form)
    }

    pub fn predict(&self, y: &DVector<f64>, prior: GpPrior) -> Result<StudentTParams> {
        let form = self.residual_form(y)?;
        let n = self.design.n() as f64;
        let nu = match prior {
            GpPrior::RightInvariant => n - self.design.p() as f64,
            GpPrior::Jeffreys => n,
        };
        let loc = &self.t_location * y;
        StudentTParams::new(nu, loc, &self.app_inv * (form / nu))
    }

    pub fn gls_fit(&self, y: &DVector<f64>, flavor: GlsFlavor) -> Result<GpParams> {
        let form = self.residual_form(y)?;
        let divisor = match flavor {
            GlsFlavor::MLE => self.design.n() as f64,
            GlsFlavor::Unbiased => (self.design.n() - self.design.p()) as f64,
        };
        GpParams::new(&self.gls_map * y, (form / divisor).sqrt())
    }

    pub fn conditional_normal(&self, y: &DVector<f64>, params: &GpParams) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.check_y(y)?;
        if params.beta.len() != self.design.p() {
            return Err(Error::DimensionMismatch { expected: self.design.p(), found: params.beta.len() });
        }
        let resid = y - &self.design.train_x * &params.beta;
        let mean = &self.design.pred_x * &params.beta + &self.kriging_weights * resid;
        let cov = &self.schur * (params.sigma_y * params.sigma_y);
        Ok((mean, cov))
    }

    /// Conditional `N(mean, cov)` of the targets as [`MvnParams`].
    pub fn conditional_params(&self, y: &DVector<f64>, params: &GpParams) -> Result<MvnParams> {
        let (mean, cov) = self.conditional_normal(y, params)?;
        MvnParams::from_covariance(mean, &cov)
    }

    /// Log predictive density of `y_star` under one of the four procedures.
    pub fn predictive_logdensity(&self, kind: GpPredictorKind, y: &DVector<f64>, y_star: &[f64]) -> Result<f64> {
        match kind {
            GpPredictorKind::RightInvariant => crate::numcore::mvt_logpdf(y_star, &self.predict(y, GpPrior::RightInvariant)?),
            GpPredictorKind::Jeffreys => crate::numcore::mvt_logpdf(y_star, &self.predict(y, GpPrior::Jeffreys)?),
            GpPredictorKind::PluginUnbiased | GpPredictorKind::PluginMLE => {
                let flavor = if kind == GpPredictorKind::PluginMLE { GlsFlavor::MLE } else { GlsFlavor::Unbiased };
                let fitted = self.gls_fit(y, flavor)?;
                mvn_logpdf(y_star, &self.conditional_params(y, &fitted)?)
            }
        }
    }
}

/// Multivariate t predictive of the targets under the given prior.
pub fn gp_predict(design: &GpDesign, y: &DVector<f64>, prior: GpPrior) -> Result<StudentTParams> {
    PreparedGp::new(design)?.predict(y, prior)
}

/// Generalized least squares estimate of `(β, σ_y)` from the training targets.
pub fn gp_gls_fit(design: &GpDesign, y: &DVector<f64>, flavor: GlsFlavor) -> Result<GpParams> {
    PreparedGp::new(design)?.gls_fit(y, flavor)
}

/// Conditional mean and covariance of the targets given `y` at known parameters.
pub fn gp_conditional_normal(
    design: &GpDesign,
    y: &DVector<f64>,
    params: &GpParams,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch { expected: design.n(), found: y.len() });
    }
    let x = &design.train_x;
    let chol = cholesky(rbf_kernel(x, x, design.lengthscale))?;
    let k_po = rbf_kernel(&design.pred_x, x, design.lengthscale);
    let k_pp = rbf_kernel(&design.pred_x, &design.pred_x, design.lengthscale);
    let resid = y - x * &params.beta;
    let mean = &design.pred_x * &params.beta + &k_po * chol.solve(&resid);
    let v = chol.l().solve_lower_triangular(&k_po.transpose()).ok_or(Error::SingularKernel)?;
    let mut cov = (k_pp - v.transpose() * v) * (params.sigma_y * params.sigma_y);
    symmetrize(&mut cov);
    Ok((mean, cov))
}

/// Differential entropy of the target distribution at true `params` after
/// observing the first `n_obs` training points. With `n_obs = 0` this is the
/// prior `N(X*β, σ_y² K(x*, x*))`.
pub fn gp_oracle_entropy(design: &GpDesign, n_obs: usize, params: &GpParams) -> Result<f64> {
    let sub = design.with_first_observations(n_obs)?;
    let cov = if n_obs == 0 {
        rbf_kernel(&sub.pred_x, &sub.pred_x, sub.lengthscale) * (params.sigma_y * params.sigma_y)
    } else {
        gp_conditional_normal(&sub, &DVector::zeros(n_obs), params)?.1
    };
    let m = design.m() as f64;
    let chol = cholesky(cov)?;
    let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Ok(0.5 * m * (1.0 + LN_2PI) + 0.5 * logdet)
}

/// `h₀ − h_n`: how much observing the first `n_obs` points lowers the entropy
/// of the targets when the parameters are known. The amplitude cancels, so
/// the value depends on the design only.
pub fn gp_entropy_improvement(design: &GpDesign, n_obs: usize) -> Result<f64> {
    let sub = design.with_first_observations(n_obs)?;
    if n_obs == 0 {
        return Ok(0.0);
    }
    let x = &sub.train_x;
    let chol = cholesky(rbf_kernel(x, x, sub.lengthscale))?;
    let k_po = rbf_kernel(&sub.pred_x, x, sub.lengthscale);
    let k_pp = rbf_kernel(&sub.pred_x, &sub.pred_x, sub.lengthscale);
    let v = chol.l().solve_lower_triangular(&k_po.transpose()).ok_or(Error::SingularKernel)?;
    let mut schur = &k_pp - v.transpose() * v;
    symmetrize(&mut schur);
    let logdet = |m: DMatrix<f64>| -> Result<f64> {
        let c = cholesky(m)?;
        Ok(2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
    };
    Ok(0.5 * (logdet(k_pp)? - logdet(schur)?))
}
