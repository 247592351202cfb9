//! The two transformation groups of the model families and their actions.
//!
//! `G_N` pairs an upper-triangular matrix `V` with positive diagonal and a
//! translation `m`; it acts on points by `y ↦ V y + m` and on normal
//! parameters by `(U, μ) ↦ (V U, V μ + m)`.
//!
//! `G_GP` pairs a positive scale `a` with a coefficient shift `b` and acts on
//! GP observations through the feature matrix: `y ↦ a y + X b`,
//! `(β, σ_y) ↦ (a β + b, a σ_y)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gppredict::GpParams;
use crate::numcore::{invert_upper, logdet_upper, MvnParams, ObservationSet};

/// Element `(V, m)` of `G_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElementN {
    v: DMatrix<f64>,
    m: DVector<f64>,
}

impl GroupElementN {
    pub fn new(v: DMatrix<f64>, m: DVector<f64>) -> Result<Self> {
        // same validity rules as a Cholesky factor
        let checked = MvnParams::new(m, v)?;
        Ok(Self { v: checked.u().clone(), m: checked.mu().clone() })
    }

    pub fn identity(d: usize) -> Self {
        Self { v: DMatrix::identity(d, d), m: DVector::zeros(d) }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn m(&self) -> &DVector<f64> {
        &self.m
    }

    /// `log det V`, the log-Jacobian of the action on a single point.
    pub fn log_det(&self) -> f64 {
        logdet_upper(&self.v)
    }

    /// Image `V x + m` of a single point.
    pub fn act_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: x.len() });
        }
        Ok((0..d)
            .map(|i| self.m[i] + (i..d).map(|k| self.v[(i, k)] * x[k]).sum::<f64>())
            .collect())
    }
}

/// `g2 ∘ g1 = (V₂V₁, V₂m₁ + m₂)`.
pub fn gn_compose(g2: &GroupElementN, g1: &GroupElementN) -> Result<GroupElementN> {
    if g2.dim() != g1.dim() {
        return Err(Error::DimensionMismatch { expected: g2.dim(), found: g1.dim() });
    }
    let v = (&g2.v * &g1.v).upper_triangle();
    let m = &g2.v * &g1.m + &g2.m;
    Ok(GroupElementN { v, m })
}

/// `(V⁻¹, −V⁻¹m)`.
pub fn gn_inverse(g: &GroupElementN) -> GroupElementN {
    let v = invert_upper(&g.v);
    let m = -(&v * &g.m);
    GroupElementN { v, m }
}

/// Applies `y ↦ V y + m` to every row.
pub fn gn_act_data(g: &GroupElementN, obs: &ObservationSet) -> Result<ObservationSet> {
    if obs.d() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: obs.d() });
    }
    // rows are samples: Y' = Y Vᵀ + 1 mᵀ
    let mut data = obs.data() * g.v.transpose();
    for mut row in data.row_iter_mut() {
        row += g.m.transpose();
    }
    ObservationSet::new(data)
}

/// `(V, m)·(U, μ) = (V U, V μ + m)`.
pub fn gn_act_params(g: &GroupElementN, theta: &MvnParams) -> Result<MvnParams> {
    if theta.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: theta.dim() });
    }
    let u = (&g.v * theta.u()).upper_triangle();
    let mu = &g.v * theta.mu() + &g.m;
    MvnParams::new(mu, u)
}

/// Unnormalized log-density of the right Haar measure `∏ U_ii^(−i) dU dμ`
/// (1-based `i`). The translation part is flat.
pub fn gn_right_haar_logdensity(theta: &MvnParams) -> f64 {
    let u = theta.u();
    (0..theta.dim()).map(|i| -((i + 1) as f64) * u[(i, i)].ln()).sum()
}

/// Element `(a, b)` of `G_GP`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpGroupElement {
    a: f64,
    b: DVector<f64>,
}

impl GpGroupElement {
    pub fn new(a: f64, b: DVector<f64>) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidInput(format!("scale must be positive, got {a}")));
        }
        Ok(Self { a, b })
    }

    pub fn identity(p: usize) -> Self {
        Self { a: 1.0, b: DVector::zeros(p) }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// `(β, σ_y) ↦ (aβ + b, aσ_y)`.
    pub fn act_params(&self, params: &GpParams) -> Result<GpParams> {
        if params.beta().len() != self.b.len() {
            return Err(Error::DimensionMismatch { expected: self.b.len(), found: params.beta().len() });
        }
        GpParams::new(params.beta() * self.a + &self.b, params.sigma_y() * self.a)
    }
}

/// `(a₂, b₂) ∘ (a₁, b₁) = (a₂a₁, a₂b₁ + b₂)`.
pub fn gp_compose(g2: &GpGroupElement, g1: &GpGroupElement) -> Result<GpGroupElement> {
    if g2.b.len() != g1.b.len() {
        return Err(Error::DimensionMismatch { expected: g2.b.len(), found: g1.b.len() });
    }
    GpGroupElement::new(g2.a * g1.a, &g1.b * g2.a + &g2.b)
}

pub fn gp_inverse(g: &GpGroupElement) -> GpGroupElement {
    GpGroupElement { a: 1.0 / g.a, b: -&g.b / g.a }
}

/// Result of [`gp_act`].
#[derive(Debug, Clone, PartialEq)]
pub struct GpActed {
    pub y: DVector<f64>,
    pub y_star: DVector<f64>,
}

/// Applies `g` to observations `y` at the rows of `train_features` and to
/// targets `y_star` at the rows of `pred_features`.
///
/// Both blocks transform by the same affine rule, `y ↦ a y + X b`; with the
/// parameters mapped by [`GpGroupElement::act_params`] this leaves the joint
/// density, and hence the conditional of `y_star` given `y`, invariant up to
/// the Jacobian `a^(n+m)`.
pub fn gp_act(
    g: &GpGroupElement,
    train_features: &DMatrix<f64>,
    y: &DVector<f64>,
    pred_features: &DMatrix<f64>,
    y_star: &DVector<f64>,
) -> Result<GpActed> {
    let p = g.b.len();
    for (x, t) in [(train_features, y), (pred_features, y_star)] {
        if x.ncols() != p {
            return Err(Error::DimensionMismatch { expected: p, found: x.ncols() });
        }
        if x.nrows() != t.len() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), found: t.len() });
        }
    }
    Ok(GpActed {
        y: y * g.a + train_features * &g.b,
        y_star: y_star * g.a + pred_features * &g.b,
    })
}
