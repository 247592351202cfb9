use nalgebra::{DMatrix, DVector};

use super::types::ObservationSet;
use crate::error::Result;

/// Sample mean `x̄` and scatter `S = Σ (xᵢ − x̄)(xᵢ − x̄)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub mean: DVector<f64>,
    pub scatter: DMatrix<f64>,
}

pub fn sample_stats(obs: &ObservationSet) -> Result<SampleStats> {
    let (n, d) = (obs.n(), obs.d());
    let data = obs.data();
    let mut mean = DVector::<f64>::zeros(d);
    for j in 0..d {
        mean[j] = data.column(j).sum() / n as f64;
    }
    let mut scatter = DMatrix::<f64>::zeros(d, d);
    let mut centered = vec![0.0; d];
    for r in 0..n {
        for j in 0..d {
            centered[j] = data[(r, j)] - mean[j];
        }
        for i in 0..d {
            for j in 0..=i {
                scatter[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            scatter[(j, i)] = scatter[(i, j)];
        }
    }
    Ok(SampleStats { mean, scatter })
}
