use super::{featurize, DescriptorSpec, PredictError, QuerySample};
use crate::crystal::{DensityField, Grid, Structure};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorModel {
    pub spec: DescriptorSpec,
    pub ridge_lambda: f64,
    pub weights: Vec<f64>,
    pub train_mae: f64,
    #[serde(default)]
    pub sample_hash: String,
}

impl PredictorModel {
    pub fn predict(&self, features: &[f64]) -> f64 {
        features.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    pub fn validate(&self) -> Result<(), PredictError> {
        self.spec.validate()?;
        if self.weights.len() != self.spec.dim() {
            return Err(PredictError::InvalidModel(format!(
                "{} weights for dimension {}",
                self.weights.len(),
                self.spec.dim()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(PredictError::InvalidModel("non-finite weight".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PredictError> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }
}

/// Ridge regression by the normal equations; the bias column is not
/// penalized.
pub fn fit(samples: &[QuerySample], spec: &DescriptorSpec, ridge_lambda: f64) -> Result<PredictorModel, PredictError> {
    spec.validate()?;
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(PredictError::InvalidSpec("ridge_lambda must be non-negative".into()));
    }
    let p = spec.dim();
    if samples.len() < p {
        return Err(PredictError::TooFewSamples {
            need: p,
            have: samples.len(),
        });
    }
    let mut a = DMatrix::<f64>::zeros(p, p);
    let mut b = DVector::<f64>::zeros(p);
    for s in samples {
        let f = &s.features;
        for i in 0..p {
            if f[i] == 0.0 {
                continue;
            }
            b[i] += f[i] * s.target;
            for j in i..p {
                a[(i, j)] += f[i] * f[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
    }
    for i in 0..p - 1 {
        a[(i, i)] += ridge_lambda;
    }
    let scale = (0..p).map(|i| a[(i, i)]).fold(0.0, f64::max);
    let chol = a.cholesky().ok_or(PredictError::SingularSystem)?;
    let l = chol.l_dirty();
    let min_pivot = (0..p).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-13 * scale) {
        return Err(PredictError::SingularSystem);
    }
    let weights: Vec<f64> = chol.solve(&b).iter().copied().collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(PredictError::SingularSystem);
    }
    let mut model = PredictorModel {
        spec: spec.clone(),
        ridge_lambda,
        weights,
        train_mae: 0.0,
        sample_hash: String::new(),
    };
    let err: f64 = samples.iter().map(|s| (model.predict(&s.features) - s.target).abs()).sum();
    model.train_mae = err / samples.len() as f64;
    Ok(model)
}

/// Raw model output at every grid point; pass through ingest before use.
pub fn predict_grid(structure: &Structure, model: &PredictorModel, grid: &Grid) -> Result<DensityField, PredictError> {
    model.spec.covers(structure)?;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| model.predict(&featurize(structure, &grid.point(idx), &model.spec)))
        .collect();
    DensityField::new(grid.clone(), values).map_err(|e| PredictError::InvalidModel(e.to_string()))
}

/// (1/J) Σ |pred − truth|.
pub fn evaluate_mae(predicted: &DensityField, truth: &DensityField) -> Result<f64, PredictError> {
    if !predicted.same_grid(truth) {
        return Err(PredictError::Shape(predicted.grid().dims(), truth.grid().dims()));
    }
    let sum: f64 = predicted.values().iter().zip(truth.values()).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / truth.values().len() as f64)
}
