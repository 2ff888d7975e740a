use rand::seq::SliceRandom;

use super::{Dataset, Model, ModelError, ParameterVector, Result};
use crate::seed::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchSize {
    Full,
    Mini(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: BatchSize,
    /// Drives mini-batch shuffling only.
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 5,
            batch_size: BatchSize::Full,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    /// A zero learning rate is accepted and yields a null update.
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(ModelError::InvalidConfig(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(ModelError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == BatchSize::Mini(0) {
            return Err(ModelError::InvalidConfig("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    /// Parameters after training; always `initial + update`.
    pub params: ParameterVector,
    /// `trained − initial`.
    pub update: ParameterVector,
}

fn step(
    params: &ParameterVector,
    model: &Model,
    batch: &Dataset,
    lr: f64,
) -> Result<ParameterVector> {
    let grad = model.with_params(params.clone())?.gradient(batch)?;
    let scaled = grad
        .scale(lr)
        .map_err(|_| ModelError::NonFinite("scaled gradient"))?;
    params
        .sub(&scaled)
        .map_err(|_| ModelError::NonFinite("parameters after step"))
}

/// Runs gradient descent from the model's current parameters and returns the
/// resulting parameters together with the update relative to the start.
pub fn local_train(model: &Model, data: &Dataset, cfg: &TrainingConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let initial = model.params().clone();
    let mut params = initial.clone();
    let mut rng = rng_from_seed(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for _ in 0..cfg.epochs {
        match cfg.batch_size {
            BatchSize::Full => {
                params = step(&params, model, data, cfg.learning_rate)?;
            }
            BatchSize::Mini(size) => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(size) {
                    let batch = data.select(chunk);
                    params = step(&params, model, &batch, cfg.learning_rate)?;
                }
            }
        }
    }

    let update = params
        .sub(&initial)
        .map_err(|_| ModelError::NonFinite("update"))?;
    let params = initial
        .add(&update)
        .map_err(|_| ModelError::NonFinite("parameters"))?;
    Ok(TrainOutcome { params, update })
}
