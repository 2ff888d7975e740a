use rand::Rng;

use super::{Dataset, Layout, ModelError, ParameterVector, Result};
use crate::seed::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the pre-activation value.
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = pre.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Multinomial logistic regression. Layout: `W [C×F]`, `b [C]`.
    LogisticRegression,
    /// One hidden layer. Layout: `W1 [H×F]`, `b1 [H]`, `W2 [C×H]`, `b2 [C]`.
    Mlp {
        hidden: usize,
        activation: Activation,
    },
}

/// A softmax classifier over flat parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    kind: ModelKind,
    num_features: usize,
    num_classes: usize,
    params: ParameterVector,
}

/// Per-example intermediate values needed by backprop.
struct Pass {
    hidden_pre: Vec<f64>,
    hidden: Vec<f64>,
    logits: Vec<f64>,
}

impl Model {
    pub fn layout_for(kind: ModelKind, num_features: usize, num_classes: usize) -> Layout {
        match kind {
            ModelKind::LogisticRegression => {
                Layout::new(vec![(num_classes, num_features), (num_classes, 1)])
            }
            ModelKind::Mlp { hidden, .. } => Layout::new(vec![
                (hidden, num_features),
                (hidden, 1),
                (num_classes, hidden),
                (num_classes, 1),
            ]),
        }
    }

    fn check_dims(kind: ModelKind, num_features: usize, num_classes: usize) -> Result<()> {
        if num_features == 0 || num_classes == 0 {
            return Err(ModelError::InvalidConfig(
                "num_features and num_classes must be >= 1".into(),
            ));
        }
        if let ModelKind::Mlp { hidden: 0, .. } = kind {
            return Err(ModelError::InvalidConfig(
                "hidden width must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Zero-initialised logistic regression.
    pub fn logistic(num_features: usize, num_classes: usize) -> Result<Self> {
        let kind = ModelKind::LogisticRegression;
        Self::check_dims(kind, num_features, num_classes)?;
        Ok(Self {
            kind,
            num_features,
            num_classes,
            params: ParameterVector::zeros(Self::layout_for(kind, num_features, num_classes)),
        })
    }

    /// MLP with Glorot-uniform weights drawn from `seed` and zero biases.
    pub fn mlp(
        num_features: usize,
        num_classes: usize,
        hidden: usize,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let kind = ModelKind::Mlp { hidden, activation };
        Self::check_dims(kind, num_features, num_classes)?;
        let layout = Self::layout_for(kind, num_features, num_classes);
        let mut rng = rng_from_seed(seed);
        let mut values = Vec::with_capacity(layout.size());
        for &(rows, cols) in layout.blocks() {
            if cols == 1 {
                values.extend(std::iter::repeat_n(0.0, rows));
            } else {
                let limit = (6.0 / (rows + cols) as f64).sqrt();
                values.extend((0..rows * cols).map(|_| rng.gen_range(-limit..limit)));
            }
        }
        Ok(Self {
            kind,
            num_features,
            num_classes,
            params: ParameterVector::new(layout, values)?,
        })
    }

    /// Initialises a model of the given kind; logistic regression ignores `seed`.
    pub fn init(
        kind: ModelKind,
        num_features: usize,
        num_classes: usize,
        seed: u64,
    ) -> Result<Self> {
        match kind {
            ModelKind::LogisticRegression => Self::logistic(num_features, num_classes),
            ModelKind::Mlp { hidden, activation } => {
                Self::mlp(num_features, num_classes, hidden, activation, seed)
            }
        }
    }

    /// Same architecture with replacement parameters.
    pub fn with_params(&self, params: ParameterVector) -> Result<Self> {
        if params.layout() != self.params.layout() {
            return Err(ModelError::LayoutMismatch);
        }
        Ok(Self {
            params,
            ..self.clone()
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    fn pass(&self, row: &[f64]) -> Pass {
        let f = self.num_features;
        let c = self.num_classes;
        match self.kind {
            ModelKind::LogisticRegression => {
                let w = self.params.block(0);
                let b = self.params.block(1);
                let logits = (0..c)
                    .map(|k| b[k] + dot(&w[k * f..(k + 1) * f], row))
                    .collect();
                Pass {
                    hidden_pre: Vec::new(),
                    hidden: Vec::new(),
                    logits,
                }
            }
            ModelKind::Mlp {
                hidden: h,
                activation,
            } => {
                let w1 = self.params.block(0);
                let b1 = self.params.block(1);
                let w2 = self.params.block(2);
                let b2 = self.params.block(3);
                let hidden_pre: Vec<f64> = (0..h)
                    .map(|j| b1[j] + dot(&w1[j * f..(j + 1) * f], row))
                    .collect();
                let hidden: Vec<f64> = hidden_pre.iter().map(|&z| activation.apply(z)).collect();
                let logits = (0..c)
                    .map(|k| b2[k] + dot(&w2[k * h..(k + 1) * h], &hidden))
                    .collect();
                Pass {
                    hidden_pre,
                    hidden,
                    logits,
                }
            }
        }
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.num_features {
            return Err(ModelError::DimensionMismatch {
                expected: self.num_features,
                got: row.len(),
            });
        }
        Ok(())
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.is_empty() {
            return Err(ModelError::EmptyDataset);
        }
        if data.num_features() != self.num_features {
            return Err(ModelError::DimensionMismatch {
                expected: self.num_features,
                got: data.num_features(),
            });
        }
        if data.num_classes() > self.num_classes {
            return Err(ModelError::DimensionMismatch {
                expected: self.num_classes,
                got: data.num_classes(),
            });
        }
        Ok(())
    }

    /// Class probabilities for one feature row.
    pub fn forward(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_row(row)?;
        Ok(softmax(&self.pass(row).logits))
    }

    /// Predicted class; ties go to the lowest index.
    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        self.check_row(row)?;
        Ok(argmax(&self.pass(row).logits))
    }

    /// Mean softmax cross-entropy over `data`.
    pub fn loss(&self, data: &Dataset) -> Result<f64> {
        self.check_data(data)?;
        let total: f64 = data
            .rows()
            .map(|(row, label)| {
                let logits = self.pass(row).logits;
                log_sum_exp(&logits) - logits[label]
            })
            .sum();
        Ok(total / data.len() as f64)
    }

    /// Gradient of [`Model::loss`] with respect to the parameters.
    pub fn gradient(&self, data: &Dataset) -> Result<ParameterVector> {
        self.check_data(data)?;
        let f = self.num_features;
        let c = self.num_classes;
        let layout = self.params.layout().clone();
        let mut grad = vec![0.0; layout.size()];

        for (row, label) in data.rows() {
            let pass = self.pass(row);
            let mut dz = softmax(&pass.logits);
            dz[label] -= 1.0;

            match self.kind {
                ModelKind::LogisticRegression => {
                    let (gw, gb) = grad.split_at_mut(c * f);
                    for k in 0..c {
                        axpy(dz[k], row, &mut gw[k * f..(k + 1) * f]);
                        gb[k] += dz[k];
                    }
                }
                ModelKind::Mlp {
                    hidden: h,
                    activation,
                } => {
                    let w2 = self.params.block(2);
                    let (gw1, rest) = grad.split_at_mut(h * f);
                    let (gb1, rest) = rest.split_at_mut(h);
                    let (gw2, gb2) = rest.split_at_mut(c * h);
                    let mut dh = vec![0.0; h];
                    for k in 0..c {
                        axpy(dz[k], &pass.hidden, &mut gw2[k * h..(k + 1) * h]);
                        gb2[k] += dz[k];
                        axpy(dz[k], &w2[k * h..(k + 1) * h], &mut dh);
                    }
                    for j in 0..h {
                        let dpre = dh[j] * activation.derivative(pass.hidden_pre[j]);
                        axpy(dpre, row, &mut gw1[j * f..(j + 1) * f]);
                        gb1[j] += dpre;
                    }
                }
            }
        }

        let n = data.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        ParameterVector::new(layout, grad).map_err(|_| ModelError::NonFinite("gradient"))
    }

    /// Fraction of examples whose argmax prediction equals the label.
    pub fn evaluate(&self, data: &Dataset) -> Result<f64> {
        self.check_data(data)?;
        let correct = data
            .rows()
            .filter(|(row, label)| argmax(&self.pass(row).logits) == *label)
            .count();
        Ok(correct as f64 / data.len() as f64)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logreg_with(w: Vec<f64>, b: Vec<f64>, f: usize, c: usize) -> Model {
        let m = Model::logistic(f, c).unwrap();
        let mut values = w;
        values.extend(b);
        let params = ParameterVector::new(m.params().layout().clone(), values).unwrap();
        m.with_params(params).unwrap()
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let m = Model::logistic(3, 4).unwrap();
        let p = m.forward(&[0.3, -2.0, 7.0]).unwrap();
        for v in p {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_logit_is_even_split() {
        let m = logreg_with(vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0], 2, 2);
        assert_eq!(m.forward(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let m = Model::logistic(3, 2).unwrap();
        assert!(matches!(
            m.forward(&[1.0]),
            Err(ModelError::DimensionMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn mlp_matches_hand_evaluated_pass() {
        // F=2, H=2, C=2, tanh.
        let kind = ModelKind::Mlp {
            hidden: 2,
            activation: Activation::Tanh,
        };
        let m = Model::init(kind, 2, 2, 0).unwrap();
        let values = vec![
            0.1, 0.2, -0.3, 0.4, // W1
            0.05, -0.05, // b1
            0.5, -0.6, 0.7, 0.8, // W2
            0.01, -0.02, // b2
        ];
        let m = m
            .with_params(ParameterVector::new(m.params().layout().clone(), values).unwrap())
            .unwrap();
        let x = [1.0, 2.0];
        // Hand evaluation.
        let h0 = (0.1 * 1.0 + 0.2 * 2.0 + 0.05f64).tanh();
        let h1 = (-0.3 * 1.0 + 0.4 * 2.0 - 0.05f64).tanh();
        let z0 = 0.5 * h0 - 0.6 * h1 + 0.01;
        let z1 = 0.7 * h0 + 0.8 * h1 - 0.02;
        let p1 = 1.0 / (1.0 + (z0 - z1).exp());
        let p = m.forward(&x).unwrap();
        assert!((p[1] - p1).abs() < 1e-12);
        assert!((p[0] - (1.0 - p1)).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_reference_values() {
        // Uniform predictor on two classes.
        let m = Model::logistic(2, 2).unwrap();
        let d = Dataset::new(vec![1.0, 2.0, -1.0, 0.5], 2, vec![0, 1], 2).unwrap();
        assert!((m.loss(&d).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);

        // Single example at zero weights: ln(C) for any label.
        let m = Model::logistic(2, 5).unwrap();
        let d = Dataset::new(vec![3.0, 4.0], 2, vec![3], 5).unwrap();
        assert!((m.loss(&d).unwrap() - 5f64.ln()).abs() < 1e-12);

        // Near-perfect one-hot prediction.
        let m = logreg_with(vec![0.0, 0.0, 0.0, 0.0], vec![-50.0, 50.0], 2, 2);
        let d = Dataset::new(vec![0.0, 0.0], 2, vec![1], 2).unwrap();
        let loss = m.loss(&d).unwrap();
        assert!((0.0..1e-9).contains(&loss));
    }

    #[test]
    fn loss_and_gradient_reject_empty_data() {
        let m = Model::logistic(2, 2).unwrap();
        let d = Dataset::new(vec![], 2, vec![], 2).unwrap();
        assert_eq!(m.loss(&d).unwrap_err(), ModelError::EmptyDataset);
        assert_eq!(m.gradient(&d).unwrap_err(), ModelError::EmptyDataset);
        assert_eq!(m.evaluate(&d).unwrap_err(), ModelError::EmptyDataset);
    }

    #[test]
    fn logreg_gradient_hand_example() {
        // p = 0.5 for both classes, y = 1, x = [1, 0]: grad = (p - y) x.
        let m = Model::logistic(2, 2).unwrap();
        let d = Dataset::new(vec![1.0, 0.0], 2, vec![1], 2).unwrap();
        let g = m.gradient(&d).unwrap();
        assert_eq!(g.block(0), &[0.5, 0.0, -0.5, 0.0]);
        assert_eq!(g.block(1), &[0.5, -0.5]);
    }

    #[test]
    fn gradient_is_mean_over_examples() {
        let m = Model::mlp(3, 3, 4, Activation::Relu, 9).unwrap();
        let d = Dataset::new(
            vec![0.1, 0.2, 0.3, -1.0, 0.5, 2.0, 0.0, -0.7, 1.1],
            3,
            vec![0, 2, 1],
            3,
        )
        .unwrap();
        let doubled = Dataset::concat([&d, &d]).unwrap();
        let g1 = m.gradient(&d).unwrap();
        let g2 = m.gradient(&doubled).unwrap();
        for (a, b) in g1.values().iter().zip(g2.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn evaluate_counts_argmax_hits_with_low_index_ties() {
        let m = Model::logistic(1, 2).unwrap();
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], 1, vec![0, 1, 1, 0, 1], 2).unwrap();
        // All ties resolve to class 0.
        assert!((m.evaluate(&d).unwrap() - 0.4).abs() < 1e-15);

        let oracle = logreg_with(vec![-1.0, 1.0], vec![2.5, -2.5], 1, 2);
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 1, vec![0, 0, 1, 1], 2).unwrap();
        assert_eq!(oracle.evaluate(&d).unwrap(), 1.0);
    }
}
