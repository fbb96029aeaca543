// SPDX-License-Identifier: Apache-2.0

//! Linear models over binary pattern features and their text file format.
//!
//! All three kinds score a vector as `sigmoid(w·x + b)`. For Bernoulli naive
//! Bayes the log posterior odds are linear in `x`, so it shares the form.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Classification, ClassifyError, FeatureVector, Prediction, TrainingSet};

pub const MODEL_HEADER: &str = "lingpat-model v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    NaiveBayes,
    LogisticRegression,
    LinearSvm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::NaiveBayes, ModelKind::LogisticRegression, ModelKind::LinearSvm];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "naive_bayes",
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::LinearSvm => "linear_svm",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "NB",
            ModelKind::LogisticRegression => "LR",
            ModelKind::LinearSvm => "SVM",
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "naive_bayes" | "nb" => Ok(ModelKind::NaiveBayes),
            "logistic_regression" | "lr" => Ok(ModelKind::LogisticRegression),
            "linear_svm" | "svm" => Ok(ModelKind::LinearSvm),
            other => Err(format!("unknown model kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
    /// Additive smoothing for naive Bayes.
    pub alpha: f64,
    pub threshold: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            learning_rate: 0.1,
            l2: 1e-3,
            epochs: 500,
            alpha: 1.0,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub layout_hash: String,
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
    pub final_loss: f64,
    pub bias: f64,
    pub weights: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(w: &[f64], x: &[u8]) -> f64 {
    w.iter().zip(x).filter(|(_, b)| **b != 0).map(|(w, _)| w).sum()
}

/// Regularized training loss and its gradient at `params = [w.., b]`.
/// Logistic regression uses mean log-loss, the SVM mean hinge loss; both add
/// `l2/2 · |w|²` (the bias is not penalized). Naive Bayes has no loss.
pub fn loss_and_gradient(kind: ModelKind, params: &[f64], data: &TrainingSet, l2: f64) -> (f64, Vec<f64>) {
    let d = params.len() - 1;
    let (w, b) = (&params[..d], params[d]);
    let n = data.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (x, &y) in data.rows.iter().zip(&data.labels) {
        let z = dot(w, x) + b;
        let g = match kind {
            ModelKind::LogisticRegression => {
                let s = if y { 1.0 } else { -1.0 };
                loss += softplus(-s * z);
                sigmoid(z) - if y { 1.0 } else { 0.0 }
            }
            ModelKind::LinearSvm => {
                let s = if y { 1.0 } else { -1.0 };
                let margin = 1.0 - s * z;
                if margin > 0.0 {
                    loss += margin;
                    -s
                } else {
                    0.0
                }
            }
            ModelKind::NaiveBayes => 0.0,
        };
        if g != 0.0 {
            for (j, &xj) in x.iter().enumerate() {
                if xj != 0 {
                    grad[j] += g;
                }
            }
            grad[d] += g;
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for j in 0..d {
        grad[j] += l2 * w[j];
    }
    (loss, grad)
}

fn train_naive_bayes(data: &TrainingSet, alpha: f64) -> (Vec<f64>, f64) {
    let d = data.dim();
    let n1 = data.positives() as f64;
    let n0 = data.len() as f64 - n1;
    let mut c1 = vec![0.0; d];
    let mut c0 = vec![0.0; d];
    for (x, &y) in data.rows.iter().zip(&data.labels) {
        let c = if y { &mut c1 } else { &mut c0 };
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0 {
                c[j] += 1.0;
            }
        }
    }
    let mut bias = ((n1 + alpha) / (n0 + alpha)).ln();
    let mut weights = vec![0.0; d];
    for j in 0..d {
        let p1 = (c1[j] + alpha) / (n1 + 2.0 * alpha);
        let p0 = (c0[j] + alpha) / (n0 + 2.0 * alpha);
        let absent = ((1.0 - p1) / (1.0 - p0)).ln();
        weights[j] = (p1 / p0).ln() - absent;
        bias += absent;
    }
    (weights, bias)
}

/// Fit a model. Gradient models start from zero and take `epochs`
/// full-batch steps, so the result does not depend on `seed`; it is kept
/// for provenance.
pub fn train(kind: ModelKind, data: &TrainingSet, hp: &Hyperparameters, seed: u64) -> Result<TrainedModel, ClassifyError> {
    data.require_both_classes()?;
    if !(hp.learning_rate > 0.0 && hp.l2 >= 0.0 && hp.alpha > 0.0 && (0.0..=1.0).contains(&hp.threshold)) {
        return Err(ClassifyError::InvalidParameter(format!("invalid hyperparameters {hp:?}")));
    }
    let d = data.dim();
    let (weights, bias, final_loss) = match kind {
        ModelKind::NaiveBayes => {
            let (w, b) = train_naive_bayes(data, hp.alpha);
            let n = data.len() as f64;
            let nll = data
                .rows
                .iter()
                .zip(&data.labels)
                .map(|(x, &y)| softplus(if y { -1.0 } else { 1.0 } * (dot(&w, x) + b)))
                .sum::<f64>()
                / n;
            (w, b, nll)
        }
        _ => {
            let mut params = vec![0.0; d + 1];
            for epoch in 0..hp.epochs {
                let (l, g) = loss_and_gradient(kind, &params, data, hp.l2);
                if !l.is_finite() || g.iter().any(|v| !v.is_finite()) {
                    return Err(ClassifyError::NonFiniteLoss { epoch });
                }
                for (p, gi) in params.iter_mut().zip(&g) {
                    *p -= hp.learning_rate * gi;
                }
            }
            let (l, _) = loss_and_gradient(kind, &params, data, hp.l2);
            if !l.is_finite() {
                return Err(ClassifyError::NonFiniteLoss { epoch: hp.epochs });
            }
            let b = params.pop().expect("bias present");
            (params, b, l)
        }
    };
    Ok(TrainedModel {
        kind,
        layout_hash: data.layout_hash.clone(),
        hyperparameters: *hp,
        seed,
        final_loss,
        bias,
        weights,
    })
}

/// Pluggable scorer over feature vectors.
pub trait Predictor {
    fn layout_hash(&self) -> &str;
    fn threshold(&self) -> f64;
    fn score_bits(&self, bits: &[u8]) -> f64;

    fn predict(&self, v: &FeatureVector) -> Result<Classification, ClassifyError> {
        if v.layout_hash != self.layout_hash() {
            return Err(ClassifyError::LayoutMismatch {
                expected: self.layout_hash().to_string(),
                found: v.layout_hash.clone(),
            });
        }
        let score = self.score_bits(&v.bits);
        Ok(Classification {
            report_id: v.report_id.clone(),
            predicted: Prediction::from_bool(score >= self.threshold()),
            score,
            evidence: Vec::new(),
        })
    }
}

impl Predictor for TrainedModel {
    fn layout_hash(&self) -> &str {
        &self.layout_hash
    }

    fn threshold(&self) -> f64 {
        self.hyperparameters.threshold
    }

    fn score_bits(&self, bits: &[u8]) -> f64 {
        sigmoid(self.margin(bits))
    }
}

/// Score `v` and apply the threshold; a score equal to the threshold is
/// positive.
pub fn predict(model: &TrainedModel, v: &FeatureVector) -> Result<Classification, ClassifyError> {
    Predictor::predict(model, v)
}

impl TrainedModel {
    pub fn margin(&self, bits: &[u8]) -> f64 {
        dot(&self.weights, bits) + self.bias
    }

    pub fn to_text(&self) -> String {
        let hp = &self.hyperparameters;
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_HEADER}");
        let _ = writeln!(out, "kind {}", self.kind.as_str());
        let _ = writeln!(out, "layout {}", self.layout_hash);
        let _ = writeln!(out, "features {}", self.weights.len());
        let _ = writeln!(out, "learning_rate {:.16e}", hp.learning_rate);
        let _ = writeln!(out, "l2 {:.16e}", hp.l2);
        let _ = writeln!(out, "epochs {}", hp.epochs);
        let _ = writeln!(out, "alpha {:.16e}", hp.alpha);
        let _ = writeln!(out, "threshold {:.16e}", hp.threshold);
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "final_loss {:.16e}", self.final_loss);
        let _ = writeln!(out, "bias {:.16e}", self.bias);
        out.push_str("weights\n");
        for w in &self.weights {
            let _ = writeln!(out, "{w:.16e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<TrainedModel, ClassifyError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let bad = |line: usize, message: String| ClassifyError::InvalidModel { line, message };
        match lines.next() {
            Some((_, MODEL_HEADER)) => {}
            Some((n, other)) => return Err(bad(n, format!("expected {MODEL_HEADER:?}, found {other:?}"))),
            None => return Err(bad(1, "empty model file".into())),
        }
        let mut field = |key: &str| -> Result<(usize, String), ClassifyError> {
            let (n, line) = lines.next().ok_or_else(|| bad(0, format!("missing {key}")))?;
            let value = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| bad(n, format!("expected {key}")))?;
            Ok((n, value.to_string()))
        };
        fn num<T: FromStr>(v: (usize, String)) -> Result<T, ClassifyError> {
            v.1.parse().map_err(|_| ClassifyError::InvalidModel {
                line: v.0,
                message: format!("bad number {:?}", v.1),
            })
        }
        let (n, kind) = field("kind")?;
        let kind: ModelKind = kind.parse().map_err(|e| bad(n, e))?;
        let layout_hash = field("layout")?.1;
        let features: usize = num(field("features")?)?;
        let hyperparameters = Hyperparameters {
            learning_rate: num(field("learning_rate")?)?,
            l2: num(field("l2")?)?,
            epochs: num(field("epochs")?)?,
            alpha: num(field("alpha")?)?,
            threshold: num(field("threshold")?)?,
        };
        let seed = num(field("seed")?)?;
        let final_loss = num(field("final_loss")?)?;
        let bias = num(field("bias")?)?;
        match lines.next() {
            Some((_, "weights")) => {}
            Some((n, _)) => return Err(bad(n, "expected weights".into())),
            None => return Err(bad(0, "missing weights".into())),
        }
        let weights = lines
            .filter(|(_, l)| !l.is_empty())
            .map(|(n, l)| num::<f64>((n, l.to_string())))
            .collect::<Result<Vec<f64>, _>>()?;
        if weights.len() != features {
            return Err(bad(0, format!("{} weights for {features} features", weights.len())));
        }
        Ok(TrainedModel {
            kind,
            layout_hash,
            hyperparameters,
            seed,
            final_loss,
            bias,
            weights,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifyError> {
        std::fs::write(path, self.to_text()).map_err(|e| ClassifyError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<TrainedModel, ClassifyError> {
        let text = std::fs::read_to_string(path).map_err(|e| ClassifyError::Io(format!("{}: {e}", path.display())))?;
        TrainedModel::from_text(&text)
    }
}
