//! Discrete AdaBoost over shallow trees.

use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use super::tree::{fit_tree, weighted_error, SparseDataset, Tree};
use super::Label;
use crate::error::{Error, Result};

/// Error floor used when a round classifies every example correctly.
pub const MIN_ERROR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub rounds: usize,
    pub tree_depth: usize,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            rounds: 200,
            tree_depth: 2,
            seed: 0,
        }
    }
}

/// What happened in one boosting round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundInfo {
    pub error: f64,
    pub alpha: f64,
    /// Normalizer `Z_t` of the weight update; the running product of these
    /// bounds the training error.
    pub normalizer: f64,
    pub bound: f64,
    pub training_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub trees: Vec<(Tree, f64)>,
    pub config: BoostConfig,
    pub space_hash: u64,
    pub history: Vec<RoundInfo>,
}

impl BoostedEnsemble {
    /// Weighted vote normalized by the total stage weight, in [-1, 1].
    pub fn margin(&self, x: &FeatureVector) -> f64 {
        let total: f64 = self.trees.iter().map(|t| t.1).sum();
        if total <= 0.0 {
            return 0.0;
        }
        self.trees.iter().map(|(t, a)| a * t.predict(x)).sum::<f64>() / total
    }

    /// Label and margin for `x`. A zero margin is classed as human.
    pub fn classify(&self, x: &FeatureVector) -> Result<(Label, f64)> {
        if x.space_hash != self.space_hash {
            return Err(Error::FeatureSpaceMismatch {
                expected: self.space_hash,
                found: x.space_hash,
            });
        }
        let m = self.margin(x);
        Ok((if m > 0.0 { Label::Machine } else { Label::Human }, m))
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

pub fn classify(ensemble: &BoostedEnsemble, x: &FeatureVector) -> Result<(Label, f64)> {
    ensemble.classify(x)
}

/// Round-by-round AdaBoost, exposing the example weights between rounds.
pub struct Booster {
    data: SparseDataset,
    weights: Vec<f64>,
    scores: Vec<f64>,
    config: BoostConfig,
    space_hash: u64,
    trees: Vec<(Tree, f64)>,
    history: Vec<RoundInfo>,
    done: bool,
}

impl Booster {
    pub fn new(data: &[FeatureVector], config: BoostConfig) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::Empty("boosting needs at least two examples"));
        }
        if config.tree_depth == 0 {
            return Err(Error::param("tree_depth", "must be at least 1"));
        }
        let space_hash = data[0].space_hash;
        let mut labels = Vec::with_capacity(data.len());
        for x in data {
            if x.space_hash != space_hash {
                return Err(Error::FeatureSpaceMismatch {
                    expected: space_hash,
                    found: x.space_hash,
                });
            }
            let label = x
                .label
                .ok_or_else(|| Error::param("data", "every training vector needs a label"))?;
            labels.push(label.sign());
        }
        if labels.iter().all(|&y| y == labels[0]) {
            return Err(Error::SingleClass);
        }
        let n = data.len();
        Ok(Booster {
            data: SparseDataset::new(data, labels),
            weights: vec![1.0 / n as f64; n],
            scores: vec![0.0; n],
            config,
            space_hash,
            trees: Vec::new(),
            history: Vec::new(),
            done: false,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_done(&self) -> bool {
        self.done || self.trees.len() >= self.config.rounds
    }

    /// Runs one round. Returns `None` once training has stopped; a round
    /// whose error reaches 0.5 is discarded and stops training.
    pub fn step(&mut self) -> Option<RoundInfo> {
        if self.is_done() {
            return None;
        }
        let tree = fit_tree(&self.data, &self.weights, self.config.tree_depth);
        let (err, preds) = weighted_error(&tree, &self.data, &self.weights);
        if err >= 0.5 {
            self.done = true;
            return None;
        }
        let perfect = err <= MIN_ERROR;
        let e = err.max(MIN_ERROR);
        let alpha = 0.5 * ((1.0 - e) / e).ln();
        let labels = self.data.labels();
        let mut z = 0.0;
        for i in 0..self.weights.len() {
            self.weights[i] *= (-alpha * labels[i] * preds[i]).exp();
            z += self.weights[i];
        }
        for w in &mut self.weights {
            *w /= z;
        }
        let mut wrong = 0usize;
        for i in 0..self.scores.len() {
            self.scores[i] += alpha * preds[i];
            let predicted = if self.scores[i] > 0.0 { 1.0 } else { -1.0 };
            if predicted != labels[i] {
                wrong += 1;
            }
        }
        let bound = self.history.last().map_or(1.0, |h| h.bound) * z;
        let info = RoundInfo {
            error: err,
            alpha,
            normalizer: z,
            bound,
            training_error: wrong as f64 / labels.len() as f64,
        };
        self.trees.push((tree, alpha));
        self.history.push(info);
        if perfect {
            self.done = true;
        }
        Some(info)
    }

    pub fn finish(self) -> BoostedEnsemble {
        BoostedEnsemble {
            trees: self.trees,
            config: self.config,
            space_hash: self.space_hash,
            history: self.history,
        }
    }
}

/// Trains for up to `rounds` rounds of depth-`tree_depth` trees.
pub fn train_adaboost(data: &[FeatureVector], config: BoostConfig) -> Result<BoostedEnsemble> {
    let mut b = Booster::new(data, config)?;
    while b.step().is_some() {}
    let e = b.finish();
    log::debug!("boosting stopped after {} rounds", e.len());
    Ok(e)
}
