// SPDX-License-Identifier: Apache-2.0

//! Minority-class oversampling for binary feature rows.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifyError, TrainingSet};

pub const SMOTE_NEIGHBORS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rebalance {
    None,
    RandomOversample,
    Smote,
}

impl FromStr for Rebalance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => Ok(Rebalance::None),
            "random_oversample" | "oversample" => Ok(Rebalance::RandomOversample),
            "smote" => Ok(Rebalance::Smote),
            other => Err(format!("unknown rebalance method {other:?}")),
        }
    }
}

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Grow the minority class until it reaches `target_ratio` times the
/// majority count. Originals come first, in input order, followed by the
/// generated rows. SMOTE interpolates towards one of the
/// [`SMOTE_NEIGHBORS`] nearest minority rows and rounds each coordinate at
/// 0.5, so rows stay binary.
pub fn rebalance(data: &TrainingSet, method: Rebalance, target_ratio: f64, seed: u64) -> Result<TrainingSet, ClassifyError> {
    if method == Rebalance::None {
        return Ok(data.clone());
    }
    data.require_both_classes()?;
    if !(target_ratio > 0.0 && target_ratio.is_finite()) {
        return Err(ClassifyError::InvalidParameter(format!("target ratio {target_ratio} must be positive")));
    }
    let positives = data.positives();
    let minority_label = positives * 2 < data.len();
    let minority: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == minority_label).collect();
    let majority = data.len() - minority.len();
    let wanted = (target_ratio * majority as f64).ceil() as usize;
    let extra = wanted.saturating_sub(minority.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = data.clone();
    match method {
        Rebalance::None => {}
        Rebalance::RandomOversample => {
            for _ in 0..extra {
                let &i = minority.choose(&mut rng).expect("minority non-empty");
                out.rows.push(data.rows[i].clone());
                out.labels.push(minority_label);
            }
        }
        Rebalance::Smote => {
            let neighbors: Vec<Vec<usize>> = minority
                .iter()
                .map(|&i| {
                    let mut others: Vec<usize> = minority.iter().copied().filter(|&j| j != i).collect();
                    others.sort_by_key(|&j| (hamming(&data.rows[i], &data.rows[j]), j));
                    others.truncate(SMOTE_NEIGHBORS);
                    if others.is_empty() {
                        others.push(i);
                    }
                    others
                })
                .collect();
            for _ in 0..extra {
                let k = rng.gen_range(0..minority.len());
                let a = &data.rows[minority[k]];
                let b = &data.rows[*neighbors[k].choose(&mut rng).expect("neighbor")];
                let gap: f64 = rng.gen();
                let row = a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| u8::from(x as f64 + gap * (y as f64 - x as f64) >= 0.5))
                    .collect();
                out.rows.push(row);
                out.labels.push(minority_label);
            }
        }
    }
    Ok(out)
}
