use serde::{Deserialize, Serialize};

use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::labels::Genre;

/// Scales entry `label` by `factor` and renormalizes the row to sum 1.
pub fn reweight_probabilities(row: &[f64], label: usize, factor: f64) -> Vec<f64> {
    let mut out = row.to_vec();
    out[label] *= factor;
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    out
}

/// Counts tokens that denote cardinal numbers.
pub trait CardinalTagger {
    fn cardinal_count(&self, text: &str) -> usize;
}

/// Treats every whitespace-separated token containing an ASCII digit as a
/// cardinal.
#[derive(Debug, Clone, Copy, Default)]
pub struct DigitTagger;

impl CardinalTagger for DigitTagger {
    fn cardinal_count(&self, text: &str) -> usize {
        text.split_whitespace()
            .filter(|t| t.bytes().any(|b| b.is_ascii_digit()))
            .count()
    }
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

pub const DEFAULT_NUMERIC_RATIO: f64 = 0.008;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelabelParams {
    /// Cardinal tokens per word above which an opinion prediction is revised.
    pub numeric_ratio_threshold: f64,
}

impl Default for RelabelParams {
    fn default() -> Self {
        RelabelParams {
            numeric_ratio_threshold: DEFAULT_NUMERIC_RATIO,
        }
    }
}

/// Revises opinion predictions of number-heavy articles: to satire when the
/// text contains `!` or `?`, to reporting otherwise. Other predictions pass
/// through unchanged.
pub fn heuristic_relabel(
    articles: &[Article],
    labels: &[Genre],
    params: &RelabelParams,
    tagger: &dyn CardinalTagger,
) -> Result<Vec<Genre>> {
    if articles.len() != labels.len() {
        return Err(Error::Alignment(format!("{} articles for {} labels", articles.len(), labels.len())));
    }
    Ok(articles
        .iter()
        .zip(labels)
        .map(|(a, &g)| {
            if g != Genre::Opinion {
                return g;
            }
            let words = word_count(&a.text);
            if words == 0 {
                return g;
            }
            let ratio = tagger.cardinal_count(&a.text) as f64 / words as f64;
            if ratio <= params.numeric_ratio_threshold {
                g
            } else if a.text.contains(['!', '?']) {
                Genre::Satire
            } else {
                Genre::Reporting
            }
        })
        .collect())
}
