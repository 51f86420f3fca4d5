use std::collections::HashMap;

use super::hungarian::min_cost_assignment;
use super::TopicModel;
use crate::error::{Error, Result};
use crate::synth::TrueModel;

/// Above this many topics the assignment is solved by the Hungarian
/// algorithm instead of enumerating permutations.
const BRUTE_FORCE_MAX: usize = 8;

/// `cost[t][s] = Σ_w |Φ_t(w) − p̃(w|s)|`, aligned by word name over the
/// true vocabulary. Model words unknown to the truth are an error.
pub fn topic_cost_matrix(model: &TopicModel, truth: &TrueModel) -> Result<Vec<Vec<f64>>> {
    let n = model.n_topics();
    if n != truth.n_topics() {
        return Err(Error::TopicCountMismatch {
            model: n,
            truth: truth.n_topics(),
        });
    }
    let index: HashMap<&str, usize> = truth.vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let cols: Vec<usize> = model
        .vocab
        .iter()
        .map(|w| {
            index
                .get(w.as_str())
                .copied()
                .ok_or_else(|| Error::invalid(format!("model word {w:?} is unknown to the true model")))
        })
        .collect::<Result<_>>()?;
    let mut in_model = vec![false; truth.vocab.len()];
    cols.iter().for_each(|&c| in_model[c] = true);

    let mut cost = vec![vec![0.0; n]; n];
    for (t, row) in model.phi.iter().enumerate() {
        for (s, truth_row) in truth.topic_word.iter().enumerate() {
            let mut c: f64 = cols.iter().zip(row).map(|(&g, &p)| (p - truth_row[g]).abs()).sum();
            // true mass on words the model never saw
            c += truth_row
                .iter()
                .zip(&in_model)
                .filter(|(_, &seen)| !seen)
                .map(|(&p, _)| p)
                .sum::<f64>();
            cost[t][s] = c;
        }
    }
    Ok(cost)
}

/// Minimal average L1 distance between model and true topics over all
/// bijections, halved: a value in `[0, 1]`.
pub fn error_rate(model: &TopicModel, truth: &TrueModel) -> Result<f64> {
    if model.n_topics() <= BRUTE_FORCE_MAX {
        error_rate_brute_force(model, truth)
    } else {
        error_rate_hungarian(model, truth)
    }
}

pub fn error_rate_brute_force(model: &TopicModel, truth: &TrueModel) -> Result<f64> {
    let cost = topic_cost_matrix(model, truth)?;
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let c: f64 = p.iter().enumerate().map(|(t, &s)| cost[t][s]).sum();
        best = best.min(c);
    });
    Ok((best / (2.0 * n as f64)).clamp(0.0, 1.0))
}

pub fn error_rate_hungarian(model: &TopicModel, truth: &TrueModel) -> Result<f64> {
    let cost = topic_cost_matrix(model, truth)?;
    let n = cost.len();
    let (_, total) = min_cost_assignment(&cost);
    Ok((total / (2.0 * n as f64)).clamp(0.0, 1.0))
}

fn permute(p: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}
