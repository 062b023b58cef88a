use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The chosen number of clusters and the scores it was chosen from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub k_hat: usize,
    pub method: String,
    pub path: Vec<(usize, f64)>,
}

/// `k` with the smallest score; ties go to the smallest `k`. `+inf` scores
/// are allowed and lose to any finite score.
pub fn select_k(path: &[(usize, f64)], method: &str) -> Result<SelectionResult> {
    pick(path, method, |candidate, best| candidate < best)
}

/// `k` with the largest score; ties go to the smallest `k`.
pub fn select_k_max(path: &[(usize, f64)], method: &str) -> Result<SelectionResult> {
    pick(path, method, |candidate, best| candidate > best)
}

fn pick(path: &[(usize, f64)], method: &str, better: impl Fn(f64, f64) -> bool) -> Result<SelectionResult> {
    if let Some((k, _)) = path.iter().find(|(_, s)| s.is_nan()) {
        return Err(Error::Numerical(format!("{method}: score at k={k} is NaN")));
    }
    let mut sorted = path.to_vec();
    sorted.sort_by_key(|(k, _)| *k);
    let &(first_k, first_s) = sorted
        .first()
        .ok_or_else(|| Error::InvalidArgument(format!("{method}: empty score path")))?;
    let (k_hat, _) = sorted.iter().skip(1).fold(
        (first_k, first_s),
        |best, &(k, s)| if better(s, best.1) { (k, s) } else { best },
    );
    Ok(SelectionResult {
        k_hat,
        method: method.to_string(),
        path: sorted,
    })
}
