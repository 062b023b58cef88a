use serde::{Deserialize, Serialize};

use super::{check_range, fit_range, Diagnostic};
use crate::assignment::ClusterAssignment;
use crate::data::{squared_distance, DataMatrix};
use crate::error::{Error, Result};
use crate::instability::{select_k_max, SelectionResult};
use crate::kmeans::KMeansConfig;
use crate::seed::SeedSpec;

/// Euclidean distances between all rows, upper triangle row by row.
struct Distances {
    n: usize,
    values: Vec<f64>,
}

impl Distances {
    fn new(data: &DataMatrix) -> Self {
        let n = data.n();
        let mut values = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                values.push(squared_distance(data.row(i), data.row(j)).sqrt());
            }
        }
        Self { n, values }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.values[a * (2 * self.n - a - 1) / 2 + (b - a - 1)]
    }
}

fn check_assignment(n: usize, assignment: &ClusterAssignment) -> Result<()> {
    if assignment.len() != n || assignment.covered_ids().last() != Some(&(n - 1)) {
        return Err(Error::CoverageMismatch);
    }
    if assignment.k() < 2 {
        return Err(Error::InvalidArgument("silhouette needs at least two clusters".into()));
    }
    if assignment.has_empty_clusters() {
        return Err(Error::EmptyCluster);
    }
    Ok(())
}

fn silhouette_from(dist: &Distances, labels: &[usize], sizes: &[usize]) -> f64 {
    let k = sizes.len();
    let mut sums = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..dist.n {
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..dist.n {
            if j != i {
                sums[labels[j]] += dist.get(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / dist.n as f64
}

/// Mean silhouette `(b_i - a_i) / max(a_i, b_i)` over all objects, with
/// Euclidean distances. Objects in singleton clusters contribute 0.
pub fn silhouette_width(data: &DataMatrix, assignment: &ClusterAssignment) -> Result<f64> {
    check_assignment(data.n(), assignment)?;
    Ok(silhouette_from(
        &Distances::new(data),
        assignment.labels(),
        assignment.sizes().sizes(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeForm {
    /// `[Si(k) - Si(k-1)] Si(k)^v`.
    #[default]
    Backward,
    /// `-[Si(k+1) - Si(k)] Si(k)^v`.
    Forward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlopeConfig {
    pub v: f64,
    pub form: SlopeForm,
    pub kmeans: KMeansConfig,
}

impl Default for SlopeConfig {
    fn default() -> Self {
        Self {
            v: 1.0,
            form: SlopeForm::Backward,
            kmeans: KMeansConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeResult {
    pub selection: SelectionResult,
    /// Mean silhouette of the k-means partition at each evaluated `k`.
    pub silhouettes: Vec<(usize, f64)>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Slope objective at every `k` whose neighbouring silhouette is available.
pub fn slope_scores(silhouettes: &[(usize, f64)], v: f64, form: SlopeForm) -> Vec<(usize, f64)> {
    let at = |k: usize| silhouettes.iter().find(|(kk, _)| *kk == k).map(|(_, s)| *s);
    silhouettes
        .iter()
        .filter_map(|&(k, si)| {
            let weight = si.powf(v);
            match form {
                SlopeForm::Backward => at(k.checked_sub(1)?).map(|prev| (k, (si - prev) * weight)),
                SlopeForm::Forward => at(k + 1).map(|next| (k, -(next - si) * weight)),
            }
        })
        .collect()
}

/// Slope statistic over the silhouettes of k-means partitions.
///
/// Silhouettes are evaluated one step beyond the range where the chosen
/// form needs it, so with the backward form and `k_min = 2` the first
/// scored `k` is 3.
pub fn slope_statistic(
    data: &DataMatrix,
    k_min: usize,
    k_max: usize,
    config: &SlopeConfig,
    seed: SeedSpec,
) -> Result<SlopeResult> {
    check_range(k_min, k_max)?;
    config.kmeans.validate()?;
    if !(config.v > 0.0) || !config.v.is_finite() {
        return Err(Error::Config("slope power v must be positive".into()));
    }
    let (lo, hi) = match config.form {
        SlopeForm::Backward => (k_min.saturating_sub(1).max(2), k_max),
        SlopeForm::Forward => (k_min.max(2), k_max + 1),
    };
    let ks: Vec<usize> = (lo..=hi).collect();
    let dist = Distances::new(data);
    let mut silhouettes = Vec::new();
    let mut diagnostics = Vec::new();
    for (&k, fit) in ks.iter().zip(fit_range(data, &ks, &config.kmeans, seed)) {
        let si = fit.and_then(|m| {
            let a = m.assign(data)?;
            check_assignment(data.n(), &a)?;
            Ok(silhouette_from(&dist, a.labels(), a.sizes().sizes()))
        });
        match si {
            Ok(s) => silhouettes.push((k, s)),
            Err(e) => diagnostics.push(Diagnostic::new(k, e.to_string())),
        }
    }
    let mut path = Vec::new();
    for (k, s) in slope_scores(&silhouettes, config.v, config.form) {
        if !(k_min..=k_max).contains(&k) {
            continue;
        }
        if s.is_nan() {
            diagnostics.push(Diagnostic::new(k, "negative silhouette with fractional v"));
        } else {
            path.push((k, s));
        }
    }
    diagnostics.sort_by_key(|d| d.k);
    if path.is_empty() {
        return Err(Error::Numerical("slope statistic undefined for every k".into()));
    }
    Ok(SlopeResult {
        selection: select_k_max(&path, "slope")?,
        silhouettes,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{generate, ScenarioSpec};
    use rand::Rng;

    /// Silhouette straight from the definition, no shared sums.
    fn oracle(data: &DataMatrix, labels: &[usize], k: usize) -> f64 {
        let n = data.n();
        let d = |i: usize, j: usize| squared_distance(data.row(i), data.row(j)).sqrt();
        let mut total = 0.0;
        for i in 0..n {
            let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
            if own.is_empty() {
                continue;
            }
            let a = own.iter().map(|&j| d(i, j)).sum::<f64>() / own.len() as f64;
            let mut b = f64::INFINITY;
            for c in (0..k).filter(|&c| c != labels[i]) {
                let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
                b = b.min(members.iter().map(|&j| d(i, j)).sum::<f64>() / members.len() as f64);
            }
            total += (b - a) / a.max(b);
        }
        total / n as f64
    }

    #[test]
    fn matches_definition() {
        let s = generate(&ScenarioSpec::circular(3, 0.4), SeedSpec::new(1)).unwrap();
        let mut rng = SeedSpec::new(2).stream();
        for k in 2..5 {
            let mut labels: Vec<usize> = (0..s.data.n()).map(|_| rng.random_range(0..k)).collect();
            labels[..k].copy_from_slice(&(0..k).collect::<Vec<_>>());
            let a = ClusterAssignment::full(labels.clone(), k).unwrap();
            let got = silhouette_width(&s.data, &a).unwrap();
            assert!((got - oracle(&s.data, &labels, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn separated_blobs_score_near_one() {
        let mut spec = ScenarioSpec::circular(2, 0.01);
        spec.radius = 1.0;
        let s = generate(&spec, SeedSpec::new(3)).unwrap();
        let a = ClusterAssignment::full(s.labels.clone(), 2).unwrap();
        assert!(silhouette_width(&s.data, &a).unwrap() > 0.9);
    }

    #[test]
    fn random_labels_score_near_zero() {
        let mut rng = SeedSpec::new(4).stream();
        let rows: Vec<[f64; 2]> = (0..200).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let d = DataMatrix::from_rows(&rows).unwrap();
        let labels: Vec<usize> = (0..200).map(|i| i % 2).collect();
        let si = silhouette_width(&d, &ClusterAssignment::full(labels, 2).unwrap()).unwrap();
        assert!(si.abs() < 0.05, "{si}");
    }

    #[test]
    fn singleton_contributes_zero() {
        let d = DataMatrix::from_rows(&[[0.0], [0.1], [10.0]]).unwrap();
        let a = ClusterAssignment::full(vec![0, 0, 1], 2).unwrap();
        // a = 0.1, b = 10 and 9.9 for the pair; the singleton adds 0
        let want = ((10.0 - 0.1) / 10.0 + (9.9 - 0.1) / 9.9) / 3.0;
        assert!((silhouette_width(&d, &a).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_one_cluster_and_empty_clusters() {
        let d = DataMatrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        assert!(silhouette_width(&d, &ClusterAssignment::full(vec![0; 3], 1).unwrap()).is_err());
        let empty = ClusterAssignment::full(vec![0, 0, 2], 3).unwrap();
        assert!(matches!(silhouette_width(&d, &empty), Err(Error::EmptyCluster)));
    }

    #[test]
    fn slope_forms() {
        let si = [(2, 0.5), (3, 0.8), (4, 0.6)];
        let back = slope_scores(&si, 1.0, SlopeForm::Backward);
        assert_eq!(back.len(), 2);
        assert!((back[0].1 - 0.3 * 0.8).abs() < 1e-15);
        assert!((back[1].1 + 0.2 * 0.6).abs() < 1e-15);
        let fwd = slope_scores(&si, 2.0, SlopeForm::Forward);
        assert!((fwd[0].1 + 0.3 * 0.25).abs() < 1e-15);
        assert!((fwd[1].1 - 0.2 * 0.64).abs() < 1e-15);
    }

    #[test]
    fn flat_silhouettes_tie_to_smallest_k() {
        let si: Vec<(usize, f64)> = (2..8).map(|k| (k, 0.4)).collect();
        let scores = slope_scores(&si, 1.0, SlopeForm::Backward);
        assert!(scores.iter().all(|(_, s)| *s == 0.0));
        assert_eq!(select_k_max(&scores, "slope").unwrap().k_hat, 3);
    }

    #[test]
    fn slope_finds_three_circular_clusters() {
        let s = generate(&ScenarioSpec::circular(3, 0.15), SeedSpec::new(6)).unwrap();
        let r = slope_statistic(&s.data, 2, 10, &SlopeConfig::default(), SeedSpec::new(7)).unwrap();
        assert_eq!(r.selection.k_hat, 3);
        assert_eq!(r.silhouettes.first().unwrap().0, 2);
        assert_eq!(r.selection.path.first().unwrap().0, 3);
    }
}
