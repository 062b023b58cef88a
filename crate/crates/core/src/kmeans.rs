//! Lloyd's k-means with random restarts.
//!
//! Fitting works on a weighted point set so that bootstrap samples (which
//! repeat rows) are clustered over their distinct rows with multiplicities;
//! this gives the same centroids and assignments as clustering the expanded
//! sample.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::ClusterAssignment;
use crate::data::{squared_distance, DataMatrix};
use crate::error::{Error, Result};
use crate::seed::{SeedSpec, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// `k` distinct data rows chosen uniformly.
    #[default]
    RandomPoints,
    KMeansPlusPlus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Lloyd stops once the relative inertia decrease falls below this.
    pub tolerance: f64,
    pub init: Init,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iterations: 100,
            tolerance: 1e-8,
            init: Init::RandomPoints,
        }
    }
}

impl KMeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("k-means restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("k-means max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("k-means tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Fitted centroids. Assigning a point picks the nearest centroid in squared
/// Euclidean distance, ties going to the lowest centroid index.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    centroids: Vec<f64>,
    k: usize,
    p: usize,
    inertia: f64,
    converged: bool,
    iterations_used: usize,
}

impl KMeansModel {
    /// Model from explicit centroids; inertia is left at zero.
    pub fn from_centroids<R: AsRef<[f64]>>(centroids: &[R]) -> Result<Self> {
        let k = centroids.len();
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one centroid".into()));
        }
        let p = centroids[0].as_ref().len();
        let mut flat = Vec::with_capacity(k * p);
        for c in centroids {
            let c = c.as_ref();
            if c.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("centroids must be finite".into()));
            }
            flat.extend_from_slice(c);
        }
        Ok(Self {
            centroids: flat,
            k,
            p,
            inertia: 0.0,
            converged: true,
            iterations_used: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.centroids[j * self.p..(j + 1) * self.p]
    }

    pub fn centroids(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.centroids.chunks_exact(self.p)
    }

    /// Total within-cluster sum of squared distances on the training points.
    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations_used(&self) -> usize {
        self.iterations_used
    }

    #[inline]
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        nearest(&self.centroids, self.p, x)
    }

    pub fn assign(&self, data: &DataMatrix) -> Result<ClusterAssignment> {
        if data.p() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: data.p(),
            });
        }
        ClusterAssignment::full(self.assign_labels(data), self.k)
    }

    pub(crate) fn assign_labels(&self, data: &DataMatrix) -> Vec<usize> {
        data.rows().map(|r| self.nearest(r).0).collect()
    }
}

#[inline]
fn nearest(centroids: &[f64], p: usize, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.chunks_exact(p).enumerate() {
        let d = squared_distance(c, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Rows of a matrix with multiplicities, gathered contiguously.
#[derive(Debug, Clone)]
pub(crate) struct WeightedPoints {
    coords: Vec<f64>,
    weights: Vec<f64>,
    p: usize,
    /// Indices (into this point set) of one point per distinct value.
    representatives: Vec<usize>,
}

impl WeightedPoints {
    pub(crate) fn all(data: &DataMatrix) -> Self {
        let classes = data.value_classes();
        let ids: Vec<usize> = (0..data.n()).collect();
        Self::from_ids(data, &classes, &ids, &vec![1; data.n()])
    }

    /// `ids` distinct rows, `counts` their multiplicities, `classes` from
    /// [`DataMatrix::value_classes`].
    pub(crate) fn from_ids(data: &DataMatrix, classes: &[usize], ids: &[usize], counts: &[usize]) -> Self {
        let p = data.p();
        let mut coords = Vec::with_capacity(ids.len() * p);
        for &i in ids {
            coords.extend_from_slice(data.row(i));
        }
        let mut seen: Vec<(usize, usize)> = ids.iter().enumerate().map(|(pos, &i)| (classes[i], pos)).collect();
        seen.sort_unstable();
        seen.dedup_by_key(|(c, _)| *c);
        let mut representatives: Vec<usize> = seen.into_iter().map(|(_, pos)| pos).collect();
        representatives.sort_unstable();
        Self {
            coords,
            weights: counts.iter().map(|&c| c as f64).collect(),
            p,
            representatives,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn distinct(&self) -> usize {
        self.representatives.len()
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.p..(i + 1) * self.p]
    }
}

/// Outcome of a single Lloyd run from one initialization.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub model: KMeansModel,
    /// Labels of the training rows under the final centroids.
    pub labels: Vec<usize>,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<f64>,
}

fn initial_centroids(pts: &WeightedPoints, k: usize, init: Init, rng: &mut Stream) -> Vec<f64> {
    let p = pts.p;
    let mut c = Vec::with_capacity(k * p);
    match init {
        Init::RandomPoints => {
            for r in index::sample(rng, pts.distinct(), k).iter() {
                c.extend_from_slice(pts.point(pts.representatives[r]));
            }
        }
        Init::KMeansPlusPlus => {
            let first = WeightedIndex::new(&pts.weights).map(|w| w.sample(rng)).unwrap_or(0);
            c.extend_from_slice(pts.point(first));
            let mut d2: Vec<f64> = (0..pts.len())
                .map(|i| squared_distance(pts.point(i), pts.point(first)))
                .collect();
            while c.len() < k * p {
                let w: Vec<f64> = d2.iter().zip(&pts.weights).map(|(d, w)| d * w).collect();
                let next = match WeightedIndex::new(&w) {
                    Ok(dist) => dist.sample(rng),
                    // every point already coincides with a centroid
                    Err(_) => pts.representatives[rng.random_range(0..pts.distinct())],
                };
                let start = c.len();
                c.extend_from_slice(pts.point(next));
                for (i, d) in d2.iter_mut().enumerate() {
                    *d = d.min(squared_distance(pts.point(i), &c[start..]));
                }
            }
        }
    }
    c
}

fn lloyd(pts: &WeightedPoints, k: usize, cfg: &KMeansConfig, rng: &mut Stream) -> LloydRun {
    let p = pts.p;
    let m = pts.len();
    let mut centroids = initial_centroids(pts, k, cfg.init, rng);
    let mut labels = vec![usize::MAX; m];
    let mut dist = vec![0.0; m];
    let mut counts = vec![0.0; k];
    let mut sums = vec![0.0; k * p];
    let mut trace = Vec::new();
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    loop {
        iterations += 1;
        let mut inertia = 0.0;
        let mut changed = false;
        counts.iter_mut().for_each(|c| *c = 0.0);
        for i in 0..m {
            let (j, d) = nearest(&centroids, p, pts.point(i));
            if labels[i] != j {
                changed = true;
                labels[i] = j;
            }
            dist[i] = d;
            inertia += pts.weights[i] * d;
            counts[j] += pts.weights[i];
        }
        trace.push(inertia);
        debug_assert!(
            inertia <= prev + 1e-9 * prev.abs() + 1e-12,
            "Lloyd step increased inertia: {prev} -> {inertia}"
        );
        let has_empty = counts.contains(&0.0);
        let stalled = prev.is_finite() && prev - inertia <= cfg.tolerance * prev;
        if !has_empty && (!changed || stalled) {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iterations {
            break;
        }

        sums.iter_mut().for_each(|s| *s = 0.0);
        for i in 0..m {
            let w = pts.weights[i];
            let s = &mut sums[labels[i] * p..(labels[i] + 1) * p];
            for (acc, &x) in s.iter_mut().zip(pts.point(i)) {
                *acc += w * x;
            }
        }
        for j in 0..k {
            if counts[j] > 0.0 {
                for d in 0..p {
                    centroids[j * p + d] = sums[j * p + d] / counts[j];
                }
            }
        }
        if has_empty {
            // Re-seed each empty centroid at the point farthest from its own
            // (updated) centroid.
            for i in 0..m {
                let l = labels[i];
                dist[i] = squared_distance(pts.point(i), &centroids[l * p..(l + 1) * p]);
            }
            for j in 0..k {
                if counts[j] > 0.0 {
                    continue;
                }
                let far = (0..m)
                    .fold((0, f64::NEG_INFINITY), |best, i| {
                        if dist[i] > best.1 {
                            (i, dist[i])
                        } else {
                            best
                        }
                    })
                    .0;
                centroids[j * p..(j + 1) * p].copy_from_slice(pts.point(far));
                dist[far] = f64::NEG_INFINITY;
            }
        }
        prev = inertia;
    }

    let inertia = *trace.last().unwrap_or(&0.0);
    LloydRun {
        model: KMeansModel {
            centroids,
            k,
            p,
            inertia,
            converged,
            iterations_used: iterations,
        },
        labels,
        inertia_trace: trace,
    }
}

fn check_k(k: usize, distinct: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > distinct {
        return Err(Error::TooManyClusters { k, distinct });
    }
    Ok(())
}

/// Best-of-restarts fit on a weighted point set; restart `r` draws from
/// `seed.derive(&[r])`.
pub(crate) fn fit_points(pts: &WeightedPoints, k: usize, cfg: &KMeansConfig, seed: SeedSpec) -> Result<KMeansModel> {
    check_k(k, pts.distinct())?;
    let mut best: Option<KMeansModel> = None;
    for r in 0..cfg.restarts {
        let run = lloyd(pts, k, cfg, &mut seed.derive(&[r as u64]).stream());
        if best.as_ref().is_none_or(|b| run.model.inertia < b.inertia) {
            best = Some(run.model);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Fits k-means, keeping the restart with the smallest inertia.
pub fn fit(data: &DataMatrix, k: usize, cfg: &KMeansConfig, seed: SeedSpec) -> Result<KMeansModel> {
    cfg.validate()?;
    fit_points(&WeightedPoints::all(data), k, cfg, seed)
}

/// A single Lloyd run: restart number `restart` of [`fit`] with the same
/// seed, with its full inertia trace.
pub fn lloyd_run(data: &DataMatrix, k: usize, cfg: &KMeansConfig, seed: SeedSpec, restart: usize) -> Result<LloydRun> {
    cfg.validate()?;
    let pts = WeightedPoints::all(data);
    check_k(k, pts.distinct())?;
    Ok(lloyd(&pts, k, cfg, &mut seed.derive(&[restart as u64]).stream()))
}

/// Pooled within-cluster dissimilarity
/// `W = sum_r 1/(2 n_r) sum_{i,j in r} |x_i - x_j|^2`,
/// evaluated through the equivalent sum of squared deviations from each
/// cluster mean.
pub fn within_dispersion(data: &DataMatrix, assignment: &ClusterAssignment) -> Result<f64> {
    if assignment.is_empty() {
        return Err(Error::InvalidArgument("assignment covers no objects".into()));
    }
    if assignment.len() != data.n() || assignment.covered_ids().last() != Some(&(data.n() - 1)) {
        return Err(Error::CoverageMismatch);
    }
    let (k, p) = (assignment.k(), data.p());
    let mut counts = vec![0usize; k];
    let mut means = vec![0.0; k * p];
    for (r, &l) in data.rows().zip(assignment.labels()) {
        counts[l] += 1;
        for (m, v) in means[l * p..(l + 1) * p].iter_mut().zip(r) {
            *m += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            means[j * p..(j + 1) * p]
                .iter_mut()
                .for_each(|m| *m /= counts[j] as f64);
        }
    }
    Ok(data
        .rows()
        .zip(assignment.labels())
        .map(|(r, &l)| squared_distance(r, &means[l * p..(l + 1) * p]))
        .sum())
}
