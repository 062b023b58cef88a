//! Bootstrap instability for a range of cluster counts.
//!
//! Each bootstrap pair is clustered once per `k`; the two fitted models
//! serve both variants. The model-based variant assigns every original
//! object to its nearest centroid under each model and compares the two
//! full labelings. The model-free variant compares the two clusterings only
//! on objects drawn into both samples; a sample object's nearest-centroid
//! label is its final Lloyd label, so the same models supply it.

use serde::{Deserialize, Serialize};

use super::bootstrap::PairDraws;
use super::normalization::{chance_distance, normalize_distance};
use super::select::{select_k, SelectionResult};
use crate::assignment::{disagreeing_pairs, ClusterAssignment, ClusterSizes, ContingencyScratch};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kmeans::{fit_points, KMeansConfig, KMeansModel};
use crate::par;
use crate::seed::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ModelBased,
    ModelFree,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ModelBased => "model-based",
            Mode::ModelFree => "model-free",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstabilityConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub bootstrap_pairs: usize,
    pub mode: Mode,
    pub normalize: bool,
    pub kmeans: KMeansConfig,
    pub seed: SeedSpec,
}

impl Default for InstabilityConfig {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: 50,
            bootstrap_pairs: 100,
            mode: Mode::ModelBased,
            normalize: true,
            kmeans: KMeansConfig::default(),
            seed: SeedSpec::default(),
        }
    }
}

impl InstabilityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 2 {
            return Err(Error::Config("k range must start at 2 or above".into()));
        }
        if self.k_max < self.k_min {
            return Err(Error::Config(format!("empty k range {}..={}", self.k_min, self.k_max)));
        }
        if self.bootstrap_pairs == 0 {
            return Err(Error::Config("need at least one bootstrap pair".into()));
        }
        self.kmeans.validate()
    }

    pub fn ks(&self) -> std::ops::RangeInclusive<usize> {
        self.k_min..=self.k_max
    }
}

// Stream tags below the configured seed.
const TAG_DRAW: u64 = 1;
const TAG_FIT: u64 = 2;

/// Raw, chance and normalized distance of one clustering pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub raw: f64,
    pub chance: f64,
    pub normalized: f64,
}

/// Result of both variants for one bootstrap pair at one `k`.
#[derive(Debug, Clone)]
struct PairOutcome {
    model_based: Option<PairScore>,
    /// `None` when fewer than two objects were drawn into both samples.
    model_free: Option<PairScore>,
    models: Option<(KMeansModel, KMeansModel)>,
    intersection: Vec<usize>,
}

fn score(raw_pairs: u64, m: usize, sizes_a: &ClusterSizes, sizes_b: &ClusterSizes) -> Result<PairScore> {
    let total = (m * (m - 1) / 2) as f64;
    let raw = raw_pairs as f64 / total;
    let chance = chance_distance(&sizes_a.nonempty(), &sizes_b.nonempty())?;
    Ok(PairScore {
        raw,
        chance,
        normalized: normalize_distance(raw, chance),
    })
}

fn sizes_of<I: Iterator<Item = usize>>(labels: I, k: usize) -> ClusterSizes {
    let mut s = vec![0; k];
    labels.for_each(|l| s[l] += 1);
    ClusterSizes::new(s)
}

struct Engine<'a> {
    data: &'a DataMatrix,
    cfg: &'a InstabilityConfig,
    draws: Vec<PairDraws>,
    keep_models: bool,
    want_based: bool,
    want_free: bool,
}

impl<'a> Engine<'a> {
    fn new(data: &'a DataMatrix, cfg: &'a InstabilityConfig, modes: &[Mode], keep_models: bool) -> Result<Self> {
        cfg.validate()?;
        let classes = data.value_classes();
        let distinct = classes.iter().enumerate().filter(|(i, &c)| *i == c).count();
        if cfg.k_max > distinct {
            return Err(Error::TooManyClusters { k: cfg.k_max, distinct });
        }
        let draw_seed = cfg.seed.derive(&[TAG_DRAW]);
        let draws = par::map_indexed(cfg.bootstrap_pairs, |b| {
            PairDraws::draw(data, &classes, draw_seed, b, cfg.k_max)
        });
        Ok(Self {
            data,
            cfg,
            draws,
            keep_models,
            want_based: modes.contains(&Mode::ModelBased),
            want_free: modes.contains(&Mode::ModelFree),
        })
    }

    fn run_pair(&self, b: usize, k: usize) -> Result<PairOutcome> {
        let pair = self.draws[b].for_k(k)?;
        let fit_seed = self.cfg.seed.derive(&[TAG_FIT, b as u64, k as u64]);
        let model_a = fit_points(&pair.a, k, &self.cfg.kmeans, fit_seed.derive(&[0]))?;
        let model_b = fit_points(&pair.b, k, &self.cfg.kmeans, fit_seed.derive(&[1]))?;
        let la = model_a.assign_labels(self.data);
        let lb = model_b.assign_labels(self.data);
        let mut scratch = ContingencyScratch::default();

        let model_based = if self.want_based {
            let d = disagreeing_pairs(la.iter().copied().zip(lb.iter().copied()), k, k, &mut scratch);
            Some(score(
                d,
                self.data.n(),
                &sizes_of(la.iter().copied(), k),
                &sizes_of(lb.iter().copied(), k),
            )?)
        } else {
            None
        };

        let ids = &pair.intersection;
        let model_free = if self.want_free && ids.len() >= 2 {
            let d = disagreeing_pairs(ids.iter().map(|&i| (la[i], lb[i])), k, k, &mut scratch);
            Some(score(
                d,
                ids.len(),
                &sizes_of(ids.iter().map(|&i| la[i]), k),
                &sizes_of(ids.iter().map(|&i| lb[i]), k),
            )?)
        } else {
            None
        };

        Ok(PairOutcome {
            model_based,
            model_free,
            models: self.keep_models.then_some((model_a, model_b)),
            intersection: if self.keep_models { ids.clone() } else { Vec::new() },
        })
    }

    /// Outcomes indexed `[k - k_min][b]`.
    fn run(&self) -> Result<Vec<Vec<PairOutcome>>> {
        let ks: Vec<usize> = self.cfg.ks().collect();
        let bp = self.cfg.bootstrap_pairs;
        let flat = par::map_indexed(ks.len() * bp, |i| self.run_pair(i % bp, ks[i / bp]));
        let mut out: Vec<Vec<PairOutcome>> = (0..ks.len()).map(|_| Vec::with_capacity(bp)).collect();
        for (i, r) in flat.into_iter().enumerate() {
            out[i / bp].push(r?);
        }
        Ok(out)
    }
}

/// Per-`k` summary of the bootstrap distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSummary {
    pub k: usize,
    pub raw_values: Vec<f64>,
    pub chance_values: Vec<f64>,
    pub normalized_values: Vec<f64>,
    /// Mean raw instability; NaN when every pair was degenerate.
    pub raw_mean: f64,
    pub raw_sd: f64,
    /// Mean of the per-pair normalized distances, present when normalization
    /// was requested.
    pub normalized_mean: Option<f64>,
    pub degenerate_pairs: usize,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

impl KSummary {
    fn from_scores(k: usize, scores: impl Iterator<Item = Option<PairScore>>, normalize: bool) -> Self {
        let mut raw_values = Vec::new();
        let mut chance_values = Vec::new();
        let mut normalized_values = Vec::new();
        let mut degenerate_pairs = 0;
        for s in scores {
            match s {
                Some(s) => {
                    raw_values.push(s.raw);
                    chance_values.push(s.chance);
                    normalized_values.push(s.normalized);
                }
                None => degenerate_pairs += 1,
            }
        }
        let raw_mean = mean(&raw_values);
        let normalized_mean = normalize.then(|| mean(&normalized_values));
        KSummary {
            k,
            raw_sd: sample_sd(&raw_values),
            raw_mean,
            normalized_mean,
            raw_values,
            chance_values,
            normalized_values,
            degenerate_pairs,
        }
    }
}

/// Average instability as a function of `k` for one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstabilityPath {
    pub mode: Mode,
    pub normalized: bool,
    pub per_k: Vec<KSummary>,
}

impl InstabilityPath {
    pub fn raw_scores(&self) -> Vec<(usize, f64)> {
        self.per_k.iter().map(|s| (s.k, s.raw_mean)).collect()
    }

    /// `None` unless the path was computed with normalization.
    pub fn normalized_scores(&self) -> Option<Vec<(usize, f64)>> {
        self.per_k.iter().map(|s| s.normalized_mean.map(|v| (s.k, v))).collect()
    }

    pub fn get(&self, k: usize) -> Option<&KSummary> {
        self.per_k.iter().find(|s| s.k == k)
    }

    /// Selects `k` minimizing the raw (or normalized) path.
    pub fn select(&self, normalized: bool) -> Result<SelectionResult> {
        let method = method_name(self.mode, normalized);
        if normalized {
            let scores = self
                .normalized_scores()
                .ok_or_else(|| Error::Config("path was computed without normalization".into()))?;
            select_k(&scores, &method)
        } else {
            select_k(&self.raw_scores(), &method)
        }
    }
}

pub fn method_name(mode: Mode, normalized: bool) -> String {
    if normalized {
        format!("{}-normalized", mode.name())
    } else {
        mode.name().to_string()
    }
}

/// Both variants computed from the same bootstrap draws and fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPaths {
    pub model_based: InstabilityPath,
    pub model_free: InstabilityPath,
}

impl JointPaths {
    pub fn path(&self, mode: Mode) -> &InstabilityPath {
        match mode {
            Mode::ModelBased => &self.model_based,
            Mode::ModelFree => &self.model_free,
        }
    }

    /// Pearson correlation between the two raw paths over `k`.
    pub fn raw_correlation(&self) -> f64 {
        let a: Vec<f64> = self.model_based.per_k.iter().map(|s| s.raw_mean).collect();
        let b: Vec<f64> = self.model_free.per_k.iter().map(|s| s.raw_mean).collect();
        pearson(&a, &b)
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn summarize(outcomes: &[Vec<PairOutcome>], cfg: &InstabilityConfig, mode: Mode) -> InstabilityPath {
    let per_k = cfg
        .ks()
        .zip(outcomes)
        .map(|(k, row)| {
            let scores = row.iter().map(|o| match mode {
                Mode::ModelBased => o.model_based,
                Mode::ModelFree => o.model_free,
            });
            KSummary::from_scores(k, scores, cfg.normalize)
        })
        .collect();
    InstabilityPath {
        mode,
        normalized: cfg.normalize,
        per_k,
    }
}

/// Instability path of the configured variant.
pub fn instability_path(data: &DataMatrix, cfg: &InstabilityConfig) -> Result<InstabilityPath> {
    let outcomes = Engine::new(data, cfg, &[cfg.mode], false)?.run()?;
    Ok(summarize(&outcomes, cfg, cfg.mode))
}

/// Both variants from one set of bootstrap draws and k-means fits.
/// `cfg.mode` is ignored.
pub fn joint_instability_paths(data: &DataMatrix, cfg: &InstabilityConfig) -> Result<JointPaths> {
    let outcomes = Engine::new(data, cfg, &[Mode::ModelBased, Mode::ModelFree], false)?.run()?;
    Ok(JointPaths {
        model_based: summarize(&outcomes, cfg, Mode::ModelBased),
        model_free: summarize(&outcomes, cfg, Mode::ModelFree),
    })
}

/// Per-pair detail for a single `k`.
#[derive(Debug, Clone)]
pub struct PairDetail {
    /// `None` for a degenerate (skipped) pair.
    pub score: Option<PairScore>,
    /// The two clusterings, restricted to the objects they were compared on.
    pub assignments: (ClusterAssignment, ClusterAssignment),
}

#[derive(Debug, Clone)]
pub struct KInstability {
    pub k: usize,
    pub mode: Mode,
    pub pairs: Vec<PairDetail>,
    pub summary: KSummary,
}

fn single_k(data: &DataMatrix, k: usize, cfg: &InstabilityConfig, mode: Mode) -> Result<KInstability> {
    let cfg = InstabilityConfig {
        k_min: k,
        k_max: k,
        mode,
        ..cfg.clone()
    };
    let outcomes = Engine::new(data, &cfg, &[mode], true)?.run()?.pop().unwrap_or_default();
    let mut pairs = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let (ma, mb) = o.models.as_ref().expect("models kept");
        let (fa, fb) = (ma.assign(data)?, mb.assign(data)?);
        let (score, assignments) = match mode {
            Mode::ModelBased => (o.model_based, (fa, fb)),
            Mode::ModelFree => {
                let ids = &o.intersection;
                (o.model_free, (fa.restrict(ids)?, fb.restrict(ids)?))
            }
        };
        pairs.push(PairDetail { score, assignments });
    }
    let summary = KSummary::from_scores(k, pairs.iter().map(|p| p.score), cfg.normalize);
    Ok(KInstability {
        k,
        mode,
        pairs,
        summary,
    })
}

/// Model-based instability at one `k`: per-pair distances over all original
/// objects and the full-data assignments of both fits.
pub fn model_based_instability(data: &DataMatrix, k: usize, cfg: &InstabilityConfig) -> Result<KInstability> {
    single_k(data, k, cfg, Mode::ModelBased)
}

/// Model-free instability at one `k`: per-pair distances over the objects
/// drawn into both samples, with the clusterings restricted to them.
pub fn model_free_instability(data: &DataMatrix, k: usize, cfg: &InstabilityConfig) -> Result<KInstability> {
    single_k(data, k, cfg, Mode::ModelFree)
}

/// Running means of the raw instability at a fixed `k` as bootstrap pairs
/// accumulate, for both variants on the same draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub k: usize,
    pub model_based: Vec<f64>,
    pub model_free: Vec<f64>,
    /// `model_based - model_free` at each `b`.
    pub difference: Vec<f64>,
}

pub fn convergence_trace(
    data: &DataMatrix,
    k: usize,
    b_max: usize,
    cfg: &InstabilityConfig,
) -> Result<ConvergenceTrace> {
    if b_max == 0 {
        return Err(Error::Config("b_max must be at least 1".into()));
    }
    let cfg = InstabilityConfig {
        k_min: k,
        k_max: k,
        bootstrap_pairs: b_max,
        ..cfg.clone()
    };
    let outcomes = Engine::new(data, &cfg, &[Mode::ModelBased, Mode::ModelFree], false)?
        .run()?
        .pop()
        .unwrap_or_default();
    let running = |pick: &dyn Fn(&PairOutcome) -> Option<PairScore>| {
        let mut sum = 0.0;
        let mut count = 0usize;
        outcomes
            .iter()
            .map(|o| {
                if let Some(s) = pick(o) {
                    sum += s.raw;
                    count += 1;
                }
                if count == 0 {
                    f64::NAN
                } else {
                    sum / count as f64
                }
            })
            .collect::<Vec<f64>>()
    };
    let model_based = running(&|o| o.model_based);
    let model_free = running(&|o| o.model_free);
    let difference = model_based.iter().zip(&model_free).map(|(a, b)| a - b).collect();
    Ok(ConvergenceTrace {
        k,
        model_based,
        model_free,
        difference,
    })
}
