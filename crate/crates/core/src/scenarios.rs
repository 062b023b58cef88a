//! Synthetic benchmark data: Gaussian clusters on a circle and elongated
//! clusters along the diagonal of a cube, optionally padded with noise
//! dimensions.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{save_csv, DataMatrix};
use crate::error::{Error, Result};
use crate::seed::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Circular,
    Elongated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub k_star: usize,
    pub per_cluster_n: usize,
    /// Within-cluster standard deviation.
    pub sigma: f64,
    /// Circle radius (circular kind).
    #[serde(default = "one")]
    pub radius: f64,
    /// Per-coordinate offset between consecutive copies (elongated kind).
    #[serde(default = "fifteen")]
    pub separation: f64,
    #[serde(default)]
    pub noise_dims: usize,
    /// Standard deviation of the noise dimensions; defaults to `sigma`.
    #[serde(default)]
    pub noise_sigma: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn fifteen() -> f64 {
    15.0
}

/// Half-width of the cube whose main diagonal carries an elongated cluster.
pub const CUBE_HALF_WIDTH: f64 = 5.0;

impl ScenarioSpec {
    pub fn circular(k_star: usize, sigma: f64) -> Self {
        Self {
            kind: ScenarioKind::Circular,
            k_star,
            per_cluster_n: 50,
            sigma,
            radius: 1.0,
            separation: 15.0,
            noise_dims: 0,
            noise_sigma: None,
        }
    }

    pub fn elongated(k_star: usize) -> Self {
        Self {
            kind: ScenarioKind::Elongated,
            k_star,
            per_cluster_n: 50,
            sigma: 0.1,
            radius: 1.0,
            separation: 15.0,
            noise_dims: 0,
            noise_sigma: None,
        }
    }

    pub fn with_noise_dims(mut self, dims: usize) -> Self {
        self.noise_dims = dims;
        self
    }

    /// Named benchmark settings:
    ///
    /// | name | data |
    /// |---|---|
    /// | `circular-3` (`s1`) | 3 Gaussians, sd 0.15, unit circle |
    /// | `circular-7` (`s2`) | 7 Gaussians, sd 0.04, unit circle |
    /// | `elongated-3` (`s3`) | 3 elongated clusters in 3-D |
    /// | `elongated-7` (`s4`) | 7 elongated clusters in 3-D |
    /// | `circular-3-noise` (`a1`) | `circular-3` plus 8 noise dimensions |
    /// | `circular-7-noise` (`a2`) | `circular-7` plus 8 noise dimensions |
    /// | `wide-3` | 3 unit-variance Gaussians on a circle of radius [`WIDE_RADIUS`] |
    pub fn preset(name: &str) -> Result<Self> {
        Ok(match name {
            "circular-3" | "s1" => Self::circular(3, 0.15),
            "circular-7" | "s2" => Self::circular(7, 0.04),
            "elongated-3" | "s3" => Self::elongated(3),
            "elongated-7" | "s4" => Self::elongated(7),
            "circular-3-noise" | "a1" => Self::circular(3, 0.15).with_noise_dims(8),
            "circular-7-noise" | "a2" => Self::circular(7, 0.04).with_noise_dims(8),
            "wide-3" => Self {
                radius: WIDE_RADIUS,
                ..Self::circular(3, 1.0)
            },
            other => return Err(Error::Config(format!("unknown scenario {other:?}"))),
        })
    }

    pub fn preset_names() -> &'static [&'static str] {
        &[
            "circular-3",
            "circular-7",
            "elongated-3",
            "elongated-7",
            "circular-3-noise",
            "circular-7-noise",
            "wide-3",
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_star == 0 {
            return Err(Error::Config("k_star must be at least 1".into()));
        }
        if !(self.sigma > 0.0) || self.noise_sigma.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::Config("standard deviations must be positive".into()));
        }
        if self.per_cluster_n == 0 || self.k_star * self.per_cluster_n < 2 {
            return Err(Error::Config("scenario must produce at least two objects".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.k_star * self.per_cluster_n
    }

    pub fn p(&self) -> usize {
        let base = match self.kind {
            ScenarioKind::Circular => 2,
            ScenarioKind::Elongated => 3,
        };
        base + self.noise_dims
    }

    /// Cluster means in the informative dimensions.
    pub fn true_means(&self) -> Vec<Vec<f64>> {
        match self.kind {
            ScenarioKind::Circular => (0..self.k_star)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / self.k_star as f64;
                    vec![self.radius * a.cos(), self.radius * a.sin()]
                })
                .collect(),
            ScenarioKind::Elongated => (0..self.k_star).map(|i| vec![self.copy_offset(i); 3]).collect(),
        }
    }

    fn copy_offset(&self, i: usize) -> f64 {
        (i as f64 - (self.k_star as f64 - 1.0) / 2.0) * self.separation
    }
}

/// Radius of the `wide-3` layout. Unit-variance clusters at this radius
/// overlap enough that the model-based raw instability at `k = 3`
/// averages about 0.038 over data draws.
pub const WIDE_RADIUS: f64 = 1.95;

/// Generated data with the generating cluster of every row. Labels are for
/// diagnostics only.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub data: DataMatrix,
    pub labels: Vec<usize>,
}

impl Scenario {
    /// Writes the data, and the labels (one per line, 1-based) when a label
    /// path is given.
    pub fn save(&self, data_path: impl AsRef<Path>, label_path: Option<&Path>) -> Result<()> {
        save_csv(data_path, &self.data, None)?;
        if let Some(lp) = label_path {
            let text: String = self.labels.iter().map(|l| format!("{}\n", l + 1)).collect();
            std::fs::write(lp, text).map_err(|source| Error::Io {
                path: lp.to_path_buf(),
                source,
            })?;
        }
        Ok(())
    }
}

pub fn generate(spec: &ScenarioSpec, seed: SeedSpec) -> Result<Scenario> {
    match spec.kind {
        ScenarioKind::Circular => generate_circular(spec, seed),
        ScenarioKind::Elongated => generate_elongated(spec, seed),
    }
}

fn gauss(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn finish(spec: &ScenarioSpec, mut rows: Vec<f64>, labels: Vec<usize>, rng: &mut impl Rng) -> Result<Scenario> {
    let base = spec.p() - spec.noise_dims;
    if spec.noise_dims > 0 {
        let sd = spec.noise_sigma.unwrap_or(spec.sigma);
        let mut padded = Vec::with_capacity(labels.len() * spec.p());
        for r in rows.chunks_exact(base) {
            padded.extend_from_slice(r);
            for _ in 0..spec.noise_dims {
                padded.push(sd * gauss(rng));
            }
        }
        rows = padded;
    }
    Ok(Scenario {
        data: DataMatrix::new(labels.len(), spec.p(), rows)?,
        labels,
    })
}

/// Isotropic 2-D Gaussians centred at equal angles (starting at angle 0) on
/// a circle.
pub fn generate_circular(spec: &ScenarioSpec, seed: SeedSpec) -> Result<Scenario> {
    spec.validate()?;
    if spec.kind != ScenarioKind::Circular {
        return Err(Error::Config("expected a circular scenario".into()));
    }
    let mut rng = seed.stream();
    let means = spec.true_means();
    let mut rows = Vec::with_capacity(spec.n() * 2);
    let mut labels = Vec::with_capacity(spec.n());
    for (c, mu) in means.iter().enumerate() {
        for _ in 0..spec.per_cluster_n {
            rows.push(mu[0] + spec.sigma * gauss(&mut rng));
            rows.push(mu[1] + spec.sigma * gauss(&mut rng));
            labels.push(c);
        }
    }
    finish(spec, rows, labels, &mut rng)
}

/// Equally spaced points along the main diagonal of `[-5, 5]^3` with
/// isotropic noise, repeated `k_star` times with consecutive copies shifted
/// by `separation` in every coordinate. Copies are centred on the origin.
pub fn generate_elongated(spec: &ScenarioSpec, seed: SeedSpec) -> Result<Scenario> {
    spec.validate()?;
    if spec.kind != ScenarioKind::Elongated {
        return Err(Error::Config("expected an elongated scenario".into()));
    }
    let mut rng = seed.stream();
    let m = spec.per_cluster_n;
    let mut rows = Vec::with_capacity(spec.n() * 3);
    let mut labels = Vec::with_capacity(spec.n());
    for c in 0..spec.k_star {
        let offset = spec.copy_offset(c);
        for i in 0..m {
            let t = if m == 1 {
                0.0
            } else {
                -CUBE_HALF_WIDTH + 2.0 * CUBE_HALF_WIDTH * i as f64 / (m - 1) as f64
            };
            for _ in 0..3 {
                rows.push(t + offset + spec.sigma * gauss(&mut rng));
            }
            labels.push(c);
        }
    }
    finish(spec, rows, labels, &mut rng)
}
