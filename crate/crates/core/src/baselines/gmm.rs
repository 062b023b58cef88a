use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use super::{check_range, Diagnostic};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::instability::{select_k, SelectionResult};
use crate::kmeans::{self, KMeansConfig};
use crate::par;
use crate::seed::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Covariance {
    /// One variance per component.
    Spherical,
    /// One variance per component and dimension.
    Diagonal,
    #[default]
    Full,
}

impl Covariance {
    fn params_per_component(self, p: usize) -> usize {
        match self {
            Covariance::Spherical => 1,
            Covariance::Diagonal => p,
            Covariance::Full => p * (p + 1) / 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmmConfig {
    pub covariance: Covariance,
    pub max_em_iterations: usize,
    /// EM stops once the relative log-likelihood change falls below this.
    pub em_tolerance: f64,
    pub restarts: usize,
    /// Ridge added to each covariance's scatter matrix before dividing by
    /// the component weight.
    pub regularization: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            covariance: Covariance::Full,
            max_em_iterations: 200,
            em_tolerance: 1e-6,
            restarts: 5,
            regularization: 1e-6,
        }
    }
}

impl GmmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_em_iterations == 0 || self.restarts == 0 {
            return Err(Error::Config("EM iterations and restarts must be at least 1".into()));
        }
        if !(self.em_tolerance > 0.0) || !(self.regularization > 0.0) {
            return Err(Error::Config("EM tolerance and regularization must be positive".into()));
        }
        Ok(())
    }
}

/// Number of free parameters of a `k`-component mixture in `p` dimensions.
pub(crate) fn free_parameters(k: usize, p: usize, covariance: Covariance) -> usize {
    k - 1 + k * p + k * covariance.params_per_component(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmFit {
    pub k: usize,
    pub covariance: Covariance,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Per component: `[s2]`, the `p` variances, or the row-major `p x p`
    /// matrix, depending on `covariance`.
    pub covariances: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    /// Log-likelihood after every E step.
    pub log_likelihood_trace: Vec<f64>,
    /// Log-likelihood plus the ridge's log prior after every E step; EM
    /// never decreases it.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmResult {
    pub selection: SelectionResult,
    pub log_likelihoods: Vec<(usize, f64)>,
    pub diagnostics: Vec<Diagnostic>,
}

struct Component {
    weight: f64,
    mean: Vec<f64>,
    cov: Vec<f64>,
    /// Inverse variances, or the lower Cholesky factor (row-major).
    factor: Vec<f64>,
    log_det: f64,
    inverse_trace: f64,
}

impl Component {
    fn new(kind: Covariance, weight: f64, mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        let p = mean.len();
        let (factor, log_det, inverse_trace) = match kind {
            Covariance::Spherical => {
                let s2 = cov[0];
                (vec![1.0 / s2], p as f64 * s2.ln(), p as f64 / s2)
            }
            Covariance::Diagonal => (
                cov.iter().map(|v| 1.0 / v).collect(),
                cov.iter().map(|v| v.ln()).sum(),
                cov.iter().map(|v| 1.0 / v).sum(),
            ),
            Covariance::Full => {
                let chol = Cholesky::new(DMatrix::from_row_slice(p, p, &cov))
                    .ok_or_else(|| Error::Numerical("covariance is not positive definite".into()))?;
                let l = chol.l();
                let factor: Vec<f64> = (0..p)
                    .flat_map(|i| (0..p).map(move |j| (i, j)))
                    .map(|(i, j)| l[(i, j)])
                    .collect();
                let log_det = 2.0 * (0..p).map(|i| l[(i, i)].ln()).sum::<f64>();
                (factor, log_det, chol.inverse().trace())
            }
        };
        if !log_det.is_finite() {
            return Err(Error::Numerical("covariance determinant is not finite".into()));
        }
        Ok(Self {
            weight,
            mean,
            cov,
            factor,
            log_det,
            inverse_trace,
        })
    }

    fn mahalanobis(&self, kind: Covariance, x: &[f64], buf: &mut [f64]) -> f64 {
        let p = x.len();
        match kind {
            Covariance::Spherical => {
                x.iter().zip(&self.mean).map(|(a, m)| (a - m) * (a - m)).sum::<f64>() * self.factor[0]
            }
            Covariance::Diagonal => x
                .iter()
                .zip(&self.mean)
                .zip(&self.factor)
                .map(|((a, m), w)| (a - m) * (a - m) * w)
                .sum(),
            Covariance::Full => {
                // forward substitution L y = x - mean
                let mut total = 0.0;
                for i in 0..p {
                    let row = &self.factor[i * p..i * p + i];
                    let s: f64 = row.iter().zip(&buf[..i]).map(|(l, y)| l * y).sum();
                    buf[i] = (x[i] - self.mean[i] - s) / self.factor[i * p + i];
                    total += buf[i] * buf[i];
                }
                total
            }
        }
    }
}

struct Em<'a> {
    data: &'a DataMatrix,
    k: usize,
    cfg: &'a GmmConfig,
}

impl Em<'_> {
    /// Maximizes the expected complete-data log-likelihood plus the ridge
    /// log prior `-reg/2 tr(S^-1)` for the responsibilities `resp` (n x k).
    fn m_step(&self, resp: &[f64]) -> Result<Vec<Component>> {
        let (n, p, k) = (self.data.n(), self.data.p(), self.k);
        let reg = self.cfg.regularization;
        let mut comps = Vec::with_capacity(k);
        for j in 0..k {
            let nj: f64 = (0..n).map(|i| resp[i * k + j]).sum();
            if !(nj > 1e-8 * n as f64) {
                return Err(Error::Numerical(format!("component {j} lost all weight")));
            }
            let mut mean = vec![0.0; p];
            for (i, x) in self.data.rows().enumerate() {
                let r = resp[i * k + j];
                mean.iter_mut().zip(x).for_each(|(m, v)| *m += r * v);
            }
            mean.iter_mut().for_each(|m| *m /= nj);
            let mut scatter = vec![0.0; p * p];
            for (i, x) in self.data.rows().enumerate() {
                let r = resp[i * k + j];
                for a in 0..p {
                    let da = x[a] - mean[a];
                    for b in 0..=a {
                        scatter[a * p + b] += r * da * (x[b] - mean[b]);
                    }
                }
            }
            let cov = match self.cfg.covariance {
                Covariance::Spherical => {
                    let tr: f64 = (0..p).map(|a| scatter[a * p + a]).sum();
                    vec![(tr + reg * p as f64) / (nj * p as f64)]
                }
                Covariance::Diagonal => (0..p).map(|a| (scatter[a * p + a] + reg) / nj).collect(),
                Covariance::Full => {
                    let mut c = vec![0.0; p * p];
                    for a in 0..p {
                        for b in 0..=a {
                            let v = (scatter[a * p + b] + if a == b { reg } else { 0.0 }) / nj;
                            c[a * p + b] = v;
                            c[b * p + a] = v;
                        }
                    }
                    c
                }
            };
            comps.push(Component::new(self.cfg.covariance, nj / n as f64, mean, cov)?);
        }
        Ok(comps)
    }

    /// Fills `resp` and returns the log-likelihood and the penalized
    /// objective of `comps`.
    fn e_step(&self, comps: &[Component], resp: &mut [f64]) -> (f64, f64) {
        let (p, k) = (self.data.p(), self.k);
        let base: Vec<f64> = comps
            .iter()
            .map(|c| c.weight.ln() - 0.5 * (p as f64 * (2.0 * PI).ln() + c.log_det))
            .collect();
        let mut buf = vec![0.0; p];
        let mut ll = 0.0;
        for (i, x) in self.data.rows().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            for (j, c) in comps.iter().enumerate() {
                row[j] = base[j] - 0.5 * c.mahalanobis(self.cfg.covariance, x, &mut buf);
            }
            let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = row.iter().map(|l| (l - top).exp()).sum();
            let lse = top + sum.ln();
            row.iter_mut().for_each(|l| *l = (*l - lse).exp());
            ll += lse;
        }
        let penalty: f64 = comps.iter().map(|c| c.inverse_trace).sum::<f64>() * 0.5 * self.cfg.regularization;
        (ll, ll - penalty)
    }

    fn run(&self, init_labels: &[usize]) -> Result<GmmFit> {
        let k = self.k;
        let mut resp = vec![0.0; self.data.n() * k];
        for (i, &l) in init_labels.iter().enumerate() {
            resp[i * k + l] = 1.0;
        }
        let mut comps = self.m_step(&resp)?;
        let mut ll_trace = Vec::new();
        let mut obj_trace: Vec<f64> = Vec::new();
        let mut converged = false;
        loop {
            let (ll, obj) = self.e_step(&comps, &mut resp);
            if !ll.is_finite() {
                return Err(Error::Numerical("log-likelihood is not finite".into()));
            }
            if let Some(&prev) = obj_trace.last() {
                debug_assert!(obj >= prev - 1e-9, "EM objective decreased: {prev} -> {obj}");
            }
            let stalled = ll_trace
                .last()
                .is_some_and(|&prev: &f64| (ll - prev).abs() <= self.cfg.em_tolerance * ll.abs());
            ll_trace.push(ll);
            obj_trace.push(obj);
            if stalled {
                converged = true;
                break;
            }
            if ll_trace.len() >= self.cfg.max_em_iterations {
                break;
            }
            comps = self.m_step(&resp)?;
        }
        Ok(GmmFit {
            k,
            covariance: self.cfg.covariance,
            weights: comps.iter().map(|c| c.weight).collect(),
            means: comps.iter().map(|c| c.mean.clone()).collect(),
            covariances: comps.into_iter().map(|c| c.cov).collect(),
            log_likelihood: *ll_trace.last().expect("at least one E step"),
            iterations: ll_trace.len(),
            log_likelihood_trace: ll_trace,
            objective_trace: obj_trace,
            converged,
        })
    }
}

/// EM fit of a `k`-component mixture, best log-likelihood over restarts.
/// Restart `r` starts from the partition of a single k-means run seeded with
/// `seed.derive(&[r])`.
pub fn fit_gmm(data: &DataMatrix, k: usize, config: &GmmConfig, seed: SeedSpec) -> Result<GmmFit> {
    config.validate()?;
    let em = Em { data, k, cfg: config };
    let init_cfg = KMeansConfig {
        restarts: 1,
        ..KMeansConfig::default()
    };
    let mut best: Option<GmmFit> = None;
    let mut last_err = None;
    for r in 0..config.restarts {
        let attempt =
            kmeans::fit(data, k, &init_cfg, seed.derive(&[r as u64])).and_then(|m| em.run(m.assign(data)?.labels()));
        match attempt {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.log_likelihood > b.log_likelihood) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("restarts >= 1"))
}

/// Mixture size minimizing `BIC = -2 logL + params ln n`. A `k` with at
/// least as many free parameters as objects, or whose fits all fail, is
/// skipped with a diagnostic.
pub fn gmm_bic(data: &DataMatrix, k_min: usize, k_max: usize, config: &GmmConfig, seed: SeedSpec) -> Result<GmmResult> {
    check_range(k_min, k_max)?;
    config.validate()?;
    let (n, p) = (data.n(), data.p());
    let ks: Vec<usize> = (k_min..=k_max).collect();
    let fits = par::map_indexed(ks.len(), |i| {
        let k = ks[i];
        let params = free_parameters(k, p, config.covariance);
        if n <= params {
            return Err(format!("{params} free parameters for {n} objects"));
        }
        fit_gmm(data, k, config, seed.derive(&[k as u64]))
            .map(|f| (f.log_likelihood, params))
            .map_err(|e| e.to_string())
    });
    let mut path = Vec::new();
    let mut log_likelihoods = Vec::new();
    let mut diagnostics = Vec::new();
    for (&k, fit) in ks.iter().zip(fits) {
        match fit {
            Ok((ll, params)) => {
                path.push((k, -2.0 * ll + params as f64 * (n as f64).ln()));
                log_likelihoods.push((k, ll));
            }
            Err(message) => diagnostics.push(Diagnostic { k, message }),
        }
    }
    if path.is_empty() {
        return Err(Error::Numerical("no mixture size could be fitted".into()));
    }
    Ok(GmmResult {
        selection: select_k(&path, "gmm-bic")?,
        log_likelihoods,
        diagnostics,
    })
}
