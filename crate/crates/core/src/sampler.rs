//! Heat-bath dynamics and monotone coupling from the past.
//!
//! Randomness is addressed by (seed, sweep, vertex): the variate used at a
//! vertex during a given sweep is fixed, so extending the CFTP window further
//! into the past never redraws the updates closer to time 0.

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::height::{extremal_functions, BoundaryCondition, HeightFunction, Model};
use crate::oracle::{StatValue, Statistic};
use crate::torus::{TorusSpec, Vertex};

const SWEEP_STREAM: u64 = 0;
const CHILD_STREAM: u64 = 1;
const AUX_STREAM: u64 = 2;

/// Counter-based source: every variate is a pure function of the seed and
/// its address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RandomSource {
    pub seed: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed }
    }

    /// Uniform variates in [0, 1) for sweep `sweep`, one per vertex.
    pub fn sweep_variates(&self, sweep: u64, n: usize, out: &mut Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(SWEEP_STREAM);
        rng.set_word_pos(sweep as u128 * n as u128 * 2);
        out.clear();
        out.extend((0..n).map(|_| to_unit(rng.next_u64())));
    }

    /// Independent source for the i-th sample of a batch.
    pub fn child(&self, i: u64) -> RandomSource {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(CHILD_STREAM);
        rng.set_word_pos(i as u128 * 2);
        RandomSource { seed: rng.next_u64() }
    }

    /// Sequential generator for randomized constructions.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(AUX_STREAM);
        rng
    }
}

pub fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Picks from the allowed values lo, lo+step, ..., hi. Two-element sets take
/// the maximum iff u > 1/2; larger sets use quantile inversion. Both rules
/// are monotone in (lo, hi) for a fixed u.
pub fn monotone_pick(lo: i64, hi: i64, step: i64, u: f64) -> i64 {
    let k = (hi - lo) / step + 1;
    if k == 2 {
        return if u > 0.5 { hi } else { lo };
    }
    let idx = ((u * k as f64) as i64).min(k - 1);
    lo + idx * step
}

/// Precomputed per-vertex data for fast updates.
#[derive(Debug, Clone)]
pub(crate) struct Site {
    torus: TorusSpec,
    windows: Vec<Option<(i64, i64)>>,
    class: Vec<u8>,
    model: Model,
}

impl Site {
    pub(crate) fn new(bc: &BoundaryCondition, model: Model) -> Self {
        let torus = bc.torus().clone();
        let n = torus.vertex_count();
        Site {
            windows: (0..n).map(|v| bc.window(v)).collect(),
            class: (0..n).map(|v| bc.class_of(v)).collect(),
            torus,
            model,
        }
    }

    fn frozen(&self, v: Vertex) -> bool {
        matches!(self.windows[v], Some((a, b)) if a == b)
    }

    fn allowed(&self, values: &[i64], v: Vertex) -> Option<(i64, i64, i64)> {
        let mut max_n = i64::MIN;
        let mut min_n = i64::MAX;
        for &w in self.torus.neighbors(v) {
            max_n = max_n.max(values[w]);
            min_n = min_n.min(values[w]);
        }
        let mut lo = max_n - 1;
        let mut hi = min_n + 1;
        if let Some((a, b)) = self.windows[v] {
            lo = lo.max(a);
            hi = hi.min(b);
        }
        let step = match self.model {
            Model::Hom => {
                let want = self.class[v] as i64;
                if (lo - want).rem_euclid(2) != 0 {
                    lo += 1;
                }
                if (hi - want).rem_euclid(2) != 0 {
                    hi -= 1;
                }
                2
            }
            Model::Lip => 1,
        };
        (lo <= hi).then_some((lo, hi, step))
    }

    fn update(&self, values: &mut [i64], v: Vertex, u: f64) -> Result<()> {
        let (lo, hi, step) = self.allowed(values, v).ok_or(Error::NoAllowedValue(v))?;
        values[v] = monotone_pick(lo, hi, step, u);
        Ok(())
    }

    fn sweep(&self, values: &mut [i64], variates: &[f64]) -> Result<()> {
        for v in 0..values.len() {
            if !self.frozen(v) {
                self.update(values, v, variates[v])?;
            }
        }
        Ok(())
    }
}

/// Resamples f(v) uniformly from the values consistent with its neighbors.
pub fn heat_bath_step(f: &HeightFunction, bc: &BoundaryCondition, v: Vertex, u: f64) -> Result<HeightFunction> {
    let site = Site::new(bc, f.model);
    if site.frozen(v) {
        return Err(Error::Precondition(format!("vertex {v} carries a fixed boundary value")));
    }
    let mut out = f.clone();
    site.update(&mut out.values, v, u)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CftpConfig {
    /// Largest epoch index; epoch e starts 2^e sweeps in the past.
    pub max_epoch: u32,
}

impl Default for CftpConfig {
    fn default() -> Self {
        CftpConfig { max_epoch: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CftpOutcome {
    pub function: HeightFunction,
    /// Number of sweeps in the coalescing epoch.
    pub sweeps: u64,
}

pub fn cftp_sample(bc: &BoundaryCondition, model: Model, rng: RandomSource) -> Result<HeightFunction> {
    cftp_sample_with(bc, model, rng, CftpConfig::default()).map(|o| o.function)
}

/// Systematic-scan monotone CFTP. Sweep k (k >= 1) runs from time -k to
/// -k+1 and always uses the variates of block k-1.
pub fn cftp_sample_with(
    bc: &BoundaryCondition,
    model: Model,
    rng: RandomSource,
    config: CftpConfig,
) -> Result<CftpOutcome> {
    let (fmin, fmax) = extremal_functions(bc, model)?;
    let site = Site::new(bc, model);
    let n = fmin.values.len();
    let mut variates = Vec::with_capacity(n);
    for epoch in 0..=config.max_epoch {
        let span = 1u64 << epoch;
        let mut lower = fmin.values.clone();
        let mut upper = fmax.values.clone();
        for k in (1..=span).rev() {
            rng.sweep_variates(k - 1, n, &mut variates);
            site.sweep(&mut lower, &variates)?;
            site.sweep(&mut upper, &variates)?;
        }
        if lower == upper {
            return Ok(CftpOutcome { function: HeightFunction { values: lower, ..fmin }, sweeps: span });
        }
    }
    Err(Error::CoalescenceBudgetExceeded(config.max_epoch))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Start {
    Min,
    Max,
    Given(HeightFunction),
}

/// State after `sweeps` full systematic sweeps.
pub fn mcmc_sample(
    bc: &BoundaryCondition,
    model: Model,
    rng: RandomSource,
    sweeps: u64,
    start: &Start,
) -> Result<HeightFunction> {
    if sweeps == 0 {
        return Err(Error::Precondition("sweeps must be at least 1".into()));
    }
    let mut f = match start {
        Start::Min => extremal_functions(bc, model)?.0,
        Start::Max => extremal_functions(bc, model)?.1,
        Start::Given(g) => g.clone(),
    };
    let site = Site::new(bc, model);
    let mut variates = Vec::new();
    for s in 0..sweeps {
        rng.sweep_variates(s, f.values.len(), &mut variates);
        site.sweep(&mut f.values, &variates)?;
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Method {
    Cftp,
    Mcmc { sweeps: u64 },
    /// Lipschitz only: CFTP for Hom on G x Z_2, mapped down.
    ViaYadin,
}

pub fn draw(bc: &BoundaryCondition, model: Model, rng: RandomSource, method: &Method) -> Result<HeightFunction> {
    match method {
        Method::Cftp => cftp_sample(bc, model, rng),
        Method::Mcmc { sweeps } => mcmc_sample(bc, model, rng, *sweeps, &Start::Min),
        Method::ViaYadin => {
            if model != Model::Lip {
                return Err(Error::Precondition("the Z_2 lift applies to the Lipschitz model".into()));
            }
            crate::bijections::sample_lip_via_lift(bc, rng)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub count: u64,
    pub frequency: f64,
    /// 99% Clopper-Pearson interval for the cell probability.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalStat {
    pub statistic: String,
    pub samples: u64,
    #[serde(serialize_with = "ser_cells")]
    pub cells: BTreeMap<StatValue, Cell>,
    pub mean: f64,
    /// Half-width of the 99% normal-approximation interval for the mean.
    pub mean_radius: f64,
}

fn ser_cells<S: serde::Serializer>(cells: &BTreeMap<StatValue, Cell>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(cells.len()))?;
    for (k, v) in cells {
        m.serialize_entry(&k.to_string(), v)?;
    }
    m.end()
}

/// 99% Clopper-Pearson interval for k successes out of n.
pub fn clopper_pearson(k: u64, n: u64) -> (f64, f64) {
    let alpha = 0.01;
    let lower = if k == 0 {
        0.0
    } else {
        Beta::new(k as f64, (n - k + 1) as f64).map(|b| b.inverse_cdf(alpha / 2.0)).unwrap_or(0.0)
    };
    let upper = if k == n {
        1.0
    } else {
        Beta::new((k + 1) as f64, (n - k) as f64).map(|b| b.inverse_cdf(1.0 - alpha / 2.0)).unwrap_or(1.0)
    };
    (lower, upper)
}

pub const Z_99: f64 = 2.5758293035489;

pub fn summarize(stat: &Statistic, values: &[StatValue]) -> EmpiricalStat {
    let n = values.len() as u64;
    let mut counts: BTreeMap<StatValue, u64> = BTreeMap::new();
    for v in values {
        *counts.entry(*v).or_default() += 1;
    }
    let cells = counts
        .into_iter()
        .map(|(k, c)| {
            let (lower, upper) = clopper_pearson(c, n);
            (k, Cell { count: c, frequency: c as f64 / n as f64, lower, upper })
        })
        .collect();
    let xs: Vec<f64> = values.iter().map(|v| *v.numer() as f64 / *v.denom() as f64).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    EmpiricalStat {
        statistic: stat.label(),
        samples: n,
        cells,
        mean,
        mean_radius: Z_99 * (var / n as f64).sqrt(),
    }
}

/// Draws `n` independent samples (sample i uses `rng.child(i)`) and
/// summarizes each statistic. Samples run on the rayon pool; results do not
/// depend on the thread count.
pub fn batch_statistics(
    bc: &BoundaryCondition,
    model: Model,
    rng: RandomSource,
    n: u64,
    stats: &[Statistic],
    method: &Method,
) -> Result<Vec<EmpiricalStat>> {
    if n == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let rows: Vec<Vec<StatValue>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let f = draw(bc, model, rng.child(i), method)?;
            stats.iter().map(|s| s.eval(&f, bc)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(stats
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let column: Vec<StatValue> = rows.iter().map(|r| r[j]).collect();
            summarize(s, &column)
        })
        .collect())
}

/// Total-variation distance between an empirical histogram and a law.
pub fn total_variation(empirical: &BTreeMap<StatValue, u64>, exact: &[(StatValue, f64)]) -> f64 {
    let n: u64 = empirical.values().sum();
    let mut keys: Vec<StatValue> = empirical.keys().copied().collect();
    keys.extend(exact.iter().map(|p| p.0));
    keys.sort();
    keys.dedup();
    let mut tv = 0.0;
    for k in keys {
        let p = empirical.get(&k).copied().unwrap_or(0) as f64 / n as f64;
        let q = exact.iter().find(|e| e.0 == k).map(|e| e.1).unwrap_or(0.0);
        tv += (p - q).abs();
    }
    tv / 2.0
}
