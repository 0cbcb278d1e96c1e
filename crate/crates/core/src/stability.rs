//! Numerical stability diagnostics for a fitted model.
//!
//! A simulated series is a homogeneous Markov chain over regressor space:
//! each step adds a deformation drawn from the transition row of the current
//! cluster. The chain is ergodic when, far from the data, the expected drift
//! of the squared norm is negative; with `g(x) = ||x||^2` the one-step drift
//! from state `x` under row `i` has the closed form
//! `E||x + Y||^2 - ||x||^2 = 2 x . E(Y|i) + E(||Y||^2|i)`.
//!
//! The checks here probe that premise numerically and measure how well long
//! simulations stay inside the training range. They are WARN-level
//! diagnostics, not proofs: the geometric cone construction behind the formal
//! argument does not transfer directly to `p` dimensions, so boundary
//! clusters are identified by a documented proxy (string ends plus convex-hull
//! prototypes for `p <= 2`, farthest-from-mean above).

use serde::Serialize;

use crate::dvq::{DvqModel, ForecastEnsemble, Simulator};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::series::TimeSeries;
use crate::som::bmu;

/// Expected deformation and expected squared norm under the (fallback
/// resolved) transition row of `cluster`.
pub fn row_moments(model: &DvqModel, cluster: usize) -> Result<(Vec<f64>, f64)> {
    let row_idx = model.effective_cluster(cluster)?;
    let row = model.transition().row(row_idx);
    let p = model.def_codebook().dim();
    let mut mean = vec![0.0f64; p];
    let mut sq_norm = 0.0f64;
    for (j, &prob) in row.iter().enumerate() {
        if prob == 0.0 {
            continue;
        }
        let proto = model.def_codebook().prototype(j);
        for (m, v) in mean.iter_mut().zip(proto) {
            *m += prob * v;
        }
        sq_norm += prob * proto.iter().map(|v| v * v).sum::<f64>();
    }
    Ok((mean, sq_norm))
}

/// One-step expected drift of the squared norm from state `x` under the
/// transition row of `cluster`: `2 x . E(Y|i) + E(||Y||^2|i)`, computed
/// exactly from the row and the deformation prototypes.
pub fn drift(model: &DvqModel, x: &[f64], cluster: usize) -> Result<f64> {
    if x.len() != model.reg_codebook().dim() {
        return Err(Error::DimensionMismatch {
            expected: model.reg_codebook().dim(),
            got: x.len(),
        });
    }
    let (mean, sq_norm) = row_moments(model, cluster)?;
    let dot: f64 = x.iter().zip(&mean).map(|(a, b)| a * b).sum();
    Ok(2.0 * dot + sq_norm)
}

/// Outcome of the drift probe for one cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftStatus {
    /// Drift is strictly negative at the largest probe scale.
    Pass,
    /// Drift fails to become negative (zero counts as a warning: the
    /// premise asks for strict negativity).
    Warn,
    /// Not probed: the cluster is not flagged as a boundary cluster.
    Interior,
}

/// Drift evaluated at one probe point along the cluster's ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftProbe {
    pub scale: f64,
    /// The cluster the probe point actually falls in (its BMU).
    pub point_cluster: usize,
    pub drift: f64,
}

/// Per-cluster drift summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterDrift {
    pub cluster: usize,
    pub expected_deformation: Vec<f64>,
    pub expected_sq_norm: f64,
    pub boundary: bool,
    pub probes: Vec<DriftProbe>,
    pub status: DriftStatus,
}

/// Report of the negative-drift assumption check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub clusters: Vec<ClusterDrift>,
    pub scales: Vec<f64>,
    /// Support-weighted prototype mean standing in for the data mean.
    pub data_mean: Vec<f64>,
}

impl DriftReport {
    /// Boundary clusters whose drift failed to become negative.
    pub fn warned(&self) -> Vec<usize> {
        self.clusters
            .iter()
            .filter(|c| c.status == DriftStatus::Warn)
            .map(|c| c.cluster)
            .collect()
    }

    pub fn all_boundary_pass(&self) -> bool {
        self.clusters
            .iter()
            .all(|c| c.status != DriftStatus::Warn)
    }
}

/// Convex-hull vertex indices of 2-D points (Andrew monotone chain with
/// strictly convex turns, so collinear interior points are excluded).
fn hull_vertices_2d(points: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .expect("prototype components are finite")
    });
    let cross = |o: usize, a: usize, b: usize| -> f64 {
        (points[a][0] - points[o][0]) * (points[b][1] - points[o][1])
            - (points[a][1] - points[o][1]) * (points[b][0] - points[o][0])
    };
    let build = |indices: &[usize]| -> Vec<usize> {
        let mut chain: Vec<usize> = Vec::new();
        for &i in indices {
            while chain.len() >= 2
                && cross(chain[chain.len() - 2], chain[chain.len() - 1], i) <= 0.0
            {
                chain.pop();
            }
            chain.push(i);
        }
        chain
    };
    let lower = build(&order);
    let reversed: Vec<usize> = order.iter().rev().copied().collect();
    let upper = build(&reversed);
    let mut vertices: Vec<usize> = lower.into_iter().chain(upper).collect();
    vertices.sort_unstable();
    vertices.dedup();
    vertices
}

/// Boundary-cluster proxy: both string ends, plus prototypes on the convex
/// hull of the codebook (exact for `p <= 2`; for higher dimensions,
/// prototypes at >= 90% of the maximum distance from the codebook mean).
pub fn boundary_clusters(model: &DvqModel) -> Vec<bool> {
    let protos = model.reg_codebook().prototypes();
    let k = protos.len();
    let p = model.reg_codebook().dim();
    let mut flags = vec![false; k];
    flags[0] = true;
    flags[k - 1] = true;

    if k <= 2 {
        return flags;
    }
    match p {
        1 => {
            let mut min_i = 0;
            let mut max_i = 0;
            for i in 1..k {
                if protos[i][0] < protos[min_i][0] {
                    min_i = i;
                }
                if protos[i][0] > protos[max_i][0] {
                    max_i = i;
                }
            }
            flags[min_i] = true;
            flags[max_i] = true;
        }
        2 => {
            for i in hull_vertices_2d(protos) {
                flags[i] = true;
            }
        }
        _ => {
            let mut mean = vec![0.0f64; p];
            for proto in protos {
                for (m, v) in mean.iter_mut().zip(proto) {
                    *m += v / k as f64;
                }
            }
            let dist: Vec<f64> = protos
                .iter()
                .map(|proto| {
                    proto
                        .iter()
                        .zip(&mean)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            let max = dist.iter().cloned().fold(0.0, f64::max);
            if max > 0.0 {
                for (flag, d) in flags.iter_mut().zip(&dist) {
                    if *d >= 0.9 * max {
                        *flag = true;
                    }
                }
            }
        }
    }
    flags
}

fn support_weighted_mean(model: &DvqModel) -> Vec<f64> {
    let p = model.reg_codebook().dim();
    let mut mean = vec![0.0f64; p];
    let mut total = 0.0f64;
    for (i, &support) in model.transition().row_support().iter().enumerate() {
        if support == 0 {
            continue;
        }
        let w = support as f64;
        total += w;
        for (m, v) in mean.iter_mut().zip(model.reg_codebook().prototype(i)) {
            *m += w * v;
        }
    }
    if total > 0.0 {
        for m in &mut mean {
            *m /= total;
        }
    }
    mean
}

/// Default probe scales.
pub const DEFAULT_DRIFT_SCALES: [f64; 4] = [2.0, 5.0, 10.0, 50.0];

/// Probes every boundary-flagged cluster along the ray from the data mean
/// through its prototype at each scale, evaluating the drift under the row of
/// the cluster each probe point falls in. A cluster passes when its drift is
/// strictly negative at the largest scale. The ray direction is a heuristic
/// stand-in for the interior of the cluster's unbounded cell.
pub fn check_negative_drift_assumption(model: &DvqModel, scales: &[f64]) -> Result<DriftReport> {
    if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "probe scales must be non-empty and strictly increasing".into(),
        ));
    }
    let boundary = boundary_clusters(model);
    let data_mean = support_weighted_mean(model);
    let k = model.reg_codebook().k();

    let mut clusters = Vec::with_capacity(k);
    for (i, &flagged) in boundary.iter().enumerate() {
        let (expected_deformation, expected_sq_norm) = row_moments(model, i)?;
        if !flagged {
            clusters.push(ClusterDrift {
                cluster: i,
                expected_deformation,
                expected_sq_norm,
                boundary: false,
                probes: Vec::new(),
                status: DriftStatus::Interior,
            });
            continue;
        }
        let proto = model.reg_codebook().prototype(i);
        let mut probes = Vec::with_capacity(scales.len());
        for &scale in scales {
            let x: Vec<f64> = data_mean
                .iter()
                .zip(proto)
                .map(|(m, v)| m + scale * (v - m))
                .collect();
            let point_cluster = bmu(model.reg_codebook(), &x)?;
            probes.push(DriftProbe {
                scale,
                point_cluster,
                drift: drift(model, &x, point_cluster)?,
            });
        }
        let status = if probes.last().expect("scales are non-empty").drift < 0.0 {
            DriftStatus::Pass
        } else {
            DriftStatus::Warn
        };
        clusters.push(ClusterDrift {
            cluster: i,
            expected_deformation,
            expected_sq_norm,
            boundary: true,
            probes,
            status,
        });
    }
    Ok(DriftReport {
        clusters,
        scales: scales.to_vec(),
        data_mean,
    })
}

/// Fraction of all simulated scalar values outside the closed interval
/// `[min - margin * range, max + margin * range]` of the training series.
pub fn boundedness_check(
    ensemble: &ForecastEnsemble,
    training_range: (f64, f64),
    margin: f64,
) -> f64 {
    let (min, max) = training_range;
    let range = max - min;
    let lo = min - margin * range;
    let hi = max + margin * range;
    let mut outside = 0usize;
    let mut total = 0usize;
    for path in ensemble.paths() {
        total += path.len();
        outside += path.iter().filter(|v| **v < lo || **v > hi).count();
    }
    if total == 0 {
        0.0
    } else {
        outside as f64 / total as f64
    }
}

/// Cluster visit frequencies over one long simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyStats {
    /// Visit frequency per regressor cluster; sums to 1.
    pub frequencies: Vec<f64>,
    pub steps: usize,
    /// Fraction of simulated scalar values outside the history range
    /// extended by `margin * range` on both sides.
    pub outside_fraction: f64,
}

/// Simulates `steps` transitions from the end of `history`, recording the
/// regressor cluster used at each step.
pub fn stationary_occupancy(
    model: &DvqModel,
    history: &TimeSeries,
    steps: usize,
    margin: f64,
    seed: u64,
) -> Result<OccupancyStats> {
    if steps == 0 {
        return Err(Error::InvalidConfig("steps must be >= 1".into()));
    }
    let mut sim = Simulator::new(model, history)?;
    let mut rng = stream_rng(seed, 0);
    let mut visits = vec![0usize; model.reg_codebook().k()];

    let range = history.max() - history.min();
    let lo = history.min() - margin * range;
    let hi = history.max() + margin * range;
    let mut outside = 0usize;
    let mut produced = 0usize;

    for _ in 0..steps {
        let (cluster, block) = sim.step(&mut rng)?;
        visits[cluster] += 1;
        for v in &block {
            let raw = sim.denorm(*v);
            produced += 1;
            if raw < lo || raw > hi {
                outside += 1;
            }
        }
    }
    Ok(OccupancyStats {
        frequencies: visits.iter().map(|c| *c as f64 / steps as f64).collect(),
        steps,
        outside_fraction: outside as f64 / produced as f64,
    })
}

/// Total-variation distance between two frequency vectors.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}
