//! One-dimensional Kohonen string SOM used as a vector quantizer.
//!
//! Prototypes are ordered along a string (path graph): prototype `i` neighbors
//! `i-1` and `i+1`. Training is batch mode: each epoch assigns every vector to
//! its best-matching unit, then recomputes every prototype as the
//! neighborhood-kernel-weighted mean of the data, with the kernel radius
//! shrinking linearly across epochs. With radius 0 a batch step degenerates to
//! one Lloyd (k-means) step on the non-empty clusters.
//!
//! Training is deterministic: identical `(data, config)` produce a
//! bit-identical codebook. BMU lookups run in parallel but all floating-point
//! accumulation is sequential in data order, so thread count never changes
//! the result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of `k` prototypes of dimension `p` with string topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    prototypes: Vec<Vec<f64>>,
    dim: usize,
}

impl Codebook {
    /// Validates prototypes: non-empty, equal dimensions, finite components.
    pub fn new(prototypes: Vec<Vec<f64>>) -> Result<Self> {
        if prototypes.is_empty() {
            return Err(Error::EmptyInput("codebook needs at least 1 prototype".into()));
        }
        let dim = prototypes[0].len();
        if dim == 0 {
            return Err(Error::EmptyInput("prototype dimension must be >= 1".into()));
        }
        for proto in &prototypes {
            if proto.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: proto.len(),
                });
            }
            if proto.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(
                    "prototype components must be finite".into(),
                ));
            }
        }
        Ok(Self { prototypes, dim })
    }

    /// Number of prototypes `k`.
    pub fn k(&self) -> usize {
        self.prototypes.len()
    }

    /// Prototype dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prototypes(&self) -> &[Vec<f64>] {
        &self.prototypes
    }

    pub fn prototype(&self, i: usize) -> &[f64] {
        &self.prototypes[i]
    }
}

/// Neighborhood kernel over string index distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `exp(-dist^2 / (2 radius^2))`; radius 0 degenerates to hard
    /// assignment (Lloyd).
    Gaussian,
}

/// Codebook initialization strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// `k` distinct data rows chosen by a seeded draw without replacement.
    Sample,
    /// `k` points evenly spaced along the first principal axis of the data.
    PcaLine,
}

/// SOM training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomConfig {
    pub k: usize,
    pub epochs: usize,
    pub radius_start: f64,
    pub radius_end: f64,
    pub kernel: Kernel,
    pub init: Init,
    pub seed: u64,
}

impl SomConfig {
    /// Defaults for a string of `k` prototypes: 50 epochs, radius shrinking
    /// from `k/4` to 0, Gaussian kernel, sample init, seed 0.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            epochs: 50,
            radius_start: k as f64 / 4.0,
            radius_end: 0.0,
            kernel: Kernel::Gaussian,
            init: Init::Sample,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.radius_start.is_finite() && self.radius_end.is_finite())
            || self.radius_start < self.radius_end
            || self.radius_end < 0.0
        {
            return Err(Error::InvalidConfig(format!(
                "radii must satisfy radius_start >= radius_end >= 0, got ({}, {})",
                self.radius_start, self.radius_end
            )));
        }
        Ok(())
    }
}

/// A trained codebook plus how many training vectors each cluster captured
/// (the transition-matrix builder uses this to detect dead units).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedSom {
    pub codebook: Codebook,
    pub occupancy: Vec<usize>,
}

fn check_data(data: &[Vec<f64>]) -> Result<usize> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training data is empty".into()));
    }
    let dim = data[0].len();
    for row in data {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    Ok(dim)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest prototype (squared Euclidean distance), ties broken
/// by the lowest index.
pub fn bmu(cb: &Codebook, v: &[f64]) -> Result<usize> {
    if v.len() != cb.dim() {
        return Err(Error::DimensionMismatch {
            expected: cb.dim(),
            got: v.len(),
        });
    }
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, proto) in cb.prototypes().iter().enumerate() {
        let dist = squared_distance(proto, v);
        if dist < best_dist {
            best_dist = dist;
            best = i;
        }
    }
    Ok(best)
}

/// Elementwise [`bmu`] over a data set, in parallel.
pub fn assign_clusters(cb: &Codebook, data: &[Vec<f64>]) -> Result<Vec<usize>> {
    check_data(data)?;
    data.par_iter().map(|v| bmu(cb, v)).collect()
}

/// Mean squared distance from each vector to its BMU.
pub fn quantization_error(cb: &Codebook, data: &[Vec<f64>]) -> Result<f64> {
    check_data(data)?;
    let total: f64 = data
        .par_iter()
        .map(|v| bmu(cb, v).map(|i| squared_distance(cb.prototype(i), v)))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    Ok(total / data.len() as f64)
}

fn kernel_weight(kernel: Kernel, string_dist: usize, radius: f64) -> f64 {
    match kernel {
        Kernel::Gaussian => {
            if radius == 0.0 {
                if string_dist == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                let d = string_dist as f64;
                (-d * d / (2.0 * radius * radius)).exp()
            }
        }
    }
}

/// One batch epoch at a fixed radius: BMU assignment followed by the
/// kernel-weighted mean update. A prototype receiving zero kernel mass keeps
/// its previous value. With radius 0 this is exactly one Lloyd step on the
/// non-empty clusters.
pub fn batch_step(cb: &Codebook, data: &[Vec<f64>], kernel: Kernel, radius: f64) -> Result<Codebook> {
    let dim = check_data(data)?;
    if dim != cb.dim() {
        return Err(Error::DimensionMismatch {
            expected: cb.dim(),
            got: dim,
        });
    }
    let k = cb.k();
    let labels = assign_clusters(cb, data)?;

    // Per-cluster sums, accumulated sequentially in data order so the result
    // does not depend on thread count.
    let mut sums = vec![vec![0.0f64; dim]; k];
    let mut counts = vec![0usize; k];
    for (row, &c) in data.iter().zip(&labels) {
        counts[c] += 1;
        let sum = &mut sums[c];
        for (acc, v) in sum.iter_mut().zip(row) {
            *acc += v;
        }
    }

    // The kernel depends only on the string distance between clusters, so the
    // weighted mean over data reduces to a weighted mean over cluster sums.
    let mut prototypes = Vec::with_capacity(k);
    for i in 0..k {
        let mut num = vec![0.0f64; dim];
        let mut den = 0.0f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let w = kernel_weight(kernel, i.abs_diff(c), radius);
            if w == 0.0 {
                continue;
            }
            den += w * counts[c] as f64;
            for (acc, s) in num.iter_mut().zip(&sums[c]) {
                *acc += w * s;
            }
        }
        if den > 0.0 {
            prototypes.push(num.iter().map(|v| v / den).collect());
        } else {
            prototypes.push(cb.prototype(i).to_vec());
        }
    }
    Codebook::new(prototypes)
}

fn init_sample(data: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = data.len();
    if k > n {
        log::warn!("k = {k} prototypes exceed the {n} data rows; duplicating rows");
    }
    let order = rand::seq::index::sample(&mut rng, n, n).into_vec();

    // Draw without replacement, preferring value-distinct rows: duplicated
    // initial prototypes would tie every BMU lookup to the lower index and
    // starve the copy.
    let mut seen: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::new();
    let mut picked = Vec::with_capacity(k);
    for &i in &order {
        if picked.len() == k {
            break;
        }
        let bits: Vec<u64> = data[i].iter().map(|v| v.to_bits()).collect();
        if seen.insert(bits) {
            picked.push(i);
        }
    }
    // fewer distinct values than k: fill the rest cyclically
    let mut fill = 0usize;
    while picked.len() < k {
        picked.push(order[fill % order.len()]);
        fill += 1;
    }
    picked.into_iter().map(|i| data[i].clone()).collect()
}

fn init_pca_line(data: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let n = data.len();
    let dim = data[0].len();
    let mut mean = vec![0.0f64; dim];
    for row in data {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    // Power iteration for the leading principal direction; the deterministic
    // start vector is perturbed per component so it is never orthogonal to
    // the principal axis in practice.
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + 0.01 * i as f64).collect();
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let len = norm(&v);
    for a in &mut v {
        *a /= len;
    }
    for _ in 0..64 {
        let mut next = vec![0.0f64; dim];
        for row in data {
            let mut dot = 0.0;
            for ((x, m), w) in row.iter().zip(&mean).zip(&v) {
                dot += (x - m) * w;
            }
            for ((nx, x), m) in next.iter_mut().zip(row).zip(&mean) {
                *nx += dot * (x - m);
            }
        }
        let len = norm(&next);
        if len == 0.0 {
            break; // all data identical: stay with the current direction
        }
        for a in &mut next {
            *a /= len;
        }
        v = next;
    }

    // Spread of the data along the axis.
    let mut var = 0.0;
    for row in data {
        let mut dot = 0.0;
        for ((x, m), w) in row.iter().zip(&mean).zip(&v) {
            dot += (x - m) * w;
        }
        var += dot * dot;
    }
    let sd = (var / n as f64).sqrt();

    (0..k)
        .map(|i| {
            let t = if k == 1 {
                0.0
            } else {
                -2.0 + 4.0 * i as f64 / (k - 1) as f64
            };
            mean.iter().zip(&v).map(|(m, w)| m + t * sd * w).collect()
        })
        .collect()
}

fn radius_at(cfg: &SomConfig, epoch: usize) -> f64 {
    if cfg.epochs == 1 {
        cfg.radius_start
    } else {
        let frac = epoch as f64 / (cfg.epochs - 1) as f64;
        cfg.radius_start + (cfg.radius_end - cfg.radius_start) * frac
    }
}

/// Batch-SOM training. Deterministic given `(data order, cfg)`.
pub fn train(data: &[Vec<f64>], cfg: &SomConfig) -> Result<TrainedSom> {
    cfg.validate()?;
    check_data(data)?;
    let initial = match cfg.init {
        Init::Sample => init_sample(data, cfg.k, cfg.seed),
        Init::PcaLine => init_pca_line(data, cfg.k),
    };
    let mut codebook = Codebook::new(initial)?;
    for epoch in 0..cfg.epochs {
        codebook = batch_step(&codebook, data, cfg.kernel, radius_at(cfg, epoch))?;
    }
    let mut occupancy = vec![0usize; cfg.k];
    for label in assign_clusters(&codebook, data)? {
        occupancy[label] += 1;
    }
    Ok(TrainedSom { codebook, occupancy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    /// One Lloyd (k-means) step: mean of each non-empty cluster, empty
    /// clusters keep the previous prototype. Independent oracle for
    /// `batch_step` at radius 0.
    fn lloyd_step(cb: &Codebook, data: &[Vec<f64>]) -> Codebook {
        let k = cb.k();
        let dim = cb.dim();
        let mut sums = vec![vec![0.0f64; dim]; k];
        let mut counts = vec![0usize; k];
        for row in data {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for (i, proto) in cb.prototypes().iter().enumerate() {
                let d: f64 = proto.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_dist {
                    best_dist = d;
                    best = i;
                }
            }
            counts[best] += 1;
            for (acc, v) in sums[best].iter_mut().zip(row) {
                *acc += v;
            }
        }
        let protos = (0..k)
            .map(|i| {
                if counts[i] == 0 {
                    cb.prototype(i).to_vec()
                } else {
                    sums[i].iter().map(|s| s / counts[i] as f64).collect()
                }
            })
            .collect();
        Codebook::new(protos).unwrap()
    }

    #[test]
    fn identical_data_collapses_all_prototypes() {
        let v = vec![0.5, -1.5, 2.0];
        let data = vec![v.clone(); 100];
        let trained = train(&data, &SomConfig::new(4).with_seed(3)).unwrap();
        for proto in trained.codebook.prototypes() {
            for (a, b) in proto.iter().zip(&v) {
                assert!(approx(*a, *b, 1e-9));
            }
        }
    }

    #[test]
    fn single_unit_converges_to_mean_in_one_epoch() {
        let data = random_points(50, 3, 1);
        let mut cfg = SomConfig::new(1).with_seed(9);
        cfg.epochs = 1;
        cfg.radius_start = 2.5; // any radius: a single unit always has weight 1
        cfg.radius_end = 0.0;
        // radius_start >= radius_end
        let trained = train(&data, &cfg).unwrap();
        let mut mean = vec![0.0; 3];
        for row in &data {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / data.len() as f64;
            }
        }
        for (a, b) in trained.codebook.prototype(0).iter().zip(&mean) {
            assert!(approx(*a, *b, 1e-9));
        }
    }

    #[test]
    fn two_blobs_match_lloyd_error() {
        // two well-separated Gaussian-ish blobs in 2-D
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut data = Vec::new();
        for _ in 0..60 {
            data.push(vec![rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)]);
        }
        for _ in 0..60 {
            data.push(vec![10.0 + rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)]);
        }

        let trained = train(&data, &SomConfig::new(2).with_seed(5)).unwrap();
        let som_err = quantization_error(&trained.codebook, &data).unwrap();

        // exhaustive Lloyd from the true blob means
        let mut oracle = Codebook::new(vec![vec![0.0, 0.0], vec![10.0, 0.0]]).unwrap();
        for _ in 0..50 {
            oracle = lloyd_step(&oracle, &data);
        }
        let lloyd_err = quantization_error(&oracle, &data).unwrap();
        assert!(
            som_err <= lloyd_err * 1.05,
            "SOM error {som_err} not within 5% of Lloyd error {lloyd_err}"
        );
    }

    #[test]
    fn batch_step_with_radius_zero_is_a_lloyd_step() {
        let data = random_points(80, 2, 21);
        let cb = Codebook::new(data[..6].to_vec()).unwrap();
        let ours = batch_step(&cb, &data, Kernel::Gaussian, 0.0).unwrap();
        let oracle = lloyd_step(&cb, &data);
        for (a, b) in ours.prototypes().iter().zip(oracle.prototypes()) {
            for (x, y) in a.iter().zip(b) {
                assert!(approx(*x, *y, 1e-9));
            }
        }
    }

    #[test]
    fn bmu_basics() {
        let cb = Codebook::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(bmu(&cb, &[0.2, 0.1]).unwrap(), 0);
        // equidistant: lowest index wins
        assert_eq!(bmu(&cb, &[0.5, 0.5]).unwrap(), 0);
        // exact hit
        let cb4 = Codebook::new(vec![
            vec![0.0],
            vec![1.0],
            vec![2.0],
            vec![3.0],
        ])
        .unwrap();
        assert_eq!(bmu(&cb4, &[3.0]).unwrap(), 3);
        assert!(bmu(&cb, &[1.0]).is_err()); // dimension mismatch
    }

    #[test]
    fn bmu_is_identity_on_distinct_prototypes() {
        let cb = Codebook::new(random_points(10, 4, 33)).unwrap();
        for i in 0..cb.k() {
            assert_eq!(bmu(&cb, cb.prototype(i)).unwrap(), i);
        }
    }

    #[test]
    fn quantization_error_cases() {
        let cb = Codebook::new(vec![vec![1.0, 0.0]]).unwrap();
        let data = vec![vec![1.0, 0.0]; 5];
        assert_eq!(quantization_error(&cb, &data).unwrap(), 0.0);
        // one point at Euclidean distance 2 -> squared error 4
        let data = vec![vec![1.0, 2.0]];
        assert_eq!(quantization_error(&cb, &data).unwrap(), 4.0);
        assert!(quantization_error(&cb, &[]).is_err());
    }

    #[test]
    fn memorization_limit() {
        // k = n with sample-without-replacement init and radius_end = 0:
        // quantization error decreases with the epoch budget and reaches the
        // memorization limit 0 once every unit keeps its own point
        let data = random_points(12, 2, 7);
        let mut last = f64::INFINITY;
        for epochs in [2usize, 20, 200] {
            let mut cfg = SomConfig::new(12).with_seed(13);
            cfg.epochs = epochs;
            let trained = train(&data, &cfg).unwrap();
            let err = quantization_error(&trained.codebook, &data).unwrap();
            assert!(err <= last, "error grew from {last} to {err} at {epochs} epochs");
            last = err;
        }
        assert!(last < 1e-9, "memorization error {last} too large");
    }

    #[test]
    fn assign_clusters_is_equivariant_under_permutation() {
        let cb = Codebook::new(random_points(5, 3, 17)).unwrap();
        let data = random_points(40, 3, 18);
        let labels = assign_clusters(&cb, &data).unwrap();
        let mut permuted = data.clone();
        permuted.reverse();
        let permuted_labels = assign_clusters(&cb, &permuted).unwrap();
        let mut expected = labels.clone();
        expected.reverse();
        assert_eq!(permuted_labels, expected);
    }

    #[test]
    fn training_is_deterministic() {
        let data = random_points(100, 4, 8);
        let cfg = SomConfig::new(7).with_seed(99);
        let a = train(&data, &cfg).unwrap();
        let b = train(&data, &cfg).unwrap();
        assert_eq!(a.codebook, b.codebook);
        assert_eq!(a.occupancy, b.occupancy);
    }

    #[test]
    fn occupancy_sums_to_data_count() {
        let data = random_points(64, 2, 4);
        let trained = train(&data, &SomConfig::new(5).with_seed(1)).unwrap();
        assert_eq!(trained.occupancy.iter().sum::<usize>(), 64);
    }

    #[test]
    fn monotone_refinement() {
        // adding the worst-quantized point as an extra prototype can only
        // reduce the quantization error
        let data = random_points(50, 3, 44);
        let trained = train(&data, &SomConfig::new(4).with_seed(6)).unwrap();
        let base_err = quantization_error(&trained.codebook, &data).unwrap();

        let worst = data
            .iter()
            .max_by(|a, b| {
                let da = squared_distance(
                    trained.codebook.prototype(bmu(&trained.codebook, a).unwrap()),
                    a,
                );
                let db = squared_distance(
                    trained.codebook.prototype(bmu(&trained.codebook, b).unwrap()),
                    b,
                );
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let mut protos = trained.codebook.prototypes().to_vec();
        protos.push(worst.clone());
        let refined = Codebook::new(protos).unwrap();
        let refined_err = quantization_error(&refined, &data).unwrap();
        assert!(refined_err <= base_err);
    }

    #[test]
    fn more_prototypes_than_rows_still_trains() {
        let data = random_points(3, 2, 5);
        let trained = train(&data, &SomConfig::new(5).with_seed(1)).unwrap();
        assert_eq!(trained.codebook.k(), 5);
        assert_eq!(trained.occupancy.len(), 5);
        assert_eq!(trained.occupancy.iter().sum::<usize>(), 3);
    }

    #[test]
    fn pca_line_init_trains() {
        let data = random_points(60, 3, 12);
        let mut cfg = SomConfig::new(6).with_seed(0);
        cfg.init = Init::PcaLine;
        let a = train(&data, &cfg).unwrap();
        let b = train(&data, &cfg).unwrap();
        assert_eq!(a.codebook, b.codebook);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let data = random_points(10, 2, 0);
        let mut cfg = SomConfig::new(0);
        assert!(train(&data, &cfg).is_err());
        cfg = SomConfig::new(3);
        cfg.epochs = 0;
        assert!(train(&data, &cfg).is_err());
        cfg = SomConfig::new(3);
        cfg.radius_start = 0.0;
        cfg.radius_end = 1.0;
        assert!(train(&data, &cfg).is_err());
        assert!(train(&[], &SomConfig::new(2)).is_err());
        let ragged = vec![vec![1.0, 2.0], vec![1.0]];
        assert!(train(&ragged, &SomConfig::new(2)).is_err());
    }
}
