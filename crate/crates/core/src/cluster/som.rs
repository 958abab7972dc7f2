//! Self-organizing map: online best-matching-unit training on a square
//! grid with exponentially decaying learning rate and Gaussian
//! neighborhood.

use super::{compact_labels, validate_matrix, Algorithm, ClusterError, ClusterModel};
use crate::distance::squared_euclidean_unchecked;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const DEFAULT_SOM_ITERATIONS: usize = 10_000;
pub const DEFAULT_SOM_LEARNING_RATE: f64 = 0.5;
pub const DEFAULT_SOM_FINAL_LEARNING_RATE: f64 = 0.05;

/// Grid size rule: `ceil(sqrt(ceil(sqrt(num_users))))^2`, read as a square
/// grid of that many units.
pub fn som_grid_size(num_users: usize) -> usize {
    let side = ceil_sqrt(ceil_sqrt(num_users as u64));
    (side * side) as usize
}

fn ceil_sqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r * r < n {
        r += 1;
    }
    while r > 1 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

/// SOM shape and training schedule.
///
/// The learning rate decays exponentially from `initial_learning_rate`
/// to `final_learning_rate` over the run. The neighborhood radius decays
/// with time constant `iterations / ln(initial_radius)` but never below
/// `radius_floor`: the floor keeps the map stiff in the convergence
/// phase, so redundant units park between clusters instead of splitting
/// one cluster's members among near-identical codebook vectors.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SomGrid {
    pub rows: usize,
    pub cols: usize,
    pub iterations: usize,
    pub initial_learning_rate: f64,
    pub final_learning_rate: f64,
    pub initial_radius: f64,
    pub radius_floor: f64,
}

impl SomGrid {
    /// Square grid with the default schedule: learning rate 0.5 decaying
    /// to 0.05, radius max(rows, cols)/2 with floor max(1, 0.8 * that).
    pub fn new(rows: usize, cols: usize) -> SomGrid {
        let initial_radius = (rows.max(cols) as f64) / 2.0;
        SomGrid {
            rows,
            cols,
            iterations: DEFAULT_SOM_ITERATIONS,
            initial_learning_rate: DEFAULT_SOM_LEARNING_RATE,
            final_learning_rate: DEFAULT_SOM_FINAL_LEARNING_RATE,
            initial_radius,
            radius_floor: (0.8 * initial_radius).max(1.0),
        }
    }

    /// Square grid sized by [`som_grid_size`] for a corpus of `n` series.
    pub fn for_corpus_size(n: usize) -> SomGrid {
        let units = som_grid_size(n.max(1));
        let side = (units as f64).sqrt().round() as usize;
        SomGrid::new(side, side)
    }

    pub fn units(&self) -> usize {
        self.rows * self.cols
    }

    fn validate(&self) -> Result<(), ClusterError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(ClusterError::InvalidParameter("grid must be non-empty".into()));
        }
        if self.iterations == 0 {
            return Err(ClusterError::InvalidParameter("iterations must be >= 1".into()));
        }
        if !(self.initial_learning_rate > 0.0 && self.initial_learning_rate <= 1.0) {
            return Err(ClusterError::InvalidParameter(format!(
                "initial learning rate {} outside (0, 1]",
                self.initial_learning_rate
            )));
        }
        if !(self.final_learning_rate > 0.0
            && self.final_learning_rate <= self.initial_learning_rate)
        {
            return Err(ClusterError::InvalidParameter(format!(
                "final learning rate {} outside (0, initial]",
                self.final_learning_rate
            )));
        }
        if !(self.initial_radius > 0.0) || !(self.radius_floor > 0.0) {
            return Err(ClusterError::InvalidParameter(format!(
                "radius schedule ({}, floor {}) must be positive",
                self.initial_radius, self.radius_floor
            )));
        }
        Ok(())
    }
}

/// Train a SOM and label each series by its final best matching unit.
/// Units that end up empty are dropped and labels compacted.
pub fn som_fit(x: &[Vec<f64>], grid: &SomGrid, seed: u64) -> Result<ClusterModel, ClusterError> {
    let (n, _) = validate_matrix(x)?;
    grid.validate()?;
    let units = grid.units();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Codebook seeded from corpus samples: distinct draws when the corpus
    // is large enough, with replacement otherwise.
    let mut codebook: Vec<Vec<f64>> = if n >= units {
        let mut indices: Vec<usize> = (0..n).collect();
        for i in 0..units {
            let j = rng.random_range(i..n);
            indices.swap(i, j);
        }
        indices[..units].iter().map(|&i| x[i].clone()).collect()
    } else {
        (0..units)
            .map(|_| x[rng.random_range(0..n)].clone())
            .collect()
    };

    let positions: Vec<(f64, f64)> = (0..units)
        .map(|u| ((u / grid.cols) as f64, (u % grid.cols) as f64))
        .collect();
    let radius_tc = if grid.initial_radius > 1.0 {
        grid.iterations as f64 / grid.initial_radius.ln()
    } else {
        grid.iterations as f64
    };
    let lr_ratio = grid.initial_learning_rate / grid.final_learning_rate;
    let lr_tc = if lr_ratio > 1.0 {
        grid.iterations as f64 / lr_ratio.ln()
    } else {
        grid.iterations as f64
    };

    for t in 0..grid.iterations {
        let sample = &x[rng.random_range(0..n)];
        let bmu = best_matching_unit(&codebook, sample);
        let lr = grid.initial_learning_rate * (-(t as f64) / lr_tc).exp();
        let radius = (grid.initial_radius * (-(t as f64) / radius_tc).exp())
            .max(grid.radius_floor);
        let two_r2 = 2.0 * radius * radius;
        let (br, bc) = positions[bmu];
        for (u, unit) in codebook.iter_mut().enumerate() {
            let (ur, uc) = positions[u];
            let grid_d2 = (ur - br) * (ur - br) + (uc - bc) * (uc - bc);
            let h = (-grid_d2 / two_r2).exp();
            let step = lr * h;
            if step < 1e-12 {
                continue;
            }
            for (w, &v) in unit.iter_mut().zip(sample) {
                *w += step * (v - *w);
            }
        }
    }

    let raw: Vec<i32> = x
        .iter()
        .map(|row| best_matching_unit(&codebook, row) as i32)
        .collect();
    let (labels, prototypes, n_clusters) = compact_labels(&raw, Some(&codebook));
    let mut params = BTreeMap::new();
    params.insert("rows".into(), grid.rows.to_string());
    params.insert("cols".into(), grid.cols.to_string());
    params.insert("iterations".into(), grid.iterations.to_string());
    params.insert(
        "initial_learning_rate".into(),
        grid.initial_learning_rate.to_string(),
    );
    params.insert(
        "final_learning_rate".into(),
        grid.final_learning_rate.to_string(),
    );
    params.insert("initial_radius".into(), grid.initial_radius.to_string());
    params.insert("radius_floor".into(), grid.radius_floor.to_string());
    Ok(ClusterModel {
        algorithm: Algorithm::Som,
        params,
        labels,
        prototypes,
        n_clusters,
        seed,
    })
}

fn best_matching_unit(codebook: &[Vec<f64>], sample: &[f64]) -> usize {
    let mut best = 0usize;
    let mut best_d2 = f64::INFINITY;
    for (u, unit) in codebook.iter().enumerate() {
        let d2 = squared_euclidean_unchecked(unit, sample);
        if d2 < best_d2 {
            best_d2 = d2;
            best = u;
        }
    }
    best
}
