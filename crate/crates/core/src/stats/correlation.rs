//! Pearson, Spearman, and Kendall tau-b correlation coefficients.

use super::StatsError;

/// The three coefficients; a coefficient undefined for the given inputs
/// (constant input, all-tied pairs) comes back as None.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CorrelationSet {
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub kendall_tau: Option<f64>,
}

pub fn correlations(x: &[f64], y: &[f64]) -> Result<CorrelationSet, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(StatsError::TooFew {
            need: 3,
            got: x.len(),
        });
    }
    Ok(CorrelationSet {
        pearson: pearson(x, y),
        spearman: pearson(&average_ranks(x), &average_ranks(y)),
        kendall_tau: kendall_tau_b(x, y),
    })
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x <= 0.0 || var_y <= 0.0 {
        return None;
    }
    Some(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// Ranks starting at 1, ties receiving the average of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Tie-corrected Kendall tau-b by explicit pair enumeration.
fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut ties_x = 0i64;
    let mut ties_y = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                ties_x += 1;
                ties_y += 1;
            } else if dx == 0.0 {
                ties_x += 1;
            } else if dy == 0.0 {
                ties_y += 1;
            } else if dx * dy > 0.0 {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - ties_x) as f64) * ((n0 - ties_y) as f64)).sqrt();
    if denom <= 0.0 {
        return None;
    }
    Some((concordant - discordant) as f64 / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_relation_all_ones() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = correlations(&x, &y).unwrap();
        assert_abs_diff_eq!(c.pearson.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.spearman.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.kendall_tau.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn monotone_nonlinear_relation() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.powi(3)).collect();
        let c = correlations(&x, &y).unwrap();
        assert_abs_diff_eq!(c.spearman.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.kendall_tau.unwrap(), 1.0, epsilon = 1e-12);
        assert!(c.pearson.unwrap() < 1.0);
    }

    #[test]
    fn kendall_pair_enumeration_case() {
        // pairs: concordant 1, discordant 2 -> -1/3
        let c = correlations(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(c.kendall_tau.unwrap(), -1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_input_disables_affected_coefficients() {
        let c = correlations(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.pearson, None);
        assert_eq!(c.spearman, None);
        assert_eq!(c.kendall_tau, None);
    }

    #[test]
    fn symmetric_and_invariant() {
        let x = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6];
        let y = [2.0, 7.0, 1.0, 8.0, 2.0, 8.0];
        let a = correlations(&x, &y).unwrap();
        let b = correlations(&y, &x).unwrap();
        assert_abs_diff_eq!(a.pearson.unwrap(), b.pearson.unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.kendall_tau.unwrap(), b.kendall_tau.unwrap(), epsilon = 1e-12);
        // pearson invariant under positive affine transform of one side
        let scaled: Vec<f64> = x.iter().map(|v| 4.0 * v + 2.0).collect();
        let c = correlations(&scaled, &y).unwrap();
        assert_abs_diff_eq!(a.pearson.unwrap(), c.pearson.unwrap(), epsilon = 1e-12);
        // spearman/kendall invariant under strictly increasing transform
        let warped: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let d = correlations(&warped, &y).unwrap();
        assert_abs_diff_eq!(a.spearman.unwrap(), d.spearman.unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.kendall_tau.unwrap(), d.kendall_tau.unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn ties_use_average_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 30.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn too_short_rejected() {
        assert_eq!(
            correlations(&[1.0, 2.0], &[1.0, 2.0]).unwrap_err(),
            StatsError::TooFew { need: 3, got: 2 }
        );
    }
}
