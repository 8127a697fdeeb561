//! Strong and γ-weak quadratic transport costs.
//!
//! The γ-weak quadratic cost of sending a point `x` to a distribution `μ`
//! is `∫ ½‖x−y‖² dμ(y) − (γ/2)·Var(μ)`, with the variance in trace form.
//! γ = 0 recovers the strong half-squared cost; the cost stays lower
//! bounded for γ ≤ 1. [`weak_cost_estimator`] is the unbiased Monte-Carlo
//! form used inside the trainer, [`exact_weak_cost`] the closed form on a
//! finite `μ` used by the discrete solvers.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cost selector carried through configs and checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec {
    /// `½‖x−y‖²` (γ = 0).
    StrongHalfSq,
    /// γ-weak quadratic cost with the given γ ∈ [0, 1].
    WeakQuadratic { gamma: f64 },
}

impl CostSpec {
    pub fn gamma(&self) -> f64 {
        match self {
            CostSpec::StrongHalfSq => 0.0,
            CostSpec::WeakQuadratic { gamma } => *gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.gamma();
        if !(0.0..=1.0).contains(&g) || !g.is_finite() {
            return Err(Error::Config(format!("gamma must lie in [0, 1], got {g}")));
        }
        Ok(())
    }
}

/// `½‖x−y‖²`.
pub fn strong_cost(x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "strong_cost: dim {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        let d = a - b;
        s += d * d;
    }
    Ok(0.5 * s)
}

/// Unbiased Monte-Carlo estimate of the γ-weak cost of sending `x` to the
/// distribution behind the `mapped` batch:
/// `(1/2|Z|)·Σ‖x−t_z‖² − (γ/2)·σ̂²` with σ̂² the corrected (|Z|−1) batch
/// variance of the mapped points about their mean.
pub fn weak_cost_estimator(
    x: ArrayView1<f64>,
    mapped: ArrayView2<f64>,
    gamma: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let z = mapped.nrows();
    if z == 0 {
        return Err(Error::Usage("mapped batch must be nonempty".to_string()));
    }
    if gamma > 0.0 && z < 2 {
        return Err(Error::Usage(
            "gamma > 0 needs at least 2 mapped points for the variance estimate".to_string(),
        ));
    }
    if mapped.ncols() != x.len() {
        return Err(Error::Shape(format!(
            "weak_cost_estimator: point dim {} vs batch dim {}",
            x.len(),
            mapped.ncols()
        )));
    }

    let mut dist = 0.0;
    for row in mapped.rows() {
        for (a, b) in x.iter().zip(row.iter()) {
            let d = a - b;
            dist += d * d;
        }
    }
    let mut cost = dist / (2.0 * z as f64);

    if gamma > 0.0 {
        let mean = mapped.sum_axis(Axis(0)) / z as f64;
        let mut dev = 0.0;
        for row in mapped.rows() {
            for (a, m) in row.iter().zip(mean.iter()) {
                let d = a - m;
                dev += d * d;
            }
        }
        cost -= 0.5 * gamma * dev / (z - 1) as f64;
    }
    Ok(cost)
}

/// Exact γ-weak cost of sending `x` to the finite distribution with the
/// given atoms and weights:
/// `Σ wⱼ·½‖x−yⱼ‖² − (γ/2)·(Σ wⱼ‖yⱼ‖² − ‖Σ wⱼ yⱼ‖²)`.
pub fn exact_weak_cost(
    x: ArrayView1<f64>,
    atoms: ArrayView2<f64>,
    weights: ArrayView1<f64>,
    gamma: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    if atoms.nrows() != weights.len() {
        return Err(Error::Usage(format!(
            "exact_weak_cost: {} atoms vs {} weights",
            atoms.nrows(),
            weights.len()
        )));
    }
    if atoms.ncols() != x.len() {
        return Err(Error::Shape(format!(
            "exact_weak_cost: point dim {} vs atom dim {}",
            x.len(),
            atoms.ncols()
        )));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::Usage("weights must be nonnegative".to_string()));
    }
    let total: f64 = weights.sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Usage(format!("weights must sum to 1, got {total}")));
    }

    let mut transport = 0.0;
    let mut second_moment = 0.0;
    let mut mean = Array1::<f64>::zeros(x.len());
    for (row, &w) in atoms.rows().into_iter().zip(weights.iter()) {
        let mut d2 = 0.0;
        let mut y2 = 0.0;
        for ((a, b), m) in x.iter().zip(row.iter()).zip(mean.iter_mut()) {
            let d = a - b;
            d2 += d * d;
            y2 += b * b;
            *m += w * b;
        }
        transport += w * 0.5 * d2;
        second_moment += w * y2;
    }
    let mean_sq: f64 = mean.iter().map(|m| m * m).sum();
    Ok(transport - 0.5 * gamma * (second_moment - mean_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn strong_cost_hand_values() {
        let x = array![0.0, 0.0];
        let y = array![3.0, 4.0];
        assert_eq!(strong_cost(x.view(), x.view()).unwrap(), 0.0);
        assert_eq!(strong_cost(x.view(), y.view()).unwrap(), 12.5);
        assert!(strong_cost(x.view(), array![1.0].view()).is_err());
    }

    #[test]
    fn strong_cost_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x = Array2::from_shape_fn((1, 3), |_| rng.gen::<f64>() * 4.0 - 2.0);
            let y = Array2::from_shape_fn((1, 3), |_| rng.gen::<f64>() * 4.0 - 2.0);
            let a = strong_cost(x.row(0), y.row(0)).unwrap();
            let b = strong_cost(y.row(0), x.row(0)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn estimator_hand_values() {
        // Degenerate batch equal to x: zero distance and zero variance.
        let x = array![0.7, -0.3];
        let mapped = array![[0.7, -0.3], [0.7, -0.3]];
        for gamma in [0.0, 0.5, 1.0] {
            assert_eq!(weak_cost_estimator(x.view(), mapped.view(), gamma).unwrap(), 0.0);
        }

        let x = array![0.0];
        let mapped = array![[-1.0], [1.0]];
        assert_eq!(weak_cost_estimator(x.view(), mapped.view(), 0.0).unwrap(), 0.5);
        // sigma^2 = ((-1)^2 + 1^2) / (2-1) = 2, so 0.5 - 1.0 = -0.5.
        assert_eq!(weak_cost_estimator(x.view(), mapped.view(), 1.0).unwrap(), -0.5);
    }

    #[test]
    fn estimator_needs_two_points_when_gamma_positive() {
        let x = array![0.0];
        let one = array![[1.0]];
        assert!(weak_cost_estimator(x.view(), one.view(), 0.5).is_err());
        assert!(weak_cost_estimator(x.view(), one.view(), 0.0).is_ok());
    }

    #[test]
    fn exact_cost_hand_values() {
        // Point mass: variance contributes nothing.
        let x = array![1.0, 2.0];
        let atoms = array![[4.0, 6.0]];
        let w = array![1.0];
        for gamma in [0.0, 0.3, 1.0] {
            let c = exact_weak_cost(x.view(), atoms.view(), w.view(), gamma).unwrap();
            assert!((c - 12.5).abs() < 1e-15);
        }

        // x = 0, atoms ±1 uniform, gamma = 1: the mean is 0, cost 0.
        let x = array![0.0];
        let atoms = array![[-1.0], [1.0]];
        let w = array![0.5, 0.5];
        let c = exact_weak_cost(x.view(), atoms.view(), w.view(), 1.0).unwrap();
        assert!(c.abs() < 1e-15);
    }

    #[test]
    fn gamma_one_reduces_to_distance_to_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..30 {
            let m = rng.gen_range(1..6);
            let d = rng.gen_range(1..4);
            let atoms = Array2::from_shape_fn((m, d), |_| rng.gen::<f64>() * 4.0 - 2.0);
            let mut w: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.01).collect();
            let tot: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= tot);
            let w = ndarray::Array1::from_vec(w);
            let x = Array2::from_shape_fn((1, d), |_| rng.gen::<f64>() * 4.0 - 2.0);

            let c = exact_weak_cost(x.row(0), atoms.view(), w.view(), 1.0).unwrap();
            let mut mean = vec![0.0; d];
            for (row, &wi) in atoms.rows().into_iter().zip(w.iter()) {
                for (j, v) in row.iter().enumerate() {
                    mean[j] += wi * v;
                }
            }
            let direct: f64 = 0.5
                * mean
                    .iter()
                    .enumerate()
                    .map(|(j, m)| (x[[0, j]] - m) * (x[[0, j]] - m))
                    .sum::<f64>();
            assert!((c - direct).abs() < 1e-12, "{c} vs {direct}");
        }
    }

    #[test]
    fn estimator_with_gamma_zero_is_the_strong_batch_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((1, 3), |_| rng.gen::<f64>());
        let mapped = Array2::from_shape_fn((6, 3), |_| rng.gen::<f64>() * 2.0);
        let est = weak_cost_estimator(x.row(0), mapped.view(), 0.0).unwrap();
        let mean: f64 = mapped
            .rows()
            .into_iter()
            .map(|r| strong_cost(x.row(0), r).unwrap())
            .sum::<f64>()
            / mapped.nrows() as f64;
        assert!((est - mean).abs() < 1e-14);
    }

    #[test]
    fn exact_cost_is_strictly_decreasing_in_gamma_when_variance_positive() {
        let x = array![0.4, -0.2];
        let atoms = array![[1.0, 0.0], [-1.0, 0.5], [0.0, -2.0]];
        let w = array![0.3, 0.3, 0.4];
        let mut last = f64::INFINITY;
        for k in 0..=10 {
            let gamma = k as f64 / 10.0;
            let c = exact_weak_cost(x.view(), atoms.view(), w.view(), gamma).unwrap();
            assert!(c < last, "not strictly decreasing at gamma={gamma}");
            last = c;
        }
    }

    #[test]
    fn estimator_is_unbiased_for_the_exact_cost() {
        // Fixed discrete mu over 3 points; the Monte-Carlo mean over 1e5
        // |Z| = 4 batches must sit within 4 standard errors of the exact
        // value for each gamma.
        let atoms = array![[0.0, 0.0], [2.0, 1.0], [-1.0, 3.0]];
        let w = array![0.5, 0.25, 0.25];
        let x = array![0.5, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(31415);
        let trials = 100_000;

        for gamma in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
            let exact = exact_weak_cost(x.view(), atoms.view(), w.view(), gamma).unwrap();
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            let mut batch = Array2::<f64>::zeros((4, 2));
            for _ in 0..trials {
                for mut row in batch.rows_mut() {
                    let u: f64 = rng.gen();
                    let k = if u < 0.5 {
                        0
                    } else if u < 0.75 {
                        1
                    } else {
                        2
                    };
                    row[0] = atoms[[k, 0]];
                    row[1] = atoms[[k, 1]];
                }
                let est = weak_cost_estimator(x.view(), batch.view(), gamma).unwrap();
                sum += est;
                sumsq += est * est;
            }
            let mean = sum / trials as f64;
            let var = (sumsq / trials as f64 - mean * mean).max(0.0);
            let stderr = (var / trials as f64).sqrt();
            assert!(
                (mean - exact).abs() <= 4.0 * stderr,
                "gamma {gamma}: mean {mean} vs exact {exact} (stderr {stderr})"
            );
        }
    }

    #[test]
    fn invalid_weights_are_usage_errors() {
        let x = array![0.0];
        let atoms = array![[1.0], [2.0]];
        let bad_sum = array![0.5, 0.6];
        assert!(matches!(
            exact_weak_cost(x.view(), atoms.view(), bad_sum.view(), 0.5),
            Err(Error::Usage(_))
        ));
        let negative = array![1.5, -0.5];
        assert!(exact_weak_cost(x.view(), atoms.view(), negative.view(), 0.5).is_err());
    }
}
