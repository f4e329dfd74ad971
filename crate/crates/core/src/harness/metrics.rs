use crate::error::{Error, Result};

/// `(1/l) sum |d_i - e_i|`.
pub fn mean_absolute_error(truths: &[f64], estimates: &[f64]) -> Result<f64> {
    if truths.len() != estimates.len() {
        return Err(Error::LengthMismatch {
            left: truths.len(),
            right: estimates.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::invalid("mean absolute error of an empty sample"));
    }
    let total: f64 = truths.iter().zip(estimates).map(|(d, e)| (d - e).abs()).sum();
    Ok(total / truths.len() as f64)
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Whether the true nearest neighbor is among the first `k` private results.
pub fn recall_at_k<T: PartialEq>(true_nn: &T, private_ranking: &[T], k: usize) -> bool {
    private_ranking.iter().take(k).any(|id| id == true_nn)
}

/// Sum of the true similarities of the privately retrieved neighbors over
/// the sum for the true neighbors. A perfect ranking gives 1.
pub fn approx_similarity_ratio(true_top_sims: &[f64], private_top_true_sims: &[f64]) -> Result<f64> {
    if true_top_sims.len() != private_top_true_sims.len() {
        return Err(Error::LengthMismatch {
            left: true_top_sims.len(),
            right: private_top_true_sims.len(),
        });
    }
    let truth: f64 = true_top_sims.iter().sum();
    if truth <= 0.0 {
        return Err(Error::invalid("true neighbors have zero total similarity"));
    }
    Ok(private_top_true_sims.iter().sum::<f64>() / truth)
}
