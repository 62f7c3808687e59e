//! Small sample-statistics helpers. Sums run sequentially over ordered
//! samples so results are bit-reproducible.

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Self {
        let count = samples.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                count,
            };
        }
        let n = count as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std_error = if count > 1 {
            let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error, count }
    }
}

/// Binomial standard error of a proportion estimated from `n` samples.
pub fn proportion_std_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Fraction of `samples` strictly below `x`. `sorted` must be ascending.
pub fn ecdf_below(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&s| s < x) as f64 / sorted.len() as f64
}

/// Fraction of `samples` at or above `x`. `sorted` must be ascending.
pub fn tail_at_or_above(sorted: &[f64], x: f64) -> f64 {
    1.0 - ecdf_below(sorted, x)
}
