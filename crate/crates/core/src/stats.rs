//! Sample moments for Monte-Carlo summaries.

/// Mean and variance of a finite sample, with standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Fourth central moment (biased), used for the variance's standard error.
    pub fourth: f64,
}

impl Moments {
    /// Two-pass moments; summation follows slice order so results are reproducible.
    pub fn from_slice(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                variance: f64::NAN,
                fourth: f64::NAN,
            };
        }
        let n = count as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = if count > 1 { m2 / (n - 1.0) } else { 0.0 };
        Self {
            count,
            mean,
            variance,
            fourth: m4 / n,
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    /// Large-sample standard error of the sample variance, `sqrt((μ₄ − σ⁴) / N)`.
    pub fn variance_stderr(&self) -> f64 {
        let s4 = self.variance * self.variance;
        ((self.fourth - s4).max(0.0) / self.count as f64).sqrt()
    }
}
