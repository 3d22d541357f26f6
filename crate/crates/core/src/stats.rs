//! Monte Carlo summaries.

use serde::Serialize;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    /// Summarizes samples in order, so equal inputs give bit-identical output.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, std_error: f64::NAN, samples: 0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Estimate { mean, std_error: (var / n as f64).sqrt(), samples: n }
    }

    /// Whether two independent estimates agree within `k` joint standard errors.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * self.std_error.hypot(other.std_error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(Estimate::from_samples(&[7.0]).std_error, 0.0);
        assert!(Estimate::from_samples(&[]).mean.is_nan());
        let a = Estimate { mean: 1.0, std_error: 0.3, samples: 10 };
        let b = Estimate { mean: 2.4, std_error: 0.4, samples: 10 };
        assert!(a.agrees_with(&b, 3.0) && !a.agrees_with(&b, 2.0));
    }
}
