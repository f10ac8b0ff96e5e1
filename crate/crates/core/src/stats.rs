//! Small statistics helpers: compensated summation, least-squares slopes,
//! and the chi-squared and runs tests used by the codec's stopping rules.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = CompensatedSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let var = if xs.len() > 1 {
        compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub passed: bool,
}

/// Chi-squared goodness of fit of `counts` against equal expected counts.
pub fn chi_squared_uniform(counts: &[usize], level: f64) -> TestOutcome {
    let k = counts.len();
    let total: usize = counts.iter().sum();
    if k < 2 || total == 0 {
        return TestOutcome {
            statistic: 0.0,
            p_value: 1.0,
            passed: true,
        };
    }
    let expected = total as f64 / k as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    let p_value = 1.0 - dist.cdf(statistic);
    TestOutcome {
        statistic,
        p_value,
        passed: p_value >= level,
    }
}

/// Wald-Wolfowitz runs test (two-sided, normal approximation).
pub fn runs_test(seq: &[bool], level: f64) -> TestOutcome {
    let n1 = seq.iter().filter(|&&b| b).count() as f64;
    let n2 = seq.len() as f64 - n1;
    if n1 == 0.0 || n2 == 0.0 {
        // a constant sequence carries no evidence of dependence
        return TestOutcome {
            statistic: 0.0,
            p_value: 1.0,
            passed: true,
        };
    }
    let runs = 1 + seq.windows(2).filter(|w| w[0] != w[1]).count();
    let n = n1 + n2;
    let mean = 2.0 * n1 * n2 / n + 1.0;
    let var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    if var <= 0.0 {
        return TestOutcome {
            statistic: 0.0,
            p_value: 1.0,
            passed: true,
        };
    }
    let z = (runs as f64 - mean) / var.sqrt();
    let normal = Normal::standard();
    let p_value = 2.0 * (1.0 - normal.cdf(z.abs()));
    TestOutcome {
        statistic: z,
        p_value,
        passed: p_value >= level,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn slope_of_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v - 2.0).collect();
        assert!((slope(&x, &y) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi_squared_flags_skew() {
        assert!(chi_squared_uniform(&[100, 98, 103, 99], 0.01).passed);
        assert!(!chi_squared_uniform(&[10, 50, 100, 200], 0.01).passed);
    }

    #[test]
    fn runs_test_flags_blocks_and_alternation() {
        let blocks: Vec<bool> = (0..200).map(|i| i < 100).collect();
        assert!(!runs_test(&blocks, 0.01).passed);
        let alternating: Vec<bool> = (0..200).map(|i| i % 2 == 0).collect();
        assert!(!runs_test(&alternating, 0.01).passed);
    }
}
