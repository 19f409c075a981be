//! Two-sample and one-sample t statistics.

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p_two_sided: f64,
}

impl TTest {
    fn from_t(t: f64, df: f64) -> Option<TTest> {
        if !(t.is_finite() && df > 0.0 && df.is_finite()) {
            return None;
        }
        let dist = StudentsT::new(0.0, 1.0, df).ok()?;
        let p_two_sided = 2.0 * (1.0 - dist.cdf(t.abs()));
        Some(TTest { t, df, p_two_sided })
    }

    /// One-sided p-value for the alternative "statistic is greater than zero".
    pub fn p_greater(&self) -> f64 {
        let dist = StudentsT::new(0.0, 1.0, self.df).expect("df validated on construction");
        1.0 - dist.cdf(self.t)
    }
}

/// Welch's unequal-variance t test of `mean(a) - mean(b)`.
///
/// `None` when either sample has fewer than two values or both variances
/// vanish.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Option<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    let se2 = va + vb;
    if se2 <= 0.0 {
        return None;
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    TTest::from_t(t, df)
}

/// One-sample t test of `mean(xs) - 0`.
pub fn one_sample_t_test(xs: &[f64]) -> Option<TTest> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let se = (variance(xs) / n).sqrt();
    if se <= 0.0 {
        return None;
    }
    TTest::from_t(mean(xs) / se, n - 1.0)
}
