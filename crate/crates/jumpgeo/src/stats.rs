//! Monte Carlo summary statistics: z-tests and Kolmogorov–Smirnov checks.

use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of a mean-zero z-test over replica terminal values.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZTestReport {
    pub n: usize,
    pub mean: f64,
    pub std_error: f64,
    /// mean / (sd/√n); 0 when the sample is degenerate (sd = 0).
    pub z: f64,
    /// Set when sd = 0 and the z-score is 0/0; reported as 0 by convention.
    pub degenerate: bool,
}

/// Sample mean and standard error.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// z-test of H₀: E[X] = 0 on ≥ 30 replicas.
pub fn z_test(samples: &[f64]) -> Result<ZTestReport> {
    if samples.len() < 30 {
        return Err(Error::InvalidParameter(format!(
            "z-test needs at least 30 replicas, got {}",
            samples.len()
        )));
    }
    let (mean, se) = mean_se(samples);
    if se == 0.0 {
        return Ok(ZTestReport {
            n: samples.len(),
            mean,
            std_error: 0.0,
            z: 0.0,
            degenerate: true,
        });
    }
    Ok(ZTestReport {
        n: samples.len(),
        mean,
        std_error: se,
        z: mean / se,
        degenerate: false,
    })
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against the CDF `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS sample"));
    let n = sorted.len() as f64;
    let mut sup = 0.0_f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - f).abs());
    }
    sup
}

/// Critical KS value at the 1% level, asymptotic form c(0.01)/√n with
/// c(0.01) = 1.63.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}
