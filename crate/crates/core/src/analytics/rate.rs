//! Small-time convergence rates from log-log regression.

use crate::error::{LevyxError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub slope: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub intercept: f64,
    /// `(τ, |error|)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares slope of `ln err` against `ln τ`.
pub fn log_log_slope(taus: &[f64], errors: &[f64]) -> Result<RateEstimate> {
    if taus.len() != errors.len() || taus.len() < 3 {
        return Err(LevyxError::Inconclusive(format!(
            "need at least three matching points, got {} maturities and {} errors",
            taus.len(),
            errors.len()
        )));
    }
    if let Some((t, e)) = taus.iter().zip(errors).find(|(t, e)| !(**t > 0.0 && **e > 0.0)) {
        return Err(LevyxError::Inconclusive(format!("non-positive point ({t}, {e})")));
    }
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if xs.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(RateEstimate {
        slope,
        stderr,
        intercept,
        points: taus.iter().copied().zip(errors.iter().copied()).collect(),
    })
}

/// Error slope of an approximation against a reference over a maturity
/// grid. `reference` returns the value and its own uncertainty; a point
/// whose error is not at least three times that uncertainty makes the study
/// inconclusive.
pub fn rate_study(
    taus: &[f64],
    mut approx: impl FnMut(f64) -> Result<f64>,
    mut reference: impl FnMut(f64) -> Result<(f64, f64)>,
) -> Result<RateEstimate> {
    let mut errors = Vec::with_capacity(taus.len());
    for &tau in taus {
        let a = approx(tau)?;
        let (r, noise) = reference(tau)?;
        let err = (a - r).abs();
        if !(err > 3.0 * noise) {
            return Err(LevyxError::Inconclusive(format!(
                "at tau = {tau} the error {err:e} is within reference noise {noise:e}"
            )));
        }
        errors.push(err);
    }
    log_log_slope(taus, &errors)
}

/// `2^{-k}` for `k` in `first..=last`.
pub fn dyadic(first: i32, last: i32) -> Vec<f64> {
    (first..=last).map(|k| 2f64.powi(-k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_law() {
        let taus = dyadic(2, 8);
        let errs: Vec<f64> = taus.iter().map(|t| 3.0 * t.powf(1.5)).collect();
        let r = log_log_slope(&taus, &errs).unwrap();
        assert_abs_diff_eq!(r.slope, 1.5, epsilon = 1e-12);
        assert!(r.stderr < 1e-12);
    }

    #[test]
    fn noise_makes_it_inconclusive() {
        let taus = dyadic(1, 4);
        let err = rate_study(&taus, Ok, |t| Ok((t + 1e-3, 1e-2))).unwrap_err();
        assert!(matches!(err, LevyxError::Inconclusive(_)));
    }
}
