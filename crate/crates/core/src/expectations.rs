//! AR(1) estimation and one-step-ahead forecasts.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Estimate {
    pub alpha: f64,
    pub beta: f64,
    /// Residual standard deviation.
    pub sigma: f64,
    pub n_obs: usize,
}

/// OLS fit of `x_t = alpha + beta * x_{t-1}` over consecutive pairs.
///
/// When the lagged regressor has zero variance the slope is unidentified;
/// the fit then returns `beta = 0` and `alpha = mean(series)`.
pub fn ar1_fit(series: &[f64]) -> Result<Ar1Estimate> {
    if series.len() < 3 {
        return Err(Error::Validation(format!(
            "AR(1) fit needs at least 3 observations, got {}",
            series.len()
        )));
    }
    if let Some(i) = series.iter().position(|x| !x.is_finite()) {
        return Err(Error::Validation(format!(
            "AR(1) fit: non-finite value at index {i}"
        )));
    }
    let lagged = &series[..series.len() - 1];
    let current = &series[1..];
    let n = lagged.len() as f64;
    let mean_x = lagged.iter().sum::<f64>() / n;
    let mean_y = current.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&x, &y) in lagged.iter().zip(current) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }

    // relative zero-variance test, so constant series of any magnitude qualify
    let scale = lagged.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let (alpha, beta) = if sxx <= (1e-14 * scale).powi(2) * n {
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        (mean, 0.0)
    } else {
        let beta = sxy / sxx;
        (mean_y - beta * mean_x, beta)
    };

    let ssr: f64 = lagged
        .iter()
        .zip(current)
        .map(|(&x, &y)| {
            let e = y - alpha - beta * x;
            e * e
        })
        .sum();
    let dof = if n > 2.0 { n - 2.0 } else { n };
    Ok(Ar1Estimate {
        alpha,
        beta,
        sigma: (ssr / dof).sqrt(),
        n_obs: lagged.len(),
    })
}

/// Point forecast `alpha + beta * last`. Noise is the caller's business.
pub fn ar1_forecast(est: &Ar1Estimate, last: f64) -> f64 {
    est.alpha + est.beta * last
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn recurrence(alpha: f64, beta: f64, x0: f64, len: usize) -> Vec<f64> {
        let mut out = vec![x0];
        for _ in 1..len {
            let last = *out.last().unwrap();
            out.push(alpha + beta * last);
        }
        out
    }

    #[test]
    fn constant_series_is_degenerate() {
        let est = ar1_fit(&[5.0; 5]).unwrap();
        assert_eq!(est.alpha, 5.0);
        assert_eq!(est.beta, 0.0);
        assert_eq!(est.sigma, 0.0);
        assert_eq!(est.n_obs, 4);
    }

    #[test]
    fn noiseless_recurrence_is_recovered() {
        let est = ar1_fit(&recurrence(1.0, 0.5, 4.0, 10)).unwrap();
        assert!((est.alpha - 1.0).abs() < 1e-9);
        assert!((est.beta - 0.5).abs() < 1e-9);
    }

    #[test]
    fn alternating_series() {
        let est = ar1_fit(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!((est.beta + 1.0).abs() < 1e-9);
        assert!((est.alpha - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_short_or_nonfinite() {
        assert!(ar1_fit(&[1.0, 2.0]).is_err());
        assert!(ar1_fit(&[1.0, f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn forecast_examples() {
        let est = |alpha, beta| Ar1Estimate { alpha, beta, sigma: 0.0, n_obs: 2 };
        assert_eq!(ar1_forecast(&est(5.0, 0.0), 123.0), 5.0);
        assert_eq!(ar1_forecast(&est(1.0, 0.5), 4.0), 3.0);
        assert_eq!(ar1_forecast(&est(0.0, 1.0), 7.0), 7.0);
    }

    #[test]
    fn forecast_is_affine() {
        let est = Ar1Estimate { alpha: 0.3, beta: -0.7, sigma: 0.1, n_obs: 9 };
        let base = ar1_forecast(&est, 0.0);
        for a in [0.5, 2.0, -3.0] {
            let d = ar1_forecast(&est, a * 1.5) - base;
            assert!((d - a * (ar1_forecast(&est, 1.5) - base)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn recovers_generating_coefficients(
            alpha in -5.0f64..5.0,
            beta in -0.95f64..0.95,
            x0 in -20.0f64..20.0,
        ) {
            let series = recurrence(alpha, beta, x0, 12);
            let fixed_point = alpha / (1.0 - beta);
            // a start at the fixed point gives a constant series with no slope information
            prop_assume!((x0 - fixed_point).abs() > 1.0);
            let est = ar1_fit(&series).unwrap();
            prop_assert!((est.alpha - alpha).abs() < 1e-8, "{:?}", est);
            prop_assert!((est.beta - beta).abs() < 1e-8, "{:?}", est);
        }

        #[test]
        fn fit_is_shift_equivariant(
            series in prop::collection::vec(-10.0f64..10.0, 6..30),
            c in -50.0f64..50.0,
        ) {
            let base = ar1_fit(&series).unwrap();
            prop_assume!(base.beta != 0.0);
            let shifted: Vec<f64> = series.iter().map(|x| x + c).collect();
            let est = ar1_fit(&shifted).unwrap();
            prop_assert!((est.beta - base.beta).abs() < 1e-8);
            prop_assert!((est.alpha - (base.alpha + c * (1.0 - base.beta))).abs() < 1e-8);
        }
    }
}
