use crate::error::{Error, Result};

/// Least-squares slope of `log y` against `log x`. Points with a
/// non-positive or non-finite coordinate are dropped.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::TooFewPoints(logs.len()));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidGrid("all x values coincide".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_line() {
        let s = fit_loglog_slope(&[(1.0, 1.0), (0.01, 0.1)]).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scale_invariance() {
        for c in [1e-6, 0.3, 7.0, 1e9] {
            let pts: Vec<_> = [1.0, 0.1, 0.01, 1e-3].iter().map(|&x| (x, c * x)).collect();
            assert!((fit_loglog_slope(&pts).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_power_law() {
        let pts: Vec<_> = (0..4)
            .map(|k| 10f64.powi(-k))
            .map(|x| (x, x.powf(0.75)))
            .collect();
        assert!((fit_loglog_slope(&pts).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn drops_non_positive_points() {
        assert!(matches!(
            fit_loglog_slope(&[(1.0, 0.0), (0.1, 1.0), (-1.0, 2.0)]),
            Err(Error::TooFewPoints(1))
        ));
        let s = fit_loglog_slope(&[(1.0, 1.0), (0.1, 0.0), (0.01, 0.01)]).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
    }
}
