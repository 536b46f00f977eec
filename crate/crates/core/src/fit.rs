//! Ordinary least squares for log–log exponent fits.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares line through `(x, y)` pairs.
pub fn ols(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateFit(format!("{n} point(s); need at least 2")));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        points: n,
    })
}

/// Slope of `log |y|` against `log x`, skipping pairs with `y = 0`.
///
/// Returns the fit and the number of skipped pairs. Fails when fewer than
/// two pairs remain.
pub fn loglog_fit(pairs: &[(f64, f64)]) -> Result<(LineFit, usize)> {
    let logs: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|p| p.1 != 0.0 && p.0 > 0.0)
        .map(|p| (p.0.ln(), p.1.abs().ln()))
        .collect();
    let skipped = pairs.len() - logs.len();
    Ok((ols(&logs)?, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = ols(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
    }

    #[test]
    fn power_law() {
        let pairs: Vec<(f64, f64)> = (0..8).map(|i| {
            let x = 10f64.powf(3.0 + i as f64 / 2.0);
            (x, 3.0 * x.sqrt())
        }).collect();
        let (f, skipped) = loglog_fit(&pairs).unwrap();
        assert_eq!(skipped, 0);
        assert!((f.slope - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate() {
        assert!(ols(&[(1.0, 1.0)]).is_err());
        assert!(ols(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(loglog_fit(&[(10.0, 0.0), (100.0, 0.0), (1000.0, 1.0)]).is_err());
    }
}
