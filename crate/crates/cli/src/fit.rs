//! Growth-exponent fit: least squares of `ln a_n` on `ln n` over the tail
//! half of a sequence. Descriptive only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_TERMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("need at least {MIN_TERMS} terms to fit, got {0}")]
    TooFewTerms(usize),
    #[error("the tail of the sequence is constant; no growth to fit")]
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// 1-based index of the first term used.
    pub from_n: usize,
    pub to_n: usize,
    pub slope: f64,
    pub intercept: f64,
    /// `h + (h-1)/g`, when `h` and `g` are known.
    pub greedy_bound_exponent: Option<f64>,
    /// `h`, the counting lower bound.
    pub lower_exponent: Option<f64>,
    /// `2h - 1`, the classic greedy bound.
    pub classic_exponent: Option<f64>,
}

pub fn fit_exponent(terms: &[u64], hg: Option<(usize, usize)>) -> Result<ExponentFit, FitError> {
    if terms.len() < MIN_TERMS {
        return Err(FitError::TooFewTerms(terms.len()));
    }
    let start = terms.len() / 2;
    let tail = &terms[start..];
    if tail.windows(2).all(|w| w[0] == w[1]) {
        return Err(FitError::Degenerate);
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .map(|(i, &a)| (((start + i + 1) as f64).ln(), (a as f64).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(ExponentFit {
        from_n: start + 1,
        to_n: terms.len(),
        slope,
        intercept: my - slope * mx,
        greedy_bound_exponent: hg.map(|(h, g)| h as f64 + (h as f64 - 1.0) / g as f64),
        lower_exponent: hg.map(|(h, _)| h as f64),
        classic_exponent: hg.map(|(h, _)| 2.0 * h as f64 - 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_an_exact_power() {
        let terms: Vec<u64> = (1..=20u64).map(|n| n * n * n).collect();
        let fit = fit_exponent(&terms, Some((2, 1))).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);
        assert_eq!((fit.from_n, fit.to_n), (11, 20));
        assert_eq!(fit.greedy_bound_exponent, Some(3.0));
        assert_eq!(fit.lower_exponent, Some(2.0));
    }

    #[test]
    fn rejects_short_and_constant_input() {
        assert_eq!(fit_exponent(&[1, 2, 3], None), Err(FitError::TooFewTerms(3)));
        assert_eq!(fit_exponent(&[5; 10], None), Err(FitError::Degenerate));
    }
}
