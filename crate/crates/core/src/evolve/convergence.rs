use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed orders from successive refinements by a factor 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// RMS differences between consecutive levels, coarse first.
    pub differences: Vec<f64>,
    /// `log₂(e_k / e_{k+1})`.
    pub orders: Vec<f64>,
    /// True when the differences shrink monotonically.
    pub monotone: bool,
}

/// Self-convergence order from a series sampled at `h, h/2, h/4, …`.
///
/// Each level must already be restricted to the coarsest nodes; all levels
/// therefore have equal length.
pub fn convergence_order(levels: &[Vec<f64>]) -> Result<ConvergenceReport> {
    if levels.len() < 3 {
        return Err(Error::Convergence(format!("need at least 3 levels, got {}", levels.len())));
    }
    let n = levels[0].len();
    if n == 0 || levels.iter().any(|l| l.len() != n) {
        return Err(Error::Convergence("levels sampled on different nodes".into()));
    }
    let differences: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            let ss: f64 = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).powi(2)).sum();
            (ss / n as f64).sqrt()
        })
        .collect();
    if differences.iter().any(|d| !d.is_finite() || *d == 0.0) {
        return Err(Error::Convergence(format!(
            "degenerate differences {differences:?}; identical or non-finite levels"
        )));
    }
    let orders: Vec<f64> = differences.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let monotone = differences.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceReport { differences, orders, monotone })
}

/// Every `factor`-th entry of a node-major series with `stride` values per node.
pub fn restrict(values: &[f64], stride: usize, factor: usize) -> Vec<f64> {
    values
        .chunks(stride)
        .step_by(factor)
        .flatten()
        .copied()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_sequence() {
        let exact = |x: f64| x.sin();
        let levels: Vec<Vec<f64>> = [1.0, 0.5, 0.25]
            .iter()
            .map(|h: &f64| (0..10).map(|i| exact(i as f64) + h * h * (i as f64).cos()).collect())
            .collect();
        let rep = convergence_order(&levels).unwrap();
        assert!((rep.orders[0] - 2.0).abs() < 1e-12);
        assert!(rep.monotone);
    }

    #[test]
    fn identical_levels_are_degenerate() {
        let l = vec![vec![1.0, 2.0]; 3];
        assert!(matches!(convergence_order(&l), Err(Error::Convergence(_))));
    }

    #[test]
    fn mismatched_levels_rejected() {
        let l = vec![vec![1.0, 2.0], vec![1.0], vec![1.0, 2.0]];
        assert!(convergence_order(&l).is_err());
        assert!(convergence_order(&l[..2]).is_err());
    }

    #[test]
    fn restriction_keeps_coarse_nodes() {
        let v: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(restrict(&v, 2, 2), vec![0.0, 1.0, 4.0, 5.0, 8.0, 9.0]);
    }
}
