//! The block-sum inequality that selects `k₀` for the case split.
//!
//! For `k ≥ k₀` and every `n` in range it requires
//! `ln Σ_{m=k}^{n+k} p_m / ln Σ_{m=k−1}^{n+k+1} r_m ≤ (1+δ)/(α−δ) + η`.

use rayon::prelude::*;

use crate::measures::DigitMeasure;
use crate::partition::PartitionSpec;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IneqParams {
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
}

impl IneqParams {
    /// Requires `α > 1`, `0 < δ < min(1/3, (α−1)/(α+1))` and `0 < η < 1/2`.
    pub fn new(alpha: f64, delta: f64, eta: f64) -> Result<IneqParams> {
        if alpha.is_nan() || alpha <= 1.0 || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} must be a finite value > 1"
            )));
        }
        let delta_max = (1.0f64 / 3.0).min((alpha - 1.0) / (alpha + 1.0));
        if !(delta > 0.0 && delta < delta_max) {
            return Err(Error::InvalidParameter(format!(
                "delta = {delta} must lie in (0, {delta_max})"
            )));
        }
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::InvalidParameter(format!("eta = {eta} must lie in (0, 1/2)")));
        }
        Ok(IneqParams { alpha, delta, eta })
    }

    pub fn rhs(&self) -> f64 {
        (1.0 + self.delta) / (self.alpha - self.delta) + self.eta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IneqReport {
    pub k0: u64,
    pub rhs: f64,
    /// Largest left-hand side over `k ≥ k₀` and the full `n` range.
    pub max_lhs: f64,
    /// `(k, max_n LHS)` for every scanned `k`.
    pub per_k: Vec<(u64, f64)>,
}

/// Scans `k ∈ [k_lo, k_hi]`, `n ∈ [n_lo, n_hi]` and returns the smallest `k₀`
/// such that the inequality holds for every scanned `k ≥ k₀`.
pub fn ineqsums_check(
    params: IneqParams,
    k_range: (u64, u64),
    n_range: (u64, u64),
    measure: &DigitMeasure,
    partition: &PartitionSpec,
) -> Result<IneqReport> {
    let (k_lo, k_hi) = k_range;
    let (n_lo, n_hi) = n_range;
    if k_lo < 2 || k_hi < k_lo {
        return Err(Error::InvalidParameter(format!(
            "k range [{k_lo}, {k_hi}] must satisfy 2 <= k_lo <= k_hi"
        )));
    }
    if n_hi < n_lo {
        return Err(Error::InvalidParameter(format!("n range [{n_lo}, {n_hi}] is empty")));
    }
    let top = k_hi
        .checked_add(n_hi)
        .and_then(|t| t.checked_add(1))
        .filter(|&t| t <= 1 << 28)
        .ok_or_else(|| Error::InvalidParameter("k_hi + n_hi is too large to tabulate".into()))?;
    // Index m holds the m-th value; index 0 is unused.
    let tabulate = |f: &dyn Fn(u64) -> Result<f64>| -> Result<Vec<f64>> {
        std::iter::once(Ok(0.0))
            .chain((1..=top).map(|m| f(m).map(f64::exp)))
            .collect()
    };
    let p = tabulate(&|m| measure.log_p_at(m))?;
    let r = tabulate(&|m| partition.log_r_at(m))?;

    let per_k: Vec<(u64, f64)> = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let (k, n0) = (k as usize, n_lo as usize);
            let mut sp: f64 = p[k..=k + n0].iter().sum();
            let mut sr: f64 = r[k - 1..=k + n0 + 1].iter().sum();
            let mut worst = f64::NEG_INFINITY;
            for n in n0..=n_hi as usize {
                worst = worst.max(sp.ln() / sr.ln());
                if n < n_hi as usize {
                    sp += p[k + n + 1];
                    sr += r[k + n + 2];
                }
            }
            (k as u64, worst)
        })
        .collect();

    let rhs = params.rhs();
    let holds = per_k.iter().rev().take_while(|(_, lhs)| *lhs <= rhs).count();
    if holds == 0 {
        let (worst_k, worst_lhs) =
            per_k
                .iter()
                .copied()
                .fold((k_lo, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        return Err(Error::NoK0Found {
            k_lo,
            k_hi,
            worst_k,
            worst_lhs,
        });
    }
    let first = per_k.len() - holds;
    let max_lhs = per_k[first..].iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(IneqReport {
        k0: per_k[first].0,
        rhs,
        max_lhs,
        per_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditions() {
        assert!(IneqParams::new(2.0, 0.1, 0.1).is_ok());
        assert!(IneqParams::new(2.0, 1.0 / 3.0, 0.1).is_err());
        assert!(IneqParams::new(1.5, 0.25, 0.1).is_err());
        assert!(IneqParams::new(2.0, 0.1, 0.5).is_err());
        assert!(IneqParams::new(1.0, 0.1, 0.1).is_err());
        let rhs = IneqParams::new(2.0, 0.1, 0.1).unwrap().rhs();
        assert!((rhs - (1.1 / 1.9 + 0.1)).abs() < 1e-15);
    }

    #[test]
    fn lhs_matches_direct_sums() {
        let m = DigitMeasure::log_square();
        let g = PartitionSpec::gauss();
        let params = IneqParams::new(2.0, 0.3, 0.45).unwrap();
        let report = ineqsums_check(params, (2, 6), (1, 30), &m, &g);
        let direct = |k: u64| {
            (1..=30u64)
                .map(|n| {
                    let sp: f64 = (k..=n + k).map(|j| m.log_p_at(j).unwrap().exp()).sum();
                    let sr: f64 = (k - 1..=n + k + 1).map(|j| 1.0 / (j * (j + 1)) as f64).sum();
                    sp.ln() / sr.ln()
                })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let per_k = match report {
            Ok(r) => r.per_k,
            Err(Error::NoK0Found { worst_k, worst_lhs, .. }) => {
                assert!((worst_lhs - direct(worst_k)).abs() < 1e-12);
                return;
            }
            Err(e) => panic!("{e}"),
        };
        for (k, lhs) in per_k {
            assert!((lhs - direct(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_on_gauss_has_no_k0() {
        // Exponentially small masses against polynomial lengths push the LHS
        // far above the bound for every k, so no k0 exists.
        let m = DigitMeasure::geometric(0.5).unwrap();
        let g = PartitionSpec::gauss();
        let params = IneqParams::new(2.0, 0.1, 0.1).unwrap();
        assert!(matches!(
            ineqsums_check(params, (2, 50), (1, 100), &m, &g),
            Err(Error::NoK0Found { .. })
        ));
    }

    #[test]
    fn rejects_bad_ranges() {
        let m = DigitMeasure::log_square();
        let g = PartitionSpec::gauss();
        let params = IneqParams::new(2.0, 0.1, 0.1).unwrap();
        assert!(ineqsums_check(params, (1, 5), (1, 5), &m, &g).is_err());
        assert!(ineqsums_check(params, (5, 4), (1, 5), &m, &g).is_err());
        assert!(ineqsums_check(params, (2, 5), (6, 5), &m, &g).is_err());
    }
}
