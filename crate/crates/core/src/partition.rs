//! Branch lengths `r_n = |I(n)|` of the Markov partition and their tails
//! `R_n = Σ_{m≥n} r_m`, with `I(n) = [R_{n+1}, R_n]`.

use std::fmt;

use crate::digit::{Digit, DEFAULT_N_TABLE};
use crate::numeric::linear_fit;
use crate::sequence::{Law, Sequence, TailRule};
use crate::{Error, Result};

/// Tolerance per unit of `ln n` for [`PartitionSpec::tail_asymptotic_check`].
pub const TAIL_CHECK_TOL: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq)]
pub enum PartitionKind {
    /// `I(n) = [1/(n+1), 1/n]`, the branches of the Gauss map.
    Gauss,
    /// `r_n = n^-α / ζ(α)`.
    PowerLaw { alpha: f64 },
    /// Explicit lengths with an optional analytic continuation.
    Table { len: usize, tail: Option<TailRule> },
}

impl fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionKind::Gauss => write!(f, "gauss"),
            PartitionKind::PowerLaw { alpha } => write!(f, "powerlaw:{alpha}"),
            PartitionKind::Table { len, tail: Some(t) } => write!(f, "table[{len}];tail={t}"),
            PartitionKind::Table { len, tail: None } => write!(f, "table[{len}]"),
        }
    }
}

/// Result of [`PartitionSpec::tail_asymptotic_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct TailCheck {
    pub alpha: f64,
    /// Minimax constant `C` in `ln R_n ≈ C − (α−1) ln n`.
    pub constant: f64,
    /// `max |ln R_n + (α−1) ln n − C|` over the range.
    pub max_residual: f64,
    /// Least-squares slope of `−ln R_n` against `ln n`; close to `α − 1`.
    pub fitted_slope: f64,
    pub pass: bool,
}

/// The partition `{I(n)}` of a Gauss-like map.
#[derive(Clone, Debug)]
pub struct PartitionSpec {
    kind: PartitionKind,
    seq: Sequence,
}

impl PartitionSpec {
    pub fn gauss() -> PartitionSpec {
        Self::gauss_with_table(DEFAULT_N_TABLE).expect("default Gauss partition is valid")
    }

    pub fn gauss_with_table(n_table: u64) -> Result<PartitionSpec> {
        Ok(PartitionSpec {
            kind: PartitionKind::Gauss,
            seq: Sequence::analytic(Law::Gauss, 0.0, n_table)?,
        })
    }

    pub fn power_law(alpha: f64) -> Result<PartitionSpec> {
        Self::power_law_with_table(alpha, DEFAULT_N_TABLE)
    }

    pub fn power_law_with_table(alpha: f64, n_table: u64) -> Result<PartitionSpec> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power-law exponent must exceed 1, got {alpha}"
            )));
        }
        let law = Law::Zeta(alpha);
        let log_zeta = law.log_tail(&Digit::exact(1));
        Ok(PartitionSpec {
            kind: PartitionKind::PowerLaw { alpha },
            seq: Sequence::analytic(law, -log_zeta, n_table)?,
        })
    }

    /// Partition from explicit lengths `r_1, …, r_N`. With a tail rule the
    /// lengths plus the continued tail must sum to 1.
    pub fn from_table(values: &[f64], tail: Option<TailRule>, n_table: u64) -> Result<PartitionSpec> {
        Ok(PartitionSpec {
            kind: PartitionKind::Table {
                len: values.len(),
                tail,
            },
            seq: Sequence::table(values, tail, 1.0, n_table)?,
        })
    }

    pub fn kind(&self) -> &PartitionKind {
        &self.kind
    }

    pub fn n_table(&self) -> u64 {
        self.seq.n_table()
    }

    /// Fitted `(K, K')` with `K <= r_{n+1}/r_n <= K'` over the cached head.
    pub fn ratio_bounds(&self) -> (f64, f64) {
        self.seq.ratio_bounds()
    }

    /// Polynomial decay exponent `α`, when the family determines one.
    pub fn alpha(&self) -> Option<f64> {
        match &self.kind {
            PartitionKind::Gauss => Some(2.0),
            PartitionKind::PowerLaw { alpha } => Some(*alpha),
            PartitionKind::Table {
                tail: Some(TailRule::PowerLaw { exponent }),
                ..
            } => Some(*exponent),
            PartitionKind::Table { .. } => None,
        }
    }

    pub fn sequence(&self) -> &Sequence {
        &self.seq
    }

    /// `ln r_a`.
    pub fn log_r(&self, d: &Digit) -> Result<f64> {
        self.seq.log_term(d)
    }

    /// `ln r_n` for an exact index.
    pub fn log_r_at(&self, n: u64) -> Result<f64> {
        self.seq.log_term_at(n)
    }

    /// `ln R_a`.
    pub fn log_tail_r(&self, d: &Digit) -> Result<f64> {
        self.seq.log_tail(d)
    }

    /// `ln Σ_{m=start}^{end} r_m`; the tail from `start` when `end` is absent.
    pub fn log_range_r(&self, start: &Digit, end: Option<&Digit>) -> Result<f64> {
        self.seq.log_range(start, end)
    }

    /// The digit `n` with `R_{n+1} <= v < R_n`.
    pub fn invert_log_tail(&self, log_v: f64) -> Result<Digit> {
        self.seq.invert_log_tail(log_v)
    }

    /// Convergence exponent `s∞ = inf{s : Σ r_n^s < ∞}`.
    ///
    /// Polynomial families give `1/α`. A table without a tail rule is fitted by
    /// least squares over its top decade; exponential decay gives 0.
    pub fn convergence_exponent(&self) -> Result<f64> {
        if let Some(alpha) = self.alpha() {
            return Ok(1.0 / alpha);
        }
        match &self.kind {
            PartitionKind::Table {
                tail: Some(TailRule::LogSquare),
                ..
            } => Ok(1.0),
            PartitionKind::Table {
                tail: Some(TailRule::Geometric { .. } | TailRule::Finite),
                ..
            } => Ok(0.0),
            PartitionKind::Table { len, tail: None } => self.fit_convergence_exponent(*len),
            _ => unreachable!("polynomial families handled above"),
        }
    }

    fn fit_convergence_exponent(&self, len: usize) -> Result<f64> {
        if len < 20 {
            return Err(Error::EstimationFailed(format!(
                "table of length {len} is too short to fit a decay exponent (need 20)"
            )));
        }
        let lo = (len / 10).max(1);
        let ns: Vec<u64> = (lo as u64..=len as u64).collect();
        let ys: Vec<f64> = ns.iter().map(|&n| self.log_r_at(n)).collect::<Result<_>>()?;
        let log_ns: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let lin_ns: Vec<f64> = ns.iter().map(|&n| n as f64).collect();

        let residual = |xs: &[f64]| {
            let (m, b) = linear_fit(xs, &ys);
            let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - m * x - b).powi(2)).sum();
            (m, ss)
        };
        let (power_slope, power_ss) = residual(&log_ns);
        let (exp_slope, exp_ss) = residual(&lin_ns);
        if exp_slope < 0.0 && exp_ss < power_ss {
            return Ok(0.0);
        }
        let alpha = -power_slope;
        if alpha.is_nan() || alpha <= 1.0 {
            return Err(Error::EstimationFailed(format!(
                "fitted decay exponent {alpha:.4} over n in [{lo}, {len}] does not exceed 1"
            )));
        }
        Ok(1.0 / alpha)
    }

    /// Checks `ln R_n + (α−1) ln n ≈ C` on a logarithmic grid over `[n_lo, n_hi]`.
    pub fn tail_asymptotic_check(&self, n_lo: u64, n_hi: u64) -> Result<TailCheck> {
        if !self.seq.has_tail_rule() {
            return Err(Error::UnsupportedTailQuery {
                what: "tail",
                digit: n_lo.to_string(),
            });
        }
        if n_lo < 1 || n_hi <= n_lo || n_hi > self.n_table() {
            return Err(Error::InvalidParameter(format!(
                "tail check range [{n_lo}, {n_hi}] must satisfy 1 <= n_lo < n_hi <= N_table"
            )));
        }
        let alpha = self
            .alpha()
            .ok_or_else(|| Error::EstimationFailed("partition has no polynomial decay exponent".into()))?;
        let grid = log_grid(n_lo, n_hi, 256);
        let mut xs = Vec::with_capacity(grid.len());
        let mut tails = Vec::with_capacity(grid.len());
        for &n in &grid {
            xs.push((n as f64).ln());
            tails.push(self.log_tail_r(&Digit::exact(n))?);
        }
        let shifted: Vec<f64> = xs.iter().zip(&tails).map(|(x, t)| t + (alpha - 1.0) * x).collect();
        let max = shifted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = shifted.iter().copied().fold(f64::INFINITY, f64::min);
        let constant = 0.5 * (max + min);
        let max_residual = 0.5 * (max - min);
        let (slope, _) = linear_fit(&xs, &tails);
        let span = ((n_hi as f64) / (n_lo as f64)).ln();
        Ok(TailCheck {
            alpha,
            constant,
            max_residual,
            fitted_slope: -slope,
            pass: max_residual / span <= TAIL_CHECK_TOL,
        })
    }
}

/// Distinct integers spread logarithmically over `[lo, hi]`, both ends included.
pub(crate) fn log_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .map(|n| n.clamp(lo, hi))
        .collect();
    out.push(lo);
    out.push(hi);
    out.sort_unstable();
    out.dedup();
    out
}
