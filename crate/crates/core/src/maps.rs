//! Cylinder geometry under the piecewise-linear model and the Gauss map.
//!
//! In the piecewise-linear model each branch is affine, so `|I(a_1…a_n)|` is
//! exactly `Π r_{a_k}`. For the Gauss map `|I(a_1…a_n)| = 1/(q_n(q_n + q_{n−1}))`
//! with continuants `q_n = a_n q_{n−1} + q_{n−2}`, tracked in log space.

use std::f64::consts::LN_2;

use crate::digit::Digit;
use crate::numeric::log_add_exp;
use crate::partition::PartitionSpec;
use crate::{Error, Result};

/// Largest continuant depth accepted by [`ContinuantState::advance`].
pub const MAX_CONTINUANT_DEPTH: u64 = 1_000_000;

/// Per-level distortion constant `D₁` of the Gauss map.
pub const D1: f64 = LN_2;
/// Additive distortion constant `D₂` of the Gauss map.
pub const D2: f64 = LN_2;

#[derive(Clone, Copy, Debug)]
pub enum MapModel<'a> {
    PiecewiseLinear(&'a PartitionSpec),
    GaussMap,
}

/// `(ln q_{n−1}, ln q_n)` after `depth = n` digits, starting from `q_{−1} = 0`, `q_0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuantState {
    pub log_q_prev: f64,
    pub log_q_curr: f64,
    pub depth: u64,
}

impl Default for ContinuantState {
    fn default() -> Self {
        ContinuantState {
            log_q_prev: f64::NEG_INFINITY,
            log_q_curr: 0.0,
            depth: 0,
        }
    }
}

fn exact_digit(d: &Digit) -> Result<u64> {
    d.exact_value().ok_or(Error::ExactDigitRequired {
        log_value: d.log_value(),
    })
}

impl ContinuantState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Continuants after the digits `digits`.
    pub fn from_digits(digits: &[Digit]) -> Result<Self> {
        let mut s = Self::new();
        for d in digits {
            s.advance(d)?;
        }
        Ok(s)
    }

    /// `ln q_n = ln a_n + ln q_{n−1} + ln(1 + q_{n−2}/(a_n q_{n−1}))`.
    pub fn advance(&mut self, d: &Digit) -> Result<()> {
        exact_digit(d)?;
        self.advance_asymptotic(d)
    }

    /// As [`advance`](Self::advance), but log-only digits enter through `ln a`.
    /// The correction term is below `1/a`, so the result keeps the precision of `ln a`.
    pub fn advance_asymptotic(&mut self, d: &Digit) -> Result<()> {
        if self.depth >= MAX_CONTINUANT_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "continuant depth capped at {MAX_CONTINUANT_DEPTH}"
            )));
        }
        let lead = d.log_value() + self.log_q_curr;
        let next = lead + (self.log_q_prev - lead).exp().ln_1p();
        self.log_q_prev = self.log_q_curr;
        self.log_q_curr = next;
        self.depth += 1;
        Ok(())
    }

    /// `ln |I(a_1…a_n)| = −ln q_n − ln(q_n + q_{n−1})`.
    pub fn cylinder_log_length(&self) -> f64 {
        -self.log_q_curr - log_add_exp(self.log_q_curr, self.log_q_prev)
    }

    /// `ln(k q_n + q_{n−1})`, the continuant after appending digit `k`.
    fn log_extended(&self, k: u64) -> f64 {
        log_add_exp((k as f64).ln() + self.log_q_curr, self.log_q_prev)
    }
}

/// `ln |I(a_1…a_n)|`; 0 for the empty word.
pub fn cyl_log_length(model: MapModel<'_>, digits: &[Digit]) -> Result<f64> {
    match model {
        MapModel::PiecewiseLinear(p) => digits.iter().map(|d| p.log_r(d)).sum(),
        MapModel::GaussMap => Ok(ContinuantState::from_digits(digits)?.cylinder_log_length()),
    }
}

/// `ln |⋃_{m=start}^{end} I(prefix, m)|`, the infinite union when `end` is absent.
pub fn union_log_length(model: MapModel<'_>, prefix: &[Digit], start: &Digit, end: Option<&Digit>) -> Result<f64> {
    if let Some(e) = end {
        if e.cmp_value(start).is_lt() {
            return Err(Error::InvalidRange {
                start: start.to_string(),
                end: e.to_string(),
            });
        }
    }
    match model {
        MapModel::PiecewiseLinear(p) => Ok(cyl_log_length(model, prefix)? + p.log_range_r(start, end)?),
        MapModel::GaussMap => {
            // The union over a_n in [s, e] has length (e+1−s)/(Q_s Q_{e+1}),
            // Q_k = k q_{n−1} + q_{n−2}; the infinite union has length 1/(Q_s q_{n−1}).
            let state = ContinuantState::from_digits(prefix)?;
            let s = exact_digit(start)?;
            let q_s = state.log_extended(s);
            match end {
                None => Ok(-q_s - state.log_q_curr),
                Some(e) => {
                    let e = exact_digit(e)?;
                    Ok(((e + 1 - s) as f64).ln() - q_s - state.log_extended(e + 1))
                }
            }
        }
    }
}

/// The sibling cylinders of `I(prefix)`: last digit plus one (always present)
/// and last digit minus one (absent when it is 1).
pub fn neighbor_cylinders(prefix: &[Digit]) -> Result<(Vec<Digit>, Option<Vec<Digit>>)> {
    let (last, head) = prefix
        .split_last()
        .ok_or_else(|| Error::InvalidParameter("neighbor cylinders need a non-empty prefix".into()))?;
    let with = |d: Digit| {
        let mut v = head.to_vec();
        v.push(d);
        v
    };
    Ok((with(last.succ()), last.pred().map(with)))
}

/// `|ln |I|_Gauss − ln |I|_PL|` for the Gauss map against its own partition.
pub fn distortion_residual(digits: &[Digit]) -> Result<f64> {
    let mut state = ContinuantState::new();
    let mut linear = 0.0;
    for d in digits {
        state.advance(d)?;
        linear -= d.log_value() + d.log_succ_value();
    }
    Ok((state.cylinder_log_length() - linear).abs())
}

/// The admissible residual `n D₁ + D₂` at depth `n`.
pub fn distortion_bound(depth: usize) -> f64 {
    depth as f64 * D1 + D2
}
