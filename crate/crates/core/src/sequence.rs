//! Positive non-increasing sequences with summable tails, evaluated in log space.
//!
//! Branch lengths `r_n` and digit probabilities `p_n` share this machinery: a
//! short head of cached log-terms and log-tails, and an analytic law beyond it
//! that accepts exact and log-only digits alike.

use std::fmt;
use std::str::FromStr;

use crate::digit::Digit;
use crate::numeric::{log_diff_exp, log_sum_exp, CompensatedSum};
use crate::{Error, Result};

/// Number of leading terms cached for analytic families.
const HEAD_LEN: u64 = 1024;

/// Analytic tails below this index are summed term by term before the
/// Euler–Maclaurin remainder takes over.
const DIRECT_SUM_BELOW: u64 = 128;

/// Ranges shorter than this are summed term by term instead of differencing tails.
const SHORT_RANGE: u64 = 64;

/// Tolerance for normalization of tabulated sequences.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Tolerance for agreement of the exact and log-only evaluation paths at `N_table`.
pub const CROSSOVER_TOL: f64 = 1e-6;

/// Analytic continuation attached to an explicit table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailRule {
    /// `v_{n+1} = ratio * v_n` beyond the table.
    Geometric { ratio: f64 },
    /// `v_n ∝ n^-exponent` beyond the table.
    PowerLaw { exponent: f64 },
    /// `v_n ∝ 1/((n+1) ln²(n+1))` beyond the table.
    LogSquare,
    /// The table is the whole support.
    Finite,
}

impl fmt::Display for TailRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailRule::Geometric { ratio } => write!(f, "geometric:{ratio}"),
            TailRule::PowerLaw { exponent } => write!(f, "powerlaw:{exponent}"),
            TailRule::LogSquare => write!(f, "logsquare"),
            TailRule::Finite => write!(f, "none"),
        }
    }
}

impl FromStr for TailRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, param) = match s.split_once(':') {
            Some((f, p)) => (f.trim(), Some(p.trim())),
            None => (s, None),
        };
        let number = |p: Option<&str>| -> Result<f64> {
            p.ok_or_else(|| Error::InvalidSpec(format!("tail rule '{s}' needs a parameter")))?
                .parse::<f64>()
                .map_err(|_| Error::InvalidSpec(format!("bad tail parameter in '{s}'")))
        };
        let rule = match family {
            "geometric" => {
                let ratio = number(param)?;
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::InvalidSpec(format!(
                        "geometric ratio must lie in (0,1), got {ratio}"
                    )));
                }
                TailRule::Geometric { ratio }
            }
            "powerlaw" => {
                let exponent = number(param)?;
                if !(exponent > 1.0 && exponent.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "power-law exponent must exceed 1, got {exponent}"
                    )));
                }
                TailRule::PowerLaw { exponent }
            }
            "logsquare" if param.is_none() => TailRule::LogSquare,
            "none" | "finite" if param.is_none() => TailRule::Finite,
            _ => return Err(Error::InvalidSpec(format!("unknown tail rule '{s}'"))),
        };
        Ok(rule)
    }
}

/// Unnormalized analytic shapes, as functions of the digit `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Law {
    /// term `1/(n(n+1))`, tail `1/n`.
    Gauss,
    /// term `n^-β`, tail `ζ(β, n)`.
    Zeta(f64),
    /// term `q^n`, tail `q^n/(1-q)`.
    Geometric(f64),
    /// term `f(n+1)`, tail `F(n+1)` with `f(j) = 1/(j ln² j)` and `F(j) = Σ_{i≥j} f(i)`.
    LogSquare,
    /// Identically zero.
    Zero,
}

fn digit_as_f64(d: &Digit) -> f64 {
    match d.exact_value() {
        Some(n) => n as f64,
        None => d.log_value().exp(),
    }
}

/// `ln ζ(β, N)` by Euler–Maclaurin with `u = 1/N`; accurate for `N >= DIRECT_SUM_BELOW`.
fn zeta_tail_em(beta: f64, log_n: f64, u: f64) -> f64 {
    let b = beta;
    let corr =
        (b - 1.0) * u / 2.0 + b * (b - 1.0) * u * u / 12.0 - b * (b + 1.0) * (b + 2.0) * (b - 1.0) * u.powi(4) / 720.0;
    (1.0 - b) * log_n - (b - 1.0).ln() + corr.ln_1p()
}

fn zeta_log_tail(beta: f64, d: &Digit) -> f64 {
    match d.exact_value() {
        Some(n) if n < DIRECT_SUM_BELOW => {
            let mut s: CompensatedSum = (n..DIRECT_SUM_BELOW).map(|m| (m as f64).powf(-beta)).collect();
            let big = DIRECT_SUM_BELOW as f64;
            s.add(zeta_tail_em(beta, big.ln(), 1.0 / big).exp());
            s.value().ln()
        }
        Some(n) => zeta_tail_em(beta, (n as f64).ln(), 1.0 / n as f64),
        None => zeta_tail_em(beta, d.log_value(), (-d.log_value()).exp()),
    }
}

/// `ln F(j)` by Euler–Maclaurin with `λ = ln j`, `u = 1/j`.
fn log_square_tail_em(lambda: f64, u: f64) -> f64 {
    let l = lambda;
    let corr = u / (2.0 * l) + (l + 2.0) * u * u / (12.0 * l * l)
        - (3.0 * l.powi(3) + 11.0 * l * l + 18.0 * l + 12.0) * u.powi(4) / (360.0 * l.powi(4));
    -l.ln() + corr.ln_1p()
}

fn log_square_f(j: f64) -> f64 {
    let l = j.ln();
    1.0 / (j * l * l)
}

/// `ln F(j)` for the digit `j >= 2`.
fn log_square_log_tail(j: &Digit) -> f64 {
    match j.exact_value() {
        Some(j) if j < DIRECT_SUM_BELOW => {
            let mut s: CompensatedSum = (j..DIRECT_SUM_BELOW).map(|i| log_square_f(i as f64)).collect();
            let big = DIRECT_SUM_BELOW as f64;
            s.add(log_square_tail_em(big.ln(), 1.0 / big).exp());
            s.value().ln()
        }
        Some(j) => log_square_tail_em((j as f64).ln(), 1.0 / j as f64),
        None => log_square_tail_em(j.log_value(), (-j.log_value()).exp()),
    }
}

impl Law {
    pub(crate) fn log_term(self, d: &Digit) -> f64 {
        match self {
            Law::Gauss => -d.log_value() - d.log_succ_value(),
            Law::Zeta(beta) => -beta * d.log_value(),
            Law::Geometric(q) => digit_as_f64(d) * q.ln(),
            Law::LogSquare => {
                let lambda = d.log_succ_value();
                -lambda - 2.0 * lambda.ln()
            }
            Law::Zero => f64::NEG_INFINITY,
        }
    }

    pub(crate) fn log_tail(self, d: &Digit) -> f64 {
        match self {
            Law::Gauss => -d.log_value(),
            Law::Zeta(beta) => zeta_log_tail(beta, d),
            Law::Geometric(q) => digit_as_f64(d) * q.ln() - (-q).ln_1p(),
            Law::LogSquare => log_square_log_tail(&d.succ()),
            Law::Zero => f64::NEG_INFINITY,
        }
    }

    /// Approximate `ln n` at which the unnormalized log-tail equals `t`.
    fn guess_log_digit(self, t: f64) -> f64 {
        let l = match self {
            Law::Gauss => -t,
            Law::Zeta(beta) => (t + (beta - 1.0).ln()) / (1.0 - beta),
            Law::Geometric(q) => ((t + (-q).ln_1p()) / q.ln()).max(1.0).ln(),
            Law::LogSquare => (-t).exp(),
            Law::Zero => 0.0,
        };
        if l.is_finite() {
            l.max(0.0)
        } else {
            0.0
        }
    }
}

/// A law scaled by `exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Analytic {
    pub(crate) law: Law,
    pub(crate) log_scale: f64,
}

impl Analytic {
    fn log_term(&self, d: &Digit) -> f64 {
        self.log_scale + self.law.log_term(d)
    }

    fn log_tail(&self, d: &Digit) -> f64 {
        self.log_scale + self.law.log_tail(d)
    }
}

/// A positive non-increasing sequence `v_1 ≥ v_2 ≥ …` with tails `T_n = Σ_{m≥n} v_m`.
#[derive(Clone, Debug)]
pub struct Sequence {
    head_log_terms: Vec<f64>,
    /// `ln T_n` for `n = 1..=head+1`; absent for a table without a tail rule.
    head_log_tails: Option<Vec<f64>>,
    beyond: Option<Analytic>,
    n_table: u64,
    ratio_lo: f64,
    ratio_hi: f64,
}

impl Sequence {
    /// Sequence given entirely by an analytic law.
    pub(crate) fn analytic(law: Law, log_scale: f64, n_table: u64) -> Result<Sequence> {
        if n_table < 2 {
            return Err(Error::InvalidParameter(format!(
                "N_table must be at least 2, got {n_table}"
            )));
        }
        let a = Analytic { law, log_scale };
        let head = HEAD_LEN.min(n_table);
        let head_log_terms: Vec<f64> = (1..=head).map(|n| a.log_term(&Digit::exact(n))).collect();
        let head_log_tails: Vec<f64> = (1..=head + 1).map(|n| a.log_tail(&Digit::exact(n))).collect();

        let exact = Digit::exact(n_table);
        let approx = Digit::log_only(exact.log_value());
        let term_gap = (a.log_term(&exact) - a.log_term(&approx)).abs();
        let tail_gap = (a.log_tail(&exact) - a.log_tail(&approx)).abs();
        if term_gap > CROSSOVER_TOL || tail_gap > CROSSOVER_TOL {
            return Err(Error::InvalidSpec(format!(
                "exact and asymptotic evaluation disagree at N_table = {n_table} (term gap {term_gap:e}, tail gap {tail_gap:e})"
            )));
        }
        let (ratio_lo, ratio_hi) = ratio_bounds(&head_log_terms);
        Ok(Sequence {
            head_log_terms,
            head_log_tails: Some(head_log_tails),
            beyond: Some(a),
            n_table,
            ratio_lo,
            ratio_hi,
        })
    }

    /// Sequence given by explicit values `v_1, …, v_N` and an optional tail rule
    /// anchored at `v_N`. `total` is the required sum; tables without a tail rule
    /// only need to stay at or below it.
    pub(crate) fn table(values: &[f64], rule: Option<TailRule>, total: f64, n_table: u64) -> Result<Sequence> {
        if values.is_empty() {
            return Err(Error::InvalidSpec("empty table".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "table entry {} is not a positive number: {v}",
                    i + 1
                )));
            }
            if i > 0 && v > values[i - 1] {
                return Err(Error::InvalidSpec(format!(
                    "table is not non-increasing at n = {}",
                    i + 1
                )));
            }
        }
        let len = values.len() as u64;
        let n_table = n_table.max(len);
        let head_log_terms: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let last = Digit::exact(len);
        let beyond = rule.map(|rule| {
            let law = match rule {
                TailRule::Geometric { ratio } => Law::Geometric(ratio),
                TailRule::PowerLaw { exponent } => Law::Zeta(exponent),
                TailRule::LogSquare => Law::LogSquare,
                TailRule::Finite => Law::Zero,
            };
            let log_scale = if law == Law::Zero {
                0.0
            } else {
                head_log_terms[values.len() - 1] - law.log_term(&last)
            };
            Analytic { law, log_scale }
        });

        let sum: f64 = values.iter().copied().collect::<CompensatedSum>().value();
        let head_log_tails = match &beyond {
            Some(a) => {
                let mut acc = CompensatedSum::new();
                acc.add(a.log_tail(&last.succ()).exp());
                let mut tails = vec![0.0; values.len() + 1];
                tails[values.len()] = acc.value().ln();
                for i in (0..values.len()).rev() {
                    acc.add(values[i]);
                    tails[i] = acc.value().ln();
                }
                let mass = acc.value();
                if (mass - total).abs() > NORMALIZATION_TOL * total {
                    return Err(Error::InvalidSpec(format!(
                        "table plus tail sums to {mass:.12}, expected {total}"
                    )));
                }
                Some(tails)
            }
            None => {
                if sum > total * (1.0 + NORMALIZATION_TOL) {
                    return Err(Error::InvalidSpec(format!(
                        "table sums to {sum:.12}, more than {total}"
                    )));
                }
                None
            }
        };
        let (ratio_lo, ratio_hi) = ratio_bounds(&head_log_terms);
        Ok(Sequence {
            head_log_terms,
            head_log_tails,
            beyond,
            n_table,
            ratio_lo,
            ratio_hi,
        })
    }

    /// Crossover between exact and log-only digits.
    pub fn n_table(&self) -> u64 {
        self.n_table
    }

    /// Number of cached or tabulated leading terms.
    pub fn head_len(&self) -> u64 {
        self.head_log_terms.len() as u64
    }

    /// Fitted `(min, max)` of `v_{n+1}/v_n` over the head.
    pub fn ratio_bounds(&self) -> (f64, f64) {
        (self.ratio_lo, self.ratio_hi)
    }

    pub fn has_tail_rule(&self) -> bool {
        self.beyond.is_some()
    }

    fn unsupported(what: &'static str, d: &Digit) -> Error {
        Error::UnsupportedTailQuery {
            what,
            digit: d.to_string(),
        }
    }

    /// `ln v_n`.
    pub fn log_term(&self, d: &Digit) -> Result<f64> {
        if let Some(n) = d.exact_value() {
            if n <= self.head_len() {
                return Ok(self.head_log_terms[n as usize - 1]);
            }
        }
        self.beyond
            .as_ref()
            .map(|a| a.log_term(d))
            .ok_or_else(|| Self::unsupported("term", d))
    }

    /// `ln v_n` for an exact index, without building a [`Digit`] on the cached path.
    pub fn log_term_at(&self, n: u64) -> Result<f64> {
        if n >= 1 && n <= self.head_len() {
            return Ok(self.head_log_terms[n as usize - 1]);
        }
        self.log_term(&Digit::exact(n))
    }

    /// `ln T_n = ln Σ_{m≥n} v_m`.
    pub fn log_tail(&self, d: &Digit) -> Result<f64> {
        let tails = self
            .head_log_tails
            .as_ref()
            .ok_or_else(|| Self::unsupported("tail", d))?;
        if let Some(n) = d.exact_value() {
            if n as usize <= tails.len() {
                return Ok(tails[n as usize - 1]);
            }
        }
        let a = self.beyond.as_ref().ok_or_else(|| Self::unsupported("tail", d))?;
        Ok(a.log_tail(d))
    }

    /// `ln Σ_{m=start}^{end} v_m`, or the tail from `start` when `end` is absent.
    pub fn log_range(&self, start: &Digit, end: Option<&Digit>) -> Result<f64> {
        let Some(end) = end else {
            return self.log_tail(start);
        };
        if end.cmp_value(start).is_lt() {
            return Err(Error::InvalidRange {
                start: start.to_string(),
                end: end.to_string(),
            });
        }
        if let (Some(s), Some(e)) = (start.exact_value(), end.exact_value()) {
            if e - s < SHORT_RANGE {
                let terms = (s..=e).map(|n| self.log_term_at(n)).collect::<Result<Vec<f64>>>()?;
                return Ok(log_sum_exp(&terms));
            }
        }
        let hi = self.log_tail(start)?;
        let lo = self.log_tail(&end.succ())?;
        Ok(log_diff_exp(hi, lo))
    }

    /// The digit `n` with `T_{n+1} <= v < T_n`, for `ln v = log_v < 0`.
    ///
    /// Indices above `N_table` come back as log-only digits.
    pub fn invert_log_tail(&self, log_v: f64) -> Result<Digit> {
        let probe = Digit::exact(1);
        let tails = self
            .head_log_tails
            .as_ref()
            .ok_or_else(|| Self::unsupported("tail inversion", &probe))?;
        if log_v.is_nan() {
            return Err(Error::InvalidParameter("cannot invert a NaN tail value".into()));
        }
        let head = self.head_len();
        if log_v >= tails[0] {
            return Ok(probe);
        }
        if log_v >= tails[head as usize] {
            let k = tails.partition_point(|&t| t > log_v);
            return Ok(Digit::exact(k as u64));
        }
        let a = self.beyond.as_ref().expect("tails exist only with a tail rule");
        if log_v == f64::NEG_INFINITY {
            return Err(Error::InvalidParameter("tail value 0 has no finite digit".into()));
        }

        // T_{n+1} <= v, monotone in n.
        let below = |n: u64| a.log_tail(&Digit::exact(n + 1)) <= log_v;
        if below(self.n_table) {
            let mut lo = head;
            let mut hi = self.n_table;
            let guess = a.law.guess_log_digit(log_v - a.log_scale).exp().round();
            let g = if guess.is_finite() {
                (guess as u64).clamp(lo + 1, hi)
            } else {
                hi
            };
            let mut step = 1u64;
            if below(g) {
                hi = g;
                while g > lo + step && below(g - step) {
                    hi = g - step;
                    step = step.saturating_mul(2);
                }
                if g > lo + step {
                    lo = g - step;
                }
            } else {
                lo = g;
                while g + step < hi && !below(g + step) {
                    lo = g + step;
                    step = step.saturating_mul(2);
                }
                if g + step < hi {
                    hi = g + step;
                }
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if below(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Digit::exact(hi));
        }

        // Beyond N_table: solve ln T(e^l) = ln v for l.
        let f = |l: f64| a.log_tail(&Digit::log_only(l));
        let floor = (self.n_table as f64).ln();
        let g = a.law.guess_log_digit(log_v - a.log_scale).max(floor);
        let mut width = 1e-6 * g.max(1.0);
        let mut lo = (g - width).max(floor);
        let mut hi = g + width;
        while f(lo) < log_v && lo > floor {
            width *= 2.0;
            lo = (g - width).max(floor);
        }
        width = 1e-6 * g.max(1.0);
        while f(hi) > log_v {
            width *= 2.0;
            hi = g + width;
            if !hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "tail value e^{log_v} is below the representable range"
                )));
            }
        }
        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if f(mid) > log_v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Digit::log_only(0.5 * (lo + hi)))
    }
}

fn ratio_bounds(log_terms: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for w in log_terms.windows(2) {
        let r = (w[1] - w[0]).exp();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if lo > hi {
        (1.0, 1.0)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> Sequence {
        Sequence::analytic(Law::Gauss, 0.0, crate::DEFAULT_N_TABLE).unwrap()
    }

    #[test]
    fn gauss_tail_is_reciprocal() {
        let s = gauss();
        for n in [1u64, 2, 10, 1024, 1025, 5000, 10_000_000] {
            let t = s.log_tail(&Digit::exact(n)).unwrap();
            assert!((t + (n as f64).ln()).abs() < 1e-14, "n={n}");
        }
        assert_eq!(s.log_tail(&Digit::log_only(100.0)).unwrap(), -100.0);
    }

    #[test]
    fn zeta_tail_matches_reference_values() {
        // ζ(3, n) from a 30-digit Hurwitz zeta evaluation.
        for (n, reference) in [
            (1u64, 1.2020569031595942),
            (5, 0.024394866122557248),
            (1000, 5.005002499999167e-7),
        ] {
            let em = zeta_log_tail(3.0, &Digit::exact(n)).exp();
            assert!(((em - reference) / reference).abs() < 1e-13, "n={n}: {em}");
        }
        let log_only = zeta_log_tail(3.0, &Digit::log_only(1000f64.ln())).exp();
        assert!(((log_only - 5.005002499999167e-7) / 5.005002499999167e-7).abs() < 1e-12);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn log_square_tail_matches_reference_values() {
        // F(j) = Σ_{i≥j} 1/(i ln² i), summed directly to 5000 with a
        // ten-term Euler–Maclaurin remainder at 40 digits.
        for (j, reference) in [
            (2u64, 2.109742801236892),
            (200, 0.18882832422664747),
            (1001, 0.14475435112551242),
        ] {
            let em = log_square_log_tail(&Digit::exact(j)).exp();
            assert!(((em - reference) / reference).abs() < 1e-13, "j={j}: {em}");
        }
        let far = log_square_log_tail(&Digit::exact(10_000_001)).exp();
        assert!(((far - 0.062042068650860778) / 0.062042068650860778).abs() < 1e-13);
    }

    #[test]
    fn range_matches_term_sum() {
        let s = gauss();
        let r = s.log_range(&Digit::exact(10), Some(&Digit::exact(19))).unwrap();
        assert!((r - (0.05f64).ln()).abs() < 1e-14);
        let long = s.log_range(&Digit::exact(10), Some(&Digit::exact(999))).unwrap();
        assert!((long - (0.1f64 - 0.001).ln()).abs() < 1e-13);
        assert!(s.log_range(&Digit::exact(5), Some(&Digit::exact(4))).is_err());
    }

    #[test]
    fn inversion_brackets_the_value() {
        let s = gauss();
        for &v in &[0.9, 0.5, 0.3, 1e-2, 1e-3, 3.3e-4, 1e-6, 1.7e-7] {
            let d = s.invert_log_tail(f64::ln(v)).unwrap();
            let n = d.exact_value().unwrap() as f64;
            assert!(1.0 / (n + 1.0) <= v && v < 1.0 / n, "v={v} n={n}");
        }
        let far = s.invert_log_tail(-40.0).unwrap();
        assert!(!far.is_exact());
        assert!((far.log_value() - 40.0).abs() < 1e-9);
    }

    #[test]
    fn table_with_geometric_rule_normalizes() {
        let values: Vec<f64> = (1..=10).map(|n| 0.5f64.powi(n)).collect();
        let s = Sequence::table(&values, Some(TailRule::Geometric { ratio: 0.5 }), 1.0, 100).unwrap();
        assert!(s.log_tail(&Digit::exact(1)).unwrap().abs() < 1e-15);
        let t = s.log_tail(&Digit::exact(40)).unwrap();
        assert!((t - 39.0 * 0.5f64.ln()).abs() < 1e-12);
        let (lo, hi) = s.ratio_bounds();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 0.5).abs() < 1e-15);
    }

    #[test]
    fn table_without_rule_rejects_tail_queries() {
        let s = Sequence::table(&[0.5, 0.25], None, 1.0, 100).unwrap();
        assert!(s.log_tail(&Digit::exact(1)).is_err());
        assert!(s.log_term(&Digit::exact(3)).is_err());
        assert!(s.log_term(&Digit::exact(2)).is_ok());
        assert!(Sequence::table(&[0.5, 0.75], None, 1.0, 100).is_err());
        assert!(Sequence::table(&[0.6, 0.5], None, 1.0, 100).is_err());
    }

    #[test]
    fn tail_rule_round_trip() {
        for text in ["geometric:0.5", "powerlaw:2.5", "logsquare", "none"] {
            let r: TailRule = text.parse().unwrap();
            assert_eq!(r.to_string().parse::<TailRule>().unwrap(), r);
        }
        assert!("geometric:1.5".parse::<TailRule>().is_err());
        assert!("powerlaw".parse::<TailRule>().is_err());
    }
}
