//! Digit distributions `p_n = μ(I(n))` with heavy analytic tails, their
//! sampling, and the scalar series of the dimension theory.
//!
//! Bernoulli measures give cylinders the product mass `Π p_{a_k}`. The optional
//! memory-1 chain is reversible with stationary law `π` and transition
//! `P(b | a) = π(b) · w(a, b)`, where `w(a, b) = 1 + ε κ(a) κ(b)`, `κ(1) = 1` and
//! `κ(b) = −π₁/(1−π₁)` for `b ≥ 2`.

use std::fmt;

use rand::RngCore;

use crate::digit::{Digit, DEFAULT_N_TABLE};
use crate::numeric::{log_add_exp, CompensatedSum};
use crate::partition::PartitionSpec;
use crate::sequence::{Law, Sequence, TailRule};
use crate::{Error, Result};

/// A partial sum `S(N)` counts as divergent when `S(N) − S(N/10)` exceeds this
/// fraction of `max(1, |S(N)|)`.
pub const DIVERGENCE_TOL: f64 = 1e-6;

/// Default summation horizon for the series functionals.
pub const SERIES_HORIZON: u64 = 1_000_000;

/// Lower cutoff on the constant of [`DigitMeasure::polynomial_lower_bound_check`].
pub const POLY_BOUND_MIN_CONSTANT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    /// `p_n = (1 − q) q^{n−1}`.
    Geometric { q: f64 },
    /// `p_n = c / ((n+1) ln²(n+1))`.
    LogSquare,
    /// `p_n = n^-β / ζ(β)`.
    Zeta { beta: f64 },
    /// Explicit probabilities continued by a tail rule.
    Table { len: usize, tail: TailRule },
    /// Reversible memory-1 chain over a Bernoulli base law.
    Markov1 { eps: f64, base: Box<MeasureKind> },
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::Geometric { q } => write!(f, "geometric:{q}"),
            MeasureKind::LogSquare => write!(f, "logsquare"),
            MeasureKind::Zeta { beta } => write!(f, "zeta:{beta}"),
            MeasureKind::Table { len, tail } => write!(f, "table[{len}];tail={tail}"),
            MeasureKind::Markov1 { eps, base } => write!(f, "markov1:{eps}:{base}"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Chain {
    eps: f64,
    /// `π₁/(1−π₁)`, so that `κ(b) = −kappa_rest` for `b >= 2`.
    kappa_rest: f64,
}

impl Chain {
    fn kappa(&self, d: &Digit) -> f64 {
        if d.exact_value() == Some(1) {
            1.0
        } else {
            -self.kappa_rest
        }
    }

    fn log_weight(&self, prev: &Digit, d: &Digit) -> f64 {
        (self.eps * self.kappa(prev) * self.kappa(d)).ln_1p()
    }

    /// `ln w(a, b)` for any `b >= 2`.
    fn log_weight_rest(&self, prev: &Digit) -> f64 {
        (-self.eps * self.kappa(prev) * self.kappa_rest).ln_1p()
    }

    fn weights(&self) -> [f64; 3] {
        let k = self.kappa_rest;
        [1.0 + self.eps, 1.0 - self.eps * k, 1.0 + self.eps * k * k]
    }
}

/// Partial sums of the measure's series at one horizon `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatsRow {
    pub n: u64,
    /// `H_N = −Σ_{n≤N} p_n ln p_n`.
    pub entropy: f64,
    /// `Λ_N = −Σ_{n≤N} p_n ln r_n`.
    pub lyapunov: f64,
    /// `ln p_N / ln r_N`.
    pub decay_pointwise: f64,
    /// `Σ_{n≤N} p_n ln p_n / Σ_{n≤N} p_n ln r_n`.
    pub decay_cesaro: f64,
    /// `ln P_N / ln R_N`.
    pub tail_ratio: f64,
    /// `Σ_{n≤N} (ln r_n)² (p_n² + 2 p_n p_{n+1})`.
    pub criterion: f64,
}

/// Series curves of a measure against a partition, one row per checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureStats {
    pub rows: Vec<StatsRow>,
}

/// Outcome of [`DigitMeasure::volume_lemma_dim`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VolumeLemma {
    /// `h/λ`, with `λ = ∞` giving 0.
    Dimension { entropy: f64, lyapunov: f64, dim: f64 },
    /// The entropy series does not settle by the horizon.
    Divergent { entropy: f64, growth: f64 },
}

/// Outcome of [`DigitMeasure::polynomial_lower_bound_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolynomialBound {
    /// Largest `C` with `p_n >= C n^-(1+δ)` on the range.
    pub constant: f64,
    pub argmin: u64,
    pub pass: bool,
}

/// A digit distribution on `{1, 2, …}`.
#[derive(Clone, Debug)]
pub struct DigitMeasure {
    kind: MeasureKind,
    seq: Sequence,
    chain: Option<Chain>,
}

/// Uniform draw in the open interval `(0, 1)`.
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// The LogSquare normalizer `c = 1 / Σ_{m≥2} 1/(m ln² m)`.
pub fn log_square_normalizer() -> f64 {
    (-Law::LogSquare.log_tail(&Digit::exact(1))).exp()
}

/// True when a partial-sum sequence is still growing over its last decade.
pub fn diverges(at_n: f64, at_tenth: f64) -> bool {
    at_n - at_tenth > DIVERGENCE_TOL * at_n.abs().max(1.0)
}

impl DigitMeasure {
    pub fn geometric(q: f64) -> Result<DigitMeasure> {
        Self::geometric_with_table(q, DEFAULT_N_TABLE)
    }

    pub fn geometric_with_table(q: f64, n_table: u64) -> Result<DigitMeasure> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric parameter must lie in (0,1), got {q}"
            )));
        }
        let log_scale = (-q).ln_1p() - q.ln();
        Ok(DigitMeasure {
            kind: MeasureKind::Geometric { q },
            seq: Sequence::analytic(Law::Geometric(q), log_scale, n_table)?,
            chain: None,
        })
    }

    pub fn log_square() -> DigitMeasure {
        Self::log_square_with_table(DEFAULT_N_TABLE).expect("default LogSquare measure is valid")
    }

    pub fn log_square_with_table(n_table: u64) -> Result<DigitMeasure> {
        let log_scale = -Law::LogSquare.log_tail(&Digit::exact(1));
        Ok(DigitMeasure {
            kind: MeasureKind::LogSquare,
            seq: Sequence::analytic(Law::LogSquare, log_scale, n_table)?,
            chain: None,
        })
    }

    pub fn zeta(beta: f64) -> Result<DigitMeasure> {
        Self::zeta_with_table(beta, DEFAULT_N_TABLE)
    }

    pub fn zeta_with_table(beta: f64, n_table: u64) -> Result<DigitMeasure> {
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "zeta exponent must exceed 1, got {beta}"
            )));
        }
        let law = Law::Zeta(beta);
        let log_scale = -law.log_tail(&Digit::exact(1));
        Ok(DigitMeasure {
            kind: MeasureKind::Zeta { beta },
            seq: Sequence::analytic(law, log_scale, n_table)?,
            chain: None,
        })
    }

    /// Explicit probabilities `p_1, …, p_N` continued by `tail`; the total must be 1.
    pub fn from_table(values: &[f64], tail: TailRule, n_table: u64) -> Result<DigitMeasure> {
        Ok(DigitMeasure {
            kind: MeasureKind::Table {
                len: values.len(),
                tail,
            },
            seq: Sequence::table(values, Some(tail), 1.0, n_table)?,
            chain: None,
        })
    }

    /// The point mass on digit 1.
    pub fn single_atom() -> DigitMeasure {
        Self::from_table(&[1.0], TailRule::Finite, DEFAULT_N_TABLE).expect("point mass is valid")
    }

    /// Memory-1 chain with stationary law `base`; needs `0 <= ε < (1−π₁)/π₁`.
    pub fn markov1(eps: f64, base: DigitMeasure) -> Result<DigitMeasure> {
        if base.chain.is_some() {
            return Err(Error::InvalidParameter("markov1 base must be a Bernoulli law".into()));
        }
        let pi1 = base.seq.log_term_at(1)?.exp();
        if pi1 >= 1.0 {
            return Err(Error::InvalidParameter(
                "markov1 base must charge more than one digit".into(),
            ));
        }
        let limit = (1.0 - pi1) / pi1;
        if !(eps >= 0.0 && eps < limit) {
            return Err(Error::InvalidParameter(format!(
                "markov1 coupling must lie in [0, {limit:.6}), got {eps}"
            )));
        }
        Ok(DigitMeasure {
            kind: MeasureKind::Markov1 {
                eps,
                base: Box::new(base.kind),
            },
            seq: base.seq,
            chain: Some(Chain {
                eps,
                kappa_rest: pi1 / (1.0 - pi1),
            }),
        })
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn is_bernoulli(&self) -> bool {
        self.chain.is_none()
    }

    pub fn n_table(&self) -> u64 {
        self.seq.n_table()
    }

    pub fn sequence(&self) -> &Sequence {
        &self.seq
    }

    /// Fitted `(K, K')` with `K <= p_{n+1}/p_n <= K'` over the cached head.
    pub fn ratio_bounds(&self) -> (f64, f64) {
        self.seq.ratio_bounds()
    }

    /// Gibbs constants `(A, B)`: `A <= μ(I(a_1…a_n)) / exp(S_n log φ(y)) <= B`
    /// for every `y` in the cylinder. Both are 1 for Bernoulli measures; for
    /// the chain the potential is `φ(y) = π(y_1) w(y_1, y_2)`.
    pub fn gibbs_bounds(&self) -> (f64, f64) {
        match &self.chain {
            None => (1.0, 1.0),
            Some(c) => {
                let w = c.weights();
                let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = w.iter().copied().fold(f64::INFINITY, f64::min);
                (1.0 / max, 1.0 / min)
            }
        }
    }

    /// `ln p_a`, the stationary mass of `I(a)`.
    pub fn log_p(&self, d: &Digit) -> Result<f64> {
        self.seq.log_term(d)
    }

    pub fn log_p_at(&self, n: u64) -> Result<f64> {
        self.seq.log_term_at(n)
    }

    /// `ln P_a = ln Σ_{m≥a} p_m`.
    pub fn log_tail_p(&self, d: &Digit) -> Result<f64> {
        self.seq.log_tail(d)
    }

    /// `ln Σ_{m=start}^{end} p_m`; the tail when `end` is absent.
    pub fn log_range_p(&self, start: &Digit, end: Option<&Digit>) -> Result<f64> {
        self.seq.log_range(start, end)
    }

    /// `ln μ(a_n = d | a_{n-1} = prev)`; the stationary mass when `prev` is absent.
    pub fn log_cond_p(&self, prev: Option<&Digit>, d: &Digit) -> Result<f64> {
        let base = self.seq.log_term(d)?;
        Ok(match (&self.chain, prev) {
            (Some(c), Some(a)) => base + c.log_weight(a, d),
            _ => base,
        })
    }

    /// `ln μ(a_n ∈ [start, end] | a_{n-1} = prev)`.
    pub fn log_cond_range(&self, prev: Option<&Digit>, start: &Digit, end: Option<&Digit>) -> Result<f64> {
        let (Some(c), Some(a)) = (&self.chain, prev) else {
            return self.seq.log_range(start, end);
        };
        if let Some(e) = end {
            if e.cmp_value(start).is_lt() {
                return Err(Error::InvalidRange {
                    start: start.to_string(),
                    end: e.to_string(),
                });
            }
        }
        let rest_weight = c.log_weight_rest(a);
        if start.exact_value() == Some(1) {
            let one = self.log_cond_p(prev, start)?;
            if end.and_then(|e| e.exact_value()) == Some(1) {
                return Ok(one);
            }
            let two = Digit::exact(2);
            let rest = self.seq.log_range(&two, end)? + rest_weight;
            Ok(log_add_exp(one, rest))
        } else {
            Ok(self.seq.log_range(start, end)? + rest_weight)
        }
    }

    /// `ln μ(a_n >= d | a_{n-1} = prev)`.
    pub fn log_cond_tail(&self, prev: Option<&Digit>, d: &Digit) -> Result<f64> {
        self.log_cond_range(prev, d, None)
    }

    /// Draw from the stationary law by inverting the tail `P_n`.
    pub fn sample_digit<R: RngCore + ?Sized>(&self, rng: &mut R) -> Digit {
        self.sample_next(None, rng)
    }

    /// Draw `a_n` given `a_{n-1} = prev`.
    pub fn sample_next<R: RngCore + ?Sized>(&self, prev: Option<&Digit>, rng: &mut R) -> Digit {
        let v = open_unit(rng);
        self.digit_for_tail(prev, v.ln())
    }

    /// The digit `n` with `P(a > n) <= v < P(a >= n)` for `ln v = log_v`.
    pub fn digit_for_tail(&self, prev: Option<&Digit>, log_v: f64) -> Digit {
        let shift = match (&self.chain, prev) {
            (Some(c), Some(a)) => {
                let two = Digit::exact(2);
                let rest = c.log_weight_rest(a);
                let tail_two = self.seq.log_tail(&two).expect("measures always carry a tail rule");
                if log_v >= tail_two + rest {
                    return Digit::exact(1);
                }
                rest
            }
            _ => 0.0,
        };
        self.seq
            .invert_log_tail(log_v - shift)
            .expect("measure tails are invertible on (0, 1)")
    }

    /// `ln μ(I(a_1 … a_n))`; 0 for the empty word.
    pub fn cylinder_log_measure(&self, digits: &[Digit]) -> Result<f64> {
        let mut total = 0.0;
        let mut prev = None;
        for d in digits {
            total += self.log_cond_p(prev, d)?;
            prev = Some(d);
        }
        Ok(total)
    }

    /// `ln μ(⋃_{m=start}^{end} I(prefix, m))`; the infinite union when `end` is absent.
    pub fn union_log_measure(&self, prefix: &[Digit], start: &Digit, end: Option<&Digit>) -> Result<f64> {
        Ok(self.cylinder_log_measure(prefix)? + self.log_cond_range(prefix.last(), start, end)?)
    }

    fn require_bernoulli(&self, what: &str) -> Result<()> {
        if self.chain.is_some() {
            return Err(Error::UnsupportedMeasure(format!(
                "{what} is defined for Bernoulli measures only"
            )));
        }
        Ok(())
    }

    /// Series curves at each checkpoint (sorted and deduplicated).
    pub fn measure_stats(&self, partition: &PartitionSpec, checkpoints: &[u64]) -> Result<MeasureStats> {
        self.require_bernoulli("the series functionals")?;
        let mut marks: Vec<u64> = checkpoints.iter().copied().filter(|&n| n >= 1).collect();
        marks.sort_unstable();
        marks.dedup();
        let mut entropy = CompensatedSum::new();
        let mut lyapunov = CompensatedSum::new();
        let mut criterion = CompensatedSum::new();
        let mut cesaro_num = CompensatedSum::new();
        let mut rows = Vec::with_capacity(marks.len());
        let mut next_lp = self.log_p_at(1)?;
        let mut n = 0u64;
        for &mark in &marks {
            while n < mark {
                n += 1;
                let lp = next_lp;
                next_lp = self.log_p_at(n + 1)?;
                let lr = partition.log_r_at(n)?;
                let p = lp.exp();
                if p > 0.0 {
                    entropy.add(-p * lp);
                    lyapunov.add(-p * lr);
                    cesaro_num.add(p * lp);
                    criterion.add(lr * lr * (p * p + 2.0 * p * next_lp.exp()));
                }
            }
            let d = Digit::exact(mark);
            rows.push(StatsRow {
                n: mark,
                entropy: entropy.value(),
                lyapunov: lyapunov.value(),
                decay_pointwise: self.log_p(&d)? / partition.log_r(&d)?,
                decay_cesaro: cesaro_num.value() / -lyapunov.value(),
                tail_ratio: self.log_tail_p(&d)? / partition.log_tail_r(&d)?,
                criterion: criterion.value(),
            });
        }
        Ok(MeasureStats { rows })
    }

    /// `H_N = −Σ_{n≤N} p_n ln p_n`.
    pub fn entropy_partial(&self, n_max: u64) -> Result<f64> {
        self.require_bernoulli("entropy")?;
        let mut s = CompensatedSum::new();
        for n in 1..=n_max {
            let lp = self.log_p_at(n)?;
            let p = lp.exp();
            if p > 0.0 {
                s.add(-p * lp);
            }
        }
        Ok(s.value())
    }

    /// `Λ_N = −Σ_{n≤N} p_n ln r_n`, the piecewise-linear Lyapunov partial sum.
    pub fn lyapunov_partial(&self, partition: &PartitionSpec, n_max: u64) -> Result<f64> {
        let mut s = CompensatedSum::new();
        for n in 1..=n_max {
            let p = self.log_p_at(n)?.exp();
            if p > 0.0 {
                s.add(-p * partition.log_r_at(n)?);
            }
        }
        Ok(s.value())
    }

    /// `Σ_{n≤N} (ln r_n)² (p_n² + 2 p_n p_{n+1})`.
    pub fn trimmed_criterion_partial(&self, partition: &PartitionSpec, n_max: u64) -> Result<f64> {
        Ok(self.measure_stats(partition, &[n_max])?.rows[0].criterion)
    }

    /// `h/λ` from partial sums to `horizon`, checked for settling over the last decade.
    pub fn volume_lemma_dim(&self, partition: &PartitionSpec, horizon: u64) -> Result<VolumeLemma> {
        let tenth = (horizon / 10).max(1);
        let stats = self.measure_stats(partition, &[tenth, horizon])?;
        let (early, late) = (stats.rows[0], stats.rows[stats.rows.len() - 1]);
        if diverges(late.entropy, early.entropy) {
            return Ok(VolumeLemma::Divergent {
                entropy: late.entropy,
                growth: late.entropy - early.entropy,
            });
        }
        let dim = if diverges(late.lyapunov, early.lyapunov) {
            0.0
        } else {
            late.entropy / late.lyapunov
        };
        Ok(VolumeLemma::Dimension {
            entropy: late.entropy,
            lyapunov: late.lyapunov,
            dim,
        })
    }

    /// Largest `C` with `p_n >= C / n^{1+δ}` for all `n` in `[n_lo, n_hi]`.
    /// Fails when `δ <= 0` or `C` falls below [`POLY_BOUND_MIN_CONSTANT`].
    pub fn polynomial_lower_bound_check(&self, delta: f64, n_lo: u64, n_hi: u64) -> Result<PolynomialBound> {
        if n_lo < 1 || n_hi < n_lo || n_hi > self.n_table() {
            return Err(Error::InvalidParameter(format!(
                "range [{n_lo}, {n_hi}] must lie within [1, N_table]"
            )));
        }
        let mut best = f64::INFINITY;
        let mut argmin = n_lo;
        for n in n_lo..=n_hi {
            let v = self.log_p_at(n)? + (1.0 + delta) * (n as f64).ln();
            if v < best {
                best = v;
                argmin = n;
            }
        }
        let constant = best.exp();
        Ok(PolynomialBound {
            constant,
            argmin,
            pass: delta > 0.0 && constant >= POLY_BOUND_MIN_CONSTANT,
        })
    }
}
