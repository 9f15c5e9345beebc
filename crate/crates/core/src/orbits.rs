//! Symbolic orbits: i.i.d. (or memory-1) digit streams with Birkhoff sums of
//! `ln p` and `ln r`, running maxima of `X_k = −ln r_{a_k}` and trimmed sums.
//!
//! [`OrbitStream`] runs in constant memory and reports every step as a
//! [`StepView`]; [`Orbit`] stores the same data per step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::digit::Digit;
use crate::measures::DigitMeasure;
use crate::partition::PartitionSpec;
use crate::{Error, Result};

/// Pinned generator, recorded in every output manifest.
pub const GENERATOR_NAME: &str =
    "ChaCha8Rng (rand_chacha 0.9) seeded by seed_from_u64(splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15))";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of orbit `index` in a batch with seed `master`.
pub fn orbit_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn orbit_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Checkpoints `10², …, 10⁶` below `n`, followed by `n` itself.
pub fn default_checkpoints(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = [100u64, 1_000, 10_000, 100_000, 1_000_000]
        .into_iter()
        .filter(|&c| c < n)
        .collect();
    out.push(n);
    out
}

/// Evaluates `f(index, seed)` for each orbit of a batch in parallel; results
/// come back in index order regardless of scheduling.
pub fn batch_map<T, F>(orbits: usize, master_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    (0..orbits)
        .into_par_iter()
        .map(|i| f(i, orbit_seed(master_seed, i as u64)))
        .collect()
}

/// Everything an estimator needs about step `n` of an orbit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepView {
    pub n: u64,
    pub digit: Digit,
    pub prev: Option<Digit>,
    /// `ln μ(a_n | a_{n−1})`; `ln p_{a_n}` for Bernoulli measures.
    pub log_p: f64,
    pub log_r: f64,
    pub cum_log_p_prev: f64,
    pub cum_log_r_prev: f64,
}

impl StepView {
    pub fn cum_log_p(&self) -> f64 {
        self.cum_log_p_prev + self.log_p
    }

    pub fn cum_log_r(&self) -> f64 {
        self.cum_log_r_prev + self.log_r
    }

    /// `X_n = −ln r_{a_n}`.
    pub fn x(&self) -> f64 {
        -self.log_r
    }
}

/// `S_n`, `S′_n = S_n − max_{k≤n} X_k` and the (first) index of the maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrimmedSum {
    pub s: f64,
    pub s_trimmed: f64,
    pub argmax: u64,
}

/// One line of the checkpoint dump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckpointRow {
    pub orbit_id: u64,
    pub n: u64,
    pub cum_log_p: f64,
    pub cum_log_r: f64,
    pub max_x: f64,
    pub argmax: u64,
    pub s_trimmed: f64,
}

/// Counts `f_{n,k}` of digit `k` among the first `n` digits.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTable {
    pub n: u64,
    /// `counts[k − 1] = f_{n,k}` for `k <= k_cap`.
    pub counts: Vec<u64>,
    /// Digits above `k_cap`, log-only digits included.
    pub overflow: u64,
}

impl FrequencyTable {
    pub fn count(&self, k: u64) -> u64 {
        self.counts.get(k as usize - 1).copied().unwrap_or(0)
    }
}

/// Constant-memory orbit generator.
pub struct OrbitStream<'a> {
    measure: &'a DigitMeasure,
    partition: &'a PartitionSpec,
    rng: ChaCha8Rng,
    seed: u64,
    n: u64,
    prev: Option<Digit>,
    cum_log_p: f64,
    cum_log_r: f64,
    max_x: f64,
    argmax: u64,
}

impl<'a> OrbitStream<'a> {
    pub fn new(measure: &'a DigitMeasure, partition: &'a PartitionSpec, seed: u64) -> Self {
        OrbitStream {
            measure,
            partition,
            rng: orbit_rng(seed),
            seed,
            n: 0,
            prev: None,
            cum_log_p: 0.0,
            cum_log_r: 0.0,
            max_x: 0.0,
            argmax: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Steps taken so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Draws the next digit and updates all running statistics.
    pub fn advance(&mut self) -> Result<StepView> {
        let d = self.measure.sample_next(self.prev.as_ref(), &mut self.rng);
        self.push(d)
    }

    /// Appends a given digit instead of a sampled one.
    pub fn push(&mut self, digit: Digit) -> Result<StepView> {
        let log_p = self.measure.log_cond_p(self.prev.as_ref(), &digit)?;
        let log_r = self.partition.log_r(&digit)?;
        let view = StepView {
            n: self.n + 1,
            digit,
            prev: self.prev,
            log_p,
            log_r,
            cum_log_p_prev: self.cum_log_p,
            cum_log_r_prev: self.cum_log_r,
        };
        self.n += 1;
        self.cum_log_p += log_p;
        self.cum_log_r += log_r;
        if self.argmax == 0 || -log_r > self.max_x {
            self.max_x = -log_r;
            self.argmax = self.n;
        }
        self.prev = Some(digit);
        Ok(view)
    }

    pub fn cum_log_p(&self) -> f64 {
        self.cum_log_p
    }

    pub fn cum_log_r(&self) -> f64 {
        self.cum_log_r
    }

    pub fn trimmed_sum(&self) -> TrimmedSum {
        let s = -self.cum_log_r;
        TrimmedSum {
            s,
            s_trimmed: s - self.max_x,
            argmax: self.argmax,
        }
    }

    pub fn checkpoint_row(&self, orbit_id: u64) -> CheckpointRow {
        let t = self.trimmed_sum();
        CheckpointRow {
            orbit_id,
            n: self.n,
            cum_log_p: self.cum_log_p,
            cum_log_r: self.cum_log_r,
            max_x: self.max_x,
            argmax: self.argmax,
            s_trimmed: t.s_trimmed,
        }
    }
}

/// A finite orbit with per-step storage. Index `n` runs over `1..=len()`;
/// cumulative quantities also accept `n = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    seed: u64,
    digits: Vec<Digit>,
    log_p: Vec<f64>,
    log_r: Vec<f64>,
    cum_log_p: Vec<f64>,
    cum_log_r: Vec<f64>,
    max_x: Vec<f64>,
    argmax: Vec<u64>,
}

/// Orbit of length `n` drawn from `measure` with the given seed.
pub fn generate_orbit(measure: &DigitMeasure, partition: &PartitionSpec, n: u64, seed: u64) -> Result<Orbit> {
    if n == 0 {
        return Err(Error::InvalidParameter("orbit length must be at least 1".into()));
    }
    let mut stream = OrbitStream::new(measure, partition, seed);
    let mut orbit = Orbit::empty(seed, n as usize);
    for _ in 0..n {
        let view = stream.advance()?;
        orbit.record(&view);
    }
    Ok(orbit)
}

impl Orbit {
    fn empty(seed: u64, capacity: usize) -> Orbit {
        let mut o = Orbit {
            seed,
            digits: Vec::with_capacity(capacity),
            log_p: Vec::with_capacity(capacity),
            log_r: Vec::with_capacity(capacity),
            cum_log_p: Vec::with_capacity(capacity + 1),
            cum_log_r: Vec::with_capacity(capacity + 1),
            max_x: Vec::with_capacity(capacity + 1),
            argmax: Vec::with_capacity(capacity + 1),
        };
        o.cum_log_p.push(0.0);
        o.cum_log_r.push(0.0);
        o.max_x.push(0.0);
        o.argmax.push(0);
        o
    }

    fn record(&mut self, view: &StepView) {
        let n = view.n;
        self.digits.push(view.digit);
        self.log_p.push(view.log_p);
        self.log_r.push(view.log_r);
        self.cum_log_p.push(view.cum_log_p());
        self.cum_log_r.push(view.cum_log_r());
        let (best, at) = (self.max_x[n as usize - 1], self.argmax[n as usize - 1]);
        if at == 0 || view.x() > best {
            self.max_x.push(view.x());
            self.argmax.push(n);
        } else {
            self.max_x.push(best);
            self.argmax.push(at);
        }
    }

    /// Orbit with prescribed digits.
    pub fn from_digits(
        measure: &DigitMeasure,
        partition: &PartitionSpec,
        digits: &[Digit],
        seed: u64,
    ) -> Result<Orbit> {
        let mut stream = OrbitStream::new(measure, partition, seed);
        let mut orbit = Orbit::empty(seed, digits.len());
        for d in digits {
            let view = stream.push(*d)?;
            orbit.record(&view);
        }
        Ok(orbit)
    }

    pub fn len(&self) -> u64 {
        self.digits.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    fn check_index(&self, n: u64, min: u64) -> Result<usize> {
        if n < min || n > self.len() {
            return Err(Error::InvalidParameter(format!(
                "step {n} outside [{min}, {}]",
                self.len()
            )));
        }
        Ok(n as usize)
    }

    /// The digit `a_n`.
    pub fn digit(&self, n: u64) -> Result<Digit> {
        Ok(self.digits[self.check_index(n, 1)? - 1])
    }

    pub fn step(&self, n: u64) -> Result<StepView> {
        let i = self.check_index(n, 1)?;
        Ok(StepView {
            n,
            digit: self.digits[i - 1],
            prev: (i >= 2).then(|| self.digits[i - 2]),
            log_p: self.log_p[i - 1],
            log_r: self.log_r[i - 1],
            cum_log_p_prev: self.cum_log_p[i - 1],
            cum_log_r_prev: self.cum_log_r[i - 1],
        })
    }

    pub fn cum_log_p(&self, n: u64) -> Result<f64> {
        Ok(self.cum_log_p[self.check_index(n, 0)?])
    }

    pub fn cum_log_r(&self, n: u64) -> Result<f64> {
        Ok(self.cum_log_r[self.check_index(n, 0)?])
    }

    /// `(max_{k≤n} X_k, argmax)`, the first index attaining the maximum.
    pub fn max_x(&self, n: u64) -> Result<(f64, u64)> {
        let i = self.check_index(n, 1)?;
        Ok((self.max_x[i], self.argmax[i]))
    }

    pub fn trimmed_sum(&self, n: u64) -> Result<TrimmedSum> {
        let i = self.check_index(n, 1)?;
        let s = -self.cum_log_r[i];
        Ok(TrimmedSum {
            s,
            s_trimmed: s - self.max_x[i],
            argmax: self.argmax[i],
        })
    }

    /// `ln|I_n| / ln|I_{n−1}| = 1 + X_n / S_{n−1}` for `n >= 2`.
    pub fn blowup_ratio(&self, n: u64) -> Result<f64> {
        let i = self.check_index(n, 2)?;
        Ok(self.cum_log_r[i] / self.cum_log_r[i - 1])
    }

    pub fn digit_frequencies(&self, n: u64, k_cap: u64) -> Result<FrequencyTable> {
        let i = self.check_index(n, 0)?;
        let mut counts = vec![0u64; k_cap as usize];
        let mut overflow = 0;
        for d in &self.digits[..i] {
            match d.exact_value() {
                Some(k) if k <= k_cap => counts[k as usize - 1] += 1,
                _ => overflow += 1,
            }
        }
        Ok(FrequencyTable { n, counts, overflow })
    }

    /// Copy with `a_{n*}` replaced by the digit `e^{ℓ*}`; statistics from `n*` on are recomputed.
    pub fn plant_excursion(
        &self,
        measure: &DigitMeasure,
        partition: &PartitionSpec,
        position: u64,
        log_digit: f64,
    ) -> Result<Orbit> {
        let i = self.check_index(position, 1)?;
        if !(log_digit.is_finite() && log_digit >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "planted log digit must be finite and >= 0, got {log_digit}"
            )));
        }
        let mut digits = self.digits.clone();
        digits[i - 1] = Digit::from_log(log_digit, measure.n_table());
        let mut out = self.clone();
        out.digits.truncate(i - 1);
        out.log_p.truncate(i - 1);
        out.log_r.truncate(i - 1);
        out.cum_log_p.truncate(i);
        out.cum_log_r.truncate(i);
        out.max_x.truncate(i);
        out.argmax.truncate(i);
        for n in i..=digits.len() {
            let d = digits[n - 1];
            let prev = (n >= 2).then(|| digits[n - 2]);
            let log_p = measure.log_cond_p(prev.as_ref(), &d)?;
            let log_r = partition.log_r(&d)?;
            out.record(&StepView {
                n: n as u64,
                digit: d,
                prev,
                log_p,
                log_r,
                cum_log_p_prev: out.cum_log_p[n - 1],
                cum_log_r_prev: out.cum_log_r[n - 1],
            });
        }
        Ok(out)
    }

    pub fn checkpoint_row(&self, orbit_id: u64, n: u64) -> Result<CheckpointRow> {
        let t = self.trimmed_sum(n)?;
        let (max_x, argmax) = self.max_x(n)?;
        Ok(CheckpointRow {
            orbit_id,
            n,
            cum_log_p: self.cum_log_p(n)?,
            cum_log_r: self.cum_log_r(n)?,
            max_x,
            argmax,
            s_trimmed: t.s_trimmed,
        })
    }
}
