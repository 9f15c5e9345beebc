//! Acceptance criteria 1–12 at their stated sizes and tolerances.
//!
//! Every expected value comes from an oracle in this file (closed forms,
//! Euler–Maclaurin tails, exact big-integer continuants, an exact rational
//! ball enumerator); the library is only the system under test. Prints one
//! PASS/FAIL line per criterion. Exits non-zero if a criterion outside
//! `KNOWN_UNATTAINABLE` fails, or if one inside it starts passing.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use gibbsdim::estimators::{case_split_upper, lower_cover_ratio, neighbor_upper_ratio};
use gibbsdim::maps::distortion_residual;
use gibbsdim::orbits::{batch_map, generate_orbit, orbit_rng, orbit_seed};
use gibbsdim::{
    ball_measure_bracket, ineqsums_check, Digit, DigitMeasure, Error, IneqParams, OrbitStream, PartitionSpec, StepView,
    VolumeLemma, DEFAULT_N_TABLE,
};

const SEED: u64 = 0;
const ORBITS: usize = 100;

const ORACLE_REL_TOL: f64 = 0.02;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const SYMBOLIC_BAND: (f64, f64) = (0.5, 0.70);
const EXCESS_AGREEMENT: f64 = 0.5;
const SYMBOLIC_BUDGET: Duration = Duration::from_secs(120);
const EXPONENT_TOL: f64 = 1e-2;
const TAIL_RATIO_MAX: f64 = 0.25;
const CRITERION_INCREMENT: f64 = 1e-3;
const BLOWUP_MIN: f64 = 3.0;
const EXCURSION_LIMITS: [(f64, f64); 2] = [(1e9, 0.05), (1e12, 1e-4)];
const NEIGHBOR_BAND: (f64, f64) = (0.35, 0.65);
const CASE_SPLIT_MAX: f64 = 0.679;
const FALLBACK_K0: u64 = 10_000;
const RHS_PRINTED: &str = "0.62895";
const DISTORTION_SEQUENCES: usize = 1_000;
const SAMPLER_DRAWS: u64 = 1_000_000;
const CHI_SQUARE_LEVEL: f64 = 1e-3;
const TAIL_BUCKET_SIGMAS: f64 = 3.0;
const BALLS: usize = 1_000;
const BALL_DEPTH_CAP: usize = 8;
const BALL_REL_TOL: f64 = 1e-9;
/// Agreement between library values and the oracles in this file.
const ORACLE_AGREEMENT: f64 = 1e-9;

/// No `k₀ ≤ 10⁴` exists for the stated parameters; the scan is run as
/// written and must keep failing until the analysis changes.
const KNOWN_UNATTAINABLE: [u32; 1] = [9];

type Verdict = (bool, String);

// ---- independent oracles ----------------------------------------------------

/// `f(m) = 1/(m ln² m)`.
fn f(m: f64) -> f64 {
    1.0 / (m * m.ln().powi(2))
}

/// `Σ_{m≥M} f(m)` by Euler–Maclaurin, `M ≥ 50`.
fn f_tail(m: f64) -> f64 {
    let l = m.ln();
    let d1 = -(l + 2.0) / (m * m * l.powi(3));
    let d3 = -(6.0 * l.powi(3) + 22.0 * l * l + 36.0 * l + 24.0) / (m.powi(4) * l.powi(5));
    1.0 / l + f(m) / 2.0 - d1 / 12.0 + d3 / 720.0
}

/// LogSquare normalizer `1 / Σ_{m≥2} f(m)`.
fn log_square_c() -> f64 {
    let head: f64 = (2..1_000).rev().map(|m| f(m as f64)).sum();
    1.0 / (head + f_tail(1_000.0))
}

/// LogSquare `p_n = c f(n + 1)`.
fn p(c: f64, n: u64) -> f64 {
    c * f(n as f64 + 1.0)
}

/// Gauss `r_n = 1/(n(n+1))`, in log form.
fn log_r(n: u64) -> f64 {
    let n = n as f64;
    -(n.ln() + (n + 1.0).ln())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1_000 {
        x.to_f64().expect("finite").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn ln_rational(x: &BigRational) -> f64 {
    ln_big(x.numer()) - ln_big(x.denom())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Streams one batch and hands every step to `visit`, returning per-orbit state.
fn stream_batch<T: Send>(
    measure: &DigitMeasure,
    length: u64,
    init: impl Fn() -> T + Sync + Send,
    visit: impl Fn(&mut T, &StepView) + Sync + Send,
) -> Vec<T> {
    let g = PartitionSpec::gauss();
    batch_map(ORBITS, SEED, |_, seed| {
        let mut state = init();
        let mut s = OrbitStream::new(measure, &g, seed);
        for _ in 0..length {
            let step = s.advance().expect("step");
            visit(&mut state, &step);
        }
        state
    })
}

// ---- criteria ---------------------------------------------------------------

fn finite_entropy_oracle() -> Verdict {
    let m = DigitMeasure::geometric(0.5).unwrap();
    let h = 2.0 * std::f64::consts::LN_2;
    let lambda: f64 = (1..=200).map(|n| -0.5f64.powi(n as i32) * log_r(n)).sum();
    let target = h / lambda;
    let library = match m.volume_lemma_dim(&PartitionSpec::gauss(), 10_000).unwrap() {
        VolumeLemma::Dimension { dim, .. } => dim,
        VolumeLemma::Divergent { .. } => f64::NAN,
    };
    let start = Instant::now();
    let mut ratios = stream_batch(&m, 100_000, || 0.0, |r, s| *r = s.cum_log_p() / s.cum_log_r());
    let elapsed = start.elapsed();
    let med = median(&mut ratios);
    let err = rel(med, target);
    (
        err <= ORACLE_REL_TOL && elapsed < ORACLE_BUDGET && rel(library, target) <= ORACLE_AGREEMENT,
        format!(
            "median {med:.5} vs h/lambda {target:.5} (lambda {lambda:.5}), rel {err:.4}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn symbolic_trend() -> Verdict {
    const CPS: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];
    let m = DigitMeasure::log_square();
    let start = Instant::now();
    let per_orbit = stream_batch(&m, CPS[3], Vec::new, |v: &mut Vec<f64>, s| {
        if CPS.contains(&s.n) {
            v.push(s.cum_log_p() / s.cum_log_r());
        }
    });
    let elapsed = start.elapsed();
    let med: Vec<f64> = (0..CPS.len())
        .map(|i| median(&mut per_orbit.iter().map(|v| v[i]).collect::<Vec<_>>()))
        .collect();
    let decreasing = med.windows(2).all(|w| w[1] < w[0]);
    let in_band = (SYMBOLIC_BAND.0..=SYMBOLIC_BAND.1).contains(&med[3]);
    let excess = |i: usize| (med[i] - 0.5) * (CPS[i] as f64).ln();
    let (e5, e6) = (excess(2), excess(3));
    let agree = (e6 - e5).abs() <= EXCESS_AGREEMENT * e5.abs().max(e6.abs());
    (
        decreasing && in_band && agree && elapsed < SYMBOLIC_BUDGET,
        format!(
            "medians {:.4} {:.4} {:.4} {:.4}, excess*ln n {e5:.3} -> {e6:.3}, {:.1} s",
            med[0],
            med[1],
            med[2],
            med[3],
            elapsed.as_secs_f64()
        ),
    )
}

fn convergence_exponent() -> Verdict {
    let g = PartitionSpec::gauss();
    let s = g.convergence_exponent().unwrap();
    let (a, b) = (1_000u64, 1_000_000u64);
    let alpha = -(log_r(b) - log_r(a)) / ((b as f64).ln() - (a as f64).ln());
    let c = log_square_c();
    let excess: Vec<f64> = (3..=7)
        .map(|e| {
            let n = 10u64.pow(e);
            p(c, n).ln() / log_r(n) - 0.5
        })
        .collect();
    let shrinking = excess.iter().all(|&e| e > 0.0) && excess.windows(2).all(|w| w[1] < w[0]);
    (
        (s - 0.5).abs() <= EXPONENT_TOL && (1.0 / alpha - 0.5).abs() <= EXPONENT_TOL && shrinking,
        format!(
            "s_inf {s:.6}, 1/alpha from r_n {:.6}, decay-ratio excess {:.4} -> {:.4}",
            1.0 / alpha,
            excess[0],
            excess[4]
        ),
    )
}

fn tail_decay_ratio() -> Verdict {
    let m = DigitMeasure::log_square();
    let c = log_square_c();
    let mut worst_agreement = 0.0f64;
    let curve: Vec<f64> = (0..=30)
        .map(|i| {
            let n = (1e3 * 10f64.powf(i as f64 / 10.0)).round() as u64;
            let log_tail = (c * f_tail(n as f64 + 1.0)).ln();
            let library = m.log_tail_p(&Digit::exact(n)).unwrap();
            worst_agreement = worst_agreement.max(rel(library, log_tail));
            log_tail / -(n as f64).ln()
        })
        .collect();
    let decreasing = curve.windows(2).all(|w| w[1] < w[0]);
    (
        decreasing && curve[30] < TAIL_RATIO_MAX && worst_agreement <= ORACLE_AGREEMENT,
        format!(
            "ratio {:.4} at 1e3, {:.4} at 1e6, decreasing {decreasing}, library rel err {worst_agreement:.1e}",
            curve[0], curve[30]
        ),
    )
}

fn trimmed_series() -> Verdict {
    let c = log_square_c();
    let term = |n: u64| log_r(n).powi(2) * (p(c, n).powi(2) + 2.0 * p(c, n) * p(c, n + 1));
    let partial = |hi: u64| -> f64 { (1..=hi).rev().map(term).sum() };
    let (a, b) = (partial(100_000), partial(1_000_000));
    let increment = (b - a) / b;
    let library = DigitMeasure::log_square()
        .trimmed_criterion_partial(&PartitionSpec::gauss(), 1_000_000)
        .unwrap();
    (
        increment < CRITERION_INCREMENT && rel(library, b) <= ORACLE_AGREEMENT,
        format!("partial {b:.6} (library {library:.6}), last-decade increment {increment:.3e} of total"),
    )
}

fn blowup() -> Verdict {
    let m = DigitMeasure::log_square();
    // (max ratio up to 10³, max ratio up to 10⁵)
    let maxima = stream_batch(
        &m,
        100_000,
        || (f64::NEG_INFINITY, f64::NEG_INFINITY),
        |mx: &mut (f64, f64), s| {
            if s.n >= 2 {
                let r = s.cum_log_r() / s.cum_log_r_prev;
                mx.1 = mx.1.max(r);
                if s.n <= 1_000 {
                    mx.0 = mx.0.max(r);
                }
            }
        },
    );
    let early = median(&mut maxima.iter().map(|m| m.0).collect::<Vec<_>>());
    let late = median(&mut maxima.iter().map(|m| m.1).collect::<Vec<_>>());
    (
        late >= BLOWUP_MIN && late > early,
        format!("median max blow-up {early:.3} at 1e3, {late:.3} at 1e5"),
    )
}

fn excursion() -> Verdict {
    const POSITION: u64 = 10_000;
    let m = DigitMeasure::log_square();
    let g = PartitionSpec::gauss();
    let c = log_square_c();
    let orbit = generate_orbit(&m, &g, POSITION, orbit_seed(SEED, 0)).unwrap();
    let base = orbit.step(POSITION).unwrap();
    let mut ratios = Vec::new();
    let mut pass = true;
    for (level, limit) in EXCURSION_LIMITS {
        let planted = orbit.plant_excursion(&m, &g, POSITION, level).unwrap();
        let e = lower_cover_ratio(&planted.step(POSITION).unwrap(), &m, &g).unwrap();
        // P_a ~ c / ln a and R_a = 1/a for a = e^ℓ.
        let oracle = (base.cum_log_p_prev + c.ln() - level.ln()) / (base.cum_log_r_prev - level);
        pass &= e.ratio < limit && rel(e.ratio, oracle) <= 1e-6;
        ratios.push(e.ratio);
    }
    pass &= ratios[1] < ratios[0];
    (
        pass,
        format!("ratio {:.4e} at 1e9, {:.4e} at 1e12", ratios[0], ratios[1]),
    )
}

/// Exact right-hand side `(1+δ)/(α−δ) + η` of the scanned inequality.
fn exact_rhs(alpha: (i64, i64), delta: (i64, i64), eta: (i64, i64)) -> BigRational {
    let q = |(a, b): (i64, i64)| BigRational::new(a.into(), b.into());
    (BigRational::one() + q(delta)) / (q(alpha) - q(delta)) + q(eta)
}

/// Rounds to five decimals, half away from zero.
fn five_decimals(x: &BigRational) -> String {
    let scaled = x * BigRational::from_integer(100_000.into());
    let rounded = (scaled + BigRational::new(1.into(), 2.into())).floor().to_integer();
    format!("{}.{:05}", &rounded / 100_000, &rounded % 100_000)
}

/// Independent scan: `(k₀, worst k, worst LHS)`, with LHS =
/// `ln Σ_{m=k}^{k+n} p_m / ln Σ_{m=k−1}^{k+n+1} r_m` and `Σ r` telescoped.
fn scan_k0(rhs: f64, k_hi: u64, n_hi: u64) -> (Option<u64>, u64, f64) {
    let c = log_square_c();
    let pv: Vec<f64> = (0..=k_hi + n_hi + 1)
        .map(|m| if m == 0 { 0.0 } else { p(c, m) })
        .collect();
    let mut worst = (0, f64::NEG_INFINITY);
    let mut k0 = None;
    let mut holds_above = true;
    for k in (2..=k_hi).rev() {
        let mut sp: f64 = pv[k as usize] + pv[k as usize + 1];
        let mut lhs_max = f64::NEG_INFINITY;
        for n in 1..=n_hi {
            let sr = 1.0 / (k - 1) as f64 - 1.0 / (k + n + 2) as f64;
            lhs_max = lhs_max.max(sp.ln() / sr.ln());
            sp += pv[(k + n + 1) as usize];
        }
        if lhs_max > worst.1 {
            worst = (k, lhs_max);
        }
        holds_above &= lhs_max <= rhs;
        if holds_above {
            k0 = Some(k);
        }
    }
    (k0, worst.0, worst.1)
}

fn k0_scan() -> (Verdict, Option<u64>) {
    let exact = exact_rhs((2, 1), (1, 10), (1, 20));
    let printed = five_decimals(&exact);
    let params = IneqParams::new(2.0, 0.1, 0.05).unwrap();
    let rhs = params.rhs();
    let rhs_agrees = rel(rhs, exact.to_f64().unwrap()) <= 1e-15;
    let (oracle_k0, worst_k, worst_lhs) = scan_k0(rhs, 10_000, 10_000);
    let m = DigitMeasure::log_square();
    let library = ineqsums_check(params, (2, 10_000), (1, 10_000), &m, &PartitionSpec::gauss());
    let library_k0 = match &library {
        Ok(r) => Some(r.k0),
        Err(Error::NoK0Found { .. }) => None,
        Err(e) => return ((false, format!("error: {e}")), None),
    };
    let consistent = library_k0 == oracle_k0 && rhs_agrees;
    let detail = match library_k0 {
        Some(k0) => format!("RHS {printed}, k0 = {k0}"),
        None => format!("RHS {printed}, no k0 in [2, 10000] (worst LHS {worst_lhs:.4} at k = {worst_k})"),
    };
    let detail = if consistent {
        detail
    } else {
        format!("{detail}; oracle k0 {oracle_k0:?} disagrees")
    };
    (
        (printed == RHS_PRINTED && library_k0.is_some() && consistent, detail),
        library_k0,
    )
}

fn packing(k0: Option<u64>) -> Verdict {
    let k0 = k0.unwrap_or(FALLBACK_K0);
    let m = DigitMeasure::log_square();
    let g = PartitionSpec::gauss();
    let c = log_square_c();
    struct State {
        case_max: f64,
        last_not_one: Option<StepView>,
    }
    let states = stream_batch(
        &m,
        100_000,
        || State {
            case_max: f64::NEG_INFINITY,
            last_not_one: None,
        },
        |st: &mut State, s| {
            if s.n >= 10_000 {
                let r = case_split_upper(s, &m, &g, k0).unwrap().ratio;
                if r.is_finite() {
                    st.case_max = st.case_max.max(r);
                }
            }
            if s.digit.exact_value() != Some(1) {
                st.last_not_one = Some(*s);
            }
        },
    );
    let mut neighbor = Vec::new();
    let mut worst_agreement = 0.0f64;
    for st in &states {
        let Some(step) = st.last_not_one else { continue };
        let e = neighbor_upper_ratio(&step, &m, &g).unwrap();
        if let Some(a) = step.digit.exact_value().filter(|&a| a < DEFAULT_N_TABLE) {
            let mass = p(c, a - 1) + p(c, a) + p(c, a + 1);
            let oracle = (step.cum_log_p_prev + mass.ln()) / (step.cum_log_r_prev + log_r(a + 1));
            worst_agreement = worst_agreement.max(rel(e.ratio, oracle));
        }
        neighbor.push(e.ratio);
    }
    let nb = median(&mut neighbor);
    let cs = median(&mut states.iter().map(|s| s.case_max).collect::<Vec<_>>());
    (
        (NEIGHBOR_BAND.0..=NEIGHBOR_BAND.1).contains(&nb) && cs <= CASE_SPLIT_MAX && worst_agreement <= 1e-9,
        format!(
            "neighbor median {nb:.4}, case-split median max {cs:.4} (k0 = {k0}), oracle rel err {worst_agreement:.1e}"
        ),
    )
}

fn distortion() -> Verdict {
    let mut rng = orbit_rng(orbit_seed(SEED, 10));
    let mut violations = 0;
    let mut worst = 0.0f64;
    let mut worst_agreement = 0.0f64;
    for _ in 0..DISTORTION_SEQUENCES {
        let depth = rng.random_range(1..=50usize);
        let word: Vec<u64> = (0..depth).map(|_| rng.random_range(1..=1_000)).collect();
        // Gauss length 1/(q_n(q_n + q_{n−1})) against the product of 1/(a(a+1)).
        let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
        let mut linear = BigInt::one();
        for &a in &word {
            let next = &q * a + &q_prev;
            q_prev = std::mem::replace(&mut q, next);
            linear *= BigInt::from(a) * BigInt::from(a + 1);
        }
        let gauss = &q * (&q + &q_prev);
        let residual = (ln_big(&gauss) - ln_big(&linear)).abs();
        let bound = (depth as f64 + 1.0) * std::f64::consts::LN_2;
        let digits: Vec<Digit> = word.iter().map(|&a| Digit::exact(a)).collect();
        let library = distortion_residual(&digits).unwrap();
        worst_agreement = worst_agreement.max((library - residual).abs() / ln_big(&linear));
        worst = worst.max(library / bound);
        if library > bound || residual > bound {
            violations += 1;
        }
    }
    (
        violations == 0 && worst_agreement <= 1e-12,
        format!("{violations} violations, worst residual/bound {worst:.4}, oracle rel err {worst_agreement:.1e}"),
    )
}

fn sampler() -> Verdict {
    let m = DigitMeasure::log_square();
    let c = log_square_c();
    let mut rng = orbit_rng(orbit_seed(SEED, 11));
    let mut counts = [0u64; 51];
    let mut beyond = 0u64;
    for _ in 0..SAMPLER_DRAWS {
        let d = m.sample_digit(&mut rng);
        match d.exact_value() {
            Some(v) if v <= 50 => counts[v as usize - 1] += 1,
            _ => counts[50] += 1,
        }
        if d.exact_value().is_none_or(|v| v > DEFAULT_N_TABLE) {
            beyond += 1;
        }
    }
    let n = SAMPLER_DRAWS as f64;
    let head: Vec<f64> = (1..=50).map(|k| p(c, k)).collect();
    let rest = 1.0 - head.iter().sum::<f64>();
    let stat: f64 = counts
        .iter()
        .zip(head.iter().chain([rest].iter()))
        .map(|(&k, &pk)| (k as f64 - n * pk).powi(2) / (n * pk))
        .sum();
    let p_value = ChiSquared::new(50.0).unwrap().sf(stat);
    let p_tail = c * f_tail(DEFAULT_N_TABLE as f64 + 2.0);
    let z = (beyond as f64 - n * p_tail) / (n * p_tail * (1.0 - p_tail)).sqrt();
    (
        p_value >= CHI_SQUARE_LEVEL && z.abs() <= TAIL_BUCKET_SIGMAS,
        format!("chi-square p = {p_value:.4}, tail bucket {beyond} draws, z = {z:.3}"),
    )
}

/// Exact geometric(q) mass of `[lo, hi]` under the piecewise-linear Gauss
/// partition. Child `n` of `[L, L+W]` is `[L + W/(n+1), L + W/n]`.
struct BallEnumerator {
    lo: BigRational,
    hi: BigRational,
    q: BigRational,
    /// Runs lighter than this are left unresolved.
    floor: f64,
    inside: BigRational,
    unresolved: f64,
}

impl BallEnumerator {
    fn classify(&self, left: &BigRational, right: &BigRational) -> Option<bool> {
        if left >= &self.lo && right <= &self.hi {
            Some(true)
        } else if right <= &self.lo || left >= &self.hi {
            Some(false)
        } else {
            None
        }
    }

    fn cylinder(&mut self, left: BigRational, width: BigRational, mass: BigRational) {
        let right = &left + &width;
        match self.classify(&left, &right) {
            Some(true) => self.inside += mass,
            Some(false) => {}
            None => self.children(&left, &width, &mass),
        }
    }

    fn children(&mut self, left: &BigRational, width: &BigRational, mass: &BigRational) {
        let int = |n: u64| BigRational::from_integer(n.into());
        let one = BigRational::one();
        let mut runs: Vec<(u64, Option<u64>)> = vec![(1, None)];
        while let Some((n1, n2)) = runs.pop() {
            let run_left = match n2 {
                Some(n2) => left + width / int(n2 + 1),
                None => left.clone(),
            };
            let run_right = left + width / int(n1);
            let q_after = n2.map_or(BigRational::zero(), |n2| pow(&self.q, n2));
            let run_mass = mass * (pow(&self.q, n1 - 1) - q_after);
            match self.classify(&run_left, &run_right) {
                Some(true) => self.inside += run_mass,
                Some(false) => {}
                None if run_mass.to_f64().unwrap_or(0.0) < self.floor => {
                    self.unresolved += run_mass.to_f64().unwrap_or(0.0)
                }
                None => match n2 {
                    Some(n2) if n2 == n1 => {
                        let child_mass = mass * (&one - &self.q) * pow(&self.q, n1 - 1);
                        self.cylinder(run_left, width / (int(n1) * int(n1 + 1)), child_mass);
                    }
                    Some(n2) => {
                        let mid = n1 + (n2 - n1) / 2;
                        runs.push((n1, Some(mid)));
                        runs.push((mid + 1, Some(n2)));
                    }
                    None => {
                        runs.push((n1, Some(2 * n1)));
                        runs.push((2 * n1 + 1, None));
                    }
                },
            }
        }
    }
}

fn pow(q: &BigRational, e: u64) -> BigRational {
    num_traits::pow(q.clone(), e as usize)
}

/// `[ln I, ln(I + U)]` for the ball of radius `factor·|I(prefix)|` about its midpoint.
fn exact_ball(prefix: &[u64], tenths: i64, factor: &BigRational) -> (f64, f64) {
    let q = BigRational::new(tenths.into(), 10.into());
    let one = BigRational::one();
    let (mut left, mut width, mut mass) = (BigRational::zero(), one.clone(), one.clone());
    for &a in prefix {
        let a_r = BigRational::from_integer(a.into());
        left += &width / (&a_r + &one);
        width /= &a_r * (&a_r + &one);
        mass = mass * (&one - &q) * pow(&q, a - 1);
    }
    let center = &left + &width / BigRational::from_integer(2.into());
    let radius = &width * factor;
    let mut e = BallEnumerator {
        lo: (&center - &radius).max(BigRational::zero()),
        hi: (&center + &radius).min(one.clone()),
        q,
        floor: mass.to_f64().unwrap() * 1e-18,
        inside: BigRational::zero(),
        unresolved: 0.0,
    };
    e.cylinder(BigRational::zero(), one.clone(), one);
    let lo = ln_rational(&e.inside);
    (lo, lo + (e.unresolved / lo.exp()).ln_1p())
}

fn ball_validity() -> Verdict {
    let g = PartitionSpec::gauss();
    let mut rng = orbit_rng(orbit_seed(SEED, 12));
    let mut violations = 0;
    let mut widest_truth = 0.0f64;
    for _ in 0..BALLS {
        let tenths = rng.random_range(3..=7i64);
        let depth = rng.random_range(0..=8usize);
        let prefix: Vec<u64> = (0..depth).map(|_| rng.random_range(1..=12u64)).collect();
        let factor = 0.05 + 4.95 * rng.random::<f64>();
        let measure = DigitMeasure::geometric(tenths as f64 / 10.0).unwrap();
        let digits: Vec<Digit> = prefix.iter().map(|&a| Digit::exact(a)).collect();
        let log_len: f64 = prefix.iter().map(|&a| log_r(a)).sum();
        let b = ball_measure_bracket(&measure, &g, &digits, log_len + factor.ln(), BALL_DEPTH_CAP).unwrap();
        let (t_lo, t_hi) = exact_ball(&prefix, tenths, &BigRational::from_float(factor).unwrap());
        widest_truth = widest_truth.max(t_hi - t_lo);
        let tol = BALL_REL_TOL * t_lo.abs().max(1.0);
        if !(b.log_lo <= t_lo + tol && t_hi <= b.log_hi + tol) {
            violations += 1;
        }
    }
    (
        violations == 0,
        format!("{violations} violations in {BALLS} balls, widest exact interval {widest_truth:.1e}"),
    )
}

// ---- driver -----------------------------------------------------------------

fn title(id: u32) -> &'static str {
    [
        "finite-entropy oracle",
        "symbolic dimension, infinite entropy",
        "convergence exponent",
        "tail decay ratio",
        "trimmed-convergence series",
        "blow-up statistic",
        "forced excursion",
        "packing mechanism",
        "k0 scan",
        "distortion bound",
        "sampler law",
        "ball bracket validity",
    ][id as usize - 1]
}

fn main() -> ExitCode {
    let mut k0 = None;
    let mut unexpected = Vec::new();
    // Criterion 8 takes k₀ from the criterion-9 scan.
    for id in [1, 2, 3, 4, 5, 6, 7, 9, 8, 10, 11, 12u32] {
        let start = Instant::now();
        let (pass, detail) = match id {
            1 => finite_entropy_oracle(),
            2 => symbolic_trend(),
            3 => convergence_exponent(),
            4 => tail_decay_ratio(),
            5 => trimmed_series(),
            6 => blowup(),
            7 => excursion(),
            8 => packing(k0),
            9 => {
                let (v, found) = k0_scan();
                k0 = found;
                v
            }
            10 => distortion(),
            11 => sampler(),
            _ => ball_validity(),
        };
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {id} ({}): {detail} [{:.1} s]",
            title(id),
            start.elapsed().as_secs_f64()
        );
        if pass == KNOWN_UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected (known unattainable: {KNOWN_UNATTAINABLE:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
