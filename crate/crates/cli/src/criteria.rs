//! The twelve acceptance criteria at their stated sizes, for `report`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use gibbsdim::maps::{distortion_bound, distortion_residual};
use gibbsdim::orbits::{orbit_rng, orbit_seed};
use gibbsdim::{
    ball_measure_bracket, ineqsums_check, neighbor_upper_ratio, Digit, DigitMeasure, Error, IneqParams, PartitionSpec,
    Result, VolumeLemma,
};

use crate::config::Model;
use crate::experiments::{finite_median, forced_excursion, run_batch, symbolic_at, Plan};
use crate::oracle::{ball_mass, ln_rational};
use crate::output::Check;

pub const ALL: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

pub const ORACLE_REL_TOL: f64 = 0.02;
pub const ORACLE_BUDGET: Duration = Duration::from_secs(10);
pub const SYMBOLIC_BAND: (f64, f64) = (0.5, 0.70);
pub const EXCESS_AGREEMENT: f64 = 0.5;
pub const SYMBOLIC_BUDGET: Duration = Duration::from_secs(120);
pub const EXPONENT_TOL: f64 = 1e-2;
pub const TAIL_RATIO_MAX: f64 = 0.25;
pub const CRITERION_INCREMENT: f64 = 1e-3;
pub const BLOWUP_MIN: f64 = 3.0;
pub const EXCURSION_LIMITS: [(f64, f64); 2] = [(1e9, 0.05), (1e12, 1e-4)];
pub const NEIGHBOR_BAND: (f64, f64) = (0.35, 0.65);
pub const CASE_SPLIT_MAX: f64 = 0.679;
/// `k₀` used by the case-split bound when the scan finds none.
pub const FALLBACK_K0: u64 = 10_000;
pub const RHS_PRINTED: &str = "0.62895";
pub const CHI_SQUARE_LEVEL: f64 = 1e-3;
pub const TAIL_BUCKET_SIGMAS: f64 = 3.0;
pub const BALL_REL_TOL: f64 = 1e-9;

const SYMBOLIC_CHECKPOINTS: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];

fn title(id: u32) -> &'static str {
    match id {
        1 => "finite-entropy oracle",
        2 => "symbolic dimension, infinite entropy",
        3 => "convergence exponent",
        4 => "tail decay ratio",
        5 => "trimmed-convergence series",
        6 => "blow-up statistic",
        7 => "forced excursion",
        8 => "packing mechanism",
        9 => "k0 scan",
        10 => "distortion bound",
        11 => "sampler law",
        12 => "ball bracket validity",
        _ => "unknown",
    }
}

/// Runs criterion `id`; numerical errors become a FAIL line. `depth_cap`
/// bounds the bracket resolution of criterion 12.
pub fn run(id: u32, seed: u64, depth_cap: usize) -> Check {
    let start = Instant::now();
    let outcome = match id {
        1 => finite_entropy_oracle(seed),
        2 => symbolic_trend(seed),
        3 => convergence_exponent(),
        4 => tail_decay_ratio(),
        5 => trimmed_series(),
        6 => blowup(seed),
        7 => excursion(seed),
        8 => packing(seed),
        9 => k0_scan().map(|(pass, detail, _)| (pass, detail)),
        10 => distortion(seed),
        11 => sampler(seed),
        12 => ball_validity(seed, depth_cap),
        _ => Err(Error::InvalidParameter(format!("no criterion {id}"))),
    };
    let name = format!("criterion {id} ({})", title(id));
    match outcome {
        Ok((pass, detail)) => Check::new(name, pass, format!("{detail} [{:.1} s]", start.elapsed().as_secs_f64())),
        Err(e) => Check::new(name, false, format!("error: {e}")),
    }
}

type Outcome = Result<(bool, String)>;

fn gauss() -> PartitionSpec {
    PartitionSpec::gauss()
}

fn plan(length: u64, checkpoints: Vec<u64>) -> Plan {
    Plan {
        length,
        checkpoints,
        model: Model::PiecewiseLinear,
        case_split: None,
        neighbor_until: None,
    }
}

fn finite_entropy_oracle(seed: u64) -> Outcome {
    let m = DigitMeasure::geometric(0.5)?;
    let g = gauss();
    let target = match m.volume_lemma_dim(&g, 10_000)? {
        VolumeLemma::Dimension { dim, .. } => dim,
        VolumeLemma::Divergent { .. } => return Err(Error::EstimationFailed("entropy diverges".into())),
    };
    let start = Instant::now();
    let runs = run_batch(&m, &g, 100, seed, &plan(100_000, vec![100_000]))?;
    let elapsed = start.elapsed();
    let median = finite_median(runs.iter().map(|r| symbolic_at(&r.snapshots[0]).ratio));
    let rel = (median - target).abs() / target;
    Ok((
        rel <= ORACLE_REL_TOL && elapsed < ORACLE_BUDGET,
        format!(
            "median {median:.5} vs h/lambda {target:.5}, rel {rel:.4}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    ))
}

/// Medians of the symbolic ratio at each checkpoint.
pub fn symbolic_medians(seed: u64, orbits: usize, checkpoints: &[u64]) -> Result<Vec<f64>> {
    let m = DigitMeasure::log_square();
    let g = gauss();
    let length = *checkpoints.last().expect("checkpoints");
    let runs = run_batch(&m, &g, orbits, seed, &plan(length, checkpoints.to_vec()))?;
    Ok((0..checkpoints.len())
        .map(|i| finite_median(runs.iter().map(|r| symbolic_at(&r.snapshots[i]).ratio)))
        .collect())
}

fn symbolic_trend(seed: u64) -> Outcome {
    let start = Instant::now();
    let med = symbolic_medians(seed, 100, &SYMBOLIC_CHECKPOINTS)?;
    let elapsed = start.elapsed();
    let decreasing = med.windows(2).all(|w| w[1] < w[0]);
    let last = med[3];
    let in_band = (SYMBOLIC_BAND.0..=SYMBOLIC_BAND.1).contains(&last);
    let excess = |i: usize| (med[i] - 0.5) * (SYMBOLIC_CHECKPOINTS[i] as f64).ln();
    let (e5, e6) = (excess(2), excess(3));
    let agree = (e6 - e5).abs() <= EXCESS_AGREEMENT * e5.abs().max(e6.abs());
    Ok((
        decreasing && in_band && agree && elapsed < SYMBOLIC_BUDGET,
        format!(
            "medians {:.4} {:.4} {:.4} {:.4}, excess*ln n {e5:.3} -> {e6:.3}, {:.1} s",
            med[0],
            med[1],
            med[2],
            med[3],
            elapsed.as_secs_f64()
        ),
    ))
}

fn convergence_exponent() -> Outcome {
    let g = gauss();
    let s = g.convergence_exponent()?;
    let fit = g.tail_asymptotic_check(1_000, 1_000_000)?;
    let fitted = 1.0 / (1.0 + fit.fitted_slope);
    let m = DigitMeasure::log_square();
    let rows = m
        .measure_stats(&g, &[1_000, 10_000, 100_000, 1_000_000, 10_000_000])?
        .rows;
    let excess: Vec<f64> = rows.iter().map(|r| r.decay_pointwise - 0.5).collect();
    let shrinking = excess.iter().all(|&e| e > 0.0) && excess.windows(2).all(|w| w[1] < w[0]);
    Ok((
        (s - 0.5).abs() <= EXPONENT_TOL && (fitted - 0.5).abs() <= EXPONENT_TOL && shrinking,
        format!(
            "s_inf {s:.6}, fitted {fitted:.6}, decay-ratio excess {:.4} -> {:.4}",
            excess[0],
            excess[excess.len() - 1]
        ),
    ))
}

/// `ln P_n / ln R_n` on a log grid of `[10³, 10⁶]`.
pub fn tail_ratio_curve() -> Result<Vec<(u64, f64)>> {
    let grid: Vec<u64> = (0..=30)
        .map(|i| (1e3 * 10f64.powf(i as f64 / 10.0)).round() as u64)
        .collect();
    let rows = DigitMeasure::log_square().measure_stats(&gauss(), &grid)?.rows;
    Ok(rows.iter().map(|r| (r.n, r.tail_ratio)).collect())
}

fn tail_decay_ratio() -> Outcome {
    let curve = tail_ratio_curve()?;
    let decreasing = curve.windows(2).all(|w| w[1].1 < w[0].1);
    let last = curve[curve.len() - 1].1;
    Ok((
        decreasing && last < TAIL_RATIO_MAX,
        format!(
            "ratio {:.4} at 1e3, {last:.4} at 1e6, decreasing {decreasing}",
            curve[0].1
        ),
    ))
}

fn trimmed_series() -> Outcome {
    let rows = DigitMeasure::log_square()
        .measure_stats(&gauss(), &[100_000, 1_000_000])?
        .rows;
    let (a, b) = (rows[0].criterion, rows[1].criterion);
    let rel = (b - a) / b;
    Ok((
        rel < CRITERION_INCREMENT,
        format!("partial {b:.6}, last-decade increment {rel:.3e} of total"),
    ))
}

fn blowup(seed: u64) -> Outcome {
    let m = DigitMeasure::log_square();
    let runs = run_batch(&m, &gauss(), 100, seed, &plan(100_000, vec![1_000, 100_000]))?;
    let early = finite_median(runs.iter().map(|r| r.snapshots[0].max_blowup));
    let late = finite_median(runs.iter().map(|r| r.snapshots[1].max_blowup));
    Ok((
        late >= BLOWUP_MIN && late > early,
        format!("median max blow-up {early:.3} at 1e3, {late:.3} at 1e5"),
    ))
}

fn excursion(seed: u64) -> Outcome {
    let m = DigitMeasure::log_square();
    let levels: Vec<f64> = EXCURSION_LIMITS.iter().map(|l| l.0).collect();
    let out = forced_excursion(&m, &gauss(), seed, 10_000, &levels)?;
    let below = out.iter().zip(EXCURSION_LIMITS).all(|((_, e), (_, lim))| e.ratio < lim);
    let monotone = out.windows(2).all(|w| w[1].1.ratio < w[0].1.ratio);
    Ok((
        below && monotone,
        format!("ratio {:.4e} at 1e9, {:.4e} at 1e12", out[0].1.ratio, out[1].1.ratio),
    ))
}

/// The criterion-9 scan: `(found, detail, k₀)`.
pub fn k0_scan() -> Result<(bool, String, Option<u64>)> {
    let params = IneqParams::new(2.0, 0.1, 0.05)?;
    let rhs = format!("{:.5}", params.rhs());
    let m = DigitMeasure::log_square();
    match ineqsums_check(params, (2, 10_000), (1, 10_000), &m, &gauss()) {
        Ok(r) => Ok((rhs == RHS_PRINTED, format!("RHS {rhs}, k0 = {}", r.k0), Some(r.k0))),
        Err(Error::NoK0Found { worst_k, worst_lhs, .. }) => Ok((
            false,
            format!("RHS {rhs}, no k0 in [2, 10000] (worst LHS {worst_lhs:.4} at k = {worst_k})"),
            None,
        )),
        Err(e) => Err(e),
    }
}

fn packing(seed: u64) -> Outcome {
    let m = DigitMeasure::log_square();
    let g = gauss();
    let k0 = k0_scan()?.2.unwrap_or(FALLBACK_K0);
    let p = Plan {
        case_split: Some((k0, 10_000)),
        neighbor_until: Some(100_000),
        ..plan(100_000, vec![100_000])
    };
    let runs = run_batch(&m, &g, 100, seed, &p)?;
    let mut neighbor = Vec::new();
    for r in &runs {
        if let Some(step) = &r.last_neighbor_step {
            neighbor.push(neighbor_upper_ratio(step, &m, &g)?.ratio);
        }
    }
    let nb = finite_median(neighbor);
    let cs = finite_median(runs.iter().filter_map(|r| r.case_max));
    let pass = (NEIGHBOR_BAND.0..=NEIGHBOR_BAND.1).contains(&nb) && cs <= CASE_SPLIT_MAX;
    Ok((
        pass,
        format!("neighbor median {nb:.4}, case-split median max {cs:.4} (k0 = {k0})"),
    ))
}

fn distortion(seed: u64) -> Outcome {
    let mut rng = orbit_rng(orbit_seed(seed, 10));
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..1_000 {
        let depth = rng.random_range(1..=50usize);
        let digits: Vec<Digit> = (0..depth).map(|_| Digit::exact(rng.random_range(1..=1_000))).collect();
        let r = distortion_residual(&digits)?;
        let bound = distortion_bound(depth);
        worst = worst.max(r / bound);
        if r > bound {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations, worst residual/bound {worst:.4}"),
    ))
}

/// Chi-square p-value on digits 1..50 plus `>50`, and the tail bucket in standard errors.
pub fn sampler_stats(measure: &DigitMeasure, draws: u64, seed: u64) -> Result<(f64, f64)> {
    let mut rng = orbit_rng(orbit_seed(seed, 11));
    let n_table = measure.n_table();
    let mut counts = [0u64; 51];
    let mut beyond = 0u64;
    for _ in 0..draws {
        let d = measure.sample_digit(&mut rng);
        match d.exact_value() {
            Some(v) if v <= 50 => counts[v as usize - 1] += 1,
            _ => counts[50] += 1,
        }
        if d.exact_value().is_none_or(|v| v > n_table) {
            beyond += 1;
        }
    }
    let n = draws as f64;
    let mut stat = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let p = if i < 50 {
            measure.log_p_at(i as u64 + 1)?.exp()
        } else {
            measure.log_tail_p(&Digit::exact(51))?.exp()
        };
        stat += (c as f64 - n * p).powi(2) / (n * p);
    }
    let chi = ChiSquared::new(50.0).map_err(|e| Error::EstimationFailed(e.to_string()))?;
    let p_value = chi.sf(stat);
    let p_tail = measure.log_tail_p(&Digit::exact(n_table + 1))?.exp();
    let se = (n * p_tail * (1.0 - p_tail)).sqrt();
    Ok((p_value, (beyond as f64 - n * p_tail) / se))
}

fn sampler(seed: u64) -> Outcome {
    let (p_value, z) = sampler_stats(&DigitMeasure::log_square(), 1_000_000, seed)?;
    Ok((
        p_value >= CHI_SQUARE_LEVEL && z.abs() <= TAIL_BUCKET_SIGMAS,
        format!("chi-square p = {p_value:.4}, tail bucket z = {z:.3}"),
    ))
}

fn ball_validity(seed: u64, depth_cap: usize) -> Outcome {
    let g = gauss();
    let mut rng = orbit_rng(orbit_seed(seed, 12));
    let mut violations = 0;
    let mut widened = 0;
    let mut widths = Vec::with_capacity(1_000);
    for _ in 0..1_000 {
        let tenths = rng.random_range(3..=7i64);
        let q = BigRational::new(BigInt::from(tenths), BigInt::from(10));
        let measure = DigitMeasure::geometric(tenths as f64 / 10.0)?;
        let depth = rng.random_range(0..=8usize);
        let prefix: Vec<u64> = (0..depth).map(|_| rng.random_range(1..=12u64)).collect();
        let factor_f: f64 = 0.05 + 4.95 * rng.random::<f64>();
        let factor = BigRational::from_float(factor_f).expect("finite");
        let digits: Vec<Digit> = prefix.iter().map(|&d| Digit::exact(d)).collect();
        let mut log_len = 0.0;
        for d in &digits {
            log_len += g.log_r(d)?;
        }
        let bracket = ball_measure_bracket(&measure, &g, &digits, log_len + factor_f.ln(), depth_cap)?;
        widened += bracket.widened as u32;
        widths.push(bracket.log_hi - bracket.log_lo);
        let truth = ball_mass(&prefix, &q, &factor, 1e-15);
        // True ln μ(B) lies in [ln I, ln(I + U)].
        let true_lo = ln_rational(&truth.inside);
        let true_hi = true_lo + (truth.unresolved / true_lo.exp()).ln_1p();
        let ok = bracket.log_lo <= true_lo + BALL_REL_TOL && true_hi <= bracket.log_hi + BALL_REL_TOL;
        if !ok {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!(
            "{violations} violations in 1000 balls ({widened} widened, median log width {:.3e})",
            gibbsdim::numeric::median(&widths)
        ),
    ))
}
