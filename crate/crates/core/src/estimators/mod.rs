//! Local-dimension estimators built from cylinders and cylinder unions.
//!
//! Every estimate is a ratio `ln(measure) / ln(length)` of one covering set at
//! one depth. Lengths use the piecewise-linear model, where they are exact.

mod ball;
mod ineqsums;

use std::fmt;

pub use ball::{ball_measure_bracket, BallBracket, MAX_BALL_DEPTH};
pub use ineqsums::{ineqsums_check, IneqParams, IneqReport};

use crate::digit::Digit;
use crate::maps::{cyl_log_length, MapModel};
use crate::measures::DigitMeasure;
use crate::numeric::log_add_exp;
use crate::orbits::{Orbit, StepView};
use crate::partition::PartitionSpec;
use crate::{Error, Result};

/// Ratios whose numerator and denominator are both smaller than this in
/// magnitude are reported as degenerate instead of evaluated.
pub const DEGENERATE_TOL: f64 = 1e-9;

/// Which half of the case split fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitCase {
    /// `I(a_1…a_{n−1}, k₀)` lies inside the comparison ball.
    Inside,
    /// It does not; the ball is covered by right-hand siblings of `I_n(x)`.
    Siblings,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimateKind {
    Symbolic,
    LowerCover,
    NeighborUpper,
    CaseSplit { k0: u64, case: SplitCase },
}

impl fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateKind::Symbolic => write!(f, "symbolic"),
            EstimateKind::LowerCover => write!(f, "lower_cover"),
            EstimateKind::NeighborUpper => write!(f, "neighbor_upper"),
            EstimateKind::CaseSplit { k0, case } => {
                let c = match case {
                    SplitCase::Inside => 1,
                    SplitCase::Siblings => 2,
                };
                write!(f, "case_split[k0={k0};case={c}]")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateFlag {
    Ok,
    /// The covering set is the whole space, so the ratio is 0/0.
    DegenerateWholeSpace,
}

impl fmt::Display for EstimateFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateFlag::Ok => write!(f, "ok"),
            EstimateFlag::DegenerateWholeSpace => write!(f, "degenerate_whole_space"),
        }
    }
}

/// One evaluation of `ln μ(U) / ln |U|` for a covering set `U` at depth `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverEstimate {
    pub n: u64,
    pub kind: EstimateKind,
    pub log_measure: f64,
    pub log_length: f64,
    /// NaN when flagged degenerate.
    pub ratio: f64,
    pub flag: EstimateFlag,
}

impl CoverEstimate {
    fn new(n: u64, kind: EstimateKind, log_measure: f64, log_length: f64) -> CoverEstimate {
        let degenerate = log_measure.abs() < DEGENERATE_TOL && log_length.abs() < DEGENERATE_TOL;
        CoverEstimate {
            n,
            kind,
            log_measure,
            log_length,
            ratio: if degenerate { f64::NAN } else { log_measure / log_length },
            flag: if degenerate {
                EstimateFlag::DegenerateWholeSpace
            } else {
                EstimateFlag::Ok
            },
        }
    }
}

/// `ln μ(I_n(x)) / ln |I_n(x)|`.
pub fn symbolic_dimension(step: &StepView) -> CoverEstimate {
    CoverEstimate::new(step.n, EstimateKind::Symbolic, step.cum_log_p(), step.cum_log_r())
}

/// Symbolic ratio with the Gauss-map cylinder length in place of the linear one.
pub fn symbolic_dimension_gauss_map(orbit: &Orbit, n: u64) -> Result<CoverEstimate> {
    let digits = orbit
        .digits()
        .get(..n as usize)
        .filter(|_| n >= 1)
        .ok_or_else(|| Error::InvalidParameter(format!("step {n} outside [1, {}]", orbit.len())))?;
    let log_length = cyl_log_length(MapModel::GaussMap, digits)?;
    Ok(CoverEstimate::new(
        n,
        EstimateKind::Symbolic,
        orbit.cum_log_p(n)?,
        log_length,
    ))
}

/// Ratio for the union `⋃_{m≥0} I(a_1, …, a_{n−1}, a_n + m)`.
pub fn lower_cover_ratio(step: &StepView, measure: &DigitMeasure, partition: &PartitionSpec) -> Result<CoverEstimate> {
    let log_measure = step.cum_log_p_prev + measure.log_cond_tail(step.prev.as_ref(), &step.digit)?;
    let log_length = step.cum_log_r_prev + partition.log_tail_r(&step.digit)?;
    Ok(CoverEstimate::new(
        step.n,
        EstimateKind::LowerCover,
        log_measure,
        log_length,
    ))
}

/// Ratio of the three-cylinder measure `μ(I^l_n ∪ I_n ∪ I^r_n)` to the length
/// of the left neighbor `|I^l_n|`, the smallest of the three.
pub fn neighbor_upper_ratio(
    step: &StepView,
    measure: &DigitMeasure,
    partition: &PartitionSpec,
) -> Result<CoverEstimate> {
    let a = step.digit;
    let right = a.pred().ok_or(Error::DigitOneSkipped)?;
    let left = a.succ();
    let log_measure = step.cum_log_p_prev + measure.log_cond_range(step.prev.as_ref(), &right, Some(&left))?;
    let log_length = step.cum_log_r_prev + partition.log_r(&left)?;
    Ok(CoverEstimate::new(
        step.n,
        EstimateKind::NeighborUpper,
        log_measure,
        log_length,
    ))
}

/// Upper estimate at the ball of radius `ρ = |⋃_{m≥0} I(a_1…a_{n−1}, a_n+m)|`.
///
/// Case 1 fires when the run of cylinders from `I(…, a_n)` to `I(…, k₀)` fits
/// in `ρ`, so the `k₀`-cylinder is inside `B(x, ρ)`. Otherwise the right-hand
/// siblings `a_n − 1, …, a_n − J` that fit in `ρ` cover part of the ball and
/// the first `k₁ = J + 1` siblings bound its radius.
pub fn case_split_upper(
    step: &StepView,
    measure: &DigitMeasure,
    partition: &PartitionSpec,
    k0: u64,
) -> Result<CoverEstimate> {
    if step.n < 2 {
        return Err(Error::InvalidParameter("the case split needs depth n >= 2".into()));
    }
    if k0 == 0 {
        return Err(Error::InvalidParameter("k0 must be at least 1".into()));
    }
    let a = step.digit;
    let k0d = Digit::exact(k0);
    let prev = step.prev.as_ref();
    let log_tail_a = partition.log_tail_r(&a)?;
    let inside = !k0d.cmp_value(&a).is_lt() || partition.log_range_r(&k0d, Some(&a))? <= log_tail_a;
    if inside {
        let log_measure = step.cum_log_p_prev + measure.log_cond_p(prev, &k0d)?;
        let kind = EstimateKind::CaseSplit {
            k0,
            case: SplitCase::Inside,
        };
        return Ok(CoverEstimate::new(step.n, kind, log_measure, step.cum_log_r_prev));
    }

    // Siblings m..=a with R_m <= R_a + R_{a+1} lie in the ball; the run is
    // extended by one more sibling (clamped at digit 1) to cover it.
    let log_reach = log_add_exp(log_tail_a, partition.log_tail_r(&a.succ())?);
    let first_inside = if log_reach >= 0.0 {
        Digit::exact(1)
    } else {
        partition.invert_log_tail(log_reach)?.succ()
    };
    let log_measure = step.cum_log_p_prev + measure.log_cond_range(prev, &first_inside, Some(&a))?;
    let lowest_cover = first_inside.pred().unwrap_or(first_inside);
    let log_length = step.cum_log_r_prev + partition.log_range_r(&lowest_cover, Some(&a))?;
    let kind = EstimateKind::CaseSplit {
        k0,
        case: SplitCase::Siblings,
    };
    Ok(CoverEstimate::new(step.n, kind, log_measure, log_length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::generate_orbit;

    fn ds(v: &[u64]) -> Vec<Digit> {
        v.iter().map(|&n| Digit::exact(n)).collect()
    }

    #[test]
    fn whole_space_is_degenerate() {
        let m = DigitMeasure::geometric(0.5).unwrap();
        let g = PartitionSpec::gauss();
        let o = Orbit::from_digits(&m, &g, &ds(&[1, 3]), 0).unwrap();
        let e = lower_cover_ratio(&o.step(1).unwrap(), &m, &g).unwrap();
        assert_eq!(e.flag, EstimateFlag::DegenerateWholeSpace);
        assert!(e.ratio.is_nan());
        let e2 = lower_cover_ratio(&o.step(2).unwrap(), &m, &g).unwrap();
        assert_eq!(e2.flag, EstimateFlag::Ok);
        // μ = p_1 P_3 = 2^-1 2^-2, length = r_1 R_3 = 1/6.
        assert!((e2.log_measure + 3.0 * 2f64.ln()).abs() < 1e-14);
        assert!((e2.log_length + 6f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn single_atom_symbolic_is_zero() {
        let m = DigitMeasure::single_atom();
        let g = PartitionSpec::gauss();
        let o = generate_orbit(&m, &g, 10, 0).unwrap();
        for n in 1..=10 {
            assert_eq!(symbolic_dimension(&o.step(n).unwrap()).ratio, 0.0);
        }
    }

    #[test]
    fn neighbor_skips_digit_one() {
        let m = DigitMeasure::geometric(0.5).unwrap();
        let g = PartitionSpec::gauss();
        let o = Orbit::from_digits(&m, &g, &ds(&[2, 1, 2]), 0).unwrap();
        assert_eq!(
            neighbor_upper_ratio(&o.step(2).unwrap(), &m, &g),
            Err(Error::DigitOneSkipped)
        );
        let e = neighbor_upper_ratio(&o.step(3).unwrap(), &m, &g).unwrap();
        // μ(I(2,1) ∪ I(2,2) ∪ I(2,3)) = p_2 (p_1 + p_2 + p_3); |I(2,3)| = r_2 r_3.
        let lm = (0.25f64 * 0.875).ln() + 0.5f64.ln();
        let ll = (1.0f64 / 6.0).ln() + 0.5f64.ln() + (1.0f64 / 12.0).ln();
        assert!((e.log_measure - lm).abs() < 1e-14);
        assert!((e.log_length - ll).abs() < 1e-14);
    }

    #[test]
    fn case_split_is_exhaustive_and_degenerates_at_own_digit() {
        let m = DigitMeasure::log_square();
        let g = PartitionSpec::gauss();
        let o = Orbit::from_digits(&m, &g, &ds(&[3, 40, 7]), 0).unwrap();
        let s = o.step(2).unwrap();
        let own = case_split_upper(&s, &m, &g, 40).unwrap();
        assert!(matches!(
            own.kind,
            EstimateKind::CaseSplit {
                case: SplitCase::Inside,
                ..
            }
        ));
        let expected = (s.cum_log_p_prev + s.log_p) / s.cum_log_r_prev;
        assert!((own.ratio - expected).abs() < 1e-14);
        // From digit 40, R_40 − R_41 fits in R_40 but the run down to k0 = 1 does not.
        let far = case_split_upper(&s, &m, &g, 1).unwrap();
        assert!(matches!(
            far.kind,
            EstimateKind::CaseSplit {
                case: SplitCase::Siblings,
                ..
            }
        ));
    }

    #[test]
    fn case_two_sibling_run_for_gauss() {
        // For a = 40: R_{40−j} <= 1/40 + 1/41 holds for j <= 19, so J = 19, k1 = 20.
        let m = DigitMeasure::log_square();
        let g = PartitionSpec::gauss();
        let o = Orbit::from_digits(&m, &g, &ds(&[3, 40]), 0).unwrap();
        let s = o.step(2).unwrap();
        let e = case_split_upper(&s, &m, &g, 1).unwrap();
        let lm = s.cum_log_p_prev + m.log_range_p(&Digit::exact(21), Some(&Digit::exact(40))).unwrap();
        let ll = s.cum_log_r_prev + (1.0f64 / 20.0 - 1.0 / 41.0).ln();
        assert!((e.log_measure - lm).abs() < 1e-13);
        assert!((e.log_length - ll).abs() < 1e-13);
    }
}
