//! Orbit batches streamed once, with every statistic a subcommand needs
//! collected on the way.

use gibbsdim::estimators::{case_split_upper, lower_cover_ratio, neighbor_upper_ratio, symbolic_dimension};
use gibbsdim::maps::ContinuantState;
use gibbsdim::orbits::{batch_map, generate_orbit, orbit_seed, CheckpointRow, OrbitStream, StepView};
use gibbsdim::{CoverEstimate, DigitMeasure, PartitionSpec, Result};

use crate::config::Model;

/// What to record while streaming each orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub length: u64,
    /// Sorted, all `<= length`.
    pub checkpoints: Vec<u64>,
    pub model: Model,
    /// `(k₀, first depth)` for the running maximum of the case-split ratio.
    pub case_split: Option<(u64, u64)>,
    /// Keep the last step with digit `≠ 1` up to this depth.
    pub neighbor_until: Option<u64>,
}

/// State of one orbit at a checkpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Snapshot {
    pub step: StepView,
    pub row: CheckpointRow,
    /// `max_{2≤k≤n} ln|I_k| / ln|I_{k−1}|`; NaN at `n = 1`.
    pub max_blowup: f64,
    /// `ln |I_n|` under the Gauss map, when that model is selected.
    pub gauss_log_length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRun {
    pub orbit_id: u64,
    pub snapshots: Vec<Snapshot>,
    pub last_neighbor_step: Option<StepView>,
    /// Largest non-NaN case-split ratio over the window.
    pub case_max: Option<f64>,
}

fn run_one(
    measure: &DigitMeasure,
    partition: &PartitionSpec,
    orbit_id: u64,
    seed: u64,
    plan: &Plan,
) -> Result<OrbitRun> {
    let mut stream = OrbitStream::new(measure, partition, seed);
    let mut continuants = ContinuantState::new();
    let mut snapshots = Vec::with_capacity(plan.checkpoints.len());
    let mut marks = plan.checkpoints.iter().peekable();
    let mut max_blowup = f64::NAN;
    let mut last_neighbor_step = None;
    let mut case_max: Option<f64> = None;
    for n in 1..=plan.length {
        let step = stream.advance()?;
        if n >= 2 {
            max_blowup = f64::max(max_blowup, step.cum_log_r() / step.cum_log_r_prev);
        }
        if plan.model == Model::GaussMap {
            continuants.advance_asymptotic(&step.digit)?;
        }
        if let Some((k0, start)) = plan.case_split {
            if n >= start.max(2) {
                let r = case_split_upper(&step, measure, partition, k0)?.ratio;
                if !r.is_nan() {
                    case_max = Some(case_max.map_or(r, |m| m.max(r)));
                }
            }
        }
        if plan.neighbor_until.is_some_and(|until| n <= until) && step.digit.exact_value() != Some(1) {
            last_neighbor_step = Some(step);
        }
        if marks.peek() == Some(&&n) {
            marks.next();
            snapshots.push(Snapshot {
                step,
                row: stream.checkpoint_row(orbit_id),
                max_blowup,
                gauss_log_length: (plan.model == Model::GaussMap).then(|| continuants.cylinder_log_length()),
            });
        }
    }
    Ok(OrbitRun {
        orbit_id,
        snapshots,
        last_neighbor_step,
        case_max,
    })
}

/// Runs `orbits` orbits in parallel; results are in orbit order.
pub fn run_batch(
    measure: &DigitMeasure,
    partition: &PartitionSpec,
    orbits: usize,
    master_seed: u64,
    plan: &Plan,
) -> Result<Vec<OrbitRun>> {
    batch_map(orbits, master_seed, |i, seed| {
        run_one(measure, partition, i as u64, seed, plan)
    })
    .into_iter()
    .collect()
}

/// The symbolic ratio at a snapshot under the plan's model.
pub fn symbolic_at(snapshot: &Snapshot) -> CoverEstimate {
    let mut e = symbolic_dimension(&snapshot.step);
    if let Some(len) = snapshot.gauss_log_length {
        e.log_length = len;
        e.ratio = e.log_measure / len;
    }
    e
}

/// One estimator row for the dump; `skipped` marks a declined evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub orbit_id: u64,
    pub n: u64,
    pub kind: String,
    pub log_measure: f64,
    pub log_length: f64,
    pub ratio: f64,
    pub flag: String,
}

impl EstimateRow {
    fn from_estimate(orbit_id: u64, e: &CoverEstimate) -> EstimateRow {
        EstimateRow {
            orbit_id,
            n: e.n,
            kind: e.kind.to_string(),
            log_measure: e.log_measure,
            log_length: e.log_length,
            ratio: e.ratio,
            flag: e.flag.to_string(),
        }
    }

    fn skipped(orbit_id: u64, n: u64, kind: &str, flag: &str) -> EstimateRow {
        EstimateRow {
            orbit_id,
            n,
            kind: kind.to_string(),
            log_measure: f64::NAN,
            log_length: f64::NAN,
            ratio: f64::NAN,
            flag: flag.to_string(),
        }
    }
}

/// Symbolic, lower-cover, neighbor and (with `k0`) case-split rows at every snapshot.
pub fn estimate_rows(
    run: &OrbitRun,
    measure: &DigitMeasure,
    partition: &PartitionSpec,
    k0: Option<u64>,
) -> Result<Vec<EstimateRow>> {
    let id = run.orbit_id;
    let mut rows = Vec::new();
    for s in &run.snapshots {
        let step = &s.step;
        rows.push(EstimateRow::from_estimate(id, &symbolic_at(s)));
        rows.push(EstimateRow::from_estimate(
            id,
            &lower_cover_ratio(step, measure, partition)?,
        ));
        match neighbor_upper_ratio(step, measure, partition) {
            Ok(e) => rows.push(EstimateRow::from_estimate(id, &e)),
            Err(gibbsdim::Error::DigitOneSkipped) => {
                rows.push(EstimateRow::skipped(id, step.n, "neighbor_upper", "digit_one_skipped"))
            }
            Err(e) => return Err(e),
        }
        if let Some(k0) = k0 {
            if step.n >= 2 {
                rows.push(EstimateRow::from_estimate(
                    id,
                    &case_split_upper(step, measure, partition, k0)?,
                ));
            }
        }
    }
    Ok(rows)
}

/// Lower-cover ratio at `position` after planting `e^{ℓ*}` there, for each `ℓ*`.
pub fn forced_excursion(
    measure: &DigitMeasure,
    partition: &PartitionSpec,
    master_seed: u64,
    position: u64,
    log_digits: &[f64],
) -> Result<Vec<(f64, CoverEstimate)>> {
    let base = generate_orbit(measure, partition, position, orbit_seed(master_seed, 0))?;
    log_digits
        .iter()
        .map(|&l| {
            let planted = base.plant_excursion(measure, partition, position, l)?;
            Ok((l, lower_cover_ratio(&planted.step(position)?, measure, partition)?))
        })
        .collect()
}

/// Medians of finite values; NaN when none are finite.
pub fn finite_median(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    gibbsdim::numeric::median(&v)
}

/// `max/min` of positive values.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}
