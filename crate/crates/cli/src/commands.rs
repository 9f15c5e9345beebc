//! Subcommands: each writes its files under `<output>/<name>/` and returns its checks.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use gibbsdim::{ineqsums_check, DigitMeasure, Error, PartitionSpec, Result, VolumeLemma};

use crate::config::ExperimentConfig;
use crate::criteria;
use crate::experiments::{estimate_rows, finite_median, forced_excursion, run_batch, spread, symbolic_at, Plan};
use crate::output::{num, Check, OutputDir};

/// Exit status when every requested check passes.
pub const EXIT_OK: i32 = 0;
/// Exit status for numerical failures and failed checks.
pub const EXIT_FAILED: i32 = 1;
/// Exit status for configuration errors.
pub const EXIT_CONFIG: i32 = 2;

/// `(full, trimmed)` spread thresholds for `S_N / (N ln N)` across orbits.
pub const AARONSON_FULL_MIN: f64 = 10.0;
pub const AARONSON_TRIMMED_MAX: f64 = 10.0;
pub const EXCURSION_LIMITS: [(f64, f64); 2] = criteria::EXCURSION_LIMITS;
pub const ORACLE_HORIZON: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    OrbitStats,
    Dimension,
    ForcedExcursion,
    IneqCheck,
    SeriesCheck,
    Oracle,
    Report,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::OrbitStats,
        Subcommand::Dimension,
        Subcommand::ForcedExcursion,
        Subcommand::IneqCheck,
        Subcommand::SeriesCheck,
        Subcommand::Oracle,
        Subcommand::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::OrbitStats => "orbit-stats",
            Subcommand::Dimension => "dimension",
            Subcommand::ForcedExcursion => "forced-excursion",
            Subcommand::IneqCheck => "ineq-check",
            Subcommand::SeriesCheck => "series-check",
            Subcommand::Oracle => "oracle",
            Subcommand::Report => "report",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

/// Everything a subcommand body needs.
struct Ctx<'a, 'w> {
    cfg: &'a ExperimentConfig,
    measure: &'a DigitMeasure,
    partition: &'a PartitionSpec,
    out: &'a OutputDir,
    log: &'w mut dyn Write,
}

impl Ctx<'_, '_> {
    fn say(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.log, "{}", line.as_ref());
    }

    fn plan(&self) -> Plan {
        Plan {
            length: self.cfg.length,
            checkpoints: self.cfg.checkpoints.clone(),
            model: self.cfg.model,
            case_split: None,
            neighbor_until: None,
        }
    }
}

/// Runs `sub`, writes its files and manifest, prints a summary to `log` and
/// returns the exit status.
pub fn execute(sub: Subcommand, cfg: &ExperimentConfig, log: &mut dyn Write) -> i32 {
    let (partition, measure) = match (cfg.load_partition(), cfg.load_measure()) {
        (Ok(p), Ok(m)) => (p, m),
        (Err(e), _) | (_, Err(e)) => {
            let _ = writeln!(log, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let echo = cfg.echo();
    let out = match OutputDir::create(&cfg.output, sub.name(), &echo) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(
                log,
                "error: cannot create {}: {e}",
                cfg.output.join(sub.name()).display()
            );
            return EXIT_FAILED;
        }
    };
    let _ = writeln!(log, "# manifest: {echo}");
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        measure: &measure,
        partition: &partition,
        out: &out,
        log,
    };
    let result = match sub {
        Subcommand::OrbitStats => orbit_stats(&mut ctx),
        Subcommand::Dimension => dimension(&mut ctx),
        Subcommand::ForcedExcursion => excursion(&mut ctx),
        Subcommand::IneqCheck => ineq_check(&mut ctx),
        Subcommand::SeriesCheck => series_check(&mut ctx),
        Subcommand::Oracle => oracle(&mut ctx),
        Subcommand::Report => report(&mut ctx),
    };
    let wall = start.elapsed();
    let (checks, error) = match result {
        Ok(checks) => (checks, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let checks: Vec<Check> = if cfg.checks { checks } else { Vec::new() };
    for c in &checks {
        ctx.say(c.line());
    }
    if let Some(e) = &error {
        ctx.say(format!("error: {e}"));
    }
    if let Err(e) = out.write_manifest(wall, cfg.threads, &checks, error.as_deref()) {
        ctx.say(format!("error: cannot write manifest: {e}"));
        return EXIT_FAILED;
    }
    if error.is_none() && checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::EstimationFailed(format!("write failed: {e}"))
}

fn orbit_stats(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let runs = run_batch(ctx.measure, ctx.partition, ctx.cfg.orbits, ctx.cfg.seed, &ctx.plan())?;
    let rows = runs.iter().flat_map(|r| r.snapshots.iter()).map(|s| {
        let c = s.row;
        format!(
            "{},{},{},{},{},{},{}",
            c.orbit_id,
            c.n,
            num(c.cum_log_p),
            num(c.cum_log_r),
            num(c.max_x),
            c.argmax,
            num(c.s_trimmed)
        )
    });
    ctx.out
        .write_csv(
            "orbit_stats.csv",
            "orbit_id,n,cum_log_p,cum_log_r,max_X,argmax,S_trimmed",
            rows,
        )
        .map_err(io_err)?;
    let rows = runs.iter().flat_map(|r| {
        r.snapshots
            .iter()
            .map(move |s| format!("{},{},{}", r.orbit_id, s.step.n, num(s.max_blowup)))
    });
    ctx.out
        .write_csv("blowup.csv", "orbit_id,n,max_blowup", rows)
        .map_err(io_err)?;

    let cps = &ctx.cfg.checkpoints;
    let medians: Vec<f64> = (0..cps.len())
        .map(|i| finite_median(runs.iter().map(|r| r.snapshots[i].max_blowup)))
        .collect();
    for (n, m) in cps.iter().zip(&medians) {
        ctx.say(format!("n = {n}: median max blow-up {m:.4}"));
    }
    let mut checks = Vec::new();
    if medians.len() >= 2 {
        let (first, last) = (medians[0], medians[medians.len() - 1]);
        checks.push(Check::new(
            "blow-up trend",
            last > first,
            format!(
                "median {first:.4} at n = {} -> {last:.4} at n = {}",
                cps[0],
                cps[cps.len() - 1]
            ),
        ));
    }
    let n = ctx.cfg.length as f64;
    let b = n * n.ln();
    let full: Vec<f64> = runs
        .iter()
        .map(|r| -r.snapshots[cps.len() - 1].row.cum_log_r / b)
        .collect();
    let trimmed: Vec<f64> = runs
        .iter()
        .map(|r| r.snapshots[cps.len() - 1].row.s_trimmed / b)
        .collect();
    let (sf, st) = (spread(&full), spread(&trimmed));
    checks.push(Check::new(
        "trimming dichotomy",
        sf >= AARONSON_FULL_MIN && st <= AARONSON_TRIMMED_MAX,
        format!("spread of S_N/(N ln N) {sf:.3}, trimmed {st:.3}"),
    ));
    Ok(checks)
}

fn dimension(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let mut plan = ctx.plan();
    plan.case_split = ctx.cfg.k0.map(|k0| (k0, ctx.cfg.window_start));
    let runs = run_batch(ctx.measure, ctx.partition, ctx.cfg.orbits, ctx.cfg.seed, &plan)?;
    let mut rows = Vec::new();
    for r in &runs {
        rows.extend(estimate_rows(r, ctx.measure, ctx.partition, ctx.cfg.k0)?);
    }
    let median_of = |kind: &str, n: u64| {
        finite_median(
            rows.iter()
                .filter(|e| e.n == n && e.kind.starts_with(kind))
                .map(|e| e.ratio),
        )
    };
    let cps = ctx.cfg.checkpoints.clone();
    let mut trend = Vec::new();
    for &n in &cps {
        let (s, l, u) = (
            median_of("symbolic", n),
            median_of("lower_cover", n),
            median_of("neighbor_upper", n),
        );
        ctx.say(format!(
            "n = {n}: median symbolic {s:.5}, lower cover {l:.5}, neighbor {u:.5}"
        ));
        trend.push((n, s, l, u));
    }
    ctx.out
        .write_csv(
            "estimates.csv",
            "orbit_id,n,kind,log_measure,log_length,ratio,flag",
            rows.iter().map(|e| {
                format!(
                    "{},{},{},{},{},{},{}",
                    e.orbit_id,
                    e.n,
                    e.kind,
                    num(e.log_measure),
                    num(e.log_length),
                    num(e.ratio),
                    e.flag
                )
            }),
        )
        .map_err(io_err)?;
    ctx.out
        .write_csv(
            "trend.csv",
            "n,median_symbolic,median_lower_cover,median_neighbor_upper",
            trend
                .iter()
                .map(|(n, s, l, u)| format!("{n},{},{},{}", num(*s), num(*l), num(*u))),
        )
        .map_err(io_err)?;
    if let Some(k0) = ctx.cfg.k0 {
        ctx.out
            .write_csv(
                "case_split_max.csv",
                "orbit_id,max_ratio",
                runs.iter()
                    .map(|r| format!("{},{}", r.orbit_id, num(r.case_max.unwrap_or(f64::NAN)))),
            )
            .map_err(io_err)?;
        let m = finite_median(runs.iter().filter_map(|r| r.case_max));
        ctx.say(format!(
            "median over orbits of max case-split ratio for n >= {} (k0 = {k0}): {m:.5}",
            ctx.cfg.window_start
        ));
    }
    let medians: Vec<f64> = trend.iter().map(|t| t.1).collect();
    let mut checks = Vec::new();
    if medians.len() >= 2 {
        checks.push(Check::new(
            "symbolic trend",
            medians.windows(2).all(|w| w[1] < w[0]),
            format!(
                "medians {}",
                medians.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join(" ")
            ),
        ));
    }
    Ok(checks)
}

fn excursion(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let out = forced_excursion(
        ctx.measure,
        ctx.partition,
        ctx.cfg.seed,
        ctx.cfg.position,
        &ctx.cfg.log_digits,
    )?;
    ctx.out
        .write_csv(
            "excursion.csv",
            "log_digit,n,log_measure,log_length,ratio,flag",
            out.iter().map(|(l, e)| {
                format!(
                    "{},{},{},{},{},{}",
                    num(*l),
                    e.n,
                    num(e.log_measure),
                    num(e.log_length),
                    num(e.ratio),
                    e.flag
                )
            }),
        )
        .map_err(io_err)?;
    for (l, e) in &out {
        ctx.say(format!(
            "log digit {l:e} at n = {}: lower cover ratio {:.6e}",
            e.n, e.ratio
        ));
    }
    let mut checks = vec![Check::new(
        "monotone in planted size",
        out.windows(2).all(|w| w[0].0 >= w[1].0 || w[1].1.ratio < w[0].1.ratio),
        format!("{} planted sizes", out.len()),
    )];
    for (level, limit) in EXCURSION_LIMITS {
        let covered: Vec<&(f64, gibbsdim::CoverEstimate)> = out.iter().filter(|(l, _)| *l >= level).collect();
        if let Some(worst) = covered.iter().map(|(_, e)| e.ratio).reduce(f64::max) {
            checks.push(Check::new(
                format!("ratio below {limit:e} for log digit >= {level:e}"),
                worst < limit,
                format!("largest ratio {worst:.6e} over {} planted sizes", covered.len()),
            ));
        }
    }
    Ok(checks)
}

fn ineq_check(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let params = ctx.cfg.ineq_params();
    ctx.say(format!("RHS {:.5}", params.rhs()));
    let (k_lo, k_hi) = ctx.cfg.k_range;
    match ineqsums_check(params, ctx.cfg.k_range, ctx.cfg.n_range, ctx.measure, ctx.partition) {
        Ok(r) => {
            ctx.out
                .write_csv(
                    "ineq.csv",
                    "k,max_lhs",
                    r.per_k.iter().map(|(k, v)| format!("{k},{}", num(*v))),
                )
                .map_err(io_err)?;
            ctx.say(format!("k0 = {}", r.k0));
            Ok(vec![Check::new(
                "k0 found",
                true,
                format!("k0 = {} in [{k_lo}, {k_hi}], max LHS {:.5}", r.k0, r.max_lhs),
            )])
        }
        Err(Error::NoK0Found { worst_k, worst_lhs, .. }) => {
            ctx.say("no k0 found");
            Ok(vec![Check::new(
                "k0 found",
                false,
                format!("none in [{k_lo}, {k_hi}]; worst LHS {worst_lhs:.5} at k = {worst_k}"),
            )])
        }
        Err(e) => Err(e),
    }
}

fn series_check(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let stats = ctx.measure.measure_stats(ctx.partition, &ctx.cfg.checkpoints)?;
    ctx.out
        .write_csv(
            "series.csv",
            "n,entropy,lyapunov,decay_pointwise,decay_cesaro,tail_ratio,criterion",
            stats.rows.iter().map(|r| {
                format!(
                    "{},{},{},{},{},{},{}",
                    r.n,
                    num(r.entropy),
                    num(r.lyapunov),
                    num(r.decay_pointwise),
                    num(r.decay_cesaro),
                    num(r.tail_ratio),
                    num(r.criterion)
                )
            }),
        )
        .map_err(io_err)?;
    for r in &stats.rows {
        ctx.say(format!(
            "n = {}: H {:.6}, Lambda {:.6}, decay {:.5}, tail ratio {:.5}, criterion {:.6}",
            r.n, r.entropy, r.lyapunov, r.decay_pointwise, r.tail_ratio, r.criterion
        ));
    }
    let last = *ctx.cfg.checkpoints.last().expect("checkpoints are non-empty");
    let tenth = (last / 10).max(1);
    let ends = ctx.measure.measure_stats(ctx.partition, &[tenth, last])?.rows;
    let (a, b) = (ends[0].criterion, ends[ends.len() - 1].criterion);
    let rel = (b - a) / b;
    Ok(vec![Check::new(
        "criterion series converges",
        rel < criteria::CRITERION_INCREMENT,
        format!("increment {tenth} -> {last} is {rel:.3e} of the total {b:.6}"),
    )])
}

fn oracle(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let target = ctx.measure.volume_lemma_dim(ctx.partition, ORACLE_HORIZON)?;
    let plan = Plan {
        checkpoints: vec![ctx.cfg.length],
        ..ctx.plan()
    };
    let runs = run_batch(ctx.measure, ctx.partition, ctx.cfg.orbits, ctx.cfg.seed, &plan)?;
    let median = finite_median(runs.iter().map(|r| symbolic_at(&r.snapshots[0]).ratio));
    ctx.out
        .write_csv(
            "oracle.csv",
            "orbit_id,n,symbolic_ratio",
            runs.iter().map(|r| {
                format!(
                    "{},{},{}",
                    r.orbit_id,
                    ctx.cfg.length,
                    num(symbolic_at(&r.snapshots[0]).ratio)
                )
            }),
        )
        .map_err(io_err)?;
    let check = match target {
        VolumeLemma::Dimension { entropy, lyapunov, dim } => {
            let rel = (median - dim).abs() / dim;
            ctx.say(format!("h = {entropy:.6}, lambda = {lyapunov:.6}, h/lambda = {dim:.6}"));
            ctx.say(format!("median symbolic ratio at n = {}: {median:.6}", ctx.cfg.length));
            Check::new(
                "volume-lemma oracle",
                rel <= criteria::ORACLE_REL_TOL,
                format!("|median - h/lambda| / (h/lambda) = {rel:.5}"),
            )
        }
        VolumeLemma::Divergent { entropy, growth } => {
            ctx.say(format!("median symbolic ratio at n = {}: {median:.6}", ctx.cfg.length));
            Check::new(
                "volume-lemma oracle",
                false,
                format!("entropy diverges (H = {entropy:.4}, last-decade growth {growth:.4}); no oracle value"),
            )
        }
    };
    Ok(vec![check])
}

fn report(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &id in &ctx.cfg.criteria {
        checks.push(criteria::run(id, ctx.cfg.seed, ctx.cfg.depth_cap));
    }
    ctx.out
        .write_csv(
            "report.csv",
            "criterion,result",
            ctx.cfg
                .criteria
                .iter()
                .zip(&checks)
                .map(|(id, c)| format!("{id},{}", if c.pass { "PASS" } else { "FAIL" })),
        )
        .map_err(io_err)?;
    Ok(checks)
}
