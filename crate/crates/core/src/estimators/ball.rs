//! Two-sided bracket on the measure of a genuine ball in the piecewise-linear model.
//!
//! The ball is centered at the midpoint of `I(prefix)`. Coordinates are kept
//! relative to the current cylinder, so depth never costs absolute precision.
//! Cylinder `n` occupies `[R_{n+1}, R_n]` of its parent; smaller digits lie
//! further right. Bernoulli measures are self-similar under this rescaling:
//! the mass of a relative interval inside `I(w)` is `μ(I(w))` times its mass
//! in `[0, 1]`.

use std::f64::consts::LN_2;

use crate::digit::Digit;
use crate::measures::DigitMeasure;
use crate::numeric::{log_add_exp, log_diff_exp};
use crate::partition::PartitionSpec;
use crate::{Error, Result};

/// Largest accepted `depth_cap`.
pub const MAX_BALL_DEPTH: usize = 40;

/// `ln μ(B)` lies in `[log_lo, log_hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallBracket {
    pub log_lo: f64,
    pub log_hi: f64,
    /// Some cylinder at `depth_cap` straddles the ball boundary.
    pub widened: bool,
}

/// A log-space `[lo, hi]` pair of masses.
#[derive(Clone, Copy, Debug)]
struct Mass {
    lo: f64,
    hi: f64,
}

impl Mass {
    const ZERO: Mass = Mass {
        lo: f64::NEG_INFINITY,
        hi: f64::NEG_INFINITY,
    };

    fn exact(l: f64) -> Mass {
        Mass { lo: l, hi: l }
    }

    fn plus(self, o: Mass) -> Mass {
        Mass {
            lo: log_add_exp(self.lo, o.lo),
            hi: log_add_exp(self.hi, o.hi),
        }
    }

    fn scaled(self, log_w: f64) -> Mass {
        Mass {
            lo: self.lo + log_w,
            hi: self.hi + log_w,
        }
    }
}

struct Bracketer<'a> {
    measure: &'a DigitMeasure,
    partition: &'a PartitionSpec,
    widened: bool,
}

impl Bracketer<'_> {
    /// The whole unit cylinder, with its children not examined.
    fn unresolved(&mut self) -> Mass {
        self.widened = true;
        Mass {
            lo: f64::NEG_INFINITY,
            hi: 0.0,
        }
    }

    /// The child containing relative point `u ∈ (0, 1)` and `u` rescaled into it.
    fn locate(&self, u: f64) -> Result<(Digit, Option<f64>)> {
        let ln_u = u.ln();
        let n = self.partition.invert_log_tail(ln_u)?;
        if !n.is_exact() {
            return Ok((n, None));
        }
        let inner = log_diff_exp(ln_u, self.partition.log_tail_r(&n.succ())?) - self.partition.log_r(&n)?;
        Ok((n, Some(inner.exp().clamp(0.0, 1.0))))
    }

    /// `p_n` times the bracket `inner(u')`, or the whole child when it cannot be opened.
    ///
    /// `budget` counts the levels still open below the child itself.
    fn child(
        &mut self,
        n: &Digit,
        u: Option<f64>,
        budget: usize,
        inner: fn(&mut Self, f64, usize) -> Result<Mass>,
    ) -> Result<Mass> {
        let log_p = self.measure.log_p(n)?;
        let m = match u {
            Some(u) => inner(self, u, budget)?,
            None => self.unresolved(),
        };
        Ok(m.scaled(log_p))
    }

    /// Mass of `[0, u]`.
    fn anchored_left(&mut self, u: f64, budget: usize) -> Result<Mass> {
        if u >= 1.0 {
            return Ok(Mass::exact(0.0));
        }
        if u <= 0.0 {
            return Ok(Mass::ZERO);
        }
        if budget == 0 {
            return Ok(self.unresolved());
        }
        let (n, inner) = self.locate(u)?;
        let full = Mass::exact(self.measure.log_tail_p(&n.succ())?);
        Ok(full.plus(self.child(&n, inner, budget - 1, Self::anchored_left)?))
    }

    /// Mass of `[u, 1]`.
    fn anchored_right(&mut self, u: f64, budget: usize) -> Result<Mass> {
        if u <= 0.0 {
            return Ok(Mass::exact(0.0));
        }
        if u >= 1.0 {
            return Ok(Mass::ZERO);
        }
        if budget == 0 {
            return Ok(self.unresolved());
        }
        let (n, inner) = self.locate(u)?;
        let full = match n.pred() {
            Some(last) => Mass::exact(self.measure.log_range_p(&Digit::exact(1), Some(&last))?),
            None => Mass::ZERO,
        };
        Ok(full.plus(self.child(&n, inner, budget - 1, Self::anchored_right)?))
    }

    /// Mass of `[u, v]` for `0 <= u <= v <= 1`.
    fn interval(&mut self, u: f64, v: f64, budget: usize) -> Result<Mass> {
        if u <= 0.0 {
            return self.anchored_left(v, budget);
        }
        if v >= 1.0 {
            return self.anchored_right(u, budget);
        }
        if budget == 0 {
            return Ok(self.unresolved());
        }
        let (nu, iu) = self.locate(u)?;
        let (nv, iv) = self.locate(v)?;
        if nu == nv {
            let log_p = self.measure.log_p(&nu)?;
            let m = match (iu, iv) {
                (Some(a), Some(b)) => self.interval(a, b.max(a), budget - 1)?,
                _ => self.unresolved(),
            };
            return Ok(m.scaled(log_p));
        }
        // nu > nv: u sits in a larger digit, further left.
        let mut m = self.child(&nu, iu, budget - 1, Self::anchored_right)?;
        let between_lo = nv.succ();
        if let Some(between_hi) = nu.pred() {
            if !between_hi.cmp_value(&between_lo).is_lt() {
                m = m.plus(Mass::exact(self.measure.log_range_p(&between_lo, Some(&between_hi))?));
            }
        }
        Ok(m.plus(self.child(&nv, iv, budget - 1, Self::anchored_left)?))
    }

    /// Relative length `δ` to the right of sibling `a`, through digits `a−1, a−2, …`.
    /// `budget` counts the levels open below the siblings.
    fn extend_right(&mut self, a: &Digit, log_delta: f64, budget: usize) -> Result<Mass> {
        let log_v = log_add_exp(self.partition.log_tail_r(a)?, log_delta);
        if log_v >= 0.0 {
            return match a.pred() {
                Some(last) => Ok(Mass::exact(self.measure.log_range_p(&Digit::exact(1), Some(&last))?)),
                None => Ok(Mass::ZERO),
            };
        }
        let n = self.partition.invert_log_tail(log_v)?;
        if !n.cmp_value(a).is_lt() {
            return Ok(Mass::ZERO);
        }
        let mut m = Mass::ZERO;
        let full_lo = n.succ();
        let mut covered = f64::NEG_INFINITY;
        if let Some(full_hi) = a.pred() {
            if !full_hi.cmp_value(&full_lo).is_lt() {
                m = Mass::exact(self.measure.log_range_p(&full_lo, Some(&full_hi))?);
                covered = self.partition.log_range_r(&full_lo, Some(&full_hi))?;
            }
        }
        let inner = if n.is_exact() {
            Some(
                (log_diff_exp(log_delta, covered) - self.partition.log_r(&n)?)
                    .exp()
                    .clamp(0.0, 1.0),
            )
        } else {
            None
        };
        Ok(m.plus(self.child(&n, inner, budget, Self::anchored_left)?))
    }

    /// Relative length `δ` to the left of sibling `a`, through digits `a+1, a+2, …`.
    /// `budget` counts the levels open below the siblings.
    fn extend_left(&mut self, a: &Digit, log_delta: f64, budget: usize) -> Result<Mass> {
        let log_w = log_diff_exp(self.partition.log_tail_r(&a.succ())?, log_delta);
        let full_lo = a.succ();
        if log_w == f64::NEG_INFINITY {
            return Ok(Mass::exact(self.measure.log_tail_p(&full_lo)?));
        }
        let n = self.partition.invert_log_tail(log_w)?;
        if !n.cmp_value(a).is_gt() {
            return Ok(Mass::ZERO);
        }
        let mut m = Mass::ZERO;
        if let Some(full_hi) = n.pred() {
            if !full_hi.cmp_value(&full_lo).is_lt() {
                m = Mass::exact(self.measure.log_range_p(&full_lo, Some(&full_hi))?);
            }
        }
        let inner = if n.is_exact() {
            let off = log_diff_exp(log_w, self.partition.log_tail_r(&n.succ())?);
            Some((off - self.partition.log_r(&n)?).exp().clamp(0.0, 1.0))
        } else {
            None
        };
        Ok(m.plus(self.child(&n, inner, budget, Self::anchored_right)?))
    }
}

/// Bracket on `ln μ(B(x, ρ))` for `x` the midpoint of `I(prefix)` and
/// `ln ρ = log_radius`, resolving cylinders down to depth `depth_cap`.
///
/// Returns `(0, 0)` once the radius reaches 1, where the ball covers `[0, 1]`.
pub fn ball_measure_bracket(
    measure: &DigitMeasure,
    partition: &PartitionSpec,
    prefix: &[Digit],
    log_radius: f64,
    depth_cap: usize,
) -> Result<BallBracket> {
    if !measure.is_bernoulli() {
        return Err(Error::UnsupportedMeasure(
            "ball brackets need a Bernoulli measure".into(),
        ));
    }
    if depth_cap > MAX_BALL_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "depth_cap = {depth_cap} exceeds {MAX_BALL_DEPTH}"
        )));
    }
    if log_radius.is_nan() {
        return Err(Error::InvalidParameter("radius is NaN".into()));
    }
    for d in prefix {
        if !d.is_exact() {
            return Err(Error::ExactDigitRequired {
                log_value: d.log_value(),
            });
        }
    }
    if log_radius >= 0.0 {
        return Ok(BallBracket {
            log_lo: 0.0,
            log_hi: 0.0,
            widened: false,
        });
    }

    // Log length and log mass of C_0 ⊃ C_1 ⊃ … ⊃ C_K = I(prefix).
    let depth = prefix.len();
    let mut log_len = vec![0.0; depth + 1];
    let mut log_mass = vec![0.0; depth + 1];
    for (k, d) in prefix.iter().enumerate() {
        log_len[k + 1] = log_len[k] + partition.log_r(d)?;
        log_mass[k + 1] = log_mass[k] + measure.log_p(d)?;
    }
    let mut b = Bracketer {
        measure,
        partition,
        widened: false,
    };
    let budget_at = |level: usize| depth_cap.saturating_sub(level);
    let log_half = log_len[depth] - LN_2;

    let total = if log_radius <= log_half {
        let rel = (log_radius - log_len[depth]).exp();
        b.interval(0.5 - rel, 0.5 + rel, budget_at(depth))?
            .scaled(log_mass[depth])
    } else {
        let mut total = Mass::exact(log_mass[depth]);
        // Distances from x to the right and left ends of the current ancestor.
        let (mut gap_right, mut gap_left) = (log_half, log_half);
        let (mut open_right, mut open_left) = (true, true);
        for k in (1..=depth).rev() {
            let a = &prefix[k - 1];
            let (parent_len, parent_mass) = (log_len[k - 1], log_mass[k - 1]);
            if open_right {
                let siblings = match a.pred() {
                    Some(last) => partition.log_range_r(&Digit::exact(1), Some(&last))?,
                    None => f64::NEG_INFINITY,
                };
                let reach = log_add_exp(gap_right, parent_len + siblings);
                if log_radius >= reach {
                    if let Some(last) = a.pred() {
                        total = total.plus(Mass::exact(
                            parent_mass + measure.log_range_p(&Digit::exact(1), Some(&last))?,
                        ));
                    }
                    gap_right = reach;
                } else {
                    let delta = log_diff_exp(log_radius, gap_right) - parent_len;
                    total = total.plus(b.extend_right(a, delta, budget_at(k))?.scaled(parent_mass));
                    open_right = false;
                }
            }
            if open_left {
                let reach = log_add_exp(gap_left, parent_len + partition.log_tail_r(&a.succ())?);
                if log_radius >= reach {
                    total = total.plus(Mass::exact(parent_mass + measure.log_tail_p(&a.succ())?));
                    gap_left = reach;
                } else {
                    let delta = log_diff_exp(log_radius, gap_left) - parent_len;
                    total = total.plus(b.extend_left(a, delta, budget_at(k))?.scaled(parent_mass));
                    open_left = false;
                }
            }
            if !open_right && !open_left {
                break;
            }
        }
        total
    };
    Ok(BallBracket {
        log_lo: total.lo.min(0.0),
        log_hi: total.hi.min(0.0),
        widened: b.widened,
    })
}
