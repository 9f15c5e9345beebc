//! Exact reference values: ball masses by rational cylinder enumeration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Children beyond this index are lumped into the straddling remainder.
const MAX_CHILD: u64 = 10_000;
/// Deepest level the enumeration opens.
const MAX_LEVEL: usize = 400;

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `ln x` for positive rationals of any size.
pub fn ln_rational(x: &BigRational) -> f64 {
    fn ln_int(v: &BigInt) -> f64 {
        let bits = v.bits();
        if bits <= 1000 {
            return v.to_f64().expect("finite").ln();
        }
        let shift = bits - 64;
        (v >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
    }
    ln_int(x.numer()) - ln_int(x.denom())
}

/// `μ(B)` for the piecewise-linear Gauss partition and the Bernoulli law
/// `p_n = (1−q) q^{n−1}`, as an exact inside mass plus an upper bound on
/// the mass of cylinders left unresolved.
#[derive(Clone, Debug)]
pub struct BallMass {
    pub inside: BigRational,
    pub unresolved: f64,
}

struct Enumerator {
    q: BigRational,
    one_minus_q: BigRational,
    lo: BigRational,
    hi: BigRational,
    /// Cylinders lighter than this are not opened.
    floor: f64,
    inside: BigRational,
    unresolved: f64,
}

impl Enumerator {
    /// `Σ_{n=n1}^{n2} p_n = q^{n1−1} − q^{n2}`.
    fn range_mass(&self, n1: u64, n2: Option<u64>) -> BigRational {
        let head = num_traits::pow(self.q.clone(), (n1 - 1) as usize);
        match n2 {
            Some(n2) => head - num_traits::pow(self.q.clone(), n2 as usize),
            None => head,
        }
    }

    /// Child of `[a, b]` containing relative position `u ∈ (0, 1)`.
    fn child_at(u: &BigRational) -> Option<u64> {
        (u.recip().floor().to_integer()).to_u64().filter(|&n| n <= MAX_CHILD)
    }

    fn visit(&mut self, a: BigRational, b: BigRational, mass: BigRational, level: usize) {
        if b <= self.lo || a >= self.hi {
            return;
        }
        if a >= self.lo && b <= self.hi {
            self.inside += mass;
            return;
        }
        let m = mass.to_f64().unwrap_or(0.0);
        if level >= MAX_LEVEL || m < self.floor {
            self.unresolved += m;
            return;
        }
        let w = &b - &a;
        let rel = |x: &BigRational| (x - &a) / &w;
        let (u_lo, u_hi) = (rel(&self.lo), rel(&self.hi));
        let interior = |u: &BigRational| u.is_positive() && *u < BigRational::one();
        // Children straddling a boundary; `None` when the boundary lies past MAX_CHILD.
        let c_lo = interior(&u_lo).then(|| Self::child_at(&u_lo));
        let c_hi = interior(&u_hi).then(|| Self::child_at(&u_hi));

        // Fully covered run of children: digits above c_hi and below c_lo.
        let first = match c_hi {
            None => Some(1),
            Some(Some(n)) => Some(n + 1),
            Some(None) => None,
        };
        let last = match c_lo {
            None => None,
            Some(Some(n)) => Some(n - 1),
            Some(None) => Some(MAX_CHILD),
        };
        if let Some(first) = first {
            if last.is_none_or(|l| l >= first) {
                self.inside += &mass * self.range_mass(first, last);
            }
        }
        // Beyond MAX_CHILD only straddlers are unresolved, never inside mass.
        if matches!(c_lo, Some(None)) || matches!(c_hi, Some(None)) {
            self.unresolved += (&mass * self.range_mass(MAX_CHILD + 1, None)).to_f64().unwrap_or(0.0);
        }
        let mut open = Vec::new();
        for n in [c_hi, c_lo].into_iter().flatten().flatten() {
            if !open.contains(&n) {
                open.push(n);
            }
        }
        for n in open {
            let left = &a + &w / rat(n + 1);
            let right = &a + &w / rat(n);
            let p = &self.one_minus_q * num_traits::pow(self.q.clone(), (n - 1) as usize);
            self.visit(left, right, &mass * p, level + 1);
        }
    }
}

/// Exact interval and mass of `I(prefix)` in the piecewise-linear Gauss model.
pub fn cylinder(prefix: &[u64], q: &BigRational) -> (BigRational, BigRational, BigRational) {
    let (mut a, mut b, mut m) = (BigRational::zero(), BigRational::one(), BigRational::one());
    let one_minus_q = BigRational::one() - q;
    for &n in prefix {
        let w = &b - &a;
        let left = &a + &w / rat(n + 1);
        b = &a + &w / rat(n);
        a = left;
        m = m * &one_minus_q * num_traits::pow(q.clone(), (n - 1) as usize);
    }
    (a, b, m)
}

/// `μ(B(x, ρ))` for `x` the midpoint of `I(prefix)` and `ρ = factor·|I(prefix)|`.
///
/// Cylinders lighter than `rel_floor · μ(I(prefix))` are left unresolved.
pub fn ball_mass(prefix: &[u64], q: &BigRational, factor: &BigRational, rel_floor: f64) -> BallMass {
    let (a, b, m) = cylinder(prefix, q);
    let two = rat(2);
    let center = (&a + &b) / &two;
    let radius = (&b - &a) * factor;
    let zero = BigRational::zero();
    let one = BigRational::one();
    let lo = (&center - &radius).max(zero.clone());
    let hi = (&center + &radius).min(one.clone());
    let mut e = Enumerator {
        q: q.clone(),
        one_minus_q: BigRational::one() - q,
        lo,
        hi,
        floor: rel_floor * m.to_f64().unwrap_or(0.0),
        inside: BigRational::zero(),
        unresolved: 0.0,
    };
    e.visit(zero, one.clone(), one, 0);
    BallMass {
        inside: e.inside,
        unresolved: e.unresolved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn whole_cylinder_ball() {
        // Ball exactly I(1) = [1/2, 1]: mass p_1.
        let b = ball_mass(&[1], &r(1, 2), &r(1, 2), 1e-15);
        assert_eq!(b.inside, r(1, 2));
        assert!(b.unresolved < 1e-15);
    }

    #[test]
    fn ball_over_neighbours() {
        // Centre 3/4, radius 5/12 → [1/3, 1]: digits 1 and 2.
        let b = ball_mass(&[1], &r(1, 2), &r(5, 6), 1e-15);
        assert_eq!(b.inside, r(3, 4));
    }

    #[test]
    fn ln_handles_huge_values() {
        let x = BigRational::from_integer(BigInt::from(3u8).pow(2000));
        assert!((ln_rational(&x) - 2000.0 * 3f64.ln()).abs() < 1e-9);
        assert!((ln_rational(&x.recip()) + 2000.0 * 3f64.ln()).abs() < 1e-9);
    }
}
