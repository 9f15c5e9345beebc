//! Branch indices of the symbolic coding.
//!
//! Digits drawn from infinite-entropy measures routinely exceed any machine
//! integer, so a [`Digit`] is hybrid: an exact index when one is available and
//! always the natural logarithm of the index.

use std::cmp::Ordering;
use std::fmt;

/// Default crossover between exactly represented digits and log-only digits.
pub const DEFAULT_N_TABLE: u64 = 10_000_000;

/// A branch index `n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Digit {
    exact: Option<u64>,
    log_value: f64,
}

impl Digit {
    /// Exact digit. Panics when `n == 0`.
    pub fn exact(n: u64) -> Digit {
        assert!(n >= 1, "digits start at 1");
        Digit {
            exact: Some(n),
            log_value: (n as f64).ln(),
        }
    }

    pub fn try_exact(n: u64) -> Option<Digit> {
        (n >= 1).then(|| Digit::exact(n))
    }

    /// Digit known only through `ln n`. Panics on negative or non-finite input.
    pub fn log_only(log_value: f64) -> Digit {
        assert!(
            log_value.is_finite() && log_value >= 0.0,
            "log digit must be finite and >= 0, got {log_value}"
        );
        Digit { exact: None, log_value }
    }

    /// Digit from its log value; exact when `e^log_value` is an integer no
    /// larger than `n_table` (within 1e-12 in log space).
    pub fn from_log(log_value: f64, n_table: u64) -> Digit {
        if log_value < (n_table as f64).ln() + 1e-9 {
            let n = log_value.exp().round().max(1.0) as u64;
            if n <= n_table && ((n as f64).ln() - log_value).abs() <= 1e-12 {
                return Digit::exact(n);
            }
        }
        Digit::log_only(log_value)
    }

    pub fn exact_value(&self) -> Option<u64> {
        self.exact
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    /// `ln(n + 1)`, computed without cancellation for large log-only digits.
    pub fn log_succ_value(&self) -> f64 {
        match self.exact {
            Some(n) => (n as f64).ln_1p(),
            None => self.log_value + (-self.log_value).exp().ln_1p(),
        }
    }

    /// The digit `n + 1`.
    pub fn succ(&self) -> Digit {
        match self.exact {
            Some(n) => Digit::exact(n + 1),
            None => Digit::log_only(self.log_succ_value()),
        }
    }

    /// The digit `n - 1`, absent for `n = 1`.
    pub fn pred(&self) -> Option<Digit> {
        match self.exact {
            Some(1) => None,
            Some(n) => Some(Digit::exact(n - 1)),
            None => {
                let l = self.log_value;
                // ln(n - 1) = l + ln(1 - e^-l); log-only digits are far above 1.
                let shifted = l + (-(-l).exp()).ln_1p();
                Some(Digit::log_only(shifted.max(0.0)))
            }
        }
    }

    /// `n + m` for an exact digit; log-only digits shift in log space.
    pub fn add(&self, m: u64) -> Digit {
        match self.exact {
            Some(n) => Digit::exact(n + m),
            None => {
                let l = self.log_value;
                Digit::log_only(l + ((m as f64) * (-l).exp()).ln_1p())
            }
        }
    }

    /// Compare by value. Exact digits compare as integers.
    pub fn cmp_value(&self, other: &Digit) -> Ordering {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.log_value.total_cmp(&other.log_value),
        }
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "exp({})", self.log_value),
        }
    }
}

/// Parse a comma-separated digit list such as `"2,1,1"` or `"3,e:1e9"`.
/// Entries prefixed with `e:` are log-only digits given by their log value.
pub fn parse_digits(text: &str) -> crate::Result<Vec<Digit>> {
    let text = text.trim();
    if text.is_empty() || text == "()" {
        return Ok(Vec::new());
    }
    text.trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|item| {
            let item = item.trim();
            if let Some(log) = item.strip_prefix("e:") {
                let l: f64 = log
                    .parse()
                    .map_err(|_| crate::Error::parse(1, format!("bad log digit '{item}'")))?;
                if !l.is_finite() || l < 0.0 {
                    return Err(crate::Error::parse(1, format!("log digit out of range '{item}'")));
                }
                Ok(Digit::log_only(l))
            } else {
                let n: u64 = item
                    .parse()
                    .map_err(|_| crate::Error::parse(1, format!("bad digit '{item}'")))?;
                Digit::try_exact(n).ok_or_else(|| crate::Error::parse(1, "digits start at 1".to_string()))
            }
        })
        .collect()
}
