//! Self-loop weight schemes and the even split of the total weight over `m` loops.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default numerator exponent for the power schemes.
pub const DEFAULT_ALPHA: f64 = 2.0;

/// How the total self-loop weight `l` is derived from the hypercube degree
/// `n`, vertex count `N = 2^n` and marked count `k`.
///
/// String forms: `n_over_N`, `n_over_N_times_k`, `n_pow_over_N`,
/// `n_pow_over_N_times_k` (optionally suffixed `^<alpha>`, default 2) and
/// `explicit:<float>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightScheme {
    /// `l = n/N`
    DegreeOverN,
    /// `l = (n/N)·k`
    DegreeOverNTimesK,
    /// `l = n^α/N`
    DegreePowOverN { alpha: f64 },
    /// `l = (n^α/N)·k`
    DegreePowOverNTimesK { alpha: f64 },
    /// A fixed `l`, independent of the instance.
    Explicit(f64),
}

impl WeightScheme {
    pub fn pow_over_n() -> Self {
        WeightScheme::DegreePowOverN { alpha: DEFAULT_ALPHA }
    }

    pub fn pow_over_n_times_k() -> Self {
        WeightScheme::DegreePowOverNTimesK { alpha: DEFAULT_ALPHA }
    }

    /// The four schemes compared in the weight study, in table order.
    pub fn standard_four() -> [WeightScheme; 4] {
        [
            WeightScheme::DegreeOverN,
            WeightScheme::DegreeOverNTimesK,
            WeightScheme::pow_over_n(),
            WeightScheme::pow_over_n_times_k(),
        ]
    }

    /// Numerator exponent; exactly 1 for the non-power schemes.
    pub fn alpha(&self) -> f64 {
        match *self {
            WeightScheme::DegreePowOverN { alpha } | WeightScheme::DegreePowOverNTimesK { alpha } => alpha,
            _ => 1.0,
        }
    }

    pub fn scales_with_k(&self) -> bool {
        matches!(
            self,
            WeightScheme::DegreeOverNTimesK | WeightScheme::DegreePowOverNTimesK { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightScheme::Explicit(l) if !(l.is_finite() && l >= 0.0) => Err(Error::config(format!(
                "explicit weight must be finite and ≥ 0, got {l}"
            ))),
            WeightScheme::DegreePowOverN { alpha } | WeightScheme::DegreePowOverNTimesK { alpha }
                if !(alpha.is_finite() && alpha > 0.0) =>
            {
                Err(Error::config(format!("alpha must be a positive real, got {alpha}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pow = |f: &mut fmt::Formatter<'_>, base: &str, alpha: f64| {
            if alpha == DEFAULT_ALPHA {
                f.write_str(base)
            } else {
                write!(f, "{base}^{alpha}")
            }
        };
        match *self {
            WeightScheme::DegreeOverN => f.write_str("n_over_N"),
            WeightScheme::DegreeOverNTimesK => f.write_str("n_over_N_times_k"),
            WeightScheme::DegreePowOverN { alpha } => pow(f, "n_pow_over_N", alpha),
            WeightScheme::DegreePowOverNTimesK { alpha } => pow(f, "n_pow_over_N_times_k", alpha),
            WeightScheme::Explicit(l) => write!(f, "explicit:{l}"),
        }
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_f64 = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::UnknownScheme(s.to_string()));
        let scheme = if let Some(v) = s.strip_prefix("explicit:") {
            WeightScheme::Explicit(parse_f64(v)?)
        } else {
            let (base, alpha) = match s.split_once('^') {
                Some((b, a)) => (b, Some(parse_f64(a)?)),
                None => (s, None),
            };
            match (base, alpha) {
                ("n_over_N", None) => WeightScheme::DegreeOverN,
                ("n_over_N_times_k", None) => WeightScheme::DegreeOverNTimesK,
                ("n_pow_over_N", a) => WeightScheme::DegreePowOverN {
                    alpha: a.unwrap_or(DEFAULT_ALPHA),
                },
                ("n_pow_over_N_times_k", a) => WeightScheme::DegreePowOverNTimesK {
                    alpha: a.unwrap_or(DEFAULT_ALPHA),
                },
                _ => return Err(Error::UnknownScheme(s.to_string())),
            }
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

impl TryFrom<String> for WeightScheme {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WeightScheme> for String {
    fn from(s: WeightScheme) -> String {
        s.to_string()
    }
}

/// Total self-loop weight `l` for a degree-`n` hypercube with `k` marked vertices.
pub fn self_loop_weight(scheme: WeightScheme, n: usize, k: usize) -> Result<f64> {
    scheme.validate()?;
    if scheme.scales_with_k() && k == 0 {
        return Err(Error::config(format!(
            "scheme {scheme} needs at least one marked vertex"
        )));
    }
    let vertex_count = (n as f64).exp2();
    let base = (n as f64).powf(scheme.alpha()) / vertex_count;
    Ok(match scheme {
        WeightScheme::DegreeOverN | WeightScheme::DegreePowOverN { .. } => base,
        WeightScheme::DegreeOverNTimesK | WeightScheme::DegreePowOverNTimesK { .. } => base * k as f64,
        WeightScheme::Explicit(l) => l,
    })
}

/// A total weight split evenly over `count` self-loops.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopWeights {
    pub total: f64,
    pub per_loop: f64,
    pub count: usize,
}

/// `l′ = l/m`; `m = 0` is allowed only for `l = 0`.
pub fn split_per_loop(total: f64, count: usize) -> Result<LoopWeights> {
    if !(total.is_finite() && total >= 0.0) {
        return Err(Error::config(format!(
            "self-loop weight must be finite and ≥ 0, got {total}"
        )));
    }
    let per_loop = match count {
        0 if total > 0.0 => {
            return Err(Error::config("a positive self-loop weight needs at least one loop"));
        }
        0 => 0.0,
        m => total / m as f64,
    };
    Ok(LoopWeights { total, per_loop, count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rhodes_weight() {
        let l = self_loop_weight(WeightScheme::DegreeOverN, 12, 1).unwrap();
        assert_eq!(l, 12.0 / 4096.0);
        assert_relative_eq!(l, 0.0029297, max_relative = 1e-4);
    }

    #[test]
    fn squared_degree_times_k() {
        let l = self_loop_weight(WeightScheme::pow_over_n_times_k(), 12, 3).unwrap();
        assert_relative_eq!(l, 144.0 * 3.0 / 4096.0, max_relative = 1e-15);
        assert_relative_eq!(l, 0.105469, max_relative = 1e-5);
    }

    #[test]
    fn explicit_zero() {
        assert_eq!(self_loop_weight(WeightScheme::Explicit(0.0), 5, 0).unwrap(), 0.0);
    }

    #[test]
    fn times_k_rejects_zero_k() {
        assert!(self_loop_weight(WeightScheme::DegreeOverNTimesK, 12, 0).is_err());
        assert!(self_loop_weight(WeightScheme::DegreeOverN, 12, 0).is_ok());
    }

    #[test]
    fn alpha_is_one_for_plain_schemes() {
        assert_eq!(WeightScheme::DegreeOverN.alpha(), 1.0);
        assert_eq!(WeightScheme::DegreeOverNTimesK.alpha(), 1.0);
        assert_eq!(WeightScheme::pow_over_n().alpha(), 2.0);
        // alpha = 1 power scheme coincides with the plain one
        let a = self_loop_weight(WeightScheme::DegreePowOverN { alpha: 1.0 }, 10, 1).unwrap();
        let b = self_loop_weight(WeightScheme::DegreeOverN, 10, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_examples() {
        let w = split_per_loop(0.0029297, 1).unwrap();
        assert_eq!(w.per_loop, w.total);
        let w = split_per_loop(0.105469, 12).unwrap();
        assert_relative_eq!(w.per_loop, 0.0087891, max_relative = 1e-4);
        assert_eq!(split_per_loop(0.0, 5).unwrap().per_loop, 0.0);
        assert_eq!(split_per_loop(0.0, 0).unwrap().per_loop, 0.0);
        assert!(split_per_loop(0.1, 0).is_err());
        assert!(split_per_loop(-0.1, 2).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [
            "n_over_N",
            "n_over_N_times_k",
            "n_pow_over_N",
            "n_pow_over_N_times_k",
            "explicit:0.25",
        ] {
            let parsed: WeightScheme = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        let a: WeightScheme = "n_pow_over_N^1.5".parse().unwrap();
        assert_eq!(a, WeightScheme::DegreePowOverN { alpha: 1.5 });
        assert_eq!(a.to_string(), "n_pow_over_N^1.5");
        assert!("n_over_N^2".parse::<WeightScheme>().is_err());
        assert!("explicit:-1".parse::<WeightScheme>().is_err());
        assert!("bogus".parse::<WeightScheme>().is_err());
    }

    proptest! {
        #[test]
        fn times_k_is_linear_in_k(n in 1usize..20, k in 1usize..40, pow in any::<bool>()) {
            let scheme = if pow { WeightScheme::pow_over_n_times_k() } else { WeightScheme::DegreeOverNTimesK };
            let one = self_loop_weight(scheme, n, 1).unwrap();
            let many = self_loop_weight(scheme, n, k).unwrap();
            prop_assert!((many / one - k as f64).abs() <= 1e-12 * k as f64);
        }

        #[test]
        fn split_recovers_total(l in 0.0f64..10.0, m in 1usize..64) {
            let w = split_per_loop(l, m).unwrap();
            prop_assert!((w.per_loop * m as f64 - l).abs() <= 1e-15 * l);
        }
    }
}
