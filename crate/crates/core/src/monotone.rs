//! Operator monotone functions and their perspectives.
//!
//! `P_f(x, y) = y f(x/y)` for `x, y > 0`, extended to the boundary by
//! `P_f(0, y) = y f(0⁺)`, `P_f(x, 0) = x f′(+∞)` and `0 · ∞ = 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonotoneId {
    Am,
    Gm,
    Hm,
    Lm,
    Power(f64),
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub normalized: bool,
    pub symmetry_inducing: bool,
    pub support_restricting: bool,
    pub multiplicative: bool,
    /// False for user-supplied functions whose operator monotonicity is unchecked.
    pub verified: bool,
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct MonotoneFn {
    id: MonotoneId,
    name: String,
    f_zero_plus: f64,
    f_prime_inf: f64,
    flags: Flags,
    custom: Option<Evaluator>,
}

impl fmt::Debug for MonotoneFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneFn").field("name", &self.name).field("flags", &self.flags).finish()
    }
}

impl fmt::Display for MonotoneFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `u / ln(1 + u)` to fourth order.
fn lm_series(u: f64) -> f64 {
    1.0 + u / 2.0 - u * u / 12.0 + u * u * u / 24.0 - 19.0 * u.powi(4) / 720.0
}

const LM_SERIES_RADIUS: f64 = 1e-4;
const SYMMETRY_EXPONENT_TOL: f64 = 1e-12;

/// `0 · ∞ := 0`.
fn times(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

impl MonotoneFn {
    fn catalog(id: MonotoneId, name: &str, f0: f64, fp: f64, symmetric: bool) -> Self {
        let multiplicative = matches!(id, MonotoneId::Power(_));
        MonotoneFn {
            id,
            name: name.to_string(),
            f_zero_plus: f0,
            f_prime_inf: fp,
            flags: Flags {
                normalized: true,
                symmetry_inducing: symmetric,
                support_restricting: f0 == 0.0 && fp == 0.0,
                multiplicative,
                verified: true,
            },
            custom: None,
        }
    }

    pub fn am() -> Self {
        Self::catalog(MonotoneId::Am, "am", 0.5, 0.5, true)
    }

    pub fn gm() -> Self {
        Self::catalog(MonotoneId::Gm, "gm", 0.0, 0.0, true)
    }

    pub fn hm() -> Self {
        Self::catalog(MonotoneId::Hm, "hm", 0.0, 0.0, true)
    }

    pub fn lm() -> Self {
        Self::catalog(MonotoneId::Lm, "lm", 0.0, 0.0, true)
    }

    /// `x ↦ x^k`, `k ∈ [0, 1]`.
    pub fn power(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) || !k.is_finite() {
            return Err(Error::DomainError(format!("power exponent {k} outside [0,1]")));
        }
        let f0 = if k == 0.0 { 1.0 } else { 0.0 };
        let fp = if k == 1.0 { 1.0 } else { 0.0 };
        let symmetric = (k - 0.5).abs() <= SYMMETRY_EXPONENT_TOL;
        Ok(Self::catalog(MonotoneId::Power(k), &format!("power:{k}"), f0, fp, symmetric))
    }

    /// User-supplied function. Flags are sampled numerically and the result
    /// is marked unverified.
    pub fn custom(
        name: &str,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_zero_plus: f64,
        f_prime_inf: f64,
    ) -> Self {
        let eval: Evaluator = Arc::new(eval);
        let normalized = (eval(1.0) - 1.0).abs() <= 1e-12;
        let symmetry_inducing = log_grid().iter().all(|&x| (eval(x) - x * eval(1.0 / x)).abs() <= 1e-12 * eval(x).abs().max(1.0));
        MonotoneFn {
            id: MonotoneId::Custom,
            name: name.to_string(),
            f_zero_plus,
            f_prime_inf,
            flags: Flags {
                normalized,
                symmetry_inducing,
                support_restricting: f_zero_plus == 0.0 && f_prime_inf == 0.0,
                multiplicative: false,
                verified: false,
            },
            custom: Some(eval),
        }
    }

    /// AM, GM, HM, LM.
    pub fn means() -> Vec<MonotoneFn> {
        vec![Self::am(), Self::gm(), Self::hm(), Self::lm()]
    }

    pub fn id(&self) -> MonotoneId {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn f_zero_plus(&self) -> f64 {
        self.f_zero_plus
    }

    pub fn f_prime_inf(&self) -> f64 {
        self.f_prime_inf
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x <= 0.0 || !x.is_finite() {
            return Err(Error::DomainError(format!("f evaluated at {x}")));
        }
        Ok(self.eval_positive(x))
    }

    fn eval_positive(&self, x: f64) -> f64 {
        match self.id {
            MonotoneId::Am => (x + 1.0) / 2.0,
            MonotoneId::Gm => x.sqrt(),
            MonotoneId::Hm => 2.0 * x / (x + 1.0),
            MonotoneId::Lm => {
                let u = x - 1.0;
                if u.abs() < LM_SERIES_RADIUS {
                    lm_series(u)
                } else {
                    u / x.ln()
                }
            }
            MonotoneId::Power(k) => x.powf(k),
            MonotoneId::Custom => (self.custom.as_ref().expect("custom evaluator"))(x),
        }
    }

    pub fn perspective(&self, x: f64, y: f64) -> f64 {
        debug_assert!(x >= 0.0 && y >= 0.0);
        if x == 0.0 && y == 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return times(y, self.f_zero_plus);
        }
        if y == 0.0 {
            return times(x, self.f_prime_inf);
        }
        match self.id {
            MonotoneId::Am => (x + y) / 2.0,
            MonotoneId::Gm => (x * y).sqrt(),
            MonotoneId::Hm => 2.0 * x * y / (x + y),
            MonotoneId::Lm => {
                let u = x / y - 1.0;
                if u.abs() < LM_SERIES_RADIUS {
                    y * lm_series(u)
                } else {
                    (x - y) / (x.ln() - y.ln())
                }
            }
            MonotoneId::Power(k) => x.powf(k) * y.powf(1.0 - k),
            MonotoneId::Custom => y * self.eval_positive(x / y),
        }
    }

    /// Normalized, symmetry-inducing and `f_GM ≤ f ≤ f_AM` on the default grid.
    pub fn in_gm_am_band(&self) -> bool {
        let grid = log_grid();
        self.flags.normalized
            && self.flags.symmetry_inducing
            && ordering_check(&Self::gm(), self, &grid)
            && ordering_check(self, &Self::am(), &grid)
    }

    /// Normalized, symmetry-inducing and `f_HM ≤ f ≤ f_LM` on the default grid.
    pub fn in_hm_lm_band(&self) -> bool {
        let grid = log_grid();
        self.flags.normalized
            && self.flags.symmetry_inducing
            && ordering_check(&Self::hm(), self, &grid)
            && ordering_check(self, &Self::lm(), &grid)
    }
}

impl FromStr for MonotoneFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "am" => Ok(Self::am()),
            "gm" => Ok(Self::gm()),
            "hm" => Ok(Self::hm()),
            "lm" => Ok(Self::lm()),
            _ => match t.strip_prefix("power:") {
                Some(k) => {
                    let k: f64 = k.parse().map_err(|_| Error::Parse(format!("bad power exponent in '{s}'")))?;
                    Self::power(k)
                }
                None => Err(Error::Parse(format!("unknown monotone function '{s}'"))),
            },
        }
    }
}

/// `{2^-8, 2^-7.75, …, 2^8}`.
pub fn log_grid() -> Vec<f64> {
    (-32..=32).map(|k| 2f64.powf(k as f64 / 4.0)).collect()
}

/// True iff `f1 ≤ f2` at every grid point, with slack `1e-12`.
pub fn ordering_check(f1: &MonotoneFn, f2: &MonotoneFn, grid: &[f64]) -> bool {
    grid.iter().all(|&x| x > 0.0 && f1.eval_positive(x) <= f2.eval_positive(x) + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_examples() {
        assert_eq!(MonotoneFn::lm().evaluate(1.0).unwrap(), 1.0);
        assert_eq!(MonotoneFn::gm().evaluate(4.0).unwrap(), 2.0);
        assert!((MonotoneFn::hm().evaluate(3.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(MonotoneFn::am().evaluate(0.0).is_err());
        assert!(MonotoneFn::am().evaluate(-1.0).is_err());
    }

    #[test]
    fn lm_series_is_continuous() {
        let lm = MonotoneFn::lm();
        for &x in &[1.0 - 1.01e-4, 1.0 - 0.99e-4, 1.0 + 0.99e-4, 1.0 + 1.01e-4] {
            let direct = (x - 1.0) / f64::ln(x);
            assert!((lm.evaluate(x).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn perspective_examples() {
        assert_eq!(MonotoneFn::gm().perspective(4.0, 1.0), 2.0);
        assert_eq!(MonotoneFn::am().perspective(0.0, 2.0), 1.0);
        assert_eq!(MonotoneFn::gm().perspective(0.0, 5.0), 0.0);
        assert_eq!(MonotoneFn::am().perspective(3.0, 0.0), 1.5);
        assert_eq!(MonotoneFn::hm().perspective(0.0, 0.0), 0.0);
    }

    #[test]
    fn ordering_examples() {
        let g = log_grid();
        assert!(ordering_check(&MonotoneFn::hm(), &MonotoneFn::gm(), &g));
        assert!(!ordering_check(&MonotoneFn::am(), &MonotoneFn::hm(), &g));
        assert!(ordering_check(&MonotoneFn::gm(), &MonotoneFn::gm(), &g));
        assert!(ordering_check(&MonotoneFn::gm(), &MonotoneFn::lm(), &g));
        assert!(ordering_check(&MonotoneFn::lm(), &MonotoneFn::am(), &g));
    }

    #[test]
    fn catalog_flags() {
        for f in MonotoneFn::means() {
            let fl = f.flags();
            assert!(fl.normalized && fl.symmetry_inducing && !fl.multiplicative);
            assert_eq!(fl.support_restricting, f.id() != MonotoneId::Am);
        }
        assert!(MonotoneFn::power(0.5).unwrap().flags().symmetry_inducing);
        assert!(!MonotoneFn::power(0.3).unwrap().flags().symmetry_inducing);
        assert!(MonotoneFn::power(0.3).unwrap().flags().multiplicative);
        assert!(MonotoneFn::power(1.5).is_err());
    }

    #[test]
    fn symmetry_flag_matches_grid() {
        for f in [MonotoneFn::am(), MonotoneFn::gm(), MonotoneFn::hm(), MonotoneFn::lm(), MonotoneFn::power(0.25).unwrap()] {
            let sampled = log_grid().iter().all(|&x| (f.evaluate(x).unwrap() - x * f.evaluate(1.0 / x).unwrap()).abs() <= 1e-12 * x.max(1.0));
            assert_eq!(sampled, f.flags().symmetry_inducing, "{f}");
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("GM".parse::<MonotoneFn>().unwrap().id(), MonotoneId::Gm);
        assert_eq!("power:0.25".parse::<MonotoneFn>().unwrap().id(), MonotoneId::Power(0.25));
        assert!("cubic".parse::<MonotoneFn>().is_err());
        assert!("power:x".parse::<MonotoneFn>().is_err());
    }

    #[test]
    fn custom_functions_are_unverified() {
        let f = MonotoneFn::custom("sqrt-copy", |x: f64| x.sqrt(), 0.0, 0.0);
        assert!(!f.flags().verified);
        assert!(f.flags().symmetry_inducing && f.flags().normalized && f.flags().support_restricting);
        assert!((f.perspective(4.0, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bands() {
        assert!(MonotoneFn::lm().in_gm_am_band());
        assert!(!MonotoneFn::hm().in_gm_am_band());
        assert!(MonotoneFn::gm().in_hm_lm_band());
        assert!(!MonotoneFn::am().in_hm_lm_band());
    }
}
