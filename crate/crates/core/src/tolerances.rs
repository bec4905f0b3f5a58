//! Numerical tolerances shared by the pipelines, overridable by key.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest tolerated deviation of the Gram matrix from the identity.
    pub gs_tol: f64,
    /// Gram-Schmidt breakdown threshold relative to the seed norm.
    pub gs_floor: f64,
    /// Largest discarded imaginary or antisymmetric part of the standard matrix.
    pub imag_tol: f64,
    pub lambda1_tol: f64,
    /// Slack before an out-of-range coefficient is an error instead of clamped.
    pub eta_range_tol: f64,
    /// Distance from 0 or 1 below which a coefficient counts as extreme.
    pub eta_gap_tol: f64,
    pub fix_tol: f64,
    /// Smallest admissible gap below the unit singular value of `T − 𝟙`.
    pub fixed_point_gap: f64,
    pub dpi_tol: f64,
    pub correspondence_tol: f64,
    pub tensor_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gs_tol: 1e-9,
            gs_floor: 1e-12,
            imag_tol: 1e-6,
            lambda1_tol: 1e-7,
            eta_range_tol: 1e-7,
            eta_gap_tol: 1e-7,
            fix_tol: 1e-8,
            fixed_point_gap: 1e-7,
            dpi_tol: 1e-9,
            correspondence_tol: 1e-6,
            tensor_tol: 1e-6,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 11] = [
        "gs_tol",
        "gs_floor",
        "imag_tol",
        "lambda1_tol",
        "eta_range_tol",
        "eta_gap_tol",
        "fix_tol",
        "fixed_point_gap",
        "dpi_tol",
        "correspondence_tol",
        "tensor_tol",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "gs_tol" => &mut self.gs_tol,
            "gs_floor" => &mut self.gs_floor,
            "imag_tol" => &mut self.imag_tol,
            "lambda1_tol" => &mut self.lambda1_tol,
            "eta_range_tol" => &mut self.eta_range_tol,
            "eta_gap_tol" => &mut self.eta_gap_tol,
            "fix_tol" => &mut self.fix_tol,
            "fixed_point_gap" => &mut self.fixed_point_gap,
            "dpi_tol" => &mut self.dpi_tol,
            "correspondence_tol" => &mut self.correspondence_tol,
            "tensor_tol" => &mut self.tensor_tol,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::DomainError(format!("tolerance {key} must be positive, got {value}")));
        }
        let slot = self
            .slot(key)
            .ok_or_else(|| Error::Parse(format!("unknown tolerance key {key:?}; expected one of {:?}", Self::KEYS)))?;
        *slot = value;
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, text: &str) -> Result<()> {
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("tolerance override {text:?} is not key=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("tolerance value {value:?} is not a number")))?;
        self.set(key.trim(), value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let mut t = Tolerances::default();
        t.apply_override("gs_tol=1e-6").unwrap();
        assert_eq!(t.gs_tol, 1e-6);
        assert!(matches!(t.apply_override("nope=1"), Err(Error::Parse(_))));
        assert!(matches!(t.apply_override("gs_tol"), Err(Error::Parse(_))));
        assert!(matches!(t.apply_override("gs_tol=-1"), Err(Error::DomainError(_))));
        for key in Tolerances::KEYS {
            assert!(t.set(key, 0.5).is_ok());
        }
    }
}
