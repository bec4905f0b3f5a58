//! Reference divergences in bits: trace distance, Umegaki relative entropy,
//! sandwiched Rényi divergences and the max-divergence.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SpectralDecomposition};
use crate::state::Density;

/// Largest weight of `ρ` outside `supp σ` still counted as `ρ ≪ σ`.
pub const SUPPORT_TOL: f64 = 1e-9;

/// A divergence value; `f64::INFINITY` when `ρ` is not supported on `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    /// Whether `ρ ≪ σ` held.
    pub support: bool,
}

impl DivergenceValue {
    pub fn finite(value: f64) -> Self {
        DivergenceValue { value: value.max(0.0), support: true }
    }

    pub fn infinite() -> Self {
        DivergenceValue { value: f64::INFINITY, support: false }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

pub(crate) fn same_dim(rho: &Density, sigma: &Density) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("ρ is {}-dimensional, σ is {}", rho.dim(), sigma.dim())));
    }
    Ok(())
}

pub fn supported_on(rho: &Density, sigma: &Density) -> bool {
    sigma.weight_outside_support(rho.matrix()) <= SUPPORT_TOL
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &Density, sigma: &Density) -> Result<f64> {
    same_dim(rho, sigma)?;
    let diff = linalg::hermitian_part(&(rho.matrix() - sigma.matrix()));
    let sd = linalg::spectral_decompose(&diff)?;
    Ok(0.5 * sd.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

fn support_log(s: &Density) -> linalg::CMatrix {
    let sd = SpectralDecomposition { eigenvalues: s.support_eigenvalues(), eigenvectors: s.eigenvectors().clone() };
    sd.map_eigenvalues(|x| if x > 0.0 { x.ln() } else { 0.0 })
}

/// `Tr[ρ (log ρ − log σ)]`.
pub fn relative_entropy(rho: &Density, sigma: &Density) -> Result<DivergenceValue> {
    same_dim(rho, sigma)?;
    if !supported_on(rho, sigma) {
        return Ok(DivergenceValue::infinite());
    }
    let neg_entropy: f64 = rho.support_eigenvalues().iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum();
    let cross = linalg::trace(&(rho.matrix() * support_log(sigma))).re;
    Ok(DivergenceValue::finite((neg_entropy - cross) / LN_2))
}

/// `Tr[(σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α]`.
fn sandwiched_quasi(alpha: f64, rho: &Density, sigma: &Density) -> Result<f64> {
    let s = sigma.power((1.0 - alpha) / (2.0 * alpha));
    let inner = linalg::hermitian_part(&(&s * rho.matrix() * &s));
    let sd = linalg::spectral_decompose(&inner)?;
    Ok(sd.eigenvalues.iter().map(|&x| x.max(0.0).powf(alpha)).sum())
}

/// `D̃_α(ρ‖σ) = log Tr[(σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α] / (α − 1)`.
///
/// Infinite for `α > 1` unless `ρ ≪ σ`, and for `α < 1` when `ρ ⟂ σ`.
pub fn sandwiched_renyi(alpha: f64, rho: &Density, sigma: &Density) -> Result<DivergenceValue> {
    same_dim(rho, sigma)?;
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::DomainError(format!("Rényi order {alpha} must lie in (0,1)∪(1,∞)")));
    }
    let support = supported_on(rho, sigma);
    if alpha > 1.0 && !support {
        return Ok(DivergenceValue::infinite());
    }
    let q = sandwiched_quasi(alpha, rho, sigma)?;
    if q <= 0.0 {
        return Ok(DivergenceValue::infinite());
    }
    Ok(DivergenceValue { value: (q.log2() / (alpha - 1.0)).max(0.0), support })
}

/// `log ‖σ^{−1/2} ρ σ^{−1/2}‖_∞`.
pub fn d_max(rho: &Density, sigma: &Density) -> Result<DivergenceValue> {
    same_dim(rho, sigma)?;
    if !supported_on(rho, sigma) {
        return Ok(DivergenceValue::infinite());
    }
    let s = sigma.power(-0.5);
    let m = linalg::hermitian_part(&(&s * rho.matrix() * &s));
    let top = linalg::spectral_decompose(&m)?.max_eigenvalue();
    Ok(DivergenceValue::finite(top.log2()))
}
