use crate::error::{Error, Result};
use crate::linalg::{
    self, c64, frobenius, CMatrix, SpectralDecomposition, PSD_REL_TOL, RANK_REL_TOL,
};

pub const TRACE_TOL: f64 = 1e-9;

/// Positive semidefinite, unit-trace matrix with its cached spectral decomposition.
///
/// Small negative eigenvalues allowed by the PSD tolerance are clipped to zero
/// in the cached spectrum; the stored matrix is the Hermitian part of the input.
#[derive(Debug, Clone)]
pub struct Density {
    matrix: CMatrix,
    spectral: SpectralDecomposition,
}

impl Density {
    pub fn new(m: CMatrix) -> Result<Self> {
        linalg::check_hermitian(&m)?;
        let matrix = linalg::hermitian_part(&m);
        let mut spectral = linalg::spectral_decompose(&matrix)?;
        let floor = -PSD_REL_TOL * frobenius(&matrix);
        let min = spectral.min_eigenvalue();
        if min < floor {
            return Err(Error::NotPsd(min));
        }
        for v in spectral.eigenvalues.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotUnitTrace(tr.re));
        }
        Ok(Density { matrix, spectral })
    }

    /// Normalizes a PSD matrix to unit trace first.
    pub fn normalized(m: CMatrix) -> Result<Self> {
        let tr = linalg::trace(&m).re;
        if tr <= 0.0 {
            return Err(Error::NotUnitTrace(tr));
        }
        Density::new(m.unscale(tr))
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        Density::new(linalg::diag(p))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Density::new(linalg::identity(d).unscale(d as f64)).expect("maximally mixed state is valid")
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(psi: &[num_complex::Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::DomainError("zero vector".into()));
        }
        let v = v.unscale(n);
        Density::new(&v * v.adjoint())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.spectral.eigenvectors
    }

    pub fn rank_tol(&self) -> f64 {
        RANK_REL_TOL * self.spectral.max_eigenvalue()
    }

    /// Eigenvalues with those at or below `rank_tol` replaced by exact zeros.
    pub fn support_eigenvalues(&self) -> Vec<f64> {
        let cut = self.rank_tol();
        self.spectral.eigenvalues.iter().map(|&x| if x > cut { x } else { 0.0 }).collect()
    }

    pub fn rank(&self) -> usize {
        self.support_eigenvalues().iter().filter(|&&x| x > 0.0).count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectral.min_eigenvalue()
    }

    /// `ρ^p` on the support; zero eigenvalues stay zero.
    pub fn power(&self, p: f64) -> CMatrix {
        let ev = self.support_eigenvalues();
        let sd = SpectralDecomposition { eigenvalues: ev, eigenvectors: self.spectral.eigenvectors.clone() };
        sd.map_eigenvalues(|x| if x > 0.0 { x.powf(p) } else { 0.0 })
    }

    pub fn sqrt(&self) -> CMatrix {
        self.power(0.5)
    }

    pub fn support_projector(&self) -> CMatrix {
        let ev = self.support_eigenvalues();
        let sd = SpectralDecomposition { eigenvalues: ev, eigenvectors: self.spectral.eigenvectors.clone() };
        sd.map_eigenvalues(|x| if x > 0.0 { 1.0 } else { 0.0 })
    }

    /// `Tr[(𝟙 - Π_σ) ρ]`, the weight of `ρ` outside the support of `self`.
    pub fn weight_outside_support(&self, rho: &CMatrix) -> f64 {
        let outside = linalg::identity(self.dim()) - self.support_projector();
        linalg::trace(&(outside * rho)).re
    }

    pub fn tensor(&self, other: &Density) -> Density {
        Density::new(linalg::kron(&self.matrix, &other.matrix)).expect("product of states is a state")
    }

    pub fn marginal(&self, keep: linalg::Keep, dims: (usize, usize)) -> Result<Density> {
        Density::new(linalg::partial_trace(&self.matrix, keep, dims)?)
    }
}

/// `λ Φ̂⁺ + (1-λ) 𝟙/d²` on `d ⊗ d`, with `Φ̂⁺` the normalized maximally entangled state.
pub fn isotropic(d: usize, lambda: f64) -> Result<Density> {
    let n = d * d;
    let mut m = linalg::identity(n).scale((1.0 - lambda) / n as f64);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] += c64(lambda / d as f64, 0.0);
        }
    }
    Density::new(m)
}

/// Unnormalized `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = Σ_i |ii⟩`.
pub fn max_entangled_unnormalized(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = c64(1.0, 0.0);
        }
    }
    m
}

/// Embeds a joint probability table as a state diagonal in the product basis.
pub fn classical_state(p: &[Vec<f64>]) -> Result<Density> {
    let dx = p.len();
    let dy = p.first().map(|r| r.len()).unwrap_or(0);
    let mut diag = Vec::with_capacity(dx * dy);
    for row in p {
        if row.len() != dy {
            return Err(Error::NotADistribution("ragged table".into()));
        }
        diag.extend_from_slice(row);
    }
    Density::from_diagonal(&diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_and_rejects() {
        assert!(Density::from_diagonal(&[0.75, 0.25]).is_ok());
        assert!(matches!(Density::from_diagonal(&[1.5, -0.5]), Err(Error::NotPsd(_))));
        assert!(matches!(Density::from_diagonal(&[0.5, 0.6]), Err(Error::NotUnitTrace(_))));
    }

    #[test]
    fn power_and_support() {
        let rho = Density::from_diagonal(&[0.8, 0.2, 0.0]).unwrap();
        assert_eq!(rho.rank(), 2);
        assert!(!rho.is_full_rank());
        let inv = rho.power(-1.0);
        assert!((inv[(0, 0)].re - 1.25).abs() < 1e-14);
        assert!((inv[(1, 1)].re - 5.0).abs() < 1e-12);
        assert_eq!(inv[(2, 2)].re, 0.0);
        let p = rho.support_projector();
        assert!((linalg::trace(&p).re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn isotropic_marginals_are_maximally_mixed() {
        let s = isotropic(3, 0.4).unwrap();
        let a = s.marginal(linalg::Keep::A, (3, 3)).unwrap();
        assert!(linalg::frobenius(&(a.matrix() - linalg::identity(3).scale(1.0 / 3.0))) < 1e-14);
    }
}
