//! The operators `J^p_{f,σ}`, their inner products, and non-commutative
//! expectation, variance and covariance.
//!
//! In the eigenbasis `σ = Σ λ_i |ν_i⟩⟨ν_i|`,
//! `J^p_{f,σ}(X) = U (W ⊙ U†XU) U†` with `W_ij = P_f(λ_i, λ_j)^p`.
//! For negative `p`, zero weights stay zero.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::monotone::MonotoneFn;
use crate::state::Density;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Power {
    MinusOne,
    MinusHalf,
    Half,
    One,
}

impl Power {
    pub fn exponent(self) -> f64 {
        match self {
            Power::MinusOne => -1.0,
            Power::MinusHalf => -0.5,
            Power::Half => 0.5,
            Power::One => 1.0,
        }
    }
}

/// `(f, σ, p)`: the inner product `⟨X, Y⟩ = Tr[X† J^p_{f,σ}(Y)]`.
#[derive(Debug, Clone)]
pub struct WeightedSpace {
    f: MonotoneFn,
    sigma: Density,
    power: Power,
    weights: RMatrix,
    warning: Option<String>,
}

impl WeightedSpace {
    pub fn new(f: &MonotoneFn, sigma: &Density, power: Power) -> Self {
        let ev = sigma.support_eigenvalues();
        let d = ev.len();
        let p = power.exponent();
        let weights = RMatrix::from_fn(d, d, |i, j| {
            let w = f.perspective(ev[i], ev[j]);
            if w == 0.0 {
                0.0
            } else {
                w.powf(p)
            }
        });
        let warning = if p < 0.0 && !sigma.is_full_rank() && !f.flags().support_restricting {
            Some(format!(
                "{} is not support-restricting and σ has rank {} < {}: boundary weights were inverted",
                f.name(),
                sigma.rank(),
                d
            ))
        } else {
            None
        };
        WeightedSpace { f: f.clone(), sigma: sigma.clone(), power, weights, warning }
    }

    pub fn f(&self) -> &MonotoneFn {
        &self.f
    }

    pub fn sigma(&self) -> &Density {
        &self.sigma
    }

    pub fn power(&self) -> Power {
        self.power
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// Entrywise weights in `σ`'s eigenbasis.
    pub fn weights(&self) -> &RMatrix {
        &self.weights
    }

    /// Set when a negative power inverted boundary weights of a rank-deficient `σ`.
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// `U†XU`.
    pub fn to_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        let u = self.sigma.eigenvectors();
        u.adjoint() * x * u
    }

    /// `UXU†`.
    pub fn from_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        let u = self.sigma.eigenvectors();
        u * x * u.adjoint()
    }

    /// Hadamard weighting of a matrix already expressed in `σ`'s eigenbasis.
    pub fn apply_in_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        x.zip_map(&self.weights, |z, w| z * w)
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        linalg::ensure_dim(x, self.dim(), "J input")?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CMatrix) -> CMatrix {
        self.from_eigenbasis(&self.apply_in_eigenbasis(&self.to_eigenbasis(x)))
    }

    /// `Tr[X† J^p(Y)]`.
    pub fn inner_product(&self, x: &CMatrix, y: &CMatrix) -> Result<Complex64> {
        linalg::ensure_dim(x, self.dim(), "inner product left")?;
        Ok(linalg::hs_inner(x, &self.apply(y)?))
    }

    pub fn norm(&self, x: &CMatrix) -> Result<f64> {
        Ok(self.inner_product(x, x)?.re.max(0.0).sqrt())
    }
}

/// `Tr[σX]`.
pub fn expectation(sigma: &Density, x: &CMatrix) -> Result<Complex64> {
    linalg::ensure_dim(x, sigma.dim(), "observable")?;
    Ok(linalg::trace(&(sigma.matrix() * x)))
}

/// `⟨X - Tr[σX]𝟙, Y - Tr[σY]𝟙⟩_{f,σ}`.
pub fn covariance(f: &MonotoneFn, sigma: &Density, x: &CMatrix, y: &CMatrix) -> Result<Complex64> {
    if !f.flags().normalized {
        return Err(Error::NotNormalized(f.evaluate(1.0)?));
    }
    let d = sigma.dim();
    let id = linalg::identity(d);
    let xc = x - &id * expectation(sigma, x)?;
    let yc = y - &id * expectation(sigma, y)?;
    WeightedSpace::new(f, sigma, Power::One).inner_product(&xc, &yc)
}

pub fn variance(f: &MonotoneFn, sigma: &Density, x: &CMatrix) -> Result<f64> {
    Ok(covariance(f, sigma, x, x)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, diag, frobenius, identity, pauli_z, unit};

    #[test]
    fn j_of_identity_is_sigma() {
        let sigma = Density::new(linalg::from_real(2, 2, &[0.7, 0.2, 0.2, 0.3])).unwrap();
        for f in MonotoneFn::means() {
            let j = WeightedSpace::new(&f, &sigma, Power::One);
            assert!(frobenius(&(j.apply(&identity(2)).unwrap() - sigma.matrix())) < 1e-14);
        }
    }

    #[test]
    fn scalar_sigma_halves() {
        let j = WeightedSpace::new(&MonotoneFn::gm(), &Density::maximally_mixed(2), Power::One);
        let x = linalg::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(frobenius(&(j.apply(&x).unwrap() - x.scale(0.5))) < 1e-15);
    }

    #[test]
    fn gm_off_diagonal_weight() {
        let sigma = Density::from_diagonal(&[0.75, 0.25]).unwrap();
        let j = WeightedSpace::new(&MonotoneFn::gm(), &sigma, Power::One);
        let out = j.apply(&unit(2, 0, 1)).unwrap();
        assert!(frobenius(&(out - unit(2, 0, 1).scale(3f64.sqrt() / 4.0))) < 1e-15);
    }

    #[test]
    fn inner_product_identities() {
        let sigma = Density::from_diagonal(&[0.75, 0.25]).unwrap();
        let x = linalg::from_real(2, 2, &[0.2, 0.5, 0.5, -1.0]);
        for f in MonotoneFn::means() {
            let j = WeightedSpace::new(&f, &sigma, Power::One);
            let lhs = j.inner_product(&identity(2), &x).unwrap();
            assert!((lhs - expectation(&sigma, &x).unwrap()).norm() < 1e-15);
            let jinv = WeightedSpace::new(&f, &sigma, Power::MinusOne);
            let got = jinv.inner_product(&identity(2), &identity(2)).unwrap();
            assert!((got - c64(1.0 / 0.75 + 4.0, 0.0)).norm() < 1e-13);
            let mm = WeightedSpace::new(&f, &Density::maximally_mixed(2), Power::One);
            assert!((mm.inner_product(&pauli_z(), &pauli_z()).unwrap() - c64(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn expectation_and_variance_examples() {
        let sigma = Density::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!((expectation(&sigma, &pauli_z()).unwrap().re - 0.5).abs() < 1e-15);
        assert!((expectation(&sigma, &identity(2)).unwrap().re - 1.0).abs() < 1e-15);
        let mm = Density::maximally_mixed(2);
        for f in MonotoneFn::means() {
            assert!(variance(&f, &sigma, &identity(2)).unwrap().abs() < 1e-15);
            assert!((variance(&f, &mm, &pauli_z()).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn commuting_covariance_is_classical() {
        let p = [0.5, 0.3, 0.2];
        let sigma = Density::from_diagonal(&p).unwrap();
        let (a, b) = ([1.0, -2.0, 0.5], [0.0, 3.0, 1.0]);
        let ea: f64 = p.iter().zip(&a).map(|(p, x)| p * x).sum();
        let eb: f64 = p.iter().zip(&b).map(|(p, x)| p * x).sum();
        let want: f64 = (0..3).map(|i| p[i] * (a[i] - ea) * (b[i] - eb)).sum();
        for f in MonotoneFn::means() {
            let got = covariance(&f, &sigma, &diag(&a), &diag(&b)).unwrap();
            assert!((got.re - want).abs() < 1e-14 && got.im.abs() < 1e-15);
        }
    }

    #[test]
    fn am_pseudo_inverse_warns() {
        let sigma = Density::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(WeightedSpace::new(&MonotoneFn::am(), &sigma, Power::MinusOne).warning().is_some());
        assert!(WeightedSpace::new(&MonotoneFn::gm(), &sigma, Power::MinusOne).warning().is_none());
        let w = WeightedSpace::new(&MonotoneFn::am(), &sigma, Power::MinusOne);
        assert!((w.weights()[(0, 1)] - 2.0).abs() < 1e-15);
        assert_eq!(w.weights()[(1, 1)], 0.0);
    }
}
