//! Maximal correlation coefficients as second operator-Schmidt coefficients.
//!
//! `μ^Lin_k` uses `ρ̃_k = (ρ_A^{-(1-k)/2} ⊗ ρ_B^{-k/2}) ρ_AB (ρ_A^{-k/2} ⊗ ρ_B^{-(1-k)/2})`
//! over the complex operator spaces; `μ_f` uses
//! `ρ̃_f = (J^{-1/2}_{f,ρ_A} ⊗ J^{-1/2}_{f,ρ_B})(ρ_AB)` over the Hermitian ones.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRep, LinearMap};
use crate::contraction::contraction_coefficient_with;
use crate::error::{Error, Result};
use crate::jop::{Power, WeightedSpace};
use crate::linalg::{self, CMatrix, Keep, RMatrix};
use crate::maps::{apply_on_second, canonical_purification, f_coupling};
use crate::monotone::{MonotoneFn, MonotoneId};
use crate::state::Density;
use crate::tolerances::Tolerances;

/// Schmidt coefficients below this are reported as exact zeros.
pub const SCHMIDT_ZERO: f64 = 1e-12;
const MU_RANGE_TOL: f64 = 1e-8;
const CLASSICAL_TOL: f64 = 1e-12;
const PROJECTOR_TOL: f64 = 1e-9;
const DECOMPOSITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub f: String,
    pub mu: f64,
    pub schmidt_spectrum: Vec<f64>,
    pub lambda1: f64,
}

fn check_dims(rho: &Density, da: usize, db: usize) -> Result<()> {
    if da == 0 || db == 0 || rho.dim() != da * db {
        return Err(Error::DimensionMismatch(format!("{}-dimensional state does not factor as {da}x{db}", rho.dim())));
    }
    Ok(())
}

fn check_k(k: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::DomainError(format!("k = {k} outside [0,1]")));
    }
    Ok(())
}

fn marginals(rho: &Density, da: usize, db: usize) -> Result<(Density, Density)> {
    Ok((rho.marginal(Keep::A, (da, db))?, rho.marginal(Keep::B, (da, db))?))
}

fn clean_spectrum(mut s: Vec<f64>) -> Vec<f64> {
    s.sort_by(|a, b| b.total_cmp(a));
    s.into_iter().map(|x| if x < SCHMIDT_ZERO { 0.0 } else { x }).collect()
}

fn report(name: String, spectrum: Vec<f64>, tol: &Tolerances) -> Result<CorrelationReport> {
    let spectrum = clean_spectrum(spectrum);
    let lambda1 = spectrum.first().copied().unwrap_or(0.0);
    if (lambda1 - 1.0).abs() > tol.lambda1_tol {
        return Err(Error::LeadingEigenvalue(lambda1));
    }
    let mu = spectrum.get(1).copied().unwrap_or(0.0);
    if mu > 1.0 + MU_RANGE_TOL {
        return Err(Error::OutOfRange(mu));
    }
    Ok(CorrelationReport { f: name, mu: mu.min(1.0), schmidt_spectrum: spectrum, lambda1 })
}

pub fn rho_tilde_k(k: f64, rho: &Density, da: usize, db: usize) -> Result<CMatrix> {
    check_k(k)?;
    check_dims(rho, da, db)?;
    let (ra, rb) = marginals(rho, da, db)?;
    let left = linalg::kron(&ra.power(-(1.0 - k) / 2.0), &rb.power(-k / 2.0));
    let right = linalg::kron(&ra.power(-k / 2.0), &rb.power(-(1.0 - k) / 2.0));
    Ok(left * rho.matrix() * right)
}

pub fn mu_lin_k(k: f64, rho: &Density, da: usize, db: usize) -> Result<CorrelationReport> {
    let tilde = rho_tilde_k(k, rho, da, db)?;
    report(format!("lin_k={k}"), linalg::operator_schmidt(&tilde, da, db)?, &Tolerances::default())
}

/// `(J^{-1/2}_{f,σ_A} ⊗ J^{-1/2}_{f,σ_B})(X)` as a superoperator tensor product.
pub fn bilocal_j_inv_sqrt(f: &MonotoneFn, x: &CMatrix, sa: &Density, sb: &Density) -> Result<CMatrix> {
    let (da, db) = (sa.dim(), sb.dim());
    linalg::ensure_dim(x, da * db, "bipartite operator")?;
    let ja = WeightedSpace::new(f, sa, Power::MinusHalf);
    let jb = WeightedSpace::new(f, sb, Power::MinusHalf);
    let u = linalg::kron(sa.eigenvectors(), sb.eigenvectors());
    let mut y = u.adjoint() * x * &u;
    let (wa, wb) = (ja.weights(), jb.weights());
    for r in 0..da * db {
        for c in 0..da * db {
            y[(r, c)] *= wa[(r / db, c / db)] * wb[(r % db, c % db)];
        }
    }
    Ok(&u * y * u.adjoint())
}

fn is_classical(rho: &Density) -> bool {
    let m = rho.matrix();
    let off = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].norm())
        .fold(0.0, f64::max);
    off <= CLASSICAL_TOL * linalg::max_abs(m).max(f64::MIN_POSITIVE)
}

fn is_maximally_mixed(s: &Density) -> bool {
    let target = 1.0 / s.dim() as f64;
    s.eigenvalues().iter().all(|x| (x - target).abs() <= 1e-12)
}

/// `μ_f` for `f_GM ≤ f ≤ f_AM`. Functions outside the band are accepted only
/// when `ρ̃_f = ρ̃_GM`: a classical state or maximally mixed marginals.
pub fn mu_f(f: &MonotoneFn, rho: &Density, da: usize, db: usize) -> Result<CorrelationReport> {
    check_dims(rho, da, db)?;
    if !f.flags().normalized {
        return Err(Error::NotNormalized(f.evaluate(1.0)?));
    }
    let (ra, rb) = marginals(rho, da, db)?;
    let in_band = f.in_gm_am_band();
    if !in_band && !is_classical(rho) && !(is_maximally_mixed(&ra) && is_maximally_mixed(&rb)) {
        return Err(Error::BandViolation(format!("{} is not between GM and AM", f.name())));
    }
    let tilde = bilocal_j_inv_sqrt(f, rho.matrix(), &ra, &rb)?;
    let (c, _) = linalg::hermitian_coefficients(&tilde, da, db)?;
    report(f.name().to_string(), linalg::real_svd(&c)?.singular_values, &Tolerances::default())
}

/// Hirschfeld-Gebelein-Rényi maximal correlation of a joint table.
pub fn classical_mu(p: &[Vec<f64>]) -> Result<f64> {
    let dx = p.len();
    let dy = p.first().map(Vec::len).unwrap_or(0);
    if dx == 0 || dy == 0 || p.iter().any(|r| r.len() != dy) {
        return Err(Error::NotADistribution("table must be a non-empty rectangle".into()));
    }
    if p.iter().flatten().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::NotADistribution("negative or non-finite entry".into()));
    }
    let total: f64 = p.iter().flatten().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotADistribution(format!("entries sum to {total}")));
    }
    let px: Vec<f64> = p.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..dy).map(|y| p.iter().map(|r| r[y]).sum()).collect();
    let xs: Vec<usize> = (0..dx).filter(|&x| px[x] > 0.0).collect();
    let ys: Vec<usize> = (0..dy).filter(|&y| py[y] > 0.0).collect();
    let m = RMatrix::from_fn(xs.len(), ys.len(), |i, j| {
        let (x, y) = (xs[i], ys[j]);
        p[x][y] / (px[x] * py[y]).sqrt()
    });
    let s = linalg::real_svd(&m)?.singular_values;
    Ok(s.get(1).copied().unwrap_or(0.0).clamp(0.0, 1.0))
}

/// Hermitian operator-Schmidt coefficients of `(ρ_A ⊗ ρ_B)^{-1/4} ρ_AB (ρ_A ⊗ ρ_B)^{-1/4}`,
/// `min(d_A², d_B²)` entries, descending.
pub fn gm_schmidt_spectrum(rho: &Density, da: usize, db: usize) -> Result<Vec<f64>> {
    check_dims(rho, da, db)?;
    let (ra, rb) = marginals(rho, da, db)?;
    let w = linalg::kron(&ra.power(-0.25), &rb.power(-0.25));
    let tilde = &w * rho.matrix() * &w;
    Ok(clean_spectrum(linalg::hermitian_operator_schmidt(&tilde, da, db)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorizationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `ρ_AB ⊗ σ_A'B'` reordered as `(AA')(BB')`.
pub fn joint_product(rho: &Density, dims_rho: (usize, usize), sigma: &Density, dims_sigma: (usize, usize)) -> Result<Density> {
    check_dims(rho, dims_rho.0, dims_rho.1)?;
    check_dims(sigma, dims_sigma.0, dims_sigma.1)?;
    let prod = linalg::kron(rho.matrix(), sigma.matrix());
    let dims = [dims_rho.0, dims_rho.1, dims_sigma.0, dims_sigma.1];
    Density::new(linalg::permute_subsystems(&prod, &dims, &[0, 2, 1, 3])?)
}

pub fn tensorization_check(
    k: f64,
    rho: &Density,
    dims_rho: (usize, usize),
    sigma: &Density,
    dims_sigma: (usize, usize),
    tol: &Tolerances,
) -> Result<TensorizationCheck> {
    let joint = joint_product(rho, dims_rho, sigma, dims_sigma)?;
    let lhs = mu_lin_k(k, &joint, dims_rho.0 * dims_sigma.0, dims_rho.1 * dims_sigma.1)?.mu;
    let a = mu_lin_k(k, rho, dims_rho.0, dims_rho.1)?.mu;
    let b = mu_lin_k(k, sigma, dims_sigma.0, dims_sigma.1)?.mu;
    let rhs = a.max(b);
    Ok(TensorizationCheck { lhs, rhs, pass: (lhs - rhs).abs() <= tol.tensor_tol })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub holds: bool,
    /// Largest of the block, weight and measured-distribution deviations.
    pub residual: f64,
    /// `Tr[(Π_{A,i} ⊗ Π_{B,j}) ρ]`.
    pub measured: [[f64; 2]; 2],
}

fn check_projector(pi: &CMatrix, d: usize, side: &str) -> Result<()> {
    if pi.nrows() != d || pi.ncols() != d {
        return Err(Error::InvalidProjectors(format!("{side} projector is not {d}x{d}")));
    }
    let idem = linalg::max_abs(&(pi * pi - pi));
    let herm = linalg::hermitian_residual(pi);
    if idem > PROJECTOR_TOL || herm > PROJECTOR_TOL {
        return Err(Error::InvalidProjectors(format!("{side} is not an orthogonal projector")));
    }
    let rank = linalg::trace(pi).re;
    if rank < 0.5 || rank > d as f64 - 0.5 {
        return Err(Error::InvalidProjectors(format!("{side} projector is trivial")));
    }
    Ok(())
}

/// Whether `ρ = p ρ⁰_{A0B0} + (1-p) ρ¹_{A1B1} + X + X†` for the split
/// `A = A0 ⊕ A1`, `B = B0 ⊕ B1` given by `Π_{A0}`, `Π_{B0}`.
pub fn verify_decomposition(rho: &Density, pa0: &CMatrix, pb0: &CMatrix, p: f64) -> Result<DecompositionCheck> {
    let (da, db) = (pa0.nrows(), pb0.nrows());
    check_projector(pa0, da, "A")?;
    check_projector(pb0, db, "B")?;
    check_dims(rho, da, db)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DomainError(format!("p = {p} outside (0,1)")));
    }
    let pa = [pa0.clone(), linalg::identity(da) - pa0];
    let pb = [pb0.clone(), linalg::identity(db) - pb0];
    let q0 = linalg::kron(&pa[0], &pb[0]);
    let q1 = linalg::kron(&pa[1], &pb[1]);
    let q = &q0 + &q1;
    let m = rho.matrix();
    let mut residual = linalg::frobenius(&(&q * m * &q - m));
    residual = residual.max((linalg::trace(&(&q0 * m)).re - p).abs());
    residual = residual.max((linalg::trace(&(&q1 * m)).re - (1.0 - p)).abs());
    let mut measured = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            measured[i][j] = linalg::trace(&(linalg::kron(&pa[i], &pb[j]) * m)).re;
            let target = match (i, j) {
                (0, 0) => p,
                (1, 1) => 1.0 - p,
                _ => 0.0,
            };
            residual = residual.max((measured[i][j] - target).abs());
        }
    }
    Ok(DecompositionCheck { holds: residual <= DECOMPOSITION_TOL, residual, measured })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceCheck {
    pub f: String,
    pub sqrt_eta: f64,
    pub mu_on_coupling: f64,
    pub pass: bool,
}

/// Second Hermitian Schmidt coefficient of `(J^{-1/2}_{f,σ} ⊗ J^{-1/2}_{f,E(σ)})(Ω)`
/// for the f-coupling `Ω`, with the `(σ^{1/2}, E(σ)^{1/2})` pair deflated.
pub fn mu_on_f_coupling(f: &MonotoneFn, e: &ChannelRep, sigma: &Density) -> Result<f64> {
    let coupling = f_coupling(f, e, sigma)?;
    let out = e.apply_state(sigma)?;
    let tilde = bilocal_j_inv_sqrt(f, &coupling, sigma, &out)?;
    let (c, _) = linalg::hermitian_coefficients(&tilde, e.dim_in(), e.dim_out())?;
    let a = nalgebra::DVector::from_vec(linalg::hermitian_coordinates(&sigma.sqrt()));
    let b = nalgebra::DVector::from_vec(linalg::hermitian_coordinates(&out.sqrt()));
    let pa = RMatrix::identity(a.len(), a.len()) - &a * a.transpose();
    let pb = RMatrix::identity(b.len(), b.len()) - &b * b.transpose();
    let deflated = pa * c * pb;
    Ok(linalg::real_svd(&deflated)?.singular_values.first().copied().unwrap_or(0.0))
}

/// Compares `√η_{χ²_f}(E, σ)` with the maximal correlation of the f-coupling.
/// For GM the coupling is the state `(id ⊗ E)(ψ^σ)` and `μ_GM` is computed on it.
pub fn correspondence_check(f: &MonotoneFn, e: &ChannelRep, sigma: &Density, tol: &Tolerances) -> Result<CorrespondenceCheck> {
    let eta = contraction_coefficient_with(f, e, sigma, tol)?.eta;
    let mu = if f.id() == MonotoneId::Gm {
        let state = Density::new(apply_on_second(e, &canonical_purification(sigma), e.dim_in())?)?;
        mu_f(f, &state, e.dim_in(), e.dim_out())?.mu
    } else {
        mu_on_f_coupling(f, e, sigma)?
    };
    let sqrt_eta = eta.sqrt();
    Ok(CorrespondenceCheck {
        f: f.name().to_string(),
        sqrt_eta,
        mu_on_coupling: mu,
        pass: (sqrt_eta - mu).abs() <= tol.correspondence_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, pauli_z};
    use crate::random;
    use crate::state::{classical_state, isotropic, max_entangled_unnormalized};

    fn bsc(p: f64) -> Vec<Vec<f64>> {
        vec![vec![(1.0 - p) / 2.0, p / 2.0], vec![p / 2.0, (1.0 - p) / 2.0]]
    }

    #[test]
    fn rho_tilde_examples() {
        let mut rng = random::rng(1);
        let (a, b) = (random::state(2, &mut rng), random::state(3, &mut rng));
        let t = rho_tilde_k(0.5, &a.tensor(&b), 2, 3).unwrap();
        assert!(frobenius(&(t - linalg::kron(&a.sqrt(), &b.sqrt()))) < 1e-12);
        let phi = Density::new(max_entangled_unnormalized(2).scale(0.5)).unwrap();
        for k in [0.0, 0.3, 1.0] {
            let t = rho_tilde_k(k, &phi, 2, 2).unwrap();
            assert!(frobenius(&(t - max_entangled_unnormalized(2))) < 1e-12);
        }
        let table = bsc(0.2);
        let t = rho_tilde_k(0.4, &classical_state(&table).unwrap(), 2, 2).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert!((t[(2 * x + y, 2 * x + y)].re - table[x][y] / 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mu_lin_examples() {
        let mut rng = random::rng(2);
        let prod = random::state(2, &mut rng).tensor(&random::state(2, &mut rng));
        assert!(mu_lin_k(0.3, &prod, 2, 2).unwrap().mu < 1e-10);
        for d in [2, 3] {
            for k in [0.0, 0.25, 0.5, 1.0] {
                let r = mu_lin_k(k, &isotropic(d, 0.6).unwrap(), d, d).unwrap();
                assert!((r.mu - 0.6).abs() < 1e-10);
            }
        }
        let r = mu_lin_k(0.5, &classical_state(&bsc(0.1)).unwrap(), 2, 2).unwrap();
        assert!((r.mu - 0.8).abs() < 1e-12);
    }

    #[test]
    fn mu_f_examples() {
        let mut rng = random::rng(3);
        let rho = random::state(4, &mut rng);
        let gm = mu_f(&MonotoneFn::gm(), &rho, 2, 2).unwrap();
        let lin = mu_lin_k(0.5, &rho, 2, 2).unwrap();
        assert!((gm.mu - lin.mu).abs() < 1e-9);
        let iso = isotropic(2, 0.3).unwrap();
        for f in MonotoneFn::means() {
            assert!((mu_f(&f, &iso, 2, 2).unwrap().mu - 0.3).abs() < 1e-10);
        }
        assert!(matches!(mu_f(&MonotoneFn::hm(), &rho, 2, 2), Err(Error::BandViolation(_))));
    }

    #[test]
    fn classical_examples() {
        assert!(classical_mu(&[vec![0.06, 0.14], vec![0.24, 0.56]]).unwrap() < 1e-7);
        assert!((classical_mu(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap() - 1.0).abs() < 1e-12);
        assert!((classical_mu(&bsc(0.1)).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(classical_mu(&[vec![0.5, 0.6]]), Err(Error::NotADistribution(_))));
        let table = random::table(3, 4, &mut random::rng(4));
        let state = classical_state(&table).unwrap();
        let want = classical_mu(&table).unwrap();
        for f in MonotoneFn::means() {
            assert!((mu_f(&f, &state, 3, 4).unwrap().mu - want).abs() < 1e-10);
        }
    }

    #[test]
    fn gm_spectrum_examples() {
        let mut rng = random::rng(5);
        let prod = random::state(2, &mut rng).tensor(&random::state(3, &mut rng));
        let s = gm_schmidt_spectrum(&prod, 2, 3).unwrap();
        assert_eq!(s.len(), 4);
        assert!((s[0] - 1.0).abs() < 1e-10 && s[1..].iter().all(|&x| x < 1e-10));
        let phi = Density::new(max_entangled_unnormalized(2).scale(0.5)).unwrap();
        assert!(gm_schmidt_spectrum(&phi, 2, 2).unwrap().iter().all(|x| (x - 1.0).abs() < 1e-10));
        let iso = gm_schmidt_spectrum(&isotropic(2, 0.4).unwrap(), 2, 2).unwrap();
        for (got, want) in iso.iter().zip([1.0, 0.4, 0.4, 0.4]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn tensorization_examples() {
        let tol = Tolerances::default();
        let iso = isotropic(2, 0.5).unwrap();
        let c = tensorization_check(0.5, &iso, (2, 2), &iso, (2, 2), &tol).unwrap();
        assert!(c.pass && (c.lhs - 0.5).abs() < 1e-9);
        let mut rng = random::rng(6);
        let prod = random::state(2, &mut rng).tensor(&random::state(2, &mut rng));
        let sigma = random::state(4, &mut rng);
        let c = tensorization_check(0.25, &prod, (2, 2), &sigma, (2, 2), &tol).unwrap();
        assert!(c.pass && (c.lhs - mu_lin_k(0.25, &sigma, 2, 2).unwrap().mu).abs() < 1e-9);
    }

    #[test]
    fn decomposition_examples() {
        let p0 = linalg::unit(2, 0, 0);
        let phi = Density::new(max_entangled_unnormalized(2).scale(0.5)).unwrap();
        assert!(verify_decomposition(&phi, &p0, &p0, 0.5).unwrap().holds);
        let za = linalg::kron(&pauli_z(), &linalg::identity(2));
        let mixed = phi.matrix().scale(0.3) + (&za * phi.matrix() * &za).scale(0.7);
        assert!(verify_decomposition(&Density::new(mixed).unwrap(), &p0, &p0, 0.5).unwrap().holds);
        let rho = random::state(4, &mut random::rng(7));
        assert!(!verify_decomposition(&rho, &p0, &p0, 0.5).unwrap().holds);
        assert!(matches!(
            verify_decomposition(&rho, &pauli_z(), &p0, 0.5),
            Err(Error::InvalidProjectors(_))
        ));
    }

    #[test]
    fn correspondence_examples() {
        let tol = Tolerances::default();
        let mut rng = random::rng(8);
        let sigma = random::state(2, &mut rng);
        let tau = random::state(2, &mut rng);
        for f in MonotoneFn::means() {
            let id = correspondence_check(&f, &ChannelRep::identity(2), &sigma, &tol).unwrap();
            assert!(id.pass && (id.mu_on_coupling - 1.0).abs() < 1e-6);
            let rep = correspondence_check(&f, &ChannelRep::replacer(2, &tau), &sigma, &tol).unwrap();
            assert!(rep.pass && rep.mu_on_coupling < 1e-6);
        }
        for _ in 0..5 {
            let e = random::channel(2, 3, 2, &mut rng);
            let sigma = random::state(2, &mut rng);
            for f in MonotoneFn::means() {
                let c = correspondence_check(&f, &e, &sigma, &tol).unwrap();
                assert!(c.pass, "{c:?}");
            }
            let gm_coupling = mu_on_f_coupling(&MonotoneFn::gm(), &e, &sigma).unwrap();
            let gm_state = correspondence_check(&MonotoneFn::gm(), &e, &sigma, &tol).unwrap();
            assert!((gm_coupling - gm_state.mu_on_coupling).abs() < 1e-8);
        }
    }
}
