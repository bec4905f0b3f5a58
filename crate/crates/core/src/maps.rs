//! Canonical purification, channel extraction, Petz recovery, the Heisenberg
//! and Schrödinger reversal maps, f-couplings and pinching.
//!
//! Transposes that the formulas take "in the eigenbasis of σ" are realized by
//! building Choi matrices as `Σ_ij |ν_i⟩⟨ν_j| ⊗ M(|ν_i⟩⟨ν_j|)` over the
//! eigenvectors `ν_i` of σ rather than over the computational basis.

use crate::channel::{ChannelRep, FnMap, LinearMap, LinearMapHandle};
use crate::error::{Error, Result};
use crate::jop::{Power, WeightedSpace};
use crate::linalg::{self, CMatrix, Keep};
use crate::monotone::MonotoneFn;
use crate::state::Density;

pub const EXTRACT_TOL: f64 = 1e-8;

/// `|ψ⟩⟨ψ|` with `|ψ⟩ = Σ_i √λ_i |ν_i⟩ ⊗ |ν_i⟩`; both marginals equal `ρ`.
pub fn canonical_purification(rho: &Density) -> CMatrix {
    let d = rho.dim();
    let u = rho.eigenvectors();
    let ev = rho.support_eigenvalues();
    let psi = nalgebra::DVector::<num_complex::Complex64>::from_fn(d * d, |idx, _| {
        let (a, b) = (idx / d, idx % d);
        (0..d).map(|i| u[(a, i)] * u[(b, i)] * ev[i].sqrt()).sum()
    });
    &psi * psi.adjoint()
}

/// `Σ_ij |ν_i⟩⟨ν_j| ⊗ M(|ν_i⟩⟨ν_j|)` for the orthonormal columns `ν_i` of `basis`.
pub fn choi_in_basis(map: &dyn LinearMap, basis: &CMatrix) -> CMatrix {
    let din = map.dim_in();
    let dout = map.dim_out();
    let mut out = CMatrix::zeros(din * dout, din * dout);
    for i in 0..din {
        for j in 0..din {
            let ketbra = basis.column(i) * basis.column(j).adjoint();
            out += linalg::kron(&ketbra, &map.apply(&ketbra));
        }
    }
    out
}

/// `(id ⊗ M)(X)` for `X` on `C^{d_first} ⊗ C^{d_in}`.
pub fn apply_on_second(map: &dyn LinearMap, x: &CMatrix, d_first: usize) -> Result<CMatrix> {
    let (din, dout) = (map.dim_in(), map.dim_out());
    linalg::ensure_dim(x, d_first * din, "bipartite input")?;
    let mut out = CMatrix::zeros(d_first * dout, d_first * dout);
    for i in 0..d_first {
        for j in 0..d_first {
            let block = x.view((i * din, j * din), (din, din)).into_owned();
            out.view_mut((i * dout, j * dout), (dout, dout)).copy_from(&map.apply(&block));
        }
    }
    Ok(out)
}

/// The unique channel `E` with `(id ⊗ E)(ψ^{ρ_A}) = ρ_AB`, for full-rank `ρ_A`.
pub fn extract_channel(rho_ab: &Density, da: usize, db: usize) -> Result<ChannelRep> {
    linalg::ensure_dim(rho_ab.matrix(), da * db, "joint state")?;
    let rho_a = rho_ab.marginal(Keep::A, (da, db))?;
    if !rho_a.is_full_rank() {
        return Err(Error::RankDeficient(format!(
            "marginal has rank {} < {da}; use extract_channel_on_support",
            rho_a.rank()
        )));
    }
    let inv_sqrt = linalg::kron(&rho_a.power(-0.5), &linalg::identity(db));
    let in_eigenbasis = &inv_sqrt * rho_ab.matrix() * &inv_sqrt;
    let u = rho_a.eigenvectors();
    let v = linalg::kron(&(u.map(|z| z.conj()) * u.adjoint()), &linalg::identity(db));
    let choi = &v * in_eigenbasis * v.adjoint();
    let channel = ChannelRep::from_choi(choi, da, db)?;
    let rebuilt = apply_on_second(&channel, &canonical_purification(&rho_a), da)?;
    let err = linalg::frobenius(&(rebuilt - rho_ab.matrix()));
    if err > EXTRACT_TOL {
        return Err(Error::NotCptp(format!("reconstruction error {err:.3e}")));
    }
    Ok(channel)
}

/// Restricts `A` to the support of `ρ_A` first. Returns the isometry
/// `V: C^r → C^{d_A}` onto the support and the channel on `C^r`.
pub fn extract_channel_on_support(rho_ab: &Density, da: usize, db: usize) -> Result<(CMatrix, ChannelRep)> {
    let rho_a = rho_ab.marginal(Keep::A, (da, db))?;
    let r = rho_a.rank();
    let iso = rho_a.eigenvectors().columns(0, r).into_owned();
    let w = linalg::kron(&iso, &linalg::identity(db));
    let restricted = Density::new(w.adjoint() * rho_ab.matrix() * &w)?;
    Ok((iso, extract_channel(&restricted, r, db)?))
}

fn output_state(e: &ChannelRep, sigma: &Density) -> Result<Density> {
    e.apply_state(sigma)
}

/// `P(X) = σ^{1/2} E*(E(σ)^{-1/2} X E(σ)^{-1/2}) σ^{1/2}`, pseudo-inverses on supports.
pub fn petz_recovery(e: &ChannelRep, sigma: &Density) -> Result<LinearMapHandle> {
    linalg::ensure_dim(sigma.matrix(), e.dim_in(), "sigma")?;
    let out = output_state(e, sigma)?;
    let s_half = sigma.sqrt();
    let o_inv_half = out.power(-0.5);
    let map = FnMap::new(e.dim_out(), e.dim_in(), |x: &CMatrix| {
        &s_half * e.adjoint_apply(&(&o_inv_half * x * &o_inv_half)) * &s_half
    });
    LinearMapHandle::from_map(&map)
}

/// Weighted spaces `J_{f,σ}` and `J^{-1}_{f,E(σ)}` bundled with the channel;
/// evaluates both reversal maps action-wise.
#[derive(Debug, Clone)]
pub struct Reversal<'a> {
    pub channel: &'a ChannelRep,
    pub j_in: WeightedSpace,
    pub j_in_inv: WeightedSpace,
    pub j_out_inv: WeightedSpace,
    pub output: Density,
}

impl<'a> Reversal<'a> {
    pub fn new(f: &MonotoneFn, e: &'a ChannelRep, sigma: &Density) -> Result<Self> {
        linalg::ensure_dim(sigma.matrix(), e.dim_in(), "sigma")?;
        let output = output_state(e, sigma)?;
        if !output.is_full_rank() && !f.flags().support_restricting {
            return Err(Error::RankDeficient(format!(
                "E(σ) has rank {} < {} and {} is not support-restricting",
                output.rank(),
                output.dim(),
                f.name()
            )));
        }
        Ok(Reversal {
            channel: e,
            j_in: WeightedSpace::new(f, sigma, Power::One),
            j_in_inv: WeightedSpace::new(f, sigma, Power::MinusOne),
            j_out_inv: WeightedSpace::new(f, &output, Power::MinusOne),
            output,
        })
    }

    /// `R(X) = J^{-1}_{f,E(σ)}(E(J_{f,σ}(X)))`.
    pub fn heisenberg(&self, x: &CMatrix) -> CMatrix {
        self.j_out_inv.apply_unchecked(&self.channel.apply(&self.j_in.apply_unchecked(x)))
    }

    /// `S(Y) = J_{f,σ}(E*(J^{-1}_{f,E(σ)}(Y)))`.
    pub fn schrodinger(&self, y: &CMatrix) -> CMatrix {
        self.j_in.apply_unchecked(&self.channel.adjoint_apply(&self.j_out_inv.apply_unchecked(y)))
    }
}

pub fn heisenberg_reversal(f: &MonotoneFn, e: &ChannelRep, sigma: &Density) -> Result<LinearMapHandle> {
    let r = Reversal::new(f, e, sigma)?;
    LinearMapHandle::from_map(&FnMap::new(e.dim_in(), e.dim_out(), |x: &CMatrix| r.heisenberg(x)))
}

pub fn schrodinger_reversal(f: &MonotoneFn, e: &ChannelRep, sigma: &Density) -> Result<LinearMapHandle> {
    let r = Reversal::new(f, e, sigma)?;
    LinearMapHandle::from_map(&FnMap::new(e.dim_out(), e.dim_in(), |y: &CMatrix| r.schrodinger(y)))
}

/// `Ω_{E ∘ J_{f,σ}}` in σ's eigenbasis: a Hermitian operator with marginals `σ` and `E(σ)`.
pub fn f_coupling(f: &MonotoneFn, e: &ChannelRep, sigma: &Density) -> Result<CMatrix> {
    linalg::ensure_dim(sigma.matrix(), e.dim_in(), "sigma")?;
    if !f.flags().symmetry_inducing {
        return Err(Error::DomainError(format!("{} is not symmetry-inducing", f.name())));
    }
    let j = WeightedSpace::new(f, sigma, Power::One);
    let composite = FnMap::new(e.dim_in(), e.dim_out(), |x: &CMatrix| e.apply(&j.apply_unchecked(x)));
    Ok(choi_in_basis(&composite, sigma.eigenvectors()))
}

/// Block-diagonal projection of `X` onto the eigenspaces of `σ`.
pub fn pinching(sigma: &Density, x: &CMatrix) -> Result<CMatrix> {
    linalg::ensure_dim(x, sigma.dim(), "pinching input")?;
    let ev = sigma.eigenvalues();
    let tol = linalg::RANK_REL_TOL * sigma.spectral().max_eigenvalue().max(f64::MIN_POSITIVE);
    let mut block = vec![0usize; ev.len()];
    for k in 1..ev.len() {
        block[k] = if (ev[k - 1] - ev[k]).abs() <= tol { block[k - 1] } else { block[k - 1] + 1 };
    }
    let u = sigma.eigenvectors();
    let mut y = u.adjoint() * x * u;
    for i in 0..ev.len() {
        for j in 0..ev.len() {
            if block[i] != block[j] {
                y[(i, j)] = linalg::c64(0.0, 0.0);
            }
        }
    }
    Ok(u * y * u.adjoint())
}
