//! Linear maps between matrix spaces and quantum channels.
//!
//! Choi convention: `Ω_E = Σ_{ij} |i⟩⟨j| ⊗ E(|i⟩⟨j|)` with the input factor first,
//! so that `E(X) = Tr_A[(Xᵀ ⊗ 𝟙) Ω_E]`.

use crate::error::{Error, Result};
use crate::linalg::{self, c64, frobenius, CMatrix, Keep, PSD_REL_TOL};
use crate::state::Density;

pub const KRAUS_TRUNC_REL: f64 = 1e-10;
pub const TP_TOL: f64 = 1e-8;
const PAIR_TRUNC_REL: f64 = 1e-13;

/// A linear map `L(C^{d_in}) → L(C^{d_out})`.
pub trait LinearMap: Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply(&self, x: &CMatrix) -> CMatrix;

    fn apply_checked(&self, x: &CMatrix) -> Result<CMatrix> {
        linalg::ensure_dim(x, self.dim_in(), "map input")?;
        Ok(self.apply(x))
    }
}

/// Wraps a closure as a [`LinearMap`].
pub struct FnMap<F: Fn(&CMatrix) -> CMatrix + Sync> {
    pub dim_in: usize,
    pub dim_out: usize,
    pub f: F,
}

impl<F: Fn(&CMatrix) -> CMatrix + Sync> FnMap<F> {
    pub fn new(dim_in: usize, dim_out: usize, f: F) -> Self {
        FnMap { dim_in, dim_out, f }
    }
}

impl<F: Fn(&CMatrix) -> CMatrix + Sync> LinearMap for FnMap<F> {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.dim_out
    }
    fn apply(&self, x: &CMatrix) -> CMatrix {
        (self.f)(x)
    }
}

pub fn choi_of(map: &dyn LinearMap) -> CMatrix {
    let (din, dout) = (map.dim_in(), map.dim_out());
    let mut choi = CMatrix::zeros(din * dout, din * dout);
    for i in 0..din {
        for j in 0..din {
            let block = map.apply(&linalg::unit(din, i, j));
            choi.view_mut((i * dout, j * dout), (dout, dout)).copy_from(&block);
        }
    }
    choi
}

/// Choi matrix of `maps[n-1] ∘ … ∘ maps[0]`; the first map is applied first.
pub fn choi_of_composition(maps: &[&dyn LinearMap]) -> Result<CMatrix> {
    let first = maps.first().ok_or_else(|| Error::DimensionMismatch("empty composition".into()))?;
    for w in maps.windows(2) {
        if w[0].dim_out() != w[1].dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "composition chain: output {} feeds input {}",
                w[0].dim_out(),
                w[1].dim_in()
            )));
        }
    }
    let din = first.dim_in();
    let dout = maps.last().map(|m| m.dim_out()).unwrap_or(din);
    let composite = FnMap::new(din, dout, |x: &CMatrix| maps.iter().fold(x.clone(), |acc, m| m.apply(&acc)));
    Ok(choi_of(&composite))
}

/// `E(X) = Σ_ij X_ij Ω[(i,·),(j,·)]`, the Choi contraction.
pub fn apply_choi(choi: &CMatrix, din: usize, dout: usize, x: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(dout, dout);
    for i in 0..din {
        for j in 0..din {
            let xij = x[(i, j)];
            if xij.norm_sqr() == 0.0 {
                continue;
            }
            out += choi.view((i * dout, j * dout), (dout, dout)) * xij;
        }
    }
    out
}

/// Kraus operators from an eigendecomposition of a PSD Choi matrix, reshaped
/// to `d_out × d_in`. Eigenvalues at or below `1e-10 λ_max` are dropped.
pub fn kraus_from_choi(choi: &CMatrix, din: usize, dout: usize) -> Result<Vec<CMatrix>> {
    linalg::ensure_dim(choi, din * dout, "choi")?;
    let sd = linalg::spectral_decompose(choi)?;
    let min = sd.min_eigenvalue();
    if min < -PSD_REL_TOL * frobenius(choi) {
        return Err(Error::NotPsd(min));
    }
    let cut = KRAUS_TRUNC_REL * sd.max_eigenvalue().max(0.0);
    let mut kraus = Vec::new();
    for (k, &lam) in sd.eigenvalues.iter().enumerate() {
        if lam <= cut {
            continue;
        }
        let v = sd.eigenvectors.column(k);
        let s = lam.sqrt();
        kraus.push(CMatrix::from_fn(dout, din, |a, i| v[i * dout + a] * s));
    }
    Ok(kraus)
}

pub fn choi_from_kraus(kraus: &[CMatrix]) -> Result<CMatrix> {
    let first = kraus.first().ok_or_else(|| Error::DimensionMismatch("empty Kraus list".into()))?;
    let (dout, din) = first.shape();
    let mut choi = CMatrix::zeros(din * dout, din * dout);
    for k in kraus {
        if k.shape() != (dout, din) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        let v = nalgebra::DVector::from_fn(din * dout, |idx, _| k[(idx % dout, idx / dout)]);
        choi += &v * v.adjoint();
    }
    Ok(choi)
}

/// Completely positive trace-preserving map: Choi matrix plus Kraus list.
#[derive(Debug, Clone)]
pub struct ChannelRep {
    dim_in: usize,
    dim_out: usize,
    choi: CMatrix,
    kraus: Vec<CMatrix>,
}

impl ChannelRep {
    pub fn from_choi(choi: CMatrix, din: usize, dout: usize) -> Result<Self> {
        linalg::ensure_dim(&choi, din * dout, "choi")?;
        linalg::check_hermitian(&choi)?;
        let choi = linalg::hermitian_part(&choi);
        let kraus = kraus_from_choi(&choi, din, dout)?;
        let ch = ChannelRep { dim_in: din, dim_out: dout, choi, kraus };
        ch.check_trace_preserving()?;
        Ok(ch)
    }

    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let choi = choi_from_kraus(&kraus)?;
        let (dout, din) = kraus[0].shape();
        let ch = ChannelRep { dim_in: din, dim_out: dout, choi, kraus };
        ch.check_trace_preserving()?;
        Ok(ch)
    }

    fn check_trace_preserving(&self) -> Result<()> {
        let tb = linalg::partial_trace(&self.choi, Keep::A, (self.dim_in, self.dim_out))?;
        let dev = linalg::max_abs(&(tb - linalg::identity(self.dim_in)));
        if dev > TP_TOL {
            return Err(Error::NotCptp(format!("partial trace deviates from identity by {dev:.3e}")));
        }
        Ok(())
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn apply_via_choi(&self, x: &CMatrix) -> CMatrix {
        apply_choi(&self.choi, self.dim_in, self.dim_out, x)
    }

    /// Heisenberg-picture adjoint `E*(Y) = Σ K† Y K`.
    pub fn adjoint_apply(&self, y: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        out
    }

    pub fn apply_state(&self, rho: &Density) -> Result<Density> {
        Density::new(self.apply_checked(rho.matrix())?)
    }

    pub fn identity(d: usize) -> Self {
        ChannelRep::from_kraus(vec![linalg::identity(d)]).expect("identity channel")
    }

    pub fn unitary(u: &CMatrix) -> Result<Self> {
        ChannelRep::from_kraus(vec![u.clone()])
    }

    /// `X ↦ λ X + (1-λ) Tr[X] 𝟙/d`, valid for `-1/(d²-1) ≤ λ ≤ 1`.
    pub fn depolarizing(d: usize, lambda: f64) -> Result<Self> {
        let phi = crate::state::max_entangled_unnormalized(d);
        let choi = phi.scale(lambda) + linalg::identity(d * d).scale((1.0 - lambda) / d as f64);
        ChannelRep::from_choi(choi, d, d)
    }

    /// `X ↦ Tr[X] τ`.
    pub fn replacer(din: usize, tau: &Density) -> Self {
        ChannelRep::from_choi(linalg::kron(&linalg::identity(din), tau.matrix()), din, tau.dim())
            .expect("replacer channel")
    }

    /// Keeps diagonal entries and scales off-diagonal ones by `1 - p`.
    pub fn dephasing(d: usize, p: f64) -> Result<Self> {
        let mut choi = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let w = if i == j { 1.0 } else { 1.0 - p };
                choi[(i * d + i, j * d + j)] = c64(w, 0.0);
            }
        }
        ChannelRep::from_choi(choi, d, d)
    }

    /// `self ⊗ other` on `A ⊗ A'`.
    pub fn tensor(&self, other: &ChannelRep) -> ChannelRep {
        let kraus = self.kraus.iter().flat_map(|a| other.kraus.iter().map(move |b| linalg::kron(a, b))).collect();
        ChannelRep::from_kraus(kraus).expect("product of channels is a channel")
    }

    /// `E ∘ self`.
    pub fn then(&self, next: &ChannelRep) -> Result<ChannelRep> {
        let choi = choi_of_composition(&[self, next])?;
        ChannelRep::from_choi(choi, self.dim_in, next.dim_out)
    }
}

impl LinearMap for ChannelRep {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.dim_out
    }
    fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }
}

/// A general linear map stored as its Choi matrix and a two-sided Kraus form
/// `X ↦ Σ_k A_k X B_k†`.
#[derive(Debug, Clone)]
pub struct LinearMapHandle {
    dim_in: usize,
    dim_out: usize,
    choi: CMatrix,
    pairs: Vec<(CMatrix, CMatrix)>,
    hermitian_preserving: bool,
}

impl LinearMapHandle {
    pub fn from_choi(choi: CMatrix, din: usize, dout: usize) -> Result<Self> {
        linalg::ensure_dim(&choi, din * dout, "choi")?;
        let svd = linalg::svd(&choi)?;
        let cut = PAIR_TRUNC_REL * svd.singular_values.first().copied().unwrap_or(0.0);
        let mut pairs = Vec::new();
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s <= cut {
                continue;
            }
            let r = s.sqrt();
            let a = svd.u.column(k);
            let b = svd.v_t.row(k);
            let left = CMatrix::from_fn(dout, din, |o, i| a[i * dout + o] * r);
            let right = CMatrix::from_fn(dout, din, |o, i| b[i * dout + o].conj() * r);
            pairs.push((left, right));
        }
        let hermitian_preserving = linalg::is_hermitian(&choi);
        Ok(LinearMapHandle { dim_in: din, dim_out: dout, choi, pairs, hermitian_preserving })
    }

    pub fn from_map(map: &dyn LinearMap) -> Result<Self> {
        LinearMapHandle::from_choi(choi_of(map), map.dim_in(), map.dim_out())
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    pub fn pairs(&self) -> &[(CMatrix, CMatrix)] {
        &self.pairs
    }

    pub fn hermitian_preserving(&self) -> bool {
        self.hermitian_preserving
    }

    /// Hilbert-Schmidt adjoint `Y ↦ Σ A_k† Y B_k`.
    pub fn adjoint_apply(&self, y: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for (a, b) in &self.pairs {
            out += a.adjoint() * y * b;
        }
        out
    }
}

impl LinearMap for LinearMapHandle {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.dim_out
    }
    fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for (a, b) in &self.pairs {
            out += a * x * b.adjoint();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, frobenius, identity};

    #[test]
    fn identity_and_replacer_actions() {
        let x = linalg::from_real(2, 2, &[0.3, 0.1, -0.4, 0.7]);
        assert!(frobenius(&(ChannelRep::identity(2).apply(&x) - &x)) < 1e-15);
        let tau = Density::from_diagonal(&[0.2, 0.8]).unwrap();
        let rho = Density::from_diagonal(&[0.6, 0.4]).unwrap();
        let r = ChannelRep::replacer(2, &tau);
        assert!(frobenius(&(r.apply(rho.matrix()) - tau.matrix())) < 1e-14);
    }

    #[test]
    fn depolarizing_example() {
        let e = ChannelRep::depolarizing(2, 0.5).unwrap();
        let out = e.apply(&linalg::unit(2, 0, 0));
        assert!(frobenius(&(out - diag(&[0.75, 0.25]))) < 1e-14);
    }

    #[test]
    fn identity_choi_has_single_kraus() {
        let k = kraus_from_choi(&crate::state::max_entangled_unnormalized(2), 2, 2).unwrap();
        assert_eq!(k.len(), 1);
        let phase = k[0][(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(frobenius(&(&k[0] - identity(2) * phase)) < 1e-12);
    }

    #[test]
    fn replacer_to_maximally_mixed_has_four_kraus() {
        let choi = linalg::kron(&identity(2), &identity(2).scale(0.5));
        let k = kraus_from_choi(&choi, 2, 2).unwrap();
        assert_eq!(k.len(), 4);
        for op in &k {
            assert!((frobenius(op) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
        assert!(frobenius(&(choi_from_kraus(&k).unwrap() - choi)) < 1e-12);
    }

    #[test]
    fn non_psd_choi_rejected() {
        let choi = diag(&[1.0, -0.5, 0.2, 0.3]);
        assert!(matches!(kraus_from_choi(&choi, 2, 2), Err(Error::NotPsd(_))));
    }

    #[test]
    fn composition_with_replacer_absorbs() {
        let tau = Density::from_diagonal(&[0.3, 0.7]).unwrap();
        let r = ChannelRep::replacer(2, &tau);
        let e = ChannelRep::depolarizing(2, 0.3).unwrap();
        let c = choi_of_composition(&[&e, &r]).unwrap();
        assert!(frobenius(&(c - r.choi())) < 1e-14);
        let id = ChannelRep::identity(2);
        let c = choi_of_composition(&[&id, &id]).unwrap();
        assert!(frobenius(&(c - id.choi())) < 1e-14);
        let bad = ChannelRep::identity(3);
        assert!(choi_of_composition(&[&id, &bad]).is_err());
    }

    #[test]
    fn two_sided_kraus_reproduces_map() {
        let f = FnMap::new(2, 2, |x: &CMatrix| {
            let t = linalg::from_real(2, 2, &[1.0, 2.0, 0.0, -1.0]);
            &t * x + x.transpose()
        });
        let h = LinearMapHandle::from_map(&f).unwrap();
        let x = linalg::from_real(2, 2, &[0.3, 0.1, -0.4, 0.7]);
        assert!(frobenius(&(h.apply(&x) - f.apply(&x))) < 1e-12);
        let y = linalg::from_real(2, 2, &[1.0, -2.0, 0.5, 0.25]);
        let lhs = linalg::hs_inner(&y, &h.apply(&x));
        let rhs = linalg::hs_inner(&h.adjoint_apply(&y), &x);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
