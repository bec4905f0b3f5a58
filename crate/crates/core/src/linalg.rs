//! Dense complex linear algebra on `DMatrix<Complex64>`.
//!
//! Spectral decompositions are returned with eigenvalues sorted in descending
//! order; singular value decompositions likewise. Tolerances are scale relative:
//! a matrix is Hermitian when `max |M_ij - conj(M_ji)| <= 1e-9 ‖M‖_F`.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const HERM_REL_TOL: f64 = 1e-9;
pub const PSD_REL_TOL: f64 = 1e-9;
pub const RANK_REL_TOL: f64 = 1e-10;

/// Convergence thresholds tried in turn; every result is checked by reconstruction.
const SOLVER_EPS: [f64; 4] = [4.0 * f64::EPSILON, 16.0 * f64::EPSILON, 64.0 * f64::EPSILON, 1e-13];
const SOLVER_MAX_ITER: usize = 10_000;
const RECONSTRUCTION_REL_TOL: f64 = 1e-10;

fn reconstructs<T: nalgebra::ComplexField<RealField = f64>>(rebuilt: &DMatrix<T>, m: &DMatrix<T>) -> bool {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let err = (rebuilt - m).norm();
    err.is_finite() && err <= RECONSTRUCTION_REL_TOL * scale
}

fn hermitian_eigen<T: nalgebra::ComplexField<RealField = f64>>(m: DMatrix<T>, what: &'static str) -> Result<SymmetricEigen<T, nalgebra::Dyn>> {
    for eps in SOLVER_EPS {
        if let Some(eig) = SymmetricEigen::try_new(m.clone(), eps, SOLVER_MAX_ITER) {
            if reconstructs(&eig.recompose(), &m) {
                return Ok(eig);
            }
        }
    }
    Err(Error::ConvergenceFailure(what))
}

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// `|i⟩⟨j|` in dimension `d`.
pub fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = c64(1.0, 0.0);
    m
}

pub fn diag(values: &[f64]) -> CMatrix {
    let d = values.len();
    let mut m = CMatrix::zeros(d, d);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = c64(*v, 0.0);
    }
    m
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|x| c64(*x, 0.0)))
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| c64(x, 0.0))
}

pub fn pauli_x() -> CMatrix {
    from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

pub fn ensure_dim(m: &CMatrix, d: usize, what: &str) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{what}: expected {d}x{d}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Hilbert-Schmidt inner product `Tr[X† Y]`.
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

pub fn is_hermitian(m: &CMatrix) -> bool {
    m.nrows() == m.ncols() && hermitian_residual(m) <= HERM_REL_TOL * frobenius(m)
}

pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    ensure_square(m)?;
    let r = hermitian_residual(m);
    if r > HERM_REL_TOL * frobenius(m) {
        return Err(Error::NotHermitian(r));
    }
    Ok(())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V g(Λ) V†`.
    pub fn map_eigenvalues(&self, g: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, lam) in self.eigenvalues.iter().enumerate() {
            let s = g(*lam);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_eigenvalues(|x| x)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn spectral_decompose(h: &CMatrix) -> Result<SpectralDecomposition> {
    check_hermitian(h)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(SpectralDecomposition { eigenvalues: vec![], eigenvectors: CMatrix::zeros(0, 0) });
    }
    let eig = hermitian_eigen(hermitian_part(h), "hermitian eigensolver")?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src).into_owned();
        let g = phase_gauge(col.as_slice());
        vectors.set_column(dst, &(col * g));
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: vectors })
}

/// Unit phase making the first component of modulus at least `1/(2√n)` real
/// and positive; fixes the eigenvector phase freedom deterministically.
fn phase_gauge(v: &[Complex64]) -> Complex64 {
    let threshold = 0.5 / (v.len() as f64).sqrt();
    match v.iter().find(|z| z.norm() >= threshold) {
        Some(z) => z.conj() / z.norm(),
        None => c64(1.0, 0.0),
    }
}

/// Real symmetric eigendecomposition, eigenvalues descending.
pub fn real_symmetric_eigen(m: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = hermitian_eigen(sym, "real symmetric eigensolver")?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = RMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

#[derive(Debug, Clone)]
pub struct Svd<T: nalgebra::Scalar> {
    pub u: DMatrix<T>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<T>,
}

fn sorted_svd<T>(m: DMatrix<T>) -> Result<Svd<T>>
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(Svd { u: DMatrix::zeros(r, 0), singular_values: vec![], v_t: DMatrix::zeros(0, c) });
    }
    let svd = SOLVER_EPS
        .iter()
        .filter_map(|&eps| SVD::try_new(m.clone(), true, true, eps, SOLVER_MAX_ITER))
        .find(|svd| svd.clone().recompose().map(|r| reconstructs(&r, &m)).unwrap_or(false))
        .ok_or(Error::ConvergenceFailure("svd"))?;
    let u = svd.u.ok_or(Error::ConvergenceFailure("svd left vectors"))?;
    let v_t = svd.v_t.ok_or(Error::ConvergenceFailure("svd right vectors"))?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut us = DMatrix::zeros(r, k);
    let mut vs = DMatrix::zeros(k, c);
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_row(dst, &v_t.row(src));
    }
    Ok(Svd { u: us, singular_values: order.iter().map(|&s| svd.singular_values[s]).collect(), v_t: vs })
}

pub fn svd(m: &CMatrix) -> Result<Svd<Complex64>> {
    sorted_svd(m.clone())
}

pub fn real_svd(m: &RMatrix) -> Result<Svd<f64>> {
    sorted_svd(m.clone())
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(svd(m)?.singular_values)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Functional calculus `g(H)` of a Hermitian matrix.
pub fn hermitian_function(h: &CMatrix, g: impl Fn(f64) -> f64) -> Result<CMatrix> {
    Ok(spectral_decompose(h)?.map_eigenvalues(g))
}

/// `M^p` of a positive semidefinite matrix; eigenvalues at or below
/// `1e-10 λ_max` are treated as zero, and zero maps to zero for every `p`.
pub fn psd_power(m: &CMatrix, p: f64) -> Result<CMatrix> {
    let sd = spectral_decompose(m)?;
    let cut = RANK_REL_TOL * sd.max_eigenvalue().max(0.0);
    Ok(sd.map_eigenvalues(|x| if x > cut { x.powf(p) } else { 0.0 }))
}

/// Which tensor factor to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace(m: &CMatrix, keep: Keep, dims: (usize, usize)) -> Result<CMatrix> {
    let (da, db) = dims;
    ensure_dim(m, da * db, "partial trace input")?;
    match keep {
        Keep::A => Ok(CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum())),
        Keep::B => Ok(CMatrix::from_fn(db, db, |k, l| (0..da).map(|i| m[(i * db + k, i * db + l)]).sum())),
    }
}

/// Reorders tensor factors. `perm[new_position] = old_position`.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let n: usize = dims.iter().product();
    ensure_dim(m, n, "permute input")?;
    if perm.len() != dims.len() {
        return Err(Error::DimensionMismatch("permutation length".into()));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let map_index = |new_idx: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut rem = new_idx;
        for pos in (0..new_dims.len()).rev() {
            digits[perm[pos]] = rem % new_dims[pos];
            rem /= new_dims[pos];
        }
        digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
    };
    let idx: Vec<usize> = (0..n).map(map_index).collect();
    Ok(CMatrix::from_fn(n, n, |i, j| m[(idx[i], idx[j])]))
}

/// Realignment `R[(i,j),(k,l)] = M[(i,k),(j,l)]`, a `d_A² × d_B²` matrix whose
/// singular values are the operator-Schmidt coefficients of `M`.
pub fn realign(m: &CMatrix, da: usize, db: usize) -> Result<CMatrix> {
    ensure_dim(m, da * db, "realign input")?;
    Ok(CMatrix::from_fn(da * da, db * db, |r, c| {
        let (i, j) = (r / da, r % da);
        let (k, l) = (c / db, c % db);
        m[(i * db + k, j * db + l)]
    }))
}

/// Traceless generalized Gell-Mann matrices, Hilbert-Schmidt normalized,
/// ordered symmetric, antisymmetric, diagonal.
pub fn gell_mann(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for n in 0..d {
        for m in (n + 1)..d {
            let mut s = CMatrix::zeros(d, d);
            s[(n, m)] = c64(r, 0.0);
            s[(m, n)] = c64(r, 0.0);
            out.push(s);
        }
    }
    for n in 0..d {
        for m in (n + 1)..d {
            let mut a = CMatrix::zeros(d, d);
            a[(n, m)] = c64(0.0, r);
            a[(m, n)] = c64(0.0, -r);
            out.push(a);
        }
    }
    for n in 1..d {
        let nf = n as f64;
        let norm = 1.0 / (nf * (nf + 1.0)).sqrt();
        let mut g = CMatrix::zeros(d, d);
        for k in 0..n {
            g[(k, k)] = c64(norm, 0.0);
        }
        g[(n, n)] = c64(-nf * norm, 0.0);
        out.push(g);
    }
    out
}

/// Orthonormal Hermitian basis `{𝟙/√d} ∪ gell_mann(d)`.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = vec![identity(d).scale(1.0 / (d as f64).sqrt())];
    out.extend(gell_mann(d));
    out
}

/// Rows are `vec(Bᵀ)` for each basis element, so that
/// `Tr[(B_a ⊗ B_b) M] = (P_A · realign(M) · P_Bᵀ)_{ab}`.
fn basis_projector(basis: &[CMatrix], d: usize) -> CMatrix {
    CMatrix::from_fn(basis.len(), d * d, |a, idx| basis[a][(idx % d, idx / d)])
}

/// Real coefficient matrix `C_ab = Tr[(B_a ⊗ B_b) M]` of a bipartite operator
/// in the product Hermitian basis. Imaginary parts vanish when `M` is Hermitian;
/// the largest one discarded is returned alongside.
pub fn hermitian_coefficients(m: &CMatrix, da: usize, db: usize) -> Result<(RMatrix, f64)> {
    let r = realign(m, da, db)?;
    let pa = basis_projector(&hermitian_basis(da), da);
    let pb = basis_projector(&hermitian_basis(db), db);
    let c = pa * r * pb.transpose();
    let imag = c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok((c.map(|z| z.re), imag))
}

/// Coordinates of a Hermitian matrix in `hermitian_basis(d)`.
pub fn hermitian_coordinates(x: &CMatrix) -> Vec<f64> {
    hermitian_basis(x.nrows()).iter().map(|b| hs_inner(b, x).re).collect()
}

/// Operator-Schmidt coefficients over the complex operator spaces.
pub fn operator_schmidt(m: &CMatrix, da: usize, db: usize) -> Result<Vec<f64>> {
    singular_values(&realign(m, da, db)?)
}

/// Operator-Schmidt coefficients over the real Hermitian operator spaces.
pub fn hermitian_operator_schmidt(m: &CMatrix, da: usize, db: usize) -> Result<Vec<f64>> {
    let (c, _) = hermitian_coefficients(m, da, db)?;
    Ok(real_svd(&c)?.singular_values)
}

/// Row-major vectorization `vec(X)[i d + j] = X_ij`.
pub fn vectorize(x: &CMatrix) -> nalgebra::DVector<Complex64> {
    let (r, c) = x.shape();
    nalgebra::DVector::from_fn(r * c, |k, _| x[(k / c, k % c)])
}

pub fn unvectorize(v: &nalgebra::DVector<Complex64>, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}
