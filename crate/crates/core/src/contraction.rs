//! χ²_f divergences, input-dependent contraction coefficients, DPI-saturation
//! certificates and mixing-time bounds.
//!
//! The coefficient `η_{χ²_f}(E, σ)` is the second eigenvalue of `S ∘ E`, where
//! `S` is the Schrödinger reversal map, written as a `d² × d²` real matrix in
//! a basis orthonormal for `⟨A, B⟩* = Tr[A† J^{-1}_{f,σ}(B)]`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRep, LinearMap};
use crate::divergences::{same_dim, supported_on, DivergenceValue};
use crate::error::{Error, Result};
use crate::jop::{Power, WeightedSpace};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::maps::Reversal;
use crate::monotone::MonotoneFn;
use crate::state::Density;
use crate::tolerances::Tolerances;

/// `χ²_f(ρ‖σ) = ⟨ρ − σ, J^{-1}_{f,σ}(ρ − σ)⟩`; infinite unless `ρ ≪ σ`.
pub fn chi2_f(f: &MonotoneFn, rho: &Density, sigma: &Density) -> Result<DivergenceValue> {
    same_dim(rho, sigma)?;
    if !supported_on(rho, sigma) {
        return Ok(DivergenceValue::infinite());
    }
    let diff = rho.matrix() - sigma.matrix();
    let j = WeightedSpace::new(f, sigma, Power::MinusOne);
    Ok(DivergenceValue::finite(j.inner_product(&diff, &diff)?.re))
}

/// Orthonormal basis of the Hermitian operators for `⟨·,·⟩*_{f,σ}`.
#[derive(Debug, Clone)]
pub struct Onb {
    space: WeightedSpace,
    in_eigenbasis: Vec<CMatrix>,
    elements: Vec<CMatrix>,
    condition: f64,
    gram_imag: f64,
}

impl Onb {
    /// Hermitian matrices, `σ^{1/2}` direction first.
    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// `max |Re G − 𝟙|` over the Gram matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `max |Im G|`; nonzero only when the weights are not symmetric.
    pub fn gram_imag(&self) -> f64 {
        self.gram_imag
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn inner_eig(&self, a: &CMatrix, b: &CMatrix) -> Complex64 {
        star_inner(self.space.weights(), a, b)
    }

    /// Real coordinates `⟨e_i, X⟩*` of a Hermitian `X`.
    pub fn coordinates(&self, x: &CMatrix) -> DVector<f64> {
        let xe = self.space.to_eigenbasis(x);
        DVector::from_iterator(self.len(), self.in_eigenbasis.iter().map(|e| self.inner_eig(e, &xe).re))
    }

    /// `Σ_i c_i e_i`.
    pub fn combine(&self, coords: &[f64]) -> CMatrix {
        let d = self.space.dim();
        coords.iter().zip(&self.elements).fold(CMatrix::zeros(d, d), |acc, (c, e)| acc + e.scale(*c))
    }
}

fn star_inner(weights: &RMatrix, a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).zip(weights.iter()).map(|((x, y), w)| x.conj() * y * *w).sum()
}

pub fn get_onb(f: &MonotoneFn, sigma: &Density) -> Result<Onb> {
    get_onb_with(f, sigma, &Tolerances::default())
}

/// Modified Gram-Schmidt, run twice, on `{σ^{1/2}} ∪ gell_mann(d)`.
pub fn get_onb_with(f: &MonotoneFn, sigma: &Density, tol: &Tolerances) -> Result<Onb> {
    if !sigma.is_full_rank() {
        return Err(Error::RankDeficient(format!("σ has rank {} < {}", sigma.rank(), sigma.dim())));
    }
    let space = WeightedSpace::new(f, sigma, Power::MinusOne);
    let w = space.weights().clone();
    let seeds = std::iter::once(sigma.sqrt()).chain(linalg::gell_mann(sigma.dim()));
    let mut basis: Vec<CMatrix> = Vec::with_capacity(sigma.dim() * sigma.dim());
    for (idx, seed) in seeds.enumerate() {
        let mut v = space.to_eigenbasis(&seed);
        let seed_norm = star_inner(&w, &v, &v).re.sqrt();
        for _ in 0..2 {
            for e in &basis {
                let c = star_inner(&w, e, &v).re;
                v -= e.scale(c);
            }
        }
        let n = star_inner(&w, &v, &v).re.max(0.0).sqrt();
        if n < tol.gs_floor * seed_norm {
            return Err(Error::LinearDependence(idx));
        }
        basis.push(linalg::hermitian_part(&v.unscale(n)));
    }
    let (condition, gram_imag): (f64, f64) = (0..basis.len())
        .into_par_iter()
        .map(|i| {
            (0..basis.len())
                .map(|j| {
                    let target = if i == j { 1.0 } else { 0.0 };
                    let g = star_inner(&w, &basis[i], &basis[j]);
                    ((g.re - target).abs(), g.im.abs())
                })
                .fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)))
        })
        .reduce(|| (0.0f64, 0.0f64), |a: (f64, f64), b| (a.0.max(b.0), a.1.max(b.1)));
    if condition > tol.gs_tol {
        return Err(Error::ConvergenceFailure("Gram-Schmidt lost orthonormality"));
    }
    let elements = basis.iter().map(|e| space.from_eigenbasis(e)).collect();
    Ok(Onb { space, in_eigenbasis: basis, elements, condition, gram_imag })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub f: String,
    pub eta: f64,
    pub lambda1: f64,
    pub spectrum: Vec<f64>,
    pub onb_condition: f64,
    pub imag_residual: f64,
    /// Norm of the projection of `σ` onto the leading eigenspace.
    pub sigma_overlap: f64,
}

/// The real standard matrix of `S ∘ E` together with its ONB.
#[derive(Debug, Clone)]
pub struct StandardMatrix {
    pub onb: Onb,
    pub matrix: RMatrix,
    /// Largest discarded imaginary or antisymmetric part.
    pub imag_residual: f64,
}

/// `T_ij = ⟨e_i, (S ∘ E)(e_j)⟩*`, columns evaluated in parallel.
pub fn standard_matrix(f: &MonotoneFn, e: &ChannelRep, sigma: &Density, tol: &Tolerances) -> Result<StandardMatrix> {
    linalg::ensure_dim(sigma.matrix(), e.dim_in(), "σ")?;
    let onb = get_onb_with(f, sigma, tol)?;
    let reversal = Reversal::new(f, e, sigma)?;
    let n = onb.len();
    let columns: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let image = onb.space.to_eigenbasis(&reversal.schrodinger(&e.apply(&onb.elements[j])));
            onb.in_eigenbasis.iter().map(|ei| onb.inner_eig(ei, &image)).collect()
        })
        .collect();
    let t = CMatrix::from_fn(n, n, |i, j| columns[j][i]);
    let imag = t.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let real = t.map(|z| z.re);
    let asym = (&real - real.transpose()).amax();
    let residual = imag.max(asym).max(onb.gram_imag());
    if residual > tol.imag_tol {
        return Err(Error::ImagResidualTooLarge(residual));
    }
    Ok(StandardMatrix { onb, matrix: (&real + real.transpose()) * 0.5, imag_residual: residual })
}

/// Report plus the eigenvectors of the symmetrized standard matrix.
#[derive(Debug, Clone)]
pub struct ContractionAnalysis {
    pub report: ContractionReport,
    pub standard: StandardMatrix,
    pub eigenvectors: RMatrix,
    /// Coordinates of `σ` in the ONB; a unit vector.
    pub sigma_coordinates: DVector<f64>,
}

pub fn analyze(f: &MonotoneFn, e: &ChannelRep, sigma: &Density, tol: &Tolerances) -> Result<ContractionAnalysis> {
    let standard = standard_matrix(f, e, sigma, tol)?;
    let (spectrum, vectors) = linalg::real_symmetric_eigen(&standard.matrix)?;
    let lambda1 = spectrum[0];
    if (lambda1 - 1.0).abs() > tol.lambda1_tol {
        return Err(Error::LeadingEigenvalue(lambda1));
    }
    let raw_eta = spectrum.get(1).copied().unwrap_or(0.0);
    if raw_eta < -tol.eta_range_tol || raw_eta > 1.0 + tol.eta_range_tol {
        return Err(Error::OutOfRange(raw_eta));
    }
    let coords = standard.onb.coordinates(sigma.matrix());
    let overlap = spectrum
        .iter()
        .enumerate()
        .filter(|(_, &v)| (v - lambda1).abs() <= tol.lambda1_tol)
        .map(|(k, _)| vectors.column(k).dot(&coords).powi(2))
        .sum::<f64>()
        .sqrt();
    let report = ContractionReport {
        f: f.name().to_string(),
        eta: raw_eta.clamp(0.0, 1.0),
        lambda1,
        spectrum,
        onb_condition: standard.onb.condition(),
        imag_residual: standard.imag_residual,
        sigma_overlap: overlap,
    };
    Ok(ContractionAnalysis { report, standard, eigenvectors: vectors, sigma_coordinates: coords })
}

pub fn contraction_coefficient(f: &MonotoneFn, e: &ChannelRep, sigma: &Density) -> Result<ContractionReport> {
    contraction_coefficient_with(f, e, sigma, &Tolerances::default())
}

pub fn contraction_coefficient_with(
    f: &MonotoneFn,
    e: &ChannelRep,
    sigma: &Density,
    tol: &Tolerances,
) -> Result<ContractionReport> {
    Ok(analyze(f, e, sigma, tol)?.report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    pub saturated: bool,
    /// `‖(S ∘ E)(ρ) − ρ‖_F`.
    pub residual: f64,
}

/// Whether `χ²_f(E(ρ)‖E(σ)) = χ²_f(ρ‖σ)`, certified by `(S ∘ E)(ρ) = ρ`.
pub fn dpi_saturated(f: &MonotoneFn, e: &ChannelRep, rho: &Density, sigma: &Density, tol: f64) -> Result<Saturation> {
    same_dim(rho, sigma)?;
    linalg::ensure_dim(sigma.matrix(), e.dim_in(), "σ")?;
    if !f.flags().symmetry_inducing {
        return Err(Error::DomainError(format!("{} is not symmetry-inducing", f.name())));
    }
    if !supported_on(rho, sigma) {
        return Err(Error::SupportViolation("ρ is not supported on σ".into()));
    }
    let reversal = Reversal::new(f, e, sigma)?;
    let back = reversal.schrodinger(&e.apply(rho.matrix()));
    let residual = linalg::frobenius(&(back - rho.matrix()));
    Ok(Saturation { saturated: residual <= tol, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TraceDistance,
    RelativeEntropy,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace_distance" | "td" => Ok(Metric::TraceDistance),
            "relative_entropy" | "re" => Ok(Metric::RelativeEntropy),
            _ => Err(Error::Parse(format!("unknown metric {s:?}"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::TraceDistance => "trace_distance",
            Metric::RelativeEntropy => "relative_entropy",
        })
    }
}

/// Smallest `n ≥ 1` after which the metric is below `δ` for every input;
/// `None` when `η` is within `eta_gap_tol` of 1.
pub fn mixing_steps(eta: f64, lambda_min: f64, delta: f64, metric: Metric, eta_gap_tol: f64) -> Option<u64> {
    if eta >= 1.0 - eta_gap_tol {
        return None;
    }
    if eta <= 0.0 {
        return Some(1);
    }
    let target = match metric {
        Metric::TraceDistance => 2.0 / (delta * delta * lambda_min),
        Metric::RelativeEntropy => 2.0 / (delta * lambda_min),
    };
    let n = (target.ln() / (1.0 / eta).ln()).ceil();
    Some(if n.is_finite() && n >= 1.0 { n as u64 } else { 1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingBound {
    pub f: String,
    pub metric: Metric,
    pub delta: f64,
    pub eta: f64,
    pub lambda_min: f64,
    /// `None` is the infinity marker.
    pub steps: Option<u64>,
    pub report: ContractionReport,
}

pub fn mixing_time_bound(
    f: &MonotoneFn,
    e: &ChannelRep,
    pi: &Density,
    delta: f64,
    metric: Metric,
    tol: &Tolerances,
) -> Result<MixingBound> {
    linalg::ensure_dim(pi.matrix(), e.dim_in(), "π")?;
    if e.dim_in() != e.dim_out() {
        return Err(Error::DimensionMismatch("mixing needs a channel from a space to itself".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::DomainError(format!("δ must be positive, got {delta}")));
    }
    let drift = linalg::frobenius(&(e.apply(pi.matrix()) - pi.matrix()));
    if drift > tol.fix_tol {
        return Err(Error::NotFixedPoint(drift));
    }
    if !pi.is_full_rank() {
        return Err(Error::RankDeficient(format!("π has rank {} < {}", pi.rank(), pi.dim())));
    }
    if metric == Metric::RelativeEntropy && !f.in_hm_lm_band() {
        return Err(Error::BandViolation(format!("{} is not between HM and LM", f.name())));
    }
    let report = contraction_coefficient_with(f, e, pi, tol)?;
    let lambda_min = pi.lambda_min();
    Ok(MixingBound {
        f: f.name().to_string(),
        metric,
        delta,
        eta: report.eta,
        lambda_min,
        steps: mixing_steps(report.eta, lambda_min, delta, metric, tol.eta_gap_tol),
        report,
    })
}

/// The fixed point of a channel, from the null space of `T − 𝟙` with `T` the
/// transfer matrix on row-major vectorized operators. Unique when the second
/// smallest singular value of `T − 𝟙` is at least `fixed_point_gap`.
pub fn fixed_point(e: &ChannelRep, tol: &Tolerances) -> Result<Density> {
    if e.dim_in() != e.dim_out() {
        return Err(Error::DimensionMismatch("fixed points need a channel from a space to itself".into()));
    }
    let d = e.dim_in();
    let n = d * d;
    let mut t = CMatrix::zeros(n, n);
    for k in 0..n {
        t.set_column(k, &linalg::vectorize(&e.apply(&linalg::unit(d, k / d, k % d))));
    }
    let svd = linalg::svd(&(t - linalg::identity(n)))?;
    let gap = if n >= 2 { svd.singular_values[n - 2] } else { f64::INFINITY };
    if gap < tol.fixed_point_gap {
        return Err(Error::NoUniqueFixedPoint(gap));
    }
    let v = svd.v_t.row(n - 1).adjoint();
    let x = linalg::unvectorize(&v, d, d);
    let tr = linalg::trace(&x);
    Density::new(linalg::hermitian_part(&x.map(|z| z / tr)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extreme {
    Zero,
    /// A traceless Hermitian `X`, unit in `⟨·,·⟩*`, with `(S ∘ E)(X) = X`.
    One { witness: CMatrix },
    Interior,
}

pub fn contraction_extreme_check(
    f: &MonotoneFn,
    e: &ChannelRep,
    sigma: &Density,
    tol: &Tolerances,
) -> Result<(Extreme, ContractionReport)> {
    let analysis = analyze(f, e, sigma, tol)?;
    let eta = analysis.report.eta;
    let class = if eta <= tol.eta_gap_tol {
        Extreme::Zero
    } else if eta >= 1.0 - tol.eta_gap_tol {
        let c = &analysis.sigma_coordinates;
        let best = (0..2)
            .map(|k| {
                let v = analysis.eigenvectors.column(k).into_owned();
                &v - c * c.dot(&v)
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("two candidates");
        let r = best.unscale(best.norm());
        Extreme::One { witness: analysis.standard.onb.combine(r.as_slice()) }
    } else {
        Extreme::Interior
    };
    Ok((class, analysis.report))
}
