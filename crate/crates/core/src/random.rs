//! Seeded random states, unitaries, channels and tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::ChannelRep;
use crate::linalg::{self, c64, CMatrix};
use crate::state::Density;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

pub fn hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
    linalg::hermitian_part(&ginibre(d, d, rng))
}

/// Induced-measure state `G G† / Tr[G G†]`, full rank almost surely.
pub fn state(d: usize, rng: &mut impl Rng) -> Density {
    state_of_rank(d, d, rng)
}

pub fn state_of_rank(d: usize, rank: usize, rng: &mut impl Rng) -> Density {
    let g = ginibre(d, rank, rng);
    Density::normalized(&g * g.adjoint()).expect("Ginibre state")
}

/// State whose smallest eigenvalue is at least `floor` (mixes in `𝟙/d`).
pub fn state_with_floor(d: usize, floor: f64, rng: &mut impl Rng) -> Density {
    let s = state(d, rng);
    let t = (floor * d as f64).min(1.0);
    Density::new(s.matrix().scale(1.0 - t) + linalg::identity(d).scale(t / d as f64)).expect("mixture")
}

/// Haar unitary via QR with the phase correction.
pub fn unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c64(1.0, 0.0) };
        let col = u.column(j) * phase;
        u.set_column(j, &col);
    }
    u
}

/// Random CPTP map from a Ginibre isometry `C^{d_in} → C^{d_out} ⊗ C^{rank}`;
/// needs `d_out · rank ≥ d_in`.
pub fn channel(din: usize, dout: usize, rank: usize, rng: &mut impl Rng) -> ChannelRep {
    let g = ginibre(dout * rank, din, rng);
    let gram = g.adjoint() * &g;
    let inv_sqrt = linalg::psd_power(&gram, -0.5).expect("Gram matrix");
    let v = g * inv_sqrt;
    let kraus = (0..rank).map(|k| v.rows(k * dout, dout).into_owned()).collect();
    ChannelRep::from_kraus(kraus).expect("isometry yields a channel")
}

/// Random joint distribution with strictly positive entries.
pub fn table(dx: usize, dy: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let raw: Vec<Vec<f64>> = (0..dx).map(|_| (0..dy).map(|_| rng.random::<f64>() + 1e-3).collect()).collect();
    let total: f64 = raw.iter().flatten().sum();
    raw.into_iter().map(|r| r.into_iter().map(|x| x / total).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinearMap;

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = state(3, &mut rng(5));
        let b = state(3, &mut rng(5));
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn unitary_is_unitary() {
        let u = unitary(4, &mut rng(1));
        assert!(linalg::frobenius(&(u.adjoint() * &u - linalg::identity(4))) < 1e-12);
    }

    #[test]
    fn channel_is_trace_preserving() {
        let e = channel(3, 2, 2, &mut rng(2));
        assert_eq!((e.dim_in(), e.dim_out()), (3, 2));
        let s = state(3, &mut rng(3));
        assert!((linalg::trace(&e.apply(s.matrix())).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn floor_is_respected() {
        let s = state_with_floor(4, 0.05, &mut rng(9));
        assert!(s.lambda_min() >= 0.05 - 1e-12);
    }
}
