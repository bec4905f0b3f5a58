//! Seeded randomized invariant suites behind `qcontract verify`.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::channel::ChannelRep;
use crate::contraction::{chi2_f, dpi_saturated};
use crate::correlation::{classical_mu, correspondence_check, gm_schmidt_spectrum, mu_f, tensorization_check};
use crate::divergences::sandwiched_renyi;
use crate::error::{Error, Result};
use crate::jop::{variance, Power, WeightedSpace};
use crate::maps::apply_on_second;
use crate::monotone::MonotoneFn;
use crate::random::{self, TestRng};
use crate::state::{classical_state, Density};
use crate::tolerances::Tolerances;

pub const SUITES: [&str; 7] = ["dpi", "ordering", "identity", "correspondence", "tensorization", "classical", "saturation"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub checks: usize,
    pub failures: usize,
    pub pass: bool,
    pub first_counterexample: Option<Value>,
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: usize,
    first: Option<Value>,
}

impl Tally {
    fn check(&mut self, ok: bool, detail: impl FnOnce() -> Value) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(detail());
            }
        }
    }

    fn trial(&mut self, trial: usize, body: impl FnOnce(&mut Tally) -> Result<()>) {
        if let Err(e) = body(self) {
            self.check(false, || json!({"trial": trial, "error": e.to_string()}));
        }
    }
}

/// `a ≤ b` up to `slack` scaled by `max(1, |b|)`.
fn leq(a: f64, b: f64, slack: f64) -> bool {
    a <= b + slack * b.abs().max(1.0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn dim(rng: &mut TestRng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

fn channel(din: usize, dout: usize, rng: &mut TestRng) -> ChannelRep {
    let rank = dim(rng, 2, 3);
    random::channel(din, dout, rank, rng)
}

/// Runs one suite, or every suite for `"all"`.
pub fn run(name: &str, seed: u64, trials: usize, tol: &Tolerances) -> Result<Vec<SuiteReport>> {
    if name == "all" {
        return SUITES.iter().map(|s| run_one(s, seed, trials, tol)).collect();
    }
    Ok(vec![run_one(name, seed, trials, tol)?])
}

fn run_one(name: &str, seed: u64, trials: usize, tol: &Tolerances) -> Result<SuiteReport> {
    let body: fn(&mut Tally, usize, &mut TestRng, &Tolerances) -> Result<()> = match name {
        "dpi" => dpi_trial,
        "ordering" => ordering_trial,
        "identity" => identity_trial,
        "correspondence" => correspondence_trial,
        "tensorization" => tensorization_trial,
        "classical" => classical_trial,
        "saturation" => saturation_trial,
        _ => return Err(Error::Parse(format!("unknown suite {name:?}; expected one of {SUITES:?} or \"all\""))),
    };
    let mut rng = random::rng(seed);
    let mut tally = Tally::default();
    for t in 0..trials {
        tally.trial(t, |tally| body(tally, t, &mut rng, tol));
    }
    Ok(SuiteReport {
        suite: name.to_string(),
        seed,
        trials,
        checks: tally.checks,
        failures: tally.failures,
        pass: tally.failures == 0,
        first_counterexample: tally.first,
    })
}

fn dpi_trial(tally: &mut Tally, t: usize, rng: &mut TestRng, _: &Tolerances) -> Result<()> {
    let (din, dout) = (dim(rng, 2, 3), dim(rng, 2, 3));
    let e = channel(din, dout, rng);
    let (rho, sigma) = (random::state(din, rng), random::state(din, rng));
    let (erho, esigma) = (e.apply_state(&rho)?, e.apply_state(&sigma)?);
    let x = random::hermitian(dout, rng);
    for f in MonotoneFn::means() {
        let before = chi2_f(&f, &rho, &sigma)?.value;
        let after = chi2_f(&f, &erho, &esigma)?.value;
        tally.check(after <= before * (1.0 + 1e-8), || json!({"trial": t, "check": "chi2 dpi", "f": f.name(), "before": before, "after": after}));
        let v_in = variance(&f, &sigma, &e.adjoint_apply(&x))?;
        let v_out = variance(&f, &esigma, &x)?;
        tally.check(v_in <= v_out + 1e-9, || json!({"trial": t, "check": "variance dpi", "f": f.name(), "lhs": v_in, "rhs": v_out}));
    }

    let (da, db) = (2, dim(rng, 2, 3));
    let joint = random::state(da * db, rng);
    let local = channel(da, da, rng).tensor(&channel(db, db, rng));
    let after = local.apply_state(&joint)?;
    for f in [MonotoneFn::am(), MonotoneFn::lm(), MonotoneFn::gm()] {
        let (m0, m1) = (mu_f(&f, &joint, da, db)?.mu, mu_f(&f, &after, da, db)?.mu);
        tally.check(m1 <= m0 + 1e-8, || json!({"trial": t, "check": "mu local dpi", "f": f.name(), "before": m0, "after": m1}));
    }

    let db2 = dim(rng, 2, 3);
    let one_sided = Density::new(apply_on_second(&channel(db, db2, rng), joint.matrix(), da)?)?;
    let s0 = gm_schmidt_spectrum(&joint, da, db)?;
    let s1 = gm_schmidt_spectrum(&one_sided, da, db2)?;
    let n = s0.len().max(s1.len());
    let ok = (0..n).all(|i| s1.get(i).copied().unwrap_or(0.0) <= s0.get(i).copied().unwrap_or(0.0) + 1e-8);
    tally.check(ok, || json!({"trial": t, "check": "gm spectrum majorization", "before": s0, "after": s1}));
    Ok(())
}

fn ordering_trial(tally: &mut Tally, t: usize, rng: &mut TestRng, _: &Tolerances) -> Result<()> {
    let d = dim(rng, 2, 4);
    let (rho, sigma) = (random::state(d, rng), random::state(d, rng));
    let chain = [MonotoneFn::am(), MonotoneFn::lm(), MonotoneFn::gm(), MonotoneFn::hm()]
        .iter()
        .map(|f| Ok(chi2_f(f, &rho, &sigma)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let ok = chain.windows(2).all(|w| leq(w[0], w[1], 1e-9));
    tally.check(ok, || json!({"trial": t, "check": "chi2 ordering am<=lm<=gm<=hm", "values": chain}));

    let (da, db) = (2, dim(rng, 2, 3));
    let joint = random::state(da * db, rng);
    let mus = [MonotoneFn::am(), MonotoneFn::lm(), MonotoneFn::gm()]
        .iter()
        .map(|f| Ok(mu_f(f, &joint, da, db)?.mu))
        .collect::<Result<Vec<f64>>>()?;
    let ok = mus.windows(2).all(|w| w[0] <= w[1] + 1e-9);
    tally.check(ok, || json!({"trial": t, "check": "mu ordering am<=lm<=gm", "values": mus}));
    Ok(())
}

fn identity_trial(tally: &mut Tally, t: usize, rng: &mut TestRng, _: &Tolerances) -> Result<()> {
    let d = dim(rng, 2, 4);
    let (rho, sigma) = (random::state(d, rng), random::state(d, rng));
    let chi = chi2_f(&MonotoneFn::gm(), &rho, &sigma)?.value;
    let d2 = sandwiched_renyi(2.0, &rho, &sigma)?.value;
    let via_renyi = (d2 * std::f64::consts::LN_2).exp() - 1.0;
    tally.check(close(chi, via_renyi, 1e-9), || json!({"trial": t, "check": "chi2_gm = exp(D2) - 1", "chi2": chi, "renyi": via_renyi}));
    for f in MonotoneFn::means() {
        let chi = chi2_f(&f, &rho, &sigma)?.value;
        let ratio = WeightedSpace::new(&f, &sigma, Power::MinusOne).apply(rho.matrix())?;
        let var = variance(&f, &sigma, &ratio)?;
        tally.check(close(chi, var, 1e-9), || json!({"trial": t, "check": "variance relation", "f": f.name(), "chi2": chi, "variance": var}));
    }
    Ok(())
}

fn correspondence_trial(tally: &mut Tally, t: usize, rng: &mut TestRng, tol: &Tolerances) -> Result<()> {
    let (din, dout) = (dim(rng, 2, 3), dim(rng, 2, 3));
    let e = channel(din, dout, rng);
    let sigma = random::state(din, rng);
    for f in MonotoneFn::means() {
        let c = correspondence_check(&f, &e, &sigma, tol)?;
        tally.check(c.pass, || json!({"trial": t, "check": "correspondence", "result": c}));
    }
    Ok(())
}

fn tensorization_trial(tally: &mut Tally, t: usize, rng: &mut TestRng, tol: &Tolerances) -> Result<()> {
    let (rho, sigma) = (random::state(4, rng), random::state(4, rng));
    for k in [0.0, 0.25, 0.5, 1.0] {
        let c = tensorization_check(k, &rho, (2, 2), &sigma, (2, 2), tol)?;
        tally.check(c.pass, || json!({"trial": t, "check": "tensorization", "k": k, "result": c}));
    }
    Ok(())
}

fn classical_trial(tally: &mut Tally, t: usize, rng: &mut TestRng, _: &Tolerances) -> Result<()> {
    let (dx, dy) = (dim(rng, 2, 5), dim(rng, 2, 5));
    let table = random::table(dx, dy, rng);
    let want = classical_mu(&table)?;
    let state = classical_state(&table)?;
    for f in MonotoneFn::means() {
        let got = mu_f(&f, &state, dx, dy)?.mu;
        tally.check((got - want).abs() <= 1e-8, || json!({"trial": t, "check": "classical reduction", "f": f.name(), "table": table, "mu_f": got, "classical": want}));
    }
    Ok(())
}

fn saturation_trial(tally: &mut Tally, t: usize, rng: &mut TestRng, tol: &Tolerances) -> Result<()> {
    let d = dim(rng, 2, 3);
    let sigma = random::state(d, rng);
    let rho = random::state(d, rng);
    let f = MonotoneFn::means()[t % 4].clone();
    let u = ChannelRep::unitary(&random::unitary(d, rng))?;
    let s = dpi_saturated(&f, &u, &rho, &sigma, tol.dpi_tol)?;
    tally.check(s.saturated, || json!({"trial": t, "check": "unitary saturates", "f": f.name(), "residual": s.residual}));
    let rep = ChannelRep::replacer(d, &random::state(d, rng));
    let s = dpi_saturated(&f, &rep, &rho, &sigma, tol.dpi_tol)?;
    tally.check(!s.saturated, || json!({"trial": t, "check": "replacer does not saturate", "f": f.name(), "residual": s.residual}));

    let p: f64 = rng.random_range(0.2..=1.0);
    let deph = ChannelRep::dephasing(d, p)?;
    let diag_sigma = Density::from_diagonal(&random::table(1, d, rng)[0])?;
    let candidate = if t % 2 == 0 { Density::from_diagonal(&random::table(1, d, rng)[0])? } else { rho };
    let before = chi2_f(&f, &candidate, &diag_sigma)?.value;
    let after = chi2_f(&f, &deph.apply_state(&candidate)?, &deph.apply_state(&diag_sigma)?)?.value;
    let equal = close(before, after, 1e-9);
    let s = dpi_saturated(&f, &deph, &candidate, &diag_sigma, tol.dpi_tol)?;
    tally.check(equal == s.saturated, || {
        json!({"trial": t, "check": "certifier matches chi2 equality", "f": f.name(), "before": before, "after": after, "residual": s.residual})
    });
    Ok(())
}
