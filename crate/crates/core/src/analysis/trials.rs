//! Seeded trial batches for the ground-state, derivative, bound and
//! certificate checks. Trial `i` draws from ChaCha8 seeded with `seed` on
//! stream `i + 1`, so batches are reproducible under any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::condition::{from_family, Family};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::par::{self, Exec};
use crate::problem::{SchrodingerProblem, VertexSpec};
use crate::secular::first_eigenvalues;
use crate::surgery::verify::MAX_ATTEMPTS;
use crate::surgery::{random_custom_condition, Generator};

use super::hadamard::{central_difference, hadamard_derivative, with_robin_perturbation, FiniteDifference};
use super::{ground_state, negativity_certificate_delta, negativity_certificate_deltaprime, BoundReport};

/// Finite-difference step for derivative checks.
pub const FD_STEP: f64 = 1e-5;
/// Slack allowed on bound checks.
pub const BOUND_TOL: f64 = 1e-9;

/// Outcome of one seeded trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub kind: &'static str,
    /// Measured quantity: relative error, slack, or `λ₁`, by check.
    pub value: f64,
    pub passed: bool,
    pub note: String,
}

fn rng_for(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

fn run<F>(seed: u64, trials: usize, exec: Exec, f: F) -> Result<Vec<TrialOutcome>>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<TrialOutcome> + Sync + Send,
{
    let ids: Vec<usize> = (0..trials).collect();
    par::map(exec, &ids, |&t| f(t, &mut rng_for(seed, t))).into_iter().collect()
}

fn degrees(nv: usize, pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut d = vec![0; nv];
    for &(a, b) in pairs {
        d[a] += 1;
        d[b] += 1;
    }
    d
}

/// Random connected problem; vertex `v` gets `cond(g, v, degree)`.
pub fn random_problem(
    g: &mut Generator,
    q: (f64, f64),
    cond: &mut dyn FnMut(&mut Generator, usize, usize) -> VertexSpec,
) -> Option<SchrodingerProblem> {
    let (nv, ne) = g.shape(1);
    let pairs = g.topology(nv, ne);
    let ids: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
    let deg = degrees(nv, &pairs);
    let edges = g.edges(&ids, &pairs, "e", q.0, q.1);
    let vertices: Vec<(String, VertexSpec)> = (0..nv).map(|v| (ids[v].clone(), cond(g, v, deg[v]))).collect();
    SchrodingerProblem::from_parts(&vertices, &edges).ok()
}

/// Random connected graph with δ conditions everywhere.
pub fn random_delta_problem(g: &mut Generator) -> Option<SchrodingerProblem> {
    random_problem(g, (-1.0, 2.0), &mut |g, _, _| g.delta())
}

fn draw<T>(rng: &mut ChaCha8Rng, mut f: impl FnMut(&mut Generator) -> Option<T>) -> Result<T> {
    for _ in 0..MAX_ATTEMPTS {
        let mut g = Generator::new(rng);
        if let Some(x) = f(&mut g) {
            return Ok(x);
        }
    }
    Err(Error::Rejection(MAX_ATTEMPTS))
}

/// Simplicity and positivity of the ground state on random all-δ graphs.
pub fn ground_state_trials(seed: u64, trials: usize, exec: Exec) -> Result<Vec<TrialOutcome>> {
    run(seed, trials, exec, |t, rng| {
        let p = draw(rng, random_delta_problem)?;
        let r = ground_state(&p)?;
        Ok(TrialOutcome {
            trial: t,
            kind: "ground-state",
            value: r.min_value,
            passed: r.guaranteed && r.multiplicity == 1 && r.positive,
            note: format!("lambda1={:.6e} multiplicity={}", r.lambda1, r.multiplicity),
        })
    })
}

/// The derivative kinds cycled through by [`hadamard_trials`].
pub const HADAMARD_KINDS: [&str; 4] = ["delta-alpha", "deltaprime-beta", "deltaprime-inverse-beta", "robin-block"];

fn replace_condition(p: &SchrodingerProblem, v0: usize, family: Family) -> Result<SchrodingerProblem> {
    let mut conditions = p.conditions().to_vec();
    conditions[v0] = from_family(family, p.condition(v0).degree)?;
    SchrodingerProblem::new(p.graph().clone(), conditions)
}

fn signed_beta(g: &mut Generator) -> f64 {
    let b = g.rng_range(0.3, 2.0);
    if g.chance(0.5) {
        b
    } else {
        -b
    }
}

fn hadamard_case(kind: usize, g: &mut Generator) -> Option<(SchrodingerProblem, usize, usize, Mat)> {
    // vertex 0 is the differentiated one; the topology is random anyway
    let p = random_problem(g, (-1.0, 2.0), &mut |g, v, d| {
        if v == 0 {
            match kind {
                0 => VertexSpec::Family(Family::Delta(g.alpha())),
                1 | 2 => VertexSpec::Family(Family::DeltaPrime(signed_beta(g))),
                _ => VertexSpec::Explicit(random_custom_condition(g.rng, d, 1)),
            }
        } else {
            match g.index(3) {
                0 => g.delta(),
                1 => VertexSpec::Family(Family::DeltaPrime(signed_beta(g))),
                _ => VertexSpec::Family(Family::Neumann),
            }
        }
    })?;
    let v0 = 0;
    let d = p.condition(v0).degree;
    let dir = match kind {
        0 => super::delta_direction(d),
        1 | 2 => super::inverse_beta_direction(d),
        _ => {
            let m = Mat::from_fn(d, d, |_, _| g.rng_range(-1.0, 1.0));
            let s = (&m + m.transpose()) * 0.5;
            let pr = &p.condition(v0).pr;
            pr * s * pr
        }
    };
    let k = 1 + g.index(3);
    let ev = first_eigenvalues(&p, k + 1).ok()?;
    let simple = ev.len() == k + 1
        && ev[k] - ev[k - 1] > 1e-3
        && (k == 1 || ev[k - 1] - ev[k - 2] > 1e-3)
        && ev[k - 1].abs() < 1e3;
    simple.then_some((p, v0, k, dir))
}

/// Hadamard formula against central finite differences.
pub fn hadamard_trials(seed: u64, trials: usize, exec: Exec) -> Result<Vec<TrialOutcome>> {
    run(seed, trials, exec, |t, rng| {
        let kind = t % HADAMARD_KINDS.len();
        let (p, v0, k, dir) = draw(rng, |g| hadamard_case(kind, g))?;
        let base = hadamard_derivative(&p, k, v0, &dir)?;
        let (formula, fd): (f64, FiniteDifference) = match kind {
            0 => {
                let a = p.condition(v0).family.delta_strength().unwrap_or(0.0);
                (base, central_difference(k, a, FD_STEP, |x| replace_condition(&p, v0, Family::Delta(x)))?)
            }
            1 => {
                let b = p.condition(v0).family.deltaprime_strength().unwrap_or(1.0);
                let fd = central_difference(k, b, FD_STEP, |x| replace_condition(&p, v0, Family::DeltaPrime(x)))?;
                (-base / (b * b), fd)
            }
            2 => {
                let b = p.condition(v0).family.deltaprime_strength().unwrap_or(1.0);
                let fd =
                    central_difference(k, 1.0 / b, FD_STEP, |s| replace_condition(&p, v0, Family::DeltaPrime(1.0 / s)))?;
                (base, fd)
            }
            _ => (base, central_difference(k, 0.0, FD_STEP, |x| with_robin_perturbation(&p, v0, &dir, x))?),
        };
        let err = (formula - fd.coarse).abs() / formula.abs().max(1.0);
        Ok(TrialOutcome {
            trial: t,
            kind: HADAMARD_KINDS[kind],
            value: err,
            passed: err < 1e-5,
            note: format!("k={k} formula={formula:.9e} fd={:.9e} richardson={:.9e}", fd.coarse, fd.richardson),
        })
    })
}

/// Bound sandwich on random all-δ graphs.
pub fn bound_trials(seed: u64, trials: usize, exec: Exec) -> Result<Vec<TrialOutcome>> {
    run(seed, trials, exec, |t, rng| {
        let p = draw(rng, random_delta_problem)?;
        let r = BoundReport::of(&p)?;
        let slack = r.min_slack();
        Ok(TrialOutcome {
            trial: t,
            kind: if r.upper_flower.is_some() { "bounds+flower" } else { "bounds" },
            value: slack,
            passed: r.lower.is_some() && r.upper_constant.is_some() && slack >= -BOUND_TOL,
            note: format!(
                "lower={:?} lambda1={:.9e} upper={:?} flower={:?}",
                r.lower, r.lambda1, r.upper_constant, r.upper_flower
            ),
        })
    })
}

/// Soundness of both negativity certificates (even trials δ, odd δ′).
pub fn certificate_trials(seed: u64, trials: usize, exec: Exec) -> Result<Vec<TrialOutcome>> {
    run(seed, trials, exec, |t, rng| {
        let (kind, p, claimed) = if t % 2 == 0 {
            let p = draw(rng, |g| random_problem(g, (-2.0, 1.0), &mut |g, _, _| g.delta()))?;
            let c = negativity_certificate_delta(&p)?;
            ("certificate-delta", p, c)
        } else {
            let p = draw(rng, |g| {
                random_problem(g, (-2.0, 1.0), &mut |g, _, _| VertexSpec::Family(Family::DeltaPrime(g.beta())))
            })?;
            let c = negativity_certificate_deltaprime(&p)?.is_some();
            ("certificate-deltaprime", p, c)
        };
        let lambda1 = first_eigenvalues(&p, 1)?[0];
        Ok(TrialOutcome {
            trial: t,
            kind,
            value: lambda1,
            passed: !claimed || lambda1 < -1e-12,
            note: format!("claimed={claimed}"),
        })
    })
}

/// Failed outcomes of a batch.
pub fn failures(outcomes: &[TrialOutcome]) -> Vec<&TrialOutcome> {
    outcomes.iter().filter(|o| !o.passed).collect()
}
