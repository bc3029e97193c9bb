//! Batch runners for randomized and exhaustive checks. Each trial is a pure
//! function of its index and a base seed, so sequential and parallel
//! execution produce identical results in identical order.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;
use crate::harness::{
    inject_fault, run_ceremony, run_confirmation_session, CeremonyConfig, DealerSetup, Detection, Fault,
    RandomnessMode, Schedule,
};
use crate::modmath::is_probable_prime;
use crate::params::{params_for_subgroup, SystemParams};
use crate::random::{derive_seed, rng_from_seed};
use crate::shamir::{deal_polynomial, reconstruct_polynomial, DealerPolynomial, Member, Share};
use crate::zkproof::Outcome;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Spread trials over the rayon pool. Without the `parallel` feature this
    /// runs sequentially.
    #[default]
    Parallel,
}

/// `f(0), f(1), ..., f(count - 1)` under the chosen execution.
pub fn map_indexed<T, F>(exec: Execution, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..count).into_par_iter().map(f).collect(),
        _ => (0..count).map(f).collect(),
    }
}

/// A uniformly chosen prime in `[low, high]`.
pub fn random_prime<R: RngCore>(low: u64, high: u64, rng: &mut R) -> u64 {
    loop {
        let c = rng.gen_range(low..=high);
        if is_probable_prime(&BigUint::from(c)) {
            return c;
        }
    }
}

/// `n` distinct nonzero evaluation points mod `q`.
pub fn random_roster<R: RngCore>(n: usize, q: u64, rng: &mut R) -> Vec<Member> {
    let mut points: Vec<u64> = Vec::with_capacity(n);
    while points.len() < n {
        let u = rng.gen_range(1..q);
        if !points.contains(&u) {
            points.push(u);
        }
    }
    points
        .into_iter()
        .enumerate()
        .map(|(i, u)| Member::new(format!("P{}", i + 1), u))
        .collect()
}

/// A live-randomness ceremony over fresh toy parameters with `q` drawn from
/// `[q_low, q_high]`.
pub fn random_ceremony_config(seed: u64, q_low: u64, q_high: u64, n: usize, t: usize) -> Result<CeremonyConfig> {
    let mut rng = rng_from_seed(seed);
    let q = random_prime(q_low, q_high, &mut rng);
    let params = params_for_subgroup(&BigUint::from(q), &mut rng)?;
    let roster = random_roster(n, q, &mut rng);
    let mut active: Vec<String> = roster.iter().map(|m| m.id.clone()).collect();
    active.shuffle(&mut rng);
    active.truncate(t);
    let mut message = vec![0u8; 16];
    rng.fill_bytes(&mut message);
    Ok(CeremonyConfig {
        params,
        roster,
        threshold: t,
        active,
        message,
        randomness: RandomnessMode::Live { seed: rng.next_u64() },
        dealer: DealerSetup::Deal { polynomial: None },
        receiver_secret: None,
        ceremony_id: 1,
        schedule: Schedule::Sequential,
    })
}

/// Roster size and threshold for trial `index`: cycles through every
/// `1 <= t <= n <= 6`.
pub fn shape_for(index: u64) -> (usize, usize) {
    let pairs: Vec<(usize, usize)> = (1..=6).flat_map(|n| (1..=n).map(move |t| (n, t))).collect();
    pairs[(index as usize) % pairs.len()]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletenessTrial {
    pub q: BigUint,
    pub n: usize,
    pub t: usize,
    pub signature_accepted: bool,
    pub confirmation: Outcome,
    /// Linter findings across the ceremony and confirmation transcripts.
    pub lint_violations: usize,
}

impl CompletenessTrial {
    pub fn passed(&self) -> bool {
        self.signature_accepted && self.confirmation == Outcome::Accepted && self.lint_violations == 0
    }
}

/// One honest ceremony plus one confirmation session.
pub fn completeness_trial(base_seed: u64, index: u64) -> Result<CompletenessTrial> {
    let (n, t) = shape_for(index);
    let config = random_ceremony_config(derive_seed(base_seed, index), 11, 10_000, n, t)?;
    let out = run_ceremony(&config)?;
    let session = run_confirmation_session(&config, &out, &out.signature)?;
    Ok(CompletenessTrial {
        q: config.params.q.clone(),
        n,
        t,
        signature_accepted: out.verification.accepted,
        confirmation: session.result.outcome,
        lint_violations: out.transcript.lint().len() + session.transcript.lint().len(),
    })
}

pub fn completeness_batch(exec: Execution, base_seed: u64, count: u64) -> Vec<Result<CompletenessTrial>> {
    map_indexed(exec, count, |i| completeness_trial(base_seed, i))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgeryTrial {
    pub q: BigUint,
    pub honest_s: BigUint,
    pub forged_s: BigUint,
    pub detection: Detection,
}

impl ForgeryTrial {
    pub fn accepted(&self) -> bool {
        self.detection == Detection::Undetected
    }
}

/// An honest ceremony, then the same ceremony with the combiner replacing
/// `S` by a different uniformly chosen value.
pub fn forgery_trial(base_seed: u64, index: u64, q_low: u64, q_high: u64) -> Result<ForgeryTrial> {
    let seed = derive_seed(base_seed, index);
    let config = random_ceremony_config(seed, q_low, q_high, 3, 2)?;
    let honest = run_ceremony(&config)?;
    let q = config.params.q.to_u64().expect("toy q fits in u64");
    let honest_s = honest.signature.s.clone();
    let mut rng = rng_from_seed(derive_seed(seed, u64::MAX));
    let forged_s = loop {
        let c = BigUint::from(rng.gen_range(0..q));
        if c != honest_s {
            break c;
        }
    };
    let report = inject_fault(&config, &Fault::SubstituteS(forged_s.clone()))?;
    Ok(ForgeryTrial {
        q: config.params.q.clone(),
        honest_s,
        forged_s,
        detection: report.detection,
    })
}

pub fn forgery_batch(
    exec: Execution,
    base_seed: u64,
    count: u64,
    q_low: u64,
    q_high: u64,
) -> Vec<Result<ForgeryTrial>> {
    map_indexed(exec, count, |i| forgery_trial(base_seed, i, q_low, q_high))
}

/// Every `t`-subset of the roster signing the same message.
pub fn subset_sweep(exec: Execution, config: &CeremonyConfig) -> Vec<(Vec<String>, Result<bool>)> {
    let ids: Vec<String> = config.roster.iter().map(|m| m.id.clone()).collect();
    let subsets = combinations(ids.len(), config.threshold);
    map_indexed(exec, subsets.len() as u64, |i| {
        let active: Vec<String> = subsets[i as usize].iter().map(|&j| ids[j].clone()).collect();
        let mut c = config.clone();
        c.active = active.clone();
        (active, run_ceremony(&c).map(|o| o.verification.accepted))
    })
}

/// All `k`-element index subsets of `0..n`, lexicographic.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Above this many candidate polynomials the hiding check switches from
/// enumeration to interpolation.
pub const ENUMERATION_LIMIT: u64 = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecrecyCase {
    pub q: u64,
    pub t: usize,
    pub n: usize,
    pub enumerated: bool,
    pub subsets_checked: usize,
    /// Every `(t-1)`-subset admits exactly one polynomial per candidate secret.
    pub hiding: bool,
    /// Every `t`-subset rebuilds the dealer polynomial.
    pub reconstructs: bool,
}

impl SecrecyCase {
    pub fn passed(&self) -> bool {
        self.hiding && self.reconstructs
    }
}

/// Deals `f` over `Z_q` to `t + 2` members (capped at `q - 1`) and checks
/// hiding for every `(t-1)`-subset and reconstruction for every `t`-subset.
pub fn secrecy_case(q: u64, t: usize, seed: u64) -> Result<SecrecyCase> {
    let mut rng = rng_from_seed(seed);
    let params = params_for_subgroup(&BigUint::from(q), &mut rng)?;
    let n = (t + 2).min(q as usize - 1);
    let roster = random_roster(n, q, &mut rng);
    let secret = BigUint::from(rng.gen_range(1..q));
    let poly = DealerPolynomial::random(Some(secret), t, &params.q, &mut rng)?;
    let dealing = deal_polynomial(&params, &poly, &roster)?;
    let shares: Vec<Share> = roster
        .iter()
        .map(|m| dealing.share(&m.id).expect("dealt").clone())
        .collect();
    let points: Vec<(u64, u64)> = shares
        .iter()
        .map(|s| (s.u.to_u64().expect("small"), s.v.to_u64().expect("small")))
        .collect();

    let below = combinations(n, t - 1);
    let enumerated = (q as u128).pow(t as u32) <= ENUMERATION_LIMIT as u128;
    let hiding = below.iter().all(|subset| {
        let known: Vec<(u64, u64)> = subset.iter().map(|&i| points[i]).collect();
        let counts = if enumerated {
            count_by_secret_enumerated(q, t, &known)
        } else {
            count_by_secret_interpolated(q, t, &known)
        };
        counts.iter().all(|&c| c == 1)
    });

    let original = poly.coefficients().to_vec();
    let at = combinations(n, t);
    let reconstructs = at.iter().all(|subset| {
        let chosen: Vec<Share> = subset.iter().map(|&i| shares[i].clone()).collect();
        reconstruct_polynomial(&chosen, t, &params).is_ok_and(|f| f.coefficients() == original.as_slice())
    });

    Ok(SecrecyCase {
        q,
        t,
        n,
        enumerated,
        subsets_checked: below.len() + at.len(),
        hiding,
        reconstructs,
    })
}

/// Every prime `q` in `[q_low, q_high]` against every `1 <= t <= t_max`.
pub fn secrecy_batch(
    exec: Execution,
    base_seed: u64,
    q_low: u64,
    q_high: u64,
    t_max: usize,
) -> Vec<Result<SecrecyCase>> {
    let cases: Vec<(u64, usize)> = (q_low..=q_high)
        .filter(|&q| is_probable_prime(&BigUint::from(q)))
        .flat_map(|q| (1..=t_max).filter(move |&t| t < q as usize).map(move |t| (q, t)))
        .collect();
    map_indexed(exec, cases.len() as u64, |i| {
        let (q, t) = cases[i as usize];
        secrecy_case(q, t, derive_seed(base_seed, i))
    })
}

fn eval(coeffs: &[u64], x: u64, q: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % q)
}

/// For each secret, the number of degree `< t` polynomials through `known`.
fn count_by_secret_enumerated(q: u64, t: usize, known: &[(u64, u64)]) -> Vec<u64> {
    let mut counts = vec![0u64; q as usize];
    let mut coeffs = vec![0u64; t];
    loop {
        if known.iter().all(|&(u, v)| eval(&coeffs, u, q) == v) {
            counts[coeffs[0] as usize] += 1;
        }
        let mut k = 0;
        loop {
            if k == t {
                return counts;
            }
            coeffs[k] += 1;
            if coeffs[k] < q {
                break;
            }
            coeffs[k] = 0;
            k += 1;
        }
    }
}

/// Same count, by interpolating through `(0, s)` and `known` for each `s`
/// and checking the result. Uniqueness follows from the degree bound.
fn count_by_secret_interpolated(q: u64, t: usize, known: &[(u64, u64)]) -> Vec<u64> {
    (0..q)
        .map(|s| {
            let mut pts = vec![(0, s)];
            pts.extend_from_slice(known);
            let f = interpolate(&pts, q);
            let fits = f.len() <= t && pts.iter().all(|&(u, v)| eval(&f, u, q) == v);
            u64::from(fits)
        })
        .collect()
}

fn pow_u64(mut b: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    b %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % q;
        }
        b = b * b % q;
        e >>= 1;
    }
    acc
}

/// Coefficients of the unique polynomial of degree `< pts.len()` through
/// `pts` over the prime field `Z_q`.
fn interpolate(pts: &[(u64, u64)], q: u64) -> Vec<u64> {
    let mut out = vec![0u64; pts.len()];
    for (i, &(xi, yi)) in pts.iter().enumerate() {
        let mut basis = vec![1u64];
        let mut denom = 1u64;
        for (j, &(xj, _)) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let neg = (q - xj % q) % q;
            let mut next = vec![0u64; basis.len() + 1];
            for (k, &c) in basis.iter().enumerate() {
                next[k] = (next[k] + c * neg) % q;
                next[k + 1] = (next[k + 1] + c) % q;
            }
            basis = next;
            denom = denom * ((xi + q - xj % q) % q) % q;
        }
        let scale = yi % q * pow_u64(denom, q - 2, q) % q;
        for (k, c) in basis.iter().enumerate() {
            out[k] = (out[k] + c * scale) % q;
        }
    }
    out
}

/// Parameters of the smallest valid group for a given subgroup order.
pub fn toy_params_for(q: u64, seed: u64) -> Result<SystemParams> {
    params_for_subgroup(&BigUint::from(q), &mut rng_from_seed(seed))
}
