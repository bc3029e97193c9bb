//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use sha2::{Digest, Sha256};

use tdsig::harness::{inject_fault, run_ceremony, run_confirmation_session, Detection, Fault, Phase, Transcript};
use tdsig::params::KeyPair;
use tdsig::random::{derive_seed, rng_from_seed};
use tdsig::shamir::{deal_polynomial, DealerPolynomial};
use tdsig::sweep::{map_indexed, random_ceremony_config, secrecy_batch, shape_for, Execution};
use tdsig::vectors::{reference_config, run_reference, toy_params, toy_roster};
use tdsig::zkproof::{count_accepting_challenges, Outcome};

const GOLDEN: &str = include_str!("data/reference_transcript.txt");

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

// Independent small-integer model of the group operations and the hash.

fn pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

fn mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn oracle_hash(z: u64, w: u64, msg: &[u8], p: u64, q: u64) -> u64 {
    let width = (64 - p.leading_zeros()).div_ceil(8) as usize;
    let mut buf = Vec::new();
    for e in [z, w] {
        buf.extend_from_slice(&(width as u32).to_be_bytes());
        buf.extend_from_slice(&e.to_be_bytes()[8 - width..]);
    }
    buf.extend_from_slice(&(msg.len() as u32).to_be_bytes());
    buf.extend_from_slice(msg);
    Sha256::digest(&buf)
        .iter()
        .fold(0u128, |acc, &b| (acc * 256 + b as u128) % q as u128) as u64
}

struct Group {
    p: u64,
    q: u64,
    g: u64,
}

/// Receiver-side check: `mu = g^S y_G^R W`, `Z = mu^x_B`, accept iff `R = h(Z, W, m)`.
fn oracle_verify(grp: &Group, y_group: u64, x_receiver: u64, s: u64, w: u64, r: u64, msg: &[u8]) -> bool {
    if s >= grp.q || r >= grp.q || w == 0 || w >= grp.p || pow(w, grp.q, grp.p) != 1 {
        return false;
    }
    let mu = mul(mul(pow(grp.g, s, grp.p), pow(y_group, r, grp.p), grp.p), w, grp.p);
    let z = pow(mu, x_receiver, grp.p);
    oracle_hash(z, w, msg, grp.p, grp.q) == r
}

fn small(x: &BigUint) -> u64 {
    x.to_u64().expect("toy value fits in u64")
}

fn group_of(params: &tdsig::params::SystemParams) -> Group {
    Group {
        p: small(&params.p),
        q: small(&params.q),
        g: small(&params.g),
    }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let took = start.elapsed();
    (took < limit, format!("{:.3}s", took.as_secs_f64()))
}

fn c1_dealing() -> Verdict {
    let start = Instant::now();
    let params = toy_params();
    let poly = DealerPolynomial::from_coefficients([3u32, 5], &params.q).unwrap();
    let dealing = deal_polynomial(&params, &poly, &toy_roster()).unwrap();
    let shares: Vec<u64> = dealing.shares.iter().map(|s| small(&s.v)).collect();
    let key = small(dealing.group_key());
    let (fast, took) = within(start, Duration::from_secs(1));
    verdict(
        shares == [4, 8, 7, 6] && key == 13 && fast,
        format!("shares={shares:?} y_G={key} in {took}"),
    )
}

fn c2_ceremony() -> Verdict {
    let start = Instant::now();
    let out = run_ceremony(&reference_config()).unwrap();
    let by = |id: &str| out.signers.iter().find(|s| s.member_id == id).unwrap();
    let (a, f) = (by("A"), by("F"));
    let got = [
        small(&a.commitment.w),
        small(&f.commitment.w),
        small(&a.commitment.z),
        small(&f.commitment.z),
        small(&a.aggregate.w),
        small(&a.aggregate.z),
        small(&a.aggregate.r),
        small(&a.modified_share.ms),
        small(&f.modified_share.ms),
        small(&a.partial.s),
        small(&f.partial.s),
        small(&out.signature.s),
        small(&out.verification.mu),
        small(&out.verification.z),
    ];
    let want = [3, 4, 12, 9, 12, 16, 5, 6, 8, 5, 9, 3, 3, 16];
    let agree = a.aggregate == f.aggregate;
    let (fast, took) = within(start, Duration::from_secs(1));
    verdict(
        got == want && agree && out.verification.accepted && fast,
        format!(
            "w=(3,4) z=(12,9) W=12 Z=16 R=5 MS=(6,8) s=(5,9) S=3 mu=3 accepted={} matched={} in {took}",
            out.verification.accepted,
            got == want
        ),
    )
}

fn c3_confirmation() -> Verdict {
    let run = run_reference().unwrap();
    let r = &run.confirmation.result;
    let got = [&r.w, &r.beta, &r.gamma].map(|v| v.as_ref().map_or(0, small));
    let golden = run.transcript.to_text() == GOLDEN;
    verdict(
        got == [2, 16, 4] && r.outcome == Outcome::Accepted && golden,
        format!(
            "w={} beta={} gamma={} outcome={} golden transcript identical={golden}",
            got[0], got[1], got[2], r.outcome
        ),
    )
}

struct LiveTrial {
    accepted: bool,
    oracle_accepted: bool,
    confirmed: bool,
    transcripts: Vec<Transcript>,
}

fn c4_completeness(transcripts: &mut Vec<Transcript>) -> Verdict {
    let start = Instant::now();
    let trials = map_indexed(Execution::Parallel, 200, |i| {
        let (n, t) = shape_for(i);
        let config = random_ceremony_config(derive_seed(0xACCE, i), 11, 10_000, n, t).unwrap();
        let out = run_ceremony(&config).unwrap();
        let grp = group_of(&config.params);
        let sig = &out.signature;
        let oracle_accepted = oracle_verify(
            &grp,
            small(&out.group_key),
            small(&out.receiver.x),
            small(&sig.s),
            small(&sig.w),
            small(&sig.r),
            &sig.message,
        );
        let session = run_confirmation_session(&config, &out, sig).unwrap();
        LiveTrial {
            accepted: out.verification.accepted,
            oracle_accepted,
            confirmed: session.result.outcome == Outcome::Accepted,
            transcripts: vec![out.transcript, session.transcript],
        }
    });
    let verified = trials.iter().filter(|t| t.accepted && t.oracle_accepted).count();
    let confirmed = trials.iter().filter(|t| t.confirmed).count();
    transcripts.extend(trials.into_iter().flat_map(|t| t.transcripts));
    let (fast, took) = within(start, Duration::from_secs(30));
    verdict(
        verified == 200 && confirmed == 200 && fast,
        format!("{verified}/200 signatures verified, {confirmed}/200 confirmations accepted in {took}"),
    )
}

fn c5_secrecy() -> Verdict {
    let start = Instant::now();
    let cases: Vec<_> = secrecy_batch(Execution::Parallel, 0x5EC, 2, 101, 4)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let failed = cases.iter().filter(|c| !c.passed()).count();
    let enumerated = cases.iter().filter(|c| c.enumerated).count();
    let subsets: usize = cases.iter().map(|c| c.subsets_checked).sum();
    let (fast, took) = within(start, Duration::from_secs(60));
    verdict(
        failed == 0 && !cases.is_empty() && fast,
        format!(
            "{} (q,t) cases, {enumerated} by full enumeration, {subsets} subsets, {failed} failures in {took}",
            cases.len()
        ),
    )
}

fn c6_forgery(transcripts: &mut Vec<Transcript>) -> Verdict {
    let trials = map_indexed(Execution::Parallel, 1000, |i| {
        let seed = derive_seed(0xF0E6, i);
        let config = random_ceremony_config(seed, 10_007, 65_521, 3, 2).unwrap();
        let out = run_ceremony(&config).unwrap();
        let grp = group_of(&config.params);
        let honest = small(&out.signature.s);
        let mut rng = rng_from_seed(derive_seed(seed, 1));
        let forged = loop {
            let c = rng.gen_range(0..grp.q);
            if c != honest {
                break c;
            }
        };
        let sig = &out.signature;
        let oracle = oracle_verify(
            &grp,
            small(&out.group_key),
            small(&out.receiver.x),
            forged,
            small(&sig.w),
            small(&sig.r),
            &sig.message,
        );
        let report = inject_fault(&config, &Fault::SubstituteS(forged.into())).unwrap();
        (oracle, report.detection == Detection::Undetected, report.transcript)
    });
    let oracle_accepts = trials.iter().filter(|t| t.0).count();
    let harness_accepts = trials.iter().filter(|t| t.1).count();
    transcripts.extend(trials.into_iter().map(|t| t.2));
    let worst = oracle_accepts.max(harness_accepts);
    let note = if worst == 1 { " (one accept: investigate)" } else { "" };
    verdict(
        worst <= 1,
        format!("1000 substitutions at q >= 10007: {harness_accepts} receiver accepts, {oracle_accepts} model accepts{note}"),
    )
}

fn c7_soundness() -> Verdict {
    let params = toy_params();
    let grp = group_of(&params);
    let key = KeyPair::from_secret(&params, 6u32).unwrap();
    let (x, y) = (6u64, small(&key.y));
    let mu = 3u64;
    let true_z = pow(mu, x, grp.p);
    let false_z = mul(true_z, grp.g, grp.p);

    // library count over every (u, v) for every alpha
    let mut lib_accepts = 0;
    let mut lib_total = 0;
    for alpha in 0..grp.q {
        let (a, t) = count_accepting_challenges(&params, &mu.into(), &false_z.into(), &key, &alpha.into());
        lib_accepts += a;
        lib_total += t;
    }

    // any prover strategy: for each commitment w, fix (alpha, gamma) before
    // the opening and count openings (u, v) consistent with w that pass
    let mut worst_fraction = 0f64;
    for w in (0..grp.q).map(|k| pow(grp.g, k, grp.p)) {
        let openings: Vec<(u64, u64)> = (0..grp.q)
            .flat_map(|u| (0..grp.q).map(move |v| (u, v)))
            .filter(|&(u, v)| mul(pow(mu, u, grp.p), pow(grp.g, v, grp.p), grp.p) == w)
            .collect();
        for alpha in 0..grp.q {
            let beta = mul(w, pow(grp.g, alpha, grp.p), grp.p);
            for gamma in (0..grp.q).map(|k| pow(grp.g, k, grp.p)) {
                let passing: Vec<&(u64, u64)> = openings
                    .iter()
                    .filter(|&&(u, v)| {
                        let e = v + alpha;
                        beta == mul(pow(mu, u, grp.p), pow(grp.g, e, grp.p), grp.p)
                            && gamma == mul(pow(false_z, u, grp.p), pow(y, e, grp.p), grp.p)
                    })
                    .collect();
                worst_fraction = worst_fraction.max(passing.len() as f64 / openings.len() as f64);
            }
        }
    }
    // honest responses: exactly the u = 0 challenges pass
    let mut model_passing = Vec::new();
    for alpha in 0..grp.q {
        for u in 0..grp.q {
            for v in 0..grp.q {
                let w = mul(pow(mu, u, grp.p), pow(grp.g, v, grp.p), grp.p);
                let beta = mul(w, pow(grp.g, alpha, grp.p), grp.p);
                let gamma = pow(beta, x, grp.p);
                let e = v + alpha;
                if beta == mul(pow(mu, u, grp.p), pow(grp.g, e, grp.p), grp.p)
                    && gamma == mul(pow(false_z, u, grp.p), pow(y, e, grp.p), grp.p)
                {
                    model_passing.push(u);
                }
            }
        }
    }
    let zero_u_only = model_passing.iter().all(|&u| u == 0) && model_passing.len() as u64 == lib_accepts;
    let exact = lib_accepts * grp.q == lib_total;
    verdict(
        exact && worst_fraction <= 1.0 / grp.q as f64 + f64::EPSILON && zero_u_only,
        format!(
            "honest-response sweep {lib_accepts}/{lib_total} (= 1/{}), worst strategy fraction {:.4} <= 1/11",
            grp.q, worst_fraction
        ),
    )
}

fn c8_linter(transcripts: &[Transcript]) -> Verdict {
    let golden = Transcript::from_text(GOLDEN).unwrap();
    let mut all: Vec<&Transcript> = vec![&golden];
    all.extend(transcripts);
    let dirty = all.iter().filter(|t| !t.lint().is_empty()).count();
    let records: usize = all.iter().map(|t| t.len()).sum();
    let broadcasts_with_secret = all
        .iter()
        .flat_map(|t| t.records.iter())
        .filter(|r| {
            r.is_broadcast()
                && r.fields
                    .iter()
                    .any(|(k, _)| tdsig::harness::SECRET_FIELDS.contains(&k.as_str()))
        })
        .count();

    // control: a leaked z on the broadcast channel is caught
    let leaked =
        Transcript::from_text(&GOLDEN.replace("round1-direct signer:A signer:F", "round1-direct signer:A *")).unwrap();
    let control = !leaked.lint().is_empty();
    let dealing_seen = golden.phase(Phase::Dealing).count();
    verdict(
        dirty == 0 && broadcasts_with_secret == 0 && control && dealing_seen == 4,
        format!(
            "{} transcripts, {records} records, {dirty} with findings; leak control caught={control}",
            all.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut transcripts = Vec::new();
    let results = [
        ("1 dealing replay", c1_dealing()),
        ("2 ceremony replay", c2_ceremony()),
        ("3 confirmation replay", c3_confirmation()),
        ("4 completeness", c4_completeness(&mut transcripts)),
        ("5 sub-threshold secrecy", c5_secrecy()),
        ("6 forgery rejection", c6_forgery(&mut transcripts)),
        ("7 confirmation soundness", c7_soundness()),
        ("8 transcript linter", c8_linter(&transcripts)),
    ];
    let mut ok = true;
    for (name, v) in &results {
        println!(
            "criterion {name}: {} ({})",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
        ok &= v.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
