//! `tdsig` command-line front end.
//!
//! Exit status: 0 on success or acceptance, 1 on rejection or abort, 2 on
//! usage or I/O errors. Secrets are only ever read from files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tdsig::dirsig::DirectedSignature;
use tdsig::format::{parse_uint, Document};
use tdsig::harness::{inject_fault, run_ceremony, run_confirmation_session, CeremonyConfig, Detection, Fault};
use tdsig::params::{generate_params, keygen, KeyPair, Scale, SystemParams, DEFAULT_ATTEMPTS};
use tdsig::random::{rng_from_entropy, rng_from_seed};
use tdsig::shamir::{deal, Member};
use tdsig::threshold::threshold_verify;
use tdsig::vectors::run_reference;
use tdsig::zkproof::Outcome;

#[derive(Parser)]
#[command(name = "tdsig", version, about = "Threshold directed signatures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate system parameters (p, q, g).
    ParamsGen {
        #[arg(long)]
        p_bits: u64,
        #[arg(long)]
        q_bits: u64,
        #[arg(long)]
        out: PathBuf,
        /// Deterministic generation from this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a parameter file and list every violation.
    ParamsValidate {
        #[arg(long)]
        params: PathBuf,
        /// Accept bit lengths below the production minimum.
        #[arg(long)]
        allow_toy: bool,
    },
    /// Generate a keypair; the file holds the secret.
    Keygen {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Deal shares of a group secret to a roster.
    Deal {
        #[arg(long)]
        params: PathBuf,
        /// File holding the group secret in decimal; random if omitted.
        #[arg(long)]
        secret: Option<PathBuf>,
        #[arg(long)]
        t: usize,
        /// Comma-separated `id:point` pairs, e.g. `A:9,C:12,E:14`.
        #[arg(long)]
        roster: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a signing ceremony from a config file.
    Ceremony {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_transcript: PathBuf,
        /// Also write the delivered signature here.
        #[arg(long)]
        out_sig: Option<PathBuf>,
    },
    /// Receiver-side verification of a signature.
    Verify {
        #[arg(long)]
        params: PathBuf,
        /// File with a `y_G=` line (the group record written by `deal`).
        #[arg(long)]
        group_key: PathBuf,
        #[arg(long)]
        receiver_key: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Run the ceremony in a config, then have the receiver prove the given
    /// signature to the third party.
    Confirm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Replay the reference toy ceremony and confirmation.
    ReplayPaper,
    /// Run a ceremony with one fault injected and report where it surfaced.
    Inject {
        #[arg(long)]
        config: PathBuf,
        /// e.g. `corrupt_partial(A,1)`, `substitute_S(7)`, `impersonate(A)`, `drop_message(round2)`.
        #[arg(long)]
        fault: String,
    },
}

/// Failure that maps to exit status 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Run = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn verdict(accepted: bool) -> &'static str {
    if accepted {
        "ACCEPT"
    } else {
        "REJECT"
    }
}

fn parse_roster(spec: &str) -> Result<Vec<Member>, Failure> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|entry| {
            let (id, u) = entry
                .split_once(':')
                .ok_or_else(|| Failure(format!("roster entry `{entry}` is not id:point")))?;
            Ok(Member::new(id.trim(), parse_uint(0, u)?))
        })
        .collect()
}

fn run(command: Command) -> Run {
    match command {
        Command::ParamsGen {
            p_bits,
            q_bits,
            out,
            seed,
        } => {
            let params = match seed {
                Some(s) => generate_params(p_bits, q_bits, &mut rng_from_seed(s), DEFAULT_ATTEMPTS)?,
                None => generate_params(p_bits, q_bits, &mut rng_from_entropy(), DEFAULT_ATTEMPTS)?,
            };
            write(&out, &params.to_text())?;
            print!("{}", params.to_text());
            Ok(true)
        }
        Command::ParamsValidate { params, allow_toy } => {
            let params = SystemParams::from_text(&read(&params)?)?;
            let report = params.validate(if allow_toy { Scale::Toy } else { Scale::Production });
            println!("{report}");
            Ok(report.is_valid())
        }
        Command::Keygen { params, out, seed } => {
            let params = SystemParams::from_text(&read(&params)?)?;
            let key = match seed {
                Some(s) => keygen(&params, &mut rng_from_seed(s))?,
                None => keygen(&params, &mut rng_from_entropy())?,
            };
            write(&out, &key.to_text())?;
            println!("y={}", key.y);
            Ok(true)
        }
        Command::Deal {
            params,
            secret,
            t,
            roster,
            out_dir,
            seed,
        } => {
            let params = SystemParams::from_text(&read(&params)?)?;
            let secret = secret
                .map(|path| read(&path).and_then(|s| parse_uint(1, s.trim()).map_err(Failure::from)))
                .transpose()?;
            let members = parse_roster(&roster)?;
            let dealing = match seed {
                Some(s) => deal(&params, secret, t, &members, &mut rng_from_seed(s))?,
                None => deal(&params, secret, t, &members, &mut rng_from_entropy())?,
            };
            fs::create_dir_all(&out_dir).map_err(|e| Failure(format!("{}: {e}", out_dir.display())))?;
            write(&out_dir.join("group.txt"), &dealing.record.to_text())?;
            for share in &dealing.shares {
                write(
                    &out_dir.join(format!("share-{}.txt", share.member_id)),
                    &share.to_text(),
                )?;
            }
            print!("{}", dealing.record.to_text());
            Ok(true)
        }
        Command::Ceremony {
            config,
            out_transcript,
            out_sig,
        } => {
            let config = CeremonyConfig::from_text(&read(&config)?)?;
            let out = run_ceremony(&config)?;
            write(&out_transcript, &out.transcript.to_text())?;
            if let Some(path) = out_sig {
                write(&path, &out.signature.to_text())?;
            }
            print!("{}", out.signature.to_text());
            println!("{}", verdict(out.verification.accepted));
            Ok(out.verification.accepted)
        }
        Command::Verify {
            params,
            group_key,
            receiver_key,
            sig,
        } => {
            let params = SystemParams::from_text(&read(&params)?)?;
            let y_group = Document::parse(&read(&group_key)?).uint("y_G")?;
            let receiver = KeyPair::from_text(&params, &read(&receiver_key)?)?;
            let sig = DirectedSignature::from_text(&read(&sig)?)?;
            let v = threshold_verify(&params, &y_group, &receiver, &sig);
            println!("{}", verdict(v.accepted));
            Ok(v.accepted)
        }
        Command::Confirm { config, sig } => {
            let config = CeremonyConfig::from_text(&read(&config)?)?;
            let sig = DirectedSignature::from_text(&read(&sig)?)?;
            let out = run_ceremony(&config)?;
            let session = run_confirmation_session(&config, &out, &sig)?;
            print!("{}", session.transcript.to_text());
            let outcome = session.result.outcome;
            println!(
                "{}",
                match outcome {
                    Outcome::Accepted => "ACCEPT".to_string(),
                    Outcome::Rejected => "REJECT".to_string(),
                    Outcome::Aborted => "ABORT".to_string(),
                    Outcome::Stopped(why) => format!("STOP {why}"),
                }
            );
            Ok(outcome == Outcome::Accepted)
        }
        Command::ReplayPaper => {
            let run = run_reference()?;
            print!("{}", run.transcript.to_text());
            let accepted = run.ceremony.verification.accepted && run.confirmation.result.outcome == Outcome::Accepted;
            println!("{}", verdict(accepted));
            Ok(accepted)
        }
        Command::Inject { config, fault } => {
            let config = CeremonyConfig::from_text(&read(&config)?)?;
            let fault: Fault = fault.parse()?;
            let report = inject_fault(&config, &fault)?;
            print!("{}", report.transcript.to_text());
            println!("fault: {}", report.fault);
            println!("detection: {}", report.detection);
            match &report.verification {
                Some(v) => println!("{}", verdict(v.accepted)),
                None => println!("NO SIGNATURE"),
            }
            Ok(report.detection != Detection::Undetected)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
