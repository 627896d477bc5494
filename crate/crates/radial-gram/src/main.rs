use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use radial_gram::campaigns::{self, CampaignConfig, CampaignTag};
use radial_gram::embedding::embed;
use radial_gram::gram::{check_cnd, check_psd, default_tol, group_gram, GramReport};
use radial_gram::moments::{
    hankel_feasible, recover_laplace, recover_measure, MomentError, MomentSequence,
};
use radial_gram::profiles::{eval_cnd_z, eval_pd_rplus, eval_pd_z, DiscreteMeasure, ProfileFile};
use radial_gram::transfer::{build_family_d, build_family_f, build_family_r, FamilySpace, FamilySpec};
use radial_gram::words::{
    parse_word, random_word_with, Element, FreeWord, Space, Word,
};

#[derive(Parser)]
#[command(
    name = "radial-gram",
    about = "Length-radial positive definiteness on free products: lengths, embeddings, Gram certificates, moment recovery, and certification campaigns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum SpaceArg {
    /// free group with integer exponents
    FreeInt,
    /// free product of real lines
    FreeReal,
    /// direct sum of real lines
    DirectSum,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Space {
        match s {
            SpaceArg::FreeInt => Space::FreeInt,
            SpaceArg::FreeReal => Space::FreeReal,
            SpaceArg::DirectSum => Space::DirectSum,
        }
    }
}

#[derive(Args)]
struct WordInput {
    /// word text, e.g. "g1^2 g2^-1"; read from stdin when omitted
    word: Option<String>,
    #[arg(long, value_enum, default_value_t = SpaceArg::FreeInt)]
    space: SpaceArg,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a word to its normal form
    Reduce {
        #[command(flatten)]
        input: WordInput,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// l^p length of a word
    Length {
        #[command(flatten)]
        input: WordInput,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// print sum |k|^p instead of its p-th root
        #[arg(long)]
        squared: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Prefix-key embedding of an integer word
    Embed {
        /// word text; read from stdin when omitted
        word: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// PSD / CND check of a profile over a word set
    Check {
        /// file with one word per line
        #[arg(long, conflicts_with = "random")]
        words: Option<String>,
        /// draw this many random words instead of reading a file
        #[arg(long)]
        random: Option<usize>,
        /// profile JSON file, or a builtin: "parity", "length"
        #[arg(long)]
        profile: String,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = SpaceArg::FreeInt)]
        space: SpaceArg,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, env = "RADIAL_GRAM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Hankel feasibility of a moment sequence
    Moments {
        /// JSON file {"m":[...]}
        file: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Recover a representing measure from moments or Laplace samples
    Recover {
        /// JSON file: {"m":[...]} for kind=moments,
        /// {"samples":[[s,value],...]} for kind=laplace
        file: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Moments)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build and verify a replicated witness family
    Family {
        /// FamilySpec JSON file, e.g.
        /// {"space":"free-real","p":1.0,"N":8,"targets":[1.5,2.0]}
        file: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a certification campaign for one statement
    Certify {
        /// one of: thm-1.2, thm-1.3, prop-4.1, prop-4.2, lemma-3.2,
        /// cor-3.3, thm-4.5, thm-4.6, cor-4.9, cor-4.10, sec-4.3
        #[arg(long)]
        theorem: String,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        #[arg(long, env = "RADIAL_GRAM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum ModeArg {
    Pd,
    Cnd,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum KindArg {
    Moments,
    Laplace,
}

/// Exit 1: the input parsed but the mathematics said no.
/// Exit 2: the input could not be understood.
enum CliError {
    Rejected(String),
    Usage(String),
}

impl CliError {
    fn usage(err: impl std::fmt::Display) -> CliError {
        CliError::Usage(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Rejected(msg)) => {
            eprintln!("rejected: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Reduce { input, format } => {
            let elem = read_element(&input)?;
            match format {
                Format::Json => println!("{}", element_json(&elem)?),
                _ => println!("{}", element_display(&elem)),
            }
            Ok(())
        }
        Command::Length {
            input,
            p,
            squared,
            format,
        } => {
            let elem = read_element(&input)?;
            let len = match &elem {
                Element::Free(w) => {
                    if squared {
                        w.lp_length_pow(p)
                    } else {
                        w.lp_length(p)
                    }
                }
                Element::Real(w) => {
                    if squared {
                        w.lp_length_pow(p)
                    } else {
                        w.lp_length(p)
                    }
                }
                Element::Coord(v) => {
                    if squared {
                        v.lp_length_pow(p)
                    } else {
                        v.lp_length(p)
                    }
                }
            }
            .map_err(CliError::usage)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string(&len).unwrap()),
                _ => match len.exact_int {
                    Some(n) if squared => println!("{n}"),
                    _ => println!("{}", len.value),
                },
            }
            Ok(())
        }
        Command::Embed { word, format } => {
            let text = word_text(word)?;
            let w = FreeWord::parse(&text).map_err(CliError::usage)?;
            let v = embed(&w);
            match format {
                Format::Json => println!("{}", serde_json::to_string(&v).unwrap()),
                _ => {
                    if v.support().is_empty() {
                        println!("0");
                    }
                    for (key, c) in v.support() {
                        println!("{key}: {c}");
                    }
                }
            }
            Ok(())
        }
        Command::Check {
            words,
            random,
            profile,
            mode,
            space,
            p,
            tol,
            seed,
            format,
        } => cmd_check(words, random, &profile, mode, space.into(), p, tol, seed, format),
        Command::Moments { file, tol, format } => {
            let ms: MomentSequence = read_json(&file)?;
            let report = hankel_feasible(&ms, tol).map_err(CliError::usage)?;
            match format {
                Format::Text => println!(
                    "{} (bounded: {}, hankel min_eig: {})",
                    if report.feasible() { "feasible" } else { "infeasible" },
                    report.bounded,
                    report.hankel.min_eig
                ),
                _ => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
            }
            if report.feasible() {
                Ok(())
            } else {
                Err(CliError::Rejected("moment sequence is infeasible".into()))
            }
        }
        Command::Recover {
            file,
            k,
            kind,
            format,
        } => cmd_recover(&file, k, kind, format),
        Command::Family { file, format } => cmd_family(&file, format),
        Command::Certify {
            theorem,
            trials,
            seed,
            tol,
            format,
        } => {
            let theorem: CampaignTag = theorem.parse().map_err(CliError::usage)?;
            let cfg = CampaignConfig {
                theorem,
                trials,
                seed,
                tol,
            };
            let report = campaigns::run_campaign(&cfg).map_err(CliError::usage)?;
            match format {
                Format::Csv => print!("{}", report.to_csv()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                Format::Text => {
                    let failed: Vec<_> = report.records.iter().filter(|r| !r.pass).collect();
                    println!(
                        "{}: {} trials, {} records, {} failures",
                        theorem,
                        trials,
                        report.records.len(),
                        failed.len()
                    );
                    for r in failed.iter().take(10) {
                        println!(
                            "  FAIL trial {} {}: {} vs {}",
                            r.trial, r.statistic, r.value, r.threshold
                        );
                    }
                    println!("{}", if report.passed { "PASS" } else { "FAIL" });
                }
            }
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Rejected(format!("campaign {theorem} failed")))
            }
        }
    }
}

fn word_text(arg: Option<String>) -> Result<String, CliError> {
    match arg {
        Some(t) => Ok(t),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(CliError::usage)?;
            Ok(buf.trim().to_string())
        }
    }
}

fn read_element(input: &WordInput) -> Result<Element, CliError> {
    let text = word_text(input.word.clone())?;
    parse_word(&text, input.space.into()).map_err(CliError::usage)
}

fn element_display(e: &Element) -> String {
    match e {
        Element::Free(w) => w.to_string(),
        Element::Real(w) => w.to_string(),
        Element::Coord(v) => v.to_string(),
    }
}

fn element_json(e: &Element) -> Result<String, CliError> {
    let js = match e {
        Element::Free(w) => serde_json::to_string(w),
        Element::Real(w) => serde_json::to_string(w),
        Element::Coord(v) => serde_json::to_string(v),
    };
    js.map_err(CliError::usage)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{path}: {e}")))
}

/// A profile as the `check` command evaluates it: builtins are radial
/// functions given directly; file profiles are raw representing-measure
/// data composed with the appropriate length functional. Measures are
/// deliberately not range-validated here, so a profile with mass outside
/// the admissible region flows through to an honest Gram rejection.
enum CheckProfile {
    Parity,
    SqLength,
    File(ProfileFile),
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    words: Option<String>,
    random: Option<usize>,
    profile: &str,
    mode: ModeArg,
    space: Space,
    p: f64,
    tol: Option<f64>,
    seed: u64,
    format: Format,
) -> Result<(), CliError> {
    let prof = match profile {
        "parity" => CheckProfile::Parity,
        "length" => CheckProfile::SqLength,
        path => CheckProfile::File(read_json(path)?),
    };

    let report = match space {
        Space::FreeInt => {
            let ws = load_words(words, random, seed, |t| FreeWord::parse(t))?;
            let phi = |g: &FreeWord| -> Result<f64, CliError> {
                let n = u64::try_from(g.sq_length()).map_err(CliError::usage)?;
                Ok(match &prof {
                    CheckProfile::Parity => {
                        if n % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    CheckProfile::SqLength => n as f64,
                    CheckProfile::File(pf) => eval_profile_int(pf, n, g.theta(p))?,
                })
            };
            let err: std::cell::RefCell<Option<CliError>> = std::cell::RefCell::new(None);
            let m = group_gram(&ws, |g| match phi(g) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            });
            if let Some(e) = err.into_inner() {
                return Err(e);
            }
            run_check(&m, mode, tol)?
        }
        Space::FreeReal | Space::DirectSum => {
            let pf = match &prof {
                CheckProfile::File(pf) => pf,
                _ => {
                    return Err(CliError::Usage(
                        "builtin profiles are only defined on the integer free group".into(),
                    ))
                }
            };
            match space {
                Space::FreeReal => {
                    let ws = load_words(words, random, seed, |t| {
                        radial_gram::words::RealFreeWord::parse(t)
                    })?;
                    let m = group_gram(&ws, |g| eval_profile_real(pf, g.theta(p)));
                    run_check(&m, mode, tol)?
                }
                _ => {
                    let ws = load_words(words, random, seed, |t| {
                        radial_gram::words::CoordVector::parse(t)
                    })?;
                    let m = group_gram(&ws, |g| eval_profile_real(pf, g.theta(p)));
                    run_check(&m, mode, tol)?
                }
            }
        }
    };

    match format {
        Format::Text => println!(
            "{:?} (min_eig {}, max_eig {}, tol {})",
            if report.accepted() { "accept" } else { "reject" },
            report.min_eig,
            report.max_eig,
            report.tol
        ),
        _ => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
    }
    if report.accepted() {
        Ok(())
    } else {
        Err(CliError::Rejected("Gram check failed".into()))
    }
}

fn load_words<W, E: std::fmt::Display>(
    words: Option<String>,
    random: Option<usize>,
    seed: u64,
    parse: impl Fn(&str) -> Result<W, E>,
) -> Result<Vec<W>, CliError>
where
    W: Word,
{
    if let Some(path) = words {
        let text = fs::read_to_string(&path).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
        let mut out = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            out.push(parse(line).map_err(CliError::usage)?);
        }
        if out.is_empty() {
            return Err(CliError::Usage(format!("{path}: no words")));
        }
        Ok(out)
    } else if let Some(n) = random {
        if n == 0 {
            return Err(CliError::Usage("--random needs at least one word".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![parse("e").map_err(CliError::usage)?];
        while out.len() < n {
            // all spaces parse the integer-word syntax
            let w = parse(&random_word_with(&mut rng, 4, 3, 4).to_string())
                .map_err(CliError::usage)?;
            if !out.contains(&w) {
                out.push(w);
            }
        }
        Ok(out)
    } else {
        Err(CliError::Usage("pass --words FILE or --random N".into()))
    }
}

fn eval_profile_int(pf: &ProfileFile, n: u64, theta_p: f64) -> Result<f64, CliError> {
    Ok(match pf {
        ProfileFile::PdZ { mu } => eval_pd_z(mu, n),
        ProfileFile::CndZ { nu } => eval_cnd_z(nu, n),
        ProfileFile::PdRplus { mu } => eval_pd_rplus(mu, theta_p),
        ProfileFile::CndRplus { psi0, c, b, nu } => eval_cnd_rplus(*psi0, *c, *b, nu, theta_p),
    })
}

fn eval_profile_real(pf: &ProfileFile, theta_p: f64) -> f64 {
    match pf {
        // the half-line profiles act on the l^p length power directly;
        // the integer-semigroup kinds read it as a (rounded) exponent
        ProfileFile::PdZ { mu } => eval_pd_z(mu, theta_p.round().max(0.0) as u64),
        ProfileFile::CndZ { nu } => eval_cnd_z(nu, theta_p.round().max(0.0) as u64),
        ProfileFile::PdRplus { mu } => eval_pd_rplus(mu, theta_p),
        ProfileFile::CndRplus { psi0, c, b, nu } => eval_cnd_rplus(*psi0, *c, *b, nu, theta_p),
    }
}

fn eval_cnd_rplus(psi0: f64, c: f64, b: f64, nu: &DiscreteMeasure, s: f64) -> f64 {
    let jump = if s > 0.0 { b } else { 0.0 };
    psi0
        + c * s
        + jump
        + nu
            .atoms()
            .iter()
            .map(|a| a.w * (1.0 - (-a.loc * s).exp()))
            .sum::<f64>()
}

fn run_check(
    m: &radial_gram::gram::SymMatrix,
    mode: ModeArg,
    tol: Option<f64>,
) -> Result<GramReport, CliError> {
    let tol = tol.unwrap_or_else(|| default_tol(m));
    match mode {
        ModeArg::Pd => check_psd(m, tol),
        ModeArg::Cnd => check_cnd(m, tol),
    }
    .map_err(CliError::usage)
}

#[derive(Deserialize)]
struct LaplaceInput {
    samples: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct RecoverOutput<'a> {
    #[serde(flatten)]
    result: &'a radial_gram::moments::RecoveryResult,
}

fn cmd_recover(file: &str, k: usize, kind: KindArg, format: Format) -> Result<(), CliError> {
    let result = match kind {
        KindArg::Moments => {
            let ms: MomentSequence = read_json(file)?;
            let feas = hankel_feasible(&ms, 1e-9).map_err(CliError::usage)?;
            if !feas.feasible() {
                eprintln!("{}", serde_json::to_string_pretty(&feas).unwrap());
                return Err(CliError::Rejected(
                    "moment sequence fails Hankel feasibility".into(),
                ));
            }
            recover_measure(&ms, k)
        }
        KindArg::Laplace => {
            let input: LaplaceInput = read_json(file)?;
            recover_laplace(&input.samples, k)
        }
    };
    let result = match result {
        Ok(r) => r,
        Err(
            e @ (MomentError::InfeasibleAtK { .. } | MomentError::RootsDiverged),
        ) => return Err(CliError::Rejected(e.to_string())),
        Err(e) => return Err(CliError::usage(e)),
    };
    match format {
        Format::Text => {
            for a in result.measure.atoms() {
                println!("atom {} weight {}", a.loc, a.w);
            }
            if result.measure.infinity_weight() != 0.0 {
                println!("jump {}", result.measure.infinity_weight());
            }
            println!("residual {}", result.residual);
        }
        _ => println!(
            "{}",
            serde_json::to_string_pretty(&RecoverOutput { result: &result }).unwrap()
        ),
    }
    Ok(())
}

fn cmd_family(file: &str, format: Format) -> Result<(), CliError> {
    let spec: FamilySpec = read_json(file)?;
    let rejected = |e: radial_gram::transfer::TransferError| CliError::Rejected(e.to_string());
    match spec.space() {
        FamilySpace::FreeInt => {
            let fam = build_family_f(&spec).map_err(CliError::usage)?;
            fam.verify(0.0).map_err(rejected)?;
            print_family(&fam, format);
        }
        FamilySpace::FreeReal(_) => {
            let fam = build_family_r(&spec).map_err(CliError::usage)?;
            fam.verify(1e-12).map_err(rejected)?;
            print_family(&fam, format);
        }
        FamilySpace::DirectSum(_) => {
            let fam = build_family_d(&spec).map_err(CliError::usage)?;
            fam.verify(1e-12).map_err(rejected)?;
            print_family(&fam, format);
        }
    }
    Ok(())
}

fn print_family<W: Word>(fam: &radial_gram::transfer::WitnessFamily<W>, format: Format) {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Entry {
                n: usize,
                k: usize,
                target: f64,
                element: String,
            }
            let mut entries = Vec::new();
            for n in 1..=fam.copies() {
                for k in 1..=fam.targets().len() {
                    entries.push(Entry {
                        n,
                        k,
                        target: fam.targets()[k - 1],
                        element: fam.element(n, k).to_string(),
                    });
                }
            }
            println!("{}", serde_json::to_string_pretty(&entries).unwrap());
        }
        _ => {
            println!(
                "verified family: {} copies x targets {:?}",
                fam.copies(),
                fam.targets()
            );
            for n in 1..=fam.copies() {
                for k in 1..=fam.targets().len() {
                    println!("  ({n},{k}) -> {}", fam.element(n, k));
                }
            }
        }
    }
}
