use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use shadowlab::document::{load_from_path, save_to_path, to_json_string};
use shadowlab::expansivity::{
    gamma_plus, gamma_two_sided, n_expansivity_radius, positive_expansivity_radius, restrict_to_core, surjective_core,
};
use shadowlab::generators::{Boundary, GeneratorSpec, RandomMode, Sided};
use shadowlab::harness::{emit_report, run_suite, EpsPolicy, Format, HarnessOptions, Suite};
use shadowlab::multiplicity::max_shadower_count;
use shadowlab::shadowing::{decide, modulus};
use shadowlab::system::validate_system;
use shadowlab::{Budget, Error, ExactRational, ShadowingKind, Threshold};

#[derive(Parser)]
#[command(name = "shadowlab", version, about = "Exact shadowing and expansivity analysis of finite systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    NotOnto,
    NExpansive,
    IdentityCantor,
    PeriodicShift,
    Cycle,
    TwoFixed,
    Merge,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Forward,
    Backward,
    Twosided,
    H,
    Slimit,
}

impl From<Kind> for ShadowingKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Forward => ShadowingKind::Forward,
            Kind::Backward => ShadowingKind::Backward,
            Kind::Twosided => ShadowingKind::TwoSided,
            Kind::H => ShadowingKind::H,
            Kind::Slimit => ShadowingKind::SLimit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpMode {
    Positive,
    Twosided,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Md,
}

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    Threshold::parse(s)
}

fn parse_rational(s: &str) -> Result<ExactRational, String> {
    ExactRational::parse_canonical(s)
}

#[derive(Subcommand)]
enum Command {
    /// Generate an example system document.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "K")]
        k_levels: Option<u32>,
        #[arg(long = "M")]
        m_copies: Option<u32>,
        #[arg(long = "N")]
        depth: Option<u32>,
        /// Cycle length.
        #[arg(long)]
        k: Option<usize>,
        /// Distance for the two-fixed-points system.
        #[arg(long, value_parser = parse_rational)]
        d: Option<ExactRational>,
        #[arg(long)]
        alphabet: Option<usize>,
        #[arg(long)]
        period: Option<usize>,
        #[arg(long, default_value = "two")]
        sided: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value = "plane")]
        mode: String,
        #[arg(long, default_value = "open")]
        boundary: String,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Check a system document against the system invariants.
    Validate { file: PathBuf },
    /// Optimal delta for a shadowing property at the given epsilon.
    Modulus {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_parser = parse_threshold)]
        eps: Threshold,
        #[arg(long, default_value_t = Budget::default().0)]
        budget: usize,
        file: PathBuf,
    },
    /// Decide a shadowing property at fixed epsilon and delta.
    Decide {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_parser = parse_threshold)]
        eps: Threshold,
        #[arg(long, value_parser = parse_threshold)]
        delta: Threshold,
        #[arg(long, default_value_t = Budget::default().0)]
        budget: usize,
        file: PathBuf,
    },
    /// Positive or two-sided n-expansivity radius.
    Expansivity {
        #[arg(long, value_enum)]
        mode: ExpMode,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = Budget::default().0)]
        budget: usize,
        file: PathBuf,
    },
    /// Gamma set of a point.
    Gamma {
        #[arg(long)]
        point: String,
        #[arg(long, value_parser = parse_threshold)]
        r: Threshold,
        #[arg(long)]
        twosided: bool,
        file: PathBuf,
    },
    /// Maximal number of eternal shadowers of a single pseudo-orbit.
    Count {
        #[arg(long, value_parser = parse_threshold)]
        eps: Threshold,
        #[arg(long, value_parser = parse_threshold)]
        delta: Threshold,
        #[arg(long, default_value_t = 3)]
        cap: usize,
        #[arg(long, default_value_t = Budget::default().0)]
        budget: usize,
        file: PathBuf,
    },
    /// Surjective core, optionally writing the restricted system.
    Core {
        file: PathBuf,
        #[arg(long)]
        restrict: bool,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Run verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Comma-separated epsilon values; defaults to the pair lattice.
        #[arg(long, value_delimiter = ',', value_parser = parse_threshold)]
        eps_list: Vec<Threshold>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = Budget::default().0)]
        budget: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
        /// Include per-check wall time in the report.
        #[arg(long)]
        timings: bool,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        file: PathBuf,
    },
}

enum Outcome {
    Ok,
    PropertyFails,
}

fn need<T>(v: Option<T>, name: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::Generator(format!("missing --{name}")))
}

fn choice<T: Copy>(value: &str, name: &str, options: &[(&str, T)]) -> Result<T, Error> {
    options
        .iter()
        .find(|(k, _)| *k == value)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Generator(format!("unknown --{name} value {value:?}")))
}

fn print(text: &str, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn print_json(v: &serde_json::Value) -> Result<(), Error> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    print(&s, None)
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Gen {
            family,
            n,
            k_levels,
            m_copies,
            depth,
            k,
            d,
            alphabet,
            period,
            sided,
            seed,
            points,
            mode,
            boundary,
            output,
        } => {
            let sided = choice(&sided, "sided", &[("one", Sided::One), ("two", Sided::Two)])?;
            let mode = choice(&mode, "mode", &[("plane", RandomMode::Plane), ("matrix", RandomMode::Matrix)])?;
            let boundary = choice(&boundary, "boundary", &[("open", Boundary::Open), ("loop", Boundary::Loop)])?;
            let spec = match family {
                Family::NotOnto => GeneratorSpec::NotOnto { depth: need(depth, "N")? },
                Family::NExpansive => GeneratorSpec::NExpansive {
                    n: need(n, "n")?,
                    k: need(k_levels, "K")?,
                    m: m_copies.unwrap_or(0),
                    boundary,
                },
                Family::IdentityCantor => GeneratorSpec::IdentityCantor { depth: need(depth, "N")? },
                Family::PeriodicShift => GeneratorSpec::PeriodicShift {
                    alphabet: need(alphabet, "alphabet")?,
                    period: need(period, "period")?,
                    sided,
                },
                Family::Cycle => GeneratorSpec::Cycle { k: need(k, "k")? },
                Family::TwoFixed => GeneratorSpec::TwoFixed {
                    d: d.unwrap_or_else(ExactRational::one),
                },
                Family::Merge => GeneratorSpec::Merge,
                Family::Random => GeneratorSpec::Random {
                    seed: need(seed, "seed")?,
                    points: need(points, "points")?,
                    mode,
                },
            };
            let sys = spec.generate()?;
            match output {
                Some(p) => save_to_path(&sys, &p)?,
                None => print(&to_json_string(&sys), None)?,
            }
            Ok(Outcome::Ok)
        }
        Command::Validate { file } => {
            let text = std::fs::read_to_string(&file)?;
            let raw = shadowlab::document::parse_raw(&text)?;
            let v = validate_system(&raw);
            if v.is_empty() {
                println!("ok");
                Ok(Outcome::Ok)
            } else {
                Err(Error::Validation(v))
            }
        }
        Command::Modulus { kind, eps, budget, file } => {
            let sys = load_from_path(&file)?;
            let rep = modulus(&sys, kind.into(), &eps, Budget(budget))?;
            print_json(&rep.to_json(&sys))?;
            Ok(Outcome::Ok)
        }
        Command::Decide {
            kind,
            eps,
            delta,
            budget,
            file,
        } => {
            let sys = load_from_path(&file)?;
            let kind: ShadowingKind = kind.into();
            let v = decide(&sys, kind, &eps, &delta, Budget(budget))?;
            print_json(&json!({
                "kind": kind.name(),
                "epsilon": eps.to_string(),
                "delta": delta.to_string(),
                "holds": v.holds(),
                "witness": v.witness().map(|w| sys.labels_of(&w.nodes)),
            }))?;
            Ok(if v.holds() { Outcome::Ok } else { Outcome::PropertyFails })
        }
        Command::Expansivity { mode, n, budget, file } => {
            let sys = load_from_path(&file)?;
            let out = match mode {
                ExpMode::Positive => json!({
                    "mode": "positive",
                    "n": n,
                    "radius": positive_expansivity_radius(&sys, n)?.to_string(),
                }),
                ExpMode::Twosided => {
                    let r = n_expansivity_radius(&sys, n, Budget(budget))?;
                    json!({
                        "mode": "twosided",
                        "n": n,
                        "radius": r.radius.to_string(),
                        "vacuous": r.vacuous,
                    })
                }
            };
            print_json(&out)?;
            Ok(Outcome::Ok)
        }
        Command::Gamma { point, r, twosided, file } => {
            let sys = load_from_path(&file)?;
            let x = sys.id_of(&point)?;
            let g = if twosided {
                gamma_two_sided(&sys, x, &r)?
            } else {
                gamma_plus(&sys, x, &r)?
            };
            print_json(&g.to_json(&sys))?;
            Ok(Outcome::Ok)
        }
        Command::Count {
            eps,
            delta,
            cap,
            budget,
            file,
        } => {
            let sys = load_from_path(&file)?;
            let rep = max_shadower_count(&sys, &eps, &delta, cap, Budget(budget))?;
            print_json(&rep.to_json(&sys))?;
            Ok(Outcome::Ok)
        }
        Command::Core { file, restrict, output } => {
            let sys = load_from_path(&file)?;
            if restrict {
                let k = restrict_to_core(&sys)?;
                match output {
                    Some(p) => save_to_path(&k, &p)?,
                    None => print(&to_json_string(&k), None)?,
                }
            } else {
                print_json(&surjective_core(&sys).to_json(&sys))?;
            }
            Ok(Outcome::Ok)
        }
        Command::Verify {
            suite,
            eps_list,
            n_list,
            budget,
            format,
            timings,
            output,
            file,
        } => {
            let sys = load_from_path(&file)?;
            let suites = Suite::parse_list(&suite)?;
            let opts = HarnessOptions {
                eps: if eps_list.is_empty() {
                    EpsPolicy::default()
                } else {
                    EpsPolicy::Explicit(eps_list)
                },
                n_list,
                budget: Budget(budget),
                timings,
            };
            let rep = run_suite(&sys, &suites, &opts)?;
            let fmt = match format {
                OutFormat::Json => Format::Json,
                OutFormat::Md => Format::Markdown,
            };
            print(&emit_report(&rep, fmt), output.as_deref())?;
            Ok(if !rep.all_passed() {
                Outcome::PropertyFails
            } else if rep.any_skipped() && rep.checks.iter().any(|c| matches!(&c.verdict, shadowlab::harness::CheckVerdict::Skipped { reason } if reason.contains("budget"))) {
                return Err(Error::BudgetExceeded { limit: budget });
            } else {
                Outcome::Ok
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::PropertyFails) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
