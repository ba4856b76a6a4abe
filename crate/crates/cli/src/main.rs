use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arcsep::io::{parse_cut, parse_instance, ParsedInstance};
use arcsep::knapsack::exact_maximum;
use arcsep::netdesign::{self, GeneratorSettings, NetworkError, NetworkInstance, RootLoopSettings};
use arcsep::oracle::{self, OracleError};
use arcsep::separator::choose_normalized_facility;
use arcsep::{separate, ArcSetInstance, LiftOrder, SeparatorOptions, Verdict, VIOLATION_TOL};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

mod render;

const EXIT_MEMBER: u8 = 0;
const EXIT_VIOLATED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "arcsep", version, about = "Exact separation for unsplittable flow arc sets")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for generated instances.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Smallest violation for which a cut is reported.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Separate the point stored in an arc-set instance file.
    Separate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Order::Lift4)]
        lift_order: Order,
        /// Skip the closed-form cases and always use row generation.
        #[arg(long)]
        no_closed_forms: bool,
        /// Disable greedy strengthening of row-generation points.
        #[arg(long)]
        no_strengthen: bool,
    },
    /// Check a cut against an arc set: validity, violation and facet rank.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        cut: PathBuf,
    },
    /// Run the root cutting-plane loop on a network.
    Cutloop {
        #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
        instance: Option<PathBuf>,
        /// `profile,seed,nodes,commodities`, for example `3_1_1,42,12,5`.
        #[arg(long)]
        gen: Option<String>,
        #[arg(long, value_enum, default_value_t = Order::Lift4)]
        lift_order: Order,
        #[arg(long, default_value_t = 50)]
        max_rounds: usize,
        /// Rerouting sweeps for the upper bound.
        #[arg(long, default_value_t = 5)]
        ub_passes: usize,
    },
    /// Generate a network instance from a module profile.
    Gen {
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 12)]
        nodes: usize,
        #[arg(long, default_value_t = 5)]
        commodities: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare the separator's verdict with brute-force membership.
    OracleCheck {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Lift1,
    Lift2,
    Lift3,
    Lift4,
}

impl From<Order> for LiftOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::Lift1 => LiftOrder::Lift1,
            Order::Lift2 => LiftOrder::Lift2,
            Order::Lift3 => LiftOrder::Lift3,
            Order::Lift4 => LiftOrder::Lift4,
        }
    }
}

/// Result of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub cut: String,
    pub valid: bool,
    /// Largest value of `alpha.x - beta.y - gamma` over the set; absent when unbounded.
    pub max_value: Option<f64>,
    pub witness: Option<Witness>,
    /// Violation at the instance's point, when it has one.
    pub violation: Option<f64>,
    pub rank: Option<usize>,
    pub dimension: usize,
    pub facet: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<u8>,
    pub y: Vec<i64>,
}

/// Result of `oracle-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckReport {
    pub separator_verdict: Verdict,
    pub cut_dropped: bool,
    pub separator_violation: f64,
    pub oracle_member: bool,
    /// Optimum of the full separation LP with the normalized facility's coefficient at one.
    pub oracle_value: f64,
    pub oracle_cut: String,
    pub agree: bool,
}

enum Failure {
    Input(String),
    Infeasible(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
            Failure::Budget(_) => EXIT_BUDGET,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Infeasible(m) | Failure::Budget(m) => m,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<ParsedInstance, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn oracle_failure(e: OracleError) -> Failure {
    match e {
        OracleError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

fn emit<T: Serialize>(value: &T, format: Format) {
    let json = serde_json::to_value(value).expect("reports serialize");
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&json).expect("value serializes")),
        Format::Text => print!("{}", render::text(&json)),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let shared = &cli.shared;
    let min_violation = shared.tolerance.unwrap_or(VIOLATION_TOL);
    if !(min_violation.is_finite() && min_violation >= 0.0) {
        return Err(Failure::Input(format!("tolerance {min_violation} must be a nonnegative number")));
    }
    match cli.command {
        Command::Separate { instance, lift_order, no_closed_forms, no_strengthen } => {
            let parsed = load_instance(&instance)?;
            let point = parsed.point.ok_or_else(|| Failure::Input(format!("{}: no point to separate", instance.display())))?;
            let opts = SeparatorOptions {
                lift_order: lift_order.into(),
                use_closed_forms: !no_closed_forms,
                strengthen: !no_strengthen,
                min_violation,
                ..Default::default()
            };
            let rep = separate(&parsed.instance, &point, &opts).map_err(|e| Failure::Input(e.to_string()))?;
            emit(&rep, shared.format);
            Ok(if rep.verdict == Verdict::Violated { EXIT_VIOLATED } else { EXIT_MEMBER })
        }
        Command::Verify { instance, cut } => {
            let parsed = load_instance(&instance)?;
            let inst = &parsed.instance;
            let cut = parse_cut(&read(&cut)?, inst.num_commodities(), inst.num_facilities())
                .map_err(|e| Failure::Input(format!("{}: {e}", cut.display())))?;
            let rep = verify(inst, &cut, parsed.point.as_ref())?;
            emit(&rep, shared.format);
            Ok(if rep.valid { EXIT_MEMBER } else { EXIT_VIOLATED })
        }
        Command::Cutloop { instance, gen, lift_order, max_rounds, ub_passes } => {
            let net = match (instance, gen) {
                (Some(path), _) => serde_json::from_str::<NetworkInstance>(&read(&path)?)
                    .map_err(|e| Failure::Input(format!("{}: line {}: {e}", path.display(), e.line())))?,
                (None, Some(spec)) => generate_from_spec(&spec)?,
                (None, None) => return Err(Failure::Input("give --instance or --gen".into())),
            };
            let settings = RootLoopSettings {
                max_rounds,
                lift_order: lift_order.into(),
                upper_bound_passes: Some(ub_passes),
                min_violation,
                ..Default::default()
            };
            let rep = netdesign::root_cut_loop(&net, &settings).map_err(|e| match e {
                NetworkError::Infeasible | NetworkError::Disconnected(_) => Failure::Infeasible(e.to_string()),
                other => Failure::Input(other.to_string()),
            })?;
            emit(&rep, shared.format);
            Ok(EXIT_MEMBER)
        }
        Command::Gen { profile, nodes, commodities, output } => {
            let p = netdesign::profile(&profile).map_err(|e| Failure::Input(e.to_string()))?;
            let settings = GeneratorSettings { nodes, commodities, ..Default::default() };
            let net = netdesign::generate(shared.seed, &p, &settings).map_err(|e| Failure::Input(e.to_string()))?;
            match output {
                Some(path) => {
                    let json = serde_json::to_string_pretty(&net).expect("instances serialize");
                    fs::write(&path, json + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                }
                None => emit(&net, shared.format),
            }
            Ok(EXIT_MEMBER)
        }
        Command::OracleCheck { instance } => {
            let parsed = load_instance(&instance)?;
            let inst = &parsed.instance;
            let point = parsed.point.ok_or_else(|| Failure::Input(format!("{}: no point to check", instance.display())))?;
            let cat = oracle::PointCatalogue::build(inst).map_err(oracle_failure)?;
            let member = oracle::membership_in(&cat, &point).map_err(oracle_failure)?;
            let norm = choose_normalized_facility(inst.capacities(), &point.y);
            let full = oracle::full_separation_in(&cat, &point, norm).map_err(oracle_failure)?;
            let opts = SeparatorOptions { min_violation, ..Default::default() };
            let rep = separate(inst, &point, &opts).map_err(|e| Failure::Input(e.to_string()))?;
            let says_member = rep.verdict == Verdict::Member && rep.dropped.is_none();
            let out = OracleCheckReport {
                separator_verdict: rep.verdict,
                cut_dropped: rep.dropped.is_some(),
                separator_violation: rep.normalized_violation,
                oracle_member: member,
                oracle_value: full.value,
                oracle_cut: full.cut.render(),
                agree: says_member == member,
            };
            emit(&out, shared.format);
            Ok(if out.agree { EXIT_MEMBER } else { EXIT_VIOLATED })
        }
    }
}

fn verify(inst: &ArcSetInstance, cut: &arcsep::CutInequality, point: Option<&arcsep::FracPoint>) -> Result<VerifyReport, Failure> {
    let int = cut
        .integer_multiple(1_000_000)
        .ok_or_else(|| Failure::Input("cut coefficients need rational forms with denominators up to 10^6".into()))?;
    let best = exact_maximum(inst, &int);
    let valid = best.as_ref().is_some_and(|a| a.value <= 0);
    let (max_value, witness) = match best {
        Some(ans) => {
            let x: Vec<f64> = ans.x.iter().map(|&v| v as f64).collect();
            let y: Vec<f64> = ans.y.iter().map(|&v| v as f64).collect();
            let value = cut.violation(&arcsep::FracPoint::new(x, y));
            (Some(value), Some(Witness { x: ans.x, y: ans.y }))
        }
        None => (None, None),
    };
    let rank = if valid {
        Some(oracle::facet_rank(inst, cut).map_err(oracle_failure)?)
    } else {
        // still refuse beyond the budget so exit codes do not depend on validity
        oracle::PointCatalogue::build(inst).map_err(oracle_failure)?;
        None
    };
    let dimension = inst.num_commodities() + inst.num_facilities();
    Ok(VerifyReport {
        cut: cut.render(),
        valid,
        max_value,
        witness,
        violation: point.map(|p| cut.violation(p)),
        facet: rank.as_ref().is_some_and(|r| r.is_facet()),
        rank: rank.map(|r| r.rank),
        dimension,
    })
}

fn generate_from_spec(spec: &str) -> Result<NetworkInstance, Failure> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Failure::Input(format!("--gen `{spec}`: expected profile,seed,nodes,commodities"));
    let [name, seed, nodes, commodities] = parts.as_slice() else { return Err(bad()) };
    let p = netdesign::profile(name).map_err(|e| Failure::Input(e.to_string()))?;
    let settings = GeneratorSettings {
        nodes: nodes.parse().map_err(|_| bad())?,
        commodities: commodities.parse().map_err(|_| bad())?,
        ..Default::default()
    };
    netdesign::generate(seed.parse().map_err(|_| bad())?, &p, &settings).map_err(|e| Failure::Input(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
