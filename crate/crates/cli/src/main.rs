use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynalloc::analytic::evaluate;
use dynalloc::experiments::{
    optimal_options, preset, sig10, sim_config, Experiment, KeyValues, PolicyKind, PolicyRef, Servers, PRESETS,
};
use dynalloc::sim::{simulate, SimConfig};
use dynalloc::smdp::{solve_optimal, stationary_metrics, PolicyTable};
use dynalloc::{Error, Metrics, PolicySpec, SystemParams};

#[derive(Parser)]
#[command(name = "dynalloc", version, about = "Dynamic server allocation: policy evaluation, optima, routing and simulation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one policy in closed form (or a policy table exactly).
    Eval {
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Performance-ratio sweep from a config file.
    Sweep(RunArgs),
    /// Routing comparison over transfer times from a config file.
    Routing(RunArgs),
    /// Reproduce the data behind a figure from its built-in preset.
    Figure {
        /// Preset name such as fig5c or fig9d; omit with --list.
        name: Option<String>,
        /// List the available presets.
        #[arg(long)]
        list: bool,
        /// Print the preset's config instead of running it.
        #[arg(long)]
        show: bool,
        /// Override a config key, as key=value.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for an optimal policy and write its table.
    Optimal {
        #[command(flatten)]
        params: ParamArgs,
        /// Server cap: a count or "unlimited".
        #[arg(long, default_value = "1")]
        servers: String,
        /// Fixed request cap; by default the cap is doubled until the objective settles.
        #[arg(long)]
        cap_n: Option<u32>,
        /// Cap on allocations in progress at once.
        #[arg(long)]
        cap_a: Option<u32>,
        /// Where to write the policy table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a policy and report estimates with 95% confidence intervals.
    Simulate {
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Config file for seed, warmup, horizon and replications; flags win.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        warmup: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        replications: Option<usize>,
        /// Write per-replication rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Compare against the exact value; fail if R or C is off by more than 3 standard errors.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
}

impl ParamArgs {
    fn params(&self) -> dynalloc::Result<SystemParams> {
        SystemParams::new(self.lambda, self.mu, self.delta, self.omega)
    }
}

#[derive(Args)]
struct PolicyArgs {
    /// mmk, holdon, batching, one-always, both-dynamic, both-together,
    /// statedep, per-request, reactive, proactive, optimal or table.
    #[arg(long)]
    policy: String,
    #[arg(long)]
    servers: Option<String>,
    /// Holding-time shape: an Erlang stage count or "det".
    #[arg(long)]
    k: Option<String>,
    /// Mean holding time.
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    mu1: Option<String>,
    #[arg(long)]
    mu2: Option<String>,
    /// Rates for statedep, separated by "/".
    #[arg(long)]
    rates: Option<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    cap_a: Option<String>,
    /// Policy table file for --policy table.
    #[arg(long)]
    file: Option<PathBuf>,
}

enum Resolved {
    Spec(PolicySpec),
    Optimal { servers: Servers, cap_a: Option<u32> },
}

impl PolicyArgs {
    fn resolve(&self, p: &SystemParams) -> Result<Resolved, Failure> {
        if self.policy == "table" {
            let path = self.file.as_ref().ok_or_else(|| Failure::usage("--policy table needs --file"))?;
            let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            return Ok(Resolved::Spec(PolicySpec::SmdpTable(PolicyTable::from_text(&text)?)));
        }
        let named = [
            ("servers", &self.servers),
            ("k", &self.k),
            ("T", &self.t),
            ("b", &self.b),
            ("l", &self.l),
            ("h", &self.h),
            ("mu1", &self.mu1),
            ("mu2", &self.mu2),
            ("rates", &self.rates),
            ("s", &self.s),
            ("cap_a", &self.cap_a),
        ];
        let opts: Vec<(String, String)> =
            named.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        let pol = PolicyRef { label: self.policy.clone(), kind: PolicyRef::from_parts(&self.policy, &opts)? };
        match (&pol.kind, pol.spec(p)) {
            (PolicyKind::Optimal { servers, cap_a }, _) => Ok(Resolved::Optimal { servers: *servers, cap_a: *cap_a }),
            (_, Some(spec)) => Ok(Resolved::Spec(spec)),
            _ => unreachable!(),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Config file with flat key = value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a built-in preset instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Override a config key, as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invalid(_) | Error::Parse(_) | Error::MissingState(_) => 2,
            Error::Unstable(_) => 3,
            Error::NonConvergence(_) | Error::Singular(_) => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

fn load_config(file: Option<&PathBuf>, preset_name: Option<&str>, sets: &[String]) -> Result<KeyValues, Failure> {
    let text = match (file, preset_name) {
        (Some(path), _) => fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        (None, Some(name)) => preset(name).ok_or_else(|| Failure::usage(format!("no preset named {name}")))?.to_string(),
        (None, None) => String::new(),
    };
    let mut kv = KeyValues::parse(&text)?;
    for s in sets {
        kv.set(s)?;
    }
    Ok(kv)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_experiment(kv: &KeyValues, expect: Option<&str>, cli_out: Option<&PathBuf>) -> Result<(), Failure> {
    let exp = Experiment::from_config(kv)?;
    match (expect, &exp) {
        (Some("ratio"), Experiment::Routing(_)) => return Err(Failure::usage("this config is a routing experiment; use `routing`")),
        (Some("routing"), Experiment::Ratio(_)) => return Err(Failure::usage("this config is a ratio sweep; use `sweep`")),
        _ => {}
    }
    let csv = exp.run_csv()?;
    let out = cli_out.cloned().or_else(|| kv.get("output").map(PathBuf::from));
    emit(&csv, out.as_ref())
}

fn print_metrics(m: &Metrics, p: &SystemParams) {
    println!("R={} C={} objective={}", sig10(m.r), sig10(m.c), sig10(m.objective(p)));
}

fn exact_metrics(policy: &PolicySpec, p: &SystemParams) -> dynalloc::Result<Metrics> {
    match policy {
        PolicySpec::SmdpTable(t) => stationary_metrics(t, p),
        _ => evaluate(policy, p),
    }
}

/// Distance from the exact value in standard errors; a constant estimate
/// must match exactly.
fn deviation(mean: f64, exact: f64, se: f64) -> f64 {
    let diff = mean - exact;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Eval { policy, params } => {
            let p = params.params()?;
            let m = match policy.resolve(&p)? {
                Resolved::Spec(spec) => exact_metrics(&spec, &p)?,
                Resolved::Optimal { servers, cap_a } => solve_optimal(&p, optimal_options(&p, servers, cap_a))?.metrics()?,
            };
            print_metrics(&m, &p);
        }
        Cmd::Sweep(args) => {
            let kv = load_config(args.config.as_ref(), args.preset.as_deref(), &args.sets)?;
            run_experiment(&kv, Some("ratio"), args.out.as_ref())?;
        }
        Cmd::Routing(args) => {
            let mut kv = load_config(args.config.as_ref(), args.preset.as_deref(), &args.sets)?;
            if kv.get("kind").is_none() {
                kv.set("kind=routing")?;
            }
            run_experiment(&kv, Some("routing"), args.out.as_ref())?;
        }
        Cmd::Figure { name, list, show, sets, out } => {
            if list {
                for (n, _) in PRESETS {
                    println!("{n}");
                }
                return Ok(());
            }
            let name = name.ok_or_else(|| Failure::usage("give a preset name or --list"))?;
            let kv = load_config(None, Some(&name), &sets)?;
            if show {
                print!("{}", preset(&name).unwrap_or_default());
                return Ok(());
            }
            run_experiment(&kv, None, out.as_ref())?;
        }
        Cmd::Optimal { params, servers, cap_n, cap_a, out } => {
            let p = params.params()?;
            let servers = match servers.as_str() {
                "unlimited" => Servers::Unlimited,
                v => Servers::Limited(v.parse().map_err(|_| Failure::usage(format!("--servers: bad value {v:?}")))?),
            };
            let mut opts = optimal_options(&p, servers, cap_a);
            opts.cap_n = cap_n;
            let res = solve_optimal(&p, opts)?;
            let m = res.metrics()?;
            println!("objective={} iterations={} cap_n={}", sig10(res.objective()), res.iterations, res.policy.caps.n);
            print_metrics(&m, &p);
            if let Some(path) = out {
                emit(&res.policy.to_text(), Some(&path))?;
            }
        }
        Cmd::Simulate { policy, params, config, seed, warmup, horizon, replications, csv, check } => {
            let p = params.params()?;
            let base = sim_config(&load_config(config.as_ref(), None, &[])?)?;
            let cfg = SimConfig {
                seed: seed.unwrap_or(base.seed),
                warmup: warmup.unwrap_or(base.warmup),
                horizon: horizon.unwrap_or(base.horizon),
                replications: replications.unwrap_or(base.replications),
            };
            let spec = match policy.resolve(&p)? {
                Resolved::Spec(spec) => spec,
                Resolved::Optimal { servers, cap_a } => {
                    PolicySpec::SmdpTable(solve_optimal(&p, optimal_options(&p, servers, cap_a))?.policy)
                }
            };
            let est = simulate(&spec, &p, &cfg)?;
            println!(
                "R={} ±{} C={} ±{} objective={} ±{} (95% CI, {} replications)",
                sig10(est.r_mean),
                sig10(est.r_ci_halfwidth),
                sig10(est.c_mean),
                sig10(est.c_ci_halfwidth),
                sig10(est.objective_mean),
                sig10(est.objective_ci_halfwidth),
                cfg.replications
            );
            if let Some(path) = csv {
                emit(&est.to_csv(), Some(&path))?;
            }
            if check {
                let exact = exact_metrics(&spec, &p)?;
                let zr = deviation(est.r_mean, exact.r, est.r_std_error());
                let zc = deviation(est.c_mean, exact.c, est.c_std_error());
                println!("exact R={} C={}; deviation in standard errors: R {:.2} C {:.2}", sig10(exact.r), sig10(exact.c), zr, zc);
                if zr.abs() > 3.0 || zc.abs() > 3.0 {
                    return Err(Failure { code: 5, message: "simulation disagrees with the exact value".into() });
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
