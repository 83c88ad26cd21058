//! `lounge`: reproducible experiments on the queue-with-lounge model.
//!
//! Every command reads parameters from a flat key-value config file and/or
//! flags (flags win), writes machine-readable artifacts (RFC-4180 CSV,
//! stable-key JSON) into `--out-dir` (default `$LOUNGE_OUT_DIR`, then `.`),
//! and exits 0 on success, 1 on validation/config errors, 2 on numerical
//! failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lounge_core::*;

#[derive(Parser)]
#[command(
    name = "lounge",
    version,
    about = "Queue-with-lounge model experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the decision thresholds (A, B) and related quantities.
    Thresholds(ParamArgs),
    /// Evaluate both waiting costs and the join decision at one state.
    Decide(DecideArgs),
    /// Compute a closed-form stationary distribution and its moments.
    Analyze(AnalyzeArgs),
    /// Cross-check the brute-force oracle against the closed forms.
    OracleValidate(OracleValidateArgs),
    /// Run the event-driven simulator.
    Simulate(SimulateArgs),
    /// Sweep nu downward and measure closed-form-vs-system distance.
    ConjectureSweep(ConjectureSweepArgs),
    /// Optimize the lounge design over an (omega, rho) grid.
    DesignSweep(DesignSweepArgs),
    /// Run the full oracle-vs-closed-form suite and print a pass/fail table.
    Validate(ValidateArgs),
}

/// Model parameters, from a config file and/or flags (flags override).
#[derive(Args, Clone)]
struct ParamArgs {
    /// Flat key-value config file (keys: lambda, mu, nu, alpha, beta | eta).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Arrival rate.
    #[arg(long)]
    lambda: Option<f64>,
    /// Service rate.
    #[arg(long)]
    mu: Option<f64>,
    /// Lounge-exit rate.
    #[arg(long)]
    nu: Option<f64>,
    /// Queue waiting cost rate.
    #[arg(long)]
    alpha: Option<f64>,
    /// Lounge waiting cost rate (conflicts with --eta).
    #[arg(long, conflicts_with = "eta")]
    beta: Option<f64>,
    /// Comfort factor beta/nu; sets beta = eta * nu.
    #[arg(long)]
    eta: Option<f64>,
}

impl ParamArgs {
    /// The merged raw key-value map, before interpretation.
    fn merged_map(&self) -> anyhow::Result<BTreeMap<String, f64>> {
        let mut map = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_config_str(&text)?
            }
            None => BTreeMap::new(),
        };
        let overrides = [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("nu", self.nu),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("eta", self.eta),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                // an override replaces the file's choice of beta-vs-eta too
                if key == "beta" {
                    map.remove("eta");
                }
                if key == "eta" {
                    map.remove("beta");
                }
                map.insert(key.to_string(), v);
            }
        }
        Ok(map)
    }

    fn resolve(&self) -> anyhow::Result<SystemParams> {
        Ok(SystemParams::from_config_map(&self.merged_map()?)?)
    }
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output directory for artifacts [env: LOUNGE_OUT_DIR, then "."].
    #[arg(long, env = "LOUNGE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

impl OutArgs {
    fn path(&self, name: &str) -> anyhow::Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("cannot create {}", self.out_dir.display()))?;
        Ok(self.out_dir.join(name))
    }
}

#[derive(Args)]
struct DecideArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Observed queue length.
    #[arg(long)]
    q: u32,
    /// Observed lounge occupancy.
    #[arg(long)]
    l: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Pick b1 when the derived lounge threshold is 1, approx otherwise.
    Auto,
    /// Exact closed form of the B=1 system.
    B1,
    /// Closed form of the vanishing-nu approximating system.
    Approx,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, value_enum, default_value_t = Model::Auto)]
    model: Model,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct OracleValidateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Queue truncation for the oracle (default: geometric-tail bound).
    #[arg(long)]
    q_max: Option<u32>,
    /// Also export the generator as sparse triplet CSV (row,col,rate).
    #[arg(long)]
    export_generator: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Threshold,
    CostRule,
}

impl From<PolicyArg> for PolicyVariant {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Threshold => PolicyVariant::Threshold,
            PolicyArg::CostRule => PolicyVariant::CostRule,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, default_value_t = SimConfig::default().seed)]
    seed: u64,
    /// Events per replication.
    #[arg(long, default_value_t = SimConfig::default().events)]
    events: u64,
    /// Fraction of simulated time discarded as warmup.
    #[arg(long, default_value_t = SimConfig::default().warmup_fraction)]
    warmup: f64,
    #[arg(long, default_value_t = SimConfig::default().replications)]
    reps: u32,
    #[arg(long, value_enum, default_value_t = PolicyArg::Threshold)]
    policy: PolicyArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepMode {
    Oracle,
    MonteCarlo,
}

#[derive(Args)]
struct ConjectureSweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Lounge-exit rates to sweep, best given in decreasing order.
    #[arg(long, value_delimiter = ',', default_values_t = [0.4, 0.2, 0.1, 0.05])]
    nu_list: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SweepMode::Oracle)]
    mode: SweepMode,
    /// Monte Carlo events per replication.
    #[arg(long, default_value_t = 1_000_000)]
    events: u64,
    #[arg(long, default_value_t = 4)]
    reps: u32,
    #[arg(long, default_value_t = SimConfig::default().seed)]
    seed: u64,
}

#[derive(Args)]
struct DesignSweepArgs {
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, default_value_t = 2.5)]
    mu: f64,
    #[arg(long, default_value_t = 0.1)]
    nu: f64,
    /// Lounge congestion weights.
    #[arg(long, value_delimiter = ',', default_values_t = [1.2])]
    omega: Vec<f64>,
    /// Load factors.
    #[arg(long, value_delimiter = ',', default_values_t = [0.4, 0.55, 0.7])]
    rho: Vec<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    out: OutArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<Error>() {
                Some(Error::InvalidParams(_)) | Some(Error::Config(_)) => 1,
                Some(_) => 2,
                None => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Thresholds(args) => {
            let params = args.resolve()?;
            let t = derive_thresholds(&params);
            print_json(&t)?;
        }
        Command::Decide(args) => cmd_decide(args)?,
        Command::Analyze(args) => cmd_analyze(args)?,
        Command::OracleValidate(args) => cmd_oracle_validate(args)?,
        Command::Simulate(args) => cmd_simulate(args)?,
        Command::ConjectureSweep(args) => cmd_conjecture_sweep(args)?,
        Command::DesignSweep(args) => cmd_design_sweep(args)?,
        Command::Validate(args) => return cmd_validate(args),
    }
    Ok(ExitCode::SUCCESS)
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_decide(args: DecideArgs) -> anyhow::Result<()> {
    let params = args.params.resolve()?;
    let state = ObservedState::new(args.q, args.l);
    #[derive(Serialize)]
    struct Out {
        state: ObservedState,
        cost_join_queue: f64,
        cost_join_lounge: f64,
        action: Action,
    }
    print_json(&Out {
        state,
        cost_join_queue: cost_join_queue(state, &params),
        cost_join_lounge: cost_join_lounge(state, &params),
        action: decide(state, &params),
    })
}

fn cmd_analyze(args: AnalyzeArgs) -> anyhow::Result<()> {
    let params = args.params.resolve()?;
    let t = derive_thresholds(&params);
    let rho = params.rho();
    let model = match args.model {
        Model::Auto if t.b_int == 1 => Model::B1,
        Model::Auto => Model::Approx,
        m => m,
    };
    let (name, dist) = match model {
        Model::B1 => {
            let q_max = truncation_point(rho, DEFAULT_TAIL_TOL).max(t.a_int + 2);
            ("b1", b1_stationary(&params, q_max)?)
        }
        Model::Approx => {
            let l_max = truncation_point(rho, DEFAULT_TAIL_TOL);
            ("approx", approx_stationary(rho, t.a_int, l_max))
        }
        Model::Auto => unreachable!(),
    };
    let (ext, file) = match args.format {
        Format::Csv => ("csv", None),
        Format::Json => ("json", Some(serde_json::to_string_pretty(&dist)?)),
    };
    let path = args.out.path(&format!("analysis_{name}.{ext}"))?;
    match file {
        Some(json) => fs::write(&path, json)?,
        None => {
            let mut buf = Vec::new();
            dist.write_csv(&mut buf)?;
            fs::write(&path, buf)?;
        }
    }
    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a str,
        source_tag: SourceTag,
        thresholds: DerivedThresholds,
        mean_q: f64,
        mean_l: f64,
        second_moment_q: f64,
        second_moment_l: f64,
        tail_mass_bound: f64,
        output_path: String,
    }
    print_json(&Out {
        model: name,
        source_tag: dist.source_tag,
        thresholds: t,
        mean_q: dist.mean_q(),
        mean_l: dist.mean_l(),
        second_moment_q: dist.second_moment_q(),
        second_moment_l: dist.second_moment_l(),
        tail_mass_bound: dist.tail_mass_bound,
        output_path: path.display().to_string(),
    })
}

fn cmd_oracle_validate(args: OracleValidateArgs) -> anyhow::Result<()> {
    let params = args.params.resolve()?;
    let t = derive_thresholds(&params);
    let rho = params.rho();
    // an explicit --q-max is taken literally (and may fail as too small);
    // the default is the geometric-tail point, floored at the state-space
    // minimum
    let q_max = args
        .q_max
        .unwrap_or_else(|| truncation_point(rho, DEFAULT_TAIL_TOL).max(t.a_int + t.b_int + 3));
    let gen = build_generator(&params, &t, q_max)?;
    let generator_path = if args.export_generator {
        let path = args.out.path("generator.csv")?;
        let mut buf = Vec::new();
        gen.write_triplet_csv(&mut buf)?;
        fs::write(&path, buf)?;
        Some(path.display().to_string())
    } else {
        None
    };
    let oracle = solve_stationary(&gen, DIRECT_TOL)?;
    // closed-form comparison where one exists; the geometric total-count
    // marginal is checkable for every parameter set
    let sup = if t.b_int == 1 {
        Some(sup_distance(&b1_stationary(&params, q_max)?, &oracle))
    } else {
        None
    };
    let max_marginal_error = (0..q_max)
        .map(|n| (oracle.marginal_total(n) - mm1_pmf(rho, n)).abs())
        .fold(0.0f64, f64::max);
    #[derive(Serialize)]
    struct Out {
        thresholds: DerivedThresholds,
        q_max: u32,
        states: usize,
        sup_distance_vs_b1_closed_form: Option<f64>,
        max_marginal_error_vs_mm1: f64,
        tail_mass_bound: f64,
        generator_path: Option<String>,
    }
    print_json(&Out {
        thresholds: t,
        q_max,
        states: gen.len(),
        sup_distance_vs_b1_closed_form: sup,
        max_marginal_error_vs_mm1: max_marginal_error,
        tail_mass_bound: oracle.tail_mass_bound,
        generator_path,
    })
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let params = args.params.resolve()?;
    let config = SimConfig {
        events: args.events,
        warmup_fraction: args.warmup,
        replications: args.reps,
        seed: args.seed,
        policy: args.policy.into(),
    };
    let result = simulate(&params, &config)?;
    let path = args.out.path("empirical_dist.csv")?;
    let mut buf = Vec::new();
    result.distribution.write_csv(&mut buf)?;
    fs::write(&path, buf)?;
    #[derive(Serialize)]
    struct Out<'a> {
        config: &'a SimConfig,
        result: &'a SimResult,
        output_path: String,
    }
    print_json(&Out {
        config: &config,
        result: &result,
        output_path: path.display().to_string(),
    })
}

fn cmd_conjecture_sweep(args: ConjectureSweepArgs) -> anyhow::Result<()> {
    // the sweep replaces nu and beta; it needs lambda, mu, alpha and eta
    let map = args.params.merged_map()?;
    let get = |k: &str| -> Result<f64> {
        map.get(k)
            .copied()
            .ok_or_else(|| Error::Config(format!("conjecture-sweep needs {k:?}")))
    };
    let (lambda, mu, alpha) = (get("lambda")?, get("mu")?, get("alpha")?);
    let eta = match (map.get("eta"), map.get("beta"), map.get("nu")) {
        (Some(&eta), _, _) => eta,
        (None, Some(&beta), Some(&nu)) => beta / nu,
        _ => {
            return Err(Error::Config("conjecture-sweep needs eta (or beta with nu)".into()).into())
        }
    };
    let method = match args.mode {
        SweepMode::Oracle => SweepMethod::Oracle,
        SweepMode::MonteCarlo => SweepMethod::MonteCarlo,
    };
    let sim_config = SimConfig {
        events: args.events,
        replications: args.reps,
        seed: args.seed,
        ..SimConfig::default()
    };
    let rows = conjecture_sweep(lambda, mu, alpha, eta, &args.nu_list, method, &sim_config)?;
    let path = args.out.path("conjecture_sweep.csv")?;
    let mut csv = String::from("nu,beta,a_int,b_int,distance,ci_half_width\n");
    for r in &rows {
        let ci = r.ci_half_width.map(|c| c.to_string()).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.nu, r.beta, r.a_int, r.b_int, r.distance, ci
        ));
    }
    fs::write(&path, csv)?;
    #[derive(Serialize)]
    struct Out<'a> {
        rows: &'a [SweepRow],
        output_path: String,
    }
    print_json(&Out {
        rows: &rows,
        output_path: path.display().to_string(),
    })
}

fn cmd_design_sweep(args: DesignSweepArgs) -> anyhow::Result<()> {
    let results = design_sweep(args.mu, args.nu, &args.omega, &args.rho)?;
    let path = args.out.path("design_sweep.csv")?;
    let mut csv = String::from("omega,rho,a_star,b_of_a_star,g_star,g_baseline,verdict\n");
    for r in &results {
        let verdict = match r.verdict {
            Verdict::ProvideLounge => "provide-lounge",
            Verdict::NoLounge => "no-lounge",
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.omega, r.rho, r.a_star, r.b_of_a_star, r.g_star, r.g_o, verdict
        ));
    }
    fs::write(&path, csv)?;
    #[derive(Serialize)]
    struct Out<'a> {
        results: &'a [DesignResult],
        output_path: String,
    }
    print_json(&Out {
        results: &results,
        output_path: path.display().to_string(),
    })
}

/// The headline reproduction artifact: a fixed battery of oracle-vs-closed-
/// form cross-checks, printed as a pass/fail table. Exits 1 if any fails.
fn cmd_validate(args: ValidateArgs) -> anyhow::Result<ExitCode> {
    let _ = &args;
    let mut all_ok = true;
    let mut check = |name: &str, outcome: Result<f64>, bound: f64| {
        let (ok, detail) = match outcome {
            Ok(v) => (v < bound, format!("{v:.3e} (bound {bound:.0e})")),
            Err(e) => (false, e.to_string()),
        };
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };

    // B=1 closed form vs oracle
    let p = SystemParams::new(2.0, 2.5, 0.2, 1.0, 0.176)?;
    let t = derive_thresholds(&p);
    let q_max = truncation_point(p.rho(), DEFAULT_TAIL_TOL);
    check(
        "b1 closed form vs oracle (sup norm)",
        (|| {
            let closed = b1_stationary(&p, q_max)?;
            let oracle = solve_stationary(&build_generator(&p, &t, q_max)?, DIRECT_TOL)?;
            Ok(sup_distance(&closed, &oracle))
        })(),
        1e-8,
    );

    // approximating closed form vs oracle, a small (rho, A) grid
    for (rho, a) in [(0.3, 0), (0.5, 3), (0.7, 6)] {
        let outcome = (|| {
            let l_max = truncation_point(rho, DEFAULT_TAIL_TOL);
            let closed = approx_stationary(rho, a, l_max);
            let oracle = solve_stationary(&build_generator_approx(rho, a, l_max), DIRECT_TOL)?;
            Ok(sup_distance(&closed, &oracle))
        })();
        check(
            &format!("approx closed form vs oracle at rho={rho}, A={a} (sup norm)"),
            outcome,
            1e-8,
        );
    }

    // geometric total-count marginal of the b1 closed form
    check(
        "b1 total-count marginal vs M/M/1 (max abs error)",
        (|| {
            let closed = b1_stationary(&p, q_max)?;
            Ok((0..q_max)
                .map(|n| (closed.marginal_total(n) - mm1_pmf(p.rho(), n)).abs())
                .fold(0.0f64, f64::max))
        })(),
        1e-10,
    );

    // closed-form design gap vs numerical congestion cost
    check(
        "heavy-traffic design gap formula vs numerics (abs error)",
        (|| {
            let (rho, mu, nu, omega) = (0.5, 1.0, 0.6, 3.0);
            let d = regime_decision(rho, mu, nu, omega)?;
            let numeric = design::b1_g0_numeric(rho, mu, nu, omega)? - mm1_second_moment(rho);
            Ok((d.g_gap - numeric).abs())
        })(),
        1e-9,
    );

    // simulator against the closed form
    check(
        "simulation vs b1 closed form (sup norm)",
        (|| {
            let cfg = SimConfig {
                events: 2_000_000,
                ..SimConfig::default()
            };
            let sim = simulate(&p, &cfg)?;
            Ok(sup_distance(&b1_stationary(&p, q_max)?, &sim.distribution))
        })(),
        5e-3,
    );

    println!(
        "{}",
        if all_ok {
            "all checks passed"
        } else {
            "FAILURES present"
        }
    );
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
