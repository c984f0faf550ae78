use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use renormvol::conformal::gauss_bonnet_4d;
use renormvol::report::{
    builtin, builtin_scenarios, emit_report, parse_results, run_scenario, run_scenarios, BoundaryVolume, CheckResult,
    Format, Methods, Scenario,
};
use renormvol::scattering::{
    q_from_scattering, scattering_derivative, volume_via_scattering_even, volume_via_scattering_odd,
};
use renormvol::vequation::{compactify, solve_v};
use renormvol::volume::{
    default_eps_grid, epstein_volume, volume_expansion_fit_with, volume_expansion_series, FitOptions,
};
use renormvol::{Error, Result};

/// Renormalized volume, Q-curvature and scattering identities on model
/// Poincaré–Einstein geometries.
#[derive(Parser)]
#[command(name = "renormvol", version)]
struct Cli {
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Built-in scenarios.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
    /// Volume expansion coefficients by series and ε-fit.
    Volume(ScenarioArgs),
    /// Solve `-Δv = n` and extract `B₀`, `Q_n`.
    Vsolve(ScenarioArgs),
    /// Gauss–Bonnet assembly for the compactified metric `e^{2v} g`.
    Gb(ScenarioArgs),
    /// Scattering value and its derivative at `s = n`.
    Scatter(ScenarioArgs),
    /// Run every applicable check for one scenario.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run every built-in scenario.
    VerifyAll {
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
    },
    /// Re-emit a JSON results file.
    Report {
        results: PathBuf,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
    },
}

#[derive(Subcommand)]
enum ModelsAction {
    List,
}

#[derive(Args, Default)]
struct ScenarioArgs {
    /// Built-in scenario name or path to a TOML scenario.
    scenario: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<i32>,
    /// A positive number or `default`.
    #[arg(long, allow_hyphen_values = true)]
    boundary_volume: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    euler_char: Option<i64>,
    /// Per-check tolerance, repeatable.
    #[arg(long = "tolerance", value_name = "CHECK=TOL")]
    tolerances: Vec<String>,
    /// Subset of series, fit, scattering, bvp.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long, allow_hyphen_values = true)]
    b0_perturbation: Option<f64>,
    #[arg(long)]
    fit_log_term: Option<bool>,
    #[arg(long, allow_hyphen_values = true)]
    warp_perturbation: Option<f64>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<Scenario> {
        let mut s = match (&self.config, &self.scenario) {
            (Some(_), Some(_)) => return Err(usage("give either a scenario or --config, not both")),
            (Some(p), None) => Scenario::from_toml(&read(p)?)?,
            (None, Some(name)) if Path::new(name).is_file() => Scenario::from_toml(&read(Path::new(name))?)?,
            (None, Some(name)) => builtin(name)?,
            (None, None) => match self.n {
                Some(n) => Scenario::new("custom", n, 1),
                None => return Err(usage("no scenario: give a name, --config, or --n")),
            },
        };
        if let Some(v) = &self.name {
            s.name = v.clone();
        }
        if let Some(v) = self.n {
            s.n = v;
        }
        if let Some(v) = self.kappa {
            s.kappa = v;
        }
        if let Some(v) = &self.boundary_volume {
            s.boundary_volume = match v.parse::<f64>() {
                Ok(x) => BoundaryVolume::Value(x),
                Err(_) => BoundaryVolume::Keyword(v.clone()),
            };
        }
        if let Some(v) = self.euler_char {
            s.euler_char = Some(v);
        }
        for t in &self.tolerances {
            let (k, v) = t.split_once('=').ok_or_else(|| usage(format!("--tolerance expects CHECK=TOL, got {t:?}")))?;
            let v: f64 = v.parse().map_err(|_| usage(format!("bad tolerance {v:?}")))?;
            s.tolerances.insert(k.to_string(), v);
        }
        if let Some(ms) = &self.methods {
            let mut m = Methods { series: false, fit: false, scattering: false, bvp: false };
            for name in ms {
                match name.as_str() {
                    "series" => m.series = true,
                    "fit" => m.fit = true,
                    "scattering" => m.scattering = true,
                    "bvp" => m.bvp = true,
                    other => return Err(usage(format!("unknown method {other:?}"))),
                }
            }
            s.methods = m;
        }
        if let Some(v) = self.b0_perturbation {
            s.b0_perturbation = v;
        }
        if let Some(v) = self.fit_log_term {
            s.fit_log_term = v;
        }
        if let Some(v) = self.warp_perturbation {
            s.warp_perturbation = v;
        }
        s.validate()?;
        Ok(s)
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).unwrap_or_default() + "\n"
}

fn volume(s: &Scenario) -> Result<String> {
    let m = s.model()?;
    let series = volume_expansion_series(&m)?;
    let opts = FitOptions { log_term: s.fit_log_term, ..FitOptions::default() };
    let fit = volume_expansion_fit_with(&m, &default_eps_grid(&m), opts)?;
    let mut out = json!({ "scenario": s.name, "series": series, "fit": fit });
    if s.n % 2 == 1 && s.volume()?.is_none() {
        let (v_hyp, v_eps) = epstein_volume(s.n, s.chi())?;
        out["hyperbolic_formula"] = json!(v_hyp);
        out["epstein_formula"] = json!(v_eps);
    }
    Ok(pretty(&out))
}

fn vsolve(s: &Scenario) -> Result<String> {
    let sol = solve_v(&s.model()?)?;
    let mut out = sol.summary_json();
    out["scenario"] = json!(s.name);
    Ok(pretty(&out))
}

fn gb(s: &Scenario) -> Result<String> {
    let compact = compactify(&solve_v(&s.model()?)?)?;
    let r = gauss_bonnet_4d(&compact)?;
    Ok(pretty(&json!({ "scenario": s.name, "gauss_bonnet": r })))
}

fn scatter(s: &Scenario) -> Result<String> {
    let m = s.model()?;
    let d = scattering_derivative(&m)?;
    let mut out = json!({ "scenario": s.name, "derivative": d });
    if s.n % 2 == 1 {
        out["V"] = json!(volume_via_scattering_odd(&m)?);
    } else {
        out["Q"] = json!(q_from_scattering(&m)?);
        if s.n <= 4 {
            out["volume"] = json!(volume_via_scattering_even(&m)?);
        }
    }
    Ok(pretty(&out))
}

fn all_passed(rs: &[CheckResult]) -> bool {
    rs.iter().all(|r| r.passed)
}

/// Output and whether every check passed.
fn execute(cmd: &Command) -> Result<(String, bool)> {
    match cmd {
        Command::Models { action: ModelsAction::List } => {
            let mut out = String::from("name\tn\tkappa\n");
            for s in builtin_scenarios() {
                out += &format!("{}\t{}\t{}\n", s.name, s.n, s.kappa);
            }
            Ok((out, true))
        }
        Command::Volume(a) => Ok((volume(&a.resolve()?)?, true)),
        Command::Vsolve(a) => Ok((vsolve(&a.resolve()?)?, true)),
        Command::Gb(a) => Ok((gb(&a.resolve()?)?, true)),
        Command::Scatter(a) => Ok((scatter(&a.resolve()?)?, true)),
        Command::Run { scenario, format } => {
            let rs = run_scenario(&scenario.resolve()?)?;
            Ok((emit_report(&rs, *format)?, all_passed(&rs)))
        }
        Command::VerifyAll { format } => {
            let rs: Vec<CheckResult> =
                run_scenarios(&builtin_scenarios())?.into_iter().flat_map(|(_, r)| r).collect();
            Ok((emit_report(&rs, *format)?, all_passed(&rs)))
        }
        Command::Report { results, format } => {
            let rs = parse_results(&read(results)?)?;
            Ok((emit_report(&rs, *format)?, all_passed(&rs)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok((text, passed)) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &text).map_err(|e| format!("cannot write {}: {e}", p.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if passed { 0 } else { 1 })
        }
        Err(e @ (Error::Config { .. } | Error::Usage(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
