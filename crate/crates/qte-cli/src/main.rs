//! `qte-audit`: list and run the seeded audits, or evaluate a single
//! scheme expression.
//!
//! Exit codes: 0 when every executed check passes, 1 when a check fails or
//! an audit stops early, 2 on usage and evaluation errors.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qte::auditctl::{
    emit_reports, eval_attack, eval_scheme, list_audits, run_all, run_audit, AuditCase, AuditReport, ReportFormat,
    SchemeValue, ATTACK_NAMES,
};
use qte::schemes::{
    correctness_gap, correctness_gap_qecmr, correctness_gap_qm, encryption_gap, tamper_profile, DEFAULT_DIM_CAP,
};

#[derive(Parser)]
#[command(name = "qte-audit", version, about = "Seeded audits of tamper-evident encryption schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered audits.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run one audit, or all of them.
    Run(RunArgs),
    /// Work with scheme expressions.
    #[command(subcommand)]
    Scheme(SchemeCommand),
}

#[derive(Args)]
struct RunArgs {
    /// Case id such as T05, or `all`.
    #[arg(long)]
    case: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides each case's default trial count.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long = "dim-cap", default_value_t = DEFAULT_DIM_CAP)]
    dim_cap: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Extra case parameter as name=value; the value is parsed as json
    /// when possible, e.g. `--param n=[2,3]`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Subcommand)]
enum SchemeCommand {
    /// Evaluate a metric of a construction expression.
    Eval(EvalArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Construction expression, e.g. `star(cpp(2), otp_accept)`.
    #[arg(long)]
    expr: String,
    #[arg(long, value_enum, default_value_t = Metric::Eps)]
    metric: Metric,
    /// Attack expression for the `profile` metric.
    #[arg(long, default_value = "identity")]
    attack: String,
    #[arg(long, default_value_t = 0)]
    m0: usize,
    #[arg(long, default_value_t = 1)]
    m1: usize,
    #[arg(long = "dim-cap", default_value_t = DEFAULT_DIM_CAP)]
    dim_cap: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
            Format::Text => ReportFormat::Text,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Eps,
    Alpha,
    Profile,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List { format } => list(format),
        Command::Run(args) => run(args),
        Command::Scheme(SchemeCommand::Eval(args)) => eval(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("qte-audit: {msg}");
            ExitCode::from(2)
        }
    }
}

fn list(format: Format) -> Result<ExitCode, String> {
    let audits = list_audits();
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&audits).map_err(|e| e.to_string())? + "\n",
        Format::Csv => {
            let mut s = String::from("id,tag,summary\n");
            for a in &audits {
                s += &format!("{},\"{}\",\"{}\"\n", a.id, a.tag, a.summary);
            }
            s
        }
        Format::Text => audits.iter().map(|a| format!("{:<4} {:<46} {}\n", a.id, a.tag, a.summary)).collect(),
    };
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn parse_params(raw: &[String], trials: Option<u64>) -> Result<BTreeMap<String, Value>, String> {
    let mut params = BTreeMap::new();
    for p in raw {
        let (name, value) = p.split_once('=').ok_or_else(|| format!("--param {p:?} is not NAME=VALUE"))?;
        let v = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
        params.insert(name.to_string(), v);
    }
    if let Some(t) = trials {
        params.insert("trials".to_string(), json!(t));
    }
    Ok(params)
}

fn run(args: RunArgs) -> Result<ExitCode, String> {
    let params = parse_params(&args.params, args.trials)?;
    let reports: Vec<AuditReport> = if args.case.eq_ignore_ascii_case("all") {
        run_all(args.seed, args.dim_cap, &params).map_err(|e| e.to_string())?
    } else {
        let case = AuditCase { id: args.case.clone(), params, seed: args.seed, dim_cap: args.dim_cap };
        vec![run_audit(&case).map_err(|e| e.to_string())?]
    };
    let bytes = emit_reports(&reports, args.format.into()).map_err(|e| e.to_string())?;
    match &args.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display()))?,
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string())?,
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.case.as_str()).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("qte-audit: failing cases: {}", failed.join(", "));
        Ok(ExitCode::from(1))
    }
}

fn eval(args: EvalArgs) -> Result<ExitCode, String> {
    let cap = args.dim_cap;
    let scheme = eval_scheme(&args.expr, cap).map_err(|e| e.to_string())?;
    let err = |e: qte::Error| e.to_string();
    let mut out = json!({ "expr": args.expr, "kind": scheme.kind() });
    match (args.metric, &scheme) {
        (Metric::Eps, SchemeValue::Aqecm(s)) => out["eps"] = json!(correctness_gap(s, cap).map_err(err)?.eps),
        (Metric::Eps, SchemeValue::Qecmr(s)) => {
            let c = correctness_gap_qecmr(s, cap).map_err(err)?;
            out["eps"] = json!(c.eps);
            out["eps_decode"] = json!(c.decode.eps);
            out["eps_revoke"] = json!(c.revoke.eps);
        }
        (Metric::Eps, SchemeValue::Qm(s)) => out["eps"] = json!(correctness_gap_qm(s).map_err(err)?.eps),
        (Metric::Alpha, SchemeValue::Aqecm(s)) => {
            let g = encryption_gap(s, cap).map_err(err)?;
            out["alpha"] = json!(g.alpha);
            out["worst_pair"] = json!([g.worst_pair.0, g.worst_pair.1]);
        }
        (Metric::Profile, SchemeValue::Aqecm(s)) => {
            let attack = eval_attack(&args.attack, s, cap).map_err(err)?;
            let p = tamper_profile(s, &attack, args.m0, args.m1, cap).map_err(err)?;
            out["attack"] = json!(args.attack);
            out["messages"] = json!([args.m0, args.m1]);
            out["distances"] = json!(p.distances);
            out["expectation"] = json!(p.expectation());
            out["max_distance"] = json!(p.max_distance());
            out["delta_lb"] = json!(p.delta_lb());
        }
        (metric, other) => {
            let name = match metric {
                Metric::Eps => "eps",
                Metric::Alpha => "alpha",
                Metric::Profile => "profile",
            };
            return Err(format!(
                "metric {name} is not defined for a {} scheme (attacks: {})",
                other.kind(),
                ATTACK_NAMES.join(", ")
            ));
        }
    }
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&out).map_err(|e| e.to_string())?,
        Format::Csv | Format::Text => out
            .as_object()
            .map(|o| o.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join("\n"))
            .unwrap_or_default(),
    };
    println!("{text}");
    Ok(ExitCode::SUCCESS)
}
