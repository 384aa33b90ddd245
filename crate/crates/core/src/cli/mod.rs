//! The `bioassay` command line.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 computational
//! failure. An inconsistent polyptych is a valid answer and exits 0.

mod input;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::birth_death::{
    empirical_hazard, first_passage, simulate_bd, BirthDeathSpec, Outcome,
};
use crate::curves::{self, CurveSpec, Grid};
use crate::efficiency::{classify, efficiency, omission_experiment, CorrelationPair};
use crate::error::{Error, Result};
use crate::estimation::{
    default_start, fit_least_squares, fit_logit, fit_quantal, weibull_mle, FitResult, LsOptions,
};
use crate::fisher::total_info;
use crate::lowdose::{percentile, vsd_upper_limit, PercentileQuery, RiskType};
use crate::models::{Family, Input, ModelDef, ModelId, ParamVector};
use crate::tables::{check_consistency, classify_empty, integer_witness, Polyptych};

pub use input::{parse_list, read_dataset, Dataset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bioassay", version, about = "Dose-response, growth and kinetic model toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a CSV data file.
    Fit {
        /// Data file; the header picks the schema.
        input: PathBuf,
        #[arg(long)]
        model: Option<String>,
        /// Starting values (comma-separated).
        #[arg(long)]
        theta: Option<String>,
        /// Fit the logit model without x2 even when the data has it.
        #[arg(long)]
        restricted: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Sample model curves on a grid.
    Curves {
        /// Model ids, comma-separated; several ids overlay on one grid.
        #[arg(long, conflicts_with = "figure")]
        model: Option<String>,
        /// A figure configuration, B.1 to B.12.
        #[arg(long)]
        figure: Option<String>,
        #[arg(long)]
        theta: Option<String>,
        /// `lo:hi:n`.
        #[arg(long, default_value = "0.01:10:500")]
        grid: String,
        /// Second input for two-input models.
        #[arg(long, default_value_t = 1.0)]
        u2: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Dose at which a dose-response CDF reaches risk p, with an optional
    /// lower confidence bound from a fit to quantal data.
    Lp {
        #[arg(long)]
        model: String,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        risk: Option<String>,
        #[arg(long)]
        confidence: Option<f64>,
        /// Quantal `dose,n,events` data to fit before computing the bound.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Relative efficiency of omitting a covariate.
    Eff {
        #[arg(long, allow_hyphen_values = true)]
        rho12: f64,
        #[arg(long, allow_hyphen_values = true)]
        rhoy21: f64,
        /// Also run a logistic omission experiment of this size.
        #[arg(long)]
        experiment_n: Option<usize>,
        /// `β₀,β₁,β₂` for the experiment.
        #[arg(long, default_value = "0,1,1", allow_hyphen_values = true)]
        beta: String,
        #[arg(long, env = "BIOASSAY_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Fisher information of a design.
    Fisher {
        #[arg(long)]
        model: String,
        #[arg(long)]
        theta: String,
        /// Design points, comma-separated (scalar-input models).
        #[arg(long, conflicts_with = "design", allow_hyphen_values = true)]
        points: Option<String>,
        /// Design CSV with header `u` or `u,u2`.
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Consistency of a polyptych given as JSON.
    Tables {
        input: PathBuf,
        /// Classify this universal cell (comma-separated codes).
        #[arg(long)]
        classify: Option<String>,
        /// Also search for an integer universal table.
        #[arg(long)]
        integer: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Linear birth-death simulation.
    SimulateBd {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 1)]
        i0: u64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, env = "BIOASSAY_SEED", default_value_t = 0)]
        seed: u64,
        /// Summarize this many replicates instead of printing one trajectory.
        #[arg(long)]
        replicates: Option<u64>,
        /// Clone size counted as onset; without it replicates record extinction.
        #[arg(long)]
        threshold: Option<u64>,
        /// Bin the replicate times into a hazard estimate.
        #[arg(long)]
        bins: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_COMPUTE
            }
        }
    }
}

fn emit(output: &Output, body: &str) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn emit_json(output: &Output, value: &serde_json::Value) -> Result<()> {
    if let Some(f) = output.format.filter(|f| *f != Format::Json) {
        return Err(Error::invalid(format!("this command only writes JSON, not {f:?}")));
    }
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(output, &s)
}

fn theta_for(model: &ModelDef, theta: Option<&str>) -> Result<Option<ParamVector>> {
    theta
        .map(|t| {
            let v = parse_list(t, "--theta")?;
            model.check_theta(&v)?;
            Ok(ParamVector(v))
        })
        .transpose()
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Fit {
            input,
            model,
            theta,
            restricted,
            output,
        } => cmd_fit(&input, model.as_deref(), theta.as_deref(), restricted, &output),
        Command::Curves {
            model,
            figure,
            theta,
            grid,
            u2,
            output,
        } => cmd_curves(model.as_deref(), figure.as_deref(), theta.as_deref(), &grid, u2, &output),
        Command::Lp {
            model,
            theta,
            p,
            risk,
            confidence,
            data,
            output,
        } => cmd_lp(
            &model,
            theta.as_deref(),
            p,
            risk.as_deref(),
            confidence,
            data.as_deref(),
            &output,
        ),
        Command::Eff {
            rho12,
            rhoy21,
            experiment_n,
            beta,
            seed,
            output,
        } => cmd_eff(rho12, rhoy21, experiment_n, &beta, seed, &output),
        Command::Fisher {
            model,
            theta,
            points,
            design,
            sigma2,
            output,
        } => cmd_fisher(&model, &theta, points.as_deref(), design.as_deref(), sigma2, &output),
        Command::Tables {
            input,
            classify,
            integer,
            output,
        } => cmd_tables(&input, classify.as_deref(), integer, &output),
        Command::SimulateBd {
            b,
            d,
            i0,
            t_end,
            seed,
            replicates,
            threshold,
            bins,
            output,
        } => {
            let spec = BirthDeathSpec {
                b,
                d,
                i0,
                t_end,
                seed,
            };
            cmd_simulate_bd(&spec, replicates, threshold, bins, &output)
        }
    }
}

fn fit_report(fit: &FitResult, extra: serde_json::Value) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(fit)?;
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    Ok(v)
}

fn cmd_fit(
    input: &Path,
    model: Option<&str>,
    theta: Option<&str>,
    restricted: bool,
    output: &Output,
) -> Result<i32> {
    let data = read_dataset(input)?;
    let model = model.map(ModelDef::lookup).transpose()?;
    let report = match data {
        Dataset::Survival(sample) => {
            if let Some(m) = model.filter(|m| m.id != ModelId::WeibullCdf) {
                return Err(Error::invalid(format!(
                    "survival data is fitted with weibull-cdf, not `{}`",
                    m.id_str
                )));
            }
            let fit = weibull_mle(&sample)?;
            let se = fit.standard_errors(&[0, 1]).ok();
            fit_report(&fit, json!({ "standard_errors": se }))?
        }
        Dataset::Quantal(data) => {
            let m = model.ok_or_else(|| Error::invalid("--model is required for quantal data"))?;
            if m.family != Family::DoseResponseCdf {
                return Err(Error::invalid(format!(
                    "`{}` is not a dose-response CDF",
                    m.id_str
                )));
            }
            let start = match theta_for(m, theta)? {
                Some(t) => t,
                None => default_start(m, &data, m.arity.min())?,
            };
            let fit = fit_quantal(m, &data, &start)?;
            let se = fit.standard_errors(&m.free_params(start.len())).ok();
            fit_report(&fit, json!({ "standard_errors": se }))?
        }
        Dataset::Regression(data) => {
            let m = model.ok_or_else(|| Error::invalid("--model is required for u,y data"))?;
            let start = match theta_for(m, theta)? {
                Some(t) => t,
                None => ParamVector::ones(m.arity.min()),
            };
            let fit = fit_least_squares(m, &data, &start, LsOptions::default())?;
            let se = fit.standard_errors(&m.free_params(start.len())).ok();
            fit_report(&fit, json!({ "standard_errors": se }))?
        }
        Dataset::Binary(data) => {
            let include_x2 = data.has_x2() && !restricted;
            let fit = fit_logit(&data, include_x2)?;
            let rr = crate::estimation::relative_risk(fit.beta()[1]);
            fit_report(
                &fit.fit,
                json!({ "standard_errors": fit.standard_errors, "relative_risk": rr }),
            )?
        }
        Dataset::Design(_) => {
            return Err(Error::invalid("the file has no response column to fit"));
        }
    };
    emit_json(output, &report)?;
    let converged = report["converged"].as_bool().unwrap_or(false);
    Ok(if converged { EXIT_OK } else { EXIT_COMPUTE })
}

fn cmd_curves(
    model: Option<&str>,
    figure: Option<&str>,
    theta: Option<&str>,
    grid: &str,
    u2: f64,
    output: &Output,
) -> Result<i32> {
    let grid: Grid = grid.parse()?;
    let (title, defs): (String, Vec<&'static ModelDef>) = match (model, figure) {
        (_, Some(f)) => {
            let fig = curves::figure(f)?;
            (
                format!("Figure {}: {}", fig.id, fig.title),
                fig.models.iter().map(|m| m.def()).collect(),
            )
        }
        (Some(list), None) => {
            let defs = list
                .split(',')
                .map(|s| ModelDef::lookup(s.trim()))
                .collect::<Result<Vec<_>>>()?;
            (list.to_string(), defs)
        }
        (None, None) => return Err(Error::invalid("give --model or --figure")),
    };
    if theta.is_some() && defs.len() > 1 {
        return Err(Error::invalid("--theta applies to a single model only"));
    }
    let specs = defs
        .iter()
        .map(|&m| {
            let mut spec = CurveSpec::unit(m);
            spec.u2 = u2;
            if let Some(t) = theta_for(m, theta)? {
                spec.theta = t;
            }
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let set = curves::sample(&specs, grid)?;
    for w in &set.warnings {
        eprintln!("warning: {w}");
    }
    let body = match output.format.unwrap_or(Format::Csv) {
        Format::Csv => set.to_csv(),
        Format::Svg => set.to_svg(&title),
        Format::Json => {
            let v = json!({ "u": set.u, "models": set.names, "values": set.values });
            let mut s = serde_json::to_string_pretty(&v)?;
            s.push('\n');
            s
        }
    };
    emit(output, &body)?;
    Ok(EXIT_OK)
}

fn cmd_lp(
    model: &str,
    theta: Option<&str>,
    p: f64,
    risk: Option<&str>,
    confidence: Option<f64>,
    data: Option<&Path>,
    output: &Output,
) -> Result<i32> {
    let m = ModelDef::lookup(model)?;
    let risk = risk.map(str::parse::<RiskType>).transpose()?;
    let given = theta_for(m, theta)?;
    let fit = match data {
        Some(path) => {
            let Dataset::Quantal(ds) = read_dataset(path)? else {
                return Err(Error::invalid("--data must be a dose,n,events file"));
            };
            let start = match &given {
                Some(t) => t.clone(),
                None => default_start(m, &ds, m.arity.min())?,
            };
            Some(fit_quantal(m, &ds, &start)?)
        }
        None => None,
    };
    let theta = match (&fit, given) {
        (Some(f), _) => f.theta_hat.clone(),
        (None, Some(t)) => t,
        (None, None) => return Err(Error::invalid("give --theta or --data")),
    };
    let query = PercentileQuery::new(m, theta, p, risk)?;
    let lp = percentile(&query)?;
    let (vsd, conf, method, bound) = match (confidence, &fit) {
        (Some(c), Some(f)) => {
            let r = vsd_upper_limit(&query, f, c)?;
            (Some(r.vsd), Some(c), Some(r.method), Some(r))
        }
        (Some(_), None) => {
            return Err(Error::invalid(
                "--confidence needs --data to estimate the parameter covariance",
            ))
        }
        (None, _) => (None, None, None, None),
    };
    let report = json!({
        "model": m.id_str,
        "theta": query.theta,
        "p": p,
        "risk_type": query.risk_type,
        "Lp": lp,
        "vsd": vsd,
        "confidence": conf,
        "method": method,
        "se": bound.map(|b| b.se),
        "clamped": bound.map(|b| b.clamped),
        "fit_converged": fit.as_ref().map(|f| f.converged),
    });
    emit_json(output, &report)?;
    Ok(match &fit {
        Some(f) if !f.converged => EXIT_COMPUTE,
        _ => EXIT_OK,
    })
}

fn cmd_eff(
    rho12: f64,
    rhoy21: f64,
    experiment_n: Option<usize>,
    beta: &str,
    seed: u64,
    output: &Output,
) -> Result<i32> {
    let pair = CorrelationPair::new(rho12, rhoy21)?;
    let mut report = json!({
        "rho12": rho12,
        "rhoY2_1": rhoy21,
        "eff": efficiency(pair),
        "class": classify(pair),
    });
    if let Some(n) = experiment_n {
        let b = parse_list(beta, "--beta")?;
        let b: [f64; 3] = b
            .try_into()
            .map_err(|_| Error::invalid("--beta needs exactly three values"))?;
        let r = omission_experiment(n, b, rho12, seed)?;
        report["experiment"] = serde_json::to_value(r)?;
        report["experiment"]["seed"] = json!(seed);
    }
    emit_json(output, &report)?;
    Ok(EXIT_OK)
}

fn cmd_fisher(
    model: &str,
    theta: &str,
    points: Option<&str>,
    design: Option<&Path>,
    sigma2: f64,
    output: &Output,
) -> Result<i32> {
    let m = ModelDef::lookup(model)?;
    let theta = theta_for(m, Some(theta))?.expect("theta given");
    let design: Vec<Input> = match (points, design) {
        (Some(list), None) => parse_list(list, "--points")?
            .into_iter()
            .map(Input::scalar)
            .collect(),
        (None, Some(path)) => match read_dataset(path)? {
            Dataset::Design(pts) => pts,
            Dataset::Regression(r) => r.inputs(),
            _ => return Err(Error::invalid("design file needs a `u` or `u,u2` header")),
        },
        _ => return Err(Error::invalid("give --points or --design")),
    };
    let info = total_info(m, &design, &theta, sigma2)?;
    let report = json!({
        "model": m.id_str,
        "theta": theta,
        "n": design.len(),
        "sigma2": sigma2,
        "info": info.to_rows(),
        "eigenvalues": info.eigenvalues(),
        "rank": info.rank(1e-10),
    });
    emit_json(output, &report)?;
    Ok(EXIT_OK)
}

fn cmd_tables(input: &Path, classify: Option<&str>, integer: bool, output: &Output) -> Result<i32> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| Error::Parse(format!("{}: {e}", input.display())))?;
    let p = Polyptych::from_json(&text).map_err(|e| match e {
        Error::Json(j) => Error::Parse(format!("{}: {j}", input.display())),
        other => other,
    })?;
    let verdict = check_consistency(&p)?;
    let mut report = serde_json::to_value(&verdict)?;
    if integer {
        let w = integer_witness(&p, 10_000_000)?;
        report["integer_witness"] = json!(w.map(|t| t.to_json()));
    }
    if let Some(codes) = classify {
        let codes: Vec<&str> = codes.split(',').map(str::trim).collect();
        if verdict.consistent {
            report["cell"] = json!(codes);
            report["class"] = serde_json::to_value(classify_empty(&p, &codes)?)?;
        } else {
            report["class"] = serde_json::Value::Null;
        }
    }
    emit_json(output, &report)?;
    Ok(EXIT_OK)
}

fn cmd_simulate_bd(
    spec: &BirthDeathSpec,
    replicates: Option<u64>,
    threshold: Option<u64>,
    bins: Option<usize>,
    output: &Output,
) -> Result<i32> {
    let format = output.format.unwrap_or(Format::Csv);
    if format == Format::Svg {
        return Err(Error::invalid("simulate-bd writes CSV or JSON"));
    }
    let Some(n) = replicates else {
        if bins.is_some() {
            return Err(Error::invalid("--bins needs --replicates"));
        }
        let tr = simulate_bd(spec)?;
        let body = match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&json!({
                    "spec": spec,
                    "outcome": tr.outcome,
                    "points": tr.points,
                }))?;
                s.push('\n');
                s
            }
            _ => {
                let mut s = String::from("t,population\n");
                for (t, i) in &tr.points {
                    s.push_str(&format!("{t},{i}\n"));
                }
                s
            }
        };
        emit(output, &body)?;
        return Ok(EXIT_OK);
    };
    if n == 0 {
        return Err(Error::invalid("--replicates must be positive"));
    }
    let outcomes = (0..n)
        .map(|i| first_passage(spec, i, threshold))
        .collect::<Result<Vec<_>>>()?;
    let observable = match threshold {
        Some(t) => format!("threshold {t}"),
        None => "extinction".to_string(),
    };
    let body = if let Some(bins) = bins {
        let obs: Vec<(f64, bool)> = outcomes
            .iter()
            .map(|o| (o.time, o.outcome != Outcome::Censored))
            .collect();
        let h = empirical_hazard(&obs, bins, None)?;
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(
                    &json!({ "spec": spec, "observable": observable, "bins": h }),
                )?;
                s.push('\n');
                s
            }
            _ => {
                let mut s = String::from("t_mid,events,exposure,hazard\n");
                for b in &h {
                    s.push_str(&format!("{},{},{},{}\n", b.t_mid, b.events, b.exposure, b.hazard));
                }
                s
            }
        }
    } else {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(
                    &json!({ "spec": spec, "observable": observable, "replicates": outcomes }),
                )?;
                s.push('\n');
                s
            }
            _ => {
                let mut s = String::from("replicate,outcome,time\n");
                for o in &outcomes {
                    s.push_str(&format!("{},{},{}\n", o.replicate, o.outcome, o.time));
                }
                s
            }
        }
    };
    emit(output, &body)?;
    Ok(EXIT_OK)
}
