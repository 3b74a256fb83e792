//! Command-line front end. [`run`] is the whole program minus process I/O,
//! so it can be driven from tests.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nestfn::data_io::{
    fit_document, parse_panel_csv, synth_panel, write_panel_csv, write_report_json, CsvError,
    FitReport, Panel, ReportDocument, ReportKind, SynthError, SynthSpec,
};
use nestfn::diagnostics::{
    classify_curvature, homogeneity_degree, run_all, Curvature, DiagnosticsError, ScanConfig,
};
use nestfn::estimation::{fit, EstimationError, FitConfig};
use nestfn::model::{
    audit_published_formulas, classify_special_case, elasticity_k, elasticity_l, eval_v, gradient,
    hessian, reduced_eval, substitution_elasticity, DEFAULT_TOL,
};
use nestfn::{InputPoint, ModelError, Parameters};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_BREAKDOWN: i32 = 5;

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl CommandOutcome {
    fn ok(stdout: Vec<u8>) -> Self {
        Self {
            exit_code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(exit_code: i32, stderr: String) -> Self {
        Self {
            exit_code,
            stdout: Vec::new(),
            stderr,
        }
    }

    pub fn stdout_text(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }
}

/// Settings taken from the process environment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Environment {
    /// `NESTFN_STRICT=1`: sigma and delta in `[0, 1]`, `|p|, |q| <= 1`.
    pub strict: bool,
}

impl Environment {
    pub fn from_process() -> Self {
        Self {
            strict: std::env::var("NESTFN_STRICT").is_ok_and(|v| v == "1"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nestfn",
    version,
    about = "Evaluate, audit and fit the nested K/L production function"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Output V at one input bundle.
    #[command(allow_negative_numbers = true)]
    Eval(PointArgs),
    /// Analytic marginal products.
    #[command(allow_negative_numbers = true)]
    Grad(PointArgs),
    /// Output elasticities, substitution elasticity and local returns to scale.
    #[command(allow_negative_numbers = true)]
    Elasticity(PointArgs),
    /// Hessian, its eigenvalues and curvature class.
    #[command(allow_negative_numbers = true)]
    Hessian(PointArgs),
    /// Special-case classification and the reduced closed form.
    #[command(allow_negative_numbers = true)]
    Reduce(PointArgs),
    /// Published closed forms against computed values.
    #[command(allow_negative_numbers = true)]
    Audit(PointArgs),
    /// Positivity, homogeneity, curvature and monotonicity scans over a region.
    #[command(allow_negative_numbers = true)]
    Diagnose(DiagnoseArgs),
    /// Synthetic panel with known parameters.
    #[command(allow_negative_numbers = true)]
    Synth(SynthArgs),
    /// Multistart least-squares fit of a panel.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long = "A")]
    a: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// JSON object with keys A, sigma, delta, p, q; explicit flags take precedence.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long = "K", default_value_t = 1.0)]
    k: f64,
    #[arg(long = "L", default_value_t = 1.0)]
    l: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    kmin: f64,
    #[arg(long)]
    kmax: f64,
    #[arg(long)]
    lmin: f64,
    #[arg(long)]
    lmax: f64,
    #[arg(long)]
    grid: usize,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// Space grid nodes evenly in K, L instead of in ln K, ln L.
    #[arg(long)]
    linear: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    noise: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    kmin: Option<f64>,
    #[arg(long)]
    kmax: Option<f64>,
    #[arg(long)]
    lmin: Option<f64>,
    #[arg(long)]
    lmax: Option<f64>,
    #[arg(long, default_value = "SYN")]
    industry: String,
    /// Write the CSV here; without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Panel CSV; `-` reads standard input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    industry: Option<String>,
    #[arg(long)]
    starts: usize,
    #[arg(long)]
    seed: u64,
    /// JSON parameter object used as an extra start.
    #[arg(long)]
    user_start: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::InvalidParameter { .. } | ModelError::FormMismatch { .. } => EXIT_USAGE,
            ModelError::Domain { .. }
            | ModelError::NonPositiveBracket { .. }
            | ModelError::ZeroMarginalProduct { .. } => EXIT_DOMAIN,
            ModelError::NumericalBreakdown(_) => EXIT_BREAKDOWN,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CsvError> for Failure {
    fn from(e: CsvError) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<DiagnosticsError> for Failure {
    fn from(e: DiagnosticsError) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        let code = match e {
            SynthError::InvalidSpec(_) => EXIT_USAGE,
            SynthError::UnsatisfiableRegion { .. } => EXIT_DOMAIN,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EstimationError> for Failure {
    fn from(e: EstimationError) -> Self {
        let code = match &e {
            EstimationError::TooFewObservations { .. } | EstimationError::InvalidConfig(_) => {
                EXIT_USAGE
            }
            EstimationError::Row { source, .. } => Failure::from(source.clone()).code,
            EstimationError::AllStartsFailed => EXIT_BREAKDOWN,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<nestfn::data_io::ReportError> for Failure {
    fn from(e: nestfn::data_io::ReportError) -> Self {
        Self {
            code: EXIT_BREAKDOWN,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<CommandOutcome, Failure>;

/// Runs one command line (`argv[0]` is the program name) with the process
/// environment.
pub fn run<I, S>(argv: I, stdin: &mut dyn Read) -> CommandOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, stdin, Environment::from_process())
}

pub fn run_with<I, S>(argv: I, stdin: &mut dyn Read, env: Environment) -> CommandOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome::fail(EXIT_USAGE, text)
            } else {
                CommandOutcome::ok(text.into_bytes())
            };
        }
    };
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(a, env),
        Command::Grad(a) => cmd_grad(a, env),
        Command::Elasticity(a) => cmd_elasticity(a, env),
        Command::Hessian(a) => cmd_hessian(a, env),
        Command::Reduce(a) => cmd_reduce(a, env),
        Command::Audit(a) => cmd_audit(a, env),
        Command::Diagnose(a) => cmd_diagnose(a, env),
        Command::Synth(a) => cmd_synth(a, env),
        Command::Fit(a) => cmd_fit(a, stdin, env),
    };
    result.unwrap_or_else(|f| CommandOutcome::fail(f.code, format!("error: {}\n", f.message)))
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn parse_params_file(path: &Path, strict: bool) -> Result<Parameters, Failure> {
    let value: serde_json::Value = serde_json::from_slice(&read_file(path)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let field = |name: &str| {
        value
            .get(name)
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| {
                Failure::usage(format!(
                    "{}: missing numeric field {name:?}",
                    path.display()
                ))
            })
    };
    Ok(Parameters::with_mode(
        field("A")?,
        field("sigma")?,
        field("delta")?,
        field("p")?,
        field("q")?,
        strict,
    )?)
}

fn resolve_params(args: &ParamArgs, env: Environment) -> Result<Parameters, Failure> {
    let base = match &args.params {
        Some(path) => Some(parse_params_file(path, false)?),
        None => None,
    };
    let pick = |flag: Option<f64>, name: &str, from_file: Option<f64>| {
        flag.or(from_file)
            .ok_or_else(|| Failure::usage(format!("missing --{name} (or --params file.json)")))
    };
    Ok(Parameters::with_mode(
        pick(args.a, "A", base.map(|b| b.a()))?,
        pick(args.sigma, "sigma", base.map(|b| b.sigma()))?,
        pick(args.delta, "delta", base.map(|b| b.delta()))?,
        pick(args.p, "p", base.map(|b| b.p()))?,
        pick(args.q, "q", base.map(|b| b.q()))?,
        env.strict,
    )?)
}

fn resolve_point(args: &PointArgs, env: Environment) -> Result<(Parameters, InputPoint), Failure> {
    Ok((
        resolve_params(&args.params, env)?,
        InputPoint::new(args.k, args.l)?,
    ))
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn json_outcome<T: Serialize>(kind: ReportKind, payload: &T, nonfinite: &[String]) -> CmdResult {
    let doc = ReportDocument::new(kind, payload, nonfinite)?;
    Ok(CommandOutcome::ok(write_report_json(&doc)))
}

fn text_outcome(text: String) -> CmdResult {
    Ok(CommandOutcome::ok(text.into_bytes()))
}

#[derive(Serialize)]
struct EvalPayload {
    params: Parameters,
    point: InputPoint,
    #[serde(rename = "V")]
    v: f64,
    h_value: f64,
    ratio_term: f64,
    bracket: f64,
}

fn cmd_eval(args: PointArgs, env: Environment) -> CmdResult {
    let (params, point) = resolve_point(&args, env)?;
    let e = eval_v(&params, &point)?;
    if args.json {
        let payload = EvalPayload {
            params,
            point,
            v: e.v,
            h_value: e.h_value,
            ratio_term: e.ratio_term,
            bracket: e.bracket,
        };
        json_outcome(ReportKind::Eval, &payload, &[])
    } else {
        text_outcome(format!("{}\n", e.v))
    }
}

#[derive(Serialize)]
struct GradientPayload {
    params: Parameters,
    point: InputPoint,
    #[serde(rename = "dV_dK")]
    dv_dk: f64,
    #[serde(rename = "dV_dL")]
    dv_dl: f64,
}

fn cmd_grad(args: PointArgs, env: Environment) -> CmdResult {
    let (params, point) = resolve_point(&args, env)?;
    let g = gradient(&params, &point)?;
    if args.json {
        json_outcome(
            ReportKind::Gradient,
            &GradientPayload {
                params,
                point,
                dv_dk: g.dv_dk,
                dv_dl: g.dv_dl,
            },
            &[],
        )
    } else {
        text_outcome(format!("dV/dK\t{}\ndV/dL\t{}\n", g.dv_dk, g.dv_dl))
    }
}

#[derive(Serialize)]
struct ElasticityPayload {
    params: Parameters,
    point: InputPoint,
    eps_k: f64,
    eps_l: f64,
    /// `eps_K + eps_L`.
    returns_to_scale: f64,
    ray_degree: f64,
    substitution_elasticity: Option<f64>,
    substitution_degenerate: bool,
}

fn cmd_elasticity(args: PointArgs, env: Environment) -> CmdResult {
    let (params, point) = resolve_point(&args, env)?;
    let eps_k = elasticity_k(&params, &point)?;
    let eps_l = elasticity_l(&params, &point)?;
    let ray_degree = homogeneity_degree(&params, &point)?;
    // A vanishing marginal product leaves the MRTS undefined but the other
    // quantities meaningful, so only that error is absorbed here.
    let subst = match substitution_elasticity(&params, &point) {
        Ok(s) => Some(s),
        Err(ModelError::ZeroMarginalProduct { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let degenerate = subst.is_none_or(|s| s.degenerate);
    let sub_value = subst.and_then(|s| finite(s.value)).filter(|_| !degenerate);
    if args.json {
        let nonfinite = if sub_value.is_none() {
            vec!["substitution_elasticity".to_string()]
        } else {
            Vec::new()
        };
        let payload = ElasticityPayload {
            params,
            point,
            eps_k,
            eps_l,
            returns_to_scale: eps_k + eps_l,
            ray_degree,
            substitution_elasticity: sub_value,
            substitution_degenerate: degenerate,
        };
        json_outcome(ReportKind::Elasticity, &payload, &nonfinite)
    } else {
        let sub = sub_value.map_or("undefined".to_string(), |v| v.to_string());
        text_outcome(format!(
            "eps_K\t{eps_k}\neps_L\t{eps_l}\nreturns_to_scale\t{}\nray_degree\t{ray_degree}\nsubstitution_elasticity\t{sub}\n",
            eps_k + eps_l
        ))
    }
}

#[derive(Serialize)]
struct HessianPayload {
    params: Parameters,
    point: InputPoint,
    hkk: f64,
    hkl: f64,
    hlk: f64,
    hll: f64,
    eig1: f64,
    eig2: f64,
    curvature: Curvature,
}

fn cmd_hessian(args: PointArgs, env: Environment) -> CmdResult {
    let (params, point) = resolve_point(&args, env)?;
    let h = hessian(&params, &point)?;
    let curvature = classify_curvature(&h, 1e-6 * h.max_abs());
    if args.json {
        let payload = HessianPayload {
            params,
            point,
            hkk: h.hkk,
            hkl: h.hkl,
            hlk: h.hlk,
            hll: h.hll,
            eig1: h.eig1,
            eig2: h.eig2,
            curvature,
        };
        json_outcome(ReportKind::Hessian, &payload, &[])
    } else {
        text_outcome(format!(
            "[[{}, {}],\n [{}, {}]]\neigenvalues\t{}\t{}\ncurvature\t{curvature:?}\n",
            h.hkk, h.hkl, h.hlk, h.hll, h.eig1, h.eig2
        ))
    }
}

#[derive(Serialize)]
struct ReducePayload {
    params: Parameters,
    point: InputPoint,
    form: &'static str,
    tolerance_used: f64,
    reduced_value: f64,
    general_value: f64,
}

fn cmd_reduce(args: PointArgs, env: Environment) -> CmdResult {
    let (params, point) = resolve_point(&args, env)?;
    let form = classify_special_case(&params, DEFAULT_TOL);
    let reduced_value = reduced_eval(&params, &point, &form)?;
    let general_value = eval_v(&params, &point)?.v;
    if args.json {
        let payload = ReducePayload {
            params,
            point,
            form: form.tag.name(),
            tolerance_used: form.tolerance_used,
            reduced_value,
            general_value,
        };
        json_outcome(ReportKind::Reduce, &payload, &[])
    } else {
        text_outcome(format!(
            "form\t{}\nreduced_value\t{reduced_value}\ngeneral_value\t{general_value}\n",
            form.tag.name()
        ))
    }
}

fn cmd_audit(args: PointArgs, env: Environment) -> CmdResult {
    let (params, point) = resolve_point(&args, env)?;
    let record = audit_published_formulas(&params, &point);
    if args.json {
        return Ok(CommandOutcome::ok(write_report_json(
            &ReportDocument::audit(&record)?,
        )));
    }
    let cell = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.6}"));
    let mut out = String::from("formula\tpublished\tcomputed\tabs_deviation\n");
    for (id, e) in &record.entries {
        out.push_str(&format!(
            "{id}\t{}\t{}\t{}\n",
            cell(e.published_value),
            cell(e.computed_value),
            cell(e.abs_deviation)
        ));
    }
    text_outcome(out)
}

fn cmd_diagnose(args: DiagnoseArgs, env: Environment) -> CmdResult {
    let params = resolve_params(&args.params, env)?;
    let mut cfg = ScanConfig::new(
        (args.kmin, args.kmax),
        (args.lmin, args.lmax),
        args.grid,
        args.samples,
        args.seed,
    );
    cfg.log_spacing = !args.linear;
    let report = run_all(&params, &cfg)?;
    if args.json {
        return Ok(CommandOutcome::ok(write_report_json(
            &ReportDocument::diagnostics(&report)?,
        )));
    }
    let num = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
    let h = &report.homogeneity;
    let c = &report.concavity;
    let m = &report.monotonicity;
    let pos = &report.positivity;
    text_outcome(format!(
        "positivity\t{} draws, {} violations ({} domain errors)\n\
         homogeneity\tdegree in [{}, {}], homogeneous={}, degree_one={}\n\
         concavity\t{}/{} negative semidefinite, {} breakdowns, max eigenvalue {}\n\
         monotonicity\tdV/dK>0 share {}, dV/dL>0 share {}\n\
         euler_identity_max_abs_err\t{}\n",
        pos.checked,
        pos.violations,
        pos.domain_errors,
        num(h.degree_min),
        num(h.degree_max),
        h.is_homogeneous,
        h.claimed_degree_one,
        c.negative_semidefinite_count,
        c.points_checked,
        c.breakdowns,
        num(c.max_eig_over_region),
        num(m.share_dvdk_positive),
        num(m.share_dvdl_positive),
        num(report.euler_identity_max_abs_err),
    ))
}

#[derive(Serialize)]
struct SynthPayload<'a> {
    true_params: Parameters,
    n: usize,
    noise_sd: f64,
    seed: u64,
    k_range: (f64, f64),
    l_range: (f64, f64),
    industry_code: &'a str,
    observations: &'a [nestfn::data_io::Observation],
}

fn cmd_synth(args: SynthArgs, env: Environment) -> CmdResult {
    let params = resolve_params(&args.params, env)?;
    let mut spec = SynthSpec::new(params, args.n, args.noise, args.seed);
    spec.k_range = (
        args.kmin.unwrap_or(spec.k_range.0),
        args.kmax.unwrap_or(spec.k_range.1),
    );
    spec.l_range = (
        args.lmin.unwrap_or(spec.l_range.0),
        args.lmax.unwrap_or(spec.l_range.1),
    );
    spec.industry_code = args.industry.clone();
    let panel = synth_panel(&spec)?;
    let csv = write_panel_csv(&panel);
    if let Some(path) = &args.out {
        write_file(path, &csv)?;
    }
    if args.json {
        let payload = SynthPayload {
            true_params: params,
            n: spec.n,
            noise_sd: spec.noise_sd,
            seed: spec.seed,
            k_range: spec.k_range,
            l_range: spec.l_range,
            industry_code: &spec.industry_code,
            observations: &panel.observations,
        };
        json_outcome(ReportKind::Synth, &payload, &[])
    } else if args.out.is_some() {
        Ok(CommandOutcome::ok(Vec::new()))
    } else {
        Ok(CommandOutcome::ok(csv))
    }
}

fn load_panel(input: &Path, stdin: &mut dyn Read) -> Result<Panel, Failure> {
    if input == Path::new("-") {
        let mut bytes = Vec::new();
        stdin
            .read_to_end(&mut bytes)
            .map_err(|e| Failure::usage(format!("cannot read stdin: {e}")))?;
        let mut panel = parse_panel_csv(&bytes)?;
        panel.source_label = "<stdin>".into();
        Ok(panel)
    } else {
        let mut panel = parse_panel_csv(&read_file(input)?)?;
        panel.source_label = input.display().to_string();
        Ok(panel)
    }
}

fn cmd_fit(args: FitArgs, stdin: &mut dyn Read, env: Environment) -> CmdResult {
    let mut panel = load_panel(&args.input, stdin)?;
    if let Some(code) = &args.industry {
        panel = panel.filter_industry(code);
    }
    let industry = match &args.industry {
        Some(code) => code.clone(),
        None => {
            let mut codes: Vec<&str> = panel
                .observations
                .iter()
                .map(|o| o.industry_code.as_str())
                .collect();
            codes.dedup();
            codes.sort_unstable();
            codes.dedup();
            codes.join("+")
        }
    };
    let mut cfg = FitConfig::new(args.starts, args.seed);
    if env.strict {
        cfg.bounds.sigma = (0.0, 1.0);
        cfg.bounds.delta = (0.0, 1.0);
    }
    if let Some(path) = &args.user_start {
        cfg = cfg.with_user_start(parse_params_file(path, env.strict)?);
    }
    let result = fit(&panel, &cfg)?;
    let doc = fit_document(&result, &industry, args.seed)?;
    let json = write_report_json(&doc);
    if let Some(path) = &args.out {
        write_file(path, &json)?;
    }
    let stdout = if args.json {
        json
    } else {
        let (report, _) = FitReport::from_result(&result, &industry, args.seed);
        format!(
            "Industry Code: {industry}\n{}\n{}\n",
            FitReport::TABLE_HEADER,
            report.table_row()
        )
        .into_bytes()
    };
    let mut outcome = CommandOutcome::ok(stdout);
    if !result.converged {
        outcome.exit_code = EXIT_NOT_CONVERGED;
        outcome.stderr = "warning: best start did not converge\n".into();
    }
    Ok(outcome)
}
